//! Small exact-probability helpers.

/// `ln(n!)` for `n` up to a fixed bound, built once per call site.
pub struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut t = Vec::with_capacity(max + 1);
        t.push(0.0);
        for i in 1..=max {
            t.push(t[i - 1] + (i as f64).ln());
        }
        LnFactorial(t)
    }

    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// Probability that a uniformly random `draws`-subset of a `population`
/// hits exactly `hits` of a fixed `marked`-subset.
pub fn hypergeometric_pmf(lf: &LnFactorial, population: usize, marked: usize, draws: usize, hits: usize) -> f64 {
    if hits > marked || hits > draws || draws - hits > population - marked {
        return 0.0;
    }
    (lf.ln_choose(marked, hits) + lf.ln_choose(population - marked, draws - hits) - lf.ln_choose(population, draws)).exp()
}

/// One-sided Hoeffding radius for a mean of `n` samples in [0, 1] at
/// confidence `1 - delta`.
pub fn hoeffding_radius(n: usize, delta: f64) -> f64 {
    ((1.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypergeometric_sums_to_one() {
        let lf = LnFactorial::new(200);
        let total: f64 = (0..=20).map(|h| hypergeometric_pmf(&lf, 200, 30, 20, h)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((hypergeometric_pmf(&lf, 4, 2, 2, 2) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_shrinks_with_samples() {
        assert!(hoeffding_radius(100, 1e-3) > hoeffding_radius(1000, 1e-3));
        assert!((hoeffding_radius(2, (-4.0f64).exp()) - 1.0).abs() < 1e-12);
    }
}
