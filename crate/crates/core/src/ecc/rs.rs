//! Reed-Solomon codes in evaluation form. Codeword symbol `j` is the message
//! polynomial evaluated at the field element `j + 1`. Decoding follows Gao's
//! interpolation/partial-Euclid method and accepts erasures.

use super::gf::Field;
use super::EccError;

type Poly = Vec<u16>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn deg(p: &[u16]) -> isize {
    p.len() as isize - 1
}

fn poly_add(a: &[u16], b: &[u16]) -> Poly {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] ^= c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] ^= c;
    }
    trim(out)
}

fn poly_mul(f: &Field, a: &[u16], b: &[u16]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= f.mul(x, y);
        }
    }
    trim(out)
}

/// Quotient and remainder; `b` must be nonzero.
fn poly_divmod(f: &Field, a: &[u16], b: &[u16]) -> (Poly, Poly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lead_inv = f.inv(*b.last().unwrap());
    let mut quot = vec![0; rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = f.mul(*rem.last().unwrap(), lead_inv);
        quot[shift] = c;
        for (i, &bc) in b.iter().enumerate() {
            rem[shift + i] ^= f.mul(c, bc);
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn eval(f: &Field, p: &[u16], x: u16) -> u16 {
    p.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
}

#[derive(Clone, Debug)]
pub struct ReedSolomon {
    field: Field,
    n: usize,
    k: usize,
}

impl ReedSolomon {
    pub fn new(field: Field, n: usize, k: usize) -> Result<Self, EccError> {
        if k == 0 || k > n || n >= field.size() {
            return Err(EccError::BadParams(format!(
                "need 1 <= k <= n < 2^m, got n = {n}, k = {k}, m = {}",
                field.degree()
            )));
        }
        Ok(ReedSolomon { field, n, k })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Evaluation point of codeword position `j`.
    pub fn point(&self, j: usize) -> u16 {
        (j + 1) as u16
    }

    pub fn encode(&self, msg: &[u16]) -> Result<Vec<u16>, EccError> {
        if msg.len() != self.k {
            return Err(EccError::Length { expected: self.k, got: msg.len() });
        }
        Ok((0..self.n).map(|j| eval(&self.field, msg, self.point(j))).collect())
    }

    /// Errors-and-erasures decoding; `None` marks an erasure. Succeeds whenever
    /// `2 * errors + erasures <= n - k`.
    pub fn decode(&self, received: &[Option<u16>]) -> Result<Vec<u16>, EccError> {
        if received.len() != self.n {
            return Err(EccError::Length { expected: self.n, got: received.len() });
        }
        let f = &self.field;
        let known: Vec<(u16, u16)> = received
            .iter()
            .enumerate()
            .filter_map(|(j, s)| s.map(|v| (self.point(j), v)))
            .collect();
        let n = known.len();
        if n < self.k {
            return Err(EccError::DecodeFailure);
        }

        let mut g0: Poly = vec![1];
        for &(a, _) in &known {
            g0 = poly_mul(f, &g0, &[a, 1]);
        }
        let mut g1: Poly = Vec::new();
        for &(a, v) in &known {
            if v == 0 {
                continue;
            }
            let (basis, _) = poly_divmod(f, &g0, &[a, 1]);
            let scale = f.div(v, eval(f, &basis, a));
            let term: Poly = basis.iter().map(|&c| f.mul(c, scale)).collect();
            g1 = poly_add(&g1, &term);
        }

        let stop = ((n + self.k) / 2) as isize + ((n + self.k) % 2) as isize;
        let (mut r_prev, mut r) = (g0, g1);
        let (mut v_prev, mut v): (Poly, Poly) = (Vec::new(), vec![1]);
        while deg(&r) >= stop {
            let (q, rem) = poly_divmod(f, &r_prev, &r);
            let v_next = poly_add(&v_prev, &poly_mul(f, &q, &v));
            r_prev = std::mem::replace(&mut r, rem);
            v_prev = std::mem::replace(&mut v, v_next);
        }
        let (msg, rem) = poly_divmod(f, &r, &v);
        if !rem.is_empty() || msg.len() > self.k {
            return Err(EccError::DecodeFailure);
        }
        let mut msg = msg;
        msg.resize(self.k, 0);
        let mismatches = known.iter().filter(|&&(a, val)| eval(f, &msg, a) != val).count();
        if 2 * mismatches > n - self.k {
            return Err(EccError::DecodeFailure);
        }
        Ok(msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rs(m: u32, n: usize, k: usize) -> ReedSolomon {
        ReedSolomon::new(Field::new(m).unwrap(), n, k).unwrap()
    }

    #[test]
    fn single_symbol_message_gives_constant_codeword() {
        let code = rs(4, 15, 1);
        assert_eq!(code.encode(&[9]).unwrap(), vec![9; 15]);
    }

    #[test]
    fn clean_codewords_decode() {
        let code = rs(5, 20, 7);
        let msg: Vec<u16> = (0..7).map(|i| (i * 3 + 1) as u16).collect();
        let cw: Vec<Option<u16>> = code.encode(&msg).unwrap().into_iter().map(Some).collect();
        assert_eq!(code.decode(&cw).unwrap(), msg);
    }

    #[test]
    fn corrects_errors_and_erasures_within_radius() {
        let code = rs(6, 40, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let msg: Vec<u16> = (0..12).map(|_| rng.gen_range(0..64)).collect();
            let mut word: Vec<Option<u16>> = code.encode(&msg).unwrap().into_iter().map(Some).collect();
            let erasures = rng.gen_range(0..=28);
            let errors = (28 - erasures) / 2;
            let mut positions: Vec<usize> = (0..40).collect();
            for i in 0..erasures + errors {
                let j = rng.gen_range(i..40);
                positions.swap(i, j);
            }
            for &p in &positions[..erasures] {
                word[p] = None;
            }
            for &p in &positions[erasures..erasures + errors] {
                word[p] = Some(word[p].unwrap() ^ rng.gen_range(1..64));
            }
            assert_eq!(code.decode(&word).unwrap(), msg);
        }
    }

    #[test]
    fn too_many_erasures_fail() {
        let code = rs(3, 7, 3);
        let word = [None, None, None, None, None, Some(1), Some(2)];
        assert!(matches!(code.decode(&word), Err(EccError::DecodeFailure)));
    }

    #[test]
    fn length_is_checked() {
        let code = rs(3, 7, 3);
        assert!(code.encode(&[1, 2]).is_err());
        assert!(code.decode(&[Some(1); 6]).is_err());
    }
}
