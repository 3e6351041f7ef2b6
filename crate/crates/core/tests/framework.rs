use ldc_forge::bits::Probe;
use ldc_forge::framework::{FinalParams, Scheme};
use ldc_forge::privldc::dec_priv;
use ldc_forge::rom::OracleHandle;
use ldc_forge::safefn::delta_hash_iterate;
use ldc_forge::seeds;
use rand::seq::index::sample;
use rand::Rng;

fn default_scheme() -> Scheme {
    Scheme::new(FinalParams::default()).unwrap()
}

#[test]
fn default_sizes() {
    let s = default_scheme();
    assert_eq!(s.head_bits(), 64 * 120);
    assert_eq!(s.codeword_bits(), 64 * 120 + 32 * 252);
    let k = s.head_bits() as u64;
    let draws: u64 = (1..k).map(|j| u64::from(j.ilog2() + 1)).sum();
    assert_eq!(s.tau(), (2 * draws + k).div_ceil(64));
    let c = s.summary();
    assert_eq!(c.locality, 120 + 96 * 252);
    // Seed side: 14 of 252 bits per block, over four, across 32 blocks.
    let seed_flips: f64 = 14.0 / 252.0 / 4.0 * 8064.0;
    let private_flips = 0.015 * 7680.0;
    assert!((c.rho - seed_flips.min(private_flips) / 15744.0).abs() < 1e-15);
    assert_eq!(s.flip_budget(), 112);
    assert_eq!(c.delta, delta_hash_iterate(256, 1 << 20, 64));
    assert_eq!(c.eps_upper, c.eps_priv + c.q * c.delta);
}

#[test]
fn same_seeds_same_codeword() {
    let s = default_scheme();
    let msg: Vec<bool> = (0..1024).map(|i| i % 7 == 1).collect();
    let enc = |oracle_seed: u8| {
        let mut oracle = OracleHandle::new([oracle_seed; 32], 64);
        s.enc(&mut oracle, &msg, &mut seeds::rng(&[1; 32], "encode", 0)).unwrap()
    };
    assert_eq!(enc(3), enc(3));
    let (a, b) = (enc(3), enc(4));
    assert_eq!(a[s.head_bits()..], b[s.head_bits()..]);
    assert_ne!(a[..s.head_bits()], b[..s.head_bits()]);
}

#[test]
fn head_corruption_behaves_like_the_private_code() {
    let s = default_scheme();
    let mut oracle = OracleHandle::new([5; 32], 64).without_ledger();
    let mut rng = seeds::rng(&[2; 32], "t", 0);
    let msg: Vec<bool> = (0..1024).map(|_| rng.gen()).collect();
    let pre = s.precompute(&mut oracle, &mut rng).unwrap();
    let mut cw = s.enc_precomputed(&pre, &msg).unwrap();
    for p in sample(&mut rng, s.head_bits(), 100) {
        cw[p] = !cw[p];
    }
    let p = &s.params().private;
    for i in (0..1024).step_by(37) {
        let full = s.dec(&mut oracle, i, &mut Probe::new(&cw), &mut rng).unwrap();
        let private = dec_priv(p, s.block_code(), i, &mut Probe::new(&cw[..s.head_bits()]), &pre.key).unwrap();
        assert_eq!(full, private);
    }
}

#[test]
fn success_rate_under_random_corruption_meets_the_bound() {
    let s = default_scheme();
    let budget = s.flip_budget();
    let master = seeds::master_from_u64(99);
    let trials = 1000;
    let mut ok = 0;
    for t in 0..trials {
        let mut oracle = OracleHandle::derive(&master, t, 64).without_ledger();
        let mut rng = seeds::rng(&master, "trial", t);
        let msg: Vec<bool> = (0..1024).map(|_| rng.gen()).collect();
        let mut cw = s.enc(&mut oracle, &msg, &mut rng).unwrap();
        for p in sample(&mut rng, cw.len(), budget) {
            cw[p] = !cw[p];
        }
        let i = rng.gen_range(0..1024);
        if s.dec(&mut oracle, i, &mut Probe::new(&cw), &mut rng).ok() == Some(msg[i]) {
            ok += 1;
        }
    }
    let rate = ok as f64 / trials as f64;
    assert!(rate >= s.summary().p_lower_per_index, "{rate}");
}
