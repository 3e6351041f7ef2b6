//! The composed code: a private code whose key is derived, through a safe
//! function and expansion, from a short seed that travels alongside it in
//! a repetition code anyone can decode.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{self, Probe};
use crate::ecc::{EccError, Justesen, JustesenParams};
use crate::ldcstar::{dec_jrep, enc_jrep, DecodedBlocks, JrepError, JrepParams};
use crate::privldc::{
    block_failure_curve, dec_priv, enc_priv, eps_ops_bound, genkey_priv, scramble_bound_upto, BitSource, OpsBound,
    PrivError, PrivParams, SecretKey,
};
use crate::rom::OracleHandle;
use crate::safefn::{delta_hash_iterate, Expander, SafeFn, SafeFnError, SafeFnKind, SafeFnSpec};

#[derive(Debug, thiserror::Error)]
pub enum FrameworkError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("message has {got} bits, expected {expected}")]
    MessageLength { expected: usize, got: usize },
    #[error("codeword has {got} bits, expected {expected}")]
    CodewordLength { expected: usize, got: usize },
    #[error("seed decoding failed: {0}")]
    Seed(#[from] JrepError),
    #[error(transparent)]
    Private(#[from] PrivError),
    #[error(transparent)]
    SafeFn(#[from] SafeFnError),
    #[error(transparent)]
    Code(#[from] EccError),
}

/// Fields missing from a config take their default values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FinalParams {
    pub kappa: u64,
    /// Oracle output width in bits.
    pub w: usize,
    pub private: PrivParams,
    pub jrep: JrepParams,
    pub safefn: SafeFnKind,
    /// Oracle queries allowed to the channel when quoting security.
    pub q: u64,
}

impl Default for FinalParams {
    /// Message of 1024 bits at `kappa = 4096`, `w = 64`.
    fn default() -> Self {
        FinalParams {
            kappa: 4096,
            w: 64,
            private: PrivParams {
                k_priv: 1024,
                block: JustesenParams::new(4, 15, 4),
                rho: 0.015,
            },
            jrep: JrepParams {
                justesen: JustesenParams::new(6, 21, 7),
                n_rep: 32,
                alpha: 96,
            },
            safefn: SafeFnKind::HashIterate { t: 256 },
            q: 1 << 20,
        }
    }
}

impl FinalParams {
    /// Expansion blocks needed to feed key generation.
    pub fn tau(&self) -> u64 {
        self.private.randomness_bits().div_ceil(self.w) as u64
    }
}

/// Bits of `E_tau(seed)`, produced block by block as key generation asks.
pub struct ExpandStream<'a> {
    oracle: &'a mut OracleHandle,
    expander: Expander,
    seed: Vec<u8>,
    next_block: u64,
    buf: Vec<bool>,
    pos: usize,
}

impl<'a> ExpandStream<'a> {
    pub fn new(oracle: &'a mut OracleHandle, tau: u64, seed: Vec<u8>) -> Self {
        ExpandStream {
            oracle,
            expander: Expander::new(tau),
            seed,
            next_block: 1,
            buf: Vec::new(),
            pos: 0,
        }
    }

    pub fn blocks_used(&self) -> u64 {
        self.next_block - 1
    }
}

impl BitSource for ExpandStream<'_> {
    fn take(&mut self, n: usize) -> Result<u64, PrivError> {
        while self.buf.len() - self.pos < n {
            if self.next_block > self.expander.alpha_max() {
                return Err(PrivError::InsufficientRandomness);
            }
            let w = self.oracle.width();
            let label = self.expander.block(self.oracle, self.next_block, &self.seed);
            self.buf.drain(..self.pos);
            self.pos = 0;
            self.buf.extend(label.bits(w));
            self.next_block += 1;
        }
        let v = bits::to_uint(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(v)
    }
}

/// Seed, key and seed encoding, ready to encode any message.
#[derive(Debug)]
pub struct Precomputed {
    pub seed: Vec<bool>,
    pub key: SecretKey,
    pub tail: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct Scheme {
    params: FinalParams,
    safefn: SafeFnSpec,
    block_code: Justesen,
    seed_code: Justesen,
}

impl Scheme {
    pub fn new(params: FinalParams) -> Result<Self, FrameworkError> {
        params.private.validate()?;
        params.jrep.validate()?;
        if params.w == 0 {
            return Err(FrameworkError::BadParams("oracle width must be positive".into()));
        }
        let safefn = SafeFnSpec {
            function: params.safefn.resolve()?,
            input_bits: params.jrep.k_jrep(),
            w: params.w,
        };
        Ok(Scheme {
            block_code: Justesen::new(params.private.block)?,
            seed_code: Justesen::new(params.jrep.justesen)?,
            safefn,
            params,
        })
    }

    pub fn params(&self) -> &FinalParams {
        &self.params
    }

    pub fn safefn(&self) -> &SafeFnSpec {
        &self.safefn
    }

    pub fn block_code(&self) -> &Justesen {
        &self.block_code
    }

    pub fn seed_code(&self) -> &Justesen {
        &self.seed_code
    }

    pub fn message_bits(&self) -> usize {
        self.params.private.k_priv
    }

    /// Length of the private segment, which comes first.
    pub fn head_bits(&self) -> usize {
        self.params.private.codeword_bits()
    }

    pub fn codeword_bits(&self) -> usize {
        self.head_bits() + self.params.jrep.codeword_bits()
    }

    pub fn tau(&self) -> u64 {
        self.params.tau()
    }

    /// Certified tolerance of one seed block: one flip short of the cheapest
    /// pattern that breaks it.
    pub fn seed_block_rho(&self) -> f64 {
        (self.seed_code.cheapest_kill().len() - 1) as f64 / self.params.jrep.block_bits() as f64
    }

    /// Safe-function value of a seed.
    pub fn safe_value(&self, oracle: &mut OracleHandle, seed: &[bool]) -> Vec<u8> {
        self.safefn.evaluate(oracle, &bits::pack(seed))
    }

    /// Key derived from a seed: safe function, expansion, key generation.
    pub fn derive_key(&self, oracle: &mut OracleHandle, seed: &[bool]) -> Result<SecretKey, FrameworkError> {
        let value = self.safe_value(oracle, seed);
        self.key_from_value(oracle, value)
    }

    pub fn key_from_value(&self, oracle: &mut OracleHandle, value: Vec<u8>) -> Result<SecretKey, FrameworkError> {
        let mut stream = ExpandStream::new(oracle, self.tau(), value);
        Ok(genkey_priv(&self.params.private, &mut stream)?)
    }

    pub fn random_seed(&self, rng: &mut impl Rng) -> Vec<bool> {
        (0..self.params.jrep.k_jrep()).map(|_| rng.gen()).collect()
    }

    pub fn encode_seed(&self, seed: &[bool]) -> Result<Vec<bool>, FrameworkError> {
        Ok(enc_jrep(&self.seed_code, &self.params.jrep, seed)?)
    }

    pub fn precompute(&self, oracle: &mut OracleHandle, rng: &mut impl Rng) -> Result<Precomputed, FrameworkError> {
        let seed = self.random_seed(rng);
        self.precompute_with_seed(oracle, seed)
    }

    pub fn precompute_with_seed(&self, oracle: &mut OracleHandle, seed: Vec<bool>) -> Result<Precomputed, FrameworkError> {
        let tail = self.encode_seed(&seed)?;
        let key = self.derive_key(oracle, &seed)?;
        Ok(Precomputed { seed, key, tail })
    }

    /// Private encoding under `key`, followed by `tail`.
    pub fn assemble(&self, msg: &[bool], key: &SecretKey, tail: &[bool]) -> Result<Vec<bool>, FrameworkError> {
        if msg.len() != self.message_bits() {
            return Err(FrameworkError::MessageLength { expected: self.message_bits(), got: msg.len() });
        }
        let mut out = enc_priv(&self.params.private, &self.block_code, msg, key)?;
        out.extend_from_slice(tail);
        Ok(out)
    }

    pub fn enc_precomputed(&self, pre: &Precomputed, msg: &[bool]) -> Result<Vec<bool>, FrameworkError> {
        self.assemble(msg, &pre.key, &pre.tail)
    }

    pub fn enc(&self, oracle: &mut OracleHandle, msg: &[bool], rng: &mut impl Rng) -> Result<Vec<bool>, FrameworkError> {
        let pre = self.precompute(oracle, rng)?;
        self.enc_precomputed(&pre, msg)
    }

    /// Recover the seed from the tail, rebuild the key, decode bit `index`.
    pub fn dec(
        &self,
        oracle: &mut OracleHandle,
        index: usize,
        word: &mut Probe,
        rng: &mut impl Rng,
    ) -> Result<bool, FrameworkError> {
        if word.len() != self.codeword_bits() {
            return Err(FrameworkError::CodewordLength { expected: self.codeword_bits(), got: word.len() });
        }
        if index >= self.message_bits() {
            return Err(PrivError::Index(index).into());
        }
        let seed = dec_jrep(&self.seed_code, &self.params.jrep, word, self.head_bits(), rng)?;
        let key = self.derive_key(oracle, &seed)?;
        Ok(dec_priv(&self.params.private, &self.block_code, index, word, &key)?)
    }

    /// Seed blocks of a received word, each decoded once.
    pub fn decoded_seed_blocks(&self, word: &[bool]) -> DecodedBlocks {
        DecodedBlocks::new(&self.seed_code, &self.params.jrep, &word[self.head_bits()..])
    }

    /// Error bound of the safe function against `q` queries.
    pub fn delta(&self) -> f64 {
        let w = self.params.w as u32;
        match &self.safefn.function {
            SafeFn::HashIterate(t) => delta_hash_iterate(*t, self.params.q, w),
            SafeFn::GraphLabel(g) => {
                let n = g.len() as f64;
                (self.params.q as f64 * 2f64.powi(-(w as i32)) + n * n * 2f64.powi(-(w as i32) - 1)).min(1.0)
            }
        }
    }

    pub fn private_summary(&self) -> ComponentSummary {
        let p = &self.params.private;
        let curve = block_failure_curve(&self.block_code);
        ComponentSummary {
            codeword_bits: p.codeword_bits(),
            message_bits: p.k_priv,
            locality: p.locality(),
            rho: p.rho,
            success: 1.0,
            failure: scramble_bound_upto(p, &curve, p.flip_budget()).any_block,
        }
    }

    pub fn seed_summary(&self) -> ComponentSummary {
        let j = &self.params.jrep;
        ComponentSummary {
            codeword_bits: j.codeword_bits(),
            message_bits: j.k_jrep(),
            locality: j.locality(),
            rho: j.rho(self.seed_block_rho()),
            success: j.success_bound(),
            failure: 0.0,
        }
    }

    pub fn summary(&self) -> Composition {
        let p = &self.params.private;
        let mut c = compose_params(&self.private_summary(), &self.seed_summary(), self.delta(), self.params.q as f64);
        c.ops_bound = Some(eps_ops_bound(p.k_priv, p.rho, p.locality()));
        c
    }

    /// Flips the channel may make against the composed word.
    pub fn flip_budget(&self) -> usize {
        let c = self.summary();
        (c.rho * c.codeword_bits as f64).floor() as usize
    }
}

/// Parameters of one component code, as fed to [`compose_params`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub codeword_bits: usize,
    pub message_bits: usize,
    pub locality: usize,
    pub rho: f64,
    /// Per-index decoding success probability.
    pub success: f64,
    /// Probability some index falls below `success` under the channel.
    pub failure: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub codeword_bits: usize,
    pub message_bits: usize,
    pub locality: usize,
    pub rho: f64,
    /// `1 - k (2 - p_priv - p_seed)`, clamped at 0.
    pub p_lower: f64,
    /// `1 - ((1 - p_priv) + (1 - p_seed))`, for one index.
    pub p_lower_per_index: f64,
    /// `eps_priv + q delta`, clamped at 1.
    pub eps_upper: f64,
    pub eps_priv: f64,
    pub delta: f64,
    pub q: f64,
    pub ops_bound: Option<OpsBound>,
}

pub fn compose_params(private: &ComponentSummary, seed: &ComponentSummary, delta: f64, q: f64) -> Composition {
    let codeword_bits = private.codeword_bits + seed.codeword_bits;
    let tolerated = (seed.rho * seed.codeword_bits as f64).min(private.rho * private.codeword_bits as f64);
    let miss = (1.0 - private.success) + (1.0 - seed.success);
    Composition {
        codeword_bits,
        message_bits: private.message_bits,
        locality: private.locality + seed.locality,
        rho: tolerated / codeword_bits as f64,
        p_lower: (1.0 - private.message_bits as f64 * miss).max(0.0),
        p_lower_per_index: 1.0 - miss,
        eps_upper: (private.failure + q * delta).min(1.0),
        eps_priv: private.failure,
        delta,
        q,
        ops_bound: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn small_params() -> FinalParams {
        FinalParams {
            private: PrivParams {
                k_priv: 64,
                block: JustesenParams::new(4, 15, 4),
                rho: 0.015,
            },
            jrep: JrepParams {
                justesen: JustesenParams::new(6, 21, 7),
                n_rep: 8,
                alpha: 24,
            },
            safefn: SafeFnKind::HashIterate { t: 16 },
            ..FinalParams::default()
        }
    }

    #[test]
    fn tau_covers_key_generation() {
        let p = FinalParams::default();
        assert_eq!(p.tau(), (p.private.randomness_bits() as u64).div_ceil(64));
    }

    #[test]
    fn round_trip_small() {
        let scheme = Scheme::new(small_params()).unwrap();
        let mut oracle = OracleHandle::new([1; 32], 64).without_ledger();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let msg: Vec<bool> = (0..64).map(|_| rng.gen()).collect();
        let cw = scheme.enc(&mut oracle, &msg, &mut rng).unwrap();
        assert_eq!(cw.len(), scheme.codeword_bits());
        for (i, &bit) in msg.iter().enumerate() {
            let mut probe = Probe::new(&cw);
            assert_eq!(scheme.dec(&mut oracle, i, &mut probe, &mut rng).unwrap(), bit);
            let p = scheme.params();
            assert_eq!(probe.reads().len(), p.private.locality() + p.jrep.locality());
        }
    }

    #[test]
    fn precomputed_encoding_matches() {
        let scheme = Scheme::new(small_params()).unwrap();
        let mut oracle = OracleHandle::new([2; 32], 64);
        let msg: Vec<bool> = (0..64).map(|i| i % 3 == 0).collect();
        let a = scheme.enc(&mut oracle, &msg, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let pre = scheme.precompute(&mut oracle, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        assert_eq!(scheme.enc_precomputed(&pre, &msg).unwrap(), a);
    }

    #[test]
    fn decoder_rebuilds_the_encoder_key() {
        let scheme = Scheme::new(small_params()).unwrap();
        let mut oracle = OracleHandle::new([3; 32], 64);
        let pre = scheme.precompute(&mut oracle, &mut ChaCha20Rng::seed_from_u64(6)).unwrap();
        let seed = scheme.decoded_seed_blocks(&[vec![false; scheme.head_bits()], pre.tail.clone()].concat())
            .sample(&mut ChaCha20Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(scheme.derive_key(&mut oracle, &seed).unwrap(), pre.key);
    }

    #[test]
    fn expansion_stream_stops_at_tau() {
        let mut oracle = OracleHandle::new([4; 32], 64);
        let mut s = ExpandStream::new(&mut oracle, 2, vec![1, 2]);
        assert!(s.take(64).is_ok());
        assert!(s.take(64).is_ok());
        assert_eq!(s.take(1), Err(PrivError::InsufficientRandomness));
        assert_eq!(s.blocks_used(), 2);
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        let scheme = Scheme::new(small_params()).unwrap();
        let mut oracle = OracleHandle::new([1; 32], 64);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(matches!(scheme.enc(&mut oracle, &[true; 3], &mut rng), Err(FrameworkError::MessageLength { .. })));
        let short = vec![false; 10];
        assert!(matches!(
            scheme.dec(&mut oracle, 0, &mut Probe::new(&short), &mut rng),
            Err(FrameworkError::CodewordLength { .. })
        ));
    }

    #[test]
    fn composition_arithmetic() {
        let private = ComponentSummary { codeword_bits: 1000, message_bits: 100, locality: 10, rho: 0.1, success: 1.0, failure: 1e-6 };
        let seed = ComponentSummary { codeword_bits: 3000, message_bits: 20, locality: 40, rho: 0.02, success: 0.9, failure: 0.0 };
        let c = compose_params(&private, &seed, 1e-9, 1000.0);
        assert_eq!(c.codeword_bits, 4000);
        assert_eq!(c.message_bits, 100);
        assert_eq!(c.locality, 50);
        assert!((c.rho - 60.0 / 4000.0).abs() < 1e-15);
        assert!((c.p_lower_per_index - 0.9).abs() < 1e-12);
        assert_eq!(c.p_lower, 0.0);
        assert!((c.eps_upper - (1e-6 + 1e-6)).abs() < 1e-15);
    }
}
