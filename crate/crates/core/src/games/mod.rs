//! Security games against resource-bounded channels, the hybrid encoders
//! and the two-phase distinguishing experiment.

mod attackers;
mod hybrid;
mod wire;

pub use attackers::{attack_input, AttackView, Attacker, ChainGuesser, KeyAware, Strategy};
pub use hybrid::{
    enc_hybrid0, enc_hybrid1, run_two_phase_experiment, two_phase_advantage, CoinFlip, DecodeFailure, Distinguisher,
    DistinguisherView, TwoPhaseOutcome,
};
pub use wire::{decode_flips, encode_flips};

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Probe;
use crate::framework::{FrameworkError, Scheme};
use crate::privldc::{decode_block, enc_priv, random_key, PrivError, PrivParams, SecretKey};
use crate::rom::{cost, run_prom, Metric, OracleHandle, RomError, Trace};
use crate::safefn::{Expander, SafeFnSpec};
use crate::ecc::Justesen;
use crate::{seeds, stats};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// Decoder runs per trial when estimating per-index success.
    pub samples: usize,
    /// Failure probability of the Hoeffding interval.
    pub confidence: f64,
    /// Success threshold; defaults to the scheme's per-index bound.
    #[serde(default)]
    pub p: Option<f64>,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig { samples: 200, confidence: 1e-3, p: None }
    }
}

/// One trial of a game. `win` means the attacker pushed some index's
/// success probability confidently below the threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub strategy: String,
    pub ham: usize,
    /// Output over budget or out of range; no flips were applied.
    pub rejected: bool,
    /// Resource limit the attacker ran into; its output was discarded.
    pub breach: Option<Metric>,
    pub win: bool,
    pub worst_index: usize,
    pub est_prob: f64,
    pub upper: f64,
    pub rounds_used: usize,
    pub cq_used: u64,
    /// The attacker queried the expansion of the true safe-function value.
    pub bad_event: bool,
}

struct Corruption {
    flips: Vec<usize>,
    ham: usize,
    rejected: bool,
    breach: Option<Metric>,
    trace: Trace,
}

fn corrupt(
    attacker: &dyn Attacker,
    view: AttackView,
    coins: [u8; 32],
    msg: &[bool],
    word: &[bool],
    oracle: &mut OracleHandle,
) -> Corruption {
    let alg = attacker.algorithm(view, coins);
    let (output, breach, trace) = match run_prom(alg.as_ref(), &attack_input(msg, word), oracle, &attacker.budget()) {
        Ok(trace) => (trace.output.clone(), None, trace),
        Err(RomError::BudgetExceeded { metric, trace }) => (Vec::new(), Some(metric), *trace),
        Err(RomError::BadSeed) => unreachable!("the harness does not parse seeds"),
    };
    let distinct: BTreeSet<usize> = decode_flips(&output).into_iter().collect();
    let ham = distinct.len();
    let rejected = ham > view.flip_budget || distinct.iter().any(|&p| p >= word.len());
    Corruption {
        flips: if rejected { Vec::new() } else { distinct.into_iter().collect() },
        ham,
        rejected,
        breach,
        trace,
    }
}

fn apply(word: &[bool], flips: &[usize]) -> Vec<bool> {
    let mut out = word.to_vec();
    for &p in flips {
        out[p] = !out[p];
    }
    out
}

fn random_message(len: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

/// Decode every private block of `word` under `key`; `None` where a block
/// fails.
fn decode_all(params: &PrivParams, code: &Justesen, word: &[bool], key: &SecretKey) -> Vec<Option<bool>> {
    let b = params.block_message_bits();
    let mut out = Vec::with_capacity(params.k_priv);
    for block in 0..params.blocks() {
        match decode_block(params, code, block, &mut Probe::new(word), key) {
            Ok(bits) => out.extend(bits.into_iter().map(Some)),
            Err(_) => out.extend(std::iter::repeat_n(None, b)),
        }
    }
    out
}

/// Game against the composed scheme. Budget and threshold are computed once.
pub struct LdcGame<'a> {
    scheme: &'a Scheme,
    config: GameConfig,
    flip_budget: usize,
    p: f64,
}

impl<'a> LdcGame<'a> {
    pub fn new(scheme: &'a Scheme, config: GameConfig) -> Self {
        let summary = scheme.summary();
        LdcGame {
            scheme,
            config,
            flip_budget: scheme.flip_budget(),
            p: config.p.unwrap_or(summary.p_lower_per_index),
        }
    }

    pub fn flip_budget(&self) -> usize {
        self.flip_budget
    }

    pub fn threshold(&self) -> f64 {
        self.p
    }

    /// Trial `trial` under `master`: fresh oracle, message and encoding, one
    /// attack, then `samples` decodes of every index.
    pub fn play(&self, attacker: &dyn Attacker, master: &[u8; 32], trial: u64) -> Result<GameOutcome, FrameworkError> {
        let scheme = self.scheme;
        let mut oracle = OracleHandle::derive(master, trial, scheme.params().w).without_ledger();
        let mut rng = seeds::rng(master, "encode", trial);
        let msg = random_message(scheme.message_bits(), &mut rng);
        let pre = scheme.precompute(&mut oracle, &mut rng)?;
        let word = scheme.enc_precomputed(&pre, &msg)?;

        let view = AttackView {
            private: &scheme.params().private,
            block_code: scheme.block_code(),
            scheme: Some(scheme),
            flip_budget: self.flip_budget,
            word_bits: word.len(),
            leaked_key: None,
        };
        let coins = seeds::derive(master, "coins", trial);
        let c = corrupt(attacker, view, coins, &msg, &word, &mut oracle);
        let received = apply(&word, &c.flips);

        let value = scheme.safe_value(&mut oracle, &pre.seed);
        let expander = Expander::new(scheme.tau());
        let forbidden: HashSet<Vec<u8>> = (1..=scheme.tau()).map(|i| expander.query(i, &value)).collect();
        let bad_event = c.trace.queries.iter().flatten().any(|q| forbidden.contains(q));

        let blocks = scheme.decoded_seed_blocks(&received);
        let mut dec_rng = seeds::rng(master, "decode", trial);
        let mut cache: HashMap<Vec<bool>, Vec<Option<bool>>> = HashMap::new();
        let mut hits = vec![0usize; msg.len()];
        for _ in 0..self.config.samples {
            let Ok(seed) = blocks.sample(&mut dec_rng) else { continue };
            if !cache.contains_key(&seed) {
                let decoded = match scheme.derive_key(&mut oracle, &seed) {
                    Ok(key) => decode_all(&scheme.params().private, scheme.block_code(), &received, &key),
                    Err(_) => vec![None; msg.len()],
                };
                cache.insert(seed.clone(), decoded);
            }
            for (h, (d, &m)) in hits.iter_mut().zip(cache[&seed].iter().zip(&msg)) {
                *h += usize::from(*d == Some(m));
            }
        }
        let (worst_index, worst) = hits.iter().copied().enumerate().min_by_key(|&(_, h)| h).unwrap_or((0, 0));
        let est_prob = worst as f64 / self.config.samples as f64;
        let upper = est_prob + stats::hoeffding_radius(self.config.samples, self.config.confidence);
        Ok(GameOutcome {
            strategy: attacker.name(),
            ham: c.ham,
            rejected: c.rejected,
            breach: c.breach,
            win: upper < self.p,
            worst_index,
            est_prob,
            upper,
            rounds_used: c.trace.rounds(),
            cq_used: cost(&c.trace, Metric::Cq),
            bad_event,
        })
    }
}

/// Game against the private code alone, with a truly random key. Decoding
/// is deterministic given the key, so the estimate is exact.
pub struct PrivGame<'a> {
    params: &'a PrivParams,
    code: &'a Justesen,
    w: usize,
}

impl<'a> PrivGame<'a> {
    pub fn new(params: &'a PrivParams, code: &'a Justesen, w: usize) -> Self {
        PrivGame { params, code, w }
    }

    /// With `leak_key`, the attacker's view includes the key.
    pub fn play(
        &self,
        attacker: &dyn Attacker,
        master: &[u8; 32],
        trial: u64,
        leak_key: bool,
    ) -> Result<GameOutcome, PrivError> {
        let mut rng = seeds::rng(master, "encode", trial);
        let key = random_key(self.params, &mut rng)?;
        let msg = random_message(self.params.k_priv, &mut rng);
        let word = enc_priv(self.params, self.code, &msg, &key)?;
        let mut oracle = OracleHandle::derive(master, trial, self.w).without_ledger();
        let view = AttackView {
            private: self.params,
            block_code: self.code,
            scheme: None,
            flip_budget: self.params.flip_budget(),
            word_bits: word.len(),
            leaked_key: leak_key.then_some(&key),
        };
        let coins = seeds::derive(master, "coins", trial);
        let c = corrupt(attacker, view, coins, &msg, &word, &mut oracle);
        let received = apply(&word, &c.flips);
        let decoded = decode_all(self.params, self.code, &received, &key);
        let wrong = decoded.iter().zip(&msg).position(|(d, &m)| *d != Some(m));
        Ok(GameOutcome {
            strategy: attacker.name(),
            ham: c.ham,
            rejected: c.rejected,
            breach: c.breach,
            win: wrong.is_some(),
            worst_index: wrong.unwrap_or(0),
            est_prob: if wrong.is_some() { 0.0 } else { 1.0 },
            upper: if wrong.is_some() { 0.0 } else { 1.0 },
            rounds_used: c.trace.rounds(),
            cq_used: cost(&c.trace, Metric::Cq),
            bad_event: false,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyOutcome {
    pub success: bool,
    pub breach: Option<Metric>,
    pub rounds_used: usize,
    pub cq_used: u64,
}

/// Can a [`ChainGuesser`] with `max_time` rounds and `max_cq` queries output
/// the safe-function value of a random input?
pub fn run_safety_trial(spec: &SafeFnSpec, max_time: u64, max_cq: u64, master: &[u8; 32], trial: u64) -> SafetyOutcome {
    let mut oracle = OracleHandle::derive(master, trial, spec.w).without_ledger();
    let mut rng = seeds::rng(master, "input", trial);
    let mut x = vec![0u8; spec.input_bits.div_ceil(8)];
    rng.fill(&mut x[..]);
    let guesser = ChainGuesser::new(spec, max_time, max_cq, seeds::derive(master, "coins", trial));
    let (output, breach, trace) = match run_prom(&guesser, &x, &mut oracle, &guesser.budget()) {
        Ok(t) => (Some(t.output.clone()), None, t),
        Err(RomError::BudgetExceeded { metric, trace }) => (None, Some(metric), *trace),
        Err(RomError::BadSeed) => unreachable!("the harness does not parse seeds"),
    };
    let truth = spec.evaluate(&mut oracle.clone(), &x);
    SafetyOutcome {
        success: output.as_deref() == Some(&truth[..]),
        breach,
        rounds_used: trace.rounds(),
        cq_used: cost(&trace, Metric::Cq),
    }
}
