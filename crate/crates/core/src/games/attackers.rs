//! Channel strategies. Each one runs under the round harness, reads the
//! message and codeword from its input and outputs the positions to flip.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::wire::{encode_flips, Reader, Writer};
use crate::bits;
use crate::ecc::Justesen;
use crate::framework::Scheme;
use crate::ldcstar::concentrate_on_blocks;
use crate::privldc::{genkey_priv, PrivParams, SecretKey, SliceBits};
use crate::rom::{Label, PromAlgorithm, ResourceBudget, State, Step};
use crate::safefn::{Expander, SafeFnSpec};

/// What an attacker is told before it sees the codeword.
#[derive(Clone, Copy)]
pub struct AttackView<'a> {
    pub private: &'a PrivParams,
    pub block_code: &'a Justesen,
    /// The composed scheme; absent in the private-code game.
    pub scheme: Option<&'a Scheme>,
    pub flip_budget: usize,
    pub word_bits: usize,
    /// Only the key-aware sanity attacker reads this.
    pub leaked_key: Option<&'a SecretKey>,
}

pub trait Attacker: Send + Sync {
    fn name(&self) -> String;

    fn budget(&self) -> ResourceBudget {
        ResourceBudget::unbounded()
    }

    fn algorithm<'a>(&'a self, view: AttackView<'a>, coins: [u8; 32]) -> Box<dyn PromAlgorithm + 'a>;
}

/// Harness input: message then codeword.
pub fn attack_input(msg: &[bool], word: &[bool]) -> Vec<u8> {
    Writer::new().bits(msg).bits(word).finish()
}

fn read_input(bytes: &[u8]) -> (Vec<bool>, Vec<bool>) {
    let mut r = Reader::new(bytes);
    let msg = r.bits();
    (msg, r.bits())
}

/// Halts in the first call with flips computed from the word alone.
struct OneShot<F>(F);

impl<F: Fn(&[bool]) -> Vec<usize>> PromAlgorithm for OneShot<F> {
    fn round(&self, _round: usize, state: State, _answers: &[Label]) -> Step {
        let (_, word) = read_input(state.bytes());
        Step::Halt { output: encode_flips(&(self.0)(&word)) }
    }
}

fn random_positions(coins: [u8; 32], len: usize, count: usize) -> Vec<usize> {
    let mut rng = ChaCha20Rng::from_seed(coins);
    sample(&mut rng, len, count.min(len)).into_vec()
}

fn count_for(rho: Option<f64>, view: &AttackView) -> usize {
    rho.map_or(view.flip_budget, |r| (r * view.word_bits as f64).floor() as usize)
}

/// The cheapest block-killing pattern placed on successive blocks of the
/// private segment, with scrambled position `j` landing at `place(j)`.
fn kill_blocks(view: &AttackView, budget: usize, place: impl Fn(usize) -> usize) -> Vec<usize> {
    let kill = view.block_code.cheapest_kill();
    let ell = view.private.locality();
    let mut flips = Vec::with_capacity(budget);
    for b in 0..view.private.blocks() {
        let room = budget - flips.len();
        if room == 0 {
            break;
        }
        flips.extend(kill.iter().take(room).map(|&p| place(b * ell + p)));
    }
    flips
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    /// Uniform distinct positions; `rho` defaults to the full budget.
    RandomFlips {
        #[serde(default)]
        rho: Option<f64>,
    },
    /// One contiguous run starting at `offset`, wrapping at the end.
    Burst {
        #[serde(default)]
        rho: Option<f64>,
        #[serde(default)]
        offset: usize,
    },
    /// Whole seed blocks destroyed with their cheapest pattern. Without a
    /// seed segment, a burst ending at the last position.
    SeedKiller,
    /// Private blocks destroyed as if the word were not scrambled.
    BlockConcentrator,
    /// Recompute the key within `t` rounds and `q` queries, then destroy
    /// private blocks through it.
    KeySearcher { t: u64, q: u64 },
}

impl Strategy {
    /// One of each, with the key searcher one round short of the honest
    /// evaluation.
    pub fn library(scheme: &Scheme) -> Vec<Strategy> {
        vec![
            Strategy::RandomFlips { rho: None },
            Strategy::Burst { rho: None, offset: 0 },
            Strategy::SeedKiller,
            Strategy::BlockConcentrator,
            Strategy::KeySearcher { t: scheme.safefn().honest_rounds(), q: scheme.params().q },
        ]
    }
}

impl Attacker for Strategy {
    fn name(&self) -> String {
        match self {
            Strategy::RandomFlips { .. } => "random_flips".into(),
            Strategy::Burst { .. } => "burst".into(),
            Strategy::SeedKiller => "seed_killer".into(),
            Strategy::BlockConcentrator => "block_concentrator".into(),
            Strategy::KeySearcher { .. } => "key_searcher".into(),
        }
    }

    fn budget(&self) -> ResourceBudget {
        match self {
            Strategy::KeySearcher { t, q } => ResourceBudget::time_queries(*t, *q),
            _ => ResourceBudget::unbounded(),
        }
    }

    fn algorithm<'a>(&'a self, view: AttackView<'a>, coins: [u8; 32]) -> Box<dyn PromAlgorithm + 'a> {
        let n = view.word_bits;
        match *self {
            Strategy::RandomFlips { rho } => {
                let count = count_for(rho, &view);
                Box::new(OneShot(move |_: &[bool]| random_positions(coins, n, count)))
            }
            Strategy::Burst { rho, offset } => {
                let count = count_for(rho, &view);
                Box::new(OneShot(move |_: &[bool]| (offset..offset + count).map(|p| p % n).collect()))
            }
            Strategy::SeedKiller => {
                let budget = view.flip_budget;
                Box::new(OneShot(move |_: &[bool]| match view.scheme {
                    Some(s) => concentrate_on_blocks(s.seed_code(), &s.params().jrep, budget)
                        .into_iter()
                        .map(|p| s.head_bits() + p)
                        .collect(),
                    None => (n - budget.min(n)..n).collect(),
                }))
            }
            Strategy::BlockConcentrator => {
                let budget = view.flip_budget;
                Box::new(OneShot(move |_: &[bool]| kill_blocks(&view, budget, |j| j)))
            }
            Strategy::KeySearcher { t, q } => match view.scheme {
                Some(scheme) => Box::new(KeySearch {
                    view,
                    scheme,
                    evaluator: scheme.safefn().evaluator(),
                    max_time: t,
                    max_cq: q,
                    coins,
                }),
                None => Box::new(OneShot(move |_: &[bool]| random_positions(coins, n, view.flip_budget))),
            },
        }
    }
}

/// Sanity attacker that is handed the key and destroys blocks through it.
pub struct KeyAware;

impl Attacker for KeyAware {
    fn name(&self) -> String {
        "key_aware".into()
    }

    fn algorithm<'a>(&'a self, view: AttackView<'a>, _coins: [u8; 32]) -> Box<dyn PromAlgorithm + 'a> {
        Box::new(OneShot(move |_: &[bool]| match view.leaked_key {
            Some(key) => kill_blocks(&view, view.flip_budget, |j| key.pi[j] as usize),
            None => Vec::new(),
        }))
    }
}

const EVALUATING: u32 = 0;
const EXPANDING: u32 = 1;

/// Decodes the seed, steps the honest safe-function evaluator while the
/// round budget allows, then expands whatever value it holds (the true one,
/// or its last answer as a guess), builds a key and attacks through it.
struct KeySearch<'a> {
    view: AttackView<'a>,
    scheme: &'a Scheme,
    evaluator: Box<dyn PromAlgorithm + Send + Sync>,
    max_time: u64,
    max_cq: u64,
    coins: [u8; 32],
}

impl KeySearch<'_> {
    fn fallback(&self) -> Step {
        let flips = random_positions(self.coins, self.view.word_bits, self.view.flip_budget);
        Step::Halt { output: encode_flips(&flips) }
    }

    fn expand(&self, word: &[bool], used: u64, value: &[u8]) -> Step {
        let tau = self.scheme.tau();
        if used + tau > self.max_cq {
            return self.fallback();
        }
        let expander = Expander::new(tau);
        let queries = (1..=tau).map(|i| expander.query(i, value)).collect();
        let state = Writer::new().u32(EXPANDING).u32(0).bits(word).finish();
        Step::Continue { state: State::new(state), queries }
    }

    fn strike(&self, answers: &[Label]) -> Step {
        let w = self.scheme.params().w;
        let stream: Vec<bool> = answers.iter().flat_map(|l| l.bits(w)).collect();
        match genkey_priv(self.view.private, &mut SliceBits::new(&stream)) {
            Ok(key) => {
                let flips = kill_blocks(&self.view, self.view.flip_budget, |j| key.pi[j] as usize);
                Step::Halt { output: encode_flips(&flips) }
            }
            Err(_) => self.fallback(),
        }
    }
}

impl PromAlgorithm for KeySearch<'_> {
    fn round(&self, round: usize, state: State, answers: &[Label]) -> Step {
        let (word, used, eval_state, eval_round) = if round == 1 {
            let (_, word) = read_input(state.bytes());
            let Ok(seed) = self.scheme.decoded_seed_blocks(&word).plurality_all() else {
                return self.fallback();
            };
            (word, 0, bits::pack(&seed), 1)
        } else {
            let mut r = Reader::new(state.bytes());
            let phase = r.u32();
            if phase == EXPANDING {
                return self.strike(answers);
            }
            let used = r.u32() as u64;
            let word = r.bits();
            (word, used, r.bytes().to_vec(), round)
        };
        if round as u64 > self.max_time {
            return self.fallback();
        }
        let guess = || answers.first().map_or(eval_state.clone(), |l| l.as_bytes().to_vec());
        match self.evaluator.round(eval_round, State::new(eval_state.clone()), answers) {
            Step::Halt { output } => self.expand(&word, used, &output),
            Step::Continue { state: next, queries } => {
                let spent = used + queries.len() as u64;
                if round as u64 >= self.max_time || spent + self.scheme.tau() > self.max_cq {
                    return self.expand(&word, used, &guess());
                }
                let state = Writer::new().u32(EVALUATING).u32(spent as u32).bits(&word).bytes(next.bytes()).finish();
                Step::Continue { state: State::new(state), queries }
            }
        }
    }
}

/// Safe-function attacker with `max_time` rounds and `max_cq` queries. It
/// runs the honest evaluator while rounds remain and spends the spare
/// queries in round 1 on random labels, hoping one of them is the value
/// the chain reaches last. Output is its guess for the function value.
pub struct ChainGuesser<'a> {
    spec: &'a SafeFnSpec,
    evaluator: Box<dyn PromAlgorithm + Send + Sync>,
    max_time: u64,
    max_cq: u64,
    coins: [u8; 32],
}

impl<'a> ChainGuesser<'a> {
    pub fn new(spec: &'a SafeFnSpec, max_time: u64, max_cq: u64, coins: [u8; 32]) -> Self {
        ChainGuesser { spec, evaluator: spec.evaluator(), max_time, max_cq, coins }
    }

    pub fn budget(&self) -> ResourceBudget {
        ResourceBudget::time_queries(self.max_time, self.max_cq)
    }
}

impl ChainGuesser<'_> {
    fn random_labels(&self, count: usize, label_bytes: usize) -> Vec<u8> {
        let mut rng = ChaCha20Rng::from_seed(self.coins);
        let spare_bits = label_bytes * 8 - self.spec.w;
        let mut out = vec![0u8; count * label_bytes];
        for g in out.chunks_mut(label_bytes) {
            rng.fill(g);
            g[label_bytes - 1] &= 0xffu8 << spare_bits;
        }
        out
    }
}

impl PromAlgorithm for ChainGuesser<'_> {
    fn round(&self, round: usize, state: State, answers: &[Label]) -> Step {
        let lb = self.spec.w.div_ceil(8);
        // `pairs` holds each guess followed by its answer, `lb` bytes each.
        let (eval_state, pairs, eval_answers) = if round == 1 {
            (state.into_bytes(), Vec::new(), answers)
        } else {
            let mut r = Reader::new(state.bytes());
            let eval_state = r.bytes().to_vec();
            let own = r.u32() as usize;
            let mut pairs = r.bytes().to_vec();
            if round == 2 {
                let guesses = std::mem::take(&mut pairs);
                for (g, a) in guesses.chunks(lb).zip(&answers[own..]) {
                    pairs.extend_from_slice(g);
                    pairs.extend_from_slice(a.as_bytes());
                }
            }
            (eval_state, pairs, &answers[..own])
        };
        if round as u64 > self.max_time {
            let last = eval_answers.first().map_or(eval_state, |l| l.as_bytes().to_vec());
            let output = pairs
                .chunks(2 * lb)
                .find(|p| p[..lb] == last[..])
                .map_or(last, |p| p[lb..].to_vec());
            return Step::Halt { output };
        }
        match self.evaluator.round(round, State::new(eval_state), eval_answers) {
            Step::Halt { output } => Step::Halt { output },
            Step::Continue { state: next, mut queries } => {
                let own = queries.len();
                let mut pairs = pairs;
                if round == 1 {
                    let spare = self.max_cq.saturating_sub(self.spec.honest_queries()) as usize;
                    pairs = self.random_labels(spare, lb);
                    queries.extend(pairs.chunks(lb).map(<[u8]>::to_vec));
                }
                let state = Writer::new().bytes(next.bytes()).u32(own as u32).bytes(&pairs).finish();
                Step::Continue { state: State::new(state), queries }
            }
        }
    }
}
