//! Parallel random-oracle model: a keyed oracle handle, the round harness and
//! resource accounting over execution traces.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// An oracle answer: `w` bits, big-endian, padded with zero bits to a whole byte.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(Vec<u8>);

impl Label {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Label(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    /// First `w` bits as booleans.
    pub fn bits(&self, w: usize) -> Vec<bool> {
        crate::bits::unpack(&self.0, w)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({})", hex::encode(&self.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub query: Vec<u8>,
    pub round: usize,
}

/// Keyed pseudorandom function standing in for `H: {0,1}* -> {0,1}^w`.
///
/// Inputs are length-framed before hashing, so distinct byte strings never
/// share a preimage under the framing. Answers longer than one SHA-256 block
/// are produced in counter mode.
#[derive(Clone)]
pub struct OracleHandle {
    seed: [u8; 32],
    width: usize,
    round: usize,
    answered: u64,
    ledger: Option<Vec<LedgerEntry>>,
}

impl fmt::Debug for OracleHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleHandle")
            .field("seed", &hex::encode(self.seed))
            .field("width", &self.width)
            .field("answered", &self.answered)
            .finish()
    }
}

impl OracleHandle {
    /// Fresh handle with the ledger enabled.
    pub fn new(seed: [u8; 32], width: usize) -> Self {
        assert!(width > 0, "oracle width must be positive");
        OracleHandle {
            seed,
            width,
            round: 0,
            answered: 0,
            ledger: Some(Vec::new()),
        }
    }

    /// Same oracle, but only the query count is kept.
    pub fn without_ledger(mut self) -> Self {
        self.ledger = None;
        self
    }

    /// Handle for trial `index` under a master seed.
    pub fn derive(master: &[u8; 32], index: u64, width: usize) -> Self {
        OracleHandle::new(crate::seeds::derive(master, "oracle", index), width)
    }

    pub fn from_hex(seed_hex: &str, width: usize) -> Result<Self, RomError> {
        let bytes = hex::decode(seed_hex).map_err(|_| RomError::BadSeed)?;
        let seed: [u8; 32] = bytes.try_into().map_err(|_| RomError::BadSeed)?;
        Ok(OracleHandle::new(seed, width))
    }

    pub fn seed(&self) -> &[u8; 32] {
        &self.seed
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn label_bytes(&self) -> usize {
        self.width.div_ceil(8)
    }

    pub fn queries_answered(&self) -> u64 {
        self.answered
    }

    pub fn ledger(&self) -> Option<&[LedgerEntry]> {
        self.ledger.as_deref()
    }

    pub fn set_round(&mut self, round: usize) {
        self.round = round;
    }

    /// Answer without touching the ledger or the counter.
    pub fn evaluate(&self, input: &[u8]) -> Label {
        let nbytes = self.label_bytes();
        let mut out = Vec::with_capacity(nbytes + 32);
        let mut counter = 0u32;
        while out.len() < nbytes {
            let mut h = Sha256::new();
            h.update(b"ldc-forge/oracle");
            h.update(self.seed);
            h.update((input.len() as u64).to_be_bytes());
            h.update(input);
            h.update(counter.to_be_bytes());
            out.extend_from_slice(&h.finalize());
            counter += 1;
        }
        out.truncate(nbytes);
        let spare = nbytes * 8 - self.width;
        if spare > 0 {
            let last = out.len() - 1;
            out[last] &= 0xffu8 << spare;
        }
        Label(out)
    }

    pub fn query(&mut self, input: &[u8]) -> Label {
        self.answered += 1;
        if let Some(ledger) = self.ledger.as_mut() {
            ledger.push(LedgerEntry {
                query: input.to_vec(),
                round: self.round,
            });
        }
        self.evaluate(input)
    }
}

/// Algorithm state between rounds, with its self-reported size in bits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct State {
    bytes: Vec<u8>,
    bits: u64,
}

impl State {
    pub fn new(bytes: Vec<u8>) -> Self {
        let bits = bytes.len() as u64 * 8;
        State { bytes, bits }
    }

    /// State whose last byte is only partly used. `bits` must fall inside the
    /// final byte, so the report can't hide whole bytes.
    pub fn packed(bytes: Vec<u8>, bits: u64) -> Self {
        let full = bytes.len() as u64 * 8;
        assert!(
            bits <= full && (bytes.is_empty() || bits > full - 8),
            "state size {bits} does not match {} bytes",
            bytes.len()
        );
        State { bytes, bits }
    }

    pub fn empty() -> Self {
        State::default()
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }
}

/// What an algorithm emits at the end of a round.
#[derive(Clone, Debug)]
pub enum Step {
    Continue { state: State, queries: Vec<Vec<u8>> },
    Halt { output: Vec<u8> },
}

/// A round-based algorithm. Calls get `&self`, so anything carried from one
/// round to the next has to travel in the harness-provided [`State`] and is
/// charged for. Fixed random coins may live in `self`.
pub trait PromAlgorithm {
    fn round(&self, round: usize, state: State, answers: &[Label]) -> Step;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Time,
    Space,
    St,
    Cmc,
    Cq,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Metric::Time => "time",
            Metric::Space => "space",
            Metric::St => "st",
            Metric::Cmc => "cmc",
            Metric::Cq => "cq",
        };
        f.write_str(s)
    }
}

/// Resource limits; `None` means unbounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceBudget {
    #[serde(default)]
    pub max_time: Option<u64>,
    #[serde(default)]
    pub max_space: Option<u64>,
    #[serde(default)]
    pub max_st: Option<u64>,
    #[serde(default)]
    pub max_cmc: Option<u64>,
    #[serde(default)]
    pub max_cq: Option<u64>,
}

impl ResourceBudget {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn time_queries(max_time: u64, max_cq: u64) -> Self {
        ResourceBudget {
            max_time: Some(max_time),
            max_cq: Some(max_cq),
            ..Self::default()
        }
    }

    fn limit(&self, metric: Metric) -> Option<u64> {
        match metric {
            Metric::Time => self.max_time,
            Metric::Space => self.max_space,
            Metric::St => self.max_st,
            Metric::Cmc => self.max_cmc,
            Metric::Cq => self.max_cq,
        }
    }

    /// First metric of `trace` over its limit.
    pub fn violation(&self, trace: &Trace) -> Option<Metric> {
        [Metric::Time, Metric::Space, Metric::St, Metric::Cmc, Metric::Cq]
            .into_iter()
            .find(|&m| self.limit(m).is_some_and(|lim| cost(trace, m) > lim))
    }
}

/// Execution record. `states[0]` is the input; entry `i > 0` pairs with
/// `batches[i - 1]` and `queries[i - 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<u64>,
    pub batches: Vec<u64>,
    pub queries: Vec<Vec<Vec<u8>>>,
    pub output: Vec<u8>,
}

impl Trace {
    pub fn rounds(&self) -> usize {
        self.batches.len()
    }

    /// One JSON object per line: `{round, state_bits, batch}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, bits) in self.states.iter().enumerate() {
            let batch = if i == 0 { 0 } else { self.batches[i - 1] };
            let line = serde_json::json!({ "round": i, "state_bits": bits, "batch": batch });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

pub fn cost(trace: &Trace, metric: Metric) -> u64 {
    let time = trace.batches.len() as u64;
    let space = trace.states.iter().copied().max().unwrap_or(0);
    match metric {
        Metric::Time => time,
        Metric::Space => space,
        Metric::St => space * time,
        Metric::Cmc => trace.states.iter().sum(),
        Metric::Cq => trace.batches.iter().sum(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RomError {
    #[error("budget exceeded on {metric}")]
    BudgetExceeded { metric: Metric, trace: Box<Trace> },
    #[error("oracle seed must be 64 hex characters")]
    BadSeed,
}

/// Run `alg` on `input` with the round harness. On a budget breach the error
/// carries every round that fit inside the budget.
pub fn run_prom<A: PromAlgorithm + ?Sized>(
    alg: &A,
    input: &[u8],
    oracle: &mut OracleHandle,
    budget: &ResourceBudget,
) -> Result<Trace, RomError> {
    let mut trace = Trace {
        states: vec![input.len() as u64 * 8],
        ..Trace::default()
    };
    if let Some(metric) = budget.violation(&trace) {
        trace.states.clear();
        return Err(RomError::BudgetExceeded {
            metric,
            trace: Box::new(trace),
        });
    }
    let mut state = State::new(input.to_vec());
    let mut answers: Vec<Label> = Vec::new();
    let mut round = 1;
    loop {
        match alg.round(round, state, &answers) {
            Step::Halt { output } => {
                trace.output = output;
                return Ok(trace);
            }
            Step::Continue {
                state: next,
                queries,
            } => {
                trace.states.push(next.bits());
                trace.batches.push(queries.len() as u64);
                if let Some(metric) = budget.violation(&trace) {
                    trace.states.pop();
                    trace.batches.pop();
                    return Err(RomError::BudgetExceeded {
                        metric,
                        trace: Box::new(trace),
                    });
                }
                oracle.set_round(round);
                answers = queries.iter().map(|q| oracle.query(q)).collect();
                trace.queries.push(queries);
                state = next;
            }
        }
        round += 1;
    }
}
