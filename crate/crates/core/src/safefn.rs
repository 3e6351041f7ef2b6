//! Functions that are cheap to evaluate honestly but hard for a resource
//! bounded algorithm: iterated hashing and graph labeling, plus the
//! prefix-indexed expansion used to stretch their output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pebbling::{Dag, LabelFraming};
use crate::rom::{Label, OracleHandle, PromAlgorithm, State, Step};

#[derive(Debug, thiserror::Error)]
pub enum SafeFnError {
    #[error("cannot load graph {name}: {reason}")]
    Graph { name: String, reason: String },
}

/// Safe-function choice as written in configs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SafeFnKind {
    HashIterate { t: u64 },
    /// `dag` is a generator name (see [`Dag::named`]) or a graph file.
    GraphLabel { dag: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SafeFn {
    HashIterate(u64),
    GraphLabel(Dag),
}

impl SafeFnKind {
    pub fn resolve(&self) -> Result<SafeFn, SafeFnError> {
        match self {
            SafeFnKind::HashIterate { t } => Ok(SafeFn::HashIterate(*t)),
            SafeFnKind::GraphLabel { dag } => {
                if let Some(g) = Dag::named(dag) {
                    return Ok(SafeFn::GraphLabel(g));
                }
                let err = |reason: String| SafeFnError::Graph { name: dag.clone(), reason };
                let text = std::fs::read_to_string(Path::new(dag)).map_err(|e| err(e.to_string()))?;
                Dag::parse(&text).map(SafeFn::GraphLabel).map_err(|e| err(e.to_string()))
            }
        }
    }
}

/// A resolved safe function together with its input length and the oracle
/// width it runs under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafeFnSpec {
    pub function: SafeFn,
    pub input_bits: usize,
    pub w: usize,
}

impl SafeFnSpec {
    pub fn evaluate(&self, oracle: &mut OracleHandle, x: &[u8]) -> Vec<u8> {
        match &self.function {
            SafeFn::HashIterate(t) => hash_iterate(oracle, x, *t).into_bytes(),
            SafeFn::GraphLabel(g) => label_graph(oracle, g, x),
        }
    }

    /// Oracle calls made by one honest evaluation.
    pub fn honest_queries(&self) -> u64 {
        match &self.function {
            SafeFn::HashIterate(t) => t + 1,
            SafeFn::GraphLabel(g) => g.len() as u64,
        }
    }

    /// Rounds needed by the honest round-based evaluator.
    pub fn honest_rounds(&self) -> u64 {
        match &self.function {
            SafeFn::HashIterate(t) => t + 1,
            SafeFn::GraphLabel(g) => g.depths().into_iter().max().map_or(0, |d| d as u64 + 1),
        }
    }

    /// Round-based honest evaluator.
    pub fn evaluator(&self) -> Box<dyn PromAlgorithm + Send + Sync> {
        match &self.function {
            SafeFn::HashIterate(t) => Box::new(HashIterator { t: *t }),
            SafeFn::GraphLabel(g) => Box::new(LayeredLabeler::new(g.clone(), self.w.div_ceil(8))),
        }
    }
}

/// `H` applied `t + 1` times, starting from `x`.
pub fn hash_iterate(oracle: &mut OracleHandle, x: &[u8], t: u64) -> Label {
    let mut label = oracle.query(x);
    for _ in 0..t {
        label = oracle.query(label.as_bytes());
    }
    label
}

/// One oracle call per round; nothing is kept between rounds except the
/// answer just received.
#[derive(Clone, Debug)]
pub struct HashIterator {
    pub t: u64,
}

impl PromAlgorithm for HashIterator {
    fn round(&self, round: usize, state: State, answers: &[Label]) -> Step {
        let next = if round == 1 {
            state.into_bytes()
        } else {
            answers[0].as_bytes().to_vec()
        };
        if round as u64 > self.t + 1 {
            return Step::Halt { output: next };
        }
        Step::Continue { state: State::empty(), queries: vec![next] }
    }
}

/// Sink labels of `g`, concatenated in node order.
pub fn label_graph(oracle: &mut OracleHandle, g: &Dag, x: &[u8]) -> Vec<u8> {
    let framing = LabelFraming::new(g.len(), oracle.label_bytes());
    let mut labels: Vec<Option<Label>> = vec![None; g.len()];
    for v in g.topological_order() {
        let q = if g.is_source(v) {
            framing.query(v, &[x])
        } else {
            let ins: Vec<&[u8]> = g.parents(v).iter().map(|&u| labels[u as usize - 1].as_ref().unwrap().as_bytes()).collect();
            framing.query(v, &ins)
        };
        labels[v as usize - 1] = Some(oracle.query(&q));
    }
    g.sinks().iter().flat_map(|&s| labels[s as usize - 1].clone().unwrap().into_bytes()).collect()
}

/// Labels every node of depth `r - 1` in round `r`. The state holds the input
/// and the labels some later node or the output still needs.
#[derive(Clone, Debug)]
pub struct LayeredLabeler {
    dag: Dag,
    framing: LabelFraming,
    label_bytes: usize,
    layers: Vec<Vec<u32>>,
    /// Last layer whose query reads each node's label (sinks: the output).
    last_use: Vec<usize>,
}

impl LayeredLabeler {
    pub fn new(dag: Dag, label_bytes: usize) -> Self {
        let depths = dag.depths();
        let height = depths.iter().copied().max().map_or(0, |d| d + 1);
        let mut layers = vec![Vec::new(); height];
        for (i, &d) in depths.iter().enumerate() {
            layers[d].push(i as u32 + 1);
        }
        let mut last_use = depths.clone();
        for v in 1..=dag.len() as u32 {
            for &u in dag.parents(v) {
                let slot = &mut last_use[u as usize - 1];
                *slot = (*slot).max(depths[v as usize - 1]);
            }
        }
        for &s in dag.sinks() {
            last_use[s as usize - 1] = height;
        }
        let framing = LabelFraming::new(dag.len(), label_bytes);
        LayeredLabeler { dag, framing, label_bytes, layers, last_use }
    }

    fn encode(&self, x: &[u8], kept: &BTreeMap<u32, Vec<u8>>) -> State {
        let mut out = Vec::new();
        out.extend_from_slice(&(x.len() as u32).to_be_bytes());
        out.extend_from_slice(x);
        for (v, l) in kept {
            out.extend_from_slice(&v.to_be_bytes());
            out.extend_from_slice(l);
        }
        State::new(out)
    }

    fn decode(&self, bytes: &[u8]) -> (Vec<u8>, BTreeMap<u32, Vec<u8>>) {
        let n = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let x = bytes[4..4 + n].to_vec();
        let mut kept = BTreeMap::new();
        for chunk in bytes[4 + n..].chunks(4 + self.label_bytes) {
            let v = u32::from_be_bytes(chunk[..4].try_into().unwrap());
            kept.insert(v, chunk[4..].to_vec());
        }
        (x, kept)
    }
}

impl PromAlgorithm for LayeredLabeler {
    fn round(&self, round: usize, state: State, answers: &[Label]) -> Step {
        let (x, mut kept) = if round == 1 {
            (state.into_bytes(), BTreeMap::new())
        } else {
            self.decode(state.bytes())
        };
        if round >= 2 {
            for (&v, a) in self.layers[round - 2].iter().zip(answers) {
                kept.insert(v, a.as_bytes().to_vec());
            }
        }
        let layer = round - 1;
        if layer >= self.layers.len() {
            let output = self.dag.sinks().iter().flat_map(|s| kept[s].clone()).collect();
            return Step::Halt { output };
        }
        let queries = self.layers[layer]
            .iter()
            .map(|&v| {
                if self.dag.is_source(v) {
                    self.framing.query(v, &[&x])
                } else {
                    let ins: Vec<&[u8]> = self.dag.parents(v).iter().map(|u| kept[u].as_slice()).collect();
                    self.framing.query(v, &ins)
                }
            })
            .collect();
        kept.retain(|&v, _| self.last_use[v as usize - 1] > layer);
        Step::Continue { state: self.encode(&x, &kept), queries }
    }
}

/// Prefix-indexed expansion: block `i` (from 1) is `H(prefix(i) || seed)`,
/// with the index written on a width fixed by `alpha_max`, so shorter
/// expansions are prefixes of longer ones.
#[derive(Clone, Copy, Debug)]
pub struct Expander {
    prefix_bytes: usize,
    alpha_max: u64,
}

impl Expander {
    pub fn new(alpha_max: u64) -> Self {
        let bits = (64 - alpha_max.leading_zeros()).max(1) as usize;
        Expander { prefix_bytes: bits.div_ceil(8), alpha_max }
    }

    pub fn alpha_max(&self) -> u64 {
        self.alpha_max
    }

    pub fn query(&self, i: u64, seed: &[u8]) -> Vec<u8> {
        let mut q = (i.to_be_bytes()[8 - self.prefix_bytes..]).to_vec();
        q.extend_from_slice(seed);
        q
    }

    pub fn block(&self, oracle: &mut OracleHandle, i: u64, seed: &[u8]) -> Label {
        assert!((1..=self.alpha_max).contains(&i), "block {i} outside 1..={}", self.alpha_max);
        oracle.query(&self.query(i, seed))
    }

    pub fn expand(&self, oracle: &mut OracleHandle, seed: &[u8], alpha: u64) -> Vec<Label> {
        (1..=alpha).map(|i| self.block(oracle, i, seed)).collect()
    }
}

/// Expansion of `seed` to `alpha` blocks, with the index width sized for `alpha`.
pub fn expand(oracle: &mut OracleHandle, seed: &[u8], alpha: u64) -> Vec<Label> {
    Expander::new(alpha).expand(oracle, seed, alpha)
}

/// Error bound for `t + 1` iterated hashes against `q` queries:
/// `(t + 1) t / 2^(w + 1) + (q t + 1) / 2^w`.
pub fn delta_hash_iterate(t: u64, q: u64, w: u32) -> f64 {
    let t = t as u128;
    let num = (t + 1) * t / 2 + q as u128 * t + 1;
    num as f64 * 2f64.powi(-(w as i32))
}

/// Probability the bad event fires in one of `q` queries.
pub fn bad_event_probability_bound(delta: f64, q: f64) -> f64 {
    (q * delta).min(1.0)
}

/// Lower bound on the probability that labeling a graph of `n` nodes keeps
/// `m` labels' worth of memory:
/// `1 - q/2^w - 2^(-3mw/4) - n^2/2^(w+1)`, clamped at 0. The second field
/// reports whether `w > 8 log n` and `q < 2^(w/16)` hold.
pub fn graph_label_bound(q: f64, w: u32, m: u32, n: u64) -> (f64, bool) {
    let w_f = w as f64;
    let value = 1.0 - q * 2f64.powf(-w_f) - 2f64.powf(-3.0 * m as f64 * w_f / 4.0) - (n as f64).powi(2) * 2f64.powf(-(w_f + 1.0));
    let ok = w_f > 8.0 * (n as f64).log2() && q < 2f64.powf(w_f / 16.0);
    (value.max(0.0), ok)
}

/// Default nonce length `ceil(log2(kappa)^(1 + eps))`.
pub fn nonce_bits(kappa: u64, eps: f64) -> usize {
    (kappa as f64).log2().powf(1.0 + eps).ceil() as usize
}
