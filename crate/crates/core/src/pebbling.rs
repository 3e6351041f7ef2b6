//! DAGs, the parallel black pebbling game, exact minimum-space search and
//! extraction of a pebbling from a labeling trace.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rom::{Label, OracleHandle, Trace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PebbleError {
    #[error("node {0} outside 1..=n")]
    BadNode(u32),
    #[error("self loop on node {0}")]
    SelfLoop(u32),
    #[error("graph has a cycle")]
    Cycle,
    #[error("graph has {0} nodes; exhaustive search is limited to 20")]
    TooLarge(usize),
    #[error("query {index} of round {round} is not a labeling query")]
    MalformedQuery { round: usize, index: usize },
    #[error("cannot parse graph: {0}")]
    Parse(String),
}

/// Directed acyclic graph on nodes `1..=n` with sorted parent lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<u32>>,
    sinks: Vec<u32>,
}

impl Dag {
    pub fn new(n: usize, edges: &[(u32, u32)]) -> Result<Self, PebbleError> {
        let mut parents: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        let mut has_child = vec![false; n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w == 0 || w as usize > n {
                    return Err(PebbleError::BadNode(w));
                }
            }
            if u == v {
                return Err(PebbleError::SelfLoop(u));
            }
            parents[v as usize - 1].insert(u);
            has_child[u as usize - 1] = true;
        }
        let dag = Dag {
            parents: parents.into_iter().map(|p| p.into_iter().collect()).collect(),
            sinks: (1..=n as u32).filter(|&v| !has_child[v as usize - 1]).collect(),
        };
        if dag.topological_order().len() != n {
            return Err(PebbleError::Cycle);
        }
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, v: u32) -> &[u32] {
        &self.parents[v as usize - 1]
    }

    pub fn sinks(&self) -> &[u32] {
        &self.sinks
    }

    pub fn is_source(&self, v: u32) -> bool {
        self.parents(v).is_empty()
    }

    pub fn max_indegree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for v in 1..=self.len() as u32 {
            for &u in self.parents(v) {
                out.push((u, v));
            }
        }
        out
    }

    /// Kahn's algorithm, smallest ready node first.
    pub fn topological_order(&self) -> Vec<u32> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for v in 1..=n as u32 {
            for &u in self.parents(v) {
                children[u as usize - 1].push(v);
            }
        }
        let mut ready: BTreeSet<u32> = (1..=n as u32).filter(|&v| indeg[v as usize - 1] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &children[v as usize - 1] {
                indeg[c as usize - 1] -= 1;
                if indeg[c as usize - 1] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Longest path from a source, per node (sources have depth 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.len()];
        for v in self.topological_order() {
            depth[v as usize - 1] = self.parents(v).iter().map(|&u| depth[u as usize - 1] + 1).max().unwrap_or(0);
        }
        depth
    }

    /// Text form: `n=<int>` then one `u v` edge per line.
    pub fn parse(text: &str) -> Result<Self, PebbleError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| PebbleError::Parse("empty file".into()))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| PebbleError::Parse(format!("bad header {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(PebbleError::Parse(format!("bad edge line {line:?}"))),
            }
        }
        Dag::new(n, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n={}\n", self.len());
        for (u, v) in self.edges() {
            writeln!(s, "{u} {v}").unwrap();
        }
        s
    }

    /// Generator names: `path<n>`, `pyramid<h>`, `bintree<d>`,
    /// `random<n>_<d>_<seed>`.
    pub fn named(name: &str) -> Option<Self> {
        let num = |p: &str| name.strip_prefix(p).and_then(|s| s.parse::<usize>().ok());
        if let Some(n) = num("path") {
            return (n > 0).then(|| path(n));
        }
        if let Some(h) = num("pyramid") {
            return (h > 0).then(|| pyramid(h));
        }
        if let Some(d) = num("bintree") {
            return Some(binary_tree(d));
        }
        let rest = name.strip_prefix("random")?;
        let parts: Vec<u64> = rest.split('_').map(|s| s.parse().ok()).collect::<Option<_>>()?;
        match parts[..] {
            [n, d, seed] if n > 0 => Some(random_dag(n as usize, d as usize, seed)),
            _ => None,
        }
    }
}

pub fn path(n: usize) -> Dag {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v, v + 1)).collect();
    Dag::new(n, &edges).unwrap()
}

/// `h` rows; the bottom row has `h` sources and the top row a single sink.
pub fn pyramid(h: usize) -> Dag {
    let mut id = HashMap::new();
    let mut next = 1u32;
    for r in 0..h {
        for c in 0..h - r {
            id.insert((r, c), next);
            next += 1;
        }
    }
    let mut edges = Vec::new();
    for r in 1..h {
        for c in 0..h - r {
            edges.push((id[&(r - 1, c)], id[&(r, c)]));
            edges.push((id[&(r - 1, c + 1)], id[&(r, c)]));
        }
    }
    Dag::new(next as usize - 1, &edges).unwrap()
}

/// Complete binary tree of depth `d`, edges pointing to the root, which is
/// node `n`.
pub fn binary_tree(d: usize) -> Dag {
    let n = (1usize << (d + 1)) - 1;
    let id = |heap: usize| (n + 1 - heap) as u32;
    let mut edges = Vec::new();
    for heap in 2..=n {
        edges.push((id(heap), id(heap / 2)));
    }
    Dag::new(n, &edges).unwrap()
}

/// Each node `v > 1` draws up to `d` distinct parents among `1..v`.
pub fn random_dag(n: usize, d: usize, seed: u64) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 2..=n {
        let k = rng.gen_range(0..=d.min(v - 1));
        for u in rand::seq::index::sample(&mut rng, v - 1, k) {
            edges.push((u as u32 + 1, v as u32));
        }
    }
    Dag::new(n, &edges).unwrap()
}

/// Sequence of pebble configurations `P_0, ..., P_t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pebbling(pub Vec<BTreeSet<u32>>);

impl Pebbling {
    pub fn from_sets(sets: &[&[u32]]) -> Self {
        Pebbling(sets.iter().map(|s| s.iter().copied().collect()).collect())
    }

    pub fn steps(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The first configuration is not empty.
    NotEmptyAtStart,
    /// `node` was placed at `step` while `missing` was unpebbled the step before.
    MissingParent { step: usize, node: u32, missing: u32 },
}

/// A new pebble at step `i + 1` needs all its parents in `P_i`.
pub fn is_legal(g: &Dag, p: &Pebbling) -> Result<(), Violation> {
    let Some(first) = p.0.first() else { return Ok(()) };
    if !first.is_empty() {
        return Err(Violation::NotEmptyAtStart);
    }
    for (i, pair) in p.0.windows(2).enumerate() {
        for &v in pair[1].difference(&pair[0]) {
            if let Some(&missing) = g.parents(v).iter().find(|u| !pair[0].contains(u)) {
                return Err(Violation::MissingParent { step: i + 1, node: v, missing });
            }
        }
    }
    Ok(())
}

/// Every sink carries a pebble at some step.
pub fn is_complete(g: &Dag, p: &Pebbling) -> bool {
    g.sinks().iter().all(|s| p.0.iter().any(|c| c.contains(s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PebbleCosts {
    pub space: usize,
    pub cc: usize,
    pub time: usize,
    pub st: usize,
}

/// `space` is the peak number of pebbles held during any move, counting a
/// pebble removed in the same move as one placed; `cc` sums `|P_i|`.
pub fn pebble_costs(p: &Pebbling) -> PebbleCosts {
    let time = p.steps();
    let space = p
        .0
        .windows(2)
        .map(|w| w[0].union(&w[1]).count())
        .chain(p.0.iter().map(BTreeSet::len))
        .max()
        .unwrap_or(0);
    let cc = p.0.iter().map(BTreeSet::len).sum();
    PebbleCosts { space, cc, time, st: space * time }
}

/// Smallest peak space over all legal, complete pebblings, by breadth-first
/// search over (configuration, sinks already pebbled).
pub fn min_space_bruteforce(g: &Dag) -> Result<usize, PebbleError> {
    let n = g.len();
    if n > 20 {
        return Err(PebbleError::TooLarge(n));
    }
    if n == 0 {
        return Ok(0);
    }
    let parent_mask: Vec<u32> = (1..=n as u32)
        .map(|v| g.parents(v).iter().fold(0, |m, &u| m | 1 << (u - 1)))
        .collect();
    let sink_mask = g.sinks().iter().fold(0u32, |m, &s| m | 1 << (s - 1));
    for limit in 1..=n {
        if reachable_within(n, &parent_mask, sink_mask, limit) {
            return Ok(limit);
        }
    }
    unreachable!("pebbling in topological order never needs more than n pebbles")
}

fn subsets(mask: u32) -> impl Iterator<Item = u32> {
    // all submasks of `mask`, including 0 and mask itself
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        Some(out)
    })
}

fn reachable_within(n: usize, parent_mask: &[u32], sink_mask: u32, limit: usize) -> bool {
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let mut queue = VecDeque::from([(0u32, 0u32)]);
    seen.insert((0, 0));
    while let Some((config, done)) = queue.pop_front() {
        if done == sink_mask {
            return true;
        }
        let placeable = (0..n)
            .filter(|&v| config & (1 << v) == 0 && parent_mask[v] & !config == 0)
            .fold(0u32, |m, v| m | 1 << v);
        let room = limit - config.count_ones() as usize;
        for add in subsets(placeable).filter(|a| a.count_ones() as usize <= room) {
            for drop in subsets(config) {
                let next = (config & !drop) | add;
                let key = (next, done | (next & sink_mask));
                if seen.insert(key) {
                    queue.push_back(key);
                }
            }
        }
    }
    false
}

/// Byte framing of labeling queries: a big-endian node id on
/// `ceil(bits / 8)` bytes, where `bits = max(1, ceil(log2(n + 1)))`, then the
/// input for a source or the parents' labels in order.
#[derive(Clone, Copy, Debug)]
pub struct LabelFraming {
    id_bytes: usize,
    label_bytes: usize,
}

impl LabelFraming {
    pub fn new(n: usize, label_bytes: usize) -> Self {
        let bits = (usize::BITS - n.leading_zeros()).max(1) as usize;
        LabelFraming { id_bytes: bits.div_ceil(8), label_bytes }
    }

    pub fn query(&self, v: u32, inputs: &[&[u8]]) -> Vec<u8> {
        let mut q = Vec::with_capacity(self.id_bytes + inputs.iter().map(|i| i.len()).sum::<usize>());
        q.extend_from_slice(&(v as u64).to_be_bytes()[8 - self.id_bytes..]);
        for i in inputs {
            q.extend_from_slice(i);
        }
        q
    }

    /// Node id and input segments, or `None` when the bytes don't fit the
    /// framing for any node of `g`.
    pub fn parse<'q>(&self, g: &Dag, x_len: usize, query: &'q [u8]) -> Option<(u32, Vec<&'q [u8]>)> {
        if query.len() < self.id_bytes {
            return None;
        }
        let (id, rest) = query.split_at(self.id_bytes);
        let v = id.iter().fold(0u64, |a, &b| a << 8 | b as u64);
        if v == 0 || v > g.len() as u64 {
            return None;
        }
        let v = v as u32;
        if g.is_source(v) {
            return (rest.len() == x_len).then(|| (v, vec![rest]));
        }
        let d = g.parents(v).len();
        (rest.len() == d * self.label_bytes).then(|| (v, rest.chunks(self.label_bytes).collect()))
    }
}

/// True labels of every node under `oracle`, computed without charging it.
pub fn true_labels(g: &Dag, x: &[u8], oracle: &OracleHandle) -> Vec<Label> {
    let framing = LabelFraming::new(g.len(), oracle.label_bytes());
    let mut labels: Vec<Option<Label>> = vec![None; g.len()];
    for v in g.topological_order() {
        let q = if g.is_source(v) {
            framing.query(v, &[x])
        } else {
            let ins: Vec<&[u8]> = g.parents(v).iter().map(|&u| labels[u as usize - 1].as_ref().unwrap().as_bytes()).collect();
            framing.query(v, &ins)
        };
        labels[v as usize - 1] = Some(oracle.evaluate(&q));
    }
    labels.into_iter().map(Option::unwrap).collect()
}

/// Read a pebbling off a labeling trace. A node is placed in the round its
/// correct labeling query is asked, and stays while its label is next seen
/// as a query input rather than being asked for again.
pub fn extract_pebbling(trace: &Trace, g: &Dag, x: &[u8], oracle: &OracleHandle) -> Result<Pebbling, PebbleError> {
    let labels = true_labels(g, x, oracle);
    let by_label: HashMap<&[u8], u32> = labels.iter().enumerate().map(|(i, l)| (l.as_bytes(), i as u32 + 1)).collect();
    let framing = LabelFraming::new(g.len(), oracle.label_bytes());
    let t = trace.rounds();

    #[derive(Clone, Copy, PartialEq)]
    enum Event {
        Asked,
        Used,
    }
    // events[v][round]
    let mut events: Vec<HashMap<usize, Vec<Event>>> = vec![HashMap::new(); g.len()];
    for (r, batch) in trace.queries.iter().enumerate() {
        let round = r + 1;
        for (index, q) in batch.iter().enumerate() {
            let (v, segs) = framing.parse(g, x.len(), q).ok_or(PebbleError::MalformedQuery { round, index })?;
            let correct = if g.is_source(v) {
                segs[0] == x
            } else {
                g.parents(v).iter().zip(&segs).all(|(&u, s)| labels[u as usize - 1].as_bytes() == *s)
            };
            if correct {
                events[v as usize - 1].entry(round).or_default().push(Event::Asked);
            }
            if !g.is_source(v) {
                for s in segs {
                    if let Some(&u) = by_label.get(s) {
                        events[u as usize - 1].entry(round).or_default().push(Event::Used);
                    }
                }
            }
        }
    }

    let mut configs = vec![BTreeSet::new(); t + 1];
    for (vi, ev) in events.iter().enumerate() {
        let v = vi as u32 + 1;
        let mut rounds: Vec<usize> = ev.keys().copied().collect();
        rounds.sort_unstable();
        for (j, config) in configs.iter_mut().enumerate().skip(1) {
            let asked_now = ev.get(&j).is_some_and(|e| e.contains(&Event::Asked));
            let next_is_use = rounds
                .iter()
                .find(|&&r| r > j)
                .is_some_and(|r| ev[r].contains(&Event::Used));
            if asked_now || next_is_use {
                config.insert(v);
            }
        }
    }
    Ok(Pebbling(configs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert_eq!(Dag::new(2, &[(1, 2), (2, 1)]), Err(PebbleError::Cycle));
        assert_eq!(Dag::new(2, &[(1, 3)]), Err(PebbleError::BadNode(3)));
        assert_eq!(Dag::new(2, &[(2, 2)]), Err(PebbleError::SelfLoop(2)));
        let g = Dag::new(3, &[(2, 3), (1, 3)]).unwrap();
        assert_eq!(g.parents(3), &[1, 2]);
        assert_eq!(g.sinks(), &[3]);
    }

    #[test]
    fn generators_have_expected_shape() {
        assert_eq!(path(5).sinks(), &[5]);
        let p = pyramid(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.sinks(), &[6]);
        assert_eq!(p.parents(6), &[4, 5]);
        let t = binary_tree(2);
        assert_eq!(t.len(), 7);
        assert_eq!(t.sinks(), &[7]);
        assert_eq!(t.max_indegree(), 2);
        assert!(random_dag(12, 3, 1).max_indegree() <= 3);
        assert_eq!(random_dag(12, 3, 1), random_dag(12, 3, 1));
    }

    #[test]
    fn text_round_trip_and_names() {
        let g = pyramid(3);
        assert_eq!(Dag::parse(&g.to_text()).unwrap(), g);
        assert_eq!(Dag::named("path8").unwrap(), path(8));
        assert_eq!(Dag::named("random10_2_7").unwrap(), random_dag(10, 2, 7));
        assert!(Dag::named("circle3").is_none());
        assert!(Dag::parse("n=2\n1 x\n").is_err());
    }

    #[test]
    fn legality_examples() {
        let single = path(1);
        assert_eq!(is_legal(&single, &Pebbling::from_sets(&[&[], &[1]])), Ok(()));
        let edge = path(2);
        assert_eq!(
            is_legal(&edge, &Pebbling::from_sets(&[&[], &[2]])),
            Err(Violation::MissingParent { step: 1, node: 2, missing: 1 })
        );
        let p = Pebbling::from_sets(&[&[], &[1], &[1, 2], &[2], &[2, 3]]);
        assert_eq!(is_legal(&path(3), &p), Ok(()));
        assert!(is_complete(&path(3), &p));
        let c = pebble_costs(&p);
        assert_eq!((c.space, c.cc), (2, 6));
        assert_eq!(is_legal(&edge, &Pebbling::from_sets(&[&[1]])), Err(Violation::NotEmptyAtStart));
    }

    #[test]
    fn cost_examples() {
        let c = pebble_costs(&Pebbling::from_sets(&[&[], &[1], &[1, 2]]));
        assert_eq!((c.space, c.cc, c.time), (2, 3, 2));
        let c = pebble_costs(&Pebbling::from_sets(&[&[]]));
        assert_eq!((c.space, c.cc, c.time, c.st), (0, 0, 0, 0));
    }

    #[test]
    fn min_space_examples() {
        assert_eq!(min_space_bruteforce(&path(1)), Ok(1));
        assert_eq!(min_space_bruteforce(&path(3)), Ok(2));
        assert_eq!(min_space_bruteforce(&pyramid(2)), Ok(3));
        for n in 2..=8 {
            assert_eq!(min_space_bruteforce(&path(n)), Ok(2));
        }
        assert_eq!(min_space_bruteforce(&path(21)), Err(PebbleError::TooLarge(21)));
    }

    #[test]
    fn framing_round_trip() {
        let g = pyramid(3);
        let f = LabelFraming::new(g.len(), 8);
        let q = f.query(6, &[&[1; 8], &[2; 8]]);
        let (v, segs) = f.parse(&g, 5, &q).unwrap();
        assert_eq!(v, 6);
        assert_eq!(segs, vec![&[1u8; 8][..], &[2u8; 8][..]]);
        assert!(f.parse(&g, 5, &q[..10]).is_none());
        assert!(f.parse(&g, 5, &[9, 0, 0, 0, 0, 0]).is_none());
        assert_eq!(f.parse(&g, 5, &[1, 7, 7, 7, 7, 7]).unwrap().0, 1);
    }
}
