//! Repetition of a concatenated code, decoded locally by sampling blocks and
//! taking the most frequent decoding. Used to carry the short random seed.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Probe;
use crate::ecc::{EccError, Justesen, JustesenParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JrepError {
    #[error("no sampled block decoded")]
    NoMajority,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Code(#[from] EccError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JrepParams {
    pub justesen: JustesenParams,
    /// Number of copies of the block.
    pub n_rep: usize,
    /// Blocks sampled per decode.
    pub alpha: usize,
}

impl JrepParams {
    pub fn validate(&self) -> Result<(), JrepError> {
        if self.n_rep == 0 || self.alpha == 0 {
            return Err(JrepError::BadParams("n_rep and alpha must be positive".into()));
        }
        Ok(())
    }

    /// Message length.
    pub fn k_jrep(&self) -> usize {
        self.justesen.message_bits()
    }

    pub fn block_bits(&self) -> usize {
        self.justesen.block_bits()
    }

    pub fn codeword_bits(&self) -> usize {
        self.n_rep * self.block_bits()
    }

    pub fn locality(&self) -> usize {
        self.alpha * self.block_bits()
    }

    /// Tolerated rate given the block code's certified rate.
    pub fn rho(&self, block_rho: f64) -> f64 {
        block_rho / 4.0
    }

    /// Success lower bound `1 - exp(-alpha / 24)`.
    pub fn success_bound(&self) -> f64 {
        1.0 - (-(self.alpha as f64) / 24.0).exp()
    }
}

pub fn enc_jrep(code: &Justesen, params: &JrepParams, msg: &[bool]) -> Result<Vec<bool>, JrepError> {
    params.validate()?;
    let block = code.encode(msg)?;
    Ok(block.repeat(params.n_rep))
}

/// Most frequent value; ties go to the lexicographically smallest.
fn plurality(votes: impl IntoIterator<Item = Vec<bool>>) -> Result<Vec<bool>, JrepError> {
    let mut counts: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    for v in votes {
        *counts.entry(v).or_default() += 1;
    }
    let best = counts.values().copied().max().ok_or(JrepError::NoMajority)?;
    Ok(counts.into_iter().find(|(_, c)| *c == best).unwrap().0)
}

/// Sample `alpha` blocks with replacement, decode each, vote. Failed blocks
/// don't vote. Reads `alpha * block_bits` positions starting at `base`.
pub fn dec_jrep(
    code: &Justesen,
    params: &JrepParams,
    word: &mut Probe,
    base: usize,
    rng: &mut impl Rng,
) -> Result<Vec<bool>, JrepError> {
    let len = params.block_bits();
    let mut votes = Vec::with_capacity(params.alpha);
    for _ in 0..params.alpha {
        let b = rng.gen_range(0..params.n_rep);
        let start = base + b * len;
        let block: Vec<bool> = (start..start + len).map(|p| word.read(p)).collect();
        if let Ok(v) = code.decode(&block) {
            votes.push(v);
        }
    }
    plurality(votes)
}

/// Every block decoded once, for running many decodes of one received word.
/// Sampling from it draws the same indices as [`dec_jrep`] with the same RNG.
#[derive(Clone, Debug)]
pub struct DecodedBlocks {
    blocks: Vec<Option<Vec<bool>>>,
    alpha: usize,
}

impl DecodedBlocks {
    pub fn new(code: &Justesen, params: &JrepParams, word: &[bool]) -> Self {
        let blocks = word
            .chunks(params.block_bits())
            .take(params.n_rep)
            .map(|b| code.decode(b).ok())
            .collect();
        DecodedBlocks { blocks, alpha: params.alpha }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<bool>, JrepError> {
        let n = self.blocks.len();
        let votes: Vec<Vec<bool>> = (0..self.alpha)
            .filter_map(|_| self.blocks[rng.gen_range(0..n)].clone())
            .collect();
        plurality(votes)
    }

    /// Vote over every block rather than a sample.
    pub fn plurality_all(&self) -> Result<Vec<bool>, JrepError> {
        plurality(self.blocks.iter().flatten().cloned())
    }

    /// Fraction of blocks that don't decode to `truth`.
    pub fn bad_fraction(&self, truth: &[bool]) -> f64 {
        let bad = self.blocks.iter().filter(|b| b.as_deref() != Some(truth)).count();
        bad as f64 / self.blocks.len() as f64
    }
}

/// `exp(-eps^2 mu / 2)`.
pub fn chernoff_lower_tail(mu: f64, eps: f64) -> f64 {
    (-eps * eps * mu / 2.0).exp()
}

/// Concentrate `budget` flips on whole blocks, each receiving the cheapest
/// pattern that defeats the block decoder. Positions are relative to the
/// start of the repetition codeword.
pub fn concentrate_on_blocks(code: &Justesen, params: &JrepParams, budget: usize) -> Vec<usize> {
    let kill = code.cheapest_kill();
    let len = params.block_bits();
    let mut flips = Vec::with_capacity(budget);
    for b in 0..params.n_rep {
        let room = budget - flips.len();
        if room == 0 {
            break;
        }
        flips.extend(kill.iter().take(room).map(|&p| b * len + p));
    }
    flips
}
