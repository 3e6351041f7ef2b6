//! One-time private locally decodable code: split the message into blocks,
//! encode each with a binary block code, then hide the layout behind a secret
//! permutation and a one-time pad.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{self, Probe};
use crate::ecc::justesen::InnerDecode;
use crate::ecc::{EccError, Justesen, JustesenParams};
use crate::stats::{hypergeometric_pmf, LnFactorial};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PrivError {
    #[error("randomness stream ran dry")]
    InsufficientRandomness,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("message has {got} bits, expected {expected}")]
    MessageLength { expected: usize, got: usize },
    #[error("index {0} out of range")]
    Index(usize),
    #[error("block decoding failed")]
    Decode,
    #[error(transparent)]
    Code(#[from] EccError),
}

/// Source of key-generation randomness, read a few bits at a time.
pub trait BitSource {
    /// Next `n <= 64` bits as a big-endian integer.
    fn take(&mut self, n: usize) -> Result<u64, PrivError>;
}

/// Bits from an RNG; never runs dry.
pub struct RngBits<R>(pub R);

impl<R: Rng> BitSource for RngBits<R> {
    fn take(&mut self, n: usize) -> Result<u64, PrivError> {
        let v: u64 = self.0.gen();
        Ok(if n == 64 { v } else { v & ((1u64 << n) - 1) })
    }
}

/// A finite bit string.
pub struct SliceBits<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> SliceBits<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        SliceBits { bits, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl BitSource for SliceBits<'_> {
    fn take(&mut self, n: usize) -> Result<u64, PrivError> {
        let end = self.pos + n;
        if end > self.bits.len() {
            return Err(PrivError::InsufficientRandomness);
        }
        let v = bits::to_uint(&self.bits[self.pos..end]);
        self.pos = end;
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivParams {
    /// Message length in bits.
    pub k_priv: usize,
    /// Code applied to each message block.
    pub block: JustesenParams,
    /// Tolerated corruption rate of the whole scrambled word.
    pub rho: f64,
}

impl PrivParams {
    pub fn validate(&self) -> Result<(), PrivError> {
        let b = self.block_message_bits();
        if b == 0 || self.k_priv == 0 || !self.k_priv.is_multiple_of(b) {
            return Err(PrivError::BadParams(format!(
                "block message size {b} must divide the message length {}",
                self.k_priv
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(PrivError::BadParams(format!("rho {} outside [0, 1)", self.rho)));
        }
        Ok(())
    }

    pub fn block_message_bits(&self) -> usize {
        self.block.message_bits()
    }

    pub fn blocks(&self) -> usize {
        self.k_priv / self.block_message_bits()
    }

    /// Positions read per decode.
    pub fn locality(&self) -> usize {
        self.block.block_bits()
    }

    pub fn codeword_bits(&self) -> usize {
        self.blocks() * self.locality()
    }

    /// Flips the channel may make.
    pub fn flip_budget(&self) -> usize {
        (self.rho * self.codeword_bits() as f64).floor() as usize
    }

    /// Randomness consumed by key generation is below this with overwhelming
    /// probability: each rejection-sampled draw is charged twice its width.
    pub fn randomness_bits(&self) -> usize {
        let k = self.codeword_bits();
        let draws: usize = (1..k).map(|j| draw_width(j as u64)).sum();
        2 * draws + k
    }
}

/// Bits needed to name a value in `0..=j`.
fn draw_width(j: u64) -> usize {
    (64 - j.leading_zeros()) as usize
}

/// Permutation and pad. `pi[j]` is the output position of scrambled-word bit `j`.
#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKey {
    pub pi: Vec<u32>,
    pub mask: Vec<bool>,
}

/// Key fixture format: permutation plus packed pad.
#[derive(Debug, Serialize, Deserialize)]
pub struct KeyFile {
    pub pi: Vec<u32>,
    pub mask_hex: String,
}

impl SecretKey {
    pub fn to_file(&self) -> KeyFile {
        KeyFile {
            pi: self.pi.clone(),
            mask_hex: hex::encode(bits::pack(&self.mask)),
        }
    }

    pub fn from_file(file: &KeyFile) -> Result<Self, PrivError> {
        let bytes = hex::decode(&file.mask_hex).map_err(|e| PrivError::BadParams(e.to_string()))?;
        if bytes.len() * 8 < file.pi.len() {
            return Err(PrivError::BadParams("pad shorter than permutation".into()));
        }
        Ok(SecretKey {
            pi: file.pi.clone(),
            mask: bits::unpack(&bytes, file.pi.len()),
        })
    }
}

/// Fisher-Yates over the codeword positions with rejection-sampled indices,
/// then one pad bit per position.
pub fn genkey_priv(params: &PrivParams, stream: &mut dyn BitSource) -> Result<SecretKey, PrivError> {
    params.validate()?;
    let k = params.codeword_bits();
    let mut pi: Vec<u32> = (0..k as u32).collect();
    for j in (1..k).rev() {
        let width = draw_width(j as u64);
        let pick = loop {
            let v = stream.take(width)?;
            if v <= j as u64 {
                break v as usize;
            }
        };
        pi.swap(j, pick);
    }
    let mut mask = Vec::with_capacity(k);
    for _ in 0..k {
        mask.push(stream.take(1)? == 1);
    }
    Ok(SecretKey { pi, mask })
}

pub fn enc_priv(params: &PrivParams, code: &Justesen, msg: &[bool], key: &SecretKey) -> Result<Vec<bool>, PrivError> {
    params.validate()?;
    if msg.len() != params.k_priv {
        return Err(PrivError::MessageLength { expected: params.k_priv, got: msg.len() });
    }
    let mut scrambled = vec![false; params.codeword_bits()];
    let b = params.block_message_bits();
    for (i, chunk) in msg.chunks(b).enumerate() {
        let block = code.encode(chunk)?;
        for (t, bit) in block.into_iter().enumerate() {
            let j = i * params.locality() + t;
            scrambled[key.pi[j] as usize] = bit;
        }
    }
    for (y, m) in scrambled.iter_mut().zip(&key.mask) {
        *y ^= m;
    }
    Ok(scrambled)
}

/// Read the block holding message bit `index`, unpad, decode.
pub fn dec_priv(
    params: &PrivParams,
    code: &Justesen,
    index: usize,
    word: &mut Probe,
    key: &SecretKey,
) -> Result<bool, PrivError> {
    let block = decode_block(params, code, index / params.block_message_bits(), word, key)?;
    Ok(block[index % params.block_message_bits()])
}

/// Decode one whole message block through the key.
pub fn decode_block(
    params: &PrivParams,
    code: &Justesen,
    block: usize,
    word: &mut Probe,
    key: &SecretKey,
) -> Result<Vec<bool>, PrivError> {
    if block >= params.blocks() {
        return Err(PrivError::Index(block * params.block_message_bits()));
    }
    let ell = params.locality();
    let received: Vec<bool> = (0..ell)
        .map(|t| {
            let pos = key.pi[block * ell + t] as usize;
            word.read(pos) ^ key.mask[pos]
        })
        .collect();
    code.decode(&received).map_err(|_| PrivError::Decode)
}

/// Union-bound failure estimate in two forms: as printed, `k (e/4)^(-rho l)`,
/// which grows with `rho l`, and the decaying reading `k (4/e)^(-rho l)`.
/// Both are clamped to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpsBound {
    pub printed: f64,
    pub decaying: f64,
}

pub fn eps_ops_bound(k: usize, rho: f64, ell: usize) -> OpsBound {
    let e = std::f64::consts::E;
    let x = rho * ell as f64;
    OpsBound {
        printed: (k as f64 * (e / 4.0).powf(-x)).min(1.0),
        decaying: (k as f64 * (4.0 / e).powf(-x)).min(1.0),
    }
}

/// `curve[e]`: probability the block decoder fails when `e` uniformly random
/// positions of one block are flipped. Exact: inner positions are classified
/// by enumeration and the outer decoder fails iff `2 * errors + erasures`
/// exceeds its redundancy.
pub fn block_failure_curve(code: &Justesen) -> Vec<f64> {
    let p = code.params();
    let width = 2 * p.m as usize;
    let ell = p.block_bits();
    let need = p.n_out - p.k_out + 1;
    // dp[e][u]: number of flip sets on the positions seen so far with e flips
    // and u units of damage (capped at need).
    let mut dp = vec![vec![0f64; need + 1]; ell + 1];
    dp[0][0] = 1.0;
    let mut seen = 0;
    for inner in code.inner() {
        // by weight: (clean, tie, wrong)
        let mut outcome = vec![[0f64; 3]; width + 1];
        for mask in 0u32..(1 << width) {
            let slot = match inner.decode(mask) {
                InnerDecode::Symbol(0) => 0,
                InnerDecode::Tie => 1,
                InnerDecode::Symbol(_) => 2,
            };
            outcome[mask.count_ones() as usize][slot] += 1.0;
        }
        let mut next = vec![vec![0f64; need + 1]; ell + 1];
        for e in 0..=seen {
            for u in 0..=need {
                let here = dp[e][u];
                if here == 0.0 {
                    continue;
                }
                for (c, counts) in outcome.iter().enumerate() {
                    for (units, &n) in counts.iter().enumerate() {
                        if n > 0.0 {
                            next[e + c][(u + units).min(need)] += here * n;
                        }
                    }
                }
            }
        }
        dp = next;
        seen += width;
    }
    let lf = LnFactorial::new(ell);
    (0..=ell)
        .map(|e| dp[e][need] / lf.ln_choose(ell, e).exp())
        .collect()
}

/// Failure probabilities for a channel that flips `flips` positions chosen
/// without knowledge of the key.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScrambleBound {
    /// A given block fails.
    pub per_block: f64,
    /// Some block fails (union bound, clamped to 1).
    pub any_block: f64,
}

pub fn scramble_bound(params: &PrivParams, curve: &[f64], flips: usize) -> ScrambleBound {
    let total = params.codeword_bits();
    let ell = params.locality();
    let lf = LnFactorial::new(total);
    let per_block: f64 = (0..=ell.min(flips))
        .map(|e| hypergeometric_pmf(&lf, total, ell, flips, e) * curve[e])
        .sum();
    ScrambleBound {
        per_block,
        any_block: (params.blocks() as f64 * per_block).min(1.0),
    }
}

/// Worst case of [`scramble_bound`] over every flip count up to `max_flips`.
pub fn scramble_bound_upto(params: &PrivParams, curve: &[f64], max_flips: usize) -> ScrambleBound {
    (0..=max_flips)
        .map(|f| scramble_bound(params, curve, f))
        .fold(ScrambleBound { per_block: 0.0, any_block: 0.0 }, |a, b| ScrambleBound {
            per_block: a.per_block.max(b.per_block),
            any_block: a.any_block.max(b.any_block),
        })
}

/// Random key for callers that do not derive one.
pub fn random_key(params: &PrivParams, rng: &mut impl Rng) -> Result<SecretKey, PrivError> {
    genkey_priv(params, &mut RngBits(rng))
}
