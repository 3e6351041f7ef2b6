//! Justesen-style concatenation: an outer Reed-Solomon code over GF(2^m) with
//! a different Wozencraft inner code `s -> (s, a_j * s)` on each position.

use serde::{Deserialize, Serialize};

use super::gf::Field;
use super::rs::ReedSolomon;
use super::EccError;
use crate::bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JustesenParams {
    pub m: u32,
    pub n_out: usize,
    pub k_out: usize,
}

/// Total flips and the (inner word, full error) choices behind them.
type Plan = (u32, Vec<(usize, bool)>);

impl JustesenParams {
    pub fn new(m: u32, n_out: usize, k_out: usize) -> Self {
        JustesenParams { m, n_out, k_out }
    }

    pub fn message_bits(&self) -> usize {
        self.k_out * self.m as usize
    }

    pub fn block_bits(&self) -> usize {
        2 * self.m as usize * self.n_out
    }

    pub fn rate(&self) -> f64 {
        self.k_out as f64 / (2.0 * self.n_out as f64)
    }
}

/// Result of nearest-codeword decoding of one inner block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerDecode {
    Symbol(u16),
    /// Two or more codewords are equally close.
    Tie,
}

/// The inner code attached to one outer position.
#[derive(Clone, Debug)]
pub struct InnerCode {
    m: u32,
    codewords: Vec<u32>,
}

impl InnerCode {
    pub fn new(field: &Field, multiplier: u16) -> Self {
        let m = field.degree();
        let codewords = (0..field.size() as u16)
            .map(|s| ((s as u32) << m) | field.mul(multiplier, s) as u32)
            .collect();
        InnerCode { m, codewords }
    }

    pub fn bits(&self) -> usize {
        2 * self.m as usize
    }

    pub fn encode(&self, sym: u16) -> u32 {
        self.codewords[sym as usize]
    }

    pub fn decode(&self, word: u32) -> InnerDecode {
        let mut best = u32::MAX;
        let mut best_sym = 0u16;
        let mut tied = false;
        for (s, &cw) in self.codewords.iter().enumerate() {
            let d = (cw ^ word).count_ones();
            if d < best {
                best = d;
                best_sym = s as u16;
                tied = false;
            } else if d == best {
                tied = true;
            }
        }
        if tied {
            InnerDecode::Tie
        } else {
            InnerDecode::Symbol(best_sym)
        }
    }

    /// Minimum nonzero codeword weight.
    pub fn min_distance(&self) -> u32 {
        self.codewords[1..].iter().map(|c| c.count_ones()).min().unwrap_or(0)
    }

    /// Fewest flips that force a tie and that force a wrong symbol, with the
    /// codeword the flips are taken from. A tie needs an even-weight codeword.
    pub fn attack_costs(&self) -> InnerAttack {
        let mut error = (u32::MAX, 0u32);
        let mut tie = None::<(u32, u32)>;
        for &cw in &self.codewords[1..] {
            let w = cw.count_ones();
            if w / 2 + 1 < error.0 {
                error = (w / 2 + 1, cw);
            }
            if w % 2 == 0 && tie.is_none_or(|(c, _)| w / 2 < c) {
                tie = Some((w / 2, cw));
            }
        }
        InnerAttack {
            error_flips: error.0,
            error_source: error.1,
            tie_flips: tie.map(|t| t.0),
            tie_source: tie.map_or(0, |t| t.1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InnerAttack {
    pub error_flips: u32,
    pub error_source: u32,
    pub tie_flips: Option<u32>,
    pub tie_source: u32,
}

#[derive(Clone, Debug)]
pub struct Justesen {
    params: JustesenParams,
    outer: ReedSolomon,
    inner: Vec<InnerCode>,
}

impl Justesen {
    pub fn new(params: JustesenParams) -> Result<Self, EccError> {
        let field = Field::new(params.m)?;
        let outer = ReedSolomon::new(field, params.n_out, params.k_out)?;
        let inner = (0..params.n_out)
            .map(|j| InnerCode::new(outer.field(), outer.point(j)))
            .collect();
        Ok(Justesen { params, outer, inner })
    }

    pub fn params(&self) -> JustesenParams {
        self.params
    }

    pub fn inner(&self) -> &[InnerCode] {
        &self.inner
    }

    pub fn encode(&self, msg: &[bool]) -> Result<Vec<bool>, EccError> {
        let m = self.params.m as usize;
        if msg.len() != self.params.message_bits() {
            return Err(EccError::Length { expected: self.params.message_bits(), got: msg.len() });
        }
        let symbols: Vec<u16> = msg.chunks(m).map(|c| bits::to_uint(c) as u16).collect();
        let outer = self.outer.encode(&symbols)?;
        let mut out = Vec::with_capacity(self.params.block_bits());
        for (sym, code) in outer.iter().zip(&self.inner) {
            out.extend(bits::from_uint(code.encode(*sym) as u64, 2 * m));
        }
        Ok(out)
    }

    /// Inner decode per position (ties become erasures), then outer decode.
    pub fn decode(&self, word: &[bool]) -> Result<Vec<bool>, EccError> {
        let m = self.params.m as usize;
        if word.len() != self.params.block_bits() {
            return Err(EccError::Length { expected: self.params.block_bits(), got: word.len() });
        }
        let received: Vec<Option<u16>> = word
            .chunks(2 * m)
            .zip(&self.inner)
            .map(|(chunk, code)| match code.decode(bits::to_uint(chunk) as u32) {
                InnerDecode::Symbol(s) => Some(s),
                InnerDecode::Tie => None,
            })
            .collect();
        let symbols = self.outer.decode(&received)?;
        Ok(symbols.iter().flat_map(|&s| bits::from_uint(s as u64, m)).collect())
    }

    /// Cheapest flip pattern (bit offsets inside one block) that defeats the
    /// decoder. Every pattern with fewer flips decodes correctly: an inner
    /// position only misbehaves once it costs at least these many flips, and
    /// the outer decoder only fails once `2 * errors + erasures > n - k`.
    pub fn cheapest_kill(&self) -> Vec<usize> {
        let need = self.params.n_out - self.params.k_out + 1;
        let attacks: Vec<InnerAttack> = self.inner.iter().map(InnerCode::attack_costs).collect();
        // best[u] = (flips, choices) reaching at least u units, u capped at need.
        let mut best: Vec<Option<Plan>> = vec![None; need + 1];
        best[0] = Some((0, Vec::new()));
        for (j, a) in attacks.iter().enumerate() {
            let mut next = best.clone();
            for (u, entry) in best.iter().enumerate() {
                let Some((cost, picks)) = entry else { continue };
                let mut options = vec![(2usize, a.error_flips, true)];
                if let Some(t) = a.tie_flips {
                    options.push((1, t, false));
                }
                for (units, flips, is_error) in options {
                    let v = (u + units).min(need);
                    let c = cost + flips;
                    if next[v].as_ref().is_none_or(|(bc, _)| c < *bc) {
                        let mut p = picks.clone();
                        p.push((j, is_error));
                        next[v] = Some((c, p));
                    }
                }
            }
            best = next;
        }
        let (_, picks) = best[need].clone().expect("every inner code admits an error");
        let width = 2 * self.params.m as usize;
        let mut pattern = Vec::new();
        for (j, is_error) in picks {
            let a = attacks[j];
            let (source, flips) = if is_error {
                (a.error_source, a.error_flips)
            } else {
                (a.tie_source, a.tie_flips.unwrap())
            };
            let support: Vec<usize> = (0..width).filter(|&b| source >> (width - 1 - b) & 1 == 1).collect();
            pattern.extend(support.iter().take(flips as usize).map(|&b| j * width + b));
            if flips as usize > support.len() {
                let extra = (0..width).filter(|b| !support.contains(b));
                pattern.extend(extra.take(flips as usize - support.len()).map(|b| j * width + b));
            }
        }
        pattern
    }
}
