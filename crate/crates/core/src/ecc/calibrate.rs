//! Certified error tolerance of a concatenated code, found by the
//! block-concentration attacker and spot-checked with random noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::justesen::{Justesen, JustesenParams};
use super::EccError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: JustesenParams,
    pub block_bits: usize,
    /// Size of the cheapest pattern that defeats the decoder.
    pub kill_flips: usize,
    /// Largest flip count every pattern survives.
    pub certified_flips: usize,
    pub rho: f64,
    pub random_trials: usize,
    pub random_failures: usize,
}

pub fn calibrate(params: JustesenParams, random_trials: usize, rng: &mut impl Rng) -> Result<Calibration, EccError> {
    let code = Justesen::new(params)?;
    let block_bits = params.block_bits();
    let kill_flips = code.cheapest_kill().len();
    let certified_flips = kill_flips - 1;
    let mut random_failures = 0;
    for _ in 0..random_trials {
        let msg: Vec<bool> = (0..params.message_bits()).map(|_| rng.gen()).collect();
        let mut cw = code.encode(&msg)?;
        for p in rand::seq::index::sample(rng, block_bits, certified_flips) {
            cw[p] = !cw[p];
        }
        if code.decode(&cw).ok().as_ref() != Some(&msg) {
            random_failures += 1;
        }
    }
    Ok(Calibration {
        params,
        block_bits,
        kill_flips,
        certified_flips,
        rho: certified_flips as f64 / block_bits as f64,
        random_trials,
        random_failures,
    })
}

/// A set of calibrations with the seed and trial count that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub seed: u64,
    pub random_trials: usize,
    pub calibrations: Vec<Calibration>,
}

/// Codes calibrated by default: the private block code and the seed codes.
pub const DEFAULT_CODES: [(u32, usize, usize); 3] = [(4, 15, 4), (6, 21, 7), (6, 63, 21)];

/// Calibrate each code with its own stream derived from `seed`.
pub fn calibrate_all(codes: &[JustesenParams], random_trials: usize, seed: u64) -> Result<CalibrationTable, EccError> {
    let master = crate::seeds::master_from_u64(seed);
    let calibrations = codes
        .iter()
        .enumerate()
        .map(|(i, &p)| calibrate(p, random_trials, &mut crate::seeds::rng(&master, "calibrate", i as u64)))
        .collect::<Result<_, _>>()?;
    Ok(CalibrationTable { seed, random_trials, calibrations })
}

/// Calibrations frozen in the crate fixture.
pub fn frozen() -> CalibrationTable {
    serde_json::from_str(include_str!("../../fixtures/justesen_calibration.json")).expect("calibration fixture parses")
}

/// Frozen certified tolerance for `params`, if calibrated.
pub fn certified_rho(params: JustesenParams) -> Option<f64> {
    frozen().calibrations.into_iter().find(|c| c.params == params).map(|c| c.rho)
}
