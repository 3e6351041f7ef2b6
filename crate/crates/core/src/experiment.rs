//! Batch runs of the games from a JSON spec. Trial `i` draws everything from
//! `(seed, i)`, so results do not depend on the worker count.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Probe;
use crate::framework::{FinalParams, FrameworkError, Scheme};
use crate::games::{
    run_safety_trial, run_two_phase_experiment, two_phase_advantage, Attacker, CoinFlip, DecodeFailure,
    Distinguisher, GameConfig, GameOutcome, LdcGame, PrivGame, Strategy,
};
use crate::ldcstar::{concentrate_on_blocks, dec_jrep, enc_jrep};
use crate::privldc::{block_failure_curve, scramble_bound_upto, PrivError};
use crate::safefn::{delta_hash_iterate, SafeFn, SafeFnSpec};
use crate::seeds;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    Private(#[from] PrivError),
    #[error("bad experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistinguisherKind {
    DecodeFailure,
    CoinFlip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum Game {
    LdcSec {
        attacker: Strategy,
        #[serde(default)]
        config: GameConfig,
    },
    PrivLdcSec {
        attacker: Strategy,
        #[serde(default)]
        leak_key: bool,
    },
    TwoPhase {
        attacker: Strategy,
        distinguisher: DistinguisherKind,
    },
    /// Seed code alone against whole-block destruction at a quarter of the
    /// certified block rate.
    Jrep,
    /// Chain guesser against the configured iterated hash.
    Safety {
        max_time: u64,
        max_cq: u64,
        /// Oracle width; defaults to the params' `w`.
        #[serde(default)]
        w: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(flatten)]
    pub game: Game,
    #[serde(default)]
    pub params: FinalParams,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub strategy: String,
    pub ham: usize,
    pub win: bool,
    pub worst_index: Option<usize>,
    pub est_prob: Option<f64>,
    pub rounds_used: usize,
    pub cq_used: u64,
}

impl TrialRow {
    fn from_game(trial: u64, o: GameOutcome) -> Self {
        TrialRow {
            trial,
            strategy: o.strategy,
            ham: o.ham,
            win: o.win,
            worst_index: Some(o.worst_index),
            est_prob: Some(o.est_prob),
            rounds_used: o.rounds_used,
            cq_used: o.cq_used,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Version of the per-trial CSV layout that accompanies this summary.
    pub csv_version: u32,
    pub game: String,
    pub trials: u64,
    pub wins: u64,
    /// Win rate, or the distinguishing advantage for the two-phase game.
    pub empirical_rate: f64,
    pub theory_bound: f64,
    /// Sampling allowance added to the bound before comparing.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

fn par_trials<T: Send, E: Send>(
    trials: u64,
    workers: usize,
    f: impl Fn(u64) -> Result<T, E> + Sync + Send,
) -> Result<Vec<T>, E> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool starts");
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

fn summarize(game: &str, rows: &[TrialRow], rate: f64, bound: f64, slack: f64) -> Summary {
    Summary {
        csv_version: CSV_VERSION,
        game: game.into(),
        trials: rows.len() as u64,
        wins: rows.iter().filter(|r| r.win).count() as u64,
        empirical_rate: rate,
        theory_bound: bound,
        slack,
        pass: rate <= bound + slack,
    }
}

fn win_rate(rows: &[TrialRow]) -> f64 {
    rows.iter().filter(|r| r.win).count() as f64 / rows.len().max(1) as f64
}

pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<Report, ExperimentError> {
    if spec.trials == 0 {
        return Err(ExperimentError::Spec("trials must be positive".into()));
    }
    let master = seeds::master_from_u64(spec.seed);
    match &spec.game {
        Game::LdcSec { attacker, config } => {
            let scheme = Scheme::new(spec.params.clone())?;
            let game = LdcGame::new(&scheme, *config);
            let rows = par_trials(spec.trials, workers, |t| {
                game.play(attacker, &master, t).map(|o| TrialRow::from_game(t, o))
            })?;
            let bound = scheme.summary().eps_upper;
            Ok(Report { summary: summarize("ldc_sec", &rows, win_rate(&rows), bound, 0.0), rows })
        }
        Game::PrivLdcSec { attacker, leak_key } => {
            let scheme = Scheme::new(spec.params.clone())?;
            let params = &spec.params.private;
            let game = PrivGame::new(params, scheme.block_code(), spec.params.w);
            let rows = par_trials(spec.trials, workers, |t| {
                game.play(attacker, &master, t, *leak_key).map(|o| TrialRow::from_game(t, o))
            })?;
            let curve = block_failure_curve(scheme.block_code());
            let bound = scramble_bound_upto(params, &curve, params.flip_budget()).any_block;
            Ok(Report { summary: summarize("priv_ldc_sec", &rows, win_rate(&rows), bound, 0.0), rows })
        }
        Game::TwoPhase { attacker, distinguisher } => {
            let scheme = Scheme::new(spec.params.clone())?;
            let budget = scheme.flip_budget();
            let d: &dyn Distinguisher = match distinguisher {
                DistinguisherKind::DecodeFailure => &DecodeFailure,
                DistinguisherKind::CoinFlip => &CoinFlip,
            };
            let outcomes = par_trials(spec.trials, workers, |t| {
                run_two_phase_experiment(&scheme, attacker, d, budget, &master, t).map(|o| (t, o))
            })?;
            let rows: Vec<TrialRow> = outcomes
                .iter()
                .map(|(t, o)| TrialRow {
                    trial: *t,
                    strategy: attacker.name(),
                    ham: o.ham,
                    win: o.guess == o.hybrid,
                    worst_index: None,
                    est_prob: None,
                    rounds_used: 0,
                    cq_used: 0,
                })
                .collect();
            let outs: Vec<_> = outcomes.into_iter().map(|(_, o)| o).collect();
            let bound = scheme.params().q as f64 * scheme.delta() / 2.0;
            let slack = 3.0 / (spec.trials as f64).sqrt();
            Ok(Report { summary: summarize("two_phase", &rows, two_phase_advantage(&outs), bound, slack), rows })
        }
        Game::Jrep => {
            let scheme = Scheme::new(spec.params.clone())?;
            let jrep = &spec.params.jrep;
            let code = scheme.seed_code();
            let flips = jrep_flips(&scheme);
            let rows = par_trials(spec.trials, workers, |trial| {
                let mut rng = seeds::rng(&master, "encode", trial);
                let msg: Vec<bool> = (0..jrep.k_jrep()).map(|_| rng.gen()).collect();
                let mut word = enc_jrep(code, jrep, &msg).map_err(FrameworkError::from)?;
                for &p in &flips {
                    word[p] = !word[p];
                }
                let mut drng = seeds::rng(&master, "decode", trial);
                let decoded = dec_jrep(code, jrep, &mut Probe::new(&word), 0, &mut drng);
                Ok::<_, ExperimentError>(TrialRow {
                    trial,
                    strategy: "block_concentration".into(),
                    ham: flips.len(),
                    win: decoded.as_ref() != Ok(&msg),
                    worst_index: None,
                    est_prob: None,
                    rounds_used: 0,
                    cq_used: 0,
                })
            })?;
            let bound = (-(jrep.alpha as f64) / 24.0).exp();
            let slack = 3.0 * (bound * (1.0 - bound) / spec.trials as f64).sqrt();
            Ok(Report { summary: summarize("jrep", &rows, win_rate(&rows), bound, slack), rows })
        }
        Game::Safety { max_time, max_cq, w } => {
            let scheme = Scheme::new(spec.params.clone())?;
            let SafeFn::HashIterate(t) = scheme.safefn().function else {
                return Err(ExperimentError::Spec("safety runs need an iterated hash".into()));
            };
            let w = w.unwrap_or(spec.params.w);
            let safefn = SafeFnSpec { w, ..scheme.safefn().clone() };
            let rows = par_trials(spec.trials, workers, |trial| {
                let o = run_safety_trial(&safefn, *max_time, *max_cq, &master, trial);
                Ok::<_, ExperimentError>(TrialRow {
                    trial,
                    strategy: "key_searcher".into(),
                    ham: 0,
                    win: o.success,
                    worst_index: None,
                    est_prob: None,
                    rounds_used: o.rounds_used,
                    cq_used: o.cq_used,
                })
            })?;
            let bound = delta_hash_iterate(t, *max_cq, w as u32);
            Ok(Report { summary: summarize("safety", &rows, win_rate(&rows), bound, 0.0), rows })
        }
    }
}

/// Block-concentration flips at the seed code's tolerated rate: the
/// certified block rate over four, times the codeword length.
pub fn jrep_flips(scheme: &Scheme) -> Vec<usize> {
    let jrep = &scheme.params().jrep;
    let count = (jrep.rho(scheme.seed_block_rho()) * jrep.codeword_bits() as f64).floor() as usize;
    concentrate_on_blocks(scheme.seed_code(), jrep, count)
}

/// Bumped whenever the columns of [`TrialRow`] change.
pub const CSV_VERSION: u32 = 1;

pub fn write_csv<W: Write>(rows: &[TrialRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FinalParams {
        let mut p = FinalParams::default();
        p.private.k_priv = 64;
        p.jrep.n_rep = 16;
        p.jrep.alpha = 48;
        p.safefn = crate::safefn::SafeFnKind::HashIterate { t: 8 };
        p
    }

    #[test]
    fn spec_parses_from_json() {
        let text = r#"{"game":"ldc_sec","attacker":{"strategy":"burst","offset":3},"trials":4,"seed":9}"#;
        let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.game, Game::LdcSec { attacker: Strategy::Burst { rho: None, offset: 3 }, config: GameConfig::default() });
        assert_eq!(spec.params, FinalParams::default());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = ExperimentSpec {
            game: Game::LdcSec { attacker: Strategy::RandomFlips { rho: None }, config: GameConfig { samples: 16, ..GameConfig::default() } },
            params: small(),
            trials: 6,
            seed: 3,
        };
        let a = run_experiment(&spec, 1).unwrap();
        let b = run_experiment(&spec, 4).unwrap();
        assert_eq!(a, b);
        let mut csv_a = Vec::new();
        write_csv(&a.rows, &mut csv_a).unwrap();
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with("trial,strategy,ham,win,worst_index,est_prob,rounds_used,cq_used\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn safety_needs_an_iterated_hash() {
        let mut params = small();
        params.safefn = crate::safefn::SafeFnKind::GraphLabel { dag: "path8".into() };
        let spec = ExperimentSpec { game: Game::Safety { max_time: 3, max_cq: 8, w: None }, params, trials: 1, seed: 0 };
        assert!(matches!(run_experiment(&spec, 1), Err(ExperimentError::Spec(_))));
    }

    #[test]
    fn documented_schema_names_parse() {
        let schema: serde_json::Value = serde_json::from_str(include_str!("../../../docs/experiment-spec.schema.json")).unwrap();
        let names = |v: &serde_json::Value| -> Vec<String> {
            v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
        };
        let attacker = r#"{"strategy": "key_searcher", "t": 1, "q": 1}"#;
        for game in names(&schema["properties"]["game"]["enum"]) {
            let text = format!(
                r#"{{"game": "{game}", "trials": 1, "attacker": {attacker}, "distinguisher": "coin_flip", "max_time": 1, "max_cq": 1}}"#
            );
            serde_json::from_str::<ExperimentSpec>(&text).unwrap();
        }
        for strategy in names(&schema["$defs"]["strategy"]["properties"]["strategy"]["enum"]) {
            serde_json::from_str::<Strategy>(&format!(r#"{{"strategy": "{strategy}", "t": 1, "q": 1}}"#)).unwrap();
        }
        let partial: ExperimentSpec = serde_json::from_str(r#"{"game": "jrep", "trials": 1, "params": {"w": 32}}"#).unwrap();
        assert_eq!(partial.params, FinalParams { w: 32, ..FinalParams::default() });
    }
}
