use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ldc_forge::bits::{self, Probe};
use ldc_forge::ecc::calibrate::{calibrate_all, DEFAULT_CODES};
use ldc_forge::ecc::JustesenParams;
use ldc_forge::experiment::{run_experiment, write_csv, ExperimentSpec};
use ldc_forge::framework::{FinalParams, Scheme};
use ldc_forge::games::{attack_input, decode_flips, AttackView, Attacker, Strategy};
use ldc_forge::pebbling::{min_space_bruteforce, Dag};
use ldc_forge::rom::{run_prom, OracleHandle, RomError};
use ldc_forge::seeds;

#[derive(Parser)]
#[command(name = "ldc-forge", version, about = "Locally decodable codes for resource-bounded channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a message.
    Encode {
        #[command(flatten)]
        config: ConfigArg,
        /// Message as hex; its bit length must match the parameters.
        #[arg(long)]
        message_hex: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode one index, or the whole message.
    Decode {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        codeword: PathBuf,
        #[arg(long, conflicts_with = "all")]
        index: Option<usize>,
        #[arg(long)]
        all: bool,
    },
    /// Run a channel strategy against a codeword and write the result.
    Attack {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        codeword: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyName,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        /// Round limit of the key searcher.
        #[arg(long)]
        t: Option<u64>,
        /// Query limit of the key searcher.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment spec.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        summary: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Inspect a graph.
    Pebble {
        /// Generator name (path8, pyramid3, bintree3, random<n>_<d>_<seed>) or a graph file.
        #[arg(long)]
        graph: String,
        /// Print the minimum pebbling space instead of the graph summary.
        #[arg(long)]
        min_space: bool,
    },
    /// Calibrate concatenated codes and write the table.
    Calibrate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Code as m,n,k; repeatable. Defaults to the built-in set.
        #[arg(long = "code")]
        codes: Vec<String>,
    },
    /// Print derived sizes and bounds.
    Params {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// Config JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyName {
    RandomFlips,
    Burst,
    SeedKiller,
    BlockConcentrator,
    KeySearcher,
}

#[derive(Serialize, Deserialize)]
struct Config {
    #[serde(default)]
    params: FinalParams,
    #[serde(default = "default_oracle_seed")]
    oracle_seed: String,
    #[serde(default)]
    seed: u64,
}

fn default_oracle_seed() -> String {
    hex::encode([0u8; 32])
}

impl Default for Config {
    fn default() -> Self {
        Config { params: FinalParams::default(), oracle_seed: default_oracle_seed(), seed: 0 }
    }
}

#[derive(Serialize, Deserialize)]
struct CodewordFile {
    bits: usize,
    hex: String,
}

/// Failure kinds map to exit codes 1 and 2.
enum Failure {
    Negative(anyhow::Error),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn load_config(arg: &ConfigArg) -> anyhow::Result<(Config, Scheme, OracleHandle)> {
    let config: Config = match &arg.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => Config::default(),
    };
    let scheme = Scheme::new(config.params.clone())?;
    let oracle = OracleHandle::from_hex(&config.oracle_seed, config.params.w)?.without_ledger();
    Ok((config, scheme, oracle))
}

fn read_codeword(path: &Path, expected: usize) -> anyhow::Result<Vec<bool>> {
    let file: CodewordFile = serde_json::from_str(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
    if file.bits != expected {
        bail!("codeword has {} bits, expected {expected}", file.bits);
    }
    Ok(bits::unpack(&hex::decode(&file.hex)?, file.bits))
}

fn write_codeword(path: &Path, word: &[bool]) -> anyhow::Result<()> {
    let file = CodewordFile { bits: word.len(), hex: hex::encode(bits::pack(word)) };
    fs::write(path, serde_json::to_string(&file)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn parse_code(s: &str) -> anyhow::Result<JustesenParams> {
    let parts: Vec<&str> = s.split(',').collect();
    let [m, n, k] = parts[..] else { bail!("code must be m,n,k, got {s}") };
    Ok(JustesenParams::new(m.trim().parse()?, n.trim().parse()?, k.trim().parse()?))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Encode { config, message_hex, out } => {
            let (cfg, scheme, mut oracle) = load_config(&config)?;
            let bytes = hex::decode(message_hex.trim()).context("message is not hex")?;
            if bytes.len() * 8 != scheme.message_bits() {
                return Err(Failure::Input(anyhow::anyhow!(
                    "message has {} bits, expected {}",
                    bytes.len() * 8,
                    scheme.message_bits()
                )));
            }
            let msg = bits::unpack(&bytes, scheme.message_bits());
            let mut rng = seeds::rng(&seeds::master_from_u64(cfg.seed), "encode", 0);
            let word = scheme.enc(&mut oracle, &msg, &mut rng).map_err(anyhow::Error::from)?;
            write_codeword(&out, &word)?;
            println!("{} bits", word.len());
        }
        Command::Decode { config, codeword, index, all } => {
            let (cfg, scheme, mut oracle) = load_config(&config)?;
            let word = read_codeword(&codeword, scheme.codeword_bits())?;
            let mut rng = seeds::rng(&seeds::master_from_u64(cfg.seed), "decode", 0);
            let indices: Vec<usize> = match (index, all) {
                (Some(i), _) if i >= scheme.message_bits() => {
                    return Err(Failure::Input(anyhow::anyhow!("index {i} outside 0..{}", scheme.message_bits())))
                }
                (Some(i), _) => vec![i],
                (None, true) => (0..scheme.message_bits()).collect(),
                (None, false) => return Err(Failure::Input(anyhow::anyhow!("give --index or --all"))),
            };
            let mut out = Vec::with_capacity(indices.len());
            for i in indices {
                let bit = scheme
                    .dec(&mut oracle, i, &mut Probe::new(&word), &mut rng)
                    .map_err(|e| Failure::Negative(anyhow::anyhow!("decoding index {i} failed: {e}")))?;
                out.push(bit);
            }
            if all {
                println!("{}", hex::encode(bits::pack(&out)));
            } else {
                println!("{}", u8::from(out[0]));
            }
        }
        Command::Attack { config, codeword, strategy, rho, offset, t, q, out } => {
            let (cfg, scheme, mut oracle) = load_config(&config)?;
            let word = read_codeword(&codeword, scheme.codeword_bits())?;
            let attacker = match strategy {
                StrategyName::RandomFlips => Strategy::RandomFlips { rho },
                StrategyName::Burst => Strategy::Burst { rho, offset },
                StrategyName::SeedKiller => Strategy::SeedKiller,
                StrategyName::BlockConcentrator => Strategy::BlockConcentrator,
                StrategyName::KeySearcher => Strategy::KeySearcher {
                    t: t.unwrap_or(scheme.safefn().honest_rounds()),
                    q: q.unwrap_or(scheme.params().q),
                },
            };
            let budget = scheme.flip_budget();
            let view = AttackView {
                private: &scheme.params().private,
                block_code: scheme.block_code(),
                scheme: Some(&scheme),
                flip_budget: budget,
                word_bits: word.len(),
                leaked_key: None,
            };
            let coins = seeds::derive(&seeds::master_from_u64(cfg.seed), "coins", 0);
            let alg = attacker.algorithm(view, coins);
            // The channel never sees the message; none of the strategies read it.
            let input = attack_input(&vec![false; scheme.message_bits()], &word);
            let trace = match run_prom(alg.as_ref(), &input, &mut oracle, &attacker.budget()) {
                Ok(trace) => trace,
                Err(RomError::BudgetExceeded { metric, .. }) => {
                    return Err(Failure::Negative(anyhow::anyhow!("attacker exceeded its {metric} budget")))
                }
                Err(e) => return Err(Failure::Input(e.into())),
            };
            let mut flips = decode_flips(&trace.output);
            flips.sort_unstable();
            flips.dedup();
            if flips.len() > budget || flips.iter().any(|&p| p >= word.len()) {
                return Err(Failure::Negative(anyhow::anyhow!(
                    "rejected: {} flips against a budget of {budget}",
                    flips.len()
                )));
            }
            let mut corrupted = word;
            for p in &flips {
                corrupted[*p] = !corrupted[*p];
            }
            write_codeword(&out, &corrupted)?;
            println!("{} flips of {budget}, {} rounds", flips.len(), trace.rounds());
        }
        Command::Experiment { spec, csv, summary, workers } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: ExperimentSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            let report = run_experiment(&spec, workers).map_err(anyhow::Error::from)?;
            let file = fs::File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
            write_csv(&report.rows, file).map_err(anyhow::Error::from)?;
            let json = serde_json::to_string_pretty(&report.summary).map_err(anyhow::Error::from)?;
            fs::write(&summary, json.clone() + "\n").with_context(|| format!("writing {}", summary.display()))?;
            println!("{json}");
            if !report.summary.pass {
                return Err(Failure::Negative(anyhow::anyhow!("empirical rate above the bound")));
            }
        }
        Command::Pebble { graph, min_space } => {
            let g = match Dag::named(&graph) {
                Some(g) => g,
                None => {
                    let text = fs::read_to_string(&graph).with_context(|| format!("no generator or file named {graph}"))?;
                    Dag::parse(&text).map_err(anyhow::Error::from)?
                }
            };
            if min_space {
                println!("{}", min_space_bruteforce(&g).map_err(anyhow::Error::from)?);
            } else {
                let depth = g.depths().into_iter().max().unwrap_or(0);
                println!(
                    "nodes={} edges={} sinks={} max_indegree={} depth={}",
                    g.len(),
                    g.edges().len(),
                    g.sinks().len(),
                    g.max_indegree(),
                    depth
                );
            }
        }
        Command::Calibrate { out, trials, seed, codes } => {
            let codes: Vec<JustesenParams> = if codes.is_empty() {
                DEFAULT_CODES.iter().map(|&(m, n, k)| JustesenParams::new(m, n, k)).collect()
            } else {
                codes.iter().map(|c| parse_code(c)).collect::<anyhow::Result<_>>()?
            };
            let table = calibrate_all(&codes, trials, seed).map_err(anyhow::Error::from)?;
            let json = serde_json::to_string_pretty(&table).map_err(anyhow::Error::from)?;
            fs::write(&out, json + "\n").with_context(|| format!("writing {}", out.display()))?;
            for c in &table.calibrations {
                println!(
                    "({},{},{}) L={} kill={} rho={:.4} random_failures={}/{}",
                    c.params.m, c.params.n_out, c.params.k_out, c.block_bits, c.kill_flips, c.rho, c.random_failures, c.random_trials
                );
            }
        }
        Command::Params { config } => {
            let (_, scheme, _) = load_config(&config)?;
            let report = serde_json::json!({
                "message_bits": scheme.message_bits(),
                "codeword_bits": scheme.codeword_bits(),
                "head_bits": scheme.head_bits(),
                "tau": scheme.tau(),
                "flip_budget": scheme.flip_budget(),
                "composition": scheme.summary(),
            });
            println!("{}", serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
