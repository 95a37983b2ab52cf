use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use polarlab::codec::{compress, design_code, evaluate, CompressedBlock, DesignRule};
use polarlab::harness::{
    profile_csv, profile_for, rate_for, run_check_suite, run_mixing, run_periodic, run_polarize,
    ExperimentConfig,
};
use polarlab::process::{sample_path, EdgeKernel};
use polarlab::Error;

#[derive(Parser)]
#[command(
    name = "polarlab",
    version,
    about = "Polarization experiments for binary processes with memory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Entropy/Bhattacharyya profile and polarization fractions.
    Profile(Common),
    /// As `profile`, reporting the fast-Z fraction.
    Fastpolar(Common),
    /// Period-4 counterexample analysis.
    Periodic(Common),
    /// psi-mixing bounds per lag.
    Mixing(Common),
    /// Exact inequality suite (`--process all` for every preset).
    Check(Common),
    /// Design and evaluate a source code with side information.
    Codec {
        #[command(flatten)]
        common: Common,
        /// Evaluation trials.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Frozen-set size is ceil(N * (rate + margin)).
        #[arg(long, default_value_t = 0.15)]
        margin: f64,
        /// Freeze indices with Z >= tau instead of using a size budget.
        #[arg(long)]
        threshold: Option<f64>,
        /// Also write the first trial's compressed block here.
        #[arg(long)]
        block: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Preset name or JSON process file.
    #[arg(long)]
    process: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    #[arg(long)]
    given_state: Option<usize>,
    /// Exact oracle instead of Monte Carlo (small N only).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, process: &str, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            process: self.process.clone().unwrap_or_else(|| process.to_string()),
            n: self.n.unwrap_or(n),
            samples: self.samples,
            seed: self.seed,
            epsilon: self.epsilon,
            beta: self.beta,
            exact: self.exact,
            given_state: self.given_state,
        }
    }
}

enum Outcome {
    Pass,
    Violation(String),
}

fn json<T: Serialize>(v: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Writes `body` to `path`, or to stdout without a path.
fn emit(path: Option<&Path>, body: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(Error::from),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn sidecar(path: Option<&Path>) -> Option<PathBuf> {
    path.map(|p| p.with_extension("json"))
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.cmd {
        Cmd::Profile(c) | Cmd::Fastpolar(c) => {
            let cfg = c.config("hmm2", 256);
            let r = run_polarize(&cfg)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            emit(c.out.as_deref(), &profile_csv(&r.profile))?;
            match sidecar(c.out.as_deref()) {
                Some(p) => emit(Some(&p), &json(&r)?)?,
                None => eprint!("{}", json(&r)?),
            }
            Ok(Outcome::Pass)
        }
        Cmd::Periodic(c) => {
            let cfg = c.config("bb00", 8);
            let r = run_periodic(&cfg)?;
            emit(c.out.as_deref(), &json(&r)?)?;
            let mut bad = Vec::new();
            if r.max_exact_violation > 1e-9 {
                bad.push(format!("exact window violation {}", r.max_exact_violation));
            }
            if r.chain_identity_residual.abs() > 1e-9 {
                bad.push(format!(
                    "chain identity residual {}",
                    r.chain_identity_residual
                ));
            }
            if !r.deviation_decreasing {
                bad.push("window deviation does not shrink with N".into());
            }
            if r.mc.iter().any(|m| !m.fano_holds) {
                bad.push("state entropy exceeds the Fano bound".into());
            }
            Ok(if bad.is_empty() {
                Outcome::Pass
            } else {
                Outcome::Violation(bad.join("; "))
            })
        }
        Cmd::Mixing(c) => {
            let r = run_mixing(&c.config("hmm2", 256))?;
            emit(c.out.as_deref(), &r.csv())?;
            eprintln!(
                "{}: psi0 bound {}, non-mixing: {}",
                r.kernel, r.psi0, r.non_mixing
            );
            Ok(Outcome::Pass)
        }
        Cmd::Check(c) => {
            let r = run_check_suite(&c.config("all", 8))?;
            emit(c.out.as_deref(), &json(&r)?)?;
            for (name, min) in r.min_by_check() {
                eprintln!("{name:<18} min residual {min:+.3e}");
            }
            let failed: Vec<String> = r
                .failures()
                .iter()
                .map(|f| format!("{} {} N={}", f.check_name, f.kernel, f.n))
                .collect();
            Ok(if failed.is_empty() {
                Outcome::Pass
            } else {
                Outcome::Violation(failed.join(", "))
            })
        }
        Cmd::Codec {
            common: c,
            trials,
            margin,
            threshold,
            block,
        } => {
            let cfg = c.config("hmm2", 1024);
            let k = cfg.kernel()?;
            let profile = profile_for(&cfg, &k)?;
            let rate = rate_for(&cfg, &k)?;
            let rule = match threshold {
                Some(t) => DesignRule::Threshold(t),
                None => DesignRule::Budget(
                    (((rate.value + margin) * cfg.n as f64).ceil() as usize).min(cfg.n),
                ),
            };
            let frozen = design_code(&profile, rule)?;
            let report = evaluate(&k, &frozen, trials, cfg.seed ^ 0xc0de)?;
            if let Some(path) = block {
                write_block(&k, &frozen, cfg.seed, &path)?;
            }
            emit(c.out.as_deref(), &json(&report)?)?;
            let limit = report.z_sum_bound + 3.0 * report.wilson_half_width();
            Ok(if report.block_error_rate <= limit {
                Outcome::Pass
            } else {
                Outcome::Violation(format!(
                    "block-error rate {} above {limit}",
                    report.block_error_rate
                ))
            })
        }
    }
}

fn write_block(
    k: &EdgeKernel,
    frozen: &polarlab::codec::FrozenSet,
    seed: u64,
    path: &Path,
) -> Result<(), Error> {
    let sample = sample_path(k, frozen.n(), seed)?;
    let bits = compress(&sample.x, frozen)?;
    let blk = CompressedBlock {
        n: frozen.n(),
        frozen: frozen.indices().to_vec(),
        bits,
    };
    std::fs::write(path, blk.to_bytes()?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation(msg)) => {
            eprintln!("check violation: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
