use serde::Serialize;

use super::config::ExperimentConfig;
use crate::oracle::{exact_block_entropy, exact_profile, Profile};
use crate::process::{entropy_rate_estimate, EdgeKernel, EntropyRateEstimate, RateMethod};
use crate::sctrellis::genie_profile_mc;
use crate::transform::BranchPath;
use crate::Result;

/// Threshold-fraction counts for one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationSummary {
    pub n: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub frac_high: f64,
    pub frac_low: f64,
    pub frac_fast_z: f64,
    /// `2^{-N^beta}`.
    pub z_threshold: f64,
    pub rate_estimate: f64,
    pub rate_stderr: f64,
}

impl PolarizationSummary {
    pub fn from_profile(p: &Profile, epsilon: f64, beta: f64, rate: &EntropyRateEstimate) -> Self {
        let n = p.n;
        let frac = |c: usize| c as f64 / n as f64;
        let z_threshold = 2f64.powf(-(n as f64).powf(beta));
        Self {
            n,
            epsilon,
            beta,
            frac_high: frac(p.h.iter().filter(|&&h| h > 1.0 - epsilon).count()),
            frac_low: frac(p.h.iter().filter(|&&h| h < epsilon).count()),
            frac_fast_z: frac(p.z.iter().filter(|&&z| z < z_threshold).count()),
            z_threshold,
            rate_estimate: rate.value,
            rate_stderr: rate.stderr,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizeReport {
    pub config: ExperimentConfig,
    pub kernel: String,
    pub summary: PolarizationSummary,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub profile: Profile,
}

/// Exact profile when `cfg.exact`, genie-aided Monte Carlo otherwise.
pub fn profile_for(cfg: &ExperimentConfig, k: &EdgeKernel) -> Result<Profile> {
    if cfg.exact {
        exact_profile(k, cfg.n, cfg.given_state)
    } else {
        genie_profile_mc(k, cfg.n, cfg.samples, cfg.seed)
    }
}

/// Rate estimate matching the profile's method; Monte-Carlo estimates use
/// an independent seed stream.
pub fn rate_for(cfg: &ExperimentConfig, k: &EdgeKernel) -> Result<EntropyRateEstimate> {
    if cfg.exact && cfg.given_state.is_none() {
        let v = exact_block_entropy(k, cfg.n)? / cfg.n as f64;
        return Ok(EntropyRateEstimate {
            value: v,
            stderr: 0.0,
            n_used: cfg.n,
            method: RateMethod::Exact,
        });
    }
    entropy_rate_estimate(k, cfg.n, cfg.samples, cfg.seed ^ 0x5eed_5eed)
}

pub fn run_polarize(cfg: &ExperimentConfig) -> Result<PolarizeReport> {
    let k = cfg.kernel()?;
    let mut warnings = Vec::new();
    if k.num_states() > 1 && k.period() != 1 {
        warnings.push(format!(
            "{} is periodic (period {}); polarization is not guaranteed",
            k.name(),
            k.period()
        ));
    }
    let profile = profile_for(cfg, &k)?;
    let rate = rate_for(cfg, &k)?;
    Ok(PolarizeReport {
        config: cfg.clone(),
        kernel: k.name().to_string(),
        summary: PolarizationSummary::from_profile(&profile, cfg.epsilon, cfg.beta, &rate),
        warnings,
        profile,
    })
}

/// Same computation as [`run_polarize`]; the fast-Z fraction is the
/// quantity of interest.
pub fn run_fastpolar(cfg: &ExperimentConfig) -> Result<PolarizeReport> {
    run_polarize(cfg)
}

/// `index,branch_path,H,H_stderr,Z,Z_stderr,method` with shortest
/// round-trip float formatting.
pub fn profile_csv(p: &Profile) -> String {
    let mut out = String::from("index,branch_path,H,H_stderr,Z,Z_stderr,method\n");
    for i in 0..p.n {
        let path = BranchPath::from_index(i + 1, p.n).expect("valid index");
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i + 1,
            path,
            p.h[i],
            p.h_stderr[i],
            p.z[i],
            p.z_stderr[i],
            p.method.as_str()
        ));
    }
    out
}

/// Reads back `(H, Z)` columns from [`profile_csv`] output.
pub fn parse_profile_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let bad = |line: &str| crate::Error::Config(format!("malformed profile row: {line}"));
    let mut h = Vec::new();
    let mut z = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(bad(line));
        }
        h.push(cols[2].parse().map_err(|_| bad(line))?);
        z.push(cols[4].parse().map_err(|_| bad(line))?);
    }
    Ok((h, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fair_coin_summary() {
        let cfg = ExperimentConfig {
            process: "iid:0.5".into(),
            n: 64,
            samples: 50,
            ..Default::default()
        };
        let r = run_polarize(&cfg).unwrap();
        assert_eq!(r.summary.frac_high, 1.0);
        assert_eq!(r.summary.frac_low, 0.0);
        assert_eq!(r.summary.frac_fast_z, 0.0);
        assert!((r.summary.rate_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_source_is_fast() {
        let cfg = ExperimentConfig {
            process: "det0".into(),
            n: 128,
            samples: 20,
            beta: 0.49,
            ..Default::default()
        };
        let r = run_fastpolar(&cfg).unwrap();
        assert_eq!(r.summary.frac_fast_z, 1.0);
    }

    #[test]
    fn periodic_warns() {
        let cfg = ExperimentConfig {
            process: "bb00".into(),
            n: 8,
            exact: true,
            ..Default::default()
        };
        assert_eq!(run_polarize(&cfg).unwrap().warnings.len(), 1);
    }

    #[test]
    fn csv_round_trip_reproduces_summary() {
        let cfg = ExperimentConfig {
            process: "hmm2".into(),
            n: 32,
            samples: 300,
            ..Default::default()
        };
        let r = run_polarize(&cfg).unwrap();
        let csv = profile_csv(&r.profile);
        let (h, z) = parse_profile_csv(&csv).unwrap();
        let back = Profile {
            h,
            z,
            ..r.profile.clone()
        };
        let rate = EntropyRateEstimate {
            value: r.summary.rate_estimate,
            stderr: r.summary.rate_stderr,
            n_used: 32,
            method: RateMethod::MonteCarlo,
        };
        assert_eq!(
            PolarizationSummary::from_profile(&back, cfg.epsilon, cfg.beta, &rate),
            r.summary
        );
        assert!(csv.starts_with("index,branch_path,H,H_stderr,Z,Z_stderr,method\n1,00000,"));
    }
}
