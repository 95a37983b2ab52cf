use serde::Serialize;

use super::config::ExperimentConfig;
use crate::oracle::{
    exact_profile, h2_diff_check, nostuck_check, random_block_function, table2_checks,
    xor_gain_grid, zh_relations_report, Assertion, CheckReport, PairAnalysis, CHECK_TOL,
};
use crate::process::{load_process, EdgeKernel};
use crate::{Error, Result};

/// Kernels covered by `--process all`.
pub const PRESETS: [&str; 5] = ["iid:0.5", "iid:0.11", "hmm2", "ge", "bb00"];
/// Random boolean block functions per `(kernel, N)` for the no-collusion check.
pub const NOSTUCK_FUNCTIONS: usize = 50;
const GRID_STEP: f64 = 0.01;
const TABLE2_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub kernels: Vec<String>,
    pub sizes: Vec<usize>,
    pub reports: Vec<CheckReport>,
    pub table2: Vec<Assertion>,
    pub pass: bool,
}

impl SuiteReport {
    /// Minimum residual per check name over every kernel and size.
    pub fn min_by_check(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for r in &self.reports {
            match out.iter_mut().find(|(n, _)| *n == r.check_name) {
                Some((_, v)) => *v = v.min(r.min_residual),
                None => out.push((r.check_name.clone(), r.min_residual)),
            }
        }
        out
    }

    pub fn failures(&self) -> Vec<&CheckReport> {
        self.reports.iter().filter(|r| !r.pass).collect()
    }
}

/// Every two-block and single-block check for one kernel at half size `n`.
pub fn kernel_reports(k: &EdgeKernel, n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = PairAnalysis::compute(k, n)?.reports();
    out.push(zh_relations_report(
        &exact_profile(k, 2 * n, None)?,
        k.name(),
    ));
    let mut res = Vec::with_capacity(2 * NOSTUCK_FUNCTIONS);
    for j in 0..NOSTUCK_FUNCTIONS {
        let f = random_block_function(n, k.num_obs(), seed.wrapping_add(j as u64));
        let r = nostuck_check(k, n, &f)?;
        res.push(r.residual);
        res.push(r.mixing_residual);
    }
    out.push(CheckReport::new(
        "no_collusion",
        k.name(),
        n,
        res,
        CHECK_TOL,
    ));
    Ok(out)
}

fn grid_reports() -> Vec<CheckReport> {
    let pts: Vec<f64> = (0..=50).map(|j| j as f64 / 50.0).collect();
    let h2d: Vec<f64> = pts
        .iter()
        .flat_map(|&a| pts.iter().map(move |&b| h2_diff_check(a, b).unwrap()))
        .collect();
    vec![
        CheckReport::new("xor_gain_grid", "-", 0, xor_gain_grid(GRID_STEP), 1e-12),
        CheckReport::new("h2_difference", "-", 0, h2d, 1e-12),
    ]
}

/// Runs every check on `cfg.process` (or all presets for `all`) at half
/// sizes `2, 4, ..., cfg.n`.
pub fn run_check_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    if cfg.n < 2 || !cfg.n.is_power_of_two() {
        return Err(Error::Config(format!(
            "N = {} must be a power of two >= 2",
            cfg.n
        )));
    }
    let names: Vec<String> = if cfg.process == "all" {
        PRESETS.iter().map(|s| s.to_string()).collect()
    } else {
        vec![cfg.process.clone()]
    };
    let kernels: Vec<EdgeKernel> = names
        .iter()
        .map(|p| load_process(p))
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = (1..)
        .map(|j| 1usize << j)
        .take_while(|&n| n <= cfg.n)
        .collect();
    let mut reports = grid_reports();
    let mut table2 = Vec::new();
    for k in &kernels {
        for &n in &sizes {
            reports.extend(kernel_reports(k, n, cfg.seed)?);
        }
        if let Ok(rows) = table2_checks(k) {
            if k.period() == 4 {
                let res = rows.iter().map(|a| -a.residual.abs()).collect();
                reports.push(CheckReport::new("table2", k.name(), 8, res, TABLE2_TOL));
                table2 = rows;
            }
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(SuiteReport {
        kernels: kernels.iter().map(|k| k.name().to_string()).collect(),
        sizes,
        reports,
        table2,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = ExperimentConfig {
            process: "bb00".into(),
            n: 4,
            ..Default::default()
        };
        let r = run_check_suite(&cfg).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        assert_eq!(r.table2.len(), 8);
        assert!(r.min_by_check().iter().any(|(n, _)| n == "no_collusion"));
    }

    #[test]
    fn faulty_kernel_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"name":"bad","states":["a"],"obs":["-"],"edges":[{"from":"a","to":"a","x":0,"y":"-","p":0.7},{"from":"a","to":"a","x":1,"y":"-","p":0.7}]}"#,
        )
        .unwrap();
        let cfg = ExperimentConfig {
            process: path.to_string_lossy().into(),
            n: 2,
            ..Default::default()
        };
        let err = run_check_suite(&cfg).unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(_)), "{err}");
    }
}
