use serde::Serialize;

use super::config::ExperimentConfig;
use crate::process::{psi_diagnostics, PsiDiagnostics};
use crate::Result;

/// Largest lag reported.
pub const MIXING_MAX_LAG: usize = 200;
/// A bound further than this from 1 at the last lag is flagged.
pub const MIXING_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub kernel: String,
    pub psi0: f64,
    pub diagnostics: PsiDiagnostics,
    pub non_mixing: bool,
}

impl MixingReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("k,psi_bound\n");
        for (k, b) in self
            .diagnostics
            .k_values
            .iter()
            .zip(&self.diagnostics.psi_bound)
        {
            out.push_str(&format!("{k},{b}\n"));
        }
        out
    }
}

pub fn run_mixing(cfg: &ExperimentConfig) -> Result<MixingReport> {
    let k = cfg.kernel()?;
    let diagnostics = psi_diagnostics(&k, MIXING_MAX_LAG)?;
    Ok(MixingReport {
        kernel: k.name().to_string(),
        psi0: diagnostics.psi_bound[0],
        non_mixing: !diagnostics.approaches_one(MIXING_TOL),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(p: &str) -> MixingReport {
        run_mixing(&ExperimentConfig {
            process: p.into(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn presets() {
        let bb = run("bb00");
        assert!(bb.non_mixing);
        assert!(bb
            .diagnostics
            .psi_bound
            .iter()
            .all(|&b| (b - 4.0).abs() < 1e-12));
        let h = run("hmm2");
        assert!(!h.non_mixing);
        assert!(h.diagnostics.psi_bound[200] <= 1.001);
        let i = run("iid:0.3");
        assert!(i.diagnostics.psi_bound.iter().all(|&b| b == 1.0));
        assert!(h.csv().starts_with("k,psi_bound\n0,3"));
    }
}
