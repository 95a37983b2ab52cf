//! Experiment drivers behind the `polarlab` CLI.

mod config;
mod mixing;
mod periodic;
mod polarize;
mod suite;

pub use config::ExperimentConfig;
pub use mixing::{run_mixing, MixingReport, MIXING_MAX_LAG, MIXING_TOL};
pub use periodic::{
    exact_window_rows, extract_subblock_prefixes, fano_check, guess_initial_state, run_periodic,
    state_guess_stats, PeriodicMc, PeriodicReport, Prefix5, WindowRow, PERIODIC_MC_SIZES,
};
pub use polarize::{
    parse_profile_csv, profile_csv, profile_for, rate_for, run_fastpolar, run_polarize,
    PolarizationSummary, PolarizeReport,
};
pub use suite::{kernel_reports, run_check_suite, SuiteReport, NOSTUCK_FUNCTIONS, PRESETS};
