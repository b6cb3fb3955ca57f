//! Monte Carlo engine, comparison statistics and figure-data generators.

pub mod figures;
pub mod mc;
pub mod output;
pub mod stats;
pub mod verify;

pub use figures::{
    find_k_for_half_loss, generate_fig_beta, generate_fig_find_k, generate_fig_mean_vs_k, generate_fig_pfa,
    generate_fig_snrloss, generate_fig_ttilde, FigureConfig, MuRule,
};
pub use mc::{
    collect_trials, exceedance_probability, mean_statistic, run_direct_draws, run_monte_carlo, McOutput, Path,
    Proportion, RunConfig, Statistic,
};
pub use output::{Cell, Format, Table};
pub use stats::{empirical_cdf_at, ks_distance, ks_distance_to, pearson, EmpiricalDistribution, RunningMoments};
pub use verify::{verify_suite, Check, VerifyConfig, VerifyReport};
