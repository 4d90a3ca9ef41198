//! Finite-size simulation of the ensemble and comparison with the limit law.

mod compare;
mod dist;
mod pipeline;

pub use compare::{
    compare, fd_histogram, ks_one_sample, ks_two_sample, l1_cdf_distance, moment_statistics, pooled, spectra,
    ComparisonReport, Histogram, MomentGap,
};
pub use dist::{sample_matrix, DistributionKind, DistributionSpec, MAX_ENTRIES};
pub use pipeline::{
    compensated_sum, empirical_moments, empirical_spectrum, forward_layer, gram_eigenvalues, mix, ridge_trace_empirical,
    ridge_trace_from_spectrum, role_seed, run_trials, trial_seed, EmpiricalSpectrum, SimulationConfig,
};
