//! Distribution estimates and model fits for record ages.

pub mod autocorr;
pub mod gev;
pub mod histogram;
pub mod optimize;
pub mod powerlaw;
pub mod regression;
pub mod scaling;

pub use autocorr::{autocorrelation, AutocorrSeries};
pub use gev::{fit_gev, frechet_mean, gev_density, scale_maxima, unscale_maxima, GevFit};
pub use histogram::{log_binned_histogram, AgeCounts, LogHistogram};
pub use powerlaw::{
    fit_power_law_ls, fit_power_law_mle, fit_power_law_mle_counts, harmonic_number, FitMethod,
    PowerLawFit,
};
pub use regression::{linear_fit, pearson, LinearFit};
pub use scaling::{mean_records_scaling, scaling_study, RecordGrowthFit, ScalingTable};
