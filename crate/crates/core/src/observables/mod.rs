//! Structural observables: cut deviations, multiplicities, balancedness,
//! degree extremes, spectral gap, Cheeger constant, and the stopping-time
//! monitor built from them.

mod cheeger;
mod config;
mod cuts;
mod monitor;
mod spectral;
mod structure;

pub use cheeger::{cheeger, cheeger_exact, cheeger_sampled, CheegerEstimate, CheegerMode};
pub use config::StoppingConfig;
pub use cuts::{cut_stats, l_exact, l_sampled, min_side, CutExtremes, CutStat, EXACT_MAX_N};
pub use monitor::{diagnostics, monitor, Diagnostics, Firing, Monitor, MonitorReport, StopTime, Witness};
pub use spectral::{is_connected, laplacian, spectral_gap, spectral_gap_with, GapMethod, SpectralGap, DENSE_MAX_N};
pub(crate) use cuts::random_subset;
pub use structure::{
    degree_extremes, first_unbalanced, is_balanced, max_multiplicity, multiplicity_profile, Balance, DegreeExtremes,
};


