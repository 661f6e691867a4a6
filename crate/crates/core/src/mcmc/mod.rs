//! Delayed-rejection adaptive Metropolis sampling over box priors.

mod diagnostics;
mod dram;
mod prior;
mod select;

pub use diagnostics::{autocorrelation, effective_sample_size};
pub use dram::{dram_run, Chain, ChainSettings, DramConfig};
pub use prior::{log_prior, Interval, PriorSpec};
pub use select::{select_indices, thin_and_select};
