use rand::Rng;

use super::Chain;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// `count` indices drawn uniformly with replacement from the post-burn-in
/// part of `chain`.
pub fn select_indices(chain: &Chain, count: usize, seed: u64) -> Result<Vec<usize>> {
    let (start, end) = (chain.burn_in, chain.len());
    if start >= end {
        return Err(Error::usage("chain has no samples after burn-in"));
    }
    if count == 0 {
        return Err(Error::usage("must select at least one sample"));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..count).map(|_| rng.random_range(start..end)).collect())
}

/// Parameter vectors at [`select_indices`].
pub fn thin_and_select(chain: &Chain, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(select_indices(chain, count, seed)?
        .into_iter()
        .map(|i| chain.samples[i].clone())
        .collect())
}
