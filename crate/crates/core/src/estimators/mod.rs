//! Non-parametric estimates of the arrival rate and of the mean shortage
//! function from observed realizations.

mod intensity;
mod mean_shortage;

pub use intensity::{read_intensity_csv, IntensityEstimate};
pub use mean_shortage::MeanShortageCache;

use crate::arrival::Realization;
use crate::error::Result;

/// Pool the values of every event across realizations, mapped through
/// `value_of`, into one mean shortage cache.
pub fn pooled_shortage<F>(realizations: &[Realization], value_of: F) -> Result<MeanShortageCache>
where
    F: Fn(&crate::arrival::Event) -> f64,
{
    let samples = realizations.iter().flat_map(|r| r.events().iter().map(&value_of)).collect();
    MeanShortageCache::build(samples)
}
