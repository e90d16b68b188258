use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maps a travel distance to a sensing cost. Both variants are
/// non-decreasing and sub-additive, so `f(d(., .))` stays a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingFunction {
    #[default]
    Identity,
    SquareRoot,
}

impl SensingFunction {
    pub fn apply(self, distance: f64) -> Result<f64> {
        if distance < 0.0 || distance.is_nan() {
            return Err(Error::NegativeDistance(distance));
        }
        Ok(self.eval(distance))
    }

    /// Unchecked evaluation for distances already known to be nonnegative.
    #[inline]
    pub(crate) fn eval(self, distance: f64) -> f64 {
        match self {
            SensingFunction::Identity => distance,
            SensingFunction::SquareRoot => distance.sqrt(),
        }
    }
}
