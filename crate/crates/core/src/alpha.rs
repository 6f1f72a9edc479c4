use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::Error;

/// Parameter of the Ford model, constrained to `[0, 1]`.
///
/// Pendant edges of a growing tree carry weight `1 - alpha` and internal
/// edges weight `alpha`, so `alpha = 0` recovers the Yule model, `alpha = 1/2`
/// the uniform (PDA) model and `alpha = 1` the degenerate comb model.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    /// Validates `0 <= value <= 1` (rejects NaN and infinities).
    pub fn new(value: f64) -> Result<Self, Error> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::AlphaOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Pendant-edge weight `1 - alpha`.
    pub fn beta(self) -> f64 {
        1.0 - self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts a decimal literal (`0.3`) or a rational `p/q` (`3/10`).
impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| Error::ParseAlpha(s.into()))?;
            let q: f64 = q.trim().parse().map_err(|_| Error::ParseAlpha(s.into()))?;
            if q == 0.0 {
                return Err(Error::ParseAlpha(s.into()));
            }
            Alpha::new(p / q)
        } else {
            let v: f64 = s.parse().map_err(|_| Error::ParseAlpha(s.into()))?;
            Alpha::new(v)
        }
    }
}
