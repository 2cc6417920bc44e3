use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ARMA_TERMS: usize = 10;
pub const MAX_TOTAL_DIFFERENCES: usize = 3;

/// Orders of a (p,d,q)(P,D,Q)_s model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub d: usize,
    #[serde(default)]
    pub q: usize,
    #[serde(default, rename = "P")]
    pub seasonal_p: usize,
    #[serde(default, rename = "D")]
    pub seasonal_d: usize,
    #[serde(default, rename = "Q")]
    pub seasonal_q: usize,
    #[serde(default = "one", rename = "s", alias = "period")]
    pub period: usize,
    #[serde(default)]
    pub include_mean: bool,
}

fn one() -> usize {
    1
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            period: 1,
            include_mean: false,
        }
    }

    pub fn seasonal(mut self, p: usize, d: usize, q: usize, period: usize) -> Self {
        self.seasonal_p = p;
        self.seasonal_d = d;
        self.seasonal_q = q;
        self.period = period;
        self
    }

    pub fn with_mean(mut self, include_mean: bool) -> Self {
        self.include_mean = include_mean;
        self
    }

    pub fn is_seasonal(&self) -> bool {
        self.seasonal_p + self.seasonal_d + self.seasonal_q > 0
    }

    /// Period used for the seasonal lag; 1 when there are no seasonal terms.
    pub fn effective_period(&self) -> usize {
        if self.is_seasonal() {
            self.period
        } else {
            1
        }
    }

    /// Number of ARMA coefficients, `p + q + P + Q`.
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Parameters counted by the information criteria: coefficients,
    /// the innovation variance and the mean if present.
    pub fn n_parameters(&self) -> usize {
        self.n_coefficients() + 1 + usize::from(self.include_mean)
    }

    /// Observations consumed by differencing, `d + D·s`.
    pub fn differencing_span(&self) -> usize {
        self.d + self.seasonal_d * self.effective_period()
    }

    /// Minimum series length accepted by the fitter.
    pub fn min_observations(&self) -> usize {
        let s = self.effective_period();
        self.differencing_span() + self.p + self.q + (self.seasonal_p + self.seasonal_q) * s + 5
    }

    /// Checks the orders against a series of the given frequency and length.
    pub fn validate(&self, frequency: u32, n: usize) -> Result<()> {
        if self.is_seasonal() {
            if self.period < 2 {
                return Err(Error::InvalidSpec(
                    "seasonal orders need a period s > 1".into(),
                ));
            }
            if self.period != frequency as usize {
                return Err(Error::InvalidSpec(format!(
                    "seasonal period {} does not match the series frequency {frequency}",
                    self.period
                )));
            }
        }
        if self.n_coefficients() > MAX_ARMA_TERMS {
            return Err(Error::InvalidSpec(format!(
                "p + q + P + Q = {} exceeds {MAX_ARMA_TERMS}",
                self.n_coefficients()
            )));
        }
        if self.d + self.seasonal_d > MAX_TOTAL_DIFFERENCES {
            return Err(Error::InvalidSpec(format!(
                "d + D = {} exceeds {MAX_TOTAL_DIFFERENCES}",
                self.d + self.seasonal_d
            )));
        }
        if self.include_mean && self.d + self.seasonal_d > 0 {
            return Err(Error::InvalidSpec(
                "a mean can only be included when d = D = 0".into(),
            ));
        }
        let needed = self.min_observations();
        if n < needed {
            return Err(Error::TooFewObservations { needed, got: n });
        }
        Ok(())
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)?;
        if self.is_seasonal() {
            write!(
                f,
                "({},{},{})[{}]",
                self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
            )?;
        }
        if self.include_mean {
            write!(f, " with mean")?;
        }
        Ok(())
    }
}
