use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds of the stopping-time family.
///
/// [`Default`] satisfies the asymptotic ordering checked by
/// [`check_ordering`](Self::check_ordering); those constants are tiny and
/// most cut and multiplicity thresholds fire immediately at desk-scale `n`.
/// [`desk_scale`](Self::desk_scale) relaxes `eps2`, `eps3` and `eps4` so the
/// monitor is informative for `n` in the hundreds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingConfig {
    /// Strong minority threshold.
    pub eps: f64,
    /// Weak minority threshold, `eps < eps_prime < 1/2`.
    pub eps_prime: f64,
    /// Smallest admissible side of a cut, as a fraction of `n`.
    pub eps2: f64,
    /// Cut deviation scale.
    pub eps3: f64,
    /// Multiplicity scale: thresholds are `eps4 ln n` and `2 eps4 ln n`.
    pub eps4: f64,
    pub eps7: f64,
    /// Spectral gap floor relative to `beta`.
    pub eps14: f64,
    /// Balancedness constant (strong `c1`, weak `2 c1`).
    pub c1: f64,
    /// Weak maximum-degree factor.
    pub c2: f64,
    pub delta: f64,
    /// Horizon multiplier for the disagreement test (`c n^2 / beta` steps).
    pub c: f64,
    /// Random cuts drawn by the sampled cut estimators.
    pub cut_sample_count: usize,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        StoppingConfig {
            eps: 0.05,
            eps_prime: 0.1,
            eps2: 2e-6,
            eps3: 3e-15,
            eps4: 0.1,
            eps7: 8e-33,
            eps14: 4e-6,
            c1: 100.0,
            c2: 2.0,
            delta: 1e-19,
            c: 10.0,
            cut_sample_count: 200,
        }
    }
}

impl StoppingConfig {
    pub fn desk_scale() -> Self {
        StoppingConfig {
            eps2: 0.1,
            eps3: 0.03,
            eps4: 0.5,
            ..StoppingConfig::default()
        }
    }

    /// Positivity and `0 < eps < eps_prime < 1/2`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps", self.eps),
            ("eps_prime", self.eps_prime),
            ("eps2", self.eps2),
            ("eps3", self.eps3),
            ("eps4", self.eps4),
            ("eps7", self.eps7),
            ("eps14", self.eps14),
            ("c1", self.c1),
            ("c2", self.c2),
            ("delta", self.delta),
            ("c", self.c),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be a positive finite number, got {value}")));
            }
        }
        if self.eps >= self.eps_prime || self.eps_prime >= 0.5 {
            return Err(Error::invalid(
                "eps_prime",
                format!("need eps < eps_prime < 1/2, got eps = {}, eps_prime = {}", self.eps, self.eps_prime),
            ));
        }
        if self.eps2 >= 0.5 {
            return Err(Error::invalid("eps2", "must be below 1/2"));
        }
        if self.cut_sample_count == 0 {
            return Err(Error::invalid("cut_sample_count", "must be at least 1"));
        }
        Ok(())
    }

    /// The asymptotic parameter ordering, including the two bounds on
    /// `eps14` needed for the Cheeger argument.
    pub fn check_ordering(&self) -> Result<()> {
        let checks = [
            ("eps2", self.eps2 < self.eps.powi(2) / 1000.0, "eps2 < eps^2 / 1000"),
            ("eps3", self.eps3 < self.eps2.powi(2) / 1000.0, "eps3 < eps2^2 / 1000"),
            ("eps7", self.eps7 < self.eps3.powi(2) / 1000.0, "eps7 < eps3^2 / 1000"),
            ("c2", self.c2 == 2.0, "c2 = 2"),
            ("eps4", self.eps4 < 1.0 / (4.0 * 10f64.ln()), "eps4 < 1 / (4 ln 10)"),
            ("delta", self.delta < self.eps3 / (10000.0 * self.c2), "delta < eps3 / (10000 c2)"),
            ("eps14", self.eps14 < self.eps.powi(2) / 100.0, "eps14 < eps^2 / 100"),
            (
                "eps14",
                self.eps14 <= (0.125 - self.eps3 / (2.0 * self.eps2)).powi(2) / (4.0 * self.c2),
                "eps14 <= (1/8 - eps3 / (2 eps2))^2 / (4 c2)",
            ),
            (
                "eps14",
                self.eps14 <= (self.eps / 8.0 - 2.0 * self.eps2 * (1.0 / self.eps2).ln()).powi(2) / (4.0 * self.c2),
                "eps14 <= (eps/8 - 2 eps2 ln(1/eps2))^2 / (4 c2)",
            ),
        ];
        for (name, ok, rule) in checks {
            if !ok {
                return Err(Error::invalid(name, format!("violates {rule}")));
            }
        }
        Ok(())
    }
}
