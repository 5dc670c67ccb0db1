//! Double-Gaussian model of a transversely entangled photon pair.
//!
//! The state is fixed by two widths: the correlation width `sigma_c`, which
//! controls how tightly the two photons' positions track each other, and the
//! beam-envelope width `sigma_p`. Each transverse axis carries an identical,
//! independent copy of the same one-dimensional Gaussian, so every quantity
//! here is computed per axis and then doubled (entropies) or multiplied
//! (probabilities).
//!
//! Positions are in µm, transverse wavenumbers in rad/µm, entropies in bits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement basis: image plane (position) or Fourier plane (momentum).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Position,
    Momentum,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Position, Basis::Momentum];

    /// +1 when partner photons land on the same pixel, -1 when mirrored.
    pub fn correlation_sign(self) -> i32 {
        match self {
            Basis::Position => 1,
            Basis::Momentum => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Position => "position",
            Basis::Momentum => "momentum",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "position" | "p" => Ok(Basis::Position),
            "momentum" | "m" => Ok(Basis::Momentum),
            other => Err(Error::invalid(
                "basis",
                format!("expected `position` or `momentum`, got `{other}`"),
            )),
        }
    }
}

/// Photon-pair source with Gaussian correlation and envelope widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBiphotonState {
    sigma_c: f64,
    sigma_p: f64,
    wavelength_nm: f64,
}

/// Covariance of one transverse axis of the pair, `(a, b)` being Alice's and
/// Bob's coordinate along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCovariance {
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
    pub rho: f64,
}

impl PairCovariance {
    /// Standard deviation of a single photon's coordinate.
    pub fn marginal_std(&self) -> f64 {
        self.var_a.sqrt()
    }

    /// Variance of one photon's coordinate once the partner's is known.
    pub fn conditional_var(&self) -> f64 {
        self.var_a - self.cov_ab * self.cov_ab / self.var_b
    }
}

impl GaussianBiphotonState {
    /// Degenerate photons from a 325 nm pump.
    pub const DEFAULT_WAVELENGTH_NM: f64 = 650.0;

    pub fn new(sigma_c: f64, sigma_p: f64, wavelength_nm: f64) -> Result<Self> {
        check_positive("sigma_c", sigma_c)?;
        check_positive("sigma_p", sigma_p)?;
        check_positive("wavelength", wavelength_nm)?;
        Ok(Self {
            sigma_c,
            sigma_p,
            wavelength_nm,
        })
    }

    /// The source characterised in the reference experiment:
    /// sigma_c = 40 µm, sigma_p = 1500 µm, 650 nm photons.
    pub fn reference() -> Self {
        Self {
            sigma_c: 40.0,
            sigma_p: 1500.0,
            wavelength_nm: Self::DEFAULT_WAVELENGTH_NM,
        }
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }

    /// Standard deviations of the difference `a - b` and sum `a + b`
    /// coordinates along one axis. The two are independent Gaussians.
    pub fn rotated_widths(&self, basis: Basis) -> (f64, f64) {
        match basis {
            Basis::Position => (self.sigma_c, 2.0 * self.sigma_p),
            Basis::Momentum => (0.5 / self.sigma_c, 0.25 / self.sigma_p),
        }
    }

    pub fn pair_covariance(&self, basis: Basis) -> PairCovariance {
        let (sd_diff, sd_sum) = self.rotated_widths(basis);
        let var_diff = sd_diff * sd_diff;
        let var_sum = sd_sum * sd_sum;
        let var = 0.25 * (var_sum + var_diff);
        let cov = 0.25 * (var_sum - var_diff);
        PairCovariance {
            var_a: var,
            var_b: var,
            cov_ab: cov,
            rho: (var_sum - var_diff) / (var_sum + var_diff),
        }
    }

    /// Mutual information of the continuous transverse state in bits, both
    /// axes included. Identical in either basis.
    pub fn mi_continuous(&self) -> f64 {
        let (c, p) = (self.sigma_c, self.sigma_p);
        2.0 * ((4.0 * p * p + c * c) / (4.0 * c * p)).log2()
    }

    /// Large-Fedorov-ratio approximation `log2 (sigma_p / sigma_c)^2`.
    pub fn mi_strong_correlation_limit(&self) -> f64 {
        2.0 * self.fedorov_ratio().log2()
    }

    pub fn fedorov_ratio(&self) -> f64 {
        self.sigma_p / self.sigma_c
    }

    /// Joint density of one transverse axis, normalised over `(a, b)`.
    pub fn axis_density(&self, basis: Basis, a: f64, b: f64) -> f64 {
        let (c, p) = (self.sigma_c, self.sigma_p);
        let (d, s) = (a - b, a + b);
        match basis {
            Basis::Position => (-d * d / (2.0 * c * c) - s * s / (8.0 * p * p)).exp() / (2.0 * PI * c * p),
            Basis::Momentum => 8.0 * c * p / PI * (-2.0 * c * c * d * d - 8.0 * p * p * s * s).exp(),
        }
    }

    /// Squared modulus of the biphoton wavefunction at transverse points
    /// `alice` and `bob`.
    pub fn density(&self, basis: Basis, alice: [f64; 2], bob: [f64; 2]) -> f64 {
        self.axis_density(basis, alice[0], bob[0]) * self.axis_density(basis, alice[1], bob[1])
    }
}

impl Default for GaussianBiphotonState {
    fn default() -> Self {
        Self::reference()
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}
