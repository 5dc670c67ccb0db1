//! Pixelated detector grids in source coordinates.
//!
//! A grid is `n x n` square pixels of side `pitch`, centred on the optical
//! axis and optionally displaced by a fractional number of pixels per axis.
//! Image-plane grids are in µm, Fourier-plane grids in rad/µm; use
//! [`PlaneMapping`] to convert Fourier-plane detector lengths.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Basis, GaussianBiphotonState};

/// Two-dimensional pixel index, `[x, y]`.
pub type Pixel = [usize; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorGrid {
    pub n_per_axis: usize,
    pub pitch: f64,
    /// Displacement of the grid centre in pixel units, `[x, y]`.
    pub center_offset: [f64; 2],
    pub basis: Basis,
}

/// Build an `n x n` grid covering a square of side `extent`.
pub fn build_grid(n_per_axis: usize, extent: f64, center_offset: [f64; 2], basis: Basis) -> Result<DetectorGrid> {
    if n_per_axis == 0 {
        return Err(Error::invalid("n_per_axis", "must be at least 1"));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return Err(Error::invalid("extent", format!("must be positive, got {extent}")));
    }
    if center_offset.iter().any(|o| !o.is_finite()) {
        return Err(Error::invalid("center_offset", "must be finite"));
    }
    Ok(DetectorGrid {
        n_per_axis,
        pitch: extent / n_per_axis as f64,
        center_offset,
        basis,
    })
}

impl DetectorGrid {
    pub fn extent(&self) -> f64 {
        self.pitch * self.n_per_axis as f64
    }

    pub fn n_pixels(&self) -> usize {
        self.n_per_axis * self.n_per_axis
    }

    /// Same grid displaced by `shift` further pixels along both axes.
    pub fn shifted(&self, shift: f64) -> DetectorGrid {
        DetectorGrid {
            center_offset: [self.center_offset[0] + shift, self.center_offset[1] + shift],
            ..self.clone()
        }
    }

    /// The `n + 1` pixel boundaries along `axis` (0 = x, 1 = y).
    pub fn axis_edges(&self, axis: usize) -> Vec<f64> {
        let start = -0.5 * self.extent() + self.center_offset[axis] * self.pitch;
        (0..=self.n_per_axis).map(|m| start + m as f64 * self.pitch).collect()
    }

    /// Pixel interval `[lo, hi)` of index `m` along `axis`.
    pub fn pixel_bounds(&self, axis: usize, m: usize) -> (f64, f64) {
        let start = -0.5 * self.extent() + self.center_offset[axis] * self.pitch;
        (start + m as f64 * self.pitch, start + (m + 1) as f64 * self.pitch)
    }

    /// Index of the pixel containing `coord` along `axis`, if any.
    pub fn axis_bin(&self, axis: usize, coord: f64) -> Option<usize> {
        let start = -0.5 * self.extent() + self.center_offset[axis] * self.pitch;
        let t = ((coord - start) / self.pitch).floor();
        (t >= 0.0 && t < self.n_per_axis as f64).then_some(t as usize)
    }

    pub fn locate(&self, point: [f64; 2]) -> Option<Pixel> {
        Some([self.axis_bin(0, point[0])?, self.axis_bin(1, point[1])?])
    }

    /// Row-major linear index, `y * n + x`.
    pub fn linear_index(&self, pixel: Pixel) -> usize {
        pixel[1] * self.n_per_axis + pixel[0]
    }

    pub fn pixel_of(&self, index: usize) -> Pixel {
        [index % self.n_per_axis, index / self.n_per_axis]
    }
}

/// Fourier-lens mapping between detector-plane position and source
/// transverse wavenumber: `k = 2 pi x / (lambda f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneMapping {
    pub focal_length_mm: f64,
    pub wavelength_nm: f64,
}

impl PlaneMapping {
    pub fn new(focal_length_mm: f64, wavelength_nm: f64) -> Result<Self> {
        if !(focal_length_mm.is_finite() && focal_length_mm > 0.0) {
            return Err(Error::invalid("focal_length", "must be positive"));
        }
        if !(wavelength_nm.is_finite() && wavelength_nm > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        Ok(Self {
            focal_length_mm,
            wavelength_nm,
        })
    }

    /// rad/µm of source wavenumber per µm of detector-plane displacement.
    pub fn scale(&self) -> f64 {
        // lambda [µm] * f [µm] = (nm * 1e-3) * (mm * 1e3)
        2.0 * PI / (self.wavelength_nm * self.focal_length_mm)
    }

    pub fn to_wavenumber(&self, detector_um: f64) -> f64 {
        detector_um * self.scale()
    }

    pub fn to_detector(&self, wavenumber: f64) -> f64 {
        wavenumber / self.scale()
    }
}

/// Side of the centred square window holding `capture_fraction` of one
/// photon's marginal distribution, i.e. the root of
/// `erf(W / (2 sqrt(2) sigma))^2 = capture_fraction`.
pub fn default_extent(state: &GaussianBiphotonState, basis: Basis, capture_fraction: f64) -> Result<f64> {
    if !(capture_fraction > 0.0 && capture_fraction < 1.0) {
        return Err(Error::invalid(
            "capture_fraction",
            format!("must lie strictly between 0 and 1, got {capture_fraction}"),
        ));
    }
    let sigma = state.pair_covariance(basis).marginal_std();
    let target = capture_fraction.sqrt();
    // erf(u) is increasing; erf(6) already rounds to 1.
    let (mut lo, mut hi) = (0.0f64, 6.0f64);
    if libm::erf(hi) <= target {
        return Err(Error::Numerical(format!(
            "capture fraction {capture_fraction} too close to 1 to resolve"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if libm::erf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi) * 2.0 * SQRT_2 * sigma)
}

/// Bob's pixels within `radius_pixels` (Chebyshev distance) of the partner
/// predicted for Alice's `pixel_a`: the same index for positive correlation,
/// the mirrored index for anti-correlation. Clipped to the grid.
pub fn roi_pixels(
    pixel_a: Pixel,
    grid_b: &DetectorGrid,
    radius_pixels: usize,
    correlation_sign: i32,
) -> Result<Vec<Pixel>> {
    let n = grid_b.n_per_axis;
    if pixel_a[0] >= n || pixel_a[1] >= n {
        return Err(Error::PixelOutOfBounds(pixel_a[0], pixel_a[1], n));
    }
    let [x, y] = roi_window(pixel_a, n, radius_pixels, correlation_sign);
    let mut out = Vec::with_capacity(x.len() * y.len());
    for py in y.clone() {
        for px in x.clone() {
            out.push([px, py]);
        }
    }
    Ok(out)
}

/// Per-axis index ranges of the ROI square.
pub(crate) fn roi_window(
    pixel_a: Pixel,
    n: usize,
    radius: usize,
    correlation_sign: i32,
) -> [std::ops::Range<usize>; 2] {
    let partner = |m: usize| if correlation_sign < 0 { n - 1 - m } else { m };
    pixel_a.map(|m| {
        let c = partner(m);
        c.saturating_sub(radius)..(c + radius + 1).min(n)
    })
}
