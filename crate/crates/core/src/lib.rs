//! Channel capacity of pixel-detected, transversely entangled photon pairs.
//!
//! The crate models a Gaussian photon-pair source ([`state`]), square pixel
//! detectors in the image or Fourier plane ([`geometry`]), the resulting
//! pixel-pair joint probabilities ([`joint`]), the information measures
//! computed from them ([`info`]), and simulated coincidence scans
//! ([`experiment`]).

pub mod bivariate;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod info;
pub mod joint;
pub mod quadrature;
pub mod state;

pub use error::{Error, Result};
pub use experiment::{
    counts_to_distribution, run_resolution_sweep, scan_time, simulate_counts, Alignment, JointCountMatrix,
    SimulationParams, SweepParams, SweepRecord, SweepResult, WitnessRecord,
};
pub use geometry::{build_grid, default_extent, roi_pixels, DetectorGrid, PlaneMapping};
pub use info::{
    conditional_entropy, max_detectable_mi, mi_poisson_uncertainty, mutual_information, separability_bound,
    separability_sum, shannon_entropy, Direction, MIEstimate, MiSource, WitnessResult,
};
pub use joint::{joint_matrix, matrix_from_samples, sample_pairs, sampled_matrix, JointDistribution, PhotonPair};
pub use state::{Basis, GaussianBiphotonState, PairCovariance};
