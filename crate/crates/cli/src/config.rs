//! Run configuration: a JSON document whose fields can each be overridden
//! from the command line.

use std::path::{Path, PathBuf};

use biphoton_capacity::{GaussianBiphotonState, PlaneMapping, SimulationParams, SweepParams};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Pair correlation width (µm).
    pub sigma_c: f64,
    /// Pump width (µm).
    pub sigma_p: f64,
    /// Down-converted wavelength (nm).
    pub wavelength: f64,
    pub resolutions: Vec<usize>,
    pub capture_fraction: f64,
    /// Offset of Bob's grid in pixels for misaligned runs.
    pub misalignment: f64,
    /// Lens in front of the momentum-basis detectors (mm).
    pub fourier_focal_length_mm: f64,
    /// Image-plane magnification of the position-basis detectors.
    pub magnification: f64,
    /// Detector side in the image plane (µm); sized from `capture_fraction`
    /// when absent.
    pub position_extent_um: Option<f64>,
    /// Detector side in the Fourier plane (µm); sized from
    /// `capture_fraction` when absent.
    pub momentum_extent_um: Option<f64>,
    pub pair_rate: f64,
    pub dwell: f64,
    pub accidental_rate: f64,
    /// `null` scans every pixel pair.
    pub roi_radius: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let state = GaussianBiphotonState::reference();
        let sweep = SweepParams::default();
        Self {
            sigma_c: state.sigma_c(),
            sigma_p: state.sigma_p(),
            wavelength: state.wavelength_nm(),
            resolutions: sweep.resolutions,
            capture_fraction: sweep.capture_fraction,
            misalignment: sweep.misalignment,
            fourier_focal_length_mm: 150.0,
            magnification: 1.0,
            position_extent_um: None,
            momentum_extent_um: None,
            pair_rate: SimulationParams::DEFAULT_PAIR_RATE,
            dwell: SimulationParams::DEFAULT_DWELL,
            accidental_rate: 0.0,
            roi_radius: Some(SimulationParams::DEFAULT_ROI_RADIUS),
            seed: None,
            out: PathBuf::from("biphoton-out"),
            format: Format::Csv,
        }
    }
}

/// Flags shared by every subcommand. Each config field has a long flag of
/// the same name, accepted with dashes or underscores.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, alias = "sigma_c", value_name = "UM")]
    pub sigma_c: Option<f64>,
    #[arg(long, global = true, alias = "sigma_p", value_name = "UM")]
    pub sigma_p: Option<f64>,
    #[arg(long, global = true, value_name = "NM")]
    pub wavelength: Option<f64>,
    /// Comma-separated pixels per axis, e.g. 8,16,24.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub resolutions: Option<Vec<usize>>,
    #[arg(long, global = true, alias = "capture_fraction")]
    pub capture_fraction: Option<f64>,
    #[arg(long, global = true, value_name = "PIXELS")]
    pub misalignment: Option<f64>,
    #[arg(long, global = true, alias = "fourier_focal_length_mm", value_name = "MM")]
    pub fourier_focal_length_mm: Option<f64>,
    #[arg(long, global = true)]
    pub magnification: Option<f64>,
    #[arg(long, global = true, alias = "position_extent_um", value_name = "UM")]
    pub position_extent_um: Option<f64>,
    #[arg(long, global = true, alias = "momentum_extent_um", value_name = "UM")]
    pub momentum_extent_um: Option<f64>,
    #[arg(long, global = true, alias = "pair_rate", value_name = "PER_S")]
    pub pair_rate: Option<f64>,
    #[arg(long, global = true, value_name = "S")]
    pub dwell: Option<f64>,
    #[arg(long, global = true, alias = "accidental_rate", value_name = "PER_S")]
    pub accidental_rate: Option<f64>,
    #[arg(
        long,
        global = true,
        alias = "roi_radius",
        value_name = "PIXELS",
        conflicts_with = "full_scan"
    )]
    pub roi_radius: Option<usize>,
    /// Scan every pixel pair instead of an ROI.
    #[arg(long, global = true, alias = "full_scan")]
    pub full_scan: bool,
}

impl RunConfig {
    pub fn load(overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &overrides.config {
            Some(path) => Self::read(path)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        set!(
            out,
            format,
            sigma_c,
            sigma_p,
            wavelength,
            resolutions,
            capture_fraction,
            misalignment,
            fourier_focal_length_mm,
            magnification,
            pair_rate,
            dwell,
            accidental_rate
        );
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.position_extent_um.is_some() {
            self.position_extent_um = o.position_extent_um;
        }
        if o.momentum_extent_um.is_some() {
            self.momentum_extent_um = o.momentum_extent_um;
        }
        if o.roi_radius.is_some() {
            self.roi_radius = o.roi_radius;
        }
        if o.full_scan {
            self.roi_radius = None;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("sigma_c", self.sigma_c),
            ("sigma_p", self.sigma_p),
            ("wavelength", self.wavelength),
            ("fourier_focal_length_mm", self.fourier_focal_length_mm),
            ("magnification", self.magnification),
            ("dwell", self.dwell),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("pair_rate", self.pair_rate),
            ("accidental_rate", self.accidental_rate),
            ("misalignment", self.misalignment),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Usage(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.capture_fraction > 0.0 && self.capture_fraction < 1.0) {
            return Err(CliError::Usage(format!(
                "capture_fraction must lie in (0, 1), got {}",
                self.capture_fraction
            )));
        }
        for (name, v) in [
            ("position_extent_um", self.position_extent_um),
            ("momentum_extent_um", self.momentum_extent_um),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.resolutions.is_empty() {
            return Err(CliError::Usage("resolutions must not be empty".into()));
        }
        if self.resolutions.contains(&0) {
            return Err(CliError::Usage("resolutions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn state(&self) -> Result<GaussianBiphotonState, CliError> {
        GaussianBiphotonState::new(self.sigma_c, self.sigma_p, self.wavelength).map_err(CliError::from)
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Usage("this command is randomized: set `seed` in the config or pass --seed".into())
        })
    }

    /// Sweep settings with detector-plane extents converted to source
    /// coordinates.
    pub fn sweep_params(&self, seed: u64) -> Result<SweepParams, CliError> {
        let mapping = PlaneMapping::new(self.fourier_focal_length_mm, self.wavelength)?;
        Ok(SweepParams {
            resolutions: self.resolutions.clone(),
            capture_fraction: self.capture_fraction,
            misalignment: self.misalignment,
            position_extent: self.position_extent_um.map(|w| w / self.magnification),
            momentum_extent: self.momentum_extent_um.map(|w| mapping.to_wavenumber(w)),
            simulation: SimulationParams {
                pair_rate: self.pair_rate,
                dwell_per_pair: self.dwell,
                accidental_rate: self.accidental_rate,
                roi_radius: self.roi_radius,
                ..SimulationParams::default()
            },
            seed,
            ..SweepParams::default()
        })
    }
}
