//! Simulated double-raster coincidence scans.
//!
//! Every scanned (Alice pixel, Bob pixel) pair is exposed for a fixed dwell
//! time and records a Poisson number of coincidences whose mean combines the
//! correlated pair rate with a flat accidental floor. Scans may be limited to
//! a region of interest around each pixel's predicted partner.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_grid, default_extent, roi_window};
use crate::info::{
    conditional_entropy, max_detectable_mi, mutual_information, separability_sum, Direction, MIEstimate, MiSource,
    WitnessResult,
};
use crate::joint::{csv_records, joint_matrix, parse_field, read_json, square_side, write_json, JointDistribution};
use crate::state::{Basis, GaussianBiphotonState};

/// Coincidence counts of one double raster scan.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCountMatrix {
    counts: Array2<u64>,
    scanned: Array2<bool>,
    pub dwell_per_pair: f64,
    pub pair_rate: f64,
    pub accidental_rate: f64,
    pub seed: u64,
    pub basis: Basis,
}

impl JointCountMatrix {
    /// Counts from an external source; every pair is treated as scanned and
    /// the acquisition metadata is zero.
    pub fn from_counts(counts: Array2<u64>, basis: Basis) -> Self {
        let scanned = Array2::from_elem(counts.dim(), true);
        Self {
            counts,
            scanned,
            dwell_per_pair: 0.0,
            pair_rate: 0.0,
            accidental_rate: 0.0,
            seed: 0,
            basis,
        }
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    pub fn scanned(&self) -> &Array2<bool> {
        &self.scanned
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    pub fn scanned_pairs(&self) -> usize {
        self.scanned.iter().filter(|&&s| s).count()
    }

    pub fn scan_time(&self) -> f64 {
        self.dwell_per_pair * self.scanned_pairs() as f64
    }

    /// CSV layout:
    ///
    /// ```text
    /// n_a,n_b,basis,dwell_per_pair,pair_rate,accidental_rate,seed
    /// 576,576,momentum,1,50000,0,7
    /// m,n,count
    /// 0,0,12
    /// ...
    /// ```
    ///
    /// One data row per scanned pair (zero counts included); pairs that do
    /// not appear were not scanned.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut body = || -> std::io::Result<()> {
            writeln!(w, "n_a,n_b,basis,dwell_per_pair,pair_rate,accidental_rate,seed")?;
            let (na, nb) = self.counts.dim();
            writeln!(
                w,
                "{na},{nb},{},{},{},{},{}",
                self.basis, self.dwell_per_pair, self.pair_rate, self.accidental_rate, self.seed
            )?;
            writeln!(w, "m,n,count")?;
            for ((m, n), &c) in self.counts.indexed_iter() {
                if self.scanned[[m, n]] {
                    writeln!(w, "{m},{n},{c}")?;
                }
            }
            w.flush()
        };
        body().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rows = csv_records(path)?.into_iter();
        let fail = |reason: &str| Error::format(path, reason);
        let header = rows.next().ok_or_else(|| fail("missing header"))?;
        if header.first().map(String::as_str) != Some("n_a") {
            return Err(fail("first row must start with `n_a`"));
        }
        let meta = rows.next().ok_or_else(|| fail("missing metadata row"))?;
        if meta.len() < 3 {
            return Err(fail("metadata row needs n_a, n_b, basis"));
        }
        let na: usize = parse_field(path, &meta[0])?;
        let nb: usize = parse_field(path, &meta[1])?;
        let basis: Basis = meta[2].parse().map_err(|e: Error| Error::format(path, e))?;
        let opt_f = |i: usize| -> Result<f64> { meta.get(i).map_or(Ok(0.0), |v| parse_field(path, v)) };
        let (dwell, rate, acc) = (opt_f(3)?, opt_f(4)?, opt_f(5)?);
        let seed = meta.get(6).map_or(Ok(0), |v| parse_field(path, v))?;
        let cols = rows.next().ok_or_else(|| fail("missing `m,n,count` row"))?;
        if cols.first().map(String::as_str) != Some("m") {
            return Err(fail("expected `m,n,count` column header"));
        }
        let mut counts = Array2::<u64>::zeros((na, nb));
        let mut scanned = Array2::from_elem((na, nb), false);
        for row in rows {
            if row.len() != 3 {
                return Err(fail("data rows need exactly m,n,count"));
            }
            let m: usize = parse_field(path, &row[0])?;
            let n: usize = parse_field(path, &row[1])?;
            if m >= na || n >= nb {
                return Err(fail(&format!("pixel pair ({m},{n}) outside {na}x{nb}")));
            }
            counts[[m, n]] = parse_field(path, &row[2])?;
            scanned[[m, n]] = true;
        }
        Ok(Self {
            counts,
            scanned,
            dwell_per_pair: dwell,
            pair_rate: rate,
            accidental_rate: acc,
            seed,
            basis,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, &CountRecord::from(self))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let r: CountRecord = read_json(path)?;
        r.into_matrix().map_err(|e| Error::format(path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct CountRecord {
    n_a: usize,
    n_b: usize,
    basis: Basis,
    dwell_per_pair: f64,
    pair_rate: f64,
    accidental_rate: f64,
    seed: u64,
    counts: Vec<Vec<u64>>,
    scanned: Vec<Vec<bool>>,
}

impl From<&JointCountMatrix> for CountRecord {
    fn from(c: &JointCountMatrix) -> Self {
        CountRecord {
            n_a: c.counts.nrows(),
            n_b: c.counts.ncols(),
            basis: c.basis,
            dwell_per_pair: c.dwell_per_pair,
            pair_rate: c.pair_rate,
            accidental_rate: c.accidental_rate,
            seed: c.seed,
            counts: c.counts.rows().into_iter().map(|r| r.to_vec()).collect(),
            scanned: c.scanned.rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }
}

impl CountRecord {
    fn into_matrix(self) -> Result<JointCountMatrix> {
        let shape = (self.n_a, self.n_b);
        let counts = Array2::from_shape_vec(shape, self.counts.into_iter().flatten().collect())
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let scanned = Array2::from_shape_vec(shape, self.scanned.into_iter().flatten().collect())
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(JointCountMatrix {
            counts,
            scanned,
            dwell_per_pair: self.dwell_per_pair,
            pair_rate: self.pair_rate,
            accidental_rate: self.accidental_rate,
            seed: self.seed,
            basis: self.basis,
        })
    }
}

/// Flux and scan settings of a simulated acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    /// Detected in-grid coincidence rate with both detectors fully open
    /// (pairs/s).
    pub pair_rate: f64,
    /// Exposure of each scanned pixel pair (s).
    pub dwell_per_pair: f64,
    /// Accidental coincidences per scanned pixel pair (counts/s).
    pub accidental_rate: f64,
    /// Half-width of the partner ROI in pixels; `None` scans every pair.
    pub roi_radius: Option<usize>,
    /// Optional per-pixel geometric acceptance of each arm, default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance_a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance_b: Option<Vec<f64>>,
}

impl SimulationParams {
    /// About 5e4 coincidences per scan at 1 s dwell, no accidentals, ROI
    /// radius 2.
    pub const DEFAULT_PAIR_RATE: f64 = 5.0e4;
    pub const DEFAULT_DWELL: f64 = 1.0;
    pub const DEFAULT_ROI_RADIUS: usize = 2;

    fn validate(&self, n_a: usize, n_b: usize) -> Result<()> {
        let nonneg = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
            }
        };
        nonneg("pair_rate", self.pair_rate)?;
        nonneg("accidental_rate", self.accidental_rate)?;
        if !(self.dwell_per_pair.is_finite() && self.dwell_per_pair > 0.0) {
            return Err(Error::invalid("dwell_per_pair", "must be positive"));
        }
        for (name, acc, n) in [
            ("acceptance_a", &self.acceptance_a, n_a),
            ("acceptance_b", &self.acceptance_b, n_b),
        ] {
            if let Some(g) = acc {
                if g.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} has {} entries for {n} pixels",
                        g.len()
                    )));
                }
                for &v in g {
                    nonneg(name, v)?;
                }
            }
        }
        Ok(())
    }
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            pair_rate: Self::DEFAULT_PAIR_RATE,
            dwell_per_pair: Self::DEFAULT_DWELL,
            accidental_rate: 0.0,
            roi_radius: Some(Self::DEFAULT_ROI_RADIUS),
            acceptance_a: None,
            acceptance_b: None,
        }
    }
}

/// Draw a coincidence scan of `joint`. Row `m` (Alice pixel) uses ChaCha
/// stream `m` of `seed`, so results are independent of thread count.
pub fn simulate_counts(joint: &JointDistribution, params: &SimulationParams, seed: u64) -> Result<JointCountMatrix> {
    let (n_a, n_b) = (joint.n_a(), joint.n_b());
    params.validate(n_a, n_b)?;
    let scanned = scan_mask(joint, params.roi_radius)?;

    let probs = joint.probs();
    let gain = |g: &Option<Vec<f64>>, i: usize| g.as_ref().map_or(1.0, |v| v[i]);
    let rows: Vec<Vec<u64>> = (0..n_a)
        .into_par_iter()
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            let ga = gain(&params.acceptance_a, m);
            (0..n_b)
                .map(|n| {
                    if !scanned[[m, n]] {
                        return Ok(0);
                    }
                    let rate =
                        params.pair_rate * probs[[m, n]] * ga * gain(&params.acceptance_b, n) + params.accidental_rate;
                    let mean = params.dwell_per_pair * rate;
                    if mean <= 0.0 {
                        return Ok(0);
                    }
                    let law = Poisson::new(mean).map_err(|e| Error::Numerical(format!("Poisson mean {mean}: {e}")))?;
                    Ok(law.sample(&mut rng) as u64)
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;
    let counts = Array2::from_shape_fn((n_a, n_b), |(m, n)| rows[m][n]);
    Ok(JointCountMatrix {
        counts,
        scanned,
        dwell_per_pair: params.dwell_per_pair,
        pair_rate: params.pair_rate,
        accidental_rate: params.accidental_rate,
        seed,
        basis: joint.basis(),
    })
}

fn scan_mask(joint: &JointDistribution, roi_radius: Option<usize>) -> Result<Array2<bool>> {
    let (n_a, n_b) = (joint.n_a(), joint.n_b());
    let Some(radius) = roi_radius else {
        return Ok(Array2::from_elem((n_a, n_b), true));
    };
    let side = square_side(n_a)?;
    if square_side(n_b)? != side {
        return Err(Error::DimensionMismatch(
            "ROI scanning needs equal grid sizes on both arms".into(),
        ));
    }
    let sign = joint.basis().correlation_sign();
    let mut mask = Array2::from_elem((n_a, n_b), false);
    for m in 0..n_a {
        let [xs, ys] = roi_window([m % side, m / side], side, radius, sign);
        for y in ys {
            for x in xs.clone() {
                mask[[m, y * side + x]] = true;
            }
        }
    }
    Ok(mask)
}

/// Empirical joint distribution of the recorded coincidences.
pub fn counts_to_distribution(counts: &JointCountMatrix) -> Result<JointDistribution> {
    if counts.total() == 0 {
        return Err(Error::EmptyDistribution("no recorded coincidences".into()));
    }
    JointDistribution::from_weights(counts.counts.mapv(|c| c as f64), counts.basis, 1.0)
}

/// Duration of a double raster scan: every pair, or only each Alice pixel's
/// clipped ROI.
pub fn scan_time(n_per_axis: usize, dwell_per_pair: f64, roi_radius: Option<usize>) -> Result<f64> {
    if n_per_axis == 0 {
        return Err(Error::invalid("n_per_axis", "must be at least 1"));
    }
    if !(dwell_per_pair.is_finite() && dwell_per_pair > 0.0) {
        return Err(Error::invalid("dwell_per_pair", "must be positive"));
    }
    let n = n_per_axis as f64;
    let pairs = match roi_radius {
        None => n.powi(4),
        Some(r) => {
            // The ROI is a product of per-axis windows, so the total is the
            // square of the per-axis sum of clipped window widths.
            let per_axis: usize = (0..n_per_axis)
                .map(|m| (m + r + 1).min(n_per_axis) - m.saturating_sub(r))
                .sum();
            (per_axis * per_axis) as f64
        }
    };
    Ok(dwell_per_pair * pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Aligned,
    Misaligned,
}

impl Alignment {
    pub fn as_str(self) -> &'static str {
        match self {
            Alignment::Aligned => "aligned",
            Alignment::Misaligned => "misaligned",
        }
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aligned" => Ok(Alignment::Aligned),
            "misaligned" => Ok(Alignment::Misaligned),
            other => Err(Error::invalid(
                "alignment",
                format!("expected `aligned` or `misaligned`, got `{other}`"),
            )),
        }
    }
}

/// Settings of a resolution sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub resolutions: Vec<usize>,
    pub bases: Vec<Basis>,
    pub capture_fraction: f64,
    /// Relative lateral shift of Bob's grid in pixels, both axes.
    pub misalignment: f64,
    /// Grid side in source coordinates; derived from `capture_fraction`
    /// when absent.
    pub position_extent: Option<f64>,
    pub momentum_extent: Option<f64>,
    pub simulation: SimulationParams,
    pub seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            resolutions: vec![8, 16, 24],
            bases: Basis::ALL.to_vec(),
            capture_fraction: 0.8,
            misalignment: 0.5,
            position_extent: None,
            momentum_extent: None,
            simulation: SimulationParams::default(),
            seed: 0,
        }
    }
}

impl SweepParams {
    pub fn extent(&self, state: &GaussianBiphotonState, basis: Basis) -> Result<f64> {
        let fixed = match basis {
            Basis::Position => self.position_extent,
            Basis::Momentum => self.momentum_extent,
        };
        match fixed {
            Some(w) => Ok(w),
            None => default_extent(state, basis, self.capture_fraction),
        }
    }

    /// Exact joint distribution for one sweep point.
    pub fn theory_matrix(
        &self,
        state: &GaussianBiphotonState,
        n_per_axis: usize,
        basis: Basis,
        alignment: Alignment,
    ) -> Result<JointDistribution> {
        let w = self.extent(state, basis)?;
        let grid_a = build_grid(n_per_axis, w, [0.0; 2], basis)?;
        let grid_b = match alignment {
            Alignment::Aligned => grid_a.clone(),
            Alignment::Misaligned => grid_a.shifted(self.misalignment),
        };
        joint_matrix(state, &grid_a, &grid_b)
    }
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for one (resolution, basis, alignment) point.
pub fn point_seed(seed: u64, n_per_axis: usize, basis: Basis, alignment: Alignment) -> u64 {
    let tag = (n_per_axis as u64) << 2 | (basis as u64) << 1 | alignment as u64;
    mix(mix(seed) ^ tag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n_per_axis: usize,
    pub basis: Basis,
    pub aligned: MIEstimate,
    pub misaligned: MIEstimate,
    pub theory_top: f64,
    pub theory_bottom: f64,
    pub ceiling: f64,
    pub captured_fraction: f64,
    pub total_counts_aligned: u64,
    pub total_counts_misaligned: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub n_per_axis: usize,
    pub exact_sum: f64,
    pub simulated: WitnessResult,
}

/// One simulated scan kept for export.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub n_per_axis: usize,
    pub basis: Basis,
    pub alignment: Alignment,
    pub counts: JointCountMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub witness: Vec<WitnessRecord>,
    #[serde(skip)]
    pub runs: Vec<SweepRun>,
}

struct PointOutcome {
    record: SweepRecord,
    aligned_exact: JointDistribution,
    aligned_counts: JointCountMatrix,
    misaligned_counts: JointCountMatrix,
}

fn run_point(state: &GaussianBiphotonState, params: &SweepParams, n: usize, basis: Basis) -> Result<PointOutcome> {
    let top = params.theory_matrix(state, n, basis, Alignment::Aligned)?;
    let bottom = params.theory_matrix(state, n, basis, Alignment::Misaligned)?;
    let aligned_counts = simulate_counts(
        &top,
        &params.simulation,
        point_seed(params.seed, n, basis, Alignment::Aligned),
    )?;
    let misaligned_counts = simulate_counts(
        &bottom,
        &params.simulation,
        point_seed(params.seed, n, basis, Alignment::Misaligned),
    )?;
    let record = SweepRecord {
        n_per_axis: n,
        basis,
        aligned: MIEstimate::from_counts(&aligned_counts, MiSource::SimulatedCounts)?,
        misaligned: MIEstimate::from_counts(&misaligned_counts, MiSource::SimulatedCounts)?,
        theory_top: mutual_information(&top),
        theory_bottom: mutual_information(&bottom),
        ceiling: max_detectable_mi(n * n)?,
        captured_fraction: top.captured_fraction(),
        total_counts_aligned: aligned_counts.total(),
        total_counts_misaligned: misaligned_counts.total(),
    };
    Ok(PointOutcome {
        record,
        aligned_exact: top,
        aligned_counts,
        misaligned_counts,
    })
}

/// Exact and simulated mutual information across detector resolutions, plus
/// separability sums wherever both bases were swept at the same resolution.
pub fn run_resolution_sweep(state: &GaussianBiphotonState, params: &SweepParams) -> Result<SweepResult> {
    if params.resolutions.is_empty() {
        return Err(Error::invalid("resolutions", "must not be empty"));
    }
    if params.bases.is_empty() {
        return Err(Error::invalid("bases", "must not be empty"));
    }
    if !params.misalignment.is_finite() {
        return Err(Error::invalid("misalignment", "must be finite"));
    }
    let points: Vec<(usize, Basis)> = params
        .resolutions
        .iter()
        .flat_map(|&n| params.bases.iter().map(move |&b| (n, b)))
        .collect();
    let outcomes = points
        .par_iter()
        .map(|&(n, basis)| run_point(state, params, n, basis))
        .collect::<Result<Vec<_>>>()?;

    let mut witness = Vec::new();
    for &n in &params.resolutions {
        let find = |b: Basis| {
            outcomes
                .iter()
                .find(|o| o.record.n_per_axis == n && o.record.basis == b)
        };
        if let (Some(pos), Some(mom)) = (find(Basis::Position), find(Basis::Momentum)) {
            for dir in Direction::BOTH {
                witness.push(WitnessRecord {
                    n_per_axis: n,
                    exact_sum: conditional_entropy(&pos.aligned_exact, dir)
                        + conditional_entropy(&mom.aligned_exact, dir),
                    simulated: separability_sum(&pos.aligned_counts, &mom.aligned_counts, dir)?,
                });
            }
        }
    }

    let mut records = Vec::with_capacity(outcomes.len());
    let mut runs = Vec::with_capacity(2 * outcomes.len());
    for o in outcomes {
        let (n, basis) = (o.record.n_per_axis, o.record.basis);
        runs.push(SweepRun {
            n_per_axis: n,
            basis,
            alignment: Alignment::Aligned,
            counts: o.aligned_counts,
        });
        runs.push(SweepRun {
            n_per_axis: n,
            basis,
            alignment: Alignment::Misaligned,
            counts: o.misaligned_counts,
        });
        records.push(o.record);
    }
    Ok(SweepResult { records, witness, runs })
}

impl SweepResult {
    /// One row per resolution x basis x alignment:
    /// `n,basis,alignment,mi,sigma,theory_top,theory_bottom,ceiling`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("n,basis,alignment,mi,sigma,theory_top,theory_bottom,ceiling\n");
        for r in &self.records {
            for (alignment, est) in [(Alignment::Aligned, r.aligned), (Alignment::Misaligned, r.misaligned)] {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n_per_axis,
                    r.basis,
                    alignment,
                    est.value,
                    est.uncertainty,
                    r.theory_top,
                    r.theory_bottom,
                    r.ceiling
                ));
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// `n,direction,exact_sum,sum,sigma,bound,violated,sigmas_of_violation`.
    pub fn write_witness_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("n,direction,exact_sum,sum,sigma,bound,violated,sigmas_of_violation\n");
        for w in &self.witness {
            let s = &w.simulated;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                w.n_per_axis,
                s.direction,
                w.exact_sum,
                s.sum,
                s.sigma,
                s.bound,
                s.violated,
                s.sigmas_of_violation.map_or(String::new(), |v| v.to_string())
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::mi_from_counts;
    use approx::assert_abs_diff_eq;

    fn reference_joint(n: usize, basis: Basis) -> JointDistribution {
        SweepParams::default()
            .theory_matrix(&GaussianBiphotonState::reference(), n, basis, Alignment::Aligned)
            .unwrap()
    }

    #[test]
    fn scan_time_examples() {
        assert_eq!(scan_time(8, 1.0, None).unwrap(), 4096.0);
        assert_eq!(scan_time(24, 1.0, None).unwrap(), 331_776.0);
        let roi = scan_time(24, 1.0, Some(1)).unwrap();
        assert!(roi <= 5184.0);
        // 22 interior windows of width 3 plus two clipped of width 2.
        assert_eq!(roi, (22.0 * 3.0 + 4.0f64).powi(2));
        assert_eq!(scan_time(3, 2.0, Some(10)).unwrap(), scan_time(3, 2.0, None).unwrap());
        assert!(scan_time(0, 1.0, None).is_err());
        assert!(scan_time(4, 0.0, None).is_err());
    }

    #[test]
    fn roi_mask_matches_scan_time() {
        let joint = reference_joint(8, Basis::Momentum);
        let params = SimulationParams {
            roi_radius: Some(1),
            ..Default::default()
        };
        let c = simulate_counts(&joint, &params, 1).unwrap();
        assert_eq!(c.scan_time(), scan_time(8, 1.0, Some(1)).unwrap());
        // Anti-correlated ROI sits on the mirrored pixel.
        assert!(c.scanned()[[0, 63]]);
        assert!(!c.scanned()[[0, 0]]);
        assert!(c.counts().indexed_iter().all(|(ix, &v)| v == 0 || c.scanned()[ix]));
    }

    #[test]
    fn simulation_is_deterministic() {
        let joint = reference_joint(8, Basis::Position);
        let params = SimulationParams::default();
        let a = simulate_counts(&joint, &params, 42).unwrap();
        let b = simulate_counts(&joint, &params, 42).unwrap();
        let c = simulate_counts(&joint, &params, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts(), c.counts());
    }

    #[test]
    fn counts_converge_to_joint() {
        let joint = reference_joint(8, Basis::Position);
        let params = SimulationParams {
            pair_rate: 2e7,
            roi_radius: None,
            ..Default::default()
        };
        let c = simulate_counts(&joint, &params, 5).unwrap();
        assert!(c.total() as f64 > 1e7);
        let empirical = counts_to_distribution(&c).unwrap();
        assert!(empirical.total_variation(&joint).unwrap() <= 0.005);
    }

    #[test]
    fn accidentals_alone_carry_no_information() {
        let joint = reference_joint(4, Basis::Position);
        let params = SimulationParams {
            pair_rate: 0.0,
            accidental_rate: 2000.0,
            roi_radius: None,
            ..Default::default()
        };
        let c = simulate_counts(&joint, &params, 11).unwrap();
        let (mi, sigma) = mi_from_counts(c.counts()).unwrap();
        // Plug-in bias ~ (16-1)^2 / (2 T ln 2) ~ 3e-4 bits at T ~ 5e5.
        assert!(mi.abs() < 2e-3, "{mi} +/- {sigma}");
        let mean = c.total() as f64 / 256.0;
        assert!((mean - 2000.0).abs() < 20.0);
    }

    #[test]
    fn invalid_simulation_inputs() {
        let joint = reference_joint(2, Basis::Position);
        let bad = SimulationParams {
            dwell_per_pair: 0.0,
            ..Default::default()
        };
        assert!(simulate_counts(&joint, &bad, 0).is_err());
        let bad = SimulationParams {
            pair_rate: -1.0,
            ..Default::default()
        };
        assert!(simulate_counts(&joint, &bad, 0).is_err());
        let bad = SimulationParams {
            acceptance_a: Some(vec![1.0; 3]),
            ..Default::default()
        };
        assert!(simulate_counts(&joint, &bad, 0).is_err());
    }

    #[test]
    fn counts_to_distribution_cases() {
        let mut counts = Array2::<u64>::zeros((4, 4));
        counts[[1, 2]] = 17;
        let c = JointCountMatrix::from_counts(counts, Basis::Position);
        let j = counts_to_distribution(&c).unwrap();
        assert_eq!(j.probs()[[1, 2]], 1.0);
        let empty = JointCountMatrix::from_counts(Array2::zeros((2, 2)), Basis::Position);
        assert!(counts_to_distribution(&empty).is_err());
    }

    #[test]
    fn point_seeds_are_distinct() {
        let mut seeds = std::collections::HashSet::new();
        for n in [8, 16, 24] {
            for b in Basis::ALL {
                for a in [Alignment::Aligned, Alignment::Misaligned] {
                    assert!(seeds.insert(point_seed(7, n, b, a)));
                }
            }
        }
    }

    #[test]
    fn single_pixel_sweep_has_no_information() {
        let params = SweepParams {
            resolutions: vec![1],
            ..Default::default()
        };
        let r = run_resolution_sweep(&GaussianBiphotonState::reference(), &params).unwrap();
        for rec in &r.records {
            assert_eq!(rec.theory_top, 0.0);
            assert_eq!(rec.theory_bottom, 0.0);
            assert_eq!(rec.aligned.value, 0.0);
            assert_eq!(rec.ceiling, 0.0);
        }
        assert_eq!(r.witness.len(), 2);
    }

    #[test]
    fn count_file_round_trip() {
        let joint = reference_joint(4, Basis::Momentum);
        let c = simulate_counts(&joint, &SimulationParams::default(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("c.csv");
        c.write_csv(&csv).unwrap();
        assert_eq!(JointCountMatrix::read_csv(&csv).unwrap(), c);
        let json = dir.path().join("c.json");
        c.write_json(&json).unwrap();
        assert_eq!(JointCountMatrix::read_json(&json).unwrap(), c);
    }

    #[test]
    fn sweep_bounds() {
        let params = SweepParams {
            resolutions: vec![4, 8],
            ..Default::default()
        };
        let r = run_resolution_sweep(&GaussianBiphotonState::reference(), &params).unwrap();
        assert_eq!(r.records.len(), 4);
        assert_eq!(r.runs.len(), 8);
        for rec in &r.records {
            assert!(rec.theory_bottom <= rec.theory_top);
            assert!(rec.theory_top <= rec.ceiling);
            assert_abs_diff_eq!(rec.ceiling, ((rec.n_per_axis * rec.n_per_axis) as f64).log2());
        }
    }
}
