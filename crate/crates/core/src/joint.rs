//! Pixel-pair joint detection probabilities.
//!
//! The exact matrix integrates the biphoton density over every pair of
//! pixels. Because the density factorises over the two transverse axes, each
//! 2D entry is the product of two 1D bivariate-normal rectangle
//! probabilities. A Monte-Carlo sampler provides an independent route to the
//! same matrix.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bivariate::rectangle_probability;
use crate::error::{Error, Result};
use crate::geometry::DetectorGrid;
use crate::state::{Basis, GaussianBiphotonState};

/// Probabilities below this are stored as exact zeros.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Normalised joint distribution over (Alice pixel, Bob pixel), indexed by
/// the row-major linear pixel index of each grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRecord", into = "JointRecord")]
pub struct JointDistribution {
    probs: Array2<f64>,
    marginal_a: Vec<f64>,
    marginal_b: Vec<f64>,
    captured_fraction: f64,
    basis: Basis,
}

impl JointDistribution {
    /// Normalise non-negative weights into a distribution.
    pub fn from_weights(mut weights: Array2<f64>, basis: Basis, captured_fraction: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDistribution("zero-sized matrix".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(
                "weights",
                format!("entries must be finite and >= 0, found {bad}"),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyDistribution("all weights are zero".into()));
        }
        weights.mapv_inplace(|w| {
            let p = w / total;
            if p < PROBABILITY_FLOOR {
                0.0
            } else {
                p
            }
        });
        let marginal_a = weights.sum_axis(Axis(1)).to_vec();
        let marginal_b = weights.sum_axis(Axis(0)).to_vec();
        Ok(Self {
            probs: weights,
            marginal_a,
            marginal_b,
            captured_fraction,
            basis,
        })
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn n_a(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_b(&self) -> usize {
        self.probs.ncols()
    }

    pub fn marginal_a(&self) -> &[f64] {
        &self.marginal_a
    }

    pub fn marginal_b(&self) -> &[f64] {
        &self.marginal_b
    }

    pub fn captured_fraction(&self) -> f64 {
        self.captured_fraction
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Swap the roles of Alice and Bob.
    pub fn transposed(&self) -> Self {
        Self {
            probs: self.probs.t().to_owned(),
            marginal_a: self.marginal_b.clone(),
            marginal_b: self.marginal_a.clone(),
            captured_fraction: self.captured_fraction,
            basis: self.basis,
        }
    }

    /// Merge `factor x factor` blocks of pixels on both detectors.
    pub fn coarse_grained(&self, factor: usize) -> Result<Self> {
        let side_a = square_side(self.n_a())?;
        let side_b = square_side(self.n_b())?;
        if factor == 0 || side_a % factor != 0 || side_b % factor != 0 {
            return Err(Error::invalid(
                "factor",
                format!("{factor} does not divide grid sides {side_a} and {side_b}"),
            ));
        }
        let (ca, cb) = (side_a / factor, side_b / factor);
        let merge = |idx: usize, side: usize, coarse: usize| {
            let (x, y) = (idx % side, idx / side);
            (y / factor) * coarse + x / factor
        };
        let mut out = Array2::<f64>::zeros((ca * ca, cb * cb));
        for ((m, n), &p) in self.probs.indexed_iter() {
            out[[merge(m, side_a, ca), merge(n, side_b, cb)]] += p;
        }
        Self::from_weights(out, self.basis, self.captured_fraction)
    }

    /// Total variation distance, `1/2 sum |p - q|`.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.probs.dim() != other.probs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.probs.dim(),
                other.probs.dim()
            )));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(other.probs.iter())
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }

    /// Write the CSV layout:
    ///
    /// ```text
    /// n_a,n_b,basis,captured_fraction
    /// 64,64,position,0.7959
    /// m,n,p
    /// 0,0,0.0123
    /// ...
    /// ```
    ///
    /// Only non-zero entries are listed; omitted pairs are zero.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut body = || -> std::io::Result<()> {
            writeln!(w, "n_a,n_b,basis,captured_fraction")?;
            writeln!(
                w,
                "{},{},{},{}",
                self.n_a(),
                self.n_b(),
                self.basis,
                self.captured_fraction
            )?;
            writeln!(w, "m,n,p")?;
            for ((m, n), &p) in self.probs.indexed_iter() {
                if p > 0.0 {
                    writeln!(w, "{m},{n},{p}")?;
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
        let n_a: usize = parse_field(path, &meta[0])?;
        let n_b: usize = parse_field(path, &meta[1])?;
        let basis: Basis = meta[2].parse().map_err(|e: Error| Error::format(path, e))?;
        let captured = match meta.get(3) {
            Some(v) => parse_field(path, v)?,
            None => 1.0,
        };
        let cols = rows.next().ok_or_else(|| fail("missing `m,n,p` row"))?;
        if cols.first().map(String::as_str) != Some("m") {
            return Err(fail("expected `m,n,p` column header"));
        }
        let mut probs = Array2::<f64>::zeros((n_a, n_b));
        for row in rows {
            if row.len() != 3 {
                return Err(fail("data rows need exactly m,n,p"));
            }
            let m: usize = parse_field(path, &row[0])?;
            let n: usize = parse_field(path, &row[1])?;
            let p: f64 = parse_field(path, &row[2])?;
            if m >= n_a || n >= n_b {
                return Err(fail(&format!("pixel pair ({m},{n}) outside {n_a}x{n_b}")));
            }
            probs[[m, n]] = p;
        }
        Self::from_weights(probs, basis, captured)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct JointRecord {
    n_a: usize,
    n_b: usize,
    basis: Basis,
    captured_fraction: f64,
    probs: Vec<Vec<f64>>,
    marginal_a: Vec<f64>,
    marginal_b: Vec<f64>,
}

impl From<JointDistribution> for JointRecord {
    fn from(j: JointDistribution) -> Self {
        JointRecord {
            n_a: j.n_a(),
            n_b: j.n_b(),
            basis: j.basis,
            captured_fraction: j.captured_fraction,
            probs: j.probs.rows().into_iter().map(|r| r.to_vec()).collect(),
            marginal_a: j.marginal_a,
            marginal_b: j.marginal_b,
        }
    }
}

impl TryFrom<JointRecord> for JointDistribution {
    type Error = Error;

    fn try_from(r: JointRecord) -> Result<Self> {
        if r.probs.len() != r.n_a || r.probs.iter().any(|row| row.len() != r.n_b) {
            return Err(Error::DimensionMismatch(format!("probs is not {}x{}", r.n_a, r.n_b)));
        }
        let flat: Vec<f64> = r.probs.into_iter().flatten().collect();
        let probs =
            Array2::from_shape_vec((r.n_a, r.n_b), flat).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        JointDistribution::from_weights(probs, r.basis, r.captured_fraction)
    }
}

pub(crate) fn square_side(n: usize) -> Result<usize> {
    let side = (n as f64).sqrt().round() as usize;
    if side * side == n {
        Ok(side)
    } else {
        Err(Error::DimensionMismatch(format!(
            "{n} pixels do not form a square grid"
        )))
    }
}

pub(crate) fn csv_records(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_owned).collect())
                .map_err(|e| Error::format(path, e))
        })
        .collect()
}

pub(crate) fn parse_field<T: std::str::FromStr>(path: &Path, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .parse()
        .map_err(|e: T::Err| Error::format(path, format!("`{field}`: {e}")))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::format(path, e))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::format(path, e))
}

/// Per-axis matrix of rectangle probabilities between the pixel columns of
/// two grids, in standardised coordinates.
fn axis_matrix(rho: f64, sd: f64, edges_a: &[f64], edges_b: &[f64]) -> Result<Array2<f64>> {
    let (na, nb) = (edges_a.len() - 1, edges_b.len() - 1);
    let rows: Vec<Vec<f64>> = (0..na)
        .into_par_iter()
        .map(|i| {
            (0..nb)
                .map(|j| {
                    rectangle_probability(
                        rho,
                        edges_a[i] / sd,
                        edges_a[i + 1] / sd,
                        edges_b[j] / sd,
                        edges_b[j + 1] / sd,
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Array2::from_shape_fn((na, nb), |(i, j)| rows[i][j]))
}

/// Exact joint detection probabilities for two grids viewing the same
/// basis, conditioned on both photons landing inside their grids.
pub fn joint_matrix(
    state: &GaussianBiphotonState,
    grid_a: &DetectorGrid,
    grid_b: &DetectorGrid,
) -> Result<JointDistribution> {
    if grid_a.basis != grid_b.basis {
        return Err(Error::BasisMismatch {
            expected: grid_a.basis,
            found: grid_b.basis,
        });
    }
    let basis = grid_a.basis;
    let cov = state.pair_covariance(basis);
    let sd = cov.marginal_std();

    let mx = axis_matrix(cov.rho, sd, &grid_a.axis_edges(0), &grid_b.axis_edges(0))?;
    let my = if grid_a.center_offset[1] == grid_a.center_offset[0] && grid_b.center_offset[1] == grid_b.center_offset[0]
    {
        mx.clone()
    } else {
        axis_matrix(cov.rho, sd, &grid_a.axis_edges(1), &grid_b.axis_edges(1))?
    };
    let captured = mx.sum() * my.sum();
    if captured <= 0.0 {
        return Err(Error::EmptyDistribution("grids capture no coincidences".into()));
    }

    let (sa, sb) = (grid_a.n_per_axis, grid_b.n_per_axis);
    let weights = Array2::from_shape_fn((sa * sa, sb * sb), |(m, n)| {
        let (ax, ay) = (m % sa, m / sa);
        let (bx, by) = (n % sb, n / sb);
        mx[[ax, bx]] * my[[ay, by]]
    });
    JointDistribution::from_weights(weights, basis, captured)
}

/// Transverse detection coordinates of one photon pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonPair {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

/// Endless stream of photon pairs drawn from the state's density.
///
/// Per axis, the difference and sum coordinates are drawn as independent
/// zero-mean Gaussians and rotated back to `(a, b)`.
pub struct PairSampler {
    diff: Normal<f64>,
    sum: Normal<f64>,
    rng: ChaCha8Rng,
}

impl PairSampler {
    pub fn new(state: &GaussianBiphotonState, basis: Basis, seed: u64) -> Self {
        Self::with_stream(state, basis, seed, 0)
    }

    /// Independent sub-stream `stream` of the generator seeded with `seed`.
    pub fn with_stream(state: &GaussianBiphotonState, basis: Basis, seed: u64, stream: u64) -> Self {
        let (sd_diff, sd_sum) = state.rotated_widths(basis);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            // Widths come from a validated state and are always positive.
            diff: Normal::new(0.0, sd_diff).expect("positive width"),
            sum: Normal::new(0.0, sd_sum).expect("positive width"),
            rng,
        }
    }
}

impl Iterator for PairSampler {
    type Item = PhotonPair;

    fn next(&mut self) -> Option<PhotonPair> {
        let mut alice = [0.0; 2];
        let mut bob = [0.0; 2];
        for axis in 0..2 {
            let d = self.diff.sample(&mut self.rng);
            let s = self.sum.sample(&mut self.rng);
            alice[axis] = 0.5 * (s + d);
            bob[axis] = 0.5 * (s - d);
        }
        Some(PhotonPair { alice, bob })
    }
}

pub fn sample_pairs(state: &GaussianBiphotonState, basis: Basis, count: usize, seed: u64) -> Result<Vec<PhotonPair>> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    Ok(PairSampler::new(state, basis, seed).take(count).collect())
}

/// Coincidence histogram of `samples` over two grids.
pub fn histogram<I>(samples: I, grid_a: &DetectorGrid, grid_b: &DetectorGrid) -> (Array2<u64>, u64)
where
    I: IntoIterator<Item = PhotonPair>,
{
    let mut counts = Array2::<u64>::zeros((grid_a.n_pixels(), grid_b.n_pixels()));
    let mut seen = 0u64;
    for pair in samples {
        seen += 1;
        if let (Some(pa), Some(pb)) = (grid_a.locate(pair.alice), grid_b.locate(pair.bob)) {
            counts[[grid_a.linear_index(pa), grid_b.linear_index(pb)]] += 1;
        }
    }
    (counts, seen)
}

/// Empirical joint distribution of the pairs that land in both grids.
pub fn matrix_from_samples<I>(samples: I, grid_a: &DetectorGrid, grid_b: &DetectorGrid) -> Result<JointDistribution>
where
    I: IntoIterator<Item = PhotonPair>,
{
    let (counts, seen) = histogram(samples, grid_a, grid_b);
    from_histogram(counts, seen, grid_a.basis)
}

fn from_histogram(counts: Array2<u64>, seen: u64, basis: Basis) -> Result<JointDistribution> {
    if seen == 0 {
        return Err(Error::EmptyDistribution("no samples".into()));
    }
    let inside: u64 = counts.iter().sum();
    if inside == 0 {
        return Err(Error::EmptyDistribution("every sample fell outside the grids".into()));
    }
    JointDistribution::from_weights(counts.mapv(|c| c as f64), basis, inside as f64 / seen as f64)
}

const SAMPLE_CHUNK: usize = 1 << 20;

/// Monte-Carlo estimate of [`joint_matrix`] from `count` sampled pairs.
///
/// Work is split into fixed-size chunks, each drawing from its own ChaCha
/// stream, so the result depends only on `seed`, not on thread count.
pub fn sampled_matrix(
    state: &GaussianBiphotonState,
    grid_a: &DetectorGrid,
    grid_b: &DetectorGrid,
    count: usize,
    seed: u64,
) -> Result<JointDistribution> {
    if grid_a.basis != grid_b.basis {
        return Err(Error::BasisMismatch {
            expected: grid_a.basis,
            found: grid_b.basis,
        });
    }
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    let basis = grid_a.basis;
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let take = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            let sampler = PairSampler::with_stream(state, basis, seed, c as u64);
            histogram(sampler.take(take), grid_a, grid_b).0
        })
        .reduce(
            || Array2::<u64>::zeros((grid_a.n_pixels(), grid_b.n_pixels())),
            |a, b| a + b,
        );
    from_histogram(counts, count as u64, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, default_extent};
    use approx::assert_abs_diff_eq;

    fn reference_grids(n: usize, basis: Basis, shift: f64) -> (DetectorGrid, DetectorGrid) {
        let state = GaussianBiphotonState::reference();
        let w = default_extent(&state, basis, 0.8).unwrap();
        let a = build_grid(n, w, [0.0; 2], basis).unwrap();
        let b = build_grid(n, w, [shift; 2], basis).unwrap();
        (a, b)
    }

    #[test]
    fn single_unbounded_pixel_is_certain() {
        let state = GaussianBiphotonState::reference();
        // A single pixel 80 marginal widths across is effectively the plane.
        let g = build_grid(1, 80.0 * 1500.13, [0.0; 2], Basis::Position).unwrap();
        let j = joint_matrix(&state, &g, &g).unwrap();
        assert_eq!(j.probs().dim(), (1, 1));
        assert_eq!(j.probs()[[0, 0]], 1.0);
        assert_abs_diff_eq!(j.captured_fraction(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rows_peak_on_partner_pixel() {
        let state = GaussianBiphotonState::reference();
        for basis in Basis::ALL {
            let (a, b) = reference_grids(8, basis, 0.0);
            let j = joint_matrix(&state, &a, &b).unwrap();
            for (m, row) in j.probs().rows().into_iter().enumerate() {
                let argmax = row.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
                let expected = match basis {
                    Basis::Position => m,
                    Basis::Momentum => 63 - m,
                };
                assert_eq!(argmax, expected, "{basis} row {m}");
            }
        }
    }

    #[test]
    fn normalisation_marginals_and_symmetry() {
        let state = GaussianBiphotonState::reference();
        for basis in Basis::ALL {
            let (a, b) = reference_grids(8, basis, 0.0);
            let j = joint_matrix(&state, &a, &b).unwrap();
            assert_abs_diff_eq!(j.probs().sum(), 1.0, epsilon = 1e-12);
            for (m, row) in j.probs().rows().into_iter().enumerate() {
                assert_abs_diff_eq!(row.sum(), j.marginal_a()[m], epsilon = 1e-15);
            }
            let p = j.probs();
            let last = p.nrows() - 1;
            for m in 0..p.nrows() {
                for n in 0..p.ncols() {
                    let mirror = match basis {
                        Basis::Position => p[[n, m]],
                        Basis::Momentum => p[[last - n, last - m]],
                    };
                    assert_abs_diff_eq!(p[[m, n]], mirror, epsilon = 1e-9);
                }
            }
            assert!((0.60..=0.82).contains(&j.captured_fraction()));
        }
    }

    #[test]
    fn basis_mismatch_is_rejected() {
        let (a, _) = reference_grids(4, Basis::Position, 0.0);
        let (b, _) = reference_grids(4, Basis::Momentum, 0.0);
        let state = GaussianBiphotonState::reference();
        assert!(matches!(joint_matrix(&state, &a, &b), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn sampling_is_deterministic() {
        let state = GaussianBiphotonState::reference();
        let a = sample_pairs(&state, Basis::Position, 1000, 9).unwrap();
        let b = sample_pairs(&state, Basis::Position, 1000, 9).unwrap();
        let c = sample_pairs(&state, Basis::Position, 1000, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_pairs(&state, Basis::Position, 0, 9).is_err());
    }

    #[test]
    fn sampled_covariance_matches_closed_form() {
        let state = GaussianBiphotonState::reference();
        let n = 1_000_000usize;
        for basis in Basis::ALL {
            let cov = state.pair_covariance(basis);
            let pairs = sample_pairs(&state, basis, n, 3).unwrap();
            for axis in 0..2 {
                let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
                for p in &pairs {
                    saa += p.alice[axis] * p.alice[axis];
                    sbb += p.bob[axis] * p.bob[axis];
                    sab += p.alice[axis] * p.bob[axis];
                }
                let nf = n as f64;
                let (vaa, vbb, vab) = (saa / nf, sbb / nf, sab / nf);
                // Standard errors of Gaussian second moments.
                let se_var = cov.var_a * (2.0 / nf).sqrt();
                let se_cov = ((cov.var_a * cov.var_b + cov.cov_ab * cov.cov_ab) / nf).sqrt();
                assert!((vaa - cov.var_a).abs() < 5.0 * se_var, "{basis} var_a");
                assert!((vbb - cov.var_b).abs() < 5.0 * se_var, "{basis} var_b");
                assert!((vab - cov.cov_ab).abs() < 5.0 * se_cov, "{basis} cov");
            }
        }
    }

    #[test]
    fn histogram_edge_cases() {
        let g = build_grid(2, 2.0, [0.0; 2], Basis::Position).unwrap();
        let same = vec![
            PhotonPair {
                alice: [0.5, -0.5],
                bob: [-0.5, 0.5]
            };
            10
        ];
        let j = matrix_from_samples(same, &g, &g).unwrap();
        let (m, n) = (g.linear_index([1, 0]), g.linear_index([0, 1]));
        assert_eq!(j.probs()[[m, n]], 1.0);

        let outside = vec![
            PhotonPair {
                alice: [5.0, 0.0],
                bob: [0.0, 0.0]
            };
            3
        ];
        assert!(matches!(
            matrix_from_samples(outside, &g, &g),
            Err(Error::EmptyDistribution(_))
        ));
        assert!(matrix_from_samples(Vec::new(), &g, &g).is_err());
    }

    #[test]
    fn uniform_samples_fill_cells_evenly() {
        use rand::Rng;
        let g = build_grid(2, 2.0, [0.0; 2], Basis::Position).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut point = || [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let pairs: Vec<PhotonPair> = (0..160_000)
            .map(|_| PhotonPair {
                alice: point(),
                bob: point(),
            })
            .collect();
        let j = matrix_from_samples(pairs, &g, &g).unwrap();
        // Each of 16 cells has p = 1/16; binomial sd ~ 6e-4.
        for &p in j.probs() {
            assert!((p - 1.0 / 16.0).abs() < 4e-3, "{p}");
        }
    }

    #[test]
    fn coarse_graining_merges_blocks() {
        let (a, b) = reference_grids(4, Basis::Position, 0.0);
        let state = GaussianBiphotonState::reference();
        let j = joint_matrix(&state, &a, &b).unwrap();
        let c = j.coarse_grained(2).unwrap();
        assert_eq!(c.probs().dim(), (4, 4));
        assert_abs_diff_eq!(c.probs().sum(), 1.0, epsilon = 1e-12);
        let coarse = joint_matrix(
            &state,
            &build_grid(2, a.extent(), [0.0; 2], Basis::Position).unwrap(),
            &build_grid(2, b.extent(), [0.0; 2], Basis::Position).unwrap(),
        )
        .unwrap();
        assert!(c.total_variation(&coarse).unwrap() < 1e-9);
        assert!(j.coarse_grained(3).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let state = GaussianBiphotonState::reference();
        let (a, b) = reference_grids(4, Basis::Momentum, 0.5);
        let j = joint_matrix(&state, &a, &b).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("m.csv");
        j.write_csv(&csv).unwrap();
        let back = JointDistribution::read_csv(&csv).unwrap();
        assert_eq!(back.basis(), Basis::Momentum);
        assert!(j.total_variation(&back).unwrap() < 1e-15);
        assert_eq!(back.captured_fraction(), j.captured_fraction());

        let json = dir.path().join("m.json");
        j.write_json(&json).unwrap();
        let back = JointDistribution::read_json(&json).unwrap();
        assert!(j.total_variation(&back).unwrap() < 1e-15);
    }
}
