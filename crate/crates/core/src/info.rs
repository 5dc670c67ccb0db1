//! Plug-in entropies, mutual information and the entropic separability
//! witness, with first-order Poisson error propagation for count data.
//!
//! All logarithms are base 2. Zero-probability cells contribute nothing
//! (`0 log 0 = 0`).

use std::f64::consts::{E, PI};
use std::fmt;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::JointCountMatrix;
use crate::joint::JointDistribution;
use crate::state::Basis;

const NORMALISATION_SLACK: f64 = 1e-6;

/// Conditioning direction of a conditional entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// H(A|B): Alice's outcome given Bob's.
    #[serde(rename = "A|B")]
    AGivenB,
    /// H(B|A).
    #[serde(rename = "B|A")]
    BGivenA,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::AGivenB, Direction::BGivenA];
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AGivenB => "A|B",
            Direction::BGivenA => "B|A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiSource {
    TheoryMatrix,
    SimulatedCounts,
    ExternalCounts,
}

/// Mutual information in bits with a one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MIEstimate {
    pub value: f64,
    pub uncertainty: f64,
    pub source: MiSource,
}

impl MIEstimate {
    pub fn exact(joint: &JointDistribution) -> Self {
        MIEstimate {
            value: mutual_information(joint),
            uncertainty: 0.0,
            source: MiSource::TheoryMatrix,
        }
    }

    pub fn from_counts(counts: &JointCountMatrix, source: MiSource) -> Result<Self> {
        let (value, uncertainty) = mi_from_counts(counts.counts())?;
        Ok(MIEstimate {
            value,
            uncertainty,
            source,
        })
    }
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

fn entropy_of<'a>(probs: impl IntoIterator<Item = &'a f64>) -> f64 {
    // -0.0 for point masses reads oddly in reports.
    (-probs.into_iter().map(|&p| plogp(p)).sum::<f64>()).max(0.0)
}

/// Shannon entropy of a probability vector (a flattened matrix works too).
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    if let Some(bad) = dist.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::invalid(
            "probabilities",
            format!("entries must be >= 0, found {bad}"),
        ));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > NORMALISATION_SLACK {
        return Err(Error::invalid("probabilities", format!("sum to {total}, not 1")));
    }
    Ok(entropy_of(dist.iter().map(|p| p / total).collect::<Vec<_>>().iter()))
}

pub fn marginal_entropy_a(joint: &JointDistribution) -> f64 {
    entropy_of(joint.marginal_a())
}

pub fn marginal_entropy_b(joint: &JointDistribution) -> f64 {
    entropy_of(joint.marginal_b())
}

pub fn joint_entropy(joint: &JointDistribution) -> f64 {
    entropy_of(joint.probs().iter())
}

/// `H(A) + H(B) - H(A,B)`.
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    marginal_entropy_a(joint) + marginal_entropy_b(joint) - joint_entropy(joint)
}

pub fn conditional_entropy(joint: &JointDistribution, direction: Direction) -> f64 {
    let given = match direction {
        Direction::AGivenB => marginal_entropy_b(joint),
        Direction::BGivenA => marginal_entropy_a(joint),
    };
    joint_entropy(joint) - given
}

/// Upper bound on detectable mutual information with `n_pixels` per detector.
pub fn max_detectable_mi(n_pixels: usize) -> Result<f64> {
    if n_pixels == 0 {
        return Err(Error::invalid("n_pixels", "must be at least 1"));
    }
    Ok((n_pixels as f64).log2())
}

struct CountStats {
    total: f64,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

fn count_stats(counts: &Array2<u64>) -> Result<CountStats> {
    let as_f = counts.mapv(|c| c as f64);
    let total = as_f.sum();
    if total < 1.0 {
        return Err(Error::EmptyDistribution("no recorded coincidences".into()));
    }
    Ok(CountStats {
        total,
        rows: as_f.sum_axis(Axis(1)).to_vec(),
        cols: as_f.sum_axis(Axis(0)).to_vec(),
    })
}

fn entropy_of_counts<'a>(counts: impl IntoIterator<Item = &'a f64>, total: f64) -> f64 {
    entropy_of(counts.into_iter().map(|c| c / total).collect::<Vec<_>>().iter())
}

/// Plug-in mutual information of a count matrix and its first-order
/// uncertainty under independent Poisson (`sqrt N`) errors per cell.
///
/// With `p = N / T`, the derivative of the plug-in estimate with respect to
/// one cell, including its effect on the total `T`, is
/// `dI/dN_mn = (i_mn - I) / T` where `i_mn = log2(p_mn / (p_m p_n))`, so
/// `sigma^2 = sum_mn N_mn (i_mn - I)^2 / T^2`. Empty cells contribute zero.
pub fn mi_from_counts(counts: &Array2<u64>) -> Result<(f64, f64)> {
    let CountStats { total, rows, cols } = count_stats(counts)?;
    let h_a = entropy_of_counts(&rows, total);
    let h_b = entropy_of_counts(&cols, total);
    let cells: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let h_ab = entropy_of_counts(&cells, total);
    let mi = h_a + h_b - h_ab;

    let mut var = 0.0;
    for ((m, n), &c) in counts.indexed_iter() {
        if c > 0 {
            let c = c as f64;
            let pointwise = (c * total / (rows[m] * cols[n])).log2();
            let d = pointwise - mi;
            var += c * d * d;
        }
    }
    Ok((mi, var.sqrt() / total))
}

/// Plug-in conditional entropy of a count matrix and its propagated
/// uncertainty; `dH(A|B)/dN_mn = -(log2 p(m|n) + H(A|B)) / T`.
pub fn conditional_entropy_from_counts(counts: &Array2<u64>, direction: Direction) -> Result<(f64, f64)> {
    let CountStats { total, rows, cols } = count_stats(counts)?;
    let cells: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let h_ab = entropy_of_counts(&cells, total);
    let (given, given_h) = match direction {
        Direction::AGivenB => (&cols, entropy_of_counts(&cols, total)),
        Direction::BGivenA => (&rows, entropy_of_counts(&rows, total)),
    };
    let h = h_ab - given_h;
    let mut var = 0.0;
    for ((m, n), &c) in counts.indexed_iter() {
        if c > 0 {
            let c = c as f64;
            let condition = match direction {
                Direction::AGivenB => given[n],
                Direction::BGivenA => given[m],
            };
            let d = (c / condition).log2() + h;
            var += c * d * d;
        }
    }
    Ok((h, var.sqrt() / total))
}

/// Propagated standard deviation of the plug-in mutual information.
pub fn mi_poisson_uncertainty(counts: &JointCountMatrix) -> Result<f64> {
    Ok(mi_from_counts(counts.counts())?.1)
}

/// `log2(pi e)`, the lower bound on `H(A|B)_P + H(A|B)_M` for separable
/// states.
pub fn separability_bound() -> f64 {
    (PI * E).log2()
}

/// Anything that yields a conditional entropy with an uncertainty.
pub trait WitnessData {
    fn basis(&self) -> Basis;
    fn dims(&self) -> (usize, usize);
    fn conditional_entropy_estimate(&self, direction: Direction) -> Result<(f64, f64)>;
}

impl WitnessData for JointDistribution {
    fn basis(&self) -> Basis {
        JointDistribution::basis(self)
    }

    fn dims(&self) -> (usize, usize) {
        (self.n_a(), self.n_b())
    }

    fn conditional_entropy_estimate(&self, direction: Direction) -> Result<(f64, f64)> {
        Ok((conditional_entropy(self, direction), 0.0))
    }
}

impl WitnessData for JointCountMatrix {
    fn basis(&self) -> Basis {
        self.basis
    }

    fn dims(&self) -> (usize, usize) {
        self.counts().dim()
    }

    fn conditional_entropy_estimate(&self, direction: Direction) -> Result<(f64, f64)> {
        conditional_entropy_from_counts(self.counts(), direction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub direction: Direction,
    pub sum: f64,
    pub bound: f64,
    pub sigma: f64,
    pub violated: bool,
    /// `(bound - sum) / sigma`, present when `sigma > 0`.
    pub sigmas_of_violation: Option<f64>,
}

/// Sum of position- and momentum-basis conditional entropies compared with
/// the separability bound.
pub fn separability_sum<P, M>(position: &P, momentum: &M, direction: Direction) -> Result<WitnessResult>
where
    P: WitnessData + ?Sized,
    M: WitnessData + ?Sized,
{
    if position.basis() != Basis::Position {
        return Err(Error::BasisMismatch {
            expected: Basis::Position,
            found: position.basis(),
        });
    }
    if momentum.basis() != Basis::Momentum {
        return Err(Error::BasisMismatch {
            expected: Basis::Momentum,
            found: momentum.basis(),
        });
    }
    if position.dims() != momentum.dims() {
        return Err(Error::DimensionMismatch(format!(
            "position data is {:?}, momentum data is {:?}",
            position.dims(),
            momentum.dims()
        )));
    }
    let (hp, sp) = position.conditional_entropy_estimate(direction)?;
    let (hm, sm) = momentum.conditional_entropy_estimate(direction)?;
    let sum = hp + hm;
    let sigma = sp.hypot(sm);
    let bound = separability_bound();
    Ok(WitnessResult {
        direction,
        sum,
        bound,
        sigma,
        violated: sum < bound,
        sigmas_of_violation: (sigma > 0.0).then(|| (bound - sum) / sigma),
    })
}
