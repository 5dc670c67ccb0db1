mod common;

use approx::assert_abs_diff_eq;
use biphoton_capacity::info::conditional_entropy;
use biphoton_capacity::{
    default_extent, mutual_information, sample_pairs, Alignment, Basis, Direction, GaussianBiphotonState,
};
use common::{axis_density_mass, continuous_mi_by_quadrature, reference_matrix};
use proptest::prelude::*;

// Independent reference values for the 80%-capture reference geometry,
// computed with scipy's bivariate normal CDF. Rows: n, aligned MI,
// misaligned MI, aligned H(A|B), misaligned H(A|B), aligned and
// misaligned captured fraction.
const FROZEN: [(usize, f64, f64, f64, f64, f64, f64); 3] = [
    (
        8,
        5.1675706218,
        3.8202027566,
        0.6601044227,
        1.9339082425,
        0.795907299,
        0.7548875158,
    ),
    (
        16,
        6.6661548255,
        5.809504773,
        1.1513359127,
        1.9713677275,
        0.795907299,
        0.7790069277,
    ),
    (
        24,
        7.4359533921,
        6.9640784023,
        1.5493018664,
        1.9986444787,
        0.795907299,
        0.7863258488,
    ),
];

#[test]
fn closed_form_mi_matches_quadrature() {
    for (c, p) in [(40.0, 1500.0), (1.0, 3.0), (2.0, 0.4), (5.0, 5.0)] {
        let state = GaussianBiphotonState::new(c, p, 650.0).unwrap();
        for basis in Basis::ALL {
            let brute = continuous_mi_by_quadrature(&state, basis);
            assert_abs_diff_eq!(state.mi_continuous(), brute, epsilon = 1e-4);
        }
    }
}

#[test]
fn axis_density_is_normalised() {
    for (c, p) in [(40.0, 1500.0), (1.0, 3.0), (3.0, 0.2)] {
        let state = GaussianBiphotonState::new(c, p, 650.0).unwrap();
        for basis in Basis::ALL {
            assert_abs_diff_eq!(axis_density_mass(&state, basis), 1.0, epsilon = 1e-8);
        }
    }
}

#[test]
fn sampled_covariance_matches_model() {
    let state = GaussianBiphotonState::reference();
    let n = 400_000;
    for basis in Basis::ALL {
        let pairs = sample_pairs(&state, basis, n, 11).unwrap();
        let cov = state.pair_covariance(basis);
        for axis in 0..2 {
            let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
            for pr in &pairs {
                let (a, b) = (pr.alice[axis], pr.bob[axis]);
                saa += a * a;
                sbb += b * b;
                sab += a * b;
            }
            let nf = n as f64;
            let rel = |est: f64, truth: f64| (est / nf - truth).abs() / cov.var_a;
            // Sample second moments of Gaussians: relative SE about sqrt(2/n).
            let tol = 5.0 * (2.0 / nf).sqrt();
            assert!(rel(saa, cov.var_a) < tol);
            assert!(rel(sbb, cov.var_b) < tol);
            assert!(rel(sab, cov.cov_ab) < tol);
        }
    }
}

#[test]
fn default_extent_matches_inverse_erf() {
    let state = GaussianBiphotonState::reference();
    // 2 sqrt(2) sigma erfinv(sqrt(0.8)), sigma the marginal sd.
    assert_abs_diff_eq!(
        default_extent(&state, Basis::Position, 0.8).unwrap(),
        4855.68,
        epsilon = 0.05
    );
}

#[test]
fn discrete_measures_match_frozen_reference() {
    for (n, mi_al, mi_mis, h_al, h_mis, cap_al, cap_mis) in FROZEN {
        for basis in Basis::ALL {
            let al = reference_matrix(n, basis, Alignment::Aligned);
            let mis = reference_matrix(n, basis, Alignment::Misaligned);
            assert_abs_diff_eq!(mutual_information(&al), mi_al, epsilon = 1e-6);
            assert_abs_diff_eq!(mutual_information(&mis), mi_mis, epsilon = 1e-6);
            assert_abs_diff_eq!(conditional_entropy(&al, Direction::AGivenB), h_al, epsilon = 1e-6);
            assert_abs_diff_eq!(conditional_entropy(&mis, Direction::AGivenB), h_mis, epsilon = 1e-6);
            assert_abs_diff_eq!(al.captured_fraction(), cap_al, epsilon = 1e-7);
            assert_abs_diff_eq!(mis.captured_fraction(), cap_mis, epsilon = 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mi_is_scale_invariant(c in 0.1f64..100.0, p in 0.1f64..100.0, k in 1e-3f64..1e3) {
        let a = GaussianBiphotonState::new(c, p, 650.0).unwrap();
        let b = GaussianBiphotonState::new(c * k, p * k, 650.0).unwrap();
        prop_assert!((a.mi_continuous() - b.mi_continuous()).abs() < 1e-9);
    }

    #[test]
    fn mi_vanishes_only_at_product_state(c in 0.1f64..100.0, p in 0.1f64..100.0) {
        let state = GaussianBiphotonState::new(c, p, 650.0).unwrap();
        let mi = state.mi_continuous();
        prop_assert!(mi >= 0.0);
        let product = GaussianBiphotonState::new(2.0 * p, p, 650.0).unwrap();
        prop_assert!(product.mi_continuous().abs() < 1e-12);
        if (c / (2.0 * p) - 1.0).abs() > 1e-3 {
            prop_assert!(mi > 0.0);
        }
    }
}
