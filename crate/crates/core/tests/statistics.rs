mod common;

use biphoton_capacity::{
    mi_poisson_uncertainty, mutual_information, run_resolution_sweep, simulate_counts, Alignment, Basis,
    GaussianBiphotonState, MIEstimate, MiSource, SimulationParams, SweepParams,
};
use common::{bootstrap_mi_std, reference_matrix};

#[test]
fn simulated_mi_tracks_theory_at_16x16() {
    let params = SimulationParams::default();
    let mut shortfalls = Vec::new();
    for basis in Basis::ALL {
        for alignment in [Alignment::Aligned, Alignment::Misaligned] {
            let joint = reference_matrix(16, basis, alignment);
            let truth = mutual_information(&joint);
            let inside = (0..100u64)
                .filter(|&seed| {
                    let counts = simulate_counts(&joint, &params, seed).unwrap();
                    let est = MIEstimate::from_counts(&counts, MiSource::SimulatedCounts).unwrap();
                    (est.value - truth).abs() <= 3.0 * est.uncertainty
                })
                .count();
            if inside < 95 {
                shortfalls.push(format!("{basis} {alignment}: {inside}/100"));
            }
        }
    }
    assert!(
        shortfalls.is_empty(),
        "fewer than 95 of 100 within 3 sigma: {shortfalls:?}"
    );
}

#[test]
fn propagated_sigma_matches_bootstrap() {
    for (n, basis, alignment, rate, seed) in [
        (8, Basis::Position, Alignment::Aligned, 2e3, 1),
        (16, Basis::Momentum, Alignment::Misaligned, 5e4, 2),
        (24, Basis::Position, Alignment::Aligned, 1e6, 3),
    ] {
        let joint = reference_matrix(n, basis, alignment);
        let params = SimulationParams {
            pair_rate: rate,
            accidental_rate: 0.01,
            ..Default::default()
        };
        let counts = simulate_counts(&joint, &params, seed).unwrap();
        let delta = mi_poisson_uncertainty(&counts).unwrap();
        let boot = bootstrap_mi_std(counts.counts(), 400, seed);
        assert!(
            (delta / boot - 1.0).abs() < 0.3,
            "{n} {basis} {alignment}: {delta} vs {boot}"
        );
    }
}

#[test]
fn sweep_respects_ceiling_and_ordering() {
    let state = GaussianBiphotonState::reference();
    let result = run_resolution_sweep(&state, &SweepParams::default()).unwrap();
    assert_eq!(result.records.len(), 6);
    for r in &result.records {
        for est in [&r.aligned, &r.misaligned] {
            assert!(est.value <= r.ceiling + 3.0 * est.uncertainty);
        }
        assert!(r.theory_bottom <= r.theory_top);
        assert!(r.theory_top <= state.mi_continuous());
    }
    for basis in Basis::ALL {
        let tops: Vec<f64> = result
            .records
            .iter()
            .filter(|r| r.basis == basis)
            .map(|r| r.theory_top)
            .collect();
        assert!(tops.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn single_pixel_sweep_carries_no_information() {
    let params = SweepParams {
        resolutions: vec![1],
        ..Default::default()
    };
    let result = run_resolution_sweep(&GaussianBiphotonState::new(3.0, 70.0, 800.0).unwrap(), &params).unwrap();
    for r in &result.records {
        assert_eq!(r.theory_top, 0.0);
        assert_eq!(r.aligned.value, 0.0);
        assert_eq!(r.misaligned.value, 0.0);
    }
}
