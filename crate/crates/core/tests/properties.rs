use num_complex::Complex64;
use proptest::prelude::*;

use readyrules::pulse::{
    dissolve, drift_in_place, partial_reduction, pet_model, Branch, ConsciousPulse, PetExperiment, ResolutionKernel,
};
use readyrules::scenarios::{build, from_json_str, to_json_string, ScenarioParams, CATALOG};
use readyrules::statedyn::{current_matrix, evolve, Component, Factor, HamiltonianSchedule, SystemState, Window};

fn system(amps: &[(f64, f64)], couplings: &[(f64, f64)]) -> (SystemState, HamiltonianSchedule) {
    let comps = amps
        .iter()
        .enumerate()
        .map(|(i, &(re, im))| {
            Component::new(
                Complex64::new(re, im),
                vec![Factor::device(i as u8, readyrules::statedyn::DetectorMode::D0)],
            )
        })
        .collect();
    let state = SystemState::new(comps, 0.0).unwrap();
    let mut sched = HamiltonianSchedule::new();
    let n = amps.len();
    let mut k = 0;
    for m in 0..n {
        for j in (m + 1)..n {
            let (re, im) = couplings[k % couplings.len()];
            sched.couple(m, j, Complex64::new(re, im), Window::always());
            k += 1;
        }
    }
    (state, sched)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn evolution_is_unitary(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..5),
        couplings in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..6),
    ) {
        let (mut state, sched) = system(&amps, &couplings);
        let s0 = state.s();
        prop_assume!(s0 > 1e-3);
        for _ in 0..50 {
            let before = state.s();
            state = evolve(&state, &sched, 0.005).unwrap();
            prop_assert!((state.s() - before).abs() < 1e-9 * s0.max(1.0));
        }
    }

    #[test]
    fn currents_sum_to_zero(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..6),
        couplings in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..8),
    ) {
        let (state, sched) = system(&amps, &couplings);
        let j = current_matrix(&state, &sched).unwrap();
        let total: f64 = j.net().iter().sum();
        prop_assert!(total.abs() < 1e-12);
        for n in 0..amps.len() {
            for m in 0..amps.len() {
                prop_assert!((j.flow(n, m) + j.flow(m, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn drift_conserves_and_moves_up(weights in prop::collection::vec(0.0f64..1.0, 2..30), eta in 0.0f64..0.5) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-6);
        let mut p = ConsciousPulse::from_weights(weights).unwrap();
        let total = p.total();
        for _ in 0..200 {
            let before = p.mean_r();
            drift_in_place(&mut p, eta).unwrap();
            prop_assert!(p.mean_r() >= before);
            prop_assert!(p.weights().iter().all(|&w| w >= 0.0));
        }
        prop_assert!((p.total() - total).abs() < 1e-12);
    }

    #[test]
    fn partial_reduction_is_monotone(w1 in 0.0f64..1.0, w2 in 0.0f64..1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let kernel = ResolutionKernel::gaussian(0.1).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let near = partial_reduction((w1, w2), lo, &kernel, Branch::First).unwrap();
        let far = partial_reduction((w1, w2), hi, &kernel, Branch::First).unwrap();
        prop_assert_eq!(near.0, w1);
        prop_assert!(far.1 <= near.1);
        let near = partial_reduction((w1, w2), lo, &kernel, Branch::Second).unwrap();
        let far = partial_reduction((w1, w2), hi, &kernel, Branch::Second).unwrap();
        prop_assert!(far.0 <= near.0);
    }

    #[test]
    fn dissolve_preserves_weight(weight in 1e-3f64..2.0, center in 0.0f64..=1.0, width in 0.02f64..0.5, bins in 10usize..100) {
        prop_assume!(width >= 0.5 / bins as f64);
        let kernel = ResolutionKernel::gaussian(width).unwrap();
        let p = dissolve(weight, &kernel, center, bins).unwrap();
        prop_assert!((p.total() - weight).abs() < 1e-12 * weight.max(1.0));
    }

    #[test]
    fn pet_without_drift_is_scale_invariant(ag in 0.1f64..3.0, ant in 0.1f64..3.0, scale in 0.1f64..1.5, beta in 0.0f64..5.0) {
        let base = pet_model(&PetExperiment::standard(ag, ant, 50.0, 0.0, beta)).unwrap();
        let scaled = pet_model(&PetExperiment::standard(ag * scale, ant * scale, 50.0, 0.0, beta)).unwrap();
        prop_assert!((base.r_ab - scaled.r_ab).abs() < 1e-12 * base.r_ab);
        prop_assert!((base.r_cd - scaled.r_cd).abs() < 1e-12 * base.r_cd);
        prop_assert!((base.r_ab - base.r_cd).abs() < 1e-12 * base.r_cd);
    }

    #[test]
    fn scenarios_round_trip(
        idx in 0usize..CATALOG.len(),
        g in 1.1f64..3.0,
        modulus in 0.05f64..0.95,
        g_obs in 5.0f64..50.0,
    ) {
        let params = ScenarioParams { capture_coupling: g, observation_coupling: g_obs, ..ScenarioParams::default() }
            .with_capture_modulus(modulus);
        let s = build(CATALOG[idx], &params).unwrap();
        let back = from_json_str(&to_json_string(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }
}
