use std::f64::consts::PI;
use std::sync::Arc;

use magnon_hom::dynamics::{
    assemble_hamiltonian, evolve, HamiltonianParams, PulseSchedule, Segment, SegmentPropagator,
};
use magnon_hom::fock::{build_basis, make_state, FockBasis, FockIndex, StateVector};
use magnon_hom::Complex64;
use proptest::prelude::*;

const G: f64 = 2.0 * PI * 20e6;

fn arb_params() -> impl Strategy<Value = HamiltonianParams> {
    (
        -6.0..6.0f64,
        0.1..3.0f64,
        -PI..PI,
        prop_oneof![Just(0.0), 0.0..2.0 * PI * 5e9],
    )
        .prop_map(|(dw, g, phase, wbar)| {
            HamiltonianParams::from_detuning(wbar, dw * G, Complex64::from_polar(g * G, phase))
        })
}

fn arb_segment() -> impl Strategy<Value = Segment> {
    (arb_params(), 0.01e-9..20e-9).prop_map(|(p, t)| Segment::new(p, t))
}

fn arb_state(basis: Arc<FockBasis>) -> impl Strategy<Value = StateVector> {
    let states = basis.states().to_vec();
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), states.len())
        .prop_filter("nonzero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(move |v| {
            let terms: Vec<_> = states
                .iter()
                .zip(v)
                .map(|(&s, (re, im))| (s, Complex64::new(re, im)))
                .collect();
            make_state(&basis, &terms).unwrap()
        })
}

fn block_weights(state: &StateVector) -> Vec<f64> {
    (0..state.basis().num_blocks())
        .map(|n| state.block_weight(n))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn populations_sum_to_one(
        segments in prop::collection::vec(arb_segment(), 1..6),
        psi in arb_state(build_basis(2)),
    ) {
        let traj = evolve(&PulseSchedule::piecewise(segments).unwrap(), &psi, 7).unwrap();
        for pops in &traj.populations {
            prop_assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn segment_propagators_are_unitary(params in arb_params(), t in 0.0..100e-9f64, n_max in 1usize..5) {
        let basis = build_basis(n_max);
        let u = SegmentPropagator::new(&assemble_hamiltonian(&params, &basis)).unwrap().unitary(t).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn block_weights_are_conserved(
        segments in prop::collection::vec(arb_segment(), 1..6),
        psi in arb_state(build_basis(3)),
    ) {
        let before = block_weights(&psi);
        let traj = evolve(&PulseSchedule::piecewise(segments).unwrap(), &psi, 1).unwrap();
        for (a, b) in before.iter().zip(block_weights(traj.final_state())) {
            prop_assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn pure_block_never_leaks(segments in prop::collection::vec(arb_segment(), 1..6)) {
        let basis = build_basis(3);
        let psi = StateVector::basis_state(&basis, FockIndex::new(1, 1)).unwrap();
        let traj = evolve(&PulseSchedule::piecewise(segments).unwrap(), &psi, 3).unwrap();
        for s in &traj.states {
            let outside: f64 = [0, 1, 3].iter().map(|&n| s.block_weight(n)).sum();
            prop_assert!(outside < 1e-14);
        }
    }

    #[test]
    fn mean_frequency_shift_is_a_block_phase(
        segments in prop::collection::vec(arb_segment(), 1..4),
        shift in -2.0 * PI * 1e9..2.0 * PI * 1e9,
        psi in arb_state(build_basis(2)),
    ) {
        let shifted: Vec<_> = segments.iter().map(|s| Segment::new(s.params.shifted(shift), s.duration)).collect();
        let sched = PulseSchedule::piecewise(segments).unwrap();
        let total = sched.total_duration();
        let a = evolve(&sched, &psi, 1).unwrap();
        let b = evolve(&PulseSchedule::piecewise(shifted).unwrap(), &psi, 1).unwrap();
        for (&idx, (ca, cb)) in psi.basis().states().iter().zip(a.final_state().amplitudes().iter().zip(b.final_state().amplitudes().iter())) {
            let phase = Complex64::from_polar(1.0, -shift * idx.total() as f64 * total);
            prop_assert!((ca * phase - cb).norm() < 1e-10);
        }
    }

    #[test]
    fn coupling_phase_is_a_mode_two_rephasing(
        segments in prop::collection::vec(arb_segment(), 1..4),
        chi in -PI..PI,
        psi in arb_state(build_basis(2)),
    ) {
        let rotor = Complex64::from_polar(1.0, chi);
        let rotated: Vec<_> = segments
            .iter()
            .map(|s| {
                let p = s.params;
                Segment::new(HamiltonianParams::new(p.omega1, p.omega2, p.g * rotor), s.duration)
            })
            .collect();
        let basis = psi.basis().clone();
        // R = exp(i chi n2) maps H(g e^{i chi}) onto H(g)
        let rephase = |s: &StateVector, sign: f64| {
            let amps = s
                .amplitudes()
                .iter()
                .zip(basis.states())
                .map(|(c, idx)| c * Complex64::from_polar(1.0, sign * chi * idx.m2 as f64))
                .collect::<Vec<_>>();
            StateVector::from_amplitudes(basis.clone(), amps.into())
        };
        let a = evolve(&PulseSchedule::piecewise(segments).unwrap(), &psi, 1).unwrap();
        let b = evolve(&PulseSchedule::piecewise(rotated).unwrap(), &rephase(&psi, -1.0), 1).unwrap();
        let back = rephase(b.final_state(), 1.0);
        prop_assert!((a.final_state().amplitudes() - back.amplitudes()).camax() < 1e-10);
        for (pa, pb) in a.final_state().populations().iter().zip(b.final_state().populations()) {
            prop_assert!((pa.1 - pb.1).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn long_schedules_keep_the_norm(
        segments in prop::collection::vec(arb_segment(), 1000),
        psi in arb_state(build_basis(2)),
    ) {
        let traj = evolve(&PulseSchedule::piecewise(segments).unwrap(), &psi, 1).unwrap();
        prop_assert!((traj.final_state().norm_sqr() - 1.0).abs() < 1e-11);
    }
}
