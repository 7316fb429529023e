mod common;

use std::f64::consts::PI;

use common::density;
use critprobe_core::linalg::{vec, ComplexMatrix, DensityMatrix};
use critprobe_core::liouville::{analytic_single_qubit, propagate, propagate_with, Backend};
use critprobe_core::metrology::Experiment;
use critprobe_core::model::bloch_pure_state;
use critprobe_core::{BlochState, IsingChainSpec, NoiseKind, ProbeCouplingSpec, VectorizedLiouvillian};
use proptest::prelude::*;

fn experiment() -> impl Strategy<Value = Experiment> {
    prop_oneof![
        (0.1f64..1.0, -0.5f64..0.5).prop_map(|(wp, g)| Experiment::TwoQubit { omega0: 1.0, omega_p: wp, g, beta: 0.1 }),
        (1usize..4, 0.5f64..1.5, prop::option::of(0.1f64..3.0)).prop_map(|(n, h, rc)| Experiment::IsingChain {
            chain: IsingChainSpec::new(n, h, 1.0).unwrap(),
            probe: ProbeCouplingSpec::new(0.5, 0.5).unwrap(),
            noise: rc.map_or(NoiseKind::Local, |r| NoiseKind::Correlated { rc_over_a: r }),
            beta: 0.1,
        }),
    ]
}

fn liouvillian(e: &Experiment, lambda: f64) -> VectorizedLiouvillian {
    e.liouvillian(lambda).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_is_trace_preserving_and_unital(e in experiment(), lambda in 0.0f64..1.0) {
        let l = liouvillian(&e, lambda).generator();
        let d = 1usize << e.n_qubits();
        let id = vec(&ComplexMatrix::identity(d)).unwrap().as_column();
        prop_assert!((&id.adjoint() * &l).max_abs() < 1e-10);
        prop_assert!((&l * &id).max_abs() < 1e-10);
    }

    #[test]
    fn generator_is_affine_in_lambda(e in experiment(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let base = liouvillian(&e, 0.0);
        let la = base.with_lambda(a).unwrap().generator();
        let lb = base.with_lambda(b).unwrap().generator();
        let diff = (&la - &lb).max_abs_diff(&base.l_dissipative_unit().scale_real(a - b));
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn propagation_preserves_states(e in experiment(), lambda in 0.0f64..0.5, t in 0.0f64..30.0, b in (0.0..=PI, 0.0..2.0 * PI)) {
        let liou = liouvillian(&e, lambda);
        let rho0 = e.initial_state(&BlochState::new(b.0, b.1).unwrap()).unwrap();
        let rho = propagate(&liou, &rho0, t).unwrap();
        prop_assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn semigroup_composition(e in experiment(), lambda in 0.0f64..0.5, t1 in 0.0f64..10.0, t2 in 0.0f64..10.0) {
        let liou = liouvillian(&e, lambda);
        let rho0 = e.initial_state(&BlochState::new(1.0, 0.3).unwrap()).unwrap();
        let direct = propagate(&liou, &rho0, t1 + t2).unwrap();
        let composed = propagate(&liou, &propagate(&liou, &rho0, t1).unwrap(), t2).unwrap();
        prop_assert!(direct.matrix().max_abs_diff(composed.matrix()) < 1e-8);
    }

    #[test]
    fn backends_agree(e in experiment(), lambda in 0.0f64..0.5, t in 0.0f64..20.0) {
        let liou = liouvillian(&e, lambda);
        let rho0 = e.initial_state(&BlochState::new(2.0, 1.0).unwrap()).unwrap();
        let a = propagate_with(&liou, &rho0, t, Backend::Dense).unwrap();
        let b = propagate_with(&liou, &rho0, t, Backend::Ode).unwrap();
        prop_assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-8);
    }

    #[test]
    fn qubit_matches_closed_form(lambda in 0.0f64..3.0, t in 0.0f64..50.0, rho0 in density(2), b in (0.0..=PI, 0.0..2.0 * PI)) {
        prop_assume!((lambda - 1.0).abs() > 1e-3);
        let m = critprobe_core::model::SingleQubitModel::new(1.0, lambda).unwrap();
        let spec = critprobe_core::model::collapse_dissipator_spec(
            &critprobe_core::model::NoiseSpec::new(NoiseKind::Local, 0.0).unwrap(), 1).unwrap();
        let liou = VectorizedLiouvillian::new(m.hamiltonian(), &spec, 1, lambda).unwrap();
        for start in [rho0.clone(), bloch_pure_state(&BlochState::new(b.0, b.1).unwrap())] {
            let num = propagate(&liou, &start, t).unwrap();
            let exact = analytic_single_qubit(1.0, lambda, &start, t).unwrap();
            prop_assert!(num.matrix().max_abs_diff(exact.matrix()) < 1e-8);
        }
    }
}
