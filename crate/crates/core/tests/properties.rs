use globalness::cartan::{cartan_number, is_lu_equiv_controlled_unitary, kak_decompose, CARTAN_ZERO_TOL};
use globalness::gates::controlled;
use globalness::io::ArrayJson;
use globalness::linalg::{
    distance_up_to_global_phase, partial_trace, DensityOperator, Matrix, PureState, Tensor, UnitaryOperator,
};
use globalness::locc::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn haar(d: usize, r: &mut ChaCha8Rng) -> Matrix {
    UnitaryOperator::random(&[d], r).into_matrix()
}

fn random_density(d: usize, r: &mut ChaCha8Rng) -> DensityOperator {
    // mixture of two random pure states
    let a = PureState::random(&[d], r).to_density();
    let b = PureState::random(&[d], r).to_density();
    DensityOperator::new(a.matrix().map(|z| z * 0.3) + b.matrix().map(|z| z * 0.7), vec![d]).unwrap()
}

fn sandwich(u: &Matrix, r: &mut ChaCha8Rng) -> UnitaryOperator {
    let left = haar(2, r).kronecker(&haar(2, r));
    let right = haar(2, r).kronecker(&haar(2, r));
    UnitaryOperator::new(left * u * right, vec![2, 2]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_of_local_conjugation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (ra, rb) = (random_density(2, &mut r), random_density(3, &mut r));
        let (ua, ub) = (haar(2, &mut r), haar(3, &mut r));
        let rho = ra.tensor(&rb);
        let u = ua.kronecker(&ub);
        let evolved = DensityOperator::new(&u * rho.matrix() * u.adjoint(), vec![2, 3]).unwrap();
        let lhs = partial_trace(&evolved, &[0]).unwrap();
        let rhs = &ua * partial_trace(&rho, &[0]).unwrap().matrix() * ua.adjoint();
        prop_assert!((lhs.matrix() - rhs).norm() < 1e-10);
    }

    #[test]
    fn tensor_trace_and_associativity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (random_density(2, &mut r), random_density(3, &mut r), random_density(2, &mut r));
        let ab = a.tensor(&b);
        prop_assert!((ab.trace() - a.trace() * b.trace()).norm() < 1e-12);
        let left = ab.tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert_eq!(left.dims(), right.dims());
        prop_assert!((left.matrix() - right.matrix()).norm() < 1e-12);
    }

    #[test]
    fn distance_is_a_pseudometric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let [u, v, w] = [0, 1, 2].map(|_| UnitaryOperator::random(&[2, 2], &mut r));
        let duv = distance_up_to_global_phase(&u, &v).unwrap();
        let dvu = distance_up_to_global_phase(&v, &u).unwrap();
        let dvw = distance_up_to_global_phase(&v, &w).unwrap();
        let duw = distance_up_to_global_phase(&u, &w).unwrap();
        prop_assert!((duv - dvu).abs() < 1e-10);
        prop_assert!(duw <= duv + dvw + 1e-10);
        prop_assert!(distance_up_to_global_phase(&u, &u).unwrap() < 1e-7);
    }

    #[test]
    fn kak_gamma_and_cartan_number_are_local_invariants(seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = UnitaryOperator::random(&[2, 2], &mut r);
        let v = sandwich(u.matrix(), &mut r);
        let (du, dv) = (kak_decompose(&u).unwrap(), kak_decompose(&v).unwrap());
        for k in 0..3 {
            prop_assert!((du.gamma[k] - dv.gamma[k]).abs() < 1e-8, "{:?} vs {:?}", du.gamma, dv.gamma);
        }
        prop_assert_eq!(cartan_number(&du, CARTAN_ZERO_TOL), cartan_number(&dv, CARTAN_ZERO_TOL));
    }

    #[test]
    fn controlled_unitaries_are_classified(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cu = controlled(&[Matrix::identity(2, 2), haar(2, &mut r)]).unwrap();
        let dressed = sandwich(cu.matrix(), &mut r);
        prop_assert!(is_lu_equiv_controlled_unitary(&cu).unwrap().0);
        prop_assert!(is_lu_equiv_controlled_unitary(&dressed).unwrap().0);
        let d = kak_decompose(&dressed).unwrap();
        prop_assert!(d.cartan_number(CARTAN_ZERO_TOL) <= 1);
    }

    #[test]
    fn array_json_round_trips_bit_exactly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = UnitaryOperator::random(&[2, 3], &mut r);
        let text = serde_json::to_string(&ArrayJson::from_unitary(&u)).unwrap();
        let back = globalness::io::parse_array(&text).unwrap().to_matrix().unwrap();
        prop_assert_eq!(back.1, vec![2, 3]);
        prop_assert!(back.0.iter().zip(u.matrix().iter()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }

    #[test]
    fn protocol_json_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cu = ControlledUnitary::new(haar(3, &mut r), (0..3).map(|_| haar(2, &mut r)).collect()).unwrap();
        let p = build_relocalization_protocol(&cu).unwrap();
        prop_assert_eq!(Protocol::from_json(&p.to_json()).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn branch_probabilities_sum_to_one_and_match_accumulated_operators(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = 2 + (seed % 2) as usize;
        let cu = ControlledUnitary::new(haar(d, &mut r), (0..d).map(|_| haar(d, &mut r)).collect()).unwrap();
        let p = build_relocalization_protocol(&cu).unwrap();
        let psi = PureState::random(&[d, d], &mut r);
        let recs = run_protocol(&psi.clone().into(), &p).unwrap();
        let total: f64 = recs.iter().map(|x| x.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for rec in &recs {
            let acc = rec.accumulated_operator(p.layout()).unwrap();
            let v = acc * psi.amplitudes();
            prop_assert!((v.norm_squared() - rec.probability).abs() < 1e-10);
            if let Some(QuantumState::Pure(s)) = &rec.final_state {
                let expected = PureState::normalized(v, vec![d, d]).unwrap();
                prop_assert!(s.fidelity(&expected) > 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn teleportation_probabilities_with_mixed_inputs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, phi) = build_teleportation_protocol(2).unwrap();
        let rho = random_density(2, &mut r).tensor(&phi.to_density());
        let recs = run_protocol(&rho.into(), &p).unwrap();
        let total: f64 = recs.iter().map(|x| x.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for rec in &recs {
            prop_assert!((rec.probability - 0.25).abs() < 1e-10);
        }
    }
}

#[test]
fn relocalization_holds_on_haar_inputs_after_tomographic_pass() {
    let mut r = rng(77);
    let cu = ControlledUnitary::new(haar(2, &mut r), vec![haar(2, &mut r), haar(2, &mut r)]).unwrap();
    let p = build_relocalization_protocol(&cu).unwrap();
    let u = cu.to_unitary();
    let tomo = verify_one_piece_relocalization(
        &p,
        &u,
        &RelocalizationMode::TwoPiece,
        &VerifyOptions { spot_checks: 0, ..Default::default() },
    )
    .unwrap();
    assert!(tomo.success);
    for _ in 0..100 {
        let a = PureState::random(&[2], &mut r);
        let b = PureState::random(&[2], &mut r);
        let initial = a.tensor(&b).evolve(&u).unwrap();
        for rec in run_protocol(&initial.into(), &p).unwrap() {
            assert!(rec.output_state.unwrap().fidelity_with_pure(&b) > 1.0 - 1e-9);
        }
    }
}

#[test]
fn relocation_probe_for_random_controlled_unitaries() {
    let mut r = rng(4);
    for _ in 0..10 {
        let cu = ControlledUnitary::standard(vec![Matrix::identity(2, 2), haar(2, &mut r)]).unwrap();
        let p = build_relocalization_protocol(&cu).unwrap();
        let v = verify_one_piece_relocation(&p, &cu.to_unitary(), None, &VerifyOptions::default()).unwrap();
        assert!(!v.success);
        let psi_b = PureState::random(&[2], &mut r);
        let probe = relocation_entanglement_probe(&p, &cu.to_unitary(), &psi_b).unwrap();
        assert!(probe.iter().any(|b| b.fidelity < 1.0 - 1e-3));
    }
}
