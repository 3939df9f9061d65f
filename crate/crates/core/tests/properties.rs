use std::f64::consts::PI;

use coherence_kit::detection::{
    certifies_coherence, check_minimal_setup_conditions, undetected_perturbations, OffDiagonalEstimator,
};
use coherence_kit::linalg::{
    dft_vector, hs_inner, null_space_in_traceless_hermitian, real_span_dimension, ComplexMatrix,
    HermitianBasisVector, DEFAULT_TOL,
};
use coherence_kit::number_theory::{exponent, ZdElement};
use coherence_kit::reconstruction::{
    fourier_profile, reconstruct_offdiagonals, simulate_probabilities, ProbabilityTable, VandermondeSystem,
};
use coherence_kit::setups::{
    build_minimal_setup, check_mutual_unbiasedness, mub_from_phases, MeasurementSetup, OrthonormalBasis,
    SetupConfig,
};
use coherence_kit::states::{
    c1_coherence, is_incoherent, perturbation_scale_bound, random_density_matrix, random_perturbation,
    DensityMatrix,
};
use coherence_kit::CoherenceError;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn ginibre(d: usize, rng: &mut StdRng) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn random_hermitian(d: usize, rng: &mut StdRng) -> ComplexMatrix {
    let g = ginibre(d, rng);
    ComplexMatrix::new((&g + g.adjoint()).scale(0.5)).unwrap()
}

fn random_basis(d: usize, rng: &mut StdRng) -> OrthonormalBasis {
    let q = ginibre(d, rng).qr().q();
    OrthonormalBasis::from_columns(&q).unwrap()
}

fn random_phase_basis(d: usize, rng: &mut StdRng) -> OrthonormalBasis {
    let betas: Vec<Complex64> = (0..d)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
        .collect();
    mub_from_phases(&OrthonormalBasis::standard(d), &betas).unwrap()
}

fn fourier_basis(d: usize) -> OrthonormalBasis {
    mub_from_phases(&OrthonormalBasis::standard(d), &vec![Complex64::new(1.0, 0.0); d]).unwrap()
}

fn max_entry_gap(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hermitian_coordinates_roundtrip(d in 1usize..=16, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_hermitian(d, &mut rng);
        let v = HermitianBasisVector::from_matrix(&a).unwrap();
        prop_assert_eq!(v.coords().len(), d * d);
        let back = v.to_matrix();
        prop_assert!(max_entry_gap(back.as_matrix(), a.as_matrix()) < 1e-12);
        let norm2: f64 = v.coords().iter().map(|c| c * c).sum();
        prop_assert!((norm2 - hs_inner(&a, &a).unwrap()).abs() < 1e-9 * norm2.max(1.0));
    }

    #[test]
    fn hs_inner_is_positive_and_symmetric(d in 1usize..=8, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_hermitian(d, &mut rng);
        let b = random_hermitian(d, &mut rng);
        prop_assert!(hs_inner(&a, &a).unwrap() >= 0.0);
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-10 * (1.0 + ab.abs()));
    }

    #[test]
    fn span_dimension_is_bounded(d in 1usize..=5, count in 1usize..=30, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let ops: Vec<ComplexMatrix> = (0..count).map(|_| random_hermitian(d, &mut rng)).collect();
        let span = real_span_dimension(&ops, DEFAULT_TOL).unwrap();
        prop_assert_eq!(span, (d * d).min(count));
    }

    #[test]
    fn null_space_is_orthogonal_and_traceless(d in 2usize..=6, count in 0usize..=4, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let ops: Vec<ComplexMatrix> = (0..count.max(1))
            .flat_map(|_| random_basis(d, &mut rng).projections())
            .collect();
        let null = null_space_in_traceless_hermitian(&ops, DEFAULT_TOL).unwrap();
        for (i, p) in null.iter().enumerate() {
            prop_assert!(p.matrix().trace().norm() < 10.0 * DEFAULT_TOL);
            for op in &ops {
                prop_assert!(hs_inner(p.matrix(), op).unwrap().abs() < 10.0 * DEFAULT_TOL);
            }
            for (k, q) in null.iter().enumerate() {
                let expected = if i == k { 1.0 } else { 0.0 };
                prop_assert!((hs_inner(p.matrix(), q.matrix()).unwrap() - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dft_roundtrip(d in 1usize..=20, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let back = dft_vector(&dft_vector(&v, -1).unwrap(), 1).unwrap();
        for (a, b) in back.iter().zip(&v) {
            prop_assert!((a / d as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_nullity_for_random_setups(d in 2usize..=6, m in 1usize..=7, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bases: Vec<OrthonormalBasis> = (0..m).map(|_| random_basis(d, &mut rng)).collect();
        let setup = MeasurementSetup::with_standard_reference(bases).unwrap();
        let shifted: Vec<ComplexMatrix> = setup
            .measured_projections()
            .iter()
            .map(|p| p.sub(&ComplexMatrix::identity(d).scale(1.0 / d as f64)).unwrap())
            .collect();
        let span = real_span_dimension(&shifted, DEFAULT_TOL).unwrap();
        let undetected = undetected_perturbations(&setup, DEFAULT_TOL).unwrap();
        prop_assert_eq!(span + undetected.len(), d * d - 1);
    }

    #[test]
    fn adding_a_basis_never_grows_the_blind_spot(d in 2usize..=5, m in 1usize..=5, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bases: Vec<OrthonormalBasis> = (0..m).map(|_| random_phase_basis(d, &mut rng)).collect();
        let setup = MeasurementSetup::with_standard_reference(bases).unwrap();
        let before = certifies_coherence(&setup, DEFAULT_TOL).unwrap();
        let after = certifies_coherence(&setup.with_basis(random_basis(d, &mut rng)).unwrap(), DEFAULT_TOL).unwrap();
        prop_assert!(after.undetected_dim <= before.undetected_dim);
        prop_assert!(after.span_dim >= before.span_dim);
        if before.all_undetected_diagonal {
            prop_assert!(after.all_undetected_diagonal);
        }
    }

    #[test]
    fn minimal_conditions_match_certification(d in 2usize..=5, generic in any::<bool>(), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let bases: Vec<OrthonormalBasis> = (0..d)
            .map(|_| if generic { random_basis(d, &mut rng) } else { random_phase_basis(d, &mut rng) })
            .collect();
        let setup = MeasurementSetup::with_standard_reference(bases).unwrap();
        let conditions = check_minimal_setup_conditions(&setup, DEFAULT_TOL).unwrap();
        let report = certifies_coherence(&setup, DEFAULT_TOL).unwrap();
        prop_assert_eq!(conditions.unbiased_all, !generic);
        prop_assert_eq!(conditions.both(), report.all_undetected_diagonal);
    }

    #[test]
    fn reconstruction_is_linear(d in 2usize..=6, lambda in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let config = SetupConfig::with_default_alpha(d).unwrap();
        let setup = build_minimal_setup(&config).unwrap();
        let t1 = simulate_probabilities(&random_density_matrix(d, &mut rng), &setup).unwrap();
        let t2 = simulate_probabilities(&random_density_matrix(d, &mut rng), &setup).unwrap();
        let r1 = reconstruct_offdiagonals(&t1, &config).unwrap().matrix;
        let r2 = reconstruct_offdiagonals(&t2, &config).unwrap().matrix;
        let mixed = reconstruct_offdiagonals(&t1.mix(&t2, lambda).unwrap(), &config).unwrap().matrix;
        let expected = r1.scale(lambda).add(&r2.scale(1.0 - lambda)).unwrap();
        prop_assert!(max_entry_gap(mixed.as_matrix(), expected.as_matrix()) < 1e-10);
    }

    #[test]
    fn fourier_profile_conjugate_symmetry(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let setup = build_minimal_setup(&SetupConfig::with_default_alpha(d).unwrap()).unwrap();
        let table = simulate_probabilities(&random_density_matrix(d, &mut rng), &setup).unwrap();
        for z in 1..d {
            let a = fourier_profile(&table, z).unwrap();
            let b = fourier_profile(&table, d - z).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y.conj()).norm() < 1e-12);
            }
        }
        for row in table.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert!(matches!(fourier_profile(&table, 0), Err(CoherenceError::ZeroShift)));
    }

    #[test]
    fn zero_coherence_iff_incoherent(d in 2usize..=6, diagonal in any::<bool>(), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let rho = if diagonal {
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            DensityMatrix::diagonal(&w.iter().map(|x| x / total).collect::<Vec<_>>()).unwrap()
        } else {
            random_density_matrix(d, &mut rng)
        };
        prop_assert_eq!(c1_coherence(&rho) < 1e-12, is_incoherent(&rho, 1e-12));
        prop_assert_eq!(is_incoherent(&rho, 1e-12), diagonal);
    }

    #[test]
    fn maximally_mixed_tolerates_any_direction(d in 2usize..=8, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let delta = random_perturbation(d, &mut rng);
        let t = perturbation_scale_bound(&DensityMatrix::maximally_mixed(d), &delta).unwrap();
        prop_assert!(t > 0.0);
        prop_assert!((t - 1.0 / d as f64).abs() < 1e-9);
    }

    #[test]
    fn explicit_and_dense_inverses_agree(d in 2usize..=8, jitter in prop::collection::vec(-0.35f64..0.35, 8), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let offset: f64 = rng.random_range(0.0..2.0 * PI);
        let nodes: Vec<Complex64> = (0..d)
            .map(|h| Complex64::from_polar(1.0, offset + 2.0 * PI * (h as f64 + jitter[h]) / d as f64))
            .collect();
        let sys = VandermondeSystem::from_nodes(nodes).unwrap();
        let explicit = sys.inverse_explicit().unwrap();
        let dense = sys.inverse_dense().unwrap();
        prop_assert!(max_entry_gap(&explicit, &dense) < 1e-9);
        let identity = DMatrix::<Complex64>::identity(d, d);
        prop_assert!(max_entry_gap(&(&explicit * sys.matrix()), &identity) < 1e-10);
    }

    #[test]
    fn projection_estimator_recovers_offdiagonals(d in 2usize..=5, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let setup = build_minimal_setup(&SetupConfig::with_default_alpha(d).unwrap()).unwrap();
        let estimator = OffDiagonalEstimator::new(&setup, 1e-8).unwrap();
        let rho = random_density_matrix(d, &mut rng);
        let estimate = estimator.estimate(&simulate_probabilities(&rho, &setup).unwrap()).unwrap();
        for j in 0..d {
            for k in 0..d {
                if j != k {
                    prop_assert!((estimate.get(j, k) - rho.get(j, k)).norm() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn minimal_setup_conditions_at_d6() {
    let setup = build_minimal_setup(&SetupConfig::with_default_alpha(6).unwrap()).unwrap();
    let c = check_minimal_setup_conditions(&setup, DEFAULT_TOL).unwrap();
    assert!(c.unbiased_all && c.info_complete);
    assert!(
        certifies_coherence(&setup, DEFAULT_TOL)
            .unwrap()
            .all_undetected_diagonal
    );
}

#[test]
fn replacing_a_basis_by_the_reference_breaks_unbiasedness() {
    let setup = build_minimal_setup(&SetupConfig::with_default_alpha(3).unwrap()).unwrap();
    let broken = setup
        .without_basis(1)
        .unwrap()
        .with_basis(OrthonormalBasis::standard(3))
        .unwrap();
    let c = check_minimal_setup_conditions(&broken, DEFAULT_TOL).unwrap();
    assert!(!c.unbiased_all);
    assert!(
        !certifies_coherence(&broken, DEFAULT_TOL)
            .unwrap()
            .all_undetected_diagonal
    );
}

#[test]
fn repeated_fourier_basis_is_not_informationally_complete() {
    for d in 2..=6 {
        let setup = MeasurementSetup::with_standard_reference(vec![fourier_basis(d); d]).unwrap();
        let c = check_minimal_setup_conditions(&setup, DEFAULT_TOL).unwrap();
        assert!(c.unbiased_all);
        assert!(!c.info_complete, "d={d}");
        let mut ops = setup.reference().projections();
        ops.extend(setup.measured_projections());
        assert_eq!(real_span_dimension(&ops, DEFAULT_TOL).unwrap(), 2 * d - 1);
        assert_eq!(
            c.both(),
            certifies_coherence(&setup, DEFAULT_TOL)
                .unwrap()
                .all_undetected_diagonal
        );
    }
}

#[test]
fn every_proper_subset_at_d4_fails() {
    let setup = build_minimal_setup(&SetupConfig::with_default_alpha(4).unwrap()).unwrap();
    for i in 0..4 {
        let report = certifies_coherence(&setup.without_basis(i).unwrap(), DEFAULT_TOL).unwrap();
        assert!(!report.all_undetected_diagonal, "dropping basis {i}");
        assert!(report.max_offdiag_leak > 0.1);
    }
}

#[test]
fn measured_bases_alone_span_all_but_the_diagonal() {
    for d in 2..=10 {
        let setup = build_minimal_setup(&SetupConfig::with_default_alpha(d).unwrap()).unwrap();
        let span = real_span_dimension(&setup.measured_projections(), DEFAULT_TOL).unwrap();
        assert_eq!(span, d * d - d + 1, "d={d}");
        for b in setup.measured() {
            assert!(check_mutual_unbiasedness(setup.reference(), b, 1e-10).unwrap());
        }
    }
}

#[test]
fn vandermonde_nodes_are_distinct() {
    for d in 2..=12 {
        let config = SetupConfig::with_default_alpha(d).unwrap();
        for z in 1..d {
            let sys = VandermondeSystem::for_shift(&config, z).unwrap();
            assert!(sys.min_node_distance() > 1e-8, "d={d} z={z}");
        }
    }
}

#[test]
fn nodes_match_basis_components_and_exponents() {
    for d in 2..=9 {
        let config = SetupConfig::with_default_alpha(d).unwrap();
        let setup = build_minimal_setup(&config).unwrap();
        let psi = setup.measured()[1].vector(0);
        for z in 1..d {
            let sys = VandermondeSystem::for_shift(&config, z).unwrap();
            for (h, node) in sys.nodes().iter().enumerate() {
                let ratio = psi[(h + z) % d] / psi[h];
                assert!((node - ratio).norm() < 1e-12, "d={d} z={z} h={h}");
                let e = exponent(
                    ZdElement::new(h as u64, d as u64).unwrap(),
                    ZdElement::new(z as u64, d as u64).unwrap(),
                )
                .unwrap();
                let direct = Complex64::from_polar(1.0, -PI * config.alpha() * e as f64).conj();
                assert!((node - direct).norm() < 1e-12, "d={d} z={z} h={h}");
            }
        }
    }
}

#[test]
fn short_tables_are_rejected() {
    let config = SetupConfig::with_default_alpha(4).unwrap();
    let table = ProbabilityTable::new(4, vec![vec![0.25; 4]; 3]).unwrap();
    assert!(matches!(
        reconstruct_offdiagonals(&table, &config),
        Err(CoherenceError::BasisCount {
            expected: 4,
            found: 3
        })
    ));
}
