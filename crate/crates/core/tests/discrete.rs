use hodgeheat::lab::{Lab, DISCRETE_TOL};
use hodgeheat::spectral::{self, evolve, harmonic_projector, heat_kernel_matrix, tail_integral_kernel};
use hodgeheat::{mesh, Cochain, Dec, MassScheme, SimplicialComplex, SpectralData};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> Vec<SimplicialComplex> {
    ["tetra", "ico2", "torus8"].iter().map(|n| mesh::builtin(n).unwrap()).collect()
}

fn rel(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>) -> f64 {
    (a - b).norm() / (a.norm() + f64::EPSILON)
}

#[test]
fn eigen_contracts() {
    for c in corpus() {
        for scheme in MassScheme::ALL {
            let dec = Dec::new(&c, scheme).unwrap();
            for k in 0..=2 {
                let s = SpectralData::from_dec(&dec, k).unwrap();
                assert!(s.orthonormality_error() <= 1e-10, "{} k={k}", c.name());
                assert!(s.residual(&dec.stiffness(k)) <= 1e-8);
                assert!(s.eigenvalues().iter().all(|&l| l >= -s.zero_tol()));
            }
        }
    }
}

#[test]
fn semigroup_energy_and_convergence() {
    let c = mesh::builtin("ico1").unwrap();
    let dec = Dec::new(&c, MassScheme::BarycentricLumped).unwrap();
    for k in 0..=2 {
        let s = SpectralData::from_dec(&dec, k).unwrap();
        let m = s.mass().clone();
        for (t1, t2) in [(0.1, 0.1), (0.1, 0.5), (0.5, 0.5)] {
            let a = heat_kernel_matrix(&s, t1).unwrap().operator(&m);
            let b = heat_kernel_matrix(&s, t2).unwrap().operator(&m);
            let ab = heat_kernel_matrix(&s, t1 + t2).unwrap().operator(&m);
            assert!(rel(&ab, &(&a * &b)) <= 1e-9);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Cochain::new(k, DVector::from_fn(s.len(), |_, _| rng.gen_range(-1.0..1.0)));
        let energy = |t: f64| {
            let u = evolve(&s, &f, t).unwrap();
            hodgeheat::inner_product(&u, &u, &dec.mass(k)).unwrap()
        };
        let samples: Vec<f64> = [0.0, 0.05, 0.1, 0.5, 1.0, 5.0].iter().map(|&t| energy(t)).collect();
        assert!(samples.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));

        // ‖K(t) - C‖ decays like e^{-λ⁺ t}
        let lam = s.nonzero_eigenvalues()[0];
        let c_k = harmonic_projector(&s).entries;
        let gap = |t: f64| (heat_kernel_matrix(&s, t).unwrap().entries - &c_k).norm();
        let ratio = gap(3.0) / gap(2.0);
        assert!((ratio.ln() + lam).abs() < 0.05 * lam, "k={k}: ratio {ratio}, λ⁺ {lam}");
    }
}

#[test]
fn tail_derivative_matches_kernel() {
    let c = mesh::builtin("tetra").unwrap();
    let dec = Dec::new(&c, MassScheme::BarycentricLumped).unwrap();
    let s = SpectralData::from_dec(&dec, 1).unwrap();
    let (t, h) = (0.3, 1e-5);
    let d = (tail_integral_kernel(&s, t + h).unwrap().entries - tail_integral_kernel(&s, t - h).unwrap().entries)
        / (2.0 * h);
    let k = heat_kernel_matrix(&s, t).unwrap().entries - harmonic_projector(&s).entries;
    assert!(rel(&k, &(-d)) < 1e-8);
    assert!(tail_integral_kernel(&s, 200.0).unwrap().entries.norm() < 1e-12);
    assert!(spectral::heat_kernel_matrix(&s, -1.0).is_err());
}

#[test]
fn corpus_supersymmetry_and_evolution() {
    for c in corpus() {
        for scheme in MassScheme::ALL {
            let lab = Lab::new(&c, scheme).unwrap();
            let r = lab.check_supersymmetry(DISCRETE_TOL).unwrap();
            assert_eq!(r.pass, Some(true), "{}", r.summary());
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for k in 0..=2 {
                let n = lab.spectrum(k).len();
                for _ in 0..10 {
                    let f = Cochain::new(k, DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)));
                    let r = lab.check_evolution_equivalence(k, &f, &[0.05, 0.5], DISCRETE_TOL).unwrap();
                    assert_eq!(r.pass, Some(true), "{}", r.summary());
                }
            }
        }
    }
}

#[test]
fn compact_large_time_limit() {
    let lab = Lab::new(&mesh::builtin("torus6").unwrap(), MassScheme::BarycentricLumped).unwrap();
    for k in 0..=2 {
        let r = lab.check_theorem_compact(k, &[50.0], DISCRETE_TOL).unwrap();
        assert_eq!(r.pass, Some(true));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // both sides decay like e^{-λt}; past t ~ 2 the relative residual is rounding-dominated
    #[test]
    fn lemma1_holds_at_any_time(t in 0.0f64..2.0, k in 0usize..2, lumped in any::<bool>()) {
        let scheme = if lumped { MassScheme::BarycentricLumped } else { MassScheme::Identity };
        let lab = Lab::new(&mesh::builtin("ico1").unwrap(), scheme).unwrap();
        let r = lab.check_lemma1(k, &[t], DISCRETE_TOL).unwrap();
        prop_assert!(r.max_rel() <= DISCRETE_TOL, "{}", r.summary());
    }

    #[test]
    fn evolve_is_linear(a in -3.0f64..3.0, t in 0.0f64..2.0, seed in 0u64..1000) {
        let c = mesh::builtin("tetra").unwrap();
        let dec = Dec::new(&c, MassScheme::BarycentricLumped).unwrap();
        let s = SpectralData::from_dec(&dec, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DVector::from_fn(s.len(), |_, _| rng.gen_range(-1.0..1.0));
        let g = DVector::from_fn(s.len(), |_, _| rng.gen_range(-1.0..1.0));
        let lhs = evolve(&s, &Cochain::new(1, &f * a + &g), t).unwrap().values;
        let rhs = evolve(&s, &Cochain::new(1, f), t).unwrap().values * a + evolve(&s, &Cochain::new(1, g), t).unwrap().values;
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn grid_torus_topology(n in 3usize..10) {
        let c = mesh::grid_torus(n).unwrap();
        prop_assert_eq!(c.counts(), vec![n * n, 3 * n * n, 2 * n * n]);
        prop_assert_eq!(c.euler_characteristic(), 0);
        prop_assert_eq!(c.betti_numbers().unwrap(), vec![1, 2, 1]);
    }

    #[test]
    fn off_round_trip(level in 0usize..3) {
        let c = mesh::icosphere(level).unwrap();
        let back = mesh::parse_off(&c.to_off()).unwrap();
        prop_assert_eq!(back.counts(), c.counts());
        prop_assert_eq!(back.euler_characteristic(), 2);
    }
}
