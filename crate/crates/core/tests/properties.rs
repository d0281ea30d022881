//! Randomized structural properties of the generators, propagators and
//! thermodynamic diagnostics.

use proptest::prelude::*;
use unified_qme::bath::{drude_lorentz_exact_gamma, drude_lorentz_high_temp, BathDescriptor, Coupling};
use unified_qme::dynamics::{positivity_monitor, propagate, trace_distance_series, Integrator, TimeGrid};
use unified_qme::generators::{build, gkls_certificate, GeneratorKind};
use unified_qme::heom::{build_hierarchy, propagate_heom};
use unified_qme::linalg::{c64, commutator, max_abs, trace, trace_distance, CMatrix, DensityMatrix, HermitianOperator};
use unified_qme::spectral::{decompose, reference_split_by_tolerance, ReferenceSplit};
use unified_qme::thermo::{covariance_residual, entropy_production, gibbs_state, stationarity_residual};
use unified_qme::units::DEFAULT_BOLTZMANN;

fn hermitian(n: usize, e: &[f64], scale: f64) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |i, j| c64(e[2 * (n * i + j)], e[2 * (n * i + j) + 1]));
    (&m + m.adjoint()).scale(0.5 * scale)
}

fn density(n: usize, e: &[f64]) -> DensityMatrix {
    let m = CMatrix::from_fn(n, n, |i, j| c64(e[2 * (n * i + j)], e[2 * (n * i + j) + 1]));
    let p = &m * m.adjoint();
    let t = trace(&p).re;
    DensityMatrix::new(p.unscale(t)).unwrap()
}

struct Model {
    split: ReferenceSplit,
    couplings: Vec<Coupling>,
    baths: Vec<BathDescriptor>,
}

fn model(h: &[f64], a: &[f64], b: &[f64], temps: (f64, f64), tol: f64, exact: bool) -> Model {
    let hs = HermitianOperator::new(hermitian(4, h, 30.0)).unwrap();
    let d = decompose(&hs, 0.0).unwrap();
    let split = reference_split_by_tolerance(&d, tol).unwrap();
    let make = if exact { drude_lorentz_exact_gamma } else { drude_lorentz_high_temp };
    let baths = vec![
        make("a", 1.0, 53.08, temps.0, DEFAULT_BOLTZMANN).unwrap(),
        make("b", 0.5, 35.0, temps.1, DEFAULT_BOLTZMANN).unwrap(),
    ];
    let couplings = vec![Coupling::new(hermitian(4, a, 1.0), 0), Coupling::new(hermitian(4, b, 1.0), 1)];
    Model { split, couplings, baths }
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn trace_distance_triangle(x in entries(32), y in entries(32), z in entries(32)) {
        let (a, b, c) = (density(4, &x), density(4, &y), density(4, &z));
        let ab = trace_distance(&a, &b).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn single_frequency_rates_nonnegative(omega in -500.0f64..500.0, t in 50.0f64..600.0, cutoff in 5.0f64..200.0) {
        let ht = drude_lorentz_high_temp("h", 1.0, cutoff, t, DEFAULT_BOLTZMANN).unwrap();
        let ex = drude_lorentz_exact_gamma("e", 1.0, cutoff, t, DEFAULT_BOLTZMANN).unwrap();
        // The high-temperature form is a thermal rate only for ω ≥ −2/β.
        if omega >= -2.0 / ht.beta {
            prop_assert!(ht.rate(omega) >= 0.0);
        }
        prop_assert!(ex.rate(omega) >= 0.0);
    }

    #[test]
    fn generators_preserve_trace_and_hermiticity(
        h in entries(32), a in entries(32), b in entries(32), r in entries(32), tol in 0.0f64..40.0,
    ) {
        let m = model(&h, &a, &b, (300.0, 380.0), tol, false);
        let rho = density(4, &r).into_matrix();
        let x = hermitian(4, &r, 1.0) + CMatrix::from_fn(4, 4, |i, j| c64(0.0, (i as f64) - (j as f64) * 0.5));
        for kind in GeneratorKind::ALL {
            let g = build(kind, &m.split, &m.couplings, &m.baths).unwrap();
            let out = g.apply(&rho);
            prop_assert!(trace(&out).norm() <= 1e-10 * (1.0 + max_abs(&out)), "{kind}");
            let lhs = g.apply(&x.adjoint());
            let rhs = g.apply(&x).adjoint();
            prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12 * (1.0 + max_abs(&out)) * 100.0, "{kind}");
        }
    }

    #[test]
    fn gkls_kinds_have_positive_certificates(
        h in entries(32), a in entries(32), b in entries(32), tol in 0.0f64..40.0, exact in any::<bool>(),
    ) {
        let m = model(&h, &a, &b, (300.0, 420.0), tol, exact);
        for kind in GeneratorKind::ALL.into_iter().filter(|k| k.is_gkls()) {
            let g = build(kind, &m.split, &m.couplings, &m.baths).unwrap();
            prop_assert!(gkls_certificate(&g).is_positive(1e-12), "{kind}: {}", gkls_certificate(&g).min_eigenvalue());
        }
    }

    #[test]
    fn unified_is_covariant_under_reference(
        h in entries(32), a in entries(32), b in entries(32), r in entries(32), tol in 0.0f64..40.0, t in 0.0f64..2000.0,
    ) {
        let m = model(&h, &a, &b, (300.0, 350.0), tol, false);
        let rho = density(4, &r).into_matrix();
        for kind in [GeneratorKind::Unified, GeneratorKind::UnifiedSimplified] {
            let g = build(kind, &m.split, &m.couplings, &m.baths).unwrap();
            prop_assert!(covariance_residual(&g, m.split.h0.matrix(), &[(t, rho.clone())]) <= 1e-10);
            let h0 = m.split.h0.matrix();
            prop_assert!(max_abs(&commutator(h0, &g.total_lamb_shift())) <= 1e-10);
            prop_assert!(max_abs(&commutator(h0, g.hamiltonian.matrix())) <= 1e-10);
        }
    }

    #[test]
    fn unified_equals_davies_on_trivial_split(h in entries(32), a in entries(32), b in entries(32)) {
        let m = model(&h, &a, &b, (300.0, 350.0), 0.0, false);
        prop_assume!(m.split.is_trivial());
        let u = build(GeneratorKind::Unified, &m.split, &m.couplings, &m.baths).unwrap();
        let d = build(GeneratorKind::Davies, &m.split, &m.couplings, &m.baths).unwrap();
        prop_assert!(max_abs(&(u.total.matrix() - d.total.matrix())) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gkls_trajectories_stay_positive_and_normalized(
        h in entries(32), a in entries(32), b in entries(32), r in entries(32), tol in 0.0f64..40.0,
    ) {
        let m = model(&h, &a, &b, (300.0, 400.0), tol, false);
        let rho0 = density(4, &r);
        let grid = TimeGrid::new(0.0, 5.0, 200).unwrap();
        for kind in GeneratorKind::ALL.into_iter().filter(|k| k.is_gkls()) {
            let g = build(kind, &m.split, &m.couplings, &m.baths).unwrap();
            let traj = propagate(&g, &rho0, grid, Integrator::ExpmStep).unwrap();
            prop_assert!(traj.max_trace_drift() <= 1e-8);
            prop_assert!(positivity_monitor(&traj).iter().all(|&x| x >= -1e-8), "{kind}");
        }
    }

    #[test]
    fn halving_dt_is_exact_for_expm(h in entries(32), a in entries(32), b in entries(32), r in entries(32)) {
        let m = model(&h, &a, &b, (300.0, 400.0), 10.0, false);
        let rho0 = density(4, &r);
        let g = build(GeneratorKind::Redfield, &m.split, &m.couplings, &m.baths).unwrap();
        let coarse = propagate(&g, &rho0, TimeGrid::new(0.0, 4.0, 50).unwrap(), Integrator::ExpmStep).unwrap();
        let fine = propagate(&g, &rho0, TimeGrid::new(0.0, 2.0, 100).unwrap(), Integrator::ExpmStep).unwrap();
        for (k, s) in coarse.states.iter().enumerate() {
            prop_assert!(max_abs(&(s.matrix() - fine.states[2 * k].matrix())) <= 1e-10);
        }
    }

    #[test]
    fn exact_kms_unified_has_nonnegative_entropy_production(
        h in entries(32), a in entries(32), b in entries(32), r in entries(32), tol in 0.0f64..40.0,
        t1 in 250.0f64..450.0, t2 in 250.0f64..450.0,
    ) {
        let m = model(&h, &a, &b, (t1, t2), tol, true);
        let g = build(GeneratorKind::Unified, &m.split, &m.couplings, &m.baths).unwrap();
        let traj = propagate(&g, &density(4, &r), TimeGrid::new(0.0, 10.0, 100).unwrap(), Integrator::ExpmStep).unwrap();
        let ep = entropy_production(&traj, &g);
        prop_assert!(ep.min_sigma() >= -1e-8, "{}", ep.min_sigma());
    }

    #[test]
    fn exact_kms_unified_gibbs_state_is_stationary(
        h in entries(32), a in entries(32), b in entries(32), tol in 0.0f64..40.0, t in 250.0f64..450.0,
    ) {
        let m = model(&h, &a, &b, (t, t), tol, true);
        let g = build(GeneratorKind::Unified, &m.split, &m.couplings, &m.baths).unwrap();
        let rho = gibbs_state(&m.split.h0, m.baths[0].beta).unwrap();
        prop_assert!(stationarity_residual(&g, &rho) <= 1e-10);
    }
}

fn heom_deviation_from_unitary(eta: f64, grid: TimeGrid) -> f64 {
    let hs = HermitianOperator::new(hermitian(2, &[0.3, 0.0, 0.8, 0.1, 0.8, -0.1, -0.4, 0.0], 40.0)).unwrap();
    let bath = drude_lorentz_high_temp("b", eta, 53.08, 300.0, DEFAULT_BOLTZMANN).unwrap();
    let coupling = Coupling::new(hermitian(2, &[1.0, 0.0, 0.5, 0.0, 0.5, 0.0, -1.0, 0.0], 1.0), 0);
    let rho0 = density(2, &[1.0, 0.2, 0.3, -0.1, 0.0, 0.4, 0.5, 0.0]);
    let heom = propagate_heom(&build_hierarchy(&hs, &[coupling], &[bath], 3).unwrap(), &rho0, grid).unwrap();
    let u = unified_qme::generators::hamiltonian_superoperator(hs.matrix());
    let free =
        unified_qme::dynamics::propagate_superoperator(&u, &rho0, grid, Integrator::ExpmStep, "unitary").unwrap();
    trace_distance_series(&heom, &free).unwrap().into_iter().fold(0.0, f64::max)
}

#[test]
fn weak_coupling_heom_approaches_unitary_dynamics() {
    let grid = TimeGrid::new(0.0, 0.5, 40).unwrap();
    let small = heom_deviation_from_unitary(1e-6, grid);
    let smaller = heom_deviation_from_unitary(1e-7, grid);
    assert!(small <= 1e-8, "{small}");
    assert!(smaller <= 0.2 * small, "{smaller} vs {small}");
}
