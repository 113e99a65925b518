use gma_core::boundary::{build_boundary_data, newton_solve, GridFaceSolver, GuilleminProblem, Sequential};
use gma_core::grid::GridChart;
use gma_core::guillemin::{Density, PotentialEval, Provenance};
use gma_core::legendre::{
    legendre_forward, model_solve_z, LegendreError, PartialLegendrePair, TransversalSample, ZModelProblem, ZOptions,
};
use gma_core::linalg::Matrix;
use gma_core::polytope::{build_polytope, AffineFunctional};
use gma_core::solver::SolveOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn order(e: &[f64]) -> f64 {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min)
}

fn model_potential(x: &[f64]) -> PotentialEval {
    PotentialEval {
        value: x[0] * x[0].ln() + 0.5 * x[1] * x[1],
        gradient: vec![x[0].ln() + 1.0, x[1]],
        hessian: Matrix::from_rows(&[vec![1.0 / x[0], 0.0], vec![0.0, 1.0]]),
    }
}

#[test]
fn model_transform_closed_form() {
    let pair = PartialLegendrePair::new(&model_potential, 0.5);
    for x in [[0.3, -0.4], [1.2, 0.7], [0.01, 0.0]] {
        let p = pair.forward(&x).unwrap();
        assert_eq!(p.y, vec![x[0], x[1]]);
        let expected = 0.5 * x[1] * x[1] - x[0] * x[0].ln();
        assert!((p.value - expected).abs() < 1e-15);
    }
}

#[test]
fn round_trip_random_points() {
    let pair = PartialLegendrePair::new(&model_potential, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let x = [rng.gen_range(0.01..1.0), rng.gen_range(-1.0..1.0)];
        let err = pair.involution_error(&x, &[0.3]).unwrap();
        assert!(err <= 1e-8, "{x:?}: {err:e}");
    }
}

#[test]
fn round_trip_skewed_potential() {
    let u = |x: &[f64]| PotentialEval {
        value: x[0] * x[0].ln() + 0.5 * x[1] * x[1] + 0.1 * x[1].exp(),
        gradient: vec![x[0].ln() + 1.0, x[1] + 0.1 * x[1].exp()],
        hessian: Matrix::from_rows(&[vec![1.0 / x[0], 0.0], vec![0.0, 1.0 + 0.1 * x[1].exp()]]),
    };
    let pair = PartialLegendrePair::new(&u, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let x = [rng.gen_range(0.01..1.0), rng.gen_range(-1.0..1.0)];
        assert!(pair.involution_error(&x, &[0.0]).unwrap() <= 1e-8);
    }
}

#[test]
fn degenerate_transversal_hessian_is_rejected() {
    let u = |x: &[f64]| PotentialEval {
        value: x[0] * x[0].ln() + 0.01 * x[1] * x[1],
        gradient: vec![x[0].ln() + 1.0, 0.02 * x[1]],
        hessian: Matrix::from_rows(&[vec![1.0 / x[0], 0.0], vec![0.0, 0.02]]),
    };
    let pair = PartialLegendrePair::new(&u, 0.5);
    assert!(matches!(pair.forward(&[0.5, 0.0]), Err(LegendreError::DegenerateTransversalHessian { .. })));
}

fn box_problem<'a>(h: &'a Density, trace: &'a (dyn Fn(&[f64]) -> f64 + Sync)) -> ZModelProblem<'a> {
    ZModelProblem { density: h, trace, initial: None, x1_max: 1.0, lo: vec![-1.0], hi: vec![1.0] }
}

#[test]
fn z_model_liouville_exact() {
    let h = Density::constant(1.0);
    let trace = |x: &[f64]| 0.5 * x[1] * x[1];
    let (sol, rep) = model_solve_z(&box_problem(&h, &trace), &ZOptions { subdivisions: 16, ..ZOptions::default() }).unwrap();
    let err = (0..sol.chart.len()).map(|k| (sol.values[k] - 0.5 * sol.chart.coord(k)[1].powi(2)).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-10, "{err:e}");
    assert!(sol.axis_slope() <= 1e-10);
    assert!(rep.min_first_entry.iter().all(|&m| m > 0.0));
}

#[test]
fn z_model_affine_trace() {
    let h = Density::constant(1.0);
    let trace = |x: &[f64]| 0.5 * x[1] * x[1] + 0.1 * x[1];
    let (sol, _) = model_solve_z(&box_problem(&h, &trace), &ZOptions { subdivisions: 16, ..ZOptions::default() }).unwrap();
    let err = (0..sol.chart.len())
        .map(|k| {
            let z = sol.chart.coord(k);
            (sol.values[k] - 0.5 * z[1] * z[1] - 0.1 * z[1]).abs()
        })
        .fold(0.0, f64::max);
    assert!(err <= 1e-10, "{err:e}");
}

/// `u = x₁ ln x₁ + ½x₂² + x₁x₂` has `h = 1 − x₁`; its regular part is cubic in `z`, so
/// the discrete solution is exact and the transformed residual is at roundoff level.
#[test]
fn shear_example_transformed_residual() {
    let v = |x: &[f64]| 0.5 * x[1] * x[1] + x[0] * x[1];
    let h = Density::from_fn(Provenance::Analytic, |x| 1.0 - x[0]);
    let prob = ZModelProblem { density: &h, trace: &v, initial: None, x1_max: 0.5, lo: vec![-1.0], hi: vec![1.0] };
    for n in [16, 32, 64] {
        let (sol, _) = model_solve_z(&prob, &ZOptions { subdivisions: n, ..ZOptions::default() }).unwrap();
        let g = legendre_forward(&sol.samples(), 0.5, &[0.0, -0.4], &[0.4, 0.4], 8).unwrap();
        assert!(sup(&g.residual(&h)) <= 1e-6);
    }
}

fn v_exact(x: &[f64]) -> f64 {
    0.5 * x[1] * x[1] + 0.2 * x[0] * x[1] + 0.1 * (0.5 * x[0] + 0.5 * x[1]).exp()
}

fn h_exact(x: &[f64]) -> f64 {
    let e = 0.1 * (0.5 * x[0] + 0.5 * x[1]).exp();
    let (v11, v12, v22) = (0.25 * e, 0.2 + 0.25 * e, 1.0 + 0.25 * e);
    (1.0 + x[0] * v11) * v22 - x[0] * v12 * v12
}

#[test]
fn manufactured_z_solution_and_transform_converge() {
    let h = Density::from_fn(Provenance::Analytic, h_exact);
    let init = |x: &[f64]| v_exact(x) + 0.05 * (0.64 - x[0]) * (1.0 - x[1] * x[1]);
    let prob = ZModelProblem { density: &h, trace: &v_exact, initial: Some(&init), x1_max: 0.64, lo: vec![-1.0], hi: vec![1.0] };
    let mut errs = Vec::new();
    let mut residuals = Vec::new();
    let mut slopes = Vec::new();
    for n in [16, 32, 64] {
        let (sol, rep) = model_solve_z(&prob, &ZOptions { subdivisions: n, ..ZOptions::default() }).unwrap();
        assert!(rep.min_first_entry.iter().all(|&m| m > 0.0));
        errs.push(
            (0..sol.chart.len())
                .map(|k| {
                    let z = sol.chart.coord(k);
                    (sol.values[k] - v_exact(&[z[0] * z[0] / 4.0, z[1]])).abs()
                })
                .fold(0.0, f64::max),
        );
        slopes.push(sol.axis_slope());
        let g = legendre_forward(&sol.samples(), 0.5, &[0.0, -0.6], &[0.5, 0.6], 8).unwrap();
        residuals.push(sup(&g.residual(&h)));
    }
    assert!(order(&errs) >= 1.5, "{errs:?}");
    assert!(order(&residuals) >= 1.5, "{residuals:?}");
    assert!(order(&slopes) >= 1.5, "{slopes:?}");
}

#[test]
fn exact_samples_give_small_residual() {
    let h = Density::from_fn(Provenance::Analytic, h_exact);
    let n = 32;
    let mut s = Vec::new();
    for i in 0..=n {
        for j in 1..n {
            let x = vec![(i as f64 * 1.6 / n as f64).powi(2) / 4.0, -1.0 + j as f64 * 2.0 / n as f64];
            let e = 0.1 * (0.5 * x[0] + 0.5 * x[1]).exp();
            s.push(TransversalSample { v: v_exact(&x), grad: vec![x[1] + 0.2 * x[0] + 0.5 * e], x, hess: None });
        }
    }
    let g = legendre_forward(&s, 0.5, &[0.0, -0.6], &[0.5, 0.6], 8).unwrap();
    assert!(sup(&g.residual(&h)) <= 1e-4);
}

/// On `[0,3]²`, where `h_G ≡ 9`, with `h = 9(1 + c·x₁x₂(3−x₁)(3−x₂))` the global solver and the model solver
/// near `{x₁ = 0}` compute the same regular part `u − x₁ ln x₁` on a strip.
#[test]
fn cross_validation_with_global_solver() {
    let c = 0.05;
    let p = build_polytope(
        vec![
            AffineFunctional::new(vec![1.0, 0.0], 0.0),
            AffineFunctional::new(vec![0.0, 1.0], 0.0),
            AffineFunctional::new(vec![-1.0, 0.0], -3.0),
            AffineFunctional::new(vec![0.0, -1.0], -3.0),
        ],
        None,
    )
    .unwrap();
    let hfull = move |x: &[f64]| 9.0 + 9.0 * c * x[0] * x[1] * (3.0 - x[0]) * (3.0 - x[1]);
    let prob = GuilleminProblem::new(p.clone(), Density::from_fn(Provenance::Analytic, hfull), vec![0.0; 4]).unwrap();
    let faces = GridFaceSolver { resolution: 32, reference_diameter: 3.0, options: SolveOptions::default() };
    let data = build_boundary_data(&prob, &faces, &Sequential, 1e-10).unwrap();
    let hmodel = Density::from_fn(Provenance::Analytic, move |x| hfull(x) / (x[1] * (3.0 - x[0]) * (3.0 - x[1])));

    let mut global = Vec::new();
    let mut model = Vec::new();
    for n in [24, 48] {
        let chart = GridChart::for_polytope(&p, n).unwrap();
        let (sol, rep) = newton_solve(&prob, &data, &chart, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        let w = move |x: &[f64]| sol.interpolate_u(x) - if x[0] > 0.0 { x[0] * x[0].ln() } else { 0.0 };
        let zp = ZModelProblem { density: &hmodel, trace: &w, initial: None, x1_max: 0.75, lo: vec![0.75], hi: vec![2.25] };
        let (zs, zr) = model_solve_z(&zp, &ZOptions { subdivisions: n / 2, ..ZOptions::default() }).unwrap();
        assert!(zr.min_first_entry.iter().all(|&m| m > 0.0));
        let probes: Vec<Vec<f64>> =
            (1..6).flat_map(|i| (1..6).map(move |j| vec![0.75 * i as f64 / 6.0, 0.75 + 1.5 * j as f64 / 6.0])).collect();
        global.push(probes.iter().map(|x| w(x)).collect::<Vec<_>>());
        model.push(probes.iter().map(|x| zs.v_at(x)).collect::<Vec<_>>());
    }
    // Richardson estimates for second-order schemes
    let rich = |a: &[Vec<f64>]| a[0].iter().zip(&a[1]).map(|(p, q)| (p - q).abs() / 3.0).fold(0.0, f64::max);
    let tol = rich(&global).max(rich(&model));
    let gap = global[1].iter().zip(&model[1]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(gap <= 10.0 * tol, "gap {gap:e}, tol {tol:e}");
}
