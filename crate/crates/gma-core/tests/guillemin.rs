mod common;

use common::{cube, interior_point, octahedron, random_prism, simplex, square};
use gma_core::guillemin::{
    check_all_vertices, check_vertex_compatibility, guillemin_density, guillemin_density_expanded, guillemin_potential,
    guillemin_value, required_vertex_value, smooth_extension, Density, ScaledHessian,
};
use gma_core::linalg::{self, Matrix};
use gma_core::polytope::{build_polytope, AffineFunctional, Polytope};
use gma_core::solver::sample_boundary;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Matrix {
    let n = x.len();
    let mut m = Matrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut y = x.to_vec();
                y[a] += sa * h;
                y[b] += sb * h;
                acc += w * f(&y);
            }
            m[(a, b)] = acc / (4.0 * h * h);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `F = Σ_{a<k} x_a ln x_a + ½xᵀQx + c·exp(w·x)`.
    #[test]
    fn scaled_determinant_identity(k in 1usize..=3, x in prop::collection::vec(0.2f64..1.0, 3),
                                   q in prop::collection::vec(-0.2f64..0.2, 3), c in 0.0f64..0.3,
                                   w in prop::collection::vec(-1.0f64..1.0, 3)) {
        let n = 3;
        let qm = Matrix::from_rows(&[vec![1.0, q[0], q[1]], vec![q[0], 1.0, q[2]], vec![q[1], q[2], 1.0]]);
        let g = |y: &[f64]| -> f64 {
            let quad: f64 = (0..n).map(|a| (0..n).map(|b| 0.5 * y[a] * qm[(a, b)] * y[b]).sum::<f64>()).sum();
            quad + c * (w[0] * y[0] + w[1] * y[1] + w[2] * y[2]).exp()
        };
        let f = |y: &[f64]| g(y) + (0..k).map(|a| y[a] * y[a].ln()).sum::<f64>();
        let e = c * (w[0] * x[0] + w[1] * x[1] + w[2] * x[2]).exp();
        let mut d2g = qm.clone();
        d2g.add_outer(e, &w, &w);
        let m = ScaledHessian::from_split(k, &x, &d2g).unwrap();
        let d2f = fd_hessian(&f, &x, 1e-4);
        let rhs = x[..k].iter().product::<f64>() * linalg::det(&d2f);
        prop_assert!((m.det() - rhs).abs() <= 1e-6 * rhs.abs().max(1e-3), "{} vs {}", m.det(), rhs);
    }

    #[test]
    fn extension_reproduces_traces(k in 2usize..=3, coef in prop::collection::vec(-1.0f64..1.0, 6), seed in any::<u64>()) {
        let v = |y: &[f64]| -> f64 {
            coef[0] * (y[0] + 0.3 * y[1]).sin() + coef[1] * y[0] * y[1] * y[2] + coef[2] * (y[1] - y[2]).exp()
                + coef[3] * y[0] * y[0] * y[2] + coef[4] * y[3] + coef[5] * (y[2] * y[3]).cos()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let mut x: Vec<f64> = (0..4).map(|a| if a < k { rng.gen_range(0.0..3.0) } else { rng.gen_range(-3.0..3.0) }).collect();
            let mask: u32 = rng.gen_range(1..(1 << k));
            for a in 0..k {
                if mask & (1 << a) != 0 {
                    x[a] = 0.0;
                }
            }
            let f = smooth_extension(k, &v, &x).unwrap();
            prop_assert!((f - v(&x)).abs() <= 4.0 * f64::EPSILON * (1.0 + v(&x).abs() + coef.iter().map(|c| c.abs()).sum::<f64>() * 30.0));
        }
    }
}

#[test]
fn potential_examples() {
    let interval = build_polytope(
        vec![AffineFunctional::new(vec![1.0], 0.0), AffineFunctional::new(vec![-1.0], -1.0)],
        None,
    )
    .unwrap();
    let e = guillemin_potential(&interval, &[0.5]).unwrap();
    assert!((e.value + 2f64.ln()).abs() < 1e-15);
    assert!((e.hessian[(0, 0)] - 4.0).abs() < 1e-14);
    let s = simplex(2);
    let e = guillemin_potential(&s, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
    assert!((e.value + 3f64.ln()).abs() < 1e-15);
    let expected = Matrix::from_rows(&[vec![6.0, 3.0], vec![3.0, 6.0]]);
    assert!(e.hessian.add(&expected.scale(-1.0)).max_abs() < 1e-13);
    assert_eq!(guillemin_value(s.facets(), &[0.0, 0.0]), 0.0);
    let at_vertex = guillemin_potential(&s, &[0.0, 0.0]).unwrap();
    assert_eq!(at_vertex.value, 0.0);
    assert!(!at_vertex.hessian[(0, 0)].is_finite());
    assert!(guillemin_potential(&s, &[-0.1, 0.2]).is_err());
}

#[test]
fn density_is_one_on_simplex_and_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in [simplex(2), square()] {
        for _ in 0..20 {
            let x = interior_point(&p, &mut rng, 1e-3);
            assert!((guillemin_density(&p, &x).unwrap() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn octahedron_density_decays_towards_vertex() {
    let o = octahedron();
    let vals: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|e| guillemin_density_expanded(o.facets(), &[0.0, 0.0, 1.0 - e])).collect();
    assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    // 512 ε (2 − ε) with integer normals
    assert!((vals[2] - 512.0 * 1e-3 * (2.0 - 1e-3)).abs() < 1e-9);
}

fn oscillation(p: &Polytope, x: &[f64], r: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut found = 0;
    while found < 60 {
        let y: Vec<f64> = x.iter().map(|v| v + rng.gen_range(-r..r)).collect();
        if !p.contains(&y, 0.0) {
            continue;
        }
        let h = guillemin_density(p, &y).unwrap();
        lo = lo.min(h);
        hi = hi.max(h);
        found += 1;
    }
    hi - lo
}

#[test]
fn density_is_continuous_up_to_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let prism = random_prism(&mut rng);
    for p in [simplex(3), cube(3, 1.0), prism, common::pentagon()] {
        let pts = sample_boundary(&p, 6, &mut rng);
        for x in pts.iter().take(20) {
            let o: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&r| oscillation(&p, x, r, &mut rng)).collect();
            // constant h_G leaves only roundoff, which grows near ∂P
            assert!(o[3] <= 0.2 * o[0] + 1e-10, "{o:?}");
        }
    }
    let p = common::pentagon();
    for x in sample_boundary(&p, 6, &mut rng).iter().take(20) {
        let o: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&r| oscillation(&p, x, r, &mut rng)).collect();
        assert!(o[0] > 1e-3 && o.windows(2).all(|w| w[1] < w[0]), "{o:?}");
    }
}

#[test]
fn guillemin_density_is_compatible_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in [simplex(2), simplex(3), square(), common::pentagon(), cube(3, 1.0), cube(3, 2.5), random_prism(&mut rng), random_prism(&mut rng)] {
        for r in check_all_vertices(&p, &Density::guillemin(&p)).unwrap() {
            assert!(r.residual.abs() <= 1e-10, "{r:?}");
        }
    }
}

#[test]
fn compatibility_examples() {
    let s = simplex(2);
    let h = Density::constant(1.0);
    for k in 0..3 {
        assert_eq!(check_vertex_compatibility(&s, &h, k).unwrap().residual, 0.0);
    }
    let q = square();
    let r = check_vertex_compatibility(&q, &Density::constant(2.0), 0).unwrap();
    assert_eq!(r.residual, 1.0);
    assert!(!r.compatible);
    assert!(check_vertex_compatibility(&octahedron(), &Density::constant(1.0), 0).is_err());
}

#[test]
fn compatibility_under_functional_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in [simplex(2), square(), cube(3, 1.0), random_prism(&mut rng)] {
        let h = Density::guillemin(&p);
        for i in 0..p.facets().len() {
            let lambda = rng.gen_range(0.3..3.0);
            let mut f = p.facets().to_vec();
            f[i] = f[i].scaled(lambda);
            let q = build_polytope(f, None).unwrap();
            for (k, v) in p.vertices().iter().enumerate() {
                let kq = q.vertex_index(&v.point).unwrap();
                // an active functional enters the determinant squared, an inactive one the product
                let factor = if v.active.contains(&i) { lambda * lambda } else { lambda };
                let req = required_vertex_value(&p, k).unwrap();
                let rq = check_vertex_compatibility(&q, &h, kq).unwrap();
                assert!((rq.required - factor * req).abs() <= 1e-12 * req.abs().max(1.0));
                assert!((rq.residual - req * (1.0 - factor)).abs() <= 1e-12 * req.abs().max(1.0));
            }
        }
    }
}

#[test]
fn extension_examples() {
    let v = |x: &[f64]| x[0] + x[1] + x[0] * x[1];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let x = [rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)];
        assert!((smooth_extension(2, &v, &x).unwrap() - x[0] - x[1]).abs() < 1e-14);
        let w = |y: &[f64]| (y[2]).sin() + y[2] * y[2];
        let y = [x[0], x[1], rng.gen_range(-1.0..1.0)];
        assert!((smooth_extension(2, &w, &y).unwrap() - w(&y)).abs() < 1e-15);
    }
    let missing = |x: &[f64]| if x[0] == 0.0 { f64::NAN } else { 1.0 };
    assert!(smooth_extension(1, &missing, &[0.5, 0.2]).is_err());
}

#[test]
fn scaled_hessian_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..2.0)).collect();
        // Σ_{a<2} x_a ln x_a + ½|x''|²
        let d2g = Matrix::diagonal(&[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(ScaledHessian::from_split(2, &x, &d2g).unwrap().matrix, Matrix::identity(4));
    }
    let m = ScaledHessian::from_hessian(2, &[1.0, 1.0, 0.3], &Matrix::identity(3)).unwrap();
    assert_eq!(m.matrix, Matrix::identity(3));
    // x₁ ln x₁ + x₁x₂ at (0.25, 0.3)
    let x = [0.25, 0.3];
    let f = |y: &[f64]| y[0] * y[0].ln() + y[0] * y[1];
    let m = ScaledHessian::from_hessian(1, &x, &fd_hessian(&f, &x, 1e-5)).unwrap().matrix;
    assert!((m[(0, 0)] - 1.0).abs() < 1e-5);
    assert!((m[(0, 1)] - 0.5).abs() < 1e-5);
    assert!(m[(1, 1)].abs() < 1e-5);
    let d2g = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let s = ScaledHessian::from_split(1, &x, &d2g).unwrap().matrix;
    assert_eq!(s[(0, 0)], 1.0);
    assert_eq!(s[(0, 1)], 0.5);
    assert_eq!(s[(1, 1)], 0.0);
}

#[test]
fn density_derivatives() {
    let h = Density::from_fn(gma_core::guillemin::Provenance::Analytic, |x| (x[0] + 2.0 * x[1]).exp());
    let x = [0.3f64, -0.2];
    let e = (x[0] + 2.0 * x[1]).exp();
    assert!((h.partial(&x, &[0]) - e).abs() < 1e-10);
    assert!((h.partial(&x, &[1, 1]) - 4.0 * e).abs() < 1e-7);
    assert!((h.partial(&x, &[0, 1, 1]) - 4.0 * e).abs() < 1e-5);
    assert!((h.partial(&x, &[1, 1, 1, 1]) - 16.0 * e).abs() < 1e-3);
}
