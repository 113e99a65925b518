#![allow(dead_code)]

use gma_core::boundary::{build_boundary_data, BoundaryData, GridFaceSolver, GuilleminProblem, Sequential};
use gma_core::linalg::Matrix;
use gma_core::polytope::{build_polytope, AffineFunctional, AffineMap, Polytope};
use gma_core::solver::SolveOptions;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = s;
    e
}

pub fn simplex(n: usize) -> Polytope {
    let mut f: Vec<AffineFunctional> = (0..n).map(|i| AffineFunctional::new(unit(n, i, 1.0), 0.0)).collect();
    f.push(AffineFunctional::new(vec![-1.0; n], -1.0));
    build_polytope(f, None).unwrap()
}

/// `[0, s]^n`.
pub fn cube(n: usize, s: f64) -> Polytope {
    let mut f = Vec::new();
    for i in 0..n {
        f.push(AffineFunctional::new(unit(n, i, 1.0), 0.0));
        f.push(AffineFunctional::new(unit(n, i, -1.0), -s));
    }
    build_polytope(f, None).unwrap()
}

pub fn square() -> Polytope {
    cube(2, 1.0)
}

pub fn octahedron() -> Polytope {
    let mut f = Vec::new();
    for s in 0..8 {
        let n: Vec<f64> = (0..3).map(|a| if s & (1 << a) != 0 { -1.0 } else { 1.0 }).collect();
        f.push(AffineFunctional::new(n, -1.0));
    }
    build_polytope(f, None).unwrap()
}

/// Triangle × interval with randomly scaled sides.
pub fn random_prism(rng: &mut ChaCha8Rng) -> Polytope {
    let a = rng.gen_range(0.5..2.0);
    let b = rng.gen_range(0.5..2.0);
    let f = vec![
        AffineFunctional::new(vec![1.0, 0.0, 0.0], 0.0),
        AffineFunctional::new(vec![0.0, 1.0, 0.0], 0.0),
        AffineFunctional::new(vec![-1.0, -1.0, 0.0], -a),
        AffineFunctional::new(vec![0.0, 0.0, 1.0], 0.0),
        AffineFunctional::new(vec![0.0, 0.0, -1.0], -b),
    ];
    build_polytope(f, None).unwrap()
}

pub fn random_affine(rng: &mut ChaCha8Rng, n: usize) -> AffineMap {
    loop {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4)).collect()).collect();
        let m = AffineMap::new(Matrix::from_rows(&rows), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        if m.det().abs() > 0.2 {
            return m;
        }
    }
}

/// Uniform sample of the interior with every `lᵢ ≥ margin`.
pub fn interior_point(p: &Polytope, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    let n = p.dim();
    let lo: Vec<f64> = (0..n).map(|a| p.vertices().iter().map(|v| v.point[a]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..n).map(|a| p.vertices().iter().map(|v| v.point[a]).fold(f64::NEG_INFINITY, f64::max)).collect();
    loop {
        let x: Vec<f64> = (0..n).map(|a| rng.gen_range(lo[a]..hi[a])).collect();
        if p.facets().iter().all(|f| f.eval(&x) >= margin) {
            return x;
        }
    }
}

pub fn face_solver(resolution: usize, p: &Polytope) -> GridFaceSolver {
    GridFaceSolver { resolution, reference_diameter: p.diameter(), options: SolveOptions::default() }
}

pub fn boundary(prob: &GuilleminProblem, resolution: usize) -> BoundaryData {
    build_boundary_data(prob, &face_solver(resolution, &prob.polytope), &Sequential, 1e-10).unwrap()
}

/// `[0,2]²` with the corner `x₁ + x₂ > 3` cut off; `h_G` is not constant.
pub fn pentagon() -> Polytope {
    let f = vec![
        AffineFunctional::new(vec![1.0, 0.0], 0.0),
        AffineFunctional::new(vec![0.0, 1.0], 0.0),
        AffineFunctional::new(vec![-1.0, 0.0], -2.0),
        AffineFunctional::new(vec![0.0, -1.0], -2.0),
        AffineFunctional::new(vec![-1.0, -1.0], -3.0),
    ];
    build_polytope(f, None).unwrap()
}
