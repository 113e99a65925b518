//! Damped Newton iteration for the regular part `v = u − Σ lᵢ ln lᵢ`, together with
//! barrier bounds and convexity diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridChart, GridError, NodeClass};
use crate::guillemin::{guillemin_value, Density};
use crate::linalg::{self, BandMatrix, Matrix};
use crate::math::{dot, ln, norm, pow, sqrt};
use crate::polytope::{AffineFunctional, Polytope};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("discrete Hessian is not positive definite at {} node(s)", nodes.len())]
    NonConvexIterate { nodes: Vec<usize> },
    #[error("line search stalled at iteration {iteration}")]
    LineSearchStall { iteration: usize },
    #[error("Newton matrix is singular at column {column}")]
    SingularJacobian { column: usize },
    #[error("density is not positive at node {node}")]
    NonPositiveDensity { node: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("barrier constant exceeds the cap {cap:e}")]
    BarrierConstantSearchFailed { cap: f64 },
}

/// Dirichlet problem for `v` on a grid chart: `log det(D²v + Σ nᵢnᵢᵀ/lᵢ) = log(h/∏lᵢ)`
/// at interior nodes, `v` prescribed on every boundary node.
#[derive(Clone, Copy)]
pub struct DirichletProblem<'a> {
    pub facets: &'a [AffineFunctional],
    pub density: &'a Density,
    pub boundary_v: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// Discrete harmonic extension of the boundary values.
    Harmonic,
    /// Caller-supplied nodal values; boundary nodes are overwritten with the data.
    Field(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Number of homotopy stages from the initial guess to the target density; 0 disables.
    pub continuation_steps: usize,
    pub initial: InitialGuess,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 60, max_halvings: 30, continuation_steps: 0, initial: InitialGuess::Harmonic }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual_max: Vec<f64>,
    pub residual_l2: Vec<f64>,
    pub damping: Vec<f64>,
    pub min_eigenvalue: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct RegularizedSolution {
    pub chart: GridChart,
    pub facets: Vec<AffineFunctional>,
    pub v: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Neighbor indices of one interior node.
#[derive(Clone, Debug)]
struct Stencil {
    center: usize,
    plus: Vec<usize>,
    minus: Vec<usize>,
    /// For `a < b`: nodes at `+e_a − e_b` and `−e_a + e_b`.
    mixed: Vec<(usize, usize, usize, usize)>,
}

fn stencils(chart: &GridChart) -> Vec<Stencil> {
    let d = chart.dim();
    let mut out = Vec::new();
    for k in chart.interior() {
        let mut plus = Vec::with_capacity(d);
        let mut minus = Vec::with_capacity(d);
        let mut delta = vec![0i32; d];
        for a in 0..d {
            delta[a] = 1;
            plus.push(chart.neighbor(k, &delta).expect("interior stencil"));
            delta[a] = -1;
            minus.push(chart.neighbor(k, &delta).expect("interior stencil"));
            delta[a] = 0;
        }
        let mut mixed = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                delta[a] = 1;
                delta[b] = -1;
                let pm = chart.neighbor(k, &delta).expect("interior stencil");
                delta[a] = -1;
                delta[b] = 1;
                let mp = chart.neighbor(k, &delta).expect("interior stencil");
                delta[a] = 0;
                delta[b] = 0;
                mixed.push((a, b, pm, mp));
            }
        }
        out.push(Stencil { center: k, plus, minus, mixed });
    }
    out
}

fn lattice_hessian(st: &Stencil, v: &[f64], d: usize) -> Matrix {
    let mut h = Matrix::zeros(d, d);
    let c = v[st.center];
    for a in 0..d {
        h[(a, a)] = v[st.plus[a]] - 2.0 * c + v[st.minus[a]];
    }
    for &(a, b, pm, mp) in &st.mixed {
        let s = v[st.plus[a]] + v[st.minus[a]] + v[st.plus[b]] + v[st.minus[b]] - 2.0 * c - v[pm] - v[mp];
        h[(a, b)] = 0.5 * s;
        h[(b, a)] = 0.5 * s;
    }
    h
}

/// `Σ nᵢnᵢᵀ / lᵢ` and `Σ ln lᵢ` at `x`.
fn singular_part(facets: &[AffineFunctional], x: &[f64]) -> (Matrix, f64) {
    let n = x.len();
    let mut s = Matrix::zeros(n, n);
    let mut logs = 0.0;
    for f in facets {
        let l = f.eval(x);
        s.add_outer(1.0 / l, &f.normal, &f.normal);
        logs += ln(l);
    }
    (s, logs)
}

struct NodeEval {
    residual: f64,
    /// `J⁻¹ M⁻¹ J⁻ᵀ`, the sensitivity of `log det M` to the lattice Hessian.
    sens: Matrix,
}

struct Assembly<'a> {
    chart: &'a GridChart,
    st: Vec<Stencil>,
    /// Per interior node: `Σnnᵀ/l`, `Σ ln l − ln h`.
    sing: Vec<Matrix>,
    rhs: Vec<f64>,
    jinv: Matrix,
    kl: usize,
    ku: usize,
}

impl<'a> Assembly<'a> {
    fn new(chart: &'a GridChart, problem: &DirichletProblem<'_>) -> Result<Self, SolverError> {
        let st = stencils(chart);
        let mut sing = Vec::with_capacity(st.len());
        let mut rhs = Vec::with_capacity(st.len());
        for s in &st {
            let x = chart.coord(s.center);
            let (m, logs) = singular_part(problem.facets, x);
            let h = problem.density.eval(x);
            if !(h > 0.0) {
                return Err(SolverError::NonPositiveDensity { node: s.center });
            }
            sing.push(m);
            rhs.push(logs - ln(h));
        }
        let mut kl = 0;
        let mut ku = 0;
        for s in &st {
            let k = s.center;
            let mut touch = |j: usize| {
                if j < k {
                    kl = kl.max(k - j);
                } else {
                    ku = ku.max(j - k);
                }
            };
            s.plus.iter().chain(&s.minus).for_each(|&j| touch(j));
            for &(_, _, pm, mp) in &s.mixed {
                touch(pm);
                touch(mp);
            }
        }
        Ok(Self { chart, st, sing, rhs, jinv: chart.jacobian_inv().clone(), kl, ku })
    }

    fn eval_node(&self, i: usize, v: &[f64], want_sens: bool) -> Option<NodeEval> {
        let d = self.chart.dim();
        let dxi = lattice_hessian(&self.st[i], v, d);
        let m = self.jinv.transpose().mul(&dxi).mul(&self.jinv).add(&self.sing[i]);
        let ld = linalg::log_det_spd(&m)?;
        let residual = ld + self.rhs[i];
        let sens = if want_sens {
            let minv = linalg::inverse(&m)?;
            self.jinv.mul(&minv).mul(&self.jinv.transpose())
        } else {
            Matrix::zeros(0, 0)
        };
        Some(NodeEval { residual, sens })
    }

    /// Residual at interior nodes (indexed like `st`), or the list of non-convex nodes.
    fn residual(&self, v: &[f64], shift: &[f64]) -> Result<Vec<f64>, Vec<usize>> {
        let mut out = Vec::with_capacity(self.st.len());
        let mut bad = Vec::new();
        for i in 0..self.st.len() {
            match self.eval_node(i, v, false) {
                Some(e) => out.push(e.residual - shift[i]),
                None => {
                    bad.push(self.st[i].center);
                    out.push(f64::NAN);
                }
            }
        }
        if bad.is_empty() {
            Ok(out)
        } else {
            Err(bad)
        }
    }

    fn newton_step(&self, v: &[f64], shift: &[f64]) -> Result<Vec<f64>, SolverError> {
        let n = self.chart.len();
        let d = self.chart.dim();
        let mut a = BandMatrix::new(n, self.kl, self.ku);
        let mut b = vec![0.0; n];
        let mut is_interior = vec![false; n];
        for s in &self.st {
            is_interior[s.center] = true;
        }
        for k in 0..n {
            if !is_interior[k] {
                a.add(k, k, 1.0);
            }
        }
        let mut bad = Vec::new();
        for (i, s) in self.st.iter().enumerate() {
            let e = match self.eval_node(i, v, true) {
                Some(e) => e,
                None => {
                    bad.push(s.center);
                    continue;
                }
            };
            let k = s.center;
            b[k] = -(e.residual - shift[i]);
            let mut center = 0.0;
            for p in 0..d {
                let w = e.sens[(p, p)];
                a.add(k, s.plus[p], w);
                a.add(k, s.minus[p], w);
                center -= 2.0 * w;
            }
            for &(p, q, pm, mp) in &s.mixed {
                let w = e.sens[(p, q)];
                a.add(k, s.plus[p], w);
                a.add(k, s.minus[p], w);
                a.add(k, s.plus[q], w);
                a.add(k, s.minus[q], w);
                a.add(k, pm, -w);
                a.add(k, mp, -w);
                center -= 2.0 * w;
            }
            a.add(k, k, center);
        }
        if !bad.is_empty() {
            return Err(SolverError::NonConvexIterate { nodes: bad });
        }
        a.solve_in_place(&mut b).map_err(|e| SolverError::SingularJacobian { column: e.column })?;
        Ok(b)
    }
}

fn norms(r: &[f64]) -> (f64, f64) {
    let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let l2 = if r.is_empty() { 0.0 } else { sqrt(r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64) };
    (max, l2)
}

/// Discrete harmonic extension of the boundary values (lattice Laplacian).
pub fn harmonic_extension(chart: &GridChart, boundary: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = chart.len();
    let d = chart.dim();
    let st = stencils(chart);
    let mut kl = 0;
    let mut ku = 0;
    for s in &st {
        for &j in s.plus.iter().chain(&s.minus) {
            if j < s.center {
                kl = kl.max(s.center - j);
            } else {
                ku = ku.max(j - s.center);
            }
        }
    }
    let mut a = BandMatrix::new(n, kl, ku);
    let mut b = vec![0.0; n];
    let mut interior = vec![false; n];
    for s in &st {
        interior[s.center] = true;
        for p in 0..d {
            a.add(s.center, s.plus[p], 1.0);
            a.add(s.center, s.minus[p], 1.0);
        }
        a.add(s.center, s.center, -2.0 * d as f64);
    }
    for k in 0..n {
        if !interior[k] {
            a.add(k, k, 1.0);
            b[k] = boundary[k];
        }
    }
    a.solve_in_place(&mut b).map_err(|e| SolverError::SingularJacobian { column: e.column })?;
    Ok(b)
}

/// Residual field `log det(D²v + Σ nᵢnᵢᵀ/lᵢ) − log(h/∏lᵢ)`, zero on boundary nodes.
pub fn assemble_residual(chart: &GridChart, problem: &DirichletProblem<'_>, v: &[f64]) -> Result<Vec<f64>, SolverError> {
    let asm = Assembly::new(chart, problem)?;
    let zero = vec![0.0; asm.st.len()];
    let r = asm.residual(v, &zero).map_err(|nodes| SolverError::NonConvexIterate { nodes })?;
    let mut out = vec![0.0; chart.len()];
    for (s, ri) in asm.st.iter().zip(r) {
        out[s.center] = ri;
    }
    Ok(out)
}

/// Solves the Dirichlet problem on `chart`. Returns the best iterate with
/// `converged = false` when `max_iter` is exhausted.
pub fn solve_dirichlet(
    chart: &GridChart,
    problem: &DirichletProblem<'_>,
    opts: &SolveOptions,
) -> Result<(RegularizedSolution, SolveReport), SolverError> {
    let asm = Assembly::new(chart, problem)?;
    let n = chart.len();
    let boundary: Vec<f64> = (0..n)
        .map(|k| if chart.class(k) == NodeClass::Interior { 0.0 } else { (problem.boundary_v)(chart.coord(k)) })
        .collect();
    let mut v = match &opts.initial {
        InitialGuess::Harmonic => harmonic_extension(chart, &boundary)?,
        InitialGuess::Field(f) => {
            let mut f = f.clone();
            for k in 0..n {
                if chart.class(k) != NodeClass::Interior {
                    f[k] = boundary[k];
                }
            }
            f
        }
    };
    let m = asm.st.len();
    let mut report = SolveReport::default();

    // homotopy: target shifted from the residual of the initial guess towards zero
    let base = match asm.residual(&v, &vec![0.0; m]) {
        Ok(r) => r,
        Err(nodes) => return Err(SolverError::NonConvexIterate { nodes }),
    };
    let stages = opts.continuation_steps.max(1);
    for stage in 1..=stages {
        let sfrac = stage as f64 / stages as f64;
        let shift: Vec<f64> = if opts.continuation_steps == 0 {
            vec![0.0; m]
        } else {
            base.iter().map(|r| (1.0 - sfrac) * r).collect()
        };
        let last = stage == stages;
        let stage_tol = if last { opts.tol } else { opts.tol.max(1e-6) };
        let mut r = asm.residual(&v, &shift).map_err(|nodes| SolverError::NonConvexIterate { nodes })?;
        let (mut rmax, mut rl2) = norms(&r);
        if last || report.residual_max.is_empty() {
            report.residual_max.push(rmax);
            report.residual_l2.push(rl2);
        }
        let mut iter = 0;
        while rmax > stage_tol && iter < opts.max_iter {
            iter += 1;
            let dv = asm.newton_step(&v, &shift)?;
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let trial: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + t * b).collect();
                if let Ok(rt) = asm.residual(&trial, &shift) {
                    let (tmax, tl2) = norms(&rt);
                    if tmax <= (1.0 - 1e-4 * t) * rmax || (tmax <= rmax && tmax <= stage_tol) {
                        accepted = Some((trial, rt, tmax, tl2));
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, rt, tmax, tl2)) => {
                    v = trial;
                    r = rt;
                    rmax = tmax;
                    rl2 = tl2;
                    report.damping.push(t);
                    report.residual_max.push(rmax);
                    report.residual_l2.push(rl2);
                    report.iterations += 1;
                }
                None => {
                    if rmax <= 1e3 * stage_tol.max(f64::EPSILON) && last {
                        // roundoff floor reached
                        break;
                    }
                    return Err(SolverError::LineSearchStall { iteration: report.iterations });
                }
            }
        }
        if last {
            report.converged = rmax <= opts.tol;
            let mut residual = vec![0.0; n];
            for (s, ri) in asm.st.iter().zip(&r) {
                residual[s.center] = *ri;
            }
            let sol = RegularizedSolution { chart: chart.clone(), facets: problem.facets.to_vec(), v, residual };
            report.min_eigenvalue = sol.min_hessian_eigenvalue();
            return Ok((sol, report));
        }
    }
    unreachable!("the final continuation stage returns")
}

impl RegularizedSolution {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn u(&self, k: usize) -> f64 {
        self.v[k] + guillemin_value(&self.facets, self.chart.coord(k))
    }

    pub fn u_values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.u(k)).collect()
    }

    pub fn interpolate_v(&self, x: &[f64]) -> f64 {
        self.chart.interpolate(&self.v, x)
    }

    pub fn interpolate_u(&self, x: &[f64]) -> f64 {
        self.interpolate_v(x) + guillemin_value(&self.facets, x)
    }

    /// Lattice index of the node, for stencil lookups.
    fn node_delta(&self, k: usize, a: usize, s: i32) -> Option<usize> {
        let mut delta = vec![0i32; self.chart.dim()];
        delta[a] = s;
        self.chart.neighbor(k, &delta)
    }

    /// Gradient of `v`: central differences, one-sided where a neighbor is missing.
    pub fn gradient_v(&self, k: usize) -> Vec<f64> {
        let d = self.chart.dim();
        let mut g = vec![0.0; d];
        for a in 0..d {
            let p = self.node_delta(k, a, 1);
            let m = self.node_delta(k, a, -1);
            g[a] = match (p, m) {
                (Some(p), Some(m)) => 0.5 * (self.v[p] - self.v[m]),
                (Some(p), None) => match self.node_delta(p, a, 1) {
                    Some(pp) => -1.5 * self.v[k] + 2.0 * self.v[p] - 0.5 * self.v[pp],
                    None => self.v[p] - self.v[k],
                },
                (None, Some(m)) => match self.node_delta(m, a, -1) {
                    Some(mm) => 1.5 * self.v[k] - 2.0 * self.v[m] + 0.5 * self.v[mm],
                    None => self.v[k] - self.v[m],
                },
                (None, None) => 0.0,
            };
        }
        self.chart.jacobian_inv().tmul_vec(&g)
    }

    /// Gradient of `u`; infinite on singular boundary nodes.
    pub fn gradient_u(&self, k: usize) -> Vec<f64> {
        let mut g = self.gradient_v(k);
        let x = self.chart.coord(k);
        for f in &self.facets {
            let c = 1.0 + ln(f.eval(x));
            for (gi, ni) in g.iter_mut().zip(&f.normal) {
                *gi += c * ni;
            }
        }
        g
    }

    /// Discrete `D²v` at an interior node, in ambient coordinates.
    pub fn hessian_v(&self, k: usize) -> Option<Matrix> {
        if self.chart.class(k) != NodeClass::Interior {
            return None;
        }
        let st = stencil_at(&self.chart, k)?;
        let d = self.chart.dim();
        let jinv = self.chart.jacobian_inv();
        Some(jinv.transpose().mul(&lattice_hessian(&st, &self.v, d)).mul(jinv))
    }

    pub fn hessian_u(&self, k: usize) -> Option<Matrix> {
        let h = self.hessian_v(k)?;
        let (s, _) = singular_part(&self.facets, self.chart.coord(k));
        Some(h.add(&s))
    }

    /// Smallest eigenvalue of the discrete `D²u` over interior nodes.
    pub fn min_hessian_eigenvalue(&self) -> f64 {
        self.chart
            .interior()
            .filter_map(|k| self.hessian_u(k))
            .map(|h| linalg::min_eigenvalue(&h))
            .fold(f64::INFINITY, f64::min)
    }
}

fn stencil_at(chart: &GridChart, k: usize) -> Option<Stencil> {
    let d = chart.dim();
    let mut plus = Vec::with_capacity(d);
    let mut minus = Vec::with_capacity(d);
    let mut delta = vec![0i32; d];
    for a in 0..d {
        delta[a] = 1;
        plus.push(chart.neighbor(k, &delta)?);
        delta[a] = -1;
        minus.push(chart.neighbor(k, &delta)?);
        delta[a] = 0;
    }
    let mut mixed = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            delta[a] = 1;
            delta[b] = -1;
            let pm = chart.neighbor(k, &delta)?;
            delta[a] = -1;
            delta[b] = 1;
            let mp = chart.neighbor(k, &delta)?;
            delta[a] = 0;
            delta[b] = 0;
            mixed.push((a, b, pm, mp));
        }
    }
    Some(Stencil { center: k, plus, minus, mixed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub min_eigenvalue: f64,
    /// Largest `|∇u|` on the first three node layers next to the singular boundary.
    pub layer_gradient: [f64; 3],
    /// `(G₁ − G₃)/ln 3`: about `|n|` for logarithmic blow-up, tending to 0 for bounded gradients.
    pub log_slope: f64,
    pub blow_up: bool,
}

fn singular_depth(chart: &GridChart, k: usize) -> Option<usize> {
    // lattice distance to the nearest singular node along a coordinate direction
    let d = chart.dim();
    let mut best: Option<usize> = None;
    for a in 0..d {
        for s in [1i32, -1] {
            let mut delta = vec![0i32; d];
            for step in 1..=4usize {
                delta[a] = s * step as i32;
                match chart.neighbor(k, &delta) {
                    Some(j) if chart.class(j) == NodeClass::Singular => {
                        best = Some(best.map_or(step, |b| b.min(step)));
                        break;
                    }
                    Some(_) => {}
                    None => break,
                }
            }
        }
    }
    best
}

pub fn strict_convexity_monitor(sol: &RegularizedSolution) -> ConvexityReport {
    let mut layer = [0.0f64; 3];
    for k in sol.chart.interior() {
        if let Some(depth) = singular_depth(&sol.chart, k) {
            if (1..=3).contains(&depth) {
                let g = norm(&sol.gradient_u(k));
                layer[depth - 1] = layer[depth - 1].max(g);
            }
        }
    }
    let log_slope = (layer[0] - layer[2]) / ln(3.0);
    ConvexityReport { min_eigenvalue: sol.min_hessian_eigenvalue(), layer_gradient: layer, log_slope, blow_up: log_slope >= 0.5 }
}

/// Random points of the closed polytope: convex combinations of vertices with
/// exponential weights. With `face` set, only the vertices of that face are used.
pub fn sample_face(p: &Polytope, face: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let f = p.face(face);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let w: Vec<f64> = f.vertices.iter().map(|_| -ln(1.0 - rng.gen::<f64>())).collect();
        let total: f64 = w.iter().sum();
        let mut x = vec![0.0; p.dim()];
        for (wi, &vk) in w.iter().zip(&f.vertices) {
            for (xj, pj) in x.iter_mut().zip(&p.vertices()[vk].point) {
                *xj += wi / total * pj;
            }
        }
        out.push(x);
    }
    out
}

pub fn sample_boundary(p: &Polytope, per_facet: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = p.vertices().iter().map(|v| v.point.clone()).collect();
    let n = p.dim();
    for d in 1..n {
        for e in p.faces_of_dim(d).collect::<Vec<_>>() {
            out.extend(sample_face(p, e, if d == n - 1 { per_facet } else { per_facet / 4 + 1 }, rng));
        }
    }
    out
}

/// Barrier-derived bounds `lower ≤ u ≤ upper` for the convex solution.
///
/// `lower = u_G + max_L L − A·(∏lᵢ)^α` with affine minorants `L` of the boundary
/// values of `v`; `upper` is the smallest chord interpolation of the boundary values
/// of `u` through the point.
#[derive(Clone, Debug)]
pub struct BarrierBounds {
    pub alpha: f64,
    pub a: f64,
    /// Affine minorants `(gradient, constant)` of the boundary values of `v`.
    pub minorants: Vec<(Vec<f64>, f64)>,
    facets: Vec<AffineFunctional>,
    directions: Vec<Vec<f64>>,
}

pub const BARRIER_CAP: f64 = 1e12;

impl BarrierBounds {
    pub fn new(
        p: &Polytope,
        density: &Density,
        boundary_v: &dyn Fn(&[f64]) -> f64,
        alpha: f64,
        seed: u64,
    ) -> Result<Self, SolverError> {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = p.dim();
        let bsamples = sample_boundary(p, 200, &mut rng);
        let bvals: Vec<f64> = bsamples.iter().map(|x| boundary_v(x)).collect();
        let mut minorants = Vec::new();
        let vmin = bvals.iter().cloned().fold(f64::INFINITY, f64::min);
        minorants.push((vec![0.0; n], vmin));
        for vert in p.vertices() {
            let vp = boundary_v(&vert.point);
            let mut k_p: f64 = 0.0;
            for (y, vy) in bsamples.iter().zip(&bvals) {
                let m: f64 = vert.active.iter().map(|&i| p.facets()[i].eval(y)).sum();
                if m > 1e-12 * p.diameter() {
                    k_p = k_p.max((vp - vy) / m);
                }
            }
            // L_p(x) = v(p) − K_p Σ_{act} lᵢ(x)
            let mut grad = vec![0.0; n];
            let mut c = vp;
            for &i in &vert.active {
                let f = &p.facets()[i];
                for (g, ni) in grad.iter_mut().zip(&f.normal) {
                    *g -= k_p * ni;
                }
                c += k_p * f.offset;
            }
            minorants.push((grad, c));
        }
        let facets = p.facets().to_vec();
        let interior = sample_face(p, p.face_id(&[]).expect("cell"), 400, &mut rng);
        let mut a = 0.0;
        let ok = |a: f64| interior.iter().all(|x| subsolution_margin(&facets, density, alpha, a, x) >= 0.0);
        if !ok(0.0) {
            let mut found = None;
            for j in 0..=40 {
                let cand = pow(2.0, j as f64);
                if cand > BARRIER_CAP {
                    break;
                }
                if ok(cand) {
                    found = Some(cand);
                    break;
                }
            }
            a = found.ok_or(SolverError::BarrierConstantSearchFailed { cap: BARRIER_CAP })?;
        }
        let mut directions: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
        for e in p.faces_of_dim(1) {
            let f = p.face(e);
            let a0 = &p.vertices()[f.vertices[0]].point;
            let a1 = &p.vertices()[f.vertices[1]].point;
            directions.push(a1.iter().zip(a0).map(|(x, y)| x - y).collect());
        }
        for f in &facets {
            directions.push(f.normal.clone());
        }
        Ok(Self { alpha, a, minorants, facets, directions })
    }

    pub fn barrier(&self, x: &[f64]) -> f64 {
        let prod: f64 = self.facets.iter().map(|f| f.eval(x).max(0.0)).product();
        pow(prod, self.alpha)
    }

    pub fn lower(&self, x: &[f64]) -> f64 {
        let l = self.minorants.iter().map(|(g, c)| dot(g, x) + c).fold(f64::NEG_INFINITY, f64::max);
        guillemin_value(&self.facets, x) + l - self.a * self.barrier(x)
    }

    /// Chord bound through `x`; `boundary_u` must give `u` on ∂P.
    pub fn upper(&self, x: &[f64], boundary_u: &dyn Fn(&[f64]) -> f64) -> f64 {
        let vals: Vec<f64> = self.facets.iter().map(|f| f.eval(x)).collect();
        let scale = self.facets.iter().map(|f| norm(&f.normal)).fold(0.0, f64::max);
        if vals.iter().any(|&l| l <= 1e-14 * scale) {
            return boundary_u(x);
        }
        let mut best = f64::INFINITY;
        for d in &self.directions {
            let (mut tp, mut tm) = (f64::INFINITY, f64::INFINITY);
            for (f, &l) in self.facets.iter().zip(&vals) {
                let s = dot(&f.normal, d);
                if s < 0.0 {
                    tp = tp.min(-l / s);
                } else if s > 0.0 {
                    tm = tm.min(l / s);
                }
            }
            if !tp.is_finite() || !tm.is_finite() {
                continue;
            }
            let xp: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + tp * b).collect();
            let xm: Vec<f64> = x.iter().zip(d).map(|(a, b)| a - tm * b).collect();
            let chord = (tm * boundary_u(&xp) + tp * boundary_u(&xm)) / (tp + tm);
            best = best.min(chord);
        }
        best
    }
}

/// `∏lᵢ·det(D²u_G + A(−D²ℋ)) − h` at an interior point, for `ℋ = (∏lᵢ)^α`.
pub fn subsolution_margin(facets: &[AffineFunctional], density: &Density, alpha: f64, a: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut s2 = Matrix::zeros(n, n);
    let mut hg = Matrix::zeros(n, n);
    let mut prod = 1.0;
    for f in facets {
        let l = f.eval(x);
        prod *= l;
        for (gi, ni) in g.iter_mut().zip(&f.normal) {
            *gi += ni / l;
        }
        s2.add_outer(1.0 / (l * l), &f.normal, &f.normal);
        hg.add_outer(1.0 / l, &f.normal, &f.normal);
    }
    let hcal = pow(prod, alpha);
    // −D²ℋ = ℋ(α S − α² g gᵀ)
    let mut neg = s2.scale(alpha * hcal);
    neg.add_outer(-alpha * alpha * hcal, &g, &g);
    let m = hg.add(&neg.scale(a));
    prod * linalg::det(&m) - density.eval(x)
}
