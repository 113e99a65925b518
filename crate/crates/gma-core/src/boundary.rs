//! Dirichlet data built over the face lattice: vertex values, then edges by
//! quadrature, then higher faces by lower-dimensional solves.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{GridChart, NodeClass};
use crate::guillemin::{check_all_vertices, guillemin_value, Density, GuilleminError, Provenance};
use crate::linalg::{self, Matrix};
use crate::math::{dot, norm, round, xlnx};
use crate::polytope::{build_polytope, AffineFunctional, Polytope, PolytopeError};
use crate::quadrature::{AdaptiveIntegrator, QuadratureError};
use crate::solver::{solve_dirichlet, DirichletProblem, RegularizedSolution, SolveOptions, SolverError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BoundaryError {
    #[error("active set {active:?} is not a proper face")]
    NotAFace { active: Vec<usize> },
    #[error("endpoint {end} violates compatibility (residual {residual:e})")]
    IncompatibleEndpoint { end: usize, residual: f64 },
    #[error("vertex {vertex} violates compatibility (residual {residual:e})")]
    IncompatibleVertex { vertex: usize, residual: f64 },
    #[error("expected {expected} vertex values, got {got}")]
    VertexValueCount { expected: usize, got: usize },
    #[error("traces of faces {face} and {subface} disagree by {mismatch:e}")]
    InconsistentTraces { face: usize, subface: usize, mismatch: f64 },
    #[error("point is not on the boundary")]
    NotOnBoundary,
    #[error("polytope is not simple")]
    NonSimple,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Guillemin(#[from] GuilleminError),
    #[error("face {face}: {source}")]
    Solver { face: usize, source: SolverError },
}

/// `det D²u = h/∏lᵢ` on `P` with `u(pₖ) = αₖ` at the vertices.
#[derive(Clone, Debug)]
pub struct GuilleminProblem {
    pub polytope: Polytope,
    pub density: Density,
    /// In the polytope's vertex order.
    pub vertex_values: Vec<f64>,
}

impl GuilleminProblem {
    pub fn new(polytope: Polytope, density: Density, vertex_values: Vec<f64>) -> Result<Self, BoundaryError> {
        let expected = polytope.vertices().len();
        if vertex_values.len() != expected {
            return Err(BoundaryError::VertexValueCount { expected, got: vertex_values.len() });
        }
        Ok(Self { polytope, density, vertex_values })
    }
}

/// A face viewed as a polytope in its own affine hull, `x = base + Σ yⱼ basis[j]`.
#[derive(Clone, Debug)]
pub struct FaceProblem {
    pub face: usize,
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    /// Parent index of each facet functional of the face polytope.
    pub facet_map: Vec<usize>,
    /// Parent functionals positive on the whole face; their factors are absorbed into the density.
    pub absorbed: Vec<usize>,
    pub problem: GuilleminProblem,
}

impl FaceProblem {
    pub fn to_ambient(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.base.clone();
        for (yj, e) in y.iter().zip(&self.basis) {
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += yj * ei;
            }
        }
        x
    }

    pub fn to_face(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        self.basis.iter().map(|e| dot(e, &d)).collect()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Restricts the problem to a proper face of dimension at least 1. The face density is
/// `h / (det(GᵀG) ∏_{absorbed} lᵢ)` with `G` the matrix of active normals.
pub fn restrict_problem(problem: &GuilleminProblem, face: usize) -> Result<FaceProblem, BoundaryError> {
    let p = &problem.polytope;
    let f = p.face(face);
    let n = p.dim();
    if f.dim == 0 || f.dim >= n {
        return Err(BoundaryError::NotAFace { active: f.active.clone() });
    }
    let gamma = f.active.clone();
    let normals: Vec<Vec<f64>> = gamma.iter().map(|&i| p.facets()[i].normal.clone()).collect();
    let basis = linalg::orthonormal_complement(&normals, n);
    let base = p.face_centroid(face);
    let mut facet_map = Vec::new();
    let mut absorbed = Vec::new();
    for i in 0..p.facets().len() {
        if gamma.contains(&i) {
            continue;
        }
        let mut key = gamma.clone();
        key.push(i);
        match p.face_id(&key) {
            Some(id) if p.face(id).dim + 1 == f.dim => facet_map.push(i),
            _ => absorbed.push(i),
        }
    }
    let restricted: Vec<AffineFunctional> = facet_map.iter().map(|&i| p.facets()[i].restrict(&base, &basis)).collect();
    let face_poly = build_polytope(restricted, None)?;

    let g = Matrix::from_columns(&normals);
    let gram = linalg::det(&g.transpose().mul(&g));
    let parent = problem.density.clone();
    let absorbed_f: Vec<AffineFunctional> = absorbed.iter().map(|&i| p.facets()[i].clone()).collect();
    let (b2, e2) = (base.clone(), basis.clone());
    let mut density = Density::from_fn(parent.provenance(), move |y| {
        let mut x = b2.clone();
        for (yj, e) in y.iter().zip(&e2) {
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += yj * ei;
            }
        }
        let prod: f64 = absorbed_f.iter().map(|l| l.eval(&x)).product();
        parent.eval(&x) / (gram * prod)
    });
    density.scale = face_poly.diameter();

    let mut vertex_values = Vec::with_capacity(face_poly.vertices().len());
    for v in face_poly.vertices() {
        let mut x = base.clone();
        for (yj, e) in v.point.iter().zip(&basis) {
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += yj * ei;
            }
        }
        let k = p.vertex_index(&x).ok_or(BoundaryError::NotAFace { active: gamma.clone() })?;
        vertex_values.push(problem.vertex_values[k]);
    }
    Ok(FaceProblem {
        face,
        base,
        basis,
        facet_map,
        absorbed,
        problem: GuilleminProblem { polytope: face_poly, density, vertex_values },
    })
}

/// Solution of the edge ODE `u'' = ĥ/(ab)` on `[0, L]`, where `a(0) = 0`, `b(L) = 0`.
/// The regular part `w = u − a ln a − b ln b` satisfies
/// `w'' = g = [ĥ − a'²b − b'²a]/(ab)` and is stored through the cumulative integrals
/// `G₁ = ∫₀ᵗ g` and `G₂ = ∫₀ᵗ s g(s) ds` at panel nodes.
#[derive(Clone, Debug)]
pub struct EdgeProfile {
    pub face: usize,
    pub length: f64,
    /// Face coordinate of `t = 0`.
    pub y_start: f64,
    pub a: AffineFunctional,
    pub b: AffineFunctional,
    pub alpha_p: f64,
    pub alpha_q: f64,
    c0: f64,
    c1: f64,
    nodes: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    density: Density,
    tol: f64,
    pub quadrature_error: f64,
}

const EDGE_PANELS: usize = 64;

impl EdgeProfile {
    fn hhat(&self, t: f64) -> f64 {
        self.density.eval(&[self.y_start + t])
    }

    fn a_t(&self, t: f64) -> f64 {
        self.a.eval(&[self.y_start + t])
    }

    fn b_t(&self, t: f64) -> f64 {
        self.b.eval(&[self.y_start + t])
    }

    pub fn integrand(&self, t: f64) -> f64 {
        edge_integrand(&self.density, &self.a, &self.b, self.y_start, t)
    }

    fn integrals(&self, t: f64) -> (f64, f64) {
        let t = t.clamp(0.0, self.length);
        let h = self.length / EDGE_PANELS as f64;
        let k = ((t / h) as usize).min(EDGE_PANELS - 1);
        let t0 = self.nodes[k];
        let q = AdaptiveIntegrator::default();
        // same absolute budget as a full panel
        let tol = self.tol / EDGE_PANELS as f64;
        let r1 = q.integrate(&mut |s| self.integrand(s), t0, t, tol).map(|r| r.0).unwrap_or(f64::NAN);
        let r2 = q.integrate(&mut |s| s * self.integrand(s), t0, t, tol).map(|r| r.0).unwrap_or(f64::NAN);
        (self.g1[k] + r1, self.g2[k] + r2)
    }

    /// Regular part `w(t) = u(t) − a ln a − b ln b`.
    pub fn w(&self, t: f64) -> f64 {
        let (g1, g2) = self.integrals(t);
        self.c0 + self.c1 * t + t * g1 - g2
    }

    pub fn w_prime(&self, t: f64) -> f64 {
        self.c1 + self.integrals(t).0
    }

    /// Full potential on the edge.
    pub fn u(&self, t: f64) -> f64 {
        self.w(t) + xlnx(self.a_t(t).max(0.0)) + xlnx(self.b_t(t).max(0.0))
    }

    /// Rows `(t, u, w)` at `m + 1` equally spaced parameters.
    pub fn table(&self, m: usize) -> Vec<(f64, f64, f64)> {
        (0..=m)
            .map(|j| {
                let t = self.length * j as f64 / m as f64;
                (t, self.u(t), self.w(t))
            })
            .collect()
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.hhat(t)
    }
}

fn edge_integrand(density: &Density, a: &AffineFunctional, b: &AffineFunctional, y0: f64, t: f64) -> f64 {
    let y = [y0 + t];
    let (av, bv) = (a.eval(&y), b.eval(&y));
    let (da, db) = (a.normal[0], b.normal[0]);
    (density.eval(&y) - da * da * bv - db * db * av) / (av * bv)
}

/// Solves the 1D problem on `{a > 0, b > 0}` with `u = α_p` where `a = 0` and
/// `u = α_q` where `b = 0`. `density` is evaluated in the same 1D coordinate.
pub fn solve_edge(
    face: usize,
    a: &AffineFunctional,
    b: &AffineFunctional,
    density: &Density,
    alpha_p: f64,
    alpha_q: f64,
    tol: f64,
) -> Result<EdgeProfile, BoundaryError> {
    let (mut a, mut b) = (a.clone(), b.clone());
    if a.normal[0] < 0.0 {
        core::mem::swap(&mut a, &mut b);
    }
    let y_start = a.offset / a.normal[0];
    let y_end = b.offset / b.normal[0];
    let length = y_end - y_start;
    let (da, db) = (a.normal[0], b.normal[0]);
    // endpoint compatibility: ĥ(0) = b(0) a'², ĥ(L) = a(L) b'²
    let h0 = density.eval(&[y_start]);
    let req0 = b.eval(&[y_start]) * da * da;
    if (h0 - req0).abs() > 1e-8 * h0.abs() {
        return Err(BoundaryError::IncompatibleEndpoint { end: 0, residual: h0 - req0 });
    }
    let h1 = density.eval(&[y_end]);
    let req1 = a.eval(&[y_end]) * db * db;
    if (h1 - req1).abs() > 1e-8 * h1.abs() {
        return Err(BoundaryError::IncompatibleEndpoint { end: 1, residual: h1 - req1 });
    }
    let q = AdaptiveIntegrator::default();
    let panel_tol = tol / EDGE_PANELS as f64;
    let mut nodes = Vec::with_capacity(EDGE_PANELS + 1);
    let mut g1 = vec![0.0];
    let mut g2 = vec![0.0];
    let mut qerr = 0.0;
    let step = length / EDGE_PANELS as f64;
    for j in 0..=EDGE_PANELS {
        nodes.push(step * j as f64);
    }
    for j in 0..EDGE_PANELS {
        let (lo, hi) = (nodes[j], nodes[j + 1]);
        let (i1, e1) = q.integrate(&mut |s| edge_integrand(density, &a, &b, y_start, s), lo, hi, panel_tol)?;
        let (i2, e2) = q.integrate(&mut |s| s * edge_integrand(density, &a, &b, y_start, s), lo, hi, panel_tol)?;
        qerr += e1 + e2;
        g1.push(g1[j] + i1);
        g2.push(g2[j] + i2);
    }
    let b0 = b.eval(&[y_start]);
    let a_l = a.eval(&[y_end]);
    let c0 = alpha_p - xlnx(b0);
    let i_l = length * g1[EDGE_PANELS] - g2[EDGE_PANELS];
    let c1 = (alpha_q - xlnx(a_l) - c0 - i_l) / length;
    Ok(EdgeProfile {
        face,
        length,
        y_start,
        a,
        b,
        alpha_p,
        alpha_q,
        c0,
        c1,
        nodes,
        g1,
        g2,
        density: density.clone(),
        tol,
        quadrature_error: qerr,
    })
}

/// Edge solve for a restricted 1D face problem.
pub fn solve_edge_face(fp: &FaceProblem, tol: f64) -> Result<EdgeProfile, BoundaryError> {
    let fpoly = &fp.problem.polytope;
    let fs = fpoly.facets();
    // vertex order in the face polytope is increasing in y
    let (ia, ib) = if fs[0].normal[0] > 0.0 { (0, 1) } else { (1, 0) };
    let vals = &fp.problem.vertex_values;
    solve_edge(fp.face, &fs[ia], &fs[ib], &fp.problem.density, vals[0], vals[1], tol)
}

/// Trace of the solution on one face.
#[derive(Clone, Debug)]
pub enum FaceTrace {
    Vertex(f64),
    Edge { restriction: FaceProblem, profile: EdgeProfile },
    Solved { restriction: FaceProblem, solution: RegularizedSolution },
}

impl FaceTrace {
    /// `u` at an ambient point of the face.
    pub fn eval_u(&self, x: &[f64]) -> f64 {
        match self {
            FaceTrace::Vertex(a) => *a,
            FaceTrace::Edge { restriction, profile } => {
                let y = restriction.to_face(x);
                profile.u(y[0] - profile.y_start)
            }
            FaceTrace::Solved { restriction, solution } => solution.interpolate_u(&restriction.to_face(x)),
        }
    }
}

/// Solves the problem on a face polytope of dimension at least 2.
pub trait FaceSolver: Sync {
    fn solve_face(
        &self,
        face: &FaceProblem,
        boundary_v: &(dyn Fn(&[f64]) -> f64 + Sync),
    ) -> Result<RegularizedSolution, SolverError>;
}

/// Grid Newton solve with resolution scaled by face diameter.
#[derive(Clone, Debug)]
pub struct GridFaceSolver {
    pub resolution: usize,
    pub reference_diameter: f64,
    pub options: SolveOptions,
}

impl FaceSolver for GridFaceSolver {
    fn solve_face(
        &self,
        face: &FaceProblem,
        boundary_v: &(dyn Fn(&[f64]) -> f64 + Sync),
    ) -> Result<RegularizedSolution, SolverError> {
        let fp = &face.problem.polytope;
        let scale = fp.diameter() / self.reference_diameter;
        let n = (round(self.resolution as f64 * scale) as usize).max(4);
        let chart = GridChart::for_polytope(fp, n)?;
        let problem = DirichletProblem { facets: fp.facets(), density: &face.problem.density, boundary_v };
        solve_dirichlet(&chart, &problem, &self.options).map(|(s, _)| s)
    }
}

/// Runs independent jobs, possibly in parallel; results come back in job order.
pub trait BatchRunner: Sync {
    fn run(&self, count: usize, job: &(dyn Fn(usize) -> Result<FaceTrace, BoundaryError> + Sync)) -> Vec<Result<FaceTrace, BoundaryError>>;
}

pub struct Sequential;

impl BatchRunner for Sequential {
    fn run(&self, count: usize, job: &(dyn Fn(usize) -> Result<FaceTrace, BoundaryError> + Sync)) -> Vec<Result<FaceTrace, BoundaryError>> {
        (0..count).map(job).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyCheck {
    pub face: usize,
    pub subface: usize,
    /// Largest difference at face-grid nodes lying on the subface.
    pub mismatch: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConsistencyReport {
    pub checks: Vec<ConsistencyCheck>,
    pub max_mismatch: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct BoundaryData {
    facets: Vec<AffineFunctional>,
    polytope: Polytope,
    pub traces: BTreeMap<usize, FaceTrace>,
    pub vertex_values: Vec<f64>,
    pub consistency: ConsistencyReport,
}

impl BoundaryData {
    pub fn polytope(&self) -> &Polytope {
        &self.polytope
    }

    /// The smallest face containing `x`, if `x` lies on ∂P.
    pub fn carrier(&self, x: &[f64]) -> Option<usize> {
        let active = self.polytope.active_at(x, 1e3 * self.polytope.tau());
        if active.is_empty() {
            return None;
        }
        self.polytope.face_id(&active)
    }

    pub fn eval_u(&self, x: &[f64]) -> Result<f64, BoundaryError> {
        let face = self.carrier(x).ok_or(BoundaryError::NotOnBoundary)?;
        let trace = self.traces.get(&face).ok_or(BoundaryError::NotOnBoundary)?;
        Ok(trace.eval_u(x))
    }

    /// Regular part `v = u − Σ lᵢ ln lᵢ` on ∂P.
    pub fn eval_v(&self, x: &[f64]) -> Result<f64, BoundaryError> {
        Ok(self.eval_u(x)? - guillemin_value(&self.facets, x))
    }
}

/// Builds traces face by face in increasing dimension. Faces of one dimension only
/// depend on lower dimensions and are handed to `runner` as one batch.
pub fn build_boundary_data(
    problem: &GuilleminProblem,
    solver: &dyn FaceSolver,
    runner: &dyn BatchRunner,
    tol: f64,
) -> Result<BoundaryData, BoundaryError> {
    let p = &problem.polytope;
    if !p.is_simple().simple {
        return Err(BoundaryError::NonSimple);
    }
    for r in check_all_vertices(p, &problem.density)? {
        if !r.compatible {
            return Err(BoundaryError::IncompatibleVertex { vertex: r.vertex, residual: r.residual });
        }
    }
    let mut data = BoundaryData {
        facets: p.facets().to_vec(),
        polytope: p.clone(),
        traces: BTreeMap::new(),
        vertex_values: problem.vertex_values.clone(),
        consistency: ConsistencyReport { checks: Vec::new(), max_mismatch: 0.0, tolerance: 10.0 * tol },
    };
    for id in p.faces_of_dim(0) {
        let k = p.face(id).vertices[0];
        data.traces.insert(id, FaceTrace::Vertex(problem.vertex_values[k]));
    }
    let n = p.dim();
    for d in 1..n {
        let ids: Vec<usize> = p.faces_of_dim(d).collect();
        let current = &data;
        let job = |j: usize| -> Result<FaceTrace, BoundaryError> {
            let fp = restrict_problem(problem, ids[j])?;
            if d == 1 {
                let profile = solve_edge_face(&fp, tol)?;
                return Ok(FaceTrace::Edge { restriction: fp, profile });
            }
            let fpoly = fp.problem.polytope.clone();
            let fp_ref = &fp;
            let bv = move |y: &[f64]| -> f64 {
                let x = fp_ref.to_ambient(y);
                current.eval_u(&x).unwrap_or(f64::NAN) - guillemin_value(fpoly.facets(), y)
            };
            let solution = solver
                .solve_face(&fp, &bv)
                .map_err(|source| BoundaryError::Solver { face: ids[j], source })?;
            Ok(FaceTrace::Solved { restriction: fp, solution })
        };
        let results = runner.run(ids.len(), &job);
        let mut new = Vec::with_capacity(ids.len());
        for (id, r) in ids.iter().zip(results) {
            new.push((*id, r?));
        }
        for (id, trace) in new {
            let checks = consistency_checks(&data, id, &trace);
            for c in checks {
                data.consistency.max_mismatch = data.consistency.max_mismatch.max(c.mismatch);
                if c.mismatch > data.consistency.tolerance {
                    return Err(BoundaryError::InconsistentTraces { face: c.face, subface: c.subface, mismatch: c.mismatch });
                }
                data.consistency.checks.push(c);
            }
            data.traces.insert(id, trace);
        }
    }
    Ok(data)
}

fn consistency_checks(data: &BoundaryData, id: usize, trace: &FaceTrace) -> Vec<ConsistencyCheck> {
    let p = &data.polytope;
    let mut out = Vec::new();
    match trace {
        FaceTrace::Vertex(_) => {}
        FaceTrace::Edge { restriction, profile } => {
            for &sub in &p.face(id).subfaces {
                let x = &p.vertices()[p.face(sub).vertices[0]].point;
                let t = restriction.to_face(x)[0] - profile.y_start;
                let want = data.traces[&sub].eval_u(x);
                out.push(ConsistencyCheck { face: id, subface: sub, mismatch: (profile.u(t) - want).abs() });
            }
        }
        FaceTrace::Solved { restriction, solution } => {
            let fpoly = &restriction.problem.polytope;
            let mut worst: BTreeMap<usize, f64> = BTreeMap::new();
            for k in 0..solution.chart.len() {
                if solution.chart.class(k) == NodeClass::Interior {
                    continue;
                }
                let y = solution.chart.coord(k);
                let x = restriction.to_ambient(y);
                if let Some(sub) = data.carrier(&x) {
                    if let Some(tr) = data.traces.get(&sub) {
                        let u = solution.v[k] + guillemin_value(fpoly.facets(), y);
                        let e = worst.entry(sub).or_insert(0.0);
                        *e = e.max((u - tr.eval_u(&x)).abs());
                    }
                }
            }
            for (sub, mismatch) in worst {
                out.push(ConsistencyCheck { face: id, subface: sub, mismatch });
            }
        }
    }
    out
}

/// Boxed boundary closure for a global Dirichlet solve.
pub fn boundary_closure(data: &BoundaryData) -> Box<dyn Fn(&[f64]) -> f64 + Sync + '_> {
    Box::new(move |x: &[f64]| data.eval_v(x).unwrap_or(f64::NAN))
}

/// Global Newton solve of the full problem on a structured chart.
pub fn newton_solve(
    problem: &GuilleminProblem,
    boundary: &BoundaryData,
    grid: &GridChart,
    opts: &SolveOptions,
) -> Result<(RegularizedSolution, crate::solver::SolveReport), SolverError> {
    let bv = boundary_closure(boundary);
    let dp = DirichletProblem { facets: problem.polytope.facets(), density: &problem.density, boundary_v: &*bv };
    solve_dirichlet(grid, &dp, opts)
}

/// Unit vector along an edge, used for tabulating profiles in ambient coordinates.
pub fn edge_direction(fp: &FaceProblem) -> Vec<f64> {
    let e = fp.basis[0].clone();
    let s = norm(&e);
    e.into_iter().map(|v| v / s).collect()
}

/// Marker so callers can tell the absorbed-factor density apart in reports.
pub fn restricted_provenance(fp: &FaceProblem) -> Provenance {
    fp.problem.density.provenance()
}
