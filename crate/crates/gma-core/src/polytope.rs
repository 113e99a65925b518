//! Halfspace polytopes `{x : lᵢ(x) > 0}`: vertices, face lattice and face charts.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::math::{dot, norm};

/// `l(x) = normal·x − offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFunctional {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl AffineFunctional {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            normal: self.normal.iter().map(|v| v * lambda).collect(),
            offset: self.offset * lambda,
        }
    }

    /// Functional in the coordinates `y ↦ base + Σ yⱼ basis[j]`.
    pub fn restrict(&self, base: &[f64], basis: &[Vec<f64>]) -> Self {
        Self {
            normal: basis.iter().map(|e| dot(&self.normal, e)).collect(),
            offset: -self.eval(base),
        }
    }

    /// `l ∘ T⁻¹`, so the pushed-forward functional takes the same values on `T(P)`.
    pub fn push_forward(&self, t: &AffineMap) -> Self {
        let inv = t.inverse().expect("push_forward through a singular map");
        // l(T⁻¹y) = n·(A⁻¹y + c) − offset with T⁻¹y = A⁻¹y + c
        Self {
            normal: inv.linear.tmul_vec(&self.normal),
            offset: self.offset - dot(&self.normal, &inv.shift),
        }
    }
}

/// `x ↦ linear·x + shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix,
    pub shift: Vec<f64>,
}

impl AffineMap {
    pub fn new(linear: Matrix, shift: Vec<f64>) -> Self {
        assert_eq!(linear.rows(), shift.len());
        Self { linear, shift }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Matrix::identity(n), vec![0.0; n])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.linear.mul_vec(x);
        for (yi, si) in y.iter_mut().zip(&self.shift) {
            *yi += si;
        }
        y
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.linear)
    }

    pub fn inverse(&self) -> Option<AffineMap> {
        let inv = linalg::inverse(&self.linear)?;
        let shift = inv.mul_vec(&self.shift).into_iter().map(|v| -v).collect();
        Some(AffineMap { linear: inv, shift })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PolytopeError {
    #[error("need at least {needed} facets in dimension {dim}, got {got}")]
    TooFewFacets { dim: usize, needed: usize, got: usize },
    #[error("functional {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("functionals {first} and {second} have degenerate normals")]
    DegenerateNormals { first: usize, second: usize },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope has empty interior")]
    EmptyInterior,
    #[error("functional {index} supports no facet")]
    RedundantFacet { index: usize },
    #[error("active set {active:?} does not index a face")]
    NotAFace { active: Vec<usize> },
    #[error("chart of size {s} leaves the polytope (functional {index} reaches {value:e})")]
    ChartTooLarge { s: f64, index: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub point: Vec<f64>,
    /// Sorted indices of the functionals vanishing at the vertex.
    pub active: Vec<usize>,
    /// Largest `|det|` over `n`-subsets of the unit active normals; near 0 means the
    /// vertex is barely determined.
    pub conditioning: f64,
    /// Smallest distance to an inactive facet hyperplane, in units of the tolerance.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    /// Sorted active set; empty for the cell itself.
    pub active: Vec<usize>,
    pub vertices: Vec<usize>,
    pub dim: usize,
    /// Faces of dimension `dim − 1` contained in this one.
    pub subfaces: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    facets: Vec<AffineFunctional>,
    vertices: Vec<Vertex>,
    faces: Vec<Face>,
    index: BTreeMap<Vec<usize>, usize>,
    diameter: f64,
    tau: f64,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    subsets(n, k)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(core::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    core::cmp::Ordering::Equal
}

/// Builds a polytope from its facet functionals. `tau` is the vertex feasibility
/// tolerance; `None` uses `1e-9 × diameter`.
pub fn build_polytope(functionals: Vec<AffineFunctional>, tau: Option<f64>) -> Result<Polytope, PolytopeError> {
    let n_f = functionals.len();
    let dim = functionals.first().map_or(0, |f| f.dim());
    if dim == 0 || n_f < dim + 1 {
        return Err(PolytopeError::TooFewFacets { dim, needed: dim + 1, got: n_f });
    }
    for (i, f) in functionals.iter().enumerate() {
        if f.dim() != dim {
            return Err(PolytopeError::DimensionMismatch { index: i, expected: dim, got: f.dim() });
        }
        if !(norm(&f.normal) > 0.0) || !f.offset.is_finite() || f.normal.iter().any(|v| !v.is_finite()) {
            return Err(PolytopeError::DegenerateNormals { first: i, second: i });
        }
    }
    let units: Vec<Vec<f64>> = functionals
        .iter()
        .map(|f| {
            let s = norm(&f.normal);
            f.normal.iter().map(|v| v / s).collect()
        })
        .collect();
    for i in 0..n_f {
        for j in i + 1..n_f {
            if dot(&units[i], &units[j]) > 1.0 - 1e-12 {
                return Err(PolytopeError::DegenerateNormals { first: i, second: j });
            }
        }
    }

    if is_unbounded(&functionals, dim) {
        return Err(PolytopeError::Unbounded);
    }

    // candidate points from all nonsingular n-subsets
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for s in k_subsets(n_f, dim) {
        let rows: Vec<Vec<f64>> = s.iter().map(|&i| functionals[i].normal.clone()).collect();
        let a = Matrix::from_rows(&rows);
        let lu = match linalg::Lu::new(&a) {
            Some(lu) => lu,
            None => continue,
        };
        if lu.pivot_ratio() < 1e-13 {
            continue;
        }
        let rhs: Vec<f64> = s.iter().map(|&i| functionals[i].offset).collect();
        candidates.push(lu.solve(&rhs));
    }
    let scale = candidates
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let loose = 1e-9 * scale;
    let feasible: Vec<Vec<f64>> = candidates
        .into_iter()
        .filter(|p| functionals.iter().all(|f| f.eval(p) / norm(&f.normal) >= -loose))
        .collect();
    if feasible.is_empty() {
        return Err(PolytopeError::EmptyInterior);
    }
    let mut diameter: f64 = 0.0;
    for a in &feasible {
        for b in &feasible {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            diameter = diameter.max(norm(&d));
        }
    }
    if !(diameter > 0.0) {
        return Err(PolytopeError::EmptyInterior);
    }
    let tau = tau.unwrap_or(1e-9 * diameter);

    let mut points: Vec<Vec<f64>> = Vec::new();
    for p in feasible {
        if functionals.iter().any(|f| f.eval(&p) / norm(&f.normal) < -tau) {
            continue;
        }
        let dup = points.iter().any(|q| {
            let d: Vec<f64> = p.iter().zip(q).map(|(x, y)| x - y).collect();
            norm(&d) <= tau
        });
        if !dup {
            points.push(p);
        }
    }
    points.sort_by(|a, b| lex_cmp(a, b));

    let mut vertices = Vec::with_capacity(points.len());
    for p in points {
        let dist: Vec<f64> = functionals.iter().map(|f| f.eval(&p) / norm(&f.normal)).collect();
        let active: Vec<usize> = (0..n_f).filter(|&i| dist[i].abs() <= tau).collect();
        let slack = (0..n_f)
            .filter(|i| !active.contains(i))
            .map(|i| dist[i] / tau)
            .fold(f64::INFINITY, f64::min);
        let mut conditioning: f64 = 0.0;
        if active.len() >= dim {
            for s in k_subsets(active.len(), dim) {
                let rows: Vec<Vec<f64>> = s.iter().map(|&k| units[active[k]].clone()).collect();
                conditioning = conditioning.max(linalg::det(&Matrix::from_rows(&rows)).abs());
            }
        }
        vertices.push(Vertex { point: p, active, conditioning, slack });
    }

    let pts: Vec<&[f64]> = vertices.iter().map(|v| v.point.as_slice()).collect();
    let affine_tol = 1e-9 * diameter;
    if linalg::affine_rank(&pts, affine_tol) < dim {
        return Err(PolytopeError::EmptyInterior);
    }

    // face lattice by closure of active sets
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut pending: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
    pending.insert(Vec::new(), ());
    for v in &vertices {
        let m = v.active.len();
        for mask in 1u64..(1u64 << m) {
            let s: Vec<usize> = (0..m).filter(|b| mask & (1 << b) != 0).map(|b| v.active[b]).collect();
            pending.insert(s, ());
        }
    }
    for s in pending.keys() {
        let verts: Vec<usize> = (0..vertices.len())
            .filter(|&k| s.iter().all(|i| vertices[k].active.contains(i)))
            .collect();
        if verts.is_empty() {
            continue;
        }
        let closure: Vec<usize> = (0..n_f)
            .filter(|i| verts.iter().all(|&k| vertices[k].active.contains(i)))
            .collect();
        if index.contains_key(&closure) {
            continue;
        }
        let vp: Vec<&[f64]> = verts.iter().map(|&k| vertices[k].point.as_slice()).collect();
        let fdim = linalg::affine_rank(&vp, affine_tol);
        index.insert(closure.clone(), faces.len());
        faces.push(Face { active: closure, vertices: verts, dim: fdim, subfaces: Vec::new() });
    }
    // order by dimension, then active set
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by(|&a, &b| faces[a].dim.cmp(&faces[b].dim).then_with(|| faces[a].active.cmp(&faces[b].active)));
    let faces: Vec<Face> = order.iter().map(|&k| faces[k].clone()).collect();
    let mut index = BTreeMap::new();
    for (k, f) in faces.iter().enumerate() {
        index.insert(f.active.clone(), k);
    }
    let mut faces = faces;
    for k in 0..faces.len() {
        let mut subs = Vec::new();
        for j in 0..faces.len() {
            if faces[j].dim + 1 == faces[k].dim && faces[k].active.iter().all(|i| faces[j].active.contains(i)) {
                subs.push(j);
            }
        }
        faces[k].subfaces = subs;
    }

    for i in 0..n_f {
        let ok = faces.iter().any(|f| f.dim + 1 == dim && f.active.contains(&i));
        if !ok {
            return Err(PolytopeError::RedundantFacet { index: i });
        }
    }

    Ok(Polytope { dim, facets: functionals, vertices, faces, index, diameter, tau })
}

/// The recession cone `{d : nᵢ·d ≥ 0}` is nonzero iff the polytope is unbounded.
/// Extreme rays of a pointed cone lie on `n−1` independent constraint hyperplanes.
fn is_unbounded(functionals: &[AffineFunctional], dim: usize) -> bool {
    let rows: Vec<Vec<f64>> = functionals.iter().map(|f| f.normal.clone()).collect();
    if linalg::orthonormal_span(&rows, 1e-12).len() < dim {
        return true;
    }
    if dim == 1 {
        let pos = rows.iter().any(|r| r[0] > 0.0);
        let neg = rows.iter().any(|r| r[0] < 0.0);
        return !(pos && neg);
    }
    for s in k_subsets(functionals.len(), dim - 1) {
        let sub: Vec<Vec<f64>> = s.iter().map(|&i| rows[i].clone()).collect();
        if linalg::orthonormal_span(&sub, 1e-12).len() < dim - 1 {
            continue;
        }
        let comp = linalg::orthonormal_complement(&sub, dim);
        if comp.len() != 1 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let d: Vec<f64> = comp[0].iter().map(|v| v * sign).collect();
            if rows.iter().all(|r| dot(r, &d) >= -1e-12 * norm(r)) {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicityReport {
    pub simple: bool,
    /// `(vertex index, number of active facets)` for every vertex not on exactly `n` facets.
    pub violations: Vec<(usize, usize)>,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[AffineFunctional] {
        &self.facets
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn face_id(&self, active: &[usize]) -> Option<usize> {
        let mut key = active.to_vec();
        key.sort_unstable();
        key.dedup();
        self.index.get(&key).copied()
    }

    pub fn faces_of_dim(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(move |&k| self.faces[k].dim == d)
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.facets.iter().map(|f| f.eval(x)).collect()
    }

    pub fn product(&self, x: &[f64]) -> f64 {
        self.facets.iter().map(|f| f.eval(x)).product()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| f.eval(x) >= -tol * norm(&f.normal))
    }

    /// Functionals whose normalized value at `x` is at most the geometric tolerance.
    pub fn active_at(&self, x: &[f64], tol: f64) -> Vec<usize> {
        (0..self.facets.len())
            .filter(|&i| self.facets[i].eval(x).abs() <= tol * norm(&self.facets[i].normal))
            .collect()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for (ci, pi) in c.iter_mut().zip(&v.point) {
                *ci += pi;
            }
        }
        let k = self.vertices.len() as f64;
        c.iter_mut().for_each(|v| *v /= k);
        c
    }

    pub fn face_centroid(&self, id: usize) -> Vec<f64> {
        let f = &self.faces[id];
        let mut c = vec![0.0; self.dim];
        for &k in &f.vertices {
            for (ci, pi) in c.iter_mut().zip(&self.vertices[k].point) {
                *ci += pi;
            }
        }
        c.iter_mut().for_each(|v| *v /= f.vertices.len() as f64);
        c
    }

    pub fn vertex_index(&self, p: &[f64]) -> Option<usize> {
        self.vertices.iter().position(|v| {
            let d: Vec<f64> = v.point.iter().zip(p).map(|(a, b)| a - b).collect();
            norm(&d) <= 1e3 * self.tau
        })
    }

    pub fn is_simple(&self) -> SimplicityReport {
        let violations: Vec<(usize, usize)> = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.active.len() != self.dim)
            .map(|(k, v)| (k, v.active.len()))
            .collect();
        SimplicityReport { simple: violations.is_empty(), violations }
    }

    /// Image under `T`, with every functional pushed forward.
    pub fn transformed(&self, t: &AffineMap) -> Result<Polytope, PolytopeError> {
        build_polytope(self.facets.iter().map(|f| f.push_forward(t)).collect(), None)
    }

    /// Chart `A(x) = base + W x' + E x''` on `[0,s]^k × [−s,s]^{n−k}` with
    /// `l_{γ_a}(A(x)) = κ_a x_a`.
    pub fn face_chart(&self, active: &[usize], s: f64) -> Result<FaceChart, PolytopeError> {
        let id = self.face_id(active).ok_or_else(|| PolytopeError::NotAFace { active: active.to_vec() })?;
        let face = &self.faces[id];
        let k = face.active.len();
        if face.dim + k != self.dim {
            return Err(PolytopeError::NotAFace { active: active.to_vec() });
        }
        let n = self.dim;
        let base = if k == n {
            self.vertices[face.vertices[0]].point.clone()
        } else {
            self.face_centroid(id)
        };
        let normals: Vec<Vec<f64>> = face.active.iter().map(|&i| self.facets[i].normal.clone()).collect();
        let kappa: Vec<f64> = normals.iter().map(|v| norm(v)).collect();
        let g = Matrix::from_columns(&normals);
        let gtg = g.transpose().mul(&g);
        let gtg_inv = linalg::inverse(&gtg).ok_or_else(|| PolytopeError::NotAFace { active: active.to_vec() })?;
        let w = g.mul(&gtg_inv).mul(&Matrix::diagonal(&kappa));
        let w_cols: Vec<Vec<f64>> = (0..k).map(|j| w.column(j)).collect();
        let e = linalg::orthonormal_complement(&normals, n);
        let chart = FaceChart { face: id, active: face.active.clone(), base, s, kappa, w: w_cols, e };
        // affine functionals attain their minimum over the box at a corner
        let m = n;
        for corner in 0..(1u64 << m) {
            let mut r = vec![0.0; n];
            for j in 0..m {
                let hi = corner & (1 << j) != 0;
                r[j] = if j < k {
                    if hi { s } else { 0.0 }
                } else if hi {
                    s
                } else {
                    -s
                };
            }
            let x = chart.to_ambient(&r);
            for (i, f) in self.facets.iter().enumerate() {
                if chart.active.contains(&i) {
                    continue;
                }
                let v = f.eval(&x);
                if v < -self.tau * norm(&f.normal) {
                    return Err(PolytopeError::ChartTooLarge { s, index: i, value: v });
                }
            }
        }
        Ok(chart)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceChart {
    pub face: usize,
    pub active: Vec<usize>,
    pub base: Vec<f64>,
    pub s: f64,
    pub kappa: Vec<f64>,
    /// Columns for the first `k` reference coordinates.
    pub w: Vec<Vec<f64>>,
    /// Orthonormal basis of the face directions.
    pub e: Vec<Vec<f64>>,
}

impl FaceChart {
    pub fn codim(&self) -> usize {
        self.w.len()
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn to_ambient(&self, r: &[f64]) -> Vec<f64> {
        let k = self.codim();
        let mut x = self.base.clone();
        for (a, col) in self.w.iter().enumerate() {
            for (xi, ci) in x.iter_mut().zip(col) {
                *xi += r[a] * ci;
            }
        }
        for (p, col) in self.e.iter().enumerate() {
            for (xi, ci) in x.iter_mut().zip(col) {
                *xi += r[k + p] * ci;
            }
        }
        x
    }

    pub fn as_map(&self) -> AffineMap {
        let mut cols = self.w.clone();
        cols.extend(self.e.iter().cloned());
        AffineMap::new(Matrix::from_columns(&cols), self.base.clone())
    }

    pub fn to_reference(&self, x: &[f64]) -> Vec<f64> {
        let inv = self.as_map().inverse().expect("face chart is invertible");
        inv.apply(x)
    }

    /// Whether `x` lies in the closed chart box.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let r = self.to_reference(x);
        let k = self.codim();
        r.iter().enumerate().all(|(a, &v)| if a < k { v >= -tol && v <= self.s + tol } else { v.abs() <= self.s + tol })
    }
}
