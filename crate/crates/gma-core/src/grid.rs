//! Structured lattices mapped affinely onto a simplex or a parallelepiped.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::math::floor;
use crate::polytope::{AffineMap, FaceChart, Polytope};

pub type GridField = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    /// `{ξ ∈ ℤ^d : ξ ≥ 0, Σξ ≤ N}`.
    Simplex,
    /// `{0..=N}^d`.
    Box,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    /// On the polytope boundary, where the logarithmic terms are singular.
    Singular,
    /// On an artificial boundary of a local chart.
    Outer,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("no structured chart covers this polytope (only simplices and parallelepipeds)")]
    NoChart,
    #[error("grid needs at least 2 subdivisions per axis, got {0}")]
    TooCoarse(usize),
    #[error("chart edges are linearly dependent")]
    DegenerateChart,
}

/// Grid nodes `x = origin + J ξ` for integer `ξ` in a lattice.
#[derive(Clone, Debug)]
pub struct GridChart {
    lattice: Lattice,
    n: usize,
    origin: Vec<f64>,
    jac: Matrix,
    jac_inv: Matrix,
    nodes: Vec<Vec<i32>>,
    coords: Vec<Vec<f64>>,
    class: Vec<NodeClass>,
    lookup: Vec<u32>,
    /// Reference coordinates `ref_origin[i] + ref_step[i]·ξᵢ`.
    ref_origin: Vec<f64>,
    ref_step: Vec<f64>,
}

const NONE: u32 = u32::MAX;

impl GridChart {
    fn build(
        lattice: Lattice,
        origin: Vec<f64>,
        edges: &[Vec<f64>],
        n: usize,
        singular_low: &[bool],
        singular_high: &[bool],
        ref_origin: Vec<f64>,
        ref_step: Vec<f64>,
    ) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::TooCoarse(n));
        }
        let d = edges.len();
        let cols: Vec<Vec<f64>> = edges.iter().map(|e| e.iter().map(|v| v / n as f64).collect()).collect();
        let jac = Matrix::from_columns(&cols);
        let jac_inv = linalg::inverse(&jac).ok_or(GridError::DegenerateChart)?;
        let side = n + 1;
        let total = side.pow(d as u32);
        let mut lookup = vec![NONE; total];
        let mut nodes = Vec::new();
        let mut coords = Vec::new();
        let mut class = Vec::new();
        let mut xi = vec![0i32; d];
        for flat in 0..total {
            let mut r = flat;
            for a in (0..d).rev() {
                xi[a] = (r % side) as i32;
                r /= side;
            }
            let sum: i32 = xi.iter().sum();
            if lattice == Lattice::Simplex && sum > n as i32 {
                continue;
            }
            let mut singular = false;
            let mut outer = false;
            for a in 0..d {
                if xi[a] == 0 {
                    if singular_low[a] {
                        singular = true;
                    } else {
                        outer = true;
                    }
                }
                if lattice == Lattice::Box && xi[a] == n as i32 {
                    if singular_high[a] {
                        singular = true;
                    } else {
                        outer = true;
                    }
                }
            }
            if lattice == Lattice::Simplex && sum == n as i32 {
                singular = true;
            }
            let c = if singular {
                NodeClass::Singular
            } else if outer {
                NodeClass::Outer
            } else {
                NodeClass::Interior
            };
            lookup[flat] = nodes.len() as u32;
            let mut x = origin.clone();
            for a in 0..d {
                for (xk, ck) in x.iter_mut().zip(&cols[a]) {
                    *xk += xi[a] as f64 * ck;
                }
            }
            nodes.push(xi.clone());
            coords.push(x);
            class.push(c);
        }
        Ok(Self { lattice, n, origin, jac, jac_inv, nodes, coords, class, lookup, ref_origin, ref_step })
    }

    /// Lattice on the simplex with vertices `origin` and `origin + edges[i]`; all
    /// boundary nodes are singular.
    pub fn simplex(origin: Vec<f64>, edges: &[Vec<f64>], n: usize) -> Result<Self, GridError> {
        let d = edges.len();
        let step = 1.0 / n as f64;
        Self::build(Lattice::Simplex, origin, edges, n, &vec![true; d], &vec![true; d], vec![0.0; d], vec![step; d])
    }

    /// Lattice on the parallelepiped spanned by `edges`; the flags choose which sides
    /// lie on the polytope boundary.
    pub fn parallelepiped(
        origin: Vec<f64>,
        edges: &[Vec<f64>],
        n: usize,
        singular_low: &[bool],
        singular_high: &[bool],
    ) -> Result<Self, GridError> {
        let d = edges.len();
        let step = 1.0 / n as f64;
        Self::build(Lattice::Box, origin, edges, n, singular_low, singular_high, vec![0.0; d], vec![step; d])
    }

    /// Axis-aligned box `∏ [lo_i, hi_i]` with identity reference coordinates.
    pub fn model_box(lo: &[f64], hi: &[f64], n: usize, singular_low: &[bool]) -> Result<Self, GridError> {
        let d = lo.len();
        let edges: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                let mut e = vec![0.0; d];
                e[a] = hi[a] - lo[a];
                e
            })
            .collect();
        let ref_step = (0..d).map(|a| (hi[a] - lo[a]) / n as f64).collect();
        Self::build(Lattice::Box, lo.to_vec(), &edges, n, singular_low, &vec![false; d], lo.to_vec(), ref_step)
    }

    /// Global chart of a simplex or parallelepiped polytope.
    pub fn for_polytope(p: &Polytope, n: usize) -> Result<Self, GridError> {
        let d = p.dim();
        let verts = p.vertices();
        let p0 = verts[0].point.clone();
        if verts.len() == d + 1 {
            let edges: Vec<Vec<f64>> = verts[1..]
                .iter()
                .map(|v| v.point.iter().zip(&p0).map(|(a, b)| a - b).collect())
                .collect();
            return Self::simplex(p0, &edges, n);
        }
        if verts.len() != 1 << d {
            return Err(GridError::NoChart);
        }
        let mut edges = Vec::new();
        for e in p.faces_of_dim(1) {
            let f = p.face(e);
            if f.vertices.contains(&0) {
                let other = if f.vertices[0] == 0 { f.vertices[1] } else { f.vertices[0] };
                edges.push(verts[other].point.iter().zip(&p0).map(|(a, b)| a - b).collect::<Vec<f64>>());
            }
        }
        if edges.len() != d {
            return Err(GridError::NoChart);
        }
        let tol = 1e-9 * p.diameter();
        for mask in 0u32..(1 << d) {
            let mut q = p0.clone();
            for (a, e) in edges.iter().enumerate() {
                if mask & (1 << a) != 0 {
                    for (qi, ei) in q.iter_mut().zip(e) {
                        *qi += ei;
                    }
                }
            }
            let found = verts.iter().any(|v| v.point.iter().zip(&q).all(|(a, b)| (a - b).abs() <= tol));
            if !found {
                return Err(GridError::NoChart);
            }
        }
        Self::parallelepiped(p0, &edges, n, &vec![true; d], &vec![true; d])
    }

    /// Box grid on a face chart: sides `x_a = 0` for `a < k` are singular, the rest outer.
    pub fn from_face_chart(fc: &FaceChart, n: usize) -> Result<Self, GridError> {
        let k = fc.codim();
        let d = fc.dim();
        let s = fc.s;
        let mut r0 = vec![0.0; d];
        for v in r0.iter_mut().skip(k) {
            *v = -s;
        }
        let origin = fc.to_ambient(&r0);
        let mut edges = Vec::with_capacity(d);
        for a in 0..k {
            edges.push(fc.w[a].iter().map(|v| v * s).collect());
        }
        for e in &fc.e {
            edges.push(e.iter().map(|v| v * 2.0 * s).collect());
        }
        let low: Vec<bool> = (0..d).map(|a| a < k).collect();
        let ref_step = (0..d).map(|a| if a < k { s / n as f64 } else { 2.0 * s / n as f64 }).collect();
        Self::build(Lattice::Box, origin, &edges, n, &low, &vec![false; d], r0, ref_step)
    }

    /// Same lattice with every node mapped through `T`.
    pub fn transformed(&self, t: &AffineMap) -> Self {
        let mut out = self.clone();
        out.origin = t.apply(&self.origin);
        out.jac = t.linear.mul(&self.jac);
        out.jac_inv = linalg::inverse(&out.jac).expect("transformed chart is invertible");
        out.coords = self.coords.iter().map(|x| t.apply(x)).collect();
        out
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn subdivisions(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.jac.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.jac.rows()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Maps lattice steps to ambient displacements.
    pub fn jacobian(&self) -> &Matrix {
        &self.jac
    }

    pub fn jacobian_inv(&self) -> &Matrix {
        &self.jac_inv
    }

    pub fn node(&self, k: usize) -> &[i32] {
        &self.nodes[k]
    }

    pub fn coord(&self, k: usize) -> &[f64] {
        &self.coords[k]
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn class(&self, k: usize) -> NodeClass {
        self.class[k]
    }

    pub fn reference(&self, k: usize) -> Vec<f64> {
        self.nodes[k]
            .iter()
            .enumerate()
            .map(|(a, &xi)| self.ref_origin[a] + self.ref_step[a] * xi as f64)
            .collect()
    }

    pub fn index_of(&self, xi: &[i32]) -> Option<usize> {
        let side = (self.n + 1) as i32;
        let mut flat = 0usize;
        for &v in xi {
            if v < 0 || v >= side {
                return None;
            }
            flat = flat * side as usize + v as usize;
        }
        match self.lookup[flat] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    pub fn neighbor(&self, k: usize, delta: &[i32]) -> Option<usize> {
        let xi: Vec<i32> = self.nodes[k].iter().zip(delta).map(|(a, b)| a + b).collect();
        self.index_of(&xi)
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.class[k] == NodeClass::Interior)
    }

    /// Continuous lattice coordinates of an ambient point.
    pub fn lattice_coords(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        self.jac_inv.mul_vec(&d)
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> GridField {
        self.coords.iter().map(|x| f(x)).collect()
    }

    /// Piecewise-linear interpolation on the Freudenthal triangulation. For the simplex
    /// lattice it is carried out in cumulative coordinates `η_j = Σ_{i≥j} ξ_i`, where
    /// the lattice boundary consists of triangulation walls.
    pub fn interpolate(&self, field: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let nf = self.n as f64;
        let xi = self.lattice_coords(x);
        let mut eta: Vec<f64> = match self.lattice {
            Lattice::Box => xi.iter().map(|v| v.clamp(0.0, nf)).collect(),
            Lattice::Simplex => {
                let mut e = vec![0.0; d];
                let mut acc = 0.0;
                for j in (0..d).rev() {
                    acc += xi[j];
                    e[j] = acc;
                }
                e
            }
        };
        if self.lattice == Lattice::Simplex {
            for j in 0..d {
                let hi = if j == 0 { nf } else { eta[j - 1] };
                eta[j] = eta[j].clamp(0.0, hi);
            }
        }
        let base: Vec<i32> = eta.iter().map(|&v| (floor(v) as i32).min(self.n as i32 - 1).max(0)).collect();
        let frac: Vec<f64> = eta.iter().zip(&base).map(|(v, b)| v - *b as f64).collect();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
        let to_xi = |e: &[i32]| -> Vec<i32> {
            match self.lattice {
                Lattice::Box => e.to_vec(),
                Lattice::Simplex => (0..d).map(|j| e[j] - if j + 1 < d { e[j + 1] } else { 0 }).collect(),
            }
        };
        let mut vertex = base.clone();
        let mut acc = 0.0;
        for step in 0..=d {
            let upper = if step == 0 { 1.0 } else { frac[order[step - 1]] };
            let lower = if step == d { 0.0 } else { frac[order[step]] };
            let weight = upper - lower;
            if weight != 0.0 {
                let k = self.index_of(&to_xi(&vertex)).expect("interpolation vertex inside lattice");
                acc += weight * field[k];
            }
            if step < d {
                vertex[order[step]] += 1;
            }
        }
        acc
    }

    /// Largest coordinate difference between corresponding nodes of two charts.
    pub fn max_node_distance(&self, other: &GridChart) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}
