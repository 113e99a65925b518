//! Guillemin potential, its density, vertex compatibility, the inclusion–exclusion
//! extension of boundary traces and the scaled Hessian.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{self, Matrix};
use crate::math::{compensated_sum, ln, norm, powi, sqrt, xlnx};
use crate::polytope::{k_subsets, AffineFunctional, Polytope};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GuilleminError {
    #[error("point lies outside the closed polytope (functional {index} = {value:e})")]
    OutsideDomain { index: usize, value: f64 },
    #[error("vertex {vertex} lies on {active} facets, expected {dim}")]
    NonSimpleVertex { vertex: usize, active: usize, dim: usize },
    #[error("trace is unavailable at the requested point")]
    MissingTrace,
    #[error("weighted Hessian entry ({row}, {col}) is not finite")]
    SingularEvaluation { row: usize, col: usize },
}

fn check_domain(facets: &[AffineFunctional], x: &[f64], tol: f64) -> Result<Vec<f64>, GuilleminError> {
    let mut vals = Vec::with_capacity(facets.len());
    for (i, f) in facets.iter().enumerate() {
        let v = f.eval(x);
        if v < -tol * norm(&f.normal) || !v.is_finite() {
            return Err(GuilleminError::OutsideDomain { index: i, value: v });
        }
        vals.push(v.max(0.0));
    }
    Ok(vals)
}

/// `Σ lᵢ ln lᵢ` on the closed polytope.
pub fn guillemin_value(facets: &[AffineFunctional], x: &[f64]) -> f64 {
    compensated_sum(facets.iter().map(|f| xlnx(f.eval(x).max(0.0))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
}

/// Value, gradient `Σ (1 + ln lᵢ) nᵢ` and Hessian `Σ nᵢnᵢᵀ / lᵢ` of the Guillemin potential.
/// Gradient and Hessian are only finite in the open polytope.
pub fn guillemin_potential(p: &Polytope, x: &[f64]) -> Result<PotentialEval, GuilleminError> {
    let facets = p.facets();
    let vals = check_domain(facets, x, p.tau())?;
    let n = p.dim();
    let mut gradient = vec![0.0; n];
    let mut hessian = Matrix::zeros(n, n);
    for (f, &l) in facets.iter().zip(&vals) {
        let c = 1.0 + ln(l);
        for (g, ni) in gradient.iter_mut().zip(&f.normal) {
            *g += c * ni;
        }
        hessian.add_outer(1.0 / l, &f.normal, &f.normal);
    }
    Ok(PotentialEval { value: guillemin_value(facets, x), gradient, hessian })
}

/// `Σ_S det(N_S)² ∏_{i∉S} lᵢ` over `n`-subsets `S`: the continuous extension of
/// `(∏ lᵢ)·det(Σ nᵢnᵢᵀ/lᵢ)` to the closed polytope.
pub fn guillemin_density_expanded(facets: &[AffineFunctional], x: &[f64]) -> f64 {
    let n = x.len();
    let vals: Vec<f64> = facets.iter().map(|f| f.eval(x)).collect();
    let terms = k_subsets(facets.len(), n).into_iter().map(|s| {
        let rows: Vec<Vec<f64>> = s.iter().map(|&i| facets[i].normal.clone()).collect();
        let d = linalg::det(&Matrix::from_rows(&rows));
        let rest: f64 = (0..facets.len()).filter(|i| !s.contains(i)).map(|i| vals[i]).product();
        d * d * rest
    });
    compensated_sum(terms)
}

/// `(∏ lᵢ)·det(Σ nᵢnᵢᵀ/lᵢ)` evaluated directly.
pub fn guillemin_density_naive(facets: &[AffineFunctional], x: &[f64]) -> f64 {
    let n = x.len();
    let mut hess = Matrix::zeros(n, n);
    let mut prod = 1.0;
    for f in facets {
        let l = f.eval(x);
        prod *= l;
        hess.add_outer(1.0 / l, &f.normal, &f.normal);
    }
    prod * linalg::det(&hess)
}

/// The density induced by the Guillemin potential, continuous up to the boundary
/// of a simple polytope.
pub fn guillemin_density(p: &Polytope, x: &[f64]) -> Result<f64, GuilleminError> {
    let vals = check_domain(p.facets(), x, p.tau())?;
    let min_dist = p
        .facets()
        .iter()
        .zip(&vals)
        .map(|(f, l)| l / norm(&f.normal))
        .fold(f64::INFINITY, f64::min);
    if min_dist < 1e-6 * p.diameter() {
        Ok(guillemin_density_expanded(p.facets(), x))
    } else {
        Ok(guillemin_density_naive(p.facets(), x))
    }
}

/// Right-hand side `∏ lᵢ · det(S + Σ nᵢnᵢᵀ/lᵢ)` as a bordered determinant, finite on ∂P.
/// This is the density for which `Σ lᵢ ln lᵢ + v` solves the equation when `D²v = S`.
pub fn bordered_density(facets: &[AffineFunctional], x: &[f64], s: &Matrix) -> f64 {
    let n = x.len();
    let m = facets.len();
    let mut b = Matrix::zeros(m + n, m + n);
    for (i, f) in facets.iter().enumerate() {
        b[(i, i)] = f.eval(x);
        for j in 0..n {
            b[(i, m + j)] = f.normal[j];
            b[(m + j, i)] = -f.normal[j];
        }
    }
    for i in 0..n {
        for j in 0..n {
            b[(m + i, m + j)] = s[(i, j)];
        }
    }
    linalg::det(&b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    GuilleminInduced,
    Perturbed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Analytic => "analytic",
            Provenance::GuilleminInduced => "guillemin-induced",
            Provenance::Perturbed => "perturbed",
        })
    }
}

type DensityFnBox = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A positive density on the closed polytope, evaluated as a black box.
#[derive(Clone)]
pub struct Density {
    f: Arc<DensityFnBox>,
    provenance: Provenance,
    /// Length scale for finite-difference steps.
    pub scale: f64,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density").field("provenance", &self.provenance).field("scale", &self.scale).finish()
    }
}

impl Density {
    pub fn from_fn(provenance: Provenance, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), provenance, scale: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(Provenance::Analytic, move |_| c)
    }

    /// `Σ c_α x^α` from `(exponents, coefficient)` pairs.
    pub fn polynomial(terms: Vec<(Vec<u32>, f64)>) -> Self {
        Self::from_fn(Provenance::Analytic, move |x| {
            compensated_sum(terms.iter().map(|(e, c)| {
                c * e.iter().zip(x).map(|(&k, &xi)| powi(xi, k as i32)).product::<f64>()
            }))
        })
    }

    pub fn guillemin(p: &Polytope) -> Self {
        let facets = p.facets().to_vec();
        let diam = p.diameter();
        let mut d = Self::from_fn(Provenance::GuilleminInduced, move |x| {
            let min_dist = facets.iter().map(|f| f.eval(x) / norm(&f.normal)).fold(f64::INFINITY, f64::min);
            if min_dist < 1e-6 * diam {
                guillemin_density_expanded(&facets, x)
            } else {
                guillemin_density_naive(&facets, x)
            }
        });
        d.scale = diam;
        d
    }

    /// `h_G·(1 + c·∏ lᵢ)`; the factor is 1 on ∂P so vertex compatibility is kept.
    pub fn perturbed(p: &Polytope, c: f64) -> Self {
        let base = Self::guillemin(p);
        let facets = p.facets().to_vec();
        let mut d = Self::from_fn(Provenance::Perturbed, move |x| {
            let prod: f64 = facets.iter().map(|f| f.eval(x)).product();
            base.eval(x) * (1.0 + c * prod)
        });
        d.scale = p.diameter();
        d
    }

    /// `x ↦ h(T⁻¹x)·factor`.
    pub fn pulled_back(&self, t_inv: crate::polytope::AffineMap, factor: f64) -> Self {
        let inner = self.clone();
        let mut d = Self::from_fn(self.provenance, move |x| factor * inner.eval(&t_inv.apply(x)));
        d.scale = self.scale;
        d
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// Partial derivative along the listed axes (order ≤ 4) by nested fourth-order
    /// central differences. The step is balanced for the derivative order.
    pub fn partial(&self, x: &[f64], axes: &[usize]) -> f64 {
        assert!(axes.len() <= 4, "derivatives above order 4 are not provided");
        if axes.is_empty() {
            return self.eval(x);
        }
        let step = crate::math::pow(f64::EPSILON, 1.0 / (axes.len() as f64 + 4.0)) * self.scale.max(1e-300);
        let mut pt = x.to_vec();
        nested_difference(&*self.f, &mut pt, axes, step)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|a| self.partial(x, &[a])).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let n = x.len();
        let mut h = Matrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = self.partial(x, &[a, b]);
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        h
    }
}

fn nested_difference(f: &DensityFnBox, pt: &mut Vec<f64>, axes: &[usize], step: f64) -> f64 {
    if axes.is_empty() {
        return f(pt);
    }
    let a = axes[0];
    let x0 = pt[a];
    // (f(−2h) − 8f(−h) + 8f(h) − f(2h)) / 12h
    let weights = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut acc = 0.0;
    for (off, w) in weights {
        pt[a] = x0 + off * step;
        acc += w * nested_difference(f, pt, &axes[1..], step);
    }
    pt[a] = x0;
    acc / (12.0 * step)
}

/// `∏_{l_k(p) ≠ 0} l_k(p) · det(n_{i₁}, …, n_{iₙ})²`, the value a compatible density
/// must take at the vertex.
pub fn required_vertex_value(p: &Polytope, vertex: usize) -> Result<f64, GuilleminError> {
    let v = &p.vertices()[vertex];
    if v.active.len() != p.dim() {
        return Err(GuilleminError::NonSimpleVertex { vertex, active: v.active.len(), dim: p.dim() });
    }
    let rows: Vec<Vec<f64>> = v.active.iter().map(|&i| p.facets()[i].normal.clone()).collect();
    let d = linalg::det(&Matrix::from_rows(&rows));
    let prod: f64 = (0..p.facets().len())
        .filter(|i| !v.active.contains(i))
        .map(|i| p.facets()[i].eval(&v.point))
        .product();
    Ok(prod * d * d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub vertex: usize,
    pub density: f64,
    pub required: f64,
    /// `h(p) − required`.
    pub residual: f64,
    pub tolerance: f64,
    pub compatible: bool,
}

pub fn check_vertex_compatibility(p: &Polytope, h: &Density, vertex: usize) -> Result<CompatibilityReport, GuilleminError> {
    let required = required_vertex_value(p, vertex)?;
    let density = h.eval(&p.vertices()[vertex].point);
    let residual = density - required;
    let tolerance = 1e-8 * density.abs();
    Ok(CompatibilityReport {
        vertex,
        density,
        required,
        residual,
        tolerance,
        compatible: residual.abs() <= tolerance,
    })
}

pub fn check_all_vertices(p: &Polytope, h: &Density) -> Result<Vec<CompatibilityReport>, GuilleminError> {
    (0..p.vertices().len()).map(|k| check_vertex_compatibility(p, h, k)).collect()
}

/// `F(x) = Σ_{∅≠S⊆{1..k}} (−1)^{|S|+1} v(x with coordinates in S set to 0)`; agrees with
/// `v` wherever some `x_a = 0`, `a < k`.
pub fn smooth_extension(k: usize, trace: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64, GuilleminError> {
    assert!(k <= x.len() && k < 64);
    let mut pt = x.to_vec();
    let mut terms = Vec::with_capacity((1usize << k) - 1);
    for mask in 1u64..(1u64 << k) {
        for a in 0..k {
            pt[a] = if mask & (1 << a) != 0 { 0.0 } else { x[a] };
        }
        let v = trace(&pt);
        if !v.is_finite() {
            return Err(GuilleminError::MissingTrace);
        }
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        terms.push(sign * v);
    }
    Ok(compensated_sum(terms))
}

/// Hessian with rows and columns of the first `k` coordinates weighted by `√x_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledHessian {
    pub k: usize,
    pub matrix: Matrix,
}

impl ScaledHessian {
    /// From the full Hessian `D²F` at a point with `x_a > 0`.
    pub fn from_hessian(k: usize, x: &[f64], d2f: &Matrix) -> Result<Self, GuilleminError> {
        let n = x.len();
        let w: Vec<f64> = (0..n).map(|a| if a < k { sqrt(x[a]) } else { 1.0 }).collect();
        let mut m = Matrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let v = w[a] * w[b] * d2f[(a, b)];
                if !v.is_finite() {
                    return Err(GuilleminError::SingularEvaluation { row: a, col: b });
                }
                m[(a, b)] = v;
            }
        }
        Ok(Self { k, matrix: m })
    }

    /// For `F = Σ_{a<k} x_a ln x_a + G`, with `D²G` supplied; finite up to `x_a = 0`.
    pub fn from_split(k: usize, x: &[f64], d2g: &Matrix) -> Result<Self, GuilleminError> {
        let n = x.len();
        let w: Vec<f64> = (0..n).map(|a| if a < k { sqrt(x[a].max(0.0)) } else { 1.0 }).collect();
        let mut m = Matrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut v = w[a] * w[b] * d2g[(a, b)];
                if a == b && a < k {
                    v += 1.0;
                }
                if !v.is_finite() {
                    return Err(GuilleminError::SingularEvaluation { row: a, col: b });
                }
                m[(a, b)] = v;
            }
        }
        Ok(Self { k, matrix: m })
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.matrix)
    }
}

/// Density kinds as they appear in problem files.
#[derive(Clone, Debug, PartialEq)]
pub enum DensitySpec {
    Constant(f64),
    Polynomial(Vec<(Vec<u32>, f64)>),
    Guillemin,
    Perturbed { c: f64 },
}

impl DensitySpec {
    pub fn build(&self, p: &Polytope) -> Density {
        match self {
            DensitySpec::Constant(c) => Density::constant(*c),
            DensitySpec::Polynomial(t) => Density::polynomial(t.clone()),
            DensitySpec::Guillemin => Density::guillemin(p),
            DensitySpec::Perturbed { c } => Density::perturbed(p, *c),
        }
    }
}

/// Boxed scalar field, used for traces and test fields.
pub type Field = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{build_polytope, AffineFunctional};

    fn simplex2() -> Polytope {
        build_polytope(
            vec![
                AffineFunctional::new(vec![1.0, 0.0], 0.0),
                AffineFunctional::new(vec![0.0, 1.0], 0.0),
                AffineFunctional::new(vec![-1.0, -1.0], -1.0),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn potential_at_centroid() {
        let p = simplex2();
        let e = guillemin_potential(&p, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((e.value + ln(3.0)).abs() < 1e-15);
        assert!((e.hessian[(0, 0)] - 6.0).abs() < 1e-12);
        assert!((e.hessian[(0, 1)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn density_forms_agree() {
        let p = simplex2();
        let x = [0.2, 0.3];
        let a = guillemin_density_naive(p.facets(), &x);
        let b = guillemin_density_expanded(p.facets(), &x);
        assert!((a - 1.0).abs() < 1e-13 && (b - 1.0).abs() < 1e-13);
        assert!((guillemin_density(&p, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_with_density_two_is_off_by_one() {
        let sq = build_polytope(
            vec![
                AffineFunctional::new(vec![1.0, 0.0], 0.0),
                AffineFunctional::new(vec![-1.0, 0.0], -1.0),
                AffineFunctional::new(vec![0.0, 1.0], 0.0),
                AffineFunctional::new(vec![0.0, -1.0], -1.0),
            ],
            None,
        )
        .unwrap();
        for k in 0..4 {
            let r = check_vertex_compatibility(&sq, &Density::constant(2.0), k).unwrap();
            assert_eq!(r.residual, 1.0);
        }
    }

    #[test]
    fn scaled_hessian_of_split_example() {
        // F = x₁ ln x₁ + x₁x₂
        let x = [0.25, 0.3];
        let d2g = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let m = ScaledHessian::from_split(1, &x, &d2g).unwrap();
        assert_eq!(m.matrix[(0, 0)], 1.0);
        assert!((m.matrix[(0, 1)] - 0.5).abs() < 1e-15);
        assert_eq!(m.matrix[(1, 1)], 0.0);
    }

    #[test]
    fn finite_difference_derivatives() {
        let d = Density::polynomial(vec![(vec![3, 1], 1.0)]);
        let x = [0.7, 1.3];
        assert!((d.partial(&x, &[0]) - 3.0 * 0.49 * 1.3).abs() < 1e-9);
        assert!((d.partial(&x, &[0, 0]) - 6.0 * 0.7 * 1.3).abs() < 1e-7);
        assert!((d.partial(&x, &[0, 0, 0, 1]) - 6.0).abs() < 1e-2);
        assert!((d.partial(&x, &[0, 0, 1]) - 6.0 * 0.7).abs() < 1e-4);
    }
}
