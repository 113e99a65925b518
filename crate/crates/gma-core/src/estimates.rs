//! Exact oracles, barrier verifiers and measured versions of the boundary estimates.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{GridChart, NodeClass};
use crate::guillemin::{guillemin_density_expanded, smooth_extension, Density, ScaledHessian};
use crate::linalg::{self, Matrix};
use crate::math::{ln, pow, powi, round, sqrt, xlnx};
use crate::polytope::{AffineFunctional, FaceChart, Polytope};
use crate::solver::{subsolution_margin, BarrierBounds, RegularizedSolution};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("point {x:?} has a non-positive singular coordinate")]
    OutsideQuadrant { x: Vec<f64> },
    #[error("no constant on the ladder verifies barrier `{barrier}`")]
    ConstantSearchFailed { barrier: String },
    #[error("no admissible nodes for estimator `{estimator}`")]
    NoAdmissibleNodes { estimator: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Matrix,
    /// `∏_{a≤k} x_a · det D²𝔲 − 1`.
    pub residual: f64,
}

/// `𝔲 = Σ_{a≤k} x_a ln x_a + ½|x''|²` with derivatives.
pub fn liouville_oracle(x: &[f64], k: usize) -> Result<LiouvilleEval, EstimateError> {
    if x[..k].iter().any(|&v| !(v > 0.0)) {
        return Err(EstimateError::OutsideQuadrant { x: x.to_vec() });
    }
    let n = x.len();
    let mut value = 0.0;
    let mut gradient = vec![0.0; n];
    let mut diag = vec![1.0; n];
    for a in 0..n {
        if a < k {
            value += xlnx(x[a]);
            gradient[a] = ln(x[a]) + 1.0;
            diag[a] = 1.0 / x[a];
        } else {
            value += 0.5 * x[a] * x[a];
            gradient[a] = x[a];
        }
    }
    let hessian = Matrix::diagonal(&diag);
    let prod: f64 = x[..k].iter().product();
    let residual = prod * linalg::det(&hessian) - 1.0;
    Ok(LiouvilleEval { value, gradient, hessian, residual })
}

/// Relative gap between `∏lᵢ · det D²u_G` and the boundary-stable expansion of `h_G`.
pub fn guillemin_oracle_residual(facets: &[AffineFunctional], x: &[f64]) -> f64 {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    let mut prod = 1.0;
    for f in facets {
        let l = f.eval(x);
        prod *= l;
        h.add_outer(1.0 / l, &f.normal, &f.normal);
    }
    let direct = prod * linalg::det(&h);
    let expanded = guillemin_density_expanded(facets, x);
    (direct - expanded).abs() / expanded.abs()
}

/// Outcome of re-evaluating a barrier construction at sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierCheck {
    pub id: &'static str,
    pub constants: Vec<(&'static str, f64)>,
    pub samples: usize,
    /// Min over samples of LHS − RHS of the differential inequality.
    pub differential_margin: f64,
    /// Min over boundary samples of the claimed comparison; `+∞` when there is none.
    pub boundary_margin: f64,
    /// Largest relative gap between closed-form and finite-difference Hessians.
    pub fd_discrepancy: f64,
}

impl BarrierCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.differential_margin >= -tol && self.boundary_margin >= -tol
    }
}

/// `ℋ = (∏lᵢ)^α` with gradient and Hessian.
pub fn power_barrier(facets: &[AffineFunctional], alpha: f64, x: &[f64]) -> (f64, Vec<f64>, Matrix) {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut s = Matrix::zeros(n, n);
    let mut prod = 1.0;
    for f in facets {
        let l = f.eval(x);
        prod *= l;
        for (gi, ni) in g.iter_mut().zip(&f.normal) {
            *gi += ni / l;
        }
        s.add_outer(1.0 / (l * l), &f.normal, &f.normal);
    }
    let hv = pow(prod, alpha);
    let grad: Vec<f64> = g.iter().map(|gi| alpha * hv * gi).collect();
    // D²ℋ = αℋ(α g gᵀ − S)
    let mut hess = s.scale(-alpha * hv);
    hess.add_outer(alpha * alpha * hv, &g, &g);
    (hv, grad, hess)
}

fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Matrix {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    let mut y = x.to_vec();
    for a in 0..n {
        for b in a..n {
            let mut acc = 0.0;
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                y.copy_from_slice(x);
                y[a] += sa * step;
                y[b] += sb * step;
                acc += w * f(&y);
            }
            let v = acc / (4.0 * step * step);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    h
}

fn relative_gap(a: &Matrix, b: &Matrix) -> f64 {
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    a.add(&b.scale(-1.0)).max_abs() / scale
}

/// Ladder `2^{-j}`, `j = 0..=40`: the largest value for which `pred` holds.
fn ladder_down(pred: impl Fn(f64) -> bool) -> Option<f64> {
    (0..=40).map(|j| pow(2.0, -(j as f64))).find(|&c| pred(c))
}

/// Concavity of `ℋ = (∏lᵢ)^α`: `det(−D²ℋ) ≥ C (∏lᵢ)^{nα−2}` with `C` taken from the
/// ladder, plus the comparison of the lower barrier with the boundary data and its
/// subsolution property.
pub fn verify_existence_barrier(
    p: &Polytope,
    density: &Density,
    boundary_u: &dyn Fn(&[f64]) -> f64,
    boundary_v: &dyn Fn(&[f64]) -> f64,
    alpha: f64,
    interior: &[Vec<f64>],
    boundary: &[Vec<f64>],
    seed: u64,
) -> Result<BarrierCheck, EstimateError> {
    let n = p.dim() as f64;
    let facets = p.facets();
    let ratios: Vec<(f64, f64)> = interior
        .iter()
        .map(|x| {
            let (_, _, h) = power_barrier(facets, alpha, x);
            let lhs = linalg::det(&h.scale(-1.0));
            let prod: f64 = facets.iter().map(|f| f.eval(x)).product();
            (lhs, pow(prod, n * alpha - 2.0))
        })
        .collect();
    let c = ladder_down(|c| ratios.iter().all(|(l, r)| *l >= c * r))
        .ok_or(EstimateError::ConstantSearchFailed { barrier: "existence".into() })?;
    let differential_margin = ratios.iter().map(|(l, r)| (l - c * r) / r).fold(f64::INFINITY, f64::min);
    let mut fd: f64 = 0.0;
    for x in interior.iter().take(20) {
        let (_, _, h) = power_barrier(facets, alpha, x);
        let dmin = facets.iter().map(|f| f.eval(x)).fold(f64::INFINITY, f64::min);
        let num = fd_hessian(&|y| power_barrier(facets, alpha, y).0, x, 1e-3 * dmin);
        fd = fd.max(relative_gap(&h, &num));
    }
    let bounds = BarrierBounds::new(p, density, boundary_v, alpha, seed)
        .map_err(|_| EstimateError::ConstantSearchFailed { barrier: "existence".into() })?;
    let boundary_margin = boundary.iter().map(|x| boundary_u(x) - bounds.lower(x)).fold(f64::INFINITY, f64::min);
    let sub = interior
        .iter()
        .map(|x| subsolution_margin(facets, density, alpha, bounds.a, x))
        .fold(f64::INFINITY, f64::min);
    Ok(BarrierCheck {
        id: "existence",
        constants: vec![("alpha", alpha), ("C", c), ("A", bounds.a), ("subsolution_margin", sub)],
        samples: interior.len(),
        differential_margin: differential_margin.min(sub),
        boundary_margin,
        fd_discrepancy: fd,
    })
}

/// `H = ε₀ φ(x'') + C₀ ε₀^{−(n−1)} x₁ ln x₁` against `det D²u = h/x₁` with
/// `φ = ½|x''|²`. Margin of `x₁ det D²H − h`; the boundary comparison is against the
/// model solution `x₁ ln x₁ + ½|x''|²`, which `H` equals when `ε₀ = C₀ = 1`.
pub fn verify_face_step_barrier(
    c0: f64,
    eps0: f64,
    h: &dyn Fn(&[f64]) -> f64,
    interior: &[Vec<f64>],
    boundary: &[Vec<f64>],
) -> BarrierCheck {
    let h_of = |x: &[f64]| -> f64 {
        let n = x.len();
        let t: f64 = x[1..].iter().map(|v| 0.5 * v * v).sum();
        eps0 * t + c0 * pow(eps0, -((n - 1) as f64)) * xlnx(x[0])
    };
    let hess = |x: &[f64]| -> Matrix {
        let n = x.len();
        let mut d = vec![eps0; n];
        d[0] = c0 * pow(eps0, -((n - 1) as f64)) / x[0];
        Matrix::diagonal(&d)
    };
    let differential_margin =
        interior.iter().map(|x| x[0] * linalg::det(&hess(x)) - h(x)).fold(f64::INFINITY, f64::min);
    let lambda = interior.iter().map(|x| h(x)).fold(0.0, f64::max);
    let mut fd: f64 = 0.0;
    for x in interior.iter().take(20) {
        fd = fd.max(relative_gap(&hess(x), &fd_hessian(&h_of, x, 1e-3 * x[0])));
    }
    let model = |x: &[f64]| xlnx(x[0]) + x[1..].iter().map(|v| 0.5 * v * v).sum::<f64>();
    let boundary_margin = boundary.iter().map(|x| model(x) - h_of(x)).fold(f64::INFINITY, f64::min);
    BarrierCheck {
        id: "face-step",
        constants: vec![("C0", c0), ("eps0", eps0), ("Lambda", lambda)],
        samples: interior.len(),
        differential_margin,
        boundary_margin,
        fd_discrepancy: fd,
    }
}

/// `G = (x₁⋯x_k)^{1/k}` and its Hessian.
pub fn geometric_mean(x: &[f64], k: usize) -> (f64, Matrix) {
    let n = x.len();
    let kk = k as f64;
    let g = pow(x[..k].iter().product::<f64>(), 1.0 / kk);
    let mut h = Matrix::zeros(n, n);
    for a in 0..k {
        for b in 0..k {
            h[(a, b)] = if a == b { g * (1.0 / (kk * kk) - 1.0 / kk) / (x[a] * x[a]) } else { g / (kk * kk * x[a] * x[b]) };
        }
    }
    (g, h)
}

/// `det(𝕄_H − B𝕄_G) ≥ det 𝕄_H − (B/C₀) tr 𝕄_G` for a perturbation `𝕄_H` of the
/// identity, with `C₀ = λ_max(𝕄_H)/det 𝕄_H` and every `B = 2^j`, `j = 0..=40`.
pub fn verify_concavity_bound(
    k: usize,
    points: &[Vec<f64>],
    perturbations: &[Matrix],
) -> Result<BarrierCheck, EstimateError> {
    let mut margin = f64::INFINITY;
    let mut fd: f64 = 0.0;
    for (x, e) in points.iter().zip(perturbations) {
        let n = x.len();
        let (_, hg) = geometric_mean(x, k);
        let mg = ScaledHessian::from_hessian(k, x, &hg)
            .map_err(|_| EstimateError::OutsideQuadrant { x: x.clone() })?
            .matrix;
        let mh = Matrix::identity(n).add(e);
        let eig = linalg::sym_eigenvalues(&mh);
        if eig[0] <= 0.0 {
            return Err(EstimateError::ConstantSearchFailed { barrier: "concavity".into() });
        }
        let det_h = linalg::det(&mh);
        let c0 = eig[n - 1] / det_h;
        for j in 0..=40 {
            let b = pow(2.0, j as f64);
            let lhs = linalg::det(&mh.add(&mg.scale(-b)));
            let rhs = det_h - b / c0 * mg.trace();
            margin = margin.min((lhs - rhs) / lhs.abs().max(1.0));
        }
        let dmin = x[..k].iter().cloned().fold(f64::INFINITY, f64::min);
        let num = fd_hessian(&|y| geometric_mean(y, k).0, x, 1e-3 * dmin);
        fd = fd.max(relative_gap(&hg, &num));
    }
    Ok(BarrierCheck {
        id: "concavity",
        constants: vec![("k", k as f64)],
        samples: points.len(),
        differential_margin: margin,
        boundary_margin: f64::INFINITY,
        fd_discrepancy: fd,
    })
}

/// Sup ratios of one estimator over a refinement sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub id: &'static str,
    pub ratios: Vec<f64>,
    /// Point achieving the sup on each level.
    pub argmax: Vec<Vec<f64>>,
    /// Largest relative increase between consecutive levels.
    pub growth: f64,
}

/// Allowed relative growth between refinement levels.
pub const TREND_THRESHOLD: f64 = 0.10;

impl EstimateReport {
    pub fn from_levels(id: &'static str, levels: Vec<(f64, Vec<f64>)>) -> Self {
        let ratios: Vec<f64> = levels.iter().map(|l| l.0).collect();
        let growth = ratios
            .windows(2)
            .map(|w| if w[1] <= w[0] { 0.0 } else if w[0] > 0.0 { w[1] / w[0] - 1.0 } else { f64::INFINITY })
            .fold(0.0, f64::max);
        Self { id, ratios, argmax: levels.into_iter().map(|l| l.1).collect(), growth }
    }

    /// Ratios below `floor` count as zero, so that roundoff does not read as growth.
    pub fn bounded(&self, floor: f64) -> bool {
        self.ratios.windows(2).all(|w| w[1] <= (1.0 + TREND_THRESHOLD) * w[0] + floor)
    }
}

/// Interior nodes whose lattice neighbours (including diagonals) are not on the outer boundary.
fn admissible(chart: &GridChart, k: usize) -> bool {
    if chart.class(k) == NodeClass::Outer {
        return false;
    }
    let d = chart.dim();
    let mut delta = vec![-1i32; d];
    loop {
        match chart.neighbor(k, &delta) {
            Some(j) if chart.class(j) == NodeClass::Outer => return false,
            None => return false,
            _ => {}
        }
        let mut a = 0;
        while a < d {
            delta[a] += 1;
            if delta[a] <= 1 {
                break;
            }
            delta[a] = -1;
            a += 1;
        }
        if a == d {
            return true;
        }
    }
}

fn sup_over<F: Fn(usize) -> Option<f64>>(chart: &GridChart, f: F) -> Option<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..chart.len() {
        if !admissible(chart, k) {
            continue;
        }
        if let Some(r) = f(k) {
            if best.as_ref().map_or(true, |b| r > b.0) {
                best = Some((r, chart.coord(k).to_vec()));
            }
        }
    }
    best
}

fn face_frame(face: &AffineFunctional) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let nn = sqrt(face.normal.iter().map(|v| v * v).sum());
    let e1: Vec<f64> = face.normal.iter().map(|v| v / nn).collect();
    let rest = linalg::orthonormal_complement(&[face.normal.clone()], face.dim());
    (e1, rest, nn)
}

fn in_region(region: Option<&FaceChart>, x: &[f64]) -> bool {
    region.map_or(true, |c| c.contains(x, 1e-12 * c.s))
}

/// `sup |v(x) − v(x₀)| / dist(x, face)` with `x₀` the orthogonal projection onto the face.
/// With `region` set, only nodes inside that face chart count.
pub fn estimate_lipschitz(
    levels: &[RegularizedSolution],
    face: &AffineFunctional,
    region: Option<&FaceChart>,
) -> Result<EstimateReport, EstimateError> {
    let (_, _, nn) = face_frame(face);
    let mut out = Vec::new();
    for sol in levels {
        let sup = sup_over(&sol.chart, |k| {
            let x = sol.chart.coord(k);
            if !in_region(region, x) {
                return None;
            }
            let l = face.eval(x);
            if l <= 1e-12 {
                return None;
            }
            let x0: Vec<f64> = x.iter().zip(&face.normal).map(|(xi, ni)| xi - l * ni / (nn * nn)).collect();
            Some((sol.v[k] - sol.interpolate_v(&x0)).abs() / (l / nn))
        })
        .ok_or(EstimateError::NoAdmissibleNodes { estimator: "lipschitz".into() })?;
        out.push(sup);
    }
    Ok(EstimateReport::from_levels("lipschitz", out))
}

/// Weighted Hessian in the frame (normal, tangential) of `face`.
pub fn weighted_hessian(h: &Matrix, face: &AffineFunctional, x: &[f64]) -> f64 {
    let (e1, rest, nn) = face_frame(face);
    let mut frame = vec![e1];
    frame.extend(rest);
    let q = Matrix::from_columns(&frame);
    let hf = q.transpose().mul(h).mul(&q);
    let x1 = face.eval(x) / nn;
    let n = x.len();
    let mut s = x1 * hf[(0, 0)].abs();
    for i in 1..n {
        s += sqrt(x1) * hf[(0, i)].abs();
        for j in 1..n {
            s += hf[(i, j)].abs();
        }
    }
    s
}

pub fn estimate_weighted_hessian(
    levels: &[RegularizedSolution],
    face: &AffineFunctional,
    region: Option<&FaceChart>,
) -> Result<EstimateReport, EstimateError> {
    let mut out = Vec::new();
    for sol in levels {
        let sup = sup_over(&sol.chart, |k| {
            let x = sol.chart.coord(k);
            if !in_region(region, x) {
                return None;
            }
            sol.hessian_v(k).map(|h| weighted_hessian(&h, face, x))
        })
            .ok_or(EstimateError::NoAdmissibleNodes { estimator: "weighted-hessian".into() })?;
        out.push(sup);
    }
    Ok(EstimateReport::from_levels("weighted-hessian", out))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceAsymptotics {
    pub root_product: EstimateReport,
    pub quadratic: EstimateReport,
    pub full_product: EstimateReport,
    /// Whether `ratio(full) · s^{k−1} ≥ ratio(root)` and `ratio(full) · s^{k−2} ≥ ratio(quadratic)`
    /// hold on every level, `s` the chart side.
    pub cross_check: bool,
}

/// `v − F` against the three product weights on a box chart whose first `k` axes are
/// the singular directions `x_a ≥ 0`.
pub fn estimate_face_asymptotics(levels: &[RegularizedSolution], k: usize) -> Result<FaceAsymptotics, EstimateError> {
    let mut root = Vec::new();
    let mut quad = Vec::new();
    let mut full = Vec::new();
    let mut cross = true;
    for sol in levels {
        let chart = &sol.chart;
        let lookup = |x: &[f64]| -> f64 {
            let xi: Vec<i32> = chart.lattice_coords(x).iter().map(|v| round(*v) as i32).collect();
            chart.index_of(&xi).map_or(f64::NAN, |j| sol.v[j])
        };
        let defect = |j: usize| -> Option<(f64, Vec<f64>)> {
            let x = chart.coord(j);
            if x[..k].iter().any(|&v| v <= 0.0) {
                return None;
            }
            let f = smooth_extension(k, &lookup, x).ok()?;
            Some(((sol.v[j] - f).abs(), x.to_vec()))
        };
        let weights = |x: &[f64]| -> (f64, f64, f64) {
            let prod: f64 = x[..k].iter().product();
            let mut q = 0.0;
            for a in 0..k {
                for b in a + 1..k {
                    q += x[a] * x[b];
                }
            }
            (pow(prod, 1.0 / k as f64), q, prod)
        };
        let r1 = sup_over(chart, |j| defect(j).map(|(d, x)| d / weights(&x).0));
        let r2 = sup_over(chart, |j| defect(j).map(|(d, x)| d / weights(&x).1));
        let r3 = sup_over(chart, |j| defect(j).map(|(d, x)| d / weights(&x).2));
        let (r1, r2, r3) = match (r1, r2, r3) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(EstimateError::NoAdmissibleNodes { estimator: "face-asymptotics".into() }),
        };
        let side = (0..k)
            .map(|a| (0..chart.len()).map(|j| chart.coord(j)[a]).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let slack = 1e-12 * (1.0 + r3.0);
        cross &= r3.0 * powi(side, k as i32 - 1) + slack >= r1.0;
        cross &= r3.0 * powi(side, k as i32 - 2) + slack >= r2.0;
        root.push(r1);
        quad.push(r2);
        full.push(r3);
    }
    Ok(FaceAsymptotics {
        root_product: EstimateReport::from_levels("root-product", root),
        quadratic: EstimateReport::from_levels("quadratic", quad),
        full_product: EstimateReport::from_levels("full-product", full),
        cross_check: cross,
    })
}

/// Sup over `points` of `|v − F|/∏x_a` for a closed-form `v`, and the same for
/// `v_λ(y) = v(λy', √λ y'')/λ` at the rescaled points. Returns `(original, rescaled)`;
/// the second equals `λ^{k−1}` times the first.
pub fn product_ratio_under_scaling(
    v: &dyn Fn(&[f64]) -> f64,
    k: usize,
    lambda: f64,
    points: &[Vec<f64>],
) -> (f64, f64) {
    let ratio = |f: &dyn Fn(&[f64]) -> f64, x: &[f64]| -> f64 {
        let ext = smooth_extension(k, f, x).unwrap_or(f64::NAN);
        (f(x) - ext).abs() / x[..k].iter().product::<f64>()
    };
    let sl = sqrt(lambda);
    let scaled = |y: &[f64]| -> f64 {
        let x: Vec<f64> = y.iter().enumerate().map(|(a, v)| if a < k { lambda * v } else { sl * v }).collect();
        v(&x) / lambda
    };
    let mut orig: f64 = 0.0;
    let mut resc: f64 = 0.0;
    for x in points {
        let y: Vec<f64> = x.iter().enumerate().map(|(a, v)| if a < k { v / lambda } else { v / sl }).collect();
        orig = orig.max(ratio(v, x));
        resc = resc.max(ratio(&scaled, &y));
    }
    (orig, resc)
}

/// Result of instantiating one calculus inequality on one test field.
#[derive(Clone, Debug, PartialEq)]
pub struct AppendixCheck {
    pub id: String,
    pub constant: f64,
    /// Largest observed `LHS / RHS`; the inequality holds when this is ≤ 1.
    pub worst_ratio: f64,
}

impl AppendixCheck {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

/// `|f(x)| ≤ C·M·∏_{a≤k} x_a` with `M ≥ sup|∂₁⋯∂_k f|`, for `f` vanishing on every `{x_a = 0}`.
pub fn product_bound_check(id: &str, f: &dyn Fn(&[f64]) -> f64, m: f64, k: usize, points: &[Vec<f64>]) -> AppendixCheck {
    let c = 1.0;
    let worst = points
        .iter()
        .filter(|x| x[..k].iter().all(|&v| v > 0.0))
        .map(|x| f(x).abs() / (c * m * x[..k].iter().product::<f64>()))
        .fold(0.0, f64::max);
    AppendixCheck { id: id.into(), constant: c, worst_ratio: worst }
}

/// Constant of the growth-to-Hölder bound.
pub const HOLDER_CONSTANT: f64 = 8.0;

/// Finite-difference Hölder seminorm estimate over `pairs`, compared against `8M`.
pub fn holder_check(id: &str, f: &dyn Fn(&[f64]) -> f64, delta: f64, m: f64, pairs: &[(Vec<f64>, Vec<f64>)]) -> AppendixCheck {
    let worst = pairs
        .iter()
        .filter_map(|(x, y)| {
            let d = sqrt(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum());
            (d > 0.0).then(|| (f(x) - f(y)).abs() / pow(d, delta))
        })
        .fold(0.0, f64::max);
    AppendixCheck { id: id.into(), constant: HOLDER_CONSTANT, worst_ratio: worst / (HOLDER_CONSTANT * m) }
}

/// Constant of `ε^l A_l ≤ C(k)(A₀ + ε^k A_k)` from the induction:
/// `C(2) = 5/2` from `A₁ ≤ 5√(A₀A₂)`, then `C(m+1) = 36 C(m)²`.
pub fn interpolation_recursion(k: usize) -> f64 {
    let mut c = 2.5;
    for _ in 2..k {
        c = 36.0 * c * c;
    }
    c
}

/// Constant of `‖D^α f‖ ≤ K A^{1−|α|/k} B^{|α|/k}`: taking `ε = (A/B)^{1/k}` gives `K = 2C(k)`.
pub fn interpolation_constant(k: usize) -> f64 {
    2.0 * interpolation_recursion(k)
}

/// `sups[l]` = sampled sup of `|D^α f|` over `|α| = l`, `l = 0..=k`.
pub fn interpolation_check(id: &str, sups: &[f64]) -> AppendixCheck {
    let k = sups.len() - 1;
    let a = sups[0];
    let b = sups.iter().cloned().fold(0.0, f64::max);
    let c = interpolation_constant(k);
    let worst = sups
        .iter()
        .enumerate()
        .map(|(l, s)| s / (c * pow(a, 1.0 - l as f64 / k as f64) * pow(b, l as f64 / k as f64)))
        .fold(0.0, f64::max);
    AppendixCheck { id: id.into(), constant: c, worst_ratio: worst }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn liouville_unit_point() {
        let e = liouville_oracle(&[1.0, 1.0], 2).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.hessian, Matrix::identity(2));
        assert_eq!(e.residual, 0.0);
        let e = liouville_oracle(&[0.5, 0.25, 0.7], 2).unwrap();
        assert!((linalg::det(&e.hessian) - 8.0).abs() < 1e-14);
        assert!(e.residual.abs() < 1e-15);
        assert!(liouville_oracle(&[0.0, 1.0], 1).is_err());
    }

    #[test]
    fn recursion_constants() {
        assert_eq!(interpolation_recursion(2), 2.5);
        assert_eq!(interpolation_recursion(3), 225.0);
        assert_eq!(interpolation_constant(2), 5.0);
    }

    #[test]
    fn face_step_equality_case() {
        let pts: Vec<Vec<f64>> = (1..10).map(|i| vec![0.1 * i as f64, 0.3 - 0.05 * i as f64]).collect();
        let c = verify_face_step_barrier(1.0, 1.0, &|_| 1.0, &pts, &pts);
        assert!(c.differential_margin.abs() < 1e-14);
        assert!(c.boundary_margin.abs() < 1e-15);
    }

    #[test]
    fn geometric_mean_hessian_matches_differences() {
        let x = [0.3, 0.6, 0.1];
        let (_, h) = geometric_mean(&x, 2);
        let num = fd_hessian(&|y| geometric_mean(y, 2).0, &x, 1e-4);
        assert!(relative_gap(&h, &num) < 1e-6);
    }
}
