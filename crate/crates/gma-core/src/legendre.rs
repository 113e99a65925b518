//! Half-space model `det D²u = h/x₁` with `u = x₁ ln x₁ + v`: the partial Legendre
//! transform in `x''`, and the even `z₁ = 2√x₁` reformulation.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{GridChart, GridError};
use crate::guillemin::{Density, PotentialEval};
use crate::linalg::{self, BandMatrix, Matrix};
use crate::math::{dot, pow, sqrt, xlnx};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LegendreError {
    #[error("transversal Hessian degenerates at {at:?} (min eigenvalue {min_eigenvalue:e})")]
    DegenerateTransversalHessian { at: Vec<f64>, min_eigenvalue: f64 },
    #[error("could not invert the transversal gradient at {y:?}")]
    InversionFailed { y: Vec<f64> },
    #[error("not enough samples around node {node}")]
    InsufficientSamples { node: usize },
    #[error("z-form operator not elliptic at {} node(s)", nodes.len())]
    NonEllipticIterate { nodes: Vec<usize> },
    #[error("Newton iteration stopped at residual {residual:e}")]
    NonConvergence { residual: f64 },
    #[error("Newton matrix is singular at column {column}")]
    SingularJacobian { column: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A potential `u` given pointwise with derivatives, transformed in the last `n − 1`
/// coordinates: `y = (x₁, D_{x''}u)`, `u* = x''·D_{x''}u − u`.
pub struct PartialLegendrePair<'a> {
    potential: &'a dyn Fn(&[f64]) -> PotentialEval,
    /// Lower bound required of `D²_{x''}u`.
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LegendrePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `u*(y)`.
    pub value: f64,
    /// `∇u*(y) = (−u_{x₁}(x), x'')`.
    pub gradient: Vec<f64>,
}

fn tangential_hessian(h: &Matrix) -> Matrix {
    let n = h.rows();
    let mut t = Matrix::zeros(n - 1, n - 1);
    for i in 1..n {
        for j in 1..n {
            t[(i - 1, j - 1)] = h[(i, j)];
        }
    }
    t
}

impl<'a> PartialLegendrePair<'a> {
    pub fn new(potential: &'a dyn Fn(&[f64]) -> PotentialEval, c0: f64) -> Self {
        Self { potential, c0 }
    }

    pub fn forward(&self, x: &[f64]) -> Result<LegendrePoint, LegendreError> {
        let e = (self.potential)(x);
        let min_eigenvalue = linalg::min_eigenvalue(&tangential_hessian(&e.hessian));
        if !(min_eigenvalue >= self.c0) {
            return Err(LegendreError::DegenerateTransversalHessian { at: x.to_vec(), min_eigenvalue });
        }
        let mut y = e.gradient.clone();
        y[0] = x[0];
        let value = dot(&x[1..], &e.gradient[1..]) - e.value;
        let mut gradient = x.to_vec();
        gradient[0] = -e.gradient[0];
        Ok(LegendrePoint { x: x.to_vec(), y, value, gradient })
    }

    /// Evaluates `u*` at `y` by solving `D_{x''}u(y₁, x'') = y''` with Newton's method from `guess`.
    pub fn dual(&self, y: &[f64], guess: &[f64]) -> Result<LegendrePoint, LegendreError> {
        let mut x = vec![y[0]];
        x.extend_from_slice(guess);
        for _ in 0..100 {
            let e = (self.potential)(&x);
            let r: Vec<f64> = (1..x.len()).map(|i| e.gradient[i] - y[i]).collect();
            let rn = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = 1.0 + y[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if rn <= 1e-15 * scale {
                return self.forward(&x);
            }
            let t = tangential_hessian(&e.hessian);
            let d = linalg::solve(&t, &r).ok_or(LegendreError::InversionFailed { y: y.to_vec() })?;
            for (xi, di) in x[1..].iter_mut().zip(&d) {
                *xi -= di;
            }
            if d.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-16 * scale {
                return self.forward(&x);
            }
        }
        Err(LegendreError::InversionFailed { y: y.to_vec() })
    }

    /// Transforms back through `u*` at the image of `x`, starting the inversion from
    /// `guess`, and returns `max(|x̂ − x|, |(u*)*(x̂) − u(x)|)`.
    pub fn involution_error(&self, x: &[f64], guess: &[f64]) -> Result<f64, LegendreError> {
        let fwd = self.forward(x)?;
        let d = self.dual(&fwd.y, guess)?;
        // (u*)* at x̂ = (y₁, D_{y''}u*)
        let xhat: Vec<f64> = core::iter::once(fwd.y[0]).chain(d.gradient[1..].iter().copied()).collect();
        let back = dot(&fwd.y[1..], &d.gradient[1..]) - d.value;
        let u = (self.potential)(x).value;
        let dx = xhat.iter().zip(x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Ok(dx.max((back - u).abs()))
    }
}

/// Regular part data at a point: `v`, its `x''` gradient and optionally its `x''` Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalSample {
    pub x: Vec<f64>,
    pub v: f64,
    pub grad: Vec<f64>,
    pub hess: Option<Matrix>,
}

/// `v* = u* + y₁ ln y₁ = x''·D_{x''}v − v` resampled onto a box in `y`.
#[derive(Clone, Debug)]
pub struct LegendreGrid {
    pub chart: GridChart,
    pub vstar: Vec<f64>,
    pub gradient: Vec<Vec<f64>>,
    pub hessian: Vec<Matrix>,
    /// Scattered `(y, v*)` pairs the grid was fitted to.
    pub samples: Vec<(Vec<f64>, f64)>,
}

fn monomials(d: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; d]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &out {
            for a in 0..d {
                let mut e = m.clone();
                e[a] += 1;
                if !next.contains(&e) && !out.contains(&e) {
                    next.push(e);
                }
            }
        }
        out.extend(next);
    }
    out.sort_by_key(|m| m.iter().sum::<u32>());
    out
}

/// Maps scattered samples through the transform and fits `v*` at the nodes of
/// `[lo, hi]` (`n` subdivisions per axis) by local cubic least squares.
pub fn legendre_forward(
    samples: &[TransversalSample],
    c0: f64,
    lo: &[f64],
    hi: &[f64],
    n: usize,
) -> Result<LegendreGrid, LegendreError> {
    let mut pts = Vec::with_capacity(samples.len());
    for s in samples {
        if let Some(h) = &s.hess {
            let min_eigenvalue = linalg::min_eigenvalue(h);
            if !(min_eigenvalue >= c0) {
                return Err(LegendreError::DegenerateTransversalHessian { at: s.x.clone(), min_eigenvalue });
            }
        }
        let mut y = vec![s.x[0]];
        y.extend_from_slice(&s.grad);
        pts.push((y, dot(&s.x[1..], &s.grad) - s.v));
    }
    let d = lo.len();
    let chart = GridChart::model_box(lo, hi, n, &vec![false; d])?;
    let mons = monomials(d, 3);
    let m = mons.len();
    let k_near = 4 * m;
    if pts.len() < k_near {
        return Err(LegendreError::InsufficientSamples { node: 0 });
    }
    let mut vstar = Vec::with_capacity(chart.len());
    let mut gradient = Vec::with_capacity(chart.len());
    let mut hessian = Vec::with_capacity(chart.len());
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(pts.len());
    for node in 0..chart.len() {
        let y0 = chart.coord(node);
        dist.clear();
        dist.extend(pts.iter().enumerate().map(|(i, (y, _))| {
            (y.iter().zip(y0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i)
        }));
        dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        // the transform shears the sample lattice, so a small neighbourhood can lie on
        // too few lines to determine a cubic; widen it until the fit has full rank
        let mut k_use = k_near;
        let (coef, r) = loop {
            let near = &dist[..k_use];
            let r = sqrt(near[k_use - 1].0).max(f64::MIN_POSITIVE);
            let mut a = Matrix::zeros(k_use, m);
            let mut b = vec![0.0; k_use];
            for (row, &(_, i)) in near.iter().enumerate() {
                let z: Vec<f64> = pts[i].0.iter().zip(y0).map(|(p, q)| (p - q) / r).collect();
                for (c, e) in mons.iter().enumerate() {
                    a[(row, c)] = e.iter().zip(&z).map(|(&p, &zi)| crate::math::powi(zi, p as i32)).product();
                }
                b[row] = pts[i].1;
            }
            if let Some(coef) = linalg::least_squares(&a, &b, 1e-2) {
                break (coef, r);
            }
            if k_use == pts.len() {
                return Err(LegendreError::InsufficientSamples { node });
            }
            k_use = (k_use + m).min(pts.len());
        };
        let mut g = vec![0.0; d];
        let mut h = Matrix::zeros(d, d);
        for (c, e) in mons.iter().enumerate() {
            let deg: u32 = e.iter().sum();
            if deg == 1 {
                let axis = e.iter().position(|&p| p == 1).unwrap_or(0);
                g[axis] = coef[c] / r;
            } else if deg == 2 {
                let axes: Vec<usize> = (0..d).filter(|&i| e[i] > 0).collect();
                if axes.len() == 1 {
                    h[(axes[0], axes[0])] = 2.0 * coef[c] / (r * r);
                } else {
                    h[(axes[0], axes[1])] = coef[c] / (r * r);
                    h[(axes[1], axes[0])] = coef[c] / (r * r);
                }
            }
        }
        vstar.push(coef[0]);
        gradient.push(g);
        hessian.push(h);
    }
    Ok(LegendreGrid { chart, vstar, gradient, hessian, samples: pts })
}

impl LegendreGrid {
    /// Residual of `y₁u*₁₁ + h(y₁, D_{y''}u*) det D²_{y''}u* = 0` at every node,
    /// written through `v*` so that it stays finite at `y₁ = 0`.
    pub fn residual(&self, h: &Density) -> Vec<f64> {
        (0..self.chart.len())
            .map(|k| {
                let y = self.chart.coord(k);
                let mut x = vec![y[0]];
                x.extend_from_slice(&self.gradient[k][1..]);
                let t = tangential_hessian(&self.hessian[k]);
                y[0] * self.hessian[k][(0, 0)] - 1.0 + h.eval(&x) * linalg::det(&t)
            })
            .collect()
    }

    /// Nodes on `y₁ = 0` where `h(0, D_{y''}u*) det D²_{y''}u* = 1` fails by more than `tol`.
    pub fn boundary_relation_violations(&self, h: &Density, tol: f64) -> Vec<(usize, f64)> {
        (0..self.chart.len())
            .filter(|&k| self.chart.node(k)[0] == 0)
            .filter_map(|k| {
                let mut x = vec![0.0];
                x.extend_from_slice(&self.gradient[k][1..]);
                let r = h.eval(&x) * linalg::det(&tangential_hessian(&self.hessian[k])) - 1.0;
                (r.abs() > tol).then_some((k, r))
            })
            .collect()
    }

    /// `u* = v* − y₁ ln y₁` at node `k`.
    pub fn ustar(&self, k: usize) -> f64 {
        self.vstar[k] - xlnx(self.chart.coord(k)[0])
    }
}

/// Half-space model on `[0, x1_max] × [lo'', hi'']`: `v` prescribed on the outer
/// sides; the trace on `x₁ = 0` is part of the solution.
pub struct ZModelProblem<'a> {
    pub density: &'a Density,
    /// `v` as a function of `x`; used on the outer sides and, without `initial`, as the initial guess.
    pub trace: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub initial: Option<&'a (dyn Fn(&[f64]) -> f64 + Sync)>,
    pub x1_max: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZOptions {
    pub subdivisions: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for ZOptions {
    fn default() -> Self {
        Self { subdivisions: 32, tol: 1e-12, max_iter: 50, max_halvings: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ZReport {
    pub iterations: usize,
    pub residual_max: Vec<f64>,
    /// Smallest `𝔳_{z₁z₁} − 𝔳_{z₁}/z₁ + 1` over the unknowns, per accepted iterate.
    pub min_first_entry: Vec<f64>,
    pub damping: Vec<f64>,
}

/// Solution `𝔳(z₁, z'') = v(z₁²/4, z'')` on `z₁ ≥ 0`.
#[derive(Clone, Debug)]
pub struct ZSolution {
    pub chart: GridChart,
    pub values: Vec<f64>,
    unknown: Vec<bool>,
}

struct Entry {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

struct ZStencil {
    center: usize,
    /// Upper triangle of `M`, row-major.
    entries: Vec<Entry>,
    x: Vec<f64>,
}

fn z_stencils(chart: &GridChart, unknown: &[bool]) -> Vec<ZStencil> {
    let d = chart.dim();
    let steps: Vec<f64> = (0..d).map(|a| chart.jacobian()[(a, a)]).collect();
    let nb = |k: usize, delta: &[i32]| -> usize {
        // reflect across z₁ = 0
        let node = chart.node(k);
        let mut xi: Vec<i32> = node.iter().zip(delta).map(|(a, b)| a + b).collect();
        xi[0] = xi[0].abs();
        chart.index_of(&xi).expect("stencil neighbour inside the box")
    };
    let mut out = Vec::new();
    for k in 0..chart.len() {
        if !unknown[k] {
            continue;
        }
        let z = chart.coord(k);
        let at_axis = chart.node(k)[0] == 0;
        let mut entries = Vec::new();
        for a in 0..d {
            for b in a..d {
                let mut e = Entry { constant: 0.0, terms: Vec::new() };
                if a == b {
                    let mut dp = vec![0i32; d];
                    dp[a] = 1;
                    let mut dm = vec![0i32; d];
                    dm[a] = -1;
                    let h2 = steps[a] * steps[a];
                    if a == 0 && at_axis {
                        e.constant = 1.0;
                    } else {
                        e.terms.push((nb(k, &dp), 1.0 / h2));
                        e.terms.push((k, -2.0 / h2));
                        e.terms.push((nb(k, &dm), 1.0 / h2));
                        if a == 0 {
                            e.constant = 1.0;
                            let c = 1.0 / (2.0 * steps[0] * z[0]);
                            e.terms.push((nb(k, &dp), -c));
                            e.terms.push((nb(k, &dm), c));
                        }
                    }
                } else if !(a == 0 && at_axis) {
                    let c = 1.0 / (4.0 * steps[a] * steps[b]);
                    for (sa, sb, s) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                        let mut dl = vec![0i32; d];
                        dl[a] = sa;
                        dl[b] = sb;
                        e.terms.push((nb(k, &dl), s * c));
                    }
                }
                entries.push(e);
            }
        }
        let mut x = z.to_vec();
        x[0] = z[0] * z[0] / 4.0;
        out.push(ZStencil { center: k, entries, x });
    }
    out
}

fn z_matrix(st: &ZStencil, v: &[f64], d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    let mut idx = 0;
    for a in 0..d {
        for b in a..d {
            let e = &st.entries[idx];
            let val = e.constant + e.terms.iter().map(|&(j, c)| c * v[j]).sum::<f64>();
            m[(a, b)] = val;
            m[(b, a)] = val;
            idx += 1;
        }
    }
    m
}

struct ZAssembly {
    stencils: Vec<ZStencil>,
    rhs: Vec<f64>,
    col: Vec<Option<usize>>,
    d: usize,
}

impl ZAssembly {
    /// `det(M)^{1/n} − h^{1/n}` per unknown, plus the smallest first diagonal entry.
    fn residual(&self, v: &[f64]) -> Result<(Vec<f64>, f64), Vec<usize>> {
        let mut bad = Vec::new();
        let mut r = Vec::with_capacity(self.stencils.len());
        let mut min11 = f64::INFINITY;
        let inv_n = 1.0 / self.d as f64;
        for (st, h) in self.stencils.iter().zip(&self.rhs) {
            let m = z_matrix(st, v, self.d);
            min11 = min11.min(m[(0, 0)]);
            if linalg::cholesky(&m).is_none() {
                bad.push(st.center);
                continue;
            }
            r.push(pow(linalg::det(&m), inv_n) - h);
        }
        if bad.is_empty() {
            Ok((r, min11))
        } else {
            Err(bad)
        }
    }

    fn newton_step(&self, v: &[f64], r: &[f64]) -> Result<Vec<f64>, LegendreError> {
        let m_unknown = self.stencils.len();
        let mut kl = 0usize;
        let mut ku = 0usize;
        for (row, st) in self.stencils.iter().enumerate() {
            for e in &st.entries {
                for &(j, _) in &e.terms {
                    if let Some(c) = self.col[j] {
                        if c > row {
                            ku = ku.max(c - row);
                        } else {
                            kl = kl.max(row - c);
                        }
                    }
                }
            }
        }
        let mut jac = BandMatrix::new(m_unknown, kl, ku);
        let inv_n = 1.0 / self.d as f64;
        for (row, st) in self.stencils.iter().enumerate() {
            let m = z_matrix(st, v, self.d);
            let det = linalg::det(&m);
            let minv = linalg::inverse(&m).ok_or(LegendreError::SingularJacobian { column: row })?;
            let scale = inv_n * pow(det, inv_n);
            let mut idx = 0;
            for a in 0..self.d {
                for b in a..self.d {
                    let w = if a == b { minv[(a, a)] } else { 2.0 * minv[(a, b)] };
                    for &(j, c) in &st.entries[idx].terms {
                        if let Some(col) = self.col[j] {
                            jac.add(row, col, scale * w * c);
                        }
                    }
                    idx += 1;
                }
            }
        }
        let mut rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        jac.solve_in_place(&mut rhs).map_err(|e| LegendreError::SingularJacobian { column: e.column })?;
        Ok(rhs)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Newton solve of `det M(𝔳) = h(z₁²/4, z'')` on `z₁ ≥ 0` with the even reflection at
/// `z₁ = 0`, globalized on the concave form `det(M)^{1/n}`.
pub fn model_solve_z(problem: &ZModelProblem<'_>, opts: &ZOptions) -> Result<(ZSolution, ZReport), LegendreError> {
    let d = problem.lo.len() + 1;
    let mut lo = vec![0.0];
    lo.extend_from_slice(&problem.lo);
    let mut hi = vec![2.0 * sqrt(problem.x1_max)];
    hi.extend_from_slice(&problem.hi);
    let mut low = vec![false; d];
    low[0] = true;
    let chart = GridChart::model_box(&lo, &hi, opts.subdivisions, &low)?;
    let n = opts.subdivisions as i32;
    let unknown: Vec<bool> = (0..chart.len())
        .map(|k| {
            let xi = chart.node(k);
            xi[0] < n && xi[1..].iter().all(|&i| i > 0 && i < n)
        })
        .collect();
    let stencils = z_stencils(&chart, &unknown);
    let inv_n = 1.0 / d as f64;
    let rhs: Vec<f64> = stencils.iter().map(|st| pow(problem.density.eval(&st.x), inv_n)).collect();
    let mut col = vec![None; chart.len()];
    for (i, st) in stencils.iter().enumerate() {
        col[st.center] = Some(i);
    }
    let asm = ZAssembly { stencils, rhs, col, d };
    let mut v: Vec<f64> = (0..chart.len())
        .map(|k| {
            let z = chart.coord(k);
            let mut x = z.to_vec();
            x[0] = z[0] * z[0] / 4.0;
            match problem.initial {
                Some(f) if unknown[k] => f(&x),
                _ => (problem.trace)(&x),
            }
        })
        .collect();
    let mut report = ZReport::default();
    let (mut r, min11) = asm.residual(&v).map_err(|nodes| LegendreError::NonEllipticIterate { nodes })?;
    let mut rmax = max_abs(&r);
    report.residual_max.push(rmax);
    report.min_first_entry.push(min11);
    while rmax > opts.tol {
        if report.iterations >= opts.max_iter {
            return Err(LegendreError::NonConvergence { residual: rmax });
        }
        let dv = asm.newton_step(&v, &r)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = v.clone();
            for (st, di) in asm.stencils.iter().zip(&dv) {
                trial[st.center] += t * di;
            }
            if let Ok((rt, m11)) = asm.residual(&trial) {
                let tmax = max_abs(&rt);
                if tmax <= (1.0 - 1e-4 * t) * rmax {
                    accepted = Some((trial, rt, tmax, m11));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, rt, tmax, m11)) => {
                v = trial;
                r = rt;
                rmax = tmax;
                report.iterations += 1;
                report.residual_max.push(rmax);
                report.min_first_entry.push(m11);
                report.damping.push(t);
            }
            None if rmax <= 1e3 * opts.tol => break,
            None => return Err(LegendreError::NonConvergence { residual: rmax }),
        }
    }
    Ok((ZSolution { chart, values: v, unknown }, report))
}

impl ZSolution {
    /// `v(x) = 𝔳(2√x₁, x'')` by multilinear interpolation in `z`.
    pub fn v_at(&self, x: &[f64]) -> f64 {
        let mut z = x.to_vec();
        z[0] = 2.0 * sqrt(x[0].max(0.0));
        self.chart.interpolate(&self.values, &z)
    }

    /// Largest one-sided `|𝔳_{z₁}|` on the axis nodes; zero up to truncation error
    /// when the even extension is consistent.
    pub fn axis_slope(&self) -> f64 {
        let h = self.chart.jacobian()[(0, 0)];
        let mut worst = 0.0f64;
        for k in 0..self.chart.len() {
            if self.chart.node(k)[0] != 0 || !self.unknown[k] {
                continue;
            }
            let mut d = vec![0i32; self.chart.dim()];
            d[0] = 1;
            let k1 = self.chart.neighbor(k, &d);
            d[0] = 2;
            let k2 = self.chart.neighbor(k, &d);
            if let (Some(k1), Some(k2)) = (k1, k2) {
                let s = (-3.0 * self.values[k] + 4.0 * self.values[k1] - self.values[k2]) / (2.0 * h);
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// Nodes with all `z''` neighbours available, mapped to `x` with central
    /// differences for the `x''` gradient and Hessian.
    pub fn samples(&self) -> Vec<TransversalSample> {
        let d = self.chart.dim();
        let steps: Vec<f64> = (0..d).map(|a| self.chart.jacobian()[(a, a)]).collect();
        let n = self.chart.subdivisions() as i32;
        let mut out = Vec::new();
        for k in 0..self.chart.len() {
            let xi = self.chart.node(k);
            if xi[1..].iter().any(|&i| i == 0 || i == n) {
                continue;
            }
            let at = |delta: &[i32]| -> f64 {
                let idx: Vec<i32> = xi.iter().zip(delta).map(|(a, b)| a + b).collect();
                self.values[self.chart.index_of(&idx).expect("interior tangential neighbour")]
            };
            let mut grad = vec![0.0; d - 1];
            let mut hess = Matrix::zeros(d - 1, d - 1);
            for a in 1..d {
                let mut dp = vec![0i32; d];
                dp[a] = 1;
                let mut dm = vec![0i32; d];
                dm[a] = -1;
                grad[a - 1] = (at(&dp) - at(&dm)) / (2.0 * steps[a]);
                hess[(a - 1, a - 1)] = (at(&dp) - 2.0 * self.values[k] + at(&dm)) / (steps[a] * steps[a]);
                for b in a + 1..d {
                    let mut s = 0.0;
                    for (sa, sb, w) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                        let mut dl = vec![0i32; d];
                        dl[a] = sa;
                        dl[b] = sb;
                        s += w * at(&dl);
                    }
                    let v = s / (4.0 * steps[a] * steps[b]);
                    hess[(a - 1, b - 1)] = v;
                    hess[(b - 1, a - 1)] = v;
                }
            }
            let z = self.chart.coord(k);
            let mut x = z.to_vec();
            x[0] = z[0] * z[0] / 4.0;
            out.push(TransversalSample { x, v: self.values[k], grad, hess: Some(hess) });
        }
        out
    }
}
