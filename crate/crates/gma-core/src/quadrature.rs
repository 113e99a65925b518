//! Gauss–Legendre rules and an adaptive composite integrator.

use alloc::vec::Vec;

use crate::math::cos;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d.is_finite() {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + r * x);
        }
        s * r
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("integrand is not finite at t = {at}")]
    NonFinite { at: f64 },
    #[error("adaptive quadrature did not reach tolerance (estimate {estimate:e})")]
    NotConverged { estimate: f64 },
}

/// Adaptive composite rule: a 10-point and a 20-point Gauss–Legendre estimate are
/// compared on each panel, and panels that disagree are bisected.
#[derive(Clone, Debug)]
pub struct AdaptiveIntegrator {
    low: GaussLegendre,
    high: GaussLegendre,
    pub max_depth: usize,
    /// Bound on the number of accepted plus split subintervals.
    pub max_intervals: usize,
}

impl Default for AdaptiveIntegrator {
    fn default() -> Self {
        Self {
            low: GaussLegendre::new(10),
            high: GaussLegendre::new(20),
            max_depth: 48,
            max_intervals: 200_000,
        }
    }
}

impl AdaptiveIntegrator {
    /// Returns the integral and the accumulated error estimate.
    pub fn integrate(
        &self,
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<(f64, f64), QuadratureError> {
        if a == b {
            return Ok((0.0, 0.0));
        }
        let total = (b - a).abs();
        let mut stack: Vec<(f64, f64, usize)> = Vec::new();
        stack.push((a, b, 0));
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut unresolved = 0.0;
        let mut bad = None;
        let mut visited = 0usize;
        while let Some((lo, hi, depth)) = stack.pop() {
            visited += 1;
            let mut probe = |t: f64| {
                let v = f(t);
                if !v.is_finite() && bad.is_none() {
                    bad = Some(t);
                }
                v
            };
            let coarse = self.low.integrate(&mut probe, lo, hi);
            let fine = self.high.integrate(&mut probe, lo, hi);
            if let Some(at) = bad {
                return Err(QuadratureError::NonFinite { at });
            }
            let e = (fine - coarse).abs();
            let local_tol = tol * (hi - lo).abs() / total;
            if e <= local_tol || depth >= self.max_depth || visited >= self.max_intervals {
                if e > local_tol {
                    unresolved += e;
                }
                sum += fine;
                err += e;
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        if unresolved > tol {
            return Err(QuadratureError::NotConverged { estimate: err });
        }
        Ok((sum, err))
    }
}

/// Composite Simpson rule, used only as an independent cross-check.
pub fn simpson(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels.max(1) * 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}
