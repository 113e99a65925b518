//! Verification suites. Each check is a job on the thread pool; the ledger keeps job order.

use gma_core::boundary::{build_boundary_data, newton_solve, solve_edge, GridFaceSolver, GuilleminProblem};
use gma_core::estimates::{
    estimate_face_asymptotics, estimate_lipschitz, estimate_weighted_hessian, guillemin_oracle_residual, holder_check,
    interpolation_check, interpolation_constant, liouville_oracle, product_bound_check, verify_concavity_bound,
    verify_existence_barrier, verify_face_step_barrier, EstimateReport, HOLDER_CONSTANT,
};
use gma_core::guillemin::{check_all_vertices, guillemin_value, smooth_extension, Provenance};
use gma_core::linalg::{self, Matrix};
use gma_core::solver::{sample_boundary, solve_dirichlet, DirichletProblem, RegularizedSolution, SolveOptions};
use gma_core::{build_polytope, AffineFunctional, Density, GridChart, Polytope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::Session;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{self, format_f64, num};
use crate::Suite;

/// Largest admissible growth of an estimator ratio from one level to the next.
pub const GROWTH_LIMIT: f64 = 0.10;

#[derive(Clone, Debug)]
pub struct Entry {
    pub suite: &'static str,
    pub id: String,
    /// `residual` and `ratio` pass when `value ≤ threshold`, `margin` when `value ≥ threshold`.
    pub kind: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
    /// Per-level ratios for estimator checks.
    pub levels: Vec<f64>,
}

impl Entry {
    fn new(suite: &'static str, id: impl Into<String>, kind: &'static str, value: f64, threshold: f64, samples: usize) -> Self {
        let pass = match kind {
            "margin" => value >= threshold,
            _ => value <= threshold,
        };
        Self { suite, id: id.into(), kind, value, threshold, pass, samples, levels: Vec::new() }
    }

    fn failed(suite: &'static str, id: impl Into<String>, why: impl std::fmt::Display) -> Self {
        let mut e = Self::new(suite, format!("{}: {why}", id.into()), "error", f64::NAN, 0.0, 0);
        e.pass = false;
        e
    }
}

fn unit(n: usize, i: usize, s: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = s;
    e
}

fn simplex(n: usize) -> Polytope {
    let mut f: Vec<AffineFunctional> = (0..n).map(|i| AffineFunctional::new(unit(n, i, 1.0), 0.0)).collect();
    f.push(AffineFunctional::new(vec![-1.0; n], -1.0));
    build_polytope(f, None).expect("simplex")
}

fn cube(n: usize) -> Polytope {
    let f = (0..n).flat_map(|i| [AffineFunctional::new(unit(n, i, 1.0), 0.0), AffineFunctional::new(unit(n, i, -1.0), -1.0)]).collect();
    build_polytope(f, None).expect("cube")
}

fn pentagon() -> Polytope {
    let mut f: Vec<AffineFunctional> = (0..2).flat_map(|i| [AffineFunctional::new(unit(2, i, 1.0), 0.0), AffineFunctional::new(unit(2, i, -1.0), -2.0)]).collect();
    f.push(AffineFunctional::new(vec![-1.0, -1.0], -3.0));
    build_polytope(f, None).expect("pentagon")
}

/// Triangle × interval with random side lengths.
fn prism(rng: &mut ChaCha8Rng) -> Polytope {
    let (a, b) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
    let f = vec![
        AffineFunctional::new(vec![1.0, 0.0, 0.0], 0.0),
        AffineFunctional::new(vec![0.0, 1.0, 0.0], 0.0),
        AffineFunctional::new(vec![-1.0, -1.0, 0.0], -a),
        AffineFunctional::new(vec![0.0, 0.0, 1.0], 0.0),
        AffineFunctional::new(vec![0.0, 0.0, -1.0], -b),
    ];
    build_polytope(f, None).expect("prism")
}

fn interior_point(p: &Polytope, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
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

/// Points of `[0,1]^k × [−1,1]^{n−k}`.
fn cube_points(rng: &mut ChaCha8Rng, k: usize, n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|a| if a < k { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) }).collect()).collect()
}

// ---------------------------------------------------------------- oracles

fn liouville(k: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let mut worst: f64 = 0.0;
    for j in 0..samples {
        let n = k + j % (5 - k);
        let x: Vec<f64> = (0..n).map(|a| if a < k { rng.gen_range(1e-3..3.0) } else { rng.gen_range(-3.0..3.0) }).collect();
        match liouville_oracle(&x, k) {
            Ok(e) => {
                let prod: f64 = x[..k].iter().product();
                worst = worst.max(e.residual.abs()).max((prod * linalg::det(&e.hessian) - 1.0).abs());
            }
            Err(e) => return vec![Entry::failed("oracles", format!("liouville/k{k}"), e)],
        }
    }
    vec![Entry::new("oracles", format!("liouville/k{k}"), "residual", worst, 1e-12, samples)]
}

fn guillemin_oracle(samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    [("simplex", simplex(2)), ("square", cube(2)), ("tetrahedron", simplex(3)), ("cube", cube(3)), ("pentagon", pentagon())]
        .into_iter()
        .map(|(name, p)| {
            let worst = (0..samples)
                .map(|_| guillemin_oracle_residual(p.facets(), &interior_point(&p, rng, 1e-3)))
                .fold(0.0, f64::max);
            Entry::new("oracles", format!("guillemin/{name}"), "residual", worst, 1e-12, samples)
        })
        .collect()
}

fn edge_closed_form(samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    // ĥ = 1 + t(1−t) gives w'' = 1, w = t²/2 − t/2
    let (a, b) = (AffineFunctional::new(vec![1.0], 0.0), AffineFunctional::new(vec![-1.0], -1.0));
    let h = Density::from_fn(Provenance::Analytic, |y| 1.0 + y[0] * (1.0 - y[0]));
    match solve_edge(0, &a, &b, &h, 0.0, 0.0, 1e-12) {
        Ok(prof) => {
            let worst = (0..samples)
                .map(|_| {
                    let t: f64 = rng.gen_range(0.0..1.0);
                    (prof.w(t) - 0.5 * t * (t - 1.0)).abs()
                })
                .fold(0.0, f64::max);
            vec![Entry::new("oracles", "edge/closed-form", "residual", worst, 1e-8, samples)]
        }
        Err(e) => vec![Entry::failed("oracles", "edge/closed-form", e)],
    }
}

fn compatibility(rng: &mut ChaCha8Rng) -> Vec<Entry> {
    [("simplex", simplex(2)), ("square", cube(2)), ("cube", cube(3)), ("prism", prism(rng))]
        .into_iter()
        .map(|(name, p)| match check_all_vertices(&p, &Density::guillemin(&p)) {
            Ok(r) => {
                let worst = r.iter().map(|c| c.residual.abs()).fold(0.0, f64::max);
                Entry::new("oracles", format!("compatibility/{name}"), "residual", worst, 1e-10, r.len())
            }
            Err(e) => Entry::failed("oracles", format!("compatibility/{name}"), e),
        })
        .collect()
}

fn extension(samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let coef: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c = coef.clone();
    let v = move |y: &[f64]| -> f64 {
        c[0] * (y[0] + 0.3 * y[1]).sin() + c[1] * y[0] * y[1] * y[2] + c[2] * (y[1] - y[2]).exp()
            + c[3] * y[0] * y[0] * y[2] + c[4] * y[3] + c[5] * (y[2] * y[3]).cos()
    };
    let scale = 30.0 * coef.iter().map(|c| c.abs()).sum::<f64>();
    let mut out = Vec::new();
    for k in [2usize, 3] {
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let mut x: Vec<f64> = (0..4).map(|a| if a < k { rng.gen_range(0.0..3.0) } else { rng.gen_range(-3.0..3.0) }).collect();
            let mask: u32 = rng.gen_range(1..(1 << k));
            for (a, xa) in x.iter_mut().enumerate().take(k) {
                if mask & (1 << a) != 0 {
                    *xa = 0.0;
                }
            }
            match smooth_extension(k, &v, &x) {
                Ok(f) => worst = worst.max((f - v(&x)).abs() / (4.0 * f64::EPSILON * (1.0 + v(&x).abs() + scale))),
                Err(e) => return vec![Entry::failed("oracles", format!("extension/k{k}"), e)],
            }
        }
        // error in units of 4ε·scale
        out.push(Entry::new("oracles", format!("extension/k{k}"), "ratio", worst, 1.0, samples));
    }
    out
}

// ---------------------------------------------------------------- barriers

fn existence(samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    [("square", cube(2)), ("simplex", simplex(2))]
        .into_iter()
        .map(|(name, p)| {
            let n = p.dim() as f64;
            let interior: Vec<Vec<f64>> = (0..samples).map(|_| interior_point(&p, rng, 1e-3)).collect();
            let bdry = sample_boundary(&p, 50, rng);
            let facets = p.facets().to_vec();
            let bu = move |x: &[f64]| guillemin_value(&facets, x);
            let id = format!("existence/{name}");
            match verify_existence_barrier(&p, &Density::guillemin(&p), &bu, &|_| 0.0, 1.0 / (2.0 * n), &interior, &bdry, rng.gen()) {
                Ok(c) => {
                    let mut e = Entry::new("barriers", id, "margin", c.differential_margin.min(c.boundary_margin), -1e-10, c.samples);
                    e.pass &= c.passed(1e-10);
                    e
                }
                Err(e) => Entry::failed("barriers", id, e),
            }
        })
        .collect()
}

fn face_step(samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let interior: Vec<Vec<f64>> =
        (0..samples).map(|_| vec![rng.gen_range(1e-3..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let bdry: Vec<Vec<f64>> = (0..50).map(|_| vec![0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let eq = verify_face_step_barrier(1.0, 1.0, &|_| 1.0, &interior, &bdry);
    let gap = eq.differential_margin.abs().max(eq.boundary_margin.abs());
    vec![Entry::new("barriers", "face-step/calibration", "residual", gap, 1e-10, eq.samples)]
}

fn concavity(samples: usize, rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let mut out = Vec::new();
    for k in [2usize, 3] {
        let mut points = Vec::new();
        let mut perts = Vec::new();
        for _ in 0..samples {
            points.push((0..3).map(|a| if a < k { rng.gen_range(0.01..1.0) } else { rng.gen_range(-1.0..1.0) }).collect::<Vec<f64>>());
            let mut e = Matrix::zeros(3, 3);
            for a in 0..3 {
                for b in a..3 {
                    let v = rng.gen_range(-0.1..0.1);
                    e[(a, b)] = v;
                    e[(b, a)] = v;
                }
            }
            perts.push(e);
        }
        let id = format!("concavity/k{k}");
        out.push(match verify_concavity_bound(k, &points, &perts) {
            Ok(c) => {
                let mut e = Entry::new("barriers", id, "margin", c.differential_margin, -1e-10, c.samples);
                e.pass &= c.passed(1e-10);
                e
            }
            Err(e) => Entry::failed("barriers", id, e),
        });
    }
    out
}

// ---------------------------------------------------------------- asymptotics

fn growth_entry(r: &EstimateReport, prefix: &str) -> Entry {
    let g = r.ratios.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let mut e = Entry::new("asymptotics", format!("{prefix}/{}", r.id), "ratio", g, GROWTH_LIMIT, r.ratios.len());
    e.pass = r.bounded(1e-8);
    e.levels = r.ratios.clone();
    e
}

fn perturbed_simplex(base: usize, opts: &SolveOptions) -> Vec<Entry> {
    let run = || -> Result<Vec<Entry>, String> {
        let p = simplex(2);
        let prob = GuilleminProblem::new(p.clone(), Density::perturbed(&p, 5.0), vec![0.2, -0.1, 0.0]).map_err(|e| e.to_string())?;
        let faces = GridFaceSolver { resolution: 32, reference_diameter: p.diameter(), options: opts.clone() };
        let data = build_boundary_data(&prob, &faces, &gma_core::boundary::Sequential, 1e-10).map_err(|e| e.to_string())?;
        let mut levels = Vec::new();
        for n in [base, 2 * base, 4 * base] {
            let chart = GridChart::for_polytope(&p, n).map_err(|e| e.to_string())?;
            let (sol, rep) = newton_solve(&prob, &data, &chart, opts).map_err(|e| e.to_string())?;
            if !rep.converged {
                return Err(format!("Newton did not converge on {n} subdivisions"));
            }
            levels.push(sol);
        }
        // chart of width 0.2 around the edge x₂ = 0
        let region = p.face_chart(&[1], 0.2).map_err(|e| e.to_string())?;
        let x2 = AffineFunctional::new(vec![0.0, 1.0], 0.0);
        let lip = estimate_lipschitz(&levels, &x2, Some(&region)).map_err(|e| e.to_string())?;
        let wh = estimate_weighted_hessian(&levels, &x2, Some(&region)).map_err(|e| e.to_string())?;
        Ok(vec![growth_entry(&lip, "simplex"), growth_entry(&wh, "simplex")])
    };
    run().unwrap_or_else(|e| vec![Entry::failed("asymptotics", "simplex", e)])
}

fn quadrant(base: usize, opts: &SolveOptions) -> Vec<Entry> {
    let run = || -> Result<Vec<Entry>, String> {
        let facets = vec![AffineFunctional::new(vec![1.0, 0.0], 0.0), AffineFunctional::new(vec![0.0, 1.0], 0.0)];
        let h = Density::from_fn(Provenance::Analytic, |x| 1.0 + 4.0 * x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]));
        let mut levels: Vec<RegularizedSolution> = Vec::new();
        // the sups sit at the node (h, h) and converge at first order, so start one level finer
        for n in [2 * base, 4 * base, 8 * base] {
            let chart = GridChart::model_box(&[0.0, 0.0], &[1.0, 1.0], n, &[true, true]).map_err(|e| e.to_string())?;
            let dp = DirichletProblem { facets: &facets, density: &h, boundary_v: &|_| 0.0 };
            let (sol, rep) = solve_dirichlet(&chart, &dp, opts).map_err(|e| e.to_string())?;
            if !rep.converged {
                return Err(format!("Newton did not converge on {n} subdivisions"));
            }
            levels.push(sol);
        }
        let fa = estimate_face_asymptotics(&levels, 2).map_err(|e| e.to_string())?;
        Ok([&fa.root_product, &fa.quadratic, &fa.full_product].iter().map(|r| growth_entry(r, "quadrant")).collect())
    };
    run().unwrap_or_else(|e| vec![Entry::failed("asymptotics", "quadrant", e)])
}

// ---------------------------------------------------------------- appendix

fn product_bound(rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let mut worst: f64 = 0.0;
    let mut fields = 0;
    for j in 0..20 {
        let k = 2 + j % 2;
        let cvec: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let cv = cvec.clone();
        let f = move |x: &[f64]| x[..k].iter().product::<f64>() * cv.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().exp();
        // sup |∂₁⋯∂_k f| = sup e^{c·x} ∏(1 + c_a x_a) on a dense grid including the corners
        let mut m: f64 = 0.0;
        for i in 0..=20 {
            for l in 0..=20 {
                for q in 0..=20 {
                    let x = [i as f64 / 20.0, l as f64 / 20.0, if k == 3 { q as f64 / 20.0 } else { -1.0 + q as f64 / 10.0 }];
                    let e = cvec.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().exp();
                    m = m.max(e * (0..k).map(|a| (1.0 + cvec[a] * x[a]).abs()).product::<f64>());
                }
            }
        }
        let c = product_bound_check(&format!("exp-{j}"), &f, m, k, &cube_points(rng, k, 3, 500));
        worst = worst.max(c.worst_ratio);
        fields += 1;
    }
    vec![Entry::new("appendix", "product-bound/C=1", "ratio", worst, 1.0, fields)]
}

fn growth_to_holder(rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let (k, n) = (2usize, 3usize);
    let mut pairs = Vec::new();
    for _ in 0..3000 {
        let x = cube_points(rng, k, n, 1).remove(0);
        let s = 10f64.powf(rng.gen_range(-4.0..0.0));
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(a, v)| {
                let w = v + s * rng.gen_range(-1.0..1.0);
                if a < k {
                    w.clamp(0.0, 1.0)
                } else {
                    w.clamp(-1.0, 1.0)
                }
            })
            .collect();
        pairs.push((x, y));
    }
    for _ in 0..500 {
        let t = 10f64.powf(rng.gen_range(-6.0..0.0));
        let y: Vec<f64> = (0..n).map(|a| if a < k { t * rng.gen_range(0.0..1.0) } else { 0.3 }).collect();
        pairs.push(((0..n).map(|a| if a < k { 0.0 } else { 0.3 }).collect(), y));
    }
    let rk = (k as f64).sqrt();
    let mut worst: f64 = 0.0;
    let mut fields = 0;
    // f = |x'|^δ (1 + ½ sin(p·x)) has growth constant max(3/2, 3δ/2 + √k|p|/2)
    for (j, delta) in [0.2, 0.4, 0.6, 0.8, 1.0].iter().enumerate() {
        for s in 0..4 {
            let pv = vec![1.0 + j as f64, -0.5 * s as f64, 2.0 - 0.5 * s as f64];
            let pn = pv.iter().map(|v| v * v).sum::<f64>().sqrt();
            let d = *delta;
            let f = move |x: &[f64]| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                r.powf(d) * (1.0 + 0.5 * pv.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().sin())
            };
            let c = holder_check(&format!("growth-{j}-{s}"), &f, d, f64::max(1.5, 1.5 * d + rk * 0.5 * pn), &pairs);
            worst = worst.max(c.worst_ratio);
            fields += 1;
        }
    }
    vec![Entry::new("appendix", format!("growth-to-holder/C={HOLDER_CONSTANT}"), "ratio", worst, 1.0, fields)]
}

fn interpolation() -> Vec<Entry> {
    let mut out = Vec::new();
    for kk in [2usize, 3] {
        let mut worst: f64 = 0.0;
        let mut fields = 0;
        for w in [1.0f64, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0] {
            for phase in [0.3, 1.1] {
                let sups: Vec<f64> = (0..=kk)
                    .map(|l| {
                        (0..=4000)
                            .map(|i| (w.powi(l as i32) * (w * i as f64 / 4000.0 + phase + l as f64 * std::f64::consts::FRAC_PI_2).sin()).abs())
                            .fold(0.0, f64::max)
                    })
                    .collect();
                worst = worst.max(interpolation_check(&format!("sin-{w}-{phase}"), &sups).worst_ratio);
                fields += 1;
            }
        }
        out.push(Entry::new("appendix", format!("interpolation/k{kk}/C={}", interpolation_constant(kk)), "ratio", worst, 1.0, fields));
    }
    out
}

// ---------------------------------------------------------------- driver

type Job<'a> = Box<dyn Fn(&mut ChaCha8Rng) -> Vec<Entry> + Sync + 'a>;

fn jobs<'a>(suite: Suite, samples: usize, base: usize, opts: &'a SolveOptions) -> Vec<Job<'a>> {
    let mut out: Vec<Job<'a>> = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Oracles {
        for k in 1..=3 {
            out.push(Box::new(move |r| liouville(k, samples.max(1000), r)));
        }
        out.push(Box::new(move |r| guillemin_oracle(samples, r)));
        out.push(Box::new(move |r| edge_closed_form(samples, r)));
        out.push(Box::new(compatibility));
        out.push(Box::new(move |r| extension(samples.max(10_000), r)));
    }
    if all || suite == Suite::Barriers {
        out.push(Box::new(move |r| existence(samples, r)));
        out.push(Box::new(move |r| face_step(samples, r)));
        out.push(Box::new(move |r| concavity(samples, r)));
    }
    if all || suite == Suite::Asymptotics {
        out.push(Box::new(move |_| perturbed_simplex(base, opts)));
        out.push(Box::new(move |_| quadrant(base, opts)));
    }
    if all || suite == Suite::Appendix {
        out.push(Box::new(product_bound));
        out.push(Box::new(growth_to_holder));
        out.push(Box::new(|_| interpolation()));
    }
    out
}

pub fn ledger(config: &RunConfig, suite: Suite, samples: usize, pool: &crate::runner::ThreadPool) -> Vec<Entry> {
    let opts = SolveOptions { tol: config.tolerances.tol_solve, max_iter: config.max_iter, ..SolveOptions::default() };
    let jobs = jobs(suite, samples, config.grid.base, &opts);
    // one stream per job, so results do not depend on scheduling
    let seed = config.seed;
    let run = |j: usize| jobs[j](&mut ChaCha8Rng::seed_from_u64(seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    pool.map(jobs.len(), &run).into_iter().flatten().collect()
}

pub fn run(config: &RunConfig, suite: Suite, samples: usize) -> Result<(), CliError> {
    let session = Session::new(config);
    let entries = ledger(config, suite, samples, &session.pool());
    let failed = entries.iter().filter(|e| !e.pass).count();
    if let Some(path) = &config.outputs.csv {
        let header: Vec<String> = ["suite", "id", "kind", "level", "value", "threshold", "pass"].iter().map(|s| s.to_string()).collect();
        let mut body = header.join(",") + "\n";
        for e in &entries {
            let row = |level: &str, v: f64| format!("{},{},{},{level},{},{},{}\n", e.suite, e.id.replace(',', ";"), e.kind, format_f64(v), format_f64(e.threshold), e.pass);
            body.push_str(&row("", e.value));
            for (l, r) in e.levels.iter().enumerate() {
                body.push_str(&row(&l.to_string(), *r));
            }
        }
        report::write_text(path, &body)?;
    }
    let list: Vec<Value> = entries
        .iter()
        .map(|e| {
            json!({"suite": e.suite, "id": e.id, "kind": e.kind, "value": num(e.value), "threshold": num(e.threshold),
                   "samples": e.samples, "levels": e.levels.iter().map(|&r| num(r)).collect::<Vec<_>>(), "pass": e.pass})
        })
        .collect();
    let result = json!({
        "suite": format!("{suite:?}").to_lowercase(),
        "checks": list,
        "total": entries.len(),
        "failed": failed,
        "all_pass": failed == 0,
    });
    session.finish(if failed == 0 { "ok" } else { "failed" }, result)?;
    if failed > 0 {
        let names: Vec<&str> = entries.iter().filter(|e| !e.pass).map(|e| e.id.as_str()).collect();
        let msg = format!("{failed} verification checks failed: {}", names.join(", "));
        if config.strict {
            return Err(CliError::Verification(msg));
        }
        eprintln!("warning: {msg}");
    }
    Ok(())
}
