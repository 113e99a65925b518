use std::path::Path;
use std::time::Instant;

use gma_core::boundary::{build_boundary_data, newton_solve, BoundaryData, BoundaryError, FaceTrace, GridFaceSolver, GuilleminProblem};
use gma_core::estimates::{guillemin_oracle_residual, liouville_oracle};
use gma_core::guillemin::{guillemin_potential, guillemin_value, Density};
use gma_core::solver::{solve_dirichlet, strict_convexity_monitor, DirichletProblem, RegularizedSolution, SolveOptions};
use gma_core::GridChart;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::problem::Problem;
use crate::report::{self, coordinate_header, num, Report};
use crate::runner::ThreadPool;

/// Emits the report for one run.
pub struct Session<'a> {
    pub config: &'a RunConfig,
    start: Instant,
}

impl<'a> Session<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self { config, start: Instant::now() }
    }

    pub fn pool(&self) -> ThreadPool {
        ThreadPool { threads: self.config.threads }
    }

    pub fn finish(&self, status: &str, result: Value) -> Result<(), CliError> {
        let r = Report {
            schema_version: report::SCHEMA_VERSION,
            command: &self.config.subcommand,
            status,
            config: self.config,
            result,
            elapsed_seconds: (!self.config.deterministic).then(|| self.start.elapsed().as_secs_f64()),
        };
        report::emit(&r, self.config.outputs.report.as_deref())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.config.tolerances.tol_solve, max_iter: self.config.max_iter, ..SolveOptions::default() }
    }
}

fn problem_path(config: &RunConfig) -> Result<&Path, CliError> {
    config.problem.as_deref().ok_or_else(|| CliError::Usage("a problem file is required".into()))
}

fn fmt_point(x: &[f64]) -> String {
    format!("({})", x.iter().map(|v| format!("{}", v + 0.0)).collect::<Vec<_>>().join(", "))
}

/// Simplicity and vertex compatibility; the JSON summary and the first failure, if any.
pub fn validate(problem: &Problem, tau_comp: f64) -> (Value, Option<CliError>) {
    let p = &problem.polytope;
    let n = p.dim();
    let names: Vec<String> = (0..p.facets().len()).map(|i| problem.facet_name(i)).collect();
    let vertices: Vec<Value> = p
        .vertices()
        .iter()
        .enumerate()
        .map(|(k, v)| json!({"index": k, "point": v.point, "active": v.active.iter().map(|&i| &names[i]).collect::<Vec<_>>()}))
        .collect();
    let face_counts: Vec<usize> = (0..=n).map(|d| p.faces_of_dim(d).count()).collect();
    let simplicity = p.is_simple();
    let violations: Vec<Value> = simplicity
        .violations
        .iter()
        .map(|&(k, c)| json!({"vertex": k, "point": p.vertices()[k].point, "active_facets": c}))
        .collect();
    let mut summary = json!({
        "dimension": n,
        "facets": names,
        "vertices": vertices,
        "face_counts": face_counts,
        "simple": simplicity.simple,
        "non_simple_vertices": violations,
    });
    if !simplicity.simple {
        let list: Vec<String> = simplicity
            .violations
            .iter()
            .map(|&(k, c)| format!("v{k} {} on {c} facets", fmt_point(&p.vertices()[k].point)))
            .collect();
        let msg = format!(
            "polytope is not simple: {} vertices lie on more than {n} facets: {}",
            simplicity.violations.len(),
            list.join("; ")
        );
        return (summary, Some(CliError::Validation(msg)));
    }
    let mut compat = Vec::new();
    let mut failures = Vec::new();
    for k in 0..p.vertices().len() {
        let r = match gma_core::guillemin::check_vertex_compatibility(p, &problem.density, k) {
            Ok(r) => r,
            Err(e) => return (summary, Some(CliError::Validation(e.to_string()))),
        };
        let ok = r.residual.abs() <= tau_comp * r.density.abs().max(r.required.abs());
        if !ok {
            failures.push(format!("v{k} {}: h = {}, required {}", fmt_point(&p.vertices()[k].point), r.density, r.required));
        }
        compat.push(json!({"vertex": k, "density": num(r.density), "required": num(r.required), "residual": num(r.residual), "compatible": ok}));
    }
    summary["compatibility"] = Value::from(compat);
    summary["compatible"] = Value::from(failures.is_empty());
    let err = (!failures.is_empty())
        .then(|| CliError::Validation(format!("vertex compatibility fails at {} vertices: {}", failures.len(), failures.join("; "))));
    (summary, err)
}

pub fn check(config: &RunConfig) -> Result<(), CliError> {
    let session = Session::new(config);
    let problem = Problem::load(problem_path(config)?)?;
    let (summary, err) = validate(&problem, config.tolerances.tau_comp);
    session.finish(if err.is_some() { "invalid" } else { "ok" }, summary)?;
    err.map_or(Ok(()), Err)
}

fn boundary_error(e: BoundaryError) -> CliError {
    match e {
        BoundaryError::NonSimple | BoundaryError::IncompatibleVertex { .. } | BoundaryError::IncompatibleEndpoint { .. } => {
            CliError::Validation(e.to_string())
        }
        _ => CliError::Solver(format!("boundary induction: {e}")),
    }
}

fn load_valid(session: &Session<'_>) -> Result<(Problem, GuilleminProblem), CliError> {
    let problem = Problem::load(problem_path(session.config)?)?;
    if let (_, Some(e)) = validate(&problem, session.config.tolerances.tau_comp) {
        return Err(e);
    }
    let gp = GuilleminProblem::new(problem.polytope.clone(), problem.density.clone(), problem.vertex_values.clone())
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((problem, gp))
}

fn induce(session: &Session<'_>, gp: &GuilleminProblem) -> Result<BoundaryData, CliError> {
    let faces = GridFaceSolver {
        resolution: session.config.grid.base,
        reference_diameter: gp.polytope.diameter(),
        options: session.solve_options(),
    };
    build_boundary_data(gp, &faces, &session.pool(), session.config.tolerances.tau_match / 10.0).map_err(boundary_error)
}

pub fn boundary(config: &RunConfig) -> Result<(), CliError> {
    let session = Session::new(config);
    let (problem, gp) = load_valid(&session)?;
    let data = induce(&session, &gp)?;
    let p = &problem.polytope;
    let n = p.dim();
    let mut faces = Vec::new();
    for (&id, trace) in &data.traces {
        let face = p.face(id);
        let (kind, local, rows): (&str, Vec<Vec<f64>>, Vec<(Vec<f64>, f64)>) = match trace {
            FaceTrace::Vertex(a) => ("vertex", vec![Vec::new()], vec![(p.vertices()[face.vertices[0]].point.clone(), *a)]),
            FaceTrace::Edge { restriction, profile } => {
                let table = profile.table(config.grid.base);
                let ys: Vec<Vec<f64>> = table.iter().map(|r| vec![profile.y_start + r.0]).collect();
                let rows = ys.iter().zip(&table).map(|(y, r)| (restriction.to_ambient(y), r.1)).collect();
                ("edge", ys, rows)
            }
            FaceTrace::Solved { restriction, solution } => {
                let ys: Vec<Vec<f64>> = solution.chart.coords().to_vec();
                let rows = ys.iter().enumerate().map(|(k, y)| (restriction.to_ambient(y), solution.u(k))).collect();
                ("solved", ys, rows)
            }
        };
        let mut entry = json!({
            "face": id,
            "dim": face.dim,
            "active": face.active.iter().map(|&i| problem.facet_name(i)).collect::<Vec<_>>(),
            "kind": kind,
            "rows": rows.len(),
        });
        if let FaceTrace::Edge { profile, .. } = trace {
            entry["quadrature_error"] = num(profile.quadrature_error);
        }
        if let Some(dir) = &config.outputs.out_dir {
            let path = dir.join(format!("face_{id:03}_dim{}.csv", face.dim));
            let d = face.dim;
            let mut header = coordinate_header(n, &[]);
            header.extend((1..=d).map(|j| format!("y{j}")));
            header.extend(["u".to_string(), "v".to_string()]);
            let table: Vec<Vec<f64>> = rows
                .iter()
                .zip(&local)
                .map(|((x, u), y)| {
                    let mut r = x.clone();
                    r.extend_from_slice(y);
                    r.push(*u);
                    r.push(u - guillemin_value(p.facets(), x));
                    r
                })
                .collect();
            report::write_csv(&path, &header, &table)?;
            entry["csv"] = Value::from(path.display().to_string());
        }
        faces.push(entry);
    }
    let checks: Vec<Value> = data
        .consistency
        .checks
        .iter()
        .map(|c| json!({"face": c.face, "subface": c.subface, "mismatch": num(c.mismatch)}))
        .collect();
    let result = json!({
        "faces": faces,
        "vertex_values": data.vertex_values,
        "consistency": {
            "max_mismatch": num(data.consistency.max_mismatch),
            "tolerance": num(data.consistency.tolerance),
            "checks": checks,
        },
    });
    session.finish("ok", result)
}

/// `u_G` is the exact solution when `h = h_G` and the vertex values are `u_G(p)`.
fn guillemin_oracle_applies(problem: &Problem, chart: &GridChart) -> bool {
    let p = &problem.polytope;
    let hg = Density::guillemin(p);
    let vertices_match = p
        .vertices()
        .iter()
        .zip(&problem.vertex_values)
        .all(|(v, a)| (a - guillemin_value(p.facets(), &v.point)).abs() <= 1e-12 * (1.0 + a.abs()));
    vertices_match
        && chart.coords().iter().all(|x| {
            let g = hg.eval(x);
            (problem.density.eval(x) - g).abs() <= 1e-10 * g.abs().max(1.0)
        })
}

fn oracle_error(p: &gma_core::Polytope, sol: &RegularizedSolution) -> f64 {
    (0..sol.len()).map(|k| (sol.u(k) - guillemin_value(p.facets(), sol.chart.coord(k))).abs()).fold(0.0, f64::max)
}

fn solver_error(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

pub fn dump_solution(config: &RunConfig, sol: &RegularizedSolution) -> Result<(), CliError> {
    let n = sol.chart.ambient_dim();
    let rows: Vec<Vec<f64>> = (0..sol.len())
        .map(|k| {
            let mut r = sol.chart.coord(k).to_vec();
            r.extend([sol.v[k], sol.u(k), sol.residual.get(k).copied().unwrap_or(0.0)]);
            r
        })
        .collect();
    if let Some(path) = &config.outputs.dump {
        report::write_csv(path, &coordinate_header(n, &["v", "u", "residual"]), &rows)?;
    }
    if let Some(path) = &config.outputs.dump_bin {
        report::write_binary(path, n as u32, &rows)?;
    }
    Ok(())
}

pub fn solve(config: &RunConfig, face_chart: Option<(usize, f64)>) -> Result<(), CliError> {
    let session = Session::new(config);
    let (problem, gp) = load_valid(&session)?;
    let p = &problem.polytope;
    let opts = session.solve_options();
    let data = induce(&session, &gp)?;

    let mut levels = Vec::new();
    let mut errors = Vec::new();
    let mut finest = None;
    let mut oracle = true;
    for n in config.level_sizes() {
        let chart = GridChart::for_polytope(p, n).map_err(solver_error)?;
        oracle &= guillemin_oracle_applies(&problem, &chart);
        let (sol, rep) = newton_solve(&gp, &data, &chart, &opts).map_err(solver_error)?;
        if !rep.converged {
            return Err(CliError::Solver(format!(
                "Newton did not converge on {n} subdivisions (residual {:e} after {} iterations)",
                rep.residual_max.last().copied().unwrap_or(f64::NAN),
                rep.iterations
            )));
        }
        let err = oracle_error(p, &sol);
        errors.push(err);
        levels.push(json!({
            "subdivisions": n,
            "nodes": sol.len(),
            "iterations": rep.iterations,
            "residual_max": num(rep.residual_max.last().copied().unwrap_or(0.0)),
            "min_eigenvalue": num(rep.min_eigenvalue),
            "error_vs_oracle": if oracle { num(err) } else { Value::Null },
        }));
        finest = Some(sol);
    }
    let sol = finest.expect("at least one level");
    let orders: Vec<Value> = errors
        .windows(2)
        .map(|w| if oracle && w[1] > 1e-14 { num((w[0] / w[1]).log2()) } else { Value::Null })
        .collect();
    let mon = strict_convexity_monitor(&sol);
    let mut result = json!({
        "levels": levels,
        "oracle": if oracle { "u_G" } else { "none" },
        "max_error_vs_oracle": if oracle { num(*errors.last().unwrap()) } else { Value::Null },
        "observed_orders": orders,
        "convexity": {
            "min_eigenvalue": num(mon.min_eigenvalue),
            "layer_gradient": mon.layer_gradient.iter().map(|&g| num(g)).collect::<Vec<_>>(),
            "log_slope": num(mon.log_slope),
            "blow_up": mon.blow_up,
        },
        "boundary_consistency": num(data.consistency.max_mismatch),
    });

    let dumped = match face_chart {
        None => sol,
        Some((facet, width)) => {
            if facet >= p.facets().len() {
                return Err(CliError::Usage(format!("--face {facet} out of range ({} facets)", p.facets().len())));
            }
            let fc = p.face_chart(&[facet], width).map_err(|e| CliError::Usage(format!("--width {width}: {e}")))?;
            let chart = GridChart::from_face_chart(&fc, config.grid.base << (config.grid.levels - 1)).map_err(solver_error)?;
            let global = &sol;
            let outer = |x: &[f64]| data.eval_v(x).unwrap_or_else(|_| global.interpolate_v(x));
            let dp = DirichletProblem { facets: p.facets(), density: &problem.density, boundary_v: &outer };
            let (local, rep) = solve_dirichlet(&chart, &dp, &opts).map_err(solver_error)?;
            if !rep.converged {
                return Err(CliError::Solver("Newton did not converge on the face chart".into()));
            }
            let gap = (0..local.len())
                .map(|k| (local.u(k) - global.interpolate_u(local.chart.coord(k))).abs())
                .fold(0.0, f64::max);
            result["face_chart"] = json!({
                "facet": problem.facet_name(facet),
                "width": width,
                "nodes": local.len(),
                "iterations": rep.iterations,
                "max_difference_from_global": num(gap),
                "max_error_vs_oracle": if oracle { num(oracle_error(p, &local)) } else { Value::Null },
            });
            local
        }
    };
    dump_solution(config, &dumped)?;
    session.finish("ok", result)
}

pub fn oracle(config: &RunConfig, guillemin: bool, point: &[f64], k: usize) -> Result<(), CliError> {
    let session = Session::new(config);
    let matrix = |m: &gma_core::linalg::Matrix| -> Vec<Vec<Value>> {
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| num(m[(i, j)])).collect()).collect()
    };
    let result = if guillemin {
        let problem = Problem::load(problem_path(config)?)?;
        let p = &problem.polytope;
        if point.len() != p.dim() {
            return Err(CliError::Usage(format!("--point has {} coordinates, the problem is {}-dimensional", point.len(), p.dim())));
        }
        let e = guillemin_potential(p, point).map_err(|e| CliError::Validation(e.to_string()))?;
        let interior = p.facets().iter().all(|f| f.eval(point) > 0.0);
        json!({
            "oracle": "guillemin",
            "point": point,
            "value": num(e.value),
            "gradient": e.gradient.iter().map(|&g| num(g)).collect::<Vec<_>>(),
            "hessian": matrix(&e.hessian),
            "density": num(Density::guillemin(p).eval(point)),
            "residual": if interior { num(guillemin_oracle_residual(p.facets(), point)) } else { Value::Null },
        })
    } else {
        if k < 1 || k > point.len() || point.len() > crate::problem::MAX_DIMENSION {
            return Err(CliError::Usage(format!("need 1 ≤ k ≤ dim ≤ 4, got k = {k} with {} coordinates", point.len())));
        }
        let e = liouville_oracle(point, k).map_err(|e| CliError::Validation(e.to_string()))?;
        json!({
            "oracle": "liouville",
            "k": k,
            "point": point,
            "value": num(e.value),
            "gradient": e.gradient.iter().map(|&g| num(g)).collect::<Vec<_>>(),
            "hessian": matrix(&e.hessian),
            "residual": num(e.residual),
        })
    };
    session.finish("ok", result)
}
