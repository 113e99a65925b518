//! Model problems next to a face: the quadrant/half-space `x`-form, the `z`-form in
//! `z₁ = 2√x₁`, and its partial Legendre transform.

use gma_core::guillemin::Provenance;
use gma_core::legendre::{legendre_forward, model_solve_z, ZModelProblem, ZOptions};
use gma_core::solver::{solve_dirichlet, strict_convexity_monitor, DirichletProblem};
use gma_core::{AffineFunctional, Density, GridChart};
use serde_json::{json, Value};

use crate::commands::{dump_solution, Session};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{self, coordinate_header, num};
use crate::Form;

fn solver_error(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

fn dump_rows(config: &RunConfig, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    if let Some(path) = &config.outputs.dump {
        report::write_csv(path, &coordinate_header(2, header), rows)?;
    }
    if let Some(path) = &config.outputs.dump_bin {
        report::write_binary(path, 2, rows)?;
    }
    Ok(())
}

/// `h = 1 + c·x₁(1 − x₁)(1 − x₂²)`, equal to 1 on `x₁ = 0`.
fn half_space_density(c: f64) -> Density {
    Density::from_fn(Provenance::Analytic, move |x| 1.0 + c * x[0] * (1.0 - x[0]) * (1.0 - x[1] * x[1]))
}

fn x_form(session: &Session<'_>, k: usize, c: f64) -> Result<Value, CliError> {
    let config = session.config;
    let n = config.grid.base;
    let (lo, hi, singular, facets, h): (Vec<f64>, Vec<f64>, Vec<bool>, Vec<AffineFunctional>, Density) = if k == 2 {
        let h = Density::from_fn(Provenance::Analytic, move |x| 1.0 + c * x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1]));
        let f = vec![AffineFunctional::new(vec![1.0, 0.0], 0.0), AffineFunctional::new(vec![0.0, 1.0], 0.0)];
        (vec![0.0, 0.0], vec![1.0, 1.0], vec![true, true], f, h)
    } else {
        (vec![0.0, -1.0], vec![1.0, 1.0], vec![true, false], vec![AffineFunctional::new(vec![1.0, 0.0], 0.0)], half_space_density(c))
    };
    // Liouville regular part: 0 in the quadrant, ½x₂² in the half-space
    let liouville = move |x: &[f64]| if k == 2 { 0.0 } else { 0.5 * x[1] * x[1] };
    let chart = GridChart::model_box(&lo, &hi, n, &singular).map_err(solver_error)?;
    let dp = DirichletProblem { facets: &facets, density: &h, boundary_v: &liouville };
    let (sol, rep) = solve_dirichlet(&chart, &dp, &session.solve_options()).map_err(solver_error)?;
    if !rep.converged {
        return Err(CliError::Solver(format!("x-form Newton did not converge after {} iterations", rep.iterations)));
    }
    let deviation = (0..sol.len()).map(|j| (sol.v[j] - liouville(sol.chart.coord(j))).abs()).fold(0.0, f64::max);
    let mon = strict_convexity_monitor(&sol);
    dump_solution(config, &sol)?;
    Ok(json!({
        "form": "x",
        "k": k,
        "c": c,
        "nodes": sol.len(),
        "iterations": rep.iterations,
        "residual_max": num(rep.residual_max.last().copied().unwrap_or(0.0)),
        "max_deviation_from_liouville": num(deviation),
        "min_eigenvalue": num(mon.min_eigenvalue),
    }))
}

fn z_form(session: &Session<'_>, c: f64, legendre: bool) -> Result<Value, CliError> {
    let config = session.config;
    let h = half_space_density(c);
    let trace = |x: &[f64]| 0.5 * x[1] * x[1];
    let prob = ZModelProblem { density: &h, trace: &trace, initial: None, x1_max: 1.0, lo: vec![-1.0], hi: vec![1.0] };
    let opts = ZOptions { subdivisions: config.grid.base, tol: config.tolerances.tol_solve, max_iter: config.max_iter, ..ZOptions::default() };
    let (sol, rep) = model_solve_z(&prob, &opts).map_err(solver_error)?;
    let deviation = (0..sol.chart.len())
        .map(|j| (sol.values[j] - 0.5 * sol.chart.coord(j)[1].powi(2)).abs())
        .fold(0.0, f64::max);
    let mut result = json!({
        "form": "z",
        "c": c,
        "nodes": sol.chart.len(),
        "iterations": rep.iterations,
        "residual_max": num(rep.residual_max.last().copied().unwrap_or(0.0)),
        "min_first_entry": num(rep.min_first_entry.last().copied().unwrap_or(f64::NAN)),
        "axis_slope": num(sol.axis_slope()),
        "max_deviation_from_liouville": num(deviation),
    });
    if !legendre {
        let rows: Vec<Vec<f64>> = (0..sol.chart.len())
            .map(|j| {
                let z = sol.chart.coord(j);
                vec![z[0], z[1], sol.values[j]]
            })
            .collect();
        dump_rows(config, &["vz"], &rows)?;
        return Ok(result);
    }
    let g = legendre_forward(&sol.samples(), 0.5, &[0.0, -0.6], &[0.5, 0.6], (config.grid.base / 4).max(4)).map_err(solver_error)?;
    let residual = g.residual(&h);
    let sup = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let violations = g.boundary_relation_violations(&h, 1e-2).len();
    result["form"] = Value::from("legendre");
    result["legendre"] = json!({
        "nodes": g.chart.len(),
        "residual_max": num(sup),
        "boundary_relation_violations": violations,
    });
    let rows: Vec<Vec<f64>> = (0..g.chart.len())
        .map(|j| {
            let y = g.chart.coord(j);
            vec![y[0], y[1], g.vstar[j], g.ustar(j), residual[j]]
        })
        .collect();
    dump_rows(config, &["vstar", "ustar", "residual"], &rows)?;
    Ok(result)
}

pub fn run(config: &RunConfig, form: Form, k: usize, c: f64) -> Result<(), CliError> {
    let session = Session::new(config);
    let result = match form {
        Form::X => x_form(&session, k, c)?,
        Form::Z => z_form(&session, c, false)?,
        Form::Legendre => z_form(&session, c, true)?,
    };
    session.finish("ok", result)
}
