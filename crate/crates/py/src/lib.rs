//! Python bindings. Formulas cross the boundary as DIMACS text and reports
//! as the same JSON the command-line tool prints.

use chainsat::bounds::{ck_recurrence, round_up_5};
use chainsat::chain::Instance;
use chainsat::characteristic::compare_chain_table;
use chainsat::dimacs::{parse_dimacs, to_dimacs};
use chainsat::formula::Formula;
use chainsat::ksat::{solve_ksat_with, KSatConfig, Solution, SolvePath, SolveStats};
use chainsat::local_search::dls;
use chainsat::oracle::brute_force_sat;
use chainsat::random::random_kcnf;
use chainsat::report::RunReport;
use chainsat::threesat::PhiConfig;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse(dimacs: &str) -> PyResult<Formula> {
    parse_dimacs(dimacs).map_err(value_error)
}

/// Solve DIMACS text; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (dimacs, mode = "full", c = None, trace = false))]
fn solve(dimacs: &str, mode: &str, c: Option<f64>, trace: bool) -> PyResult<String> {
    let f = parse(dimacs)?;
    let phi = match c {
        Some(c) => PhiConfig::new(c).map_err(value_error)?,
        None => PhiConfig::default(),
    };
    let solution = match mode {
        "full" => solve_ksat_with(
            &f,
            &KSatConfig {
                phi,
                trace,
                ..KSatConfig::default()
            },
        ),
        "br" => solve_ksat_with(
            &f,
            &KSatConfig {
                trace,
                ..KSatConfig::branching_only()
            },
        ),
        "dls" => dls(&f, &Instance::empty()).map(|(assignment, d)| Solution {
            assignment,
            path: SolvePath::Dls,
            stats: SolveStats {
                balls_searched: d.balls_searched,
                code_sizes: d.code_sizes,
                space: Some(d.space),
                ..SolveStats::default()
            },
            trace: Vec::new(),
        }),
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
    .map_err(value_error)?;
    let report = RunReport::new(&f, &solution, mode).map_err(value_error)?;
    serde_json::to_string(&report).map_err(value_error)
}

/// Brute-force satisfiability; the assignment as a bit string, or None.
#[pyfunction]
fn brute_force(dimacs: &str) -> PyResult<Option<String>> {
    let f = parse(dimacs)?;
    Ok(brute_force_sat(&f)
        .map_err(value_error)?
        .map(|w| w.to_string()))
}

/// Seeded random k-CNF as DIMACS text.
#[pyfunction]
#[pyo3(signature = (k, n, m, seed = 0))]
fn generate(k: usize, n: usize, m: usize, seed: u64) -> PyResult<String> {
    Ok(to_dimacs(&random_kcnf(k, n, m, seed).map_err(value_error)?))
}

/// (k, rounded-up c_k, ν) for k = 3..=kmax.
#[pyfunction]
#[pyo3(signature = (kmax = 6))]
fn bounds(kmax: usize) -> PyResult<Vec<(usize, f64, f64)>> {
    Ok(ck_recurrence(kmax)
        .map_err(value_error)?
        .into_iter()
        .map(|r| (r.k, round_up_5(r.ck), r.nu))
        .collect())
}

/// (type, ζ, λ as "p/q", f) for the 38 chain types.
#[pyfunction]
fn chain_table() -> PyResult<Vec<(usize, String, String, f64)>> {
    let report = compare_chain_table().map_err(value_error)?;
    if !report.mismatches.is_empty() {
        return Err(PyValueError::new_err(report.mismatches.join("; ")));
    }
    Ok(report
        .records
        .iter()
        .map(|r| (r.type_id, r.zeta.to_string(), r.lambda.to_string(), r.f))
        .collect())
}

#[pymodule]
fn chainsat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(chain_table, m)?)?;
    Ok(())
}
