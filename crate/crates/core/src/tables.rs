//! Row definitions for the ten benchmark tables and a runner for them.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boundaries::BoundaryPair;
use crate::integrator::{run, run_ensemble, Method, MethodConfig};
use crate::metrics::{integrated_intensity, max_abs, rms_error_uniform, ErrorReport};
use crate::problems::{
    stochastic_heat, stochastic_heat_j, stochastic_heat_j_scheme, stochastic_heat_j_truncated, Problem, ProblemId,
};
use crate::{Error, Result};

pub const TABLE_IDS: std::ops::RangeInclusive<u8> = 1..=10;

/// Trajectories used for the stochastic table unless overridden.
pub const DEFAULT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub samples: usize,
    pub seed: u64,
    pub iterations: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            samples: DEFAULT_SAMPLES,
            seed: 1,
            iterations: crate::integrator::DEFAULT_ITERATIONS,
        }
    }
}

/// One (problem, boundary, method, time step) combination.
#[derive(Debug, Clone)]
pub struct RowSpec {
    pub label: String,
    pub problem: ProblemId,
    pub pairs: Vec<BoundaryPair>,
    pub method: Method,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub report: ErrorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: u8,
    pub title: String,
    pub rows: Vec<TableRow>,
    /// Ensemble statistics behind the table 10 row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochasticOutcome>,
}

fn title(id: u8) -> &'static str {
    match id {
        1 => "heat equation, D-D, Δx = π/20",
        2 => "heat equation, N-N, Δx = π/20",
        3 => "shifted NLSE soliton, Δx = 1/10, Δt = 1/100",
        4 => "heat equation, Δx = π/50, Δt = 0.1",
        5 => "NLSE soliton with time-dependent boundaries, 40 x 2000 steps",
        6 => "Peregrine solution, 20 x 2000 steps, M = 9",
        7 => "breather, 20 x 2000 steps",
        8 => "double simulton, 20 x 2000 steps, M = 3/2",
        9 => "triple simulton, 20 x 2000 steps, M = 3/2",
        10 => "stochastic heat equation, Δx = 0.05, Δt = 1/1000",
        _ => "",
    }
}

fn check_id(id: u8) -> Result<()> {
    if TABLE_IDS.contains(&id) {
        Ok(())
    } else {
        Err(Error::Unknown {
            what: "table",
            name: id.to_string(),
        })
    }
}

/// Rows of the deterministic tables (1 to 9), in print order.
pub fn rows(id: u8) -> Result<Vec<RowSpec>> {
    use BoundaryPair::*;
    check_id(id)?;
    let row = |label: &str, problem, pairs: Vec<BoundaryPair>, method, steps| RowSpec {
        label: label.to_string(),
        problem,
        pairs,
        method,
        steps,
    };
    let per_pair = |problem: ProblemId, method: Method| -> Vec<RowSpec> {
        BoundaryPair::NON_PERIODIC
            .iter()
            .map(|&p| row(&p.to_string(), problem, vec![p], method, None))
            .collect()
    };
    Ok(match id {
        1 | 2 => {
            let pair = if id == 1 { DD } else { NN };
            let mut out = Vec::new();
            for (label, steps) in [("1/2000", 2000), ("1/1000", 1000), ("1/500", 500), ("1/10", 10)] {
                for method in Method::ALL {
                    out.push(row(label, ProblemId::Heat, vec![pair], method, Some(steps)));
                }
            }
            out
        }
        3 => {
            let mut out = Vec::new();
            for pair in [DD, DN, ND] {
                for method in [Method::Fd, Method::Fip] {
                    out.push(row(&pair.to_string(), ProblemId::NlseShifted, vec![pair], method, None));
                }
            }
            out
        }
        4 => per_pair(ProblemId::HeatNonperiodic, Method::Fip),
        5 => per_pair(ProblemId::NlseSoliton, Method::Fsd),
        6 => per_pair(ProblemId::Peregrine, Method::Fsd),
        7 => per_pair(ProblemId::Breather, Method::Fsd),
        8 => [[DD, NN], [NN, DN], [DN, ND], [ND, DD]]
            .iter()
            .map(|p| {
                let label = format!("[{};{}]", p[0], p[1]);
                row(&label, ProblemId::DoubleSimulton, p.to_vec(), Method::Fsd, None)
            })
            .collect(),
        9 => vec![row("D-D;N-D;N-N", ProblemId::TripleSimulton, vec![DD, ND, NN], Method::Fsd, None)],
        _ => Vec::new(),
    })
}

/// Run one deterministic row.
pub fn run_row(spec: &RowSpec, opts: &TableOptions) -> Result<TableRow> {
    let mut problem = Problem::build(spec.problem, &spec.pairs)?;
    if let Some(steps) = spec.steps {
        problem = problem.with_steps(steps)?;
    }
    let report = run_problem(&problem, spec.method, opts.iterations)?;
    Ok(TableRow {
        label: spec.label.clone(),
        report,
    })
}

/// Integrate a deterministic problem on its own grids and score it.
pub fn run_problem(problem: &Problem, method: Method, iterations: usize) -> Result<ErrorReport> {
    let mut cfg = MethodConfig::new(method, problem.time);
    cfg.iterations = iterations;
    let traj = run(problem, cfg)?;
    ErrorReport::from_trajectory(problem, method, problem.time.step(), &traj)
}

/// Ensemble statistics of `J(t) = ∫ <|a|²> dx` for the stochastic heat
/// equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticOutcome {
    pub samples: usize,
    pub times: Vec<f64>,
    pub j_mean: Vec<f64>,
    pub j_std_error: Vec<f64>,
    /// Full analytic series.
    pub j_exact: Vec<f64>,
    /// Analytic series restricted to the modes the lattice resolves.
    pub j_lattice: Vec<f64>,
    /// Exact expectation of the discrete FIP scheme itself.
    pub j_scheme: Vec<f64>,
    /// `ε_c` of the mean against the full series.
    pub error: f64,
    /// `ε_c` of the mean against the lattice-resolved series.
    pub error_lattice: f64,
    /// Largest `|J_mean - J_exact| / SE` over times with `SE > 0`.
    pub max_z: f64,
    pub max_z_lattice: f64,
    pub max_z_scheme: f64,
    pub seconds: f64,
}

pub fn run_stochastic(samples: usize, seed: u64, iterations: usize) -> Result<StochasticOutcome> {
    run_stochastic_on(stochastic_heat(), Method::Fip, samples, seed, iterations)
}

/// As [`run_stochastic`] with a caller-supplied (e.g. shortened) problem and
/// method. `j_scheme` describes the FIP scheme whatever `method` is.
pub fn run_stochastic_on(
    problem: Problem,
    method: Method,
    samples: usize,
    seed: u64,
    iterations: usize,
) -> Result<StochasticOutcome> {
    let mut cfg = MethodConfig::new(method, problem.time);
    cfg.ensemble_size = samples;
    cfg.seed = seed;
    cfg.iterations = iterations;
    let started = Instant::now();
    let ens = run_ensemble(&problem, cfg, |u, grid| vec![integrated_intensity(u, grid)])?;
    let seconds = started.elapsed().as_secs_f64();
    if let Some(d) = ens.divergence {
        return Err(d.into());
    }
    let length = problem.grid.axis(0).length();
    let modes = problem.grid.axis(0).points - 2;
    let j_mean: Vec<f64> = ens.mean.iter().map(|r| r[0]).collect();
    let j_std_error: Vec<f64> = ens.std_error.iter().map(|r| r[0]).collect();
    let j_exact: Vec<f64> = ens.times.iter().map(|&t| stochastic_heat_j(t, length)).collect();
    let j_lattice: Vec<f64> = ens
        .times
        .iter()
        .map(|&t| stochastic_heat_j_truncated(t, length, modes))
        .collect();
    let dt = problem.time.step();
    let j_scheme: Vec<f64> = (0..ens.times.len())
        .map(|j| stochastic_heat_j_scheme(j, dt, length, modes))
        .collect();
    let column = |v: &[f64]| -> Vec<Vec<f64>> { v.iter().map(|&x| vec![x]).collect() };
    let m = max_abs(&column(&j_mean));
    let error = rms_error_uniform(&column(&j_mean), &column(&j_exact), m)?;
    let error_lattice = rms_error_uniform(&column(&j_mean), &column(&j_lattice), m)?;
    let z = |reference: &[f64]| {
        j_mean
            .iter()
            .zip(reference)
            .zip(&j_std_error)
            .filter(|(_, se)| **se > 0.0)
            .map(|((m, r), se)| (m - r).abs() / se)
            .fold(0.0, f64::max)
    };
    let max_z = z(&j_exact);
    let max_z_lattice = z(&j_lattice);
    let max_z_scheme = z(&j_scheme);
    Ok(StochasticOutcome {
        samples,
        times: ens.times,
        j_mean,
        j_std_error,
        j_exact,
        j_lattice,
        j_scheme,
        error,
        error_lattice,
        max_z,
        max_z_lattice,
        max_z_scheme,
        seconds,
    })
}

/// Run every row of table `id`. Table 10 yields a single FIP row scored on
/// `J(t)`.
pub fn run_table(id: u8, opts: &TableOptions) -> Result<Table> {
    check_id(id)?;
    let mut stochastic = None;
    let rows = if id == 10 {
        let out = run_stochastic(opts.samples, opts.seed, opts.iterations)?;
        let problem = stochastic_heat();
        let row = TableRow {
            label: BoundaryPair::DD.to_string(),
            report: ErrorReport {
                problem: problem.id.to_string(),
                method: Method::Fip,
                boundary: problem.pairs_label(),
                dt: problem.time.step(),
                dx: problem.grid.axis(0).step(),
                error: out.error,
                seconds: out.seconds,
                diverged: false,
            },
        };
        stochastic = Some(out);
        vec![row]
    } else {
        rows(id)?
            .iter()
            .map(|spec| run_row(spec, opts))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(Table {
        id,
        title: title(id).to_string(),
        rows,
        stochastic,
    })
}
