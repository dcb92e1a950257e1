mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use npspec::integrator::{self, Method, MethodConfig, DEFAULT_ITERATIONS};
use npspec::metrics::ErrorReport;
use npspec::problems::Problem;
use npspec::selftest::{all_passed, run_selftest, Fault, SelftestOptions};
use npspec::tables::{run_stochastic_on, run_table, Table, TableOptions, DEFAULT_SAMPLES};
use npspec::Error;

use config::{FileConfig, Pairs, RunConfig};

#[derive(Parser)]
#[command(name = "npspec", version, about = "Spectral solvers for parabolic PDEs and SPDEs with non-periodic boundaries")]
struct Cli {
    /// Worker threads for ensembles (defaults to one per core).
    #[arg(long, global = true, env = "NPSPEC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem with one method and boundary combination.
    Run(RunArgs),
    /// Reproduce one benchmark table (1 to 10).
    Bench(BenchArgs),
    /// Run the internal property checks.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any of the run fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// fip, fsd or fd.
    #[arg(long)]
    method: Option<String>,
    /// Boundary pair such as D-D; repeat once per component.
    #[arg(long)]
    bc: Vec<String>,
    /// Spatial points per dimension, end points included.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Trajectories for stochastic problems.
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the solution surface (or the J statistics for stochastic runs).
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl RunArgs {
    fn flags(&self) -> FileConfig {
        FileConfig {
            problem: self.problem.clone(),
            method: self.method.clone(),
            bc: (!self.bc.is_empty()).then(|| Pairs::Many(self.bc.clone())),
            points: self.points,
            steps: self.steps,
            iterations: self.iterations,
            ensemble: self.ensemble,
            seed: self.seed,
            json: self.json.clone(),
            csv: self.csv.clone(),
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Table number.
    table: u8,
    /// Trajectories for table 10.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Write the rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the table as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptPlan,
}

#[derive(Args)]
struct SelftestArgs {
    /// Sabotage one component to confirm the checks catch it.
    #[arg(long, value_enum)]
    inject_fault: Option<FaultArg>,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Flat CSV form of one benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BenchRecord {
    table: u8,
    label: String,
    problem: String,
    method: Method,
    boundary: String,
    dt: f64,
    dx: f64,
    error: f64,
    seconds: f64,
    diverged: bool,
}

#[derive(Serialize)]
struct SurfaceRow {
    t: f64,
    x: f64,
    component: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct MomentRow {
    t: f64,
    j_mean: f64,
    j_std_error: f64,
    j_exact: f64,
    j_scheme: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Selftest(args) => cmd_selftest(&args),
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::try_from(file.overlay(args.flags()))?;
    let mut problem = Problem::build(cfg.problem, &cfg.pairs)?;
    if let Some(n) = cfg.points {
        problem = problem.with_points(n)?;
    }
    if let Some(n) = cfg.steps {
        problem = problem.with_steps(n)?;
    }
    let report = if problem.noise.is_some() {
        run_stochastic(problem, &cfg)?
    } else {
        if cfg.ensemble > 1 {
            bail!("{} is deterministic; --ensemble needs a stochastic problem", problem.id);
        }
        run_deterministic(&problem, &cfg)?
    };
    eprintln!(
        "{} {} [{}]: error {:.3e}, {:.3}s{}",
        report.problem,
        report.method,
        report.boundary,
        report.error,
        report.seconds,
        if report.diverged { " (diverged)" } else { "" }
    );
    write_json(&report, cfg.json.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_deterministic(problem: &Problem, cfg: &RunConfig) -> anyhow::Result<ErrorReport> {
    let mut mc = MethodConfig::new(cfg.method, problem.time);
    mc.iterations = cfg.iterations;
    mc.seed = cfg.seed;
    let traj = integrator::run(problem, mc)?;
    if let Some(path) = &cfg.csv {
        if problem.grid.dims() != 1 {
            bail!("solution surfaces are written for one-dimensional grids only");
        }
        let xs = problem.grid.axis(0).coordinates();
        let mut w = csv_writer(path)?;
        for (t, field) in traj.times.iter().zip(&traj.fields) {
            for (component, lane) in field.outer_iter().enumerate() {
                for (x, u) in xs.iter().zip(lane.iter()) {
                    w.serialize(SurfaceRow {
                        t: *t,
                        x: *x,
                        component,
                        re: u.re,
                        im: u.im,
                    })?;
                }
            }
        }
        w.flush()?;
    }
    Ok(ErrorReport::from_trajectory(problem, cfg.method, problem.time.step(), &traj)?)
}

fn run_stochastic(problem: Problem, cfg: &RunConfig) -> anyhow::Result<ErrorReport> {
    let mut report = ErrorReport {
        problem: problem.id.to_string(),
        method: cfg.method,
        boundary: problem.pairs_label(),
        dt: problem.time.step(),
        dx: problem.grid.axis(0).step(),
        error: f64::INFINITY,
        seconds: 0.0,
        diverged: true,
    };
    let out = match run_stochastic_on(problem, cfg.method, cfg.ensemble, cfg.seed, cfg.iterations) {
        Ok(out) => out,
        Err(Error::Diverged { .. }) => return Ok(report),
        Err(e) => return Err(e.into()),
    };
    eprintln!(
        "{} trajectories: max |J - J_exact|/SE = {:.2}, max |J - J_scheme|/SE = {:.2}",
        out.samples, out.max_z, out.max_z_scheme
    );
    if let Some(path) = &cfg.csv {
        let mut w = csv_writer(path)?;
        for j in 0..out.times.len() {
            w.serialize(MomentRow {
                t: out.times[j],
                j_mean: out.j_mean[j],
                j_std_error: out.j_std_error[j],
                j_exact: out.j_exact[j],
                j_scheme: out.j_scheme[j],
            })?;
        }
        w.flush()?;
    }
    report.error = out.error;
    report.seconds = out.seconds;
    report.diverged = false;
    Ok(report)
}

fn bench_records(table: &Table) -> Vec<BenchRecord> {
    table
        .rows
        .iter()
        .map(|r| BenchRecord {
            table: table.id,
            label: r.label.clone(),
            problem: r.report.problem.clone(),
            method: r.report.method,
            boundary: r.report.boundary.clone(),
            dt: r.report.dt,
            dx: r.report.dx,
            error: r.report.error,
            seconds: r.report.seconds,
            diverged: r.report.diverged,
        })
        .collect()
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<ExitCode> {
    let opts = TableOptions {
        samples: args.samples,
        seed: args.seed,
        iterations: args.iterations,
    };
    let table = run_table(args.table, &opts)?;
    let mut out = io::stdout().lock();
    writeln!(out, "Table {}: {}", table.id, table.title)?;
    writeln!(out, "{:<16} {:<6} {:>12} {:>10}", "boundary/Δt", "method", "error", "seconds")?;
    for r in &table.rows {
        let error = if r.report.diverged {
            "∞".to_string()
        } else {
            format!("{:.3e}", r.report.error)
        };
        writeln!(
            out,
            "{:<16} {:<6} {:>12} {:>10.4}",
            r.label, r.report.method, error, r.report.seconds
        )?;
    }
    if let Some(s) = &table.stochastic {
        writeln!(
            out,
            "{} trajectories; max |J - J_exact|/SE = {:.2}; max |J - J_scheme|/SE = {:.2}",
            s.samples, s.max_z, s.max_z_scheme
        )?;
    }
    if let Some(path) = &args.csv {
        let mut w = csv_writer(path)?;
        for rec in bench_records(&table) {
            w.serialize(rec)?;
        }
        w.flush()?;
    }
    if let Some(path) = &args.json {
        write_json(&table, Some(path))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: &SelftestArgs) -> anyhow::Result<ExitCode> {
    let opts = SelftestOptions {
        inject: args.inject_fault.map(|f| match f {
            FaultArg::CorruptPlan => Fault::CorruptPlan,
        }),
    };
    let results = run_selftest(&opts);
    let mut out = io::stdout().lock();
    let mut total = 0.0;
    for r in &results {
        total += r.seconds;
        writeln!(
            out,
            "{}  {:<38} {:>8.3}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.detail
        )?;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed}/{} checks passed in {total:.3}s", results.len())?;
    if let Some(path) = &args.json {
        write_json(&results, Some(path))?;
    }
    Ok(if all_passed(&results) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_csv_round_trip() {
        let rec = BenchRecord {
            table: 1,
            label: "1/10".into(),
            problem: "heat".into(),
            method: Method::Fd,
            boundary: "D-D".into(),
            dt: 0.1,
            dx: std::f64::consts::PI / 20.0,
            error: f64::INFINITY,
            seconds: 1.2345678901234567e-5,
            diverged: true,
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(&rec).unwrap();
        w.serialize(BenchRecord {
            error: 6.283185307179586e-4,
            diverged: false,
            ..rec.clone()
        })
        .unwrap();
        let bytes = w.into_inner().unwrap();
        let back: Vec<BenchRecord> = csv::Reader::from_reader(bytes.as_slice())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back[0], rec);
        assert_eq!(back[1].error, 6.283185307179586e-4);
    }
}
