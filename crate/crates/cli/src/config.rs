//! Run configuration: TOML file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use npspec::boundaries::BoundaryPair;
use npspec::integrator::{Method, DEFAULT_ITERATIONS};
use npspec::problems::ProblemId;
use serde::Deserialize;

/// One or several boundary pairs, so `bc = "D-D"` and `bc = ["D-D", "N-N"]`
/// both parse.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Pairs {
    One(String),
    Many(Vec<String>),
}

impl Pairs {
    fn parse(&self) -> anyhow::Result<Vec<BoundaryPair>> {
        let names = match self {
            Pairs::One(s) => vec![s.clone()],
            Pairs::Many(v) => v.clone(),
        };
        names
            .iter()
            .map(|s| s.parse::<BoundaryPair>().map_err(anyhow::Error::from))
            .collect()
    }
}

/// File form of the run settings. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub method: Option<String>,
    pub bc: Option<Pairs>,
    pub points: Option<usize>,
    pub steps: Option<usize>,
    pub iterations: Option<usize>,
    pub ensemble: Option<usize>,
    pub seed: Option<u64>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Replace every field that `flags` sets.
    pub fn overlay(mut self, flags: FileConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take!(problem, method, bc, points, steps, iterations, ensemble, seed, json, csv);
        self
    }
}

/// Validated settings for `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub method: Method,
    pub pairs: Vec<BoundaryPair>,
    pub points: Option<usize>,
    pub steps: Option<usize>,
    pub iterations: usize,
    pub ensemble: usize,
    pub seed: u64,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl TryFrom<FileConfig> for RunConfig {
    type Error = anyhow::Error;

    fn try_from(f: FileConfig) -> anyhow::Result<Self> {
        let Some(problem) = f.problem else {
            bail!("no problem given (use --problem or `problem = ...` in the config file)");
        };
        let problem: ProblemId = problem.parse()?;
        let method = match f.method {
            Some(m) => m.parse()?,
            None => Method::Fip,
        };
        let pairs = match f.bc {
            Some(p) => p.parse()?,
            None => Vec::new(),
        };
        for (name, v) in [("points", f.points), ("steps", f.steps), ("iterations", f.iterations), ("ensemble", f.ensemble)] {
            if v == Some(0) {
                bail!("{name} must be positive");
            }
        }
        Ok(RunConfig {
            problem,
            method,
            pairs,
            points: f.points,
            steps: f.steps,
            iterations: f.iterations.unwrap_or(DEFAULT_ITERATIONS),
            ensemble: f.ensemble.unwrap_or(1),
            seed: f.seed.unwrap_or(1),
            json: f.json,
            csv: f.csv,
        })
    }
}
