//! Iterated midpoint stepping with the FIP, FSD and FD drivers.
//!
//! One step from `t` to `t + Δt`:
//!
//! 1. `ū⁰ = P(t + Δt/2, t) u`
//! 2. `ūⁱ = ū⁰ + (Δt/2) D[ūⁱ⁻¹, t + Δt/2]` for `i = 1..iterations`
//! 3. `u' = P(t + Δt, t + Δt/2) (2ū − ū⁰)`
//!
//! For FIP, `P` propagates the patched remainder exactly in spectral space and
//! `D` is the local term plus noise. For FSD and FD, `P` is the identity and
//! `D` also carries the Laplacian (spectral or finite-difference).

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ndarray::Axis;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundaries::{BoundaryFn, EndCondition, PatchSet};
use crate::lattice::{Grid, TimeGrid};
use crate::operators::{fd_laplacian, Propagator, SpectralLayout};
use crate::problems::Problem;
use crate::{Error, Field, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Fip,
    Fsd,
    Fd,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Fd, Method::Fsd, Method::Fip];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fip => "FIP",
            Method::Fsd => "FSD",
            Method::Fd => "FD",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fip" => Ok(Method::Fip),
            "fsd" => Ok(Method::Fsd),
            "fd" => Ok(Method::Fd),
            _ => Err(Error::Unknown {
                what: "method",
                name: s.to_string(),
            }),
        }
    }
}

pub const DEFAULT_ITERATIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub iterations: usize,
    pub time: TimeGrid,
    pub ensemble_size: usize,
    pub seed: u64,
}

impl MethodConfig {
    pub fn new(method: Method, time: TimeGrid) -> Self {
        MethodConfig {
            method,
            iterations: DEFAULT_ITERATIONS,
            time,
            ensemble_size: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("at least one midpoint iteration is needed".into()));
        }
        if self.ensemble_size == 0 {
            return Err(Error::InvalidConfig("ensemble size must be positive".into()));
        }
        Ok(())
    }
}

/// Where a run blew up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub step: usize,
    pub time: f64,
}

impl From<Divergence> for Error {
    fn from(d: Divergence) -> Error {
        Error::Diverged {
            step: d.step,
            time: d.time,
        }
    }
}

/// Fields at every stored time. On divergence the trajectory stops at the
/// last finite field.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub elapsed: Duration,
    pub divergence: Option<Divergence>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn final_field(&self) -> &Field {
        self.fields.last().expect("trajectory holds the initial field")
    }
}

/// Ensemble average of a vector-valued observable at every time.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    /// Standard error of the mean (sample standard deviation / √samples).
    pub std_error: Vec<Vec<f64>>,
    pub samples: usize,
    pub elapsed: Duration,
    pub divergence: Option<Divergence>,
}

struct DirichletFace {
    component: usize,
    points: Vec<usize>,
    value: BoundaryFn,
}

/// Precomputed state for integrating one problem with one method.
pub struct Solver<'a> {
    problem: &'a Problem,
    config: MethodConfig,
    layout: Option<SpectralLayout>,
    half_step: Option<Propagator>,
    /// Flat coordinates, `dims` entries per lattice point.
    coords: Vec<f64>,
    faces: Vec<DirichletFace>,
    /// Per component, per lattice point: noise allowed there.
    noise_mask: Vec<Vec<bool>>,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a Problem, config: MethodConfig) -> Result<Self> {
        config.validate()?;
        let grid = &problem.grid;
        problem.boundary.check_grid(grid)?;
        if problem.boundary.components() != problem.components
            || problem.coeffs.components() != problem.components
        {
            return Err(Error::InvalidConfig(format!(
                "{}: component counts disagree",
                problem.id
            )));
        }
        let layout = match config.method {
            Method::Fd => None,
            Method::Fip | Method::Fsd => Some(SpectralLayout::new(
                grid,
                &problem.boundary.pairs(),
                &problem.coeffs,
            )?),
        };
        let half_step = match (config.method, &layout) {
            (Method::Fip, Some(l)) => Some(l.propagator(config.time.step() / 2.0)),
            _ => None,
        };

        let shape: Vec<usize> = grid.axes().iter().map(|a| a.points).collect();
        let axes: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.coordinates()).collect();
        let points = grid.points();
        let mut coords = Vec::with_capacity(points * grid.dims());
        let mut multi = vec![0usize; grid.dims()];
        let mut index_of = Vec::with_capacity(points);
        for p in 0..points {
            let mut rem = p;
            for d in (0..grid.dims()).rev() {
                multi[d] = rem % shape[d];
                rem /= shape[d];
            }
            coords.extend(multi.iter().enumerate().map(|(d, &i)| axes[d][i]));
            index_of.push(multi.clone());
        }

        let mut faces = Vec::new();
        let mut noise_mask = vec![vec![true; points]; problem.components];
        for (c, mask) in noise_mask.iter_mut().enumerate() {
            for d in 0..grid.dims() {
                let axis = problem.boundary.axis(c, d);
                for (end, at) in [(&axis.lower, 0), (&axis.upper, shape[d] - 1)] {
                    if let EndCondition::Dirichlet(f) = end {
                        let on_face: Vec<usize> = (0..points).filter(|&p| index_of[p][d] == at).collect();
                        for &p in &on_face {
                            mask[p] = false;
                        }
                        faces.push(DirichletFace {
                            component: c,
                            points: on_face,
                            value: f.clone(),
                        });
                    }
                }
            }
        }

        Ok(Solver {
            problem,
            config,
            layout,
            half_step,
            coords,
            faces,
            noise_mask,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.problem.grid
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }

    pub fn initial_field(&self) -> Field {
        let t0 = self.config.time.start;
        let f = &self.problem.initial;
        self.grid().sample(self.problem.components, |c, x| f(c, t0, x))
    }

    fn dims(&self) -> usize {
        self.grid().dims()
    }

    /// Full derivative `D[u, t]` used inside the midpoint iteration.
    pub fn derivative(&self, u: &Field, t: f64, noise: Option<&Field>, dt: f64) -> Result<Field> {
        let problem = self.problem;
        let grid = self.grid();
        let nc = problem.components;
        let points = grid.points();
        let mut d = grid.zeros(nc);

        if let Some(g) = &problem.nonlinear {
            let u_std = u.as_standard_layout();
            let us = u_std.as_slice().expect("standard layout");
            let ds = d.as_slice_mut().expect("standard layout");
            let dims = self.dims();
            let mut local = vec![C64::new(0.0, 0.0); nc];
            let mut out = vec![C64::new(0.0, 0.0); nc];
            for p in 0..points {
                for (c, l) in local.iter_mut().enumerate() {
                    *l = us[c * points + p];
                }
                g(t, &self.coords[p * dims..(p + 1) * dims], &local, &mut out);
                for (c, o) in out.iter().enumerate() {
                    ds[c * points + p] = *o;
                }
            }
        }

        if let Some(w) = noise {
            d += w;
        }

        match self.config.method {
            Method::Fip => {}
            Method::Fsd => {
                let layout = self.layout.as_ref().expect("spectral layout");
                let patches = PatchSet::build(&problem.boundary, grid, &problem.coeffs, t)?;
                let v = patches.subtract(u, t);
                let lap = layout.laplacian(&v)?;
                d += &lap;
                for c in 0..nc {
                    let curvature = patches.laplacian(c, &problem.coeffs);
                    if curvature != C64::new(0.0, 0.0) {
                        d.index_axis_mut(Axis(0), c).mapv_inplace(|z| z + curvature);
                    }
                }
            }
            Method::Fd => {
                let lap = fd_laplacian(u, grid, &problem.coeffs, &problem.boundary, t)?;
                d += &lap;
            }
        }

        if !self.faces.is_empty() {
            let h = dt / 100.0;
            let ds = d.as_slice_mut().expect("standard layout");
            for face in &self.faces {
                let rate = ((face.value)(t + h) - (face.value)(t - h)) / (2.0 * h);
                for &p in &face.points {
                    ds[face.component * points + p] = rate;
                }
            }
        }
        Ok(d)
    }

    /// Linear propagation between `from` and `to` with the patch built at
    /// `t_ref`. The identity for FSD and FD.
    fn propagate(&self, u: Field, from: f64, to: f64, t_ref: f64) -> Result<Field> {
        let (Some(layout), Some(prop)) = (&self.layout, &self.half_step) else {
            return Ok(u);
        };
        let problem = self.problem;
        let patches = PatchSet::build(&problem.boundary, self.grid(), &problem.coeffs, t_ref)?;
        let h = patches.subtract(&u, from);
        let mut out = layout.propagate(&h, prop)?;
        patches.add_in_place(&mut out, to);
        Ok(out)
    }

    /// One midpoint step from `t` to `t_next`.
    pub fn midpoint_step(&self, u: &Field, t: f64, t_next: f64, noise: Option<&Field>) -> Result<Field> {
        let dt = t_next - t;
        let half = dt / 2.0;
        let tm = t + half;
        let u0 = self.propagate(u.clone(), t, tm, t)?;
        let mut ubar = u0.clone();
        for _ in 0..self.config.iterations {
            let d = self.derivative(&ubar, tm, noise, dt)?;
            ubar = &u0 + &(d * C64::new(half, 0.0));
        }
        let w = ubar * C64::new(2.0, 0.0) - &u0;
        self.propagate(w, tm, t_next, t_next)
    }

    /// Noise for one step, zero at Dirichlet points, scaled by the problem's
    /// amplitudes.
    fn step_noise(&self, rng: &mut ChaCha8Rng, dt: f64) -> Option<Field> {
        let amps = self.problem.noise.as_ref()?;
        let mut w = sample_noise(rng, self.grid(), dt, self.problem.components);
        let points = self.grid().points();
        let ws = w.as_slice_mut().expect("standard layout");
        for (c, mask) in self.noise_mask.iter().enumerate() {
            for (p, &keep) in mask.iter().enumerate() {
                let v = &mut ws[c * points + p];
                *v = if keep { *v * amps[c] } else { C64::new(0.0, 0.0) };
            }
        }
        Some(w)
    }

    /// Integrate one trajectory, calling `observe(step, t, u)` at every time
    /// including the initial one. `stream` selects the noise stream.
    pub fn integrate<F>(&self, stream: u64, mut observe: F) -> Result<(Option<Divergence>, Duration)>
    where
        F: FnMut(usize, f64, &Field),
    {
        let time = self.config.time;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream);
        let mut u = self.initial_field();
        let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let limit = 1e12 * if scale > 0.0 { scale } else { 1.0 };
        observe(0, time.start, &u);
        let started = Instant::now();
        for j in 0..time.steps {
            let t = time.time(j);
            let t_next = time.time(j + 1);
            let noise = self.step_noise(&mut rng, t_next - t);
            let next = self.midpoint_step(&u, t, t_next, noise.as_ref())?;
            let blown = next.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm() > limit);
            if blown {
                return Ok((
                    Some(Divergence {
                        step: j + 1,
                        time: t_next,
                    }),
                    started.elapsed(),
                ));
            }
            u = next;
            observe(j + 1, t_next, &u);
        }
        Ok((None, started.elapsed()))
    }

    /// Single trajectory on noise stream 0, keeping every field.
    pub fn run(&self) -> Result<Trajectory> {
        let mut times = Vec::with_capacity(self.config.time.steps + 1);
        let mut fields = Vec::with_capacity(self.config.time.steps + 1);
        let (divergence, elapsed) = self.integrate(0, |_, t, u| {
            times.push(t);
            fields.push(u.clone());
        })?;
        Ok(Trajectory {
            times,
            fields,
            elapsed,
            divergence,
        })
    }
}

/// Independent Gaussian samples with standard deviation `1/√(Δt ΔV)` at every
/// lattice point of every component (real-valued, stored as complex).
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, grid: &Grid, dt: f64, components: usize) -> Field {
    let std = 1.0 / (dt * grid.cell_volume()).sqrt();
    let mut w = grid.zeros(components);
    for v in w.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = C64::new(std * z, 0.0);
    }
    w
}

/// Integrate one trajectory and keep every field.
pub fn run(problem: &Problem, config: MethodConfig) -> Result<Trajectory> {
    Solver::new(problem, config)?.run()
}

/// Integrate `config.ensemble_size` trajectories in parallel and average
/// `observable(u)` at every time. Trajectory `i` uses noise stream `i`, so
/// results do not depend on scheduling.
pub fn run_ensemble<O>(problem: &Problem, config: MethodConfig, observable: O) -> Result<EnsembleResult>
where
    O: Fn(&Field, &Grid) -> Vec<f64> + Sync,
{
    let solver = Solver::new(problem, config)?;
    let grid = &problem.grid;
    let started = Instant::now();
    let runs: Vec<(Vec<Vec<f64>>, Option<Divergence>)> = (0..config.ensemble_size as u64)
        .into_par_iter()
        .map(|i| {
            let mut series = Vec::with_capacity(config.time.steps + 1);
            let (div, _) = solver.integrate(i, |_, _, u| series.push(observable(u, grid)))?;
            Ok((series, div))
        })
        .collect::<Result<Vec<_>>>()?;
    let elapsed = started.elapsed();

    if let Some(div) = runs.iter().find_map(|(_, d)| *d) {
        return Ok(EnsembleResult {
            times: Vec::new(),
            mean: Vec::new(),
            std_error: Vec::new(),
            samples: runs.len(),
            elapsed,
            divergence: Some(div),
        });
    }

    let n_times = config.time.steps + 1;
    let width = runs[0].0.first().map(Vec::len).unwrap_or(0);
    let mut sum = vec![vec![0.0; width]; n_times];
    let mut sum_sq = vec![vec![0.0; width]; n_times];
    for (series, _) in &runs {
        for (j, obs) in series.iter().enumerate() {
            for (k, v) in obs.iter().enumerate() {
                sum[j][k] += v;
                sum_sq[j][k] += v * v;
            }
        }
    }
    let m = runs.len() as f64;
    let mean: Vec<Vec<f64>> = sum.iter().map(|r| r.iter().map(|s| s / m).collect()).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, mu)| {
            sq.iter()
                .zip(mu)
                .map(|(s, mu)| {
                    if runs.len() < 2 {
                        0.0
                    } else {
                        let var = ((s - m * mu * mu) / (m - 1.0)).max(0.0);
                        (var / m).sqrt()
                    }
                })
                .collect()
        })
        .collect();
    Ok(EnsembleResult {
        times: config.time.times(),
        mean,
        std_error,
        samples: runs.len(),
        elapsed,
        divergence: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundaries::BoundaryPair;
    use crate::problems::{heat_zero_boundary, nlse_soliton_td_boundary, stochastic_heat};

    #[test]
    fn fip_heat_step_is_exact() {
        let p = heat_zero_boundary(BoundaryPair::DD).unwrap();
        let cfg = MethodConfig::new(Method::Fip, TimeGrid::new(0.0, 0.1, 1).unwrap());
        let traj = run(&p, cfg).unwrap();
        let want = p.grid.sample(1, |_, x| {
            C64::new(2.0 * x[0].sin() * (-0.1f64).exp() + (2.0 * x[0]).sin() * (-0.4f64).exp(), 0.0)
        });
        let err = (traj.final_field() - &want).iter().map(|d| d.norm()).fold(0.0, f64::max);
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn tiny_steps_barely_move() {
        let p = nlse_soliton_td_boundary(BoundaryPair::DN).unwrap();
        for method in Method::ALL {
            let cfg = MethodConfig::new(method, TimeGrid::new(0.0, 1e-8, 1).unwrap());
            let traj = run(&p, cfg).unwrap();
            let change = (&traj.fields[1] - &traj.fields[0]).iter().map(|d| d.norm()).fold(0.0, f64::max);
            assert!(change < 1e-6, "{method}: {change}");
        }
    }

    #[test]
    fn fd_heat_blows_up_with_large_steps() {
        let p = heat_zero_boundary(BoundaryPair::DD).unwrap();
        let traj = run(&p, MethodConfig::new(Method::Fd, p.time)).unwrap();
        assert!(traj.diverged());
        assert!(traj.divergence.unwrap().time <= 1.0);
    }

    #[test]
    fn noise_statistics() {
        let grid = Grid::line(0.0, 5.0, 101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut n = 0usize;
        while n < 1_000_000 {
            let w = sample_noise(&mut rng, &grid, 1e-3, 1);
            for z in w.iter() {
                sum += z.re;
                sq += z.re * z.re;
                n += 1;
            }
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        let want = 1.0 / (1e-3 * 0.05);
        assert!((var - want).abs() < 0.01 * want, "{var}");
        assert!(mean.abs() < 4.0 * want.sqrt() / 1000.0);
    }

    #[test]
    fn seeded_ensembles_repeat() {
        let mut p = stochastic_heat();
        p.time = TimeGrid::new(0.0, 0.05, 50).unwrap();
        let mut cfg = MethodConfig::new(Method::Fip, p.time);
        cfg.ensemble_size = 8;
        cfg.seed = 11;
        let obs = |u: &Field, _: &Grid| vec![u.iter().map(|z| z.norm_sqr()).sum::<f64>()];
        let a = run_ensemble(&p, cfg, obs).unwrap();
        let b = run_ensemble(&p, cfg, obs).unwrap();
        assert_eq!(a.mean, b.mean);
        assert!(a.mean[50][0] > 0.0);
    }

    #[test]
    fn deterministic_ensemble_of_one_matches_run() {
        let p = heat_zero_boundary(BoundaryPair::NN).unwrap();
        let cfg = MethodConfig::new(Method::Fsd, TimeGrid::new(0.0, 0.1, 20).unwrap());
        let traj = run(&p, cfg).unwrap();
        let ens = run_ensemble(&p, cfg, |u, _| u.iter().map(|z| z.re).collect()).unwrap();
        for (field, mean) in traj.fields.iter().zip(&ens.mean) {
            let direct: Vec<f64> = field.iter().map(|z| z.re).collect();
            assert_eq!(&direct, mean);
        }
    }
}
