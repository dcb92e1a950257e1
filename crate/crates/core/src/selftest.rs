//! Property checks behind the `selftest` command.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundaries::{
    make_patch, AxisBoundary, BoundaryKind, BoundaryPair, BoundarySpec, BoundaryValues, EndCondition, PatchSet,
};
use crate::lattice::Grid;
use crate::operators::{
    fd_laplacian, galerkin_matrices, half_lattice_derivative_matrix, solve_linear, spectral_laplacian,
    LinearCoefficients,
};
use crate::problems::{
    breather_boundary_slope, breather_value, double_simulton, exact_residual, triple_simulton, Problem, ProblemId,
};
use crate::transforms::{reference, Direction, TransformKind, TransformPlan};
use crate::Result;

/// Deliberate defects used to confirm the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Transform plans are built for the partner kind (and one point short).
    CorruptPlan,
}

#[derive(Debug, Clone, Default)]
pub struct SelftestOptions {
    pub inject: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn timed<F>(name: &str, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(bool, String)>,
{
    let started = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Plan under test, possibly sabotaged.
fn plan_for(kind: TransformKind, n_t: usize, fault: Option<Fault>) -> Result<TransformPlan> {
    let n_points = kind.points_for(n_t);
    match fault {
        Some(Fault::CorruptPlan) => {
            let wrong = kind.partner();
            if wrong == kind {
                TransformPlan::new(kind, n_points + 1)
            } else {
                TransformPlan::new(wrong, n_points)
            }
        }
        None => TransformPlan::new(kind, n_points),
    }
}

fn apply(plan: &TransformPlan, x: &[C64], direction: Direction) -> Result<Vec<C64>> {
    let mut y: Vec<C64> = x.to_vec();
    y.resize(plan.n_transform(), C64::new(0.0, 0.0));
    plan.process(&mut y, direction)?;
    Ok(y)
}

fn transform_oracle(fault: Option<Fault>) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for kind in TransformKind::ALL {
        for n_t in 4..=64 {
            let x = random_vec(&mut rng, n_t);
            let plan = plan_for(kind, n_t, fault)?;
            let fast = apply(&plan, &x, Direction::Forward)?;
            let naive = reference::forward(kind, &x);
            let rel = if fast.len() == naive.len() {
                max_diff(&fast, &naive) / max_norm(&naive)
            } else {
                f64::INFINITY
            };
            if rel > worst {
                worst = rel;
                worst_at = format!("{kind} N_T={n_t}");
            }
        }
    }
    Ok((worst < 1e-12, format!("max relative deviation {worst:.2e} ({worst_at})")))
}

fn round_trips(fault: Option<Fault>) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    let mut worst: f64 = 0.0;
    for kind in TransformKind::ALL {
        for n_t in 4..=64 {
            let x = random_vec(&mut rng, n_t);
            let plan = plan_for(kind, n_t, fault)?;
            let back = apply(&plan, &apply(&plan, &x, Direction::Forward)?, Direction::Inverse)?;
            let rel = if back.len() == x.len() {
                max_diff(&back, &x) / max_norm(&x)
            } else {
                f64::INFINITY
            };
            worst = worst.max(rel);
        }
    }
    Ok((worst < 1e-13, format!("max relative deviation {worst:.2e}")))
}

fn linearity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for kind in TransformKind::ALL {
        let n_t = 24;
        let plan = plan_for(kind, n_t, None)?;
        let a = random_vec(&mut rng, n_t);
        let b = random_vec(&mut rng, n_t);
        let (alpha, beta) = (C64::new(0.7, -0.2), C64::new(-1.3, 0.4));
        let mix: Vec<C64> = a.iter().zip(&b).map(|(x, y)| alpha * x + beta * y).collect();
        let ta = apply(&plan, &a, Direction::Forward)?;
        let tb = apply(&plan, &b, Direction::Forward)?;
        let tm = apply(&plan, &mix, Direction::Forward)?;
        let want: Vec<C64> = ta.iter().zip(&tb).map(|(x, y)| alpha * x + beta * y).collect();
        worst = worst.max(max_diff(&tm, &want) / max_norm(&want));
    }
    Ok((worst < 1e-13, format!("max relative deviation {worst:.2e}")))
}

fn half_lattice_diagonality() -> Result<(bool, String)> {
    let n = 32;
    let d = half_lattice_derivative_matrix(n, 1.0);
    let k_max = (n as f64 - 0.5) * PI;
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for (l, row) in d.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if l == c {
                let k = (c as f64 + 0.5) * PI;
                diag = diag.max((v - k * k).abs() / (k * k));
            } else {
                off = off.max(v.abs());
            }
        }
    }
    let off_rel = off / (k_max * k_max);
    Ok((
        off_rel < 1e-10 && diag < 1e-12,
        format!("off-diagonal {off_rel:.2e} of k_N², diagonal relative {diag:.2e}"),
    ))
}

fn galerkin_equivalence() -> Result<(bool, String)> {
    let modes = 8;
    let (a, b) = galerkin_matrices(modes, 20_000);
    let d = solve_linear(&a, &b)?;
    let mut worst: f64 = 0.0;
    for (i, row) in d.iter().enumerate() {
        let k = (i as f64 + 0.5) * PI;
        for (j, v) in row.iter().enumerate() {
            let want = if i == j { k * k } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    Ok((worst < 1e-8, format!("max |A⁻¹B - diag(k²)| = {worst:.2e}")))
}

fn patch_invariants() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_value: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    let mut worst_trip: f64 = 0.0;
    for _ in 0..200 {
        for pair in BoundaryPair::NON_PERIODIC {
            let a = rng.random_range(-3.0..0.0);
            let b = a + rng.random_range(0.5..4.0);
            let points = rng.random_range(8..40);
            let lo = C64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let hi = C64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let (kl, ku) = pair.kinds();
            let end = |k: BoundaryKind, v: C64| match k {
                BoundaryKind::Dirichlet => EndCondition::dirichlet(move |_| v),
                _ => EndCondition::neumann(move |_| v),
            };
            let spec = BoundarySpec::new(vec![vec![AxisBoundary::new(end(kl, lo), end(ku, hi))?]])?;
            let grid = Grid::line(a, b, points)?;
            let coeffs = LinearCoefficients::uniform(1, 1, C64::new(1.0, 0.0));
            let set = PatchSet::build(&spec, &grid, &coeffs, 0.0)?;
            // a field that obeys the data: the patch plus a random homogeneous bump
            let bump = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let l = b - a;
            let u = grid.sample(1, |_, x| {
                let x = x[0];
                let p = make_patch(pair, BoundaryValues { lower: lo, upper: hi }, a, b, C64::new(1.0, 0.0), 0.0)
                    .map(|p| p.value(0.0, x))
                    .unwrap_or_default();
                let h = match pair {
                    BoundaryPair::DD => (x - a) * (x - b),
                    BoundaryPair::NN => 1.0,
                    BoundaryPair::DN => (x - a) * (x - a - 2.0 * l),
                    _ => (x - a) * (x - a) - l * l,
                };
                p + bump * h
            });
            let scale = u.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let v = set.subtract(&u, 0.0);
            let dx = grid.axis(0).step();
            let n = points - 1;
            let d_lo = (-3.0 * v[[0, 0]] + 4.0 * v[[0, 1]] - v[[0, 2]]) / (2.0 * dx);
            let d_hi = (3.0 * v[[0, n]] - 4.0 * v[[0, n - 1]] + v[[0, n - 2]]) / (2.0 * dx);
            for (kind, value, slope) in [(kl, v[[0, 0]], d_lo), (ku, v[[0, n]], d_hi)] {
                match kind {
                    BoundaryKind::Dirichlet => worst_value = worst_value.max(value.norm() / scale),
                    _ => worst_slope = worst_slope.max(slope.norm() / scale),
                }
            }
            let back = set.add(&v, 0.0);
            worst_trip = worst_trip.max((&back - &u).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale);
        }
    }
    Ok((
        worst_value < 1e-12 && worst_slope < 1e-8 && worst_trip < 1e-13,
        format!("Dirichlet {worst_value:.1e}, Neumann slope {worst_slope:.1e}, round trip {worst_trip:.1e}"),
    ))
}

/// Log-log slope of the FD Laplacian error of `sin x` on `[0, π]` and the
/// spectral error on the coarsest grid.
fn fd_convergence() -> Result<(bool, String)> {
    let coeffs = LinearCoefficients::uniform(1, 1, C64::new(1.0, 0.0));
    let spec = BoundarySpec::uniform(1, 1, AxisBoundary::zero(BoundaryPair::DD));
    let mut logs = Vec::new();
    let mut spectral: f64 = 0.0;
    for steps in [10, 20, 40, 80, 160] {
        let grid = Grid::line(0.0, PI, steps + 1)?;
        let u = grid.sample(1, |_, x| C64::new(x[0].sin(), 0.0));
        let want = u.mapv(|z| -z);
        let fd = fd_laplacian(&u, &grid, &coeffs, &spec, 0.0)?;
        let err = (&fd - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        logs.push(((PI / steps as f64).ln(), err.ln()));
        let sp = spectral_laplacian(&u, &grid, &[vec![BoundaryPair::DD]], &coeffs)?;
        spectral = spectral.max((&sp - &want).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let n = logs.len() as f64;
    let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = num / den;
    Ok((
        (slope - 2.0).abs() <= 0.1 && spectral < 1e-10,
        format!("FD slope {slope:.3}, spectral error {spectral:.1e}"),
    ))
}

fn catalog() -> Result<Vec<Problem>> {
    use BoundaryPair::*;
    let mut out = vec![Problem::build(ProblemId::Heat, &[DD])?, Problem::build(ProblemId::Heat, &[NN])?];
    for id in [
        ProblemId::HeatNonperiodic,
        ProblemId::NlseSoliton,
        ProblemId::Peregrine,
        ProblemId::Breather,
    ] {
        for p in BoundaryPair::NON_PERIODIC {
            out.push(Problem::build(id, &[p])?);
        }
    }
    for p in [DD, DN, ND] {
        out.push(Problem::build(ProblemId::NlseShifted, &[p])?);
    }
    for pairs in [[DD, NN], [NN, DN], [DN, ND], [ND, DD]] {
        out.push(double_simulton(pairs)?);
    }
    out.push(triple_simulton()?);
    Ok(out)
}

fn residuals() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for p in catalog()? {
        let r = exact_residual(&p, 1e-3, 1e-4).unwrap_or(0.0);
        if r >= worst {
            worst = r;
            worst_at = p.label();
        }
    }
    let mut slope: f64 = 0.0;
    for j in 0..=100 {
        let t = j as f64 * PI / 100.0;
        for sign in [-1.0, 1.0] {
            let h = 1e-5;
            let num = (breather_value(t, 2.0 * sign + h) - breather_value(t, 2.0 * sign - h)) / (2.0 * h);
            slope = slope.max((breather_boundary_slope(t, 2.0, sign) - num).norm());
        }
    }
    Ok((
        worst < 1e-4 && slope < 1e-6,
        format!("max residual {worst:.1e} ({worst_at}), breather slope deviation {slope:.1e}"),
    ))
}

/// Run every check in a fixed order.
pub fn run_selftest(opts: &SelftestOptions) -> Vec<CheckResult> {
    let fault = opts.inject;
    vec![
        timed("transform oracle", || transform_oracle(fault)),
        timed("transform round trip", || round_trips(fault)),
        timed("transform linearity", linearity),
        timed("half-lattice derivative diagonality", half_lattice_diagonality),
        timed("Galerkin equivalence", galerkin_equivalence),
        timed("patch invariants", patch_invariants),
        timed("FD convergence order", fd_convergence),
        timed("exact solution residuals", residuals),
    ]
}
