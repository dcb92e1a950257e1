//! RMS comparison errors, observables and run reports.

use serde::{Deserialize, Serialize};

use crate::integrator::{Method, Trajectory};
use crate::lattice::Grid;
use crate::problems::{Observable, Problem};
use crate::{Error, Field, Result};

/// False for NaN as well as non-positive values.
fn positive(v: f64) -> bool {
    v.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater)
}

fn check_shapes(numeric: &[Vec<f64>], analytic: &[Vec<f64>]) -> Result<()> {
    let same = numeric.len() == analytic.len()
        && numeric.iter().zip(analytic).all(|(a, b)| a.len() == b.len());
    if !same || numeric.is_empty() || numeric[0].is_empty() {
        return Err(Error::ShapeMismatch {
            expected: "matching non-empty sample arrays".into(),
            found: format!("{} vs {} time samples", numeric.len(), analytic.len()),
        });
    }
    Ok(())
}

/// `ε_c = sqrt(Σ_i Σ_j d_ij² / (N_i N_j M))` with `d = |numeric - analytic|`,
/// indexed `[time][space]`. `M` enters un-squared.
pub fn rms_error_uniform(numeric: &[Vec<f64>], analytic: &[Vec<f64>], m: f64) -> Result<f64> {
    check_shapes(numeric, analytic)?;
    if !positive(m) {
        return Err(Error::InvalidConfig(format!("normalization must be positive, got {m}")));
    }
    let count: usize = numeric.iter().map(Vec::len).sum();
    let total: f64 = numeric
        .iter()
        .zip(analytic)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
        .sum();
    Ok((total / (count as f64 * m)).sqrt())
}

/// Weighted error and whether the weights failed to add up to `X` and `T`
/// within 1%.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedError {
    pub value: f64,
    pub weight_mismatch: bool,
}

/// `ε_c = sqrt(Σ_i Σ_j d_ij² Δx_j Δt_i / (X T M))`.
pub fn rms_error_weighted(
    numeric: &[Vec<f64>],
    analytic: &[Vec<f64>],
    dx: &[f64],
    dt: &[f64],
    x_total: f64,
    t_total: f64,
    m: f64,
) -> Result<WeightedError> {
    check_shapes(numeric, analytic)?;
    if dt.len() != numeric.len() || numeric.iter().any(|r| r.len() != dx.len()) {
        return Err(Error::ShapeMismatch {
            expected: format!("{} x {} weights", numeric.len(), numeric[0].len()),
            found: format!("{} x {}", dt.len(), dx.len()),
        });
    }
    if !(dx.iter().chain(dt).all(|w| positive(*w)) && positive(m) && positive(x_total) && positive(t_total)) {
        return Err(Error::InvalidConfig("weights and normalization must be positive".into()));
    }
    let mut total = 0.0;
    for ((row_n, row_a), wt) in numeric.iter().zip(analytic).zip(dt) {
        for ((x, y), wx) in row_n.iter().zip(row_a).zip(dx) {
            total += (x - y) * (x - y) * wx * wt;
        }
    }
    let sx: f64 = dx.iter().sum();
    let st: f64 = dt.iter().sum();
    let weight_mismatch = (sx - x_total).abs() > 0.01 * x_total || (st - t_total).abs() > 0.01 * t_total;
    Ok(WeightedError {
        value: (total / (x_total * t_total * m)).sqrt(),
        weight_mismatch,
    })
}

/// Trapezoidal integral of equally spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dx * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// `∫ |a|² dx` of component 0 of a 1D field, by the trapezoidal rule.
pub fn integrated_intensity(u: &Field, grid: &Grid) -> f64 {
    let values: Vec<f64> = u.iter().take(grid.axis(0).points).map(|z| z.norm_sqr()).collect();
    trapezoid(&values, grid.axis(0).step())
}

/// Observable samples `[time][component-major points]` of a trajectory.
pub fn observable_series(fields: &[Field], observable: Observable) -> Vec<Vec<f64>> {
    fields
        .iter()
        .map(|u| u.iter().map(|&z| observable.apply(z)).collect())
        .collect()
}

/// Exact observable samples on the same layout as [`observable_series`].
pub fn exact_series(problem: &Problem, times: &[f64]) -> Option<Vec<Vec<f64>>> {
    let exact = problem.exact.as_ref()?;
    Some(
        times
            .iter()
            .map(|&t| {
                problem
                    .grid
                    .sample(problem.components, |c, x| exact(c, t, x))
                    .iter()
                    .map(|&z| problem.observable.apply(z))
                    .collect()
            })
            .collect(),
    )
}

/// Arithmetic mean of equally shaped series.
pub fn ensemble_mean(series: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<f64>>> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty ensemble".into()))?;
    let mut sum = first.clone();
    for s in &series[1..] {
        check_shapes(&sum, s)?;
        for (row, other) in sum.iter_mut().zip(s) {
            for (a, b) in row.iter_mut().zip(other) {
                *a += b;
            }
        }
    }
    let m = series.len() as f64;
    for row in &mut sum {
        for a in row.iter_mut() {
            *a /= m;
        }
    }
    Ok(sum)
}

/// Largest absolute value in a sample array.
pub fn max_abs(values: &[Vec<f64>]) -> f64 {
    values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Comparison error of one run against its exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub problem: String,
    pub method: Method,
    pub boundary: String,
    pub dt: f64,
    pub dx: f64,
    #[serde(with = "error_value")]
    pub error: f64,
    pub seconds: f64,
    pub diverged: bool,
}

impl ErrorReport {
    /// Score a trajectory. Diverged runs get an infinite error.
    pub fn from_trajectory(problem: &Problem, method: Method, dt: f64, traj: &Trajectory) -> Result<Self> {
        let error = if traj.diverged() {
            f64::INFINITY
        } else {
            let numeric = observable_series(&traj.fields, problem.observable);
            let analytic = exact_series(problem, &traj.times).ok_or_else(|| {
                Error::InvalidConfig(format!("{} has no exact solution", problem.id))
            })?;
            let m = problem.normalization.unwrap_or_else(|| max_abs(&numeric));
            rms_error_uniform(&numeric, &analytic, m)?
        };
        Ok(ErrorReport {
            problem: problem.id.to_string(),
            method,
            boundary: problem.pairs_label(),
            dt,
            dx: problem.grid.axis(0).step(),
            error,
            seconds: traj.elapsed.as_secs_f64(),
            diverged: traj.diverged(),
        })
    }
}

/// Infinite errors are written as the string `"inf"` since JSON has no
/// infinity.
mod error_value {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(s) if s.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            Raw::Text(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_and_constant_differences() {
        let a = vec![vec![1.0, 2.0, 3.0]; 4];
        assert_eq!(rms_error_uniform(&a, &a, 1.0).unwrap(), 0.0);
        let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v + 0.3).collect()).collect();
        assert!((rms_error_uniform(&b, &a, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert!(rms_error_uniform(&a, &a, 0.0).is_err());
    }

    #[test]
    fn uniform_matches_plain_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n: Vec<Vec<f64>> = (0..5).map(|_| (0..7).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let a: Vec<Vec<f64>> = (0..5).map(|_| (0..7).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut acc = 0.0;
        for i in 0..5 {
            for j in 0..7 {
                let d = (n[i][j] - a[i][j]).abs();
                acc += d * d;
            }
        }
        let want = (acc / (5.0 * 7.0 * 2.5)).sqrt();
        assert!((rms_error_uniform(&n, &a, 2.5).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn weighted_reduces_to_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n: Vec<Vec<f64>> = (0..6).map(|_| (0..9).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let a = vec![vec![0.0; 9]; 6];
        let w = rms_error_weighted(&n, &a, &[0.5; 9], &[0.25; 6], 4.5, 1.5, 3.0).unwrap();
        let u = rms_error_uniform(&n, &a, 3.0).unwrap();
        assert!((w.value - u).abs() < 1e-15);
        assert!(!w.weight_mismatch);
        assert_eq!(rms_error_weighted(&a, &a, &[0.5; 9], &[0.25; 6], 4.5, 1.5, 3.0).unwrap().value, 0.0);
    }

    #[test]
    fn weighted_two_point_toy() {
        // d = [[1, 2]], Δx = [1, 3], Δt = [2]: (1·1·2 + 4·3·2)/(4·2·1) = 26/8
        let w = rms_error_weighted(&[vec![1.0, 2.0]], &[vec![0.0, 0.0]], &[1.0, 3.0], &[2.0], 4.0, 2.0, 1.0).unwrap();
        assert!((w.value - (26.0f64 / 8.0).sqrt()).abs() < 1e-15);
        let w = rms_error_weighted(&[vec![1.0, 2.0]], &[vec![0.0, 0.0]], &[1.0, 3.0], &[2.0], 5.0, 2.0, 1.0).unwrap();
        assert!(w.weight_mismatch);
    }

    #[test]
    fn trapezoid_integrals() {
        assert!((trapezoid(&[1.0; 101], 0.05) - 5.0).abs() < 1e-14);
        let n = 5001;
        let dx = 5.0 / (n - 1) as f64;
        let s: Vec<f64> = (0..n).map(|j| (std::f64::consts::PI * j as f64 * dx / 5.0).sin().powi(2)).collect();
        assert!((trapezoid(&s, dx) - 2.5).abs() < 1e-6);
    }

    #[test]
    fn mean_of_one_is_identity() {
        let s = vec![vec![vec![1.0, 2.0], vec![3.0, 4.0]]];
        assert_eq!(ensemble_mean(&s).unwrap(), s[0]);
        let two = vec![s[0].clone(), vec![vec![3.0, 4.0], vec![5.0, 6.0]]];
        assert_eq!(ensemble_mean(&two).unwrap(), vec![vec![2.0, 3.0], vec![4.0, 5.0]]);
    }

    #[test]
    fn infinite_errors_serialize_as_text() {
        let r = ErrorReport {
            problem: "heat".into(),
            method: Method::Fd,
            boundary: "D-D".into(),
            dt: 0.1,
            dx: 0.15,
            error: f64::INFINITY,
            seconds: 0.0,
            diverged: true,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"error\":\"inf\""), "{json}");
        let back: ErrorReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let finite = ErrorReport { error: 1.5e-9, diverged: false, ..r };
        let back: ErrorReport = serde_json::from_str(&serde_json::to_string(&finite).unwrap()).unwrap();
        assert_eq!(back, finite);
    }
}
