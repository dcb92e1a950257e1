//! Uniform spatial lattices, wavenumber grids and time grids.

use std::f64::consts::PI;

use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64 as C64;

use crate::transforms::TransformKind;
use crate::{Error, Field, Result};

/// One lattice dimension: `points` equally spaced points from `lower` to
/// `upper`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Interval {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::InvalidGrid(format!("bad interval [{lower}, {upper}]")));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!("{points} points on an interval")));
        }
        Ok(Interval { lower, upper, points })
    }

    /// Interval split into `steps` equal steps (`steps + 1` points).
    pub fn with_steps(lower: f64, upper: f64, steps: usize) -> Result<Self> {
        Self::new(lower, upper, steps + 1)
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn step(&self) -> f64 {
        self.length() / (self.points - 1) as f64
    }

    /// Coordinate of 0-based point `j`; the last point is exactly `upper`.
    pub fn coordinate(&self, j: usize) -> f64 {
        if j + 1 == self.points {
            self.upper
        } else {
            self.lower + j as f64 * self.step()
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }
}

/// Rectangular lattice, one [`Interval`] per spatial dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Interval>,
}

impl Grid {
    pub fn new(axes: Vec<Interval>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("no spatial dimensions".into()));
        }
        Ok(Grid { axes })
    }

    pub fn line(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Grid::new(vec![Interval::new(lower, upper, points)?])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, dim: usize) -> &Interval {
        &self.axes[dim]
    }

    pub fn axes(&self) -> &[Interval] {
        &self.axes
    }

    /// Field shape `[components, K_1, ..., K_d]`.
    pub fn field_shape(&self, components: usize) -> Vec<usize> {
        std::iter::once(components)
            .chain(self.axes.iter().map(|a| a.points))
            .collect()
    }

    pub fn zeros(&self, components: usize) -> Field {
        ArrayD::zeros(IxDyn(&self.field_shape(components)))
    }

    /// Total number of lattice points per component.
    pub fn points(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Lattice cell volume `Π Δx_i`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Interval::step).product()
    }

    /// Build a field by evaluating `f(component, x)` at every lattice point.
    pub fn sample<F>(&self, components: usize, f: F) -> Field
    where
        F: Fn(usize, &[f64]) -> C64,
    {
        let coords: Vec<Vec<f64>> = self.axes.iter().map(Interval::coordinates).collect();
        let mut x = vec![0.0; self.dims()];
        ArrayD::from_shape_fn(IxDyn(&self.field_shape(components)), |idx| {
            for (d, xd) in x.iter_mut().enumerate() {
                *xd = coords[d][idx[d + 1]];
            }
            f(idx[0], &x)
        })
    }

    pub fn check_field(&self, field: &Field, components: usize) -> Result<()> {
        let expected = self.field_shape(components);
        if field.shape() != expected.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: format!("{expected:?}"),
                found: format!("{:?}", field.shape()),
            });
        }
        Ok(())
    }
}

/// Uniform time grid with `steps` steps from `start` to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start || steps == 0 {
            return Err(Error::InvalidGrid(format!(
                "bad time grid [{start}, {end}] with {steps} steps"
            )));
        }
        Ok(TimeGrid { start, end, steps })
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    /// Time after `j` steps.
    pub fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.end
        } else {
            self.start + j as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.time(j)).collect()
    }
}

/// Wavenumbers of the modes of a transform on a line of `n_points` points
/// with spacing `dx`, in the order the transform produces them.
///
/// - DST-I: `k_n = nπ/L`, `n = 1..N-2`
/// - DCT-I: `k_n = nπ/L`, `n = 0..N-1`
/// - DST/DCT-II/III: `k_n = (n - 1/2)π/L`, `n = 1..N-1`
/// - FFT: `k_n = nΔk` with `Δk = 2π/(NΔx)`, wrapped so the upper half is negative
///
/// where `L = (N-1)Δx`.
pub fn build_wavenumbers(kind: TransformKind, n_points: usize, dx: f64) -> Result<Vec<f64>> {
    if n_points < 4 {
        return Err(Error::InvalidGrid(format!(
            "wavenumber grid needs at least 4 points, got {n_points}"
        )));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidGrid(format!("bad spacing {dx}")));
    }
    let n_t = kind.transform_len(n_points)?;
    let length = (n_points - 1) as f64 * dx;
    let dk = PI / length;
    let k = match kind {
        TransformKind::Dst1 => (1..=n_t).map(|n| n as f64 * dk).collect(),
        TransformKind::Dct1 => (0..n_t).map(|n| n as f64 * dk).collect(),
        TransformKind::Dst2 | TransformKind::Dst3 | TransformKind::Dct2 | TransformKind::Dct3 => {
            (0..n_t).map(|n| (n as f64 + 0.5) * dk).collect()
        }
        TransformKind::Fft => {
            let dk = 2.0 * PI / (n_points as f64 * dx);
            (0..n_points)
                .map(|n| {
                    let signed = if 2 * n < n_points {
                        n as i64
                    } else {
                        n as i64 - n_points as i64
                    };
                    signed as f64 * dk
                })
                .collect()
        }
    };
    Ok(k)
}

/// Index in FFT output order of the signed mode number `m`.
pub fn fft_index(m: i64, n_points: usize) -> usize {
    m.rem_euclid(n_points as i64) as usize
}
