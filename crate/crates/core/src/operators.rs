//! Linear operators: spectral Laplacian, interaction-picture propagator and
//! the finite-difference baseline.

use std::sync::Arc;

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64 as C64;

use crate::boundaries::{BoundaryPair, BoundarySpec, BoundaryValues};
use crate::lattice::{build_wavenumbers, Grid};
use crate::transforms::{transform_axis, Direction, PlanCache, TransformPlan};
use crate::{Error, Field, Result};

/// Diffusion coefficients `D[component][dimension]` multiplying `∂²/∂x_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoefficients {
    values: Vec<Vec<C64>>,
}

impl LinearCoefficients {
    pub fn new(values: Vec<Vec<C64>>) -> Result<Self> {
        let dims = values.first().map(Vec::len).unwrap_or(0);
        if dims == 0 || values.iter().any(|c| c.len() != dims) {
            return Err(Error::InvalidConfig(
                "linear coefficients need one entry per component and dimension".into(),
            ));
        }
        if values.iter().flatten().any(|d| !(d.re.is_finite() && d.im.is_finite())) {
            return Err(Error::InvalidConfig("non-finite linear coefficient".into()));
        }
        Ok(LinearCoefficients { values })
    }

    pub fn uniform(components: usize, dims: usize, value: C64) -> Self {
        LinearCoefficients {
            values: vec![vec![value; dims]; components],
        }
    }

    /// One coefficient per component, the same in every dimension.
    pub fn per_component(values: &[C64], dims: usize) -> Self {
        LinearCoefficients {
            values: values.iter().map(|&v| vec![v; dims]).collect(),
        }
    }

    pub fn get(&self, component: usize, dim: usize) -> C64 {
        self.values[component][dim]
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn dims(&self) -> usize {
        self.values[0].len()
    }
}

#[derive(Debug, Clone)]
struct ComponentBasis {
    plans: Vec<Arc<TransformPlan>>,
    wavenumbers: Vec<Vec<f64>>,
    /// `Σ_i D_i (-k_i²)` on the lattice index set; zero outside the
    /// transformed points.
    eigen: ArrayD<C64>,
}

/// Transform plans, wavenumbers and Laplacian eigenvalues for every component
/// of a problem on one grid.
#[derive(Debug, Clone)]
pub struct SpectralLayout {
    components: Vec<ComponentBasis>,
    shape: Vec<usize>,
}

impl SpectralLayout {
    /// `pairs[component][dimension]` selects the transform for each axis.
    pub fn new(grid: &Grid, pairs: &[Vec<BoundaryPair>], coeffs: &LinearCoefficients) -> Result<Self> {
        if pairs.len() != coeffs.components() {
            return Err(Error::InvalidConfig(format!(
                "{} boundary components but {} coefficient components",
                pairs.len(),
                coeffs.components()
            )));
        }
        let cache = PlanCache::global();
        let shape: Vec<usize> = grid.axes().iter().map(|a| a.points).collect();
        let mut components = Vec::with_capacity(pairs.len());
        for (c, per_dim) in pairs.iter().enumerate() {
            if per_dim.len() != grid.dims() || coeffs.dims() != grid.dims() {
                return Err(Error::InvalidConfig(format!(
                    "component {c} does not match the {}-dimensional grid",
                    grid.dims()
                )));
            }
            let mut plans = Vec::with_capacity(grid.dims());
            let mut wavenumbers = Vec::with_capacity(grid.dims());
            for (d, pair) in per_dim.iter().enumerate() {
                let axis = grid.axis(d);
                let kind = pair.transform_kind();
                plans.push(cache.get(kind, axis.points)?);
                wavenumbers.push(build_wavenumbers(kind, axis.points, axis.step())?);
            }
            let eigen = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
                let mut total = C64::new(0.0, 0.0);
                for d in 0..shape.len() {
                    let offset = plans[d].offset();
                    let n = idx[d].wrapping_sub(offset);
                    match wavenumbers[d].get(n) {
                        Some(k) => total -= coeffs.get(c, d) * k * k,
                        None => return C64::new(0.0, 0.0),
                    }
                }
                total
            });
            components.push(ComponentBasis {
                plans,
                wavenumbers,
                eigen,
            });
        }
        Ok(SpectralLayout { components, shape })
    }

    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn plan(&self, component: usize, dim: usize) -> &TransformPlan {
        &self.components[component].plans[dim]
    }

    pub fn wavenumbers(&self, component: usize, dim: usize) -> &[f64] {
        &self.components[component].wavenumbers[dim]
    }

    /// Laplacian eigenvalues `Σ_i D_i (-k_i²)` for one component, indexed like
    /// the lattice.
    pub fn eigenvalues(&self, component: usize) -> &ArrayD<C64> {
        &self.components[component].eigen
    }

    fn check(&self, field: &Field) -> Result<()> {
        let ok = field.ndim() == self.shape.len() + 1
            && field.shape()[0] == self.components.len()
            && field.shape()[1..] == self.shape[..];
        if !ok {
            let mut expected = vec![self.components.len()];
            expected.extend_from_slice(&self.shape);
            return Err(Error::ShapeMismatch {
                expected: format!("{expected:?}"),
                found: format!("{:?}", field.shape()),
            });
        }
        Ok(())
    }

    fn transform(&self, field: &mut Field, direction: Direction) -> Result<()> {
        self.check(field)?;
        for (c, basis) in self.components.iter().enumerate() {
            let mut comp = field.index_axis_mut(Axis(0), c);
            for (d, plan) in basis.plans.iter().enumerate() {
                transform_axis(&mut comp, d, plan, direction)?;
            }
        }
        Ok(())
    }

    /// Forward transform of every component along every dimension, in place.
    pub fn forward(&self, field: &mut Field) -> Result<()> {
        self.transform(field, Direction::Forward)
    }

    /// Inverse of [`SpectralLayout::forward`], in place.
    pub fn inverse(&self, field: &mut Field) -> Result<()> {
        self.transform(field, Direction::Inverse)
    }

    /// `Σ_i D_i ∂²v/∂x_i²` for a field obeying the homogeneous boundary
    /// conditions of the layout's transforms.
    pub fn laplacian(&self, v: &Field) -> Result<Field> {
        let mut out = v.clone();
        self.forward(&mut out)?;
        for (c, basis) in self.components.iter().enumerate() {
            let mut comp = out.index_axis_mut(Axis(0), c);
            comp *= &basis.eigen;
        }
        self.inverse(&mut out)?;
        Ok(out)
    }

    /// Propagator `exp(τ Σ_i D_i (-k_i²))` for every mode.
    pub fn propagator(&self, tau: f64) -> Propagator {
        Propagator {
            tau,
            factors: self
                .components
                .iter()
                .map(|b| b.eigen.mapv(|l| (l * tau).exp()))
                .collect(),
        }
    }

    /// Propagate a homogeneous field in physical space by `prop`.
    pub fn propagate(&self, v: &Field, prop: &Propagator) -> Result<Field> {
        let mut out = v.clone();
        self.forward(&mut out)?;
        apply_propagator(prop, &mut out)?;
        self.inverse(&mut out)?;
        Ok(out)
    }
}

/// Diagonal spectral propagator over a time offset `tau`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub tau: f64,
    factors: Vec<ArrayD<C64>>,
}

impl Propagator {
    pub fn factors(&self, component: usize) -> &ArrayD<C64> {
        &self.factors[component]
    }
}

/// Multiply a spectral field by the propagator factors.
pub fn apply_propagator(prop: &Propagator, spectral: &mut Field) -> Result<()> {
    if spectral.shape()[0] != prop.factors.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} components", prop.factors.len()),
            found: format!("{}", spectral.shape()[0]),
        });
    }
    for (c, f) in prop.factors.iter().enumerate() {
        let mut comp = spectral.index_axis_mut(Axis(0), c);
        if comp.shape() != f.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", f.shape()),
                found: format!("{:?}", comp.shape()),
            });
        }
        comp *= f;
    }
    Ok(())
}

pub fn build_propagator(
    coeffs: &LinearCoefficients,
    grid: &Grid,
    pairs: &[Vec<BoundaryPair>],
    tau: f64,
) -> Result<Propagator> {
    Ok(SpectralLayout::new(grid, pairs, coeffs)?.propagator(tau))
}

pub fn spectral_laplacian(
    v: &Field,
    grid: &Grid,
    pairs: &[Vec<BoundaryPair>],
    coeffs: &LinearCoefficients,
) -> Result<Field> {
    SpectralLayout::new(grid, pairs, coeffs)?.laplacian(v)
}

/// Second-order central-difference Laplacian `Σ_i D_i ∂²u/∂x_i²`.
///
/// Dirichlet ends replace the boundary sample by the prescribed value and
/// leave the boundary row at zero (the integrator drives those points
/// directly). Neumann ends use a ghost point `u_{-1} = u_1 - 2Δx n_a`
/// (and mirrored at the upper end). Periodic axes wrap.
pub fn fd_laplacian(
    u: &Field,
    grid: &Grid,
    coeffs: &LinearCoefficients,
    boundary: &BoundarySpec,
    t: f64,
) -> Result<Field> {
    grid.check_field(u, boundary.components())?;
    boundary.check_grid(grid)?;
    let mut out = grid.zeros(boundary.components());
    for c in 0..boundary.components() {
        let src = u.index_axis(Axis(0), c);
        let mut dst = out.index_axis_mut(Axis(0), c);
        for d in 0..grid.dims() {
            let axis = boundary.axis(c, d);
            let pair = axis.pair();
            let values = axis.values(t);
            let scale = coeffs.get(c, d) / (grid.axis(d).step() * grid.axis(d).step());
            let dx = grid.axis(d).step();
            for (lane_in, mut lane_out) in src.lanes(Axis(d)).into_iter().zip(dst.lanes_mut(Axis(d))) {
                let line: Vec<C64> = lane_in.iter().copied().collect();
                let second = fd_second_difference(&line, pair, values, dx);
                for (o, s) in lane_out.iter_mut().zip(second) {
                    *o += scale * s;
                }
            }
        }
    }
    Ok(out)
}

/// Unscaled second difference `u_{j-1} - 2u_j + u_{j+1}` with boundary closure.
fn fd_second_difference(u: &[C64], pair: BoundaryPair, values: BoundaryValues, dx: f64) -> Vec<C64> {
    let n = u.len();
    let zero = C64::new(0.0, 0.0);
    let (lower, upper) = pair.kinds();
    use crate::boundaries::BoundaryKind::*;
    let mut line = u.to_vec();
    if lower == Dirichlet {
        line[0] = values.lower;
    }
    if upper == Dirichlet {
        line[n - 1] = values.upper;
    }
    let mut out = vec![zero; n];
    for j in 1..n - 1 {
        out[j] = line[j - 1] - 2.0 * line[j] + line[j + 1];
    }
    out[0] = match lower {
        Dirichlet => zero,
        Neumann => 2.0 * (line[1] - line[0]) - 2.0 * dx * values.lower,
        Periodic => line[n - 1] - 2.0 * line[0] + line[1],
    };
    out[n - 1] = match upper {
        Dirichlet => zero,
        Neumann => 2.0 * (line[n - 2] - line[n - 1]) + 2.0 * dx * values.upper,
        Periodic => line[n - 2] - 2.0 * line[n - 1] + line[0],
    };
    out
}

/// Second-order finite-difference gradient along lattice dimension `dim`
/// (central inside, one-sided three-point stencils at the ends).
pub fn fd_gradient(u: &Field, grid: &Grid, dim: usize) -> Result<Field> {
    if dim >= grid.dims() {
        return Err(Error::InvalidGrid(format!("no dimension {dim}")));
    }
    grid.check_field(u, u.shape()[0])?;
    let n = grid.axis(dim).points;
    if n < 3 {
        return Err(Error::InvalidGrid("gradient needs at least 3 points".into()));
    }
    let h2 = 2.0 * grid.axis(dim).step();
    let mut out = u.clone();
    for (lane_in, mut lane_out) in u.lanes(Axis(dim + 1)).into_iter().zip(out.lanes_mut(Axis(dim + 1))) {
        lane_out[0] = (-3.0 * lane_in[0] + 4.0 * lane_in[1] - lane_in[2]) / h2;
        for j in 1..n - 1 {
            lane_out[j] = (lane_in[j + 1] - lane_in[j - 1]) / h2;
        }
        lane_out[n - 1] = (3.0 * lane_in[n - 1] - 4.0 * lane_in[n - 2] + lane_in[n - 3]) / h2;
    }
    Ok(out)
}

/// Derivative matrix `D_ln = (2k_n²/N) Σ_m sin(k_n x_m) sin(k_l x_m)` of the
/// half-mode basis `k_n = (n - 1/2)π/L` on the half-sample lattice
/// `x_m = (m - 1/2)Δx`, `Δx = L/N`. Row `l`, column `n`, both 0-based.
pub fn half_lattice_derivative_matrix(n: usize, length: f64) -> Vec<Vec<f64>> {
    let dx = length / n as f64;
    let k: Vec<f64> = (1..=n)
        .map(|i| (i as f64 - 0.5) * std::f64::consts::PI / length)
        .collect();
    let x: Vec<f64> = (1..=n).map(|m| (m as f64 - 0.5) * dx).collect();
    (0..n)
        .map(|l| {
            (0..n)
                .map(|col| {
                    let s: f64 = x.iter().map(|&xm| (k[col] * xm).sin() * (k[l] * xm).sin()).sum();
                    2.0 * k[col] * k[col] / n as f64 * s
                })
                .collect()
        })
        .collect()
}

/// Galerkin mass and stiffness matrices of the half-mode sine basis on
/// `[0, 1]`, by composite Simpson quadrature with `intervals` (even)
/// sub-intervals: `A_ij = ∫ φ_i φ_j`, `B_ij = ∫ φ_i' φ_j'`.
pub fn galerkin_matrices(modes: usize, intervals: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = intervals + intervals % 2;
    let h = 1.0 / m as f64;
    let k: Vec<f64> = (1..=modes)
        .map(|i| (i as f64 - 0.5) * std::f64::consts::PI)
        .collect();
    let mut a = vec![vec![0.0; modes]; modes];
    let mut b = vec![vec![0.0; modes]; modes];
    for q in 0..=m {
        let w = match q {
            0 => 1.0,
            q if q == m => 1.0,
            q if q % 2 == 1 => 4.0,
            _ => 2.0,
        } * h
            / 3.0;
        let x = q as f64 * h;
        let s: Vec<f64> = k.iter().map(|kk| (kk * x).sin()).collect();
        let c: Vec<f64> = k.iter().map(|kk| kk * (kk * x).cos()).collect();
        for i in 0..modes {
            for j in 0..modes {
                a[i][j] += w * s[i] * s[j];
                b[i][j] += w * c[i] * c[j];
            }
        }
    }
    (a, b)
}

/// Solve `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let cols = b.first().map(Vec::len).unwrap_or(0);
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().chain(rb).copied().collect())
        .collect();
    for p in 0..n {
        let pivot = (p..n)
            .max_by(|&i, &j| m[i][p].abs().total_cmp(&m[j][p].abs()))
            .unwrap_or(p);
        if m[pivot][p].abs() < 1e-300 {
            return Err(Error::InvalidConfig("singular matrix".into()));
        }
        m.swap(p, pivot);
        let row = m[p].clone();
        for (i, r) in m.iter_mut().enumerate() {
            let f = r[p] / row[p];
            if i != p && f != 0.0 {
                for (x, y) in r[p..].iter_mut().zip(&row[p..]) {
                    *x -= f * y;
                }
            }
        }
    }
    Ok((0..n)
        .map(|i| (0..cols).map(|j| m[i][n + j] / m[i][i]).collect())
        .collect())
}
