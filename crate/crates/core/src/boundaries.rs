//! Boundary conditions and the polynomial patch functions that turn an
//! inhomogeneous boundary problem into a homogeneous one.
//!
//! A patch `P` satisfies the prescribed boundary values (or derivatives) and
//! solves the linear diffusion equation on its own, so `v = u - P` obeys
//! homogeneous conditions that the sine/cosine bases satisfy exactly:
//!
//! - D-D: `P = u_a + (x - x_a)/(x_b - x_a) (u_b - u_a)`
//! - N-N: `P = ε(t - t_ref) + n_a (x - x_a) + ½ (x - x_a)²/(x_b - x_a) (n_b - n_a)`,
//!   with `ε = D (n_b - n_a)/(x_b - x_a)`
//! - D-N: `P = u_a + (x - x_a) n_b`
//! - N-D: `P = u_b + (x - x_b) n_a`

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{ArrayViewMutD, Axis};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::lattice::Grid;
use crate::operators::LinearCoefficients;
use crate::transforms::TransformKind;
use crate::{Error, Field, Result};

/// Time-dependent boundary value (field units, or field units per length for
/// Neumann ends).
pub type BoundaryFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
    Neumann,
}

/// Condition at one end of one dimension for one component.
#[derive(Clone)]
pub enum EndCondition {
    Periodic,
    Dirichlet(BoundaryFn),
    Neumann(BoundaryFn),
}

impl fmt::Debug for EndCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndCondition::Periodic => "Periodic",
            EndCondition::Dirichlet(_) => "Dirichlet(..)",
            EndCondition::Neumann(_) => "Neumann(..)",
        })
    }
}

impl EndCondition {
    pub fn dirichlet<F: Fn(f64) -> C64 + Send + Sync + 'static>(f: F) -> Self {
        EndCondition::Dirichlet(Arc::new(f))
    }

    pub fn neumann<F: Fn(f64) -> C64 + Send + Sync + 'static>(f: F) -> Self {
        EndCondition::Neumann(Arc::new(f))
    }

    pub fn zero(kind: BoundaryKind) -> Self {
        match kind {
            BoundaryKind::Periodic => EndCondition::Periodic,
            BoundaryKind::Dirichlet => EndCondition::dirichlet(|_| C64::new(0.0, 0.0)),
            BoundaryKind::Neumann => EndCondition::neumann(|_| C64::new(0.0, 0.0)),
        }
    }

    pub fn kind(&self) -> BoundaryKind {
        match self {
            EndCondition::Periodic => BoundaryKind::Periodic,
            EndCondition::Dirichlet(_) => BoundaryKind::Dirichlet,
            EndCondition::Neumann(_) => BoundaryKind::Neumann,
        }
    }

    /// Prescribed value or derivative at time `t`; zero for periodic ends.
    pub fn value(&self, t: f64) -> C64 {
        match self {
            EndCondition::Periodic => C64::new(0.0, 0.0),
            EndCondition::Dirichlet(f) | EndCondition::Neumann(f) => f(t),
        }
    }
}

/// Boundary-type combination on one dimension, lower end first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryPair {
    PP,
    DD,
    NN,
    DN,
    ND,
}

impl BoundaryPair {
    pub const NON_PERIODIC: [BoundaryPair; 4] =
        [BoundaryPair::DD, BoundaryPair::NN, BoundaryPair::DN, BoundaryPair::ND];

    pub fn from_kinds(lower: BoundaryKind, upper: BoundaryKind) -> Result<Self> {
        use BoundaryKind::*;
        Ok(match (lower, upper) {
            (Periodic, Periodic) => BoundaryPair::PP,
            (Dirichlet, Dirichlet) => BoundaryPair::DD,
            (Neumann, Neumann) => BoundaryPair::NN,
            (Dirichlet, Neumann) => BoundaryPair::DN,
            (Neumann, Dirichlet) => BoundaryPair::ND,
            _ => {
                return Err(Error::InvalidBoundary(
                    "periodic boundaries cannot be combined with other types".into(),
                ))
            }
        })
    }

    pub fn kinds(self) -> (BoundaryKind, BoundaryKind) {
        use BoundaryKind::*;
        match self {
            BoundaryPair::PP => (Periodic, Periodic),
            BoundaryPair::DD => (Dirichlet, Dirichlet),
            BoundaryPair::NN => (Neumann, Neumann),
            BoundaryPair::DN => (Dirichlet, Neumann),
            BoundaryPair::ND => (Neumann, Dirichlet),
        }
    }

    /// Analysis transform whose basis obeys the homogeneous version of this pair.
    pub fn transform_kind(self) -> TransformKind {
        match self {
            BoundaryPair::PP => TransformKind::Fft,
            BoundaryPair::DD => TransformKind::Dst1,
            BoundaryPair::NN => TransformKind::Dct1,
            BoundaryPair::DN => TransformKind::Dst3,
            BoundaryPair::ND => TransformKind::Dct3,
        }
    }
}

impl fmt::Display for BoundaryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryPair::PP => "P-P",
            BoundaryPair::DD => "D-D",
            BoundaryPair::NN => "N-N",
            BoundaryPair::DN => "D-N",
            BoundaryPair::ND => "N-D",
        })
    }
}

impl FromStr for BoundaryPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .map(|c| c.to_ascii_uppercase())
            .collect();
        match key.as_str() {
            "PP" => Ok(BoundaryPair::PP),
            "DD" => Ok(BoundaryPair::DD),
            "NN" => Ok(BoundaryPair::NN),
            "DN" => Ok(BoundaryPair::DN),
            "ND" => Ok(BoundaryPair::ND),
            _ => Err(Error::Unknown {
                what: "boundary pair",
                name: s.to_string(),
            }),
        }
    }
}

/// Conditions at both ends of one dimension.
#[derive(Debug, Clone)]
pub struct AxisBoundary {
    pub lower: EndCondition,
    pub upper: EndCondition,
}

impl AxisBoundary {
    pub fn new(lower: EndCondition, upper: EndCondition) -> Result<Self> {
        BoundaryPair::from_kinds(lower.kind(), upper.kind())?;
        Ok(AxisBoundary { lower, upper })
    }

    pub fn periodic() -> Self {
        AxisBoundary {
            lower: EndCondition::Periodic,
            upper: EndCondition::Periodic,
        }
    }

    /// Homogeneous (zero-valued) conditions of the given pair.
    pub fn zero(pair: BoundaryPair) -> Self {
        let (a, b) = pair.kinds();
        AxisBoundary {
            lower: EndCondition::zero(a),
            upper: EndCondition::zero(b),
        }
    }

    pub fn pair(&self) -> BoundaryPair {
        BoundaryPair::from_kinds(self.lower.kind(), self.upper.kind())
            .expect("validated at construction")
    }

    pub fn values(&self, t: f64) -> BoundaryValues {
        BoundaryValues {
            lower: self.lower.value(t),
            upper: self.upper.value(t),
        }
    }
}

/// Boundary values sampled at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    pub lower: C64,
    pub upper: C64,
}

/// Per component, per dimension boundary conditions.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    axes: Vec<Vec<AxisBoundary>>,
}

impl BoundarySpec {
    /// `axes[component][dimension]`.
    pub fn new(axes: Vec<Vec<AxisBoundary>>) -> Result<Self> {
        let dims = axes.first().map(Vec::len).unwrap_or(0);
        if axes.is_empty() || dims == 0 {
            return Err(Error::InvalidBoundary("empty boundary specification".into()));
        }
        if axes.iter().any(|c| c.len() != dims) {
            return Err(Error::InvalidBoundary(
                "every component needs one entry per dimension".into(),
            ));
        }
        for c in &axes {
            for a in c {
                BoundaryPair::from_kinds(a.lower.kind(), a.upper.kind())?;
            }
        }
        Ok(BoundarySpec { axes })
    }

    /// The same conditions for every component and dimension.
    pub fn uniform(components: usize, dims: usize, axis: AxisBoundary) -> Self {
        BoundarySpec {
            axes: vec![vec![axis; dims]; components],
        }
    }

    pub fn components(&self) -> usize {
        self.axes.len()
    }

    pub fn dims(&self) -> usize {
        self.axes[0].len()
    }

    pub fn axis(&self, component: usize, dim: usize) -> &AxisBoundary {
        &self.axes[component][dim]
    }

    pub fn pairs(&self) -> Vec<Vec<BoundaryPair>> {
        self.axes
            .iter()
            .map(|c| c.iter().map(AxisBoundary::pair).collect())
            .collect()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.dims() != grid.dims() {
            return Err(Error::InvalidBoundary(format!(
                "{} boundary dimensions for a {}-dimensional grid",
                self.dims(),
                grid.dims()
            )));
        }
        Ok(())
    }
}

/// Polynomial patch for one component along one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Patch {
    pub pair: BoundaryPair,
    pub x_a: f64,
    pub x_b: f64,
    pub u_a: C64,
    pub u_b: C64,
    pub n_a: C64,
    pub n_b: C64,
    /// Drift rate `ε` (N-N only, zero otherwise).
    pub drift: C64,
    pub t_ref: f64,
}

/// Build the patch for `pair` from boundary values sampled at `t_ref`.
///
/// `values.lower` / `values.upper` are read as Dirichlet values or Neumann
/// derivatives according to `pair`.
pub fn make_patch(
    pair: BoundaryPair,
    values: BoundaryValues,
    x_a: f64,
    x_b: f64,
    diffusion: C64,
    t_ref: f64,
) -> Result<Patch> {
    let zero = C64::new(0.0, 0.0);
    let mut p = Patch {
        pair,
        x_a,
        x_b,
        u_a: zero,
        u_b: zero,
        n_a: zero,
        n_b: zero,
        drift: zero,
        t_ref,
    };
    match pair {
        BoundaryPair::PP => return Err(Error::NoPatch),
        BoundaryPair::DD => {
            p.u_a = values.lower;
            p.u_b = values.upper;
        }
        BoundaryPair::NN => {
            p.n_a = values.lower;
            p.n_b = values.upper;
            p.drift = diffusion * (p.n_b - p.n_a) / (x_b - x_a);
        }
        BoundaryPair::DN => {
            p.u_a = values.lower;
            p.n_b = values.upper;
        }
        BoundaryPair::ND => {
            p.n_a = values.lower;
            p.u_b = values.upper;
        }
    }
    Ok(p)
}

impl Patch {
    /// Spatial part of the patch (the drift term vanishes at `t_ref`).
    pub fn spatial(&self, x: f64) -> C64 {
        let l = self.x_b - self.x_a;
        match self.pair {
            BoundaryPair::PP => C64::new(0.0, 0.0),
            BoundaryPair::DD => self.u_a + (x - self.x_a) / l * (self.u_b - self.u_a),
            BoundaryPair::NN => {
                let s = x - self.x_a;
                self.n_a * s + 0.5 * s * s / l * (self.n_b - self.n_a)
            }
            BoundaryPair::DN => self.u_a + (x - self.x_a) * self.n_b,
            BoundaryPair::ND => self.u_b + (x - self.x_b) * self.n_a,
        }
    }

    pub fn value(&self, t: f64, x: f64) -> C64 {
        self.spatial(x) + self.drift * (t - self.t_ref)
    }

    pub fn derivative(&self, x: f64) -> C64 {
        let l = self.x_b - self.x_a;
        match self.pair {
            BoundaryPair::PP => C64::new(0.0, 0.0),
            BoundaryPair::DD => (self.u_b - self.u_a) / l,
            BoundaryPair::NN => self.n_a + (x - self.x_a) / l * (self.n_b - self.n_a),
            BoundaryPair::DN => self.n_b,
            BoundaryPair::ND => self.n_a,
        }
    }

    /// `∂²P/∂x²`: zero except for N-N.
    pub fn second_derivative(&self) -> C64 {
        match self.pair {
            BoundaryPair::NN => (self.n_b - self.n_a) / (self.x_b - self.x_a),
            _ => C64::new(0.0, 0.0),
        }
    }
}

pub fn evaluate_patch(patch: &Patch, t: f64, xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| patch.value(t, x)).collect()
}

pub fn patch_second_derivative(patch: &Patch) -> C64 {
    patch.second_derivative()
}

/// Patches for every component and dimension at one instant.
///
/// In more than one dimension the per-dimension patches are summed.
#[derive(Debug, Clone)]
pub struct PatchSet {
    /// `patches[component][dimension]`, `None` for periodic dimensions.
    patches: Vec<Vec<Option<Patch>>>,
    coords: Vec<Vec<f64>>,
}

impl PatchSet {
    /// Patches from boundary values sampled at `t`.
    pub fn build(
        spec: &BoundarySpec,
        grid: &Grid,
        coeffs: &LinearCoefficients,
        t: f64,
    ) -> Result<Self> {
        spec.check_grid(grid)?;
        let mut patches = Vec::with_capacity(spec.components());
        for c in 0..spec.components() {
            let mut per_dim = Vec::with_capacity(grid.dims());
            for d in 0..grid.dims() {
                let axis = spec.axis(c, d);
                let iv = grid.axis(d);
                per_dim.push(match axis.pair() {
                    BoundaryPair::PP => None,
                    pair => Some(make_patch(
                        pair,
                        axis.values(t),
                        iv.lower,
                        iv.upper,
                        coeffs.get(c, d),
                        t,
                    )?),
                });
            }
            patches.push(per_dim);
        }
        Ok(PatchSet {
            patches,
            coords: grid.axes().iter().map(|a| a.coordinates()).collect(),
        })
    }

    pub fn patch(&self, component: usize, dim: usize) -> Option<&Patch> {
        self.patches[component][dim].as_ref()
    }

    /// `Σ_i D_i ∂²P_i/∂x_i²` for one component.
    pub fn laplacian(&self, component: usize, coeffs: &LinearCoefficients) -> C64 {
        self.patches[component]
            .iter()
            .enumerate()
            .filter_map(|(d, p)| p.map(|p| coeffs.get(component, d) * p.second_derivative()))
            .sum()
    }

    /// Total drift rate of one component.
    pub fn drift(&self, component: usize) -> C64 {
        self.patches[component].iter().flatten().map(|p| p.drift).sum()
    }

    fn accumulate(&self, field: &mut Field, t: f64, sign: f64) {
        for (c, per_dim) in self.patches.iter().enumerate() {
            let mut comp = field.index_axis_mut(Axis(0), c);
            for (d, patch) in per_dim.iter().enumerate() {
                if let Some(p) = patch {
                    let line: Vec<C64> = self.coords[d]
                        .iter()
                        .map(|&x| sign * p.value(t, x))
                        .collect();
                    add_along_axis(&mut comp, d, &line);
                }
            }
        }
    }

    /// `u - P(t)`.
    pub fn subtract(&self, u: &Field, t: f64) -> Field {
        let mut v = u.clone();
        self.accumulate(&mut v, t, -1.0);
        v
    }

    /// `v + P(t)`.
    pub fn add(&self, v: &Field, t: f64) -> Field {
        let mut u = v.clone();
        self.accumulate(&mut u, t, 1.0);
        u
    }

    pub fn subtract_in_place(&self, u: &mut Field, t: f64) {
        self.accumulate(u, t, -1.0);
    }

    pub fn add_in_place(&self, v: &mut Field, t: f64) {
        self.accumulate(v, t, 1.0);
    }
}

fn add_along_axis(view: &mut ArrayViewMutD<'_, C64>, axis: usize, line: &[C64]) {
    for mut lane in view.lanes_mut(Axis(axis)) {
        for (v, p) in lane.iter_mut().zip(line) {
            *v += p;
        }
    }
}

/// `u - P` evaluated at the patch reference time.
pub fn subtract_patch(u: &Field, patches: &PatchSet, grid: &Grid) -> Result<Field> {
    check_shape(u, patches, grid)?;
    Ok(patches.subtract(u, patch_time(patches)))
}

/// `v + P` evaluated at the patch reference time.
pub fn add_patch(v: &Field, patches: &PatchSet, grid: &Grid) -> Result<Field> {
    check_shape(v, patches, grid)?;
    Ok(patches.add(v, patch_time(patches)))
}

fn patch_time(patches: &PatchSet) -> f64 {
    patches
        .patches
        .iter()
        .flatten()
        .flatten()
        .map(|p| p.t_ref)
        .next()
        .unwrap_or(0.0)
}

fn check_shape(u: &Field, patches: &PatchSet, grid: &Grid) -> Result<()> {
    grid.check_field(u, patches.patches.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn vals(a: f64, b: f64) -> BoundaryValues {
        BoundaryValues { lower: c(a), upper: c(b) }
    }

    #[test]
    fn periodic_needs_no_patch() {
        assert!(matches!(
            make_patch(BoundaryPair::PP, vals(0.0, 0.0), 0.0, 1.0, c(1.0), 0.0),
            Err(Error::NoPatch)
        ));
    }

    #[test]
    fn periodic_cannot_mix() {
        assert!(AxisBoundary::new(EndCondition::Periodic, EndCondition::zero(BoundaryKind::Dirichlet)).is_err());
        assert!(BoundaryPair::from_kinds(BoundaryKind::Neumann, BoundaryKind::Periodic).is_err());
    }

    #[test]
    fn dirichlet_dirichlet_linear_interpolant() {
        let p = make_patch(BoundaryPair::DD, vals(0.0, 0.0), 0.0, 1.0, c(1.0), 0.0).unwrap();
        assert_eq!(evaluate_patch(&p, 0.3, &[0.0, 0.4, 1.0]), vec![c(0.0); 3]);

        let p = make_patch(BoundaryPair::DD, vals(1.0, 3.0), 0.0, 1.0, c(1.0), 0.0).unwrap();
        assert_eq!(p.value(0.0, 0.0), c(1.0));
        assert_eq!(p.value(0.0, 1.0), c(3.0));
        assert!((p.value(0.0, 0.25) - c(1.5)).norm() < 1e-15);
        assert_eq!(patch_second_derivative(&p), c(0.0));
    }

    #[test]
    fn neumann_neumann_with_drift() {
        let p = make_patch(BoundaryPair::NN, vals(0.0, 2.0), 0.0, 1.0, c(1.0), 0.0).unwrap();
        assert_eq!(p.drift, c(2.0));
        assert_eq!(p.derivative(0.0), c(0.0));
        assert_eq!(p.derivative(1.0), c(2.0));
        assert!((p.value(0.0, 0.5) - c(0.25)).norm() < 1e-15);
        // v = 2(t - t0) + x²
        assert!((p.value(0.5, 0.5) - c(1.25)).norm() < 1e-15);
        assert_eq!(p.second_derivative(), c(2.0));
    }

    #[test]
    fn mixed_patches() {
        let p = make_patch(BoundaryPair::DN, vals(0.0, 0.0), -1.0, 1.0, c(1.0), 0.0).unwrap();
        assert!(evaluate_patch(&p, 0.0, &[-1.0, 0.0, 1.0]).iter().all(|v| v.norm() == 0.0));
        let p = make_patch(BoundaryPair::DN, vals(2.0, -1.0), -1.0, 1.0, c(1.0), 0.0).unwrap();
        assert_eq!(p.value(0.0, -1.0), c(2.0));
        assert_eq!(p.derivative(1.0), c(-1.0));
        let p = make_patch(BoundaryPair::ND, vals(0.5, 4.0), -1.0, 1.0, c(1.0), 0.0).unwrap();
        assert_eq!(p.value(0.0, 1.0), c(4.0));
        assert_eq!(p.derivative(-1.0), c(0.5));
        assert_eq!(p.second_derivative(), c(0.0));
    }

    #[test]
    fn zero_boundary_heat_solution_is_its_own_remainder() {
        let grid = Grid::line(0.0, PI, 21).unwrap();
        let spec = BoundarySpec::uniform(1, 1, AxisBoundary::zero(BoundaryPair::DD));
        let coeffs = LinearCoefficients::uniform(1, 1, c(1.0));
        let set = PatchSet::build(&spec, &grid, &coeffs, 0.7).unwrap();
        let u = grid.sample(1, |_, x| {
            c(4.0 * x[0].sin() * (-0.7f64).exp() + (2.0 * x[0]).sin() * (-2.8f64).exp())
        });
        let v = subtract_patch(&u, &set, &grid).unwrap();
        assert_eq!(v, u);
    }

    #[test]
    fn soliton_boundary_values_are_removed() {
        let xm: f64 = 2.0;
        let t = 1.3;
        let bv = move |_: f64| C64::from_polar(1.0 / xm.cosh(), t / 2.0);
        let axis = AxisBoundary::new(EndCondition::dirichlet(bv), EndCondition::dirichlet(bv)).unwrap();
        let spec = BoundarySpec::new(vec![vec![axis]]).unwrap();
        let grid = Grid::line(-xm, xm, 41).unwrap();
        let coeffs = LinearCoefficients::uniform(1, 1, C64::new(0.0, 0.5));
        let set = PatchSet::build(&spec, &grid, &coeffs, t).unwrap();
        let u = grid.sample(1, |_, x| C64::from_polar(1.0 / x[0].cosh(), t / 2.0));
        let v = subtract_patch(&u, &set, &grid).unwrap();
        assert!(v[[0, 0]].norm() < 1e-15 && v[[0, 40]].norm() < 1e-15);
        let back = add_patch(&v, &set, &grid).unwrap();
        assert!((&back - &u).iter().all(|d| d.norm() < 1e-15));
    }

    #[test]
    fn parse_pairs() {
        assert_eq!("d-n".parse::<BoundaryPair>().unwrap(), BoundaryPair::DN);
        assert_eq!("NN".parse::<BoundaryPair>().unwrap(), BoundaryPair::NN);
        assert!("DX".parse::<BoundaryPair>().is_err());
        assert_eq!(BoundaryPair::ND.to_string(), "N-D");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cplx() -> impl Strategy<Value = C64> {
            (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| C64::new(a, b))
        }

        fn pair() -> impl Strategy<Value = BoundaryPair> {
            prop::sample::select(BoundaryPair::NON_PERIODIC.to_vec())
        }

        /// A quadratic obeying the boundary data of `pair`, with free
        /// curvature `curv`.
        fn matching_quadratic(pair: BoundaryPair, lo: C64, hi: C64, a: f64, b: f64, curv: C64, x: f64) -> C64 {
            let l = b - a;
            match pair {
                BoundaryPair::DD => lo + (hi - lo) * (x - a) / l + curv * (x - a) * (x - b),
                BoundaryPair::NN => lo * (x - a) + (hi - lo) * (x - a) * (x - a) / (2.0 * l) + curv,
                BoundaryPair::DN => lo + hi * (x - a) + curv * (x - a) * (x - a - 2.0 * l),
                BoundaryPair::ND => hi + lo * (x - b) + curv * ((x - a) * (x - a) - l * l),
                BoundaryPair::PP => unreachable!(),
            }
        }

        proptest! {
            #[test]
            fn remainder_is_homogeneous(
                pair in pair(), lo in cplx(), hi in cplx(), curv in cplx(),
                a in -3.0..0.0f64, len in 0.5..4.0f64, points in 8usize..40,
            ) {
                let b = a + len;
                let grid = Grid::line(a, b, points).unwrap();
                let values = BoundaryValues { lower: lo, upper: hi };
                let (kl, ku) = pair.kinds();
                let lower = if kl == BoundaryKind::Dirichlet { EndCondition::dirichlet(move |_| lo) } else { EndCondition::neumann(move |_| lo) };
                let upper = if ku == BoundaryKind::Dirichlet { EndCondition::dirichlet(move |_| hi) } else { EndCondition::neumann(move |_| hi) };
                let spec = BoundarySpec::new(vec![vec![AxisBoundary::new(lower, upper).unwrap()]]).unwrap();
                let coeffs = LinearCoefficients::uniform(1, 1, C64::new(0.3, 0.7));
                let set = PatchSet::build(&spec, &grid, &coeffs, 0.4).unwrap();
                prop_assert_eq!(set.patch(0, 0).unwrap().u_a, make_patch(pair, values, a, b, coeffs.get(0, 0), 0.4).unwrap().u_a);

                let u = grid.sample(1, |_, x| matching_quadratic(pair, lo, hi, a, b, curv, x[0]));
                let scale = u.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let v = subtract_patch(&u, &set, &grid).unwrap();
                let dx = grid.axis(0).step();
                let n = points - 1;
                let d_lo = (-3.0 * v[[0, 0]] + 4.0 * v[[0, 1]] - v[[0, 2]]) / (2.0 * dx);
                let d_hi = (3.0 * v[[0, n]] - 4.0 * v[[0, n - 1]] + v[[0, n - 2]]) / (2.0 * dx);
                let (lower_ok, upper_ok) = match pair {
                    BoundaryPair::DD => (v[[0, 0]].norm(), v[[0, n]].norm()),
                    BoundaryPair::NN => (d_lo.norm() * 1e-4, d_hi.norm() * 1e-4),
                    BoundaryPair::DN => (v[[0, 0]].norm(), d_hi.norm() * 1e-4),
                    BoundaryPair::ND => (d_lo.norm() * 1e-4, v[[0, n]].norm()),
                    BoundaryPair::PP => unreachable!(),
                };
                // Dirichlet ends to 1e-12, Neumann slopes to 1e-8 (scaled by 1e-4 above)
                prop_assert!(lower_ok < 1e-12 * scale, "lower {}", lower_ok);
                prop_assert!(upper_ok < 1e-12 * scale, "upper {}", upper_ok);

                let back = add_patch(&v, &set, &grid).unwrap();
                let err = (&back - &u).iter().map(|d| d.norm()).fold(0.0, f64::max);
                prop_assert!(err < 1e-13 * scale);
            }

            #[test]
            fn only_neumann_pairs_curve(pair in pair(), lo in cplx(), hi in cplx(), len in 0.5..4.0f64) {
                let p = make_patch(pair, BoundaryValues { lower: lo, upper: hi }, 0.0, len, C64::new(1.0, 0.0), 0.0).unwrap();
                if pair == BoundaryPair::NN {
                    prop_assert!((p.second_derivative() - (hi - lo) / len).norm() < 1e-14 * (1.0 + (hi - lo).norm() / len));
                    prop_assert!((p.drift - p.second_derivative()).norm() < 1e-14 * (1.0 + p.drift.norm()));
                } else {
                    prop_assert_eq!(p.second_derivative(), C64::new(0.0, 0.0));
                    prop_assert_eq!(p.drift, C64::new(0.0, 0.0));
                }
            }
        }
    }
}
