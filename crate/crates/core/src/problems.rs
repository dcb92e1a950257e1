//! Benchmark catalog: equations, boundary data, initial conditions and exact
//! solutions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::boundaries::{AxisBoundary, BoundaryKind, BoundaryPair, BoundarySpec, EndCondition};
use crate::lattice::{Grid, TimeGrid};
use crate::operators::LinearCoefficients;
use crate::{Error, Result};

/// Local part of the derivative: `g(t, x, u) -> out`, one entry per component.
pub type LocalFn = Arc<dyn Fn(f64, &[f64], &[C64], &mut [C64]) + Send + Sync>;

/// Function of `(component, t, x)`.
pub type FieldFn = Arc<dyn Fn(usize, f64, &[f64]) -> C64 + Send + Sync>;

/// Quantity compared against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Real,
    Modulus,
    ModulusSquared,
}

impl Observable {
    pub fn apply(self, u: C64) -> f64 {
        match self {
            Observable::Real => u.re,
            Observable::Modulus => u.norm(),
            Observable::ModulusSquared => u.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    Heat,
    HeatNonperiodic,
    NlseShifted,
    NlseSoliton,
    Peregrine,
    Breather,
    DoubleSimulton,
    TripleSimulton,
    StochasticHeat,
}

impl ProblemId {
    pub const ALL: [ProblemId; 9] = [
        ProblemId::Heat,
        ProblemId::HeatNonperiodic,
        ProblemId::NlseShifted,
        ProblemId::NlseSoliton,
        ProblemId::Peregrine,
        ProblemId::Breather,
        ProblemId::DoubleSimulton,
        ProblemId::TripleSimulton,
        ProblemId::StochasticHeat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Heat => "heat",
            ProblemId::HeatNonperiodic => "heat-nonperiodic",
            ProblemId::NlseShifted => "nlse-shifted",
            ProblemId::NlseSoliton => "nlse-soliton",
            ProblemId::Peregrine => "peregrine",
            ProblemId::Breather => "breather",
            ProblemId::DoubleSimulton => "double-simulton",
            ProblemId::TripleSimulton => "triple-simulton",
            ProblemId::StochasticHeat => "stochastic-heat",
        }
    }

    /// Boundary pairs used when none are given.
    pub fn default_pairs(self) -> Vec<BoundaryPair> {
        use BoundaryPair::*;
        match self {
            ProblemId::DoubleSimulton => vec![DD, NN],
            ProblemId::TripleSimulton => vec![DD, ND, NN],
            _ => vec![DD],
        }
    }

    pub fn components(self) -> usize {
        match self {
            ProblemId::DoubleSimulton => 2,
            ProblemId::TripleSimulton => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        ProblemId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::Unknown {
                what: "problem",
                name: s.to_string(),
            })
    }
}

/// A parabolic (S)PDE `∂u/∂t = g(t, x, u) + Σ_i D_i ∂²u/∂x_i² + B η` with its
/// default discretization.
#[derive(Clone)]
pub struct Problem {
    pub id: ProblemId,
    pub pairs: Vec<BoundaryPair>,
    pub components: usize,
    pub grid: Grid,
    pub time: TimeGrid,
    pub coeffs: LinearCoefficients,
    pub boundary: BoundarySpec,
    pub nonlinear: Option<LocalFn>,
    /// Additive noise amplitude per component.
    pub noise: Option<Vec<f64>>,
    pub initial: FieldFn,
    pub exact: Option<FieldFn>,
    pub observable: Observable,
    /// Fixed error normalization; `None` means the maximum of the numerics.
    pub normalization: Option<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("pairs", &self.pairs)
            .field("grid", &self.grid)
            .field("time", &self.time)
            .field("observable", &self.observable)
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Catalog lookup. `pairs` holds one pair per component, or a single pair
    /// applied to every component; empty means the catalog default.
    pub fn build(id: ProblemId, pairs: &[BoundaryPair]) -> Result<Problem> {
        let pairs = expand_pairs(id, pairs)?;
        match id {
            ProblemId::Heat => heat_zero_boundary(pairs[0]),
            ProblemId::HeatNonperiodic => heat_nonperiodic(pairs[0]),
            ProblemId::NlseShifted => nlse_shifted_soliton(pairs[0]),
            ProblemId::NlseSoliton => nlse_soliton_td_boundary(pairs[0]),
            ProblemId::Peregrine => peregrine(pairs[0]),
            ProblemId::Breather => breather(pairs[0]),
            ProblemId::DoubleSimulton => double_simulton([pairs[0], pairs[1]]),
            ProblemId::TripleSimulton => triple_simulton_with([pairs[0], pairs[1], pairs[2]]),
            ProblemId::StochasticHeat => {
                if pairs[0] != BoundaryPair::DD {
                    return Err(Error::InvalidBoundary(
                        "the stochastic heat benchmark is defined for D-D only".into(),
                    ));
                }
                Ok(stochastic_heat())
            }
        }
    }

    pub fn label(&self) -> String {
        let pairs: Vec<String> = self.pairs.iter().map(ToString::to_string).collect();
        format!("{} [{}]", self.id, pairs.join(";"))
    }

    pub fn pairs_label(&self) -> String {
        let pairs: Vec<String> = self.pairs.iter().map(ToString::to_string).collect();
        pairs.join(";")
    }

    /// Same problem on a grid with `points` points per dimension.
    pub fn with_points(mut self, points: usize) -> Result<Self> {
        let axes = self
            .grid
            .axes()
            .iter()
            .map(|a| crate::lattice::Interval::new(a.lower, a.upper, points))
            .collect::<Result<Vec<_>>>()?;
        self.grid = Grid::new(axes)?;
        Ok(self)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        self.time = TimeGrid::new(self.time.start, self.time.end, steps)?;
        Ok(self)
    }

    pub fn exact_at(&self, component: usize, t: f64, x: &[f64]) -> Option<C64> {
        self.exact.as_ref().map(|f| f(component, t, x))
    }
}

fn expand_pairs(id: ProblemId, pairs: &[BoundaryPair]) -> Result<Vec<BoundaryPair>> {
    let n = id.components();
    match pairs.len() {
        0 => Ok(id.default_pairs()),
        1 => Ok(vec![pairs[0]; n]),
        k if k == n => Ok(pairs.to_vec()),
        k => Err(Error::InvalidBoundary(format!(
            "{id} has {n} components but {k} boundary pairs were given"
        ))),
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// 1D boundary spec whose values come from `value` (Dirichlet ends) and
/// `slope` (Neumann ends), each a function of `(component, t, x)`.
fn boundary_from<V, S>(pairs: &[BoundaryPair], x_a: f64, x_b: f64, value: V, slope: S) -> Result<BoundarySpec>
where
    V: Fn(usize, f64, f64) -> C64 + Send + Sync + Clone + 'static,
    S: Fn(usize, f64, f64) -> C64 + Send + Sync + Clone + 'static,
{
    let end = |kind: BoundaryKind, comp: usize, x: f64| -> EndCondition {
        match kind {
            BoundaryKind::Periodic => EndCondition::Periodic,
            BoundaryKind::Dirichlet => {
                let f = value.clone();
                EndCondition::dirichlet(move |t| f(comp, t, x))
            }
            BoundaryKind::Neumann => {
                let f = slope.clone();
                EndCondition::neumann(move |t| f(comp, t, x))
            }
        }
    };
    let axes = pairs
        .iter()
        .enumerate()
        .map(|(comp, pair)| {
            let (lo, hi) = pair.kinds();
            Ok(vec![AxisBoundary::new(end(lo, comp, x_a), end(hi, comp, x_b))?])
        })
        .collect::<Result<Vec<_>>>()?;
    BoundarySpec::new(axes)
}

fn check_non_periodic(pairs: &[BoundaryPair]) -> Result<()> {
    if pairs.contains(&BoundaryPair::PP) {
        return Err(Error::InvalidBoundary(
            "catalog problems need non-periodic boundaries".into(),
        ));
    }
    Ok(())
}

fn zero_boundary(pair: BoundaryPair) -> BoundarySpec {
    BoundarySpec::uniform(1, 1, AxisBoundary::zero(pair))
}

/// Heat equation `a_t = a_xx` on `[0, π]`, `t ∈ [0, 1]`, with zero boundary
/// values (D-D) or zero boundary derivatives (N-N).
pub fn heat_zero_boundary(pair: BoundaryPair) -> Result<Problem> {
    let exact: FieldFn = match pair {
        BoundaryPair::DD => Arc::new(|_, t, x| {
            c(2.0 * x[0].sin() * (-t).exp() + (2.0 * x[0]).sin() * (-4.0 * t).exp())
        }),
        BoundaryPair::NN => Arc::new(|_, t, x| {
            c(2.0 + x[0].cos() * (-t).exp() + (2.0 * x[0]).cos() * (-4.0 * t).exp())
        }),
        other => {
            return Err(Error::InvalidBoundary(format!(
                "the zero-boundary heat benchmark has no {other} case"
            )))
        }
    };
    let ex = exact.clone();
    Ok(Problem {
        id: ProblemId::Heat,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(0.0, PI, 21)?,
        time: TimeGrid::new(0.0, 1.0, 10)?,
        coeffs: LinearCoefficients::uniform(1, 1, c(1.0)),
        boundary: zero_boundary(pair),
        nonlinear: None,
        noise: None,
        initial: Arc::new(move |comp, _, x| ex(comp, 0.0, x)),
        exact: Some(exact),
        observable: Observable::Real,
        normalization: None,
    })
}

/// Heat equation `a_t = a_xx` on `[0, π]`, `t ∈ [0, 4]`, one two-mode exact
/// solution per boundary pair.
pub fn heat_nonperiodic(pair: BoundaryPair) -> Result<Problem> {
    check_non_periodic(&[pair])?;
    let exact: FieldFn = match pair {
        BoundaryPair::DD => Arc::new(|_, t, x| {
            c(4.0 * x[0].sin() * (-t).exp() + (2.0 * x[0]).sin() * (-4.0 * t).exp())
        }),
        BoundaryPair::NN => Arc::new(|_, t, x| {
            c(5.0 + 4.0 * x[0].cos() * (-t).exp() + (2.0 * x[0]).cos() * (-4.0 * t).exp())
        }),
        BoundaryPair::DN => Arc::new(|_, t, x| {
            c(4.0 * (x[0] / 2.0).sin() * (-t / 4.0).exp() + (1.5 * x[0]).sin() * (-2.25 * t).exp())
        }),
        BoundaryPair::ND => Arc::new(|_, t, x| {
            c(4.0 * (x[0] / 2.0).cos() * (-t / 4.0).exp() + (1.5 * x[0]).cos() * (-2.25 * t).exp())
        }),
        BoundaryPair::PP => unreachable!(),
    };
    let ex = exact.clone();
    Ok(Problem {
        id: ProblemId::HeatNonperiodic,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(0.0, PI, 51)?,
        time: TimeGrid::new(0.0, 4.0, 40)?,
        coeffs: LinearCoefficients::uniform(1, 1, c(1.0)),
        boundary: zero_boundary(pair),
        nonlinear: None,
        noise: None,
        initial: Arc::new(move |comp, _, x| ex(comp, 0.0, x)),
        exact: Some(exact),
        observable: Observable::Real,
        normalization: None,
    })
}

/// Offset that makes `sech(x) - a_0` vanish at the Dirichlet end `x = ±5`.
pub const SHIFTED_SOLITON_EDGE: f64 = 5.0;

/// Stationary soliton `sech(x)` written as `ã = sech(x) - a_0` so that the
/// boundary data are homogeneous:
/// `ã_t = i[(ã+a_0)|ã+a_0|² - (ã+a_0)/2 + ½ ã_xx]`.
///
/// D-D uses `[-5, 5]`; D-N uses `[-5, 0]` and N-D uses `[0, 5]`, so the
/// Neumann end sits on the peak where `sech' = 0`. `Δx = 1/10`,
/// `Δt = 1/100`, `t ∈ [0, 10]`.
pub fn nlse_shifted_soliton(pair: BoundaryPair) -> Result<Problem> {
    let xm = SHIFTED_SOLITON_EDGE;
    let (lo, hi) = match pair {
        BoundaryPair::DD => (-xm, xm),
        BoundaryPair::DN => (-xm, 0.0),
        BoundaryPair::ND => (0.0, xm),
        other => {
            return Err(Error::InvalidBoundary(format!(
                "the shifted soliton benchmark has no {other} case"
            )))
        }
    };
    let a0 = sech(xm);
    let points = ((hi - lo) / 0.1).round() as usize + 1;
    let exact: FieldFn = Arc::new(move |_, _, x| c(sech(x[0]) - a0));
    let ex = exact.clone();
    let g: LocalFn = Arc::new(move |_, _, u, out| {
        let a = u[0] + a0;
        out[0] = C64::i() * (a * a.norm_sqr() - 0.5 * a);
    });
    Ok(Problem {
        id: ProblemId::NlseShifted,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(lo, hi, points)?,
        time: TimeGrid::new(0.0, 10.0, 1000)?,
        coeffs: LinearCoefficients::uniform(1, 1, C64::new(0.0, 0.5)),
        boundary: zero_boundary(pair),
        nonlinear: Some(g),
        noise: None,
        initial: Arc::new(move |comp, _, x| ex(comp, 0.0, x)),
        exact: Some(exact),
        observable: Observable::Real,
        normalization: None,
    })
}

/// Soliton `sech(x) e^{it/2}` of `a_t = i(a|a|² + ½ a_xx)` on `[-2, 2]` with
/// time-dependent boundary data, `t ∈ [0, 2π]`, 40 steps in space and 2000 in
/// time.
pub fn nlse_soliton_td_boundary(pair: BoundaryPair) -> Result<Problem> {
    check_non_periodic(&[pair])?;
    let xm = 2.0;
    let value = |_: usize, t: f64, x: f64| C64::from_polar(sech(x), t / 2.0);
    let slope = |_: usize, t: f64, x: f64| C64::from_polar(1.0, t / 2.0) * (-sech(x) * x.tanh());
    let exact: FieldFn = Arc::new(move |comp, t, x| value(comp, t, x[0]));
    Ok(Problem {
        id: ProblemId::NlseSoliton,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(-xm, xm, 41)?,
        time: TimeGrid::new(0.0, 2.0 * PI, 2000)?,
        coeffs: LinearCoefficients::uniform(1, 1, C64::new(0.0, 0.5)),
        boundary: boundary_from(&[pair], -xm, xm, value, slope)?,
        nonlinear: Some(Arc::new(|_, _, u, out| {
            out[0] = C64::i() * u[0] * u[0].norm_sqr();
        })),
        noise: None,
        initial: Arc::new(move |comp, _, x| value(comp, 0.0, x[0])),
        exact: Some(exact),
        observable: Observable::Real,
        normalization: None,
    })
}

pub fn peregrine_value(t: f64, x: f64) -> C64 {
    let i = C64::i();
    let den = 1.0 + 4.0 * (t * t + x * x);
    (i * t).exp() * (4.0 * (1.0 + 2.0 * i * t) / den - 1.0)
}

pub fn peregrine_slope(t: f64, x: f64) -> C64 {
    let i = C64::i();
    let den = 1.0 + 4.0 * (t * t + x * x);
    (i * t).exp() * 4.0 * (1.0 + 2.0 * i * t) * (-8.0 * x) / (den * den)
}

/// Peregrine solution of `a_t = i(a|a|² + ½ a_xx)` on `[-2, 2]`,
/// `t ∈ [-5, 5]`, observable `|a|²` normalized by its peak value 9.
pub fn peregrine(pair: BoundaryPair) -> Result<Problem> {
    check_non_periodic(&[pair])?;
    let xm = 2.0;
    let exact: FieldFn = Arc::new(|_, t, x| peregrine_value(t, x[0]));
    Ok(Problem {
        id: ProblemId::Peregrine,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(-xm, xm, 21)?,
        time: TimeGrid::new(-5.0, 5.0, 2000)?,
        coeffs: LinearCoefficients::uniform(1, 1, C64::new(0.0, 0.5)),
        boundary: boundary_from(
            &[pair],
            -xm,
            xm,
            |_, t, x| peregrine_value(t, x),
            |_, t, x| peregrine_slope(t, x),
        )?,
        nonlinear: Some(Arc::new(|_, _, u, out| {
            out[0] = C64::i() * u[0] * u[0].norm_sqr();
        })),
        noise: None,
        initial: Arc::new(|_, _, x| peregrine_value(-5.0, x[0])),
        exact: Some(exact),
        observable: Observable::ModulusSquared,
        normalization: Some(9.0),
    })
}

pub fn breather_value(t: f64, x: f64) -> C64 {
    let i = C64::i();
    let num = (3.0 * x).cosh() + 3.0 * (-4.0 * i * t).exp() * x.cosh();
    let den = (4.0 * x).cosh() + 4.0 * (2.0 * x).cosh() + 3.0 * (4.0 * t).cos();
    4.0 * (-0.5 * i * t).exp() * num / den
}

/// Boundary derivative at `sign · x_m` (`x_m > 0`) in the closed form used for
/// the Neumann data.
pub fn breather_boundary_slope(t: f64, x_m: f64, sign: f64) -> C64 {
    let i = C64::i();
    let phase = (-4.0 * i * t).exp();
    let den = (4.0 * x_m).cosh() + 4.0 * (2.0 * x_m).cosh() + 3.0 * (4.0 * t).cos();
    let num = (3.0 * x_m).cosh() + 3.0 * phase * x_m.cosh();
    let dnum = 3.0 * (3.0 * x_m).sinh() + 3.0 * phase * x_m.sinh();
    let dden = 4.0 * (4.0 * x_m).sinh() + 8.0 * (2.0 * x_m).sinh();
    sign * 4.0 * (-0.5 * i * t).exp() * (dnum / den - num * dden / (den * den))
}

/// Second-order breather of `a_t = -i(a|a|² + ½ a_xx)` from `2 sech(x)`, on
/// `[-2, 2]`, `t ∈ [0, π]`, observable `|a|`.
pub fn breather(pair: BoundaryPair) -> Result<Problem> {
    check_non_periodic(&[pair])?;
    let xm = 2.0;
    let exact: FieldFn = Arc::new(|_, t, x| breather_value(t, x[0]));
    Ok(Problem {
        id: ProblemId::Breather,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(-xm, xm, 21)?,
        time: TimeGrid::new(0.0, PI, 2000)?,
        coeffs: LinearCoefficients::uniform(1, 1, C64::new(0.0, -0.5)),
        boundary: boundary_from(
            &[pair],
            -xm,
            xm,
            |_, t, x| breather_value(t, x),
            |_, t, x| breather_boundary_slope(t, x.abs(), x.signum()),
        )?,
        nonlinear: Some(Arc::new(|_, _, u, out| {
            out[0] = -C64::i() * u[0] * u[0].norm_sqr();
        })),
        noise: None,
        initial: Arc::new(|_, _, x| c(2.0 * sech(x[0]))),
        exact: Some(exact),
        observable: Observable::Modulus,
        normalization: None,
    })
}

fn simulton_profile(x: f64) -> f64 {
    1.5 * sech(x / 2.0).powi(2)
}

fn simulton_slope(x: f64) -> f64 {
    -simulton_profile(x) * (x / 2.0).tanh()
}

fn simulton_problem(
    id: ProblemId,
    pairs: Vec<BoundaryPair>,
    frequencies: Vec<f64>,
    g: LocalFn,
) -> Result<Problem> {
    check_non_periodic(&pairs)?;
    let xm = 3.0;
    let n = pairs.len();
    let f1 = frequencies.clone();
    let f2 = frequencies.clone();
    let f3 = frequencies.clone();
    let value = move |comp: usize, t: f64, x: f64| C64::from_polar(simulton_profile(x), -f1[comp] * t);
    let slope = move |comp: usize, t: f64, x: f64| C64::from_polar(1.0, -f2[comp] * t) * simulton_slope(x);
    let exact: FieldFn = Arc::new(move |comp, t, x| C64::from_polar(simulton_profile(x[0]), -f3[comp] * t));
    let ex = exact.clone();
    Ok(Problem {
        id,
        components: n,
        grid: Grid::line(-xm, xm, 21)?,
        time: TimeGrid::new(0.0, PI, 2000)?,
        coeffs: LinearCoefficients::uniform(n, 1, C64::new(0.0, -1.0)),
        boundary: boundary_from(&pairs, -xm, xm, value, slope)?,
        pairs,
        nonlinear: Some(g),
        noise: None,
        initial: Arc::new(move |comp, _, x| ex(comp, 0.0, x)),
        exact: Some(exact),
        observable: Observable::Real,
        normalization: Some(1.5),
    })
}

/// Coupled parametric simulton `a_t = -i(a_xx + a* b)`, `b_t = -i(b_xx + a² + b)`
/// on `[-3, 3]`, `t ∈ [0, π]`, one boundary pair per component.
pub fn double_simulton(pairs: [BoundaryPair; 2]) -> Result<Problem> {
    let g: LocalFn = Arc::new(|_, _, u, out| {
        let i = C64::i();
        out[0] = -i * (u[0].conj() * u[1]);
        out[1] = -i * (u[0] * u[0] + u[1]);
    });
    simulton_problem(ProblemId::DoubleSimulton, pairs.to_vec(), vec![1.0, 2.0], g)
}

/// Three-field simulton with D-D, N-D and N-N boundaries.
pub fn triple_simulton() -> Result<Problem> {
    use BoundaryPair::*;
    triple_simulton_with([DD, ND, NN])
}

/// `a_t = -i(a_xx + a* c)`, `b_t = -i(b_xx + b* c)`, `c_t = -i(c_xx + ab + c)`.
pub fn triple_simulton_with(pairs: [BoundaryPair; 3]) -> Result<Problem> {
    let g: LocalFn = Arc::new(|_, _, u, out| {
        let i = C64::i();
        out[0] = -i * (u[0].conj() * u[2]);
        out[1] = -i * (u[1].conj() * u[2]);
        out[2] = -i * (u[0] * u[1] + u[2]);
    });
    simulton_problem(ProblemId::TripleSimulton, pairs.to_vec(), vec![1.0, 1.0, 2.0], g)
}

/// Length of the stochastic heat domain.
pub const STOCHASTIC_LENGTH: f64 = 5.0;

/// `a_t = ½ a_xx + η` on `[0, 5]` with zero D-D boundaries and zero initial
/// field; `Δx = 0.05`, `Δt = 1/1000`, `t ∈ [0, 1]`.
pub fn stochastic_heat() -> Problem {
    let pair = BoundaryPair::DD;
    Problem {
        id: ProblemId::StochasticHeat,
        pairs: vec![pair],
        components: 1,
        grid: Grid::line(0.0, STOCHASTIC_LENGTH, 101).expect("valid grid"),
        time: TimeGrid::new(0.0, 1.0, 1000).expect("valid time grid"),
        coeffs: LinearCoefficients::uniform(1, 1, c(0.5)),
        boundary: zero_boundary(pair),
        nonlinear: None,
        noise: Some(vec![1.0]),
        initial: Arc::new(|_, _, _| c(0.0)),
        exact: None,
        observable: Observable::ModulusSquared,
        normalization: None,
    }
}

/// `J(t) = Σ_{n≥1} L²/(n²π²)(1 - e^{-n²π²t/L²})`, summed until the
/// exponential is negligible, with the remaining `Σ 1/n²` tail added in
/// closed form.
pub fn stochastic_heat_j(t: f64, length: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let a = PI * PI * t / (length * length);
    let pref = length * length / (PI * PI);
    let mut sum = 0.0;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let decay = (-a * nf * nf).exp();
        let term = pref / (nf * nf) * (1.0 - decay);
        sum += term;
        if (decay < 1e-17 && n >= 1000) || term < 1e-12 {
            break;
        }
        n += 1;
    }
    let m = n as f64;
    // Σ_{k>m} 1/k² by its asymptotic expansion
    let tail = 1.0 / m - 1.0 / (2.0 * m * m) + 1.0 / (6.0 * m.powi(3)) - 1.0 / (30.0 * m.powi(5));
    sum + pref * tail
}

/// The same series restricted to the first `modes` terms.
pub fn stochastic_heat_j_truncated(t: f64, length: f64, modes: usize) -> f64 {
    let a = PI * PI * t / (length * length);
    (1..=modes)
        .map(|n| {
            let nf = n as f64;
            length * length / (PI * PI * nf * nf) * (1.0 - (-a * nf * nf).exp())
        })
        .sum()
}

/// Expected `J` after `steps` FIP midpoint steps of size `dt` on a lattice
/// resolving `modes` sine modes. Each step maps a mode to
/// `e^{-λΔt} a + e^{-λΔt/2} Δt ξ` with `λ = n²π²/(2L²)` and `Var ξ = 1/Δt`.
pub fn stochastic_heat_j_scheme(steps: usize, dt: f64, length: f64, modes: usize) -> f64 {
    (1..=modes)
        .map(|n| {
            let nf = n as f64;
            let lambda = 0.5 * (nf * PI / length).powi(2);
            let q = (-2.0 * lambda * dt).exp();
            dt * (-lambda * dt).exp() * (1.0 - q.powi(steps as i32)) / (1.0 - q)
        })
        .sum()
}

/// Largest PDE residual of the exact solution, relative to the solution scale,
/// over a coarse sample of interior space-time points. Derivatives are
/// central differences with steps `dx` and `dt`.
pub fn exact_residual(problem: &Problem, dx: f64, dt: f64) -> Option<f64> {
    let exact = problem.exact.as_ref()?;
    let iv = problem.grid.axis(0);
    let n = problem.components;
    let samples = 9;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut g = vec![C64::new(0.0, 0.0); n];
    for it in 0..samples {
        let t = problem.time.start + (it as f64 + 0.5) / samples as f64 * (problem.time.end - problem.time.start);
        for ix in 0..samples {
            let x = iv.lower + (ix as f64 + 0.5) / samples as f64 * iv.length();
            for (comp, uc) in u.iter_mut().enumerate() {
                *uc = exact(comp, t, &[x]);
            }
            g.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            if let Some(f) = &problem.nonlinear {
                f(t, &[x], &u, &mut g);
            }
            for comp in 0..n {
                let ut = (exact(comp, t + dt, &[x]) - exact(comp, t - dt, &[x])) / (2.0 * dt);
                let uxx = (exact(comp, t, &[x + dx]) - 2.0 * u[comp] + exact(comp, t, &[x - dx])) / (dx * dx);
                let r = ut - g[comp] - problem.coeffs.get(comp, 0) * uxx;
                worst = worst.max(r.norm());
                scale = scale.max(u[comp].norm());
            }
        }
    }
    Some(worst / scale.max(f64::MIN_POSITIVE))
}
