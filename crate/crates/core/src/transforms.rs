//! Fast discrete sine/cosine transforms and the periodic FFT.
//!
//! Every trigonometric transform is computed by embedding the input into a
//! longer complex sequence with the appropriate odd or even symmetry and
//! running one complex FFT. All transforms are unnormalized in the forward
//! direction; each inverse is the partner transform scaled by `1 / N_FT`,
//! where `N_FT` is the logical FFT size.
//!
//! Index conventions (`N` = number of transformed points, `n_T`):
//!
//! | kind | definition |
//! |------|------------|
//! | DST-I  | `y_n = 2 Σ_j x_j sin(π(j+1)(n+1)/(N+1))` |
//! | DCT-I  | `y_n = x_0 + (-1)^n x_{N-1} + 2 Σ_{j=1}^{N-2} x_j cos(π j n/(N-1))` |
//! | DST-II | `y_n = 2 Σ_j x_j sin(π(2j+1)(n+1)/(2N))` |
//! | DST-III| `y_n = (-1)^n x_{N-1} + 2 Σ_{j=0}^{N-2} x_j sin(π(j+1)(2n+1)/(2N))` |
//! | DCT-II | `y_n = 2 Σ_j x_j cos(π(2j+1)n/(2N))` |
//! | DCT-III| `y_n = x_0 + 2 Σ_{j=1}^{N-1} x_j cos(π j(2n+1)/(2N))` |
//! | FFT    | `y_n = Σ_j x_j exp(-2πi jn/N)` |

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{ArrayViewMutD, Axis};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Field, Result};

/// Kind of discrete transform applied along one lattice dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformKind {
    Fft,
    Dst1,
    Dct1,
    Dst2,
    Dst3,
    Dct2,
    Dct3,
}

impl TransformKind {
    pub const ALL: [TransformKind; 7] = [
        TransformKind::Fft,
        TransformKind::Dst1,
        TransformKind::Dct1,
        TransformKind::Dst2,
        TransformKind::Dst3,
        TransformKind::Dct2,
        TransformKind::Dct3,
    ];

    /// Kind whose forward transform is this kind's unnormalized inverse.
    pub fn partner(self) -> TransformKind {
        match self {
            TransformKind::Dst2 => TransformKind::Dst3,
            TransformKind::Dst3 => TransformKind::Dst2,
            TransformKind::Dct2 => TransformKind::Dct3,
            TransformKind::Dct3 => TransformKind::Dct2,
            other => other,
        }
    }

    /// Number of lattice points excluded at the lower end of the line.
    ///
    /// Sine transforms drop the lower Dirichlet point; DST-I also drops the
    /// upper one, and DCT-II/III drop the upper point (Neumann-Dirichlet).
    pub fn lower_offset(self) -> usize {
        match self {
            TransformKind::Dst1 | TransformKind::Dst2 | TransformKind::Dst3 => 1,
            _ => 0,
        }
    }

    /// Number of transformed points for a line of `n_points` lattice points.
    pub fn transform_len(self, n_points: usize) -> Result<usize> {
        let n_t = match self {
            TransformKind::Fft | TransformKind::Dct1 => Some(n_points),
            TransformKind::Dst1 => n_points.checked_sub(2),
            _ => n_points.checked_sub(1),
        };
        let min = self.min_transform_len();
        match n_t {
            Some(n) if n >= min => Ok(n),
            _ => Err(Error::InvalidPlan(format!(
                "{self} needs at least {min} transformed points, got {n_points} lattice points"
            ))),
        }
    }

    fn min_transform_len(self) -> usize {
        match self {
            TransformKind::Dct1 => 2,
            _ => 1,
        }
    }

    /// Lattice point count corresponding to `n_transform` transformed points.
    pub fn points_for(self, n_transform: usize) -> usize {
        match self {
            TransformKind::Fft | TransformKind::Dct1 => n_transform,
            TransformKind::Dst1 => n_transform + 2,
            _ => n_transform + 1,
        }
    }

    /// Logical FFT size `N_FT`; the unnormalized round trip multiplies by it.
    pub fn logical_len(self, n_transform: usize) -> usize {
        match self {
            TransformKind::Fft => n_transform,
            TransformKind::Dst1 => 2 * (n_transform + 1),
            TransformKind::Dct1 => 2 * (n_transform - 1),
            _ => 2 * n_transform,
        }
    }

    fn embed_len(self, n_transform: usize) -> usize {
        match self {
            TransformKind::Fft | TransformKind::Dst1 | TransformKind::Dct1 => {
                self.logical_len(n_transform)
            }
            _ => 4 * n_transform,
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransformKind::Fft => "FFT",
            TransformKind::Dst1 => "DST-I",
            TransformKind::Dct1 => "DCT-I",
            TransformKind::Dst2 => "DST-II",
            TransformKind::Dst3 => "DST-III",
            TransformKind::Dct2 => "DCT-II",
            TransformKind::Dct3 => "DCT-III",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Precomputed transform of one kind and size. Immutable and `Sync`.
pub struct TransformPlan {
    kind: TransformKind,
    n_points: usize,
    n_transform: usize,
    n_logical: usize,
    forward_fft: Arc<dyn Fft<f64>>,
    inverse_fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformPlan")
            .field("kind", &self.kind)
            .field("n_points", &self.n_points)
            .field("n_transform", &self.n_transform)
            .field("n_logical", &self.n_logical)
            .finish()
    }
}

impl TransformPlan {
    /// Plan for a line of `n_points` lattice points (boundaries included).
    pub fn new(kind: TransformKind, n_points: usize) -> Result<Self> {
        let mut planner = FftPlanner::new();
        Self::with_planner(kind, n_points, &mut planner)
    }

    fn with_planner(
        kind: TransformKind,
        n_points: usize,
        planner: &mut FftPlanner<f64>,
    ) -> Result<Self> {
        let n_transform = kind.transform_len(n_points)?;
        let embed = kind.embed_len(n_transform);
        let forward_fft = planner.plan_fft_forward(embed);
        let inverse_fft = match kind {
            TransformKind::Fft => planner.plan_fft_inverse(embed),
            _ => Arc::clone(&forward_fft),
        };
        Ok(TransformPlan {
            kind,
            n_points,
            n_transform,
            n_logical: kind.logical_len(n_transform),
            forward_fft,
            inverse_fft,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_transform(&self) -> usize {
        self.n_transform
    }

    pub fn n_logical(&self) -> usize {
        self.n_logical
    }

    /// Index of the first transformed lattice point.
    pub fn offset(&self) -> usize {
        self.kind.lower_offset()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_transform {
            return Err(Error::InvalidPlan(format!(
                "{} plan expects {} values, got {len}",
                self.kind, self.n_transform
            )));
        }
        Ok(())
    }

    /// Transform `data` in place. `data.len()` must equal `n_transform`.
    pub fn process(&self, data: &mut [C64], direction: Direction) -> Result<()> {
        self.check_len(data.len())?;
        let mut scratch = vec![C64::new(0.0, 0.0); self.forward_fft.len()];
        self.process_with_scratch(data, direction, &mut scratch);
        Ok(())
    }

    fn process_with_scratch(&self, data: &mut [C64], direction: Direction, buf: &mut [C64]) {
        match (self.kind, direction) {
            (TransformKind::Fft, Direction::Forward) => self.forward_fft.process(data),
            (TransformKind::Fft, Direction::Inverse) => {
                self.inverse_fft.process(data);
                let scale = 1.0 / self.n_logical as f64;
                data.iter_mut().for_each(|v| *v *= scale);
            }
            (kind, Direction::Forward) => embed_transform(kind, &*self.forward_fft, data, buf),
            (kind, Direction::Inverse) => {
                embed_transform(kind.partner(), &*self.inverse_fft, data, buf);
                let scale = 1.0 / self.n_logical as f64;
                data.iter_mut().for_each(|v| *v *= scale);
            }
        }
    }

    /// Forward transform of a standalone array.
    pub fn forward(&self, values: &[C64]) -> Result<SpectralCoefficients> {
        let mut data = values.to_vec();
        self.process(&mut data, Direction::Forward)?;
        Ok(SpectralCoefficients {
            values: data,
            kind: self.kind,
        })
    }

    /// Inverse transform of coefficients produced by a plan of the same kind.
    pub fn inverse(&self, coefficients: &SpectralCoefficients) -> Result<Vec<C64>> {
        if coefficients.kind != self.kind {
            return Err(Error::InvalidPlan(format!(
                "coefficients of kind {} given to a {} plan",
                coefficients.kind, self.kind
            )));
        }
        let mut data = coefficients.values.clone();
        self.process(&mut data, Direction::Inverse)?;
        Ok(data)
    }
}

/// Mode amplitudes of one transformed line.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub values: Vec<C64>,
    pub kind: TransformKind,
}

/// Unnormalized transform of `kind` via a symmetric FFT embedding.
fn embed_transform(kind: TransformKind, fft: &dyn Fft<f64>, data: &mut [C64], buf: &mut [C64]) {
    let n = data.len();
    let m = buf.len();
    let i = C64::i();
    buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    match kind {
        TransformKind::Dst1 => {
            for (j, &a) in data.iter().enumerate() {
                buf[j + 1] = a;
                buf[m - j - 1] = -a;
            }
            fft.process(buf);
            for (k, out) in data.iter_mut().enumerate() {
                *out = i * buf[k + 1];
            }
        }
        TransformKind::Dct1 => {
            for (j, &a) in data.iter().enumerate() {
                buf[j] = a;
                if j > 0 && j < n - 1 {
                    buf[m - j] = a;
                }
            }
            fft.process(buf);
            data.copy_from_slice(&buf[..n]);
        }
        TransformKind::Dct2 => {
            for (j, &a) in data.iter().enumerate() {
                buf[2 * j + 1] = a;
                buf[m - 2 * j - 1] = a;
            }
            fft.process(buf);
            data.copy_from_slice(&buf[..n]);
        }
        TransformKind::Dst2 => {
            for (j, &a) in data.iter().enumerate() {
                buf[2 * j + 1] = a;
                buf[m - 2 * j - 1] = -a;
            }
            fft.process(buf);
            for (k, out) in data.iter_mut().enumerate() {
                *out = i * buf[k + 1];
            }
        }
        TransformKind::Dct3 => {
            for (j, &a) in data.iter().enumerate() {
                buf[j] = a;
                if j > 0 {
                    buf[m - j] = a;
                }
            }
            fft.process(buf);
            for (k, out) in data.iter_mut().enumerate() {
                *out = buf[2 * k + 1];
            }
        }
        TransformKind::Dst3 => {
            for p in 1..=n {
                let a = if p == n { 0.5 * data[n - 1] } else { data[p - 1] };
                buf[p] = a;
                buf[m - p] = -a;
            }
            fft.process(buf);
            for (k, out) in data.iter_mut().enumerate() {
                *out = i * buf[2 * k + 1];
            }
        }
        TransformKind::Fft => unreachable!("periodic transforms are not embedded"),
    }
}

/// DST-I of interior values (boundary points excluded).
pub fn dst1_forward(values: &[C64], plan: &TransformPlan) -> Result<SpectralCoefficients> {
    expect_kind(plan, TransformKind::Dst1)?;
    plan.forward(values)
}

pub fn dst1_inverse(coefficients: &SpectralCoefficients, plan: &TransformPlan) -> Result<Vec<C64>> {
    expect_kind(plan, TransformKind::Dst1)?;
    plan.inverse(coefficients)
}

/// DCT-I of values including both boundary points.
pub fn dct1_forward(values: &[C64], plan: &TransformPlan) -> Result<SpectralCoefficients> {
    expect_kind(plan, TransformKind::Dct1)?;
    plan.forward(values)
}

pub fn dct1_inverse(coefficients: &SpectralCoefficients, plan: &TransformPlan) -> Result<Vec<C64>> {
    expect_kind(plan, TransformKind::Dct1)?;
    plan.inverse(coefficients)
}

fn expect_kind(plan: &TransformPlan, kind: TransformKind) -> Result<()> {
    if plan.kind() != kind {
        return Err(Error::InvalidPlan(format!(
            "expected a {kind} plan, got {}",
            plan.kind()
        )));
    }
    Ok(())
}

/// Transform every 1D lane of `view` along `axis`, restricted to the plan's
/// transformed points. Points outside that range are set to zero.
pub fn transform_axis(
    view: &mut ArrayViewMutD<'_, C64>,
    axis: usize,
    plan: &TransformPlan,
    direction: Direction,
) -> Result<()> {
    let len = view.shape().get(axis).copied().ok_or(Error::ShapeMismatch {
        expected: format!("an array with axis {axis}"),
        found: format!("{:?}", view.shape()),
    })?;
    if len != plan.n_points() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} points along axis {axis}", plan.n_points()),
            found: format!("{len}"),
        });
    }
    let offset = plan.offset();
    let n_t = plan.n_transform();
    let mut line = vec![C64::new(0.0, 0.0); n_t];
    let mut scratch = vec![C64::new(0.0, 0.0); plan.forward_fft.len()];
    for mut lane in view.lanes_mut(Axis(axis)) {
        for (dst, src) in line.iter_mut().zip(lane.iter().skip(offset)) {
            *dst = *src;
        }
        plan.process_with_scratch(&mut line, direction, &mut scratch);
        for (j, v) in lane.iter_mut().enumerate() {
            *v = if j >= offset && j < offset + n_t {
                line[j - offset]
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }
    Ok(())
}

/// Apply `plan` along lattice dimension `dim` of every component of `field`.
///
/// The field layout is `[component, K_1, ..., K_d]`, so lattice dimension
/// `dim` is array axis `dim + 1`.
pub fn apply_along_dimension(
    field: &Field,
    dim: usize,
    plan: &TransformPlan,
    direction: Direction,
) -> Result<Field> {
    if dim + 1 >= field.ndim() {
        return Err(Error::ShapeMismatch {
            expected: format!("a field with lattice dimension {dim}"),
            found: format!("{:?}", field.shape()),
        });
    }
    let mut out = field.clone();
    transform_axis(&mut out.view_mut(), dim + 1, plan, direction)?;
    Ok(out)
}

/// Thread-safe cache of plans keyed by kind and lattice point count.
pub struct PlanCache {
    planner: Mutex<FftPlanner<f64>>,
    plans: Mutex<HashMap<(TransformKind, usize), Arc<TransformPlan>>>,
}

impl Default for PlanCache {
    fn default() -> Self {
        PlanCache {
            planner: Mutex::new(FftPlanner::new()),
            plans: Mutex::new(HashMap::new()),
        }
    }
}

impl PlanCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache.
    pub fn global() -> &'static PlanCache {
        static CACHE: OnceLock<PlanCache> = OnceLock::new();
        CACHE.get_or_init(PlanCache::new)
    }

    pub fn get(&self, kind: TransformKind, n_points: usize) -> Result<Arc<TransformPlan>> {
        if let Some(plan) = self.plans.lock().unwrap().get(&(kind, n_points)) {
            return Ok(Arc::clone(plan));
        }
        let plan = {
            let mut planner = self.planner.lock().unwrap();
            Arc::new(TransformPlan::with_planner(kind, n_points, &mut planner)?)
        };
        let mut plans = self.plans.lock().unwrap();
        Ok(Arc::clone(plans.entry((kind, n_points)).or_insert(plan)))
    }

    pub fn len(&self) -> usize {
        self.plans.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Direct O(N²) evaluation of the transform definitions.
///
/// Independent of the FFT embeddings above; used as the oracle in tests and
/// in the self-test command.
pub mod reference {
    use std::f64::consts::PI;

    use num_complex::Complex64 as C64;

    use super::TransformKind;

    pub fn forward(kind: TransformKind, x: &[C64]) -> Vec<C64> {
        let n = x.len();
        let nf = n as f64;
        (0..n)
            .map(|k| {
                let kf = k as f64;
                match kind {
                    TransformKind::Fft => x
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| a * C64::from_polar(1.0, -2.0 * PI * j as f64 * kf / nf))
                        .sum(),
                    TransformKind::Dst1 => x
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| {
                            2.0 * a * (PI * (j as f64 + 1.0) * (kf + 1.0) / (nf + 1.0)).sin()
                        })
                        .sum(),
                    TransformKind::Dct1 => {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        let ends = x[0] + sign * x[n - 1];
                        ends + (1..n - 1)
                            .map(|j| 2.0 * x[j] * (PI * j as f64 * kf / (nf - 1.0)).cos())
                            .sum::<C64>()
                    }
                    TransformKind::Dst2 => x
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| {
                            2.0 * a * (PI * (2.0 * j as f64 + 1.0) * (kf + 1.0) / (2.0 * nf)).sin()
                        })
                        .sum(),
                    TransformKind::Dst3 => {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sign * x[n - 1]
                            + (0..n - 1)
                                .map(|j| {
                                    2.0 * x[j]
                                        * (PI * (j as f64 + 1.0) * (2.0 * kf + 1.0) / (2.0 * nf))
                                            .sin()
                                })
                                .sum::<C64>()
                    }
                    TransformKind::Dct2 => x
                        .iter()
                        .enumerate()
                        .map(|(j, &a)| {
                            2.0 * a * (PI * (2.0 * j as f64 + 1.0) * kf / (2.0 * nf)).cos()
                        })
                        .sum(),
                    TransformKind::Dct3 => {
                        x[0] + (1..n)
                            .map(|j| {
                                2.0 * x[j] * (PI * j as f64 * (2.0 * kf + 1.0) / (2.0 * nf)).cos()
                            })
                            .sum::<C64>()
                    }
                }
            })
            .collect()
    }

    /// Inverse by the partner definition scaled by `1 / N_FT`.
    pub fn inverse(kind: TransformKind, y: &[C64]) -> Vec<C64> {
        let scale = 1.0 / kind.logical_len(y.len()) as f64;
        match kind {
            TransformKind::Fft => {
                let conj: Vec<C64> = y.iter().map(|v| v.conj()).collect();
                forward(kind, &conj)
                    .into_iter()
                    .map(|v| v.conj() * scale)
                    .collect()
            }
            other => forward(other.partner(), y)
                .into_iter()
                .map(|v| v * scale)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use ndarray::{ArrayD, IxDyn};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn max_abs(v: &[C64]) -> f64 {
        v.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn plan_for_len(kind: TransformKind, n_t: usize) -> TransformPlan {
        TransformPlan::new(kind, kind.points_for(n_t)).unwrap()
    }

    #[test]
    fn plan_bookkeeping() {
        let p = TransformPlan::new(TransformKind::Dst1, 22).unwrap();
        assert_eq!((p.n_transform(), p.n_logical()), (20, 42));
        let p = TransformPlan::new(TransformKind::Dct1, 9).unwrap();
        assert_eq!((p.n_transform(), p.n_logical()), (9, 16));
        for kind in [TransformKind::Dst2, TransformKind::Dst3, TransformKind::Dct2, TransformKind::Dct3] {
            let p = TransformPlan::new(kind, 16).unwrap();
            assert_eq!((p.n_transform(), p.n_logical()), (15, 30));
        }
        let p = TransformPlan::new(TransformKind::Fft, 8).unwrap();
        assert_eq!((p.n_transform(), p.n_logical()), (8, 8));
        assert!(TransformPlan::new(TransformKind::Dct1, 1).is_err());
        assert!(TransformPlan::new(TransformKind::Dst1, 2).is_err());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let plan = plan_for_len(TransformKind::Dst1, 7);
        let err = dst1_forward(&[C64::new(1.0, 0.0); 6], &plan).unwrap_err();
        assert!(matches!(err, Error::InvalidPlan(_)));
        let dct = plan_for_len(TransformKind::Dct1, 7);
        assert!(dst1_forward(&[C64::new(1.0, 0.0); 7], &dct).is_err());
    }

    #[test]
    fn zero_in_zero_out() {
        for kind in TransformKind::ALL {
            let plan = plan_for_len(kind, 9);
            let c = plan.forward(&[C64::new(0.0, 0.0); 9]).unwrap();
            assert!(c.values.iter().all(|v| v.norm() == 0.0), "{kind}");
            assert!(plan.inverse(&c).unwrap().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn dst1_fundamental_mode() {
        let n_t = 7;
        let a: Vec<C64> = (0..n_t)
            .map(|j| C64::new((PI * (j as f64 + 1.0) / (n_t as f64 + 1.0)).sin(), 0.0))
            .collect();
        let naive = reference::forward(TransformKind::Dst1, &a);
        assert!((naive[0].re - 8.0).abs() < 1e-12);
        let plan = plan_for_len(TransformKind::Dst1, n_t);
        let c = dst1_forward(&a, &plan).unwrap();
        assert!((c.values[0] - C64::new(8.0, 0.0)).norm() < 1e-12);
        assert!(c.values[1..].iter().all(|v| v.norm() < 1e-12));

        let mut single = vec![C64::new(0.0, 0.0); n_t];
        single[0] = C64::new(8.0, 0.0);
        let back = dst1_inverse(&SpectralCoefficients { values: single, kind: TransformKind::Dst1 }, &plan).unwrap();
        assert!(max_diff(&back, &a) < 1e-13);
    }

    #[test]
    fn dct1_constant_maps_to_dc() {
        let plan = plan_for_len(TransformKind::Dct1, 9);
        let c = dct1_forward(&[C64::new(1.0, 0.0); 9], &plan).unwrap();
        assert!((c.values[0] - C64::new(16.0, 0.0)).norm() < 1e-12);
        assert!(c.values[1..].iter().all(|v| v.norm() < 1e-12));
        let back = dct1_inverse(&c, &plan).unwrap();
        assert!(back.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn embedding_matches_naive_sum() {
        for kind in TransformKind::ALL {
            for (n_t, seed) in [(16, 1), (17, 2), (15, 3), (4, 4), (64, 5)] {
                let a = random_vec(n_t, seed);
                let plan = plan_for_len(kind, n_t);
                let fast = plan.forward(&a).unwrap().values;
                let slow = reference::forward(kind, &a);
                assert!(
                    max_diff(&fast, &slow) < 1e-12 * max_abs(&slow),
                    "{kind} N_T={n_t}: {}",
                    max_diff(&fast, &slow)
                );
            }
        }
    }

    #[test]
    fn round_trips() {
        for kind in TransformKind::ALL {
            let a = random_vec(15, 11);
            let plan = plan_for_len(kind, 15);
            let back = plan.inverse(&plan.forward(&a).unwrap()).unwrap();
            assert!(max_diff(&back, &a) < 1e-13 * max_abs(&a), "{kind}");
        }
    }

    #[test]
    fn mixed_pairs_are_mutual_inverses() {
        let a = random_vec(15, 21);
        for kind in [TransformKind::Dst2, TransformKind::Dct2] {
            let fwd = reference::forward(kind, &a);
            let back = reference::forward(kind.partner(), &fwd);
            let scaled: Vec<C64> = back.iter().map(|v| v / 30.0).collect();
            assert!(max_diff(&scaled, &a) < 1e-13);
        }
    }

    #[test]
    fn half_mode_sine_is_single_coefficient() {
        // Dirichlet at x = 0, Neumann at x = L; transformed points x_j = jΔx, j = 1..N_T.
        let n_t = 15;
        let l = 1.0;
        let dx = l / n_t as f64;
        let k1 = PI / (2.0 * l);
        let a: Vec<C64> = (1..=n_t).map(|j| C64::new((k1 * j as f64 * dx).sin(), 0.0)).collect();
        let plan = plan_for_len(TransformKind::Dst3, n_t);
        let c = plan.forward(&a).unwrap().values;
        assert!((c[0].re - n_t as f64).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn dst1_synthesis_vanishes_at_true_endpoints() {
        let n_t = 12;
        let n_ft = 2.0 * (n_t as f64 + 1.0);
        for n in 0..n_t {
            let lower = (2.0 * PI * 0.0 * (n as f64 + 1.0) / n_ft).sin();
            let upper = (2.0 * PI * (n_t as f64 + 1.0) * (n as f64 + 1.0) / n_ft).sin();
            assert!(lower.abs() < 1e-14 && upper.abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_separable_mode() {
        let n = 10;
        let plan = TransformPlan::new(TransformKind::Dst1, n).unwrap();
        let mut field = ArrayD::<C64>::zeros(IxDyn(&[1, n, n]));
        for i in 0..n {
            for j in 0..n {
                let v = (PI * i as f64 / (n - 1) as f64).sin() * (PI * j as f64 / (n - 1) as f64).sin();
                field[[0, i, j]] = C64::new(v, 0.0);
            }
        }
        let sx = apply_along_dimension(&field, 0, &plan, Direction::Forward).unwrap();
        let sxy = apply_along_dimension(&sx, 1, &plan, Direction::Forward).unwrap();
        // naive double sum over interior points
        let n_t = n - 2;
        let mut naive = vec![vec![C64::new(0.0, 0.0); n_t]; n_t];
        for (p, row) in naive.iter_mut().enumerate() {
            for (q, out) in row.iter_mut().enumerate() {
                for i in 0..n_t {
                    for j in 0..n_t {
                        let w = 4.0
                            * (PI * (i + 1) as f64 * (p + 1) as f64 / (n_t + 1) as f64).sin()
                            * (PI * (j + 1) as f64 * (q + 1) as f64 / (n_t + 1) as f64).sin();
                        *out += field[[0, i + 1, j + 1]] * w;
                    }
                }
            }
        }
        for p in 0..n_t {
            for q in 0..n_t {
                assert!((sxy[[0, p + 1, q + 1]] - naive[p][q]).norm() < 1e-11);
            }
        }
        assert!((sxy[[0, 1, 1]].re - 81.0).abs() < 1e-11);
        let back = apply_along_dimension(
            &apply_along_dimension(&sxy, 1, &plan, Direction::Inverse).unwrap(),
            0,
            &plan,
            Direction::Inverse,
        )
        .unwrap();
        let err = (&back - &field).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let plan = TransformPlan::new(TransformKind::Dct1, 8).unwrap();
        let field = ArrayD::<C64>::zeros(IxDyn(&[1, 9]));
        assert!(matches!(
            apply_along_dimension(&field, 0, &plan, Direction::Forward),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(apply_along_dimension(&field, 1, &plan, Direction::Forward).is_err());
    }

    #[test]
    fn cache_reuses_plans() {
        let cache = PlanCache::new();
        let a = cache.get(TransformKind::Dst1, 22).unwrap();
        let b = cache.get(TransformKind::Dst1, 22).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }
}
