use std::sync::Arc;

use npspec::boundaries::BoundaryPair;
use npspec::integrator::{run, Method, MethodConfig};
use npspec::metrics::{rms_error_uniform, ErrorReport};
use npspec::problems::{heat_zero_boundary, FieldFn};
use npspec::transforms::{reference, Direction, TransformKind, TransformPlan};
use npspec::C64;
use proptest::prelude::*;

fn complex_vec(max: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..=max)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plans_match_the_naive_sums(kind in prop::sample::select(TransformKind::ALL.to_vec()), x in complex_vec(64)) {
        let n_t = x.len();
        let plan = TransformPlan::new(kind, kind.points_for(n_t)).unwrap();
        let mut y = x.clone();
        plan.process(&mut y, Direction::Forward).unwrap();
        let naive = reference::forward(kind, &x);
        let scale = max_norm(&naive).max(1e-300);
        let dev = y.iter().zip(&naive).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(dev / scale < 1e-12);
        plan.process(&mut y, Direction::Inverse).unwrap();
        let back = y.iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(back / max_norm(&x).max(1e-300) < 1e-13);
    }

    /// FIP is exact in time for any finite sum of resolved heat modes.
    #[test]
    fn fip_is_exact_for_resolved_modes(
        amps in prop::collection::vec(-2.0..2.0f64, 1..6),
        neumann in any::<bool>(),
    ) {
        let pair = if neumann { BoundaryPair::NN } else { BoundaryPair::DD };
        let mut problem = heat_zero_boundary(pair).unwrap();
        let a = amps.clone();
        let exact: FieldFn = Arc::new(move |_, t, x| {
            let v: f64 = a
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let n = (i + 1) as f64;
                    let shape = if neumann { (n * x[0]).cos() } else { (n * x[0]).sin() };
                    c * shape * (-n * n * t).exp()
                })
                .sum();
            C64::new(v, 0.0)
        });
        let ex = exact.clone();
        problem.initial = Arc::new(move |c, _, x| ex(c, 0.0, x));
        problem.exact = Some(exact);
        let traj = run(&problem, MethodConfig::new(Method::Fip, problem.time)).unwrap();
        let report = ErrorReport::from_trajectory(&problem, Method::Fip, problem.time.step(), &traj).unwrap();
        prop_assert!(report.error < 1e-12, "{}", report.error);
    }

    #[test]
    fn rms_error_scales_linearly(
        rows in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 4), 1..8),
        shift in -3.0..3.0f64,
        factor in 0.1..10.0f64,
        m in 0.5..4.0f64,
    ) {
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
        let stretched: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + factor * shift).collect()).collect();
        prop_assert_eq!(rms_error_uniform(&rows, &rows, m).unwrap(), 0.0);
        let e1 = rms_error_uniform(&moved, &rows, m).unwrap();
        let e2 = rms_error_uniform(&stretched, &rows, m).unwrap();
        prop_assert!((e1 - shift.abs() / m.sqrt()).abs() < 1e-12);
        prop_assert!((e2 - factor * e1).abs() < 1e-10 * (1.0 + e2));
    }
}
