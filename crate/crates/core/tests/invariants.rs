use nalgebra::DMatrix;
use proptest::prelude::*;

use oscavg_core::averaging::{trapezoid_average, SamplingPlan};
use oscavg_core::linear::{LinearFlow, SkewHermitianOperator};
use oscavg_core::wavebench::{AdvectionOperator, Grid2D, PDE_ZERO_TOLERANCE};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn skew(n: usize) -> impl Strategy<Value = (SkewHermitianOperator, Vec<f64>)> {
    (prop::collection::vec(-3.0..3.0f64, n * n), prop::collection::vec(-2.0..2.0f64, n)).prop_map(move |(a, x)| {
        let m = DMatrix::from_vec(n, n, a);
        let s = &m - m.transpose();
        (SkewHermitianOperator::from_real(&s, 1e-9).unwrap(), x)
    })
}

fn skew_any() -> impl Strategy<Value = (SkewHermitianOperator, Vec<f64>)> {
    (2usize..7).prop_flat_map(skew)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_is_an_isometry((op, x) in skew_any(), t in -20.0..20.0f64) {
        let y = op.flow(t, &x).unwrap();
        prop_assert!((norm(&y) - norm(&x)).abs() <= 1e-10 * (1.0 + norm(&x)));
    }

    #[test]
    fn flow_is_a_group((op, x) in skew_any(), s in -5.0..5.0f64, t in -5.0..5.0f64) {
        let composed = op.flow(s, &op.flow(t, &x).unwrap()).unwrap();
        let direct = op.flow(s + t, &x).unwrap();
        prop_assert!(max_diff(&composed, &direct) <= 1e-10 * (1.0 + norm(&x)));
        let back = op.flow(-t, &op.flow(t, &x).unwrap()).unwrap();
        prop_assert!(max_diff(&back, &x) <= 1e-10 * (1.0 + norm(&x)));
    }

    #[test]
    fn pinv_inverts_on_the_range((op, x) in skew_any()) {
        let y = op.apply(&x).unwrap();
        let z = op.pinv_apply(&y).unwrap();
        let back = op.apply(&z).unwrap();
        prop_assert!(max_diff(&back, &y) <= 1e-8 * (1.0 + norm(&y)));
        let again = op.pinv_apply(&back).unwrap();
        prop_assert!(max_diff(&again, &z) <= 1e-8 * (1.0 + norm(&z)));
    }

    #[test]
    fn averages_reproduce_constants(c in prop::collection::vec(-10.0..10.0f64, 1..5), n in 1usize..50, period in 0.1..10.0f64) {
        let plan = SamplingPlan::periodic(period, n);
        let avg = trapezoid_average(|_| c.clone(), &plan).unwrap();
        prop_assert!(max_diff(&avg, &c) <= 1e-12 * (1.0 + norm(&c)));
    }

    #[test]
    fn transport_flow_preserves_grid_norm(
        values in prop::collection::vec(-1.0..1.0f64, 8 * 6),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        t in -3.0..3.0f64,
    ) {
        let grid = Grid2D::new(2.0, 3.0, 8, 6).unwrap();
        let op = AdvectionOperator::new(grid.clone(), a, b, PDE_ZERO_TOLERANCE);
        let back = grid.inverse(&grid.forward(&values));
        prop_assert!(max_diff(&back, &values) <= 1e-12);
        let moved = op.flow(t, &values).unwrap();
        prop_assert!((norm(&moved) - norm(&values)).abs() <= 1e-10);
    }
}
