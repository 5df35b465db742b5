use oscavg_core::averaged::classical_field;
use oscavg_core::averaging::SamplingPlan;
use oscavg_core::fpu::{closed_form_rate, exact_averaged_field, to_canonical_form, FpuParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_matches_numerical_average() {
    let params = FpuParams::reference();
    let sys = to_canonical_form(&params).unwrap();
    let plan = SamplingPlan::periodic(2.0 * std::f64::consts::PI, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let y: Vec<f64> = (0..12).map(|i| if i >= 9 { rng.gen_range(-200.0..200.0) } else { rng.gen_range(-1.0..1.0) }).collect();
        let x: Vec<f64> = y.iter().enumerate().map(|(i, v)| if i >= 9 { v / params.omega } else { *v }).collect();
        let numeric = closed_form_rate(&params, &classical_field(&sys, &plan, &x).unwrap()).unwrap();
        let exact = exact_averaged_field(params.omega, &y).unwrap();
        let scale = exact.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (i, (a, b)) in numeric.iter().zip(&exact).enumerate() {
            assert!((a - b).abs() < 1e-10 * scale, "component {i}: numeric {a} closed form {b}");
        }
    }
}
