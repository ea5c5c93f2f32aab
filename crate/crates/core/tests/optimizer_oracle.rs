use dsac_core::nn::{glorot_uniform, AdamConfig, AdamState};
use dsac_core::rng::stream;

// Three Adam steps on (x - 3)^2 from x = 0 with lr = 0.1, reference values
// from an independent scalar implementation.
const TRACE: [f64; 3] = [0.099_999_999_833_333_35, 0.199_897_292_585_211_02, 0.299_618_476_549_252_67];

#[test]
fn adam_scalar_quadratic_trace() {
    let mut adam = AdamState::new(
        AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        },
        &[1],
    );
    let mut x = vec![0.0];
    for want in TRACE {
        let g = vec![2.0 * (x[0] - 3.0)];
        adam.step(&mut [x.as_mut_slice()], &[g]).unwrap();
        assert!((x[0] - want).abs() < 1e-14, "{} vs {want}", x[0]);
    }
    assert_eq!(adam.steps(), 3);
}

#[test]
fn glorot_moments() {
    let (fan_in, fan_out) = (200, 500);
    let w = glorot_uniform(fan_in, fan_out, &mut stream(4, 0));
    let n = w.data().len() as f64;
    let mean = w.data().iter().sum::<f64>() / n;
    let var = w.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let want = 2.0 / (fan_in + fan_out) as f64;
    assert!((var / want - 1.0).abs() < 0.05);
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    assert!(w.data().iter().all(|v| v.abs() <= bound));
}
