use std::f64::consts::LN_2;

use dsac_core::ae::{train, AEConfig, PaprPeak};
use dsac_core::channel::ChannelRealization;

fn tiny() -> AEConfig {
    AEConfig {
        m: 4,
        n: 4,
        p: 2,
        u: 2,
        l: 8,
        f_c: 0.0,
        f_s: 16.0,
        alpha: 0.0,
        one_over_n0_db: 3.0,
        epochs: 1,
        minibatch_packets: 16,
        train_batches: 20,
        test_batches: 4,
        learning_rate: 1e-2,
        hidden: [16, 32],
        papr_peak: PaprPeak::Max,
        seed: 12,
    }
}

#[test]
fn one_epoch_on_identity_channel_lowers_test_bce() {
    let cfg = tiny();
    let channel = ChannelRealization::pure_delay(0, cfg.l, cfg.f_s, cfg.f_c);
    let (_, report) = train(&cfg, &channel).unwrap();
    let initial = report.initial_test.bce;
    assert!((initial - LN_2).abs() < 0.15, "{initial}");
    assert!(report.final_test().bce < initial);
}

#[test]
fn same_seed_same_report() {
    let cfg = tiny();
    let channel = ChannelRealization::pure_delay(0, cfg.l, cfg.f_s, cfg.f_c);
    let (a, ra) = train(&cfg, &channel).unwrap();
    let (b, rb) = train(&cfg, &channel).unwrap();
    assert_eq!(ra.to_csv(), rb.to_csv());
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
