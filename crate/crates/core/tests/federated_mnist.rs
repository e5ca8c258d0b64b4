mod common;

use std::f64::consts::PI;

use multires_fl::dataio::{load_mnist, partition_agents, pooled_test_set};
use multires_fl::flcore::{run_fl, FlTransport, RoundMetrics, Scenario, TrainConfig};
use multires_fl::quantizer::QuantizerSpec;

fn short_run(scenario: Scenario, transport: &FlTransport, rounds: usize) -> Vec<RoundMetrics> {
    let (train, test) = load_mnist(&common::mnist_dir()).expect("MNIST data; run scripts/fetch_mnist.sh");
    let parts = partition_agents(&train, &test, 4, 2_500, 3).unwrap();
    let pooled = pooled_test_set(&parts).unwrap();
    let cfg = TrainConfig { rounds, seed: 3, ..Default::default() };
    let quant = QuantizerSpec::fixed_point(2).unwrap();
    run_fl(scenario, &cfg, &quant, transport, &parts, &pooled, false).unwrap().metrics
}

#[test]
fn high_resolution_learns_quickly() {
    let m = short_run(Scenario::High, &FlTransport::Ideal, 4);
    assert_eq!(m.iter().map(|r| r.round_index).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert!(m[3].test_accuracy > m[0].test_accuracy, "{m:?}");
    assert!(m[3].test_accuracy > 0.6, "{:?}", m[3]);
    assert!(m[3].train_loss < m[0].train_loss);
}

#[test]
fn clean_physical_channel_matches_ideal() {
    // at these SNRs a symbol error is astronomically unlikely
    let transport = FlTransport::Physical { theta: PI / 16.0, snr_high_db: 40.0, snr_low_db: 30.0 };
    assert_eq!(short_run(Scenario::Mixed, &FlTransport::Ideal, 3), short_run(Scenario::Mixed, &transport, 3));
}

#[test]
fn uncorrected_bit_errors_abort_a_noisy_run() {
    // no CRC and no resynchronisation: high-order low-res bit errors accumulate
    // in the agents' tracks until the differential leaves the codec range
    let (train, test) = load_mnist(&common::mnist_dir()).expect("MNIST data");
    let parts = partition_agents(&train, &test, 4, 2_500, 3).unwrap();
    let pooled = pooled_test_set(&parts).unwrap();
    let cfg = TrainConfig { rounds: 10, seed: 3, ..Default::default() };
    let quant = QuantizerSpec::fixed_point(2).unwrap();
    let transport = FlTransport::Physical { theta: PI / 16.0, snr_high_db: 20.0, snr_low_db: 12.0 };
    let err = run_fl(Scenario::Low, &cfg, &quant, &transport, &parts, &pooled, false).unwrap_err();
    assert!(matches!(err, multires_fl::Error::Range { .. }), "{err}");
}
