//! Test-side oracles shared by the integration tests and the acceptance target.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use multires_fl::broadcast::{
    transmit_round, AgentClass, AgentDecoderState, ServerCodecState, Transport,
};
use multires_fl::flcore::{Mlp, LAYER_DIMS};
use multires_fl::quantizer::QuantizerSpec;
use multires_fl::ModelVector;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

/// Labels around the circle, starting from the point at π/4 − θ.
pub const RING_LABELS: [u8; 8] = [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100];

/// Points at π/4 + qπ/2 ∓ θ, in counter-clockwise order.
pub fn ring_points(theta: f64) -> [(f64, f64); 8] {
    let mut pts = [(0.0, 0.0); 8];
    for q in 0..4 {
        let centre = PI / 4.0 + q as f64 * PI / 2.0;
        for (j, a) in [centre - theta, centre + theta].into_iter().enumerate() {
            pts[2 * q + j] = (a.cos(), a.sin());
        }
    }
    pts
}

pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / 2f64.sqrt())
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct UnionBound {
    pub ser: f64,
    /// Per-bit rate on plane 3 for the full receiver.
    pub ber_plane3: f64,
    /// Per-bit rate on planes 1-2 for the full receiver.
    pub ber_plane12: f64,
}

/// Pairwise union bound over every ordered pair, optionally restricted to
/// each point's minimum-distance neighbours.
pub fn union_bound(theta: f64, snr_db: f64, nearest_only: bool) -> UnionBound {
    let pts = ring_points(theta);
    let sigma = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let (mut ser, mut b3, mut b12) = (0.0, 0.0, 0.0);
    for i in 0..8 {
        let dmin = (0..8)
            .filter(|&j| j != i)
            .map(|j| dist(pts[i], pts[j]))
            .fold(f64::INFINITY, f64::min);
        for j in (0..8).filter(|&j| j != i) {
            let d = dist(pts[i], pts[j]);
            if nearest_only && d > dmin * (1.0 + 1e-9) {
                continue;
            }
            let p = q_function(d / (2.0 * sigma));
            let diff = RING_LABELS[i] ^ RING_LABELS[j];
            ser += p;
            b3 += p * f64::from(diff & 1);
            b12 += p * f64::from((diff >> 1).count_ones()) / 2.0;
        }
    }
    UnionBound { ser: ser / 8.0, ber_plane3: b3 / 8.0, ber_plane12: b12 / 8.0 }
}

pub fn mnist_dir() -> PathBuf {
    std::env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

#[derive(Debug, Default)]
pub struct ConformanceReport {
    pub rounds: usize,
    /// Rounds where server, agents and the re-simulation all agreed bit for bit.
    pub exact_rounds: usize,
    /// max over rounds and components of |ŵ − w| / (2⁻²⁴ · max|ω₂|).
    pub worst_error_ratio: f64,
    pub first_failure: Option<String>,
}

fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Random-walk model sequence pushed through the codec with error-free
/// transport, compared against an integer-step re-simulation.
pub fn random_walk_conformance(rounds: usize, n: usize, decimals: u8, seed: u64) -> ConformanceReport {
    let spec = QuantizerSpec::fixed_point(decimals).unwrap();
    let scale = 10f64.powi(decimals as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Normal::new(0.0, 0.3).unwrap();
    let step = Normal::new(0.0, 0.02).unwrap();
    let mut w: Vec<f64> = (0..n).map(|_| start.sample(&mut rng)).collect();

    let mut server = ServerCodecState::new(spec, n).unwrap();
    let classes = [AgentClass::HighSnr, AgentClass::HighSnr, AgentClass::LowSnr, AgentClass::LowSnr];
    let mut agents: Vec<AgentDecoderState> = classes
        .iter()
        .enumerate()
        .map(|(id, &c)| AgentDecoderState::new(id, c, None, &spec, n).unwrap())
        .collect();
    let mut oracle_steps = vec![0i64; n];
    let mut report = ConformanceReport { rounds, ..Default::default() };

    for r in 0..rounds {
        if r > 0 {
            for x in &mut w {
                *x += step.sample(&mut rng);
            }
        }
        let model = ModelVector::new(w.clone()).unwrap();
        let payload = server.encode_round(&model).unwrap();
        for (k, &x) in oracle_steps.iter_mut().zip(&w) {
            *k += ((x - *k as f64 / scale) * scale).round_ties_even() as i64;
        }
        let oracle: Vec<f64> = oracle_steps.iter().map(|&k| k as f64 / scale).collect();
        let (received, _) = transmit_round(&payload, &agents, &Transport::ideal()).unwrap();

        let mut exact = bits_eq(&server.tracked_w1(), &oracle);
        let w2_max = payload.w2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (agent, rx) in agents.iter_mut().zip(&received) {
            let decoded = agent.decode(rx).unwrap();
            exact &= bits_eq(&agent.tracked_w1(), &server.tracked_w1());
            if agent.class == AgentClass::HighSnr {
                for (a, b) in decoded.iter().zip(&w) {
                    let err = (a - b).abs();
                    let ratio = if w2_max > 0.0 {
                        err / (w2_max * 2f64.powi(-24))
                    } else if err == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    report.worst_error_ratio = report.worst_error_ratio.max(ratio);
                }
            }
        }
        if exact {
            report.exact_rounds += 1;
        } else if report.first_failure.is_none() {
            report.first_failure = Some(format!("tracked models diverge in round {r}"));
        }
    }
    report
}

/// Worst relative error between backprop and central differences.
///
/// Each model is a Glorot init plus Gaussian jitter on every parameter (so
/// biases are non-zero), evaluated on a small random batch.
pub fn gradient_check(models: usize, coords: usize, step: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.05).unwrap();
    let mut worst = 0.0f64;
    for m in 0..models {
        let base = Mlp::<f64>::init(&LAYER_DIMS, seed.wrapping_add(m as u64));
        let flat: Vec<f64> = base.flatten().iter().map(|v| v + jitter.sample(&mut rng)).collect();
        let model = Mlp::<f64>::from_flat(&LAYER_DIMS, &flat).unwrap();
        let batch = 8;
        let x = Array2::from_shape_fn((batch, LAYER_DIMS[0]), |_| rng.random::<f64>());
        let labels: Vec<u8> = (0..batch).map(|_| rng.random_range(0..10u8)).collect();
        let grad = model.gradient(x.view(), &labels).unwrap();
        for _ in 0..coords {
            let i = rng.random_range(0..flat.len());
            let loss_at = |v: f64| {
                let mut p = flat.clone();
                p[i] = v;
                Mlp::<f64>::from_flat(&LAYER_DIMS, &p).unwrap().mean_loss(x.view(), &labels).unwrap()
            };
            let numeric = (loss_at(flat[i] + step) - loss_at(flat[i] - step)) / (2.0 * step);
            let denom = grad[i].abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((grad[i] - numeric).abs() / denom);
        }
    }
    worst
}
