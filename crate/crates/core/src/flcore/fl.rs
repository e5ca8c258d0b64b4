use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::fedavg::fedavg;
use super::mlp::{Mlp, LAYER_DIMS};
use super::train::{accuracy, local_train, TrainConfig};
use crate::broadcast::{
    transmit_round, AgentClass, AgentDecoderState, RoundTrace, ServerCodecState, Transport,
};
use crate::dataio::{AgentPartition, Dataset};
use crate::error::{Error, Result};
use crate::modem::{ChannelSpec, Constellation};
use crate::quantizer::{ModelVector, QuantizerSpec};
use crate::rng;

/// Downlink precision mix across agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Every agent decodes the full-resolution model.
    High,
    /// First half of the agents high-SNR, second half low-SNR.
    Mixed,
    /// Every agent decodes only the low-resolution model.
    Low,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::High, Scenario::Mixed, Scenario::Low];

    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::High => "high",
            Scenario::Mixed => "mixed",
            Scenario::Low => "low",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "high" => Ok(Scenario::High),
            "mixed" => Ok(Scenario::Mixed),
            "low" => Ok(Scenario::Low),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

pub fn agent_classes(scenario: Scenario, k: usize) -> Vec<AgentClass> {
    (0..k)
        .map(|i| match scenario {
            Scenario::High => AgentClass::HighSnr,
            Scenario::Low => AgentClass::LowSnr,
            Scenario::Mixed if i < k / 2 => AgentClass::HighSnr,
            Scenario::Mixed => AgentClass::LowSnr,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlTransport {
    Ideal,
    Physical {
        theta: f64,
        snr_high_db: f64,
        snr_low_db: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub seed: u64,
    pub scenario: Scenario,
    /// 1-based; round `r` is measured after the `r`-th aggregation.
    pub round_index: usize,
    /// Accuracy of the aggregated model on the pooled test shards.
    pub test_accuracy: f64,
    /// Sample-weighted mean cross-entropy seen during the agents' local epochs.
    pub train_loss: f64,
}

impl RoundMetrics {
    pub const CSV_HEADER: &'static str = "scenario,seed,round,test_accuracy,train_loss";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.scenario, self.seed, self.round_index, self.test_accuracy, self.train_loss
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub metrics: Vec<RoundMetrics>,
    pub traces: Vec<RoundTrace>,
}

/// Runs one federated training experiment.
///
/// Each round: the server broadcasts the current global model; every agent
/// replaces its local model with what it decoded (tracked low-resolution
/// model, plus the residual for high-SNR agents), trains locally, and the
/// server averages the agents' full-precision parameters.
pub fn run_fl(
    scenario: Scenario,
    cfg: &TrainConfig,
    quant: &QuantizerSpec,
    transport: &FlTransport,
    partitions: &[AgentPartition],
    pooled_test: &Dataset,
    collect_trace: bool,
) -> Result<RunOutput> {
    cfg.validate()?;
    if partitions.len() != cfg.n_agents {
        return Err(Error::Config(format!(
            "{} partitions for {} agents",
            partitions.len(),
            cfg.n_agents
        )));
    }
    let weights = cfg.weights();
    let classes = agent_classes(scenario, cfg.n_agents);

    let (link, snr) = match transport {
        FlTransport::Ideal => (Transport::ideal(), None),
        FlTransport::Physical {
            theta,
            snr_high_db,
            snr_low_db,
        } => (
            Transport::physical(Constellation::new(*theta)?),
            Some((*snr_high_db, *snr_low_db)),
        ),
    };

    let mut global = Mlp::<f64>::init(&LAYER_DIMS, cfg.seed).to_model_vector()?;
    let n = global.len();
    let mut server = ServerCodecState::new(*quant, n)?;
    let mut agents = classes
        .iter()
        .enumerate()
        .map(|(id, &class)| {
            let channel = match snr {
                None => None,
                Some((high, low)) => Some(ChannelSpec::new(
                    if class == AgentClass::HighSnr { high } else { low },
                    rng::derive_seed(cfg.seed, &[rng::DOMAIN_CHANNEL, id as u64]),
                )?),
            };
            AgentDecoderState::new(id, class, channel, quant, n)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = RunOutput::default();
    for round in 0..cfg.rounds {
        let payload = server.encode_round(&global)?;
        let (received, _symbols) = transmit_round(&payload, &agents, &link)?;
        let starts = agents
            .iter_mut()
            .zip(&received)
            .map(|(a, rx)| a.decode(rx))
            .collect::<Result<Vec<ModelVector>>>()?;
        if collect_trace {
            out.traces.push(RoundTrace::new(&payload, &starts)?);
        }

        let trained = starts
            .par_iter()
            .zip(partitions)
            .map(|(start, part)| {
                let mut model = Mlp::<f64>::from_model_vector(&LAYER_DIMS, start)?;
                let loss = local_train(&mut model, &part.train, cfg, round as u64, part.agent_id)?;
                Ok((model.to_model_vector()?, loss, part.train.len()))
            })
            .collect::<Result<Vec<_>>>()?;

        let models: Vec<ModelVector> = trained.iter().map(|t| t.0.clone()).collect();
        global = fedavg(&models, &weights)?;
        let samples: usize = trained.iter().map(|t| t.2).sum();
        let train_loss = trained.iter().map(|t| t.1 * t.2 as f64).sum::<f64>() / samples as f64;
        let test_accuracy = accuracy(&Mlp::<f64>::from_model_vector(&LAYER_DIMS, &global)?, pooled_test)?;

        out.metrics.push(RoundMetrics {
            seed: cfg.seed,
            scenario,
            round_index: round + 1,
            test_accuracy,
            train_loss,
        });
    }
    Ok(out)
}
