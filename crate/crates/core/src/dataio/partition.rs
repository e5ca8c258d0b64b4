use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// One agent's disjoint train and test shards.
#[derive(Debug, Clone)]
pub struct AgentPartition {
    pub agent_id: usize,
    pub train: Dataset,
    pub test: Dataset,
    /// Indices into the source training set.
    pub train_indices: Vec<usize>,
    /// Indices into the source test set.
    pub test_indices: Vec<usize>,
}

fn shuffled(n: usize, seed: u64, which: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, &[rng::DOMAIN_PARTITION, which]));
    idx
}

/// IID split: seeded shuffle of each source set, then contiguous blocks of
/// `per_agent` samples per agent.
pub fn partition_agents(
    train: &Dataset,
    test: &Dataset,
    k: usize,
    per_agent: usize,
    seed: u64,
) -> Result<Vec<AgentPartition>> {
    let need = k * per_agent;
    if k == 0 || per_agent == 0 {
        return Err(Error::domain("need at least one agent and one sample per agent"));
    }
    if train.len() < need || test.len() < need {
        return Err(Error::domain(format!(
            "{k} agents x {per_agent} samples need {need}, have {} train / {} test",
            train.len(),
            test.len()
        )));
    }
    let train_order = shuffled(train.len(), seed, 0);
    let test_order = shuffled(test.len(), seed, 1);
    Ok((0..k)
        .map(|agent_id| {
            let block = agent_id * per_agent..(agent_id + 1) * per_agent;
            let train_indices = train_order[block.clone()].to_vec();
            let test_indices = test_order[block].to_vec();
            AgentPartition {
                agent_id,
                train: train.select(&train_indices),
                test: test.select(&test_indices),
                train_indices,
                test_indices,
            }
        })
        .collect())
}

/// Union of all agents' test shards, in agent order.
pub fn pooled_test_set(parts: &[AgentPartition]) -> Result<Dataset> {
    Dataset::concat(&parts.iter().map(|p| &p.test).collect::<Vec<_>>())
}
