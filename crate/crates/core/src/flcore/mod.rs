//! Federated learning core: the classifier, local SGD, FedAvg and the
//! per-round orchestration of broadcast, local training and aggregation.

mod fedavg;
mod fl;
mod mlp;
mod train;

pub use fedavg::fedavg;
pub use fl::{agent_classes, run_fl, FlTransport, RoundMetrics, RunOutput, Scenario};
pub use mlp::{cross_entropy, softmax, Dense, Mlp, LAYER_DIMS, PARAM_COUNT};
pub use train::{accuracy, local_train, TrainConfig};
