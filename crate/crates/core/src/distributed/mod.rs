//! Communication-free multi-query answering, simulated in one process.
//!
//! The node set is partitioned over `m` machines. Each machine holds one
//! payload of at most `k` bits: either a summary personalized to its part or,
//! as a baseline, the edges nearest to its part. A query is answered only on
//! the machine its node routes to.

mod deploy;
mod partition;
mod scenario;

pub use deploy::{
    build_deployment_subgraphs, build_deployment_summaries, read_deployment, write_deployment, Deployment,
    DeploymentKind, Machine, Manifest, Payload, RoutedAnswer,
};
pub use partition::{label_propagation, louvain, pack_communities, partition, PartitionMethod};
pub use scenario::{run_scenario, GraphSource, Scenario};
