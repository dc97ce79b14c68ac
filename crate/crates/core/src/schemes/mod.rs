//! Principal-side scheme constructions.

mod binning;
mod cluster;
mod guarantee;
mod oblivious;
mod registry;
mod restrict;
mod semi;
mod simple;

pub use binning::{binning_scheme, binning_scheme_z, Bin, BinPlan};
pub use cluster::{beta_cluster_scheme, cluster_index, Cluster, ClusterPlan};
pub use guarantee::Guarantee;
pub use oblivious::oblivious_scheme;
pub use registry::{solve, Algo, Solved};
pub use restrict::{restrict_options, RestrictResult};
pub use semi::{
    algo_high, algo_low, groups, high_top_class, semi_oblivious_scheme, Group, HighPlan, LowPlan, SemiPlan,
};
pub use simple::{accept_all, best_single_round};
