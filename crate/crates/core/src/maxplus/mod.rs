//! Maximum cycle means, sub-actions and normal forms on the de Bruijn graph
//! of a cylinder function, all in exact arithmetic.

mod graph;
pub mod howard;
mod karp;
mod normal_form;
mod oracle;
pub mod scaled;
mod support;

pub use graph::{build_graph, DeBruijnGraph, Topology};
pub use karp::karp_max_mean;
pub use normal_form::{
    apply_phi, cohomologous_form, howard_sub_action, is_fixed_point, normal_form, sub_action,
    value_iteration, NormalForm, NormalFormCertificate, SubAction, KARP_NODE_LIMIT, KLEENE_NODE_LIMIT,
};
pub use support::{
    max_mean_cycle, max_mean_of, maximizing_support, peel, support_from_zero_edges, MaxMeanResult,
    Support, CYCLE_LIST_LIMIT,
};
pub use oracle::{lyndon_words, oracle_max, OracleMethod, OracleResult};
