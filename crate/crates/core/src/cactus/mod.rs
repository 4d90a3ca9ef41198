//! Exact enumeration of admissible coincidence graphs and the moment
//! formula built on their counts.

mod graph;
mod moments;
mod partition;
mod table;

pub use graph::{AdmissibilityStats, CoincidenceGraph, MAX_GRAPH_Q};
pub use moments::{
    moment, moment_f64, moment_from_table, moments, moments_f64, mp_moment, multilayer_mp_moment, narayana,
    MomentSeries,
};
pub use partition::{all_partitions, bell, SetPartition};
pub use table::{cached_count_table, count_table, count_table_with_limit, CactusCountTable, CountKey, Q_MAX};
