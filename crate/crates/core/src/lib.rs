//! Community-aware centrality measures on undirected networks, evaluated by
//! multi-spreader SIR diffusion, rank correlation, and dismantling analyses.
//!
//! The crate is organized around immutable inputs shared across threads:
//! [`graph::Graph`] and [`partition::Partition`] are built once and read
//! everywhere. [`centrality`] computes per-node scores and rankings for the
//! degree baseline and seven community-aware measures, [`sir`] runs seeded
//! Monte-Carlo spreading, [`stats`] holds the correlation and regression
//! machinery, and [`pipeline`] orchestrates whole experiments into CSV/JSON
//! reports.
//!
//! ```
//! use commspread_core::{
//!     degree_centrality, load_edge_list, modularity, LoadOptions, Partition,
//! };
//!
//! let text = "a b\nb c\nc a\n";
//! let loaded = load_edge_list(text.as_bytes(), &LoadOptions::default())?;
//! let graph = loaded.graph;
//! let partition = Partition::from_assignment(&graph, &[0, 0, 0]);
//! assert_eq!(modularity(&graph, &partition)?, 0.0);
//! assert_eq!(degree_centrality(&graph).scores, vec![2.0, 2.0, 2.0]);
//! # Ok::<(), commspread_core::Error>(())
//! ```

pub mod centrality;
pub mod error;
pub mod graph;
pub mod kshell;
pub mod louvain;
pub mod partition;
pub mod pipeline;
pub mod report;
pub mod sir;
pub mod stats;
pub mod synth;

pub use centrality::{
    community_based_centrality, community_based_mediator, community_hub_bridge, comm_centrality,
    compute_measure, degree_centrality, kshell_with_community, modularity_vitality,
    participation_coefficient, CommUndefined, Measure, MeasureConfig, ScoreVector, VitalityOrder,
};
pub use error::{Error, ErrorKind, Result};
pub use graph::{
    largest_connected_component, load_edge_list, load_edge_list_path, mean_degree_moments,
    EdgeListLoad, Graph, LoadOptions,
};
pub use louvain::{louvain_partition, LouvainOutcome};
pub use partition::{
    load_partition, load_partition_path, mixing_parameter, modularity, strength_category,
    Partition, Strength, StrengthThresholds,
};
pub use pipeline::{
    correlation_heatmap, cross_network_pearson, default_fo_grid, delta_r_sweep, lcc_dismantling,
    mu_regression_points, run_experiment, CorrelationMatrix, DeltaRCurve, DeltaRPoint,
    ExperimentSpec, LccCurve, Manifest, NetworkSpec, SkipRecord,
};
pub use sir::{epidemic_threshold, run_sir, select_seed_set, SirConfig, SirOutcome};
pub use stats::{kendall_tau_b, ols_regression, pearson, RegressionResult};
