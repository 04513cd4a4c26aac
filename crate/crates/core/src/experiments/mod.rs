//! Edge-list ingestion, declarative experiment configs and power tables.

pub mod config;
pub mod edgelist;
mod run;
pub mod table;

pub use config::{ExperimentConfig, SCHEMA_VERSION};
pub use edgelist::{
    load_edge_list, prepare_multilayer, read_edge_list, save_edge_list, write_edge_list, EdgeListDataset,
    EdgeListOptions, LabeledGraph, Layer,
};
pub use run::run_experiment;
pub use table::{PowerRow, PowerTable, CSV_HEADER};
