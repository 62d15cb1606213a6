//! File formats and the returns-to-graph pipeline.

mod atomic;
pub mod fixture;
pub mod graph;
pub mod matrix_csv;
pub mod records;
pub mod returns;

pub use atomic::write_atomic;
pub use graph::{export_graph, extract_graph, AnomalyGraph, Edge, GraphFormat};
pub use matrix_csv::{read_matrix_csv, read_sym_matrix_csv, write_matrix_csv, MatrixFile};
pub use returns::{covariance_from_returns, load_returns_csv, parse_returns, LoadOptions, ReturnsTable};
