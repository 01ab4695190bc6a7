pub mod apps;
pub mod error;
pub mod generate;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod pmf;
pub mod projection;
pub mod rng;
pub mod schur;
pub mod sparsify;
pub mod walk;
pub mod weighted;

pub use error::{Error, Result};
pub use graph::{EdgeId, MultiGraph, WeightMode};
