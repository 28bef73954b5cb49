pub mod bounds;
pub mod chain;
pub mod characteristic;
pub mod covering;
pub mod dimacs;
pub mod error;
pub mod formula;
pub mod generator;
pub mod ksat;
pub mod linsolve;
pub mod local_search;
pub mod oracle;
pub mod random;
pub mod report;
pub mod threesat;
pub mod twosat;
pub mod types;

pub use error::{Error, Result};
