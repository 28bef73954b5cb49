use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("guard exceeded: {what} is {actual}, limit {limit}")]
    Guard {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    #[error("invalid chain: clauses {i} and {j}: {reason}")]
    Chain { i: usize, j: usize, reason: String },

    #[error("clauses {i} and {j} overlap in an unclassifiable way: {reason}")]
    Classification { i: usize, j: usize, reason: String },

    #[error("instance invariant violated: {0}")]
    Instance(String),

    #[error("characteristic system is singular")]
    Singular,

    #[error("characteristic distribution is infeasible: {0}")]
    Infeasible(String),

    #[error("covering family misses {missed} of {total} words")]
    Coverage { missed: u64, total: u64 },

    #[error("table mismatch:\n{}", .0.join("\n"))]
    TableMismatch(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
