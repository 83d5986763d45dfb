use thiserror::Error;

use crate::polytope::Inequality;
use crate::scenario::Scenario;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario ({ma},{mb},{na},{nb}): need m >= 1 and n >= 2")]
    InvalidScenario {
        ma: usize,
        mb: usize,
        na: usize,
        nb: usize,
    },

    #[error("setting pair ({ia},{ib}) sums to {sum}, expected 1")]
    Normalization { ia: usize, ib: usize, sum: String },

    #[error("signalling: marginal of party {party} setting {setting} depends on the other party's setting")]
    Signalling { party: char, setting: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("inequality is violated by vertex {vertex} (value {value} > bound {bound})")]
    InvalidInequality {
        vertex: usize,
        value: i64,
        bound: i64,
    },

    #[error("inequality has no nonzero coefficient")]
    ZeroInequality,

    #[error("scenario mismatch: expected {expected}, got {found}")]
    IncompatibleScenario { expected: Scenario, found: Scenario },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid outcome partition: {0}")]
    InvalidPartition(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("see-saw did not converge after {iterations} sweeps (best value {best})")]
    NonConvergence { iterations: usize, best: f64 },

    #[error("behavior is not local: violates {}", .0.label().unwrap_or("a facet"))]
    NotLocal(Box<Inequality>),

    #[error("local model construction produced a negative {0}")]
    NegativeIntermediate(String),

    #[error("unsupported scenario {0} for this operation")]
    UnsupportedScenario(Scenario),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}
