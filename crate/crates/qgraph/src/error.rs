//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // ----- graph parsing / validation -----
    #[error("syntax error on line {0}: {1}")]
    Syntax(usize, String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    UnknownVertexRef { edge: String, vertex: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` has non-positive length")]
    NonPositiveLength(String),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("graph must have at least one vertex and one edge")]
    EmptyGraph,
    #[error("coupling file is missing vertex `{0}`")]
    MissingCoupling(String),

    // ----- exact algebra -----
    #[error("multilinearity violated: variable set overlap in polynomial product")]
    MultilinearViolation,
    #[error("weight class `{0}` is not square-free after reduction")]
    SquareFreeViolation(String),
    #[error("graph has {n} vertices, exceeding the expansion cap {cap}")]
    SizeCap { n: usize, cap: usize },

    // ----- numeric evaluation -----
    #[error("lambda = 0 is excluded from direct M-matrix evaluation")]
    ZeroLambda,
    #[error("evaluation point too close to a pole of `{factor}` (|{trig}| = {magnitude:.3e})")]
    PoleProximity {
        factor: String,
        trig: &'static str,
        magnitude: f64,
    },
    #[error("evaluation produced a non-real value (imaginary residue {0:.3e})")]
    NonRealEvaluation(f64),
    #[error("determinant evaluation unstable near lambda = {0}")]
    ConditioningFailure(f64),
    #[error("spectrum windows differ: {0}")]
    WindowMismatch(String),

    // ----- reductions -----
    #[error("edge `{0}` does not connect two vertices of the same type")]
    NotSameType(String),
    #[error("edge `{0}` is a loop")]
    IsLoop(String),
    #[error("edge `{0}` is not of mixed type")]
    NotMixedEdge(String),
    #[error("vertex `{0}` carries no loop")]
    NoLoopAtVertex(String),
    #[error("removing vertex `{0}` would disconnect the graph")]
    WouldDisconnect(String),
    #[error("reduction would leave an empty graph")]
    EmptyResult,
    #[error("vertex `{0}` does not have valence 2 via two distinct non-loop edges")]
    WrongValence(String),
    #[error("vertex `{0}` carries a loop; cleaning is not defined there")]
    LoopAtVertex(String),
    #[error("endpoint `{0}` does not have both couplings zero")]
    EndpointNotDoublyZero(String),
    #[error("quasigraph M-matrix requires all non-loop edges of mixed type")]
    NotAllMixed,

    // ----- isospectrality -----
    #[error("coupling at vertex `{0}` adjacent to the balanced vertex is zero")]
    ZeroAdjacentCoupling(String),
    #[error("family parameter must be nonzero")]
    ZeroParameter,
}

impl Error {
    /// Stable machine-readable tag for JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax(..) => "syntax",
            Error::DuplicateId(_) => "duplicate_id",
            Error::UnknownVertexRef { .. } => "unknown_vertex_ref",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::UnknownEdge(_) => "unknown_edge",
            Error::NonPositiveLength(_) => "non_positive_length",
            Error::DisconnectedGraph => "disconnected_graph",
            Error::EmptyGraph => "empty_graph",
            Error::MissingCoupling(_) => "missing_coupling",
            Error::MultilinearViolation => "multilinear_violation",
            Error::SquareFreeViolation(_) => "square_free_violation",
            Error::SizeCap { .. } => "size_cap",
            Error::ZeroLambda => "zero_lambda",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::NonRealEvaluation(_) => "non_real_evaluation",
            Error::ConditioningFailure(_) => "conditioning_failure",
            Error::WindowMismatch(_) => "window_mismatch",
            Error::NotSameType(_) => "not_same_type",
            Error::IsLoop(_) => "is_loop",
            Error::NotMixedEdge(_) => "not_mixed_edge",
            Error::NoLoopAtVertex(_) => "no_loop_at_vertex",
            Error::WouldDisconnect(_) => "would_disconnect",
            Error::EmptyResult => "empty_result",
            Error::WrongValence(_) => "wrong_valence",
            Error::LoopAtVertex(_) => "loop_at_vertex",
            Error::EndpointNotDoublyZero(_) => "endpoint_not_doubly_zero",
            Error::NotAllMixed => "not_all_mixed",
            Error::ZeroAdjacentCoupling(_) => "zero_adjacent_coupling",
            Error::ZeroParameter => "zero_parameter",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
