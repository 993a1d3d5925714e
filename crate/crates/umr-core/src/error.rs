use alloc::string::String;
use core::fmt;

/// Errors shared by all modules of this crate.
///
/// Variants marked "internal" indicate a bug in this crate rather than bad
/// input; they should never surface on inputs that passed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An edge connects a vertex to itself.
    SelfLoop { edge: usize },
    /// An edge endpoint or rotation entry references a missing vertex/edge.
    BadIndex { what: &'static str, index: usize },
    /// A rotation list disagrees with the edge list (an incident edge is
    /// missing, duplicated, or foreign).
    BadRotation { vertex: usize },
    /// Edge target weights must be nonnegative and lengths strictly positive.
    BadEdgeWeight { edge: usize },
    /// The rotation system does not describe a sphere embedding.
    EulerViolation { vertices: usize, edges: usize, faces: usize },
    /// The graph is not connected.
    Disconnected,
    /// The graph has a bridge; two-edge-connectivity is required.
    BridgeDetected { edge: usize },
    /// A per-edge vector has the wrong length.
    LengthMismatch { expected: usize, got: usize },
    /// The matching instance admits no perfect matching.
    NoPerfectMatching,
    /// A dual node has degree other than three; the cut reduction needs a
    /// triangulated input.
    NotTriangulated { face: usize, degree: usize },
    /// The level schedule must be strictly increasing and positive.
    NonIncreasingSchedule,
    /// A hierarchy is not a stack of nested multicuts.
    InvalidHierarchy(&'static str),
    /// The linear program has no feasible point.
    Infeasible,
    /// The linear program is unbounded.
    Unbounded,
    /// The simplex iteration cap was hit before optimality.
    IterationLimit,
    /// A pool column does not fit the instance it is used with.
    PoolColumnInvalid { layer: usize, column: usize },
    /// A brute-force oracle was asked to exceed its hard size cap.
    TooLarge { what: &'static str, limit: usize, got: usize },
    /// Dimensions of an argument do not match the instance.
    BadDimensions(&'static str),
    /// An argument value is outside its documented domain.
    BadValue(&'static str),
    /// Internal: recovering a cut from an even dual edge set produced an
    /// inconsistent two-coloring.
    ParityError,
    /// Internal: an invariant this crate relies on was violated.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Error::BadIndex { what, index } => write!(f, "{what} index {index} out of range"),
            Error::BadRotation { vertex } => {
                write!(f, "rotation at vertex {vertex} disagrees with the edge list")
            }
            Error::BadEdgeWeight { edge } => {
                write!(f, "edge {edge} needs theta >= 0 and length > 0")
            }
            Error::EulerViolation { vertices, edges, faces } => write!(
                f,
                "rotation system is not planar: {vertices} - {edges} + {faces} != 2"
            ),
            Error::Disconnected => write!(f, "graph is not connected"),
            Error::BridgeDetected { edge } => write!(f, "edge {edge} is a bridge"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "per-edge vector has length {got}, expected {expected}")
            }
            Error::NoPerfectMatching => write!(f, "no perfect matching exists"),
            Error::NotTriangulated { face, degree } => {
                write!(f, "face {face} has {degree} sides, expected 3")
            }
            Error::NonIncreasingSchedule => {
                write!(f, "level schedule must be strictly increasing and positive")
            }
            Error::InvalidHierarchy(why) => write!(f, "invalid hierarchy: {why}"),
            Error::Infeasible => write!(f, "linear program is infeasible"),
            Error::Unbounded => write!(f, "linear program is unbounded"),
            Error::IterationLimit => write!(f, "simplex hit its iteration cap"),
            Error::PoolColumnInvalid { layer, column } => {
                write!(f, "pool column {column} in layer {layer} is invalid")
            }
            Error::TooLarge { what, limit, got } => {
                write!(f, "{what} limited to {limit}, got {got}")
            }
            Error::BadDimensions(what) => write!(f, "dimension mismatch: {what}"),
            Error::BadValue(what) => write!(f, "invalid value: {what}"),
            Error::ParityError => write!(f, "internal: dual cut recovery parity failure"),
            Error::Internal(why) => write!(f, "internal: {why}"),
        }
    }
}

impl core::error::Error for Error {}
