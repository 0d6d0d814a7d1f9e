use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("generator {index} is out of range for {presentation} (rank {rank})")]
    InvalidGenerator {
        index: u32,
        rank: u32,
        presentation: String,
    },

    #[error("presentation mismatch: {left} vs {right}")]
    PresentationMismatch { left: String, right: String },

    #[error("set not symmetric: missing {missing}")]
    NotSymmetric { missing: String },

    #[error("empty generating set")]
    EmptySet,

    #[error(
        "predicted support of {predicted} words exceeds the guard of {guard}; \
         use the radial engine for free groups"
    )]
    SupportGuard { predicted: u128, guard: usize },

    #[error("ball of radius {radius} has {predicted} elements, above the guard of {guard}")]
    BallGuard {
        radius: u32,
        predicted: u128,
        guard: usize,
    },

    #[error("element is not radial: {first} and {second} have different coefficients")]
    NonRadial { first: String, second: String },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: u32, right: u32 },

    #[error("radial engine requires a free group with its standard generating set")]
    RadialUnsupported,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("level profile {0}")]
    InvalidProfile(String),

    #[error("element has size {size}, need at least 3")]
    SizeTooSmall { size: u128 },

    #[error("element has a negative coefficient at {word}")]
    NegativeCoefficient { word: String },

    #[error("element is not hermitean: coefficient at {word} differs from its inverse")]
    NotHermitean { word: String },

    #[error("{0} is only a lower bound; an exact value or upper bound is required")]
    OneSided(String),

    #[error("not enough moments: {have} available, {need} required")]
    TooFewMoments { have: usize, need: usize },
}
