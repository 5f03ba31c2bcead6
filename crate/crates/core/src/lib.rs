//! Lexical and syntactic diversity measurement with Rényi entropies,
//! diversity-driven document sampling and the statistics used to evaluate it.

pub mod analysis;
pub mod corpus;
pub mod counts;
pub mod entropy;
pub mod error;
pub mod kv;
pub mod normalize;
pub mod sampler;
pub mod syntax;
pub mod synth;

pub use analysis::{
    BaselineDistribution, BaselineReport, BlockProfile, ClsdReport, ClsdRow, NormalityTest,
    SigmaDistance,
};
pub use corpus::{Document, NormalizedDocument, SampleManifest, SeededRng, Strictness};
pub use counts::CategoryCounts;
pub use entropy::{AlphaOrder, DiversityProfile, EntropyAccumulator};
pub use error::{Error, ErrorKind, Result};
pub use normalize::{NoiseClass, Normalizer, NormalizerConfig, TokenSequence};
pub use sampler::{OptimalSample, SampleResult, SamplerConfig, TrajectoryPoint};
pub use syntax::{DependencySentence, DependencyToken, PosColumn, SubtreeKey};
