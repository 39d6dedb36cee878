//! Chains of stochastic vector quantisers (SVQs).
//!
//! Each stage encodes its input as a normalised bank of sigmoid posteriors
//! and decodes linearly from a histogram of `n` code samples. Stages are
//! linked into a feed-forward chain and trained jointly by gradient descent
//! on a weighted sum of per-stage distortions.

pub mod analysis;
pub mod chain;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod io;
pub mod oracle;
pub mod plot;
pub mod svq;
pub mod train;

pub use chain::{ChainNetwork, ChainObjective, ChainSpec, GradientFlow};
pub use data::{Dataset, GeneratorSpec, Histogram2D, ManifoldSample, PhaseSample};
pub use error::{Result, SvqError};
pub use svq::{PosteriorVector, StageGradients, StageObjective, SvqStage};
pub use train::{StageSteps, TrainingSchedule, TrainingTrace};
