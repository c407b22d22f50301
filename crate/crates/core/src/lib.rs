//! Extended-object Poisson multi-Bernoulli mixture (PMBM) filtering.
//!
//! The update step is approximated by blocked Gibbs sampling over the
//! previous global hypothesis, the measurement association vector and the
//! set of detected objects, either with explicit existence indicators
//! ([`gibbs::Variant::Full`]) or with existence marginalised out
//! ([`gibbs::Variant::Collapsed`]). Single objects follow the
//! gamma Gaussian inverse-Wishart (GGIW) random-matrix model.
//!
//! Module map:
//! - [`ggiw`]: single-object prediction, update, likelihoods, sampling, merging
//! - [`pmbm`]: track-oriented density, prediction, local-hypothesis updates,
//!   posterior assembly and estimate extraction
//! - [`gibbs`]: the samplers and the sampling-based update
//! - [`reduction`]: hypothesis pruning
//! - [`oracle`]: brute-force exact update for small instances
//! - [`simulator`]: ground truth and measurement generation
//! - [`metrics`]: GOSPA with the Gaussian-Wasserstein base distance
//! - [`filter`]: the predict / update / reduce / extract loop

pub mod assignment;
pub mod dbscan;
pub mod error;
pub mod filter;
pub mod ggiw;
pub mod gibbs;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod pmbm;
pub mod reduction;
pub mod simulator;

pub use error::{Error, Result};
pub use ggiw::{GgiwParams, MotionModel, ObjectState};
pub use linalg::{Extent, MeasMatrix, Point, StateCov, StateVec, EXTENT_DIM};
