//! Exponential tilting, Edgeworth expansions and approximations of the
//! conditional law of the first coordinates of a random walk given its
//! endpoint, with exact oracles and an importance-sampling estimator built on
//! them.
//!
//! All numerics are generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod conditional_law;
pub mod config;
pub mod distributions;
pub mod edgeworth;
pub mod error;
pub mod importance_sampling;
pub mod io;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod root;
pub mod scalar;
pub mod tilting;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Component = distributions::Component<f64>;
pub type DistributionFamily = distributions::DistributionFamily<f64>;
pub type Interval = distributions::Interval<f64>;
pub type TiltSolution = tilting::TiltSolution<f64>;
pub type AggregateMoments = tilting::AggregateMoments<f64>;
pub type EdgeworthCoefficients = edgeworth::EdgeworthCoefficients<f64>;
pub type ConditionalState = conditional_law::ConditionalState<f64>;
pub type Kernel = conditional_law::Kernel<f64>;
pub type GkPath = conditional_law::GkPath<f64>;
pub type GkSampler<'a> = conditional_law::GkSampler<'a, f64>;
pub type RegimeConfig = conditional_law::RegimeConfig<f64>;
pub type GridDensity = oracle::GridDensity<f64>;
pub type ExactConditional = oracle::ExactConditional<f64>;
pub type GaussianConditional = oracle::GaussianConditional<f64>;
pub type TvEstimate = oracle::TvEstimate<f64>;
pub type ISReport = importance_sampling::ISReport<f64>;
pub type GBar<'a> = importance_sampling::GBar<'a, f64>;
