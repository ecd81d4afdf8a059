//! Six-dimensional movable antenna (6DMA) toolkit: channel models over
//! surface position and rotation, pose optimization, directional-sparsity
//! channel estimation and DOA sensing bounds.
//!
//! The geometry, channel and capacity kernels are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix them to `f64`, which is what the
//! optimizers, estimators and experiments use.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod pathplan;
pub mod scalar;
pub mod scenario;
pub mod sensing;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Scalar;

pub type C64 = Complex<f64>;
pub type Vec3 = geometry::Vec3<f64>;
pub type Position3 = geometry::Position3<f64>;
pub type RotationAngles = geometry::RotationAngles<f64>;
pub type SurfacePose = geometry::SurfacePose<f64>;
pub type LocalArray = geometry::LocalArray<f64>;
pub type SiteRegion = geometry::SiteRegion<f64>;
pub type ConstraintConfig = geometry::ConstraintConfig<f64>;
pub type DiscreteGrid = geometry::DiscreteGrid<f64>;
pub type PathComponent = channel::PathComponent<f64>;
pub type UserChannelSpec = channel::UserChannelSpec<f64>;
pub type AntennaPattern = channel::AntennaPattern<f64>;
pub type LinkBudget = channel::LinkBudget<f64>;
pub type ChannelMatrix = channel::ChannelMatrix<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
