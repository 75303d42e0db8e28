//! The HL(0) aggregation model.
//!
//! Clusters are grown by composing randomly rotated copies of a basic
//! particle map. Around that sit the boundary circle maps and the
//! harmonic-measure flows they generate, a reference sampler for coalescing
//! Brownian motions, finger and gap extraction, and experiment drivers that
//! check how clusters and flows behave as the particle size shrinks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cbf;
pub mod cluster;
pub mod error;
pub mod experiments;
pub mod export;
pub mod fingers;
pub mod flow;
pub mod geometry;
pub mod monotone;
pub mod particle;
pub mod quadrature;
pub mod render;
pub mod rng;

pub use error::{Hl0Error, Result};
pub use monotone::{metric_dbar, metric_dd, MonotonePair};
pub use particle::{lambda_of, rho_of, Family, MapDirection, ParticleSpec, Version};
pub use cluster::{ClusterState, ParticleRecord, Pullback};
pub use flow::{FlowDirection, FlowQuery, FlowTrajectory, Scaling};
pub use geometry::{hausdorff, PlanarSet};
