//! Face presentation-attack detection from color texture.
//!
//! The pipeline: normalize face crops to 64x64, extract uniform LBP
//! histograms per channel in one or more color spaces, average descriptors
//! over temporal windows, train a soft-margin SVM on genuine vs attack
//! videos, and report biometric error rates (EER, HTER) under intra- and
//! cross-corpus protocols. A synthetic corpus generator provides
//! reproducible genuine/recaptured face videos for end-to-end runs.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN fails the check instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod extract;
pub mod imaging;
pub mod temporal;
pub mod texture;

pub use error::{Error, Result};
