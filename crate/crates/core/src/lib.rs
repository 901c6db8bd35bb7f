//! Clustering of functional time series with wavelets.
//!
//! Two pipelines share the building blocks in this crate:
//!
//! * **features**: slice a long signal into curves ([`data`]), take the
//!   periodized DWT of each curve ([`dwt`]), describe it by the energy carried
//!   by each detail scale, screen and select informative scales
//!   ([`select`]), pick the number of clusters with the jump method and run
//!   k-means ([`cluster`]);
//! * **spectrum**: compute a Morlet CWT per curve ([`cwt`]), compare curves by
//!   wavelet coherence (WER) or by maximum covariance analysis of their
//!   cross-spectrum (MCA) ([`dissimilarity`]), and run PAM on the resulting
//!   matrix.
//!
//! [`eval`] holds external validation (misclassification, Rand indices) and
//! the shadow / neighborhood-graph diagnostics, and [`sim`] generates the
//! sinus + functional autoregressive benchmark.

pub mod bench;
pub mod cli;
pub mod cluster;
pub mod cwt;
pub mod data;
pub mod dissimilarity;
pub mod dwt;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod rng;
pub mod select;
pub mod sim;

mod csvio;

pub use error::{Error, Result};
pub use matrix::Matrix;
