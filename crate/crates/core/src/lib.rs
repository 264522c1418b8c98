//! Distortion-controlled dithered quantization.
//!
//! Two parametric dither families trade quantization MSE against a bound on
//! the error autocorrelation. The crate provides the quantizers, the dither
//! families with their closed-form objectives, exact entropy analysis of
//! dithered outputs for uniform sources, Monte-Carlo error statistics, and a
//! grayscale image compression/recompression experiment.

pub mod analytic;
pub mod dither;
mod error;
pub mod imagepipe;
pub mod metrics;
pub mod quantizer;
pub mod rng;

pub use analytic::{CellPmf, MixtureDensity};
pub use dither::{DitherSpec, Family, Formulation, TradeoffPoint};
pub use error::{Error, Result};
pub use metrics::ErrorStats;
pub use quantizer::{Levels, QuantizedSample, QuantizerSpec, Style};
