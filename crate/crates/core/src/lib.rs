//! Short binary block codes and a Monte Carlo benchmark for comparing them.
//!
//! The crate builds extended BCH, Reed-Muller and AWGN-designed polar codes,
//! decodes them with ordered-statistics decoding (eBCH/RM) or successive
//! cancellation and its list/CRC-aided variants (polar), and measures bit and
//! frame error rates over a BPSK/AWGN channel.
//!
//! Soft-decision code (channel, decoders, campaign engine) is generic over a
//! floating-point [`Scalar`]; the `f64` aliases below are what the CLI uses.

pub mod bch;
pub mod bitmat;
pub mod channel;
pub mod code;
pub mod crc;
pub mod error;
pub mod gf2m;
pub mod osd;
pub mod polar;
pub mod polar_decoder;
pub mod poly;
pub mod scalar;
pub mod sim;

pub use bitmat::BitMatrix;
pub use channel::{ChannelParams, LlrVector};
pub use code::{CodeFamily, CodeInstance, ConstructionMeta};
pub use crc::CrcSpec;
pub use error::{Error, Result};
pub use gf2m::{FieldElement, FieldParams};
pub use polar::{DesignSnr, PolarSpec, SnrKind};
pub use poly::BinaryPolynomial;
pub use polar_decoder::{CheckRule, MetricRule};
pub use scalar::Scalar;
pub use sim::{DecoderSpec, PointResult, RateMode, Record, Scheme, StoppingRule, SweepConfig};

pub type Llr64 = LlrVector<f64>;
pub type Llr32 = LlrVector<f32>;
pub type OsdDecoder64 = osd::OsdDecoder<f64>;
pub type OsdDecoder32 = osd::OsdDecoder<f32>;
pub type ScDecoder64 = polar_decoder::ScDecoder<f64>;
pub type ScDecoder32 = polar_decoder::ScDecoder<f32>;
pub type SclDecoder64 = polar_decoder::SclDecoder<f64>;
pub type SclDecoder32 = polar_decoder::SclDecoder<f32>;

