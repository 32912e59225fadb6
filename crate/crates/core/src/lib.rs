//! Packet-level analog network coding relay for the two-way relay channel.
//!
//! Two end nodes send LDPC-coded BPSK packets to a relay at the same time.
//! The relay runs belief propagation over the pair of codewords jointly and
//! forwards the per-symbol posterior mean of the superimposed signal
//! `h13 u1 + h23 u2`. The crate also provides the memoryless baselines, the
//! memoryless MSE reference curve used to express gains as SNR, and a seeded
//! Monte Carlo harness.
//!
//! The numeric modules are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the harness uses.

pub mod baselines;
pub mod channel;
pub mod curve;
pub mod decoder;
pub mod error;
pub mod ldpc;
pub mod message;
pub mod metrics;
pub mod scalar;
pub mod sim;

pub use baselines::Scheme;
pub use error::{Error, Result};
pub use ldpc::{GeneratorMatrix, ParityCheckMatrix};
pub use message::User;
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type JointMessage64 = message::JointMessage<f64>;
pub type JointMessage32 = message::JointMessage<f32>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ChannelRealization32 = channel::ChannelRealization<f32>;
pub type DecodeResult64 = decoder::DecodeResult<f64>;
pub type DecodeResult32 = decoder::DecodeResult<f32>;
pub type MseCurve64 = curve::MseCurve<f64>;
pub type MseCurve32 = curve::MseCurve<f32>;
