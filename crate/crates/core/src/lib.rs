//! Capacity bounds for the discrete-time AWGN channel with Wiener phase
//! noise.
//!
//! The crate simulates the channel, solves the auxiliary output density and
//! the block input densities behind the bounds, and evaluates:
//!
//! - a Monte-Carlo duality upper bound `C_U` and its closed-form high-SNR
//!   companion `C_U~` ([`bounds_upper`]),
//! - achievable-rate lower bounds from sampled block inputs via a particle
//!   forward pass ([`rate`]),
//! - the AWGN and high-SNR phase-noise reference capacities plus SNR sweeps
//!   that serialize everything to CSV/JSON ([`refs`], [`sweep`]).
//!
//! All core math is generic over the scalar type through [`Real`]; the
//! `*64`/`*32` aliases below pin the concrete precisions.
//!
//! ```
//! use phasecap::{ChannelParams64, refs};
//!
//! let p = ChannelParams64::from_snr_db(20.0, 1e-3, 1.0).unwrap();
//! // below the crossover the AWGN capacity is the binding reference
//! assert!(refs::c_awgn(&p) < refs::c_lapidoth(&p).unwrap());
//! assert!(refs::crossover_snr_db(&p).unwrap() > 20.0);
//! ```

pub mod bounds_upper;
pub mod entropy;
pub mod error;
pub mod model;
pub mod quad;
pub mod rate;
pub mod real;
pub mod refs;
pub mod sampler;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use real::{real, Real};

pub type ChannelParams64 = model::ChannelParams<f64>;
pub type SymbolBlock64 = model::SymbolBlock<f64>;
pub type ReceivedBlock64 = model::ReceivedBlock<f64>;
pub type AuxOutputParams64 = quad::AuxOutputParams<f64>;
pub type InputDistParams64 = quad::InputDistParams<f64>;
pub type EntropySample64 = entropy::EntropySample<f64>;
pub type GofR64 = bounds_upper::GofR<f64>;
pub type UpperBoundResult64 = bounds_upper::UpperBoundResult<f64>;
pub type RateEstimate64 = rate::RateEstimate<f64>;
pub type ParticleCloud64 = rate::ParticleCloud<f64>;

pub type ChannelParams32 = model::ChannelParams<f32>;
pub type SymbolBlock32 = model::SymbolBlock<f32>;
pub type AuxOutputParams32 = quad::AuxOutputParams<f32>;
pub type InputDistParams32 = quad::InputDistParams<f32>;
