//! Event-based visual odometry with a hierarchical resonator network.
//!
//! Frames of event-camera data are encoded as complex phasor hypervectors
//! with fractional power encoding. A resonator with a Cartesian partition
//! (horizontal and vertical shift) and a polar partition (roll) infers the
//! transform between each frame and a dynamically updated, anchored map.

pub mod codebook;
pub mod error;
pub mod eval;
pub mod events;
mod fft;
pub mod frame;
pub mod hd;
pub mod image;
pub mod pipeline;
pub mod resonator;
pub mod synth;

pub use error::{Error, Result};
