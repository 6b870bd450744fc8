//! Coherent-error cancellation with hidden inverses: gate decompositions,
//! peephole orientation, noisy simulation and fidelity analysis.

pub mod analytics;
pub mod channels;
pub mod circuit;
pub mod compiler;
pub mod error;
pub mod gates;
pub mod lindblad;
pub mod qmat;

pub use error::{Error, Result};
