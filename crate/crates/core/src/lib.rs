pub mod cli;
pub mod decay;
pub mod error;
pub mod mlf;
pub mod phase;
pub mod quad;
pub mod special;

pub use error::{Error, Result};

/// `x` with 17 significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
