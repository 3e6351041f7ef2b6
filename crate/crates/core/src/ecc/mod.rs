//! Error-correcting codes: finite fields, Reed-Solomon, and the concatenated
//! binary code used for blocks and seeds.

pub mod calibrate;
pub mod gf;
pub mod justesen;
pub mod rs;

pub use justesen::{Justesen, JustesenParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EccError {
    #[error("bad code parameters: {0}")]
    BadParams(String),
    #[error("expected length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("decoding failed")]
    DecodeFailure,
}
