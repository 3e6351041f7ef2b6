//! Relaxed locally decodable codes for resource-bounded channels, with the
//! random-oracle, pebbling and coding machinery they are built from.

pub mod bits;
pub mod ecc;
pub mod experiment;
pub mod framework;
pub mod games;
pub mod rom;
pub mod safefn;
pub mod ldcstar;
pub mod pebbling;
pub mod privldc;
pub mod seeds;
pub mod stats;
