//! Lattice-based forward-secure blind signatures.
//!
//! The building blocks live in [`zq`], [`gaussian`] and [`trapdoor`]; the
//! time tree in [`timetree`]; the scheme in [`scheme`]; the two-party wire
//! protocol in [`protocol`].

pub mod cli;
pub mod codec;
pub mod error;
pub mod gaussian;
pub mod hash;
pub mod params;
pub mod protocol;
pub mod rng;
pub mod scheme;
pub mod timetree;
pub mod trapdoor;
pub mod zq;

pub use error::{Error, Result};
