//! Limited-access transformations for linear index codes over GF(2).

pub mod access;
pub mod error;
pub mod gf2;
pub mod graph;
pub mod instance;
pub mod privacy;
pub mod protocol;
pub mod sweep;
pub mod universal;

pub use access::AccessAssignment;
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use instance::IndexCodingInstance;
