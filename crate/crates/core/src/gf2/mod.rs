//! Packed linear algebra over GF(2).

mod bitvec;
mod echelon;
mod matrix;

pub use bitvec::BitVector;
pub use echelon::{Insertion, RowReducer};
pub use matrix::BitMatrix;
