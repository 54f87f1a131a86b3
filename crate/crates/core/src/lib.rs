//! Globalness analysis of bipartite unitary operations.
//!
//! The crate classifies two-qubit unitaries by their Cartan coefficients,
//! measures the entanglement they generate, and simulates multi-round LOCC
//! protocols (relocalization, relocation, teleportation and
//! entanglement-assisted implementation) through accumulated operators.

pub mod cartan;
pub mod entanglement;
pub mod entangling_power;
pub mod error;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod locc;

pub use error::{Error, Result};
pub use linalg::{DensityOperator, PureState, Tensor, UnitaryOperator};
