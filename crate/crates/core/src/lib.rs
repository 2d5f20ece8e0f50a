//! Constructive synthesis of height-augmented ReLU networks with
//! numerical verification of their approximation bounds.

pub mod blocks;
pub mod builders;
pub mod error;
pub mod expansions;
pub mod fit;
pub mod net3d;
pub mod verify;

pub use error::{Error, Result};
pub use net3d::{Net3D, SizeMetrics};
