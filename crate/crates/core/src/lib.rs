pub mod ae;
pub mod bell;
pub mod checks;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lower_bound;
pub mod oracle;
pub mod pauli;
pub mod trials;
pub mod trotter;

pub use error::{Error, Result};
