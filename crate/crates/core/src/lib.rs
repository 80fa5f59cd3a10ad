pub mod bench;
pub mod bounds;
pub mod det;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod prox;
pub mod rng;
pub mod stoch;
pub mod verify;

pub use error::{Error, Result};
