pub mod error;
pub mod grid;
pub mod par;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub mod onebody;
pub mod states;
pub mod fock;
pub mod symmetry;
pub mod amplitudes;
pub mod checks;
pub mod calibration;
