pub mod ensembles;
pub mod experiments;
pub mod laws;
pub mod linalg;
pub mod pfaffian;
pub mod quat;
pub mod rng;
pub mod spectra;

pub use num_complex::Complex64;
