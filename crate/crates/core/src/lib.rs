//! Theta characteristics, Göpel systems and the extended ρ-map for
//! hyperelliptic curves, with exact and numeric verification.

pub mod charkit;
pub mod error;
pub mod goepel;
pub mod poly;
pub mod rho;
pub mod riemann;
pub mod theta;

pub use error::{Error, Result};
