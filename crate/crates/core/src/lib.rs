//! Pseudospectral solver for the scaled bipolar Euler–Poisson system on the
//! torus, its infinity-ion-mass (unipolar) limit, and the diagnostics used to
//! measure how fast the former converges to the latter.

pub mod checks;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod limits;
pub mod models;
pub mod spectral;
pub mod timestep;

pub use error::{Error, Result};
