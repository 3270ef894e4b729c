//! Periodic grid, Fourier transforms, spectral differential operators,
//! zero-mean Poisson inversion and Sobolev norms on the torus `[0, 2π)^d`.

mod field;
mod grid;
mod ops;

pub use field::{Field, ScalarField, VectorField};
pub use grid::{make_grid, TorusGrid, AXIS_LENGTH};
pub(crate) use ops::inverse_laplacian_spectrum;
pub use ops::{
    apply_diff, check_zero_mean, curl_norm, dealias, divergence, divergence_dealiased,
    grad_inv_laplacian, gradient, gradient_dealiased, laplacian, multi_indices, partial,
    scalar_norm, seminorm_squared, sobolev_norm, sobolev_norm_squared, solve_poisson_zero_mean,
    vector_norm, DiffOp, Spectrum, TOL_MEAN,
};
