use crate::error::{Error, Result};
use crate::models::{electric_field, BepState, UepState};
use crate::spectral::{scalar_norm, vector_norm, ScalarField, VectorField, TOL_MEAN};

use super::ProfileState;

/// Differences between the bipolar solution and its limit.
#[derive(Clone, Debug)]
pub struct ErrorVars {
    /// 𝓝_i = ρ_i − 1
    pub n_i: ScalarField,
    /// 𝓝_e = ρ_e − ρ̄_e
    pub n_e: ScalarField,
    /// w_i = ε⁻²u_i − ū_i
    pub w_i: VectorField,
    /// w_e = u_e − ū_e
    pub w_e: VectorField,
    /// 𝓕 = ∇φ − ∇φ̄
    pub f: VectorField,
}

/// Squared norms of the error fields at one Sobolev order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub n_i: f64,
    pub n_e: f64,
    pub w_i: f64,
    pub w_e: f64,
    pub f: f64,
}

/// Difference of two densities with equal means; the roundoff-level mean
/// gap is checked against the density scale and removed.
fn density_gap(a: &ScalarField, b: &ScalarField, context: &'static str) -> Result<ScalarField> {
    a.check_grid(b)?;
    let gap = a - b;
    let mean = gap.mean();
    let tol = TOL_MEAN * a.mean().abs().max(b.mean().abs());
    if mean.abs() > tol || !mean.is_finite() {
        return Err(Error::Compatibility { mean, tol, context });
    }
    Ok(gap.subtract_mean())
}

/// Error variables given both electric fields.
pub fn error_vars_with_fields(
    bep: &BepState,
    grad_phi: &VectorField,
    uep: &UepState,
    grad_phi_bar: &VectorField,
    prof: &ProfileState,
    epsilon: f64,
) -> Result<ErrorVars> {
    bep.rho_i.check_grid(&uep.rho_e)?;
    bep.rho_i.check_grid(&prof.rho_bar_i1)?;
    grad_phi.check_grid(grad_phi_bar)?;
    let one = ScalarField::constant(bep.rho_i.grid(), 1.0);
    let n_i = density_gap(&bep.rho_i, &one, "ion density error")?;
    let n_e = density_gap(&bep.rho_e, &uep.rho_e, "electron density error")?;
    let w_i = &bep.u_i.scale(1.0 / (epsilon * epsilon)) - &prof.u_bar_i;
    let w_e = &bep.u_e - &uep.u_e;
    let f = grad_phi - grad_phi_bar;
    Ok(ErrorVars {
        n_i,
        n_e,
        w_i,
        w_e,
        f,
    })
}

/// Error variables, solving both Poisson problems.
pub fn error_vars(
    bep: &BepState,
    uep: &UepState,
    prof: &ProfileState,
    epsilon: f64,
) -> Result<ErrorVars> {
    bep.rho_i.check_grid(&uep.rho_e)?;
    let (_, e) = electric_field(&bep.rho_i, &bep.rho_e)?;
    let (_, e_bar) = electric_field(&ScalarField::constant(uep.grid(), 1.0), &uep.rho_e)?;
    error_vars_with_fields(bep, &e, uep, &e_bar, prof, epsilon)
}

impl ErrorVars {
    pub fn norms_squared(&self, order: u32) -> ErrorNorms {
        let sq = |x: f64| x * x;
        ErrorNorms {
            n_i: sq(scalar_norm(&self.n_i, order)),
            n_e: sq(scalar_norm(&self.n_e, order)),
            w_i: sq(vector_norm(&self.w_i, order)),
            w_e: sq(vector_norm(&self.w_e, order)),
            f: sq(vector_norm(&self.f, order)),
        }
    }
}

impl ErrorNorms {
    /// 𝓝_e, 𝓝_i, w_e and 𝓕 terms; w_i is not part of the dissipation.
    pub fn dissipation(&self) -> f64 {
        self.n_e + self.n_i + self.w_e + self.f
    }
}

/// ‖𝓝_e‖² + ‖𝓝_i‖² + ‖w_e‖² + ‖𝓕‖² at Sobolev order `order` (= s − 1).
pub fn error_dissipation(err: &ErrorVars, order: u32) -> f64 {
    err.norms_squared(order).dissipation()
}
