use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{BepState, UepState};
use crate::spectral::{
    curl_norm, divergence, grad_inv_laplacian, gradient, ScalarField, VectorField,
};

use super::errors::{error_vars_with_fields, ErrorVars};
use super::ProfileState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamSpecies {
    Ion,
    Electron,
}

/// A stream function with its constraint defects.
#[derive(Clone, Debug)]
pub struct StreamDiag {
    pub psi: VectorField,
    /// ‖div ψ + z‖₀
    pub residual_div_norm: f64,
    /// ‖curl ψ‖₀
    pub curl_norm: f64,
}

/// Curl-free, zero-mean ψ with div ψ = −z.
pub fn stream_function(z: &ScalarField) -> Result<VectorField> {
    grad_inv_laplacian(&(-z))
}

pub fn stream_diag(z: &ScalarField) -> Result<StreamDiag> {
    let psi = stream_function(z)?;
    let residual_div_norm = (&divergence(&psi) + z).l2_norm();
    let curl_norm = curl_norm(&psi);
    Ok(StreamDiag {
        psi,
        residual_div_norm,
        curl_norm,
    })
}

/// The conserved density error a species' stream function is built from:
/// 𝓝_i − ε²ρ̄¹_i for ions, 𝓝_e for electrons. Roundoff-level means are removed.
pub fn stream_source(
    species: StreamSpecies,
    err: &ErrorVars,
    prof: &ProfileState,
    epsilon: f64,
) -> ScalarField {
    match species {
        StreamSpecies::Ion => {
            let mut z = err.n_i.clone();
            z.axpy(-epsilon * epsilon, &prof.rho_bar_i1);
            z.subtract_mean()
        }
        StreamSpecies::Electron => err.n_e.subtract_mean(),
    }
}

/// Flux whose divergence drives the stream source:
/// ε²(ρ_i w_i + 𝓝_i ū_i + ∇ρ̄¹_i) for ions, ρ_e u_e − ρ̄_e ū_e for electrons.
pub fn stream_flux(
    species: StreamSpecies,
    bep: &BepState,
    uep: &UepState,
    err: &ErrorVars,
    prof: &ProfileState,
    epsilon: f64,
) -> VectorField {
    match species {
        StreamSpecies::Ion => {
            let mut flux = err.w_i.times(&bep.rho_i);
            flux.axpy(1.0, &prof.u_bar_i.times(&err.n_i));
            flux.axpy(1.0, &gradient(&prof.rho_bar_i1));
            flux.scale(epsilon * epsilon)
        }
        StreamSpecies::Electron => &bep.u_e.times(&bep.rho_e) - &uep.u_e.times(&uep.rho_e),
    }
}

/// Everything needed at one sample time to evaluate error and stream diagnostics.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    pub t: f64,
    pub bep: BepState,
    pub grad_phi: VectorField,
    pub uep: UepState,
    pub grad_phi_bar: VectorField,
    pub profile: ProfileState,
}

impl CoupledSample {
    pub fn error_vars(&self, epsilon: f64) -> Result<ErrorVars> {
        error_vars_with_fields(
            &self.bep,
            &self.grad_phi,
            &self.uep,
            &self.grad_phi_bar,
            &self.profile,
            epsilon,
        )
    }
}

/// Stream function and flux of one species at one sample.
fn stream_state(
    species: StreamSpecies,
    smp: &CoupledSample,
    err: &ErrorVars,
    epsilon: f64,
) -> Result<(VectorField, VectorField)> {
    let z = stream_source(species, err, &smp.profile, epsilon);
    let psi = stream_function(&z)?;
    let flux = stream_flux(species, &smp.bep, &smp.uep, err, &smp.profile, epsilon);
    Ok((psi, flux))
}

/// ‖div R‖₀ for R = [ψ(t₁) − ψ(t₀)]/Δt − ½(flux(t₀) + flux(t₁)).
pub fn stream_residual_from_parts(
    dt: f64,
    psi0: &VectorField,
    flux0: &VectorField,
    psi1: &VectorField,
    flux1: &VectorField,
) -> f64 {
    let mut r = (psi1 - psi0).scale(1.0 / dt);
    r.axpy(-0.5, flux0);
    r.axpy(-0.5, flux1);
    divergence(&r).l2_norm()
}

pub fn stream_residual(
    a: &CoupledSample,
    b: &CoupledSample,
    epsilon: f64,
    species: StreamSpecies,
) -> Result<f64> {
    let dt = b.t - a.t;
    if !(dt > 0.0) {
        return Err(Error::InsufficientData(
            "stream residual needs two samples at increasing times".into(),
        ));
    }
    let (psi0, flux0) = stream_state(species, a, &a.error_vars(epsilon)?, epsilon)?;
    let (psi1, flux1) = stream_state(species, b, &b.error_vars(epsilon)?, epsilon)?;
    Ok(stream_residual_from_parts(dt, &psi0, &flux0, &psi1, &flux1))
}

/// Residual for each consecutive pair of samples.
pub fn stream_residual_series(
    samples: &[CoupledSample],
    epsilon: f64,
    species: StreamSpecies,
) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(
            "stream residual needs at least two samples".into(),
        ));
    }
    let parts = samples
        .iter()
        .map(|s| stream_state(species, s, &s.error_vars(epsilon)?, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(samples
        .windows(2)
        .zip(parts.windows(2))
        .map(|(s, p)| {
            stream_residual_from_parts(s[1].t - s[0].t, &p[0].0, &p[0].1, &p[1].0, &p[1].1)
        })
        .collect())
}
