//! Scalar diagnostics of a bipolar state: total and dissipative energies,
//! the entropy pair and its balance along a trajectory, and the
//! symmetrizer-weighted energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{electric_field, BepState, PlasmaParams};
use crate::spectral::{
    gradient, multi_indices, partial, scalar_norm, vector_norm, ScalarField, VectorField,
};
use crate::timestep::Trajectory;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub e_total: f64,
    pub d_dissip: f64,
    /// ∫ η₀ + ½|∇φ|²
    pub entropy_e: f64,
    /// ∫ ρ_e|u_e|² + ε⁻² ρ_i|u_i|²
    pub entropy_d: f64,
    pub mass_i: f64,
    pub mass_e: f64,
    pub charge: f64,
}

fn sq(x: f64) -> f64 {
    x * x
}

fn deviation(rho: &ScalarField) -> ScalarField {
    rho.map(|r| r - 1.0)
}

/// Total energy 𝓔 and dissipative energy 𝓓 at Sobolev order s, using a
/// precomputed field ∇φ.
pub fn energy_functionals_with_field(
    state: &BepState,
    grad_phi: &VectorField,
    params: &PlasmaParams,
) -> (f64, f64) {
    let s = params.sobolev_order;
    let inv_eps2 = 1.0 / sq(params.epsilon);
    let n_i = deviation(&state.rho_i);
    let n_e = deviation(&state.rho_e);
    let n_i_s = sq(scalar_norm(&n_i, s));
    let n_e_s = sq(scalar_norm(&n_e, s));
    let n_i_s1 = sq(scalar_norm(&n_i, s - 1));
    let u_i_s = sq(vector_norm(&state.u_i, s));
    let u_e_s = sq(vector_norm(&state.u_e, s));
    let phi_s = sq(vector_norm(grad_phi, s));
    let e_total = n_i_s + n_e_s + inv_eps2 * n_i_s1 + inv_eps2 * u_i_s + u_e_s + phi_s;

    let grad_n = |n: &ScalarField| sq(vector_norm(&gradient(n), s - 1));
    let d_dissip = grad_n(&n_i) + grad_n(&n_e) + inv_eps2 * u_i_s + u_e_s;
    (e_total, d_dissip)
}

/// (𝓔, 𝓓) of a bipolar state.
pub fn energy_functionals(state: &BepState, params: &PlasmaParams) -> Result<(f64, f64)> {
    let (_, e) = electric_field(&state.rho_i, &state.rho_e)?;
    Ok(energy_functionals_with_field(state, &e, params))
}

/// Entropy ∫η₀ + ½|∇φ|² and its dissipation ∫ρ_e|u_e|² + ε⁻²ρ_i|u_i|².
pub fn entropy_pair(state: &BepState, grad_phi: &VectorField, params: &PlasmaParams) -> (f64, f64) {
    let inv_eps2 = 1.0 / sq(params.epsilon);
    let ui2 = state.u_i.norm_squared();
    let ue2 = state.u_e.norm_squared();
    let phi2 = grad_phi.norm_squared();
    let dv = state.rho_i.grid().cell_volume();
    let mut eta = 0.0;
    let mut diss = 0.0;
    for j in 0..state.rho_i.values().len() {
        let ri = state.rho_i.values()[j];
        let re = state.rho_e.values()[j];
        eta += 0.5 * re * ue2.values()[j]
            + params.electron_law.big_h(re)
            + 0.5 * inv_eps2 * ri * ui2.values()[j]
            + params.ion_law.big_h(ri)
            + 0.5 * phi2.values()[j];
        diss += re * ue2.values()[j] + inv_eps2 * ri * ui2.values()[j];
    }
    (eta * dv, diss * dv)
}

pub fn energy_report_with_field(
    state: &BepState,
    grad_phi: &VectorField,
    params: &PlasmaParams,
) -> EnergyReport {
    let (e_total, d_dissip) = energy_functionals_with_field(state, grad_phi, params);
    let (entropy_e, entropy_d) = entropy_pair(state, grad_phi, params);
    let mass_i = state.rho_i.integral();
    let mass_e = state.rho_e.integral();
    EnergyReport {
        e_total,
        d_dissip,
        entropy_e,
        entropy_d,
        mass_i,
        mass_e,
        charge: (&state.rho_i - &state.rho_e).integral(),
    }
}

pub fn energy_report(state: &BepState, params: &PlasmaParams) -> Result<EnergyReport> {
    let (_, e) = electric_field(&state.rho_i, &state.rho_e)?;
    Ok(energy_report_with_field(state, &e, params))
}

/// Trapezoidal residual of the entropy balance between consecutive samples:
/// `r = [S(t+Δt) − S(t)]/Δt + ½(D(t) + D(t+Δt))`.
pub fn entropy_balance_residual(traj: &Trajectory, params: &PlasmaParams) -> Result<Vec<f64>> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(
            "entropy balance needs at least two samples".into(),
        ));
    }
    let pairs: Vec<(f64, f64, f64)> = traj
        .samples
        .iter()
        .map(|smp| {
            let s = BepState::try_from(smp.state.clone())?;
            let (se, sd) = entropy_pair(&s, &smp.e, params);
            Ok((smp.t, se, sd))
        })
        .collect::<Result<_>>()?;
    Ok(balance_residual(&pairs))
}

/// Residuals from a `(t, S, D)` series.
pub fn balance_residual(series: &[(f64, f64, f64)]) -> Vec<f64> {
    series
        .windows(2)
        .map(|w| {
            let (t0, s0, d0) = w[0];
            let (t1, s1, d1) = w[1];
            (s1 - s0) / (t1 - t0) + 0.5 * (d0 + d1)
        })
        .collect()
}

/// Σ_ν Σ_{|α|=order} ⟨∂^α U_ν, A⁰_ν(ρ_ν) ∂^α U_ν⟩ with U_ν = (ρ_ν − 1, u_ν),
/// A⁰_i = diag(h_i′(ρ_i), ε⁻²ρ_i I) and A⁰_e = diag(h_e′(ρ_e), ρ_e I).
pub fn weighted_energy_a0(state: &BepState, params: &PlasmaParams, alpha_order: u32) -> f64 {
    let dim = state.rho_i.grid().dim();
    let alphas = multi_indices(dim, alpha_order);
    let inv_eps2 = 1.0 / sq(params.epsilon);
    let species = [
        (&state.rho_i, &state.u_i, &params.ion_law, inv_eps2),
        (&state.rho_e, &state.u_e, &params.electron_law, 1.0),
    ];
    let mut total = 0.0;
    for (rho, u, law, weight) in species {
        let hp = rho.map(|r| law.h_prime(r));
        let n = deviation(rho);
        for alpha in &alphas {
            let dn = partial(&n, alpha);
            total += (&(&dn * &dn) * &hp).integral();
            for comp in u.components() {
                let du = partial(comp, alpha);
                total += weight * (&(&du * &du) * rho).integral();
            }
        }
    }
    total
}
