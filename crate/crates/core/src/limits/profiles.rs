use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{check_zero_mean, divergence, ScalarField, Spectrum, VectorField};

/// Limiting ion velocity ū_i and first-order ion density profile ρ̄¹_i.
#[derive(Clone, Debug)]
pub struct ProfileState {
    pub u_bar_i: VectorField,
    pub rho_bar_i1: ScalarField,
}

/// Weights of the exponential-trapezoidal rule for y′ = −λy + f over one
/// step h, with f linear between the endpoints:
/// `y₁ = decay·y₀ + h(w₀ f₀ + w₁ f₁)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ExpTrapezoid {
    pub decay: f64,
    pub w0: f64,
    pub w1: f64,
}

impl ExpTrapezoid {
    pub fn new(lambda: f64, h: f64) -> Self {
        let z = lambda * h;
        // a = (1 − e^{−z})/z, b = (z − 1 + e^{−z})/z²
        let (a, b) = if z.abs() < 1e-4 {
            (
                1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0,
                0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0,
            )
        } else {
            let em1 = (-z).exp_m1();
            (-em1 / z, (z + em1) / (z * z))
        };
        Self {
            decay: (-z).exp(),
            w0: a - b,
            w1: b,
        }
    }
}

fn check_series(times: &[f64], len: usize, what: &str) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InsufficientData(format!("empty {what} series")));
    }
    if times.len() != len {
        return Err(Error::Shape(format!(
            "{} sample times but {len} {what} samples",
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "sample times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// ∂ₜū_i + ū_i = ∇φ̄ with exact integrating factor and the forcing taken
/// piecewise linear between samples.
pub fn solve_ubar_i(
    times: &[f64],
    grad_phi_bar: &[VectorField],
    u_bar_i0: &VectorField,
) -> Result<Vec<VectorField>> {
    check_series(times, grad_phi_bar.len(), "field")?;
    u_bar_i0.check_grid(&grad_phi_bar[0])?;
    let mut out = Vec::with_capacity(times.len());
    out.push(u_bar_i0.clone());
    for (n, w) in times.windows(2).enumerate() {
        let h = w[1] - w[0];
        let rule = ExpTrapezoid::new(1.0, h);
        let mut next = out[n].scale(rule.decay);
        next.axpy(h * rule.w0, &grad_phi_bar[n]);
        next.axpy(h * rule.w1, &grad_phi_bar[n + 1]);
        out.push(next);
    }
    Ok(out)
}

/// ∂ₜρ̄¹ + div ū_i = Δρ̄¹, mode by mode with factor e^{−|k|²h}; the mean
/// mode stays zero.
pub fn solve_rho_i1(
    times: &[f64],
    u_bar_i: &[VectorField],
    rho_i1_0: &ScalarField,
) -> Result<Vec<ScalarField>> {
    check_series(times, u_bar_i.len(), "velocity")?;
    check_zero_mean(rho_i1_0, "first-order ion profile")?;
    let grid = rho_i1_0.grid().clone();
    let forcing: Vec<Spectrum> = u_bar_i
        .iter()
        .map(|u| Spectrum::of(&(-&divergence(u))))
        .collect();
    let k2: Vec<f64> = (0..grid.len()).map(|i| grid.k_squared(i)).collect();

    let mut coeffs: Vec<Complex64> = Spectrum::of(rho_i1_0).coeffs().to_vec();
    coeffs[0] = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(times.len());
    out.push(rho_i1_0.clone());
    for (n, w) in times.windows(2).enumerate() {
        let h = w[1] - w[0];
        let f0 = forcing[n].coeffs();
        let f1 = forcing[n + 1].coeffs();
        for (i, c) in coeffs.iter_mut().enumerate().skip(1) {
            let rule = ExpTrapezoid::new(k2[i], h);
            *c = *c * rule.decay + (f0[i] * rule.w0 + f1[i] * rule.w1) * h;
        }
        out.push(Spectrum::from_coeffs(&grid, coeffs.clone())?.to_field());
    }
    Ok(out)
}
