use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// γ-law pressure `p(ρ) = K ρ^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub k: f64,
    pub gamma: f64,
}

impl Default for PressureLaw {
    fn default() -> Self {
        Self { k: 1.0, gamma: 2.0 }
    }
}

impl PressureLaw {
    pub fn new(k: f64, gamma: f64) -> Result<Self> {
        let law = Self { k, gamma };
        law.validate()?;
        Ok(law)
    }

    pub fn isothermal(k: f64) -> Self {
        Self { k, gamma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pressure coefficient must be positive, got {}",
                self.k
            )));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "adiabatic exponent must be >= 1, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.k * rho.powf(self.gamma)
    }

    /// p′(ρ) = Kγρ^{γ-1}
    pub fn pressure_prime(&self, rho: f64) -> f64 {
        self.k * self.gamma * rho.powf(self.gamma - 1.0)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        self.pressure_prime(rho).sqrt()
    }

    /// Enthalpy with h′ = p′/ρ and h(1) = 0.
    pub fn h(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            self.k * rho.ln()
        } else {
            let g = self.gamma;
            self.k * g * (rho.powf(g - 1.0) - 1.0) / (g - 1.0)
        }
    }

    /// h′(ρ) = Kγρ^{γ-2}
    pub fn h_prime(&self, rho: f64) -> f64 {
        self.k * self.gamma * rho.powf(self.gamma - 2.0)
    }

    /// Primitive of h with H(1) = 0; the relative entropy density.
    pub fn big_h(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            self.k * (rho * rho.ln() - rho + 1.0)
        } else {
            let g = self.gamma;
            self.k / (g - 1.0) * (rho.powf(g) - 1.0) - self.k * g / (g - 1.0) * (rho - 1.0)
        }
    }
}

fn check_positive(rho: &ScalarField) -> Result<()> {
    let min = rho.min();
    if !(min > 0.0) {
        return Err(Error::DensityFloor { min, floor: 0.0 });
    }
    Ok(())
}

/// Pointwise h(ρ).
pub fn enthalpy(law: &PressureLaw, rho: &ScalarField) -> Result<ScalarField> {
    check_positive(rho)?;
    Ok(rho.map(|r| law.h(r)))
}

/// Pointwise h′(ρ).
pub fn enthalpy_prime(law: &PressureLaw, rho: &ScalarField) -> Result<ScalarField> {
    check_positive(rho)?;
    Ok(rho.map(|r| law.h_prime(r)))
}
