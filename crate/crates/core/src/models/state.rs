use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::pressure::PressureLaw;
use crate::error::{Error, Result};
use crate::spectral::{ScalarField, TorusGrid, VectorField};

/// Hard lower bound on every density; crossing it aborts the run.
pub const RHO_FLOOR: f64 = 0.25;

/// Scalars entering the scaled equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlasmaParams {
    /// ε = m_i^{-1/2}
    pub epsilon: f64,
    pub ion_law: PressureLaw,
    pub electron_law: PressureLaw,
    pub sobolev_order: u32,
}

impl Default for PlasmaParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            ion_law: PressureLaw::default(),
            electron_law: PressureLaw::default(),
            sobolev_order: 2,
        }
    }
}

impl PlasmaParams {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    /// Checks 0 < ε ≤ 1, valid laws, and s > d/2 + 1.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        self.ion_law.validate()?;
        self.electron_law.validate()?;
        if (self.sobolev_order as f64) <= dim as f64 / 2.0 + 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sobolev order {} must exceed d/2 + 1 = {}",
                self.sobolev_order,
                dim as f64 / 2.0 + 1.0
            )));
        }
        Ok(())
    }
}

/// Density and velocity of one species.
#[derive(Clone, Debug)]
pub struct Species {
    pub rho: ScalarField,
    pub u: VectorField,
}

impl Species {
    pub fn new(rho: ScalarField, u: VectorField) -> Result<Self> {
        if u.dim() != rho.grid().dim() {
            return Err(Error::Shape("velocity dimension differs from grid".into()));
        }
        rho.check_grid(u.component(0))?;
        Ok(Self { rho, u })
    }

    pub fn rest(grid: &Arc<TorusGrid>) -> Self {
        Self {
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.rho.grid()
    }

    pub fn axpy(&mut self, a: f64, other: &Species) {
        self.rho.axpy(a, &other.rho);
        self.u.axpy(a, &other.u);
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.u.is_finite()
    }

    pub(crate) fn check_floor(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::UnstableState("non-finite field values".into()));
        }
        let min = self.rho.min();
        if min < RHO_FLOOR {
            return Err(Error::DensityFloor {
                min,
                floor: RHO_FLOOR,
            });
        }
        Ok(())
    }
}

/// Model-agnostic state: an ordered list of species.
#[derive(Clone, Debug)]
pub struct FluidState {
    pub species: Vec<Species>,
}

impl FluidState {
    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.species[0].grid()
    }

    pub fn axpy(&mut self, a: f64, other: &FluidState) {
        for (s, o) in self.species.iter_mut().zip(&other.species) {
            s.axpy(a, o);
        }
    }

    pub fn max_abs_diff(&self, other: &FluidState) -> f64 {
        self.species
            .iter()
            .zip(&other.species)
            .map(|(a, b)| (&a.rho - &b.rho).max_abs().max((&a.u - &b.u).max_abs()))
            .fold(0.0, f64::max)
    }
}

/// Scaled bipolar state (ions, electrons).
#[derive(Clone, Debug)]
pub struct BepState {
    pub rho_i: ScalarField,
    pub u_i: VectorField,
    pub rho_e: ScalarField,
    pub u_e: VectorField,
}

/// Unipolar electron state over a unit ion background.
#[derive(Clone, Debug)]
pub struct UepState {
    pub rho_e: ScalarField,
    pub u_e: VectorField,
}

impl BepState {
    pub fn equilibrium(grid: &Arc<TorusGrid>) -> Self {
        Self {
            rho_i: ScalarField::constant(grid, 1.0),
            u_i: VectorField::zeros(grid),
            rho_e: ScalarField::constant(grid, 1.0),
            u_e: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.rho_i.grid()
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        Species::new(self.rho_i.clone(), self.u_i.clone())?;
        Species::new(self.rho_e.clone(), self.u_e.clone())?;
        self.rho_i.check_grid(&self.rho_e)
    }
}

impl UepState {
    pub fn equilibrium(grid: &Arc<TorusGrid>) -> Self {
        Self {
            rho_e: ScalarField::constant(grid, 1.0),
            u_e: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.rho_e.grid()
    }
}

impl From<BepState> for FluidState {
    fn from(s: BepState) -> Self {
        FluidState {
            species: vec![
                Species {
                    rho: s.rho_i,
                    u: s.u_i,
                },
                Species {
                    rho: s.rho_e,
                    u: s.u_e,
                },
            ],
        }
    }
}

impl TryFrom<FluidState> for BepState {
    type Error = Error;
    fn try_from(s: FluidState) -> Result<Self> {
        let [ion, electron]: [Species; 2] = s
            .species
            .try_into()
            .map_err(|_| Error::Shape("bipolar state needs exactly two species".into()))?;
        Ok(BepState {
            rho_i: ion.rho,
            u_i: ion.u,
            rho_e: electron.rho,
            u_e: electron.u,
        })
    }
}

impl From<UepState> for FluidState {
    fn from(s: UepState) -> Self {
        FluidState {
            species: vec![Species {
                rho: s.rho_e,
                u: s.u_e,
            }],
        }
    }
}

impl TryFrom<FluidState> for UepState {
    type Error = Error;
    fn try_from(s: FluidState) -> Result<Self> {
        let [electron]: [Species; 1] = s
            .species
            .try_into()
            .map_err(|_| Error::Shape("unipolar state needs exactly one species".into()))?;
        Ok(UepState {
            rho_e: electron.rho,
            u_e: electron.u,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn params_validation() {
        let p = PlasmaParams::default();
        assert!(p.validate(1).is_ok());
        assert!(p.validate(2).is_err()); // s = 2 is not > 2
        assert!(p.with_epsilon(0.0).validate(1).is_err());
        assert!(p.with_epsilon(1.5).validate(1).is_err());
        let p3 = PlasmaParams {
            sobolev_order: 3,
            ..p
        };
        assert!(p3.validate(3).is_ok());
    }

    #[test]
    fn conversions_round_trip() {
        let g = make_grid(1, 8).unwrap();
        let bep = BepState::equilibrium(&g);
        let fluid: FluidState = bep.into();
        assert_eq!(fluid.species.len(), 2);
        assert!(UepState::try_from(fluid.clone()).is_err());
        assert!(BepState::try_from(fluid).is_ok());
    }

    #[test]
    fn floor_is_enforced() {
        let g = make_grid(1, 8).unwrap();
        let mut s = Species::rest(&g);
        assert!(s.check_floor().is_ok());
        s.rho.values_mut()[2] = 0.2;
        assert!(matches!(s.check_floor(), Err(Error::DensityFloor { .. })));
        s.rho.values_mut()[2] = f64::NAN;
        assert!(matches!(s.check_floor(), Err(Error::UnstableState(_))));
    }
}
