//! Pressure laws, the scaled bipolar system and its unipolar limit.
//!
//! Both systems are exposed through [`PlasmaModel`] so the integrator and the
//! CLI can pick one by name from a [`ModelRegistry`].

mod pressure;
mod rhs;
mod state;

use std::collections::BTreeMap;

pub use pressure::{enthalpy, enthalpy_prime, PressureLaw};
pub use rhs::{advection, bep_rhs, electric_field, uep_rhs};
pub use state::{BepState, FluidState, PlasmaParams, Species, UepState, RHO_FLOOR};

use crate::error::{Error, Result};
use crate::spectral::{ScalarField, VectorField};

/// A semi-discrete fluid system advanced by the time integrator.
pub trait PlasmaModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Species in the order they appear in [`FluidState::species`].
    fn species_names(&self) -> &'static [&'static str];

    fn tendency(&self, state: &FluidState) -> Result<FluidState>;

    /// Potential φ and field ∇φ of a state.
    fn potential(&self, state: &FluidState) -> Result<(ScalarField, VectorField)>;

    /// Largest characteristic speed over all nodes and species.
    fn max_wave_speed(&self, state: &FluidState) -> f64;

    /// Shape, finiteness and density-floor checks.
    fn check_state(&self, state: &FluidState) -> Result<()> {
        if state.species.len() != self.species_names().len() {
            return Err(Error::Shape(format!(
                "{} expects {} species, got {}",
                self.name(),
                self.species_names().len(),
                state.species.len()
            )));
        }
        state.species.iter().try_for_each(Species::check_floor)
    }
}

fn max_speed(s: &Species, law: &PressureLaw, sound_weight: f64) -> f64 {
    let speed2 = s.u.norm_squared();
    s.rho
        .values()
        .iter()
        .zip(speed2.values())
        .map(|(&r, &u2)| u2.sqrt() + sound_weight * law.sound_speed(r))
        .fold(0.0, |m: f64, v| {
            if m.is_nan() || v.is_nan() {
                f64::NAN
            } else {
                m.max(v)
            }
        })
}

/// Scaled bipolar Euler–Poisson: species `[ion, electron]`.
#[derive(Clone, Debug)]
pub struct Bipolar {
    pub params: PlasmaParams,
}

impl PlasmaModel for Bipolar {
    fn name(&self) -> &'static str {
        "bep"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["ion", "electron"]
    }

    fn tendency(&self, state: &FluidState) -> Result<FluidState> {
        let s = BepState::try_from(state.clone())?;
        bep_rhs(&s, &self.params).map(Into::into)
    }

    fn potential(&self, state: &FluidState) -> Result<(ScalarField, VectorField)> {
        electric_field(&state.species[0].rho, &state.species[1].rho)
    }

    fn max_wave_speed(&self, state: &FluidState) -> f64 {
        let ion = max_speed(&state.species[0], &self.params.ion_law, self.params.epsilon);
        let electron = max_speed(&state.species[1], &self.params.electron_law, 1.0);
        if ion.is_nan() || electron.is_nan() {
            f64::NAN
        } else {
            ion.max(electron)
        }
    }
}

/// Unipolar limit with a fixed unit ion background: species `[electron]`.
#[derive(Clone, Debug)]
pub struct Unipolar {
    pub law: PressureLaw,
}

impl PlasmaModel for Unipolar {
    fn name(&self) -> &'static str {
        "uep"
    }

    fn species_names(&self) -> &'static [&'static str] {
        &["electron"]
    }

    fn tendency(&self, state: &FluidState) -> Result<FluidState> {
        let s = UepState::try_from(state.clone())?;
        uep_rhs(&s, &self.law).map(Into::into)
    }

    fn potential(&self, state: &FluidState) -> Result<(ScalarField, VectorField)> {
        let rho = &state.species[0].rho;
        electric_field(&ScalarField::constant(rho.grid(), 1.0), rho)
    }

    fn max_wave_speed(&self, state: &FluidState) -> f64 {
        max_speed(&state.species[0], &self.law, 1.0)
    }
}

pub type ModelFactory = fn(&PlasmaParams) -> Box<dyn PlasmaModel>;

/// Name-keyed constructors for [`PlasmaModel`] implementations.
pub struct ModelRegistry {
    factories: BTreeMap<&'static str, ModelFactory>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("bep", |p| Box::new(Bipolar { params: *p }));
        r.register("uep", |p| {
            Box::new(Unipolar {
                law: p.electron_law,
            })
        });
        r
    }
}

impl ModelRegistry {
    pub fn register(&mut self, name: &'static str, factory: ModelFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn build(&self, name: &str, params: &PlasmaParams) -> Result<Box<dyn PlasmaModel>> {
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown model '{name}' (available: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        Ok(factory(params))
    }
}
