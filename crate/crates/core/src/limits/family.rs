use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{BepState, UepState};
use crate::spectral::{
    check_zero_mean, scalar_norm, vector_norm, ScalarField, Spectrum, TorusGrid, VectorField,
};

use super::ProfileState;

/// Largest admissible electron amplitude δ₀.
pub const MAX_DELTA0: f64 = 0.1;

/// Shapes of ε-independent data from which every well-prepared initial
/// state of a sweep is built.
#[derive(Clone, Debug)]
pub struct WellPreparedFamily {
    /// Electron density shape (zero mean).
    pub a_e: ScalarField,
    /// Electron velocity shape.
    pub v_e: VectorField,
    /// Ion density shape (zero mean).
    pub a_i: ScalarField,
    /// Ion velocity shape; also the initial limiting ion velocity.
    pub b_i: VectorField,
    pub delta0: f64,
}

impl WellPreparedFamily {
    /// a_e = sin x₁, v_e = 0.5 cos x₁, a_i = sin x₁, b_i = cos x₁, δ₀ = 0.05.
    pub fn standard(grid: &Arc<TorusGrid>) -> Self {
        Self {
            a_e: ScalarField::from_fn(grid, |x| x[0].sin()),
            v_e: VectorField::from_fn(grid, |x| [0.5 * x[0].cos(), 0.0, 0.0]),
            a_i: ScalarField::from_fn(grid, |x| x[0].sin()),
            b_i: VectorField::from_fn(grid, |x| [x[0].cos(), 0.0, 0.0]),
            delta0: 0.05,
        }
    }

    /// All shapes and the amplitude set to zero: the equilibrium.
    pub fn zero(grid: &Arc<TorusGrid>) -> Self {
        Self {
            a_e: ScalarField::zeros(grid),
            v_e: VectorField::zeros(grid),
            a_i: ScalarField::zeros(grid),
            b_i: VectorField::zeros(grid),
            delta0: 0.0,
        }
    }

    pub fn with_delta0(self, delta0: f64) -> Self {
        Self { delta0, ..self }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.a_e.grid()
    }

    pub fn is_zero(&self) -> bool {
        (self.delta0 == 0.0 || (self.a_e.max_abs() == 0.0 && self.v_e.max_abs() == 0.0))
            && self.a_i.max_abs() == 0.0
            && self.b_i.max_abs() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=MAX_DELTA0).contains(&self.delta0) {
            return Err(Error::InvalidParameter(format!(
                "delta0 must lie in [0, {MAX_DELTA0}], got {}",
                self.delta0
            )));
        }
        self.a_e.check_grid(&self.a_i)?;
        self.a_e.check_grid(self.v_e.component(0))?;
        self.a_e.check_grid(self.b_i.component(0))?;
        check_zero_mean(&self.a_e, "electron density shape")?;
        check_zero_mean(&self.a_i, "ion density shape")?;
        let all = [&self.a_e, &self.a_i]
            .into_iter()
            .chain(self.v_e.components())
            .chain(self.b_i.components());
        for f in all {
            if !band_limited(f) {
                return Err(Error::InvalidParameter(
                    "family shapes must be band-limited below the dealiasing cutoff".into(),
                ));
            }
        }
        Ok(())
    }
}

fn band_limited(f: &ScalarField) -> bool {
    let spec = Spectrum::of(f);
    let mask = f.grid().dealias_mask();
    let peak = spec.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    spec.coeffs()
        .iter()
        .zip(mask)
        .all(|(c, &keep)| keep || c.norm() <= 1e-12 * peak.max(f64::MIN_POSITIVE))
}

/// The four terms of the well-preparedness hypothesis and the bound C₂ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellPreparedness {
    /// ‖ρ_{e,0} − ρ̄_{e,0}‖_{s−1}
    pub electron_density_gap: f64,
    /// ε⁻¹‖ρ_{i,0} − 1‖_{s−1}
    pub ion_density_term: f64,
    /// ‖u_{e,0} − ū_{e,0}‖_s
    pub electron_velocity_gap: f64,
    /// ε⁻¹‖u_{i,0}‖_s
    pub ion_velocity_term: f64,
    /// max(‖a_i‖_{s−1}, ‖b_i‖_s)
    pub c2: f64,
    pub epsilon: f64,
}

impl WellPreparedness {
    pub fn terms(&self) -> [f64; 4] {
        [
            self.electron_density_gap,
            self.ion_density_term,
            self.electron_velocity_gap,
            self.ion_velocity_term,
        ]
    }

    /// Every term is at most C₂ε (up to roundoff).
    pub fn holds(&self) -> bool {
        let bound = self.c2 * self.epsilon * (1.0 + 1e-12) + 1e-15;
        self.terms().iter().all(|&t| t <= bound)
    }
}

/// Matched initial data for the bipolar run, the unipolar limit and the
/// limiting ion profiles.
#[derive(Clone, Debug)]
pub struct WellPreparedData {
    pub bep: BepState,
    pub uep: UepState,
    pub profile: ProfileState,
    pub check: WellPreparedness,
}

/// ρ_{i,0} = 1 + ε²a_i, u_{i,0} = ε²b_i, ρ_{e,0} = ρ̄_{e,0} = 1 + δ₀a_e,
/// u_{e,0} = ū_{e,0} = δ₀v_e, ū_{i,0} = b_i, ρ̄¹_{i,0} = a_i.
pub fn well_prepared_data(
    family: &WellPreparedFamily,
    epsilon: f64,
    sobolev_order: u32,
) -> Result<WellPreparedData> {
    family.validate()?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let s = sobolev_order;
    let eps2 = epsilon * epsilon;
    let rho_e = family.a_e.map(|a| 1.0 + family.delta0 * a);
    let u_e = family.v_e.scale(family.delta0);
    let bep = BepState {
        rho_i: family.a_i.map(|a| 1.0 + eps2 * a),
        u_i: family.b_i.scale(eps2),
        rho_e: rho_e.clone(),
        u_e: u_e.clone(),
    };
    let uep = UepState { rho_e, u_e };
    let profile = ProfileState {
        u_bar_i: family.b_i.clone(),
        rho_bar_i1: family.a_i.clone(),
    };

    let check = WellPreparedness {
        electron_density_gap: scalar_norm(&(&bep.rho_e - &uep.rho_e), s - 1),
        ion_density_term: scalar_norm(&bep.rho_i.map(|r| r - 1.0), s - 1) / epsilon,
        electron_velocity_gap: vector_norm(&(&bep.u_e - &uep.u_e), s),
        ion_velocity_term: vector_norm(&bep.u_i, s) / epsilon,
        c2: scalar_norm(&family.a_i, s - 1).max(vector_norm(&family.b_i, s)),
        epsilon,
    };
    if !check.holds() {
        return Err(Error::InvalidParameter(format!(
            "initial data are not well prepared: {check:?}"
        )));
    }
    let charge = &bep.rho_i - &bep.rho_e;
    check_zero_mean(&charge, "initial charge")?;
    Ok(WellPreparedData {
        bep,
        uep,
        profile,
        check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn ion_density_is_scaled_by_eps_squared() {
        let g = make_grid(1, 32).unwrap();
        let fam = WellPreparedFamily::standard(&g);
        let data = well_prepared_data(&fam, 0.1, 2).unwrap();
        let want = ScalarField::from_fn(&g, |x| 1.0 + 0.01 * x[0].sin());
        assert!((&data.bep.rho_i - &want).max_abs() < 1e-16);
        assert!(data.check.holds());
        assert_eq!(data.check.electron_density_gap, 0.0);
        assert_eq!(data.check.electron_velocity_gap, 0.0);
    }

    #[test]
    fn zero_ion_velocity_gives_zero_profile() {
        let g = make_grid(1, 16).unwrap();
        let mut fam = WellPreparedFamily::standard(&g);
        fam.b_i = VectorField::zeros(&g);
        let data = well_prepared_data(&fam, 1.0, 2).unwrap();
        assert_eq!(data.bep.u_i.max_abs(), 0.0);
        assert_eq!(data.profile.u_bar_i.max_abs(), 0.0);
    }

    #[test]
    fn nonzero_mean_shape_is_rejected() {
        let g = make_grid(1, 16).unwrap();
        let mut fam = WellPreparedFamily::standard(&g);
        fam.a_i = fam.a_i.map(|a| a + 0.5);
        assert!(matches!(
            well_prepared_data(&fam, 0.5, 2),
            Err(Error::Compatibility { .. })
        ));
        let mut fam = WellPreparedFamily::standard(&g);
        fam.a_e = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            well_prepared_data(&fam, 0.5, 2),
            Err(Error::Compatibility { .. })
        ));
    }

    #[test]
    fn amplitude_and_band_limits() {
        let g = make_grid(1, 16).unwrap();
        let fam = WellPreparedFamily::standard(&g).with_delta0(0.2);
        assert!(matches!(fam.validate(), Err(Error::InvalidParameter(_))));
        let mut fam = WellPreparedFamily::standard(&g);
        fam.a_e = ScalarField::from_fn(&g, |x| (7.0 * x[0]).sin());
        assert!(matches!(fam.validate(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn zero_family_detected() {
        let g = make_grid(1, 16).unwrap();
        assert!(WellPreparedFamily::zero(&g).is_zero());
        assert!(!WellPreparedFamily::standard(&g).is_zero());
    }
}
