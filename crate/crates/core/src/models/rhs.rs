use super::pressure::{enthalpy, PressureLaw};
use super::state::{BepState, PlasmaParams, Species, UepState};
use crate::error::{Error, Result};
use crate::spectral::{
    dealias, divergence_dealiased, gradient, gradient_dealiased, inverse_laplacian_spectrum,
    ScalarField, VectorField, TOL_MEAN,
};

/// Potential and field of a charge imbalance: Δφ = ρ_i − ρ_e, ∫φ = 0, E = ∇φ.
///
/// The mean of ρ_i − ρ_e must vanish relative to the density scale; the
/// residual roundoff-level mean is discarded before inversion.
pub fn electric_field(
    rho_i: &ScalarField,
    rho_e: &ScalarField,
) -> Result<(ScalarField, VectorField)> {
    rho_i.check_grid(rho_e)?;
    let charge = rho_i - rho_e;
    let mean = charge.mean();
    let scale = rho_i.mean().abs().max(rho_e.mean().abs());
    let tol = TOL_MEAN * scale;
    if mean.abs() > tol || !mean.is_finite() {
        return Err(Error::Compatibility {
            mean,
            tol,
            context: "charge neutrality",
        });
    }
    let spec = inverse_laplacian_spectrum(&charge);
    let phi = spec.to_field();
    let e = gradient(&phi);
    Ok((phi, e))
}

/// Dealiased (u·∇)u.
pub fn advection(u: &VectorField) -> VectorField {
    let grads: Vec<VectorField> = u.components().iter().map(gradient).collect();
    let components = grads
        .iter()
        .map(|grad_uj| {
            let mut acc = ScalarField::zeros(u.grid());
            for (uk, dk_uj) in u.components().iter().zip(grad_uj.components()) {
                acc = &acc + &(uk * dk_uj);
            }
            dealias(&acc)
        })
        .collect();
    VectorField::from_components(components).expect("advection keeps dimension")
}

/// −div(ρu), with the exactly-zero mean projected out.
fn mass_tendency(s: &Species) -> ScalarField {
    let flux = s.u.times(&s.rho);
    (-&divergence_dealiased(&flux)).subtract_mean()
}

/// −(u·∇)u − weight·∇h(ρ) − u, the field-free part of a momentum tendency.
fn momentum_tendency(s: &Species, law: &PressureLaw, pressure_weight: f64) -> Result<VectorField> {
    let grad_h = gradient_dealiased(&enthalpy(law, &s.rho)?);
    let adv = advection(&s.u);
    let mut du = -&adv;
    du.axpy(-pressure_weight, &grad_h);
    du.axpy(-1.0, &s.u);
    Ok(du)
}

/// Tendency of the scaled bipolar system.
pub fn bep_rhs(state: &BepState, params: &PlasmaParams) -> Result<BepState> {
    state.check_shapes()?;
    let ion = Species {
        rho: state.rho_i.clone(),
        u: state.u_i.clone(),
    };
    let electron = Species {
        rho: state.rho_e.clone(),
        u: state.u_e.clone(),
    };
    ion.check_floor()?;
    electron.check_floor()?;
    let eps2 = params.epsilon * params.epsilon;
    let (_, e) = electric_field(&state.rho_i, &state.rho_e)?;

    let mut du_i = momentum_tendency(&ion, &params.ion_law, eps2)?;
    du_i.axpy(eps2, &e);
    let mut du_e = momentum_tendency(&electron, &params.electron_law, 1.0)?;
    du_e.axpy(-1.0, &e);

    Ok(BepState {
        rho_i: mass_tendency(&ion),
        u_i: du_i,
        rho_e: mass_tendency(&electron),
        u_e: du_e,
    })
}

/// Tendency of the unipolar limit with unit background ions.
pub fn uep_rhs(state: &UepState, law: &PressureLaw) -> Result<UepState> {
    let electron = Species::new(state.rho_e.clone(), state.u_e.clone())?;
    electron.check_floor()?;
    let background = ScalarField::constant(state.grid(), 1.0);
    let (_, e) = electric_field(&background, &state.rho_e)?;
    let mut du_e = momentum_tendency(&electron, law, 1.0)?;
    du_e.axpy(-1.0, &e);
    Ok(UepState {
        rho_e: mass_tendency(&electron),
        u_e: du_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{laplacian, make_grid};

    #[test]
    fn neutral_densities_have_no_field() {
        let g = make_grid(1, 16).unwrap();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
        let (phi, e) = electric_field(&rho, &rho).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
        assert_eq!(e.max_abs(), 0.0);
    }

    #[test]
    fn single_mode_field() {
        let g = make_grid(1, 16).unwrap();
        let rho_i = ScalarField::from_fn(&g, |x| 1.0 + x[0].sin());
        let rho_e = ScalarField::constant(&g, 1.0);
        let (phi, e) = electric_field(&rho_i, &rho_e).unwrap();
        let want_phi = ScalarField::from_fn(&g, |x| -x[0].sin());
        let want_e = ScalarField::from_fn(&g, |x| -x[0].cos());
        assert!((&phi - &want_phi).max_abs() < 1e-14);
        assert!((e.component(0) - &want_e).max_abs() < 1e-14);
    }

    #[test]
    fn charge_imbalance_is_rejected() {
        let g = make_grid(1, 16).unwrap();
        let rho_i = ScalarField::constant(&g, 1.1);
        let rho_e = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            electric_field(&rho_i, &rho_e),
            Err(Error::Compatibility { .. })
        ));
    }

    #[test]
    fn random_charge_recovered_by_laplacian() {
        let g = make_grid(2, 16).unwrap();
        let diff = ScalarField::from_fn(&g, |x| {
            0.3 * (x[0] + 2.0 * x[1]).sin() - 0.2 * (3.0 * x[1]).cos() + 0.1 * x[0].cos()
        });
        let rho_e = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * (x[0] - x[1]).cos());
        let rho_i = &rho_e + &diff;
        let (phi, _) = electric_field(&rho_i, &rho_e).unwrap();
        assert!((&laplacian(&phi) - &diff).l2_norm() < 1e-10);
    }

    #[test]
    fn equilibrium_is_stationary() {
        let g = make_grid(2, 8).unwrap();
        let t = bep_rhs(&BepState::equilibrium(&g), &PlasmaParams::default()).unwrap();
        for f in [&t.rho_i, &t.rho_e] {
            assert_eq!(f.max_abs(), 0.0);
        }
        assert_eq!(t.u_i.max_abs(), 0.0);
        assert_eq!(t.u_e.max_abs(), 0.0);
        let t = uep_rhs(&UepState::equilibrium(&g), &PressureLaw::default()).unwrap();
        assert_eq!(t.rho_e.max_abs(), 0.0);
        assert_eq!(t.u_e.max_abs(), 0.0);
    }

    #[test]
    fn quiet_neutral_perturbation() {
        let g = make_grid(1, 32).unwrap();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
        let mut s = BepState::equilibrium(&g);
        s.rho_i = rho.clone();
        s.rho_e = rho.clone();
        let p = PlasmaParams::default().with_epsilon(0.5);
        let t = bep_rhs(&s, &p).unwrap();
        assert!(t.rho_i.max_abs() < 1e-15 && t.rho_e.max_abs() < 1e-15);
        let want = -&gradient(&enthalpy(&p.electron_law, &rho).unwrap());
        assert!((&t.u_e - &want).max_abs() < 1e-12);
    }

    #[test]
    fn uep_single_mode_potential() {
        let g = make_grid(1, 32).unwrap();
        let law = PressureLaw::default();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].sin());
        let s = UepState {
            rho_e: rho.clone(),
            u_e: VectorField::zeros(&g),
        };
        let t = uep_rhs(&s, &law).unwrap();
        // φ̄ = 0.1 sin x, so ∇φ̄ = 0.1 cos x
        let grad_phi = ScalarField::from_fn(&g, |x| 0.1 * x[0].cos());
        let grad_h = gradient(&enthalpy(&law, &rho).unwrap());
        let want = &(-grad_h.component(0)) - &grad_phi;
        assert!((t.u_e.component(0) - &want).max_abs() < 1e-12);
    }

    #[test]
    fn below_floor_is_rejected() {
        let g = make_grid(1, 16).unwrap();
        let mut s = BepState::equilibrium(&g);
        s.rho_e = ScalarField::from_fn(&g, |x| 1.0 + 0.9 * x[0].sin());
        s.rho_i = s.rho_e.clone();
        assert!(matches!(
            bep_rhs(&s, &PlasmaParams::default()),
            Err(Error::DensityFloor { .. })
        ));
    }
}
