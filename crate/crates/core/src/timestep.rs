//! Explicit RK4 time integration with a CFL step policy and exact landing
//! on sample times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{FluidState, PlasmaModel};
use crate::spectral::{ScalarField, VectorField};

/// Largest step ever taken; keeps the unit damping rate resolved.
pub const DT_MAX: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub cfl_number: f64,
    pub t_end: f64,
    pub sample_interval: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            cfl_number: 0.4,
            t_end: 8.0,
            sample_interval: 0.05,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_number > 0.0 && self.cfl_number <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl number must lie in (0, 1], got {}",
                self.cfl_number
            )));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        Ok(())
    }

    /// Sample times 0, Δt, 2Δt, ... with `t_end` always last.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        if self.t_end <= 0.0 {
            return times;
        }
        let slack = 1e-9 * self.sample_interval;
        let mut k = 1u64;
        loop {
            let t = k as f64 * self.sample_interval;
            if t >= self.t_end - slack {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(self.t_end);
        times
    }
}

/// One stored state with its derived potential and field.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub state: FluidState,
    pub phi: ScalarField,
    pub e: VectorField,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: String,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has an initial sample")
    }

    /// Common spacing of the sample times, if they are uniform to 1e-9 relative.
    pub fn uniform_spacing(&self) -> Option<f64> {
        uniform_spacing(&self.times())
    }
}

pub(crate) fn uniform_spacing(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = times[1] - times[0];
    let ok = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt);
    ok.then_some(dt)
}

/// dt = cfl · dx / λ_max, capped at [`DT_MAX`].
pub fn cfl_dt(model: &dyn PlasmaModel, state: &FluidState, cfl_number: f64) -> Result<f64> {
    let lambda = model.max_wave_speed(state);
    if !lambda.is_finite() {
        return Err(Error::UnstableState(format!(
            "maximum wave speed is {lambda}"
        )));
    }
    let dx = state.grid().spacing();
    if lambda <= 0.0 {
        return Ok(DT_MAX);
    }
    Ok((cfl_number * dx / lambda).min(DT_MAX))
}

/// One classical four-stage Runge–Kutta step.
pub fn step_rk4(model: &dyn PlasmaModel, state: &FluidState, dt: f64) -> Result<FluidState> {
    let k1 = model.tendency(state)?;
    let mut stage = state.clone();
    stage.axpy(0.5 * dt, &k1);
    let k2 = model.tendency(&stage)?;
    let mut stage = state.clone();
    stage.axpy(0.5 * dt, &k2);
    let k3 = model.tendency(&stage)?;
    let mut stage = state.clone();
    stage.axpy(dt, &k3);
    let k4 = model.tendency(&stage)?;

    let mut next = state.clone();
    next.axpy(dt / 6.0, &k1);
    next.axpy(dt / 3.0, &k2);
    next.axpy(dt / 3.0, &k3);
    next.axpy(dt / 6.0, &k4);
    model.check_state(&next)?;
    Ok(next)
}

/// `steps` RK4 steps of fixed size `dt`.
pub fn advance_fixed(
    model: &dyn PlasmaModel,
    state: &FluidState,
    dt: f64,
    steps: usize,
) -> Result<FluidState> {
    let mut s = state.clone();
    for i in 0..steps {
        s = step_rk4(model, &s, dt).map_err(|e| e.at_time(i as f64 * dt))?;
    }
    Ok(s)
}

fn sample(model: &dyn PlasmaModel, t: f64, state: FluidState) -> Result<Sample> {
    let (phi, e) = model.potential(&state)?;
    Ok(Sample { t, state, phi, e })
}

/// Advance to `policy.t_end`, recomputing the CFL step every step and landing
/// exactly on every sample time.
pub fn integrate(
    model: &dyn PlasmaModel,
    initial: &FluidState,
    policy: &StepPolicy,
) -> Result<Trajectory> {
    policy.validate()?;
    model.check_state(initial).map_err(|e| e.at_time(0.0))?;
    let times = policy.sample_times();
    let mut samples = Vec::with_capacity(times.len());
    samples.push(sample(model, 0.0, initial.clone()).map_err(|e| e.at_time(0.0))?);

    let mut state = initial.clone();
    let mut t = 0.0;
    for &target in &times[1..] {
        while t < target {
            let annotate = |e: Error| e.at_time(t);
            let dt_cfl = cfl_dt(model, &state, policy.cfl_number).map_err(annotate)?;
            let remaining = target - t;
            let (dt, lands) = if dt_cfl >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (dt_cfl, false)
            };
            state = step_rk4(model, &state, dt).map_err(annotate)?;
            t = if lands { target } else { t + dt };
        }
        samples.push(sample(model, target, state.clone()).map_err(|e| e.at_time(target))?);
    }
    Ok(Trajectory {
        model: model.name().to_string(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BepState, Bipolar, PlasmaParams, PressureLaw, Unipolar};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn cfl_at_equilibrium() {
        let g = make_grid(1, 128).unwrap();
        let model = Bipolar {
            params: PlasmaParams::default().with_epsilon(0.5),
        };
        let s: FluidState = BepState::equilibrium(&g).into();
        let dt = cfl_dt(&model, &s, 0.4).unwrap();
        let want = 0.4 * (2.0 * PI / 128.0) / 2f64.sqrt();
        assert!((dt - want).abs() < 1e-15);
    }

    #[test]
    fn cfl_isothermal_and_small_eps() {
        let g = make_grid(1, 64).unwrap();
        let params = PlasmaParams {
            epsilon: 1e-3,
            electron_law: PressureLaw::isothermal(1.0),
            ..PlasmaParams::default()
        };
        let model = Bipolar { params };
        let mut s = BepState::equilibrium(&g);
        s.rho_i = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * x[0].sin());
        let dt = cfl_dt(&model, &s.into(), 0.4).unwrap();
        // electron sound speed 1 governs
        assert!((dt - 0.4 * g.spacing()).abs() < 1e-15);
    }

    #[test]
    fn cfl_rejects_nan() {
        let g = make_grid(1, 16).unwrap();
        let model = Unipolar {
            law: PressureLaw::default(),
        };
        let mut s: FluidState = crate::models::UepState::equilibrium(&g).into();
        s.species[0].u.components_mut()[0].values_mut()[0] = f64::NAN;
        assert!(matches!(
            cfl_dt(&model, &s, 0.4),
            Err(Error::UnstableState(_))
        ));
    }

    #[test]
    fn damping_of_constant_ion_velocity() {
        let g = make_grid(1, 16).unwrap();
        let model = Bipolar {
            params: PlasmaParams::default().with_epsilon(0.5),
        };
        let c = 0.3;
        let mut s = BepState::equilibrium(&g);
        s.u_i = crate::spectral::VectorField::from_fn(&g, |_| [c, 0.0, 0.0]);
        let dt = 0.05;
        let next = BepState::try_from(step_rk4(&model, &s.into(), dt).unwrap()).unwrap();
        let exact = c * (-dt).exp();
        // local RK4 error for u' = -u is dt^5/120 · c
        let err = (next.u_i.component(0).values()[3] - exact).abs();
        assert!(err < c * dt.powi(5) / 100.0, "err = {err}");
    }

    #[test]
    fn sample_times_land_on_t_end() {
        let p = StepPolicy {
            cfl_number: 0.4,
            t_end: 0.23,
            sample_interval: 0.05,
        };
        let t = p.sample_times();
        assert_eq!(t.len(), 6);
        assert_eq!(*t.last().unwrap(), 0.23);
        let p0 = StepPolicy { t_end: 0.0, ..p };
        assert_eq!(p0.sample_times(), vec![0.0]);
    }

    #[test]
    fn zero_length_run_has_initial_sample_only() {
        let g = make_grid(1, 16).unwrap();
        let model = Bipolar {
            params: PlasmaParams::default(),
        };
        let policy = StepPolicy {
            t_end: 0.0,
            ..StepPolicy::default()
        };
        let traj = integrate(&model, &BepState::equilibrium(&g).into(), &policy).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.samples[0].t, 0.0);
    }

    #[test]
    fn equilibrium_run_stays_at_rest() {
        let g = make_grid(1, 16).unwrap();
        let model = Bipolar {
            params: PlasmaParams::default(),
        };
        let policy = StepPolicy {
            t_end: 10.0,
            sample_interval: 0.5,
            ..StepPolicy::default()
        };
        let s0: FluidState = BepState::equilibrium(&g).into();
        let traj = integrate(&model, &s0, &policy).unwrap();
        assert_eq!(traj.len(), 21);
        for smp in &traj.samples {
            assert_eq!(smp.state.max_abs_diff(&s0), 0.0);
        }
    }

    #[test]
    fn floor_breach_is_annotated_with_time() {
        let g = make_grid(1, 32).unwrap();
        let model = Unipolar {
            law: PressureLaw::default(),
        };
        // strongly converging flow drives the density below the floor
        let s = crate::models::UepState {
            rho_e: ScalarField::from_fn(&g, |x| 1.0 + 0.6 * x[0].cos()),
            u_e: crate::spectral::VectorField::from_fn(&g, |x| [-3.0 * x[0].sin(), 0.0, 0.0]),
        };
        let policy = StepPolicy {
            t_end: 2.0,
            sample_interval: 0.1,
            ..StepPolicy::default()
        };
        let err = integrate(&model, &s.into(), &policy).unwrap_err();
        assert!(matches!(err, Error::AtTime { .. }), "{err}");
        assert!(matches!(err.root(), Error::DensityFloor { .. }));
    }
}
