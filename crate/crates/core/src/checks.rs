//! Named invariant checks of the discretisation, run by the `check`
//! subcommand and by the test suite.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::energy_functionals;
use crate::models::{BepState, Bipolar, FluidState, PlasmaParams};
use crate::spectral::{
    divergence, grad_inv_laplacian, laplacian, make_grid, partial, scalar_norm,
    solve_poisson_zero_mean, vector_norm, ScalarField, Spectrum, TorusGrid, VectorField,
};
use crate::timestep::advance_fixed;

/// Outcome of one check: pass flag plus a one-line account of what was measured.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn within(measured: f64, tol: f64, what: &str) -> Self {
        Self {
            passed: measured <= tol,
            detail: format!("{what} = {measured:.3e} (tolerance {tol:.0e})"),
        }
    }
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self) -> Result<CheckOutcome>;
}

/// A check backed by a plain function.
pub struct FnCheck {
    pub name: &'static str,
    pub description: &'static str,
    pub body: fn() -> Result<CheckOutcome>,
}

impl Check for FnCheck {
    fn name(&self) -> &'static str {
        self.name
    }
    fn description(&self) -> &'static str {
        self.description
    }
    fn run(&self) -> Result<CheckOutcome> {
        (self.body)()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Checks in registration order, selectable by name.
pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = Self { checks: Vec::new() };
        for (name, description, body) in [
            (
                "spectral-round-trip",
                "inverse FFT of the forward FFT reproduces nodal values (d = 1, 2, 3)",
                spectral_round_trip as fn() -> Result<CheckOutcome>,
            ),
            (
                "poisson-inverse",
                "laplacian of the zero-mean Poisson solution reproduces the source",
                poisson_inverse,
            ),
            (
                "stream-divergence",
                "divergence of grad-inverse-laplacian is the identity on zero-mean fields",
                stream_divergence,
            ),
            (
                "norm-identities",
                "Sobolev norms of single modes, vector additivity and monotonicity in order",
                norm_identities,
            ),
            (
                "finite-difference",
                "spectral derivative agrees with a fourth-order central difference",
                finite_difference,
            ),
            (
                "rk4-order",
                "RK4 self-convergence order of the bipolar system is 4 ± 0.2",
                rk4_order,
            ),
            (
                "equilibrium",
                "1000 steps from the constant equilibrium stay at equilibrium with zero energy",
                equilibrium,
            ),
            (
                "mass-conservation",
                "species masses and total charge are conserved by the time stepper",
                mass_conservation,
            ),
        ] {
            r.register(Box::new(FnCheck {
                name,
                description,
                body,
            }));
        }
        r
    }
}

impl CheckRegistry {
    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.iter().map(|c| c.name())
    }

    pub fn get(&self, name: &str) -> Option<&dyn Check> {
        self.checks
            .iter()
            .find(|c| c.name() == name)
            .map(|c| c.as_ref())
    }

    /// Runs the named checks (all when `only` is empty) in parallel and
    /// reports them in registration order. An error inside a check is a failure.
    pub fn run(&self, only: &[String]) -> Result<Vec<CheckReport>> {
        for name in only {
            if self.get(name).is_none() {
                return Err(Error::Config(format!(
                    "unknown check {name:?}; known: {}",
                    self.names().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        let selected: Vec<&dyn Check> = self
            .checks
            .iter()
            .map(|c| c.as_ref())
            .filter(|c| only.is_empty() || only.iter().any(|n| n == c.name()))
            .collect();
        Ok(selected
            .par_iter()
            .map(|c| {
                let start = Instant::now();
                let out = c.run().unwrap_or_else(|e| CheckOutcome {
                    passed: false,
                    detail: format!("error: {e}"),
                });
                CheckReport {
                    name: c.name(),
                    passed: out.passed,
                    detail: out.detail,
                    elapsed: start.elapsed(),
                }
            })
            .collect())
    }
}

/// A zero-mean trigonometric field resolved on every grid used here.
fn generic_field(grid: &Arc<TorusGrid>) -> ScalarField {
    let d = grid.dim();
    ScalarField::from_fn(grid, |x| {
        let y = if d > 1 { x[1] } else { 0.0 };
        let z = if d > 2 { x[2] } else { 0.0 };
        (x[0] + 2.0 * y).sin()
            + 0.5 * (2.0 * x[0] - 3.0 * z).cos()
            + 0.3 * (3.0 * x[0] - y + z).sin()
    })
    .subtract_mean()
}

fn grids() -> Result<Vec<Arc<TorusGrid>>> {
    [(1, 64), (2, 32), (3, 16)]
        .into_iter()
        .map(|(d, n)| make_grid(d, n))
        .collect()
}

fn worst_over_grids(f: impl Fn(&Arc<TorusGrid>) -> Result<f64>) -> Result<f64> {
    grids()?
        .iter()
        .map(f)
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

fn spectral_round_trip() -> Result<CheckOutcome> {
    let err = worst_over_grids(|g| {
        let f = generic_field(g);
        Ok((&Spectrum::of(&f).to_field() - &f).max_abs() / f.max_abs())
    })?;
    Ok(CheckOutcome::within(
        err,
        1e-13,
        "max relative round-trip error",
    ))
}

fn poisson_inverse() -> Result<CheckOutcome> {
    let err = worst_over_grids(|g| {
        let rhs = generic_field(g);
        let phi = solve_poisson_zero_mean(&rhs)?;
        Ok((&laplacian(&phi) - &rhs).max_abs() / rhs.max_abs())
    })?;
    Ok(CheckOutcome::within(
        err,
        1e-12,
        "max relative Poisson defect",
    ))
}

fn stream_divergence() -> Result<CheckOutcome> {
    let err = worst_over_grids(|g| {
        let z = generic_field(g);
        Ok((&divergence(&grad_inv_laplacian(&z)?) - &z).l2_norm() / z.l2_norm())
    })?;
    Ok(CheckOutcome::within(
        err,
        1e-12,
        "relative divergence defect",
    ))
}

fn norm_identities() -> Result<CheckOutcome> {
    let g = make_grid(1, 32)?;
    let mut worst = 0.0f64;
    for k in 1..=4 {
        let kf = k as f64;
        let f = ScalarField::from_fn(&g, |x| (kf * x[0]).sin());
        for s in 0..=3u32 {
            let want: f64 = PI * (0..=s).map(|j| kf.powi(2 * j as i32)).sum::<f64>();
            let got = scalar_norm(&f, s).powi(2);
            worst = worst.max((got - want).abs() / want);
        }
    }
    let g2 = make_grid(2, 16)?;
    let a = generic_field(&g2);
    let b = ScalarField::from_fn(&g2, |x| x[1].cos());
    let v = VectorField::from_components(vec![a.clone(), b.clone()])?;
    for s in 0..=2u32 {
        let sum = scalar_norm(&a, s).powi(2) + scalar_norm(&b, s).powi(2);
        worst = worst.max((vector_norm(&v, s).powi(2) - sum).abs() / sum);
    }
    let monotone = (0..3u32).all(|s| scalar_norm(&a, s) <= scalar_norm(&a, s + 1));
    let mut out = CheckOutcome::within(worst, 1e-12, "max relative norm-identity error");
    out.passed &= monotone;
    if !monotone {
        out.detail.push_str("; norms not monotone in order");
    }
    Ok(out)
}

fn finite_difference() -> Result<CheckOutcome> {
    let g = make_grid(2, 64)?;
    let f = ScalarField::from_fn(&g, |x| (x[0].sin() + 0.5 * x[1].cos()).exp());
    let h = g.spacing();
    let shifted = |dj: isize| {
        ScalarField::from_fn(&g, |x| {
            let xs = x[0] + dj as f64 * h;
            (xs.sin() + 0.5 * x[1].cos()).exp()
        })
    };
    let (m2, m1, p1, p2) = (shifted(-2), shifted(-1), shifted(1), shifted(2));
    let mut fd = m2.clone();
    fd.axpy(-1.0, &p2);
    fd.axpy(8.0, &p1);
    fd.axpy(-8.0, &m1);
    let fd = fd.scale(1.0 / (12.0 * h));
    let spectral = partial(&f, &[1, 0]);
    let err = (&fd - &spectral).max_abs() / spectral.max_abs();
    Ok(CheckOutcome::within(
        err,
        1e-4,
        "relative difference to fourth-order stencil",
    ))
}

fn bump_state(grid: &Arc<TorusGrid>) -> BepState {
    BepState {
        rho_i: ScalarField::from_fn(grid, |x| 1.0 + 0.1 * x[0].sin()),
        u_i: VectorField::from_fn(grid, |x| [0.05 * x[0].cos(), 0.0, 0.0]),
        rho_e: ScalarField::from_fn(grid, |x| 1.0 + 0.1 * x[0].sin() + 0.05 * (2.0 * x[0]).cos()),
        u_e: VectorField::from_fn(grid, |x| [0.2 * x[0].cos(), 0.0, 0.0]),
    }
}

fn rk4_order() -> Result<CheckOutcome> {
    let g = make_grid(1, 32)?;
    let model = Bipolar {
        params: PlasmaParams::default().with_epsilon(0.5),
    };
    let init: FluidState = bump_state(&g).into();
    let t = 0.8;
    let run = |steps: usize| advance_fixed(&model, &init, t / steps as f64, steps);
    let (a, b, c) = (run(10)?, run(20)?, run(40)?);
    let order = (a.max_abs_diff(&b) / b.max_abs_diff(&c)).log2();
    Ok(CheckOutcome {
        passed: (order - 4.0).abs() <= 0.2,
        detail: format!("observed order {order:.3} (expected 4 ± 0.2)"),
    })
}

fn equilibrium() -> Result<CheckOutcome> {
    let g = make_grid(1, 64)?;
    let params = PlasmaParams::default().with_epsilon(0.5);
    let model = Bipolar { params };
    let eq: FluidState = BepState::equilibrium(&g).into();
    let end = advance_fixed(&model, &eq, 0.01, 1000)?;
    let drift = end.max_abs_diff(&eq);
    let (energy, _) = energy_functionals(&BepState::try_from(end)?, &params)?;
    let mut out = CheckOutcome::within(drift, 1e-12, "max deviation from equilibrium");
    out.passed &= energy == 0.0;
    out.detail.push_str(&format!("; energy {energy:e}"));
    Ok(out)
}

fn mass_conservation() -> Result<CheckOutcome> {
    let g = make_grid(2, 16)?;
    let model = Bipolar {
        params: PlasmaParams::default().with_epsilon(0.3),
    };
    let init = bump_state(&g);
    let (m_i, m_e) = (init.rho_i.integral(), init.rho_e.integral());
    let end = BepState::try_from(advance_fixed(&model, &init.into(), 0.02, 100)?)?;
    let drift =
        ((end.rho_i.integral() - m_i).abs() / m_i).max((end.rho_e.integral() - m_e).abs() / m_e);
    let charge = (&end.rho_i - &end.rho_e).integral().abs();
    let mut out = CheckOutcome::within(drift, 1e-12, "relative mass drift");
    out.passed &= charge < 1e-12;
    out.detail.push_str(&format!("; |charge| {charge:.1e}"));
    Ok(out)
}
