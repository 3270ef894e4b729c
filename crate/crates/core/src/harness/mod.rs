//! Single runs, ε-sweeps, rate fits, and the files they read and write.

mod fit;
pub mod io;
mod record;
mod settings;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fit::{fit_rate, linear_fit, RateFit};
pub use record::{
    IntervalRow, RunRecord, RunSummary, SampleRow, ERROR_NORM_COLUMNS, INTERVAL_COLUMNS,
    SAMPLE_COLUMNS,
};
pub use settings::{FamilyKind, RunSettings};

use crate::error::{Error, Result};
use crate::functionals::{balance_residual, energy_report_with_field};
use crate::limits::{
    solve_rho_i1, solve_ubar_i, stream_flux, stream_function, stream_residual_from_parts,
    stream_source, well_prepared_data, CoupledSample, ProfileState, StreamSpecies,
    WellPreparedFamily,
};
use crate::models::{BepState, Bipolar, PlasmaParams, UepState, Unipolar};
use crate::spectral::{divergence, make_grid, scalar_norm, vector_norm, TorusGrid, VectorField};
use crate::timestep::{integrate, StepPolicy, Trajectory};

/// Rate thresholds: sup-norm slope, squared-integral slope.
const ELECTRON_RATES: (f64, f64) = (0.9, 1.8);
const ION_VELOCITY_RATES: (f64, f64) = (1.8, 3.6);
const MIN_R_SQUARED: f64 = 0.98;
/// Bound on max_t 𝓔(t)/𝓔(0) and on its growth from the largest to the smallest ε.
const ENERGY_RATIO_BOUND: f64 = 10.0;
const ENERGY_RATIO_TREND: f64 = 2.0;
/// sup_t‖u_i‖_{s−1} ≤ ION_VELOCITY_FACTOR·ε²‖b_i‖_{s−1}.
const ION_VELOCITY_FACTOR: f64 = 2.0;
const CONSERVATION_TOL: f64 = 1e-12;
/// Window of the exponential-decay fit of the limit state.
pub const DECAY_WINDOW: (f64, f64) = (2.0, 8.0);
const DECAY_MIN_R_SQUARED: f64 = 0.95;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Descending values in (0, 1].
    pub epsilons: Vec<f64>,
    /// Template; ε is replaced per case. `sobolev_order` is the norm order s.
    pub params: PlasmaParams,
    pub family: WellPreparedFamily,
    pub policy: StepPolicy,
}

impl SweepConfig {
    /// Standard family and default parameters on a d-dimensional grid with n
    /// points per axis.
    pub fn standard(dim: usize, n: usize) -> Result<Self> {
        let grid = make_grid(dim, n)?;
        Ok(Self {
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
            params: PlasmaParams::default(),
            family: WellPreparedFamily::standard(&grid),
            policy: StepPolicy::default(),
        })
    }

    /// d = 1, n = 128.
    pub fn desk_default() -> Result<Self> {
        Self::standard(1, 128)
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.family.grid()
    }

    pub fn sobolev_order(&self) -> u32 {
        self.params.sobolev_order
    }

    /// Everything a single case needs.
    pub fn validate_case(&self, epsilon: f64) -> Result<()> {
        self.policy.validate()?;
        self.family.validate()?;
        self.params
            .with_epsilon(epsilon)
            .validate(self.grid().dim())
    }

    /// Case validity for every ε plus at least three distinct values.
    pub fn validate(&self) -> Result<()> {
        for &eps in &self.epsilons {
            self.validate_case(eps)?;
        }
        let mut distinct = self.epsilons.clone();
        distinct.sort_by(|a, b| b.total_cmp(a));
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::Config(format!(
                "a sweep needs at least 3 distinct epsilon values, got {}",
                distinct.len()
            )));
        }
        Ok(())
    }
}

/// The ε-independent unipolar trajectory and the limiting ion profiles
/// along it.
#[derive(Clone, Debug)]
pub struct LimitRun {
    pub trajectory: Trajectory,
    pub states: Vec<UepState>,
    pub profiles: Vec<ProfileState>,
}

impl LimitRun {
    pub fn times(&self) -> Vec<f64> {
        self.trajectory.times()
    }

    /// ‖ρ̄_e − 1‖_s + ‖ū_e‖_s at every sample.
    pub fn deviation(&self, order: u32) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| scalar_norm(&s.rho_e.map(|r| r - 1.0), order) + vector_norm(&s.u_e, order))
            .collect()
    }

    /// Fit of log(deviation) against t over `window`; the slope is minus the
    /// observed decay rate.
    pub fn decay_fit(&self, order: u32, window: (f64, f64)) -> Result<RateFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .times()
            .into_iter()
            .zip(self.deviation(order))
            .filter(|(t, _)| *t >= window.0 - 1e-12 && *t <= window.1 + 1e-12)
            .map(|(t, d)| {
                if d > 0.0 {
                    Ok((t, d.ln()))
                } else {
                    Err(Error::LogDomain { eps: t, value: d })
                }
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        linear_fit(&xs, &ys)
    }
}

/// Integrates the unipolar limit and solves the ion profiles along it.
pub fn solve_limit(config: &SweepConfig) -> Result<LimitRun> {
    config.policy.validate()?;
    let data = well_prepared_data(&config.family, 1.0, config.sobolev_order())?;
    let model = Unipolar {
        law: config.params.electron_law,
    };
    let trajectory = integrate(&model, &data.uep.into(), &config.policy)?;
    let states = trajectory
        .samples
        .iter()
        .map(|s| UepState::try_from(s.state.clone()))
        .collect::<Result<Vec<_>>>()?;
    let profiles = solve_profiles(&trajectory, &config.family)?;
    Ok(LimitRun {
        trajectory,
        states,
        profiles,
    })
}

/// ū_i and ρ̄¹_i along a stored unipolar trajectory, starting from b_i and a_i.
pub fn solve_profiles(
    trajectory: &Trajectory,
    family: &WellPreparedFamily,
) -> Result<Vec<ProfileState>> {
    let times = trajectory.times();
    let fields: Vec<VectorField> = trajectory.samples.iter().map(|s| s.e.clone()).collect();
    let u_bar = solve_ubar_i(&times, &fields, &family.b_i)?;
    let rho1 = solve_rho_i1(&times, &u_bar, &family.a_i)?;
    Ok(u_bar
        .into_iter()
        .zip(rho1)
        .map(|(u_bar_i, rho_bar_i1)| ProfileState {
            u_bar_i,
            rho_bar_i1,
        })
        .collect())
}

/// One ε case, solving the limit from scratch.
pub fn run_case(epsilon: f64, config: &SweepConfig) -> Result<RunRecord> {
    let limit = solve_limit(config).map_err(|e| case_error(epsilon, e))?;
    run_case_with_limit(epsilon, config, &limit)
}

fn case_error(eps: f64, e: Error) -> Error {
    match e {
        Error::Case { .. } => e,
        other => Error::Case {
            eps,
            source: Box::new(other),
        },
    }
}

/// Stream function, flux and constraint defect of one species.
struct StreamParts {
    psi: VectorField,
    flux: VectorField,
    defect: f64,
}

fn stream_parts(
    species: StreamSpecies,
    smp: &CoupledSample,
    err: &crate::limits::ErrorVars,
    eps: f64,
) -> Result<StreamParts> {
    let z = stream_source(species, err, &smp.profile, eps);
    let psi = stream_function(&z)?;
    let defect = (&divergence(&psi) + &z).l2_norm();
    let flux = stream_flux(species, &smp.bep, &smp.uep, err, &smp.profile, eps);
    Ok(StreamParts { psi, flux, defect })
}

/// One ε case against a precomputed limit.
pub fn run_case_with_limit(
    epsilon: f64,
    config: &SweepConfig,
    limit: &LimitRun,
) -> Result<RunRecord> {
    run_case_with_trajectory(epsilon, config, limit).map(|(record, _)| record)
}

/// One ε case against a precomputed limit, also returning the bipolar trajectory.
pub fn run_case_with_trajectory(
    epsilon: f64,
    config: &SweepConfig,
    limit: &LimitRun,
) -> Result<(RunRecord, Trajectory)> {
    run_case_inner(epsilon, config, limit).map_err(|e| case_error(epsilon, e))
}

fn run_case_inner(
    epsilon: f64,
    config: &SweepConfig,
    limit: &LimitRun,
) -> Result<(RunRecord, Trajectory)> {
    config.validate_case(epsilon)?;
    let params = config.params.with_epsilon(epsilon);
    let s = config.sobolev_order();
    let data = well_prepared_data(&config.family, epsilon, s)?;
    let model = Bipolar { params };
    let traj = integrate(&model, &data.bep.into(), &config.policy)?;
    if traj.times() != limit.times() {
        return Err(Error::Shape(
            "bipolar and limit trajectories are sampled at different times".into(),
        ));
    }

    let per_sample: Vec<(SampleRow, [StreamParts; 2])> = traj
        .samples
        .par_iter()
        .enumerate()
        .map(|(k, smp)| {
            let at = |e: Error| e.at_time(smp.t);
            let bep = BepState::try_from(smp.state.clone()).map_err(at)?;
            let coupled = CoupledSample {
                t: smp.t,
                bep,
                grad_phi: smp.e.clone(),
                uep: limit.states[k].clone(),
                grad_phi_bar: limit.trajectory.samples[k].e.clone(),
                profile: limit.profiles[k].clone(),
            };
            let err = coupled.error_vars(epsilon).map_err(at)?;
            let norms = err.norms_squared(s - 1);
            let energy = energy_report_with_field(&coupled.bep, &coupled.grad_phi, &params);
            let ion = stream_parts(StreamSpecies::Ion, &coupled, &err, epsilon).map_err(at)?;
            let electron =
                stream_parts(StreamSpecies::Electron, &coupled, &err, epsilon).map_err(at)?;
            let uep = &coupled.uep;
            let row = SampleRow {
                t: smp.t,
                e_total: energy.e_total,
                d_dissip: energy.d_dissip,
                entropy_e: energy.entropy_e,
                entropy_d: energy.entropy_d,
                error_dissipation: norms.dissipation(),
                n_i: norms.n_i.sqrt(),
                n_e: norms.n_e.sqrt(),
                w_e: norms.w_e.sqrt(),
                f: norms.f.sqrt(),
                u_i: vector_norm(&coupled.bep.u_i, s - 1),
                mass_i: energy.mass_i,
                mass_e: energy.mass_e,
                charge: energy.charge,
                stream_defect_i: ion.defect,
                stream_defect_e: electron.defect,
                limit_deviation: scalar_norm(&uep.rho_e.map(|r| r - 1.0), s)
                    + vector_norm(&uep.u_e, s),
            };
            Ok((row, [ion, electron]))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<SampleRow> = per_sample.iter().map(|(r, _)| *r).collect();
    let entropy = balance_residual(
        &rows
            .iter()
            .map(|r| (r.t, r.entropy_e, r.entropy_d))
            .collect::<Vec<_>>(),
    );
    let intervals: Vec<IntervalRow> = per_sample
        .windows(2)
        .zip(entropy)
        .map(|(w, entropy_residual)| {
            let (r0, [i0, e0]) = &w[0];
            let (r1, [i1, e1]) = &w[1];
            let dt = r1.t - r0.t;
            IntervalRow {
                t0: r0.t,
                t1: r1.t,
                entropy_residual,
                stream_residual_i: stream_residual_from_parts(
                    dt, &i0.psi, &i0.flux, &i1.psi, &i1.flux,
                ),
                stream_residual_e: stream_residual_from_parts(
                    dt, &e0.psi, &e0.flux, &e1.psi, &e1.flux,
                ),
            }
        })
        .collect();
    let summary = record::summarize(&rows, &intervals);
    let record = RunRecord {
        epsilon,
        rows,
        intervals,
        summary,
    };
    if record
        .rows
        .iter()
        .any(|r| r.values().iter().any(|v| !v.is_finite()))
    {
        return Err(Error::UnstableState("non-finite diagnostic".into()));
    }
    Ok((record, traj))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "error", rename_all = "snake_case")]
pub enum CaseStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub epsilon: f64,
    #[serde(flatten)]
    pub status: CaseStatus,
}

/// Sweep-level results: per-case status, rate fits and pass flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cases: Vec<CaseReport>,
    /// Some case failed.
    pub partial: bool,
    /// The family is the equilibrium; fits are skipped.
    pub all_zero: bool,
    /// Keys `sup_<column>` and `int_sq_<column>` over the error-norm columns.
    pub fits: BTreeMap<String, RateFit>,
    /// Observed decay of the limit state over the decay window.
    pub limit_decay: Option<RateFit>,
    /// Per-ε max_t 𝓔(t)/𝓔(0).
    pub energy_ratios: Vec<(f64, Option<f64>)>,
    pub flags: BTreeMap<String, bool>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        !self.partial && self.flags.values().all(|&f| f)
    }
}

fn rate_thresholds(column: &str) -> (f64, f64) {
    if column == "u_i" {
        ION_VELOCITY_RATES
    } else {
        ELECTRON_RATES
    }
}

/// Runs every ε case (in parallel) against one shared limit run.
pub fn run_sweep(config: &SweepConfig) -> Result<(Vec<RunRecord>, SweepReport)> {
    config.validate()?;
    let limit = solve_limit(config)?;
    let results: Vec<Result<RunRecord>> = config
        .epsilons
        .par_iter()
        .map(|&eps| run_case_with_limit(eps, config, &limit))
        .collect();

    let mut report = SweepReport {
        all_zero: config.family.is_zero(),
        ..SweepReport::default()
    };
    let mut records = Vec::new();
    for (&eps, res) in config.epsilons.iter().zip(results) {
        let status = match res {
            Ok(r) => {
                records.push(r);
                CaseStatus::Ok
            }
            Err(e) => CaseStatus::Failed(e.to_string()),
        };
        report.cases.push(CaseReport {
            epsilon: eps,
            status,
        });
    }
    report.partial = report.cases.iter().any(|c| c.status != CaseStatus::Ok);
    assemble_report(config, &limit, &records, &mut report);
    Ok((records, report))
}

fn assemble_report(
    config: &SweepConfig,
    limit: &LimitRun,
    records: &[RunRecord],
    report: &mut SweepReport,
) {
    let s = config.sobolev_order();
    let flags = &mut report.flags;

    if !report.all_zero && records.len() >= 3 {
        for col in ERROR_NORM_COLUMNS {
            let (sup_min, int_min) = rate_thresholds(col);
            let sup: Vec<_> = records
                .iter()
                .map(|r| (r.epsilon, r.summary.sup[col]))
                .collect();
            let int: Vec<_> = records
                .iter()
                .map(|r| (r.epsilon, r.summary.integral_sq[col]))
                .collect();
            for (key, pts, min) in [
                (format!("sup_{col}"), sup, sup_min),
                (format!("int_sq_{col}"), int, int_min),
            ] {
                let ok = match fit_rate(&pts) {
                    Ok(fit) => {
                        let ok = fit.meets(min, MIN_R_SQUARED);
                        report.fits.insert(key.clone(), fit);
                        ok
                    }
                    Err(_) => false,
                };
                flags.insert(format!("rate_{key}"), ok);
            }
        }
    }

    report.energy_ratios = records
        .iter()
        .map(|r| (r.epsilon, r.summary.energy_ratio))
        .collect();
    if !report.all_zero && !records.is_empty() {
        let ratios: Vec<f64> = report
            .energy_ratios
            .iter()
            .map(|(_, r)| r.unwrap_or(f64::INFINITY))
            .collect();
        let bounded = ratios.iter().all(|&r| r <= ENERGY_RATIO_BOUND);
        let by_eps = |pick: fn(f64, f64) -> bool| {
            report
                .energy_ratios
                .iter()
                .fold(None::<(f64, f64)>, |best, &(e, r)| match best {
                    Some((be, _)) if !pick(e, be) => best,
                    _ => Some((e, r.unwrap_or(f64::INFINITY))),
                })
                .map_or(f64::INFINITY, |(_, r)| r)
        };
        let smallest = by_eps(|e, be| e < be);
        let largest = by_eps(|e, be| e > be);
        flags.insert(
            "uniform_energy_bound".into(),
            bounded && smallest <= ENERGY_RATIO_TREND * largest,
        );
    }

    let b_norm = vector_norm(&config.family.b_i, s - 1);
    flags.insert(
        "ion_velocity_smallness".into(),
        records.iter().all(|r| {
            r.summary.sup["u_i"]
                <= ION_VELOCITY_FACTOR * r.epsilon * r.epsilon * b_norm * (1.0 + 1e-12)
        }),
    );
    flags.insert(
        "conservation".into(),
        records.iter().all(|r| {
            r.summary.mass_drift_i < CONSERVATION_TOL
                && r.summary.mass_drift_e < CONSERVATION_TOL
                && r.summary.charge_max < CONSERVATION_TOL
        }),
    );

    if !report.all_zero && config.policy.t_end >= DECAY_WINDOW.1 - 1e-12 {
        let fit = limit.decay_fit(s, DECAY_WINDOW).ok();
        flags.insert(
            "limit_decay".into(),
            fit.is_some_and(|f| f.slope < 0.0 && f.r_squared >= DECAY_MIN_R_SQUARED),
        );
        report.limit_decay = fit;
    }
}
