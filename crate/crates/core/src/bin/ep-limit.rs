use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ep_limit::checks::CheckRegistry;
use ep_limit::harness::io::{
    bin_path, read_trajectory, write_csv, write_fields, write_json, write_rate_plots, write_run,
    write_trajectory,
};
use ep_limit::harness::{
    run_case_with_trajectory, run_sweep, solve_limit, solve_profiles, FamilyKind, RunSettings,
};
use ep_limit::models::ModelRegistry;
use ep_limit::spectral::{scalar_norm, vector_norm, ScalarField};
use ep_limit::timestep::{integrate, Trajectory};
use ep_limit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ep-limit",
    version,
    about = "Bipolar Euler-Poisson runs, their unipolar limit and epsilon sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run of the bipolar (with error diagnostics) or unipolar system.
    Simulate(SimulateArgs),
    /// Runs every epsilon of the list and fits convergence rates.
    Sweep(SweepArgs),
    /// Solves the limiting ion profiles along a stored unipolar trajectory.
    Profiles(ProfilesArgs),
    /// Runs the invariant checks.
    Check(CheckArgs),
}

/// Settings shared by every run; each overrides the config file.
#[derive(Args, Clone, Default)]
struct Common {
    /// Plain-text `key = value` file read before the flags are applied.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Spatial dimension (1, 2 or 3).
    #[arg(long)]
    d: Option<usize>,
    /// Grid points per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Sobolev order of the energies.
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    sample_interval: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    gamma_i: Option<f64>,
    #[arg(long)]
    gamma_e: Option<f64>,
    #[arg(long)]
    k_i: Option<f64>,
    #[arg(long)]
    k_e: Option<f64>,
    /// Electron amplitude of the initial family.
    #[arg(long)]
    delta0: Option<f64>,
    /// `standard` or `zero`.
    #[arg(long)]
    family: Option<FamilyArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FamilyArg {
    Standard,
    Zero,
}

#[derive(Args)]
struct SimulateArgs {
    /// Registered model name (`bep` or `uep`).
    #[arg(long)]
    model: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated epsilon values.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Also write gnuplot data and script for the rate figures.
    #[arg(long)]
    emit_plots: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProfilesArgs {
    /// Stem of a unipolar trajectory written by `simulate` (without extension).
    #[arg(long, default_value = "out/uep")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    /// Run only these checks.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// List the registered checks and exit.
    #[arg(long)]
    list: bool,
}

fn settings(common: &Common) -> Result<RunSettings> {
    let mut s = match &common.config {
        Some(path) => RunSettings::from_file(path)?,
        None => RunSettings::default(),
    };
    macro_rules! over {
        ($($field:ident),*) => {$(
            if let Some(v) = common.$field.clone() {
                s.$field = v;
            }
        )*};
    }
    over!(
        eps,
        d,
        n,
        s,
        t_end,
        sample_interval,
        cfl,
        gamma_i,
        gamma_e,
        k_i,
        k_e,
        delta0
    );
    if let Some(f) = common.family {
        s.family = match f {
            FamilyArg::Standard => FamilyKind::Standard,
            FamilyArg::Zero => FamilyKind::Zero,
        };
    }
    Ok(s)
}

fn save_settings(dir: &Path, s: &RunSettings) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("settings.txt"), s.to_text())?;
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut s = settings(&args.common)?;
    if let Some(m) = &args.model {
        s.model = m.clone();
    }
    let out = &args.common.out;
    let config = s.single_config()?;
    let registry = ModelRegistry::default();
    let model = registry.build(&s.model, &config.params.with_epsilon(s.eps))?;
    save_settings(out, &s)?;
    match model.name() {
        "bep" => {
            let limit = solve_limit(&config)?;
            let (record, traj) = run_case_with_trajectory(s.eps, &config, &limit)?;
            let files = write_run(out, &record)?;
            write_trajectory(
                &out.join("uep"),
                &*registry.build("uep", &config.params)?,
                &limit.trajectory,
            )?;
            let last = traj.last();
            let final_only = Trajectory {
                model: traj.model.clone(),
                samples: vec![last.clone()],
            };
            write_trajectory(
                &out.join(format!("bep_final_eps{}", s.eps)),
                model.as_ref(),
                &final_only,
            )?;
            let sm = &record.summary;
            println!(
                "eps = {}: {} samples to t = {}",
                s.eps,
                record.rows.len(),
                last.t
            );
            println!(
                "  max_t E/E(0) = {}",
                sm.energy_ratio.map_or("n/a".into(), |r| format!("{r:.4}"))
            );
            for col in ["n_e", "w_e", "f", "n_i", "u_i"] {
                println!("  sup |{col}|_(s-1) = {:.4e}", sm.sup[col]);
            }
            println!(
                "  mass drift {:.1e} / {:.1e}, max |charge| {:.1e}",
                sm.mass_drift_i, sm.mass_drift_e, sm.charge_max
            );
            println!("wrote {}", files.samples.display());
        }
        _ => {
            let data = ep_limit::limits::well_prepared_data(&config.family, 1.0, s.s)?;
            let traj = integrate(model.as_ref(), &data.uep.into(), &config.policy)?;
            let stem = out.join(model.name());
            write_trajectory(&stem, model.as_ref(), &traj)?;
            let rows: Vec<[f64; 3]> = traj
                .samples
                .iter()
                .map(|smp| {
                    let sp = &smp.state.species[0];
                    [
                        smp.t,
                        scalar_norm(&sp.rho.map(|r| r - 1.0), s.s),
                        vector_norm(&sp.u, s.s),
                    ]
                })
                .collect();
            write_csv(
                &out.join(format!("{}.csv", model.name())),
                &["t", "density_deviation", "velocity_norm"],
                &rows,
            )?;
            println!(
                "{}: {} samples to t = {}, wrote {}",
                model.name(),
                traj.len(),
                traj.last().t,
                bin_path(&stem).display()
            );
        }
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<bool> {
    let mut s = settings(&args.common)?;
    if let Some(list) = &args.eps_list {
        s.eps_list = list.clone();
    }
    let out = &args.common.out;
    let config = s.sweep_config()?;
    save_settings(out, &s)?;
    let (records, report) = run_sweep(&config)?;
    for r in &records {
        write_run(out, r)?;
    }
    write_json(&out.join("sweep.json"), &report)?;
    if args.emit_plots {
        write_rate_plots(out, &records, &report)?;
    }
    for c in &report.cases {
        println!("eps = {}: {:?}", c.epsilon, c.status);
    }
    for (key, fit) in &report.fits {
        println!(
            "  {key:<12} slope {:>6.3}  r2 {:.4}",
            fit.slope, fit.r_squared
        );
    }
    if let Some(f) = report.limit_decay {
        println!("  limit decay slope {:.4}  r2 {:.4}", f.slope, f.r_squared);
    }
    for (flag, ok) in &report.flags {
        println!("  {:<24} {}", flag, if *ok { "pass" } else { "FAIL" });
    }
    println!("wrote {}", out.join("sweep.json").display());
    Ok(report.passed())
}

fn profiles(args: &ProfilesArgs) -> Result<()> {
    let s = settings(&args.common)?;
    let out = &args.common.out;
    let registry = ModelRegistry::default();
    let uep = registry.build("uep", &s.params()?)?;
    let traj = read_trajectory(&args.input, uep.as_ref())?;
    let grid = traj.last().state.grid().clone();
    let mut local = s.clone();
    local.d = grid.dim();
    local.n = grid.points_per_axis();
    let family = local.sweep_config()?.family;
    let profiles = solve_profiles(&traj, &family)?;

    let mut names: Vec<String> = (0..grid.dim()).map(|a| format!("u_bar_i_{a}")).collect();
    names.push("rho_bar_i1".into());
    let frames: Vec<Vec<&ScalarField>> = profiles
        .iter()
        .map(|p| {
            p.u_bar_i
                .components()
                .iter()
                .chain(std::iter::once(&p.rho_bar_i1))
                .collect()
        })
        .collect();
    let stem = out.join("profiles");
    write_fields(&stem, &names, &traj.times(), &frames)?;
    let rows: Vec<[f64; 3]> = traj
        .times()
        .iter()
        .zip(&profiles)
        .map(|(&t, p)| {
            [
                t,
                vector_norm(&p.u_bar_i, s.s),
                scalar_norm(&p.rho_bar_i1, s.s),
            ]
        })
        .collect();
    write_csv(
        &out.join("profiles.csv"),
        &["t", "u_bar_i_norm", "rho_bar_i1_norm"],
        &rows,
    )?;
    println!(
        "{} profile samples to t = {}, wrote {}",
        profiles.len(),
        traj.last().t,
        bin_path(&stem).display()
    );
    Ok(())
}

fn check(args: &CheckArgs) -> Result<bool> {
    let registry = CheckRegistry::default();
    if args.list {
        for name in registry.names() {
            let c = registry.get(name).expect("registered");
            println!("{name:<22} {}", c.description());
        }
        return Ok(true);
    }
    let reports = registry.run(&args.only)?;
    for r in &reports {
        println!(
            "{} {:<22} {} ({:.2} s)",
            if r.passed { "pass" } else { "FAIL" },
            r.name,
            r.detail,
            r.elapsed.as_secs_f64()
        );
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => simulate(&a).map(|_| true),
        Command::Sweep(a) => sweep(&a),
        Command::Profiles(a) => profiles(&a).map(|_| true),
        Command::Check(a) => check(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidParameter(_) => 2,
                _ => 3,
            })
        }
    }
}
