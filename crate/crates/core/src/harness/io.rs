//! CSV series, JSON summaries, binary field files and gnuplot scripts.
//!
//! Field files come in pairs: `<stem>.bin` holds raw little-endian `f64`
//! values and `<stem>.json` describes them. The binary is laid out frame by
//! frame (one frame per time in `times`), each frame field by field in the
//! order of `fields`, and each field as its `n^d` nodal values in row-major
//! order with axis 0 varying slowest. Node `(j_0, .., j_{d-1})` sits at
//! `x_a = j_a · axis_length / n`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{FluidState, PlasmaModel, Species};
use crate::spectral::{make_grid, ScalarField, TorusGrid, VectorField, AXIS_LENGTH};
use crate::timestep::{Sample, Trajectory};

use super::{RunRecord, SweepReport, ERROR_NORM_COLUMNS, INTERVAL_COLUMNS, SAMPLE_COLUMNS};

pub const FIELD_FORMAT: &str = "ep-limit-fields-v1";

/// Writes a header row and then one comma-separated row per entry.
pub fn write_csv<R: AsRef<[f64]>>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Header and rows of a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| {
                    c.trim().parse().map_err(|_| {
                        Error::Config(format!("bad number {c:?} in {}", path.display()))
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

/// Paths written by [`write_run`].
#[derive(Clone, Debug)]
pub struct RunFiles {
    pub samples: PathBuf,
    pub intervals: PathBuf,
    pub summary: PathBuf,
}

#[derive(Serialize)]
struct RunSummaryFile<'a> {
    epsilon: f64,
    samples: usize,
    columns: &'a [&'a str],
    interval_columns: &'a [&'a str],
    #[serde(flatten)]
    summary: &'a super::RunSummary,
}

/// `run_<eps>.csv` (one row per sample), `intervals_<eps>.csv` (one row per
/// pair of consecutive samples) and `run_<eps>.json` (summary).
pub fn write_run(dir: &Path, record: &RunRecord) -> Result<RunFiles> {
    fs::create_dir_all(dir)?;
    let tag = eps_tag(record.epsilon);
    let files = RunFiles {
        samples: dir.join(format!("run_{tag}.csv")),
        intervals: dir.join(format!("intervals_{tag}.csv")),
        summary: dir.join(format!("run_{tag}.json")),
    };
    let rows: Vec<_> = record.rows.iter().map(|r| r.values()).collect();
    write_csv(&files.samples, &SAMPLE_COLUMNS, &rows)?;
    let rows: Vec<_> = record.intervals.iter().map(|r| r.values()).collect();
    write_csv(&files.intervals, &INTERVAL_COLUMNS, &rows)?;
    write_json(
        &files.summary,
        &RunSummaryFile {
            epsilon: record.epsilon,
            samples: record.rows.len(),
            columns: &SAMPLE_COLUMNS,
            interval_columns: &INTERVAL_COLUMNS,
            summary: &record.summary,
        },
    )?;
    Ok(files)
}

/// Sidecar of a binary field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub format: String,
    pub dim: usize,
    pub n: usize,
    pub axis_length: f64,
    pub byte_order: String,
    pub value_type: String,
    pub layout: String,
    pub fields: Vec<String>,
    pub times: Vec<f64>,
}

impl FieldMeta {
    fn new(grid: &TorusGrid, fields: Vec<String>, times: Vec<f64>) -> Self {
        Self {
            format: FIELD_FORMAT.into(),
            dim: grid.dim(),
            n: grid.points_per_axis(),
            axis_length: AXIS_LENGTH,
            byte_order: "little-endian".into(),
            value_type: "f64".into(),
            layout: "frame-major; within a frame field by field; each field n^dim nodal values, \
                     row-major with axis 0 slowest"
                .into(),
            fields,
            times,
        }
    }
}

/// `stem` plus a suffix; stems may themselves contain dots (`eps0.2`).
fn suffixed(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn bin_path(stem: &Path) -> PathBuf {
    suffixed(stem, "bin")
}

pub fn meta_path(stem: &Path) -> PathBuf {
    suffixed(stem, "json")
}

/// Writes `frames[k][f]` (time `times[k]`, field `names[f]`).
pub fn write_fields(
    stem: &Path,
    names: &[String],
    times: &[f64],
    frames: &[Vec<&ScalarField>],
) -> Result<()> {
    if frames.len() != times.len() || frames.iter().any(|f| f.len() != names.len()) {
        return Err(Error::Shape(
            "field file needs one frame per time and one field per name".into(),
        ));
    }
    let grid = frames
        .first()
        .and_then(|f| f.first())
        .map(|f| f.grid().clone())
        .ok_or_else(|| Error::InsufficientData("no fields to write".into()))?;
    if let Some(dir) = stem.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(bin_path(stem))?);
    for frame in frames {
        for field in frame {
            if field.grid().as_ref() != grid.as_ref() {
                return Err(Error::Shape("fields on different grids".into()));
            }
            for v in field.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    write_json(
        &meta_path(stem),
        &FieldMeta::new(&grid, names.to_vec(), times.to_vec()),
    )
}

/// Reads a field file back as `(meta, frames)`.
pub fn read_fields(stem: &Path) -> Result<(FieldMeta, Vec<Vec<ScalarField>>)> {
    let meta: FieldMeta = read_json(&meta_path(stem))?;
    if meta.format != FIELD_FORMAT {
        return Err(Error::Config(format!(
            "unknown field format {:?}",
            meta.format
        )));
    }
    let grid = make_grid(meta.dim, meta.n)?;
    let bytes = fs::read(bin_path(stem))?;
    let per_field = grid.len();
    let want = meta.times.len() * meta.fields.len() * per_field * 8;
    if bytes.len() != want {
        return Err(Error::Shape(format!(
            "{} holds {} bytes, sidecar implies {want}",
            bin_path(stem).display(),
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let frames = values
        .chunks(per_field * meta.fields.len().max(1))
        .take(meta.times.len())
        .map(|frame| {
            frame
                .chunks(per_field)
                .map(|v| ScalarField::from_values(&grid, v.to_vec()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((meta, frames))
}

fn species_field_names(model: &dyn PlasmaModel, dim: usize) -> Vec<String> {
    let mut names = Vec::new();
    for sp in model.species_names() {
        names.push(format!("rho_{sp}"));
        for a in 0..dim {
            names.push(format!("u_{sp}_{a}"));
        }
    }
    names
}

/// Stores every sample state of a trajectory.
pub fn write_trajectory(stem: &Path, model: &dyn PlasmaModel, traj: &Trajectory) -> Result<()> {
    let grid = traj.last().state.grid().clone();
    let frames: Vec<Vec<&ScalarField>> = traj
        .samples
        .iter()
        .map(|s| {
            s.state
                .species
                .iter()
                .flat_map(|sp| std::iter::once(&sp.rho).chain(sp.u.components()))
                .collect()
        })
        .collect();
    write_fields(
        stem,
        &species_field_names(model, grid.dim()),
        &traj.times(),
        &frames,
    )
}

/// Reads a trajectory written by [`write_trajectory`], recomputing each
/// sample's potential with `model`.
pub fn read_trajectory(stem: &Path, model: &dyn PlasmaModel) -> Result<Trajectory> {
    let (meta, frames) = read_fields(stem)?;
    if meta.fields != species_field_names(model, meta.dim) {
        return Err(Error::Config(format!(
            "field file holds {:?}, not a {} trajectory",
            meta.fields,
            model.name()
        )));
    }
    let samples = meta
        .times
        .iter()
        .zip(frames)
        .map(|(&t, frame)| {
            let species = frame
                .chunks(meta.dim + 1)
                .map(|c| Species::new(c[0].clone(), VectorField::from_components(c[1..].to_vec())?))
                .collect::<Result<Vec<_>>>()?;
            let state = FluidState { species };
            let (phi, e) = model.potential(&state)?;
            Ok(Sample { t, state, phi, e })
        })
        .collect::<Result<_>>()?;
    Ok(Trajectory {
        model: model.name().to_string(),
        samples,
    })
}

/// Writes `rates.dat` (ε then the suprema and squared integrals of each error
/// norm) and `rates.gp`, a gnuplot script drawing them on log-log axes.
pub fn write_rate_plots(dir: &Path, records: &[RunRecord], report: &SweepReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut cols = vec!["eps".to_string()];
    cols.extend(ERROR_NORM_COLUMNS.iter().map(|c| format!("sup_{c}")));
    cols.extend(ERROR_NORM_COLUMNS.iter().map(|c| format!("int_sq_{c}")));
    let mut dat = BufWriter::new(fs::File::create(dir.join("rates.dat"))?);
    writeln!(dat, "# {}", cols.join(" "))?;
    for r in records {
        let mut line = vec![format!("{:e}", r.epsilon)];
        line.extend(
            ERROR_NORM_COLUMNS
                .iter()
                .map(|c| format!("{:e}", r.summary.sup[*c])),
        );
        line.extend(
            ERROR_NORM_COLUMNS
                .iter()
                .map(|c| format!("{:e}", r.summary.integral_sq[*c])),
        );
        writeln!(dat, "{}", line.join(" "))?;
    }
    dat.flush()?;

    let mut gp = BufWriter::new(fs::File::create(dir.join("rates.gp"))?);
    writeln!(gp, "set logscale xy")?;
    writeln!(gp, "set key left top")?;
    writeln!(gp, "set xlabel 'epsilon'")?;
    for (panel, offset) in [("sup", 2), ("int_sq", 2 + ERROR_NORM_COLUMNS.len())] {
        writeln!(gp, "set terminal pngcairo size 800,600")?;
        writeln!(gp, "set output 'rates_{panel}.png'")?;
        writeln!(gp, "set ylabel '{panel}'")?;
        let plots: Vec<String> = ERROR_NORM_COLUMNS
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let slope = report
                    .fits
                    .get(&format!("{panel}_{c}"))
                    .map_or(String::new(), |f| format!(" (slope {:.2})", f.slope));
                format!(
                    "'rates.dat' using 1:{} with linespoints title '{c}{slope}'",
                    offset + j
                )
            })
            .collect();
        writeln!(gp, "plot {}", plots.join(", \\\n     "))?;
    }
    gp.flush()?;
    Ok(())
}
