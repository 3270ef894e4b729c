use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Scalar diagnostics at one sample time. Norms are unsquared and taken at
/// Sobolev order s − 1 unless noted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub t: f64,
    pub e_total: f64,
    pub d_dissip: f64,
    pub entropy_e: f64,
    pub entropy_d: f64,
    pub error_dissipation: f64,
    pub n_i: f64,
    pub n_e: f64,
    pub w_e: f64,
    pub f: f64,
    pub u_i: f64,
    pub mass_i: f64,
    pub mass_e: f64,
    pub charge: f64,
    /// ‖div ψ_i + z_i‖₀
    pub stream_defect_i: f64,
    /// ‖div ψ_e + z_e‖₀
    pub stream_defect_e: f64,
    /// ‖ρ̄_e − 1‖_s + ‖ū_e‖_s of the limit state
    pub limit_deviation: f64,
}

pub const SAMPLE_COLUMNS: [&str; 17] = [
    "t",
    "e_total",
    "d_dissip",
    "entropy_e",
    "entropy_d",
    "error_dissipation",
    "n_i",
    "n_e",
    "w_e",
    "f",
    "u_i",
    "mass_i",
    "mass_e",
    "charge",
    "stream_defect_i",
    "stream_defect_e",
    "limit_deviation",
];

/// Columns whose squares are also integrated in time.
pub const ERROR_NORM_COLUMNS: [&str; 5] = ["n_i", "n_e", "w_e", "f", "u_i"];

impl SampleRow {
    pub fn values(&self) -> [f64; 17] {
        [
            self.t,
            self.e_total,
            self.d_dissip,
            self.entropy_e,
            self.entropy_d,
            self.error_dissipation,
            self.n_i,
            self.n_e,
            self.w_e,
            self.f,
            self.u_i,
            self.mass_i,
            self.mass_e,
            self.charge,
            self.stream_defect_i,
            self.stream_defect_e,
            self.limit_deviation,
        ]
    }

    pub fn from_values(v: &[f64]) -> Option<Self> {
        let v: [f64; 17] = v.try_into().ok()?;
        Some(Self {
            t: v[0],
            e_total: v[1],
            d_dissip: v[2],
            entropy_e: v[3],
            entropy_d: v[4],
            error_dissipation: v[5],
            n_i: v[6],
            n_e: v[7],
            w_e: v[8],
            f: v[9],
            u_i: v[10],
            mass_i: v[11],
            mass_e: v[12],
            charge: v[13],
            stream_defect_i: v[14],
            stream_defect_e: v[15],
            limit_deviation: v[16],
        })
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        let idx = SAMPLE_COLUMNS.iter().position(|&c| c == column)?;
        Some(self.values()[idx])
    }
}

/// Residuals over one interval between consecutive samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub t0: f64,
    pub t1: f64,
    pub entropy_residual: f64,
    pub stream_residual_i: f64,
    pub stream_residual_e: f64,
}

pub const INTERVAL_COLUMNS: [&str; 5] = [
    "t0",
    "t1",
    "entropy_residual",
    "stream_residual_i",
    "stream_residual_e",
];

impl IntervalRow {
    pub fn values(&self) -> [f64; 5] {
        [
            self.t0,
            self.t1,
            self.entropy_residual,
            self.stream_residual_i,
            self.stream_residual_e,
        ]
    }
}

/// Suprema, time integrals and derived ratios of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub sup: BTreeMap<String, f64>,
    pub integral: BTreeMap<String, f64>,
    /// ∫ ‖·‖² dt for the error norms and ‖u_i‖.
    pub integral_sq: BTreeMap<String, f64>,
    /// max_t 𝓔(t)/𝓔(0); absent when 𝓔(0) = 0.
    pub energy_ratio: Option<f64>,
    pub mass_drift_i: f64,
    pub mass_drift_e: f64,
    pub charge_max: f64,
    pub entropy_residual_max: f64,
    pub stream_residual_i_max: f64,
    pub stream_residual_e_max: f64,
    /// Largest one-interval increase of the entropy.
    pub entropy_increase_max: f64,
}

/// One ε case: every sample row, every interval row and the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub epsilon: f64,
    pub rows: Vec<SampleRow>,
    pub intervals: Vec<IntervalRow>,
    pub summary: RunSummary,
}

pub(crate) fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn relative_drift(series: impl Iterator<Item = f64> + Clone) -> f64 {
    let Some(first) = series.clone().next() else {
        return 0.0;
    };
    let scale = first.abs().max(f64::MIN_POSITIVE);
    sup(series.map(|m| (m - first).abs() / scale))
}

pub(crate) fn summarize(rows: &[SampleRow], intervals: &[IntervalRow]) -> RunSummary {
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let mut out = RunSummary::default();
    for (c, name) in SAMPLE_COLUMNS.iter().enumerate().skip(1) {
        let y: Vec<f64> = rows.iter().map(|r| r.values()[c]).collect();
        out.sup.insert(name.to_string(), sup(y.iter().copied()));
        out.integral.insert(name.to_string(), trapezoid(&t, &y));
        if ERROR_NORM_COLUMNS.contains(name) {
            let y2: Vec<f64> = y.iter().map(|v| v * v).collect();
            out.integral_sq.insert(name.to_string(), trapezoid(&t, &y2));
        }
    }
    let e0 = rows.first().map_or(0.0, |r| r.e_total);
    out.energy_ratio = (e0 > 0.0).then(|| sup(rows.iter().map(|r| r.e_total)) / e0);
    out.mass_drift_i = relative_drift(rows.iter().map(|r| r.mass_i));
    out.mass_drift_e = relative_drift(rows.iter().map(|r| r.mass_e));
    out.charge_max = sup(rows.iter().map(|r| r.charge.abs()));
    out.entropy_residual_max = sup(intervals.iter().map(|r| r.entropy_residual.abs()));
    out.stream_residual_i_max = sup(intervals.iter().map(|r| r.stream_residual_i));
    out.stream_residual_e_max = sup(intervals.iter().map(|r| r.stream_residual_e));
    out.entropy_increase_max = sup(rows.windows(2).map(|w| w[1].entropy_e - w[0].entropy_e));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        let row = SampleRow {
            t: 1.5,
            w_e: 0.25,
            limit_deviation: 3.0,
            ..SampleRow::default()
        };
        assert_eq!(SampleRow::from_values(&row.values()), Some(row));
        assert_eq!(row.get("w_e"), Some(0.25));
        assert_eq!(row.get("nope"), None);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let t = [0.0, 0.5, 1.0, 2.0];
        let y: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &y) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn suprema_dominate_samples() {
        let rows: Vec<SampleRow> = (0..5)
            .map(|k| SampleRow {
                t: k as f64,
                e_total: 1.0 + (k as f64 - 2.0).powi(2),
                n_e: 0.1 * k as f64,
                mass_i: 2.0,
                mass_e: 2.0,
                ..SampleRow::default()
            })
            .collect();
        let s = summarize(&rows, &[]);
        for r in &rows {
            for (c, v) in SAMPLE_COLUMNS.iter().zip(r.values()).skip(1) {
                assert!(s.sup[*c] >= v);
            }
        }
        assert_eq!(s.sup["e_total"], 5.0);
        assert_eq!(s.energy_ratio, Some(1.0));
        assert_eq!(s.mass_drift_i, 0.0);
        assert!((s.integral_sq["n_e"] - 0.22).abs() < 1e-14);
    }
}
