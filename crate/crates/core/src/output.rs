//! Machine-readable artifacts: CSV payoff surfaces, TOML equilibrium and
//! discord reports, and the 12-significant-digit number format they share.

use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

use crate::discord::DiscordResult;
use crate::equilibrium::{CriticalPoint, EquilibriumReport, NashClass};
use crate::game::{AngleName, GameInstance, PayoffSurface, Quantity};

pub const SIGNIFICANT_DIGITS: i32 = 12;
/// Reports list at most this many critical points, equilibria first.
pub const MAX_LISTED_POINTS: usize = 200;
/// Report values smaller than this in magnitude are written as 0.
pub const REPORT_NOISE_FLOOR: f64 = 1e-15;

/// Decimal rendering with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// `v` rounded to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    format_sig(v).parse().unwrap_or(v)
}

fn report_value(v: f64) -> f64 {
    if v.abs() < REPORT_NOISE_FLOOR {
        0.0
    } else {
        round_sig(v)
    }
}

/// Two swept angles, two held fixed, and the quantity sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub axis1: AngleName,
    pub axis2: AngleName,
    pub fixed: [(AngleName, f64); 2],
    pub quantity: Quantity,
    pub resolution: usize,
    /// Row-major: `values[i * resolution + j]` at (axis1_i, axis2_j).
    pub values: Vec<f64>,
}

/// Sample points along one axis: `resolution` evenly spaced angles over [0, 2π].
pub fn axis_samples(resolution: usize) -> Vec<f64> {
    match resolution {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| TAU * i as f64 / (n - 1) as f64).collect(),
    }
}

impl SurfaceGrid {
    pub fn compute(
        game: &GameInstance,
        quantity: Quantity,
        axes: (AngleName, AngleName),
        fixed: [(AngleName, f64); 2],
        resolution: usize,
    ) -> Self {
        let surface = PayoffSurface::new(game);
        let samples = axis_samples(resolution);
        let mut angles = [0.0; 4];
        for (name, value) in fixed {
            angles[name.index()] = value;
        }
        let mut values = Vec::with_capacity(resolution * resolution);
        for &u in &samples {
            for &v in &samples {
                angles[axes.0.index()] = u;
                angles[axes.1.index()] = v;
                values.push(surface.eval(quantity, &angles));
            }
        }
        Self {
            axis1: axes.0,
            axis2: axes.1,
            fixed,
            quantity,
            resolution,
            values,
        }
    }

    pub fn axis_values(&self) -> Vec<f64> {
        axis_samples(self.resolution)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["axis1", "axis2", "value"])?;
        let samples = self.axis_values();
        for (i, &u) in samples.iter().enumerate() {
            for (j, &v) in samples.iter().enumerate() {
                let value = self.values[i * self.resolution + j];
                w.write_record([format_sig(u), format_sig(v), format_sig(value)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct PointDoc {
    theta_a: f64,
    theta_a_prime: f64,
    theta_b: f64,
    theta_b_prime: f64,
    classification: &'static str,
    hessian_class: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
    jacobian_norm: f64,
    hessian_diag: [f64; 4],
    hessian_coupling: f64,
    payoff_a: f64,
    payoff_b: f64,
}

impl From<&CriticalPoint> for PointDoc {
    fn from(p: &CriticalPoint) -> Self {
        let [a, ap, b, bp] = p.angles().map(report_value);
        Self {
            theta_a: a,
            theta_a_prime: ap,
            theta_b: b,
            theta_b_prime: bp,
            classification: p.classification.as_str(),
            hessian_class: p.hessian_class.as_str(),
            verified: p.verified,
            jacobian_norm: report_value(p.jacobian_norm),
            hessian_diag: p.hessian_diag.map(report_value),
            hessian_coupling: report_value(p.coupling()),
            payoff_a: report_value(p.payoff_a),
            payoff_b: report_value(p.payoff_b),
        }
    }
}

#[derive(Debug, Serialize)]
struct ReportDoc<'a> {
    description: &'a str,
    verdict: &'static str,
    flat_surface: bool,
    resolution: usize,
    grid_points: usize,
    seeds: usize,
    strict_nash_count: usize,
    weak_nash_count: usize,
    critical_points_total: usize,
    critical_points_listed: usize,
    critical_points: Vec<PointDoc>,
}

fn rank(c: NashClass) -> u8 {
    match c {
        NashClass::StrictNash => 0,
        NashClass::WeakNash => 1,
        NashClass::NotNash => 2,
    }
}

/// TOML document for an equilibrium report.
pub fn report_to_toml(report: &EquilibriumReport) -> String {
    let mut ordered: Vec<&CriticalPoint> = report.critical_points.iter().collect();
    ordered.sort_by_key(|p| rank(p.classification));
    let listed: Vec<PointDoc> = ordered.into_iter().take(MAX_LISTED_POINTS).map(PointDoc::from).collect();
    let count = |c| report.critical_points.iter().filter(|p| p.classification == c).count();
    let doc = ReportDoc {
        description: &report.description,
        verdict: report.verdict.as_str(),
        flat_surface: report.flat_surface,
        resolution: report.resolution,
        grid_points: report.grid_points,
        seeds: report.seeds,
        strict_nash_count: count(NashClass::StrictNash),
        weak_nash_count: count(NashClass::WeakNash),
        critical_points_total: report.critical_points.len(),
        critical_points_listed: listed.len(),
        critical_points: listed,
    };
    toml::to_string(&doc).expect("report fields are TOML-representable")
}

#[derive(Debug, Serialize)]
struct DiscordDoc<'a> {
    state: &'a str,
    orientation: &'static str,
    discord: f64,
    optimal_theta: f64,
    optimal_phi: f64,
    mutual_information: f64,
    j_value: f64,
}

pub fn discord_to_toml(state: &str, orientation: &'static str, r: &DiscordResult) -> String {
    let doc = DiscordDoc {
        state,
        orientation,
        discord: report_value(r.discord),
        optimal_theta: report_value(r.optimal_theta.radians()),
        optimal_phi: report_value(r.optimal_phi),
        mutual_information: report_value(r.mutual_information),
        j_value: report_value(r.j_value),
    };
    toml::to_string(&doc).expect("discord fields are TOML-representable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_sig(-0.000123456789012345), "-0.000123456789012");
        assert_eq!(format_sig(123456789.123456), "123456789.123");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-1e-20), "-0.00000000000000000001");
        assert_eq!(format_sig(1e15), "1000000000000000");
    }

    #[test]
    fn round_trip() {
        assert_eq!(round_sig(2.0 / 3.0), 0.666666666667);
    }

    #[test]
    fn axis_includes_endpoints() {
        let a = axis_samples(5);
        assert_eq!(a.len(), 5);
        assert_eq!(a[0], 0.0);
        assert!((a[4] - TAU).abs() < 1e-15);
    }
}
