//! Condition-number sweeps over the corner opening angle.
//!
//! `κ₂(ω)` is sampled on a uniform grid; strict local maxima at least ten
//! times the median are refined by golden-section search on `κ` inside the
//! bracket formed by their grid neighbours. A peak is *confirmed* once `κ`
//! reaches the instability threshold and *suspected* when the bracket falls
//! below the width floor (or the round limit) first.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::contour::Contour;
use crate::error::{invalid, Error, Result};
use crate::nystrom::{condition_of, ConditionMethod};

/// Built-in curve with corners of a single opening angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    L1,
    L2,
}

impl Curve {
    pub fn build(self, omega: f64) -> Result<Contour> {
        match self {
            Curve::L1 => Contour::curve_l1(omega),
            Curve::L2 => Contour::curve_l2(omega),
        }
    }

    pub fn corner_count(self) -> usize {
        match self {
            Curve::L1 => 1,
            Curve::L2 => 2,
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curve::L1 => "l1",
            Curve::L2 => "l2",
        })
    }
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Curve::L1),
            "l2" => Ok(Curve::L2),
            other => invalid(format!("unknown sweep curve {other:?} (expected l1 or l2)")),
        }
    }
}

/// Golden-section step: the new point sits this fraction into the larger side.
const GOLDEN: f64 = 0.381_966_011_250_105_2;

/// Peaks must exceed the median sample by this factor.
pub const PEAK_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub curve: Curve,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub step: f64,
    pub n: usize,
    pub d: usize,
    pub kappa_star: f64,
    pub width_floor: f64,
    pub max_rounds: usize,
    pub method: ConditionMethod,
}

impl SweepConfig {
    /// Full range `[0.1π, 1.9π]` with step `0.001π`, `n = 128`, `d = 16`.
    pub fn new(curve: Curve) -> Self {
        Self {
            curve,
            omega_lo: 0.1 * PI,
            omega_hi: 1.9 * PI,
            step: 0.001 * PI,
            n: 128,
            d: 16,
            kappa_star: 1e16,
            width_floor: 1e-6 * PI,
            max_rounds: 40,
            method: ConditionMethod::Lanczos,
        }
    }

    /// The coarser `0.005π` grid.
    pub fn desk(curve: Curve) -> Self {
        Self { step: 0.005 * PI, ..Self::new(curve) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_lo > 0.0 && self.omega_lo < self.omega_hi && self.omega_hi < TAU) {
            return invalid(format!("angle range [{}, {}] must satisfy 0 < lo < hi < 2pi", self.omega_lo, self.omega_hi));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return invalid("step must be positive");
        }
        if self.n == 0 || self.n % self.curve.corner_count() != 0 {
            return invalid(format!("n = {} must be a positive multiple of {}", self.n, self.curve.corner_count()));
        }
        if self.d == 0 {
            return invalid("d must be positive");
        }
        if !(self.kappa_star > 1.0) || !(self.width_floor > 0.0) {
            return invalid("kappa threshold must exceed 1 and the width floor must be positive");
        }
        Ok(())
    }

    /// Grid `ω_k = lo + k·step`, up to and including `hi` (within a 1e-9 step).
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.omega_hi - self.omega_lo) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.omega_lo + k as f64 * self.step).collect()
    }
}

fn serialize_kappa<S: Serializer>(k: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if k.is_finite() {
        s.serialize_f64(*k)
    } else {
        s.serialize_str("inf")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub omega: f64,
    #[serde(serialize_with = "serialize_kappa")]
    pub kappa: f64,
}

/// Bracket `[lo, hi]` with its best point after one refinement round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketStep {
    pub lo: f64,
    pub hi: f64,
    pub best: f64,
    #[serde(serialize_with = "serialize_kappa")]
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakStatus {
    Confirmed,
    Suspected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub omega: f64,
    pub omega_over_pi: f64,
    #[serde(serialize_with = "serialize_kappa")]
    pub kappa_peak: f64,
    pub status: PeakStatus,
    /// Final bracket, in units of π.
    pub bracket: (f64, f64),
    pub trace: Vec<BracketStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub samples: Vec<Sample>,
    pub peaks: Vec<Peak>,
    pub wall_time_s: f64,
}

impl SweepReport {
    /// Peak locations in units of π.
    pub fn peak_angles_over_pi(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.omega_over_pi).collect()
    }
}

/// `κ₂` of the Nyström matrix on `curve(ω)`.
pub fn kappa_at(curve: Curve, omega: f64, n: usize, d: usize, method: ConditionMethod) -> Result<f64> {
    condition_of(&curve.build(omega)?, n, d, method)
}

/// [`kappa_at`] with a singular system mapped to `+∞`.
fn kappa_or_inf(config: &SweepConfig, omega: f64) -> Result<f64> {
    match kappa_at(config.curve, omega, config.n, config.d, config.method) {
        Err(Error::SingularMatrix { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Indices of strict interior local maxima with `κ ≥ PEAK_FACTOR · median`.
pub fn find_peaks(samples: &[Sample]) -> Vec<usize> {
    if samples.len() < 3 {
        return Vec::new();
    }
    let kappas: Vec<f64> = samples.iter().map(|s| s.kappa).collect();
    let threshold = PEAK_FACTOR * median(&kappas);
    (1..samples.len() - 1)
        .filter(|&i| kappas[i] > kappas[i - 1] && kappas[i] > kappas[i + 1] && kappas[i] >= threshold)
        .collect()
}

fn status_of(kappa: f64, config: &SweepConfig) -> Option<PeakStatus> {
    (kappa >= config.kappa_star).then_some(PeakStatus::Confirmed)
}

/// Golden-section maximization of `κ` in `[lo, hi]` starting from the interior
/// point `best`. Every round evaluates one new point and strictly shrinks the
/// bracket.
fn refine(config: &SweepConfig, mut lo: f64, mut hi: f64, mut best: f64, mut kappa: f64) -> Result<Peak> {
    let mut trace = Vec::new();
    let mut status = status_of(kappa, config);
    let mut rounds = 0;
    while status.is_none() {
        if hi - lo < config.width_floor || rounds >= config.max_rounds {
            status = Some(PeakStatus::Suspected);
            break;
        }
        let u = if hi - best > best - lo { best + GOLDEN * (hi - best) } else { best - GOLDEN * (best - lo) };
        let ku = kappa_or_inf(config, u)?;
        if ku > kappa {
            if u > best {
                lo = best;
            } else {
                hi = best;
            }
            best = u;
            kappa = ku;
        } else if u > best {
            hi = u;
        } else {
            lo = u;
        }
        rounds += 1;
        trace.push(BracketStep { lo, hi, best, kappa });
        status = status_of(kappa, config);
    }
    Ok(Peak {
        omega: best,
        omega_over_pi: best / PI,
        kappa_peak: kappa,
        status: status.unwrap(),
        bracket: (lo / PI, hi / PI),
        trace,
    })
}

/// Samples the grid, detects peaks and refines each one. Runs on the current
/// rayon pool; results are reduced in angle order, so they do not depend on
/// the number of threads.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let start = Instant::now();
    let grid = config.grid();
    let kappas: Vec<f64> = grid.par_iter().map(|&w| kappa_or_inf(config, w)).collect::<Result<_>>()?;
    let samples: Vec<Sample> = grid.iter().zip(kappas).map(|(&omega, kappa)| Sample { omega, kappa }).collect();
    let peaks = find_peaks(&samples)
        .into_par_iter()
        .map(|i| refine(config, samples[i - 1].omega, samples[i + 1].omega, samples[i].omega, samples[i].kappa))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { config: config.clone(), samples, peaks, wall_time_s: start.elapsed().as_secs_f64() })
}

/// CSV `omega_over_pi,kappa` of the grid samples; infinite `κ` is written as `inf`.
pub fn write_samples_csv<W: Write>(samples: &[Sample], mut out: W) -> std::io::Result<()> {
    writeln!(out, "omega_over_pi,kappa")?;
    for s in samples {
        writeln!(out, "{:.16e},{:.16e}", s.omega / PI, s.kappa)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(kappas: &[f64]) -> Vec<Sample> {
        kappas.iter().enumerate().map(|(i, &kappa)| Sample { omega: 0.1 * (i + 1) as f64, kappa }).collect()
    }

    #[test]
    fn grid_covers_range() {
        let mut c = SweepConfig::desk(Curve::L1);
        assert_eq!(c.grid().len(), 361);
        c.omega_lo = 0.2 * PI;
        c.omega_hi = 0.3 * PI;
        c.step = 0.002 * PI;
        let g = c.grid();
        assert_eq!(g.len(), 51);
        assert!((g[50] - 0.3 * PI).abs() < 1e-12);
        assert_eq!(SweepConfig::new(Curve::L2).grid().len(), 1801);
    }

    #[test]
    fn config_validation() {
        let ok = SweepConfig::desk(Curve::L2);
        assert!(ok.validate().is_ok());
        assert!(SweepConfig { omega_lo: 0.0, ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { omega_hi: 7.0, ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { omega_lo: 3.0, omega_hi: 2.0, ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { step: 0.0, ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { n: 127, ..ok.clone() }.validate().is_err());
        assert!(SweepConfig { n: 127, curve: Curve::L1, ..ok }.validate().is_ok());
    }

    #[test]
    fn peak_detection() {
        assert_eq!(find_peaks(&samples(&[1.0, 1.0, 50.0, 1.0, 1.0, 2.0, 1.0])), vec![2]);
        // a local maximum below ten times the median is noise
        assert!(find_peaks(&samples(&[1.0, 9.0, 1.0, 1.0])).is_empty());
        // plateaus are not strict maxima
        assert!(find_peaks(&samples(&[1.0, 50.0, 50.0, 1.0])).is_empty());
        assert_eq!(find_peaks(&samples(&[1.0, f64::INFINITY, 1.0])), vec![1]);
        assert!(find_peaks(&samples(&[100.0, 1.0])).is_empty());
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }

    #[test]
    fn curve_names_round_trip() {
        for c in [Curve::L1, Curve::L2] {
            assert_eq!(c.to_string().parse::<Curve>().unwrap(), c);
        }
        assert!("ellipse".parse::<Curve>().is_err());
    }

    #[test]
    fn kappa_is_moderate_away_from_critical_angles() {
        let k = kappa_at(Curve::L1, 0.5 * PI, 64, 8, ConditionMethod::Svd).unwrap();
        assert!(k.is_finite() && k < 1e3, "{k}");
        let k = kappa_at(Curve::L1, PI, 64, 8, ConditionMethod::Svd).unwrap();
        assert!(k.is_finite() && k < 1e3, "{k}");
    }

    #[test]
    fn samples_csv_format() {
        let mut out = Vec::new();
        write_samples_csv(&[Sample { omega: 0.5 * PI, kappa: 2.0 }, Sample { omega: PI, kappa: f64::INFINITY }], &mut out)
            .unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "omega_over_pi,kappa\n5.0000000000000000e-1,2.0000000000000000e0\n1.0000000000000000e0,inf\n"
        );
    }

    #[test]
    fn infinite_kappa_serializes_as_string() {
        let s = serde_json::to_string(&Sample { omega: 1.0, kappa: f64::INFINITY }).unwrap();
        assert_eq!(s, r#"{"omega":1.0,"kappa":"inf"}"#);
    }
}
