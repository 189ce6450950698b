//! Experiment suites: measured ratios, decay fits and verdicts.
//!
//! The boundedness statements being tested assert existence of constants
//! without giving values, so most verdicts are about stability: a ratio that
//! is bounded in the continuum must not keep growing as the grid is refined.

mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusKind, CorpusSpec};
use crate::error::{Error, Result};
use crate::geometry::WindowFamily;

pub use suites::run_suite_body;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    JnBlo,
    BloBoundedness,
    BetaMaximalBoundedness,
    SawyerLp,
    UniformContinuity,
    VmoPreservation,
    Nesting,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::JnBlo,
        Suite::BloBoundedness,
        Suite::BetaMaximalBoundedness,
        Suite::SawyerLp,
        Suite::UniformContinuity,
        Suite::VmoPreservation,
        Suite::Nesting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::JnBlo => "jn_blo",
            Suite::BloBoundedness => "blo_boundedness",
            Suite::BetaMaximalBoundedness => "beta_maximal_boundedness",
            Suite::SawyerLp => "sawyer_lp",
            Suite::UniformContinuity => "uniform_continuity",
            Suite::VmoPreservation => "vmo_preservation",
            Suite::Nesting => "nesting",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::Parameter(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Parameters of one suite run. Fields a suite does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// Functions under test; their `resolution` is replaced by each entry of
    /// the resolution list for their dimension.
    pub corpus: Vec<CorpusSpec>,
    pub beta: f64,
    /// Second dimension parameter (`β₂` for the maximal operator, the larger
    /// exponent for nesting).
    pub beta2: Option<f64>,
    pub alpha: f64,
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub kappa: Option<f64>,
    /// Resolutions for one-dimensional corpus entries.
    pub resolutions: Vec<u32>,
    /// Resolutions for corpus entries of dimension two and up.
    pub resolutions_2d: Vec<u32>,
    pub family: WindowFamily,
    /// Largest acceptable growth of a ratio per resolution doubling.
    pub growth_guard: f64,
    /// Smallest acceptable `r²` of a decay fit.
    pub r2_min: f64,
    pub seed: u64,
}

fn martingale(seed: u64, dim: usize) -> CorpusSpec {
    CorpusSpec::new(CorpusKind::DyadicMartingale { seed, step: 0.5 }, dim, 0)
}

fn half(dim: usize) -> CorpusSpec {
    let mut hi = vec![1.0; dim];
    hi[0] = 0.5;
    CorpusSpec::new(CorpusKind::Indicator { lo: vec![0.0; dim], hi }, dim, 0)
}

fn sawtooth(frequency: f64, dim: usize) -> CorpusSpec {
    CorpusSpec::new(CorpusKind::Sawtooth { frequency }, dim, 0)
}

fn smoothed(dim: usize) -> CorpusSpec {
    CorpusSpec::new(
        CorpusKind::SmoothedIndicator { lo: vec![0.25; dim], hi: vec![0.5; dim], width: 0.25 },
        dim,
        0,
    )
}

impl ExperimentConfig {
    /// Default configuration of a suite. Seeds of random corpus entries are
    /// derived from `seed`.
    pub fn default_for(suite: Suite, seed: u64) -> Self {
        let base = Self {
            suite,
            corpus: Vec::new(),
            beta: 0.5,
            beta2: None,
            alpha: 0.5,
            p: 1.0,
            lambdas: vec![4.0, 8.0, 16.0, 32.0],
            kappa: None,
            resolutions: vec![4, 5, 6, 7],
            resolutions_2d: vec![2, 3, 4, 5],
            family: WindowFamily::Contained,
            growth_guard: 1.5,
            r2_min: 0.9,
            seed,
        };
        match suite {
            Suite::JnBlo => Self {
                corpus: vec![
                    martingale(seed, 1),
                    martingale(seed + 1, 1),
                    martingale(seed + 2, 1),
                    CorpusSpec::new(CorpusKind::LogAbs, 1, 0),
                    CorpusSpec::new(CorpusKind::Constant { c: 1.0 }, 1, 0),
                ],
                resolutions: vec![6],
                ..base
            },
            Suite::BloBoundedness => Self {
                corpus: vec![
                    half(1),
                    martingale(seed, 1),
                    sawtooth(4.0, 1),
                    CorpusSpec::new(CorpusKind::LogAbs, 1, 0),
                    CorpusSpec::new(CorpusKind::Constant { c: 1.0 }, 1, 0),
                    martingale(seed, 2),
                    half(2),
                ],
                ..base
            },
            Suite::BetaMaximalBoundedness => Self {
                beta2: Some(1.0),
                corpus: vec![
                    half(1),
                    martingale(seed, 1),
                    sawtooth(4.0, 1),
                    martingale(seed, 2),
                    CorpusSpec::new(CorpusKind::Indicator { lo: vec![0.25; 2], hi: vec![0.5; 2] }, 2, 0),
                ],
                resolutions_2d: vec![1, 2, 3, 4],
                ..base
            },
            Suite::SawyerLp => {
                let mut corpus = vec![
                    CorpusSpec::new(CorpusKind::Constant { c: 1.0 }, 1, 0),
                    half(1),
                    CorpusSpec::new(CorpusKind::Constant { c: 0.0 }, 1, 0),
                    CorpusSpec::new(CorpusKind::Constant { c: 1.0 }, 2, 0),
                ];
                corpus.extend(
                    (0..50).map(|i| CorpusSpec::new(CorpusKind::Random { seed: seed + i, low: 0.0, high: 1.0 }, 1, 0)),
                );
                Self { alpha: 0.25, p: 2.0, corpus, ..base }
            }
            Suite::UniformContinuity => Self {
                corpus: vec![half(1), CorpusSpec::new(CorpusKind::LogAbs, 1, 0), martingale(seed, 1), sawtooth(4.0, 1)],
                resolutions: vec![5, 6, 7, 8, 9],
                ..base
            },
            Suite::VmoPreservation => Self {
                alpha: 0.25,
                beta: 0.75,
                corpus: vec![
                    sawtooth(4.0, 1),
                    smoothed(1),
                    CorpusSpec::new(CorpusKind::Constant { c: 1.0 }, 1, 0),
                ],
                resolutions: vec![7],
                ..base
            },
            Suite::Nesting => Self {
                beta: 0.5,
                beta2: Some(1.0),
                corpus: vec![half(1), martingale(seed, 1), sawtooth(4.0, 1), CorpusSpec::new(CorpusKind::LogAbs, 1, 0)],
                resolutions: vec![3, 4, 5, 6],
                ..base
            },
        }
    }

    pub fn resolutions_for(&self, dim: usize) -> &[u32] {
        if dim == 1 {
            &self.resolutions
        } else {
            &self.resolutions_2d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Trivial,
    DivergesAsPredicted,
    Reported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status, detail: detail.into() }
    }

    pub fn check(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self::new(name, if ok { Status::Pass } else { Status::Fail }, detail)
    }
}

/// Log-linear fit `H(t) / H(Q) ≈ c₁ exp(-c₂ t / ‖f‖)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Thresholds divided by the norm.
    pub thresholds: Vec<f64>,
    /// `H({f - essinf > t}) / H(Q)` at each threshold.
    pub contents: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub r_squared: f64,
}

impl DecayFit {
    /// Least-squares fit of `ln H` against `t` over the positive contents.
    /// Needs at least two usable points.
    pub fn fit(thresholds: &[f64], contents: &[f64]) -> Option<DecayFit> {
        let pts: Vec<(f64, f64)> =
            thresholds.iter().zip(contents).filter(|(_, &h)| h > 0.0).map(|(&t, &h)| (t, h.ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
        Some(DecayFit {
            thresholds: thresholds.to_vec(),
            contents: contents.to_vec(),
            c1: intercept.exp(),
            c2: -slope,
            r_squared,
        })
    }
}

/// Everything measured for one function at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub spec: CorpusSpec,
    pub label: String,
    pub norms: BTreeMap<String, f64>,
    pub ratios: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FunctionRecord {
    pub fn new(spec: &CorpusSpec) -> Self {
        Self {
            spec: spec.clone(),
            label: spec.label(),
            norms: BTreeMap::new(),
            ratios: BTreeMap::new(),
            fit: None,
            note: None,
        }
    }
}

/// A plottable `(x, y)` sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub config: ExperimentConfig,
    pub per_function: Vec<FunctionRecord>,
    pub verdicts: Vec<Verdict>,
    pub series: Vec<Series>,
    /// Wall-clock time; only filled in on request so that reports from
    /// different thread counts stay byte-identical.
    pub runtime_ms: Option<u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The series as `series,x,y` CSV rows.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("series,x_label,y_label,x,y\n");
        for s in &self.series {
            for (x, y) in &s.points {
                out.push_str(&format!("{},{},{},{x},{y}\n", s.name, s.x, s.y));
            }
        }
        out
    }
}

/// Run a suite. With `timing`, the report records its wall-clock runtime.
pub fn run_suite(cfg: &ExperimentConfig, timing: bool) -> Result<Report> {
    let start = Instant::now();
    let (per_function, verdicts, series) = run_suite_body(cfg)?;
    Ok(Report {
        suite: cfg.suite,
        config: cfg.clone(),
        per_function,
        verdicts,
        series,
        runtime_ms: timing.then(|| start.elapsed().as_millis() as u64),
    })
}

/// Growth factors `R_{i+1} / R_i` of a ratio sequence over successive
/// resolution doublings.
pub fn growth_factors(series: &[f64]) -> Vec<f64> {
    series
        .windows(2)
        .map(|w| match (w[0] > 0.0, w[1] > 0.0) {
            (true, _) => w[1] / w[0],
            (false, false) => 1.0,
            (false, true) => f64::INFINITY,
        })
        .collect()
}

/// Stability verdict for a ratio sequence over resolutions.
pub fn stability_verdict(name: &str, series: &[f64], guard: f64) -> Verdict {
    if series.iter().all(|&r| r == 0.0) {
        return Verdict::new(name, Status::Trivial, "all ratios are zero");
    }
    let g = growth_factors(series);
    let worst = g.iter().copied().fold(0.0, f64::max);
    Verdict::check(
        name,
        worst < guard,
        format!("ratios {series:?}, largest growth per doubling {worst:.4} (guard {guard})"),
    )
}

/// A sequence over resolutions diverges when it increases at every step by
/// amounts that do not shrink: each increment is at least half the mean
/// increment. Convergent sequences have increments decaying to zero; a
/// logarithmic singularity adds a roughly constant amount per doubling.
pub fn diverges(series: &[f64]) -> bool {
    if series.len() < 3 {
        return false;
    }
    let inc: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = inc.iter().sum::<f64>() / inc.len() as f64;
    mean > 0.0 && inc.iter().all(|&d| d >= 0.5 * mean)
}
