//! Deterministic test functions with known oscillation character.
//!
//! Values are sampled at cell centers. Positions inside specs (boxes,
//! frequencies) are relative to the root, so one spec describes the same
//! continuum function at every resolution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::choquet::GridFunction;
use crate::error::{Error, Result};
use crate::geometry::{BaseDomain, DyadicCube};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CorpusKind {
    /// `-log(dist(x, H_k) + ε)` for the `k`-plane through the root center
    /// spanned by the first `k` axes; `ε` is half the cell diagonal.
    LogDistanceHyperplane { k: usize },
    /// `-log(|x - center| + ε)`.
    LogAbs,
    /// Indicator of the relative box `[lo, hi)` (coordinates in `[0, 1]`).
    Indicator { lo: Vec<f64>, hi: Vec<f64> },
    /// Indicator of a relative box with a linear ramp of relative `width`
    /// outside it (sup-distance).
    SmoothedIndicator { lo: Vec<f64>, hi: Vec<f64>, width: f64 },
    /// Triangle wave `1 - |2 frac(freq · u) - 1|` averaged over the axes.
    Sawtooth { frequency: f64 },
    /// Sum over dyadic generations of `±step`, balanced among the children
    /// of every node and shuffled by a seeded generator.
    DyadicMartingale { seed: u64, step: f64 },
    /// Independent uniform values in `[low, high)`.
    Random { seed: u64, low: f64, high: f64 },
    Constant { c: f64 },
}

impl CorpusKind {
    /// Whether the kind samples one fixed function at every resolution.
    /// Martingales and random fields gain new detail with each refinement.
    pub fn is_resolution_independent(&self) -> bool {
        !matches!(self, CorpusKind::DyadicMartingale { .. } | CorpusKind::Random { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    #[serde(flatten)]
    pub kind: CorpusKind,
    pub dim: usize,
    pub resolution: u32,
    #[serde(default)]
    pub root_level: i32,
    /// Upper cap applied to the singular kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

impl CorpusSpec {
    pub fn new(kind: CorpusKind, dim: usize, resolution: u32) -> Self {
        Self { kind, dim, resolution, root_level: 0, truncation: None }
    }

    pub fn at_resolution(&self, resolution: u32) -> Self {
        Self { resolution, ..self.clone() }
    }

    pub fn domain(&self) -> Result<BaseDomain> {
        BaseDomain::new(DyadicCube::origin(self.dim, self.root_level), self.resolution)
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        let kind = match &self.kind {
            CorpusKind::LogDistanceHyperplane { k } => format!("log_distance_k{k}"),
            CorpusKind::LogAbs => "log_abs".into(),
            CorpusKind::Indicator { .. } => "indicator".into(),
            CorpusKind::SmoothedIndicator { .. } => "smoothed_indicator".into(),
            CorpusKind::Sawtooth { frequency } => format!("sawtooth_f{frequency}"),
            CorpusKind::DyadicMartingale { seed, .. } => format!("martingale_s{seed}"),
            CorpusKind::Random { seed, .. } => format!("random_s{seed}"),
            CorpusKind::Constant { c } => format!("constant_{c}"),
        };
        format!("{kind}_{}d", self.dim)
    }
}

fn check_box(dim: usize, lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != dim || hi.len() != dim {
        return Err(Error::Parameter(format!("box corners need {dim} coordinates")));
    }
    if lo.iter().chain(hi).any(|v| !v.is_finite()) {
        return Err(Error::Parameter("box corners must be finite".into()));
    }
    Ok(())
}

/// Relative cell-center coordinates in `(0, 1)`.
fn relative_center(domain: &BaseDomain, cell: usize) -> Vec<f64> {
    let n = domain.side_cells() as f64;
    domain.cell_coords(cell).iter().map(|&c| (c as f64 + 0.5) / n).collect()
}

fn log_distance(domain: &BaseDomain, first_free_axis: usize) -> Vec<f64> {
    let side = domain.root_side();
    let eps = 0.5 * domain.cell_side() * (domain.dim as f64).sqrt();
    (0..domain.cell_count())
        .map(|cell| {
            let u = relative_center(domain, cell);
            let d2: f64 = u[first_free_axis..].iter().map(|&x| ((x - 0.5) * side).powi(2)).sum();
            -(d2.sqrt() + eps).ln()
        })
        .collect()
}

fn martingale(domain: &BaseDomain, seed: u64, step: f64) -> Vec<f64> {
    let dim = domain.dim;
    let children = 1usize << dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signs: Vec<f64> = (0..children).map(|i| if i < children / 2 { step } else { -step }).collect();
    // values[level] indexed row-major over the 2^level cells per side
    let mut values = vec![0.0];
    for level in 0..domain.resolution {
        let side = 1usize << level;
        let next_side = side * 2;
        let mut next = vec![0.0; next_side.pow(dim as u32)];
        for node in 0..values.len() {
            signs.shuffle(&mut rng);
            let mut coords = vec![0usize; dim];
            let mut rest = node;
            for c in coords.iter_mut().rev() {
                *c = rest % side;
                rest /= side;
            }
            for (child, &s) in signs.iter().enumerate() {
                let idx = coords.iter().enumerate().fold(0, |acc, (axis, &c)| {
                    let bit = (child >> (dim - 1 - axis)) & 1;
                    acc * next_side + 2 * c + bit
                });
                next[idx] = values[node] + s;
            }
        }
        values = next;
    }
    values
}

/// Sample a corpus function on its domain.
pub fn generate(spec: &CorpusSpec) -> Result<GridFunction> {
    let domain = spec.domain()?;
    let dim = domain.dim;
    let cells = domain.cell_count();
    let mut values = match &spec.kind {
        CorpusKind::LogDistanceHyperplane { k } => {
            if *k >= dim {
                return Err(Error::Parameter(format!("hyperplane dimension k = {k} must be below n = {dim}")));
            }
            log_distance(&domain, *k)
        }
        CorpusKind::LogAbs => log_distance(&domain, 0),
        CorpusKind::Indicator { lo, hi } => {
            check_box(dim, lo, hi)?;
            (0..cells)
                .map(|c| {
                    let u = relative_center(&domain, c);
                    let inside = u.iter().zip(lo.iter().zip(hi)).all(|(&x, (&a, &b))| x >= a && x < b);
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        CorpusKind::SmoothedIndicator { lo, hi, width } => {
            check_box(dim, lo, hi)?;
            if !(width.is_finite() && *width > 0.0) {
                return Err(Error::Parameter(format!("ramp width must be positive, got {width}")));
            }
            (0..cells)
                .map(|c| {
                    let u = relative_center(&domain, c);
                    let d = u
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(&x, (&a, &b))| (a - x).max(x - b).max(0.0))
                        .fold(0.0, f64::max);
                    (1.0 - d / width).max(0.0)
                })
                .collect()
        }
        CorpusKind::Sawtooth { frequency } => {
            if !(frequency.is_finite() && *frequency > 0.0) {
                return Err(Error::Parameter(format!("frequency must be positive, got {frequency}")));
            }
            (0..cells)
                .map(|c| {
                    let u = relative_center(&domain, c);
                    u.iter().map(|&x| 1.0 - (2.0 * (frequency * x).fract() - 1.0).abs()).sum::<f64>() / dim as f64
                })
                .collect()
        }
        CorpusKind::DyadicMartingale { seed, step } => {
            if !step.is_finite() {
                return Err(Error::Parameter("martingale step must be finite".into()));
            }
            martingale(&domain, *seed, *step)
        }
        CorpusKind::Random { seed, low, high } => {
            if !(low.is_finite() && high.is_finite() && low < high) {
                return Err(Error::Parameter(format!("need low < high, got [{low}, {high})")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..cells).map(|_| rng.gen_range(*low..*high)).collect()
        }
        CorpusKind::Constant { c } => vec![*c; cells],
    };
    if let Some(cap) = spec.truncation {
        if matches!(spec.kind, CorpusKind::LogDistanceHyperplane { .. } | CorpusKind::LogAbs) {
            for v in &mut values {
                *v = v.min(cap);
            }
        }
    }
    GridFunction::new(domain, values)
}
