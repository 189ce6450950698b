//! Uncentered fractional and β-dimensional maximal functions on the grid.
//!
//! Every window value is computed once; the per-cell supremum over the
//! windows of one side length is then a separable sliding maximum over the
//! anchor grid (a monotone deque per axis line), and the final field is the
//! pointwise maximum over side lengths. Fractional window sums come from a
//! summed-area table.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choquet::{GridFunction, Integrator};
use crate::content::{window_content, ContentParams};
use crate::error::{Error, Result};
use crate::geometry::{enumerate_windows, windows_of_side, BaseDomain, FamilyMember, WindowFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalParams {
    /// Fractional order, `0 <= α < n`.
    pub alpha: f64,
    pub family: WindowFamily,
    /// Local/global split threshold κ in cells.
    pub split_scale: Option<f64>,
}

impl MaximalParams {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, family: WindowFamily::Contained, split_scale: None }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0 && self.alpha < dim as f64) {
            return Err(Error::Parameter(format!("alpha must lie in [0, {dim}), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// A cellwise-constant maximal function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalField {
    pub domain: BaseDomain,
    pub values: Vec<f64>,
}

impl MaximalField {
    pub fn to_grid(&self) -> GridFunction {
        GridFunction { domain: self.domain.clone(), values: self.values.clone() }
    }

    /// Pointwise maximum of two fields over the same domain.
    pub fn max_with(&self, other: &MaximalField) -> MaximalField {
        MaximalField {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

/// Summed-area table of `values` with one zero layer per axis: shape `(N+1)^n`.
pub(crate) struct SummedArea {
    dim: usize,
    side: usize,
    table: Vec<f64>,
}

impl SummedArea {
    pub(crate) fn new(domain: &BaseDomain, values: &[f64]) -> Self {
        let dim = domain.dim;
        let n = domain.side_cells();
        let side = n + 1;
        let mut table = vec![0.0; side.pow(dim as u32)];
        for (cell, &v) in values.iter().enumerate() {
            let coords = domain.cell_coords(cell);
            let idx = coords.iter().fold(0, |acc, &c| acc * side + c + 1);
            table[idx] = v;
        }
        // prefix sums along each axis in turn
        for axis in 0..dim {
            let stride = side.pow((dim - 1 - axis) as u32);
            for idx in 0..table.len() {
                if (idx / stride) % side != 0 {
                    table[idx] += table[idx - stride];
                }
            }
        }
        Self { dim, side, table }
    }

    /// Sum over the half-open box `[lo, hi)`.
    pub(crate) fn box_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let dim = self.dim;
        let mut total = 0.0;
        for corner in 0..1usize << dim {
            let mut idx = 0;
            let mut lows = 0;
            for i in 0..dim {
                let take_lo = (corner >> (dim - 1 - i)) & 1 == 1;
                lows += take_lo as u32;
                idx = idx * self.side + if take_lo { lo[i] } else { hi[i] };
            }
            if lows % 2 == 0 {
                total += self.table[idx];
            } else {
                total -= self.table[idx];
            }
        }
        total
    }
}

/// Sliding maximum along one axis of a row-major array, stretching that axis
/// from `len = N - w + 1` anchors to `N` cells: `out[c] = max in[a]` over
/// `a ∈ [c + 1 - w, c] ∩ [0, len)`.
fn dilate_axis(data: &[f64], shape: &[usize], axis: usize, w: usize, n: usize) -> (Vec<f64>, Vec<usize>) {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut new_shape = shape.to_vec();
    new_shape[axis] = n;
    let mut out = vec![0.0; outer * n * inner];
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(w);
    for o in 0..outer {
        for i in 0..inner {
            let src = |a: usize| data[(o * len + a) * inner + i];
            deque.clear();
            for c in 0..n {
                if c < len {
                    let v = src(c);
                    while let Some(&back) = deque.back() {
                        if src(back) <= v {
                            deque.pop_back();
                        } else {
                            break;
                        }
                    }
                    deque.push_back(c);
                }
                while let Some(&front) = deque.front() {
                    if front + w <= c {
                        deque.pop_front();
                    } else {
                        break;
                    }
                }
                out[(o * n + c) * inner + i] = deque.front().map_or(0.0, |&a| src(a));
            }
        }
    }
    (out, new_shape)
}

/// Spread per-anchor window values of side `w` to the cells they cover.
fn dilate(values: Vec<f64>, dim: usize, w: usize, n: usize) -> Vec<f64> {
    let mut shape = vec![n - w + 1; dim];
    let mut data = values;
    for axis in 0..dim {
        let (d, s) = dilate_axis(&data, &shape, axis, w, n);
        data = d;
        shape = s;
    }
    data
}

fn pointwise_max(fields: impl Iterator<Item = Vec<f64>>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for field in fields {
        for (o, v) in out.iter_mut().zip(field) {
            if v > *o {
                *o = v;
            }
        }
    }
    out
}

/// Maximal function over the contained family restricted to side lengths
/// accepted by `keep_side`, with per-window values from `window_values`.
fn contained_maximal(
    domain: &BaseDomain,
    keep_side: impl Fn(u64) -> bool + Sync,
    window_values: impl Fn(u64) -> Vec<f64> + Sync,
) -> Vec<f64> {
    let n = domain.side_cells();
    let sides: Vec<u64> = (1..=n as u64).filter(|&w| keep_side(w)).collect();
    let fields: Vec<Vec<f64>> = sides
        .par_iter()
        .map(|&w| dilate(window_values(w), domain.dim, w as usize, n))
        .collect();
    pointwise_max(fields.into_iter(), domain.cell_count())
}

/// Maximal function over an explicit family: each member's value is
/// assigned to every cell of its region.
fn family_maximal(domain: &BaseDomain, members: &[FamilyMember], value: impl Fn(&FamilyMember) -> f64 + Sync) -> Vec<f64> {
    let vals: Vec<f64> = members.par_iter().map(&value).collect();
    let mut out = vec![0.0; domain.cell_count()];
    for (m, v) in members.iter().zip(vals) {
        for c in m.region.cells(domain) {
            if v > out[c] {
                out[c] = v;
            }
        }
    }
    out
}

/// `ℓ(Q)^{n-α}`, the divisor of a window's Lebesgue integral.
fn fractional_divisor(domain: &BaseDomain, side_cells: u64, alpha: f64) -> f64 {
    let len = side_cells as f64 * domain.cell_side();
    if alpha == 0.0 {
        len.powi(domain.dim as i32)
    } else {
        len.powf(domain.dim as f64 - alpha)
    }
}

fn fractional_filtered(f: &GridFunction, alpha: f64, keep_side: impl Fn(u64) -> bool + Sync) -> Vec<f64> {
    let domain = &f.domain;
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let sat = SummedArea::new(domain, &abs);
    let vol = domain.cell_volume();
    contained_maximal(domain, keep_side, |w| {
        let div = fractional_divisor(domain, w, alpha);
        windows_of_side(domain, w)
            .iter()
            .map(|win| {
                let lo: Vec<usize> = win.anchor.iter().map(|&a| a as usize).collect();
                let hi: Vec<usize> = lo.iter().map(|&a| a + w as usize).collect();
                sat.box_sum(&lo, &hi) * vol / div
            })
            .collect()
    })
}

/// `M_α f(x) = sup_{Q ∋ x} ℓ(Q)^{α-n} ∫_Q |f| dx` per cell.
pub fn fractional_maximal(f: &GridFunction, params: &MaximalParams) -> Result<MaximalField> {
    let domain = &f.domain;
    params.validate(domain.dim)?;
    let values = match params.family {
        WindowFamily::Contained => fractional_filtered(f, params.alpha, |_| true),
        family => {
            let members = enumerate_windows(domain, family)?;
            let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
            let sat = SummedArea::new(domain, &abs);
            let vol = domain.cell_volume();
            family_maximal(domain, &members, |m| {
                let b = m.region.clip_to(domain);
                let lo: Vec<usize> = b.lo.iter().map(|&v| v as usize).collect();
                let hi: Vec<usize> = b.hi.iter().map(|&v| v as usize).collect();
                sat.box_sum(&lo, &hi) * vol / fractional_divisor(domain, m.cube.side_cells, params.alpha)
            })
        }
    };
    Ok(MaximalField { domain: domain.clone(), values })
}

/// `M^β f(x) = sup_{Q ∋ x} H^β(Q)^{-1} ∫_Q |f| dH^β` per cell.
pub fn beta_maximal(f: &GridFunction, content_params: ContentParams, family: WindowFamily) -> Result<MaximalField> {
    let domain = &f.domain;
    content_params.validate(domain.dim)?;
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let values = match family {
        WindowFamily::Contained => contained_maximal(
            domain,
            |_| true,
            |w| {
                windows_of_side(domain, w)
                    .par_iter()
                    .map_init(
                        || Integrator::new(domain, content_params),
                        |integ, win| {
                            let cells = win.to_box().cells(domain);
                            let num = integ.integrate(cells.iter().map(|&c| (abs[c], c)));
                            num / window_content(domain, win, content_params)
                        },
                    )
                    .collect()
            },
        ),
        family => {
            let members = enumerate_windows(domain, family)?;
            let vals: Vec<f64> = members
                .par_iter()
                .map_init(
                    || Integrator::new(domain, content_params),
                    |integ, m| {
                        let cells = m.region.cells(domain);
                        let num = integ.integrate(cells.iter().map(|&c| (abs[c], c)));
                        num / window_content(domain, &m.cube, content_params)
                    },
                )
                .collect();
            let mut out = vec![0.0; domain.cell_count()];
            for (m, v) in members.iter().zip(vals) {
                for c in m.region.cells(domain) {
                    if v > out[c] {
                        out[c] = v;
                    }
                }
            }
            out
        }
    };
    Ok(MaximalField { domain: domain.clone(), values })
}

/// Split `M_α f` by window side at `κ` cells: the local part takes the
/// supremum over windows with side `< κ`, the global part over side `>= κ`.
/// An empty family yields the sentinel 0.
pub fn local_global_split(f: &GridFunction, params: &MaximalParams) -> Result<(MaximalField, MaximalField)> {
    let domain = &f.domain;
    params.validate(domain.dim)?;
    let kappa = params
        .split_scale
        .ok_or_else(|| Error::Parameter("local/global split needs a scale kappa".into()))?;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Parameter(format!("kappa must be positive, got {kappa}")));
    }
    if params.family != WindowFamily::Contained {
        return Err(Error::Parameter("local/global split is defined on the contained family".into()));
    }
    let local = fractional_filtered(f, params.alpha, |w| (w as f64) < kappa);
    let global = fractional_filtered(f, params.alpha, |w| (w as f64) >= kappa);
    Ok((
        MaximalField { domain: domain.clone(), values: local },
        MaximalField { domain: domain.clone(), values: global },
    ))
}
