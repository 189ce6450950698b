//! Choquet integration against the dyadic content.
//!
//! Grid functions are constant on cells, so the layer-cake integral
//! `∫_0^∞ H({f > t}) dt` collapses to the finite sum
//! `Σ_j (t_j - t_{j-1}) H({f >= t_j})` over the sorted distinct positive
//! values `t_1 < ... < t_J` (with `t_0 = 0`).

use serde::{Deserialize, Serialize};

use crate::content::{CellSet, ContentParams, ContentTree};
use crate::error::{Error, Result};
use crate::geometry::{BaseDomain, CellBox, DyadicCube, Window};

/// Cellwise-constant real function on a base domain, row-major values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub domain: BaseDomain,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: BaseDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.cell_count() {
            return Err(Error::Format(format!(
                "expected {} values for a {}-dimensional grid at resolution {}, got {}",
                domain.cell_count(),
                domain.dim,
                domain.resolution,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("value at cell {i} is not finite")));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: BaseDomain, c: f64) -> Result<Self> {
        let n = domain.cell_count();
        Self::new(domain, vec![c; n])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.domain.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self { domain: self.domain.clone(), values: self.values.iter().map(|v| v.abs()).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::Precondition("grid functions live on different domains".into()));
        }
        Self::new(
            self.domain.clone(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Lebesgue `L^p` norm `(Σ |f|^p · cell volume)^{1/p}`.
    pub fn lebesgue_lp_norm(&self, p: f64) -> f64 {
        let vol = self.domain.cell_volume();
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * vol).powf(1.0 / p)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Integration region: cells of the root selected by a window, a clipped
/// box or an explicit set.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Root,
    Window(Window),
    Box(CellBox),
    Set(CellSet),
}

impl Region {
    /// Cells of `region ∩ root`, ascending.
    pub fn cells(&self, domain: &BaseDomain) -> Vec<usize> {
        match self {
            Region::Root => (0..domain.cell_count()).collect(),
            Region::Window(w) => w.to_box().cells(domain),
            Region::Box(b) => b.cells(domain),
            Region::Set(s) => s.iter().collect(),
        }
    }
}

/// Layer-cake engine with a reusable content tree.
#[derive(Debug, Clone)]
pub struct Integrator {
    tree: ContentTree,
    items: Vec<(f64, u32)>,
}

impl Integrator {
    pub fn new(domain: &BaseDomain, params: ContentParams) -> Self {
        Self { tree: ContentTree::new(domain, params), items: Vec::new() }
    }

    /// Choquet integral of the nonnegative cellwise function given as
    /// `(value, cell)` pairs; cells not listed count as zero. Each cell may
    /// appear at most once.
    pub fn integrate(&mut self, items: impl IntoIterator<Item = (f64, usize)>) -> f64 {
        let mut buf = std::mem::take(&mut self.items);
        buf.clear();
        buf.extend(items.into_iter().map(|(v, c)| (v, c as u32)));
        let total = self.integrate_items(&mut buf);
        self.items = buf;
        total
    }

    /// Like [`Integrator::integrate`] for items already sorted by value,
    /// descending.
    pub fn integrate_sorted(&mut self, items: impl IntoIterator<Item = (f64, usize)>) -> f64 {
        let mut buf = std::mem::take(&mut self.items);
        buf.clear();
        buf.extend(items.into_iter().map(|(v, c)| (v, c as u32)));
        debug_assert!(buf.windows(2).all(|w| w[0].0 >= w[1].0));
        let total = self.layer_cake(&buf);
        self.items = buf;
        total
    }

    fn integrate_items(&mut self, items: &mut [(f64, u32)]) -> f64 {
        items.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        self.layer_cake(items)
    }

    fn layer_cake(&mut self, items: &[(f64, u32)]) -> f64 {
        self.tree.clear();
        // (t_j, H({f >= t_j})) for distinct positive values, descending in t
        let mut levels: Vec<(f64, f64)> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let t = items[i].0;
            if t <= 0.0 {
                break;
            }
            while i < items.len() && items[i].0 == t {
                self.tree.insert(items[i].1 as usize);
                i += 1;
            }
            levels.push((t, self.tree.value()));
        }
        self.tree.clear();
        let mut total = 0.0;
        let mut prev = 0.0;
        for &(t, h) in levels.iter().rev() {
            total += (t - prev) * h;
            prev = t;
        }
        total
    }

    /// The distribution `t ↦ H({f > t})` of a nonnegative function as
    /// `(t, H({f > t}))` at `t = 0` and at every distinct positive value
    /// below the maximum; the content is constant between these knots.
    pub fn distribution(&mut self, items: impl IntoIterator<Item = (f64, usize)>) -> Vec<(f64, f64)> {
        let mut buf: Vec<(f64, u32)> = items.into_iter().map(|(v, c)| (v, c as u32)).collect();
        buf.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        self.tree.clear();
        let mut knots = Vec::new();
        let mut i = 0;
        while i < buf.len() {
            let t = buf[i].0;
            if t <= 0.0 {
                break;
            }
            while i < buf.len() && buf[i].0 == t {
                self.tree.insert(buf[i].1 as usize);
                i += 1;
            }
            // {f > s} for s in [next value, t) is what has been inserted so far
            let next = if i < buf.len() { buf[i].0.max(0.0) } else { 0.0 };
            knots.push((next, self.tree.value()));
        }
        self.tree.clear();
        knots.reverse();
        knots.dedup_by(|a, b| a.0 == b.0);
        knots
    }

    /// Content of a set of cells.
    pub fn content_of(&mut self, cells: impl IntoIterator<Item = usize>) -> f64 {
        self.tree.clear();
        for c in cells {
            self.tree.insert(c);
        }
        let v = self.tree.value();
        self.tree.clear();
        v
    }
}

fn check_nonnegative(f: &GridFunction, cells: &[usize]) -> Result<()> {
    if let Some(&c) = cells.iter().find(|&&c| f.values[c] < 0.0) {
        return Err(Error::Domain(format!(
            "Choquet integration needs a nonnegative function; cell {c} has value {}",
            f.values[c]
        )));
    }
    Ok(())
}

/// `∫_region f dH^β` for `f >= 0` on the region.
pub fn choquet_integral(f: &GridFunction, region: &Region, params: ContentParams) -> Result<f64> {
    params.validate(f.domain.dim)?;
    let cells = region.cells(&f.domain);
    check_nonnegative(f, &cells)?;
    let mut integ = Integrator::new(&f.domain, params);
    Ok(integ.integrate(cells.iter().map(|&c| (f.values[c], c))))
}

/// `(∫_region |f|^p dH^β)^{1/p}`.
pub fn choquet_lp_norm(f: &GridFunction, region: &Region, p: f64, params: ContentParams) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Parameter(format!("p must be at least 1, got {p}")));
    }
    params.validate(f.domain.dim)?;
    let cells = region.cells(&f.domain);
    let mut integ = Integrator::new(&f.domain, params);
    let total = integ.integrate(cells.iter().map(|&c| (f.values[c].abs().powf(p), c)));
    Ok(total.powf(1.0 / p))
}

/// Outcome of [`packing_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    /// Smallest `A >= 1` with `Σ_{Q_j ⊆ Q} H(Q_j) <= A H(Q)` for every dyadic `Q`.
    pub a_observed: f64,
    /// `Σ_j ∫_{Q_j} f dH`.
    pub lhs: f64,
    /// `A ∫_{∪ Q_j} f dH`.
    pub rhs: f64,
    pub inequality_holds: bool,
}

/// Packing inequality for a non-overlapping family of dyadic cubes.
pub fn packing_check(family: &[DyadicCube], f: &GridFunction, params: ContentParams) -> Result<PackingResult> {
    let domain = &f.domain;
    params.validate(domain.dim)?;
    check_nonnegative(f, &(0..domain.cell_count()).collect::<Vec<_>>())?;
    let cell_level = domain.cell_level();
    for q in family {
        if q.dim() != domain.dim || q.level < cell_level || !domain.root.contains(q) {
            return Err(Error::Precondition(format!("cube {q:?} is not a node of the root's tree")));
        }
    }
    for (i, a) in family.iter().enumerate() {
        if family[i + 1..].iter().any(|b| !a.is_disjoint(b)) {
            return Err(Error::Precondition("packing family overlaps".into()));
        }
    }

    // candidate Q: every ancestor-or-self of a family member inside the root;
    // any other dyadic Q either contains no member or has the same members as
    // its smallest such ancestor at lower cost-ratio
    let mut candidates: Vec<DyadicCube> = family
        .iter()
        .flat_map(|q| (q.level..=domain.root.level).map(move |l| q.ancestor(l)))
        .collect();
    candidates.sort();
    candidates.dedup();
    let mut a_observed: f64 = 1.0;
    for q in &candidates {
        let inside: f64 = family.iter().filter(|j| q.contains(j)).map(|j| params.cube_cost(j.level)).sum();
        a_observed = a_observed.max(inside / params.cube_cost(q.level));
    }

    let to_local = |q: &DyadicCube| -> Window {
        let scale = 1i64 << (q.level - cell_level);
        let n = domain.side_cells() as i64;
        let anchor = q.offset.iter().zip(&domain.root.offset).map(|(&o, &r)| o * scale - r * n).collect();
        Window::new(anchor, scale as u64)
    };
    let mut integ = Integrator::new(domain, params);
    let mut lhs = 0.0;
    let mut union = CellSet::empty(domain.clone());
    for q in family {
        let cells = to_local(q).to_box().cells(domain);
        lhs += integ.integrate(cells.iter().map(|&c| (f.values[c], c)));
        for c in cells {
            union.insert(c);
        }
    }
    let union_integral = integ.integrate(union.iter().map(|c| (f.values[c], c)));
    let rhs = a_observed * union_integral;
    let inequality_holds = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
    Ok(PackingResult { a_observed, lhs, rhs, inequality_holds })
}
