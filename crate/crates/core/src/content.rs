//! Dyadic Hausdorff content `H^β_∞` of unions of cells.
//!
//! For a set `E` inside the root, an optimal dyadic cover can be taken to be
//! an antichain of nodes of the root's tree: a cube strictly larger than the
//! root costs at least `ℓ(Q_0)^β`, which the root alone already achieves, and
//! a cube smaller than a cell never beats the cell itself because
//! `2^n (ℓ/2)^β >= ℓ^β` for `β <= n`. The content is therefore the value of
//! the bottom-up recursion
//!
//! ```text
//! value(cell) = ℓ(cell)^β  if cell ∈ E else 0
//! value(node) = min(ℓ(node)^β, Σ value(child))
//! ```
//!
//! evaluated at the root. Child sums are always accumulated in child-index
//! order so every code path produces bit-identical results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BaseDomain, DyadicCube, Window};

/// The dimension parameter β of the content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentParams {
    pub beta: f64,
}

impl ContentParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { beta })
    }

    /// Check `0 < β <= dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0 && self.beta <= dim as f64) {
            return Err(Error::Parameter(format!(
                "beta must lie in (0, {dim}], got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// `β = n`: the content coincides with Lebesgue measure on unions of cells.
    pub fn is_lebesgue(&self, dim: usize) -> bool {
        self.beta == dim as f64
    }

    /// `ℓ^β` for a dyadic cube of the given level.
    #[inline]
    pub fn cube_cost(&self, level: i32) -> f64 {
        (level as f64 * self.beta).exp2()
    }
}

/// A set of cells of a base domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    pub domain: BaseDomain,
    bits: Vec<u64>,
}

impl CellSet {
    pub fn empty(domain: BaseDomain) -> Self {
        let words = domain.cell_count().div_ceil(64);
        Self { domain, bits: vec![0; words] }
    }

    pub fn full(domain: BaseDomain) -> Self {
        let mut s = Self::empty(domain);
        for i in 0..s.domain.cell_count() {
            s.insert(i);
        }
        s
    }

    pub fn from_cells(domain: BaseDomain, cells: &[usize]) -> Result<Self> {
        let mut s = Self::empty(domain);
        for &c in cells {
            if c >= s.domain.cell_count() {
                return Err(Error::Format(format!(
                    "cell index {c} out of range (domain has {} cells)",
                    s.domain.cell_count()
                )));
            }
            s.insert(c);
        }
        Ok(s)
    }

    /// Set from a mask in cell order.
    pub fn from_mask(domain: BaseDomain, mask: &[bool]) -> Result<Self> {
        if mask.len() != domain.cell_count() {
            return Err(Error::Format(format!(
                "mask has {} entries, domain has {} cells",
                mask.len(),
                domain.cell_count()
            )));
        }
        let cells: Vec<usize> = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        Self::from_cells(domain, &cells)
    }

    pub fn window(domain: BaseDomain, window: &Window) -> Self {
        let cells = window.to_box().cells(&domain);
        let mut s = Self::empty(domain);
        for c in cells {
            s.insert(c);
        }
        s
    }

    pub fn insert(&mut self, cell: usize) {
        self.bits[cell / 64] |= 1 << (cell % 64);
    }

    pub fn remove(&mut self, cell: usize) {
        self.bits[cell / 64] &= !(1 << (cell % 64));
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.bits[cell / 64] >> (cell % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.domain.cell_count()).filter(|&i| self.contains(i))
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    fn zip_with(&self, other: &CellSet, op: impl Fn(u64, u64) -> u64) -> CellSet {
        assert_eq!(self.domain, other.domain, "cell sets over different domains");
        CellSet {
            domain: self.domain.clone(),
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect(),
        }
    }
}

/// The content of a set together with a minimising antichain cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentResult {
    pub value: f64,
    pub cover: Vec<DyadicCube>,
}

/// Incremental tree DP over the root's dyadic tree.
///
/// Cells are inserted one at a time; every insertion recomputes the path to
/// the root. [`ContentTree::clear`] resets only the touched nodes, so one
/// tree can be reused for many small queries.
#[derive(Debug, Clone)]
pub struct ContentTree {
    dim: usize,
    resolution: usize,
    root_level: i32,
    /// `costs[t]` is `ℓ^β` for a node `t` levels above the cells.
    costs: Vec<f64>,
    /// `sides[t]` is the number of nodes per axis at tree level `t`.
    sides: Vec<usize>,
    values: Vec<Vec<f64>>,
    /// Per level, per child index: offset of that child from the first child.
    child_offsets: Vec<Vec<usize>>,
    touched: Vec<(u8, u32)>,
    coords: Vec<usize>,
}

impl ContentTree {
    pub fn new(domain: &BaseDomain, params: ContentParams) -> Self {
        let m = domain.resolution as usize;
        let dim = domain.dim;
        let cell_level = domain.cell_level();
        let costs = (0..=m).map(|t| params.cube_cost(cell_level + t as i32)).collect();
        let sides: Vec<usize> = (0..=m).map(|t| 1usize << (m - t)).collect();
        let values = sides.iter().map(|&s| vec![0.0; s.pow(dim as u32)]).collect();
        let child_offsets = sides
            .iter()
            .map(|&s| {
                (0..1usize << dim)
                    .map(|b| (0..dim).fold(0, |acc, i| acc * s + ((b >> (dim - 1 - i)) & 1)))
                    .collect()
            })
            .collect();
        Self {
            dim,
            resolution: m,
            root_level: domain.root.level,
            costs,
            sides,
            values,
            child_offsets,
            touched: Vec::new(),
            coords: vec![0; dim],
        }
    }

    /// Current content of the inserted set.
    pub fn value(&self) -> f64 {
        self.values[self.resolution][0]
    }

    pub fn clear(&mut self) {
        for &(t, idx) in &self.touched {
            self.values[t as usize][idx as usize] = 0.0;
        }
        self.touched.clear();
    }

    pub fn insert(&mut self, cell: usize) {
        if self.values[0][cell] != 0.0 {
            return;
        }
        self.values[0][cell] = self.costs[0];
        self.touched.push((0, cell as u32));
        let dim = self.dim;
        // decode cell coordinates once; parents are coords >> t
        let mut rest = cell;
        let s0 = self.sides[0];
        for c in self.coords.iter_mut().rev() {
            *c = rest % s0;
            rest /= s0;
        }
        for t in 1..=self.resolution {
            let child_side = self.sides[t - 1];
            let side = self.sides[t];
            let mut parent = 0usize;
            let mut first_child = 0usize;
            for i in 0..dim {
                let p = self.coords[i] >> t;
                parent = parent * side + p;
                first_child = first_child * child_side + 2 * p;
            }
            let below = &self.values[t - 1];
            let mut sum = 0.0;
            for &off in &self.child_offsets[t - 1] {
                sum += below[first_child + off];
            }
            let cost = self.costs[t];
            let v = if cost <= sum { cost } else { sum };
            if self.values[t][parent] == 0.0 {
                self.touched.push((t as u8, parent as u32));
            }
            self.values[t][parent] = v;
        }
    }

    /// Minimising antichain cover of the inserted set; ties resolve to the
    /// coarser cube.
    pub fn cover(&self, domain: &BaseDomain) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        self.collect_cover(self.resolution, 0, domain, &mut out);
        out
    }

    fn collect_cover(&self, t: usize, idx: usize, domain: &BaseDomain, out: &mut Vec<DyadicCube>) {
        if self.values[t][idx] == 0.0 {
            return;
        }
        let side = self.sides[t];
        let mut coords = vec![0usize; self.dim];
        let mut rest = idx;
        for c in coords.iter_mut().rev() {
            *c = rest % side;
            rest /= side;
        }
        let take_self = t == 0 || {
            let child_side = self.sides[t - 1];
            let first = coords.iter().fold(0, |acc, &c| acc * child_side + 2 * c);
            let sum: f64 = self.child_offsets[t - 1].iter().map(|&o| self.values[t - 1][first + o]).sum();
            self.costs[t] <= sum
        };
        if take_self {
            let level = self.root_level - (self.resolution - t) as i32;
            let scale = side as i64;
            let offset = coords
                .iter()
                .zip(&domain.root.offset)
                .map(|(&c, &o)| o * scale + c as i64)
                .collect();
            out.push(DyadicCube::new(level, offset));
        } else {
            let child_side = self.sides[t - 1];
            let first = coords.iter().fold(0, |acc, &c| acc * child_side + 2 * c);
            for &o in &self.child_offsets[t - 1] {
                self.collect_cover(t - 1, first + o, domain, out);
            }
        }
    }
}

/// Exact dyadic content of `e`, with a minimising cover.
pub fn content(e: &CellSet, params: ContentParams) -> Result<ContentResult> {
    params.validate(e.domain.dim)?;
    let mut tree = ContentTree::new(&e.domain, params);
    for c in e.iter() {
        tree.insert(c);
    }
    Ok(ContentResult { value: tree.value(), cover: tree.cover(&e.domain) })
}

/// Content of an arbitrary finite set of cells given by global dyadic
/// offsets at `cell_level`. Unlike [`ContentTree`] the set need not lie in
/// any particular root: nodes are merged level by level until every
/// remaining node sits in a distinct orthant-level ancestor chain, after
/// which no coarser cube can improve the cover.
pub fn sparse_content(dim: usize, cell_level: i32, params: ContentParams, cells: &[Vec<i64>]) -> f64 {
    let mut level_nodes: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let leaf_cost = params.cube_cost(cell_level);
    for c in cells {
        debug_assert_eq!(c.len(), dim);
        level_nodes.insert(c.clone(), leaf_cost);
    }
    let mut level = cell_level;
    while !level_nodes.keys().all(|k| k.iter().all(|&v| v == 0 || v == -1)) {
        level += 1;
        let cost = params.cube_cost(level);
        // BTreeMap order on child offsets equals child-index order within a parent
        let mut parents: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (k, v) in level_nodes {
            let p: Vec<i64> = k.iter().map(|&o| o.div_euclid(2)).collect();
            *parents.entry(p).or_insert(0.0) += v;
        }
        for v in parents.values_mut() {
            if cost <= *v {
                *v = cost;
            }
        }
        level_nodes = parents;
    }
    level_nodes.values().sum()
}

/// Content of a cube window, which may extend outside the root.
pub fn window_content(domain: &BaseDomain, window: &Window, params: ContentParams) -> f64 {
    let b = window.to_box();
    let w = window.side_cells as i64;
    // fast path: a dyadic node costs exactly ℓ^β
    if window.is_dyadic() {
        return params.cube_cost(domain.cell_level() + w.trailing_zeros() as i32);
    }
    let dim = domain.dim;
    let mut cells = Vec::with_capacity((w as usize).pow(dim as u32));
    let mut cur = b.lo.clone();
    loop {
        cells.push(domain.global_cell_offset(&cur));
        let mut axis = dim;
        loop {
            if axis == 0 {
                return sparse_content(dim, domain.cell_level(), params, &cells);
            }
            axis -= 1;
            cur[axis] += 1;
            if cur[axis] < b.hi[axis] {
                break;
            }
            cur[axis] = b.lo[axis];
        }
    }
}

/// Largest number of antichains the exhaustive oracle will enumerate.
pub const BRUTE_ANTICHAIN_CAP: u128 = 5_000_000;

/// Cell cap for the exhaustive oracle (covered sets are 64-bit masks).
pub const BRUTE_CELL_CAP: usize = 64;

/// Exhaustive list of every antichain of the root's dyadic tree, stored as
/// (covered-cell mask, nodes-per-level histogram).
#[derive(Debug, Clone)]
pub struct AntichainCovers {
    domain: BaseDomain,
    count: usize,
}

fn antichain_count(dim: usize, m: u32) -> u128 {
    let mut a: u128 = 2;
    for _ in 0..m {
        let mut next: u128 = 1;
        for _ in 0..(1u32 << dim) {
            next = next.saturating_mul(a);
        }
        a = next.saturating_add(1);
    }
    a
}

impl AntichainCovers {
    pub fn new(domain: &BaseDomain) -> Result<Self> {
        if domain.cell_count() > BRUTE_CELL_CAP {
            return Err(Error::SizeCap(format!(
                "exhaustive cover enumeration supports at most {BRUTE_CELL_CAP} cells, domain has {}",
                domain.cell_count()
            )));
        }
        let count = antichain_count(domain.dim, domain.resolution);
        if count > BRUTE_ANTICHAIN_CAP {
            return Err(Error::SizeCap(format!(
                "{count} antichains exceed the oracle cap of {BRUTE_ANTICHAIN_CAP}"
            )));
        }
        Ok(Self { domain: domain.clone(), count: count as usize })
    }

    /// All antichains of the subtree at tree level `t` (0 = cells) whose
    /// lower corner is at cell coordinates `corner`, as (covered cells, cost).
    /// Costs of sibling subtrees are added in child order starting from zero,
    /// the same association the tree DP uses, so both agree to the bit.
    fn enumerate(&self, costs: &[f64], t: usize, corner: &[usize]) -> Vec<(u64, f64)> {
        let dim = self.domain.dim;
        let span = 1usize << t;
        let node = crate::geometry::CellBox {
            lo: corner.iter().map(|&c| c as i64).collect(),
            hi: corner.iter().map(|&c| (c + span) as i64).collect(),
        };
        let mask = node.cells(&self.domain).into_iter().fold(0u64, |acc, c| acc | 1 << c);
        let mut out = vec![(mask, costs[t])];
        if t == 0 {
            out.push((0, 0.0));
            return out;
        }
        let half = span / 2;
        let mut product: Vec<(u64, f64)> = vec![(0, 0.0)];
        for b in 0..1usize << dim {
            let child: Vec<usize> = (0..dim).map(|i| corner[i] + ((b >> (dim - 1 - i)) & 1) * half).collect();
            let sub = self.enumerate(costs, t - 1, &child);
            let mut next = Vec::with_capacity(product.len() * sub.len());
            for &(pm, pc) in &product {
                for &(sm, sc) in &sub {
                    next.push((pm | sm, pc + sc));
                }
            }
            product = next;
        }
        out.extend(product);
        out
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Minimum cost over every antichain covering `e`.
    pub fn content(&self, e: &CellSet, params: ContentParams) -> Result<f64> {
        if e.domain != self.domain {
            return Err(Error::Precondition("cell set belongs to a different domain".into()));
        }
        params.validate(self.domain.dim)?;
        let target: u64 = e.iter().fold(0, |acc, c| acc | (1 << c));
        let cell_level = self.domain.cell_level();
        let m = self.domain.resolution as usize;
        let costs: Vec<f64> = (0..=m as i32).map(|t| params.cube_cost(cell_level + t)).collect();
        let covers = self.enumerate(&costs, m, &vec![0; self.domain.dim]);
        Ok(covers
            .into_iter()
            .filter(|&(mask, _)| target & !mask == 0)
            .map(|(_, c)| c)
            .fold(f64::INFINITY, f64::min))
    }
}

/// Exhaustive-search content: enumerates every antichain cover within the
/// root. Test oracle for [`content`]; only feasible on tiny domains.
pub fn content_brute(e: &CellSet, params: ContentParams) -> Result<f64> {
    AntichainCovers::new(&e.domain)?.content(e, params)
}
