//! Dyadic cubes, base domains, cell-aligned windows and the window families
//! the analysis operators take suprema over.
//!
//! Everything here lives in cell coordinates. A [`BaseDomain`] fixes a root
//! dyadic cube `Q_0` and a resolution `m`; its cells are the `2^{nm}`
//! level-`(k - m)` descendants of the root, indexed row-major with axis 0
//! slowest. Windows are half-open cubes `[a, a + w)` in those coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of windows a single enumeration may produce.
pub const DEFAULT_WINDOW_CAP: u64 = 100_000_000;

/// Environment variable overriding [`DEFAULT_WINDOW_CAP`].
pub const WINDOW_CAP_ENV: &str = "OSCMAX_WINDOW_CAP";

/// Largest supported `n * m` (total cell bits).
const MAX_CELL_BITS: u32 = 30;

/// The window budget in effect: `OSCMAX_WINDOW_CAP` if set and parseable,
/// otherwise [`DEFAULT_WINDOW_CAP`].
pub fn window_cap() -> u64 {
    std::env::var(WINDOW_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .unwrap_or(DEFAULT_WINDOW_CAP)
}

/// A standard dyadic cube `2^level (offset + [0,1)^n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub offset: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: i32, offset: Vec<i64>) -> Self {
        Self { level, offset }
    }

    /// The cube `2^level [0,1)^dim`.
    pub fn origin(dim: usize, level: i32) -> Self {
        Self { level, offset: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// Side length `2^level`.
    pub fn side(&self) -> f64 {
        (self.level as f64).exp2()
    }

    /// Child number `index` in `0..2^n`. Bit `n-1-i` of `index` selects the
    /// upper half along axis `i`, so axis 0 is the most significant.
    pub fn child(&self, index: usize) -> DyadicCube {
        let n = self.dim();
        let offset = self
            .offset
            .iter()
            .enumerate()
            .map(|(i, &o)| 2 * o + ((index >> (n - 1 - i)) & 1) as i64)
            .collect();
        DyadicCube { level: self.level - 1, offset }
    }

    /// The `2^n` children, in child-index order.
    pub fn children(&self) -> Vec<DyadicCube> {
        (0..1usize << self.dim()).map(|i| self.child(i)).collect()
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            level: self.level + 1,
            offset: self.offset.iter().map(|&o| o.div_euclid(2)).collect(),
        }
    }

    /// Position of this cube among its parent's children.
    pub fn child_index(&self) -> usize {
        let n = self.dim();
        self.offset
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &o)| acc | ((o.rem_euclid(2) as usize) << (n - 1 - i)))
    }

    /// The ancestor at `level` (which must be at least `self.level`).
    pub fn ancestor(&self, level: i32) -> DyadicCube {
        assert!(level >= self.level);
        let shift = (level - self.level) as u32;
        DyadicCube {
            level,
            offset: self.offset.iter().map(|&o| o >> shift).collect(),
        }
    }

    /// Whether `other` is contained in (or equal to) `self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level <= self.level && other.ancestor(self.level) == *self
    }

    pub fn is_disjoint(&self, other: &DyadicCube) -> bool {
        !self.contains(other) && !other.contains(self)
    }
}

/// The ambient cube `Q_0` together with the cell resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseDomain {
    pub dim: usize,
    pub root: DyadicCube,
    pub resolution: u32,
}

impl BaseDomain {
    pub fn new(root: DyadicCube, resolution: u32) -> Result<Self> {
        let dim = root.dim();
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if (dim as u32).saturating_mul(resolution) > MAX_CELL_BITS {
            return Err(Error::Parameter(format!(
                "resolution {resolution} in dimension {dim} exceeds 2^{MAX_CELL_BITS} cells"
            )));
        }
        Ok(Self { dim, root, resolution })
    }

    /// The unit cube `[0,1)^dim` at resolution `m`.
    pub fn unit(dim: usize, resolution: u32) -> Result<Self> {
        Self::new(DyadicCube::origin(dim, 0), resolution)
    }

    /// Cells per side, `2^m`.
    pub fn side_cells(&self) -> usize {
        1usize << self.resolution
    }

    pub fn cell_count(&self) -> usize {
        1usize << (self.resolution as usize * self.dim)
    }

    /// Dyadic level of a cell.
    pub fn cell_level(&self) -> i32 {
        self.root.level - self.resolution as i32
    }

    pub fn cell_side(&self) -> f64 {
        (self.cell_level() as f64).exp2()
    }

    /// Lebesgue measure of one cell.
    pub fn cell_volume(&self) -> f64 {
        ((self.cell_level() * self.dim as i32) as f64).exp2()
    }

    pub fn root_side(&self) -> f64 {
        self.root.side()
    }

    pub fn cell_coords(&self, index: usize) -> Vec<usize> {
        let n = self.side_cells();
        let mut coords = vec![0; self.dim];
        let mut rest = index;
        for c in coords.iter_mut().rev() {
            *c = rest % n;
            rest /= n;
        }
        coords
    }

    pub fn cell_index(&self, coords: &[usize]) -> usize {
        let n = self.side_cells();
        coords.iter().fold(0, |acc, &c| acc * n + c)
    }

    /// The dyadic cube occupied by a cell.
    pub fn cell_cube(&self, index: usize) -> DyadicCube {
        let n = self.side_cells() as i64;
        let offset = self
            .cell_coords(index)
            .iter()
            .zip(&self.root.offset)
            .map(|(&c, &o)| o * n + c as i64)
            .collect();
        DyadicCube::new(self.cell_level(), offset)
    }

    /// Global dyadic offset of the cell at local (possibly out-of-root) coordinates.
    pub fn global_cell_offset(&self, local: &[i64]) -> Vec<i64> {
        let n = self.side_cells() as i64;
        local.iter().zip(&self.root.offset).map(|(&c, &o)| o * n + c).collect()
    }

    /// The whole root as a window.
    pub fn root_window(&self) -> Window {
        Window::new(vec![0; self.dim], self.side_cells() as u64)
    }

    /// Real-unit center of a cell, per axis.
    pub fn cell_center(&self, index: usize) -> Vec<f64> {
        let h = self.cell_side();
        self.cell_coords(index)
            .iter()
            .zip(&self.root.offset)
            .map(|(&c, &o)| o as f64 * self.root_side() + (c as f64 + 0.5) * h)
            .collect()
    }
}

/// Axis-parallel cell-aligned cube `anchor + [0, side)^n` in local cell
/// coordinates. The anchor may be negative: normalising cubes of the
/// centered family can stick out of the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub anchor: Vec<i64>,
    pub side_cells: u64,
}

impl Window {
    pub fn new(anchor: Vec<i64>, side_cells: u64) -> Self {
        Self { anchor, side_cells }
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Side length in real units.
    pub fn side_length(&self, domain: &BaseDomain) -> f64 {
        self.side_cells as f64 * domain.cell_side()
    }

    pub fn to_box(&self) -> CellBox {
        CellBox {
            lo: self.anchor.clone(),
            hi: self.anchor.iter().map(|&a| a + self.side_cells as i64).collect(),
        }
    }

    pub fn is_inside(&self, domain: &BaseDomain) -> bool {
        let n = domain.side_cells() as i64;
        self.side_cells >= 1
            && self.anchor.iter().all(|&a| a >= 0 && a + self.side_cells as i64 <= n)
    }

    pub fn contains_cell(&self, coords: &[usize]) -> bool {
        self.anchor
            .iter()
            .zip(coords)
            .all(|(&a, &c)| (c as i64) >= a && (c as i64) < a + self.side_cells as i64)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.to_box().contains_box(&other.to_box())
    }

    pub fn intersects(&self, other: &Window) -> bool {
        !self.to_box().intersect(&other.to_box()).is_empty()
    }

    /// Whether this window is exactly a dyadic node of the domain's tree.
    pub fn is_dyadic(&self) -> bool {
        self.side_cells.is_power_of_two()
            && self.anchor.iter().all(|&a| a.rem_euclid(self.side_cells as i64) == 0)
    }
}

/// Half-open box `[lo, hi)` of cells; the integration region of a clipped
/// window.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl CellBox {
    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| h <= l)
    }

    pub fn intersect(&self, other: &CellBox) -> CellBox {
        CellBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect(),
        }
    }

    pub fn contains_box(&self, other: &CellBox) -> bool {
        other.is_empty()
            || (self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
                && self.hi.iter().zip(&other.hi).all(|(a, b)| a >= b))
    }

    pub fn clip_to(&self, domain: &BaseDomain) -> CellBox {
        self.intersect(&domain.root_window().to_box())
    }

    /// Row-major indices of the cells of `self ∩ root`.
    pub fn cells(&self, domain: &BaseDomain) -> Vec<usize> {
        let clipped = self.clip_to(domain);
        if clipped.is_empty() {
            return Vec::new();
        }
        let dim = domain.dim;
        let n = domain.side_cells();
        let lo: Vec<usize> = clipped.lo.iter().map(|&v| v as usize).collect();
        let hi: Vec<usize> = clipped.hi.iter().map(|&v| v as usize).collect();
        let total: usize = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        let mut out = Vec::with_capacity(total);
        let mut cur = lo.clone();
        loop {
            out.push(cur.iter().fold(0, |acc, &c| acc * n + c));
            let mut axis = dim;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                cur[axis] += 1;
                if cur[axis] < hi[axis] {
                    break;
                }
                cur[axis] = lo[axis];
            }
        }
    }
}

/// Which cubes a supremum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WindowFamily {
    /// Every cell-aligned cube inside the root.
    #[default]
    Contained,
    /// `Q(x, r) ∩ Q_0` for cell centers `x` and odd cell-multiple sides
    /// `r = 2j + 1`, `j <= max_radius` (default: `2^m - 1`, enough for every
    /// center to reach the whole root).
    CenteredClipped { max_radius: Option<u64> },
}

/// One member of a window family: the region integrated over and the cube
/// whose content normalises the integral. For the contained family the two
/// coincide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub region: CellBox,
    pub cube: Window,
}

impl FamilyMember {
    pub fn contained(window: Window) -> Self {
        Self { region: window.to_box(), cube: window }
    }

    pub fn is_clipped(&self) -> bool {
        self.region != self.cube.to_box()
    }
}

/// Number of windows in the contained family: `Σ_{w=1}^{N} (N - w + 1)^n`.
pub fn contained_window_count(domain: &BaseDomain) -> u128 {
    let n = domain.side_cells() as u128;
    (1..=n).map(|w| (n - w + 1).pow(domain.dim as u32)).sum()
}

fn centered_radius_cap(domain: &BaseDomain, max_radius: Option<u64>) -> u64 {
    let full = domain.side_cells() as u64 - 1;
    max_radius.map_or(full, |r| r.min(full))
}

/// Number of members `enumerate_windows` would produce.
pub fn family_size(domain: &BaseDomain, family: WindowFamily) -> u128 {
    match family {
        WindowFamily::Contained => contained_window_count(domain),
        WindowFamily::CenteredClipped { max_radius } => {
            domain.cell_count() as u128 * (centered_radius_cap(domain, max_radius) as u128 + 1)
        }
    }
}

/// All windows of side `side` inside the root, anchors in row-major order.
pub fn windows_of_side(domain: &BaseDomain, side: u64) -> Vec<Window> {
    let n = domain.side_cells() as u64;
    if side == 0 || side > n {
        return Vec::new();
    }
    let span = (n - side + 1) as usize;
    let count = span.pow(domain.dim as u32);
    (0..count)
        .map(|mut idx| {
            let mut anchor = vec![0i64; domain.dim];
            for a in anchor.iter_mut().rev() {
                *a = (idx % span) as i64;
                idx /= span;
            }
            Window::new(anchor, side)
        })
        .collect()
}

/// Enumerate a window family, sides ascending, anchors row-major.
pub fn enumerate_windows(domain: &BaseDomain, family: WindowFamily) -> Result<Vec<FamilyMember>> {
    enumerate_windows_capped(domain, family, window_cap())
}

pub fn enumerate_windows_capped(
    domain: &BaseDomain,
    family: WindowFamily,
    cap: u64,
) -> Result<Vec<FamilyMember>> {
    let count = family_size(domain, family);
    if count > cap as u128 {
        return Err(Error::Budget { count, cap });
    }
    let n = domain.side_cells() as u64;
    let mut out = Vec::with_capacity(count as usize);
    match family {
        WindowFamily::Contained => {
            for w in 1..=n {
                out.extend(windows_of_side(domain, w).into_iter().map(FamilyMember::contained));
            }
        }
        WindowFamily::CenteredClipped { max_radius } => {
            let root = domain.root_window().to_box();
            for j in 0..=centered_radius_cap(domain, max_radius) {
                for cell in 0..domain.cell_count() {
                    let anchor = domain.cell_coords(cell).iter().map(|&c| c as i64 - j as i64).collect();
                    let cube = Window::new(anchor, 2 * j + 1);
                    out.push(FamilyMember { region: cube.to_box().intersect(&root), cube });
                }
            }
        }
    }
    Ok(out)
}

/// A cube `Q'` with `q1 ∪ q2 ⊆ Q' ⊆ bound` and `ℓ(Q') <= ℓ(q1) + ℓ(q2)`,
/// for intersecting windows `q1, q2` inside `bound`.
///
/// The side is the largest per-axis extent of the union hull; each axis is
/// then slid left as far as the hull allows while staying inside `bound`.
pub fn join_cube(q1: &Window, q2: &Window, bound: &Window) -> Result<Window> {
    let dim = bound.dim();
    if q1.dim() != dim || q2.dim() != dim {
        return Err(Error::Precondition("join_cube: dimension mismatch".into()));
    }
    if !bound.contains_window(q1) || !bound.contains_window(q2) {
        return Err(Error::Precondition("join_cube: inputs must lie inside the bound".into()));
    }
    if !q1.intersects(q2) {
        return Err(Error::Precondition("join_cube: inputs are disjoint".into()));
    }
    let (b1, b2) = (q1.to_box(), q2.to_box());
    let hull_lo: Vec<i64> = b1.lo.iter().zip(&b2.lo).map(|(a, b)| *a.min(b)).collect();
    let hull_hi: Vec<i64> = b1.hi.iter().zip(&b2.hi).map(|(a, b)| *a.max(b)).collect();
    let side = hull_lo.iter().zip(&hull_hi).map(|(l, h)| h - l).max().unwrap_or(1);
    let bound_hi = bound.to_box().hi;
    let anchor = hull_lo.iter().zip(&bound_hi).map(|(&lo, &bh)| lo.min(bh - side)).collect();
    Ok(Window::new(anchor, side as u64))
}

/// The comparison cube `P_Q ⊆ Q_0` with side `min(ℓ(Q), ℓ(Q_0))` (in cells)
/// that contains `Q ∩ Q_0`. Each axis takes the anchor of `q` clamped into
/// the root.
///
/// `P_Q` always lies inside the concentric triple `3Q`; it lies inside `2Q`
/// whenever `q` overlaps the root by at least half its side on every axis.
pub fn comparison_cube(q: &Window, domain: &BaseDomain) -> Result<Window> {
    if q.dim() != domain.dim {
        return Err(Error::Precondition("comparison_cube: dimension mismatch".into()));
    }
    if q.side_cells == 0 || q.to_box().clip_to(domain).is_empty() {
        return Err(Error::Precondition("comparison_cube: cube does not meet the root".into()));
    }
    let n = domain.side_cells() as i64;
    let side = (q.side_cells as i64).min(n);
    let anchor = q.anchor.iter().map(|&a| a.clamp(0, n - side)).collect();
    Ok(Window::new(anchor, side as u64))
}

/// The concentric dilate `factor · Q` in doubled cell coordinates
/// (`[2a - (factor-1)w, 2a + (factor+1)w)`), so half-cell boundaries stay
/// integral.
pub fn dilate_doubled(q: &Window, factor: i64) -> CellBox {
    let w = q.side_cells as i64;
    CellBox {
        lo: q.anchor.iter().map(|&a| 2 * a - (factor - 1) * w).collect(),
        hi: q.anchor.iter().map(|&a| 2 * a + (factor + 1) * w).collect(),
    }
}

/// A box expressed in doubled coordinates.
pub fn doubled(b: &CellBox) -> CellBox {
    CellBox {
        lo: b.lo.iter().map(|v| 2 * v).collect(),
        hi: b.hi.iter().map(|v| 2 * v).collect(),
    }
}
