//! Capacitary mean oscillation: `essinf_β`, Choquet averages, `O_β(f, Q)`,
//! the modulus `ω_β` and the `BMO^{β,p}` / `BLO^{β,p}` norms.
//!
//! The inner infimum over constants is solved exactly. `F(c) = ∫_Q |f - c|^p
//! dH` is convex in `c` (the Choquet integral against a submodular content is
//! monotone and sublinear), so a binary search over the sorted cell values
//! brackets the minimiser between two neighbouring values. For `p = 1`, `F`
//! is piecewise linear with kinks only at cell values and pairwise
//! midpoints, and a second binary search over the midpoints inside the
//! bracket is exact. For `p > 1` a golden-section search runs inside the
//! bracket.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choquet::{GridFunction, Integrator};
use crate::content::{window_content, ContentParams};
use crate::error::{Error, Result};
use crate::geometry::{enumerate_windows, BaseDomain, CellBox, FamilyMember, Window, WindowFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationParams {
    pub content: ContentParams,
    pub p: f64,
    pub family: WindowFamily,
}

impl OscillationParams {
    pub fn new(beta: f64, p: f64) -> Result<Self> {
        let params = Self { content: ContentParams::new(beta)?, p, family: WindowFamily::Contained };
        params.check_p()?;
        Ok(params)
    }

    pub fn with_family(mut self, family: WindowFamily) -> Self {
        self.family = family;
        self
    }

    fn check_p(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::Parameter(format!("p must be at least 1, got {}", self.p)));
        }
        Ok(())
    }

    fn validate(&self, dim: usize) -> Result<()> {
        self.content.validate(dim)?;
        self.check_p()
    }
}

/// A norm value with the window that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm_value: f64,
    /// The cube whose content normalises the witness oscillation.
    pub witness_window: Window,
    /// Cells integrated over (the cube clipped to the root).
    pub witness_region: CellBox,
    /// Minimising constant for BMO, `essinf_β` for BLO.
    pub witness_c: Option<f64>,
}

/// Which oscillation functional a supremum ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillationKind {
    /// `inf_c ((1/H(Q)) ∫_Q |f - c|^p dH)^{1/p}`
    Bmo,
    /// `((1/H(Q)) ∫_Q (f - essinf_β f)^p dH)^{1/p}`
    Blo,
    /// `((1/H(Q)) ∫_Q |f - f_{Q,β}|^p dH)^{1/p}`, for `f >= 0`.
    AverageCentered,
}

/// Cells and normaliser of one family member, with values sorted ascending.
struct Sample {
    sorted: Vec<(f64, usize)>,
    norm: f64,
}

impl Sample {
    fn new(f: &GridFunction, member: &FamilyMember, params: ContentParams) -> Result<Self> {
        let mut sorted: Vec<(f64, usize)> =
            member.region.cells(&f.domain).into_iter().map(|c| (f.values[c], c)).collect();
        if sorted.is_empty() {
            return Err(Error::Precondition("window does not meet the root".into()));
        }
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let norm = window_content(&f.domain, &member.cube, params);
        Ok(Self { sorted, norm })
    }

    fn min(&self) -> f64 {
        self.sorted[0].0
    }

    fn distinct(&self) -> Vec<f64> {
        let mut u: Vec<f64> = self.sorted.iter().map(|x| x.0).collect();
        u.dedup();
        u
    }

    /// `∫ |f - c|^p dH` over the sample.
    fn objective(&self, integ: &mut Integrator, c: f64, p: f64) -> f64 {
        let s = &self.sorted;
        let (mut lo, mut hi) = (0usize, s.len());
        let pow = |d: f64| if p == 1.0 { d } else { d.powf(p) };
        // |v - c| is largest at one of the two ends of what remains
        let merged = std::iter::from_fn(|| {
            if lo == hi {
                return None;
            }
            let dl = (c - s[lo].0).abs();
            let dh = (s[hi - 1].0 - c).abs();
            if dl >= dh {
                lo += 1;
                Some((pow(dl), s[lo - 1].1))
            } else {
                hi -= 1;
                Some((pow(dh), s[hi].1))
            }
        });
        integ.integrate_sorted(merged)
    }

    /// `∫ (f - k)^p dH` for `k <= min f`.
    fn lower_objective(&self, integ: &mut Integrator, k: f64, p: f64) -> f64 {
        integ.integrate_sorted(self.sorted.iter().rev().map(|&(v, c)| {
            let d = v - k;
            (if p == 1.0 { d } else { d.powf(p) }, c)
        }))
    }

    /// Exact `argmin_c ∫ |f - c|^p dH` and the minimum.
    fn minimise(&self, integ: &mut Integrator, p: f64, lebesgue: bool) -> (f64, f64) {
        let u = self.distinct();
        if u.len() == 1 {
            return (u[0], 0.0);
        }
        let mut eval = |c: f64| self.objective(integ, c, p);
        if lebesgue && (p == 1.0 || p == 2.0) {
            let c = if p == 1.0 {
                // lower median of the cell values
                self.sorted[(self.sorted.len() - 1) / 2].0
            } else {
                self.sorted.iter().map(|x| x.0).sum::<f64>() / self.sorted.len() as f64
            };
            return (c, eval(c));
        }
        let i = convex_argmin(&u, &mut eval);
        let lo = u[i.saturating_sub(1)];
        let hi = u[(i + 1).min(u.len() - 1)];
        let at_value = eval(u[i]);
        if p == 1.0 {
            let cands = midpoints_in(&u, lo, hi);
            if cands.is_empty() {
                return (u[i], at_value);
            }
            let j = convex_argmin(&cands, &mut eval);
            let at_mid = eval(cands[j]);
            if at_mid < at_value {
                (cands[j], at_mid)
            } else {
                (u[i], at_value)
            }
        } else {
            let c = golden_section(lo, hi, &mut eval);
            let at_c = eval(c);
            if at_c < at_value {
                (c, at_c)
            } else {
                (u[i], at_value)
            }
        }
    }
}

/// Index minimising a convex function sampled at increasing points.
fn convex_argmin(points: &[f64], eval: &mut impl FnMut(f64) -> f64) -> usize {
    let (mut lo, mut hi) = (0usize, points.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if eval(points[mid]) <= eval(points[mid + 1]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Sorted distinct midpoints `(u_a + u_b) / 2`, `a < b`, strictly inside `(lo, hi)`.
fn midpoints_in(u: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for a in 0..u.len() {
        // u_b ranges over (2lo - u_a, 2hi - u_a)
        let start = u.partition_point(|&x| x <= 2.0 * lo - u[a]).max(a + 1);
        for &ub in &u[start.min(u.len())..] {
            let m = 0.5 * (u[a] + ub);
            if m >= hi {
                break;
            }
            if m > lo {
                out.push(m);
            }
        }
    }
    out.sort_unstable_by(f64::total_cmp);
    out.dedup();
    out
}

fn golden_section(mut a: f64, mut b: f64, eval: &mut impl FnMut(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let tol = 1e-13 * a.abs().max(b.abs()).max(1.0);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    0.5 * (a + b)
}

fn root_member(domain: &BaseDomain, w: &Window) -> Result<FamilyMember> {
    if w.dim() != domain.dim || w.side_cells == 0 {
        return Err(Error::Precondition("window has the wrong dimension or is empty".into()));
    }
    if !w.is_inside(domain) {
        return Err(Error::Precondition(format!("window {w:?} is not inside the root")));
    }
    Ok(FamilyMember::contained(w.clone()))
}

/// Oscillation of one family member: the value and the constant used.
pub fn member_oscillation(
    f: &GridFunction,
    member: &FamilyMember,
    params: &OscillationParams,
    kind: OscillationKind,
    integ: &mut Integrator,
) -> Result<(f64, f64)> {
    let sample = Sample::new(f, member, params.content)?;
    let p = params.p;
    let (c, total) = match kind {
        OscillationKind::Bmo => sample.minimise(integ, p, params.content.is_lebesgue(f.domain.dim)),
        OscillationKind::Blo => {
            let k = sample.min();
            (k, sample.lower_objective(integ, k, p))
        }
        OscillationKind::AverageCentered => {
            if sample.min() < 0.0 {
                return Err(Error::Domain("Choquet averages need a nonnegative function".into()));
            }
            let avg = integ.integrate_sorted(sample.sorted.iter().rev().copied()) / sample.norm;
            (avg, sample.objective(integ, avg, p))
        }
    };
    Ok((c, (total / sample.norm).powf(1.0 / p)))
}

/// `essinf_β` of `f` over a window: the cellwise minimum, since every
/// nonempty set of cells has positive content.
pub fn essinf_beta(f: &GridFunction, w: &Window, params: ContentParams) -> Result<f64> {
    params.validate(f.domain.dim)?;
    let m = root_member(&f.domain, w)?;
    Ok(m.region.cells(&f.domain).into_iter().map(|c| f.values[c]).fold(f64::INFINITY, f64::min))
}

/// `f_{Q,β} = H(Q)^{-1} ∫_Q f dH` for `f >= 0` on `Q`.
pub fn choquet_average(f: &GridFunction, w: &Window, params: ContentParams) -> Result<f64> {
    params.validate(f.domain.dim)?;
    let m = root_member(&f.domain, w)?;
    let sample = Sample::new(f, &m, params)?;
    if sample.min() < 0.0 {
        return Err(Error::Domain("Choquet averages need a nonnegative function".into()));
    }
    let mut integ = Integrator::new(&f.domain, params);
    Ok(integ.integrate_sorted(sample.sorted.iter().rev().copied()) / sample.norm)
}

/// `O_β` on one window (with exponent `p`): returns `(value, minimising c)`.
pub fn mean_oscillation(f: &GridFunction, w: &Window, params: &OscillationParams) -> Result<(f64, f64)> {
    params.validate(f.domain.dim)?;
    let m = root_member(&f.domain, w)?;
    let mut integ = Integrator::new(&f.domain, params.content);
    let (c, v) = member_oscillation(f, &m, params, OscillationKind::Bmo, &mut integ)?;
    Ok((v, c))
}

/// Supremum of an oscillation functional over the members of `params.family`
/// accepted by `keep`. Ties go to the first member in enumeration order.
/// Returns `None` for an empty family.
pub fn oscillation_sup(
    f: &GridFunction,
    params: &OscillationParams,
    kind: OscillationKind,
    keep: impl Fn(&FamilyMember) -> bool + Sync,
) -> Result<Option<NormReport>> {
    params.validate(f.domain.dim)?;
    let members: Vec<FamilyMember> =
        enumerate_windows(&f.domain, params.family)?.into_iter().filter(|m| keep(m)).collect();
    let results: Vec<Result<(f64, f64)>> = members
        .par_iter()
        .map_init(
            || Integrator::new(&f.domain, params.content),
            |integ, m| member_oscillation(f, m, params, kind, integ),
        )
        .collect();
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let (c, v) = r?;
        if best.map_or(true, |(_, bv, _)| v > bv) {
            best = Some((i, v, c));
        }
    }
    Ok(best.map(|(i, v, c)| NormReport {
        norm_value: v,
        witness_window: members[i].cube.clone(),
        witness_region: members[i].region.clone(),
        witness_c: Some(c),
    }))
}

/// Largest oscillation among the family members of each cube side: entry
/// `w` covers cubes of side `w` cells (0 where there are none).
pub fn oscillation_profile(f: &GridFunction, params: &OscillationParams, kind: OscillationKind) -> Result<Vec<f64>> {
    params.validate(f.domain.dim)?;
    let members = enumerate_windows(&f.domain, params.family)?;
    let values: Vec<Result<(f64, f64)>> = members
        .par_iter()
        .map_init(
            || Integrator::new(&f.domain, params.content),
            |integ, m| member_oscillation(f, m, params, kind, integ),
        )
        .collect();
    let max_side = members.iter().map(|m| m.cube.side_cells).max().unwrap_or(0) as usize;
    let mut out = vec![0.0; max_side + 1];
    for (m, r) in members.iter().zip(values) {
        let (_, v) = r?;
        let slot = &mut out[m.cube.side_cells as usize];
        *slot = f64::max(*slot, v);
    }
    Ok(out)
}

/// `ω(r)` for every `r` in cells from a profile: running maximum.
pub fn modulus_from_profile(profile: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    profile.iter().map(|&v| {
        acc = f64::max(acc, v);
        acc
    }).collect()
}

fn nonempty(r: Option<NormReport>) -> Result<NormReport> {
    r.ok_or_else(|| Error::Precondition("window family is empty".into()))
}

/// `‖f‖_{BMO^{β,p}}` over `params.family`.
pub fn bmo_norm(f: &GridFunction, params: &OscillationParams) -> Result<NormReport> {
    nonempty(oscillation_sup(f, params, OscillationKind::Bmo, |_| true)?)
}

/// `‖f‖_{BLO^{β,p}}` over `params.family`.
pub fn blo_norm(f: &GridFunction, params: &OscillationParams) -> Result<NormReport> {
    nonempty(oscillation_sup(f, params, OscillationKind::Blo, |_| true)?)
}

/// `ω_β(f, r)`: supremum of `O_β` over windows of side at most `r` (real
/// units). An empty family gives 0.
pub fn oscillation_modulus(f: &GridFunction, r: f64, params: &OscillationParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("r must be positive, got {r}")));
    }
    let max_cells = side_cells_at_most(&f.domain, r);
    let rep = oscillation_sup(f, params, OscillationKind::Bmo, |m| m.cube.side_cells <= max_cells)?;
    Ok(rep.map_or(0.0, |r| r.norm_value))
}

/// Largest window side in cells whose real length is at most `r`.
pub fn side_cells_at_most(domain: &BaseDomain, r: f64) -> u64 {
    let q = r / domain.cell_side();
    // absorb rounding in r = w · cell side
    (q * (1.0 + 1e-12)).floor().max(0.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dim: usize, m: u32, values: Vec<f64>) -> GridFunction {
        GridFunction::new(BaseDomain::unit(dim, m).unwrap(), values).unwrap()
    }

    fn op(beta: f64, p: f64) -> OscillationParams {
        OscillationParams::new(beta, p).unwrap()
    }

    /// Dense scan of c over [min, max] with the given step.
    fn grid_min(f: &GridFunction, w: &Window, params: &OscillationParams, step: f64) -> f64 {
        let m = FamilyMember::contained(w.clone());
        let s = Sample::new(f, &m, params.content).unwrap();
        let mut integ = Integrator::new(&f.domain, params.content);
        let (lo, hi) = (s.sorted[0].0, s.sorted.last().unwrap().0);
        let steps = ((hi - lo) / step).round() as usize;
        (0..=steps)
            .map(|k| s.objective(&mut integ, lo + k as f64 * step, params.p))
            .fold(f64::INFINITY, f64::min)
            .powf(1.0 / params.p)
            / s.norm.powf(1.0 / params.p)
    }

    #[test]
    fn essinf_and_average() {
        let f = grid(1, 2, vec![3.0, 1.0, 2.0, 5.0]);
        let root = f.domain.root_window();
        let cp = ContentParams::new(0.5).unwrap();
        assert_eq!(essinf_beta(&f, &root, cp).unwrap(), 1.0);
        let g = grid(1, 1, vec![2.0, 1.0]);
        let avg = choquet_average(&g, &g.domain.root_window(), cp).unwrap();
        assert!((avg - (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        let ind = grid(1, 2, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(choquet_average(&ind, &Window::new(vec![1], 2), cp).unwrap(), 1.0);
        assert!(choquet_average(&grid(1, 1, vec![-1.0, 1.0]), &Window::new(vec![0], 2), cp).is_err());
    }

    #[test]
    fn two_cell_oscillation() {
        let f = grid(1, 1, vec![0.0, 1.0]);
        let (v, c) = mean_oscillation(&f, &f.domain.root_window(), &op(0.5, 1.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15, "{v}");
        assert!((c - 0.5).abs() < 1e-15);
        let k = grid(1, 2, vec![1.5; 4]);
        assert_eq!(mean_oscillation(&k, &k.domain.root_window(), &op(0.5, 1.0)).unwrap(), (0.0, 1.5));
    }

    #[test]
    fn two_cell_norms() {
        let f = grid(1, 1, vec![0.0, 1.0]);
        let b = blo_norm(&f, &op(0.5, 1.0)).unwrap();
        assert!((b.norm_value - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.witness_window, f.domain.root_window());
        let p1 = op(1.0, 1.0);
        assert!((bmo_norm(&f, &p1).unwrap().norm_value - 0.5).abs() < 1e-15);
        assert!((blo_norm(&f, &p1).unwrap().norm_value - 0.5).abs() < 1e-15);
        let k = grid(2, 2, vec![-2.0; 16]);
        assert_eq!(bmo_norm(&k, &p1).unwrap().norm_value, 0.0);
        assert_eq!(blo_norm(&k, &op(1.3, 2.0)).unwrap().norm_value, 0.0);
    }

    #[test]
    fn p1_matches_dense_scan_on_lattice_values() {
        // values on a 0.01 lattice put every kink on the scan grid
        let vals: Vec<f64> = (0..16).map(|i| ((i * 37 + 11) % 101) as f64 / 100.0).collect();
        let f = grid(1, 4, vals);
        for beta in [0.3, 0.6, 1.0] {
            let params = op(beta, 1.0);
            for w in [Window::new(vec![0], 16), Window::new(vec![3], 7), Window::new(vec![5], 3)] {
                let (v, _) = mean_oscillation(&f, &w, &params).unwrap();
                let oracle = grid_min(&f, &w, &params, 1e-3);
                assert!((v - oracle).abs() < 1e-12, "beta {beta} {w:?}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn p2_matches_dense_scan() {
        // kinks sit on multiples of 0.005, which the scan visits
        let vals: Vec<f64> = (0..16).map(|i| ((i * 29 + 3) % 97) as f64 / 100.0).collect();
        let f = grid(1, 4, vals);
        for beta in [0.4, 0.9] {
            let params = op(beta, 2.0);
            let w = Window::new(vec![1], 12);
            let (v, _) = mean_oscillation(&f, &w, &params).unwrap();
            let oracle = grid_min(&f, &w, &params, 1e-4);
            assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
        }
    }

    #[test]
    fn lebesgue_path_matches_general_search() {
        let vals: Vec<f64> = (0..16).map(|i| ((i * 5 + 1) % 9) as f64 * 0.25).collect();
        let f = grid(2, 2, vals);
        for p in [1.0, 2.0] {
            let params = op(2.0, p);
            let m = FamilyMember::contained(Window::new(vec![0, 1], 3));
            let s = Sample::new(&f, &m, params.content).unwrap();
            let mut integ = Integrator::new(&f.domain, params.content);
            let (_, fast) = s.minimise(&mut integ, p, true);
            let (_, slow) = s.minimise(&mut integ, p, false);
            assert!((fast - slow).abs() <= 1e-12 * fast.max(1.0), "{fast} {slow}");
        }
    }

    #[test]
    fn witness_reproduces_value() {
        let vals: Vec<f64> = (0..64).map(|i| ((i * 13 + 7) % 23) as f64 / 7.0).collect();
        let f = grid(2, 3, vals);
        for family in [WindowFamily::Contained, WindowFamily::CenteredClipped { max_radius: None }] {
            let params = op(1.4, 1.5).with_family(family);
            let rep = bmo_norm(&f, &params).unwrap();
            let m = FamilyMember { region: rep.witness_region.clone(), cube: rep.witness_window.clone() };
            let s = Sample::new(&f, &m, params.content).unwrap();
            let mut integ = Integrator::new(&f.domain, params.content);
            let again = (s.objective(&mut integ, rep.witness_c.unwrap(), 1.5) / s.norm).powf(1.0 / 1.5);
            assert!((again - rep.norm_value).abs() < 1e-12);
        }
    }

    #[test]
    fn modulus_is_monotone_and_reaches_norm() {
        let vals: Vec<f64> = (0..32).map(|i| ((i * 7) % 5) as f64).collect();
        let f = grid(1, 5, vals);
        let params = op(0.7, 1.0);
        let mut prev = 0.0;
        for j in (0..=5).rev() {
            let r = (0.5f64).powi(j);
            let w = oscillation_modulus(&f, r, &params).unwrap();
            assert!(w >= prev);
            prev = w;
        }
        assert_eq!(prev, bmo_norm(&f, &params).unwrap().norm_value);
        assert_eq!(oscillation_modulus(&f, 1.0 / 64.0, &params).unwrap(), 0.0);
        let omega = modulus_from_profile(&oscillation_profile(&f, &params, OscillationKind::Bmo).unwrap());
        for w in 1..=32u64 {
            let direct = oscillation_modulus(&f, w as f64 / 32.0, &params).unwrap();
            assert_eq!(omega[w as usize], direct);
        }
        assert!(oscillation_modulus(&f, 0.0, &params).is_err());
    }

    #[test]
    fn blo_dominates_bmo_windowwise() {
        let vals: Vec<f64> = (0..16).map(|i| ((i * 11 + 2) % 13) as f64 - 4.0).collect();
        let f = grid(1, 4, vals);
        let params = op(0.6, 1.0);
        let mut integ = Integrator::new(&f.domain, params.content);
        for m in enumerate_windows(&f.domain, WindowFamily::Contained).unwrap() {
            let (_, o) = member_oscillation(&f, &m, &params, OscillationKind::Bmo, &mut integ).unwrap();
            let (_, b) = member_oscillation(&f, &m, &params, OscillationKind::Blo, &mut integ).unwrap();
            assert!(o <= b + 1e-12);
        }
    }

    #[test]
    fn midpoints_are_inside_bracket() {
        let u = [0.0, 0.25, 0.5, 1.5, 2.0];
        assert_eq!(midpoints_in(&u, 0.25, 1.5), vec![0.375, 0.75, 0.875, 1.0, 1.125, 1.25]);
        assert_eq!(midpoints_in(&u, 1.5, 2.0), vec![1.75]);
        assert!(midpoints_in(&u, 0.0, 0.125).is_empty());
    }
}
