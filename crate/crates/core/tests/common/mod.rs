//! Oracles for the integration tests. None of these call the algorithms they
//! check: contents come from a plain recursive tree minimisation or from
//! exhaustive cube-subset enumeration, maximal functions from summing every
//! window cell by cell.

#![allow(dead_code)]

use oscmax::{BaseDomain, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coords(domain: &BaseDomain, cell: usize) -> Vec<usize> {
    let n = domain.side_cells();
    let mut out = vec![0; domain.dim];
    let mut rest = cell;
    for c in out.iter_mut().rev() {
        *c = rest % n;
        rest /= n;
    }
    out
}

pub fn index(domain: &BaseDomain, c: &[usize]) -> usize {
    let n = domain.side_cells();
    c.iter().fold(0, |acc, &x| acc * n + x)
}

fn cost(domain: &BaseDomain, t: usize, beta: f64) -> f64 {
    ((domain.cell_level() + t as i32) as f64 * beta).exp2()
}

/// Content by direct recursion over the dyadic tree: a node costs either its
/// own `ℓ^β` or the sum over its children, whichever is smaller.
pub fn tree_content(domain: &BaseDomain, mask: &[bool], beta: f64) -> f64 {
    fn go(domain: &BaseDomain, mask: &[bool], beta: f64, t: usize, node: &[usize]) -> f64 {
        let dim = domain.dim;
        if t == 0 {
            return if mask[index(domain, node)] { cost(domain, 0, beta) } else { 0.0 };
        }
        let mut sum = 0.0;
        for b in 0..1usize << dim {
            let child: Vec<usize> = (0..dim).map(|i| 2 * node[i] + ((b >> (dim - 1 - i)) & 1)).collect();
            sum += go(domain, mask, beta, t - 1, &child);
        }
        if sum == 0.0 {
            return 0.0;
        }
        let own = cost(domain, t, beta);
        if own <= sum {
            own
        } else {
            sum
        }
    }
    go(domain, mask, beta, domain.resolution as usize, &vec![0; domain.dim])
}

/// Minimum cover cost of every cell set of a small domain, by enumerating
/// every subset of the dyadic cubes inside the root and taking superset
/// minima. Index the result by the cell bitmask.
pub fn exhaustive_contents(domain: &BaseDomain, beta: f64) -> Vec<f64> {
    let cells = domain.cell_count();
    assert!(cells <= 16, "exhaustive oracle is limited to 16 cells");
    let m = domain.resolution as usize;
    // every dyadic cube as (covered mask, cost)
    let mut cubes: Vec<(u32, f64)> = Vec::new();
    for t in 0..=m {
        let per_axis = 1usize << (m - t);
        let count = per_axis.pow(domain.dim as u32);
        for idx in 0..count {
            let mut node = vec![0usize; domain.dim];
            let mut rest = idx;
            for c in node.iter_mut().rev() {
                *c = rest % per_axis;
                rest /= per_axis;
            }
            let mut covered = 0u32;
            for cell in 0..cells {
                let cc = coords(domain, cell);
                if cc.iter().zip(&node).all(|(&x, &q)| x >> t == q) {
                    covered |= 1 << cell;
                }
            }
            cubes.push((covered, cost(domain, t, beta)));
        }
    }
    let full = 1usize << cells;
    let mut best = vec![f64::INFINITY; full];
    for subset in 0u64..(1u64 << cubes.len()) {
        let mut covered = 0u32;
        let mut total = 0.0;
        for (i, &(c, w)) in cubes.iter().enumerate() {
            if subset >> i & 1 == 1 {
                covered |= c;
                total += w;
            }
        }
        let slot = &mut best[covered as usize];
        if total < *slot {
            *slot = total;
        }
    }
    // a cover of a superset covers the set
    for bit in 0..cells {
        for mask in (0..full).rev() {
            if mask >> bit & 1 == 0 {
                let up = best[mask | 1 << bit];
                if up < best[mask] {
                    best[mask] = up;
                }
            }
        }
    }
    best
}

/// Every contained window as (anchor, side) in cell coordinates.
pub fn windows(domain: &BaseDomain) -> Vec<(Vec<usize>, usize)> {
    let n = domain.side_cells();
    let mut out = Vec::new();
    for side in 1..=n {
        let per = n - side + 1;
        for idx in 0..per.pow(domain.dim as u32) {
            let mut a = vec![0usize; domain.dim];
            let mut rest = idx;
            for c in a.iter_mut().rev() {
                *c = rest % per;
                rest /= per;
            }
            out.push((a, side));
        }
    }
    out
}

pub fn window_cells(domain: &BaseDomain, anchor: &[usize], side: usize) -> Vec<usize> {
    (0..domain.cell_count())
        .filter(|&c| coords(domain, c).iter().zip(anchor).all(|(&x, &a)| x >= a && x < a + side))
        .collect()
}

/// `M_α f` by summing every contained window directly.
pub fn brute_fractional(f: &GridFunction, alpha: f64) -> Vec<f64> {
    let d = &f.domain;
    let vol = d.cell_volume();
    let mut out = vec![0.0; d.cell_count()];
    for (a, side) in windows(d) {
        let cells = window_cells(d, &a, side);
        let sum: f64 = cells.iter().map(|&c| f.values[c].abs()).sum();
        let len = side as f64 * d.cell_side();
        let div = if alpha == 0.0 { len.powi(d.dim as i32) } else { len.powf(d.dim as f64 - alpha) };
        let v = sum * vol / div;
        for c in cells {
            if v > out[c] {
                out[c] = v;
            }
        }
    }
    out
}

/// `∫ g dH^β` of a nonnegative cellwise function given on `cells` (zero
/// elsewhere), layer by layer with oracle contents.
pub fn layer_cake(domain: &BaseDomain, g: &[f64], cells: &[usize], beta: f64) -> f64 {
    let mut vals: Vec<f64> = cells.iter().map(|&c| g[c]).filter(|&v| v > 0.0).collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals.dedup();
    let mut total = 0.0;
    let mut prev = 0.0;
    for &t in &vals {
        let mut mask = vec![false; domain.cell_count()];
        for &c in cells {
            if g[c] >= t {
                mask[c] = true;
            }
        }
        total += (t - prev) * tree_content(domain, &mask, beta);
        prev = t;
    }
    total
}

/// `M^β f` over contained windows with oracle contents.
pub fn brute_beta_maximal(f: &GridFunction, beta: f64) -> Vec<f64> {
    let d = &f.domain;
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; d.cell_count()];
    for (a, side) in windows(d) {
        let cells = window_cells(d, &a, side);
        let mut mask = vec![false; d.cell_count()];
        for &c in &cells {
            mask[c] = true;
        }
        let v = layer_cake(d, &abs, &cells, beta) / tree_content(d, &mask, beta);
        for c in cells {
            if v > out[c] {
                out[c] = v;
            }
        }
    }
    out
}

/// Dyadic-rational random values `k / 8` with `|k| <= 16`.
pub fn dyadic_values(rng: &mut impl Rng, len: usize, signed: bool) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let k: i32 = if signed { rng.gen_range(-16..=16) } else { rng.gen_range(0..=16) };
            k as f64 / 8.0
        })
        .collect()
}

pub fn uniform_values(rng: &mut impl Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

/// `x <= y` up to relative rounding slack.
pub fn le(x: f64, y: f64) -> bool {
    x <= y + 1e-12 * (1.0 + x.abs().max(y.abs()))
}
