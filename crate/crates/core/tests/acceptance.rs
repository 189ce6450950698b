//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use oscmax::oscillation::{oscillation_sup, OscillationKind};
use oscmax::verify::{run_suite, ExperimentConfig, Report, Status, Suite};
use oscmax::{
    beta_maximal, bmo_norm, choquet_integral, content, content_brute, fractional_maximal, local_global_split,
    mean_oscillation, BaseDomain, CellSet, ContentParams, GridFunction, MaximalParams, OscillationParams, Region,
    Window, WindowFamily,
};
use rand::Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn within(elapsed: Duration, secs: f64, o: Outcome) -> Outcome {
    let t = elapsed.as_secs_f64();
    if o.ok && t >= secs {
        fail(format!("{}; took {t:.1} s, budget {secs} s", o.detail))
    } else {
        Outcome { ok: o.ok, detail: format!("{}; {t:.2} s", o.detail) }
    }
}

fn mask_of(bits: u32, len: usize) -> Vec<bool> {
    (0..len).map(|i| bits >> i & 1 == 1).collect()
}

fn content_exactness() -> Outcome {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    // all 256 sets of a 1D m = 3 domain
    let d1 = BaseDomain::unit(1, 3).unwrap();
    for beta in [0.3, 0.5, 0.7, 1.0] {
        let params = ContentParams::new(beta).unwrap();
        let table = exhaustive_contents(&d1, beta);
        for bits in 0u32..256 {
            let mask = mask_of(bits, 8);
            let e = CellSet::from_mask(d1.clone(), &mask).unwrap();
            let dp = content(&e, params).unwrap().value;
            let brute = content_brute(&e, params).unwrap();
            let exhaustive = table[bits as usize];
            checked += 1;
            if dp != brute || (dp - exhaustive).abs() > 1e-12 * (1.0 + exhaustive) {
                mismatches.push(format!("1D beta {beta} mask {bits:08b}: dp {dp} brute {brute} exhaustive {exhaustive}"));
            }
        }
    }
    // 200 random sets of a 2D m = 2 domain
    let d2 = BaseDomain::unit(2, 2).unwrap();
    let mut r = rng(1);
    let tables: Vec<(f64, Vec<f64>)> = [0.3, 1.0, 1.7].iter().map(|&b| (b, exhaustive_contents(&d2, b))).collect();
    for i in 0..200 {
        let (beta, table) = &tables[i % tables.len()];
        let bits: u32 = r.gen_range(0..1 << 16);
        let e = CellSet::from_mask(d2.clone(), &mask_of(bits, 16)).unwrap();
        let params = ContentParams::new(*beta).unwrap();
        let dp = content(&e, params).unwrap().value;
        let brute = content_brute(&e, params).unwrap();
        let exhaustive = table[bits as usize];
        checked += 1;
        if dp != brute || (dp - exhaustive).abs() > 1e-12 * (1.0 + exhaustive) {
            mismatches.push(format!("2D beta {beta} mask {bits:016b}: dp {dp} brute {brute} exhaustive {exhaustive}"));
        }
    }
    if mismatches.is_empty() {
        pass(format!("{checked} sets: tree DP == antichain brute force (bitwise) == cube-subset enumeration"))
    } else {
        fail(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))
    }
}

fn content_axioms() -> Outcome {
    let mut r = rng(2);
    let mut violations = Vec::new();
    let mut pairs = 0;
    for beta in [0.3, 0.7, 1.0] {
        for (dim, m) in [(1usize, 6u32), (2, 3)] {
            let d = BaseDomain::unit(dim, m).unwrap();
            let params = ContentParams::new(beta).unwrap();
            let cells = d.cell_count();
            let h = |mask: &[bool]| content(&CellSet::from_mask(d.clone(), mask).unwrap(), params).unwrap().value;
            for _ in 0..1000 {
                let pa: f64 = r.gen_range(0.02..0.6);
                let pb: f64 = r.gen_range(0.02..0.6);
                let a: Vec<bool> = (0..cells).map(|_| r.gen_bool(pa)).collect();
                let b: Vec<bool> = (0..cells).map(|_| r.gen_bool(pb)).collect();
                let sup: Vec<bool> = a.iter().zip(&b).map(|(&x, &y)| x || y).collect();
                let cap: Vec<bool> = a.iter().zip(&b).map(|(&x, &y)| x && y).collect();
                let (ha, hb, hu, hi) = (h(&a), h(&b), h(&sup), h(&cap));
                pairs += 1;
                if !(ha <= hu && hb <= hu && hi <= ha && hi <= hb) {
                    violations.push(format!("monotonicity, beta {beta} n {dim}"));
                }
                if !le(hu, ha + hb) {
                    violations.push(format!("subadditivity, beta {beta} n {dim}: {hu} > {ha} + {hb}"));
                }
                if !le(hu + hi, ha + hb) {
                    violations.push(format!("strong subadditivity, beta {beta} n {dim}: {hu} + {hi} > {ha} + {hb}"));
                }
            }
        }
    }
    if violations.is_empty() {
        pass(format!("{pairs} set pairs, monotone, subadditive and strongly subadditive"))
    } else {
        fail(format!("{} violations, first: {}", violations.len(), violations[0]))
    }
}

fn cube_normalization() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (dim, betas) in [(1usize, vec![0.3, 0.7, 1.0]), (2, vec![0.3, 1.0, 1.7, 2.0])] {
        for beta in betas {
            let params = ContentParams::new(beta).unwrap();
            let mut consts = Vec::new();
            for m in [3u32, 4, 5] {
                let d = BaseDomain::unit(dim, m).unwrap();
                let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
                for (a, side) in windows(&d) {
                    let w = Window::new(a.iter().map(|&x| x as i64).collect(), side as u64);
                    let h = content(&CellSet::window(d.clone(), &w), params).unwrap().value;
                    let ell = side as f64 * d.cell_side();
                    if w.is_dyadic() {
                        let exact = ((d.cell_level() + side.trailing_zeros() as i32) as f64 * beta).exp2();
                        if h != exact {
                            ok = false;
                            notes.push(format!("dyadic window {w:?} n {dim} beta {beta} m {m}: {h} != {exact}"));
                        }
                    }
                    let q = h / ell.powf(beta);
                    c1 = c1.min(q);
                    c2 = c2.max(q);
                }
                consts.push((c1, c2));
            }
            let stable = consts.iter().all(|&(a, b)| {
                (a / consts[0].0 - 1.0).abs() <= 0.1 && (b / consts[0].1 - 1.0).abs() <= 0.1
            });
            ok &= stable;
            let shown: Vec<String> = consts.iter().map(|(a, b)| format!("({a:.4}, {b:.4})")).collect();
            notes.push(format!("n {dim} beta {beta}: (C1, C2) over m 3,4,5 = {}", shown.join(" ")));
        }
    }
    check(ok, format!("dyadic windows exact; {}", notes.join("; ")))
}

fn random_grid(r: &mut impl Rng, dim: usize, m: u32, lo: f64, hi: f64) -> GridFunction {
    let d = BaseDomain::unit(dim, m).unwrap();
    let n = d.cell_count();
    GridFunction::new(d, uniform_values(r, n, lo, hi)).unwrap()
}

fn choquet_laws() -> Outcome {
    let mut r = rng(4);
    let mut bad = Vec::new();
    let shapes = [(1usize, 4u32), (2, 2)];
    let betas = |dim: usize| if dim == 1 { vec![0.3, 0.6, 1.0] } else { vec![0.5, 1.2, 2.0] };
    let integral = |g: &GridFunction, beta: f64| choquet_integral(g, &Region::Root, ContentParams::new(beta).unwrap()).unwrap();
    // homogeneity: exact for power-of-two factors, up to rounding otherwise
    for i in 0..200 {
        let (dim, m) = shapes[i % 2];
        let beta = betas(dim)[i % 3];
        let f = random_grid(&mut r, dim, m, 0.0, 3.0);
        let base = integral(&f, beta);
        for c in [0.25, 2.0, 8.0] {
            if integral(&f.map(|v| c * v).unwrap(), beta) != c * base {
                bad.push(format!("homogeneity c = {c}"));
            }
        }
        let c: f64 = r.gen_range(0.0..5.0);
        let lhs = integral(&f.map(|v| c * v).unwrap(), beta);
        if (lhs - c * base).abs() > 1e-12 * (1.0 + lhs.abs()) {
            bad.push(format!("homogeneity c = {c}"));
        }
    }
    // sublinearity over triples
    for i in 0..1000 {
        let (dim, m) = shapes[i % 2];
        let beta = betas(dim)[i % 3];
        let f = random_grid(&mut r, dim, m, 0.0, 2.0);
        let g = random_grid(&mut r, dim, m, 0.0, 2.0);
        let h = random_grid(&mut r, dim, m, 0.0, 2.0);
        let sum = f.zip_with(&g, |a, b| a + b).unwrap().zip_with(&h, |a, b| a + b).unwrap();
        if !le(integral(&sum, beta), integral(&f, beta) + integral(&g, beta) + integral(&h, beta)) {
            bad.push("sublinearity".into());
        }
    }
    // Hölder over pairs
    for i in 0..1000 {
        let (dim, m) = shapes[i % 2];
        let beta = betas(dim)[i % 3];
        let f = random_grid(&mut r, dim, m, 0.0, 2.0);
        let g = random_grid(&mut r, dim, m, 0.0, 2.0);
        let p: f64 = r.gen_range(1.05..4.0);
        let q = p / (p - 1.0);
        let lhs = integral(&f.zip_with(&g, |a, b| a * b).unwrap(), beta);
        let rhs = integral(&f.map(|v| v.powf(p)).unwrap(), beta).powf(1.0 / p)
            * integral(&g.map(|v| v.powf(q)).unwrap(), beta).powf(1.0 / q);
        if !le(lhs, rhs) {
            bad.push(format!("Hölder p = {p}: {lhs} > {rhs}"));
        }
    }
    // layer cake against a Riemann sum of t -> H({f > t})
    let mut worst = 0.0f64;
    for i in 0..20 {
        let (dim, m) = shapes[i % 2];
        let beta = betas(dim)[i % 3];
        let f = random_grid(&mut r, dim, m, 0.0, 1.0);
        let d = &f.domain;
        let mut sorted = f.values.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        // H({f > t}) is constant between consecutive values; cache it per count
        let mut level_content = Vec::new();
        for k in 0..=sorted.len() {
            let mask: Vec<bool> = if k == 0 {
                f.values.iter().map(|_| true).collect()
            } else {
                f.values.iter().map(|&v| v > sorted[k - 1]).collect()
            };
            level_content.push(tree_content(d, &mask, beta));
        }
        let top = sorted[sorted.len() - 1];
        let steps = 4_000_000usize;
        let dt = top / steps as f64;
        let mut riemann = 0.0;
        for s in 0..steps {
            let t = (s as f64 + 0.5) * dt;
            let below = sorted.partition_point(|&v| v <= t);
            riemann += level_content[below] * dt;
        }
        let exact = integral(&f, beta);
        worst = worst.max((exact - riemann).abs() / exact);
    }
    if worst > 1e-6 {
        bad.push(format!("layer cake vs Riemann relative error {worst:e}"));
    }
    if bad.is_empty() {
        pass(format!(
            "homogeneity exact for powers of two; 1000 sublinearity triples, 1000 Hölder pairs clean; layer cake vs Riemann {worst:.1e}"
        ))
    } else {
        fail(format!("{} violations, first: {}", bad.len(), bad[0]))
    }
}

fn maximal_oracle() -> Outcome {
    let mut r = rng(5);
    let mut bad = Vec::new();
    let mut count = 0;
    for i in 0..50 {
        let m = 1 + (i % 6) as u32;
        let d = BaseDomain::unit(1, m).unwrap();
        let f = GridFunction::new(d.clone(), dyadic_values(&mut r, d.cell_count(), true)).unwrap();
        let alpha = [0.0, 0.25, 0.5, 0.75][i % 4];
        let fast = fractional_maximal(&f, &MaximalParams::new(alpha)).unwrap().values;
        count += 1;
        if fast != brute_fractional(&f, alpha) {
            bad.push(format!("M_alpha 1D m {m} alpha {alpha}"));
        }
    }
    for i in 0..20 {
        let m = 1 + (i % 3) as u32;
        let d = BaseDomain::unit(2, m).unwrap();
        let f = GridFunction::new(d.clone(), dyadic_values(&mut r, d.cell_count(), true)).unwrap();
        let alpha = [0.0, 0.5, 1.0, 1.5][i % 4];
        let fast = fractional_maximal(&f, &MaximalParams::new(alpha)).unwrap().values;
        count += 1;
        if fast != brute_fractional(&f, alpha) {
            bad.push(format!("M_alpha 2D m {m} alpha {alpha}"));
        }
    }
    for i in 0..40 {
        let m = 1 + (i % 4) as u32;
        let d = BaseDomain::unit(1, m).unwrap();
        let f = GridFunction::new(d.clone(), dyadic_values(&mut r, d.cell_count(), true)).unwrap();
        let beta = [0.3, 0.5, 0.7, 1.0][(i / 4) % 4];
        let fast = beta_maximal(&f, ContentParams::new(beta).unwrap(), WindowFamily::Contained).unwrap().values;
        count += 1;
        let oracle = brute_beta_maximal(&f, beta);
        if fast != oracle {
            bad.push(format!("M^beta 1D m {m} beta {beta}: {fast:?} vs {oracle:?}"));
        }
    }
    if bad.is_empty() {
        pass(format!("{count} functions, fast == window enumeration bitwise"))
    } else {
        fail(format!("{} mismatches, first: {}", bad.len(), bad[0]))
    }
}

fn pointwise_bound() -> Outcome {
    let mut r = rng(6);
    let mut bad = 0;
    for i in 0..200 {
        let (dim, m, beta) = [(1usize, 4u32, 0.4), (1, 5, 1.0), (2, 2, 0.8), (2, 3, 1.5)][i % 4];
        let f = random_grid(&mut r, dim, m, -2.0, 2.0);
        let g = random_grid(&mut r, dim, m, -2.0, 2.0);
        let params = ContentParams::new(beta).unwrap();
        let mf = beta_maximal(&f, params, WindowFamily::Contained).unwrap().values;
        let mg = beta_maximal(&g, params, WindowFamily::Contained).unwrap().values;
        let md = beta_maximal(&f.zip_with(&g, |a, b| a - b).unwrap(), params, WindowFamily::Contained).unwrap().values;
        bad += (0..mf.len()).filter(|&c| !le((mf[c] - mg[c]).abs(), md[c])).count();
    }
    check(bad == 0, format!("200 pairs, {bad} cellwise violations"))
}

/// Normalised objective `H(Q)^{-1} ∫_Q |f - c|^p` of one window on the grid
/// `min f + k·1e-5`; returns the smallest grid value and the evaluator.
struct DenseOracle {
    sorted: Vec<f64>,
    /// `table[a][b]`: content of the `a` smallest and `b` largest cells
    table: Vec<Vec<f64>>,
    hq: f64,
}

impl DenseOracle {
    fn new(f: &GridFunction, cells: &[usize], beta: f64) -> Self {
        let d = &f.domain;
        let mut order: Vec<usize> = cells.to_vec();
        order.sort_by(|&a, &b| f.values[a].total_cmp(&f.values[b]));
        let k = order.len();
        let mut table = vec![vec![0.0; k + 1]; k + 1];
        for a in 0..=k {
            for b in 0..=k - a {
                let mut mask = vec![false; d.cell_count()];
                for &c in order[..a].iter().chain(&order[k - b..]) {
                    mask[c] = true;
                }
                table[a][b] = tree_content(d, &mask, beta);
            }
        }
        let mut all = vec![false; d.cell_count()];
        for &c in cells {
            all[c] = true;
        }
        Self { sorted: order.iter().map(|&c| f.values[c]).collect(), table, hq: tree_content(d, &all, beta) }
    }

    fn objective(&self, c: f64, p: f64) -> f64 {
        let k = self.sorted.len();
        let (mut a, mut b) = (0usize, 0usize);
        let mut ds = Vec::with_capacity(k);
        while a + b < k {
            let lo = (self.sorted[a] - c).abs();
            let hi = (self.sorted[k - 1 - b] - c).abs();
            if hi >= lo {
                b += 1;
                ds.push((hi.powf(p), a, b));
            } else {
                a += 1;
                ds.push((lo.powf(p), a, b));
            }
        }
        let mut total = 0.0;
        for i in 0..k {
            let next = if i + 1 < k { ds[i + 1].0 } else { 0.0 };
            total += (ds[i].0 - next) * self.table[ds[i].1][ds[i].2];
        }
        total / self.hq
    }

    fn grid_min(&self, p: f64) -> f64 {
        let (lo, hi) = (self.sorted[0], self.sorted[self.sorted.len() - 1]);
        let steps = ((hi - lo) / 1e-5).round() as usize;
        (0..=steps).map(|k| self.objective(lo + k as f64 * 1e-5, p)).fold(f64::INFINITY, f64::min)
    }
}

fn oscillation_exactness() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    let mut witness_gap = 0.0f64;
    let mut below = 0;
    for i in 0..200 {
        let m = 2 + (i % 3) as u32;
        let d = BaseDomain::unit(1, m).unwrap();
        let n = d.side_cells();
        // values on a 0.01 lattice put every kink of the objective on the grid
        let vals: Vec<f64> = (0..n).map(|_| r.gen_range(0..=100) as f64 / 100.0).collect();
        let f = GridFunction::new(d.clone(), vals).unwrap();
        let side = r.gen_range(1..=n);
        let a = r.gen_range(0..=n - side);
        let w = Window::new(vec![a as i64], side as u64);
        let beta = [0.3, 0.5, 0.8, 1.0][i % 4];
        let oracle = DenseOracle::new(&f, &window_cells(&d, &[a], side), beta);
        for p in [1.0, 2.0] {
            let (value, c) = mean_oscillation(&f, &w, &OscillationParams::new(beta, p).unwrap()).unwrap();
            let mine = value.powf(p);
            let grid = oracle.grid_min(p);
            worst = worst.max((mine - grid).abs());
            witness_gap = witness_gap.max((oracle.objective(c, p) - mine).abs());
            if mine > grid + 1e-12 {
                below += 1;
            }
        }
    }
    check(
        worst <= 1e-9 && witness_gap <= 1e-12 && below == 0,
        format!(
            "400 minimisations: max |exact - dense grid| = {worst:.2e}, objective at returned c reproduces the value to {witness_gap:.1e}, exact above grid {below} times"
        ),
    )
}

fn factor_two_bounds() -> Outcome {
    let mut r = rng(8);
    let mut bad = Vec::new();
    let mut worst_abs = 0.0f64;
    let mut worst_avg = 0.0f64;
    for i in 0..200 {
        let (dim, m, beta) = [(1usize, 4u32, 0.4), (1, 5, 1.0), (2, 2, 0.9), (1, 4, 0.7)][i % 4];
        let f = random_grid(&mut r, dim, m, -2.0, 2.0);
        let params = OscillationParams::new(beta, 1.0).unwrap();
        let nf = bmo_norm(&f, &params).unwrap().norm_value;
        let nabs = bmo_norm(&f.abs(), &params).unwrap().norm_value;
        worst_abs = worst_abs.max(nabs / nf);
        if !le(nabs, 2.0 * nf) {
            bad.push(format!("|f| bound: {nabs} > 2 * {nf}"));
        }
        // sandwich for the nonnegative |f|: inf over c <= average-centred <= 2 inf over c
        let g = f.abs();
        let avg = oscillation_sup(&g, &params, OscillationKind::AverageCentered, |_| true).unwrap().unwrap().norm_value;
        worst_avg = worst_avg.max(avg / nabs);
        if !(le(nabs, avg) && le(avg, 2.0 * nabs)) {
            bad.push(format!("sandwich: {nabs} <= {avg} <= 2 * {nabs} fails"));
        }
    }
    if bad.is_empty() {
        pass(format!(
            "200 signed functions; largest ratios |f|/f = {worst_abs:.4}, average-centred/bmo = {worst_avg:.4}"
        ))
    } else {
        fail(format!("{} violations, first: {}", bad.len(), bad[0]))
    }
}

fn recombination() -> Outcome {
    let mut r = rng(9);
    let mut bad = 0;
    let mut splits = 0;
    for i in 0..20 {
        let (dim, m) = [(1usize, 5u32), (1, 4), (2, 3), (2, 2)][i % 4];
        let alpha = [0.0, 0.3, 0.5, 0.9][i % 4];
        let f = random_grid(&mut r, dim, m, -1.0, 3.0);
        let full = fractional_maximal(&f, &MaximalParams::new(alpha)).unwrap().values;
        for kappa in 1..=f.domain.side_cells() {
            let mut mp = MaximalParams::new(alpha);
            mp.split_scale = Some(kappa as f64);
            let (loc, glob) = local_global_split(&f, &mp).unwrap();
            let joined: Vec<f64> = loc.values.iter().zip(&glob.values).map(|(a, b)| a.max(*b)).collect();
            splits += 1;
            if joined != full {
                bad += 1;
            }
        }
    }
    check(bad == 0, format!("{splits} splits, {bad} differ from M_alpha"))
}

fn status_of<'a>(report: &'a Report, prefix: &str) -> Vec<(&'a str, Status, &'a str)> {
    report
        .verdicts
        .iter()
        .filter(|v| v.name.starts_with(prefix))
        .map(|v| (v.name.as_str(), v.status, v.detail.as_str()))
        .collect()
}

fn suite(s: Suite) -> Report {
    run_suite(&ExperimentConfig::default_for(s, 1), false).unwrap()
}

fn jn_decay() -> Outcome {
    let report = suite(Suite::JnBlo);
    let decay: Vec<_> =
        status_of(&report, "decay/").into_iter().filter(|(n, _, _)| n.contains("martingale")).collect();
    let mono: Vec<_> = status_of(&report, "monotone/");
    let ok = !decay.is_empty()
        && decay.iter().all(|v| v.1 == Status::Pass)
        && mono.iter().all(|v| v.1 == Status::Pass);
    let shown: Vec<String> = decay.iter().map(|(n, s, d)| format!("{n} {s:?} ({d})")).collect();
    check(
        ok,
        format!(
            "{}; distributions monotone: {}",
            shown.join(", "),
            mono.iter().all(|v| v.1 == Status::Pass)
        ),
    )
}

fn boundedness() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for s in [Suite::BloBoundedness, Suite::BetaMaximalBoundedness, Suite::SawyerLp] {
        let report = suite(s);
        for (name, status, detail) in status_of(&report, "ratio/sup_") {
            ok &= status == Status::Pass;
            let growth = detail.split("largest growth per doubling ").nth(1).unwrap_or(detail);
            notes.push(format!("{s} {name} {status:?}, growth {growth}"));
        }
        let cx = status_of(&report, "counterexample/");
        if s == Suite::BloBoundedness {
            let diverges = cx.len() == 1 && cx[0].1 == Status::DivergesAsPredicted;
            ok &= diverges;
            notes.push(format!("counterexample {:?}", cx.first().map(|v| v.1)));
        }
        ok &= report.config.resolutions.len() >= 4;
    }
    check(ok, notes.join("; "))
}

fn vmo_preservation() -> Outcome {
    let report = suite(Suite::VmoPreservation);
    let ladder: Vec<_> =
        status_of(&report, "omega_ladder/").into_iter().filter(|v| v.0.contains("sawtooth")).collect();
    let global: Vec<_> =
        status_of(&report, "global_decreasing").into_iter().filter(|v| v.0.contains("sawtooth")).collect();
    let ok = !ladder.is_empty()
        && !global.is_empty()
        && ladder.iter().chain(&global).all(|v| v.1 == Status::Pass);
    let shown: Vec<String> = ladder.iter().chain(&global).map(|(n, s, d)| format!("{n} {s:?} {d}")).collect();
    check(ok, shown.join("; "))
}

fn determinism() -> Outcome {
    let mut diffs = Vec::new();
    for s in Suite::ALL {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| suite(s).to_json().unwrap())
        };
        if run(1) != run(8) {
            diffs.push(s.to_string());
        }
    }
    check(diffs.is_empty(), format!("{} suites, differing: {:?}", Suite::ALL.len(), diffs))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<f64>);
    let criteria: [Criterion; 13] = [
        ("content exactness", content_exactness, Some(5.0)),
        ("content axioms", content_axioms, Some(10.0)),
        ("cube normalization", cube_normalization, None),
        ("Choquet laws", choquet_laws, None),
        ("maximal oracle equivalence", maximal_oracle, Some(60.0)),
        ("operator pointwise bound", pointwise_bound, None),
        ("oscillation exactness", oscillation_exactness, None),
        ("factor-2 bounds", factor_two_bounds, None),
        ("local/global recombination", recombination, None),
        ("John-Nirenberg decay", jn_decay, Some(30.0)),
        ("boundedness trends", boundedness, None),
        ("VMO preservation", vmo_preservation, None),
        ("determinism", determinism, None),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !filter.is_empty() && !filter.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let outcome = within(start.elapsed(), budget.unwrap_or(f64::INFINITY), outcome);
        let tag = if outcome.ok { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {tag} {name}: {}", outcome.detail);
        if !outcome.ok {
            failed.push(k);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
