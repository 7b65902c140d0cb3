//! Detection and embedding when an adversary re-encodes the published
//! sequence before it reaches the detector.
//!
//! The attacker observes the published sequence `y`, may not exceed a
//! per-symbol expected distortion budget, and outputs `z`; the detector sees
//! only `z` (and the watermark `u`). Two attacker models are covered:
//!
//! * a **known memoryless channel** ([`MemorylessAttack`]): each symbol is
//!   passed through a fixed row-stochastic matrix, so the detector can fold
//!   the channel into its null statistics via [`output_marginal`];
//! * the **worst distortion-limited channel** ([`wstar_prob`]): the channel
//!   that spreads its mass uniformly over every conditional type it can
//!   reach within the budget. It is the maximizer of the false-positive
//!   probability among channels that treat same-type sequences alike, and
//!   notably depends on nothing but the budget — not the detector threshold,
//!   the covertext law, or the embedder.
//!
//! The hardened decision regions ([`worstcase_accepts`],
//! [`random_wm_worstcase_accepts`]) replace the plain divergence term of the
//! attack-free rules with the smallest divergence any budget-feasible
//! pre-image law could have ([`min_divergence`]); the hardened embedders
//! ([`embed_memoryless_attack`], [`embed_worstcase`]) pick the published
//! type that maximizes the attacker's cheapest way into the rejection
//! region, and report that guaranteed cost alongside the sequence.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::detect::{Assignment, Decision, EmbedConstraint, TypeProblem};
use crate::empirical::{
    check_pmf, multinomial_count, Distortion, MemorylessSource, Sym,
    DEFAULT_ENUM_CAP,
};
use crate::error::{Error, Result};

/// A memoryless attack channel: output symbol `z` is drawn from the row pmf
/// selected by the input symbol `y`, independently across positions.
#[derive(Clone, Debug, PartialEq)]
pub struct MemorylessAttack {
    size: usize,
    rows: Vec<f64>,
}

impl MemorylessAttack {
    /// Builds a channel from row-major transition probabilities. Every row
    /// must be a pmf; rows that are off by more than the crate-wide pmf
    /// tolerance are rejected rather than renormalized.
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyInput);
        }
        if entries.len() != size * size {
            return Err(Error::LengthMismatch { left: entries.len(), right: size * size });
        }
        for row in entries.chunks(size) {
            check_pmf(row)?;
        }
        Ok(MemorylessAttack { size, rows: entries })
    }

    /// The channel that passes every symbol through unchanged.
    pub fn identity(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyInput);
        }
        let mut rows = vec![0.0; size * size];
        for a in 0..size {
            rows[a * size + a] = 1.0;
        }
        Ok(MemorylessAttack { size, rows })
    }

    /// Binary channel that flips each bit independently with probability
    /// `eps`.
    pub fn binary_symmetric(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::BadProbability { value: eps });
        }
        MemorylessAttack::new(2, vec![1.0 - eps, eps, eps, 1.0 - eps])
    }

    /// Common input/output alphabet size.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Transition probability of `z` given `y`.
    pub fn prob(&self, y: Sym, z: Sym) -> f64 {
        self.rows[y * self.size + z]
    }

    /// The row pmf for input symbol `y`.
    pub fn row(&self, y: Sym) -> &[f64] {
        &self.rows[y * self.size..(y + 1) * self.size]
    }
}

/// Distortion limit for the attacker: expected per-symbol distortion under
/// `distortion` must stay at or below `budget`.
#[derive(Clone, Debug)]
pub struct AttackBudget {
    pub distortion: Distortion,
    pub budget: f64,
}

impl AttackBudget {
    pub fn new(distortion: Distortion, budget: f64) -> Result<Self> {
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::Domain("attack distortion budget must be finite and nonnegative"));
        }
        Ok(AttackBudget { distortion, budget })
    }
}

/// Output of the attack-aware embedders: the published sequence together
/// with the guaranteed attacker cost of reaching the rejection region.
///
/// `guarantee` is the smallest conditional information the attacker must
/// leave between watermark and output while still being rejected; it is
/// `+∞` when every admissible attack statistic stays inside the acceptance
/// region, i.e. the attacker cannot cause a miss at all.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackEmbed {
    pub y: Vec<Sym>,
    pub guarantee: f64,
}

/// Distortion comparisons share one slack convention with the embedders:
/// a cost is in budget when `cost ≤ total·(1 + 1e-12) + 1e-12`.
fn within_budget(cost: f64, total: f64) -> bool {
    cost <= total * (1.0 + 1e-12) + 1e-12
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain("detection threshold must be positive and finite"));
    }
    Ok(())
}

/// Marginal law of the attack output when the input is drawn from `px` and
/// passed through `w`: `q(z) = Σ_y px(y)·w(z|y)`.
pub fn output_marginal(px: &MemorylessSource, w: &MemorylessAttack) -> Result<MemorylessSource> {
    if px.alphabet().size() != w.size() {
        return Err(Error::LengthMismatch { left: px.alphabet().size(), right: w.size() });
    }
    let size = w.size();
    let mut q = vec![0.0; size];
    for (y, &p) in px.pmf().iter().enumerate() {
        for (z, slot) in q.iter_mut().enumerate() {
            *slot += p * w.prob(y, z);
        }
    }
    MemorylessSource::new(q)
}

// --- count-level statistics ---------------------------------------------

/// Mutual information of a joint count table, in nats.
fn mi_from_counts(rows: usize, cols: usize, t: &[u64], n: u64) -> f64 {
    let mut row_tot = vec![0u64; rows];
    let mut col_tot = vec![0u64; cols];
    for r in 0..rows {
        for c in 0..cols {
            row_tot[r] += t[r * cols + c];
            col_tot[c] += t[r * cols + c];
        }
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let k = t[r * cols + c];
            if k > 0 {
                mi += (k as f64 / nf)
                    * ((k as f64 * nf) / (row_tot[r] as f64 * col_tot[c] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Divergence of a count table's empirical pmf from a reference pmf;
/// `+∞` when the counts put mass where the reference has none.
fn kl_counts_vs_pmf(counts: &[u64], q: &[f64], n: u64) -> f64 {
    let nf = n as f64;
    let mut d = 0.0;
    for (&k, &p) in counts.iter().zip(q) {
        if k > 0 {
            if p <= 0.0 {
                return f64::INFINITY;
            }
            d += (k as f64 / nf) * ((k as f64 / nf) / p).ln();
        }
    }
    d.max(0.0)
}

// --- the worst distortion-limited channel --------------------------------

/// Counts the budget-feasible conditional types of `z` given a sequence
/// with per-symbol counts `y_counts` (depth-first over per-row
/// compositions, pruning on spent distortion).
fn count_feasible_cond_types(y_counts: &[u64], d: &Distortion, total: f64) -> u64 {
    let size = y_counts.len();
    let rows: Vec<usize> = (0..size).filter(|&a| y_counts[a] > 0).collect();
    let min_rest: Vec<f64> = {
        let mut v = vec![0.0; rows.len() + 1];
        for (i, &a) in rows.iter().enumerate().rev() {
            v[i] = v[i + 1] + y_counts[a] as f64 * d.row_min(a);
        }
        v
    };
    // The recursion carries its whole state as parameters on purpose: the
    // enumeration is hot and a state struct would only add indirection.
    #[allow(clippy::too_many_arguments)]
    fn rec(
        rows: &[usize],
        y_counts: &[u64],
        d: &Distortion,
        total: f64,
        min_rest: &[f64],
        i: usize,
        b: usize,
        left: u64,
        spent: f64,
        size: usize,
    ) -> u64 {
        if i == rows.len() {
            return 1;
        }
        let a = rows[i];
        if !within_budget(spent + min_rest[i + 1] + left as f64 * d.row_min(a), total) {
            return 0;
        }
        if b + 1 == size {
            let extra = left as f64 * d.get(a, b);
            if within_budget(spent + extra + min_rest[i + 1], total) {
                let next_left = rows.get(i + 1).map(|&a2| y_counts[a2]).unwrap_or(0);
                return rec(rows, y_counts, d, total, min_rest, i + 1, 0, next_left, spent + extra, size);
            }
            return 0;
        }
        let mut acc = 0;
        for k in 0..=left {
            acc += rec(
                rows,
                y_counts,
                d,
                total,
                min_rest,
                i,
                b + 1,
                left - k,
                spent + k as f64 * d.get(a, b),
                size,
            );
        }
        acc
    }
    let first_left = rows.first().map(|&a| y_counts[a]).unwrap_or(0);
    rec(&rows, y_counts, d, total, &min_rest, 0, 0, first_left, 0.0, size)
}

/// Normalizer `c_n(y)` of the worst-case channel: the reciprocal of the
/// number of budget-feasible conditional types of `z` given `y`. Satisfies
/// `(n+1)^{-|A|²} ≤ c_n ≤ 1`.
pub fn wstar_normalizer(y: &[Sym], budget: &AttackBudget) -> Result<f64> {
    let size = budget.distortion.size();
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if y.len() > DEFAULT_ENUM_CAP {
        return Err(Error::CapExceeded { needed: y.len(), cap: DEFAULT_ENUM_CAP });
    }
    for &s in y {
        if s >= size {
            return Err(Error::SymbolOutOfRange { symbol: s, size });
        }
    }
    let mut y_counts = vec![0u64; size];
    for &s in y {
        y_counts[s] += 1;
    }
    let total = budget.budget * y.len() as f64;
    let feasible = count_feasible_cond_types(&y_counts, &budget.distortion, total);
    if feasible == 0 {
        return Err(Error::Infeasible("no attack output is within the distortion budget"));
    }
    Ok(1.0 / feasible as f64)
}

/// Transition probability of the worst distortion-limited channel.
///
/// The channel puts zero mass on outputs over budget and otherwise spreads
/// `c_n(y)` uniformly within each feasible conditional type:
/// `W*(z|y) = c_n(y) / |T(z|y)|`. By construction it is constant on
/// conditional types (strong exchangeability) and its rows sum to one.
/// Note the signature: the channel is fully determined by the budget alone.
pub fn wstar_prob(y: &[Sym], z: &[Sym], budget: &AttackBudget) -> Result<f64> {
    if y.len() != z.len() {
        return Err(Error::LengthMismatch { left: y.len(), right: z.len() });
    }
    let size = budget.distortion.size();
    for &s in z {
        if s >= size {
            return Err(Error::SymbolOutOfRange { symbol: s, size });
        }
    }
    let cn = wstar_normalizer(y, budget)?;
    let cost = budget.distortion.seq_cost(y, z)?;
    if !within_budget(cost, budget.budget * y.len() as f64) {
        return Ok(0.0);
    }
    // |T(z|y)|: within each group of positions holding the same y-symbol,
    // the class is free to permute that group's z-symbols.
    let mut t_size = 1u128;
    for a in 0..size {
        let mut parts = vec![0u64; size];
        for (yy, zz) in y.iter().zip(z) {
            if *yy == a {
                parts[*zz] += 1;
            }
        }
        t_size = t_size
            .checked_mul(multinomial_count(&parts)?)
            .ok_or(Error::Domain("conditional type class too large to count"))?;
    }
    Ok(cn / t_size as f64)
}

// --- smallest divergence of a budget-feasible pre-image law ---------------

/// Exact minimizer over the 1/n grid: enumerates every joint count table
/// whose column sums equal `z_counts` and whose total distortion is within
/// the per-symbol budget, and returns the smallest divergence of the row
/// marginal from `px`. Returns `+∞` when no table is feasible. Cost grows
/// combinatorially with `n`; intended as the small-`n` oracle.
pub fn min_divergence_grid(
    z_counts: &[u64],
    px: &MemorylessSource,
    budget: &AttackBudget,
) -> Result<f64> {
    let size = px.alphabet().size();
    if z_counts.len() != size || budget.distortion.size() != size {
        return Err(Error::LengthMismatch { left: z_counts.len(), right: size });
    }
    let n: u64 = z_counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let total = budget.budget * n as f64;
    let cols: Vec<usize> = (0..size).filter(|&zv| z_counts[zv] > 0).collect();
    // Cheapest completion cost for columns i.. (the attacker reads columns,
    // the pre-image law rows: entry (y, z) costs d(y, z)).
    let col_min = |zv: usize| (0..size).map(|yv| budget.distortion.get(yv, zv)).fold(f64::INFINITY, f64::min);
    let mut min_rest = vec![0.0; cols.len() + 1];
    for (i, &zv) in cols.iter().enumerate().rev() {
        min_rest[i] = min_rest[i + 1] + z_counts[zv] as f64 * col_min(zv);
    }

    let mut rows = vec![0u64; size];
    let mut best = f64::INFINITY;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        cols: &[usize],
        z_counts: &[u64],
        px: &MemorylessSource,
        d: &Distortion,
        total: f64,
        min_rest: &[f64],
        n: u64,
        i: usize,
        yv: usize,
        left: u64,
        spent: f64,
        rows: &mut Vec<u64>,
        best: &mut f64,
    ) {
        let size = z_counts.len();
        if i == cols.len() {
            let div = kl_counts_vs_pmf(rows, px.pmf(), n);
            if div < *best {
                *best = div;
            }
            return;
        }
        let zv = cols[i];
        let cheapest_here = (0..size).map(|y2| d.get(y2, zv)).fold(f64::INFINITY, f64::min);
        if !within_budget(spent + min_rest[i + 1] + left as f64 * cheapest_here, total) {
            return;
        }
        if yv + 1 == size {
            let extra = left as f64 * d.get(yv, zv);
            if within_budget(spent + extra + min_rest[i + 1], total) {
                rows[yv] += left;
                let next_left = cols.get(i + 1).map(|&z2| z_counts[z2]).unwrap_or(0);
                rec(cols, z_counts, px, d, total, min_rest, n, i + 1, 0, next_left, spent + extra, rows, best);
                rows[yv] -= left;
            }
            return;
        }
        for k in 0..=left {
            rows[yv] += k;
            rec(
                cols,
                z_counts,
                px,
                d,
                total,
                min_rest,
                n,
                i,
                yv + 1,
                left - k,
                spent + k as f64 * d.get(yv, zv),
                rows,
                best,
            );
            rows[yv] -= k;
        }
    }
    let first_left = cols.first().map(|&zv| z_counts[zv]).unwrap_or(0);
    rec(
        &cols,
        z_counts,
        px,
        &budget.distortion,
        total,
        &min_rest,
        n,
        0,
        0,
        first_left,
        0.0,
        &mut rows,
        &mut best,
    );
    Ok(best)
}

/// One vertex of the transport polytope `{M ≥ 0, column sums = pz,
/// ⟨d, M⟩ ≤ Da}`: a per-column row choice, with at most one column split
/// between two rows to sit exactly on the distortion boundary.
struct Vertex {
    m: Vec<f64>,
    obj: f64,
}

/// Exact linear-minimization step for the Frank–Wolfe solver: minimizes
/// `⟨g, M⟩` over the transport polytope by enumerating its vertices (all
/// pure per-column assignments, plus every one-column split that lands the
/// distortion exactly on the budget). Exponential in the alphabet size but
/// exact; alphabets here are tiny.
fn transport_lmo(
    g: &[f64],
    pz: &[f64],
    live: &[usize],
    d: &Distortion,
    da: f64,
    size: usize,
) -> Vertex {
    let cols: Vec<usize> = (0..size).filter(|&z| pz[z] > 0.0).collect();
    let nc = cols.len();
    let mut choice = vec![0usize; nc];
    let mut best: Option<Vertex> = None;

    fn consider(best: &mut Option<Vertex>, m: Vec<f64>, obj: f64) {
        if best.as_ref().is_none_or(|b| obj < b.obj) {
            *best = Some(Vertex { m, obj });
        }
    }

    // Iterate over all |live|^nc pure assignments via an odometer.
    loop {
        let mut cost = 0.0;
        let mut obj = 0.0;
        for (ci, &z) in cols.iter().enumerate() {
            let y = live[choice[ci]];
            cost += pz[z] * d.get(y, z);
            obj += pz[z] * g[y * size + z];
        }
        let build = |choice: &[usize], split: Option<(usize, usize, f64)>| -> Vec<f64> {
            let mut m = vec![0.0; size * size];
            for (ci, &z) in cols.iter().enumerate() {
                let y = live[choice[ci]];
                m[y * size + z] = pz[z];
            }
            if let Some((ci, alt, theta)) = split {
                let z = cols[ci];
                let y = live[choice[ci]];
                m[y * size + z] = pz[z] * (1.0 - theta);
                m[alt * size + z] += pz[z] * theta;
            }
            m
        };
        if cost <= da {
            consider(&mut best, build(&choice, None), obj);
        }
        // One-column splits that pull the cost back to exactly `da`.
        for (ci, &z) in cols.iter().enumerate() {
            let y = live[choice[ci]];
            for &alt in live {
                if alt == y {
                    continue;
                }
                let delta = pz[z] * (d.get(alt, z) - d.get(y, z));
                if delta == 0.0 {
                    continue;
                }
                let theta = (da - cost) / delta;
                if theta > 0.0 && theta < 1.0 {
                    let obj_split = obj + theta * pz[z] * (g[alt * size + z] - g[y * size + z]);
                    consider(&mut best, build(&choice, Some((ci, alt, theta))), obj_split);
                }
            }
        }
        // Advance the odometer.
        let mut ci = 0;
        loop {
            if ci == nc {
                return best.expect("transport polytope has at least one vertex");
            }
            choice[ci] += 1;
            if choice[ci] < live.len() {
                break;
            }
            choice[ci] = 0;
            ci += 1;
        }
    }
}

fn rowsums(m: &[f64], size: usize) -> Vec<f64> {
    let mut p = vec![0.0; size];
    for y in 0..size {
        for z in 0..size {
            p[y] += m[y * size + z];
        }
    }
    p
}

/// Divergence of the row marginal from `px`, treating rows with zero
/// reference mass as forbidden (`+∞` if they carry mass).
fn row_divergence(p: &[f64], px: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(px) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            d += pi * (pi / qi).ln();
        }
    }
    d.max(0.0)
}

/// Golden-section minimizer on `[lo, hi]` for a scalar unimodal function.
fn golden_scalar(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Continuous minimizer: Frank–Wolfe with away steps over the transport
/// polytope, exact vertex linear-minimization, and exact line search on the
/// row-marginal divergence. Stops when the linear-minimization certificate
/// bounds the suboptimality by `1e-8` (or after 10⁴ iterations) and returns
/// the achieved divergence — a value never above the 1/n-grid minimum for
/// the matching empirical column marginal. Returns `+∞` when no
/// budget-feasible transport avoids the rows `px` excludes.
pub fn min_divergence_fw(
    pz: &[f64],
    px: &MemorylessSource,
    budget: &AttackBudget,
) -> Result<f64> {
    let size = px.alphabet().size();
    if pz.len() != size || budget.distortion.size() != size {
        return Err(Error::LengthMismatch { left: pz.len(), right: size });
    }
    check_pmf(pz)?;
    let live: Vec<usize> = (0..size).filter(|&y| px.prob(y) > 0.0).collect();
    let da = budget.budget;
    // Feasibility: cheapest transport restricted to permitted rows.
    let base: f64 = (0..size)
        .filter(|&z| pz[z] > 0.0)
        .map(|z| {
            pz[z] * live.iter().map(|&y| budget.distortion.get(y, z)).fold(f64::INFINITY, f64::min)
        })
        .sum();
    if !within_budget(base, da) {
        return Ok(f64::INFINITY);
    }

    // Start from the cheapest pure assignment (always feasible).
    let mut m = vec![0.0; size * size];
    for z in 0..size {
        if pz[z] > 0.0 {
            let y = *live
                .iter()
                .min_by(|&&a, &&b| {
                    budget
                        .distortion
                        .get(a, z)
                        .partial_cmp(&budget.distortion.get(b, z))
                        .expect("distortion entries are finite")
                })
                .expect("at least one permitted row");
            m[y * size + z] = pz[z];
        }
    }
    let mut atoms: Vec<(Vec<f64>, f64)> = vec![(m.clone(), 1.0)];

    let grad = |p: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; size * size];
        for y in 0..size {
            let gy = if px.prob(y) > 0.0 {
                (p[y].max(1e-300) / px.prob(y)).ln() + 1.0
            } else {
                // Never proposed by the oracle; an arbitrary finite value.
                0.0
            };
            for z in 0..size {
                g[y * size + z] = gy;
            }
        }
        g
    };
    let inner = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    for _ in 0..10_000 {
        let p = rowsums(&m, size);
        let g = grad(&p);
        let s = transport_lmo(&g, pz, &live, &budget.distortion, da, size);
        let gap = inner(&g, &m) - s.obj;
        if gap <= 1e-8 {
            break;
        }
        // Away atom: the loaded vertex the gradient most wants to leave.
        let ai = atoms
            .iter()
            .enumerate()
            .max_by(|(_, (a, _)), (_, (b, _))| {
                inner(&g, a).partial_cmp(&inner(&g, b)).expect("finite gradient")
            })
            .map(|(i, _)| i)
            .expect("atom list never empty");
        let away_gain = inner(&g, &atoms[ai].0) - inner(&g, &m);

        let (dir, gamma_max, away): (Vec<f64>, f64, bool) = if gap >= away_gain {
            (s.m.iter().zip(&m).map(|(si, mi)| si - mi).collect(), 1.0, false)
        } else {
            let w = atoms[ai].1;
            (
                m.iter().zip(&atoms[ai].0).map(|(mi, aiv)| mi - aiv).collect(),
                w / (1.0 - w).max(1e-15),
                true,
            )
        };
        let delta = rowsums(&dir, size);
        let phi = |t: f64| -> f64 {
            let moved: Vec<f64> = p.iter().zip(&delta).map(|(pi, di)| pi + t * di).collect();
            row_divergence(&moved, px.pmf())
        };
        let gamma = golden_scalar(phi, 0.0, gamma_max, 80).clamp(0.0, gamma_max);
        if gamma <= 0.0 {
            break;
        }
        for (mi, di) in m.iter_mut().zip(&dir) {
            *mi += gamma * di;
        }
        if away {
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 + gamma;
            }
            atoms[ai].1 -= gamma;
            if atoms[ai].1 <= 1e-14 {
                atoms.swap_remove(ai);
            }
        } else {
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 - gamma;
            }
            match atoms.iter_mut().find(|(a, _)| {
                a.iter().zip(&s.m).all(|(x, y)| (x - y).abs() <= 1e-14)
            }) {
                Some((_, w)) => *w += gamma,
                None => atoms.push((s.m.clone(), gamma)),
            }
        }
        // Keep the weights an exact convex combination against drift.
        let tot: f64 = atoms.iter().map(|(_, w)| *w).sum();
        if (tot - 1.0).abs() > 1e-12 {
            for (_, w) in atoms.iter_mut() {
                *w /= tot;
            }
        }
    }
    Ok(row_divergence(&rowsums(&m, size), px.pmf()))
}

/// Smallest divergence from `px` of any row marginal reachable by a
/// budget-feasible transport onto the observed output counts. Dispatches to
/// the exact 1/n-grid enumeration for `n ≤ 8` and to the continuous
/// Frank–Wolfe solver beyond; both directions keep the hardened regions'
/// false-positive guarantee, since shrinking the divergence only shrinks
/// the acceptance region.
pub fn min_divergence(
    z_counts: &[u64],
    px: &MemorylessSource,
    budget: &AttackBudget,
) -> Result<f64> {
    let n: u64 = z_counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if n <= 8 {
        min_divergence_grid(z_counts, px, budget)
    } else {
        let pz: Vec<f64> = z_counts.iter().map(|&k| k as f64 / n as f64).collect();
        min_divergence_fw(&pz, px, budget)
    }
}

// --- attack-aware decision regions ---------------------------------------

fn uz_joint_counts(u: &[Sym], z: &[Sym], size: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    if u.len() != z.len() {
        return Err(Error::LengthMismatch { left: u.len(), right: z.len() });
    }
    if u.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut uz = vec![0u64; 2 * size];
    let mut zc = vec![0u64; size];
    for (&uv, &zv) in u.iter().zip(z) {
        if uv >= 2 {
            return Err(Error::SymbolOutOfRange { symbol: uv, size: 2 });
        }
        if zv >= size {
            return Err(Error::SymbolOutOfRange { symbol: zv, size });
        }
        uz[uv * size + zv] += 1;
        zc[zv] += 1;
    }
    Ok((uz, zc))
}

/// Decision rule against a known memoryless attack: claims the watermark
/// when `n·[Î(Z;U) + D(P̂_z‖Q)] ≥ nλ − |A|·ln(n+1)`, with `Q` the attacked
/// null marginal (see [`output_marginal`]) and `|A|` its alphabet size. With
/// the identity channel this is exactly the known-source rule rewritten in
/// its information form.
pub fn memoryless_attack_accepts(
    q: &MemorylessSource,
    u: &[Sym],
    z: &[Sym],
    lambda: f64,
) -> Result<Decision> {
    check_lambda(lambda)?;
    let size = q.alphabet().size();
    let (uz, zc) = uz_joint_counts(u, z, size)?;
    let n = z.len() as f64;
    let mi = mi_from_counts(2, size, &uz, z.len() as u64);
    let div = kl_counts_vs_pmf(&zc, q.pmf(), z.len() as u64);
    let lhs = n * (mi + div);
    let rhs = lambda * n - size as f64 * (n + 1.0).ln();
    Ok(if lhs >= rhs { Decision::H1 } else { Decision::H0 })
}

/// Decision rule hardened against every distortion-limited exchangeable
/// attack: claims the watermark when
/// `Î(Z;U) + min-divergence ≥ λ + |A|·ln(n+1)/n`, where the minimum runs
/// over pre-image laws within the attacker's budget ([`min_divergence`]).
pub fn worstcase_accepts(
    px: &MemorylessSource,
    u: &[Sym],
    z: &[Sym],
    lambda: f64,
    budget: &AttackBudget,
) -> Result<Decision> {
    check_lambda(lambda)?;
    let size = px.alphabet().size();
    if budget.distortion.size() != size {
        return Err(Error::LengthMismatch { left: budget.distortion.size(), right: size });
    }
    let (uz, zc) = uz_joint_counts(u, z, size)?;
    let n = z.len() as f64;
    let mi = mi_from_counts(2, size, &uz, z.len() as u64);
    let inner = min_divergence(&zc, px, budget)?;
    let lhs = mi + inner;
    let rhs = lambda + size as f64 * (n + 1.0).ln() / n;
    Ok(if lhs >= rhs { Decision::H1 } else { Decision::H0 })
}

/// Random-watermark variant of [`worstcase_accepts`]: adds the divergence
/// of the observed watermark type from its law, so atypical watermarks must
/// clear a higher bar.
pub fn random_wm_worstcase_accepts(
    px: &MemorylessSource,
    pu: &MemorylessSource,
    u: &[Sym],
    z: &[Sym],
    lambda: f64,
    budget: &AttackBudget,
) -> Result<Decision> {
    check_lambda(lambda)?;
    if pu.alphabet().size() != 2 {
        return Err(Error::Domain("watermark law must be binary"));
    }
    let size = px.alphabet().size();
    if budget.distortion.size() != size {
        return Err(Error::LengthMismatch { left: budget.distortion.size(), right: size });
    }
    let (uz, zc) = uz_joint_counts(u, z, size)?;
    let n = z.len() as f64;
    let mut uc = [0u64; 2];
    for &uv in u {
        uc[uv] += 1;
    }
    let mi = mi_from_counts(2, size, &uz, z.len() as u64);
    let udiv = kl_counts_vs_pmf(&uc, pu.pmf(), z.len() as u64);
    let inner = min_divergence(&zc, px, budget)?;
    let lhs = mi + udiv + inner;
    let rhs = lambda + size as f64 * (n + 1.0).ln() / n;
    Ok(if lhs >= rhs { Decision::H1 } else { Decision::H0 })
}

// --- attack-aware embedders ----------------------------------------------

/// Joint (watermark bit, published symbol) cell sizes induced by an outer
/// assignment; the attacker's conditional types are compositions of these
/// cells over the output alphabet.
struct InnerGrid {
    cells: Vec<(Sym, Sym)>,
    sizes: Vec<u64>,
    cols: usize,
    n: u64,
}

impl InnerGrid {
    fn from_outer(p: &TypeProblem, outer: &Assignment) -> InnerGrid {
        let mut agg: BTreeMap<(Sym, Sym), u64> = BTreeMap::new();
        for (c, row) in outer.iter().enumerate() {
            let uv = p.classes.pairs[c].1;
            for (b, &k) in row.iter().enumerate() {
                if k > 0 {
                    *agg.entry((uv, b)).or_insert(0) += k;
                }
            }
        }
        let mut cells = Vec::with_capacity(agg.len());
        let mut sizes = Vec::with_capacity(agg.len());
        let mut n = 0;
        for ((uv, b), k) in agg {
            cells.push((uv, b));
            sizes.push(k);
            n += k;
        }
        InnerGrid { cells, sizes, cols: p.cols, n }
    }

    /// Visits every conditional-type candidate for the attack output: all
    /// per-cell compositions over the output alphabet.
    fn for_each(&self, f: &mut dyn FnMut(&[Vec<u64>])) {
        let mut current: Vec<Vec<u64>> = vec![vec![0u64; self.cols]; self.cells.len()];
        fn rec(
            sizes: &[u64],
            cols: usize,
            cell: usize,
            b: usize,
            left: u64,
            current: &mut Vec<Vec<u64>>,
            f: &mut dyn FnMut(&[Vec<u64>]),
        ) {
            if cell == sizes.len() {
                f(current);
                return;
            }
            if b + 1 == cols {
                current[cell][b] = left;
                let next_left = sizes.get(cell + 1).copied().unwrap_or(0);
                rec(sizes, cols, cell + 1, 0, next_left, current, f);
                current[cell][b] = 0;
                return;
            }
            for k in 0..=left {
                current[cell][b] = k;
                rec(sizes, cols, cell, b + 1, left - k, current, f);
            }
            current[cell][b] = 0;
        }
        let first = self.sizes.first().copied().unwrap_or(0);
        rec(&self.sizes, self.cols, 0, 0, first, &mut current, f);
    }

    /// Watermark/published-symbol joint counts (the cells themselves).
    fn uy_counts(&self) -> Vec<u64> {
        let mut uy = vec![0u64; 2 * self.cols];
        for ((uv, b), &k) in self.cells.iter().zip(&self.sizes) {
            uy[uv * self.cols + b] += k;
        }
        uy
    }

    fn y_counts(&self) -> Vec<u64> {
        let mut yc = vec![0u64; self.cols];
        for ((_, b), &k) in self.cells.iter().zip(&self.sizes) {
            yc[*b] += k;
        }
        yc
    }
}

/// Count statistics of one attack conditional type laid over an inner grid.
struct TripleStats {
    uz: Vec<u64>,
    yz: Vec<u64>,
    zc: Vec<u64>,
    yc: Vec<u64>,
    /// Conditional mutual information Î(Z;U|Y) in nats.
    cond_mi: f64,
    cols: usize,
    n: u64,
}

impl TripleStats {
    fn new(grid: &InnerGrid, za: &[Vec<u64>]) -> TripleStats {
        let cols = grid.cols;
        let mut uz = vec![0u64; 2 * cols];
        let mut yz = vec![0u64; cols * cols];
        let mut zc = vec![0u64; cols];
        let yc = grid.y_counts();
        for ((&(uv, b), _), row) in grid.cells.iter().zip(&grid.sizes).zip(za) {
            for (zv, &k) in row.iter().enumerate() {
                if k > 0 {
                    uz[uv * cols + zv] += k;
                    yz[b * cols + zv] += k;
                    zc[zv] += k;
                }
            }
        }
        let nf = grid.n as f64;
        let mut cond_mi = 0.0;
        for ((&(uv, b), &cell_n), row) in grid.cells.iter().zip(&grid.sizes).zip(za) {
            let _ = uv;
            for (zv, &k) in row.iter().enumerate() {
                if k > 0 {
                    cond_mi += (k as f64 / nf)
                        * ((k as f64 * yc[b] as f64)
                            / (cell_n as f64 * yz[b * cols + zv] as f64))
                            .ln();
                }
            }
        }
        TripleStats { uz, yz, zc, yc, cond_mi: cond_mi.max(0.0), cols, n: grid.n }
    }

    fn mi_uz(&self) -> f64 {
        mi_from_counts(2, self.cols, &self.uz, self.n)
    }

    /// Average divergence of the realized per-input conditional from the
    /// channel's rows: Σ_a P̂_y(a)·D(P̂(Z|Y=a)‖W(·|a)).
    fn channel_divergence(&self, w: &MemorylessAttack) -> f64 {
        let nf = self.n as f64;
        let mut d = 0.0;
        for b in 0..self.cols {
            for zv in 0..self.cols {
                let k = self.yz[b * self.cols + zv];
                if k > 0 {
                    let wp = w.prob(b, zv);
                    if wp <= 0.0 {
                        return f64::INFINITY;
                    }
                    d += (k as f64 / nf) * ((k as f64 / self.yc[b] as f64) / wp).ln();
                }
            }
        }
        d.max(0.0)
    }
}

/// Multi-stage comparison for embedder candidates: maximize the primary
/// value, then the secondary, each with a relative tie window; final ties
/// go to the lexicographically smallest flattened count matrix.
fn attack_improves(
    value: f64,
    secondary: f64,
    a: &Assignment,
    best: &Option<(f64, f64, Assignment)>,
) -> bool {
    let (bv, bs, ba) = match best {
        None => return true,
        Some(t) => (t.0, t.1, &t.2),
    };
    let stage = |x: f64, y: f64| -> core::cmp::Ordering {
        use core::cmp::Ordering::*;
        let tol = 1e-12 * (1.0 + x.abs().min(y.abs()));
        if x > y + tol {
            Greater
        } else if x < y - tol {
            Less
        } else {
            Equal
        }
    };
    use core::cmp::Ordering::*;
    match stage(value, bv) {
        Greater => true,
        Less => false,
        Equal => match stage(secondary, bs) {
            Greater => true,
            Less => false,
            Equal => {
                for (row, brow) in a.iter().zip(ba) {
                    for (&k, &bk) in row.iter().zip(brow) {
                        if k != bk {
                            return k < bk;
                        }
                    }
                }
                false
            }
        },
    }
}

fn embed_attack_common(
    px: &MemorylessSource,
    x: &[Sym],
    u: &[Sym],
    c: &EmbedConstraint,
    mut evaluate: impl FnMut(&InnerGrid) -> (f64, f64),
) -> Result<AttackEmbed> {
    if x.len() > DEFAULT_ENUM_CAP {
        return Err(Error::CapExceeded { needed: x.len(), cap: DEFAULT_ENUM_CAP });
    }
    if px.alphabet().size() > 3 {
        return Err(Error::CapExceeded { needed: px.alphabet().size(), cap: 3 });
    }
    let p = TypeProblem::new(px, x, u, c)?;
    let mut best: Option<(f64, f64, Assignment)> = None;
    p.for_each_feasible(&mut |a| {
        let grid = InnerGrid::from_outer(&p, a);
        let (value, secondary) = evaluate(&grid);
        if attack_improves(value, secondary, a, &best) {
            best = Some((value, secondary, a.clone()));
        }
    });
    let (value, _, a) = best.ok_or(Error::Infeasible("no feasible output type"))?;
    Ok(AttackEmbed { y: p.materialize(&a), guarantee: value })
}

/// Embedder tuned to a known memoryless attack. Over distortion-feasible
/// published types it maximizes the attacker's cheapest rejected statistic:
/// the minimum, over conditional types whose statistic `Î(Z;U) + D(P̂_z‖Q)`
/// stays strictly below `λ`, of `Î(Z;U|Y) + Σ_a P̂_y(a)·D(P̂(Z|Y=a)‖W(·|a))`
/// — the exponent the channel pays to realize that type. Ties are broken
/// toward the largest published statistic `Î(Y;U) + D(P̂_y‖Q)` (recovering
/// the attack-free embedder under the identity channel), then
/// lexicographically. Exact type enumeration; desk-scale `n` only.
pub fn embed_memoryless_attack(
    px: &MemorylessSource,
    w: &MemorylessAttack,
    x: &[Sym],
    u: &[Sym],
    lambda: f64,
    c: &EmbedConstraint,
) -> Result<AttackEmbed> {
    check_lambda(lambda)?;
    if w.size() != px.alphabet().size() {
        return Err(Error::LengthMismatch { left: w.size(), right: px.alphabet().size() });
    }
    let q = output_marginal(px, w)?;
    embed_attack_common(px, x, u, c, |grid| {
        let mut value = f64::INFINITY;
        grid.for_each(&mut |za| {
            let t = TripleStats::new(grid, za);
            let statistic = t.mi_uz() + kl_counts_vs_pmf(&t.zc, q.pmf(), t.n);
            if statistic < lambda {
                let v = t.cond_mi + t.channel_divergence(w);
                if v < value {
                    value = v;
                }
            }
        });
        let uy = grid.uy_counts();
        let secondary = mi_from_counts(2, grid.cols, &uy, grid.n)
            + kl_counts_vs_pmf(&grid.y_counts(), q.pmf(), grid.n);
        (value, secondary)
    })
}

/// Embedder hardened against every distortion-limited exchangeable attack.
/// Over distortion-feasible published types it maximizes the minimum of
/// `Î(Z;U|Y)` over conditional types the hardened region would reject —
/// the information the worst-case channel must destroy, which controls its
/// concentration cost. Ties are broken toward the largest published
/// `Î(Y;U)`, then lexicographically. Exact type enumeration; desk-scale `n`
/// only.
pub fn embed_worstcase(
    px: &MemorylessSource,
    x: &[Sym],
    u: &[Sym],
    lambda: f64,
    c: &EmbedConstraint,
    budget: &AttackBudget,
) -> Result<AttackEmbed> {
    check_lambda(lambda)?;
    if budget.distortion.size() != px.alphabet().size() {
        return Err(Error::LengthMismatch {
            left: budget.distortion.size(),
            right: px.alphabet().size(),
        });
    }
    let n = x.len() as f64;
    let size = px.alphabet().size();
    let threshold = lambda + size as f64 * (n + 1.0).ln() / n;
    let mut inner_cache: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
    embed_attack_common(px, x, u, c, |grid| {
        let mut value = f64::INFINITY;
        let mut failure: Option<Error> = None;
        grid.for_each(&mut |za| {
            if failure.is_some() {
                return;
            }
            let t = TripleStats::new(grid, za);
            let inner = match inner_cache.get(&t.zc) {
                Some(&v) => v,
                None => match min_divergence(&t.zc, px, budget) {
                    Ok(v) => {
                        inner_cache.insert(t.zc.clone(), v);
                        v
                    }
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                },
            };
            if t.mi_uz() + inner < threshold && t.cond_mi < value {
                value = t.cond_mi;
            }
        });
        debug_assert!(failure.is_none(), "inner divergence solve cannot fail on valid counts");
        let uy = grid.uy_counts();
        (value, mi_from_counts(2, grid.cols, &uy, grid.n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{lambda_star_accepts, optimal_embed_discrete, DetectorConfig, Variant};
    use crate::empirical::Alphabet;
    use rand_core::{RngCore, SeedableRng};

    fn hamming_budget(size: usize, da: f64) -> AttackBudget {
        AttackBudget::new(Distortion::hamming(size), da).unwrap()
    }

    #[test]
    fn output_marginal_examples() {
        let px = MemorylessSource::new(vec![0.8, 0.2]).unwrap();
        let id = MemorylessAttack::identity(2).unwrap();
        assert_eq!(output_marginal(&px, &id).unwrap().pmf(), px.pmf());

        let bsc = MemorylessAttack::binary_symmetric(0.1).unwrap();
        let q = output_marginal(&px, &bsc).unwrap();
        assert!((q.prob(0) - 0.74).abs() < 1e-15);
        assert!((q.prob(1) - 0.26).abs() < 1e-15);

        let scramble = MemorylessAttack::new(2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let q = output_marginal(&px, &scramble).unwrap();
        assert_eq!(q.pmf(), &[0.5, 0.5]);
    }

    #[test]
    fn memoryless_region_identity_channel_matches_known_source_rule() {
        let q = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = 4 + (rng.next_u64() % 6) as usize;
            let u: Vec<Sym> = (0..n).map(|_| (rng.next_u64() & 1) as Sym).collect();
            let z: Vec<Sym> = (0..n).map(|_| (rng.next_u64() & 1) as Sym).collect();
            let lambda = 0.05 + (rng.next_u64() % 100) as f64 / 100.0;
            let got = memoryless_attack_accepts(&q, &u, &z, lambda).unwrap();
            let cfg = DetectorConfig::new(lambda, Variant::KnownSource).unwrap();
            let want = lambda_star_accepts(&q, &u, &z, &cfg).unwrap();
            assert_eq!(got, want, "n={n} u={u:?} z={z:?} λ={lambda}");
        }
    }

    #[test]
    fn memoryless_region_null_typical_and_watermarked_examples() {
        // z independent of u with marginal exactly Q: both terms vanish, so
        // the call reduces to comparing 0 against nλ − |A|ln(n+1). Each
        // watermark bit sees the same (3 zeros, 1 one) output pattern.
        let q = MemorylessSource::new(vec![0.75, 0.25]).unwrap();
        let u = [0, 1, 0, 1, 0, 1, 0, 1];
        let z = [0, 0, 0, 0, 0, 0, 1, 1];
        assert_eq!(memoryless_attack_accepts(&q, &u, &z, 0.6).unwrap(), Decision::H0);
        assert_eq!(memoryless_attack_accepts(&q, &u, &z, 0.3).unwrap(), Decision::H1);

        // z a copy of u under a uniform null: the statistic is ln 2 per
        // symbol, so any λ below ln 2 fires at large n.
        let q = MemorylessSource::uniform(2).unwrap();
        let u: Vec<Sym> = (0..200).map(|i| (i % 2) as Sym).collect();
        assert_eq!(memoryless_attack_accepts(&q, &u, &u, 0.3).unwrap(), Decision::H1);
        assert_eq!(memoryless_attack_accepts(&q, &u, &u, 0.8).unwrap(), Decision::H0);
    }

    #[test]
    fn wstar_hand_example() {
        // y has two zeros and three ones; one flip allowed in expectation
        // (5·0.25 = 1.25 ⇒ at most one Hamming flip). Feasible conditional
        // types: identity, one 0→1 flip, one 1→0 flip.
        let y = [0, 1, 1, 0, 1];
        let b = hamming_budget(2, 0.25);
        assert!((wstar_normalizer(&y, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((wstar_prob(&y, &y, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // One flip on a zero position: class size C(2,1) = 2.
        let z = [1, 1, 1, 0, 1];
        assert!((wstar_prob(&y, &z, &b).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        // Two flips exceed the budget.
        let z2 = [1, 1, 1, 1, 1];
        assert_eq!(wstar_prob(&y, &z2, &b).unwrap(), 0.0);
    }

    #[test]
    fn wstar_degenerate_budgets() {
        let y = [0, 1, 1, 0];
        let zero = hamming_budget(2, 0.0);
        assert_eq!(wstar_prob(&y, &y, &zero).unwrap(), 1.0);
        assert_eq!(wstar_prob(&y, &[1, 1, 1, 0], &zero).unwrap(), 0.0);

        // Unconstrained at n=2: four conditional types, each a singleton.
        let open = hamming_budget(2, 10.0);
        let y2 = [0, 1];
        for z in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert!((wstar_prob(&y2, &z, &open).unwrap() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn wstar_rows_sum_to_one() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        for &da in &[0.0, 0.2, 0.5, 1.0] {
            let b = hamming_budget(2, da);
            for _ in 0..5 {
                let n = 5 + (rng.next_u64() % 2) as usize;
                let y: Vec<Sym> = (0..n).map(|_| (rng.next_u64() & 1) as Sym).collect();
                let mut total = 0.0;
                for bits in 0..(1u32 << n) {
                    let z: Vec<Sym> =
                        (0..n).map(|i| ((bits >> i) & 1) as Sym).collect();
                    total += wstar_prob(&y, &z, &b).unwrap();
                }
                assert!((total - 1.0).abs() < 1e-12, "row sum {total} at da={da}");
                let cn = wstar_normalizer(&y, &b).unwrap();
                let lower = ((n + 1) as f64).powi(-4);
                assert!(cn >= lower && cn <= 1.0);
            }
        }
    }

    #[test]
    fn min_divergence_zero_budget_is_plain_divergence() {
        let px = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        let b = hamming_budget(2, 0.0);
        let zc = [4u64, 2];
        let want = kl_counts_vs_pmf(&zc, px.pmf(), 6);
        let got = min_divergence_grid(&zc, &px, &b).unwrap();
        assert!((got - want).abs() < 1e-14);
        let fw = min_divergence_fw(&[4.0 / 6.0, 2.0 / 6.0], &px, &b).unwrap();
        assert!((fw - want).abs() < 1e-7, "fw {fw} vs {want}");
    }

    #[test]
    fn min_divergence_unconstrained_reaches_zero() {
        // Continuous solver: with the budget slack the pre-image law can be
        // px itself, for any px.
        let px = MemorylessSource::new(vec![0.8, 0.2]).unwrap();
        let b = hamming_budget(2, 1.0);
        let v = min_divergence_fw(&[0.5, 0.5], &px, &b).unwrap();
        assert!(v.abs() < 1e-7, "continuous min {v}");
        // Grid solver: exact zero when px sits on the 1/n grid.
        let px6 = MemorylessSource::new(vec![4.0 / 6.0, 2.0 / 6.0]).unwrap();
        let g = min_divergence_grid(&[1, 5], &px6, &b).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn min_divergence_infeasible_is_infinite() {
        // Distortion 1 everywhere: nothing is within a tiny budget.
        let d = Distortion::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let px = MemorylessSource::uniform(2).unwrap();
        let b = AttackBudget::new(d, 0.1).unwrap();
        assert_eq!(min_divergence_grid(&[3, 3], &px, &b).unwrap(), f64::INFINITY);
        assert_eq!(min_divergence_fw(&[0.5, 0.5], &px, &b).unwrap(), f64::INFINITY);
    }

    #[test]
    fn fw_never_above_grid_and_tight_on_aligned_instances() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(37);
        for _ in 0..40 {
            let k = 1 + rng.next_u64() % 5;
            let zc = [k, 6 - k];
            let p1 = 0.05 + 0.9 * (rng.next_u64() % 1000) as f64 / 1000.0;
            let px = MemorylessSource::new(vec![p1, 1.0 - p1]).unwrap();
            let da = (rng.next_u64() % 5) as f64 / 6.0;
            let b = hamming_budget(2, da);
            let grid = min_divergence_grid(&zc, &px, &b).unwrap();
            let pz: Vec<f64> = zc.iter().map(|&c| c as f64 / 6.0).collect();
            let fw = min_divergence_fw(&pz, &px, &b).unwrap();
            assert!(
                fw <= grid + 1e-7,
                "continuous min {fw} above grid min {grid} (p1={p1}, da={da}, zc={zc:?})"
            );
        }
        // Grid-aligned family: q1, px1, and Da all multiples of 1/6 keep the
        // continuous optimum on the grid, so the two solvers coincide.
        for (q1, px1, da, want) in [
            (2.0, 5.0, 1.0, 0.29389333245105964),
            (2.0, 5.0, 0.0, 0.6187659967885424),
            (1.0, 4.0, 2.0, 0.05889151782819166),
            (3.0, 3.0, 1.0, 0.0),
            (5.0, 1.0, 6.0, 0.0),
        ] {
            let zc = [q1 as u64, 6 - q1 as u64];
            let px = MemorylessSource::new(vec![px1 / 6.0, 1.0 - px1 / 6.0]).unwrap();
            let b = hamming_budget(2, da / 6.0);
            let grid = min_divergence_grid(&zc, &px, &b).unwrap();
            let fw = min_divergence_fw(&[q1 / 6.0, 1.0 - q1 / 6.0], &px, &b).unwrap();
            assert!((grid - want).abs() < 1e-12, "grid {grid} vs {want}");
            assert!((fw - want).abs() < 1e-6, "fw {fw} vs {want}");
        }
    }

    #[test]
    fn worstcase_region_examples() {
        let px = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        let u = [0, 1, 0, 1, 0, 1];
        // Zero budget: the hardened statistic is the plain information form.
        // This z is unbalanced enough that its statistic clears the type
        // allowance, leaving both probe thresholds positive.
        let z = [1, 1, 1, 1, 1, 0];
        let zero = hamming_budget(2, 0.0);
        let (uz, zc) = uz_joint_counts(&u, &z, 2).unwrap();
        let lhs = mi_from_counts(2, 2, &uz, 6) + kl_counts_vs_pmf(&zc, px.pmf(), 6);
        let slack = 2.0 * 7f64.ln() / 6.0;
        assert!(lhs > slack + 0.02, "statistic {lhs} too small for the probe thresholds");
        assert_eq!(worstcase_accepts(&px, &u, &z, lhs - slack - 0.01, &zero).unwrap(), Decision::H1);
        assert_eq!(worstcase_accepts(&px, &u, &z, lhs - slack + 0.01, &zero).unwrap(), Decision::H0);
        // Saturated budget: the divergence term is forgiven (grid-aligned
        // null so the grid minimum is exactly zero), leaving only the
        // watermark information. A perfectly aligned z keeps that at ln 2,
        // just above the n = 6 type allowance.
        let px6 = MemorylessSource::new(vec![4.0 / 6.0, 2.0 / 6.0]).unwrap();
        let open = hamming_budget(2, 1.0);
        let z2 = u;
        let margin = 2f64.ln() - slack;
        assert!(margin > 0.01, "alignment margin {margin} too small");
        assert_eq!(
            worstcase_accepts(&px6, &u, &z2, margin - 0.005, &open).unwrap(),
            Decision::H1
        );
        assert_eq!(
            worstcase_accepts(&px6, &u, &z2, margin + 0.005, &open).unwrap(),
            Decision::H0
        );
    }

    #[test]
    fn random_wm_region_examples() {
        let px = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        let pu = MemorylessSource::uniform(2).unwrap();
        let b = hamming_budget(2, 0.5);
        // Balanced watermark: the watermark-divergence term is zero and the
        // rule coincides with the deterministic-watermark one.
        let u = [0, 1, 0, 1, 0, 1];
        for z in [[0, 0, 1, 1, 0, 1], [1, 1, 1, 0, 0, 0], [0, 0, 0, 0, 0, 0]] {
            for lambda in [0.2, 0.5, 1.0] {
                assert_eq!(
                    random_wm_worstcase_accepts(&px, &pu, &u, &z, lambda, &b).unwrap(),
                    worstcase_accepts(&px, &u, &z, lambda, &b).unwrap()
                );
            }
        }
        // All-ones watermark under a fair law costs an extra ln 2, so the
        // rule at λ matches the balanced rule at λ − ln 2.
        let ones = [1, 1, 1, 1, 1, 1];
        for z in [[0, 0, 1, 1, 0, 1], [1, 1, 0, 1, 1, 1]] {
            for lambda in [0.8, 1.2, 2.0] {
                assert_eq!(
                    random_wm_worstcase_accepts(&px, &pu, &ones, &z, lambda, &b).unwrap(),
                    worstcase_accepts(&px, &ones, &z, lambda - 2f64.ln(), &b).unwrap()
                );
            }
        }
        // The decision is a function of the joint (u, z) type.
        let u = [0, 1, 1, 0, 1, 0];
        let z = [1, 1, 0, 0, 1, 0];
        let perm = [3usize, 0, 4, 1, 5, 2];
        let up: Vec<Sym> = perm.iter().map(|&i| u[i]).collect();
        let zp: Vec<Sym> = perm.iter().map(|&i| z[i]).collect();
        assert_eq!(
            random_wm_worstcase_accepts(&px, &pu, &u, &z, 0.4, &b).unwrap(),
            random_wm_worstcase_accepts(&px, &pu, &up, &zp, 0.4, &b).unwrap()
        );
    }

    /// Exhaustive false-positive mass of the worst-case channel against the
    /// hardened region, by summing over all covertexts and outputs.
    fn wstar_false_positive(
        px: &MemorylessSource,
        u: &[Sym],
        lambda: f64,
        budget: &AttackBudget,
    ) -> f64 {
        let n = u.len();
        let mut total = 0.0;
        for ybits in 0..(1u32 << n) {
            let y: Vec<Sym> = (0..n).map(|i| ((ybits >> i) & 1) as Sym).collect();
            let mut py = 1.0;
            for &s in &y {
                py *= px.prob(s);
            }
            if py == 0.0 {
                continue;
            }
            for zbits in 0..(1u32 << n) {
                let z: Vec<Sym> = (0..n).map(|i| ((zbits >> i) & 1) as Sym).collect();
                let wp = wstar_prob(&y, &z, budget).unwrap();
                if wp > 0.0
                    && worstcase_accepts(px, u, &z, lambda, budget).unwrap() == Decision::H1
                {
                    total += py * wp;
                }
            }
        }
        total
    }

    #[test]
    fn worstcase_false_positive_bound() {
        let px = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        for (n, lambda, da) in [(5usize, 0.1, 0.2), (5, 0.5, 0.2), (6, 0.3, 1.0 / 6.0)] {
            let u: Vec<Sym> = (0..n).map(|i| (i % 2) as Sym).collect();
            let b = hamming_budget(2, da);
            let pfp = wstar_false_positive(&px, &u, lambda, &b);
            let bound = ((n + 1) as f64).powi(2) * (-(n as f64) * lambda).exp();
            assert!(pfp <= bound * (1.0 + 1e-12), "pfp {pfp} above bound {bound} at n={n}");
        }
    }

    #[test]
    fn false_positive_invariant_under_coordinate_permutation() {
        // The hardened regions depend on joint types only, so relabeling
        // positions in any channel table leaves the false-positive mass
        // unchanged — exactly, not just to first order.
        let n = 4usize;
        let px = MemorylessSource::new(vec![0.6, 0.4]).unwrap();
        let pu = MemorylessSource::uniform(2).unwrap();
        let b = hamming_budget(2, 0.25);
        let lambda = 0.35;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        let seqs = 1usize << n;
        let perms: [[usize; 4]; 3] = [[1, 0, 3, 2], [3, 2, 1, 0], [2, 0, 3, 1]];
        for _ in 0..3 {
            // A dense random channel table W(z-seq | y-seq).
            let mut table = vec![0.0f64; seqs * seqs];
            for row in table.chunks_mut(seqs) {
                let mut tot = 0.0;
                for v in row.iter_mut() {
                    *v = 1.0 + (rng.next_u64() % 1000) as f64;
                    tot += *v;
                }
                for v in row.iter_mut() {
                    *v /= tot;
                }
            }
            let pfp = |table: &[f64]| -> f64 {
                let mut total = 0.0;
                for ubits in 0..seqs {
                    let u: Vec<Sym> = (0..n).map(|i| (ubits >> i) & 1).collect();
                    let mut pun = 1.0;
                    for &s in &u {
                        pun *= pu.prob(s);
                    }
                    for ybits in 0..seqs {
                        let y: Vec<Sym> = (0..n).map(|i| (ybits >> i) & 1).collect();
                        let mut py = 1.0;
                        for &s in &y {
                            py *= px.prob(s);
                        }
                        for zbits in 0..seqs {
                            let z: Vec<Sym> = (0..n).map(|i| (zbits >> i) & 1).collect();
                            if random_wm_worstcase_accepts(&px, &pu, &u, &z, lambda, &b).unwrap()
                                == Decision::H1
                            {
                                total += pun * py * table[ybits * seqs + zbits];
                            }
                        }
                    }
                }
                total
            };
            let base = pfp(&table);
            for perm in &perms {
                let apply = |bits: usize| -> usize {
                    let mut out = 0usize;
                    for (i, &pi) in perm.iter().enumerate() {
                        out |= ((bits >> pi) & 1) << i;
                    }
                    out
                };
                let mut permuted = vec![0.0f64; seqs * seqs];
                for ybits in 0..seqs {
                    for zbits in 0..seqs {
                        permuted[ybits * seqs + zbits] =
                            table[apply(ybits) * seqs + apply(zbits)];
                    }
                }
                let shifted = pfp(&permuted);
                assert!(
                    (base - shifted).abs() < 1e-14,
                    "permutation moved the false-positive mass: {base} vs {shifted}"
                );
            }
        }
    }

    #[test]
    fn embed_memoryless_identity_channel_recovers_attack_free_embedder() {
        let px = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        let w = MemorylessAttack::identity(2).unwrap();
        let x = [0, 1, 0, 0, 1, 0];
        let u = [0, 1, 1, 0, 0, 1];
        let c = EmbedConstraint::new(Distortion::hamming(2), 0.5).unwrap();
        let got = embed_memoryless_attack(&px, &w, &x, &u, 50.0, &c).unwrap();
        let want = optimal_embed_discrete(&px, &x, &u, &c).unwrap();
        assert_eq!(got.y, want);
        // Under the identity channel the attacker can always present the
        // published sequence itself at zero cost.
        assert_eq!(got.guarantee, 0.0);
    }

    #[test]
    fn embed_attack_degenerate_budgets() {
        let px = MemorylessSource::new(vec![0.7, 0.3]).unwrap();
        let w = MemorylessAttack::binary_symmetric(0.2).unwrap();
        let x = [0, 1, 0, 0, 1];
        let u = [0, 1, 1, 0, 0];
        let frozen = EmbedConstraint::new(Distortion::hamming(2), 0.0).unwrap();
        let out = embed_memoryless_attack(&px, &w, &x, &u, 0.4, &frozen).unwrap();
        assert_eq!(out.y, x);
        let b = hamming_budget(2, 0.2);
        let out = embed_worstcase(&px, &x, &u, 0.4, &frozen, &b).unwrap();
        assert_eq!(out.y, x);

        let costly = EmbedConstraint::new(Distortion::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap(), 0.1)
            .unwrap();
        assert!(matches!(
            embed_memoryless_attack(&px, &w, &x, &u, 0.4, &costly),
            Err(Error::Infeasible(_))
        ));
    }

    /// Brute-force guarantee for a published sequence: scan every output
    /// sequence (covering every conditional type) and minimize the reported
    /// cost over those the region rejects.
    fn brute_guarantee_memoryless(
        q: &MemorylessSource,
        w: &MemorylessAttack,
        u: &[Sym],
        y: &[Sym],
        lambda: f64,
    ) -> f64 {
        let n = y.len();
        let mut best = f64::INFINITY;
        for zbits in 0..(1u32 << n) {
            let z: Vec<Sym> = (0..n).map(|i| ((zbits >> i) & 1) as Sym).collect();
            let (uz, zc) = uz_joint_counts(u, &z, 2).unwrap();
            let statistic =
                mi_from_counts(2, 2, &uz, n as u64) + kl_counts_vs_pmf(&zc, q.pmf(), n as u64);
            if statistic < lambda {
                let grid = inner_grid_for(u, y);
                let za = za_counts_for(&grid, u, y, &z);
                let t = TripleStats::new(&grid, &za);
                let v = t.cond_mi + t.channel_divergence(w);
                if v < best {
                    best = v;
                }
            }
        }
        best
    }

    fn inner_grid_for(u: &[Sym], y: &[Sym]) -> InnerGrid {
        let mut agg: BTreeMap<(Sym, Sym), u64> = BTreeMap::new();
        for (&uv, &b) in u.iter().zip(y) {
            *agg.entry((uv, b)).or_insert(0) += 1;
        }
        let mut cells = Vec::new();
        let mut sizes = Vec::new();
        let mut n = 0;
        for ((uv, b), k) in agg {
            cells.push((uv, b));
            sizes.push(k);
            n += k;
        }
        InnerGrid { cells, sizes, cols: 2, n }
    }

    fn za_counts_for(grid: &InnerGrid, u: &[Sym], y: &[Sym], z: &[Sym]) -> Vec<Vec<u64>> {
        let mut za = vec![vec![0u64; grid.cols]; grid.cells.len()];
        for ((&uv, &b), &zv) in u.iter().zip(y).zip(z) {
            let cell = grid.cells.iter().position(|&c| c == (uv, b)).unwrap();
            za[cell][zv] += 1;
        }
        za
    }

    #[test]
    fn embed_memoryless_guarantee_matches_brute_force() {
        let px = MemorylessSource::new(vec![0.6, 0.4]).unwrap();
        let w = MemorylessAttack::binary_symmetric(0.2).unwrap();
        let q = output_marginal(&px, &w).unwrap();
        let x = [0, 1, 0, 0, 1, 1];
        let u = [0, 1, 1, 0, 0, 1];
        let c = EmbedConstraint::new(Distortion::hamming(2), 0.5).unwrap();
        for lambda in [0.15, 0.4, 0.9] {
            let out = embed_memoryless_attack(&px, &w, &x, &u, lambda, &c).unwrap();
            let brute = brute_guarantee_memoryless(&q, &w, &u, &out.y, lambda);
            assert!(
                (out.guarantee - brute).abs() < 1e-12
                    || (out.guarantee.is_infinite() && brute.is_infinite()),
                "guarantee {} vs brute {brute} at λ={lambda}",
                out.guarantee
            );
            // No feasible published sequence should beat the reported value.
            let all_y = feasible_outputs(&x, &c);
            for y in &all_y {
                let v = brute_guarantee_memoryless(&q, &w, &u, y, lambda);
                assert!(
                    v <= out.guarantee + 1e-9,
                    "y={y:?} reaches {v}, above the reported optimum {}",
                    out.guarantee
                );
            }
        }
    }

    fn feasible_outputs(x: &[Sym], c: &EmbedConstraint) -> Vec<Vec<Sym>> {
        let n = x.len();
        let mut out = Vec::new();
        for bits in 0..(1u32 << n) {
            let y: Vec<Sym> = (0..n).map(|i| ((bits >> i) & 1) as Sym).collect();
            if c.distortion.seq_cost(x, &y).unwrap() <= c.budget * n as f64 * (1.0 + 1e-12) + 1e-12
            {
                out.push(y);
            }
        }
        out
    }

    #[test]
    fn embed_worstcase_guarantee_matches_brute_force() {
        let px = MemorylessSource::new(vec![0.6, 0.4]).unwrap();
        let x = [0, 1, 0, 0, 1, 1];
        let u = [0, 1, 1, 0, 0, 1];
        let c = EmbedConstraint::new(Distortion::hamming(2), 0.5).unwrap();
        let b = hamming_budget(2, 1.0 / 6.0);
        let n = x.len();
        let threshold = 0.4 + 2.0 * ((n + 1) as f64).ln() / n as f64;
        let out = embed_worstcase(&px, &x, &u, 0.4, &c, &b).unwrap();
        let brute = |y: &[Sym]| -> f64 {
            let mut best = f64::INFINITY;
            for zbits in 0..(1u32 << n) {
                let z: Vec<Sym> = (0..n).map(|i| ((zbits >> i) & 1) as Sym).collect();
                let (uz, zc) = uz_joint_counts(&u, &z, 2).unwrap();
                let lhs = mi_from_counts(2, 2, &uz, n as u64)
                    + min_divergence_grid(&zc, &px, &b).unwrap();
                if lhs < threshold {
                    let grid = inner_grid_for(&u, y);
                    let za = za_counts_for(&grid, &u, y, &z);
                    let t = TripleStats::new(&grid, &za);
                    if t.cond_mi < best {
                        best = t.cond_mi;
                    }
                }
            }
            best
        };
        let direct = brute(&out.y);
        assert!(
            (out.guarantee - direct).abs() < 1e-12,
            "guarantee {} vs brute {direct}",
            out.guarantee
        );
        for y in feasible_outputs(&x, &c) {
            assert!(brute(&y) <= out.guarantee + 1e-9);
        }
    }

    #[test]
    fn embed_worstcase_zero_budget_tracks_largest_watermark_information() {
        // With a frozen attacker, rejected output types can already imitate
        // the published one at no conditional-information cost, so the
        // primary value ties at zero across published types and the choice
        // falls to the documented tie-break: maximize Î(Y;U).
        let px = MemorylessSource::uniform(2).unwrap();
        let x = [0, 1, 0, 0, 1, 0];
        let u = [0, 1, 1, 0, 0, 1];
        let c = EmbedConstraint::new(Distortion::hamming(2), 0.5).unwrap();
        let b = hamming_budget(2, 0.0);
        let out = embed_worstcase(&px, &x, &u, 0.3, &c, &b).unwrap();
        let joint = crate::empirical::empirical_joint(
            Alphabet::BINARY,
            Alphabet::BINARY,
            &u,
            &out.y,
        )
        .unwrap();
        let got_mi = joint.mutual_information();
        let best_mi = feasible_outputs(&x, &c)
            .iter()
            .map(|y| {
                crate::empirical::empirical_joint(Alphabet::BINARY, Alphabet::BINARY, &u, y)
                    .unwrap()
                    .mutual_information()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (got_mi - best_mi).abs() < 1e-12,
            "published Î(Y;U) {got_mi} below the best feasible {best_mi}"
        );
    }
}
