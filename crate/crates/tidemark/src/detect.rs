//! Acceptance regions for discrete sequences, and the matching
//! distortion-constrained embedder.
//!
//! Each detector decides between H0 ("the sequence is covertext") and H1
//! ("the sequence carries the watermark `u`") from empirical statistics
//! alone, guaranteeing a false-positive probability of at most roughly
//! `e^{−nλ}`. The regions differ in what the detector knows: the covertext
//! law, nothing at all, the watermark law, or only the received sequence.
//! The embedder picks, among all sequences within distortion `n·D` of the
//! covertext, the one most deeply inside the known-source region.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::empirical::{
    empirical_joint, log_prob_memoryless, Alphabet, Distortion, EmpiricalJoint, Given,
    MemorylessSource, Sym, DEFAULT_ENUM_CAP,
};
use crate::error::{Error, Result};

/// Outcome of a detection test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    /// No watermark detected.
    H0,
    /// Watermark detected.
    H1,
}

/// Which acceptance region a detector uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Covertext law known to the detector.
    KnownSource,
    /// Nothing known: maximum empirical mutual information.
    Universal,
    /// Watermark drawn from a known memoryless law.
    RandomWatermark,
    /// Decision from the received pair alone.
    IndividualCovertext,
}

/// Detector configuration: target false-positive exponent and region kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    pub lambda: f64,
    pub variant: Variant,
}

impl DetectorConfig {
    pub fn new(lambda: f64, variant: Variant) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain("lambda must be finite and > 0"));
        }
        Ok(DetectorConfig { lambda, variant })
    }
}

/// Distortion measure plus per-symbol budget for the embedder.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbedConstraint {
    pub distortion: Distortion,
    pub budget: f64,
}

impl EmbedConstraint {
    pub fn new(distortion: Distortion, budget: f64) -> Result<Self> {
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::Domain("distortion budget must be finite and >= 0"));
        }
        Ok(EmbedConstraint { distortion, budget })
    }
}

fn check_variant(cfg: &DetectorConfig, expected: Variant) -> Result<()> {
    if cfg.variant != expected {
        return Err(Error::Domain("detector config built for a different variant"));
    }
    Ok(())
}

fn watermark_joint(y_alphabet: Alphabet, u: &[Sym], y: &[Sym]) -> Result<EmpiricalJoint> {
    empirical_joint(Alphabet::BINARY, y_alphabet, u, y)
}

/// Known-source region: accepts H1 iff
/// `ln Pₓ(y) + n·Ĥ(Y|U) + λn − |A|·ln(n+1) ≤ 0`,
/// where `|A|` is the covertext alphabet size. A zero-probability `y`
/// (`ln Pₓ(y) = −∞`) satisfies the condition trivially. The polynomial
/// allowance may make the threshold negative at small `n`; the rule is
/// applied literally.
pub fn lambda_star_accepts(
    src: &MemorylessSource,
    u: &[Sym],
    y: &[Sym],
    cfg: &DetectorConfig,
) -> Result<Decision> {
    check_variant(cfg, Variant::KnownSource)?;
    let j = watermark_joint(src.alphabet(), u, y)?;
    let n = j.n() as f64;
    let lp = log_prob_memoryless(src, y)?;
    let lhs = lp + n * j.conditional_entropy(Given::Row) + cfg.lambda * n
        - src.alphabet().size() as f64 * (n + 1.0).ln();
    Ok(if lhs <= 0.0 { Decision::H1 } else { Decision::H0 })
}

/// Universal (maximum empirical mutual information) region: accepts H1 iff
/// `n·Î(U;Y) ≥ λn − |A|·ln(n+1)`. Equivalent to the known-source rule with
/// the least favorable covertext law substituted, so it needs the alphabet
/// only for the polynomial allowance.
pub fn universal_accepts(
    y_alphabet: Alphabet,
    u: &[Sym],
    y: &[Sym],
    cfg: &DetectorConfig,
) -> Result<Decision> {
    check_variant(cfg, Variant::Universal)?;
    let j = watermark_joint(y_alphabet, u, y)?;
    let n = j.n() as f64;
    let lhs = n * j.mutual_information();
    let rhs = cfg.lambda * n - y_alphabet.size() as f64 * (n + 1.0).ln();
    Ok(if lhs >= rhs { Decision::H1 } else { Decision::H0 })
}

/// Random-watermark region: both the covertext and the watermark have known
/// memoryless laws. Accepts H1 iff
/// `ln Pₓ(y) + ln P_U(u) + n·Ĥ(U,Y) + λn − |A|·ln(n+1) ≤ 0`.
pub fn random_wm_accepts(
    px: &MemorylessSource,
    pu: &MemorylessSource,
    u: &[Sym],
    y: &[Sym],
    cfg: &DetectorConfig,
) -> Result<Decision> {
    check_variant(cfg, Variant::RandomWatermark)?;
    if pu.alphabet() != Alphabet::BINARY {
        return Err(Error::Domain("watermark law must be over the binary alphabet"));
    }
    let j = watermark_joint(px.alphabet(), u, y)?;
    let n = j.n() as f64;
    let lhs = log_prob_memoryless(px, y)? + log_prob_memoryless(pu, u)? + n * j.joint_entropy()
        + cfg.lambda * n
        - px.alphabet().size() as f64 * (n + 1.0).ln();
    Ok(if lhs <= 0.0 { Decision::H1 } else { Decision::H0 })
}

/// Individual-covertext region: accepts H1 iff `Ĥ(U|Y) ≤ ln 2 − λ`, i.e. the
/// watermark is nearly recoverable from the received sequence. Thresholds are
/// in nats, hence `ln 2` where a bit-denominated rule would write 1.
pub fn individual_covertext_accepts(u: &[Sym], y: &[Sym], cfg: &DetectorConfig) -> Result<Decision> {
    check_variant(cfg, Variant::IndividualCovertext)?;
    // Ĥ(U|Y) only involves observed symbols, so size the histogram from y.
    let max_sym = y.iter().copied().max().ok_or(Error::EmptyInput)?;
    let j = watermark_joint(Alphabet::new(max_sym + 1)?, u, y)?;
    let h = j.conditional_entropy(Given::Col);
    Ok(if h <= core::f64::consts::LN_2 - cfg.lambda {
        Decision::H1
    } else {
        Decision::H0
    })
}

/// Objective the discrete embedder minimizes: `ln Pₓ(y) + n·Ĥ(Y|U)`.
/// Smaller is better (deeper inside the known-source region); `−∞` when `y`
/// uses a zero-probability symbol.
pub fn embed_objective(src: &MemorylessSource, u: &[Sym], y: &[Sym]) -> Result<f64> {
    let j = watermark_joint(src.alphabet(), u, y)?;
    Ok(log_prob_memoryless(src, y)? + j.n() as f64 * j.conditional_entropy(Given::Row))
}

// --- The embedder works in type space: positions are grouped by their
// (covertext, watermark) pair, and a candidate output is described by how
// many positions of each group map to each output symbol. Everything about
// the objective and the distortion depends only on those counts.

#[derive(Clone, Debug)]
pub(crate) struct Classes {
    /// Distinct (x, u) pairs in ascending order.
    pub(crate) pairs: Vec<(Sym, Sym)>,
    /// Number of positions per pair.
    pub(crate) sizes: Vec<u64>,
    /// Positions per pair, ascending.
    members: Vec<Vec<usize>>,
}

fn classify(x: &[Sym], u: &[Sym]) -> Classes {
    let mut pairs: Vec<(Sym, Sym)> = x.iter().copied().zip(u.iter().copied()).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut sizes = vec![0u64; pairs.len()];
    let mut members = vec![Vec::new(); pairs.len()];
    for (i, key) in x.iter().copied().zip(u.iter().copied()).enumerate() {
        let c = pairs.binary_search(&key).unwrap();
        sizes[c] += 1;
        members[c].push(i);
    }
    Classes { pairs, sizes, members }
}

/// A candidate output in type space: `counts[c][b]` positions of class `c`
/// emit symbol `b`.
pub(crate) type Assignment = Vec<Vec<u64>>;

pub(crate) struct TypeProblem<'a> {
    src: &'a MemorylessSource,
    pub(crate) classes: Classes,
    pub(crate) cols: usize,
    budget_total: f64,
    pub(crate) n: usize,
    ln_pmf: Vec<f64>,
    /// Per-class per-symbol distortion d(x_c, b).
    cost: Vec<Vec<f64>>,
}

impl<'a> TypeProblem<'a> {
    pub(crate) fn new(
        src: &'a MemorylessSource,
        x: &[Sym],
        u: &[Sym],
        c: &EmbedConstraint,
    ) -> Result<Self> {
        if x.len() != u.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: u.len() });
        }
        if x.is_empty() {
            return Err(Error::EmptyInput);
        }
        let cols = src.alphabet().size();
        if c.distortion.size() != cols {
            return Err(Error::Domain("distortion matrix size must match source alphabet"));
        }
        src.alphabet().check_seq(x)?;
        Alphabet::BINARY.check_seq(u)?;
        let classes = classify(x, u);
        let cost: Vec<Vec<f64>> = classes
            .pairs
            .iter()
            .map(|&(xv, _)| (0..cols).map(|b| c.distortion.get(xv, b)).collect())
            .collect();
        let cheapest: f64 = classes
            .sizes
            .iter()
            .zip(&cost)
            .map(|(&m, row)| m as f64 * row.iter().cloned().fold(f64::INFINITY, f64::min))
            .sum();
        let budget_total = c.budget * x.len() as f64;
        if cheapest > budget_total * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::Infeasible("no output sequence meets the distortion budget"));
        }
        let ln_pmf = src
            .pmf()
            .iter()
            .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
            .collect();
        Ok(TypeProblem {
            src,
            classes,
            cols,
            budget_total,
            n: x.len(),
            ln_pmf,
            cost,
        })
    }

    fn distortion_of(&self, a: &Assignment) -> f64 {
        a.iter()
            .zip(&self.cost)
            .map(|(row, crow)| row.iter().zip(crow).map(|(&k, &d)| k as f64 * d).sum::<f64>())
            .sum()
    }

    /// `ln Pₓ(y) + n·Ĥ(Y|U)` of an assignment, computed from counts.
    fn score_of(&self, a: &Assignment) -> f64 {
        let mut log_p = 0.0;
        let mut y_counts = vec![0u64; self.cols];
        // Joint (u, y) counts, u ∈ {0, 1}.
        let mut uy = vec![0u64; 2 * self.cols];
        for (c, row) in a.iter().enumerate() {
            let uv = self.classes.pairs[c].1;
            for (b, &k) in row.iter().enumerate() {
                if k > 0 {
                    y_counts[b] += k;
                    uy[uv * self.cols + b] += k;
                }
            }
        }
        for (b, &k) in y_counts.iter().enumerate() {
            if k > 0 {
                if self.ln_pmf[b] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                log_p += k as f64 * self.ln_pmf[b];
            }
        }
        let j = EmpiricalJoint::from_counts(
            Alphabet::BINARY,
            self.src.alphabet(),
            uy,
        )
        .expect("counts sum to n");
        log_p + self.n as f64 * j.conditional_entropy(Given::Row)
    }

    /// Cheapest assignment: every class maps to its lowest-cost symbol
    /// (smallest index on ties). Feasible whenever the problem is.
    fn min_cost_assignment(&self) -> Assignment {
        self.classes
            .sizes
            .iter()
            .zip(&self.cost)
            .map(|(&m, row)| {
                let mut best = 0usize;
                for (b, &d) in row.iter().enumerate() {
                    if d < row[best] {
                        best = b;
                    }
                }
                let mut counts = vec![0u64; self.cols];
                counts[best] = m;
                counts
            })
            .collect()
    }

    pub(crate) fn materialize(&self, a: &Assignment) -> Vec<Sym> {
        let mut y = vec![0 as Sym; self.n];
        for (c, row) in a.iter().enumerate() {
            let mut pos = self.classes.members[c].iter();
            for (b, &k) in row.iter().enumerate() {
                for _ in 0..k {
                    y[*pos.next().expect("counts sum to class size")] = b;
                }
            }
        }
        y
    }

    /// Visits every distortion-feasible assignment exactly once, in
    /// lexicographic order of the flattened count matrix. Depth-first over
    /// per-class compositions, pruning branches whose spent distortion plus
    /// the cheapest completion already exceeds the budget.
    pub(crate) fn for_each_feasible(&self, f: &mut dyn FnMut(&Assignment)) {
        let mut current: Assignment = vec![vec![0u64; self.cols]; self.classes.pairs.len()];
        // Cheapest possible cost of classes c.. (suffix sums).
        let per_class_min: Vec<f64> = self
            .classes
            .sizes
            .iter()
            .zip(&self.cost)
            .map(|(&m, row)| m as f64 * row.iter().cloned().fold(f64::INFINITY, f64::min))
            .collect();
        let mut rest = vec![0.0; per_class_min.len() + 1];
        for c in (0..per_class_min.len()).rev() {
            rest[c] = rest[c + 1] + per_class_min[c];
        }
        self.visit(0, 0, self.classes.sizes.first().copied().unwrap_or(0), 0.0, &rest, &mut current, f);
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        class: usize,
        b: usize,
        left: u64,
        spent: f64,
        rest: &[f64],
        current: &mut Assignment,
        f: &mut dyn FnMut(&Assignment),
    ) {
        let slack = self.budget_total * (1.0 + 1e-12) + 1e-12;
        if class == self.classes.pairs.len() {
            f(current);
            return;
        }
        if spent + rest[class + 1] + left as f64 * self.min_cost(class) > slack {
            return;
        }
        if b + 1 == self.cols {
            let extra = left as f64 * self.cost[class][b];
            if spent + extra + rest[class + 1] <= slack {
                current[class][b] = left;
                let next_left = self.classes.sizes.get(class + 1).copied().unwrap_or(0);
                self.visit(class + 1, 0, next_left, spent + extra, rest, current, f);
                current[class][b] = 0;
            }
            return;
        }
        for k in 0..=left {
            current[class][b] = k;
            self.visit(
                class,
                b + 1,
                left - k,
                spent + k as f64 * self.cost[class][b],
                rest,
                current,
                f,
            );
        }
        current[class][b] = 0;
    }

    fn min_cost(&self, class: usize) -> f64 {
        self.cost[class].iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `true` when `(score, counts)` improves on the incumbent, breaking score
/// ties by ascending lexicographic order of the flattened count matrix.
fn improves(score: f64, a: &Assignment, best_score: f64, best: &Assignment) -> bool {
    let lex_smaller = || {
        for (row, brow) in a.iter().zip(best) {
            for (&k, &bk) in row.iter().zip(brow) {
                if k != bk {
                    return k < bk;
                }
            }
        }
        false
    };
    if score == f64::NEG_INFINITY || best_score == f64::NEG_INFINITY {
        return if score == best_score {
            lex_smaller()
        } else {
            score == f64::NEG_INFINITY
        };
    }
    let tol = 1e-12 * (1.0 + best_score.abs());
    if score < best_score - tol {
        true
    } else if score <= best_score + tol {
        lex_smaller()
    } else {
        false
    }
}

/// Exact embedder: enumerates every output type within the distortion budget
/// and returns a sequence of the minimizing type. Errs with
/// [`Error::CapExceeded`] when `n` exceeds `cap`.
pub fn optimal_embed_discrete_exact(
    src: &MemorylessSource,
    x: &[Sym],
    u: &[Sym],
    c: &EmbedConstraint,
    cap: usize,
) -> Result<Vec<Sym>> {
    if x.len() > cap {
        return Err(Error::CapExceeded { needed: x.len(), cap });
    }
    let p = TypeProblem::new(src, x, u, c)?;
    let mut best: Option<(f64, Assignment)> = None;
    p.for_each_feasible(&mut |a| {
        let score = p.score_of(a);
        let take = match &best {
            None => true,
            Some((bs, ba)) => improves(score, a, *bs, ba),
        };
        if take {
            best = Some((score, a.clone()));
        }
    });

    let (_, assignment) = best.ok_or(Error::Infeasible("no feasible output type"))?;
    // The winning type must genuinely meet the budget (hard check).
    debug_assert!(p.distortion_of(&assignment) <= p.budget_total * (1.0 + 1e-12) + 1e-12);
    Ok(p.materialize(&assignment))
}

/// Search embedder: greedy multi-start descent over the 1/n-quantized type
/// grid. Each start is refined by single-unit reassignments (one position's
/// worth of mass moved between output symbols) until no move lowers the
/// objective. Deterministic; may return a local optimum at large `n`.
pub fn optimal_embed_discrete_search(
    src: &MemorylessSource,
    x: &[Sym],
    u: &[Sym],
    c: &EmbedConstraint,
) -> Result<Vec<Sym>> {
    let p = TypeProblem::new(src, x, u, c)?;
    let base = p.min_cost_assignment();
    let base_cost = p.distortion_of(&base);

    // Starts: the cheapest assignment, plus one start per output symbol that
    // greedily pushes classes toward that symbol while the budget allows.
    let mut starts = vec![base.clone()];
    for target in 0..p.cols {
        let mut a = base.clone();
        let mut spent = base_cost;
        for (class, row) in a.iter_mut().enumerate() {
            for b in 0..p.cols {
                if b == target || row[b] == 0 {
                    continue;
                }
                let delta = p.cost[class][target] - p.cost[class][b];
                let k = row[b];
                let affordable = if delta <= 0.0 {
                    k
                } else {
                    (((p.budget_total - spent) / delta).floor().max(0.0) as u64).min(k)
                };
                if affordable > 0 {
                    row[b] -= affordable;
                    row[target] += affordable;
                    spent += affordable as f64 * delta;
                }
            }
        }
        starts.push(a);
    }

    let mut best: Option<(f64, Assignment)> = None;
    for start in starts {
        let mut a = start;
        let mut spent = p.distortion_of(&a);
        let mut score = p.score_of(&a);
        // First-improvement sweeps until a fixpoint.
        loop {
            let mut moved = false;
            'sweep: for class in 0..a.len() {
                for from in 0..p.cols {
                    if a[class][from] == 0 {
                        continue;
                    }
                    for to in 0..p.cols {
                        if to == from {
                            continue;
                        }
                        let delta = p.cost[class][to] - p.cost[class][from];
                        if spent + delta > p.budget_total * (1.0 + 1e-12) + 1e-12 {
                            continue;
                        }
                        a[class][from] -= 1;
                        a[class][to] += 1;
                        let new_score = p.score_of(&a);
                        // Strict descent only; tie moves could cycle.
                        let strictly_better = if score == f64::NEG_INFINITY {
                            false
                        } else {
                            new_score < score - 1e-15
                        };
                        if strictly_better {
                            spent += delta;
                            score = new_score;
                            moved = true;
                            continue 'sweep;
                        }
                        a[class][from] += 1;
                        a[class][to] -= 1;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        let take = match &best {
            None => true,
            Some((bs, ba)) => improves(score, &a, *bs, ba),
        };
        if take {
            best = Some((score, a));
        }
    }
    let (_, assignment) = best.ok_or(Error::Infeasible("no feasible output type"))?;
    Ok(p.materialize(&assignment))
}

/// Distortion-constrained embedder for the known-source region: returns the
/// feasible `y` minimizing `ln Pₓ(y) + n·Ĥ(Y|U)`. Uses exact type
/// enumeration up to the default cap, the grid search beyond it.
pub fn optimal_embed_discrete(
    src: &MemorylessSource,
    x: &[Sym],
    u: &[Sym],
    c: &EmbedConstraint,
) -> Result<Vec<Sym>> {
    if x.len() <= DEFAULT_ENUM_CAP {
        optimal_embed_discrete_exact(src, x, u, c, DEFAULT_ENUM_CAP)
    } else {
        optimal_embed_discrete_search(src, x, u, c)
    }
}
