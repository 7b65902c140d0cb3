//! Empirical distributions and type-class machinery over small finite
//! alphabets.
//!
//! Everything downstream (decision regions, attack channels, exact error
//! bounds) is built from the joint histogram of a pair of sequences, so this
//! module keeps counts as exact integers and only converts to `f64` at the
//! point where an entropy or divergence is evaluated. All information
//! quantities are in nats.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Symbol index into an [`Alphabet`].
pub type Sym = usize;

/// Tolerance for accepting a probability vector as normalized. Vectors
/// further from 1 are rejected, never silently renormalized.
pub const PMF_TOL: f64 = 1e-12;

/// Default cap on sequence length for exact type-class enumeration.
pub const DEFAULT_ENUM_CAP: usize = 12;

/// A finite alphabet, identified only by its size; symbols are `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    /// The two-symbol alphabet used for watermark sequences, with the
    /// convention `0` ↔ −1 and `1` ↔ +1.
    pub const BINARY: Alphabet = Alphabet { size: 2 };

    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("alphabet size must be at least 1"));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Sym) -> bool {
        s < self.size
    }

    /// Validates that every symbol of `seq` lies in this alphabet.
    pub fn check_seq(&self, seq: &[Sym]) -> Result<()> {
        for &s in seq {
            if !self.contains(s) {
                return Err(Error::SymbolOutOfRange {
                    symbol: s,
                    size: self.size,
                });
            }
        }
        Ok(())
    }
}

/// Validates a probability vector: entries finite and nonnegative, total
/// within [`PMF_TOL`] of 1.
pub fn check_pmf(pmf: &[f64]) -> Result<()> {
    if pmf.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    for &p in pmf {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::BadProbability { value: p });
        }
        total += p;
    }
    if (total - 1.0).abs() > PMF_TOL {
        return Err(Error::NotNormalized { total });
    }
    Ok(())
}

/// A memoryless (i.i.d.) source over a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct MemorylessSource {
    alphabet: Alphabet,
    pmf: Vec<f64>,
}

impl MemorylessSource {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        check_pmf(&pmf)?;
        Ok(MemorylessSource {
            alphabet: Alphabet::new(pmf.len())?,
            pmf,
        })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        let a = Alphabet::new(size)?;
        Ok(MemorylessSource {
            alphabet: a,
            pmf: vec![1.0 / size as f64; size],
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, s: Sym) -> f64 {
        self.pmf[s]
    }
}

/// Single-letter distortion measure `d(a, b) ≥ 0` on pairs of symbols,
/// stored as a dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Distortion {
    size: usize,
    d: Vec<f64>,
}

impl Distortion {
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self> {
        if size == 0 || entries.len() != size * size {
            return Err(Error::Domain("distortion matrix must be size*size"));
        }
        for &v in &entries {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain("distortion entries must be finite and >= 0"));
            }
        }
        Ok(Distortion { size, d: entries })
    }

    /// 0 on the diagonal, 1 off it.
    pub fn hamming(size: usize) -> Self {
        let mut d = vec![1.0; size * size];
        for a in 0..size {
            d[a * size + a] = 0.0;
        }
        Distortion { size, d }
    }

    /// Squared difference of symbol indices.
    pub fn squared(size: usize) -> Self {
        let mut d = vec![0.0; size * size];
        for a in 0..size {
            for b in 0..size {
                let diff = a as f64 - b as f64;
                d[a * size + b] = diff * diff;
            }
        }
        Distortion { size, d }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: Sym, b: Sym) -> f64 {
        self.d[a * self.size + b]
    }

    /// Total distortion between two equal-length sequences.
    pub fn seq_cost(&self, xs: &[Sym], ys: &[Sym]) -> Result<f64> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        let a = Alphabet::new(self.size)?;
        a.check_seq(xs)?;
        a.check_seq(ys)?;
        Ok(xs.iter().zip(ys).map(|(&x, &y)| self.get(x, y)).sum())
    }

    /// Smallest per-symbol cost of mapping `a` anywhere.
    pub fn row_min(&self, a: Sym) -> f64 {
        let row = &self.d[a * self.size..(a + 1) * self.size];
        row.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Joint histogram of an aligned pair of sequences: integer counts over
/// `rows × cols`, together with the sample size `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalJoint {
    rows: Alphabet,
    cols: Alphabet,
    counts: Vec<u64>,
    n: usize,
}

/// Which coordinate is conditioned on in [`EmpiricalJoint::conditional_entropy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Given {
    Row,
    Col,
}

impl EmpiricalJoint {
    /// Builds the joint histogram of `(r[i], c[i])` pairs.
    pub fn from_sequences(rows: Alphabet, cols: Alphabet, r: &[Sym], c: &[Sym]) -> Result<Self> {
        if r.len() != c.len() {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: c.len(),
            });
        }
        if r.is_empty() {
            return Err(Error::EmptyInput);
        }
        rows.check_seq(r)?;
        cols.check_seq(c)?;
        let mut counts = vec![0u64; rows.size * cols.size];
        for (&a, &b) in r.iter().zip(c) {
            counts[a * cols.size + b] += 1;
        }
        Ok(EmpiricalJoint {
            rows,
            cols,
            counts,
            n: r.len(),
        })
    }

    /// Builds a joint type directly from a row-major count matrix.
    pub fn from_counts(rows: Alphabet, cols: Alphabet, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != rows.size * cols.size {
            return Err(Error::Domain("count matrix shape mismatch"));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(EmpiricalJoint {
            rows,
            cols,
            counts,
            n: n as usize,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_alphabet(&self) -> Alphabet {
        self.rows
    }

    pub fn col_alphabet(&self) -> Alphabet {
        self.cols
    }

    pub fn count(&self, a: Sym, b: Sym) -> u64 {
        self.counts[a * self.cols.size + b]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_counts(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.rows.size];
        for (a, slot) in out.iter_mut().enumerate() {
            for b in 0..self.cols.size {
                *slot += self.count(a, b);
            }
        }
        out
    }

    pub fn col_counts(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.cols.size];
        for a in 0..self.rows.size {
            for (b, slot) in out.iter_mut().enumerate() {
                *slot += self.count(a, b);
            }
        }
        out
    }

    pub fn joint_pmf(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&k| k as f64 / n).collect()
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.row_counts().iter().map(|&k| k as f64 / n).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.col_counts().iter().map(|&k| k as f64 / n).collect()
    }

    /// Empirical joint entropy Ĥ(row, col) in nats.
    pub fn joint_entropy(&self) -> f64 {
        entropy_from_counts(&self.counts, self.n as u64)
    }

    /// Empirical entropy of one marginal.
    pub fn marginal_entropy(&self, which: Given) -> f64 {
        let counts = match which {
            Given::Row => self.row_counts(),
            Given::Col => self.col_counts(),
        };
        entropy_from_counts(&counts, self.n as u64)
    }

    /// Empirical conditional entropy in nats: Ĥ(col | row) when `given` is
    /// `Row`, Ĥ(row | col) when `given` is `Col`.
    pub fn conditional_entropy(&self, given: Given) -> f64 {
        match given {
            Given::Row => self.joint_entropy() - self.marginal_entropy(Given::Row),
            Given::Col => self.joint_entropy() - self.marginal_entropy(Given::Col),
        }
    }

    /// Empirical mutual information Î(row; col) ≥ 0 in nats.
    pub fn mutual_information(&self) -> f64 {
        let mi = self.marginal_entropy(Given::Row) + self.marginal_entropy(Given::Col)
            - self.joint_entropy();
        // Counts-based entropies can land an ulp below zero for product types.
        if mi < 0.0 {
            debug_assert!(mi > -1e-9);
            0.0
        } else {
            mi
        }
    }
}

/// Convenience constructor matching the common call pattern: joint histogram
/// of a watermark/covertext pair.
pub fn empirical_joint(rows: Alphabet, cols: Alphabet, r: &[Sym], c: &[Sym]) -> Result<EmpiricalJoint> {
    EmpiricalJoint::from_sequences(rows, cols, r, c)
}

fn entropy_from_counts(counts: &[u64], n: u64) -> f64 {
    debug_assert!(n > 0);
    let nf = n as f64;
    let mut h = 0.0;
    for &k in counts {
        if k > 0 {
            let p = k as f64 / nf;
            h -= p * p.ln();
        }
    }
    h
}

/// Shannon entropy of a probability vector in nats, with 0·ln 0 = 0.
pub fn entropy(pmf: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in pmf {
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h
}

/// Kullback–Leibler divergence D(p‖q) in nats. Returns `+∞` when `p` puts
/// mass where `q` does not. Both arguments must be valid pmfs of equal length.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_pmf(p)?;
    check_pmf(q)?;
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += pi * (pi / qi).ln();
        }
    }
    // Guard against -1e-17 from cancellation when p == q.
    Ok(if d < 0.0 { 0.0 } else { d })
}

/// Log-probability ln Pₓ(y) of a sequence under a memoryless source.
/// Returns `−∞` when the sequence uses a zero-probability symbol.
pub fn log_prob_memoryless(src: &MemorylessSource, y: &[Sym]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    src.alphabet().check_seq(y)?;
    let mut counts = vec![0u64; src.alphabet().size()];
    for &s in y {
        counts[s] += 1;
    }
    let mut lp = 0.0;
    for (s, &k) in counts.iter().enumerate() {
        if k > 0 {
            let p = src.prob(s);
            if p <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            lp += k as f64 * p.ln();
        }
    }
    Ok(lp)
}

/// Exact multinomial coefficient `n! / ∏ parts[i]!` where `n = Σ parts`.
/// Computed multiplicatively in `u128`; errs if an intermediate overflows.
pub fn multinomial_count(parts: &[u64]) -> Result<u128> {
    let mut total: u64 = 0;
    let mut result: u128 = 1;
    for &k in parts {
        for j in 1..=k {
            total += 1;
            // result *= total; result /= j  — kept exact by multiplying first.
            result = result
                .checked_mul(total as u128)
                .ok_or(Error::Domain("multinomial overflow"))?;
            result /= j as u128;
        }
    }
    Ok(result)
}

/// Exact log-cardinality ln|T(c | r)| of the conditional type class: the
/// number of column sequences whose joint histogram with a fixed row sequence
/// equals `j`. Equals `Σₐ ln multinomial(row a of j)`.
pub fn conditional_type_size_ln(j: &EmpiricalJoint) -> Result<f64> {
    let mut total = 0.0;
    for a in 0..j.row_alphabet().size() {
        let row: Vec<u64> = (0..j.col_alphabet().size()).map(|b| j.count(a, b)).collect();
        total += (multinomial_count(&row)? as f64).ln();
    }
    Ok(total)
}

/// Sandwich bounds on ln|T(c | r)| in terms of the empirical conditional
/// entropy: `n·Ĥ(col|row) − |A|·ln(n+1) ≤ ln|T| ≤ n·Ĥ(col|row)`, where `|A|`
/// is the column alphabet size. Returns `(lower, upper)`.
pub fn conditional_type_size_bounds(j: &EmpiricalJoint) -> (f64, f64) {
    let n = j.n() as f64;
    let upper = n * j.conditional_entropy(Given::Row);
    let lower = upper - j.col_alphabet().size() as f64 * (n + 1.0).ln();
    (lower, upper)
}

/// Enumerates every column sequence whose joint histogram with `row_seq`
/// equals `target`, in deterministic lexicographic order. Returns an empty
/// vector when `row_seq`'s histogram does not match the target's row
/// marginal (the class is empty). Errs with [`Error::CapExceeded`] when
/// `n` exceeds `cap`.
pub fn enumerate_conditional_type_with_cap(
    target: &EmpiricalJoint,
    row_seq: &[Sym],
    cap: usize,
) -> Result<Vec<Vec<Sym>>> {
    if row_seq.len() != target.n() {
        return Err(Error::LengthMismatch {
            left: row_seq.len(),
            right: target.n(),
        });
    }
    if target.n() > cap {
        return Err(Error::CapExceeded {
            needed: target.n(),
            cap,
        });
    }
    target.row_alphabet().check_seq(row_seq)?;

    let rows = target.row_alphabet().size();
    let cols = target.col_alphabet().size();
    let mut row_counts = vec![0u64; rows];
    for &a in row_seq {
        row_counts[a] += 1;
    }
    if row_counts != target.row_counts() {
        return Ok(Vec::new());
    }

    // Positions grouped by row symbol; within each group we place every
    // distinct arrangement of the multiset prescribed by that row of the
    // count matrix, then take the cartesian product across groups.
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); rows];
    for (i, &a) in row_seq.iter().enumerate() {
        positions[a].push(i);
    }
    let mut per_row: Vec<Vec<Vec<Sym>>> = Vec::with_capacity(rows);
    for a in 0..rows {
        let counts: Vec<u64> = (0..cols).map(|b| target.count(a, b)).collect();
        per_row.push(multiset_permutations(&counts));
    }

    let mut out = Vec::new();
    let mut current = vec![0 as Sym; row_seq.len()];
    fill_product(&per_row, &positions, 0, &mut current, &mut out);
    Ok(out)
}

/// [`enumerate_conditional_type_with_cap`] with the default cap of
/// [`DEFAULT_ENUM_CAP`].
pub fn enumerate_conditional_type(
    target: &EmpiricalJoint,
    row_seq: &[Sym],
) -> Result<Vec<Vec<Sym>>> {
    enumerate_conditional_type_with_cap(target, row_seq, DEFAULT_ENUM_CAP)
}

fn fill_product(
    per_row: &[Vec<Vec<Sym>>],
    positions: &[Vec<usize>],
    row: usize,
    current: &mut [Sym],
    out: &mut Vec<Vec<Sym>>,
) {
    if row == per_row.len() {
        out.push(current.to_vec());
        return;
    }
    if positions[row].is_empty() {
        fill_product(per_row, positions, row + 1, current, out);
        return;
    }
    for arrangement in &per_row[row] {
        for (slot, &sym) in positions[row].iter().zip(arrangement) {
            current[*slot] = sym;
        }
        fill_product(per_row, positions, row + 1, current, out);
    }
}

/// All distinct arrangements of the multiset `{b repeated counts[b]}`,
/// generated in lexicographic order.
fn multiset_permutations(counts: &[u64]) -> Vec<Vec<Sym>> {
    let total: u64 = counts.iter().sum();
    let mut out = Vec::new();
    let mut remaining = counts.to_vec();
    let mut prefix = Vec::with_capacity(total as usize);
    fn rec(remaining: &mut [u64], prefix: &mut Vec<Sym>, total: u64, out: &mut Vec<Vec<Sym>>) {
        if prefix.len() as u64 == total {
            out.push(prefix.clone());
            return;
        }
        for b in 0..remaining.len() {
            if remaining[b] > 0 {
                remaining[b] -= 1;
                prefix.push(b);
                rec(remaining, prefix, total, out);
                prefix.pop();
                remaining[b] += 1;
            }
        }
    }
    rec(&mut remaining, &mut prefix, total, &mut out);
    out
}
