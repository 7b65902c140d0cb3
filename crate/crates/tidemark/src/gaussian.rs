//! Real-valued embedding and detection built on two scalar statistics.
//!
//! For covertext `x ∈ ℝⁿ` and watermark `u ∈ {−1,+1}ⁿ`, everything the
//! embedder needs is carried by `α² = ‖x‖²/n` and `ρ = ⟨x,u⟩/n`, and every
//! embedder in the family emits `y = a·x + b·u` for scalars chosen from
//! those two numbers. The detector side reduces to the normalized
//! correlation `ρ̂² = ⟨u,y⟩² / (n‖y‖²)`, reported either directly or as the
//! empirical mutual information `Î = −½·ln(1−ρ̂²)`.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::detect::Decision;
use crate::error::{Error, Result};

/// The two scalar statistics of a covertext/watermark pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbedStats {
    /// Per-sample covertext energy `‖x‖²/n`.
    pub alpha2: f64,
    /// Per-sample correlation `⟨x,u⟩/n`.
    pub rho: f64,
    /// Sample count.
    pub n: usize,
}

/// Embedding rules of the form `y = a·x + b·u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbedderKind {
    /// Correlation-maximizing coefficients under the distortion budget.
    Optimal,
    /// `y = x + sgn(ρ)·√D·u`: add the watermark aligned with the covertext.
    Sign,
    /// Sign embedder that erases the covertext outright once the budget
    /// allows it (`D ≥ α²`).
    ImprovedSign,
    /// `y = x + √D·u`, ignoring the covertext correlation.
    Additive,
}

/// An embedder plus its per-sample squared-distortion budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbedSpec {
    pub kind: EmbedderKind,
    pub de: f64,
}

impl EmbedSpec {
    pub fn new(kind: EmbedderKind, de: f64) -> Result<Self> {
        if !de.is_finite() || de <= 0.0 {
            return Err(Error::Domain("distortion budget must be finite and > 0"));
        }
        Ok(EmbedSpec { kind, de })
    }
}

fn check_watermark(u: &[i8]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::EmptyInput);
    }
    if u.iter().any(|&b| b != 1 && b != -1) {
        return Err(Error::Domain("watermark symbols must be +1 or -1"));
    }
    Ok(())
}

fn check_real(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("real-valued input must be finite"));
    }
    Ok(())
}

/// Sign with the convention `sgn(0) = +1`.
fn sgn(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Computes the embedding statistics of a covertext/watermark pair.
pub fn stats(x: &[f64], u: &[i8]) -> Result<EmbedStats> {
    check_watermark(u)?;
    check_real(x)?;
    if x.len() != u.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: u.len(),
        });
    }
    let n = x.len() as f64;
    let alpha2 = x.iter().map(|v| v * v).sum::<f64>() / n;
    let rho = x.iter().zip(u).map(|(&v, &b)| v * b as f64).sum::<f64>() / n;
    Ok(EmbedStats {
        alpha2,
        rho,
        n: x.len(),
    })
}

/// Empirical mutual information `Î = −½·ln(1−ρ̂²)` between a watermark and a
/// received sequence, in nats. Returns `+∞` when `y` is proportional to `u`;
/// errs when `y` is identically zero (the statistic is undefined).
pub fn emp_mutual_info_gauss(u: &[i8], y: &[f64]) -> Result<f64> {
    let r2 = rho_hat2(u, y)?;
    let one_minus = 1.0 - r2;
    Ok(if one_minus <= 0.0 {
        f64::INFINITY
    } else {
        -0.5 * one_minus.ln()
    })
}

fn rho_hat2(u: &[i8], y: &[f64]) -> Result<f64> {
    check_watermark(u)?;
    check_real(y)?;
    if y.len() != u.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: u.len(),
        });
    }
    let n = y.len() as f64;
    let uy = y.iter().zip(u).map(|(&v, &b)| v * b as f64).sum::<f64>() / n;
    let y2 = y.iter().map(|v| v * v).sum::<f64>() / n;
    if y2 <= 0.0 {
        return Err(Error::Domain("received sequence is identically zero"));
    }
    Ok(uy * uy / y2)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain("lambda must be finite and >= 0"));
    }
    Ok(())
}

/// Mutual-information detector: accepts (H1) iff `Î > λ`, equivalently
/// `ρ̂² > 1 − e^{−2λ}`. Two-sided in the sign of the correlation.
pub fn detect_mi(u: &[i8], y: &[f64], lambda: f64) -> Result<Decision> {
    check_lambda(lambda)?;
    let mi = emp_mutual_info_gauss(u, y)?;
    Ok(if mi > lambda { Decision::H1 } else { Decision::H0 })
}

/// Signed correlation detector: accepts (H1) iff
/// `⟨u,y⟩ / (√n‖y‖) > √(1 − e^{−2λ})`. One-sided: anti-correlated
/// sequences are rejected no matter how strongly.
pub fn detect_corr(u: &[i8], y: &[f64], lambda: f64) -> Result<Decision> {
    check_lambda(lambda)?;
    check_watermark(u)?;
    check_real(y)?;
    if y.len() != u.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: u.len(),
        });
    }
    let n = y.len() as f64;
    let uy = y.iter().zip(u).map(|(&v, &b)| v * b as f64).sum::<f64>();
    let norm2 = y.iter().map(|v| v * v).sum::<f64>();
    if norm2 <= 0.0 {
        return Err(Error::Domain("received sequence is identically zero"));
    }
    let rho_hat = uy / (n.sqrt() * norm2.sqrt());
    let threshold = (1.0 - (-2.0 * lambda).exp()).max(0.0).sqrt();
    Ok(if rho_hat > threshold {
        Decision::H1
    } else {
        Decision::H0
    })
}

/// The detection statistic `R = ⟨u,y⟩²/‖y‖²` (equals `n·ρ̂²`).
pub fn objective_r(u: &[i8], y: &[f64]) -> Result<f64> {
    Ok(y.len() as f64 * rho_hat2(u, y)?)
}

/// Value of `ρ̂²` achieved by coefficients `(a, b)`: `(aρ+b)²/(a²α²+2abρ+b²)`.
/// Defined as 0 when the emitted sequence would be identically zero.
pub fn coeff_objective(alpha2: f64, rho: f64, a: f64, b: f64) -> f64 {
    let num = a * rho + b;
    let den = a * a * alpha2 + 2.0 * a * b * rho + b * b;
    if den <= 0.0 {
        0.0
    } else {
        num * num / den
    }
}

/// Per-sample squared distortion of coefficients `(a, b)`:
/// `(a−1)²α² + 2(a−1)bρ + b²`.
pub fn coeff_distortion(alpha2: f64, rho: f64, a: f64, b: f64) -> f64 {
    let am1 = a - 1.0;
    am1 * am1 * alpha2 + 2.0 * am1 * b * rho + b * b
}

/// Closed-form correlation-maximizing coefficients `(a, b)` subject to
/// `coeff_distortion(α², ρ, a, b) ≤ de`.
///
/// Two regimes. When the budget covers the residual covertext energy
/// (`de ≥ α² − ρ²`) the covertext is erased: `a = 0` and `b` sits on the
/// far end of the feasible interval, carrying the sign of `ρ`. Otherwise the
/// optimum activates the distortion constraint and lies at one of four
/// critical values of `a` (two interior stationary points, two endpoints of
/// the feasible `a`-interval); each candidate is scored and the best kept,
/// breaking ties toward the smallest `|a − 1|`.
///
/// Negative `ρ` is handled by solving with `−ρ` and negating `b`.
pub fn optimal_coefficients(alpha2: f64, rho: f64, de: f64) -> Result<(f64, f64)> {
    if !de.is_finite() || de <= 0.0 {
        return Err(Error::Domain("distortion budget must be finite and > 0"));
    }
    if !alpha2.is_finite() || alpha2 < 0.0 || !rho.is_finite() {
        return Err(Error::Domain("invalid embedding statistics"));
    }
    // Cauchy–Schwarz gives ρ² ≤ α²; tolerate rounding just past it.
    let mut rho = rho;
    if rho * rho > alpha2 {
        if rho * rho > alpha2 * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::Domain("correlation exceeds covertext energy"));
        }
        rho = sgn(rho) * alpha2.sqrt();
    }
    if rho < 0.0 {
        let (a, b) = optimal_nonneg(alpha2, -rho, de);
        return Ok((a, -b));
    }
    Ok(optimal_nonneg(alpha2, rho, de))
}

/// Core of [`optimal_coefficients`] for `ρ ≥ 0`.
fn optimal_nonneg(alpha2: f64, rho: f64, de: f64) -> (f64, f64) {
    let s2 = (alpha2 - rho * rho).max(0.0); // residual energy off the watermark
    if de >= s2 {
        let b = rho + (rho * rho - alpha2 + de).max(0.0).sqrt();
        if b > 0.0 {
            return (0.0, b);
        }
        // b = 0 only at the measure-zero corner ρ = 0, de = α²; fall through
        // to the constrained branch, which is well-defined there.
    }

    let rad = if s2 > 0.0 { (de / s2).sqrt() } else { 0.0 };
    let (a_lo, a_hi) = (1.0 - rad, 1.0 + rad);
    let g = s2 * (alpha2 - de);
    let root = (de * rho * rho * g).max(0.0).sqrt();
    let denom = alpha2 * s2;
    let mut candidates = [f64::NAN; 4];
    if denom > 0.0 {
        candidates[0] = (g + root) / denom;
        candidates[1] = (g - root) / denom;
    }
    candidates[2] = a_lo;
    candidates[3] = a_hi;

    let mut best: Option<(f64, f64, f64)> = None; // (obj, a, b)
    for &a in &candidates {
        if !a.is_finite() || a.abs() < 1e-12 {
            continue;
        }
        if a < a_lo - 1e-12 || a > a_hi + 1e-12 {
            continue;
        }
        let slack = de - (a - 1.0) * (a - 1.0) * s2;
        if slack < -1e-12 * de.max(1.0) {
            continue;
        }
        let t = ((1.0 - a) * rho + slack.max(0.0).sqrt()) / a;
        let b = a * t;
        let obj = coeff_objective(alpha2, rho, a, b);
        let better = match best {
            None => true,
            Some((best_obj, best_a, _)) => {
                obj > best_obj + 1e-12
                    || (obj > best_obj - 1e-12 && (a - 1.0).abs() < (best_a - 1.0).abs())
            }
        };
        if better {
            best = Some((obj, a, b));
        }
    }
    let (_, a, b) = best.expect("candidate set is never empty");
    (a, b)
}

/// Coefficients `(a, b)` for each embedder in the family.
pub fn coefficients(kind: EmbedderKind, st: &EmbedStats, de: f64) -> Result<(f64, f64)> {
    if !de.is_finite() || de <= 0.0 {
        return Err(Error::Domain("distortion budget must be finite and > 0"));
    }
    Ok(match kind {
        EmbedderKind::Optimal => optimal_coefficients(st.alpha2, st.rho, de)?,
        EmbedderKind::Sign => (1.0, sgn(st.rho) * de.sqrt()),
        EmbedderKind::Additive => (1.0, de.sqrt()),
        EmbedderKind::ImprovedSign => {
            if de >= st.alpha2 {
                let root = (st.rho * st.rho - st.alpha2 + de).max(0.0).sqrt();
                let b = st.rho + root;
                if b > 0.0 {
                    (0.0, b)
                } else if st.rho < 0.0 {
                    // Boundary de = α² with ρ < 0: take the other root.
                    (0.0, st.rho - root)
                } else {
                    // ρ = 0 and de = α² exactly: erasing emits nothing, so
                    // keep the covertext as the sign embedder would.
                    (1.0, de.sqrt())
                }
            } else {
                (1.0, sgn(st.rho) * de.sqrt())
            }
        }
    })
}

/// Embeds a watermark: `y = a·x + b·u` with coefficients from `spec`.
pub fn embed(spec: &EmbedSpec, x: &[f64], u: &[i8]) -> Result<Vec<f64>> {
    let st = stats(x, u)?;
    let (a, b) = coefficients(spec.kind, &st, spec.de)?;
    Ok(x.iter()
        .zip(u)
        .map(|(&xi, &ui)| a * xi + b * ui as f64)
        .collect())
}

/// Orthogonal projection of `y` onto span{x, u}.
///
/// Solves the 2×2 normal equations; when `x` and `u` are linearly dependent
/// (including `x = 0`) the span is the line through `u` and the projection
/// uses `u` alone. The projection never decreases `ρ̂²` and never increases
/// the distortion to `x`, which is why optimal embeddings live in this span.
pub fn project_to_span(y: &[f64], x: &[f64], u: &[i8]) -> Result<Vec<f64>> {
    check_watermark(u)?;
    check_real(x)?;
    check_real(y)?;
    if x.len() != u.len() || y.len() != u.len() {
        return Err(Error::LengthMismatch {
            left: x.len().max(y.len()),
            right: u.len(),
        });
    }
    let n = u.len() as f64;
    let xx = x.iter().map(|v| v * v).sum::<f64>();
    let xu = x.iter().zip(u).map(|(&v, &b)| v * b as f64).sum::<f64>();
    let xy = x.iter().zip(y).map(|(&v, &w)| v * w).sum::<f64>();
    let uy = y.iter().zip(u).map(|(&w, &b)| w * b as f64).sum::<f64>();
    let det = xx * n - xu * xu;
    if det <= 1e-12 * xx.max(1e-300) * n {
        // Degenerate span: x ∝ u (or x = 0); project onto u alone.
        let c = uy / n;
        return Ok(u.iter().map(|&b| c * b as f64).collect());
    }
    let c_x = (xy * n - xu * uy) / det;
    let c_u = (xx * uy - xu * xy) / det;
    Ok(x.iter()
        .zip(u)
        .map(|(&xi, &ui)| c_x * xi + c_u * ui as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FROZEN: &[(f64, f64, f64, f64, f64, f64)] = &[
        // (alpha2, rho, de, a, b, objective)
        (1.0, 0.5, 1.0, 0.0, 1.0, 1.0),
        (1.0, 0.3, 0.5, 0.342757274492, 0.524142418361, 0.786181760425083),
        (2.0, -0.6, 0.7, 0.426529589453, -0.744901368491, 0.770491473297811),
        (1.0, 0.0, 0.25, 0.75, 0.433012701892, 0.25),
        (4.0, 1.5, 1.0, 0.259009746969, 1.309307341416, 0.960866471402110),
    ];

    #[test]
    fn stats_spot_values() {
        let x = [0.3, -0.2, 0.7, 0.1];
        let u = [1i8, -1, 1, -1];
        let st = stats(&x, &u).unwrap();
        assert!((st.alpha2 - 0.1575).abs() < 1e-15);
        assert!((st.rho - 0.275).abs() < 1e-15);
        assert_eq!(st.n, 4);
        assert!(stats(&x, &[1, 2, 1, -1]).is_err());
        assert!(stats(&x[..3], &u).is_err());
    }

    #[test]
    fn mutual_info_spot_values() {
        let u = [1i8, -1, 1, -1];
        let y = [1.2, -0.8, 0.5, -1.1];
        let mi = emp_mutual_info_gauss(&u, &y).unwrap();
        assert!((mi - 1.234049765735809).abs() < 1e-12);
        let r = objective_r(&u, &y).unwrap();
        assert!((r - 3.661016949152542).abs() < 1e-12);
        // y ∝ u saturates the statistic.
        let aligned = [2.0, -2.0, 2.0, -2.0];
        assert_eq!(emp_mutual_info_gauss(&u, &aligned).unwrap(), f64::INFINITY);
        assert!(emp_mutual_info_gauss(&u, &[0.0; 4]).is_err());
    }

    #[test]
    fn closed_form_frozen_examples() {
        for &(alpha2, rho, de, a_ref, b_ref, obj_ref) in FROZEN {
            let (a, b) = optimal_coefficients(alpha2, rho, de).unwrap();
            assert!(
                (a - a_ref).abs() < 1e-9 && (b - b_ref).abs() < 1e-9,
                "({alpha2},{rho},{de}): got ({a},{b}), want ({a_ref},{b_ref})"
            );
            let obj = coeff_objective(alpha2, rho, a, b);
            assert!((obj - obj_ref).abs() < 1e-12);
            // The budget is spent exactly in both regimes.
            let dist = coeff_distortion(alpha2, rho, a, b);
            assert!((dist - de).abs() < 1e-9, "distortion {dist} vs {de}");
        }
    }

    #[test]
    fn erase_regime_boundaries() {
        // ρ² = α²: covertext fully aligned, erased at any budget.
        let (a, b) = optimal_coefficients(1.0, 1.0, 0.5).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - (1.0 + 0.5f64.sqrt())).abs() < 1e-12);
        // α² = 0: degenerate all-zero covertext.
        let (a, b) = optimal_coefficients(0.0, 0.0, 0.25).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 0.5).abs() < 1e-12);
        // Exact regime boundary de = α² − ρ² lands on b = ρ.
        let (a, b) = optimal_coefficients(1.0, 0.6, 0.64).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 0.6).abs() < 1e-12);
    }

    #[test]
    fn sign_embedder_objective_identity() {
        // For y = x + sgn(ρ)√d·u:  ρ̂² = (|ρ|+√d)² / ((|ρ|+√d)² + α² − ρ²).
        for &(alpha2, rho, de) in &[(1.0, 0.4, 0.3), (2.0, -0.9, 1.1), (0.7, 0.0, 0.2)] {
            let st = EmbedStats { alpha2, rho, n: 1 };
            let (a, b) = coefficients(EmbedderKind::Sign, &st, de).unwrap();
            let got = coeff_objective(alpha2, rho, a, b);
            let s = rho.abs() + de.sqrt();
            let want = s * s / (s * s + alpha2 - rho * rho);
            assert!((got - want).abs() < 1e-12);
            assert!((coeff_distortion(alpha2, rho, a, b) - de).abs() < 1e-12);
        }
    }

    #[test]
    fn improved_sign_switches_to_erasure() {
        let st = EmbedStats { alpha2: 1.0, rho: 0.2, n: 8 };
        // Below α²: identical to the sign embedder.
        assert_eq!(
            coefficients(EmbedderKind::ImprovedSign, &st, 0.5).unwrap(),
            coefficients(EmbedderKind::Sign, &st, 0.5).unwrap()
        );
        // Above α²: erases the covertext.
        let (a, b) = coefficients(EmbedderKind::ImprovedSign, &st, 2.0).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - (0.2 + (0.04f64 - 1.0 + 2.0).sqrt())).abs() < 1e-12);
        // Anti-correlated at the boundary: the nonzero root is kept.
        let st = EmbedStats { alpha2: 1.0, rho: -0.5, n: 8 };
        let (a, b) = coefficients(EmbedderKind::ImprovedSign, &st, 1.0).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn detectors_thresholds() {
        let u = [1i8, -1, 1, -1];
        let y = [1.2, -0.8, 0.5, -1.1]; // Î ≈ 1.2340
        assert_eq!(detect_mi(&u, &y, 1.2).unwrap(), Decision::H1);
        assert_eq!(detect_mi(&u, &y, 1.3).unwrap(), Decision::H0);
        // Anti-correlated: MI detector fires, correlation detector refuses.
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_eq!(detect_mi(&u, &neg, 1.2).unwrap(), Decision::H1);
        assert_eq!(detect_corr(&u, &neg, 1.2).unwrap(), Decision::H0);
        assert_eq!(detect_corr(&u, &y, 1.2).unwrap(), Decision::H1);
        // λ = 0 accepts any positive correlation under the corr detector.
        assert_eq!(detect_corr(&u, &y, 0.0).unwrap(), Decision::H1);
        assert!(detect_mi(&u, &y, -0.1).is_err());
    }

    #[test]
    fn embed_meets_budget_and_projection_is_identity_on_span() {
        let x = [0.4, -1.1, 0.3, 0.9, -0.2, 0.05];
        let u = [1i8, 1, -1, 1, -1, -1];
        for kind in [
            EmbedderKind::Optimal,
            EmbedderKind::Sign,
            EmbedderKind::ImprovedSign,
            EmbedderKind::Additive,
        ] {
            let spec = EmbedSpec::new(kind, 0.8).unwrap();
            let y = embed(&spec, &x, &u).unwrap();
            let n = x.len() as f64;
            let dist: f64 = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
            assert!(dist <= 0.8 * (1.0 + 1e-9), "{kind:?} distortion {dist}");
            let yp = project_to_span(&y, &x, &u).unwrap();
            for (a, b) in y.iter().zip(&yp) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    proptest! {
        // The closed form dominates random feasible coefficients.
        #[test]
        fn closed_form_dominates_random_feasible(
            alpha2 in 0.25f64..4.0,
            rho_frac in -0.99f64..0.99,
            de in 0.05f64..2.0,
            a_frac in 0.0f64..1.0,
            b_frac in 0.0f64..1.0
        ) {
            let rho = rho_frac * alpha2.sqrt();
            let (a_star, b_star) = optimal_coefficients(alpha2, rho, de).unwrap();
            let best = coeff_objective(alpha2, rho, a_star, b_star);
            prop_assert!(coeff_distortion(alpha2, rho, a_star, b_star) <= de * (1.0 + 1e-9));

            // Sample a feasible (a, b): for fixed a the budget constraint is a
            // quadratic in b with interval solution [c − w, c + w].
            let s2 = alpha2 - rho * rho;
            let spread = if s2 > 0.0 { (de / s2).sqrt() } else { 2.0 };
            let a = 1.0 - spread + 2.0 * spread * a_frac;
            let disc = de - (a - 1.0) * (a - 1.0) * s2;
            prop_assume!(disc >= 0.0);
            let c = -(a - 1.0) * rho;
            let w = disc.sqrt();
            let b = c - w + 2.0 * w * b_frac;
            prop_assume!(coeff_distortion(alpha2, rho, a, b) <= de * (1.0 + 1e-12));
            let obj = coeff_objective(alpha2, rho, a, b);
            prop_assert!(best >= obj - 1e-9, "closed {best} < sampled {obj} at a={a} b={b}");
        }

        // MI and R are monotone transforms of one another.
        #[test]
        fn mi_and_r_consistency(
            vals in proptest::collection::vec((-2.0f64..2.0, prop::bool::ANY), 2..20)
        ) {
            let y: Vec<f64> = vals.iter().map(|v| v.0).collect();
            let u: Vec<i8> = vals.iter().map(|v| if v.1 { 1 } else { -1 }).collect();
            prop_assume!(y.iter().any(|&v| v != 0.0));
            let n = y.len() as f64;
            let mi = emp_mutual_info_gauss(&u, &y).unwrap();
            let r = objective_r(&u, &y).unwrap();
            if mi.is_finite() {
                prop_assert!((r - n * (1.0 - (-2.0 * mi).exp())).abs() < 1e-9);
            }
        }

        // Projection leaves ⟨u,·⟩ intact, shrinks the norm, and never moves
        // further from the covertext.
        #[test]
        fn projection_contracts(
            vals in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0, prop::bool::ANY), 2..20)
        ) {
            let x: Vec<f64> = vals.iter().map(|v| v.0).collect();
            let y: Vec<f64> = vals.iter().map(|v| v.1).collect();
            let u: Vec<i8> = vals.iter().map(|v| if v.2 { 1 } else { -1 }).collect();
            let yp = project_to_span(&y, &x, &u).unwrap();
            let uy: f64 = y.iter().zip(&u).map(|(&w, &b)| w * b as f64).sum();
            let uyp: f64 = yp.iter().zip(&u).map(|(&w, &b)| w * b as f64).sum();
            prop_assert!((uy - uyp).abs() < 1e-9);
            let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>();
            prop_assert!(norm(&yp) <= norm(&y) + 1e-9);
            let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(s, t)| (s - t) * (s - t)).sum::<f64>();
            prop_assert!(dist(&yp, &x) <= dist(&y, &x) + 1e-9);
        }
    }
}
