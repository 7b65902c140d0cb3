//! Analytic false-negative exponents for the Gaussian embedder family.
//!
//! For a Gaussian covertext with variance `σ²`, per-sample budget `D`, and
//! a detector guaranteeing false-positive exponent `λ`, each embedder has a
//! computable asymptotic rate `E` with `P(miss) ≈ e^{−nE}`. The sign and
//! improved-sign rates are closed-form; the additive rate requires a 1-D
//! minimization, done here by a dense grid plus golden-section refinement.
//! All rates are in nats per symbol; `+∞` marks a miss probability decaying
//! faster than any exponential.

use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gaussian::EmbedderKind;

/// Parameters an exponent is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentQuery {
    /// False-positive exponent target, nats/symbol, ≥ 0.
    pub lambda: f64,
    /// Per-sample squared-distortion budget, > 0.
    pub de: f64,
    /// Covertext variance, > 0.
    pub sigma2: f64,
}

impl ExponentQuery {
    pub fn new(lambda: f64, de: f64, sigma2: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Domain("lambda must be finite and >= 0"));
        }
        if !de.is_finite() || de <= 0.0 {
            return Err(Error::Domain("distortion budget must be finite and > 0"));
        }
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(Error::Domain("variance must be finite and > 0"));
        }
        Ok(ExponentQuery { lambda, de, sigma2 })
    }
}

/// The λ above which the sign embedder's exponent is zero:
/// `½·ln(1 + D/σ²)`.
pub fn zero_exponent_lambda(de: f64, sigma2: f64) -> f64 {
    0.5 * (de / sigma2).ln_1p()
}

/// False-negative exponent of the sign embedder.
///
/// Zero for `λ ≥ ½·ln(1+D/σ²)` (equivalently `g ≤ 1`), otherwise
/// `½·[g − ln g − 1]` with `g = D·e^{−2λ} / (σ²·(1−e^{−2λ}))`. Returns a
/// distinguished `+∞` at `λ = 0`: the detector then accepts everything and
/// can never miss.
pub fn exponent_sign(q: &ExponentQuery) -> f64 {
    if q.lambda == 0.0 {
        return f64::INFINITY;
    }
    // The branch is decided on λ itself so that the boundary returned by
    // zero_exponent_lambda maps to exactly 0 despite rounding in g.
    if q.lambda >= zero_exponent_lambda(q.de, q.sigma2) {
        return 0.0;
    }
    let g = sign_g(q);
    0.5 * (g - g.ln() - 1.0)
}

fn sign_g(q: &ExponentQuery) -> f64 {
    let w = (-2.0 * q.lambda).exp();
    let w1 = -(-2.0 * q.lambda).exp_m1(); // 1 − e^{−2λ}, accurate at small λ
    (q.de / q.sigma2) * w / w1
}

/// False-negative exponent of the improved sign embedder. Below `λ = ½·ln 2`
/// the improvement is inactive and the rate equals [`exponent_sign`]; above
/// it the rate saturates at `½·[D/σ² − ln(D/σ²) − 1]` (zero when `D ≤ σ²`).
pub fn exponent_improved_sign(q: &ExponentQuery) -> f64 {
    let half_ln2 = 0.5 * core::f64::consts::LN_2;
    if q.lambda > half_ln2 {
        let ratio = q.de / q.sigma2;
        if ratio <= 1.0 {
            0.0
        } else {
            0.5 * (ratio - ratio.ln() - 1.0)
        }
    } else {
        exponent_sign(q)
    }
}

/// Spherical-cap angles entering the additive-embedder analysis:
/// `Ψ₁ = arccos[(√D·(T²−1) + T·√(r − D(1−T²)))/√r]` and `Ψ₂` with the minus
/// sign. Requires `0 < T < 1` and `r ≥ D(1−T²)`; cosine arguments are
/// clamped into `[−1, 1]` within 1e−12.
pub fn psi_angles(r: f64, t: f64, de: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain("threshold T must lie strictly in (0, 1)"));
    }
    if !de.is_finite() || de <= 0.0 {
        return Err(Error::Domain("distortion budget must be finite and > 0"));
    }
    let floor = de * (1.0 - t * t);
    if r.is_nan() || r <= 0.0 || r < floor - 1e-12 * floor.max(1.0) {
        return Err(Error::Domain("radius r below the feasible range"));
    }
    let root = (r - floor).max(0.0).sqrt();
    let sqrt_r = r.sqrt();
    let clamp = |v: f64| v.clamp(-1.0, 1.0);
    let base = de.sqrt() * (t * t - 1.0);
    let psi1 = clamp((base + t * root) / sqrt_r).acos();
    let psi2 = clamp((base - t * root) / sqrt_r).acos();
    Ok((psi1, psi2))
}

/// E1 objective: `½·[r/σ² − ln(r/σ²) − 2·ln sin Ψ₁(r) − 1]`, with the sine
/// clamped away from zero so the left-endpoint limit stays finite.
fn e1_objective(r: f64, t: f64, q: &ExponentQuery) -> f64 {
    let sin_psi1 = if t == 0.0 {
        // λ = 0 limit: cos Ψ₁ = −√(D/r).
        (1.0 - q.de / r).max(0.0).sqrt()
    } else {
        let (psi1, _) = match psi_angles(r, t, q.de) {
            Ok(p) => p,
            Err(_) => return f64::INFINITY,
        };
        psi1.sin()
    };
    let s = sin_psi1.max(1e-300);
    let x = r / q.sigma2;
    0.5 * (x - x.ln() - 2.0 * s.ln() - 1.0)
}

fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// E1 minimization with an explicit grid density (exposed so the
/// grid-vs-refinement agreement can be tested; use [`exponent_additive`]
/// for the default).
pub fn exponent_additive_with_grid(q: &ExponentQuery, samples: usize) -> f64 {
    let t2 = -(-2.0 * q.lambda).exp_m1();
    let t = t2.sqrt();

    // Minimization interval for r: open at lo, closed at hi. At λ = 0 the
    // interval is (D, ∞); an upper bound is found by doubling until the
    // objective turns upward (it is coercive in r).
    let lo = q.de * (1.0 - t2);
    let hi = if q.lambda == 0.0 {
        let mut h = 2.0 * q.de;
        while e1_objective(2.0 * h, t, q) < e1_objective(h, t, q) && h < 1e12 {
            h *= 2.0;
        }
        2.0 * h
    } else {
        lo / t2
    };

    // Grid over (lo, hi]: the left endpoint is excluded by starting one step
    // in; the right endpoint is hit exactly at i = samples.
    let step = (hi - lo) / samples as f64;
    let mut best_i = 1;
    let mut best = f64::INFINITY;
    for i in 1..=samples {
        let v = e1_objective(lo + i as f64 * step, t, q);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let bracket_lo = (lo + (best_i as f64 - 1.0) * step).max(lo + step * 1e-9);
    let bracket_hi = (lo + (best_i as f64 + 1.0) * step).min(hi);
    let refined = golden_min(bracket_lo, bracket_hi, 1e-8, |r| e1_objective(r, t, q));
    let e1 = best.min(refined);

    let e2 = exponent_sign(q);
    e1.min(e2)
}

/// False-negative exponent of the additive embedder: `min{E1, E2}`, where
/// `E2` equals the sign embedder's rate and `E1` comes from the spherical-cap
/// geometry of outputs that land outside the acceptance cone. Finite even at
/// `λ = 0`. Absolute accuracy ~1e−8 (default 10⁴-point grid).
pub fn exponent_additive(q: &ExponentQuery) -> f64 {
    exponent_additive_with_grid(q, 10_000)
}

/// Exponential rate of the normalized spherical-cap area: `ln sin θ` for
/// `0 < θ ≤ π/2`. Nonpositive; 0 at the full hemisphere.
pub fn cap_log_ratio(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= core::f64::consts::FRAC_PI_2 + 1e-12) {
        return Err(Error::Domain("angle must lie in (0, pi/2]"));
    }
    Ok(theta.sin().min(1.0).ln())
}

/// A sampled exponent-vs-λ curve for one embedder.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentCurve {
    pub kind: EmbedderKind,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples an embedder's exponent on a uniform λ grid over `(0, λ_max]`.
/// The `Optimal` kind has no standalone exponent formula and is rejected.
pub fn curve_with(
    kind: EmbedderKind,
    de: f64,
    sigma2: f64,
    samples: usize,
    lambda_max: f64,
) -> Result<ExponentCurve> {
    if samples == 0 {
        return Err(Error::Domain("curve needs at least one sample"));
    }
    if !lambda_max.is_finite() || lambda_max <= 0.0 {
        return Err(Error::Domain("lambda_max must be finite and > 0"));
    }
    let eval: fn(&ExponentQuery) -> f64 = match kind {
        EmbedderKind::Sign => exponent_sign,
        EmbedderKind::ImprovedSign => exponent_improved_sign,
        EmbedderKind::Additive => exponent_additive,
        EmbedderKind::Optimal => {
            return Err(Error::Domain("no closed-form exponent for the optimal embedder"))
        }
    };
    let mut lambdas = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for j in 1..=samples {
        let lambda = lambda_max * j as f64 / samples as f64;
        let q = ExponentQuery::new(lambda, de, sigma2)?;
        lambdas.push(lambda);
        values.push(eval(&q));
    }
    Ok(ExponentCurve { kind, lambdas, values })
}

/// Default curve: 400 samples up to `1.2 × ½·ln(1+D/σ²)`, far enough past
/// the zero crossing to show the plateau at zero.
pub fn curve(kind: EmbedderKind, de: f64, sigma2: f64) -> Result<ExponentCurve> {
    curve_with(kind, de, sigma2, 400, zero_exponent_lambda(de, sigma2) * 1.2)
}
