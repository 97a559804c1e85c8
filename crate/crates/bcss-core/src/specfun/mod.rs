//! Special functions underpinning the analytic BER expressions.
//!
//! Gaussian Q, the modified Bessel function I0 (with a log-scaled variant
//! for the large arguments that appear at high SNR), the first-order Marcum
//! Q-function, the error probability of a pair of independent Rician
//! envelopes, and the closed form of the integral
//!
//! ```text
//!   I = ∫0^∞ x exp(-p²x²/2) I0(cx) Q1(β, αx) dx
//! ```
//!
//! together with its quadrature counterpart acting as an independent oracle.
//!
//! Products of the shape exp(-u)·I0(v) are evaluated in log space so the
//! expressions stay finite at arbitrarily high SNR; the Marcum sums are
//! built from exponentially scaled Bessel terms e^{-z} I_k(z) for the same
//! reason.

mod quad;

use crate::error::{Error, Result};
use std::f64::consts::{PI, SQRT_2};

/// Tolerances for the quadrature/series oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunConfig {
    /// Absolute quadrature tolerance (scaled by the integral's magnitude
    /// when that magnitude exceeds one).
    pub quad_abs_tol: f64,
    /// Subdivision budget for adaptive quadrature.
    pub quad_max_subdiv: u32,
    /// Relative truncation tolerance for power/asymptotic series.
    pub series_rel_tol: f64,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        SpecFunConfig {
            quad_abs_tol: 1e-9,
            quad_max_subdiv: 2_000_000,
            series_rel_tol: 1e-15,
        }
    }
}

impl SpecFunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_abs_tol > 0.0 && self.series_rel_tol > 0.0) {
            return Err(Error::Domain("tolerances must be > 0".into()));
        }
        if self.quad_max_subdiv < 64 {
            return Err(Error::Domain("quad_max_subdiv must be >= 64".into()));
        }
        Ok(())
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    check_finite(name, x)?;
    if x < 0.0 {
        Err(Error::Domain(format!("{name} must be >= 0, got {x}")))
    } else {
        Ok(())
    }
}

/// Gaussian tail probability Q(x) = P(Z > x) for Z ~ N(0, 1).
pub fn gaussian_q(x: f64) -> Result<f64> {
    check_finite("x", x)?;
    Ok(0.5 * libm::erfc(x / SQRT_2))
}

/// Modified Bessel function of the first kind, order zero.
///
/// Negative arguments are accepted through the even symmetry
/// I0(-x) = I0(x). Returns an overflow error once the value exceeds the
/// f64 range (x ≳ 713); use [`bessel_i0_log`] there.
pub fn bessel_i0(x: f64) -> Result<f64> {
    check_finite("x", x)?;
    let ax = x.abs();
    if ax < 15.0 {
        Ok(i0_series(ax))
    } else {
        let v = i0_log_asymptotic(ax).exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!("I0({x}) exceeds f64 range")))
        }
    }
}

/// ln I0(x), finite for all finite x (even symmetry applied).
pub fn bessel_i0_log(x: f64) -> Result<f64> {
    check_finite("x", x)?;
    let ax = x.abs();
    if ax < 15.0 {
        Ok(i0_series(ax).ln())
    } else {
        Ok(i0_log_asymptotic(ax))
    }
}

/// Power series Σ (x²/4)^k / (k!)², convergent and cancellation-free.
fn i0_series(ax: f64) -> f64 {
    let t = ax * ax / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= t / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// ln I0 via the large-argument expansion
/// I0(x) ~ e^x / sqrt(2πx) · Σ c_k / x^k, summed to its smallest term.
fn i0_log_asymptotic(ax: f64) -> f64 {
    let mut coeff = 1.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        coeff *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k);
        let next = coeff / ax.powf(k);
        if next >= term || next < 1e-17 * sum {
            if next < term {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    ax + sum.ln() - 0.5 * (2.0 * PI * ax).ln()
}

/// Exponentially scaled sequence t_n = e^{-x} I_n(x) for n = 0..=nmax,
/// computed by downward (Miller) recurrence and normalized through
/// t_0 + 2 Σ_{n≥1} t_n = 1.
fn scaled_bessel_i_seq(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0_f64; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let turning = x.ceil() as usize + ((83.0 * x).sqrt().ceil() as usize);
    let m = turning.max(nmax + 60) + 10;

    let mut up1 = 0.0_f64; // u_{n+1}
    let mut u = 1e-280_f64; // u_n, starting at n = m
    let mut sum = 0.0_f64;
    for n in (0..=m).rev() {
        if n <= nmax {
            out[n] = u;
        }
        sum += if n == 0 { u } else { 2.0 * u };
        if n > 0 {
            let um1 = up1 + (2.0 * n as f64 / x) * u;
            up1 = u;
            u = um1;
            if u > 1e250 {
                let s = 1e-250;
                u *= s;
                up1 *= s;
                sum *= s;
                for v in out.iter_mut() {
                    *v *= s;
                }
            }
        }
    }
    let inv = 1.0 / sum;
    for v in out.iter_mut() {
        *v *= inv;
    }
    out
}

/// Number of series terms needed for the Marcum/Rician sums.
fn term_budget(z: f64, r: f64) -> usize {
    let gauss = (10.0 * z.sqrt()) as usize + 60;
    if r < 0.95 {
        ((-46.0 / r.ln()).ceil() as usize + 4).min(gauss)
    } else {
        gauss
    }
}

/// Scaled series pieces for arguments lo <= hi: returns
/// (t_0, Σ_{k≥1} (lo/hi)^k t_k) with t_k = e^{-lo·hi} I_k(lo·hi). Every
/// Marcum/Rician quantity below is a nonnegative combination of the two,
/// so no formula ever suffers cancellation between its Q and I0 terms.
fn scaled_sums(lo: f64, hi: f64) -> (f64, f64) {
    let z = lo * hi;
    if z == 0.0 {
        return (1.0, 0.0);
    }
    let r = lo / hi;
    let kmax = term_budget(z, r);
    let t = scaled_bessel_i_seq(z, kmax);
    let mut tail = 0.0;
    let mut rk = 1.0;
    for (k, tk) in t.iter().enumerate().skip(1) {
        rk *= r;
        let term = rk * tk;
        tail += term;
        if term < 1e-18 * (t[0] + tail) && k > 2 {
            break;
        }
    }
    (t[0], tail)
}

fn marcum_q1_unchecked(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return (-b * b / 2.0).exp();
    }
    // Entirely inside a saturated tail: the e^{-(a-b)²/2} scale factor
    // underflows, so skip the series work.
    if (a - b) * (a - b) / 2.0 > 745.0 {
        return if a <= b { 0.0 } else { 1.0 };
    }
    let g = (-(a - b) * (a - b) / 2.0).exp();
    if a <= b {
        let (t0, tail) = scaled_sums(a, b);
        (g * (t0 + tail)).min(1.0)
    } else {
        let (_, tail) = scaled_sums(b, a);
        1.0 - g * tail
    }
}

/// ln Q1(a, b), stable even where Q1 underflows.
fn marcum_q1_ln(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return -b * b / 2.0;
    }
    if a <= b {
        let (t0, tail) = scaled_sums(a, b);
        -(a - b) * (a - b) / 2.0 + (t0 + tail).ln()
    } else {
        let g = (-(a - b) * (a - b) / 2.0).exp();
        let (_, tail) = scaled_sums(b, a);
        (-g * tail).ln_1p()
    }
}

/// First-order Marcum Q-function Q1(a, b).
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    check_nonneg("a", a)?;
    check_nonneg("b", b)?;
    Ok(marcum_q1_unchecked(a, b))
}

/// Generalized Marcum Q-function Q_k(a, b) for integer order k >= 1,
/// via Q_{k+1}(a,b) = Q_k(a,b) + (b/a)^k e^{-(a²+b²)/2} I_k(ab).
pub fn marcum_q(k: u32, a: f64, b: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain(format!("order k must be >= 1, got {k}")));
    }
    check_nonneg("a", a)?;
    check_nonneg("b", b)?;
    if k == 1 {
        return Ok(marcum_q1_unchecked(a, b));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    // Near a = 0 the correction terms collapse to a Poisson-weighted tail.
    if a < 1e-8 * b.max(1.0) {
        let h = b * b / 2.0;
        let mut term = 1.0;
        let mut s = 1.0;
        for n in 1..k {
            term *= h / n as f64;
            s += term;
        }
        return Ok(((-h).exp() * s).min(1.0));
    }
    let z = a * b;
    let t = scaled_bessel_i_seq(z, (k - 1) as usize);
    let g = (-(a - b) * (a - b) / 2.0).exp();
    let r = b / a;
    let mut corr = 0.0;
    let mut rn = 1.0;
    for (n, tn) in t.iter().enumerate().skip(1) {
        rn *= r;
        let _ = n;
        corr += rn * tn;
    }
    Ok((marcum_q1_unchecked(a, b) + g * corr).min(1.0))
}

/// Q1(a, b) - exp(-(a²+b²)/2) I0(ab), assembled in the scaled domain so the
/// two terms never cancel. Used by the literal transcription of the printed
/// N-user BER bracket.
pub(crate) fn marcum_q1_minus_exp_i0(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        // Q1(a, 0) = 1, I0(0) = 1.
        return -(-a * a / 2.0).exp_m1();
    }
    if a == 0.0 {
        return 0.0;
    }
    let g = (-(a - b) * (a - b) / 2.0).exp();
    if a <= b {
        let (_, tail) = scaled_sums(a, b);
        g * tail
    } else {
        let (t0, tail) = scaled_sums(b, a);
        g.mul_add(-(t0 + tail), 1.0)
    }
}

/// P(r1 > r0) for independent Rician envelopes with common scale `sigma`:
/// r0 has noncentrality `x`, r1 has noncentrality `y`.
///
/// Equals Q1(Y/(σ√2), X/(σ√2)) - ½ exp(-(X²+Y²)/(4σ²)) I0(XY/(2σ²)),
/// evaluated as a single positive scaled series so the two terms never
/// cancel and the complement identity P(x,y) + P(y,x) = 1 holds exactly.
pub fn rician_pair_error(x: f64, y: f64, sigma: f64) -> Result<f64> {
    check_nonneg("x", x)?;
    check_nonneg("y", y)?;
    check_finite("sigma", sigma)?;
    if sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    let a = y / (sigma * SQRT_2);
    let b = x / (sigma * SQRT_2);
    if a == b {
        // Identically distributed envelopes tie at exactly one half.
        return Ok(0.5);
    }
    if a < b {
        Ok(rician_pair_lower(a, b))
    } else {
        Ok(1.0 - rician_pair_lower(b, a))
    }
}

/// P(r1 > r0) in normalized coordinates a = Y/(σ√2) ≤ b = X/(σ√2):
/// e^{-(a-b)²/2} · (t_0/2 + Σ_{k≥1} (a/b)^k t_k).
fn rician_pair_lower(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        // Both envelopes Rayleigh with the same scale.
        return 0.5;
    }
    let (t0, tail) = scaled_sums(a, b);
    (-(a - b) * (a - b) / 2.0).exp() * (0.5 * t0 + tail)
}

fn appendix_validate(p: f64, c: f64, beta: f64, alpha: f64) -> Result<()> {
    check_finite("p", p)?;
    if p <= 0.0 {
        return Err(Error::Domain(format!("p must be > 0, got {p}")));
    }
    check_nonneg("c", c)?;
    check_nonneg("beta", beta)?;
    check_nonneg("alpha", alpha)?;
    Ok(())
}

/// Closed form of I = ∫0^∞ x exp(-p²x²/2) I0(cx) Q1(β, αx) dx:
///
/// ```text
/// I = (1/p²) exp(c²/2p²) Q1( βp/√(α²+p²), αc/(p√(α²+p²)) )
///   - (α²/(p²(α²+p²))) exp( (c² - p²β²) / (2(α²+p²)) ) I0( αβc/(α²+p²) )
/// ```
///
/// Both terms are assembled in log space; the first may dwarf the second by
/// hundreds of orders of magnitude for small p.
pub fn appendix_integral_closed(p: f64, c: f64, beta: f64, alpha: f64) -> Result<f64> {
    appendix_validate(p, c, beta, alpha)?;
    let s2 = alpha * alpha + p * p;
    let s = s2.sqrt();
    let qa = beta * p / s;
    let qb = alpha * c / (p * s);
    let ln_t1 = c * c / (2.0 * p * p) + marcum_q1_ln(qa, qb) - (p * p).ln();
    let t1 = ln_t1.exp();
    let t2 = if alpha == 0.0 {
        0.0
    } else {
        let ln_t2 = (alpha * alpha / (p * p * s2)).ln()
            + (c * c - p * p * beta * beta) / (2.0 * s2)
            + bessel_i0_log(alpha * beta * c / s2)?;
        ln_t2.exp()
    };
    let v = t1 - t2;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!(
            "closed-form integral not representable for p={p}, c={c}, beta={beta}, alpha={alpha}"
        )))
    }
}

/// Direct adaptive quadrature of the same integral, composed from
/// [`marcum_q1`] and [`bessel_i0_log`]; the independent oracle for
/// [`appendix_integral_closed`].
pub fn appendix_integral_quad(p: f64, c: f64, beta: f64, alpha: f64) -> Result<f64> {
    appendix_integral_quad_with(p, c, beta, alpha, &SpecFunConfig::default())
}

/// As [`appendix_integral_quad`] with explicit tolerances.
pub fn appendix_integral_quad_with(
    p: f64,
    c: f64,
    beta: f64,
    alpha: f64,
    cfg: &SpecFunConfig,
) -> Result<f64> {
    appendix_validate(p, c, beta, alpha)?;
    cfg.validate()?;
    // The envelope x exp(-p²x²/2) I0(cx) peaks near c/p² with width ~1/p;
    // extend the nominal 40/p upper limit to cover the displaced peak.
    let upper = (40.0 + 2.0 * c / p) / p;
    let integrand = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let q = marcum_q1_unchecked(beta, alpha * x);
        if q <= 0.0 {
            return 0.0;
        }
        let ln_v = x.ln() - p * p * x * x / 2.0 + bessel_i0_log(c * x).unwrap() + q.ln();
        ln_v.exp()
    };
    // Coarse pass to set the absolute tolerance scale.
    let coarse: f64 = (0..=256)
        .map(|i| {
            let x = upper * i as f64 / 256.0;
            let w = if i == 0 || i == 256 { 0.5 } else { 1.0 };
            w * integrand(x)
        })
        .sum::<f64>()
        * (upper / 256.0);
    let eps = cfg.quad_abs_tol * coarse.abs().max(1.0);
    quad::adaptive_simpson(integrand, 0.0, upper, eps, cfg.quad_max_subdiv)
}
