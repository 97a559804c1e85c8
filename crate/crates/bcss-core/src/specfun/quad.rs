//! Adaptive Simpson quadrature used by the integral oracles.

use crate::error::{Error, Result};
use std::cell::Cell;

/// Integrate `f` over `[a, b]` to absolute tolerance `eps_abs`.
///
/// `max_intervals` bounds the total number of subdivisions; exceeding it
/// returns an error rather than a silently unconverged value.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, eps_abs: f64, max_intervals: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("bad integration interval [{a}, {b}]")));
    }
    if !(eps_abs > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be > 0".into()));
    }
    let budget = Cell::new(max_intervals);

    // Seed with a fine uniform split so narrow peaks well inside the
    // interval are not missed by the first bisection tests (the appendix
    // integrand can concentrate in ~1/140 of its nominal range).
    const SEED: usize = 1024;
    let h = (b - a) / SEED as f64;
    let mut total = 0.0;
    for i in 0..SEED {
        let x0 = a + i as f64 * h;
        let x1 = x0 + h;
        let fx0 = f(x0);
        let fm = f(0.5 * (x0 + x1));
        let fx1 = f(x1);
        let whole = simpson(fx0, fm, fx1, h);
        total += recurse(&f, x0, x1, fx0, fm, fx1, whole, eps_abs / SEED as f64, 52, &budget)?;
    }
    Ok(total)
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    budget: &Cell<u32>,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::Quadrature("maximum recursion depth reached".into()));
    }
    if delta.abs() <= 15.0 * eps || (b - a) < 1e-14 * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    let remaining = budget.get();
    if remaining < 2 {
        return Err(Error::Quadrature("subdivision budget exhausted".into()));
    }
    budget.set(remaining - 2);
    let l = recurse(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1, budget)?;
    let r = recurse(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1, budget)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact on cubics.
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 1000).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn integrates_gaussian() {
        let v = adaptive_simpson(
            |x| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -8.0,
            8.0,
            1e-12,
            1_000_000,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn finds_narrow_peak() {
        // Peak of width ~1e-2 inside a wide interval.
        let v = adaptive_simpson(|x| (-((x - 3.0) / 1e-2).powi(2)).exp(), 0.0, 100.0, 1e-12, 4_000_000)
            .unwrap();
        let exact = 1e-2 * std::f64::consts::PI.sqrt();
        assert!((v - exact).abs() < 1e-10, "got {v}, want {exact}");
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(adaptive_simpson(|x| x, 1.0, 0.0, 1e-9, 100).is_err());
    }
}
