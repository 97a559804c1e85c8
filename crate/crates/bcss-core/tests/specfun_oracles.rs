//! Independent numerical oracles for the special functions.
//!
//! Every oracle here integrates or sums a defining expression directly on
//! its own grid; none of them share a code path with the implementations
//! they check.

use bcss_core::specfun::{
    appendix_integral_closed, appendix_integral_quad, bessel_i0, bessel_i0_log, gaussian_q,
    marcum_q, marcum_q1, rician_pair_error,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Composite trapezoid of `f` over [a, b] with n panels.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..n {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

#[test]
fn gaussian_q_matches_tail_trapezoid() {
    // Q(1) by trapezoid quadrature of the Gaussian tail over [1, 40].
    let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let oracle = trapezoid(phi, 1.0, 40.0, 4_000_000);
    let got = gaussian_q(1.0).unwrap();
    assert!((got - oracle).abs() < 1e-10, "impl {got} vs oracle {oracle}");
    assert!((got - 0.158655).abs() < 1e-6);
}

#[test]
fn bessel_i0_matches_integral_form() {
    // I0(x) = (1/π) ∫0^π e^{x cos θ} dθ; the integrand's odd endpoint
    // derivatives vanish, so the trapezoid converges spectrally. Checks
    // both sides of the series/asymptotic crossover at 15.
    for &x in &[0.5, 1.0, 7.0, 14.5, 15.5, 25.0, 80.0] {
        let oracle =
            trapezoid(|th: f64| (x * th.cos()).exp(), 0.0, std::f64::consts::PI, 20_000)
                / std::f64::consts::PI;
        let got = bessel_i0(x).unwrap();
        assert!(
            (got / oracle - 1.0).abs() < 1e-12,
            "x={x}: impl {got} vs oracle {oracle}"
        );
        let lg = bessel_i0_log(x).unwrap();
        assert!((lg.exp() / oracle - 1.0).abs() < 1e-12, "log variant at x={x}");
    }
    // Series-oracle anchor: Σ (x/2)^{2k}/(k!)² at x = 1, frozen at rel 1e-14.
    assert!((bessel_i0(1.0).unwrap() - 1.2660658777520084).abs() < 1e-13);
}

/// Composite Simpson of `f` over [a, b] with 2n panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / (2 * n) as f64;
    let mut sum = f(a) + f(b);
    for i in 1..2 * n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Series form of the modified Bessel function I_n, independent of the
/// library's recurrence-based path.
fn bessel_in_series(n: u32, z: f64) -> f64 {
    let half = z / 2.0;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= half * half / (k * (k + n as f64));
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Marcum Q1 by direct quadrature of ∫_b^∞ x exp(-(x²+a²)/2) I0(ax) dx.
fn marcum_q1_quad(a: f64, b: f64) -> f64 {
    let upper = a.max(b) + 14.0;
    if upper <= b {
        return 0.0;
    }
    let f = |x: f64| {
        if x == 0.0 && a == 0.0 {
            return 0.0;
        }
        (x.ln() - (x * x + a * a) / 2.0 + bessel_i0_log(a * x).unwrap()).exp()
    };
    simpson(f, b, upper, 40_000)
}

#[test]
fn marcum_q1_matches_quadrature_grid() {
    // Grid over a, b ∈ [0, 8] at unit steps, tolerance 1e-10.
    for ai in 0..=8 {
        for bi in 0..=8 {
            let (a, b) = (ai as f64, bi as f64);
            let got = marcum_q1(a, b).unwrap();
            let oracle = marcum_q1_quad(a, b);
            assert!(
                (got - oracle).abs() < 1e-10,
                "a={a} b={b}: impl {got} vs oracle {oracle}"
            );
        }
    }
}

#[test]
fn marcum_q1_matches_quadrature_random() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x51ca);
    for _ in 0..40 {
        let a = rng.gen_range(0.0..8.0);
        let b = rng.gen_range(0.0..8.0);
        let got = marcum_q1(a, b).unwrap();
        let oracle = marcum_q1_quad(a, b);
        assert!((got - oracle).abs() < 1e-10, "a={a} b={b}");
    }
}

#[test]
fn marcum_higher_order_matches_quadrature() {
    // Q_k(a,b) = ∫_b^∞ x (x/a)^{k-1} exp(-(x²+a²)/2) I_{k-1}(ax) dx with
    // I_{k-1} from its power series.
    for &(k, a, b) in &[(2u32, 1.3, 0.8), (3u32, 0.9, 2.1), (2u32, 3.0, 1.0)] {
        let f = |x: f64| {
            x * (x / a).powi(k as i32 - 1)
                * (-(x * x + a * a) / 2.0).exp()
                * bessel_in_series(k - 1, a * x)
        };
        let oracle = simpson(f, b, a.max(b) + 14.0, 40_000);
        let got = marcum_q(k, a, b).unwrap();
        assert!((got - oracle).abs() < 1e-10, "k={k} a={a} b={b}: {got} vs {oracle}");
    }
}

/// 2-D trapezoid of the joint Rician density over {r1 > r0} on [0, L]²,
/// evaluated via per-row tail sums (identical to the full 2-D tableau for
/// a separable integrand).
fn rician_pair_quad2d(x: f64, y: f64, sigma: f64, grid: usize, l: f64) -> f64 {
    let h = l / (grid - 1) as f64;
    let s2 = sigma * sigma;
    let dens = |nc: f64, r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        (r.ln() - s2.ln() - (r * r + nc * nc) / (2.0 * s2)
            + bessel_i0_log(nc * r / s2).unwrap())
        .exp()
    };
    let g0: Vec<f64> = (0..grid).map(|i| dens(x, i as f64 * h)).collect();
    let g1: Vec<f64> = (0..grid).map(|i| dens(y, i as f64 * h)).collect();
    // tail[i] = trapezoid of g1 from node i to the end.
    let mut tail = vec![0.0; grid];
    for i in (0..grid - 1).rev() {
        tail[i] = tail[i + 1] + 0.5 * h * (g1[i] + g1[i + 1]);
    }
    let mut p = 0.0;
    for i in 0..grid {
        let w = if i == 0 || i == grid - 1 { 0.5 } else { 1.0 };
        p += w * g0[i] * tail[i];
    }
    p * h
}

#[test]
fn rician_pair_matches_2d_quadrature() {
    let oracle = rician_pair_quad2d(2.0, 1.0, 1.0, 4096, 12.0);
    let got = rician_pair_error(2.0, 1.0, 1.0).unwrap();
    assert!((got - oracle).abs() < 3e-6, "impl {got} vs oracle {oracle}");
    // A second, asymmetric case including the complement route.
    let oracle = rician_pair_quad2d(1.2, 3.4, 0.9, 4096, 12.0);
    let got = rician_pair_error(1.2, 3.4, 0.9).unwrap();
    assert!((got - oracle).abs() < 3e-6, "impl {got} vs oracle {oracle}");
}

#[test]
fn rician_pair_reduces_to_fsk_form() {
    // (X = AT, Y = 0, σ = sqrt(N0 T)) → ½ exp(-Es/(2N0)) with A²T = 2Es.
    let t = 1.0_f64;
    for &es_over_n0 in &[0.5_f64, 1.0, 4.0, 15.848931924611133] {
        let es = 1.0_f64;
        let n0 = es / es_over_n0;
        let a = (2.0 * es / t).sqrt();
        let sigma = (n0 * t).sqrt();
        let got = rician_pair_error(a * t, 0.0, sigma).unwrap();
        let want = 0.5 * (-es_over_n0 / 2.0).exp();
        assert!((got / want - 1.0).abs() < 1e-12, "γ={es_over_n0}");
    }
}

#[test]
fn appendix_closed_matches_quadrature_sample() {
    // A 25-draw slice of the acceptance identity, kept here for fast
    // feedback during development.
    let mut rng = ChaCha12Rng::seed_from_u64(0xA99);
    for _ in 0..25 {
        let p = rng.gen_range(0.1..3.0);
        let c = rng.gen_range(0.1..3.0);
        let beta = rng.gen_range(0.1..3.0);
        let alpha = rng.gen_range(0.1..3.0);
        let closed = appendix_integral_closed(p, c, beta, alpha).unwrap();
        let quad = appendix_integral_quad(p, c, beta, alpha).unwrap();
        let tol = 1e-6 * quad.abs().max(1.0);
        assert!(
            (closed - quad).abs() <= tol,
            "p={p} c={c} β={beta} α={alpha}: closed {closed} vs quad {quad}"
        );
    }
}
