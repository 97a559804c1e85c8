//! Cross-correlations between user waveforms under delay and Doppler.
//!
//! For linear chirps the correlation integrals reduce to tones: with
//! E(x) = ∫0^1 e^{jxu} du = e^{jx/2} sinc(x/2), the Doppler-only
//! correlation between the shifted user `m` and the reference user `k` is
//!
//! ```text
//!   ρ_mk(Δf) = e^{jπ(m²-k²)/N} E(2πD),      D = ΔfT + m - k
//! ```
//!
//! Under an additional delay ε the integration window splits at t = ε.
//! In the single-symbol link model the `[0, ε)` head carries nothing
//! (zero-filled delay, as in [`apply_offset`]), leaving one tone over
//! `[ε, T]`: that is [`rho_doppler_delay_linear`], the form used by the
//! correlation vectors and refereed by the Monte Carlo simulator. Under a
//! periodic extension the head instead carries the tail of an identical
//! preceding symbol, giving the two-tone form
//! [`rho_doppler_delay_periodic`] with a second denominator offset by N.
//! Every removable singularity is absorbed by the sinc form of the tone
//! integral.

use crate::error::{Error, Result};
use crate::waveform::{
    apply_offset, sample_symbol, signal_energy, ChirpParams, PhaseLaw, SampledSignal, UserOffset,
};
use num_complex::Complex64;
use std::f64::consts::PI;

/// A complex cross-correlation value ρ_ℜ + jρ_ℑ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexCorrelation {
    pub re: f64,
    pub im: f64,
}

impl ComplexCorrelation {
    pub fn new(re: f64, im: f64) -> Self {
        ComplexCorrelation { re, im }
    }

    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for ComplexCorrelation {
    fn from(z: Complex64) -> Self {
        ComplexCorrelation { re: z.re, im: z.im }
    }
}

/// The N-1 interferer correlations seen by a victim user, with the
/// energy ratios √(Es_k/Es_m) carried alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    pub entries: Vec<ComplexCorrelation>,
    pub energy_ratios: Vec<f64>,
}

impl CorrelationVector {
    pub fn new(entries: Vec<ComplexCorrelation>, energy_ratios: Vec<f64>) -> Result<Self> {
        if entries.len() != energy_ratios.len() {
            return Err(Error::Domain(
                "entries and energy_ratios must have the same length".into(),
            ));
        }
        if entries.iter().any(|e| !e.re.is_finite() || !e.im.is_finite())
            || energy_ratios.iter().any(|r| !r.is_finite() || *r <= 0.0)
        {
            return Err(Error::Domain("correlation vector entries must be finite".into()));
        }
        Ok(CorrelationVector { entries, energy_ratios })
    }

    /// Uniform-energy vector.
    pub fn equal_energy(entries: Vec<ComplexCorrelation>) -> Result<Self> {
        let n = entries.len();
        Self::new(entries, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Energy-scaled complex entries √(Es_k/Es_m)·ρ_k.
    pub fn scaled_entries(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .zip(&self.energy_ratios)
            .map(|(e, r)| e.as_complex() * *r)
            .collect()
    }
}

/// sinc with the removable singularity expanded: sin(y)/y.
fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sin() / y
    }
}

/// E(x) = ∫0^1 e^{jxu} du = e^{jx/2} sinc(x/2).
fn tone_integral(x: f64) -> Complex64 {
    Complex64::from_polar(sinc(0.5 * x), 0.5 * x)
}

/// Normalized numeric cross-correlation Σ a_i conj(b_i) dt / √(Ea·Eb).
pub fn xcorr_numeric(a: &SampledSignal, b: &SampledSignal) -> Result<ComplexCorrelation> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(format!(
            "len {} / dt {} vs len {} / dt {}",
            a.len(),
            a.dt(),
            b.len(),
            b.dt()
        )));
    }
    let ea = signal_energy(a)?;
    let eb = signal_energy(b)?;
    if ea == 0.0 || eb == 0.0 {
        return Err(Error::Domain("cannot normalize a zero-energy signal".into()));
    }
    let raw: Complex64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| x * y.conj())
        .sum::<Complex64>()
        * a.dt();
    Ok(ComplexCorrelation::from(raw / (ea * eb).sqrt()))
}

/// Correlation of `sig` against a reference, normalized by the reference's
/// own energy: ⟨sig, ref⟩ dt / E_ref. This is the normalization under which
/// the reference correlates to exactly 1 with itself and a partially
/// overlapping (zero-filled) interferer contributes its in-window fraction.
pub fn reference_correlation(
    sig: &SampledSignal,
    reference: &SampledSignal,
) -> Result<ComplexCorrelation> {
    if !sig.same_grid(reference) {
        return Err(Error::GridMismatch(format!(
            "len {} / dt {} vs len {} / dt {}",
            sig.len(),
            sig.dt(),
            reference.len(),
            reference.dt()
        )));
    }
    let er = signal_energy(reference)?;
    if er == 0.0 {
        return Err(Error::Domain("reference has zero energy".into()));
    }
    let raw: Complex64 = sig
        .samples()
        .iter()
        .zip(reference.samples())
        .map(|(x, y)| x * y.conj())
        .sum::<Complex64>()
        * sig.dt();
    Ok(ComplexCorrelation::from(raw / er))
}

fn check_pair(params: &ChirpParams, m: usize, k: usize) -> Result<()> {
    if m >= params.n_users || k >= params.n_users {
        return Err(Error::Domain(format!(
            "user pair ({m}, {k}) out of range for N={}",
            params.n_users
        )));
    }
    Ok(())
}

/// Closed-form correlation of user `m`'s Doppler-shifted linear chirp with
/// user `k`'s reference (both sending bit 0), normalized to unit energy.
pub fn rho_doppler_linear(
    params: &ChirpParams,
    m: usize,
    k: usize,
    delta_f: f64,
) -> Result<ComplexCorrelation> {
    check_pair(params, m, k)?;
    if !delta_f.is_finite() {
        return Err(Error::Domain("delta_f must be finite".into()));
    }
    let n = params.n_users as f64;
    let t = params.symbol_duration;
    let d = delta_f * t + m as f64 - k as f64;
    let phi0 = PI * (m as f64 * m as f64 - k as f64 * k as f64) / n;
    let rho = Complex64::from_polar(1.0, phi0) * tone_integral(2.0 * PI * d);
    Ok(ComplexCorrelation::from(rho))
}

/// Shared two-segment evaluation for the delayed, Doppler-shifted linear
/// chirp correlation. Returns (main segment, wrapped-tail segment), both
/// normalized by T.
fn delay_doppler_segments(
    params: &ChirpParams,
    m: usize,
    k: usize,
    delta_f: f64,
    epsilon: f64,
) -> Result<(Complex64, Complex64)> {
    check_pair(params, m, k)?;
    if !delta_f.is_finite() {
        return Err(Error::Domain("delta_f must be finite".into()));
    }
    let t = params.symbol_duration;
    if !(0.0..t).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon={epsilon} outside [0, T)")));
    }
    let n = params.n_users as f64;
    let e = epsilon / t;
    let mf = m as f64;
    let kf = k as f64;

    let d1 = delta_f * t + mf - kf - n * e;
    let d2 = d1 + n;
    let a1 = mf / n - e;
    let a2 = a1 + 1.0;
    let b = kf / n;
    let phi1 = PI * n * (a1 * a1 - b * b);
    let phi2 = PI * n * (a2 * a2 - b * b);

    let main = Complex64::from_polar(1.0 - e, phi1 + 2.0 * PI * d1 * e)
        * tone_integral(2.0 * PI * d1 * (1.0 - e));
    let tail = Complex64::from_polar(e, phi2) * tone_integral(2.0 * PI * d2 * e);
    Ok((main, tail))
}

/// Closed-form correlation under Doppler plus delay in the single-symbol
/// window model: the delayed chirp is zero-filled over `[0, ε)`, matching
/// [`apply_offset`], and the result is normalized by the full symbol
/// energy (so its magnitude is bounded by 1 - ε/T). Reduces to
/// [`rho_doppler_linear`] at ε = 0.
pub fn rho_doppler_delay_linear(
    params: &ChirpParams,
    m: usize,
    k: usize,
    delta_f: f64,
    epsilon: f64,
) -> Result<ComplexCorrelation> {
    let (main, _) = delay_doppler_segments(params, m, k, delta_f, epsilon)?;
    Ok(ComplexCorrelation::from(main))
}

/// As [`rho_doppler_delay_linear`] but with the delayed chirp extended
/// periodically: the `[0, ε)` head carries the tail of an identical
/// preceding symbol (the two-part split of the printed closed form),
/// matching [`apply_offset_periodic`]. Unlike the windowed form this
/// variant has exact interior nulls where the two tones cancel.
///
/// [`apply_offset_periodic`]: crate::waveform::apply_offset_periodic
pub fn rho_doppler_delay_periodic(
    params: &ChirpParams,
    m: usize,
    k: usize,
    delta_f: f64,
    epsilon: f64,
) -> Result<ComplexCorrelation> {
    let (main, tail) = delay_doppler_segments(params, m, k, delta_f, epsilon)?;
    Ok(ComplexCorrelation::from(main + tail))
}

fn offsets_consistent(params: &ChirpParams, offsets: &[UserOffset], victim: usize) -> Result<()> {
    if offsets.len() != params.n_users {
        return Err(Error::Scenario(format!(
            "expected {} per-user offsets, got {}",
            params.n_users,
            offsets.len()
        )));
    }
    if victim >= params.n_users {
        return Err(Error::Scenario(format!(
            "victim user {victim} out of range for N={}",
            params.n_users
        )));
    }
    Ok(())
}

/// Correlation vector ρ_m of Eq.-4 shape: for each interferer (ascending
/// user order, victim skipped) the correlation of its offset waveform for
/// its chosen symbol with the victim's same-symbol branch reference,
/// normalized by the victim reference energy. Energy ratios
/// √(Es_j/Es_victim) are carried separately.
pub fn build_correlation_vector(
    params: &ChirpParams,
    law: &dyn PhaseLaw,
    samples_per_symbol: usize,
    offsets: &[UserOffset],
    victim: usize,
    interferer_symbols: &[bool],
) -> Result<CorrelationVector> {
    offsets_consistent(params, offsets, victim)?;
    if interferer_symbols.len() != params.n_users - 1 {
        return Err(Error::Scenario(format!(
            "expected {} interferer symbols, got {}",
            params.n_users - 1,
            interferer_symbols.len()
        )));
    }
    let refs = [
        sample_symbol(params, law, victim, false, samples_per_symbol)?,
        sample_symbol(params, law, victim, true, samples_per_symbol)?,
    ];
    let es_victim = offsets[victim].symbol_energy;
    let mut entries = Vec::with_capacity(params.n_users - 1);
    let mut ratios = Vec::with_capacity(params.n_users - 1);
    for (j, user) in (0..params.n_users).filter(|u| *u != victim).enumerate() {
        let d = interferer_symbols[j];
        let tx = sample_symbol(params, law, user, d, samples_per_symbol)?;
        let rx = apply_offset(&tx, &offsets[user])?;
        entries.push(reference_correlation(&rx, &refs[d as usize])?);
        ratios.push((offsets[user].symbol_energy / es_victim).sqrt());
    }
    CorrelationVector::new(entries, ratios)
}

/// Per-interferer branch correlations for the first-principles N-user BER:
/// `entries[j][d][v]` is the correlation of interferer j's offset symbol-d
/// waveform with the victim's branch-v reference, normalized by the victim
/// reference energy and scaled by √(Es_j/Es_victim).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCorrelationTable {
    pub entries: Vec<[[Complex64; 2]; 2]>,
}

impl BranchCorrelationTable {
    pub fn interferers(&self) -> usize {
        self.entries.len()
    }
}

/// Build the branch correlation table from sampled waveforms. The victim
/// must be offset-free: the derived BER model takes the receiver as
/// synchronized to it.
pub fn build_branch_correlation_table(
    params: &ChirpParams,
    law: &dyn PhaseLaw,
    samples_per_symbol: usize,
    offsets: &[UserOffset],
    victim: usize,
) -> Result<BranchCorrelationTable> {
    offsets_consistent(params, offsets, victim)?;
    let vo = &offsets[victim];
    if vo.epsilon != 0.0 || vo.delta_f != 0.0 || vo.theta != 0.0 {
        return Err(Error::Scenario(
            "branch correlation table requires an offset-free victim".into(),
        ));
    }
    let refs = [
        sample_symbol(params, law, victim, false, samples_per_symbol)?,
        sample_symbol(params, law, victim, true, samples_per_symbol)?,
    ];
    let es_victim = vo.symbol_energy;
    let mut entries = Vec::with_capacity(params.n_users - 1);
    for user in (0..params.n_users).filter(|u| *u != victim) {
        let ratio = (offsets[user].symbol_energy / es_victim).sqrt();
        let mut cell = [[Complex64::new(0.0, 0.0); 2]; 2];
        for d in 0..2 {
            let tx = sample_symbol(params, law, user, d == 1, samples_per_symbol)?;
            let rx = apply_offset(&tx, &offsets[user])?;
            for v in 0..2 {
                let c = reference_correlation(&rx, &refs[v])?;
                cell[d][v] = c.as_complex() * ratio;
            }
        }
        entries.push(cell);
    }
    Ok(BranchCorrelationTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::LinearChirp;

    fn params(n: usize) -> ChirpParams {
        ChirpParams::new(n, 1.0, 1.0).unwrap()
    }

    #[test]
    fn numeric_autocorrelation_and_sign_flip() {
        let p = params(4);
        let s = sample_symbol(&p, &LinearChirp, 1, false, 64).unwrap();
        let rho = xcorr_numeric(&s, &s).unwrap();
        assert!((rho.re - 1.0).abs() < 1e-12 && rho.im.abs() < 1e-12);
        let neg = SampledSignal::new(s.samples().iter().map(|z| -z).collect(), s.dt()).unwrap();
        let rho = xcorr_numeric(&s, &neg).unwrap();
        assert!((rho.re + 1.0).abs() < 1e-12 && rho.im.abs() < 1e-12);
    }

    #[test]
    fn numeric_synchronous_orthogonality() {
        // Same-slope chirps at ε = Δf = 0 are orthogonal; on the uniform
        // midpoint grid the geometric sum cancels to rounding level.
        for n in [2usize, 5] {
            let p = params(n);
            let ns = 64 * n;
            for m in 0..n {
                for k in 0..n {
                    if m == k {
                        continue;
                    }
                    let a = sample_symbol(&p, &LinearChirp, m, false, ns).unwrap();
                    let b = sample_symbol(&p, &LinearChirp, k, false, ns).unwrap();
                    let rho = xcorr_numeric(&a, &b).unwrap();
                    assert!(
                        rho.magnitude() <= 4.0 / ns as f64,
                        "N={n} ({m},{k}): |rho| = {}",
                        rho.magnitude()
                    );
                }
            }
        }
    }

    #[test]
    fn numeric_conjugate_symmetry() {
        let p = params(5);
        let a = sample_symbol(&p, &LinearChirp, 0, false, 80).unwrap();
        let b = {
            let tx = sample_symbol(&p, &LinearChirp, 3, true, 80).unwrap();
            apply_offset(&tx, &UserOffset::new(0.1, 1.7, 0.4, 1.0).unwrap()).unwrap()
        };
        let ab = xcorr_numeric(&a, &b).unwrap();
        let ba = xcorr_numeric(&b, &a).unwrap();
        assert!((ab.re - ba.re).abs() < 1e-14);
        assert!((ab.im + ba.im).abs() < 1e-14);
    }

    #[test]
    fn numeric_rejects_mismatched_grids() {
        let p = params(2);
        let a = sample_symbol(&p, &LinearChirp, 0, false, 64).unwrap();
        let b = sample_symbol(&p, &LinearChirp, 0, false, 128).unwrap();
        assert!(matches!(xcorr_numeric(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn doppler_closed_form_anchors() {
        let p = params(5);
        // Δf = 0, m ≠ k: exactly zero.
        for m in 0..5 {
            for k in 0..5 {
                if m == k {
                    continue;
                }
                let rho = rho_doppler_linear(&p, m, k, 0.0).unwrap();
                assert!(rho.magnitude() < 1e-15, "({m},{k})");
            }
        }
        // Full overlap at ΔfT = k - m.
        let rho = rho_doppler_linear(&p, 0, 1, 1.0).unwrap();
        assert!((rho.magnitude() - 1.0).abs() < 1e-12);
        assert!(rho_doppler_linear(&p, 0, 5, 0.1).is_err());
    }

    #[test]
    fn doppler_closed_form_matches_numeric() {
        let p = params(10);
        let ns = 64 * 10;
        let refk = sample_symbol(&p, &LinearChirp, 5, false, ns).unwrap();
        let tx = sample_symbol(&p, &LinearChirp, 0, false, ns).unwrap();
        for &dft in &[0.3, 1.9, 5.0, 7.25] {
            let off = UserOffset::new(0.0, dft / 1.0, 0.0, 1.0).unwrap();
            let rx = apply_offset(&tx, &off).unwrap();
            let num = xcorr_numeric(&rx, &refk).unwrap();
            let ana = rho_doppler_linear(&p, 0, 5, dft).unwrap();
            let err = (num.as_complex() - ana.as_complex()).norm();
            assert!(err <= 1e-3, "ΔfT={dft}: err={err}");
        }
    }

    #[test]
    fn delay_doppler_reduces_to_doppler_only() {
        let p = params(5);
        for &dft in &[0.0, 0.45, 2.0, 4.99] {
            let a = rho_doppler_delay_linear(&p, 0, 2, dft, 0.0).unwrap();
            let b = rho_doppler_linear(&p, 0, 2, dft).unwrap();
            assert!((a.as_complex() - b.as_complex()).norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_form_matches_periodic_numeric() {
        use crate::waveform::apply_offset_periodic;
        let p = params(5);
        let ns = 64 * 5;
        let refk = sample_symbol(&p, &LinearChirp, 4, false, ns).unwrap();
        let tx = sample_symbol(&p, &LinearChirp, 0, false, ns).unwrap();
        for &dft in &[0.0, 0.8, 2.35, 4.6] {
            let off = UserOffset::new(0.1, dft, 0.0, 1.0).unwrap();
            let rx = apply_offset_periodic(&tx, &off).unwrap();
            let num = xcorr_numeric(&rx, &refk).unwrap();
            let ana = rho_doppler_delay_periodic(&p, 0, 4, dft, 0.1).unwrap();
            let err = (num.as_complex() - ana.as_complex()).norm();
            assert!(err <= 1e-3, "ΔfT={dft}: err={err}");
        }
    }

    #[test]
    fn windowed_form_matches_zero_filled_numeric() {
        let p = params(5);
        let ns = 64 * 5;
        let refk = sample_symbol(&p, &LinearChirp, 2, false, ns).unwrap();
        let tx = sample_symbol(&p, &LinearChirp, 0, false, ns).unwrap();
        for &dft in &[0.0, 1.3, 3.7] {
            let off = UserOffset::new(0.1, dft, 0.0, 1.0).unwrap();
            let rx = apply_offset(&tx, &off).unwrap();
            let num = reference_correlation(&rx, &refk).unwrap();
            let ana = rho_doppler_delay_linear(&p, 0, 2, dft, 0.1).unwrap();
            let err = (num.as_complex() - ana.as_complex()).norm();
            assert!(err <= 1e-3, "ΔfT={dft}: err={err}");
        }
    }

    #[test]
    fn delay_kills_perfect_overlap_and_orthogonality() {
        // The Fig.-7-style sweeps: victim k observing the delayed, Doppler
        // shifted user 0 for ε = 0.1T never reaches |ρ| = 1 nor |ρ| = 0.
        let p = params(5);
        for k in [2usize, 4] {
            let mut max = 0.0_f64;
            let mut min = f64::INFINITY;
            for i in 0..=200 {
                let dft = 5.0 * i as f64 / 200.0;
                let rho = rho_doppler_delay_linear(&p, 0, k, dft, 0.1).unwrap();
                max = max.max(rho.magnitude());
                min = min.min(rho.magnitude());
            }
            assert!(max < 1.0 - 1e-3, "k={k}: max |rho| = {max}");
            assert!(min > 1e-3, "k={k}: min |rho| = {min}");
        }
    }

    #[test]
    fn periodic_form_has_exact_interior_null() {
        // The two tones of the periodic extension cancel exactly where
        // their denominators sit symmetrically (D1 = -D2); the windowed
        // form stays well away from zero at the same point.
        let p = params(5);
        let wrap = rho_doppler_delay_periodic(&p, 0, 3, 1.0, 0.1).unwrap();
        assert!(wrap.magnitude() < 1e-12, "got {}", wrap.magnitude());
        let win = rho_doppler_delay_linear(&p, 0, 3, 1.0, 0.1).unwrap();
        assert!(win.magnitude() > 0.05);
    }

    #[test]
    fn peak_location_at_subband_spacing() {
        // argmax over Δf of |ρ_mk| sits at ΔfT = k - m for k > m.
        let p = params(10);
        for (m, k) in [(0usize, 1usize), (0, 7), (2, 5)] {
            let mut best = (0.0, -1.0);
            for i in 0..=2000 {
                let dft = 10.0 * i as f64 / 2000.0;
                let mag = rho_doppler_linear(&p, m, k, dft).unwrap().magnitude();
                if mag > best.1 {
                    best = (dft, mag);
                }
            }
            assert!(
                (best.0 - (k as f64 - m as f64)).abs() <= 10.0 / 2000.0 + 1e-12,
                "peak for ({m},{k}) at ΔfT={}",
                best.0
            );
            assert!((best.1 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn magnitude_bounded_on_sweeps() {
        let p = params(5);
        for eps in [0.0, 0.05, 0.1] {
            for i in 0..=400 {
                let dft = 5.0 * i as f64 / 400.0;
                let rho = rho_doppler_delay_linear(&p, 1, 3, dft, eps).unwrap();
                assert!(rho.magnitude() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn correlation_vector_synchronous_is_zero() {
        let p = params(4);
        let offsets = vec![UserOffset::none(); 4];
        let v =
            build_correlation_vector(&p, &LinearChirp, 25 * 4 * 4, &offsets, 0, &[false, true, false])
                .unwrap();
        assert_eq!(v.len(), 3);
        for e in &v.entries {
            assert!(e.magnitude() < 1e-12);
        }
        for r in &v.energy_ratios {
            assert_eq!(*r, 1.0);
        }
    }

    #[test]
    fn correlation_vector_matches_windowed_closed_form() {
        let p = params(2);
        let ns = 320;
        let offsets = vec![
            UserOffset::none(),
            UserOffset::new(0.1, 0.0, 0.0, 1.0).unwrap(),
        ];
        let v = build_correlation_vector(&p, &LinearChirp, ns, &offsets, 0, &[false]).unwrap();
        let ana = rho_doppler_delay_linear(&p, 1, 0, 0.0, 0.1).unwrap();
        let err = (v.entries[0].as_complex() - ana.as_complex()).norm();
        assert!(err <= 1e-3, "err={err}");
    }

    #[test]
    fn correlation_vector_energy_ratios() {
        let p = params(3);
        let offsets = vec![
            UserOffset::none(),
            UserOffset::new(0.0, 0.0, 0.0, 4.0).unwrap(),
            UserOffset::new(0.0, 0.0, 0.0, 0.25).unwrap(),
        ];
        let v = build_correlation_vector(&p, &LinearChirp, 24 * 5, &offsets, 0, &[false, false])
            .unwrap();
        assert!((v.energy_ratios[0] - 2.0).abs() < 1e-15);
        assert!((v.energy_ratios[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn branch_table_two_user_structure() {
        let p = params(2);
        let ns = 320;
        let eps = 0.1;
        let offsets = vec![UserOffset::none(), UserOffset::new(eps, 0.0, 0.0, 1.0).unwrap()];
        let t = build_branch_correlation_table(&p, &LinearChirp, ns, &offsets, 0).unwrap();
        assert_eq!(t.interferers(), 1);
        let c = &t.entries[0];
        // Same-branch entries relate by the phase factor e^{-j2πNε/T}.
        let rot = Complex64::from_polar(1.0, -2.0 * PI * 2.0 * eps / 1.0);
        assert!((c[1][1] - c[0][0] * rot).norm() < 1e-3);
        // Main-branch entry matches the windowed closed form.
        let ana = rho_doppler_delay_linear(&p, 1, 0, 0.0, eps).unwrap().as_complex();
        assert!((c[0][0] - ana).norm() < 1e-3);
        // Cross-branch leakage is small but nonzero for a delayed chirp.
        assert!(c[0][1].norm() < 0.2);
        // A victim with its own offset is rejected.
        let bad = vec![UserOffset::new(0.1, 0.0, 0.0, 1.0).unwrap(), UserOffset::none()];
        assert!(build_branch_correlation_table(&p, &LinearChirp, ns, &bad, 0).is_err());
    }
}
