//! Sampled complex-baseband chirp symbols.
//!
//! A binary CSS symbol for user `m` carrying bit `b` follows the phase law
//! φ(m, b, t); the built-in linear family is
//!
//! ```text
//!   φ = π (N/T²) (t + mT/N + bT)²
//! ```
//!
//! so the instantaneous frequency sweeps from (m + bN)/T to (m + (b+1)N)/T.
//! Symbols are sampled at midpoints t_i = (i + ½)·dt, which makes the
//! discrete correlation a midpoint quadrature of the continuous one (error
//! O(1/Ns²) instead of the O(1/Ns) phase bias of left-endpoint sampling).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Signal-set parameters: user count N, symbol duration T, amplitude A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    pub n_users: usize,
    pub symbol_duration: f64,
    pub amplitude: f64,
}

impl ChirpParams {
    pub fn new(n_users: usize, symbol_duration: f64, amplitude: f64) -> Result<Self> {
        if n_users < 1 {
            return Err(Error::Domain("n_users must be >= 1".into()));
        }
        if !(symbol_duration > 0.0 && symbol_duration.is_finite()) {
            return Err(Error::Domain("symbol_duration must be > 0".into()));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Domain("amplitude must be > 0".into()));
        }
        Ok(ChirpParams { n_users, symbol_duration, amplitude })
    }
}

/// A chirp family's phase law φ(m, b, t), in radians.
pub trait PhaseLaw: Send + Sync {
    /// Family identifier used in scenario configs.
    fn family(&self) -> &str;
    /// Phase at time `t` in `[0, T]` for user `m` sending bit `b`.
    fn phase(&self, params: &ChirpParams, m: usize, b: bool, t: f64) -> f64;
}

/// The linear chirp family (chirp rate N/T²).
#[derive(Debug, Default, Clone, Copy)]
pub struct LinearChirp;

impl PhaseLaw for LinearChirp {
    fn family(&self) -> &str {
        "linear"
    }

    fn phase(&self, params: &ChirpParams, m: usize, b: bool, t: f64) -> f64 {
        let n = params.n_users as f64;
        let t_sym = params.symbol_duration;
        let shift = t + m as f64 * t_sym / n + if b { t_sym } else { 0.0 };
        PI * n / (t_sym * t_sym) * shift * shift
    }
}

/// Phase of the linear family at one instant, with domain checks.
pub fn linear_phase(params: &ChirpParams, m: usize, b: bool, t: f64) -> Result<f64> {
    if m >= params.n_users {
        return Err(Error::Domain(format!(
            "user index {m} out of range for N={}",
            params.n_users
        )));
    }
    if !(0.0..=params.symbol_duration).contains(&t) {
        return Err(Error::Domain(format!("t={t} outside [0, T]")));
    }
    Ok(LinearChirp.phase(params, m, b, t))
}

/// Registry of phase-law families keyed by family string.
///
/// "linear" is always present; nonlinear families (quartic, sinusoidal,
/// quadratic, exponential, ...) are supplied by the caller as plugins.
#[derive(Clone)]
pub struct PhaseLawRegistry {
    laws: BTreeMap<String, Arc<dyn PhaseLaw>>,
}

impl Default for PhaseLawRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl PhaseLawRegistry {
    pub fn new() -> Self {
        let mut laws: BTreeMap<String, Arc<dyn PhaseLaw>> = BTreeMap::new();
        laws.insert("linear".to_string(), Arc::new(LinearChirp));
        PhaseLawRegistry { laws }
    }

    pub fn register(&mut self, law: Arc<dyn PhaseLaw>) {
        self.laws.insert(law.family().to_string(), law);
    }

    pub fn get(&self, family: &str) -> Result<Arc<dyn PhaseLaw>> {
        self.laws.get(family).cloned().ok_or_else(|| Error::UnknownFamily {
            family: family.to_string(),
            available: self.families(),
        })
    }

    pub fn families(&self) -> Vec<String> {
        self.laws.keys().cloned().collect()
    }
}

/// A complex baseband waveform on a uniform sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    dt: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, dt: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("signal must contain at least one sample".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain("dt must be > 0".into()));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::Domain("signal contains non-finite samples".into()));
        }
        Ok(SampledSignal { samples, dt })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    /// Same dt (relative 1e-12) and same length.
    pub fn same_grid(&self, other: &SampledSignal) -> bool {
        self.samples.len() == other.samples.len()
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt.max(other.dt)
    }
}

/// Per-user impairments: delay ε, Doppler Δf, fixed phase θ, symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserOffset {
    /// Delay in seconds, 0 <= ε < T, representable on the sample grid.
    pub epsilon: f64,
    /// Doppler shift in Hz.
    pub delta_f: f64,
    /// Fixed phase offset in radians (reduced mod 2π on construction).
    pub theta: f64,
    /// Symbol energy; only ratios between users matter to the link model.
    pub symbol_energy: f64,
}

impl UserOffset {
    pub fn new(epsilon: f64, delta_f: f64, theta: f64, symbol_energy: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !delta_f.is_finite() || !theta.is_finite() {
            return Err(Error::Domain("delta_f and theta must be finite".into()));
        }
        if !(symbol_energy > 0.0 && symbol_energy.is_finite()) {
            return Err(Error::Domain("symbol_energy must be > 0".into()));
        }
        Ok(UserOffset {
            epsilon,
            delta_f,
            theta: theta.rem_euclid(2.0 * PI),
            symbol_energy,
        })
    }

    /// No impairments, unit symbol energy.
    pub fn none() -> Self {
        UserOffset { epsilon: 0.0, delta_f: 0.0, theta: 0.0, symbol_energy: 1.0 }
    }
}

/// Minimum complex samples per symbol: the signal set sweeps a bandwidth
/// of 2N/T, sampled at no less than 4x the per-symbol sweep N/T... kept at
/// 8N samples over T.
pub fn min_samples_per_symbol(params: &ChirpParams) -> usize {
    8 * params.n_users
}

/// Sample one symbol of user `m` carrying bit `b`.
pub fn sample_symbol(
    params: &ChirpParams,
    law: &dyn PhaseLaw,
    m: usize,
    b: bool,
    samples_per_symbol: usize,
) -> Result<SampledSignal> {
    if m >= params.n_users {
        return Err(Error::Domain(format!(
            "user index {m} out of range for N={}",
            params.n_users
        )));
    }
    let floor = min_samples_per_symbol(params);
    if samples_per_symbol < floor {
        return Err(Error::Domain(format!(
            "samples_per_symbol={samples_per_symbol} below the sampling floor {floor} (= 8N)"
        )));
    }
    let dt = params.symbol_duration / samples_per_symbol as f64;
    let samples = (0..samples_per_symbol)
        .map(|i| {
            let t = (i as f64 + 0.5) * dt;
            let phi = law.phase(params, m, b, t);
            Complex64::from_polar(params.amplitude, phi)
        })
        .collect();
    SampledSignal::new(samples, dt)
}

fn delay_to_samples(sig: &SampledSignal, epsilon: f64) -> Result<usize> {
    let steps = epsilon / sig.dt;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "delay {epsilon} is not an integer multiple of dt={}",
            sig.dt
        )));
    }
    Ok(rounded as usize)
}

/// Delay by ε (zero-filling the vacated head of the symbol window), then
/// apply the Doppler ramp e^{j2πΔf t} and the phase rotation e^{jθ}.
///
/// Only the in-window portion of the delayed symbol is kept: what the
/// preceding symbol would have contributed to `[0, ε)` is out of scope of
/// the single-symbol link model.
pub fn apply_offset(sig: &SampledSignal, off: &UserOffset) -> Result<SampledSignal> {
    apply_offset_impl(sig, off, false)
}

/// As [`apply_offset`], but the delay wraps the symbol cyclically, matching
/// the periodic-extension model behind the delay-Doppler correlation
/// closed forms (the tail entering `[0, ε)` belongs to an identical
/// preceding symbol).
pub fn apply_offset_periodic(sig: &SampledSignal, off: &UserOffset) -> Result<SampledSignal> {
    apply_offset_impl(sig, off, true)
}

fn apply_offset_impl(sig: &SampledSignal, off: &UserOffset, periodic: bool) -> Result<SampledSignal> {
    if off.epsilon >= sig.duration() {
        return Err(Error::Domain(format!(
            "delay {} must be smaller than the symbol duration {}",
            off.epsilon,
            sig.duration()
        )));
    }
    let shift = delay_to_samples(sig, off.epsilon)?;
    let n = sig.len();
    let rot = Complex64::from_polar(1.0, off.theta);
    let samples = (0..n)
        .map(|i| {
            let src = if i >= shift {
                Some(i - shift)
            } else if periodic {
                Some(i + n - shift)
            } else {
                None
            };
            let base = match src {
                Some(j) => sig.samples[j],
                None => Complex64::new(0.0, 0.0),
            };
            let t = (i as f64 + 0.5) * sig.dt;
            base * rot * Complex64::from_polar(1.0, 2.0 * PI * off.delta_f * t)
        })
        .collect();
    SampledSignal::new(samples, sig.dt)
}

/// Discrete symbol energy Σ |s_i|² dt.
pub fn signal_energy(sig: &SampledSignal) -> Result<f64> {
    if sig.is_empty() {
        return Err(Error::Domain("cannot compute the energy of an empty signal".into()));
    }
    Ok(sig.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * sig.dt)
}
