//! Monte Carlo link simulator: the referee for every analytic formula.
//!
//! Each trial draws one symbol per user, superposes the per-user offset
//! waveforms, adds complex AWGN and runs a coherent or noncoherent
//! detector for the victim user. Trials are single-symbol (no ISI): a
//! delayed interferer contributes only the in-window portion of its
//! current symbol.
//!
//! Noise calibration: per-sample complex Gaussian with per-dimension
//! variance N0/dt, so the discrete correlation of pure noise against a
//! unit-amplitude duration-T reference has variance N0·T per real
//! dimension.
//!
//! Trials are partitioned into fixed-size chunks, each with its own
//! counter-derived RNG stream; chunk results are reduced in index order,
//! so a run is bit-identical for a given (scenario, seed) regardless of
//! thread count, and the sequential path reproduces the parallel one.

use crate::ber::SnrPoint;
use crate::error::{Error, Result};
use crate::waveform::{
    apply_offset, min_samples_per_symbol, sample_symbol, ChirpParams, PhaseLawRegistry,
    SampledSignal, UserOffset,
};
use crate::xcorr::{
    build_branch_correlation_table, build_correlation_vector, BranchCorrelationTable,
    CorrelationVector,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Trials per RNG chunk; part of the deterministic partitioning.
pub const TRIALS_PER_CHUNK: u64 = 2048;
/// Chunks per stop-rule evaluation wave.
pub const CHUNKS_PER_WAVE: u64 = 16;

/// Receiver phase handling per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseModel {
    /// Unknown receiver phase, uniform on [0, 2π) per symbol.
    UniformPerSymbol,
    /// Phase-aligned receiver (θ = 0).
    Fixed,
}

/// Detector selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Coherent,
    Noncoherent,
}

/// Early-stop rule: finish a point once `min_errors` errors are seen or
/// `max_bits` bits are simulated, whichever happens first (evaluated at
/// wave boundaries).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { min_errors: 200, max_bits: 10_000_000 }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.max_bits == 0 {
            return Err(Error::Domain("max_bits must be > 0".into()));
        }
        Ok(())
    }
}

/// A complete link scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub chirp: ChirpParams,
    pub family: String,
    pub samples_per_symbol: usize,
    /// One entry per user; `symbol_energy` is interpreted relative to the
    /// victim's (only energy ratios enter the link model).
    pub offsets: Vec<UserOffset>,
    pub victim_user: usize,
    pub phase_model: PhaseModel,
}

impl Scenario {
    pub fn validate(&self, registry: &PhaseLawRegistry) -> Result<()> {
        registry.get(&self.family)?;
        if self.offsets.len() != self.chirp.n_users {
            return Err(Error::Scenario(format!(
                "expected {} per-user offsets, got {}",
                self.chirp.n_users,
                self.offsets.len()
            )));
        }
        if self.victim_user >= self.chirp.n_users {
            return Err(Error::Scenario(format!(
                "victim user {} out of range for N={}",
                self.victim_user, self.chirp.n_users
            )));
        }
        let floor = min_samples_per_symbol(&self.chirp);
        if self.samples_per_symbol < floor {
            return Err(Error::Scenario(format!(
                "samples_per_symbol={} below the sampling floor {floor}",
                self.samples_per_symbol
            )));
        }
        let dt = self.chirp.symbol_duration / self.samples_per_symbol as f64;
        for (u, off) in self.offsets.iter().enumerate() {
            if off.epsilon >= self.chirp.symbol_duration {
                return Err(Error::Scenario(format!("user {u}: delay exceeds the symbol")));
            }
            let steps = off.epsilon / dt;
            if (steps - steps.round()).abs() > 1e-6 {
                return Err(Error::Scenario(format!(
                    "user {u}: delay {} not representable on the sample grid (dt={dt})",
                    off.epsilon
                )));
            }
        }
        Ok(())
    }

    /// Per-interferer branch correlations for the derived BER path.
    pub fn branch_table(&self, registry: &PhaseLawRegistry) -> Result<BranchCorrelationTable> {
        self.validate(registry)?;
        let law = registry.get(&self.family)?;
        build_branch_correlation_table(
            &self.chirp,
            law.as_ref(),
            self.samples_per_symbol,
            &self.offsets,
            self.victim_user,
        )
    }

    /// Eq.-4-shaped correlation vector for the paper-form BER expressions.
    pub fn correlation_vector(
        &self,
        registry: &PhaseLawRegistry,
        interferer_symbols: &[bool],
    ) -> Result<CorrelationVector> {
        self.validate(registry)?;
        let law = registry.get(&self.family)?;
        build_correlation_vector(
            &self.chirp,
            law.as_ref(),
            self.samples_per_symbol,
            &self.offsets,
            self.victim_user,
            interferer_symbols,
        )
    }

    /// Victim symbol energy implied by the chirp amplitude, A²T/2.
    pub fn victim_symbol_energy(&self) -> f64 {
        let a = self.chirp.amplitude;
        a * a * self.chirp.symbol_duration / 2.0
    }
}

/// One Monte Carlo BER point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub es_over_n0: f64,
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Half-width of the binomial normal-approximation 95% interval.
    pub ci95_halfwidth: f64,
    pub seed: u64,
}

impl BerEstimate {
    fn from_counts(es_over_n0: f64, errors: u64, bits: u64, seed: u64) -> Self {
        let ber = errors as f64 / bits as f64;
        let ci95_halfwidth = 1.96 * (ber * (1.0 - ber) / bits as f64).sqrt();
        BerEstimate { es_over_n0, errors, bits, ber, ci95_halfwidth, seed }
    }
}

fn correlate(rx: &SampledSignal, branch: &SampledSignal) -> Complex64 {
    rx.samples()
        .iter()
        .zip(branch.samples())
        .map(|(x, y)| x * y.conj())
        .sum::<Complex64>()
        * rx.dt()
}

fn check_common_grid(rx: &SampledSignal, b0: &SampledSignal, b1: &SampledSignal) -> Result<()> {
    if !rx.same_grid(b0) || !rx.same_grid(b1) {
        return Err(Error::GridMismatch(
            "received signal and branch references must share one grid".into(),
        ));
    }
    Ok(())
}

/// Envelope (noncoherent) detection: argmax over v of |⟨rx, branch_v⟩|²,
/// ties resolved toward 0.
pub fn detect_noncoherent(
    rx: &SampledSignal,
    branch0: &SampledSignal,
    branch1: &SampledSignal,
) -> Result<bool> {
    check_common_grid(rx, branch0, branch1)?;
    let e0 = correlate(rx, branch0).norm_sqr();
    let e1 = correlate(rx, branch1).norm_sqr();
    Ok(e1 > e0)
}

/// Coherent detection: argmax over v of Re⟨rx, branch_v⟩, ties toward 0.
/// The receiver phase reference is the branch waveforms' own phase.
pub fn detect_coherent(
    rx: &SampledSignal,
    branch0: &SampledSignal,
    branch1: &SampledSignal,
) -> Result<bool> {
    check_common_grid(rx, branch0, branch1)?;
    let d0 = correlate(rx, branch0).re;
    let d1 = correlate(rx, branch1).re;
    Ok(d1 > d0)
}

/// Per-user offset waveforms at the energy-scaled amplitudes, indexed
/// `[user][bit]`, plus the victim branch references.
struct TrialWaveforms {
    users: Vec<[Vec<Complex64>; 2]>,
    refs: [Vec<Complex64>; 2],
    dt: f64,
    ns: usize,
    /// Deterministic superpositions for every joint symbol pattern, built
    /// when the pattern space is small enough to hoist out of the loop.
    pattern_sums: Option<Vec<Vec<Complex64>>>,
}

fn build_trial_waveforms(
    scenario: &Scenario,
    registry: &PhaseLawRegistry,
    precompute_patterns: bool,
) -> Result<TrialWaveforms> {
    let law = registry.get(&scenario.family)?;
    let params = &scenario.chirp;
    let ns = scenario.samples_per_symbol;
    let es_victim = scenario.offsets[scenario.victim_user].symbol_energy;
    let mut users = Vec::with_capacity(params.n_users);
    for u in 0..params.n_users {
        let scale = (scenario.offsets[u].symbol_energy / es_victim).sqrt();
        let mut pair: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
        for (b, slot) in pair.iter_mut().enumerate() {
            let tx = sample_symbol(params, law.as_ref(), u, b == 1, ns)?;
            let rx = apply_offset(&tx, &scenario.offsets[u])?;
            *slot = rx.samples().iter().map(|z| z * scale).collect();
        }
        users.push(pair);
    }
    let refs = [
        sample_symbol(params, law.as_ref(), scenario.victim_user, false, ns)?
            .samples()
            .to_vec(),
        sample_symbol(params, law.as_ref(), scenario.victim_user, true, ns)?
            .samples()
            .to_vec(),
    ];
    let pattern_sums = if precompute_patterns && params.n_users <= 10 {
        let count = 1usize << params.n_users;
        let mut sums = Vec::with_capacity(count);
        for idx in 0..count {
            let mut acc = vec![Complex64::new(0.0, 0.0); ns];
            for (u, pair) in users.iter().enumerate() {
                let w = &pair[(idx >> u) & 1];
                for (a, s) in acc.iter_mut().zip(w) {
                    *a += s;
                }
            }
            sums.push(acc);
        }
        Some(sums)
    } else {
        None
    };
    let dt = params.symbol_duration / ns as f64;
    Ok(TrialWaveforms { users, refs, dt, ns, pattern_sums })
}

/// Superpose the per-user offset waveforms for one symbol per user and add
/// calibrated complex AWGN with noise density `n0`. Deterministic for a
/// given `rng_seed`.
pub fn synthesize_rx(
    scenario: &Scenario,
    registry: &PhaseLawRegistry,
    symbols: &[bool],
    n0: f64,
    rng_seed: u64,
) -> Result<SampledSignal> {
    scenario.validate(registry)?;
    if symbols.len() != scenario.chirp.n_users {
        return Err(Error::Scenario(format!(
            "expected {} symbols, got {}",
            scenario.chirp.n_users,
            symbols.len()
        )));
    }
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::Domain(format!("noise density must be >= 0, got {n0}")));
    }
    let waves = build_trial_waveforms(scenario, registry, false)?;
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let noise_std = (n0 / waves.dt).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); waves.ns];
    for (u, pair) in waves.users.iter().enumerate() {
        let w = &pair[symbols[u] as usize];
        for (a, s) in out.iter_mut().zip(w) {
            *a += s;
        }
    }
    if noise_std > 0.0 {
        for a in out.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *a += Complex64::new(re * noise_std, im * noise_std);
        }
    }
    SampledSignal::new(out, waves.dt)
}

struct ChunkSetup<'a> {
    waves: &'a TrialWaveforms,
    victim: usize,
    n_users: usize,
    uniform_phase: bool,
    coherent: bool,
    noise_std: f64,
}

/// Run one chunk of trials on its own RNG stream; returns the error count.
fn run_chunk(setup: &ChunkSetup<'_>, seed: u64, stream: u64, trials: u64) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mask = (1u64 << setup.n_users) - 1;
    let ns = setup.waves.ns;
    let dt = setup.waves.dt;
    let mut scratch = vec![Complex64::new(0.0, 0.0); ns];
    let mut errors = 0u64;
    for _ in 0..trials {
        let pattern = rng.gen::<u64>() & mask;
        let rot = if setup.uniform_phase && !setup.coherent {
            Complex64::from_polar(1.0, rng.gen::<f64>() * 2.0 * PI)
        } else {
            Complex64::new(1.0, 0.0)
        };
        match &setup.waves.pattern_sums {
            Some(sums) => scratch.copy_from_slice(&sums[pattern as usize]),
            None => {
                scratch.fill(Complex64::new(0.0, 0.0));
                for (u, pair) in setup.waves.users.iter().enumerate() {
                    let w = &pair[((pattern >> u) & 1) as usize];
                    for (a, s) in scratch.iter_mut().zip(w) {
                        *a += s;
                    }
                }
            }
        }
        let mut c0 = Complex64::new(0.0, 0.0);
        let mut c1 = Complex64::new(0.0, 0.0);
        for i in 0..ns {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = rot * scratch[i] + Complex64::new(re, im) * setup.noise_std;
            c0 += v * setup.waves.refs[0][i].conj();
            c1 += v * setup.waves.refs[1][i].conj();
        }
        c0 *= dt;
        c1 *= dt;
        let decided = if setup.coherent { c1.re > c0.re } else { c1.norm_sqr() > c0.norm_sqr() };
        let sent = (pattern >> setup.victim) & 1 == 1;
        if decided != sent {
            errors += 1;
        }
    }
    errors
}

/// Estimate the victim BER over an SNR grid.
///
/// Runs chunk waves in parallel when the `parallel` feature is enabled;
/// results are bit-identical to [`estimate_ber_sequential`].
pub fn estimate_ber(
    scenario: &Scenario,
    registry: &PhaseLawRegistry,
    detector: Detector,
    snr_grid: &[SnrPoint],
    stop: &StopRule,
    seed: u64,
) -> Result<Vec<BerEstimate>> {
    estimate_ber_impl(scenario, registry, detector, snr_grid, stop, seed, cfg!(feature = "parallel"))
}

/// Single-threaded estimator with the same partitioning (and therefore the
/// same output) as [`estimate_ber`].
pub fn estimate_ber_sequential(
    scenario: &Scenario,
    registry: &PhaseLawRegistry,
    detector: Detector,
    snr_grid: &[SnrPoint],
    stop: &StopRule,
    seed: u64,
) -> Result<Vec<BerEstimate>> {
    estimate_ber_impl(scenario, registry, detector, snr_grid, stop, seed, false)
}

fn estimate_ber_impl(
    scenario: &Scenario,
    registry: &PhaseLawRegistry,
    detector: Detector,
    snr_grid: &[SnrPoint],
    stop: &StopRule,
    seed: u64,
    parallel: bool,
) -> Result<Vec<BerEstimate>> {
    scenario.validate(registry)?;
    stop.validate()?;
    if snr_grid.is_empty() {
        return Err(Error::Domain("SNR grid must be nonempty".into()));
    }
    let waves = build_trial_waveforms(scenario, registry, true)?;
    let es = scenario.victim_symbol_energy();
    let mut out = Vec::with_capacity(snr_grid.len());
    for (point_idx, snr) in snr_grid.iter().enumerate() {
        let n0 = es / snr.es_over_n0;
        let setup = ChunkSetup {
            waves: &waves,
            victim: scenario.victim_user,
            n_users: scenario.chirp.n_users,
            uniform_phase: scenario.phase_model == PhaseModel::UniformPerSymbol,
            coherent: detector == Detector::Coherent,
            noise_std: (n0 / waves.dt).sqrt(),
        };
        let mut errors = 0u64;
        let mut bits = 0u64;
        let mut chunk_idx = 0u64;
        while errors < stop.min_errors && bits < stop.max_bits {
            let streams: Vec<u64> = (0..CHUNKS_PER_WAVE)
                .map(|w| ((point_idx as u64) << 32) | (chunk_idx + w))
                .collect();
            let wave_errors = run_wave(&setup, seed, &streams, parallel);
            errors += wave_errors;
            bits += CHUNKS_PER_WAVE * TRIALS_PER_CHUNK;
            chunk_idx += CHUNKS_PER_WAVE;
        }
        out.push(BerEstimate::from_counts(snr.es_over_n0, errors, bits, seed));
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn run_wave(setup: &ChunkSetup<'_>, seed: u64, streams: &[u64], parallel: bool) -> u64 {
    use rayon::prelude::*;
    if parallel {
        streams
            .par_iter()
            .map(|s| run_chunk(setup, seed, *s, TRIALS_PER_CHUNK))
            .sum()
    } else {
        streams.iter().map(|s| run_chunk(setup, seed, *s, TRIALS_PER_CHUNK)).sum()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_wave(setup: &ChunkSetup<'_>, seed: u64, streams: &[u64], _parallel: bool) -> u64 {
    streams.iter().map(|s| run_chunk(setup, seed, *s, TRIALS_PER_CHUNK)).sum()
}

/// Sample variances of the I and Q correlator outputs for noise-only input
/// against a unit-amplitude duration-T linear chirp reference. Calibrated
/// correctly, each is close to N0·T.
pub fn correlator_noise_variance(
    symbol_duration: f64,
    samples_per_symbol: usize,
    n0: f64,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::Domain("noise density must be > 0".into()));
    }
    if trials < 2 {
        return Err(Error::Domain("need at least two trials".into()));
    }
    let params = ChirpParams::new(1, symbol_duration, 1.0)?;
    let reference = sample_symbol(&params, &crate::waveform::LinearChirp, 0, false, samples_per_symbol)?;
    let dt = reference.dt();
    let noise_std = (n0 / dt).sqrt();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (mut si, mut sq, mut sii, mut sqq) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..trials {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in reference.samples() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            acc += Complex64::new(re, im) * noise_std * r.conj();
        }
        acc *= dt;
        si += acc.re;
        sq += acc.im;
        sii += acc.re * acc.re;
        sqq += acc.im * acc.im;
    }
    let n = trials as f64;
    Ok((sii / n - (si / n).powi(2), sqq / n - (sq / n).powi(2)))
}
