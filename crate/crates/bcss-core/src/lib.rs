//! Multi-user binary chirp spread spectrum (BCSS) performance library.
//!
//! Binary CSS encodes one bit per symbol as an upchirp in one of two
//! adjacent subbands; N users share the band through staggered chirp
//! starting frequencies. Perfectly synchronized linear chirps are
//! orthogonal, but asynchronism and Doppler shifts induce nonzero
//! cross-correlations and hence multiple-access interference.
//!
//! This crate provides, for that signal model:
//!
//! * [`specfun`] — numerically robust special functions (Gaussian Q,
//!   modified Bessel I0, Marcum Q, Rician pair error probability, and a
//!   closed-form integral identity with its quadrature oracle);
//! * [`waveform`] — sampled complex-baseband chirp symbols with delay,
//!   Doppler and phase offsets, and a pluggable phase-law registry;
//! * [`xcorr`] — numeric and closed-form cross-correlations under delay
//!   and Doppler, and the correlation vectors consumed by BER formulas;
//! * [`ber`] — analytic bit error ratios: coherent N-user, noncoherent
//!   single-user, two-user and N-user (printed transcription and a
//!   first-principles Rician-pair generalization);
//! * [`mc`] — a seeded Monte Carlo link simulator with coherent and
//!   noncoherent detectors that referees every analytic formula.
//!
//! Monte Carlo trial batches run in parallel through rayon when the
//! default `parallel` feature is enabled; a sequential path producing
//! bit-identical results is always available.

pub mod ber;
pub mod error;
pub mod mc;
pub mod specfun;
pub mod waveform;
pub mod xcorr;

pub use error::{Error, Result};
