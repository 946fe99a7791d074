//! Channel hardening: how much `‖h‖²` fluctuates around its mean.
//!
//! For the finite-path model the normalised variance is
//!
//! ```text
//! 𝓜 = 1/N_P + (N_P − 1)/(M N_P) · (1 + (2/M) Σ_{m=1}^{M−1} (M − m) |E(m)|²)
//! ```
//!
//! which never drops below `1/N_P`: with few paths the channel does not
//! harden however large the array.

use num_complex::Complex;
use thiserror::Error;

use crate::covariance::{shift_correlations, AngularSpread, CovarianceError};
use crate::numerics::{QuadratureSpec, Real};

/// Smallest sample count accepted by [`empirical_hardening`].
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardeningError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    InsufficientSamples(usize),
    #[error("sample mean of the squared norm is zero")]
    ZeroMean,
    #[error(transparent)]
    Covariance(#[from] CovarianceError),
}

/// `(1/M)(1 + (2/M) Σ (M − m)|E(m)|²)`, the spatial part of the measure.
fn spatial_term<T: Real>(m: usize, e: &[Complex<T>]) -> T {
    assert!(m >= 1 && e.len() >= m, "table has {} lags, need {m}", e.len());
    let mf = T::from_count(m);
    let mut sum = T::zero();
    for (lag, v) in e.iter().enumerate().take(m).skip(1) {
        sum = sum + T::from_count(m - lag) * v.norm_sqr();
    }
    (T::one() + T::lit(2.0) * sum / mf) / mf
}

pub fn hardening_measure<T: Real>(m: usize, n_paths: usize, e: &[Complex<T>]) -> T {
    assert!(n_paths >= 1);
    let np = T::from_count(n_paths);
    T::one() / np + (np - T::one()) / np * spatial_term(m, e)
}

/// The `N_P → ∞` limit of [`hardening_measure`].
pub fn hardening_asymptotic<T: Real>(e: &[Complex<T>], m: usize) -> T {
    spatial_term(m, e)
}

/// Which expression a [`HardeningPoint`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardeningCurve {
    /// Finite `M` and `N_P`.
    Finite,
    /// `N_P → ∞` at the given `M`.
    PathLimit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardeningPoint<T> {
    pub m: usize,
    pub n_paths: usize,
    pub curve: HardeningCurve,
    pub spread: AngularSpread<T>,
    pub measure: T,
}

/// Measure over a sweep of spreads for AoAs on `[φ̄ − Δ, φ̄ + Δ]`.
pub fn hardening_sweep<T: Real>(
    m: usize,
    n_paths: usize,
    curve: HardeningCurve,
    mean_angle: T,
    spreads: &[AngularSpread<T>],
    spacing_ratio: T,
    quad: &QuadratureSpec<T>,
) -> Result<Vec<HardeningPoint<T>>, HardeningError> {
    spreads
        .iter()
        .map(|&spread| {
            let e = shift_correlations(mean_angle, spread, spacing_ratio, m, quad)?;
            let measure = match curve {
                HardeningCurve::Finite => hardening_measure(m, n_paths, e.as_slice()),
                HardeningCurve::PathLimit => hardening_asymptotic(e.as_slice(), m),
            };
            Ok(HardeningPoint {
                m,
                n_paths,
                curve,
                spread,
                measure,
            })
        })
        .collect()
}

/// Estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: T,
}

/// `Var{‖h‖²} / E{‖h‖²}²` from samples of `‖h‖²`, with a delete-one
/// jackknife standard error.
pub fn empirical_hardening<T: Real>(norms_sq: &[T]) -> Result<Estimate<T>, HardeningError> {
    let n = norms_sq.len();
    if n < MIN_SAMPLES {
        return Err(HardeningError::InsufficientSamples(n));
    }
    // shift by a pilot value to keep the variance well conditioned
    let shift = norms_sq[0];
    let (mut s1, mut s2) = (T::zero(), T::zero());
    for &x in norms_sq {
        let d = x - shift;
        s1 = s1 + d;
        s2 = s2 + d * d;
    }
    let nf = T::from_count(n);
    let ratio = |s1: T, s2: T, k: T| {
        let mean_d = s1 / k;
        let var = (s2 - k * mean_d * mean_d) / (k - T::one());
        let mean = mean_d + shift;
        var / (mean * mean)
    };
    if s1 / nf + shift == T::zero() {
        return Err(HardeningError::ZeroMean);
    }
    let value = ratio(s1, s2, nf);
    let k = nf - T::one();
    let mut loo_sum = T::zero();
    let mut loo_sq = T::zero();
    for &x in norms_sq {
        let d = x - shift;
        let t = ratio(s1 - d, s2 - d * d, k);
        loo_sum = loo_sum + t;
        loo_sq = loo_sq + t * t;
    }
    let loo_mean = loo_sum / nf;
    let spread = (loo_sq / nf - loo_mean * loo_mean).max(T::zero());
    Ok(Estimate {
        value,
        stderr: (k * spread).sqrt(),
    })
}
