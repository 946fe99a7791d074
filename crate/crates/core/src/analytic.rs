//! Closed-form power terms of the downlink with eigen-beamforming.
//!
//! The precoder of BS `i` is its channel estimate `ĥ_ii = R̃_ii y_i`. All
//! terms of the achievable rate follow from two moments of the effective
//! channel `h_jiᴴ w_i`:
//!
//! * the mean `E{h_jjᴴ ĥ_jj} = tr R̂_jj`;
//! * the second moment `E{|h_jiᴴ ĥ_ii|²}`, which involves fourth-order
//!   statistics of the finite-path channel through `E_φ`.
//!
//! The second moment is available as the literal `O(M⁴)` sum
//! ([`second_moment_reference`]) and as an `O(M³)` reduction
//! ([`second_moment_fast`]).

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

use crate::covariance::{ScenarioCovariances, ShiftTable};
use crate::numerics::{CMatrix, Real};

/// Imaginary part tolerated on a trace that should be real.
pub const TRACE_IMAG_TOL: f64 = 1e-10;
/// Relative imaginary residue tolerated on the second moment.
pub const MOMENT_IMAG_REL_TOL: f64 = 1e-8;
/// Relative band within which a negative variance is treated as rounding.
pub const NEGATIVE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("trace has imaginary residue {0:e}")]
    ImaginaryTrace(f64),
    #[error("second moment has imaginary residue {imag:e} against real part {real:e}")]
    ImaginaryMoment { real: f64, imag: f64 },
    #[error("second moment {0:e} is negative")]
    NegativeMoment(f64),
    #[error("variance {variance:e} is negative beyond rounding (second moment {second:e})")]
    NegativeVariance { variance: f64, second: f64 },
    #[error("estimate of BS {0} has zero power, precoder cannot be normalised")]
    DegenerateNormalization(usize),
    #[error("inputs disagree in shape: {0}")]
    Shape(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Analytic,
    MonteCarlo,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Analytic => "analytic",
            Source::MonteCarlo => "monte-carlo",
        })
    }
}

/// Power terms of the desired UE's rate at one sweep point. Standard errors
/// are zero for analytic records.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBreakdown<T> {
    pub signal: T,
    pub self_interference: T,
    pub intercell: T,
    pub noise: T,
    pub rate_bps_hz: T,
    pub source: Source,
    pub signal_se: T,
    pub self_interference_se: T,
    pub intercell_se: T,
    pub rate_se: T,
}

impl<T: Real> PowerBreakdown<T> {
    /// Analytic record; the rate is derived from the terms.
    pub fn analytic(signal: T, self_interference: T, intercell: T, noise: T) -> Self {
        Self {
            signal,
            self_interference,
            intercell,
            noise,
            rate_bps_hz: rate(signal, self_interference, intercell, noise),
            source: Source::Analytic,
            signal_se: T::zero(),
            self_interference_se: T::zero(),
            intercell_se: T::zero(),
            rate_se: T::zero(),
        }
    }

    /// `log₂(1 + S / (N + SI + IC))` from the stored terms.
    pub fn recomputed_rate(&self) -> T {
        rate(self.signal, self.self_interference, self.intercell, self.noise)
    }

    pub fn sinr(&self) -> T {
        self.signal / (self.noise + self.self_interference + self.intercell)
    }
}

pub fn rate<T: Real>(signal: T, self_interference: T, intercell: T, noise: T) -> T {
    (T::one() + signal / (noise + self_interference + intercell)).log2()
}

/// First and second moment of an effective channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentPair<T> {
    pub first: T,
    pub second: T,
}

impl<T: Real> MomentPair<T> {
    pub fn variance(&self) -> Result<T, AnalyticError> {
        self_interference(self.second, self.first)
    }
}

/// `E{h_jjᴴ ĥ_jj} = tr R̂_jj`.
pub fn first_moment<T: Real>(r_hat: &CMatrix<T>) -> Result<T, AnalyticError> {
    let tr = r_hat.trace();
    if tr.im.abs() > T::lit(TRACE_IMAG_TOL) * T::one().max(tr.re.abs()) {
        return Err(AnalyticError::ImaginaryTrace(tr.im.as_f64()));
    }
    Ok(tr.re)
}

/// Fourth-order angular statistic of one link, 0-based indices:
///
/// `E_φ(m,n,m',n') = (β²/N_P) [2E(n−m+n'−m') + (N_P−1)(E(n−m)E(n'−m') + E(n'−m)E(n−m'))]`.
pub fn e_phi<T: Real>(
    m: usize,
    n: usize,
    mp: usize,
    np: usize,
    beta: T,
    n_paths: usize,
    table: &ShiftTable<T>,
) -> Complex<T> {
    assert!(n_paths >= 1);
    let (m, n, mp, np) = (m as isize, n as isize, mp as isize, np as isize);
    let np_f = T::from_count(n_paths);
    let coupled = table.get(n - m + np - mp).scale(T::lit(2.0));
    let pairs = table.get(n - m) * table.get(np - mp) + table.get(np - m) * table.get(n - mp);
    (coupled + pairs.scale(np_f - T::one())).scale(beta * beta / np_f)
}

/// Path statistics of the interfering link `(j, i)` used by `E_φ`.
#[derive(Clone, Copy, Debug)]
pub struct EPhiContext<'a, T> {
    pub beta: T,
    pub n_paths: usize,
    /// Shift correlations over at least `2M − 1` lags.
    pub shifts: &'a ShiftTable<T>,
}

/// Everything needed for `E{|h_jiᴴ ĥ_ii|²}`.
#[derive(Clone, Debug)]
pub struct SecondMomentInputs<'a, T> {
    /// `R̃_ii`.
    pub filter: &'a CMatrix<T>,
    /// `R_ji`, prior of UE `j` at BS `i`.
    pub r_ji: &'a CMatrix<T>,
    /// Priors of all UEs at BS `i`, indexed by UE.
    pub r_all_i: Vec<&'a CMatrix<T>>,
    /// Index of UE `j` within `r_all_i`.
    pub j: usize,
    pub ctx: EPhiContext<'a, T>,
    pub sigma2: T,
    pub tau: usize,
}

impl<T: Real> SecondMomentInputs<'_, T> {
    fn validate(&self) -> Result<usize, AnalyticError> {
        let m = self.filter.rows();
        let square = |a: &CMatrix<T>| a.shape() == (m, m);
        if !square(self.filter) || !square(self.r_ji) || !self.r_all_i.iter().all(|r| square(r)) {
            return Err(AnalyticError::Shape(format!(
                "filter {:?}, r_ji {:?}",
                self.filter.shape(),
                self.r_ji.shape()
            )));
        }
        if self.j >= self.r_all_i.len() {
            return Err(AnalyticError::Shape(format!(
                "ue {} not among {} priors",
                self.j,
                self.r_all_i.len()
            )));
        }
        if self.ctx.shifts.len() < 2 * m - 1 {
            return Err(AnalyticError::Shape(format!(
                "shift table has {} lags, need {}",
                self.ctx.shifts.len(),
                2 * m - 1
            )));
        }
        Ok(m)
    }

    fn interferers(&self) -> impl Iterator<Item = &CMatrix<T>> + '_ {
        self.r_all_i
            .iter()
            .enumerate()
            .filter(move |(k, _)| *k != self.j)
            .map(|(_, r)| *r)
    }
}

fn finish_moment<T: Real>(value: Complex<T>) -> Result<T, AnalyticError> {
    let scale = value.re.abs().max(T::min_positive_value());
    if value.im.abs() > T::lit(MOMENT_IMAG_REL_TOL) * scale.max(T::one()) {
        return Err(AnalyticError::ImaginaryMoment {
            real: value.re.as_f64(),
            imag: value.im.as_f64(),
        });
    }
    if value.re < -T::lit(NEGATIVE_REL_TOL) * T::one().max(value.norm()) {
        return Err(AnalyticError::NegativeMoment(value.re.as_f64()));
    }
    Ok(value.re.max(T::zero()))
}

/// Noise contribution `σ² τ tr{R̃ᴴ R_ji R̃}`.
fn noise_term<T: Real>(inp: &SecondMomentInputs<'_, T>) -> Complex<T> {
    let a = inp.filter;
    a.adjoint()
        .matmul(inp.r_ji)
        .trace_of_product(a)
        .scale(inp.sigma2 * T::from_count(inp.tau))
}

/// The quadruple sum evaluated term by term.
pub fn second_moment_reference<T: Real>(inp: &SecondMomentInputs<'_, T>) -> Result<T, AnalyticError> {
    let m = inp.validate()?;
    let a = inp.filter;
    let ah = a.adjoint();
    let mut k_sum = CMatrix::zeros(m, m);
    for r in inp.interferers() {
        k_sum = &k_sum + r;
    }
    let r_ji = inp.r_ji;
    let mut total = Complex::zero();
    for p in 0..m {
        for q in 0..m {
            let apq = a[(p, q)];
            if apq.is_zero() {
                continue;
            }
            let mut inner = Complex::zero();
            for pp in 0..m {
                for qq in 0..m {
                    let stat = e_phi(p, q, pp, qq, inp.ctx.beta, inp.ctx.n_paths, inp.ctx.shifts);
                    let cross: Complex<T> = inp
                        .interferers()
                        .map(|r_ki| r_ji[(qq, p)] * r_ki[(q, pp)])
                        .fold(Complex::zero(), |s, v| s + v);
                    inner = inner + ah[(pp, qq)] * (stat + cross);
                }
            }
            total = total + apq * inner;
        }
    }
    let tau = T::from_count(inp.tau);
    finish_moment(total.scale(tau * tau) + noise_term(inp))
}

/// The same moment in `O(M³)`.
///
/// With `T(s) = Σ_{n−m=s} R̃(m,n)`:
/// * the coupled `E(n−m+n'−m')` term is `Σ_s Σ_u T(s) conj(T(u)) E(s−u)`;
/// * `Σ R̃(m,n) E(n−m) = tr(R̃ R^φ)` and its adjoint counterpart separate;
/// * `Σ R̃(m,n) R̃ᴴ(m',n') E(n'−m) E(n−m')` and the interferer sum combine
///   into one trace `tr(R̃ ((N_P−1)/N_P R_ji + Σ_{k≠j} R_ki) R̃ᴴ R_ji)`.
pub fn second_moment_fast<T: Real>(inp: &SecondMomentInputs<'_, T>) -> Result<T, AnalyticError> {
    let m = inp.validate()?;
    let a = inp.filter;
    let beta = inp.ctx.beta;
    let n_paths = T::from_count(inp.ctx.n_paths);
    let lag = m as isize - 1;

    // diagonal sums, index s + (M − 1)
    let mut diag = vec![Complex::<T>::zero(); 2 * m - 1];
    for r in 0..m {
        for c in 0..m {
            diag[c + m - 1 - r] = diag[c + m - 1 - r] + a[(r, c)];
        }
    }
    let e = inp.ctx.shifts;
    let mut coupled = Complex::zero();
    for s in -lag..=lag {
        let ts = diag[(s + lag) as usize];
        if ts.is_zero() {
            continue;
        }
        let mut row = Complex::zero();
        for u in -lag..=lag {
            row = row + diag[(u + lag) as usize].conj() * e.get(s - u);
        }
        coupled = coupled + ts * row;
    }
    // tr(R̃ R^φ) and tr(R̃ᴴ R^φ)
    let mut tr_a = Complex::<T>::zero();
    let mut tr_b = Complex::<T>::zero();
    for s in -lag..=lag {
        let es = e.get(s);
        tr_a = tr_a + diag[(s + lag) as usize] * es;
        tr_b = tr_b + diag[(lag - s) as usize].conj() * es;
    }

    let mut mixed = inp.r_ji.scale((n_paths - T::one()) / n_paths);
    for r in inp.interferers() {
        mixed = &mixed + r;
    }
    let p = a.matmul(&mixed);
    let q = a.adjoint().matmul(inp.r_ji);
    let traces = p.trace_of_product(&q);

    let b2 = beta * beta;
    let e11_sep = (tr_a * tr_b).scale(b2 * (n_paths - T::one()) / n_paths);
    let e11_coupled = coupled.scale(T::lit(2.0) * b2 / n_paths);
    let tau = T::from_count(inp.tau);
    let noise = q.trace_of_product(a).scale(inp.sigma2 * tau);
    finish_moment((e11_coupled + e11_sep + traces).scale(tau * tau) + noise)
}

/// `max(second − first², 0)`, rejecting negatives beyond rounding.
pub fn self_interference<T: Real>(second: T, first: T) -> Result<T, AnalyticError> {
    let v = second - first * first;
    if v < -T::lit(NEGATIVE_REL_TOL) * second.abs() {
        return Err(AnalyticError::NegativeVariance {
            variance: v.as_f64(),
            second: second.as_f64(),
        });
    }
    Ok(v.max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MomentPath {
    #[default]
    Fast,
    Reference,
}

/// Inputs for `E{|h_jiᴴ ĥ_ii|²}` drawn from a scenario.
pub fn moment_inputs<T: Real>(
    cov: &ScenarioCovariances<T>,
    j: usize,
    i: usize,
    n_paths: usize,
) -> SecondMomentInputs<'_, T> {
    let link = cov.link(j, i);
    SecondMomentInputs {
        filter: &cov.link(i, i).filter,
        r_ji: &link.r,
        r_all_i: cov.priors_at(i),
        j,
        ctx: EPhiContext {
            beta: link.beta,
            n_paths,
            shifts: &link.shifts,
        },
        sigma2: cov.sigma2(),
        tau: cov.tau(),
    }
}

pub fn second_moment<T: Real>(
    cov: &ScenarioCovariances<T>,
    j: usize,
    i: usize,
    n_paths: usize,
    path: MomentPath,
) -> Result<T, AnalyticError> {
    let inp = moment_inputs(cov, j, i, n_paths);
    match path {
        MomentPath::Fast => second_moment_fast(&inp),
        MomentPath::Reference => second_moment_reference(&inp),
    }
}

/// Power breakdown of UE `desired` with EBF at every BS, each precoder
/// normalised by `η_i = 1 / tr R̂_ii`.
pub fn ergodic_rate_point<T: Real>(
    cov: &ScenarioCovariances<T>,
    desired: usize,
    n_paths: usize,
    path: MomentPath,
) -> Result<PowerBreakdown<T>, AnalyticError> {
    let n = cov.n_cells();
    assert!(desired < n);
    let mut eta = Vec::with_capacity(n);
    for i in 0..n {
        let p = first_moment(&cov.link(i, i).r_hat)?;
        if !(p > T::zero()) {
            return Err(AnalyticError::DegenerateNormalization(i));
        }
        eta.push(T::one() / p);
    }
    let j = desired;
    let first = first_moment(&cov.link(j, j).r_hat)?;
    let second = second_moment(cov, j, j, n_paths, path)?;
    let si = eta[j] * self_interference(second, first)?;
    let mut intercell = T::zero();
    for i in (0..n).filter(|&i| i != j) {
        intercell = intercell + eta[i] * second_moment(cov, j, i, n_paths, path)?;
    }
    Ok(PowerBreakdown::analytic(eta[j] * first * first, si, intercell, cov.sigma2()))
}
