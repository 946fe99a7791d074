//! Brute-force link simulator.
//!
//! Each realization draws every multipath channel, runs uplink training
//! with a shared pilot, estimates the serving channels, builds the downlink
//! precoders and records the effective gains seen by the desired UE. The
//! resulting sample moments estimate the same power terms the analytic
//! engine evaluates in closed form.
//!
//! Realization `r` always draws from ChaCha stream `r` of the configured
//! seed, and realizations are grouped into a fixed number of batches that
//! are merged in index order. Results are therefore bit-identical for any
//! worker count, and sweeps over spread or array size reuse the same
//! underlying random numbers.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{rate, PowerBreakdown, Source};
use crate::covariance::{AngularSpread, ArraySpec, ScenarioCovariances};
use crate::geometry::{Layout, LinkGeometry};
use crate::numerics::CMatrix;
use crate::C64;

/// Smallest realization count accepted by [`estimate_powers`].
pub const MIN_REALIZATIONS: usize = 1000;
/// Smallest realization count accepted by [`angle_samples`].
pub const MIN_ANGLE_REALIZATIONS: usize = 10_000;
pub const DEFAULT_BATCHES: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("need at least {min} realizations, got {got}")]
    InsufficientSamples { min: usize, got: usize },
    #[error("batch count {batches} must be at least 2 and at most the realization count {n}")]
    Batches { batches: usize, n: usize },
    #[error("RZF precoder undefined for a zero estimate without noise regularisation")]
    DegeneratePrecoder,
    #[error("precoder of BS {0} has zero average power")]
    DegenerateNormalization(usize),
    #[error("scenario and layout disagree: {0}")]
    Mismatch(String),
}

/// Counter-based random stream: `(seed, stream_id)` fixes the sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `CN(0, var)` sample.
#[inline]
pub fn complex_normal(rng: &mut impl Rng, var: f64) -> C64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

/// One multipath channel draw with its path parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub ue: usize,
    pub bs: usize,
    pub h: Vec<C64>,
    pub alphas: Vec<C64>,
    pub aoas: Vec<f64>,
}

impl ChannelRealization {
    /// `(1/√N_P) Σ_p α_p a(φ_p)` with directly evaluated steering vectors.
    pub fn reconstruct(&self, spacing_ratio: f64) -> Vec<C64> {
        let m = self.h.len();
        let scale = 1.0 / (self.alphas.len() as f64).sqrt();
        (0..m)
            .map(|k| {
                self.alphas
                    .iter()
                    .zip(&self.aoas)
                    .map(|(a, phi)| a * Complex::from_polar(scale, -2.0 * PI * spacing_ratio * k as f64 * phi.cos()))
                    .sum()
            })
            .collect()
    }
}

/// Path statistics of one link as used by the channel sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
struct LinkDraw {
    los_angle: f64,
    beta: f64,
}

impl From<&LinkGeometry> for LinkDraw {
    fn from(l: &LinkGeometry) -> Self {
        Self {
            los_angle: l.los_angle,
            beta: l.beta,
        }
    }
}

/// Real and imaginary parts in separate arrays, the layout the inner
/// kernels vectorise over.
#[derive(Clone, Debug, Default)]
struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }

    fn clear(&mut self) {
        self.re.fill(0.0);
        self.im.fill(0.0);
    }

    fn store(&self, out: &mut [C64]) {
        for ((o, &re), &im) in out.iter_mut().zip(&self.re).zip(&self.im) {
            *o = Complex::new(re, im);
        }
    }

    fn load(&mut self, v: &[C64]) {
        for ((re, im), x) in self.re.iter_mut().zip(self.im.iter_mut()).zip(v) {
            *re = x.re;
            *im = x.im;
        }
    }
}

/// Row-major complex matrix with split parts.
#[derive(Clone, Debug)]
struct SplitMatrix {
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitMatrix {
    fn new(a: &CMatrix<f64>) -> Self {
        Self {
            cols: a.cols(),
            re: a.as_slice().iter().map(|z| z.re).collect(),
            im: a.as_slice().iter().map(|z| z.im).collect(),
        }
    }

    /// `out = A x`.
    fn mul_vec(&self, x: &Split, out: &mut [C64]) {
        const L: usize = 4;
        let n = self.cols;
        for (r, o) in out.iter_mut().enumerate() {
            let (ar, ai) = (&self.re[r * n..(r + 1) * n], &self.im[r * n..(r + 1) * n]);
            let mut sr = [0.0; L];
            let mut si = [0.0; L];
            let body = n - n % L;
            let chunks = ar[..body]
                .chunks_exact(L)
                .zip(ai[..body].chunks_exact(L))
                .zip(x.re[..body].chunks_exact(L).zip(x.im[..body].chunks_exact(L)));
            for ((a, b), (c, d)) in chunks {
                let a: &[f64; L] = a.try_into().expect("exact chunk");
                let b: &[f64; L] = b.try_into().expect("exact chunk");
                let c: &[f64; L] = c.try_into().expect("exact chunk");
                let d: &[f64; L] = d.try_into().expect("exact chunk");
                for l in 0..L {
                    sr[l] += a[l] * c[l] - b[l] * d[l];
                    si[l] += a[l] * d[l] + b[l] * c[l];
                }
            }
            let mut tr = (sr[0] + sr[1]) + (sr[2] + sr[3]);
            let mut ti = (si[0] + si[1]) + (si[2] + si[3]);
            for k in body..n {
                tr += ar[k] * x.re[k] - ai[k] * x.im[k];
                ti += ar[k] * x.im[k] + ai[k] * x.re[k];
            }
            *o = Complex::new(tr, ti);
        }
    }
}

/// Overwrites `h` with a fresh channel. Path gains and angles are drawn in
/// the order `(α_p, φ_p)` per path; steering vectors come from a phasor
/// recurrence. Calls `record` with every path.
#[inline]
#[allow(clippy::too_many_arguments)]
fn draw_into(
    link: LinkDraw,
    delta: f64,
    spacing_ratio: f64,
    n_paths: usize,
    rng: &mut impl Rng,
    scratch: &mut Split,
    h: &mut [C64],
    mut record: impl FnMut(C64, f64),
) {
    scratch.clear();
    let scale = 1.0 / (n_paths as f64).sqrt();
    let c = 2.0 * PI * spacing_ratio;
    for _ in 0..n_paths {
        let alpha = complex_normal(rng, link.beta);
        let u: f64 = rng.random();
        let phi = link.los_angle + delta * (2.0 * u - 1.0);
        record(alpha, phi);
        accumulate_steering(scratch, alpha * scale, Complex::from_polar(1.0, -c * phi.cos()));
    }
    scratch.store(h);
}

/// Lanes of the blocked phasor recurrence.
const LANES: usize = 8;

/// `h[k] += v · step^k`, run as `LANES` interleaved recurrences so the
/// multiplies do not form one serial dependency chain.
#[inline]
fn accumulate_steering(h: &mut Split, v: C64, step: C64) {
    let mut lr = [0.0; LANES];
    let mut li = [0.0; LANES];
    let mut p = v;
    for l in 0..LANES {
        lr[l] = p.re;
        li[l] = p.im;
        p *= step;
    }
    let jump = step.powu(LANES as u32);
    let (jr, ji) = (jump.re, jump.im);
    let mut re = h.re.chunks_exact_mut(LANES);
    let mut im = h.im.chunks_exact_mut(LANES);
    for (cr, ci) in (&mut re).zip(&mut im) {
        let cr: &mut [f64; LANES] = cr.try_into().expect("exact chunk");
        let ci: &mut [f64; LANES] = ci.try_into().expect("exact chunk");
        for l in 0..LANES {
            cr[l] += lr[l];
            ci[l] += li[l];
            let t = lr[l] * jr - li[l] * ji;
            li[l] = lr[l] * ji + li[l] * jr;
            lr[l] = t;
        }
    }
    let (rr, ri) = (re.into_remainder(), im.into_remainder());
    for l in 0..rr.len() {
        rr[l] += lr[l];
        ri[l] += li[l];
    }
}

pub fn draw_channel(
    link: &LinkGeometry,
    spread: AngularSpread<f64>,
    array: ArraySpec<f64>,
    n_paths: usize,
    rng: &mut impl Rng,
) -> ChannelRealization {
    assert!(n_paths >= 1);
    let mut h = vec![Complex::new(0.0, 0.0); array.m];
    let mut scratch = Split::zeros(array.m);
    let mut alphas = Vec::with_capacity(n_paths);
    let mut aoas = Vec::with_capacity(n_paths);
    draw_into(link.into(), spread.delta(), array.spacing_ratio, n_paths, rng, &mut scratch, &mut h, |a, phi| {
        alphas.push(a);
        aoas.push(phi);
    });
    ChannelRealization {
        ue: link.ue,
        bs: link.bs,
        h,
        alphas,
        aoas,
    }
}

/// Unit-modulus pilot symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotBlock {
    pub symbols: Vec<C64>,
}

impl PilotBlock {
    pub fn ones(tau: usize) -> Self {
        Self {
            symbols: vec![Complex::new(1.0, 0.0); tau],
        }
    }

    /// iid QPSK symbols `(±1 ± j)/√2`.
    pub fn qpsk(tau: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::ones(tau);
        p.redraw_qpsk(rng);
        p
    }

    fn redraw_qpsk(&mut self, rng: &mut impl Rng) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for s in &mut self.symbols {
            let bits: u8 = rng.random_range(0..4);
            *s = Complex::new(
                if bits & 1 == 0 { h } else { -h },
                if bits & 2 == 0 { h } else { -h },
            );
        }
    }

    pub fn tau(&self) -> usize {
        self.symbols.len()
    }
}

/// Received training block `y_t = s_t Σ_k h_k + n_t`, stacked `t`-major
/// into `y` of length `Mτ`.
pub fn ul_receive_into(
    channels: &[&[C64]],
    pilots: &PilotBlock,
    sigma2: f64,
    rng: &mut impl Rng,
    y: &mut [C64],
) {
    let m = y.len() / pilots.tau();
    assert_eq!(y.len(), m * pilots.tau());
    for (t, s) in pilots.symbols.iter().enumerate() {
        let block = &mut y[t * m..(t + 1) * m];
        for (k, v) in block.iter_mut().enumerate() {
            let sum: C64 = channels.iter().map(|h| h[k]).sum();
            *v = s * sum;
        }
        if sigma2 > 0.0 {
            for v in block.iter_mut() {
                *v += complex_normal(rng, sigma2);
            }
        }
    }
}

pub fn ul_receive(channels: &[&[C64]], pilots: &PilotBlock, sigma2: f64, rng: &mut impl Rng) -> Vec<C64> {
    let m = channels.first().map_or(0, |h| h.len());
    let mut y = vec![Complex::new(0.0, 0.0); m * pilots.tau()];
    ul_receive_into(channels, pilots, sigma2, rng, &mut y);
    y
}

/// `ĥ = R̃ Sᴴ y`, with `Sᴴ y = Σ_t conj(s_t) y_t`.
pub fn lmmse_estimate_into(
    filter: &CMatrix<f64>,
    pilots: &PilotBlock,
    y: &[C64],
    despread: &mut [C64],
    out: &mut [C64],
) {
    assert_eq!(y.len(), filter.rows() * pilots.tau());
    despread_into(pilots, y, despread);
    filter.mul_vec_into(despread, out);
}

/// `Sᴴ y = Σ_t conj(s_t) y_t`.
fn despread_into(pilots: &PilotBlock, y: &[C64], despread: &mut [C64]) {
    let m = despread.len();
    despread.fill(Complex::new(0.0, 0.0));
    for (t, s) in pilots.symbols.iter().enumerate() {
        let sc = s.conj();
        for (d, v) in despread.iter_mut().zip(&y[t * m..(t + 1) * m]) {
            *d += sc * v;
        }
    }
}

pub fn lmmse_estimate(filter: &CMatrix<f64>, pilots: &PilotBlock, y: &[C64]) -> Vec<C64> {
    let m = filter.rows();
    let mut despread = vec![Complex::new(0.0, 0.0); m];
    let mut out = vec![Complex::new(0.0, 0.0); m];
    lmmse_estimate_into(filter, pilots, y, &mut despread, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrecoderKind {
    #[default]
    Ebf,
    Rzf,
}

/// Unnormalised precoder. RZF uses `(ĥĥᴴ + σ²I)⁻¹ĥ = ĥ / (σ² + ‖ĥ‖²)`.
pub fn make_precoder(h_hat: &[C64], sigma2: f64, kind: PrecoderKind) -> Result<Vec<C64>, McError> {
    let mut w = h_hat.to_vec();
    precode_in_place(&mut w, sigma2, kind)?;
    Ok(w)
}

#[inline]
fn precode_in_place(w: &mut [C64], sigma2: f64, kind: PrecoderKind) -> Result<(), McError> {
    if kind == PrecoderKind::Rzf {
        let d = sigma2 + norm_sqr(w);
        if d <= 0.0 {
            return Err(McError::DegeneratePrecoder);
        }
        let k = 1.0 / d;
        for x in w.iter_mut() {
            *x *= k;
        }
    }
    Ok(())
}

#[inline]
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Whether the precoder is built from the estimate or the true channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CsiMode {
    #[default]
    Estimated,
    Perfect,
}

/// Everything a realization needs to know about the scenario point.
#[derive(Clone, Copy, Debug)]
pub struct McScenario<'a> {
    pub layout: &'a Layout,
    pub cov: &'a ScenarioCovariances<f64>,
    pub spread: AngularSpread<f64>,
    pub array: ArraySpec<f64>,
    pub n_paths: usize,
}

impl McScenario<'_> {
    fn check(&self) -> Result<(), McError> {
        if self.layout.n_cells() != self.cov.n_cells() || self.array.m != self.cov.m() {
            return Err(McError::Mismatch(format!(
                "{} cells / M = {} vs {} cells / M = {}",
                self.layout.n_cells(),
                self.array.m,
                self.cov.n_cells(),
                self.cov.m()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub n_realizations: usize,
    pub batches: usize,
    pub seed: u64,
    pub precoder: PrecoderKind,
    pub csi: CsiMode,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_realizations: 100_000,
            batches: DEFAULT_BATCHES,
            seed: 1,
            precoder: PrecoderKind::Ebf,
            csi: CsiMode::Estimated,
        }
    }
}

/// Per-realization buffers.
struct Workspace {
    n: usize,
    m: usize,
    /// `h[ue * n + bs]`
    h: Vec<Vec<C64>>,
    w: Vec<Vec<C64>>,
    y: Vec<C64>,
    despread: Vec<C64>,
    pilots: PilotBlock,
    scratch: Split,
    /// Serving-link LMMSE filters, by BS.
    filters: Vec<SplitMatrix>,
}

impl Workspace {
    fn new(sc: &McScenario<'_>) -> Self {
        let n = sc.layout.n_cells();
        let m = sc.array.m;
        let zero = Complex::new(0.0, 0.0);
        Self {
            n,
            m,
            h: vec![vec![zero; m]; n * n],
            w: vec![vec![zero; m]; n],
            y: vec![zero; m * sc.cov.tau()],
            despread: vec![zero; m],
            pilots: PilotBlock::ones(sc.cov.tau()),
            scratch: Split::zeros(m),
            filters: (0..n).map(|bs| SplitMatrix::new(&sc.cov.link(bs, bs).filter)).collect(),
        }
    }

    /// Draws all channels, trains every BS and fills the unnormalised
    /// precoders.
    fn realize(
        &mut self,
        sc: &McScenario<'_>,
        csi: CsiMode,
        kind: PrecoderKind,
        rng: &mut impl Rng,
    ) -> Result<(), McError> {
        let n = self.n;
        let delta = sc.spread.delta();
        for bs in 0..n {
            for ue in 0..n {
                let link = sc.layout.link(ue, bs).into();
                draw_into(
                    link,
                    delta,
                    sc.array.spacing_ratio,
                    sc.n_paths,
                    rng,
                    &mut self.scratch,
                    &mut self.h[ue * n + bs],
                    |_, _| {},
                );
            }
        }
        self.pilots.redraw_qpsk(rng);
        let sigma2 = sc.cov.sigma2();
        for bs in 0..n {
            match csi {
                CsiMode::Perfect => self.w[bs].copy_from_slice(&self.h[bs * n + bs]),
                CsiMode::Estimated => {
                    let at_bs: Vec<&[C64]> = (0..n).map(|ue| self.h[ue * n + bs].as_slice()).collect();
                    ul_receive_into(&at_bs, &self.pilots, sigma2, rng, &mut self.y);
                    despread_into(&self.pilots, &self.y, &mut self.despread);
                    self.scratch.load(&self.despread);
                    self.filters[bs].mul_vec(&self.scratch, &mut self.w[bs]);
                }
            }
            precode_in_place(&mut self.w[bs], sigma2, kind)?;
        }
        debug_assert_eq!(self.w[0].len(), self.m);
        Ok(())
    }

    fn channel(&self, ue: usize, bs: usize) -> &[C64] {
        &self.h[ue * self.n + bs]
    }
}

/// Kahan-compensated sums of a fixed set of statistics and their squares.
#[derive(Clone, Debug, PartialEq)]
struct Accumulator {
    count: usize,
    sum: Vec<f64>,
    comp: Vec<f64>,
    sum_sq: Vec<f64>,
    comp_sq: Vec<f64>,
}

#[inline]
fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; len],
            comp: vec![0.0; len],
            sum_sq: vec![0.0; len],
            comp_sq: vec![0.0; len],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1;
        for (k, &v) in values.iter().enumerate() {
            kahan_add(&mut self.sum[k], &mut self.comp[k], v);
            kahan_add(&mut self.sum_sq[k], &mut self.comp_sq[k], v * v);
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        for k in 0..self.sum.len() {
            kahan_add(&mut self.sum[k], &mut self.comp[k], other.sum[k]);
            kahan_add(&mut self.sum_sq[k], &mut self.comp_sq[k], other.sum_sq[k]);
        }
    }

    fn mean(&self, k: usize) -> f64 {
        self.sum[k] / self.count as f64
    }

    /// Sample standard deviation over `√n`.
    fn stderr(&self, k: usize) -> f64 {
        let n = self.count as f64;
        let mean = self.mean(k);
        let var = ((self.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    /// Totals with one batch removed.
    fn without(&self, other: &Accumulator) -> Accumulator {
        Accumulator {
            count: self.count - other.count,
            sum: self.sum.iter().zip(&other.sum).map(|(a, b)| a - b).collect(),
            comp: vec![0.0; self.sum.len()],
            sum_sq: self.sum_sq.iter().zip(&other.sum_sq).map(|(a, b)| a - b).collect(),
            comp_sq: vec![0.0; self.sum.len()],
        }
    }
}

fn batch_bounds(n: usize, batches: usize, b: usize) -> (usize, usize) {
    (b * n / batches, (b + 1) * n / batches)
}

fn check_budget(cfg: &McConfig, min: usize) -> Result<(), McError> {
    if cfg.n_realizations < min {
        return Err(McError::InsufficientSamples {
            min,
            got: cfg.n_realizations,
        });
    }
    if cfg.batches < 2 || cfg.batches > cfg.n_realizations {
        return Err(McError::Batches {
            batches: cfg.batches,
            n: cfg.n_realizations,
        });
    }
    Ok(())
}

/// Runs `body` over every realization, batch by batch in parallel, and
/// returns the per-batch accumulators in batch order.
fn run_batches(
    sc: &McScenario<'_>,
    cfg: &McConfig,
    len: usize,
    body: impl Fn(&Workspace, &mut [f64]) + Sync,
) -> Result<Vec<Accumulator>, McError> {
    (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut ws = Workspace::new(sc);
            let mut acc = Accumulator::new(len);
            let mut values = vec![0.0; len];
            let (lo, hi) = batch_bounds(cfg.n_realizations, cfg.batches, b);
            for r in lo..hi {
                let mut rng = RngStream::new(cfg.seed, r as u64).rng();
                ws.realize(sc, cfg.csi, cfg.precoder, &mut rng)?;
                body(&ws, &mut values);
                acc.push(&values);
            }
            Ok(acc)
        })
        .collect()
}

/// Sample moments of the effective gains seen by the desired UE `j`.
///
/// Indices: `gain` is `E{h_jjᴴ w_j}`; `cross[i]` is `E{|h_jiᴴ w_i|²}`
/// (with `cross[j]` the desired link); `precoder_power[i]` is `E{‖w_i‖²}`.
/// All precoders are unnormalised.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalStats {
    pub n_samples: usize,
    pub gain: C64,
    pub gain_se: C64,
    pub cross: Vec<f64>,
    pub cross_se: Vec<f64>,
    pub precoder_power: Vec<f64>,
    pub precoder_power_se: Vec<f64>,
}

/// Layout of the per-realization statistic vector.
struct StatIndex {
    n: usize,
}

impl StatIndex {
    const GAIN_RE: usize = 0;
    const GAIN_IM: usize = 1;

    fn cross(&self, i: usize) -> usize {
        2 + i
    }

    fn power(&self, i: usize) -> usize {
        2 + self.n + i
    }

    fn len(&self) -> usize {
        2 + 2 * self.n
    }
}

/// Power terms from pooled sample means.
fn powers_from(acc: &Accumulator, idx: &StatIndex, j: usize, sigma2: f64) -> Result<[f64; 4], McError> {
    let eta = |i: usize| {
        let p = acc.mean(idx.power(i));
        if p > 0.0 {
            Ok(1.0 / p)
        } else {
            Err(McError::DegenerateNormalization(i))
        }
    };
    let g = Complex::new(acc.mean(StatIndex::GAIN_RE), acc.mean(StatIndex::GAIN_IM));
    let eta_j = eta(j)?;
    let signal = eta_j * g.norm_sqr();
    let si = eta_j * (acc.mean(idx.cross(j)) - g.norm_sqr());
    let mut ic = 0.0;
    for i in (0..idx.n).filter(|&i| i != j) {
        ic += eta(i)? * acc.mean(idx.cross(i));
    }
    Ok([signal, si, ic, rate(signal, si, ic, sigma2)])
}

/// Empirical power breakdown for desired UE `j`, with delete-one-batch
/// jackknife standard errors on the derived terms.
pub fn estimate_powers(
    sc: &McScenario<'_>,
    j: usize,
    cfg: &McConfig,
) -> Result<(PowerBreakdown<f64>, EmpiricalStats), McError> {
    sc.check()?;
    check_budget(cfg, MIN_REALIZATIONS)?;
    let n = sc.layout.n_cells();
    assert!(j < n);
    let idx = StatIndex { n };
    let batches = run_batches(sc, cfg, idx.len(), |ws, v| {
        let g = inner(ws.channel(j, j), &ws.w[j]);
        v[StatIndex::GAIN_RE] = g.re;
        v[StatIndex::GAIN_IM] = g.im;
        for i in 0..n {
            v[idx.cross(i)] = inner(ws.channel(j, i), &ws.w[i]).norm_sqr();
            v[idx.power(i)] = norm_sqr(&ws.w[i]);
        }
    })?;
    let mut total = Accumulator::new(idx.len());
    for b in &batches {
        total.merge(b);
    }
    let sigma2 = sc.cov.sigma2();
    let full = powers_from(&total, &idx, j, sigma2)?;

    let nb = batches.len() as f64;
    let mut loo_sum = [0.0; 4];
    let mut loo_sq = [0.0; 4];
    for b in &batches {
        let t = powers_from(&total.without(b), &idx, j, sigma2)?;
        for k in 0..4 {
            loo_sum[k] += t[k];
            loo_sq[k] += t[k] * t[k];
        }
    }
    let se: Vec<f64> = (0..4)
        .map(|k| {
            let mean = loo_sum[k] / nb;
            ((nb - 1.0) * (loo_sq[k] / nb - mean * mean).max(0.0)).sqrt()
        })
        .collect();

    let breakdown = PowerBreakdown {
        signal: full[0],
        self_interference: full[1],
        intercell: full[2],
        noise: sigma2,
        rate_bps_hz: full[3],
        source: Source::MonteCarlo,
        signal_se: se[0],
        self_interference_se: se[1],
        intercell_se: se[2],
        rate_se: se[3],
    };
    let stats = EmpiricalStats {
        n_samples: total.count,
        gain: Complex::new(total.mean(StatIndex::GAIN_RE), total.mean(StatIndex::GAIN_IM)),
        gain_se: Complex::new(total.stderr(StatIndex::GAIN_RE), total.stderr(StatIndex::GAIN_IM)),
        cross: (0..n).map(|i| total.mean(idx.cross(i))).collect(),
        cross_se: (0..n).map(|i| total.stderr(idx.cross(i))).collect(),
        precoder_power: (0..n).map(|i| total.mean(idx.power(i))).collect(),
        precoder_power_se: (0..n).map(|i| total.stderr(idx.power(i))).collect(),
    };
    Ok((breakdown, stats))
}

/// Source of the vector pair whose angle is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleMode {
    /// Precoder from the true serving channel.
    PerfectCsi,
    /// Precoder from the LMMSE estimate.
    Estimated,
    /// Two independent iid `CN(0, I)` vectors, bypassing the channel model.
    Iid,
}

/// `arccos(|aᴴb| / (‖a‖‖b‖))` in `[0, π/2]`, or `None` for a zero vector.
pub fn vector_angle(a: &[C64], b: &[C64]) -> Option<f64> {
    let na = norm_sqr(a);
    let nb = norm_sqr(b);
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let c = inner(a, b).norm() / (na * nb).sqrt();
    Some(c.min(1.0).acos())
}

/// Angles between UE `j`'s channel at BS `i` and BS `i`'s precoder.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleSamples {
    /// Radians, in realization order.
    pub angles: Vec<f64>,
    /// Realizations dropped because a vector was zero.
    pub skipped: usize,
    pub m: usize,
}

pub fn angle_samples(
    sc: &McScenario<'_>,
    j: usize,
    i: usize,
    mode: AngleMode,
    cfg: &McConfig,
) -> Result<AngleSamples, McError> {
    sc.check()?;
    check_budget(cfg, MIN_ANGLE_REALIZATIONS)?;
    let n = sc.layout.n_cells();
    assert!(j < n && i < n);
    let m = sc.array.m;
    let per_batch: Vec<(Vec<f64>, usize)> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut ws = Workspace::new(sc);
            let (lo, hi) = batch_bounds(cfg.n_realizations, cfg.batches, b);
            let mut out = Vec::with_capacity(hi - lo);
            let mut skipped = 0;
            let mut a = vec![Complex::new(0.0, 0.0); m];
            let mut c = vec![Complex::new(0.0, 0.0); m];
            for r in lo..hi {
                let mut rng = RngStream::new(cfg.seed, r as u64).rng();
                let angle = match mode {
                    AngleMode::Iid => {
                        for v in a.iter_mut().chain(c.iter_mut()) {
                            *v = complex_normal(&mut rng, 1.0);
                        }
                        vector_angle(&a, &c)
                    }
                    AngleMode::PerfectCsi | AngleMode::Estimated => {
                        let csi = if mode == AngleMode::PerfectCsi {
                            CsiMode::Perfect
                        } else {
                            CsiMode::Estimated
                        };
                        ws.realize(sc, csi, PrecoderKind::Ebf, &mut rng)?;
                        vector_angle(ws.channel(j, i), &ws.w[i])
                    }
                };
                match angle {
                    Some(v) => out.push(v),
                    None => skipped += 1,
                }
            }
            Ok((out, skipped))
        })
        .collect::<Result<_, McError>>()?;
    let mut angles = Vec::with_capacity(cfg.n_realizations);
    let mut skipped = 0;
    for (v, s) in per_batch {
        angles.extend(v);
        skipped += s;
    }
    Ok(AngleSamples { angles, skipped, m })
}

impl AngleSamples {
    pub fn mean(&self) -> f64 {
        self.angles.iter().sum::<f64>() / self.angles.len() as f64
    }

    /// Histogram on `[0°, 90°]` with the Loyka reference density for `N = M`.
    /// Densities are per degree.
    pub fn histogram(&self, bins: usize) -> AngleHistogram {
        assert!(bins >= 1);
        let width = 90.0 / bins as f64;
        let mut counts = vec![0usize; bins];
        for &a in &self.angles {
            let k = ((a.to_degrees() / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = self.angles.len().max(1) as f64;
        let n = self.m as f64;
        let rows = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let left = k as f64 * width;
                let right = left + width;
                let mid = (left + 0.5 * width).to_radians();
                // the reference pdf is per radian; convert to per degree
                let reference =
                    2.0 * (n - 1.0) * mid.sin().powf(2.0 * n - 3.0) * mid.cos() * PI / 180.0;
                HistogramBin {
                    left_deg: left,
                    right_deg: right,
                    density: c as f64 / total / width,
                    reference,
                }
            })
            .collect();
        AngleHistogram { bins: rows }
    }

    /// `sup |F̂ − F|` against a reference CDF on radians.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let mut sorted = self.angles.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = cdf(x);
                (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub left_deg: f64,
    pub right_deg: f64,
    pub density: f64,
    pub reference: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleHistogram {
    pub bins: Vec<HistogramBin>,
}

impl AngleHistogram {
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "bin_left_deg,bin_right_deg,density,reference_pdf")?;
        for b in &self.bins {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                b.left_deg, b.right_deg, b.density, b.reference
            )?;
        }
        Ok(())
    }

    /// Mean angle in degrees implied by the histogram.
    pub fn mean_deg(&self) -> f64 {
        self.bins
            .iter()
            .map(|b| 0.5 * (b.left_deg + b.right_deg) * b.density * (b.right_deg - b.left_deg))
            .sum()
    }
}
