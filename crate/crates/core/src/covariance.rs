//! Second-order channel statistics for a uniform angle-of-arrival model on a
//! uniform linear array.
//!
//! With AoAs uniform on `[φ̄ − Δ, φ̄ + Δ]` the angular covariance is Toeplitz
//! Hermitian, `R^φ(m, n) = E(m − n)` where
//!
//! ```text
//! E(s) = (1 / 2Δ) ∫ exp(−j 2π (D/λ) s cos φ) dφ
//! ```
//!
//! so only the shift correlations `E(s)` are ever integrated. From them the
//! prior `R = β R^φ`, the LMMSE filter `R̃ = R (σ²I + τ Σ_ℓ R_ℓ)⁻¹` and the
//! estimate covariance `R̂ = τ R̃ R` follow.

use std::io::{self, Write};

use num_complex::Complex;
use num_traits::One;
use thiserror::Error;

use crate::geometry::Layout;
use crate::numerics::{
    hermitian_solve, integrate_complex_many, is_positive_semidefinite, CMatrix, NumericsError,
    QuadratureSpec, Real,
};

/// Largest first-column/diagonal mismatch accepted as Toeplitz.
pub const TOEPLITZ_TOL: f64 = 1e-10;
/// Eigenvalue tolerance, relative to the trace, for PSD checks.
pub const PSD_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CovarianceError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("angular spread must lie in [0, π], got {0} rad")]
    Spread(f64),
    #[error("array needs m >= 1 and positive spacing, got m = {m}, D/λ = {spacing}")]
    Array { m: usize, spacing: f64 },
    #[error("sigma2 must be positive and tau at least 1, got sigma2 = {sigma2}, tau = {tau}")]
    Training { sigma2: f64, tau: usize },
    #[error("matrix is not Toeplitz (mismatch {mismatch:e} at ({row}, {col}))")]
    NotToeplitz { row: usize, col: usize, mismatch: f64 },
    #[error("{which} of link (ue {ue}, bs {bs}) is not positive semidefinite")]
    NotPsd { which: &'static str, ue: usize, bs: usize },
    #[error("estimate of link (ue {ue}, bs {bs}) carries more power than its prior")]
    NotContractive { ue: usize, bs: usize },
}

/// Half-width `Δ` of the uniform AoA support, in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularSpread<T> {
    delta: T,
}

impl<T: Real> AngularSpread<T> {
    pub fn new(delta: T) -> Result<Self, CovarianceError> {
        if !(delta >= T::zero() && delta <= T::PI()) {
            return Err(CovarianceError::Spread(delta.as_f64()));
        }
        Ok(Self { delta })
    }

    pub fn from_degrees(deg: T) -> Result<Self, CovarianceError> {
        Self::new(deg.to_radians())
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArraySpec<T> {
    pub m: usize,
    /// Element spacing over wavelength, `D/λ`.
    pub spacing_ratio: T,
}

impl<T: Real> ArraySpec<T> {
    pub fn new(m: usize, spacing_ratio: T) -> Result<Self, CovarianceError> {
        if m == 0 || !(spacing_ratio > T::zero()) || !spacing_ratio.is_finite() {
            return Err(CovarianceError::Array {
                m,
                spacing: spacing_ratio.as_f64(),
            });
        }
        Ok(Self { m, spacing_ratio })
    }

    pub fn half_wavelength(m: usize) -> Result<Self, CovarianceError> {
        Self::new(m, T::lit(0.5))
    }
}

/// Shift correlations `E(0), …, E(len − 1)`. `E(−s) = conj(E(s))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftTable<T> {
    values: Vec<Complex<T>>,
}

impl<T: Real> ShiftTable<T> {
    pub fn from_values(values: Vec<Complex<T>>) -> Self {
        assert!(!values.is_empty(), "shift table needs E(0)");
        Self { values }
    }

    /// Number of stored non-negative lags.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.values
    }

    /// `E(s)` for a signed lag. Panics if `|s|` exceeds the stored range.
    #[inline]
    pub fn get(&self, s: isize) -> Complex<T> {
        let k = s.unsigned_abs();
        assert!(k < self.values.len(), "shift {s} outside table of {} lags", self.values.len());
        if s >= 0 {
            self.values[k]
        } else {
            self.values[k].conj()
        }
    }

    /// All lags `−max_lag..=max_lag`, index `s + max_lag`.
    pub fn signed(&self) -> Vec<Complex<T>> {
        let l = self.max_lag() as isize;
        (-l..=l).map(|s| self.get(s)).collect()
    }

    /// Leading `len` lags.
    pub fn truncated(&self, len: usize) -> Self {
        Self::from_values(self.values[..len].to_vec())
    }
}

/// `E(0..lags)` by quadrature. `Δ = 0` uses the closed form.
pub fn shift_correlations<T: Real>(
    mean_angle: T,
    spread: AngularSpread<T>,
    spacing_ratio: T,
    lags: usize,
    quad: &QuadratureSpec<T>,
) -> Result<ShiftTable<T>, CovarianceError> {
    assert!(lags >= 1);
    let c = T::lit(2.0) * T::PI() * spacing_ratio;
    let delta = spread.delta();
    if delta == T::zero() {
        let phase = -c * mean_angle.cos();
        let values = (0..lags)
            .map(|s| Complex::from_polar(T::one(), phase * T::from_count(s)))
            .collect();
        return Ok(ShiftTable::from_values(values));
    }
    let a = mean_angle - delta;
    let b = mean_angle + delta;
    let c_max = c * T::from_count(lags - 1);
    let sized = QuadratureSpec::for_oscillation(a, b, c_max);
    let spec = QuadratureSpec {
        nodes: sized.nodes.max(quad.nodes),
        abs_tol: quad.abs_tol,
        rule: quad.rule,
    };
    let weight = T::one() / (b - a);
    let mut values = integrate_complex_many(
        |phi, out| {
            let step = Complex::from_polar(T::one(), -c * phi.cos());
            let mut z = Complex::new(weight, T::zero());
            for v in out.iter_mut() {
                *v = z;
                z = z * step;
            }
        },
        lags,
        a,
        b,
        &spec,
    )?;
    values[0] = Complex::one();
    Ok(ShiftTable::from_values(values))
}

/// Toeplitz-Hermitian matrix with first column `e`: `R(m, n) = E(m − n)`.
pub fn toeplitz_hermitian<T: Real>(e: &ShiftTable<T>, m: usize) -> CMatrix<T> {
    assert!(m <= e.len(), "need {m} lags, table has {}", e.len());
    CMatrix::from_fn(m, m, |r, c| e.get(r as isize - c as isize))
}

/// Angular covariance `R^φ` of an `M`-element array.
pub fn angular_covariance<T: Real>(
    mean_angle: T,
    spread: AngularSpread<T>,
    array: ArraySpec<T>,
    quad: &QuadratureSpec<T>,
) -> Result<CMatrix<T>, CovarianceError> {
    let e = shift_correlations(mean_angle, spread, array.spacing_ratio, array.m, quad)?;
    Ok(toeplitz_hermitian(&e, array.m))
}

fn check_square<T: Real>(op: &'static str, a: &CMatrix<T>, b: &CMatrix<T>) -> Result<(), NumericsError> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(NumericsError::Shape {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

fn training_matrix<T: Real>(
    r_all: &[&CMatrix<T>],
    m: usize,
    sigma2: T,
    tau: usize,
) -> Result<CMatrix<T>, CovarianceError> {
    if !(sigma2 > T::zero()) || tau == 0 {
        return Err(CovarianceError::Training {
            sigma2: sigma2.as_f64(),
            tau,
        });
    }
    let mut a = CMatrix::identity(m).scale(sigma2);
    let tau = T::from_count(tau);
    for r in r_all {
        if r.shape() != (m, m) {
            return Err(NumericsError::Shape {
                op: "lmmse_filter",
                left: (m, m),
                right: r.shape(),
            }
            .into());
        }
        a = &a + &r.scale(tau);
    }
    Ok(a.hermitian_part())
}

/// `R̃ = R (σ²I + τ Σ_ℓ R_ℓ)⁻¹`, where `r_all` are the covariances of every
/// UE sharing the pilot at this BS (including the target).
pub fn lmmse_filter<T: Real>(
    r_target: &CMatrix<T>,
    r_all: &[&CMatrix<T>],
    sigma2: T,
    tau: usize,
) -> Result<CMatrix<T>, CovarianceError> {
    let a = training_matrix(r_all, r_target.rows(), sigma2, tau)?;
    check_square("lmmse_filter", &a, r_target)?;
    // A and R are Hermitian, so R A⁻¹ = (A⁻¹ R)ᴴ.
    Ok(hermitian_solve(&a, r_target)?.adjoint())
}

/// `R̂ = τ R̃ R`, symmetrised.
pub fn estimate_covariance<T: Real>(
    filter: &CMatrix<T>,
    r: &CMatrix<T>,
    tau: usize,
) -> Result<CMatrix<T>, CovarianceError> {
    check_square("estimate_covariance", filter, r)?;
    Ok(filter.matmul(r).scale(T::from_count(tau)).hermitian_part())
}

/// `R̂` assembled term by term, `τ² Σ_k R̃ R_k R̃ᴴ + τ σ² R̃ R̃ᴴ`.
pub fn estimate_covariance_expanded<T: Real>(
    filter: &CMatrix<T>,
    r_all: &[&CMatrix<T>],
    sigma2: T,
    tau: usize,
) -> Result<CMatrix<T>, CovarianceError> {
    let tau = T::from_count(tau);
    let fh = filter.adjoint();
    let mut out = filter.matmul(&fh).scale(tau * sigma2);
    for r in r_all {
        check_square("estimate_covariance_expanded", filter, r)?;
        out = &out + &filter.matmul(r).matmul(&fh).scale(tau * tau);
    }
    Ok(out.hermitian_part())
}

/// `E(m) = R^φ(m, 0)` read off a Toeplitz-Hermitian matrix.
pub fn shift_correlation_table<T: Real>(r_phi: &CMatrix<T>) -> Result<ShiftTable<T>, CovarianceError> {
    if !r_phi.is_square() {
        return Err(NumericsError::Shape {
            op: "shift_correlation_table",
            left: r_phi.shape(),
            right: r_phi.shape(),
        }
        .into());
    }
    let m = r_phi.rows();
    let col: Vec<Complex<T>> = (0..m).map(|r| r_phi[(r, 0)]).collect();
    let tol = T::lit(TOEPLITZ_TOL);
    for r in 0..m {
        for c in 0..m {
            let expected = if r >= c { col[r - c] } else { col[c - r].conj() };
            let mismatch = (r_phi[(r, c)] - expected).norm();
            if mismatch > tol {
                return Err(CovarianceError::NotToeplitz {
                    row: r,
                    col: c,
                    mismatch: mismatch.as_f64(),
                });
            }
        }
    }
    Ok(ShiftTable::from_values(col))
}

/// `|E(m)|` for `m = 0..M`.
pub fn diagonalization_profile<T: Real>(r_phi: &CMatrix<T>) -> Vec<T> {
    (0..r_phi.rows()).map(|r| r_phi[(r, 0)].norm()).collect()
}

/// Statistics of one (UE, BS) link.
#[derive(Clone, Debug)]
pub struct CovarianceSet<T> {
    pub r_phi: CMatrix<T>,
    pub r: CMatrix<T>,
    pub filter: CMatrix<T>,
    pub r_hat: CMatrix<T>,
    /// Shift correlations over `2M − 1` lags; the fourth-moment terms need
    /// shifts up to `2(M − 1)`.
    pub shifts: ShiftTable<T>,
    pub beta: T,
}

impl<T: Real> CovarianceSet<T> {
    /// `E(0..M)`, the part of the table visible in `R^φ`.
    pub fn e_table(&self) -> &[Complex<T>] {
        &self.shifts.as_slice()[..self.r_phi.rows()]
    }

    /// Writes all four matrices as CSV rows
    /// `matrix,row,col,re,im`.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "matrix,row,col,re,im")?;
        for (name, m) in [
            ("r_phi", &self.r_phi),
            ("r", &self.r),
            ("filter", &self.filter),
            ("r_hat", &self.r_hat),
        ] {
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let v = m[(r, c)];
                    writeln!(w, "{name},{r},{c},{:.16e},{:.16e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Covariance sets for every link of a layout at one (AS, M) point,
/// indexed by `(ue, bs)`.
#[derive(Clone, Debug)]
pub struct ScenarioCovariances<T> {
    n: usize,
    sets: Vec<CovarianceSet<T>>,
    sigma2: T,
    tau: usize,
}

impl<T: Real> ScenarioCovariances<T> {
    pub fn build(
        layout: &Layout,
        spread: AngularSpread<T>,
        array: ArraySpec<T>,
        sigma2: T,
        tau: usize,
        quad: &QuadratureSpec<T>,
    ) -> Result<Self, CovarianceError> {
        let n = layout.n_cells();
        let m = array.m;
        let mut priors = Vec::with_capacity(n * n);
        for link in layout.links() {
            let shifts = shift_correlations(
                T::lit(link.los_angle),
                spread,
                array.spacing_ratio,
                2 * m - 1,
                quad,
            )?;
            let r_phi = toeplitz_hermitian(&shifts, m);
            let beta = T::lit(link.beta);
            let r = r_phi.scale(beta);
            priors.push((r_phi, r, shifts, beta));
        }
        let mut sets = Vec::with_capacity(n * n);
        for ue in 0..n {
            for bs in 0..n {
                let (r_phi, r, shifts, beta) = &priors[ue * n + bs];
                let at_bs: Vec<&CMatrix<T>> = (0..n).map(|l| &priors[l * n + bs].1).collect();
                let filter = lmmse_filter(r, &at_bs, sigma2, tau)?;
                let r_hat = estimate_covariance(&filter, r, tau)?;
                let tol = T::lit(PSD_REL_TOL);
                if !is_positive_semidefinite(r, tol) {
                    return Err(CovarianceError::NotPsd { which: "prior", ue, bs });
                }
                if !is_positive_semidefinite(&r_hat, tol) {
                    return Err(CovarianceError::NotPsd { which: "estimate", ue, bs });
                }
                if r_hat.trace().re > r.trace().re + tol {
                    return Err(CovarianceError::NotContractive { ue, bs });
                }
                sets.push(CovarianceSet {
                    r_phi: r_phi.clone(),
                    r: r.clone(),
                    filter,
                    r_hat,
                    shifts: shifts.clone(),
                    beta: *beta,
                });
            }
        }
        Ok(Self { n, sets, sigma2, tau })
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sets[0].r.rows()
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn link(&self, ue: usize, bs: usize) -> &CovarianceSet<T> {
        &self.sets[ue * self.n + bs]
    }

    /// Priors of every UE at `bs`, in UE order.
    pub fn priors_at(&self, bs: usize) -> Vec<&CMatrix<T>> {
        (0..self.n).map(|ue| &self.link(ue, bs).r).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_layout, unit_gain_zeta, CellSpec};
    use crate::oracles::bessel_j0;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn quad() -> QuadratureSpec<f64> {
        QuadratureSpec::new(64, 1e-12).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zero_spread_is_rank_one_closed_form() {
        let phi = 0.7;
        let r = angular_covariance(phi, AngularSpread::new(0.0).unwrap(), ArraySpec::half_wavelength(5).unwrap(), &quad())
            .unwrap();
        for i in 0..5 {
            for k in 0..5 {
                let expected = Complex::from_polar(1.0, -PI * (i as f64 - k as f64) * phi.cos());
                assert!((r[(i, k)] - expected).norm() < 1e-14);
            }
        }
        // rank one: every 2x2 minor vanishes
        let minor = r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)];
        assert!(minor.norm() < 1e-14);
    }

    #[test]
    fn full_spread_matches_bessel() {
        let r = angular_covariance(0.3, AngularSpread::new(PI).unwrap(), ArraySpec::half_wavelength(6).unwrap(), &quad())
            .unwrap();
        for i in 0..6 {
            for k in 0..6 {
                let expected = bessel_j0(PI * (i as f64 - k as f64));
                assert!((r[(i, k)] - c(expected, 0.0)).norm() < 1e-10, "({i},{k})");
            }
        }
        assert!((r[(1, 0)].re - (-0.30424)).abs() < 1e-5);
    }

    #[test]
    fn diagonal_is_exactly_one() {
        for deg in [1.0, 10.0, 45.0, 90.0, 180.0] {
            let r = angular_covariance(
                1.2,
                AngularSpread::from_degrees(deg).unwrap(),
                ArraySpec::half_wavelength(8).unwrap(),
                &quad(),
            )
            .unwrap();
            for i in 0..8 {
                assert_eq!(r[(i, i)], c(1.0, 0.0));
            }
            assert!(r.is_hermitian(0.0));
        }
    }

    #[test]
    fn direct_quadrature_of_one_entry() {
        // independent evaluation of E(3) with per-node cis, no recurrence
        let (phi, delta) = (40f64.to_radians(), 25f64.to_radians());
        let e = shift_correlations(phi, AngularSpread::new(delta).unwrap(), 0.5, 4, &quad()).unwrap();
        let spec = QuadratureSpec::new(4096, 1e-13).unwrap();
        let direct = crate::numerics::integrate_complex(
            |x: f64| Complex::from_polar(1.0, -PI * 3.0 * x.cos()),
            phi - delta,
            phi + delta,
            &spec,
        )
        .unwrap()
            / (2.0 * delta);
        assert!((e.get(3) - direct).norm() < 1e-11);
        assert!((e.get(-3) - direct.conj()).norm() < 1e-11);
    }

    #[test]
    fn filter_scalar_cases() {
        let id = CMatrix::<f64>::identity(3);
        let f = lmmse_filter(&id, &[&id], 1.0, 1).unwrap();
        assert!((&f - &id.scale(0.5)).frobenius_norm() < 1e-15);
        let f = lmmse_filter(&id, &[&id], 1e-12, 1).unwrap();
        assert!((&f - &id).frobenius_norm() < 1e-11);
        let f = lmmse_filter(&id, &[&id, &id], 1.0, 1).unwrap();
        assert!((&f - &id.scale(1.0 / 3.0)).frobenius_norm() < 1e-15);
        let r_hat = estimate_covariance(&lmmse_filter(&id, &[&id], 1.0, 1).unwrap(), &id, 1).unwrap();
        assert!((r_hat.trace().re - 1.5).abs() < 1e-15);
    }

    #[test]
    fn filter_errors() {
        let id = CMatrix::<f64>::identity(3);
        let small = CMatrix::<f64>::identity(2);
        assert!(matches!(lmmse_filter(&id, &[&small], 1.0, 1), Err(CovarianceError::Numerics(_))));
        assert!(matches!(lmmse_filter(&id, &[&id], 0.0, 1), Err(CovarianceError::Training { .. })));
        assert!(matches!(lmmse_filter(&id, &[&id], 1.0, 0), Err(CovarianceError::Training { .. })));
    }

    #[test]
    fn noiseless_full_rank_estimate_recovers_prior() {
        let r = angular_covariance(0.4, AngularSpread::new(PI).unwrap(), ArraySpec::half_wavelength(4).unwrap(), &quad())
            .unwrap();
        let f = lmmse_filter(&r, &[&r], 1e-10, 1).unwrap();
        let r_hat = estimate_covariance(&f, &r, 1).unwrap();
        assert!((&r_hat - &r).frobenius_norm() / r.frobenius_norm() < 1e-8);
    }

    #[test]
    fn shift_table_structure() {
        let r = angular_covariance(PI / 2.0, AngularSpread::new(0.0).unwrap(), ArraySpec::half_wavelength(5).unwrap(), &quad())
            .unwrap();
        let e = shift_correlation_table(&r).unwrap();
        for s in 0..5 {
            assert!((e.get(s) - c(1.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(diagonalization_profile(&r).len(), 5);

        let r = angular_covariance(0.1, AngularSpread::new(PI).unwrap(), ArraySpec::half_wavelength(3).unwrap(), &quad())
            .unwrap();
        let e = shift_correlation_table(&r).unwrap();
        assert_eq!(e.get(0), c(1.0, 0.0));
        assert!((e.get(1).re - bessel_j0(PI)).abs() < 1e-10);

        let mut bad = r.clone();
        bad[(2, 1)] += c(1e-6, 0.0);
        assert!(matches!(shift_correlation_table(&bad), Err(CovarianceError::NotToeplitz { row: 2, col: 1, .. })));
    }

    #[test]
    fn spread_flattens_off_diagonals() {
        let mut prev = f64::INFINITY;
        for deg in 1..=90 {
            let r = angular_covariance(
                40f64.to_radians(),
                AngularSpread::from_degrees(deg as f64).unwrap(),
                ArraySpec::half_wavelength(4).unwrap(),
                &quad(),
            )
            .unwrap();
            let p = diagonalization_profile(&r);
            assert_eq!(p[0], 1.0);
            assert!(p[1] < prev, "AS {deg}: {} vs {prev}", p[1]);
            prev = p[1];
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(AngularSpread::new(-0.1).is_err());
        assert!(AngularSpread::new(3.2).is_err());
        assert!(ArraySpec::new(0, 0.5).is_err());
        assert!(ArraySpec::new(4, 0.0).is_err());
    }

    fn paper_scenario(m: usize, as_deg: f64) -> ScenarioCovariances<f64> {
        let cells = [CellSpec::new(0, 0.0), CellSpec::new(1, 200.0)];
        let layout = build_layout(&cells, 40.0, 50.0, 3.0, unit_gain_zeta(40.0, 3.0)).unwrap();
        ScenarioCovariances::build(
            &layout,
            AngularSpread::from_degrees(as_deg).unwrap(),
            ArraySpec::half_wavelength(m).unwrap(),
            1.0,
            1,
            &QuadratureSpec::new(64, 1e-10).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scenario_invariants_and_expanded_form() {
        for &as_deg in &[2.0, 10.0, 30.0, 70.0, 180.0] {
            let s = paper_scenario(10, as_deg);
            assert_eq!(s.link(0, 0).beta, 1.0);
            for ue in 0..2 {
                for bs in 0..2 {
                    let set = s.link(ue, bs);
                    assert_eq!(set.shifts.len(), 19);
                    assert!(shift_correlation_table(&set.r_phi).is_ok());
                    let expanded =
                        estimate_covariance_expanded(&set.filter, &s.priors_at(bs), 1.0, 1).unwrap();
                    let rel = (&expanded - &set.r_hat).frobenius_norm() / set.r_hat.frobenius_norm();
                    assert!(rel < 1e-9, "AS {as_deg} link ({ue},{bs}): {rel:e}");
                    let reduced = &set.r - &set.r_hat;
                    assert!(is_positive_semidefinite(&reduced, 1e-9));
                    assert!(set.r_hat.trace().re <= set.r.trace().re + 1e-9);
                }
            }
        }
    }

    #[test]
    fn csv_dump_has_every_entry() {
        let s = paper_scenario(3, 20.0);
        let mut buf = Vec::new();
        s.link(0, 1).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4 * 9);
        assert!(text.lines().nth(1).unwrap().starts_with("r_phi,0,0,1.0000000000000000e0,"));
    }

    #[test]
    fn single_precision_covariance() {
        let r = angular_covariance(
            0.3f32,
            AngularSpread::new(std::f32::consts::PI).unwrap(),
            ArraySpec::half_wavelength(3).unwrap(),
            &QuadratureSpec::new(64, 1e-5).unwrap(),
        )
        .unwrap();
        assert!((r[(1, 0)].re - (-0.304_242_2f32)).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn filter_satisfies_normal_equations(
            m in 1usize..6,
            phi1 in 0.0f64..std::f64::consts::TAU,
            phi2 in 0.0f64..std::f64::consts::TAU,
            d1 in 0.01f64..3.0,
            d2 in 0.01f64..3.0,
            beta2 in 0.01f64..2.0,
            sigma2 in 0.01f64..10.0,
            tau in 1usize..4,
        ) {
            let a = ArraySpec::half_wavelength(m).unwrap();
            let r1 = angular_covariance(phi1, AngularSpread::new(d1).unwrap(), a, &quad()).unwrap();
            let r2 = angular_covariance(phi2, AngularSpread::new(d2).unwrap(), a, &quad()).unwrap().scale(beta2);
            let f = lmmse_filter(&r1, &[&r1, &r2], sigma2, tau).unwrap();
            // R̃ (σ²I + τ ΣR) = R
            let sum = &(&r1 + &r2).scale(tau as f64) + &CMatrix::identity(m).scale(sigma2);
            let back = f.matmul(&sum);
            prop_assert!((&back - &r1).frobenius_norm() <= 1e-10 * (1.0 + r1.frobenius_norm()));
        }
    }
}
