use num_complex::Complex;
use num_traits::Zero;

use super::{NumericsError, Real};

/// Points per Gauss-Legendre panel in the composite rule.
const PANEL_ORDER: usize = 16;
/// Minimum total node count.
pub const MIN_NODES: usize = 64;
/// Upper bound for the doubling refinement.
const MAX_NODES: usize = 1 << 22;
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
}

/// How to integrate: rule, starting node count and absolute tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec<T> {
    pub rule: QuadratureRule,
    pub nodes: usize,
    pub abs_tol: T,
}

impl<T: Real> QuadratureSpec<T> {
    pub fn new(nodes: usize, abs_tol: T) -> Result<Self, NumericsError> {
        if nodes < 2 {
            return Err(NumericsError::InvalidQuadrature(format!(
                "need at least 2 nodes, got {nodes}"
            )));
        }
        if !(abs_tol > T::zero()) {
            return Err(NumericsError::InvalidQuadrature(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        Ok(Self {
            rule: QuadratureRule::GaussLegendre,
            nodes,
            abs_tol,
        })
    }

    /// Node count sized for integrands oscillating like `exp(-j c cos φ)`
    /// with `c ≤ c_max` over `[a, b]`: `max(64, ceil(8 (b-a) c_max / π))`.
    pub fn for_oscillation(a: T, b: T, c_max: T) -> Self {
        let scaled = (T::lit(8.0) * (b - a).abs() * c_max.abs() / T::PI()).ceil();
        let nodes = scaled.to_usize().unwrap_or(MAX_NODES).clamp(MIN_NODES, MAX_NODES);
        Self {
            rule: QuadratureRule::GaussLegendre,
            nodes,
            abs_tol: T::lit(DEFAULT_ABS_TOL),
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Roots of `P_n` by Newton iteration from the Tricomi initial guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let nf = T::from_count(n);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let eps = T::epsilon() * T::lit(4.0);
        for i in 0..n.div_ceil(2) {
            let mut x = (T::PI() * (T::from_count(i + 1) - T::lit(0.25)) / (nf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= eps {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != T::zero() {
                dp = d;
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// `∫_a^b f(φ) dφ` for a complex-valued `f`.
pub fn integrate_complex<T: Real>(
    mut f: impl FnMut(T) -> Complex<T>,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Result<Complex<T>, NumericsError> {
    let out = integrate_complex_many(|x, out| out[0] = f(x), 1, a, b, spec)?;
    Ok(out[0])
}

/// Integrates `len` complex integrands sharing the evaluation nodes. `f`
/// writes all `len` values at one abscissa into its output slice.
///
/// The composite rule starts from `spec.nodes` and doubles until two
/// successive estimates agree to `spec.abs_tol` in every component.
pub fn integrate_complex_many<T: Real>(
    mut f: impl FnMut(T, &mut [Complex<T>]),
    len: usize,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Result<Vec<Complex<T>>, NumericsError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::InvalidInterval {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    if spec.nodes < 2 || !(spec.abs_tol > T::zero()) {
        return Err(NumericsError::InvalidQuadrature(format!(
            "nodes {} abs_tol {}",
            spec.nodes, spec.abs_tol
        )));
    }
    let rule = GaussLegendre::<T>::new(PANEL_ORDER);
    let mut panels = spec.nodes.div_ceil(PANEL_ORDER).max(1);
    let mut coarse = composite(&mut f, len, a, b, panels, &rule)?;
    loop {
        panels *= 2;
        let fine = composite(&mut f, len, a, b, panels, &rule)?;
        let change = coarse
            .iter()
            .zip(&fine)
            .fold(T::zero(), |acc, (c, f)| acc.max((c - f).norm()));
        if change <= spec.abs_tol {
            return Ok(fine);
        }
        if panels * PANEL_ORDER >= MAX_NODES {
            return Err(NumericsError::NotConverged {
                nodes: panels * PANEL_ORDER,
                change: change.as_f64(),
            });
        }
        coarse = fine;
    }
}

fn composite<T: Real>(
    f: &mut impl FnMut(T, &mut [Complex<T>]),
    len: usize,
    a: T,
    b: T,
    panels: usize,
    rule: &GaussLegendre<T>,
) -> Result<Vec<Complex<T>>, NumericsError> {
    let mut total = vec![Complex::zero(); len];
    let mut values = vec![Complex::zero(); len];
    let width = (b - a) / T::from_count(panels);
    let half = width * T::lit(0.5);
    for p in 0..panels {
        let mid = a + width * (T::from_count(p) + T::lit(0.5));
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            let node = mid + half * x;
            f(node, &mut values);
            let scale = w * half;
            for (t, v) in total.iter_mut().zip(&values) {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(NumericsError::NonFinite { node: node.as_f64() });
                }
                *t = *t + v * scale;
            }
        }
    }
    Ok(total)
}
