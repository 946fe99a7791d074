//! Independent reference functions used only by tests. Shared between
//! unit tests and the integration suites via `#[path]`.
#![allow(dead_code)]

/// `J₀(x)` by Miller's backward recurrence normalised with
/// `J₀ + 2 Σ J₂ₖ = 1`. Accurate to ~1e-15 absolute for the range used here.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    if x < 8.0 {
        return bessel_j0_series(x);
    }
    let mut start = (1.5 * x + 60.0) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
        // j_cur now holds J_{k-1}
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j_cur;
        }
        if k == 1 {
            j0 = j_cur;
        }
    }
    norm += j0;
    j0 / norm
}

/// Power series `Σ (-1)^k (x/2)^{2k} / (k!)²`; fine for small arguments.
pub fn bessel_j0_series(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Angle between independent iid complex Gaussian `n`-vectors:
/// density `2(n-1) sin^{2n-3}φ cos φ` on `[0, π/2]`.
pub fn loyka_pdf(phi: f64, n: usize) -> f64 {
    let n = n as f64;
    2.0 * (n - 1.0) * phi.sin().powf(2.0 * n - 3.0) * phi.cos()
}

/// CDF of [`loyka_pdf`]: `sin^{2(n-1)} φ`.
pub fn loyka_cdf(phi: f64, n: usize) -> f64 {
    phi.sin().powi(2 * (n as i32 - 1))
}

#[cfg(test)]
mod tests {
    #[allow(unused_imports)]
    use super::*;

    #[test]
    fn miller_agrees_with_series() {
        for &x in &[0.5, 1.0, 2.404825557695773, 5.0, 7.9] {
            assert!((bessel_j0(x) - bessel_j0_series(x)).abs() < 1e-14);
        }
        let mut x: f64 = 8.0;
        while x < 14.0 {
            // series still usable here with some cancellation
            assert!((bessel_j0(x) - bessel_j0_series(x)).abs() < 1e-11, "x={x}");
            x += 0.37;
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_j0(std::f64::consts::PI) - (-0.304_242_177_644_093_9)).abs() < 1e-14);
        // first zero
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-14);
        // large-argument asymptotic check: J0(300) ≈ sqrt(2/(πx)) cos(x - π/4)
        let x = 300.0;
        let asym = (2.0 / (std::f64::consts::PI * x)).sqrt() * (x - std::f64::consts::FRAC_PI_4).cos();
        assert!((bessel_j0(x) - asym).abs() < 1e-4);
    }
}
