//! Interior extrema of a sampled curve.
//!
//! A point `k` is a minimum when some point to its left and some point to
//! its right both exceed it by more than a threshold, and no point in
//! between is lower (ties go to the leftmost point). Maxima are the mirror
//! image. With a zero threshold this is the usual sign change of the
//! discrete slope, plateaus included. With standard errors the threshold
//! for a pair `(a, b)` is `2·sqrt(se_a² + se_b²)`, so noise alone does not
//! produce a flag.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Min,
    Max,
}

impl fmt::Display for ExtremumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtremumKind::Min => "min",
            ExtremumKind::Max => "max",
        })
    }
}

impl std::str::FromStr for ExtremumKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(ExtremumKind::Min),
            "max" => Ok(ExtremumKind::Max),
            other => Err(format!("unknown extremum kind `{other}`")),
        }
    }
}

/// Number of combined standard errors a neighbour must clear.
pub const PROMINENCE_SIGMAS: f64 = 2.0;

/// Indices and kinds of the interior extrema of `y`, in index order.
///
/// `stderr`, when given, must have the same length as `y`.
pub fn find_extrema(y: &[f64], stderr: Option<&[f64]>) -> Vec<(usize, ExtremumKind)> {
    if let Some(se) = stderr {
        assert_eq!(se.len(), y.len(), "stderr length");
    }
    let th = |a: usize, b: usize| match stderr {
        Some(se) => PROMINENCE_SIGMAS * se[a].hypot(se[b]),
        None => 0.0,
    };
    let mut out = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        for kind in [ExtremumKind::Min, ExtremumKind::Max] {
            // orient so that a minimum is always sought
            let v = |i: usize| match kind {
                ExtremumKind::Min => y[i],
                ExtremumKind::Max => -y[i],
            };
            let left = (0..k)
                .rev()
                .take_while(|&i| v(i) > v(k))
                .any(|i| v(i) - v(k) > th(i, k));
            if !left {
                continue;
            }
            let right = (k + 1..y.len())
                .take_while(|&i| v(i) >= v(k))
                .any(|i| v(i) - v(k) > th(i, k));
            if right {
                out.push((k, kind));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn monotone_inputs_never_fire() {
        let up: Vec<f64> = (0..40).map(|k| (k as f64).sqrt()).collect();
        let down: Vec<f64> = up.iter().map(|v| -v).collect();
        let stairs: Vec<f64> = (0..40).map(|k| (k / 5) as f64).collect();
        for y in [&up, &down, &stairs] {
            assert!(find_extrema(y, None).is_empty());
            assert!(find_extrema(y, Some(&vec![0.1; y.len()])).is_empty());
        }
        assert!(find_extrema(&[1.0, 2.0], None).is_empty());
        assert!(find_extrema(&[], None).is_empty());
    }

    #[test]
    fn parabola_fires_at_vertex() {
        let y: Vec<f64> = (0..35).map(|k| ((k as f64) - 13.0).powi(2)).collect();
        assert_eq!(find_extrema(&y, None), vec![(13, ExtremumKind::Min)]);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_eq!(find_extrema(&neg, None), vec![(13, ExtremumKind::Max)]);
        assert_eq!(find_extrema(&y, Some(&vec![1.0; y.len()])), vec![(13, ExtremumKind::Min)]);
    }

    #[test]
    fn plateau_reports_leftmost_point() {
        let y = [3.0, 1.0, 1.0, 1.0, 3.0];
        assert_eq!(find_extrema(&y, None), vec![(1, ExtremumKind::Min)]);
    }

    #[test]
    fn wiggle_and_edges() {
        let y = [5.0, 1.0, 1.5, 1.2, 5.0];
        assert_eq!(
            find_extrema(&y, None),
            vec![(1, ExtremumKind::Min), (2, ExtremumKind::Max), (3, ExtremumKind::Min)]
        );
        // the bump is within noise
        assert_eq!(find_extrema(&y, Some(&[0.2; 5])), vec![(1, ExtremumKind::Min)]);
        // minimum at the boundary is not interior
        assert!(find_extrema(&[0.0, 1.0, 2.0, 3.0], None).is_empty());
    }

    #[test]
    fn noisy_monotone_is_suppressed_by_stderr() {
        // independent noise of 2.5x the per-step rise
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let se = 0.05;
        let noise = Normal::new(0.0, se).unwrap();
        let (mut raw_clean, mut se_clean) = (0, 0);
        for _ in 0..400 {
            let y: Vec<f64> = (0..30).map(|k| 0.02 * k as f64 + noise.sample(&mut rng)).collect();
            raw_clean += usize::from(find_extrema(&y, None).is_empty());
            se_clean += usize::from(find_extrema(&y, Some(&vec![se; 30])).is_empty());
        }
        assert!(raw_clean < 20, "{raw_clean}");
        assert!(se_clean > 200, "{se_clean}");
    }

    #[test]
    fn noisy_parabola_still_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let y: Vec<f64> = (0..35).map(|k| 0.01 * ((k as f64) - 15.0).powi(2) + noise.sample(&mut rng)).collect();
        let found = find_extrema(&y, Some(&vec![0.05; 35]));
        let mins: Vec<usize> = found.iter().filter(|e| e.1 == ExtremumKind::Min).map(|e| e.0).collect();
        assert!(mins.iter().any(|&k| (12..=18).contains(&k)), "{found:?}");
    }
}
