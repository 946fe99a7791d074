//! End-to-end checks through the public API.

use spreadrate::covariance::shift_correlations;
use spreadrate::hardening::{empirical_hardening, hardening_measure};
use spreadrate::montecarlo::{complex_normal, draw_channel, norm_sqr, RngStream};
use spreadrate::numerics::{DEFAULT_ABS_TOL, MIN_NODES};
use spreadrate::runner::{emit_csv, read_extrema, read_rows, run_sweep, Engine, Precoder, ScenarioConfig};
use spreadrate::{AngularSpread, ArraySpec, QuadratureSpec};

#[test]
fn empirical_hardening_matches_closed_form() {
    let cfg = ScenarioConfig::two_cell(200.0, vec![10], vec![20.0]);
    let layout = cfg.layout().unwrap();
    let link = layout.link(0, 0);
    let quad = QuadratureSpec::new(MIN_NODES, DEFAULT_ABS_TOL).unwrap();
    for (m, n_paths, as_deg) in [(10, 50, 20.0), (20, 5, 60.0), (4, 1, 10.0)] {
        let spread = AngularSpread::from_degrees(as_deg).unwrap();
        let array = ArraySpec::new(m, 0.5).unwrap();
        let norms: Vec<f64> = (0..200_000u64)
            .map(|r| {
                let mut rng = RngStream::new(21, r).rng();
                norm_sqr(&draw_channel(link, spread, array, n_paths, &mut rng).h)
            })
            .collect();
        let est = empirical_hardening(&norms).unwrap();
        let e = shift_correlations(link.los_angle, spread, 0.5, m, &quad).unwrap();
        let want = hardening_measure(m, n_paths, e.as_slice());
        assert!(
            (est.value - want).abs() <= 4.0 * est.stderr,
            "M={m} N_P={n_paths} AS={as_deg}: {} +/- {} vs {want}",
            est.value,
            est.stderr
        );
    }
}

#[test]
fn iid_channels_harden_as_one_over_m() {
    let m = 10;
    let norms: Vec<f64> = (0..1_000_000u64)
        .map(|r| {
            let mut rng = RngStream::new(4, r).rng();
            (0..m).map(|_| complex_normal(&mut rng, 1.0).norm_sqr()).sum()
        })
        .collect();
    let est = empirical_hardening(&norms).unwrap();
    assert!((est.value - 0.1).abs() <= 3.0 * est.stderr, "{est:?}");
}

#[test]
fn toml_to_csv_and_back() {
    let text = r#"
        [geometry]
        cells = [{ id = 0, ue_angle_deg = 0.0 }, { id = 1, ue_angle_deg = 220.0 }]
        [sweep]
        as_range_deg = { start = 4.0, stop = 20.0, step = 4.0 }
        m_grid = [6]
        precoders = ["ebf", "rzf"]
        engines = ["analytic", "mc"]
        [monte_carlo]
        n_realizations = 1000
        batches = 10
        seed = 17
    "#;
    let cfg = ScenarioConfig::from_toml_str(text).unwrap();
    let res = run_sweep(&cfg, Some(2)).unwrap();
    // RZF has no analytic engine
    assert_eq!(res.rows.len(), 5 * 3);
    assert!(res.rows.iter().all(|r| !(r.precoder == Precoder::Rzf && r.engine == Engine::Analytic)));
    let tmp = tempfile::tempdir().unwrap();
    let files = emit_csv(&res, tmp.path()).unwrap();
    assert_eq!(read_rows(&files[1]).unwrap(), res.rows);
    assert_eq!(read_extrema(&files[2]).unwrap(), res.extrema);
    let again = ScenarioConfig::from_toml_str(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
}
