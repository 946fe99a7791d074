//! Named figure presets with landmark checks.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use thiserror::Error;

use super::config::{Engine, Precoder, ScenarioConfig};
use super::extrema::ExtremumKind;
use super::output::{emit_csv, fmt_f64, OutputError};
use super::sweep::{run_sweep, SweepError, SweepResult};
use crate::covariance::{shift_correlations, AngularSpread, ArraySpec, CovarianceError, ScenarioCovariances};
use crate::geometry::CellSpec;
use crate::hardening::{hardening_measure, hardening_sweep, HardeningCurve, HardeningError};
use crate::montecarlo::{angle_samples, AngleMode, CsiMode, McConfig, McError, McScenario, PrecoderKind};
use crate::numerics::{QuadratureSpec, DEFAULT_ABS_TOL, MIN_NODES};

/// UE angles of the interfering cells in the multi-cell preset, by slot.
pub const MULTI_CELL_UE_ANGLES_DEG: [f64; 4] = [200.0, 160.0, 360.0, 60.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Off-diagonal magnitude of the angular covariance versus AS.
    Fig2,
    /// Angle between precoder and interfering channel.
    Fig3,
    /// Channel hardening measure.
    Fig4,
    /// EBF rates.
    Fig5,
    /// EBF power terms.
    Fig6,
    /// RZF rates.
    Fig7,
    /// Rates for three interferer positions.
    Fig8,
    /// Power terms for three interferer positions.
    Fig9,
    /// Rates with 2, 3 and 5 cells.
    Fig10,
}

impl Figure {
    pub const ALL: [Figure; 9] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9,
        Figure::Fig10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
            Figure::Fig10 => "fig10",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}` (expected fig2 .. fig10)"))
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Covariance(#[from] CovarianceError),
    #[error(transparent)]
    Hardening(#[from] HardeningError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    /// Monte Carlo realizations per point.
    pub n_realizations: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            n_realizations: 100_000,
            seed: 1,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl LandmarkCheck {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for LandmarkCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct FigureReport {
    pub figure: Figure,
    pub files: Vec<PathBuf>,
    pub checks: Vec<LandmarkCheck>,
}

impl FigureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// The default AS grid: 2° to 70° in 2° steps.
pub fn default_as_grid() -> Vec<f64> {
    (1..=35).map(|k| 2.0 * k as f64).collect()
}

fn two_cell(theta: f64, m_grid: Vec<usize>, precoders: Vec<Precoder>, engines: Vec<Engine>, opts: &ReportOptions) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::two_cell(theta, m_grid, default_as_grid());
    cfg.precoders = precoders;
    cfg.engines = engines;
    cfg.n_realizations = opts.n_realizations;
    cfg.seed = opts.seed;
    cfg
}

/// Reference multi-cell scenario with the first `n_cells` cells.
pub fn multi_cell_config(n_cells: usize, m_grid: Vec<usize>, as_grid_deg: Vec<f64>) -> ScenarioConfig {
    assert!((1..=5).contains(&n_cells));
    let mut cfg = ScenarioConfig::two_cell(MULTI_CELL_UE_ANGLES_DEG[0], m_grid, as_grid_deg);
    cfg.cells = std::iter::once(CellSpec::new(0, 0.0))
        .chain((1..n_cells).map(|k| CellSpec::new(k, MULTI_CELL_UE_ANGLES_DEG[k - 1])))
        .collect();
    cfg
}

/// The sweep configurations a figure runs, labelled for output folders.
pub fn preset_configs(fig: Figure, opts: &ReportOptions) -> Vec<(String, ScenarioConfig)> {
    use Engine::*;
    use Precoder::*;
    match fig {
        Figure::Fig5 => vec![("ebf".into(), two_cell(200.0, vec![10, 20, 50, 100], vec![Ebf], vec![Analytic, MonteCarlo], opts))],
        Figure::Fig6 => vec![("ebf".into(), two_cell(200.0, vec![10, 20], vec![Ebf], vec![Analytic, MonteCarlo], opts))],
        Figure::Fig7 => vec![("rzf".into(), two_cell(200.0, vec![10, 20, 50, 100], vec![Rzf], vec![MonteCarlo], opts))],
        Figure::Fig8 => [180.0, 200.0, 220.0]
            .into_iter()
            .map(|t| (format!("theta{t}"), two_cell(t, vec![10, 50], vec![Ebf, Rzf], vec![Analytic, MonteCarlo], opts)))
            .collect(),
        Figure::Fig9 => [180.0, 200.0, 220.0]
            .into_iter()
            .map(|t| (format!("theta{t}"), two_cell(t, vec![10], vec![Ebf], vec![Analytic, MonteCarlo], opts)))
            .collect(),
        Figure::Fig10 => [2, 3, 5]
            .into_iter()
            .map(|n| {
                let mut cfg = multi_cell_config(n, vec![10, 50], default_as_grid());
                cfg.precoders = vec![Ebf, Rzf];
                cfg.engines = vec![Analytic, MonteCarlo];
                cfg.n_realizations = opts.n_realizations;
                cfg.seed = opts.seed;
                (format!("cells{n}"), cfg)
            })
            .collect(),
        Figure::Fig2 | Figure::Fig3 | Figure::Fig4 => Vec::new(),
    }
}

/// Runs a figure, writes its CSVs under `out/<figN>/` and evaluates its
/// landmarks.
pub fn report_figure(fig: Figure, out: &Path, opts: &ReportOptions) -> Result<FigureReport, ReportError> {
    let dir = out.join(fig.name());
    std::fs::create_dir_all(&dir).map_err(|source| ReportError::Io {
        path: dir.clone(),
        source,
    })?;
    let (files, checks) = match fig {
        Figure::Fig2 => covariance_figure(&dir)?,
        Figure::Fig3 => angle_figure(&dir, opts)?,
        Figure::Fig4 => hardening_figure(&dir)?,
        _ => {
            let mut files = Vec::new();
            let mut results = Vec::new();
            for (label, cfg) in preset_configs(fig, opts) {
                info!("{fig}/{label}: {} points", cfg.m_grid.len() * cfg.as_grid_deg.len());
                let res = run_sweep(&cfg, opts.workers)?;
                files.extend(emit_csv(&res, &dir.join(&label))?);
                results.push(res);
            }
            let checks = match fig {
                Figure::Fig5 => fig5_checks(&results[0]),
                Figure::Fig6 => fig6_checks(&results[0]),
                Figure::Fig7 => fig7_checks(&results[0]),
                Figure::Fig8 => fig8_checks(&results),
                Figure::Fig9 => fig9_checks(&results),
                _ => fig10_checks(&results),
            };
            (files, checks)
        }
    };
    Ok(FigureReport {
        figure: fig,
        files,
        checks,
    })
}

fn create(path: PathBuf) -> Result<(BufWriter<File>, PathBuf), ReportError> {
    let f = File::create(&path).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((BufWriter::new(f), path))
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn quad() -> QuadratureSpec<f64> {
    QuadratureSpec::new(MIN_NODES, DEFAULT_ABS_TOL).expect("valid quadrature")
}

fn covariance_figure(dir: &Path) -> Result<(Vec<PathBuf>, Vec<LandmarkCheck>), ReportError> {
    let (mut w, path) = create(dir.join("covariance.csv"))?;
    writeln!(w, "m,mean_angle_deg,as_deg,abs_e1,abs_e_last").map_err(io(&path))?;
    let grid: Vec<f64> = (1..=90).map(f64::from).collect();
    let mut checks = Vec::new();
    let mut last_mean = Vec::new();
    for m in [10usize, 50] {
        for mean_deg in [0.0f64, 40.0] {
            let mut e1 = Vec::new();
            let mut elast = Vec::new();
            for &a in &grid {
                let spread = AngularSpread::from_degrees(a)?;
                let e = shift_correlations(mean_deg.to_radians(), spread, 0.5, m, &quad())?;
                e1.push(e.as_slice()[1].norm());
                elast.push(e.as_slice()[m - 1].norm());
                writeln!(w, "{m},{},{},{},{}", fmt_f64(mean_deg), fmt_f64(a), fmt_f64(e1[e1.len() - 1]), fmt_f64(elast[elast.len() - 1]))
                    .map_err(io(&path))?;
            }
            let first = e1[0];
            let end = e1[e1.len() - 1];
            checks.push(LandmarkCheck::new(
                format!("fig2 M={m} mean {mean_deg} deg: |E(1)| shrinks with AS"),
                end < first,
                format!("|E(1)| = {first:.4} at 1 deg, {end:.4} at 90 deg"),
            ));
            last_mean.push((m, mean_deg, elast.iter().sum::<f64>() / elast.len() as f64));
        }
    }
    for mean_deg in [0.0, 40.0] {
        let at = |m| last_mean.iter().find(|x| x.0 == m && x.1 == mean_deg).unwrap().2;
        checks.push(LandmarkCheck::new(
            format!("fig2 mean {mean_deg} deg: larger array is more diagonal"),
            at(50) < at(10),
            format!("average |E(M-1)|: {:.4} (M=10), {:.4} (M=50)", at(10), at(50)),
        ));
    }
    w.flush().map_err(io(&path))?;
    Ok((vec![path], checks))
}

fn angle_figure(dir: &Path, opts: &ReportOptions) -> Result<(Vec<PathBuf>, Vec<LandmarkCheck>), ReportError> {
    let mut files = Vec::new();
    let mut means = Vec::new();
    let n = opts.n_realizations.max(crate::montecarlo::MIN_ANGLE_REALIZATIONS);
    for m in [10usize, 50] {
        for sigma2 in [1.0, 0.01] {
            for as_deg in [5.0, 50.0] {
                let mut cfg = ScenarioConfig::two_cell(200.0, vec![m], vec![as_deg]);
                cfg.gamma = 2.0;
                cfg.zeta = crate::geometry::unit_gain_zeta(cfg.r1, cfg.gamma);
                cfg.sigma2 = sigma2;
                let layout = cfg.layout().map_err(SweepError::from)?;
                let spread = AngularSpread::from_degrees(as_deg)?;
                let array = ArraySpec::new(m, cfg.spacing_ratio)?;
                let cov = ScenarioCovariances::build(&layout, spread, array, sigma2, cfg.tau, &quad())?;
                let sc = McScenario {
                    layout: &layout,
                    cov: &cov,
                    spread,
                    array,
                    n_paths: cfg.n_paths,
                };
                let mc = McConfig {
                    n_realizations: n,
                    batches: crate::montecarlo::DEFAULT_BATCHES,
                    seed: opts.seed,
                    precoder: PrecoderKind::Ebf,
                    csi: CsiMode::Estimated,
                };
                for (label, mode) in [("perfect", AngleMode::PerfectCsi), ("estimated", AngleMode::Estimated)] {
                    let samples = angle_pool(|| angle_samples(&sc, 0, 1, mode, &mc), opts.workers)?;
                    let hist = samples.histogram(90);
                    let snr_db = (-10.0 * sigma2.log10()).round();
                    let (mut w, path) = create(dir.join(format!("angle_m{m}_snr{snr_db}_as{as_deg}_{label}.csv")))?;
                    hist.write_csv(&mut w).map_err(io(&path))?;
                    w.flush().map_err(io(&path))?;
                    files.push(path);
                    means.push((m, sigma2, as_deg, label, samples.mean().to_degrees()));
                }
            }
        }
    }
    let get = |m, s2: f64, a: f64, l: &str| {
        means
            .iter()
            .find(|x| x.0 == m && x.1 == s2 && x.2 == a && x.3 == l)
            .map(|x| x.4)
            .unwrap()
    };
    let (est, perf) = (get(10, 1.0, 50.0, "estimated"), get(10, 1.0, 50.0, "perfect"));
    let checks = vec![LandmarkCheck::new(
        "fig3 M=10 AS=50: estimated-CSI angles lean toward 0 deg",
        est < perf,
        format!("mean angle {est:.3} deg (estimated) vs {perf:.3} deg (perfect)"),
    )];
    Ok((files, checks))
}

fn angle_pool<T: Send>(f: impl FnOnce() -> Result<T, McError> + Send, workers: Option<usize>) -> Result<T, ReportError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| ReportError::Sweep(SweepError::Workers(workers.unwrap_or(0), e.to_string())))?;
    Ok(pool.install(f)?)
}

fn hardening_figure(dir: &Path) -> Result<(Vec<PathBuf>, Vec<LandmarkCheck>), ReportError> {
    let (mut w, path) = create(dir.join("hardening.csv"))?;
    writeln!(w, "m,n_paths,curve,as_deg,measure").map_err(io(&path))?;
    let grid: Vec<f64> = (1..=90).map(f64::from).collect();
    let spreads = grid
        .iter()
        .map(|&a| AngularSpread::from_degrees(a))
        .collect::<Result<Vec<_>, _>>()?;
    let n_paths = 50;
    let mut finite = Vec::new();
    let mut checks = Vec::new();
    for (m, curve) in [
        (10usize, HardeningCurve::Finite),
        (50, HardeningCurve::Finite),
        (100, HardeningCurve::Finite),
        (100, HardeningCurve::PathLimit),
    ] {
        let pts = hardening_sweep(m, n_paths, curve, 0.0, &spreads, 0.5, &quad())?;
        let label = match curve {
            HardeningCurve::Finite => "finite",
            HardeningCurve::PathLimit => "path-limit",
        };
        for (p, &a) in pts.iter().zip(&grid) {
            writeln!(w, "{m},{n_paths},{label},{},{}", fmt_f64(a), fmt_f64(p.measure)).map_err(io(&path))?;
        }
        if curve == HardeningCurve::Finite {
            let zero = shift_correlations(0.0, AngularSpread::new(0.0)?, 0.5, m, &quad())?;
            let at_zero = hardening_measure(m, n_paths, zero.as_slice());
            checks.push(LandmarkCheck::new(
                format!("fig4 M={m}: measure is 1 without spread"),
                (at_zero - 1.0).abs() <= 1e-12,
                format!("|measure - 1| = {:.2e}", (at_zero - 1.0).abs()),
            ));
            let values: Vec<f64> = pts.iter().map(|p| p.measure).collect();
            let rise = values.windows(2).map(|v| v[1] - v[0]).fold(f64::NEG_INFINITY, f64::max);
            checks.push(LandmarkCheck::new(
                format!("fig4 M={m}: non-increasing over 1..90 deg"),
                rise <= 0.0,
                format!("largest step up {rise:.3e}"),
            ));
            finite.push(values);
        }
    }
    let ordered = (0..grid.len()).all(|k| finite[0][k] > finite[1][k] && finite[1][k] > finite[2][k]);
    checks.push(LandmarkCheck::new(
        "fig4: decreasing in M at every AS",
        ordered,
        "M = 10 > 50 > 100 pointwise",
    ));
    w.flush().map_err(io(&path))?;
    Ok((vec![path], checks))
}

fn rates(res: &SweepResult, precoder: Precoder, engine: Engine, m: usize) -> Vec<(f64, f64)> {
    res.curve(precoder, engine, m)
        .iter()
        .map(|r| (r.as_deg, r.powers.rate_bps_hz))
        .collect()
}

fn extremum_near(res: &SweepResult, precoder: Precoder, m: usize, kind: ExtremumKind, lo: f64, hi: f64, name: String) -> LandmarkCheck {
    let found = res.extrema_of(precoder, m, kind);
    let hit = found.iter().any(|e| e.as_deg >= lo - 1e-9 && e.as_deg <= hi + 1e-9);
    let at: Vec<String> = found.iter().map(|e| format!("{}", e.as_deg)).collect();
    LandmarkCheck::new(
        name,
        hit,
        format!("{kind} flagged at [{}] deg, expected within [{lo}, {hi}]", at.join(", ")),
    )
}

fn non_decreasing_beyond(curve: &[(f64, f64)], from_deg: f64) -> (bool, f64) {
    let tail: Vec<f64> = curve.iter().filter(|p| p.0 >= from_deg).map(|p| p.1).collect();
    let worst = tail.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    (worst <= 0.0, worst)
}

fn fig5_checks(res: &SweepResult) -> Vec<LandmarkCheck> {
    let mut out = vec![extremum_near(
        res,
        Precoder::Ebf,
        10,
        ExtremumKind::Min,
        26.0,
        30.0,
        "fig5 EBF M=10: rate minimum at 28 +/- 2 deg".into(),
    )];
    for m in [20, 50, 100] {
        let (ok, worst) = non_decreasing_beyond(&rates(res, Precoder::Ebf, Engine::Analytic, m), 10.0);
        out.push(LandmarkCheck::new(
            format!("fig5 EBF M={m}: non-decreasing beyond 10 deg"),
            ok,
            format!("largest drop {worst:.3e}"),
        ));
    }
    out
}

fn power_at(res: &SweepResult, m: usize, as_deg: f64) -> Option<crate::analytic::PowerBreakdown<f64>> {
    res.curve(Precoder::Ebf, Engine::Analytic, m)
        .iter()
        .find(|r| (r.as_deg - as_deg).abs() < 1e-9)
        .map(|r| r.powers)
}

fn fig6_checks(res: &SweepResult) -> Vec<LandmarkCheck> {
    let mut out = Vec::new();
    for m in [10, 20] {
        let curve = res.curve(Precoder::Ebf, Engine::Analytic, m);
        let (Some(p50), Some(p10), Some(p60)) = (power_at(res, m, 50.0), power_at(res, m, 10.0), power_at(res, m, 60.0)) else {
            continue;
        };
        let small = curve
            .iter()
            .filter(|r| r.as_deg <= 8.0)
            .map(|r| r.powers.intercell)
            .fold(0.0, f64::max);
        out.push(LandmarkCheck::new(
            format!("fig6 EBF M={m}: intercell at AS <= 8 deg below 1% of its AS = 50 deg value"),
            small < 0.01 * p50.intercell,
            format!("max {small:.4e} vs 1% of {:.4e} (ratio {:.2}%)", p50.intercell, 100.0 * small / p50.intercell),
        ));
        out.push(LandmarkCheck::new(
            format!("fig6 EBF M={m}: self-interference smaller at 60 deg than at 10 deg"),
            p60.self_interference < p10.self_interference,
            format!("{:.4e} (60 deg) vs {:.4e} (10 deg)", p60.self_interference, p10.self_interference),
        ));
    }
    out
}

fn fig7_checks(res: &SweepResult) -> Vec<LandmarkCheck> {
    let mut out = Vec::new();
    for m in [10, 20] {
        out.push(extremum_near(res, Precoder::Rzf, m, ExtremumKind::Min, 28.0, 34.0, format!("fig7 RZF M={m}: minimum near 31 deg")));
    }
    for m in [50, 100] {
        out.push(extremum_near(res, Precoder::Rzf, m, ExtremumKind::Max, 12.0, 19.0, format!("fig7 RZF M={m}: maximum near 15-16 deg")));
    }
    out
}

fn fig8_checks(results: &[SweepResult]) -> Vec<LandmarkCheck> {
    vec![extremum_near(
        &results[2],
        Precoder::Ebf,
        50,
        ExtremumKind::Min,
        9.0,
        13.0,
        "fig8 EBF theta=220 M=50: minimum near 11 deg".into(),
    )]
}

fn fig9_checks(results: &[SweepResult]) -> Vec<LandmarkCheck> {
    let at50: Vec<_> = results.iter().filter_map(|r| power_at(r, 10, 50.0)).collect();
    if at50.len() != 3 {
        return Vec::new();
    }
    vec![
        LandmarkCheck::new(
            "fig9 EBF M=10 AS=50: intercell grows with theta",
            at50[0].intercell < at50[1].intercell && at50[1].intercell < at50[2].intercell,
            format!("{:.4e}, {:.4e}, {:.4e} for theta 180, 200, 220", at50[0].intercell, at50[1].intercell, at50[2].intercell),
        ),
        LandmarkCheck::new(
            "fig9 EBF M=10 AS=50: signal shrinks with theta",
            at50[0].signal > at50[1].signal && at50[1].signal > at50[2].signal,
            format!("{:.4e}, {:.4e}, {:.4e} for theta 180, 200, 220", at50[0].signal, at50[1].signal, at50[2].signal),
        ),
    ]
}

/// Largest increase of the analytic EBF rate when going from `fewer` to
/// `more` cells, over every shared `(M, AS)` point.
pub fn worst_rate_gain(fewer: &SweepResult, more: &SweepResult) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for a in fewer.rows.iter().filter(|r| r.engine == Engine::Analytic && r.precoder == Precoder::Ebf) {
        if let Some(b) = more
            .rows
            .iter()
            .find(|b| b.engine == Engine::Analytic && b.precoder == Precoder::Ebf && b.m == a.m && b.as_deg == a.as_deg)
        {
            worst = worst.max(b.powers.rate_bps_hz - a.powers.rate_bps_hz);
        }
    }
    worst
}

fn fig10_checks(results: &[SweepResult]) -> Vec<LandmarkCheck> {
    let g23 = worst_rate_gain(&results[0], &results[1]);
    let g35 = worst_rate_gain(&results[1], &results[2]);
    vec![LandmarkCheck::new(
        "fig10 EBF: adding cells never raises the rate",
        g23 <= 0.0 && g35 <= 0.0,
        format!("largest change 2->3 cells {g23:.3e}, 3->5 cells {g35:.3e}"),
    )]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert!("fig1".parse::<Figure>().is_err());
        assert!("fig11".parse::<Figure>().is_err());
    }

    #[test]
    fn presets_validate() {
        let opts = ReportOptions::default();
        for f in Figure::ALL {
            for (_, cfg) in preset_configs(f, &opts) {
                cfg.validate().unwrap();
            }
        }
        let five = multi_cell_config(5, vec![10], vec![10.0]);
        assert_eq!(five.cells.len(), 5);
        assert_eq!(five.cells[3].ue_angle_deg, 0.0);
        assert_eq!(default_as_grid().len(), 35);
    }

    #[test]
    fn fig2_and_fig4_write_and_check() {
        let dir = tempfile::tempdir().unwrap();
        for f in [Figure::Fig2, Figure::Fig4] {
            let rep = report_figure(f, dir.path(), &ReportOptions::default()).unwrap();
            assert!(rep.passed(), "{:?}", rep.checks);
            assert!(rep.files.iter().all(|p| p.exists()));
        }
    }
}
