//! Sweeps over array size, angular spread, precoder and engine.

use log::{debug, info};
use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, Engine, Precoder, ScenarioConfig};
use super::extrema::{find_extrema, ExtremumKind};
use crate::analytic::{ergodic_rate_point, MomentPath, PowerBreakdown};
use crate::covariance::{AngularSpread, ArraySpec, ScenarioCovariances};
use crate::geometry::Point;
use crate::montecarlo::{estimate_powers, CsiMode, McConfig, McScenario};
use crate::numerics::{QuadratureSpec, MIN_NODES};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot start {0} workers: {1}")]
    Workers(usize, String),
    #[error("point M = {m}, AS = {as_deg} deg, {what} failed: {message}")]
    Point {
        m: usize,
        as_deg: f64,
        what: String,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub as_deg: f64,
    pub precoder: Precoder,
    pub engine: Engine,
    pub powers: PowerBreakdown<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub as_deg: f64,
    pub rate: f64,
    pub m: usize,
    pub precoder: Precoder,
    /// Curve the extremum was detected on.
    pub engine: Engine,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: ScenarioConfig,
    pub bs_positions: Vec<Point>,
    /// Sorted by `(precoder, m, as_deg, engine)`.
    pub rows: Vec<SweepRow>,
    pub extrema: Vec<Extremum>,
}

impl SweepResult {
    /// Rows of one curve, in AS order.
    pub fn curve(&self, precoder: Precoder, engine: Engine, m: usize) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.precoder == precoder && r.engine == engine && r.m == m)
            .collect()
    }

    pub fn extrema_of(&self, precoder: Precoder, m: usize, kind: ExtremumKind) -> Vec<&Extremum> {
        self.extrema
            .iter()
            .filter(|e| e.precoder == precoder && e.m == m && e.kind == kind)
            .collect()
    }
}

pub const WORKERS_ENV: &str = "SPREADRATE_WORKERS";

/// Worker count: the explicit value, else [`WORKERS_ENV`] when it holds a
/// positive integer.
pub fn resolve_workers(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
    })
}

/// Evaluates every `(M, AS, precoder, engine)` point of the config on a
/// pool of `workers` threads (default: the config's `workers`, else
/// rayon's default). The result does not depend on the worker count.
pub fn run_sweep(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    let layout = cfg.layout()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or(cfg.workers) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SweepError::Workers(workers.unwrap_or(0), e.to_string()))?;

    let mut tasks: Vec<(Precoder, Engine)> = Vec::new();
    for &p in &cfg.precoders {
        for &e in &cfg.engines {
            if p == Precoder::Rzf && e == Engine::Analytic {
                info!("no closed form for RZF; running it with the Monte Carlo engine only");
                continue;
            }
            tasks.push((p, e));
        }
    }
    if tasks.is_empty() {
        info!("nothing to evaluate after skipping analytic RZF");
    }
    let points: Vec<(usize, f64)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| cfg.as_grid_deg.iter().map(move |&a| (m, a)))
        .collect();

    let per_point: Vec<Vec<SweepRow>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(m, as_deg)| {
                let fail = |what: &str, message: String| SweepError::Point {
                    m,
                    as_deg,
                    what: what.to_string(),
                    message,
                };
                let spread = AngularSpread::from_degrees(as_deg).map_err(|e| fail("spread", e.to_string()))?;
                let array = ArraySpec::new(m, cfg.spacing_ratio).map_err(|e| fail("array", e.to_string()))?;
                let quad = QuadratureSpec::new(MIN_NODES, cfg.quadrature_tol).map_err(|e| fail("quadrature", e.to_string()))?;
                let cov = ScenarioCovariances::build(&layout, spread, array, cfg.sigma2, cfg.tau, &quad)
                    .map_err(|e| fail("covariance", e.to_string()))?;
                let mut rows = Vec::with_capacity(tasks.len());
                for &(precoder, engine) in &tasks {
                    let powers = match engine {
                        Engine::Analytic => ergodic_rate_point(&cov, cfg.desired, cfg.n_paths, MomentPath::Fast)
                            .map_err(|e| fail("analytic", e.to_string()))?,
                        Engine::MonteCarlo => {
                            let sc = McScenario {
                                layout: &layout,
                                cov: &cov,
                                spread,
                                array,
                                n_paths: cfg.n_paths,
                            };
                            let mc = McConfig {
                                n_realizations: cfg.n_realizations,
                                batches: cfg.batches,
                                seed: cfg.seed,
                                precoder: precoder.kind(),
                                csi: CsiMode::Estimated,
                            };
                            estimate_powers(&sc, cfg.desired, &mc)
                                .map_err(|e| fail(&format!("monte-carlo {precoder}"), e.to_string()))?
                                .0
                        }
                    };
                    debug!("M={m} AS={as_deg} {precoder} {engine}: rate {:.6}", powers.rate_bps_hz);
                    rows.push(SweepRow {
                        m,
                        as_deg,
                        precoder,
                        engine,
                        powers,
                    });
                }
                Ok(rows)
            })
            .collect::<Result<_, SweepError>>()
    })?;

    let mut rows: Vec<SweepRow> = per_point.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.precoder, a.m)
            .cmp(&(b.precoder, b.m))
            .then(a.as_deg.total_cmp(&b.as_deg))
            .then(a.engine.cmp(&b.engine))
    });
    let extrema = detect_extrema(&rows, cfg);
    Ok(SweepResult {
        config: cfg.clone(),
        bs_positions: layout.bs_positions().to_vec(),
        rows,
        extrema,
    })
}

/// Extrema per `(precoder, M)`, on the analytic curve when there is one.
fn detect_extrema(rows: &[SweepRow], cfg: &ScenarioConfig) -> Vec<Extremum> {
    let mut out = Vec::new();
    let mut precoders = cfg.precoders.clone();
    precoders.sort();
    precoders.dedup();
    for &precoder in &precoders {
        for &m in &cfg.m_grid {
            let pick = |engine: Engine| -> Vec<&SweepRow> {
                rows.iter()
                    .filter(|r| r.precoder == precoder && r.m == m && r.engine == engine)
                    .collect()
            };
            let (engine, curve) = match pick(Engine::Analytic) {
                c if !c.is_empty() => (Engine::Analytic, c),
                _ => (Engine::MonteCarlo, pick(Engine::MonteCarlo)),
            };
            if curve.is_empty() {
                continue;
            }
            let y: Vec<f64> = curve.iter().map(|r| r.powers.rate_bps_hz).collect();
            let se: Vec<f64> = curve.iter().map(|r| r.powers.rate_se).collect();
            let found = match engine {
                Engine::Analytic => find_extrema(&y, None),
                Engine::MonteCarlo => find_extrema(&y, Some(&se)),
            };
            out.extend(found.into_iter().map(|(k, kind)| Extremum {
                kind,
                as_deg: curve[k].as_deg,
                rate: y[k],
                m,
                precoder,
                engine,
            }));
        }
    }
    out
}
