//! Scenario files.
//!
//! A scenario is a TOML document with four tables:
//!
//! ```toml
//! [geometry]
//! cells = [{ id = 0, ue_angle_deg = 0.0 }, { id = 1, ue_angle_deg = 200.0 }]
//! r1 = 40.0            # UE distance to its BS, metres
//! r2 = 50.0            # hexagon side, metres
//! gamma = 3.0          # path-loss exponent
//! zeta = "auto"        # path-loss normalisation, "auto" = r1^gamma
//!
//! [channel]
//! sigma2 = 1.0
//! tau = 1
//! n_paths = 100
//! spacing_ratio = 0.5
//!
//! [sweep]
//! as_range_deg = { start = 2.0, stop = 70.0, step = 2.0 }   # or as_grid_deg = [...]
//! m_grid = [10, 20]
//! precoders = ["ebf", "rzf"]
//! engines = ["analytic", "monte-carlo"]
//!
//! [monte_carlo]
//! n_realizations = 100000
//! seed = 1
//! ```
//!
//! Only `geometry.cells`, `sweep.m_grid` and one of the AS grid keys are
//! required; everything else defaults to the 2-cell reference setup.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{build_layout, unit_gain_zeta, CellSpec, GeometryError, Layout, MAX_CELLS};
use crate::montecarlo::{PrecoderKind, DEFAULT_BATCHES, MIN_REALIZATIONS};
use crate::numerics::DEFAULT_ABS_TOL;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("invalid geometry: {0}")]
    Geometry(#[from] GeometryError),
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Analytic,
    #[serde(alias = "mc")]
    MonteCarlo,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "monte-carlo",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "mc" | "monte-carlo" => Ok(Engine::MonteCarlo),
            other => Err(format!("unknown engine `{other}` (expected analytic or mc)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precoder {
    Ebf,
    Rzf,
}

impl Precoder {
    pub fn kind(self) -> PrecoderKind {
        match self {
            Precoder::Ebf => PrecoderKind::Ebf,
            Precoder::Rzf => PrecoderKind::Rzf,
        }
    }
}

impl fmt::Display for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precoder::Ebf => "ebf",
            Precoder::Rzf => "rzf",
        })
    }
}

impl std::str::FromStr for Precoder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ebf" => Ok(Precoder::Ebf),
            "rzf" => Ok(Precoder::Rzf),
            other => Err(format!("unknown precoder `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub id: usize,
    pub ue_angle_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSetting {
    Value(f64),
    Keyword(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AsRange {
    /// `start, start + step, …` up to `stop` inclusive (with a small slack
    /// for rounding).
    pub fn expand(&self) -> Result<Vec<f64>, ConfigError> {
        if !(self.step > 0.0) || !(self.stop >= self.start) {
            return Err(invalid("sweep.as_range_deg", "need step > 0 and stop >= start"));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    cells: Vec<CellEntry>,
    #[serde(default = "defaults::r1")]
    r1: f64,
    #[serde(default = "defaults::r2")]
    r2: f64,
    #[serde(default = "defaults::gamma")]
    gamma: f64,
    #[serde(default = "defaults::zeta")]
    zeta: ZetaSetting,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    #[serde(default = "defaults::sigma2")]
    sigma2: f64,
    #[serde(default = "defaults::tau")]
    tau: usize,
    #[serde(default = "defaults::n_paths")]
    n_paths: usize,
    #[serde(default = "defaults::spacing_ratio")]
    spacing_ratio: f64,
    #[serde(default = "defaults::quadrature_tol")]
    quadrature_tol: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            sigma2: defaults::sigma2(),
            tau: defaults::tau(),
            n_paths: defaults::n_paths(),
            spacing_ratio: defaults::spacing_ratio(),
            quadrature_tol: defaults::quadrature_tol(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    as_grid_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    as_range_deg: Option<AsRange>,
    #[serde(default)]
    allow_zero_spread: bool,
    m_grid: Vec<usize>,
    #[serde(default = "defaults::precoders")]
    precoders: Vec<Precoder>,
    #[serde(default = "defaults::engines")]
    engines: Vec<Engine>,
    /// Index into `geometry.cells` of the UE whose rate is reported.
    #[serde(default)]
    desired: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonteCarloSection {
    #[serde(default = "defaults::n_realizations")]
    n_realizations: usize,
    #[serde(default = "defaults::seed")]
    seed: u64,
    #[serde(default = "defaults::batches")]
    batches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            n_realizations: defaults::n_realizations(),
            seed: defaults::seed(),
            batches: defaults::batches(),
            workers: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: GeometrySection,
    #[serde(default)]
    channel: ChannelSection,
    sweep: SweepSection,
    #[serde(default)]
    monte_carlo: MonteCarloSection,
}

mod defaults {
    use super::*;

    pub fn r1() -> f64 {
        40.0
    }
    pub fn r2() -> f64 {
        50.0
    }
    pub fn gamma() -> f64 {
        3.0
    }
    pub fn zeta() -> ZetaSetting {
        ZetaSetting::Keyword("auto".into())
    }
    pub fn sigma2() -> f64 {
        1.0
    }
    pub fn tau() -> usize {
        1
    }
    pub fn n_paths() -> usize {
        100
    }
    pub fn spacing_ratio() -> f64 {
        0.5
    }
    pub fn quadrature_tol() -> f64 {
        DEFAULT_ABS_TOL
    }
    pub fn precoders() -> Vec<Precoder> {
        vec![Precoder::Ebf]
    }
    pub fn engines() -> Vec<Engine> {
        vec![Engine::Analytic]
    }
    pub fn n_realizations() -> usize {
        100_000
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn batches() -> usize {
        DEFAULT_BATCHES
    }
}

/// A validated scenario with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub cells: Vec<CellSpec>,
    pub r1: f64,
    pub r2: f64,
    pub gamma: f64,
    /// Resolved path-loss normalisation.
    pub zeta: f64,
    pub sigma2: f64,
    pub tau: usize,
    pub n_paths: usize,
    pub spacing_ratio: f64,
    pub quadrature_tol: f64,
    pub as_grid_deg: Vec<f64>,
    pub allow_zero_spread: bool,
    pub m_grid: Vec<usize>,
    pub precoders: Vec<Precoder>,
    pub engines: Vec<Engine>,
    pub desired: usize,
    pub n_realizations: usize,
    pub seed: u64,
    pub batches: usize,
    pub workers: Option<usize>,
}

impl ScenarioConfig {
    /// Reference 2-cell setup with the interfering UE at `theta_deg`.
    pub fn two_cell(theta_deg: f64, m_grid: Vec<usize>, as_grid_deg: Vec<f64>) -> Self {
        let cfg = Self {
            cells: vec![CellSpec::new(0, 0.0), CellSpec::new(1, theta_deg)],
            r1: defaults::r1(),
            r2: defaults::r2(),
            gamma: defaults::gamma(),
            zeta: unit_gain_zeta(defaults::r1(), defaults::gamma()),
            sigma2: defaults::sigma2(),
            tau: defaults::tau(),
            n_paths: defaults::n_paths(),
            spacing_ratio: defaults::spacing_ratio(),
            quadrature_tol: defaults::quadrature_tol(),
            as_grid_deg,
            allow_zero_spread: false,
            m_grid,
            precoders: defaults::precoders(),
            engines: defaults::engines(),
            desired: 0,
            n_realizations: defaults::n_realizations(),
            seed: defaults::seed(),
            batches: defaults::batches(),
            workers: None,
        };
        debug_assert!(cfg.validate().is_ok());
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let g = raw.geometry;
        let zeta = match g.zeta {
            ZetaSetting::Value(v) => v,
            ZetaSetting::Keyword(ref k) if k == "auto" => unit_gain_zeta(g.r1, g.gamma),
            ZetaSetting::Keyword(k) => {
                return Err(invalid("geometry.zeta", format!("expected a number or \"auto\", got \"{k}\"")))
            }
        };
        let as_grid_deg = match (raw.sweep.as_grid_deg, raw.sweep.as_range_deg) {
            (Some(grid), None) => grid,
            (None, Some(range)) => range.expand()?,
            (Some(_), Some(_)) => {
                return Err(invalid("sweep.as_grid_deg", "give either as_grid_deg or as_range_deg, not both"))
            }
            (None, None) => return Err(invalid("sweep.as_grid_deg", "missing AS grid (as_grid_deg or as_range_deg)")),
        };
        let cfg = Self {
            cells: g.cells.iter().map(|c| CellSpec::new(c.id, c.ue_angle_deg)).collect(),
            r1: g.r1,
            r2: g.r2,
            gamma: g.gamma,
            zeta,
            sigma2: raw.channel.sigma2,
            tau: raw.channel.tau,
            n_paths: raw.channel.n_paths,
            spacing_ratio: raw.channel.spacing_ratio,
            quadrature_tol: raw.channel.quadrature_tol,
            as_grid_deg,
            allow_zero_spread: raw.sweep.allow_zero_spread,
            m_grid: raw.sweep.m_grid,
            precoders: raw.sweep.precoders,
            engines: raw.sweep.engines,
            desired: raw.sweep.desired,
            n_realizations: raw.monte_carlo.n_realizations,
            seed: raw.monte_carlo.seed,
            batches: raw.monte_carlo.batches,
            workers: raw.monte_carlo.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cells.is_empty() || self.cells.len() > MAX_CELLS {
            return Err(invalid("geometry.cells", format!("need 1 to {MAX_CELLS} cells, got {}", self.cells.len())));
        }
        self.layout()?;
        if self.desired >= self.cells.len() {
            return Err(invalid("sweep.desired", format!("index {} outside {} cells", self.desired, self.cells.len())));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid("channel.sigma2", "must be positive"));
        }
        if self.tau == 0 {
            return Err(invalid("channel.tau", "must be at least 1"));
        }
        if self.n_paths == 0 {
            return Err(invalid("channel.n_paths", "must be at least 1"));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return Err(invalid("channel.spacing_ratio", "must be positive"));
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(invalid("channel.quadrature_tol", "must be positive"));
        }
        if self.as_grid_deg.is_empty() {
            return Err(invalid("sweep.as_grid_deg", "empty"));
        }
        let lower_ok = |a: f64| if self.allow_zero_spread { a >= 0.0 } else { a > 0.0 };
        for &a in &self.as_grid_deg {
            if !(lower_ok(a) && a <= 180.0) {
                return Err(invalid(
                    "sweep.as_grid_deg",
                    format!("{a} outside (0, 180] (0 needs allow_zero_spread = true)"),
                ));
            }
        }
        if self.as_grid_deg.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("sweep.as_grid_deg", "must be strictly increasing"));
        }
        if self.m_grid.is_empty() || self.m_grid.contains(&0) {
            return Err(invalid("sweep.m_grid", "need at least one array size, all >= 1"));
        }
        if self.precoders.is_empty() {
            return Err(invalid("sweep.precoders", "empty"));
        }
        if self.engines.is_empty() {
            return Err(invalid("sweep.engines", "empty"));
        }
        if self.engines.contains(&Engine::MonteCarlo) {
            if self.n_realizations < MIN_REALIZATIONS {
                return Err(invalid(
                    "monte_carlo.n_realizations",
                    format!("need at least {MIN_REALIZATIONS}, got {}", self.n_realizations),
                ));
            }
            if self.batches < 2 || self.batches > self.n_realizations {
                return Err(invalid("monte_carlo.batches", "need 2 <= batches <= n_realizations"));
            }
        }
        if self.workers == Some(0) {
            return Err(invalid("monte_carlo.workers", "must be at least 1"));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<Layout, ConfigError> {
        Ok(build_layout(&self.cells, self.r1, self.r2, self.gamma, self.zeta)?)
    }

    /// The scenario as TOML with every value explicit.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            geometry: GeometrySection {
                cells: self
                    .cells
                    .iter()
                    .map(|c| CellEntry {
                        id: c.cell_id,
                        ue_angle_deg: c.ue_angle_deg,
                    })
                    .collect(),
                r1: self.r1,
                r2: self.r2,
                gamma: self.gamma,
                zeta: ZetaSetting::Value(self.zeta),
            },
            channel: ChannelSection {
                sigma2: self.sigma2,
                tau: self.tau,
                n_paths: self.n_paths,
                spacing_ratio: self.spacing_ratio,
                quadrature_tol: self.quadrature_tol,
            },
            sweep: SweepSection {
                as_grid_deg: Some(self.as_grid_deg.clone()),
                as_range_deg: None,
                allow_zero_spread: self.allow_zero_spread,
                m_grid: self.m_grid.clone(),
                precoders: self.precoders.clone(),
                engines: self.engines.clone(),
                desired: self.desired,
            },
            monte_carlo: MonteCarloSection {
                n_realizations: self.n_realizations,
                seed: self.seed,
                batches: self.batches,
                workers: None,
            },
        };
        toml::to_string(&raw).expect("scenario serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[geometry]
cells = [{ id = 0, ue_angle_deg = 0.0 }, { id = 1, ue_angle_deg = 200.0 }]

[sweep]
as_grid_deg = [10.0, 20.0]
m_grid = [10]
"#;

    #[test]
    fn minimal_config_gets_reference_defaults() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.tau, 1);
        assert_eq!(c.gamma, 3.0);
        assert_eq!(c.sigma2, 1.0);
        assert_eq!(c.n_paths, 100);
        assert_eq!(c.spacing_ratio, 0.5);
        assert_eq!((c.r1, c.r2), (40.0, 50.0));
        assert_eq!(c.zeta, 64000.0);
        assert_eq!(c.precoders, vec![Precoder::Ebf]);
        assert_eq!(c.engines, vec![Engine::Analytic]);
        assert_eq!(c, ScenarioConfig::two_cell(200.0, vec![10], vec![10.0, 20.0]));
    }

    #[test]
    fn explicit_zeta_and_range() {
        let text = MINIMAL
            .replace("[sweep]\nas_grid_deg = [10.0, 20.0]", "[sweep]\nas_range_deg = { start = 2.0, stop = 70.0, step = 2.0 }")
            .replace("[geometry]\n", "[geometry]\nzeta = 2.5\n");
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.zeta, 2.5);
        assert_eq!(c.as_grid_deg.len(), 35);
        assert_eq!(*c.as_grid_deg.last().unwrap(), 70.0);
    }

    #[test]
    fn rejections() {
        let zero = MINIMAL.replace("[10.0, 20.0]", "[0.0, 20.0]");
        assert!(matches!(ScenarioConfig::from_toml_str(&zero), Err(ConfigError::Invalid { key: "sweep.as_grid_deg", .. })));
        let allowed = zero.replace("m_grid", "allow_zero_spread = true\nm_grid");
        assert!(ScenarioConfig::from_toml_str(&allowed).is_ok());
        let unsorted = MINIMAL.replace("[10.0, 20.0]", "[20.0, 10.0]");
        assert!(ScenarioConfig::from_toml_str(&unsorted).is_err());
        let too_big = MINIMAL.replace("[10.0, 20.0]", "[10.0, 181.0]");
        assert!(ScenarioConfig::from_toml_str(&too_big).is_err());
        let unknown = MINIMAL.replace("m_grid", "colour = 3\nm_grid");
        let err = ScenarioConfig::from_toml_str(&unknown).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        assert!(err.contains("line"), "{err}");
        let missing = MINIMAL.replace("m_grid = [10]\n", "");
        assert!(ScenarioConfig::from_toml_str(&missing).unwrap_err().to_string().contains("m_grid"));
        let bad_zeta = MINIMAL.replace("[geometry]\n", "[geometry]\nzeta = \"big\"\n");
        assert!(matches!(ScenarioConfig::from_toml_str(&bad_zeta), Err(ConfigError::Invalid { key: "geometry.zeta", .. })));
        let few = MINIMAL.replace("m_grid = [10]", "m_grid = [10]\nengines = [\"mc\"]")
            + "\n[monte_carlo]\nn_realizations = 10\n";
        assert!(matches!(ScenarioConfig::from_toml_str(&few), Err(ConfigError::Invalid { key: "monte_carlo.n_realizations", .. })));
        let radii = MINIMAL.replace("[geometry]\n", "[geometry]\nr1 = 60.0\n");
        assert!(matches!(ScenarioConfig::from_toml_str(&radii), Err(ConfigError::Geometry(_))));
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ScenarioConfig::two_cell(220.0, vec![4, 10], vec![5.0, 20.0, 40.0]);
        c.engines = vec![Engine::Analytic, Engine::MonteCarlo];
        c.precoders = vec![Precoder::Ebf, Precoder::Rzf];
        let back = ScenarioConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }
}
