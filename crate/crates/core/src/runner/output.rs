//! CSV datasets written by a sweep, and a reader for them.
//!
//! Every file starts with `#` comment lines that hold the full scenario as
//! TOML and the BS coordinates, followed by a CSV header row. Floats are
//! written with 17 significant digits, so reading a file back gives the
//! exact values that were written.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{Engine, Precoder};
use super::extrema::ExtremumKind;
use super::sweep::{Extremum, SweepResult, SweepRow};
use crate::analytic::{PowerBreakdown, Source};

pub const RATES_FILE: &str = "rates.csv";
pub const POWERS_FILE: &str = "powers.csv";
pub const EXTREMA_FILE: &str = "extrema.csv";

pub const RATES_COLUMNS: [&str; 10] = [
    "m",
    "as_deg",
    "precoder",
    "engine",
    "signal",
    "self_interference",
    "intercell",
    "noise",
    "rate_bps_hz",
    "stderr_rate",
];

pub const POWERS_COLUMNS: [&str; 13] = [
    "m",
    "as_deg",
    "precoder",
    "engine",
    "signal",
    "self_interference",
    "intercell",
    "noise",
    "rate_bps_hz",
    "stderr_signal",
    "stderr_self_interference",
    "stderr_intercell",
    "stderr_rate",
];

pub const EXTREMA_COLUMNS: [&str; 6] = ["kind", "as_deg", "rate_bps_hz", "m", "precoder", "engine"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}, record {record}: {message}")]
    Field {
        path: PathBuf,
        record: usize,
        message: String,
    },
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Comment block shared by all three files.
pub fn header_comment(result: &SweepResult) -> String {
    let mut s = String::from("# spreadrate sweep\n# scenario:\n");
    for line in result.config.to_toml().lines() {
        s.push_str("#   ");
        s.push_str(line);
        s.push('\n');
    }
    for (k, p) in result.bs_positions.iter().enumerate() {
        let cell = result.config.cells[k];
        s.push_str(&format!(
            "# bs {k} (slot {}): x = {} m, y = {} m\n",
            cell.cell_id,
            fmt_f64(p.x),
            fmt_f64(p.y)
        ));
    }
    s
}

fn write_file(
    dir: &Path,
    name: &str,
    comment: &str,
    columns: &[&str],
    records: impl Iterator<Item = Vec<String>>,
) -> Result<PathBuf, OutputError> {
    let path = dir.join(name);
    let mut file = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    file.write_all(comment.as_bytes()).map_err(io_err(&path))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(columns).map_err(csv_err(&path))?;
    for r in records {
        w.write_record(&r).map_err(csv_err(&path))?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

fn key_fields(r: &SweepRow) -> Vec<String> {
    vec![r.m.to_string(), fmt_f64(r.as_deg), r.precoder.to_string(), r.engine.to_string()]
}

/// Writes `rates.csv`, `powers.csv` and `extrema.csv` into `dir` (created
/// if missing) and returns their paths.
pub fn emit_csv(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let comment = header_comment(result);
    let rates = write_file(
        dir,
        RATES_FILE,
        &comment,
        &RATES_COLUMNS,
        result.rows.iter().map(|r| {
            let p = &r.powers;
            let mut v = key_fields(r);
            v.extend([p.signal, p.self_interference, p.intercell, p.noise, p.rate_bps_hz, p.rate_se].map(fmt_f64));
            v
        }),
    )?;
    let powers = write_file(
        dir,
        POWERS_FILE,
        &comment,
        &POWERS_COLUMNS,
        result.rows.iter().map(|r| {
            let p = &r.powers;
            let mut v = key_fields(r);
            v.extend(
                [
                    p.signal,
                    p.self_interference,
                    p.intercell,
                    p.noise,
                    p.rate_bps_hz,
                    p.signal_se,
                    p.self_interference_se,
                    p.intercell_se,
                    p.rate_se,
                ]
                .map(fmt_f64),
            );
            v
        }),
    )?;
    let extrema = write_file(
        dir,
        EXTREMA_FILE,
        &comment,
        &EXTREMA_COLUMNS,
        result.extrema.iter().map(|e| {
            vec![
                e.kind.to_string(),
                fmt_f64(e.as_deg),
                fmt_f64(e.rate),
                e.m.to_string(),
                e.precoder.to_string(),
                e.engine.to_string(),
            ]
        }),
    )?;
    Ok(vec![rates, powers, extrema])
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>), OutputError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err(path))?;
    let headers = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let records = r.records().collect::<Result<_, _>>().map_err(csv_err(path))?;
    Ok((headers, records))
}

struct Fields<'a> {
    path: &'a Path,
    headers: &'a [String],
    record: &'a csv::StringRecord,
    index: usize,
}

impl Fields<'_> {
    fn raw(&self, name: &str) -> Result<Option<&str>, OutputError> {
        Ok(self
            .headers
            .iter()
            .position(|h| h == name)
            .map(|k| self.record.get(k).unwrap_or("")))
    }

    fn parse<T: std::str::FromStr>(&self, name: &str) -> Result<T, OutputError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(name)?.ok_or_else(|| self.error(format!("missing column `{name}`")))?;
        raw.parse().map_err(|e| self.error(format!("column `{name}`: {e}")))
    }

    fn parse_or_zero(&self, name: &str) -> Result<f64, OutputError> {
        match self.raw(name)? {
            Some(_) => self.parse(name),
            None => Ok(0.0),
        }
    }

    fn error(&self, message: String) -> OutputError {
        OutputError::Field {
            path: self.path.to_path_buf(),
            record: self.index + 1,
            message,
        }
    }
}

/// Reads sweep rows from a rates or powers file. Standard errors absent
/// from the file read as zero.
pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>, OutputError> {
    let (headers, records) = read_records(path)?;
    records
        .iter()
        .enumerate()
        .map(|(index, record)| {
            let f = Fields {
                path,
                headers: &headers,
                record,
                index,
            };
            let engine: Engine = f.parse("engine")?;
            Ok(SweepRow {
                m: f.parse("m")?,
                as_deg: f.parse("as_deg")?,
                precoder: f.parse::<Precoder>("precoder")?,
                engine,
                powers: PowerBreakdown {
                    signal: f.parse("signal")?,
                    self_interference: f.parse("self_interference")?,
                    intercell: f.parse("intercell")?,
                    noise: f.parse("noise")?,
                    rate_bps_hz: f.parse("rate_bps_hz")?,
                    source: match engine {
                        Engine::Analytic => Source::Analytic,
                        Engine::MonteCarlo => Source::MonteCarlo,
                    },
                    signal_se: f.parse_or_zero("stderr_signal")?,
                    self_interference_se: f.parse_or_zero("stderr_self_interference")?,
                    intercell_se: f.parse_or_zero("stderr_intercell")?,
                    rate_se: f.parse_or_zero("stderr_rate")?,
                },
            })
        })
        .collect()
}

pub fn read_extrema(path: &Path) -> Result<Vec<Extremum>, OutputError> {
    let (headers, records) = read_records(path)?;
    records
        .iter()
        .enumerate()
        .map(|(index, record)| {
            let f = Fields {
                path,
                headers: &headers,
                record,
                index,
            };
            Ok(Extremum {
                kind: f.parse::<ExtremumKind>("kind")?,
                as_deg: f.parse("as_deg")?,
                rate: f.parse("rate_bps_hz")?,
                m: f.parse("m")?,
                precoder: f.parse("precoder")?,
                engine: f.parse("engine")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::ScenarioConfig;
    use crate::runner::sweep::run_sweep;

    fn small_result() -> SweepResult {
        let mut cfg = ScenarioConfig::two_cell(200.0, vec![4, 6], vec![10.0, 25.0, 40.0]);
        cfg.precoders = vec![Precoder::Ebf, Precoder::Rzf];
        cfg.engines = vec![Engine::Analytic, Engine::MonteCarlo];
        cfg.n_realizations = 2000;
        cfg.batches = 10;
        run_sweep(&cfg, Some(1)).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let res = small_result();
        // EBF analytic + EBF MC + RZF MC at every point
        assert_eq!(res.rows.len(), 2 * 3 * 3);
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_csv(&res, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let back = read_rows(&dir.path().join(POWERS_FILE)).unwrap();
        assert_eq!(back, res.rows);
        let rates = read_rows(&dir.path().join(RATES_FILE)).unwrap();
        for (a, b) in rates.iter().zip(&res.rows) {
            assert_eq!(a.powers.rate_bps_hz, b.powers.rate_bps_hz);
            assert_eq!(a.powers.rate_se, b.powers.rate_se);
            let p = &a.powers;
            assert!((p.recomputed_rate() - p.rate_bps_hz).abs() <= 1e-12);
        }
        assert_eq!(read_extrema(&dir.path().join(EXTREMA_FILE)).unwrap(), res.extrema);
    }

    #[test]
    fn layout_of_the_files() {
        let cfg = ScenarioConfig::two_cell(200.0, vec![4], vec![20.0]);
        let res = run_sweep(&cfg, Some(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_csv(&res, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(RATES_FILE)).unwrap();
        assert!(!text.contains('\r'));
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 2);
        assert_eq!(body[0], RATES_COLUMNS.join(","));
        assert!(body[1].starts_with("4,2.0000000000000000e1,ebf,analytic,"));
        assert!(text.contains("# bs 1 (slot 1): x = "));
        assert!(text.contains("zeta = 64000.0"));
        // the embedded scenario parses back to the same config
        let toml: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("#   "))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(ScenarioConfig::from_toml_str(&toml).unwrap(), cfg);
    }

    #[test]
    fn missing_directory_parent_is_an_error_with_path() {
        let res = {
            let cfg = ScenarioConfig::two_cell(200.0, vec![4], vec![20.0]);
            run_sweep(&cfg, Some(1)).unwrap()
        };
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = emit_csv(&res, &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
