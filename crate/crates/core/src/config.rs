//! Run configuration and input loading.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! system = "system.toml"          # reservoirs and plants, see below
//!
//! [grid]
//! start = "2020-10-07T00:00:00"   # ISO timestamp of the first step
//! steps = 24                      # >= 1
//! step_minutes = 60               # > 0, default 60
//!
//! [series]                        # CSV files, one row per step
//! spot = "spot.csv"               # step,value (EUR/MWh, > 0)
//! inflow_early = "early.csv"      # step,<reservoir id>,... (m3/s, >= 0)
//! inflow_late = "late.csv"
//! wind_forecast = "wf.csv"        # step,value (MW, >= 0)
//! wind_actual = "wa.csv"
//!
//! [market]                        # all optional
//! spread_frac = 0.15              # half-spread as a fraction of spot, (0, 1)
//! sensitivity = 0.01              # price shift per MW of system imbalance, >= 0
//! depth = 3                       # tiers per side, >= 1
//! tier_volume = 25.0              # MWh per tier, > 0
//!
//! [fees]                          # EUR/MWh, >= 0, optional
//! trade_fee = 0.15
//! imbalance_fee = 0.30
//!
//! [solver]                        # optional
//! mip_gap = 0.0
//! lp_tolerance = 1e-9
//! max_nodes = 100000
//!
//! [output]
//! dir = "out"                     # overridden by --out
//! ```
//!
//! The system file holds `[[reservoirs]]` tables (`id`, `r_min`, `r_max`,
//! `r_init` in m3, `water_value` in EUR/MWh, `reference_slope` in MW per
//! m3/s) and `[[plants]]` tables (`id`, `p_min`, `p_max`,
//! `upstream_reservoir`, optional `downstream_reservoir`, and `segments`, a
//! list of `{ width, slope }` in m3/s and MW per m3/s). Plant `i` draws from
//! reservoir `i`. Relative paths are resolved against the config file.

use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::Deserialize;
use thiserror::Error;

use crate::hydro::{CascadeSystem, InflowSeries, TimeGrid, Violation, WindRole, WindSeries};
use crate::io::{read_series, read_table, IoError};
use crate::market::{FeeSchedule, QuoteParams};
use crate::milp::SolveOptions;
use crate::pipeline::ScenarioInputs;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("invalid input: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: NaiveDateTime,
    pub steps: usize,
    #[serde(default = "default_step_minutes")]
    pub step_minutes: f64,
}

fn default_step_minutes() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub spot: PathBuf,
    pub inflow_early: PathBuf,
    pub inflow_late: PathBuf,
    pub wind_forecast: PathBuf,
    pub wind_actual: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: PathBuf,
    pub grid: GridConfig,
    pub series: SeriesConfig,
    #[serde(default)]
    pub market: QuoteParams,
    #[serde(default)]
    pub fees: FeeSchedule,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Where referenced files come from.
#[derive(Debug, Clone)]
pub enum Source {
    Dir(PathBuf),
    Embedded(&'static [(&'static str, &'static str)]),
}

impl Source {
    pub fn read(&self, name: &Path) -> Result<String, IoError> {
        match self {
            Source::Dir(dir) => {
                let path = dir.join(name);
                std::fs::read_to_string(&path).map_err(|source| IoError::Open { path, source })
            }
            Source::Embedded(files) => files
                .iter()
                .find(|(n, _)| Path::new(n) == name)
                .map(|(_, body)| body.to_string())
                .ok_or_else(|| IoError::Open {
                    path: name.to_path_buf(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "not in bundled fixture",
                    ),
                }),
        }
    }

    pub fn describe(&self, name: &Path) -> PathBuf {
        match self {
            Source::Dir(dir) => dir.join(name),
            Source::Embedded(_) => Path::new("<demo>").join(name),
        }
    }
}

/// The bundled demo portfolio.
pub const DEMO_FILES: &[(&str, &str)] = &[
    ("config.toml", include_str!("../fixtures/demo/config.toml")),
    ("system.toml", include_str!("../fixtures/demo/system.toml")),
    ("spot.csv", include_str!("../fixtures/demo/spot.csv")),
    (
        "inflow_early.csv",
        include_str!("../fixtures/demo/inflow_early.csv"),
    ),
    (
        "inflow_late.csv",
        include_str!("../fixtures/demo/inflow_late.csv"),
    ),
    (
        "wind_forecast.csv",
        include_str!("../fixtures/demo/wind_forecast.csv"),
    ),
    (
        "wind_actual.csv",
        include_str!("../fixtures/demo/wind_actual.csv"),
    ),
];

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, path: PathBuf) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        path,
        msg: e.to_string(),
    })
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        parse_toml(text, path.to_path_buf())
    }

    /// Reads the config at `path`; referenced files are looked up next to it.
    pub fn load(path: &Path) -> Result<(Self, Source), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&text, path)?, Source::Dir(dir)))
    }

    pub fn demo() -> (Self, Source) {
        let src = Source::Embedded(DEMO_FILES);
        let text = src.read(Path::new("config.toml")).expect("bundled config");
        let cfg =
            Self::parse(&text, Path::new("<demo>/config.toml")).expect("bundled config parses");
        (cfg, src)
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            start: self.grid.start,
            steps: self.grid.steps,
            step_seconds: self.grid.step_minutes * 60.0,
        }
    }

    /// Loads every referenced file. IO and parse failures are reported
    /// before any content checks; content problems come back as
    /// [`ConfigError::Invalid`].
    pub fn load_inputs(&self, src: &Source) -> Result<ScenarioInputs, ConfigError> {
        let sys_text = src.read(&self.system)?;
        let system: CascadeSystem = parse_toml(&sys_text, src.describe(&self.system))?;
        let series = |name: &Path| -> Result<Vec<f64>, ConfigError> {
            let text = src.read(name)?;
            Ok(read_series(text.as_bytes(), &src.describe(name))?)
        };
        let inflow = |name: &Path| -> Result<InflowSeries, ConfigError> {
            let text = src.read(name)?;
            let path = src.describe(name);
            let table = read_table(text.as_bytes(), &path)?;
            let values = system
                .reservoirs
                .iter()
                .map(|r| {
                    table
                        .iter()
                        .find(|(n, _)| *n == r.id)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| IoError::Format {
                            path: path.clone(),
                            msg: format!("no column for reservoir {}", r.id),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(InflowSeries { values })
        };
        let inputs = ScenarioInputs {
            grid: self.grid(),
            spot: series(&self.series.spot)?,
            inflow_early: inflow(&self.series.inflow_early)?,
            inflow_late: inflow(&self.series.inflow_late)?,
            wind_forecast: WindSeries {
                role: WindRole::Forecast,
                values: series(&self.series.wind_forecast)?,
            },
            wind_actual: WindSeries {
                role: WindRole::Actual,
                values: series(&self.series.wind_actual)?,
            },
            system,
            quote_params: self.market,
            fees: self.fees,
        };
        let mut v = inputs.validate();
        if !(self.solver.mip_gap >= 0.0
            && self.solver.lp_tolerance > 0.0
            && self.solver.max_nodes > 0)
        {
            v.push(Violation {
                subject: "solver".into(),
                message: "need mip_gap >= 0, lp_tolerance > 0, max_nodes > 0".into(),
            });
        }
        if v.is_empty() {
            Ok(inputs)
        } else {
            Err(ConfigError::Invalid(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_loads() {
        let (cfg, src) = RunConfig::demo();
        let inputs = cfg.load_inputs(&src).unwrap();
        assert_eq!(inputs.grid.steps, 24);
        assert_eq!(inputs.system.plants.len(), 2);
        assert_eq!(inputs.inflow_late.values.len(), 2);
        assert_eq!(cfg.output.dir.as_deref(), Some(Path::new("out")));
    }

    #[test]
    fn missing_file_is_io_error() {
        let (mut cfg, src) = RunConfig::demo();
        cfg.series.inflow_late = "nope.csv".into();
        assert!(matches!(cfg.load_inputs(&src), Err(ConfigError::Io(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "system = \"s\"\nbogus = 1\n";
        assert!(matches!(
            RunConfig::parse(text, Path::new("c")),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn short_series_is_invalid() {
        static FILES: &[(&str, &str)] = &[
            ("system.toml", include_str!("../fixtures/demo/system.toml")),
            ("spot.csv", "step,value\n"),
            (
                "inflow_early.csv",
                include_str!("../fixtures/demo/inflow_early.csv"),
            ),
            (
                "inflow_late.csv",
                include_str!("../fixtures/demo/inflow_late.csv"),
            ),
            (
                "wind_forecast.csv",
                include_str!("../fixtures/demo/wind_forecast.csv"),
            ),
            (
                "wind_actual.csv",
                include_str!("../fixtures/demo/wind_actual.csv"),
            ),
        ];
        let (cfg, _) = RunConfig::demo();
        match cfg.load_inputs(&Source::Embedded(FILES)) {
            Err(ConfigError::Invalid(v)) => assert!(v.iter().any(|x| x.subject == "spot")),
            other => panic!("{other:?}"),
        }
    }
}
