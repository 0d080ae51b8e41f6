//! Flat `key = value` experiment files and their validation.
//!
//! Keys match the long command-line flags (`n-pulses`, `loss-db`, ...);
//! underscores are accepted in place of dashes. Blank lines and lines
//! starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::PathBuf;

use coherent_qkd::adversary::{StrategyConfig, StrategyKind};
use coherent_qkd::analytics::ProtocolKind;
use coherent_qkd::quantum_math::{DistributionKind, MeanPhotonNumber};
use coherent_qkd::sim::{FiberModel, ProtocolConfig, ReferenceMode};

use crate::error::{CliError, CliResult};
use crate::grid::parse_grid;

pub const KEYS: [&str; 17] = [
    "protocol",
    "mu",
    "eta",
    "loss-db",
    "length-km",
    "attenuation",
    "n-pulses",
    "seed",
    "strategy",
    "grid",
    "out",
    "threads",
    "source",
    "reference",
    "split",
    "dark-count",
    "config",
];

fn canonical_key(raw: &str) -> CliResult<String> {
    let key = raw.trim().to_ascii_lowercase().replace('_', "-");
    if KEYS.contains(&key.as_str()) && key != "config" {
        Ok(key)
    } else {
        Err(CliError::usage(format!("unknown key '{}'", raw.trim())))
    }
}

/// Parses a config file body into canonical keys.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("line {}: expected key = value", n + 1)))?;
        let key = canonical_key(k).map_err(|e| CliError::usage(format!("line {}: {e}", n + 1)))?;
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::usage(format!("line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(map)
}

/// Validated parameters for one subcommand. Unset fields take the
/// subcommand's defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub protocol: Option<ProtocolKind>,
    pub mu: Option<f64>,
    pub eta: Option<f64>,
    pub loss_db: Option<f64>,
    pub length_km: Option<f64>,
    pub attenuation: Option<f64>,
    pub n_pulses: Option<u64>,
    pub seed: Option<u64>,
    /// `Some(None)` is an explicit `none`.
    pub strategy: Option<Option<StrategyKind>>,
    pub grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub source: Option<DistributionKind>,
    pub reference: Option<ReferenceMode>,
    pub split: Option<f64>,
    pub dark_count: Option<f64>,
}

fn num(key: &str, v: &str) -> CliResult<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| CliError::usage(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::usage(format!("{key}: '{v}' is not finite")));
    }
    Ok(x)
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::usage(format!("{key}: '{v}' is not a non-negative integer")))
}

fn in_range(key: &str, x: f64, lo: f64, hi: f64) -> CliResult<f64> {
    if (lo..=hi).contains(&x) {
        Ok(x)
    } else {
        Err(CliError::usage(format!("{key}: {x} outside [{lo}, {hi}]")))
    }
}

fn parse_reference(v: &str) -> CliResult<ReferenceMode> {
    let v = v.to_ascii_lowercase();
    match v.split_once(':') {
        None if v == "parallel" => Ok(ReferenceMode::default()),
        None if v == "weak" => Ok(ReferenceMode::Weak),
        Some(("parallel", factor)) => {
            let f = num("reference", factor)?;
            if f < 1.0 {
                return Err(CliError::usage("reference: intensity factor must be >= 1"));
            }
            Ok(ReferenceMode::Parallel { intensity_factor: f })
        }
        _ => Err(CliError::usage(format!(
            "reference: '{v}' (expected parallel, parallel:<factor> or weak)"
        ))),
    }
}

impl ExperimentConfig {
    /// Builds a config from canonical key/value pairs.
    pub fn from_map(map: &BTreeMap<String, String>) -> CliResult<Self> {
        let mut c = ExperimentConfig::default();
        for (k, v) in map {
            let v = v.trim();
            match k.as_str() {
                "protocol" => c.protocol = Some(v.parse().map_err(|e| CliError::usage(format!("{e}")))?),
                "mu" => c.mu = Some(in_range(k, num(k, v)?, 0.0, 1e6)?),
                "eta" => c.eta = Some(in_range(k, num(k, v)?, 0.0, 1.0)?),
                "loss-db" => c.loss_db = Some(in_range(k, num(k, v)?, 0.0, 1e4)?),
                "length-km" => c.length_km = Some(in_range(k, num(k, v)?, 0.0, 1e6)?),
                "attenuation" => c.attenuation = Some(in_range(k, num(k, v)?, 0.0, 1e3)?),
                "n-pulses" => c.n_pulses = Some(int(k, v)?),
                "seed" => c.seed = Some(int(k, v)?),
                "strategy" => {
                    c.strategy = Some(if v.eq_ignore_ascii_case("none") {
                        None
                    } else {
                        Some(v.parse().map_err(|e| CliError::usage(format!("{e}")))?)
                    })
                }
                "grid" => c.grid = Some(parse_grid(v)?),
                "out" => c.out = Some(PathBuf::from(v)),
                "threads" => {
                    let n: usize = int(k, v)?;
                    if n == 0 {
                        return Err(CliError::usage("threads must be positive"));
                    }
                    c.threads = Some(n);
                }
                "source" => {
                    c.source = Some(match v.to_ascii_lowercase().as_str() {
                        "poisson" | "coherent" => DistributionKind::Poisson,
                        "thermal" => DistributionKind::Thermal,
                        other => return Err(CliError::usage(format!("source: '{other}'"))),
                    })
                }
                "reference" => c.reference = Some(parse_reference(v)?),
                "split" => {
                    let s = num(k, v)?;
                    if !(0.0..1.0).contains(&s) {
                        return Err(CliError::usage(format!("split: {s} outside [0, 1)")));
                    }
                    c.split = Some(s);
                }
                "dark-count" => c.dark_count = Some(in_range(k, num(k, v)?, 0.0, 1.0)?),
                other => return Err(CliError::usage(format!("unknown key '{other}'"))),
            }
        }
        if c.loss_db.is_some() && c.length_km.is_some() {
            return Err(CliError::usage("give either loss-db or length-km, not both"));
        }
        Ok(c)
    }

    /// Config file values overridden by command-line values.
    pub fn merged(
        file: BTreeMap<String, String>,
        overrides: BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let mut map = file;
        // A line length given on the command line replaces a file loss and
        // vice versa.
        for (given, other) in [("loss-db", "length-km"), ("length-km", "loss-db")] {
            if overrides.contains_key(given) {
                map.remove(other);
            }
        }
        map.extend(overrides);
        Self::from_map(&map)
    }

    pub fn fiber(&self) -> CliResult<FiberModel> {
        let att = self
            .attenuation
            .unwrap_or(FiberModel::DEFAULT_ATTENUATION_DB_PER_KM);
        Ok(match (self.loss_db, self.length_km) {
            (Some(db), _) => FiberModel::with_loss_db(db)?,
            (None, Some(km)) => FiberModel::new(km, att)?,
            (None, None) => FiberModel::lossless(),
        })
    }

    pub fn strategy_kind(&self) -> Option<StrategyKind> {
        self.strategy.flatten()
    }

    /// Mean photon numbers to sweep: the grid, else `mu`, else `default`.
    pub fn mu_points(&self, default: &[f64]) -> Vec<f64> {
        match (&self.grid, self.mu) {
            (Some(g), _) => g.clone(),
            (None, Some(mu)) => vec![mu],
            (None, None) => default.to_vec(),
        }
    }

    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::usage("--seed is required for this subcommand"))
    }

    /// Session configuration at one mean photon number.
    pub fn session(
        &self,
        protocol: ProtocolKind,
        mu: f64,
        n_pulses: u64,
        seed: u64,
    ) -> CliResult<ProtocolConfig> {
        let mut cfg = ProtocolConfig::new(protocol, MeanPhotonNumber::new(mu)?, n_pulses, seed);
        cfg.photon_statistics = self.source.unwrap_or(DistributionKind::Poisson);
        cfg.reference = self.reference.unwrap_or_default();
        cfg.fiber = self.fiber()?;
        cfg.dark_count = self.dark_count.unwrap_or(0.0);
        cfg.threads = self.threads;
        cfg.strategy = match self.strategy_kind() {
            None => {
                if self.eta.is_some_and(|e| e > 0.0) {
                    return Err(CliError::usage("eta > 0 needs a --strategy"));
                }
                None
            }
            Some(kind) => {
                let mut s = StrategyConfig::new(kind, self.eta.unwrap_or(1.0))?;
                if let Some(split) = self.split {
                    s = s.with_split(split)?;
                }
                Some(s)
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
