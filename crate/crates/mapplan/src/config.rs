//! Run configuration: defaults, `key = value` files, then command-line
//! overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::kms::{Mode, DEFAULT_ACCEPT_MARKER};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("solve timeout must be positive")]
    ZeroTimeout,
    #[error("no knowledge base given (set `kb`, or `hl` and `ll`)")]
    NoKb,
    #[error("output directory {0}: {1}")]
    OutDir(PathBuf, std::io::Error),
    #[error("reading {0}: {1}")]
    Io(PathBuf, std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchKind {
    IterativeDeepening,
    DepthFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    Declaration,
    GoalCount,
    Projected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportKind {
    Replay,
    Http,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Emit {
    pub plan: bool,
    pub enablers: bool,
    pub schedule: bool,
    pub stn: bool,
    pub bt: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit { plan: true, enablers: true, schedule: true, stn: true, bt: true }
    }
}

impl FromStr for Emit {
    type Err = ();

    /// Comma-separated subset of `plan,enablers,schedule,stn,bt`, or `all`
    /// or `none`.
    fn from_str(s: &str) -> Result<Self, ()> {
        let none = Emit { plan: false, enablers: false, schedule: false, stn: false, bt: false };
        match s.trim() {
            "all" => return Ok(Emit::default()),
            "none" | "" => return Ok(none),
            _ => {}
        }
        let mut e = none;
        for item in s.split(',').map(str::trim) {
            match item {
                "plan" => e.plan = true,
                "enablers" => e.enablers = true,
                "schedule" => e.schedule = true,
                "stn" => e.stn = true,
                "bt" => e.bt = true,
                _ => return Err(()),
            }
        }
        Ok(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KmsConfig {
    pub mode: Mode,
    pub transport: TransportKind,
    pub fixtures: PathBuf,
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub accept_marker: String,
    pub hl_query: Option<PathBuf>,
    pub ll_query: Option<PathBuf>,
    pub request_timeout: Duration,
}

impl Default for KmsConfig {
    fn default() -> Self {
        KmsConfig {
            mode: Mode::Stepwise,
            transport: TransportKind::Replay,
            fixtures: PathBuf::from("fixtures/kms/replay"),
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            accept_marker: DEFAULT_ACCEPT_MARKER.into(),
            hl_query: None,
            ll_query: None,
            request_timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// A single KB holding both levels.
    pub kb: Option<PathBuf>,
    pub hl: Option<PathBuf>,
    pub ll: Option<PathBuf>,
    pub max_depth: usize,
    pub max_expansions: u64,
    pub search: SearchKind,
    pub order: OrderKind,
    pub solve_timeout: Duration,
    /// Alternative total orders tried after an infeasible one.
    pub retries: usize,
    pub out_dir: PathBuf,
    pub emit: Emit,
    pub kms: KmsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kb: None,
            hl: None,
            ll: None,
            max_depth: 64,
            max_expansions: 2_000_000,
            search: SearchKind::IterativeDeepening,
            order: OrderKind::Declaration,
            solve_timeout: Duration::from_secs(60),
            retries: 8,
            out_dir: PathBuf::from("out"),
            emit: Emit::default(),
            kms: KmsConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: value.into() })
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue { key: key.into(), value: value.into() };
        let path = || Some(PathBuf::from(value));
        match key {
            "kb" => self.kb = path(),
            "hl" => self.hl = path(),
            "ll" => self.ll = path(),
            "max_depth" => self.max_depth = parse(key, value)?,
            "max_expansions" => self.max_expansions = parse(key, value)?,
            "search" => {
                self.search = match value {
                    "iddfs" => SearchKind::IterativeDeepening,
                    "dfs" => SearchKind::DepthFirst,
                    _ => return Err(bad()),
                }
            }
            "order" => {
                self.order = match value {
                    "declaration" => OrderKind::Declaration,
                    "goal-count" => OrderKind::GoalCount,
                    "projected" => OrderKind::Projected,
                    _ => return Err(bad()),
                }
            }
            "solve_timeout" => self.solve_timeout = Duration::from_secs_f64(parse::<f64>(key, value)?.max(0.0)),
            "retries" => self.retries = parse(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "emit" => self.emit = value.parse().map_err(|_| bad())?,
            "kms_mode" => {
                self.kms.mode = match value {
                    "whole" => Mode::Whole,
                    "stepwise" => Mode::Stepwise,
                    _ => return Err(bad()),
                }
            }
            "transport" => {
                self.kms.transport = match value {
                    "replay" => TransportKind::Replay,
                    "http" => TransportKind::Http,
                    _ => return Err(bad()),
                }
            }
            "fixtures" => self.kms.fixtures = PathBuf::from(value),
            "endpoint" => self.kms.endpoint = value.into(),
            "model" => self.kms.model = value.into(),
            "api_key_env" => self.kms.api_key_env = value.into(),
            "accept_marker" => self.kms.accept_marker = value.into(),
            "hl_query" => self.kms.hl_query = path(),
            "ll_query" => self.kms.ll_query = path(),
            "request_timeout" => {
                self.kms.request_timeout = Duration::from_secs_f64(parse::<f64>(key, value)?.max(0.0))
            }
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies a `key = value` file. Blank lines and lines starting with
    /// `#` are skipped. Relative paths are taken relative to the file.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.into(), e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { path: path.display().to_string(), line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            const PATHS: &[&str] = &["kb", "hl", "ll", "out", "fixtures", "hl_query", "ll_query"];
            if PATHS.contains(&k) && Path::new(v).is_relative() {
                self.set(k, &base.join(v).to_string_lossy())?;
            } else {
                self.set(k, v)?;
            }
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.solve_timeout.is_zero() {
            return Err(ConfigError::ZeroTimeout);
        }
        Ok(())
    }

    /// Creates the output directory if needed and checks that it accepts
    /// files.
    pub fn prepare_out_dir(&self) -> Result<(), ConfigError> {
        let err = |e| ConfigError::OutDir(self.out_dir.clone(), e);
        std::fs::create_dir_all(&self.out_dir).map_err(err)?;
        let probe = self.out_dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(err)?;
        std::fs::remove_file(&probe).map_err(err)
    }
}
