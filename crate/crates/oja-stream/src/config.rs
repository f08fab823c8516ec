//! Experiment configuration: a flat `key = value` text format plus CLI
//! overrides. Values are numbers, bare/quoted strings, or parenthesized
//! lists. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::baselines::default_num_blocks;
use crate::error::{OjaError, Result};
use crate::model::StreamDistribution;
use crate::oja::StepSchedule;
use crate::replay::ReplaySource;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistKindSpec {
    BasisSpike,
    BoundedFeature,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgoSpec {
    Oja,
    Batch,
    BlockPower,
    Boosted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleSpec {
    Thm12,
    Thm13,
    Thm41,
    Constant,
}

/// Fully parsed experiment configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: DistKindSpec,
    pub d: usize,
    pub sigma: f64,
    pub diag: Vec<f64>,
    pub replay_path: Option<PathBuf>,

    pub algo: AlgoSpec,
    pub schedule: ScheduleSpec,
    pub alpha: f64,
    pub eta: f64,

    pub n_grid: Vec<u64>,
    pub trials: usize,
    pub master_seed: u64,
    pub delta: f64,
    pub checkpoints: Vec<u64>,
    pub copies: usize,
    pub num_blocks: Option<u64>,
    pub workers: usize,
    pub c_const: f64,
    pub out: Option<PathBuf>,

    // verify / check-model knobs
    pub t_steps: usize,
    pub verify_trials: usize,
    pub check_trials: usize,
    pub pm_trials: usize,
    pub b_top: f64,
    pub c_cal: f64,
    pub eta_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: DistKindSpec::BasisSpike,
            d: 20,
            sigma: 0.5,
            diag: Vec::new(),
            replay_path: None,
            algo: AlgoSpec::Oja,
            schedule: ScheduleSpec::Thm12,
            alpha: 6.0,
            eta: 0.01,
            n_grid: vec![1 << 14],
            trials: 1,
            master_seed: 0,
            // Matches the constant-probability form of the guarantees:
            // success with probability > 3/4.
            delta: 0.25,
            checkpoints: Vec::new(),
            copies: 11,
            num_blocks: None,
            workers: 0,
            c_const: 1.0,
            out: None,
            t_steps: 500,
            verify_trials: 2000,
            check_trials: 10_000,
            pm_trials: 10_000,
            b_top: 10.0,
            c_cal: crate::theory::DEFAULT_C_CAL,
            eta_scale: 1.0,
        }
    }
}

/// CLI-level overrides; `None` keeps the config-file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub d: Option<usize>,
    pub sigma: Option<f64>,
    pub n: Option<u64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub algo: Option<String>,
    pub alpha: Option<f64>,
    pub copies: Option<usize>,
    pub num_blocks: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Text(String),
    List(Vec<f64>),
}

fn config_err(line: usize, message: impl Into<String>) -> OjaError {
    OjaError::Config {
        line,
        message: message.into(),
    }
}

fn parse_value(line_no: usize, raw: &str) -> Result<Value> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(config_err(line_no, "missing value"));
    }
    if let Some(inner) = raw.strip_prefix('(') {
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| config_err(line_no, "unterminated list"))?;
        let mut items = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let x: f64 = part
                .parse()
                .map_err(|_| config_err(line_no, format!("bad list item '{part}'")))?;
            items.push(x);
        }
        return Ok(Value::List(items));
    }
    if let Some(inner) = raw.strip_prefix('"') {
        let inner = inner
            .strip_suffix('"')
            .ok_or_else(|| config_err(line_no, "unterminated string"))?;
        return Ok(Value::Text(inner.to_string()));
    }
    if let Ok(x) = raw.parse::<f64>() {
        return Ok(Value::Number(x));
    }
    Ok(Value::Text(raw.to_string()))
}

/// Parse the `key = value` body of a config file.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, Value)>> {
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped
            .split_once('=')
            .ok_or_else(|| config_err(line_no, "expected 'key = value'"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(config_err(line_no, "empty key"));
        }
        let value = parse_value(line_no, value)?;
        if out.insert(key.clone(), (line_no, value)).is_some() {
            return Err(config_err(line_no, format!("duplicate key '{key}'")));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_body(&text)
    }

    pub fn from_str_body(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let mut cfg = ExperimentConfig::default();

        let as_number = |line: usize, v: &Value, key: &str| -> Result<f64> {
            match v {
                Value::Number(x) => Ok(*x),
                _ => Err(config_err(line, format!("'{key}' expects a number"))),
            }
        };
        let as_count = |line: usize, v: &Value, key: &str| -> Result<u64> {
            let x = as_number(line, v, key)?;
            if x < 0.0 || x.fract() != 0.0 {
                return Err(config_err(
                    line,
                    format!("'{key}' expects a nonnegative integer"),
                ));
            }
            Ok(x as u64)
        };
        let as_text = |line: usize, v: &Value, key: &str| -> Result<String> {
            match v {
                Value::Text(s) => Ok(s.clone()),
                _ => Err(config_err(line, format!("'{key}' expects a string"))),
            }
        };
        let as_list = |line: usize, v: &Value, key: &str| -> Result<Vec<f64>> {
            match v {
                Value::List(xs) => Ok(xs.clone()),
                _ => Err(config_err(line, format!("'{key}' expects a list"))),
            }
        };

        for (key, (line, value)) in &pairs {
            let line = *line;
            match key.as_str() {
                "kind" => {
                    cfg.kind = match as_text(line, value, key)?.as_str() {
                        "basis_spike" => DistKindSpec::BasisSpike,
                        "bounded_feature" => DistKindSpec::BoundedFeature,
                        "replay" => DistKindSpec::Replay,
                        other => {
                            return Err(config_err(line, format!("unknown kind '{other}'")))
                        }
                    }
                }
                "d" => cfg.d = as_count(line, value, key)? as usize,
                "sigma" => cfg.sigma = as_number(line, value, key)?,
                "diag" => cfg.diag = as_list(line, value, key)?,
                "replay_path" => cfg.replay_path = Some(PathBuf::from(as_text(line, value, key)?)),
                "algo" => cfg.algo = parse_algo(line, &as_text(line, value, key)?)?,
                "schedule" => {
                    cfg.schedule = match as_text(line, value, key)?.as_str() {
                        "thm12" => ScheduleSpec::Thm12,
                        "thm13" => ScheduleSpec::Thm13,
                        "thm41" => ScheduleSpec::Thm41,
                        "constant" => ScheduleSpec::Constant,
                        other => {
                            return Err(config_err(line, format!("unknown schedule '{other}'")))
                        }
                    }
                }
                "alpha" => cfg.alpha = as_number(line, value, key)?,
                "eta" => cfg.eta = as_number(line, value, key)?,
                "n_grid" => {
                    let xs = as_list(line, value, key)?;
                    let mut grid = Vec::with_capacity(xs.len());
                    for x in xs {
                        if x < 1.0 || x.fract() != 0.0 {
                            return Err(config_err(line, "n_grid entries must be integers >= 1"));
                        }
                        grid.push(x as u64);
                    }
                    if grid.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(config_err(line, "n_grid must be strictly increasing"));
                    }
                    cfg.n_grid = grid;
                }
                "trials" => cfg.trials = as_count(line, value, key)? as usize,
                "master_seed" | "seed" => cfg.master_seed = as_count(line, value, key)?,
                "delta" => cfg.delta = as_number(line, value, key)?,
                "checkpoints" => {
                    cfg.checkpoints = as_list(line, value, key)?
                        .into_iter()
                        .map(|x| x as u64)
                        .collect()
                }
                "copies" => cfg.copies = as_count(line, value, key)? as usize,
                "num_blocks" => cfg.num_blocks = Some(as_count(line, value, key)?),
                "workers" => cfg.workers = as_count(line, value, key)? as usize,
                "c_const" => cfg.c_const = as_number(line, value, key)?,
                "out" => cfg.out = Some(PathBuf::from(as_text(line, value, key)?)),
                "t" => cfg.t_steps = as_count(line, value, key)? as usize,
                "verify_trials" => cfg.verify_trials = as_count(line, value, key)? as usize,
                "check_trials" => cfg.check_trials = as_count(line, value, key)? as usize,
                "pm_trials" => cfg.pm_trials = as_count(line, value, key)? as usize,
                "b_top" => cfg.b_top = as_number(line, value, key)?,
                "c_cal" => cfg.c_cal = as_number(line, value, key)?,
                "eta_scale" => cfg.eta_scale = as_number(line, value, key)?,
                other => return Err(config_err(line, format!("unknown key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) -> Result<()> {
        if let Some(d) = ov.d {
            self.d = d;
        }
        if let Some(s) = ov.sigma {
            self.sigma = s;
        }
        if let Some(n) = ov.n {
            self.n_grid = vec![n];
        }
        if let Some(t) = ov.trials {
            self.trials = t;
        }
        if let Some(s) = ov.seed {
            self.master_seed = s;
        }
        if let Some(a) = &ov.algo {
            self.algo = parse_algo(0, a)?;
        }
        if let Some(a) = ov.alpha {
            self.alpha = a;
        }
        if let Some(c) = ov.copies {
            self.copies = c;
        }
        if let Some(b) = ov.num_blocks {
            self.num_blocks = Some(b);
        }
        if let Some(o) = &ov.out {
            self.out = Some(o.clone());
        }
        if let Some(w) = ov.workers {
            self.workers = w;
        }
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(config_err(0, "trials must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err(0, "delta must be in (0, 1)"));
        }
        if self.n_grid.is_empty() {
            return Err(config_err(0, "n_grid must be nonempty"));
        }
        Ok(())
    }

    /// Build the distribution this config describes.
    pub fn distribution(&self) -> Result<StreamDistribution> {
        match self.kind {
            DistKindSpec::BasisSpike => StreamDistribution::basis_spike(self.d, self.sigma),
            DistKindSpec::BoundedFeature => StreamDistribution::bounded_feature(self.diag.clone()),
            DistKindSpec::Replay => {
                let path = self.replay_path.as_ref().ok_or_else(|| {
                    config_err(0, "kind = replay requires replay_path")
                })?;
                StreamDistribution::replay(ReplaySource::read_from(path)?)
            }
        }
    }

    /// Build the configured step schedule for a distribution.
    pub fn step_schedule(&self, dist: &StreamDistribution) -> Result<StepSchedule> {
        let truth = dist.ground_truth();
        let bounds = dist.bounds();
        match self.schedule {
            ScheduleSpec::Thm12 => StepSchedule::thm12(bounds, truth, dist.dim()),
            ScheduleSpec::Thm13 => StepSchedule::thm13(bounds, truth),
            ScheduleSpec::Thm41 => StepSchedule::thm41(bounds, truth, self.alpha, self.delta),
            ScheduleSpec::Constant => StepSchedule::constant(self.eta),
        }
    }

    pub fn effective_num_blocks(&self, n: u64) -> u64 {
        self.num_blocks.unwrap_or_else(|| default_num_blocks(n))
    }
}

fn parse_algo(line: usize, s: &str) -> Result<AlgoSpec> {
    match s {
        "oja" => Ok(AlgoSpec::Oja),
        "batch" => Ok(AlgoSpec::Batch),
        "block_power" => Ok(AlgoSpec::BlockPower),
        "boosted" => Ok(AlgoSpec::Boosted),
        other => Err(config_err(line, format!("unknown algo '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = r#"
# comment
kind = basis_spike
d = 20
sigma = 0.5           # trailing comment
algo = oja
schedule = thm12
n_grid = (1024, 2048, 4096)
trials = 200
master_seed = 7
delta = 0.25
out = results.csv
"#;
        let cfg = ExperimentConfig::from_str_body(text).unwrap();
        assert_eq!(cfg.d, 20);
        assert_eq!(cfg.sigma, 0.5);
        assert_eq!(cfg.algo, AlgoSpec::Oja);
        assert_eq!(cfg.n_grid, vec![1024, 2048, 4096]);
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("results.csv")));
    }

    #[test]
    fn reports_line_numbers_on_errors() {
        let text = "kind = basis_spike\nbogus_key = 3\n";
        match ExperimentConfig::from_str_body(text) {
            Err(OjaError::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus_key"));
            }
            other => panic!("expected config error, got {other:?}"),
        }
        let text = "n_grid = (4096, 1024)\n";
        assert!(matches!(
            ExperimentConfig::from_str_body(text),
            Err(OjaError::Config { line: 1, .. })
        ));
        let text = "trials = 1.5\n";
        assert!(matches!(
            ExperimentConfig::from_str_body(text),
            Err(OjaError::Config { line: 1, .. })
        ));
    }

    #[test]
    fn overrides_replace_config_values() {
        let mut cfg = ExperimentConfig::from_str_body("d = 10\ntrials = 5\n").unwrap();
        let ov = Overrides {
            d: Some(12),
            n: Some(256),
            seed: Some(99),
            algo: Some("batch".into()),
            ..Default::default()
        };
        cfg.apply_overrides(&ov).unwrap();
        assert_eq!(cfg.d, 12);
        assert_eq!(cfg.n_grid, vec![256]);
        assert_eq!(cfg.master_seed, 99);
        assert_eq!(cfg.algo, AlgoSpec::Batch);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        assert!(ExperimentConfig::from_str_body("d = 3\nd = 4\n").is_err());
    }
}
