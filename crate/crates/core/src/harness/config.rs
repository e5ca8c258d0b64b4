//! Flat `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! errors. The same keys are echoed into CSV headers.

use std::f64::consts::PI;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flcore::{FlTransport, Scenario, TrainConfig};
use crate::quantizer::{QuantizerSpec, DEFAULT_LOWRES_INT_BITS};

pub const DEFAULT_THETA: f64 = PI / 16.0;
pub const DEFAULT_SNR_HIGH_DB: f64 = 20.0;
pub const DEFAULT_SNR_LOW_DB: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ideal,
    Physical,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ideal" => Ok(Mode::Ideal),
            "physical" => Ok(Mode::Physical),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl Mode {
    pub fn tag(&self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::Physical => "physical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenarios: Vec<Scenario>,
    pub seeds: Vec<u64>,
    pub mode: Mode,
    /// Physical-mode parameters; `None` takes the documented default.
    pub theta: Option<f64>,
    pub snr_high_db: Option<f64>,
    pub snr_low_db: Option<f64>,
    pub decimals: u8,
    pub lowres_int_bits: u8,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub rounds: usize,
    pub epochs_per_round: usize,
    pub n_agents: usize,
    pub per_agent: usize,
    pub data_dir: PathBuf,
    pub out: PathBuf,
    pub trace: Option<PathBuf>,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenarios: Scenario::ALL.to_vec(),
            seeds: (0..10).collect(),
            mode: Mode::Ideal,
            theta: None,
            snr_high_db: None,
            snr_low_db: None,
            decimals: 2,
            lowres_int_bits: DEFAULT_LOWRES_INT_BITS,
            learning_rate: 0.04,
            batch_size: 64,
            rounds: 60,
            epochs_per_round: 1,
            n_agents: 4,
            per_agent: 2500,
            data_dir: PathBuf::from("data/mnist"),
            out: PathBuf::from("results/experiment.csv"),
            trace: None,
            workers: 1,
        }
    }
}

/// Comma-separated seeds; `a-b` is an inclusive range.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = |p: &str| Error::Config(format!("bad seed entry '{p}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenarios" | "scenario" => {
                self.scenarios = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "seeds" => self.seeds = parse_seeds(value)?,
            "mode" => self.mode = value.parse()?,
            "theta" => self.theta = Some(parse_num(key, value)?),
            "snr_high" | "snr_high_db" => self.snr_high_db = Some(parse_num(key, value)?),
            "snr_low" | "snr_low_db" => self.snr_low_db = Some(parse_num(key, value)?),
            "decimals" => self.decimals = parse_num(key, value)?,
            "lowres_int_bits" => self.lowres_int_bits = parse_num(key, value)?,
            "learning_rate" => self.learning_rate = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "rounds" => self.rounds = parse_num(key, value)?,
            "epochs_per_round" => self.epochs_per_round = parse_num(key, value)?,
            "n_agents" => self.n_agents = parse_num(key, value)?,
            "per_agent" => self.per_agent = parse_num(key, value)?,
            "data_dir" => self.data_dir = PathBuf::from(value),
            "out" => self.out = PathBuf::from(value),
            "trace" => self.trace = Some(PathBuf::from(value)),
            "workers" => self.workers = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Config("at least one scenario is required".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        if self.per_agent == 0 {
            return Err(Error::Config("per_agent must be positive".into()));
        }
        match self.mode {
            Mode::Ideal => {
                if self.theta.is_some() || self.snr_high_db.is_some() || self.snr_low_db.is_some() {
                    return Err(Error::Config(
                        "theta / snr_high / snr_low only apply in physical mode".into(),
                    ));
                }
            }
            Mode::Physical => {
                crate::modem::Constellation::new(self.theta())?;
                for snr in [self.snr_high(), self.snr_low()] {
                    crate::modem::ChannelSpec::new(snr, 0)?;
                }
            }
        }
        self.quantizer()?;
        self.train_config(0).validate()
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(DEFAULT_THETA)
    }

    pub fn snr_high(&self) -> f64 {
        self.snr_high_db.unwrap_or(DEFAULT_SNR_HIGH_DB)
    }

    pub fn snr_low(&self) -> f64 {
        self.snr_low_db.unwrap_or(DEFAULT_SNR_LOW_DB)
    }

    pub fn quantizer(&self) -> Result<QuantizerSpec> {
        QuantizerSpec::fixed_point(self.decimals)?.with_lowres_int_bits(self.lowres_int_bits)
    }

    pub fn transport(&self) -> FlTransport {
        match self.mode {
            Mode::Ideal => FlTransport::Ideal,
            Mode::Physical => FlTransport::Physical {
                theta: self.theta(),
                snr_high_db: self.snr_high(),
                snr_low_db: self.snr_low(),
            },
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs_per_round: self.epochs_per_round,
            rounds: self.rounds,
            n_agents: self.n_agents,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            seed,
            agg_weights: None,
        }
    }

    /// Effective configuration as `key = value` lines (output path excluded).
    pub fn to_kv_lines(&self) -> Vec<String> {
        let scen: Vec<&str> = self.scenarios.iter().map(Scenario::tag).collect();
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut lines = vec![
            format!("scenarios = {}", scen.join(",")),
            format!("seeds = {}", seeds.join(",")),
            format!("mode = {}", self.mode.tag()),
        ];
        if self.mode == Mode::Physical {
            lines.push(format!("theta = {}", self.theta()));
            lines.push(format!("snr_high = {}", self.snr_high()));
            lines.push(format!("snr_low = {}", self.snr_low()));
        }
        let mut rest = String::new();
        let _ = write!(
            rest,
            "decimals = {}\nlowres_int_bits = {}\nlearning_rate = {}\nbatch_size = {}\nrounds = {}\n\
             epochs_per_round = {}\nn_agents = {}\nper_agent = {}",
            self.decimals,
            self.lowres_int_bits,
            self.learning_rate,
            self.batch_size,
            self.rounds,
            self.epochs_per_round,
            self.n_agents,
            self.per_agent
        );
        lines.extend(rest.lines().map(String::from));
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_syntax() {
        assert_eq!(parse_seeds("0-3,7").unwrap(), vec![0, 1, 2, 3, 7]);
        assert_eq!(parse_seeds("1").unwrap(), vec![1]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn file_text_and_echo_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("# comment\nscenarios = high, low\nseeds = 4-5\nmode = physical\ntheta = 0.2\n\nrounds=3\n")
            .unwrap();
        assert_eq!(cfg.scenarios, vec![Scenario::High, Scenario::Low]);
        assert_eq!(cfg.seeds, vec![4, 5]);
        assert_eq!(cfg.theta(), 0.2);
        assert_eq!(cfg.snr_low(), DEFAULT_SNR_LOW_DB);
        cfg.validate().unwrap();

        let mut again = ExperimentConfig::default();
        again.apply_text(&cfg.to_kv_lines().join("\n")).unwrap();
        assert_eq!(again.to_kv_lines(), cfg.to_kv_lines());
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.apply_text("rounds 3").is_err());
        cfg.set("theta", "0.1").unwrap();
        assert!(cfg.validate().is_err(), "theta outside physical mode");
        let mut cfg = ExperimentConfig::default();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("mode", "physical").unwrap();
        cfg.set("theta", "1.0").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("decimals", "9").unwrap();
        assert!(cfg.validate().is_err());
    }
}
