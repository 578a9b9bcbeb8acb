//! Experiment configuration: per-experiment defaults, JSON file, then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlkg_core::{EvolutionConfig, ModelParams, RadialGrid};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GroundState,
    Evolve,
    Stability,
    Instability,
    ScalingLaw,
    Identities,
    Inequalities,
    Section4,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::GroundState,
        Experiment::Evolve,
        Experiment::Stability,
        Experiment::Instability,
        Experiment::ScalingLaw,
        Experiment::Identities,
        Experiment::Inequalities,
        Experiment::Section4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GroundState => "ground-state",
            Experiment::Evolve => "evolve",
            Experiment::Stability => "stability",
            Experiment::Instability => "instability",
            Experiment::ScalingLaw => "scaling-law",
            Experiment::Identities => "identities",
            Experiment::Inequalities => "inequalities",
            Experiment::Section4 => "section4",
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown experiment '{s}'")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Invalid or inconsistent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// ω as a number or the name `"omega_c"` for the threshold frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Omega {
    Value(f64),
    Named(OmegaName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaName {
    #[serde(rename = "omega_c")]
    OmegaC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub d: usize,
    pub p: f64,
    pub gamma: f64,
    pub omega: Omega,
}

impl ParamsBlock {
    pub fn new(d: usize, p: f64, gamma: f64, omega: f64) -> Self {
        Self { d, p, gamma, omega: Omega::Value(omega) }
    }

    pub fn resolve(&self) -> Result<ModelParams, ConfigError> {
        let base = ModelParams::new(self.d, self.p, self.gamma, 0.0).map_err(|e| ConfigError(e.to_string()))?;
        let omega = match self.omega {
            Omega::Value(w) => w,
            Omega::Named(OmegaName::OmegaC) => base
                .omega_c
                .ok_or_else(|| ConfigError(format!("omega_c is undefined at d = {}, p = {}", self.d, self.p)))?,
        };
        base.with_omega(omega).map_err(|e| ConfigError(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionBlock {
    pub cfl: f64,
    pub t_end: f64,
    /// Overrides cfl·h when set.
    pub dt: Option<f64>,
    pub blowup_h1_factor: f64,
    pub blowup_amp: f64,
    pub bounded_factor: f64,
    pub monitor_stride: Option<usize>,
}

impl EvolutionBlock {
    pub fn build(&self, grid: &RadialGrid) -> EvolutionConfig {
        let mut cfg = EvolutionConfig::for_grid(grid, self.t_end, self.cfl);
        if let Some(dt) = self.dt {
            cfg = cfg.with_dt(dt);
        }
        if let Some(k) = self.monitor_stride {
            cfg.monitor_stride = k;
        }
        cfg.blowup_h1_factor = self.blowup_h1_factor;
        cfg.blowup_amp = self.blowup_amp;
        cfg.bounded_factor = self.bounded_factor;
        cfg
    }
}

impl Default for EvolutionBlock {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            t_end: 50.0,
            dt: None,
            blowup_h1_factor: 1e3,
            blowup_amp: 1e6,
            bounded_factor: 10.0,
            monitor_stride: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Parameter sets; most experiments use one, the ground-state suite accepts several.
    pub params: Vec<ParamsBlock>,
    pub grid: GridBlock,
    pub evolution: EvolutionBlock,
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub omegas: Vec<f64>,
    /// Extra frequencies above ω_c used for the convexity check.
    pub convexity_omegas: Vec<f64>,
    pub radii: Vec<f64>,
    /// Virial indices for the minimizer cross-check, as "d,2", "2,p-1" or "0,-1".
    pub indices: Vec<String>,
    /// Orbit-distance threshold of the stability experiment.
    pub epsilon: f64,
    /// H¹ growth accepted in place of a blow-up verdict.
    pub growth_factor: f64,
    pub corpus_size: usize,
    pub rng_seed: u64,
    /// Retry a failing stability or instability run once at doubled resolution.
    pub retry: bool,
    pub write_trajectories: bool,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Built-in configuration of each experiment.
    pub fn default_for(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            params: vec![ParamsBlock::new(3, 2.0, 1.0, 0.8)],
            grid: GridBlock { r_max: 40.0, n: 4096 },
            evolution: EvolutionBlock::default(),
            lambdas: vec![],
            deltas: vec![],
            seeds: vec![],
            omegas: vec![],
            convexity_omegas: vec![],
            radii: vec![],
            indices: vec![],
            epsilon: 5e-2,
            growth_factor: 10.0,
            corpus_size: 100,
            rng_seed: 2024,
            retry: true,
            write_trajectories: true,
            out: None,
        };
        match experiment {
            Experiment::GroundState => Self {
                params: vec![
                    ParamsBlock::new(3, 3.0, 1.0, 0.5),
                    ParamsBlock::new(3, 2.0, 1.0, 0.3),
                    ParamsBlock::new(4, 2.0, 2.0, 0.0),
                    ParamsBlock::new(3, 7.0 / 3.0, 1.0, 0.2),
                ],
                ..base
            },
            Experiment::Identities => Self {
                params: vec![ParamsBlock::new(3, 3.0, 1.0, 0.5), ParamsBlock::new(3, 2.0, 1.0, 0.3)],
                indices: vec!["0,-1".into(), "d,2".into()],
                ..base
            },
            Experiment::Evolve => Self {
                evolution: EvolutionBlock { t_end: 20.0, ..EvolutionBlock::default() },
                lambdas: vec![1.0],
                ..base
            },
            Experiment::Stability => Self {
                deltas: vec![0.0, 1e-2],
                seeds: vec![0, 1, 2, 3, 4],
                ..base
            },
            Experiment::Instability => Self {
                params: vec![ParamsBlock::new(3, 3.0, 1.0, 0.5)],
                grid: GridBlock { r_max: 60.0, n: 6144 },
                lambdas: vec![1.02, 1.05, 1.1],
                radii: vec![7.0, 14.0],
                ..base
            },
            Experiment::ScalingLaw => Self {
                params: vec![ParamsBlock::new(3, 2.0, 1.0, 0.0)],
                grid: GridBlock { r_max: 60.0, n: 4096 },
                omegas: vec![0.0, 0.2, 0.5, 0.8],
                convexity_omegas: vec![0.72, 0.76, 0.8, 0.84, 0.88],
                ..base
            },
            Experiment::Inequalities => Self {
                params: vec![ParamsBlock::new(3, 7.0 / 3.0, 1.0, 0.2)],
                grid: GridBlock { r_max: 16.0, n: 4096 },
                radii: vec![1.0, 2.0, 4.0],
                ..base
            },
            Experiment::Section4 => Self {
                deltas: vec![0.0, 1e-2],
                seeds: vec![0, 1, 2, 3, 4],
                lambdas: vec![1.5, 2.0, 3.0, 4.0],
                ..base
            },
        }
    }

    /// Defaults of `experiment`, overlaid with `file` (a JSON object, merged key by key).
    pub fn from_layers(experiment: Experiment, file: Option<&Value>) -> Result<Self, ConfigError> {
        let mut value = serde_json::to_value(Self::default_for(experiment)).map_err(|e| ConfigError(e.to_string()))?;
        if let Some(file) = file {
            if !file.is_object() {
                return Err(ConfigError("config file must hold a JSON object".into()));
            }
            if let Some(name) = file.get("experiment") {
                if name != &Value::String(experiment.name().into()) {
                    return Err(ConfigError(format!(
                        "config file is for experiment {name}, command line asks for {experiment}"
                    )));
                }
            }
            merge(&mut value, file);
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(experiment: Experiment, path: Option<&Path>) -> Result<Self, ConfigError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                Some(serde_json::from_str::<Value>(&text).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?)
            }
            None => None,
        };
        Self::from_layers(experiment, file.as_ref())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if self.params.is_empty() {
            return bad("at least one parameter set is required".into());
        }
        for p in &self.params {
            p.resolve()?;
        }
        if !(self.grid.r_max > 0.0) || self.grid.n < 16 {
            return bad(format!("grid needs r_max > 0 and n >= 16, got {:?}", self.grid));
        }
        let ev = &self.evolution;
        if !(ev.cfl > 0.0 && ev.cfl < 1.0) || !(ev.t_end > 0.0) {
            return bad(format!("evolution needs 0 < cfl < 1 and t_end > 0, got {ev:?}"));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return bad("lambdas must be positive".into());
        }
        if self.deltas.iter().any(|d| !(*d >= 0.0)) {
            return bad("deltas must be non-negative".into());
        }
        if self.omegas.iter().chain(&self.convexity_omegas).any(|w| !(w.abs() < 1.0)) {
            return bad("omegas must lie in (-1, 1)".into());
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && 2.0 * r < self.grid.r_max)) {
            return bad(format!("radii must satisfy 0 < 2R < r_max = {}", self.grid.r_max));
        }
        if !(self.epsilon > 0.0 && self.growth_factor > 1.0) {
            return bad("epsilon must be positive and growth_factor above 1".into());
        }
        Ok(())
    }

    /// The first parameter set, resolved.
    pub fn model(&self) -> Result<ModelParams, ConfigError> {
        self.params[0].resolve()
    }

    /// Applies one `key=value` override; the value is parsed as JSON, falling back to a string.
    pub fn apply_override(&mut self, arg: &str) -> Result<(), ConfigError> {
        let (key, raw) = arg
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("override '{arg}' is not key=value")))?;
        let parsed = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.into()));
        let mut value = serde_json::to_value(&*self).map_err(|e| ConfigError(e.to_string()))?;
        let mut slot = &mut value;
        for part in key.split('.') {
            slot = match slot {
                Value::Object(map) => map
                    .get_mut(part)
                    .ok_or_else(|| ConfigError(format!("unknown config key '{key}'")))?,
                Value::Array(items) => {
                    let i: usize = part.parse().map_err(|_| ConfigError(format!("bad index in '{key}'")))?;
                    items.get_mut(i).ok_or_else(|| ConfigError(format!("index out of range in '{key}'")))?
                }
                _ => return Err(ConfigError(format!("'{key}' does not name a field"))),
            };
        }
        *slot = parsed;
        let next: Self = serde_json::from_value(value).map_err(|e| ConfigError(format!("override '{arg}': {e}")))?;
        next.validate()?;
        *self = next;
        Ok(())
    }
}

fn merge(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn defaults_validate_for_every_experiment() {
        for e in Experiment::ALL {
            ExperimentConfig::default_for(e).validate().unwrap();
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn file_overrides_defaults_and_flags_override_file() {
        let file = json!({"grid": {"n": 2048}, "seeds": [7]});
        let mut cfg = ExperimentConfig::from_layers(Experiment::Stability, Some(&file)).unwrap();
        assert_eq!(cfg.grid.n, 2048);
        assert_eq!(cfg.grid.r_max, 40.0);
        assert_eq!(cfg.seeds, vec![7]);
        cfg.apply_override("grid.n=1024").unwrap();
        cfg.apply_override("params.0.omega=0.9").unwrap();
        assert_eq!(cfg.grid.n, 1024);
        assert_eq!(cfg.params[0].omega, Omega::Value(0.9));
    }

    #[test]
    fn unknown_keys_and_mismatched_experiments_are_rejected() {
        let typo = json!({"grid": {"nn": 10}});
        assert!(ExperimentConfig::from_layers(Experiment::Evolve, Some(&typo)).is_err());
        let other = json!({"experiment": "stability"});
        assert!(ExperimentConfig::from_layers(Experiment::Evolve, Some(&other)).is_err());
        let mut cfg = ExperimentConfig::default_for(Experiment::Evolve);
        assert!(cfg.apply_override("no_such=1").is_err());
        assert!(cfg.apply_override("evolution.cfl=2").is_err());
    }

    #[test]
    fn named_omega_resolves_to_threshold() {
        let b = ParamsBlock { d: 3, p: 2.0, gamma: 1.0, omega: Omega::Named(OmegaName::OmegaC) };
        let p = b.resolve().unwrap();
        assert!((p.omega - 0.5f64.sqrt()).abs() < 1e-15);
        let v: ParamsBlock = serde_json::from_value(json!({"d": 3, "p": 2, "gamma": 1, "omega": "omega_c"})).unwrap();
        assert_eq!(v, b);
        let super_critical = ParamsBlock { p: 3.0, ..b };
        assert!(super_critical.resolve().is_err());
    }
}
