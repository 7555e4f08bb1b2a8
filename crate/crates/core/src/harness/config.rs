use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::grid::UtilityMap;
use crate::planner::PlannerConfig;
use crate::sensing::SensingParams;

/// Experiment configuration. Every key has a default, so a JSON file only
/// needs the values it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Side length(s) of the square grid; a single number or a list.
    #[serde(deserialize_with = "one_or_many")]
    pub grid_size: Vec<usize>,
    pub fire_fraction: f64,
    /// Red, yellow and green fractions; must sum to one.
    pub class_mix: [f64; 3],
    pub fuel_init: u8,
    pub q_values: Vec<f64>,
    pub n_initial_states: usize,
    /// Number of wind/rate combinations, at most 256.
    pub n_spread_scenarios: usize,
    pub horizon: usize,
    /// Intensity threshold for binarizing imported fire data. Synthetic
    /// scenarios are already binary and ignore it.
    pub frp_threshold: f64,
    pub seed: u64,
    /// Wind modulation strength shared by all spread scenarios.
    pub wind_strength: f64,
    pub deterministic_spread: bool,
    /// Share the environment's random stream across policies per
    /// (scenario, step).
    pub common_random_numbers: bool,
    pub utilities: UtilityMap<f64>,
    pub sensing: SensingParams<f64>,
    pub planner: PlannerConfig<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            grid_size: vec![4],
            fire_fraction: 0.10,
            class_mix: [0.2, 0.3, 0.5],
            fuel_init: 5,
            q_values: vec![1.0, 0.9, 0.8],
            n_initial_states: 6,
            n_spread_scenarios: 256,
            horizon: 100,
            frp_threshold: 0.5,
            seed: 0,
            wind_strength: 0.5,
            deterministic_spread: false,
            common_random_numbers: true,
            utilities: UtilityMap::default(),
            sensing: SensingParams::default(),
            planner: PlannerConfig::default(),
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(n) => vec![n],
        OneOrMany::Many(v) => v,
    })
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.grid_size.is_empty() {
            return bad("grid_size list is empty".into());
        }
        if let Some(g) = self.grid_size.iter().find(|&&g| !(2..=255).contains(&g)) {
            return bad(format!("grid size {g} outside [2, 255]"));
        }
        if !(0.0..=1.0).contains(&self.fire_fraction) {
            return bad(format!("fire_fraction {} outside [0, 1]", self.fire_fraction));
        }
        if self.class_mix.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad(format!("class_mix {:?} has a fraction outside [0, 1]", self.class_mix));
        }
        if (self.class_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("class_mix {:?} does not sum to 1", self.class_mix));
        }
        if self.fuel_init == 0 {
            return bad("fuel_init must be at least 1".into());
        }
        if self.q_values.is_empty() {
            return bad("q_values list is empty".into());
        }
        if let Some(q) = self.q_values.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return bad(format!("q = {q} outside [0, 1]"));
        }
        if self.n_initial_states == 0 {
            return bad("n_initial_states must be positive".into());
        }
        if !(1..=256).contains(&self.n_spread_scenarios) {
            return bad(format!("n_spread_scenarios {} outside [1, 256]", self.n_spread_scenarios));
        }
        if !(0.0..=1.0).contains(&self.wind_strength) {
            return bad(format!("wind_strength {} outside [0, 1]", self.wind_strength));
        }
        self.sensing.validate()?;
        self.planner.validate()
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_initial_states * self.n_spread_scenarios
    }
}
