use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::config::ScenarioConfig;
use super::scenario::Scenario;
use crate::belief::{initial_belief, update_belief};
use crate::dynamics::{step, DynamicsParams};
use crate::error::{Error, Result};
use crate::grid::{reward, Action};
use crate::planner::{baseline_policy, plan};
use crate::rng::stream;
use crate::sensing::{observe, Observation};

const ENV_STREAM: u64 = 0xE0;
const AGENT_STREAM: u64 = 0xA0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Baseline,
    Uafr,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Baseline, Policy::Uafr];

    fn tag(self) -> u64 {
        match self {
            Policy::Baseline => 1,
            Policy::Uafr => 2,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Baseline => "baseline",
            Policy::Uafr => "uafr",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Policy::Baseline),
            "uafr" => Ok(Policy::Uafr),
            other => Err(Error::InvalidParameter(format!("unknown policy `{other}`"))),
        }
    }
}

/// Outcome of one episode. `neg_utility` is the accumulated cost
/// `sum_t |R(s_t)|`, reported as a positive number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub grid_size: usize,
    pub q: f64,
    pub policy: Policy,
    pub init_state: usize,
    pub scenario: usize,
    pub seed: u64,
    pub neg_utility: f64,
    pub steps: usize,
    pub wall_ms: f64,
    /// Largest number of cells targeted by any action in the episode.
    pub max_targets: usize,
}

/// One step of an episode trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub fire: Vec<u8>,
    pub fuel: Vec<u8>,
    pub observation: Vec<u8>,
    pub action: Vec<usize>,
    pub reward: f64,
}

fn bits(flags: &[bool]) -> Vec<u8> {
    flags.iter().map(|&b| u8::from(b)).collect()
}

pub fn run_episode(
    scenario: &Scenario,
    policy: Policy,
    q: f64,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<EpisodeResult> {
    run_episode_traced(scenario, policy, q, cfg, seed, |_| {})
}

/// Runs one episode, calling `trace` once per executed step with the state
/// before the transition, the observation the policy acted on and its action.
///
/// The environment draws from a stream keyed by `(seed, step)`, shared across
/// policies when `cfg.common_random_numbers` is set; the agent's own sampling
/// uses a separate per-policy stream.
pub fn run_episode_traced(
    scenario: &Scenario,
    policy: Policy,
    q: f64,
    cfg: &ScenarioConfig,
    seed: u64,
    mut trace: impl FnMut(TraceStep),
) -> Result<EpisodeResult> {
    let started = Instant::now();
    let dynamics = DynamicsParams::parametric(q, scenario.spread)?.with_deterministic(cfg.deterministic_spread);
    let k_max = cfg.planner.k_max;

    let mut state = scenario.state.clone();
    let mut observation = Observation::of_state(&state);
    let mut belief = match policy {
        Policy::Uafr => Some(initial_belief(&state, cfg.planner.n_particles)?),
        Policy::Baseline => None,
    };

    let mut cost = 0.0;
    let mut steps = 0;
    let mut max_targets = 0;
    for t in 0..cfg.horizon {
        if !state.any_burning() {
            break;
        }
        let r = reward(&state, &cfg.utilities);
        cost += -r;

        let mut agent_rng = stream(seed, &[AGENT_STREAM, policy.tag(), t as u64]);
        let action: Action = match &belief {
            Some(b) => plan(b, &cfg.planner, &dynamics, &cfg.sensing, &cfg.utilities, &mut agent_rng)?,
            None => baseline_policy(&observation, state.classes(), &cfg.utilities, k_max)?,
        };
        max_targets = max_targets.max(action.len());
        trace(TraceStep {
            t,
            fire: bits(state.fire()),
            fuel: state.fuels().to_vec(),
            observation: bits(observation.flags()),
            action: action.targets().to_vec(),
            reward: r,
        });

        let env_key = if cfg.common_random_numbers { 0 } else { policy.tag() };
        let mut env_rng = stream(seed, &[ENV_STREAM, env_key, t as u64]);
        let next = step(&state, &action, &dynamics, &mut env_rng)?;
        observation = observe(&state, &next, &action, &dynamics, &cfg.sensing)?;
        if let Some(b) = belief.as_mut() {
            *b = update_belief(b, &action, &observation, &dynamics, &cfg.sensing, &mut agent_rng)?;
        }
        state = next;
        steps += 1;
    }

    Ok(EpisodeResult {
        grid_size: scenario.grid_size,
        q,
        policy,
        init_state: scenario.init_state,
        scenario: scenario.spread_index,
        seed,
        neg_utility: cost,
        steps,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        max_targets,
    })
}
