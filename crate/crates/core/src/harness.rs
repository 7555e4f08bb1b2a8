//! Scenario generation, episode execution and the policy comparison
//! experiment.

mod config;
mod episode;
mod experiment;
mod scenario;

pub use config::ScenarioConfig;
pub use episode::{run_episode, run_episode_traced, EpisodeResult, Policy, TraceStep};
pub use experiment::{
    format_aggregate_table, run_experiment, AggregateRow, ExperimentOutput, AGGREGATE_CSV, EPISODES_CSV,
};
pub use scenario::{generate_scenario, Scenario, SpreadGrid};
