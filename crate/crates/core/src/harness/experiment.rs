use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::episode::{run_episode, EpisodeResult, Policy};
use super::scenario::generate_scenario;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

pub const EPISODES_CSV: &str = "episodes.csv";
pub const AGGREGATE_CSV: &str = "aggregate.csv";

const EPISODE_HEADER: &str = "grid_size,q,policy,init_state,scenario,seed,neg_utility,steps,wall_ms";
const AGGREGATE_HEADER: &str = "grid_size,q,policy,episodes,mean_neg_utility,mean_steps";

/// Mean outcome of one `(grid_size, q, policy)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub grid_size: usize,
    pub q: f64,
    pub policy: Policy,
    pub episodes: usize,
    pub mean_neg_utility: f64,
    pub mean_steps: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub episodes: Vec<EpisodeResult>,
    pub aggregates: Vec<AggregateRow>,
    pub episodes_path: PathBuf,
    pub aggregate_path: PathBuf,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    grid_size: usize,
    q_index: usize,
    q: f64,
    policy: Policy,
    scenario: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Runs every `(grid_size, q, policy, initial state, spread scenario)`
/// combination on `workers` threads and writes `episodes.csv` (one row per
/// episode, in job order) and `aggregate.csv` into `out_dir`.
///
/// Output files are created before any episode runs, so an unwritable
/// directory fails fast. Episode seeds depend only on the configuration, so
/// results do not depend on `workers`.
pub fn run_experiment(cfg: &ScenarioConfig, out_dir: &Path, workers: usize) -> Result<ExperimentOutput> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let episodes_path = out_dir.join(EPISODES_CSV);
    let aggregate_path = out_dir.join(AGGREGATE_CSV);
    let mut episodes_out = create(&episodes_path)?;
    let mut aggregate_out = create(&aggregate_path)?;

    let mut jobs = Vec::new();
    for &grid_size in &cfg.grid_size {
        for (q_index, &q) in cfg.q_values.iter().enumerate() {
            for policy in Policy::ALL {
                for scenario in 0..cfg.n_scenarios() {
                    jobs.push(Job {
                        grid_size,
                        q_index,
                        q,
                        policy,
                        scenario,
                    });
                }
            }
        }
    }
    info!("running {} episodes on {} worker(s)", jobs.len(), workers.max(1));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let episodes: Vec<EpisodeResult> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let scenario = generate_scenario(cfg, job.grid_size, job.scenario)?;
                // no policy in the key: both policies face the same randomness
                let seed = derive_seed(cfg.seed, &[job.grid_size as u64, job.q_index as u64, job.scenario as u64]);
                run_episode(&scenario, job.policy, job.q, cfg, seed)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut write_episodes = || -> std::io::Result<()> {
        writeln!(episodes_out, "{EPISODE_HEADER}")?;
        for e in &episodes {
            writeln!(
                episodes_out,
                "{},{},{},{},{},{},{},{},{:.3}",
                e.grid_size, e.q, e.policy, e.init_state, e.scenario, e.seed, e.neg_utility, e.steps, e.wall_ms
            )?;
        }
        episodes_out.flush()
    };
    write_episodes().map_err(|e| Error::io(&episodes_path, e))?;

    let aggregates = aggregate(&episodes);
    let mut write_aggregate = || -> std::io::Result<()> {
        writeln!(aggregate_out, "{AGGREGATE_HEADER}")?;
        for a in &aggregates {
            writeln!(
                aggregate_out,
                "{},{},{},{},{},{}",
                a.grid_size, a.q, a.policy, a.episodes, a.mean_neg_utility, a.mean_steps
            )?;
        }
        aggregate_out.flush()
    };
    write_aggregate().map_err(|e| Error::io(&aggregate_path, e))?;

    Ok(ExperimentOutput {
        episodes,
        aggregates,
        episodes_path,
        aggregate_path,
    })
}

/// Groups episodes by `(grid_size, q, policy)` in first-seen order.
fn aggregate(episodes: &[EpisodeResult]) -> Vec<AggregateRow> {
    let mut rows: Vec<(AggregateRow, f64, f64)> = Vec::new();
    for e in episodes {
        let slot = rows
            .iter_mut()
            .find(|(r, _, _)| r.grid_size == e.grid_size && r.q == e.q && r.policy == e.policy);
        let slot = match slot {
            Some(s) => s,
            None => {
                rows.push((
                    AggregateRow {
                        grid_size: e.grid_size,
                        q: e.q,
                        policy: e.policy,
                        episodes: 0,
                        mean_neg_utility: 0.0,
                        mean_steps: 0.0,
                    },
                    0.0,
                    0.0,
                ));
                rows.last_mut().expect("just pushed")
            }
        };
        slot.0.episodes += 1;
        slot.1 += e.neg_utility;
        slot.2 += e.steps as f64;
    }
    rows.into_iter()
        .map(|(mut r, cost, steps)| {
            r.mean_neg_utility = cost / r.episodes as f64;
            r.mean_steps = steps / r.episodes as f64;
            r
        })
        .collect()
}

/// Side-by-side table of baseline and UAFR means per `(grid_size, q)`.
pub fn format_aggregate_table(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>5} {:>5} {:>14} {:>14} {:>9}", "grid", "q", "baseline", "uafr", "improve%");
    let mut keys: Vec<(usize, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(g, q)| g == r.grid_size && q == r.q) {
            keys.push((r.grid_size, r.q));
        }
    }
    for (g, q) in keys {
        let find = |p| rows.iter().find(|r| r.grid_size == g && r.q == q && r.policy == p);
        let base = find(Policy::Baseline).map(|r| r.mean_neg_utility);
        let uafr = find(Policy::Uafr).map(|r| r.mean_neg_utility);
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        let improve = match (base, uafr) {
            (Some(b), Some(u)) if b > 0.0 => format!("{:.2}", 100.0 * (b - u) / b),
            _ => "-".to_string(),
        };
        let _ = writeln!(out, "{g:>5} {q:>5} {:>14} {:>14} {improve:>9}", fmt(base), fmt(uafr));
    }
    out
}
