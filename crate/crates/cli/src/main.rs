use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use wildfire_core::harness::{
    format_aggregate_table, generate_scenario, run_episode_traced, run_experiment, Policy, ScenarioConfig,
};
use wildfire_core::zonal::{
    build_intersections, export_covariates, neighbor_join, read_ascii_layer, read_polygons, zonal_stats, RasterLayer,
    Stat, StatsTable, ZonalResult,
};

#[derive(Parser)]
#[command(name = "wildfire", version, about = "Wildfire suppression planning and zonal statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the baseline vs. planner comparison over every configured scenario.
    Experiment {
        /// JSON scenario configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for episodes.csv and aggregate.csv.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses every available core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Run a single episode.
    Simulate {
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        policy: Policy,
        /// Suppression success probability.
        #[arg(long)]
        q: f64,
        #[arg(long)]
        seed: u64,
        /// Scenario index within the grid size (initial state * spread scenarios + spread).
        #[arg(long, default_value_t = 0)]
        scenario: usize,
        /// Optional JSON configuration; the grid size is overridden by --grid.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write one JSON object per step to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Zonal statistics of raster layers over polygons.
    Zonal {
        /// ASCII grid raster; repeat for several layers on the same grid.
        #[arg(long, required = true)]
        raster: Vec<PathBuf>,
        /// CSV with columns id,wkt.
        #[arg(long)]
        polygons: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "min,max,median,sum,mode,count")]
        stats: String,
        /// Also write intersecting polygon pairs to this CSV.
        #[arg(long)]
        neighbors: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn experiment(config: &Path, out: &Path, workers: usize) -> Result<()> {
    let cfg = load_config(config)?;
    let workers = match workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    };
    let output = run_experiment(&cfg, out, workers)?;
    print!("{}", format_aggregate_table(&output.aggregates));
    log::info!("wrote {} and {}", output.episodes_path.display(), output.aggregate_path.display());
    Ok(())
}

fn simulate(
    grid: usize,
    policy: Policy,
    q: f64,
    seed: u64,
    scenario: usize,
    config: Option<&Path>,
    trace: Option<&Path>,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => load_config(p)?,
        None => ScenarioConfig::default(),
    };
    cfg.grid_size = vec![grid];
    cfg.seed = seed;
    cfg.validate()?;
    let sc = generate_scenario(&cfg, grid, scenario)?;

    let mut writer = match trace {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let mut trace_err = None;
    let result = run_episode_traced(&sc, policy, q, &cfg, seed, |step| {
        if let Some(w) = writer.as_mut() {
            if trace_err.is_none() {
                let line = serde_json::to_string(&step).map_err(anyhow::Error::from);
                let res = line.and_then(|l| writeln!(w, "{l}").map_err(anyhow::Error::from));
                trace_err = res.err();
            }
        }
    })?;
    if let Some(e) = trace_err {
        return Err(e.context("writing trace"));
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    println!("{}", serde_json::to_string(&result)?);
    Ok(())
}

fn layer_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "layer".into())
}

fn zonal(rasters: &[PathBuf], polygons: &Path, out: &Path, stats: &str, neighbors: Option<&Path>) -> Result<()> {
    let stats = Stat::parse_list(stats)?;
    let polys = read_polygons(polygons)?;
    let layers: Vec<RasterLayer> = rasters
        .iter()
        .map(|p| read_ascii_layer(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<_>>()?;
    let meta = *layers[0].metadata();
    for (layer, path) in layers.iter().zip(rasters).skip(1) {
        let m = layer.metadata();
        if (m.n_rows, m.n_cols, m.x_origin, m.y_origin, m.cell_size)
            != (meta.n_rows, meta.n_cols, meta.x_origin, meta.y_origin, meta.cell_size)
        {
            bail!("{} is not on the same grid as {}", path.display(), rasters[0].display());
        }
    }

    let ix = build_intersections(&polys, &meta);
    log::info!("{} polygons, {} row ranges", polys.len(), ix.entries().len());
    enum Computed {
        Int(ZonalResult<i64>),
        Float(ZonalResult<f64>),
    }
    let results: Vec<Computed> = layers
        .iter()
        .map(|l| -> Result<Computed> {
            Ok(match l {
                RasterLayer::Int(r) => Computed::Int(zonal_stats(&ix, r)?),
                RasterLayer::Float(r) => Computed::Float(zonal_stats(&ix, r)?),
            })
        })
        .collect::<Result<_>>()?;
    let names: Vec<String> = rasters.iter().map(|p| layer_name(p)).collect();
    let tables: Vec<(&str, &dyn StatsTable)> = names
        .iter()
        .zip(&results)
        .map(|(n, r)| {
            let t: &dyn StatsTable = match r {
                Computed::Int(z) => z,
                Computed::Float(z) => z,
            };
            (n.as_str(), t)
        })
        .collect();
    let rows = export_covariates(&tables, &stats, out)?;
    log::info!("wrote {rows} rows to {}", out.display());

    if let Some(path) = neighbors {
        let pairs = neighbor_join(&polys);
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "id_a,id_b")?;
        for (a, b) in &pairs {
            writeln!(w, "{a},{b}")?;
        }
        w.flush()?;
        log::info!("wrote {} neighbor pairs to {}", pairs.len(), path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Experiment { config, out, workers } => experiment(&config, &out, workers),
        Command::Simulate {
            grid,
            policy,
            q,
            seed,
            scenario,
            config,
            trace,
        } => simulate(grid, policy, q, seed, scenario, config.as_deref(), trace.as_deref()),
        Command::Zonal {
            raster,
            polygons,
            out,
            stats,
            neighbors,
        } => zonal(&raster, &polygons, &out, &stats, neighbors.as_deref()),
    }
}
