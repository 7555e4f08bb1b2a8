use rand::seq::{index, SliceRandom};

use super::config::ScenarioConfig;
use crate::dynamics::SpreadParams;
use crate::error::{Error, Result};
use crate::grid::{CellClass, GridState};
use crate::rng::stream;

const INIT_STREAM: u64 = 0x1417;

/// The full wind x rate lattice: 16 wind bearings in 22.5 degree steps times 16
/// base rates evenly spaced on `[0.05, 0.8]`.
#[derive(Debug, Clone, Copy)]
pub struct SpreadGrid;

impl SpreadGrid {
    pub const WINDS: usize = 16;
    pub const RATES: usize = 16;
    pub const SIZE: usize = Self::WINDS * Self::RATES;

    pub fn wind(i: usize) -> f64 {
        22.5 * i as f64
    }

    pub fn rate(i: usize) -> f64 {
        0.05 + 0.75 * i as f64 / (Self::RATES - 1) as f64
    }

    /// Maps the `k`-th of `n` spread scenarios onto the lattice, spacing the
    /// picks evenly when `n < 256`. Returns `(wind index, rate index)`.
    pub fn decode(k: usize, n: usize) -> (usize, usize) {
        let combo = k * Self::SIZE / n;
        (combo / Self::RATES, combo % Self::RATES)
    }
}

/// One starting configuration of the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid_size: usize,
    pub index: usize,
    pub init_state: usize,
    pub spread_index: usize,
    pub state: GridState,
    pub spread: SpreadParams<f64>,
}

fn floor_count(fraction: f64, n: usize) -> usize {
    // absorb representation error such as 0.29 * 100 = 28.999999999999996
    ((fraction * n as f64) + 1e-9).floor() as usize
}

/// Largest-remainder apportionment of `n` cells over the class mix.
fn class_counts(mix: &[f64; 3], n: usize) -> [usize; 3] {
    let mut counts = [0usize; 3];
    let mut rema = [(0.0f64, 0usize); 3];
    for k in 0..3 {
        let exact = mix[k] * n as f64;
        counts[k] = floor_count(mix[k], n);
        rema[k] = (exact - counts[k] as f64, k);
    }
    let left = n - counts.iter().sum::<usize>().min(n);
    rema.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
    for &(_, k) in rema.iter().take(left) {
        counts[k] += 1;
    }
    counts
}

/// Builds scenario `index` for one grid size. Scenario indices decode as
/// `init_state = index / n_spread_scenarios` and
/// `spread_index = index % n_spread_scenarios`; the initial fire map and class
/// layout depend only on `(seed, grid_size, init_state)`.
pub fn generate_scenario(cfg: &ScenarioConfig, grid_size: usize, index: usize) -> Result<Scenario> {
    if index >= cfg.n_scenarios() {
        return Err(Error::InvalidParameter(format!(
            "scenario index {index} out of range (0..{})",
            cfg.n_scenarios()
        )));
    }
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!("grid size {grid_size} below 2")));
    }
    let init_state = index / cfg.n_spread_scenarios;
    let spread_index = index % cfg.n_spread_scenarios;
    let n = grid_size * grid_size;

    let mut rng = stream(cfg.seed, &[INIT_STREAM, grid_size as u64, init_state as u64]);
    let counts = class_counts(&cfg.class_mix, n);
    let mut classes: Vec<CellClass> = CellClass::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&c, k)| std::iter::repeat_n(c, k))
        .collect();
    classes.shuffle(&mut rng);

    let n_fire = floor_count(cfg.fire_fraction, n);
    let mut fire = vec![false; n];
    for c in index::sample(&mut rng, n, n_fire) {
        fire[c] = true;
    }
    let state = GridState::new(grid_size, grid_size, classes, fire, vec![cfg.fuel_init; n])?;

    let (w, r) = SpreadGrid::decode(spread_index, cfg.n_spread_scenarios);
    let spread = SpreadParams::new(SpreadGrid::wind(w), cfg.wind_strength, SpreadGrid::rate(r))?;
    Ok(Scenario {
        grid_size,
        index,
        init_state,
        spread_index,
        state,
        spread,
    })
}
