//! Transition model: suppression, fuel burn-down and probabilistic spread.
//!
//! One [`step`] applies, in order:
//! 1. each targeted burning cell is extinguished with probability `q`;
//! 2. every cell still burning loses one unit of fuel and goes out at zero;
//! 3. every cell that was not burning before the step and still has fuel
//!    ignites with its ignition probability, evaluated on the pre-step fire map.
//!
//! The parametric spread kernel combines independent per-neighbor ignition
//! chances with a noisy-or. A burning neighbor `j` contributes
//! `clamp(rate * (1 + strength * cos(wind - bearing(j -> cell))), 0, 1)`, where
//! bearings are compass degrees (0 = north, 90 = east) and `wind` is the
//! bearing the wind blows toward.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Action, GridState, MOORE};
use crate::scalar::Scalar;

/// Wind and base rate of spread for the parametric kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SpreadParams<T> {
    /// Compass bearing in degrees that the wind blows toward, `[0, 360)`.
    pub wind_direction: T,
    /// Wind modulation strength, `[0, 1]`.
    pub wind_strength: T,
    /// Base per-neighbor ignition chance, `[0, 1]`.
    pub base_rate: T,
}

impl<T: Scalar> SpreadParams<T> {
    pub fn new(wind_direction: T, wind_strength: T, base_rate: T) -> Result<Self> {
        let p = Self {
            wind_direction,
            wind_strength,
            base_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wind_direction >= T::zero() && self.wind_direction < T::lit(360.0)) {
            return Err(Error::InvalidParameter(format!(
                "wind direction {} outside [0, 360)",
                self.wind_direction
            )));
        }
        if !self.wind_strength.is_probability() {
            return Err(Error::InvalidParameter(format!(
                "wind strength {} outside [0, 1]",
                self.wind_strength
            )));
        }
        if !self.base_rate.is_probability() {
            return Err(Error::InvalidParameter(format!(
                "base rate {} outside [0, 1]",
                self.base_rate
            )));
        }
        Ok(())
    }

    /// Ignition contribution of a burning neighbor sitting in each [`MOORE`]
    /// slot relative to the target cell.
    pub fn contributions(&self) -> [T; 8] {
        let mut out = [T::zero(); 8];
        for (slot, &(dr, dc)) in MOORE.iter().enumerate() {
            let bearing = travel_bearing::<T>(dr, dc);
            let theta = (self.wind_direction - bearing).to_radians();
            let lambda = T::one() + self.wind_strength * theta.cos();
            out[slot] = (self.base_rate * lambda).clamp01();
        }
        out
    }
}

/// Compass bearing (degrees) of fire travelling from a neighbor at offset
/// `(dr, dc)` back to the origin cell.
fn travel_bearing<T: Scalar>(dr: isize, dc: isize) -> T {
    let east = T::lit(-dc as f64);
    let north = T::lit(dr as f64);
    let deg = east.atan2(north).to_degrees();
    if deg < T::zero() {
        deg + T::lit(360.0)
    } else {
        deg
    }
}

/// Per-cell ignition probabilities loaded from a file, standing in for an
/// externally trained spread model. A cell ignites with its tabulated
/// probability whenever at least one Moore neighbor burns.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpread<T> {
    rows: usize,
    cols: usize,
    probs: Vec<T>,
}

#[derive(Debug, Deserialize)]
struct TableRow {
    row: usize,
    col: usize,
    prob: f64,
}

impl<T: Scalar> TableSpread<T> {
    pub fn new(rows: usize, cols: usize, probs: Vec<T>) -> Result<Self> {
        if probs.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} cells", rows * cols),
                found: format!("{} probabilities", probs.len()),
            });
        }
        if let Some(i) = probs.iter().position(|p| !p.is_probability()) {
            return Err(Error::InvalidParameter(format!(
                "probability {} at cell {i} outside [0, 1]",
                probs[i]
            )));
        }
        Ok(Self { rows, cols, probs })
    }

    pub fn filled(rows: usize, cols: usize, p: T) -> Result<Self> {
        Self::new(rows, cols, vec![p; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prob(&self, cell: usize) -> T {
        self.probs[cell]
    }

    /// Reads a `row,col,prob` CSV covering every cell of a `rows x cols` grid.
    pub fn load(path: impl AsRef<Path>, rows: usize, cols: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let header = reader.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["row", "col", "prob"] {
            return Err(Error::parse(path, 1, format!("expected header `row,col,prob`, found `{}`", header.iter().collect::<Vec<_>>().join(","))));
        }
        let mut probs: Vec<Option<T>> = vec![None; rows * cols];
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let parsed: TableRow = record
                .deserialize(None)
                .map_err(|e| Error::parse(path, line, e.to_string()))?;
            if parsed.row >= rows || parsed.col >= cols {
                return Err(Error::parse(
                    path,
                    line,
                    format!("cell ({}, {}) outside the {rows}x{cols} grid", parsed.row, parsed.col),
                ));
            }
            if !(0.0..=1.0).contains(&parsed.prob) {
                return Err(Error::parse(path, line, format!("probability {} outside [0, 1]", parsed.prob)));
            }
            let slot = &mut probs[parsed.row * cols + parsed.col];
            if slot.is_some() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("duplicate entry for cell ({}, {})", parsed.row, parsed.col),
                ));
            }
            *slot = Some(T::lit(parsed.prob));
        }
        let mut out = Vec::with_capacity(probs.len());
        for (i, p) in probs.into_iter().enumerate() {
            match p {
                Some(p) => out.push(p),
                None => {
                    return Err(Error::parse(
                        path,
                        0,
                        format!("missing entry for cell ({}, {})", i / cols, i % cols),
                    ))
                }
            }
        }
        Self::new(rows, cols, out)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "row,col,prob")?;
            for (i, p) in self.probs.iter().enumerate() {
                writeln!(w, "{},{},{}", i / self.cols, i % self.cols, p)?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }
}

/// Source of ignition probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum SpreadModel<T> {
    Parametric(SpreadParams<T>),
    Table(Arc<TableSpread<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsParams<T> {
    /// Probability that suppressing a burning cell puts it out.
    pub q: T,
    pub spread: SpreadModel<T>,
    /// Ignite iff the ignition probability is at least one half.
    pub deterministic: bool,
}

impl<T: Scalar> DynamicsParams<T> {
    pub fn new(q: T, spread: SpreadModel<T>) -> Result<Self> {
        if !q.is_probability() {
            return Err(Error::InvalidParameter(format!("q = {q} outside [0, 1]")));
        }
        if let SpreadModel::Parametric(p) = &spread {
            p.validate()?;
        }
        Ok(Self {
            q,
            spread,
            deterministic: false,
        })
    }

    pub fn parametric(q: T, spread: SpreadParams<T>) -> Result<Self> {
        Self::new(q, SpreadModel::Parametric(spread))
    }

    pub fn with_deterministic(mut self, deterministic: bool) -> Self {
        self.deterministic = deterministic;
        self
    }

    pub(crate) fn kernel(&self) -> Kernel<'_, T> {
        match &self.spread {
            SpreadModel::Parametric(p) => Kernel::Parametric(p.contributions()),
            SpreadModel::Table(t) => Kernel::Table(t),
        }
    }

    fn check_table(&self, state: &GridState) -> Result<()> {
        match &self.spread {
            SpreadModel::Table(t) if t.rows != state.rows() || t.cols != state.cols() => {
                Err(Error::DimensionMismatch {
                    expected: format!("{}x{} grid", t.rows, t.cols),
                    found: format!("{}x{} grid", state.rows(), state.cols()),
                })
            }
            _ => Ok(()),
        }
    }

    /// Ignition probability of a non-burning, fuelled cell under this model.
    pub fn ignition_probability(&self, state: &GridState, cell: usize) -> Result<T> {
        state.check_index(cell)?;
        self.check_table(state)?;
        if state.is_burning(cell) || state.fuel(cell) == 0 {
            return Err(Error::NotIgnitable(cell));
        }
        Ok(self.kernel().prob(state, cell))
    }

    /// Probability that `cell` is burning after one step with no suppression
    /// applied to it. Honors deterministic mode.
    pub(crate) fn burn_marginal(&self, kernel: &Kernel<'_, T>, state: &GridState, cell: usize) -> T {
        if state.is_burning(cell) {
            if state.fuel(cell) >= 2 {
                T::one()
            } else {
                T::zero()
            }
        } else if state.fuel(cell) == 0 {
            T::zero()
        } else {
            let p = kernel.prob(state, cell);
            if self.deterministic {
                if p >= T::lit(0.5) {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                p
            }
        }
    }
}

pub(crate) enum Kernel<'a, T> {
    Parametric([T; 8]),
    Table(&'a TableSpread<T>),
}

impl<T: Scalar> Kernel<'_, T> {
    /// Noisy-or over burning neighbors; callers guarantee the cell itself is
    /// not burning and has fuel.
    #[inline]
    pub(crate) fn prob(&self, state: &GridState, cell: usize) -> T {
        match self {
            Kernel::Parametric(contrib) => {
                let mut spared = T::one();
                let mut any = false;
                for (n, slot) in state.moore(cell) {
                    if state.is_burning(n) {
                        spared = spared * (T::one() - contrib[slot]);
                        any = true;
                    }
                }
                if any {
                    T::one() - spared
                } else {
                    T::zero()
                }
            }
            Kernel::Table(t) => {
                if state.moore(cell).any(|(n, _)| state.is_burning(n)) {
                    t.prob(cell)
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Ignition probability under the parametric kernel.
pub fn ignition_probability<T: Scalar>(
    state: &GridState,
    cell: usize,
    params: &SpreadParams<T>,
) -> Result<T> {
    state.check_index(cell)?;
    if state.is_burning(cell) || state.fuel(cell) == 0 {
        return Err(Error::NotIgnitable(cell));
    }
    Ok(Kernel::Parametric(params.contributions()).prob(state, cell))
}

/// Advances `state` by one time step. The input is left unchanged.
///
/// The random stream is consumed in a fixed pattern (one suppression draw and
/// one ignition draw per cell, in index order) so that two runs sharing a
/// stream see the same per-cell randomness regardless of the action taken.
pub fn step<T: Scalar, R: Rng + ?Sized>(
    state: &GridState,
    action: &Action,
    params: &DynamicsParams<T>,
    rng: &mut R,
) -> Result<GridState> {
    action.validate_for(state)?;
    params.check_table(state)?;
    Ok(step_unchecked(state, action, params, &params.kernel(), rng))
}

pub(crate) fn step_unchecked<T: Scalar, R: Rng + ?Sized>(
    state: &GridState,
    action: &Action,
    params: &DynamicsParams<T>,
    kernel: &Kernel<'_, T>,
    rng: &mut R,
) -> GridState {
    let n = state.len();
    let mut next = state.clone();

    for cell in 0..n {
        let u = T::sample_unit(rng);
        if state.is_burning(cell) && action.contains(cell) && u < params.q {
            next.set_fire(cell, false);
        }
    }

    for cell in 0..n {
        if next.is_burning(cell) {
            next.burn_down(cell);
        }
    }

    for cell in 0..n {
        let u = T::sample_unit(rng);
        if state.is_burning(cell) || state.fuel(cell) == 0 {
            continue;
        }
        let p = kernel.prob(state, cell);
        let ignite = if params.deterministic {
            p >= T::lit(0.5)
        } else {
            u < p
        };
        if ignite {
            next.set_fire(cell, true);
        }
    }
    next
}
