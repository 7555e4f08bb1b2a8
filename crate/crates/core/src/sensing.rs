//! Observation model.
//!
//! Cells receiving suppression are seen exactly. Every other cell is reported
//! burning iff its one-step marginal probability of burning, computed from the
//! previous state under the known dynamics, strictly exceeds `gamma_obs`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsParams, Kernel};
use crate::error::{Error, Result};
use crate::grid::{Action, GridState};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SensingParams<T> {
    /// Threshold on the one-step burn marginal for cells not acted on.
    pub gamma_obs: T,
    /// Per-cell disagreement probability in the likelihood; 0 gives an exact
    /// match indicator.
    #[serde(default)]
    pub eta: T,
}

impl<T: Scalar> SensingParams<T> {
    pub fn new(gamma_obs: T, eta: T) -> Result<Self> {
        let p = Self { gamma_obs, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma_obs.is_probability() {
            return Err(Error::InvalidParameter(format!("gamma_obs = {} outside [0, 1]", self.gamma_obs)));
        }
        if !self.eta.is_probability() {
            return Err(Error::InvalidParameter(format!("eta = {} outside [0, 1]", self.eta)));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for SensingParams<T> {
    fn default() -> Self {
        Self {
            gamma_obs: T::lit(0.5),
            eta: T::zero(),
        }
    }
}

/// Per-cell binary "seen burning" flags.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation {
    rows: usize,
    cols: usize,
    seen: Vec<bool>,
}

impl Observation {
    pub fn new(rows: usize, cols: usize, seen: Vec<bool>) -> Result<Self> {
        if seen.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} cells", rows * cols),
                found: format!("{} flags", seen.len()),
            });
        }
        Ok(Self { rows, cols, seen })
    }

    /// Full observability of `state`'s fire map.
    pub fn of_state(state: &GridState) -> Self {
        Self {
            rows: state.rows(),
            cols: state.cols(),
            seen: state.fire().to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    #[inline]
    pub fn seen(&self, cell: usize) -> bool {
        self.seen[cell]
    }

    pub fn flags(&self) -> &[bool] {
        &self.seen
    }

    pub fn any(&self) -> bool {
        self.seen.iter().any(|&b| b)
    }

    fn check_shape(&self, state: &GridState) -> Result<()> {
        if self.rows != state.rows() || self.cols != state.cols() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", state.rows(), state.cols()),
                found: format!("{}x{}", self.rows, self.cols),
            });
        }
        Ok(())
    }
}

fn check_pair(prev: &GridState, state: &GridState) -> Result<()> {
    if !prev.same_shape(state) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", prev.rows(), prev.cols()),
            found: format!("{}x{}", state.rows(), state.cols()),
        });
    }
    Ok(())
}

#[inline]
fn emitted<T: Scalar>(
    prev: &GridState,
    state: &GridState,
    action: &Action,
    dynamics: &DynamicsParams<T>,
    kernel: &Kernel<'_, T>,
    gamma_obs: T,
    cell: usize,
) -> bool {
    if action.contains(cell) {
        state.is_burning(cell)
    } else {
        dynamics.burn_marginal(kernel, prev, cell) > gamma_obs
    }
}

pub(crate) fn observe_unchecked<T: Scalar>(
    prev: &GridState,
    state: &GridState,
    action: &Action,
    dynamics: &DynamicsParams<T>,
    kernel: &Kernel<'_, T>,
    sensing: &SensingParams<T>,
) -> Observation {
    let seen = (0..state.len())
        .map(|c| emitted(prev, state, action, dynamics, kernel, sensing.gamma_obs, c))
        .collect();
    Observation {
        rows: state.rows(),
        cols: state.cols(),
        seen,
    }
}

/// Observation emitted after the transition `prev -> state` under `action`.
pub fn observe<T: Scalar>(
    prev: &GridState,
    state: &GridState,
    action: &Action,
    dynamics: &DynamicsParams<T>,
    sensing: &SensingParams<T>,
) -> Result<Observation> {
    check_pair(prev, state)?;
    action.validate_for(state)?;
    Ok(observe_unchecked(prev, state, action, dynamics, &dynamics.kernel(), sensing))
}

pub(crate) fn likelihood_unchecked<T: Scalar>(
    o: &Observation,
    prev: &GridState,
    state: &GridState,
    action: &Action,
    dynamics: &DynamicsParams<T>,
    kernel: &Kernel<'_, T>,
    sensing: &SensingParams<T>,
) -> T {
    let exact = sensing.eta == T::zero();
    let agree = T::one() - sensing.eta;
    let mut w = T::one();
    for cell in 0..state.len() {
        let e = emitted(prev, state, action, dynamics, kernel, sensing.gamma_obs, cell);
        if e == o.seen[cell] {
            w = w * agree;
        } else if exact {
            return T::zero();
        } else {
            w = w * sensing.eta;
        }
    }
    w
}

/// Likelihood of observing `o` after the transition `prev -> state`.
///
/// With `eta = 0` this is 1 when `o` is exactly what [`observe`] would emit and
/// 0 otherwise. With `eta > 0` each cell contributes `1 - eta` on agreement and
/// `eta` on disagreement.
pub fn observation_likelihood<T: Scalar>(
    o: &Observation,
    prev: &GridState,
    state: &GridState,
    action: &Action,
    dynamics: &DynamicsParams<T>,
    sensing: &SensingParams<T>,
) -> Result<T> {
    check_pair(prev, state)?;
    o.check_shape(state)?;
    Ok(likelihood_unchecked(o, prev, state, action, dynamics, &dynamics.kernel(), sensing))
}
