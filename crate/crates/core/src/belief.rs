//! Particle belief and the rejection-free particle filter update.
//!
//! An update draws `|b|` particles uniformly with replacement, pushes each
//! through the transition model, weights the successors by the observation
//! likelihood and resamples `|b|` of them multinomially. When every weight is
//! zero the weights are reset to `1 / |b|`, so the update never fails on an
//! observation none of the particles explain.

use rand::Rng;

use crate::dynamics::{step_unchecked, DynamicsParams, Kernel};
use crate::error::{Error, Result};
use crate::grid::{Action, GridState};
use crate::scalar::Scalar;
use crate::sensing::{likelihood_unchecked, Observation, SensingParams};

/// Equally weighted set of state samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    particles: Vec<GridState>,
}

impl Belief {
    pub fn new(particles: Vec<GridState>) -> Result<Self> {
        let first = particles.first().ok_or(Error::EmptyBelief)?;
        if let Some(bad) = particles
            .iter()
            .find(|p| !p.same_shape(first) || p.classes() != first.classes())
        {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} particles sharing one class map", first.rows(), first.cols()),
                found: format!("{}x{} particle", bad.rows(), bad.cols()),
            });
        }
        Ok(Self { particles })
    }

    pub fn particles(&self) -> &[GridState] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Shape and classes shared by all particles.
    pub fn template(&self) -> &GridState {
        &self.particles[0]
    }

    pub fn marginal<T: Scalar>(&self, cell: usize) -> Result<T> {
        belief_marginal(self, cell)
    }

    /// Fraction of particles burning at each cell.
    pub fn marginals<T: Scalar>(&self) -> Vec<T> {
        marginals(&self.particles)
    }
}

pub(crate) fn marginals<T: Scalar>(particles: &[GridState]) -> Vec<T> {
    let n = particles[0].len();
    let mut counts = vec![0u32; n];
    for p in particles {
        for c in p.burning_cells() {
            counts[c] += 1;
        }
    }
    let total = T::lit(particles.len() as f64);
    counts.into_iter().map(|k| T::lit(f64::from(k)) / total).collect()
}

/// `n_particles` copies of a known state.
pub fn initial_belief(known_state: &GridState, n_particles: usize) -> Result<Belief> {
    if n_particles == 0 {
        return Err(Error::InvalidParameter("a belief needs at least one particle".into()));
    }
    Ok(Belief {
        particles: vec![known_state.clone(); n_particles],
    })
}

pub fn belief_marginal<T: Scalar>(b: &Belief, cell: usize) -> Result<T> {
    b.template().check_index(cell)?;
    let burning = b.particles.iter().filter(|p| p.is_burning(cell)).count();
    Ok(T::lit(burning as f64) / T::lit(b.len() as f64))
}

/// Replaces an all-zero weight vector by the uniform `1 / len`. Returns
/// whether the fallback fired.
pub fn reweight_if_degenerate<T: Scalar>(weights: &mut [T]) -> bool {
    let total: T = weights.iter().copied().sum();
    if total > T::zero() {
        return false;
    }
    let uniform = T::one() / T::lit(weights.len() as f64);
    weights.iter_mut().for_each(|w| *w = uniform);
    true
}

/// Draws `n` indices independently with probability proportional to
/// `weights`. The weights must have a positive sum.
pub fn multinomial_resample<T: Scalar, R: Rng + ?Sized>(weights: &[T], n: usize, rng: &mut R) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = T::zero();
    for &w in weights {
        acc = acc + w;
        cumulative.push(acc);
    }
    let last = weights.len() - 1;
    (0..n)
        .map(|_| {
            let u = T::sample_unit(rng) * acc;
            cumulative.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Result of one filter update with its diagnostics.
#[derive(Debug, Clone)]
pub struct UpdateOutcome<T> {
    pub belief: Belief,
    /// Likelihood of each propagated particle before any reweighting.
    pub weights: Vec<T>,
    /// Whether all weights were zero and the uniform fallback was used.
    pub fallback: bool,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn update_particles<T: Scalar, R: Rng + ?Sized>(
    particles: &[GridState],
    n_out: usize,
    action: &Action,
    o: &Observation,
    dynamics: &DynamicsParams<T>,
    kernel: &Kernel<'_, T>,
    sensing: &SensingParams<T>,
    rng: &mut R,
) -> (Vec<GridState>, Vec<T>, bool) {
    let mut propagated = Vec::with_capacity(n_out);
    let mut weights = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        let prev = &particles[rng.random_range(0..particles.len())];
        let next = step_unchecked(prev, action, dynamics, kernel, rng);
        weights.push(likelihood_unchecked(o, prev, &next, action, dynamics, kernel, sensing));
        propagated.push(next);
    }
    let raw = weights.clone();
    let fallback = reweight_if_degenerate(&mut weights);
    let picks = multinomial_resample(&weights, n_out, rng);
    let out = picks.into_iter().map(|k| propagated[k].clone()).collect();
    (out, raw, fallback)
}

/// Belief update with diagnostics; see [`update_belief`].
pub fn update_belief_detailed<T: Scalar, R: Rng + ?Sized>(
    b: &Belief,
    action: &Action,
    o: &Observation,
    dynamics: &DynamicsParams<T>,
    sensing: &SensingParams<T>,
    rng: &mut R,
) -> Result<UpdateOutcome<T>> {
    if b.is_empty() {
        return Err(Error::EmptyBelief);
    }
    let template = b.template();
    action.validate_for(template)?;
    if o.rows() != template.rows() || o.cols() != template.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", template.rows(), template.cols()),
            found: format!("{}x{}", o.rows(), o.cols()),
        });
    }
    // surface table/grid mismatches before sampling
    if let Some(c) = (0..template.len()).find(|&c| !template.is_burning(c) && template.fuel(c) > 0) {
        dynamics.ignition_probability(template, c)?;
    }
    let kernel = dynamics.kernel();
    let (particles, weights, fallback) =
        update_particles(&b.particles, b.len(), action, o, dynamics, &kernel, sensing, rng);
    Ok(UpdateOutcome {
        belief: Belief { particles },
        weights,
        fallback,
    })
}

/// Rejection-free particle filter update of `b` after taking `action` and
/// receiving `o`. The returned belief has exactly `|b|` particles.
pub fn update_belief<T: Scalar, R: Rng + ?Sized>(
    b: &Belief,
    action: &Action,
    o: &Observation,
    dynamics: &DynamicsParams<T>,
    sensing: &SensingParams<T>,
    rng: &mut R,
) -> Result<Belief> {
    update_belief_detailed(b, action, o, dynamics, sensing, rng).map(|u| u.belief)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{step, SpreadParams};
    use crate::grid::CellClass;
    use crate::rng::seeded_rng;
    use crate::sensing::observe;

    fn green(rows: usize, cols: usize) -> GridState {
        GridState::uniform(rows, cols, CellClass::Green, 5).unwrap()
    }

    #[test]
    fn initial_belief_replicates() {
        let s = green(3, 3).with_burning(&[4]).unwrap();
        let b = initial_belief(&s, 100).unwrap();
        assert_eq!(b.len(), 100);
        assert!(b.particles().iter().all(|p| *p == s));
        assert_eq!(initial_belief(&s, 1).unwrap().len(), 1);
        assert!(initial_belief(&s, 0).is_err());
        assert!(Belief::new(vec![]).is_err());
    }

    #[test]
    fn marginal_counts_burning_particles() {
        let off = green(2, 2);
        let on = off.clone().with_burning(&[2]).unwrap();
        let b = Belief::new(vec![on.clone(), on.clone(), on.clone(), off]).unwrap();
        assert_eq!(belief_marginal::<f64>(&b, 2).unwrap(), 0.75);
        assert_eq!(belief_marginal::<f64>(&b, 0).unwrap(), 0.0);
        let all = Belief::new(vec![on.clone(); 3]).unwrap();
        assert_eq!(belief_marginal::<f64>(&all, 2).unwrap(), 1.0);
        assert!(belief_marginal::<f64>(&b, 4).is_err());
    }

    #[test]
    fn zero_weights_fall_back_to_uniform() {
        let mut w = vec![0.0f64; 3];
        assert!(reweight_if_degenerate(&mut w));
        assert_eq!(w, vec![1.0 / 3.0; 3]);
        let mut w = vec![0.0, 2.0, 0.0];
        assert!(!reweight_if_degenerate(&mut w));
        assert_eq!(w, vec![0.0, 2.0, 0.0]);
    }

    #[test]
    fn resampling_never_picks_zero_weight() {
        let w = [0.0, 1.0, 0.0, 3.0, 0.0];
        let picks = multinomial_resample(&w, 10_000, &mut seeded_rng(9));
        assert!(picks.iter().all(|&k| k == 1 || k == 3));
        let threes = picks.iter().filter(|&&k| k == 3).count() as f64 / 10_000.0;
        assert!((threes - 0.75).abs() < 0.02, "{threes}");
    }

    #[test]
    fn update_preserves_size_and_fires_fallback_on_impossible_observation() {
        let s = green(3, 3).with_burning(&[4]).unwrap();
        let d = DynamicsParams::parametric(1.0, SpreadParams::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        let b = initial_belief(&s, 50).unwrap();
        // every cell seen burning is impossible with zero spread
        let o = Observation::new(3, 3, vec![true; 9]).unwrap();
        let out = update_belief_detailed(&b, &Action::noop(), &o, &d, &SensingParams::default(), &mut seeded_rng(0)).unwrap();
        assert!(out.fallback);
        assert_eq!(out.belief.len(), 50);
    }

    #[test]
    fn certain_suppression_posterior_has_cell_extinguished() {
        // 2x2 grid, deterministic spread, known state, act on the only fire
        let s = green(2, 2).with_burning(&[0]).unwrap();
        let d = DynamicsParams::parametric(1.0, SpreadParams::new(0.0, 0.0, 0.3).unwrap())
            .unwrap()
            .with_deterministic(true);
        let sp = SensingParams::default();
        let a = Action::new(vec![0], 4, 1).unwrap();
        let truth = step(&s, &a, &d, &mut seeded_rng(1)).unwrap();
        let o = observe(&s, &truth, &a, &d, &sp).unwrap();
        // exhaustive: the only reachable successor has nothing burning
        assert_eq!(truth.n_burning(), 0);
        let b = update_belief(&initial_belief(&s, 40).unwrap(), &a, &o, &d, &sp, &mut seeded_rng(2)).unwrap();
        assert_eq!(b.len(), 40);
        assert!(b.particles().iter().all(|p| !p.is_burning(0) && *p == truth));
    }

    #[test]
    fn mismatched_observation_is_rejected() {
        let s = green(2, 2);
        let d = DynamicsParams::parametric(1.0, SpreadParams::new(0.0, 0.0, 0.3).unwrap()).unwrap();
        let o = Observation::new(3, 3, vec![false; 9]).unwrap();
        let b = initial_belief(&s, 3).unwrap();
        assert!(update_belief(&b, &Action::noop(), &o, &d, &SensingParams::default(), &mut seeded_rng(0)).is_err());
    }
}
