//! Online action selection.
//!
//! [`plan`] runs a Monte Carlo tree search over alternating belief and action
//! nodes with progressive widening on both actions and observations. Each
//! observation branch keeps a particle collection: the simulated states that
//! produced it are appended as they arrive, and the first time the search
//! descends through the branch it is populated with a full particle filter
//! update of its parent belief (see [`crate::belief`]). Leaves are evaluated
//! with a rollout of [`baseline_policy`] on the simulated true state.
//!
//! [`baseline_policy`] is the greedy comparison policy: suppress the observed
//! burning cells with the largest cost.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{marginals, update_particles, Belief};
use crate::dynamics::{step_unchecked, DynamicsParams, Kernel};
use crate::error::{Error, Result};
use crate::grid::{reward, Action, CellClass, GridState, UtilityMap};
use crate::scalar::Scalar;
use crate::sensing::{observe_unchecked, Observation, SensingParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct PlannerConfig<T> {
    pub n_simulations: usize,
    pub max_depth: usize,
    pub ucb_c: T,
    pub gamma_discount: T,
    pub k_obs: T,
    pub alpha_obs: T,
    pub k_act: T,
    pub alpha_act: T,
    /// Suppression budget per step.
    pub k_max: usize,
    pub n_particles: usize,
}

impl<T: Scalar> Default for PlannerConfig<T> {
    fn default() -> Self {
        Self {
            n_simulations: 1000,
            max_depth: 10,
            ucb_c: T::lit(10.0),
            gamma_discount: T::lit(0.95),
            k_obs: T::lit(4.0),
            alpha_obs: T::lit(0.1),
            k_act: T::lit(8.0),
            alpha_act: T::lit(0.5),
            k_max: 1,
            n_particles: 100,
        }
    }
}

impl<T: Scalar> PlannerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_simulations == 0 {
            return bad("n_simulations must be positive".into());
        }
        if self.n_particles == 0 {
            return bad("n_particles must be positive".into());
        }
        if self.ucb_c.is_nan() || self.ucb_c < T::zero() {
            return bad(format!("ucb_c = {} must be >= 0", self.ucb_c));
        }
        if !self.gamma_discount.is_probability() {
            return bad(format!("gamma_discount = {} outside [0, 1]", self.gamma_discount));
        }
        for (name, k, alpha) in [("obs", self.k_obs, self.alpha_obs), ("act", self.k_act, self.alpha_act)] {
            if k.is_nan() || k <= T::zero() {
                return bad(format!("k_{name} = {k} must be > 0"));
            }
            if !(alpha >= T::zero() && alpha < T::one()) {
                return bad(format!("alpha_{name} = {alpha} outside [0, 1)"));
            }
        }
        Ok(())
    }

    /// Largest child count allowed at a node with `visits` visits.
    pub fn widening_limit(k: T, alpha: T, visits: u32) -> usize {
        let v = T::lit(f64::from(visits));
        (k * v.powf(alpha)).ceil().to_usize().unwrap_or(usize::MAX)
    }
}

/// Greedy comparison policy: among cells observed burning, suppress up to
/// `k_max` with the most negative utility, lowest index first on ties.
pub fn baseline_policy<T: Scalar>(
    o: &Observation,
    classes: &[CellClass],
    utilities: &UtilityMap<T>,
    k_max: usize,
) -> Result<Action> {
    if classes.len() != o.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} cells", o.len()),
            found: format!("{} classes", classes.len()),
        });
    }
    Ok(greedy_targets(o.flags(), classes, utilities, k_max))
}

fn greedy_targets<T: Scalar>(seen: &[bool], classes: &[CellClass], utilities: &UtilityMap<T>, k_max: usize) -> Action {
    // at most three distinct costs, so bucket by class instead of sorting
    let mut targets = Vec::with_capacity(k_max);
    let mut tiers = CellClass::ALL;
    tiers.sort_by(|a, b| {
        utilities
            .get(*a)
            .partial_cmp(&utilities.get(*b))
            .expect("finite utilities")
    });
    'outer: for tier in tiers {
        for (cell, (&s, &c)) in seen.iter().zip(classes).enumerate() {
            if targets.len() == k_max {
                break 'outer;
            }
            if s && c == tier {
                targets.push(cell);
            }
        }
    }
    targets.sort_unstable();
    Action::from_sorted_unchecked(targets)
}

/// Discounted return of following the baseline policy with full observation
/// of the simulated state, for at most `depth` steps or until the fire is out.
pub fn rollout<T: Scalar, R: Rng + ?Sized>(
    state: &GridState,
    depth: usize,
    dynamics: &DynamicsParams<T>,
    utilities: &UtilityMap<T>,
    k_max: usize,
    gamma_discount: T,
    rng: &mut R,
) -> T {
    rollout_with(state, depth, dynamics, &dynamics.kernel(), utilities, k_max, gamma_discount, rng)
}

#[allow(clippy::too_many_arguments)]
fn rollout_with<T: Scalar, R: Rng + ?Sized>(
    state: &GridState,
    depth: usize,
    dynamics: &DynamicsParams<T>,
    kernel: &Kernel<'_, T>,
    utilities: &UtilityMap<T>,
    k_max: usize,
    gamma: T,
    rng: &mut R,
) -> T {
    let mut total = T::zero();
    let mut discount = T::one();
    let mut s = state.clone();
    for _ in 0..depth {
        if !s.any_burning() {
            break;
        }
        total = total + discount * reward(&s, utilities);
        let a = greedy_targets(s.fire(), s.classes(), utilities, k_max);
        s = step_unchecked(&s, &a, dynamics, kernel, rng);
        discount = discount * gamma;
    }
    total
}

/// Candidate actions for a belief: the no-op, then actions built from cells
/// with positive fire marginal ranked by `|U| * marginal`, then their
/// unburnt neighbors with fuel (targeting one yields an exact observation of
/// it), ranked by `|U|`. With `k_max > 1` each cell is joined greedily with
/// the best-ranked burning cells.
pub fn candidate_actions<T: Scalar>(
    particles: &[GridState],
    utilities: &UtilityMap<T>,
    k_max: usize,
) -> Vec<Action> {
    let template = &particles[0];
    let m: Vec<T> = marginals(particles);
    let score = |c: usize, w: T| -utilities.get(template.class(c)) * w;
    let by_score = |a: &(usize, T), b: &(usize, T)| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0));

    let mut ranked: Vec<(usize, T)> = m
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > T::zero())
        .map(|(c, &p)| (c, score(c, p)))
        .collect();
    ranked.sort_by(by_score);
    let order: Vec<usize> = ranked.into_iter().map(|(c, _)| c).collect();

    let mut is_neighbor = vec![false; template.len()];
    for &c in &order {
        for (n, _) in template.moore(c) {
            is_neighbor[n] = m[n] == T::zero() && particles.iter().any(|p| p.fuel(n) > 0);
        }
    }
    let mut fringe: Vec<(usize, T)> = (0..template.len())
        .filter(|&c| is_neighbor[c])
        .map(|c| (c, score(c, T::one())))
        .collect();
    fringe.sort_by(by_score);

    let mut out = vec![Action::noop()];
    if k_max == 0 || order.is_empty() {
        return out;
    }
    let mut push = |mut t: Vec<usize>| {
        t.sort_unstable();
        let a = Action::from_sorted_unchecked(t);
        if !out.contains(&a) {
            out.push(a);
        }
    };
    if k_max > 1 {
        push(order.iter().copied().take(k_max).collect());
    }
    for c in order.iter().copied().chain(fringe.into_iter().map(|(c, _)| c)) {
        let mut t = vec![c];
        t.extend(order.iter().copied().filter(|&o| o != c).take(k_max - 1));
        push(t);
    }
    out
}

#[derive(Debug)]
struct BeliefNode {
    particles: Vec<GridState>,
    populated: bool,
    visits: u32,
    candidates: Option<Vec<Action>>,
    children: Vec<usize>,
}

impl BeliefNode {
    fn leaf(state: GridState) -> Self {
        Self {
            particles: vec![state],
            populated: false,
            visits: 0,
            candidates: None,
            children: Vec::new(),
        }
    }
}

#[derive(Debug)]
struct ObsBranch {
    observation: Observation,
    node: usize,
    count: u32,
}

#[derive(Debug)]
struct ActionNode<T> {
    action: Action,
    parent: usize,
    visits: u32,
    value: T,
    branches: Vec<ObsBranch>,
}

/// Visit statistics of one action node.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStats<T> {
    pub action: Action,
    pub visits: u32,
    pub value: T,
    pub observation_children: usize,
}

/// Visit statistics of one belief node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeliefStats {
    pub visits: u32,
    pub action_children: usize,
    pub particles: usize,
}

/// Search tree left behind by [`search`].
#[derive(Debug)]
pub struct SearchTree<T> {
    beliefs: Vec<BeliefNode>,
    actions: Vec<ActionNode<T>>,
}

const ROOT: usize = 0;

impl<T: Scalar> SearchTree<T> {
    fn action_stats(&self, id: usize) -> ActionStats<T> {
        let a = &self.actions[id];
        ActionStats {
            action: a.action.clone(),
            visits: a.visits,
            value: a.value,
            observation_children: a.branches.len(),
        }
    }

    /// Root children in creation order, which is also the tie-break order.
    pub fn root_actions(&self) -> Vec<ActionStats<T>> {
        self.beliefs[ROOT].children.iter().map(|&id| self.action_stats(id)).collect()
    }

    pub fn all_actions(&self) -> Vec<ActionStats<T>> {
        (0..self.actions.len()).map(|id| self.action_stats(id)).collect()
    }

    pub fn all_beliefs(&self) -> Vec<BeliefStats> {
        self.beliefs
            .iter()
            .map(|b| BeliefStats {
                visits: b.visits,
                action_children: b.children.len(),
                particles: b.particles.len(),
            })
            .collect()
    }

    /// Most visited root action; earliest created wins ties. No-op when the
    /// root was never expanded.
    pub fn best_action(&self) -> Action {
        let mut best: Option<(u32, &Action)> = None;
        for &id in &self.beliefs[ROOT].children {
            let a = &self.actions[id];
            if best.is_none_or(|(v, _)| a.visits > v) {
                best = Some((a.visits, &a.action));
            }
        }
        best.map(|(_, a)| a.clone()).unwrap_or_default()
    }
}

struct Search<'a, T, R: ?Sized> {
    cfg: &'a PlannerConfig<T>,
    dynamics: &'a DynamicsParams<T>,
    kernel: Kernel<'a, T>,
    sensing: &'a SensingParams<T>,
    utilities: &'a UtilityMap<T>,
    belief_size: usize,
    tree: SearchTree<T>,
    rng: &'a mut R,
}

impl<T: Scalar, R: Rng + ?Sized> Search<'_, T, R> {
    fn select_action(&mut self, h: usize) -> usize {
        if self.tree.beliefs[h].candidates.is_none() {
            let c = candidate_actions(&self.tree.beliefs[h].particles, self.utilities, self.cfg.k_max);
            self.tree.beliefs[h].candidates = Some(c);
        }
        let node = &self.tree.beliefs[h];
        let limit = PlannerConfig::widening_limit(self.cfg.k_act, self.cfg.alpha_act, node.visits + 1);
        let n_children = node.children.len();
        let candidates = node.candidates.as_ref().expect("set above");
        if n_children < limit && n_children < candidates.len() {
            let action = candidates[n_children].clone();
            let id = self.tree.actions.len();
            self.tree.actions.push(ActionNode {
                action,
                parent: h,
                visits: 0,
                value: T::zero(),
                branches: Vec::new(),
            });
            self.tree.beliefs[h].children.push(id);
        }

        let node = &self.tree.beliefs[h];
        let ln_n = T::lit(f64::from(node.visits.max(1))).ln();
        let mut best = node.children[0];
        let mut best_score = T::neg_infinity();
        for &id in &node.children {
            let a = &self.tree.actions[id];
            if a.visits == 0 {
                return id;
            }
            let score = a.value + self.cfg.ucb_c * (ln_n / T::lit(f64::from(a.visits))).sqrt();
            if score > best_score {
                best_score = score;
                best = id;
            }
        }
        best
    }

    fn populate(&mut self, ha: usize, branch: usize) {
        let child = self.tree.actions[ha].branches[branch].node;
        if self.tree.beliefs[child].populated {
            return;
        }
        let parent = self.tree.actions[ha].parent;
        let (filtered, _, fallback) = update_particles(
            &self.tree.beliefs[parent].particles,
            self.belief_size,
            &self.tree.actions[ha].action,
            &self.tree.actions[ha].branches[branch].observation,
            self.dynamics,
            &self.kernel,
            self.sensing,
            self.rng,
        );
        let node = &mut self.tree.beliefs[child];
        // a fallback draw ignores the observation; the states that produced
        // it are a better posterior than that
        if !fallback {
            node.particles.extend(filtered);
        }
        node.populated = true;
    }

    fn simulate(&mut self, s: &GridState, h: usize, depth: usize) -> T {
        if depth == 0 || !s.any_burning() {
            return T::zero();
        }
        let r = reward(s, self.utilities);
        let ha = self.select_action(h);
        let action = self.tree.actions[ha].action.clone();
        let s2 = step_unchecked(s, &action, self.dynamics, &self.kernel, self.rng);

        let node = &self.tree.actions[ha];
        let limit = PlannerConfig::widening_limit(self.cfg.k_obs, self.cfg.alpha_obs, node.visits + 1);
        let gamma = self.cfg.gamma_discount;

        let total = if node.branches.len() < limit {
            let o = observe_unchecked(s, &s2, &action, self.dynamics, &self.kernel, self.sensing);
            match node.branches.iter().position(|b| b.observation == o) {
                Some(bi) => {
                    let child = {
                        let b = &mut self.tree.actions[ha].branches[bi];
                        b.count += 1;
                        b.node
                    };
                    self.tree.beliefs[child].particles.push(s2);
                    self.descend(ha, bi, child, depth, r)
                }
                None => {
                    let child = self.tree.beliefs.len();
                    self.tree.beliefs.push(BeliefNode::leaf(s2.clone()));
                    self.tree.actions[ha].branches.push(ObsBranch {
                        observation: o,
                        node: child,
                        count: 1,
                    });
                    let tail = rollout_with(
                        &s2,
                        depth - 1,
                        self.dynamics,
                        &self.kernel,
                        self.utilities,
                        self.cfg.k_max,
                        gamma,
                        self.rng,
                    );
                    r + gamma * tail
                }
            }
        } else {
            let total_count: u32 = node.branches.iter().map(|b| b.count).sum();
            let mut pick = self.rng.random_range(0..total_count);
            let mut bi = 0;
            for (i, b) in node.branches.iter().enumerate() {
                if pick < b.count {
                    bi = i;
                    break;
                }
                pick -= b.count;
            }
            let child = {
                let b = &mut self.tree.actions[ha].branches[bi];
                b.count += 1;
                b.node
            };
            self.descend(ha, bi, child, depth, r)
        };

        self.tree.beliefs[h].visits += 1;
        let a = &mut self.tree.actions[ha];
        a.visits += 1;
        a.value = a.value + (total - a.value) / T::lit(f64::from(a.visits));
        total
    }

    fn descend(&mut self, ha: usize, branch: usize, child: usize, depth: usize, r: T) -> T {
        self.populate(ha, branch);
        let particles = &self.tree.beliefs[child].particles;
        let next = particles[self.rng.random_range(0..particles.len())].clone();
        r + self.cfg.gamma_discount * self.simulate(&next, child, depth - 1)
    }
}

/// Runs the tree search from belief `b` and returns the tree.
pub fn search<T: Scalar, R: Rng + ?Sized>(
    b: &Belief,
    cfg: &PlannerConfig<T>,
    dynamics: &DynamicsParams<T>,
    sensing: &SensingParams<T>,
    utilities: &UtilityMap<T>,
    rng: &mut R,
) -> Result<SearchTree<T>> {
    cfg.validate()?;
    if b.is_empty() {
        return Err(Error::EmptyBelief);
    }
    let template = b.template();
    if let Some(c) = (0..template.len()).find(|&c| !template.is_burning(c) && template.fuel(c) > 0) {
        dynamics.ignition_probability(template, c)?;
    }
    let root = BeliefNode {
        particles: b.particles().to_vec(),
        populated: true,
        visits: 0,
        candidates: None,
        children: Vec::new(),
    };
    let mut s = Search {
        cfg,
        dynamics,
        kernel: dynamics.kernel(),
        sensing,
        utilities,
        belief_size: b.len(),
        tree: SearchTree {
            beliefs: vec![root],
            actions: Vec::new(),
        },
        rng,
    };
    if b.particles().iter().any(GridState::any_burning) {
        for _ in 0..cfg.n_simulations {
            let particles = &s.tree.beliefs[ROOT].particles[..s.belief_size];
            let start = particles[s.rng.random_range(0..particles.len())].clone();
            s.simulate(&start, ROOT, cfg.max_depth);
        }
    }
    Ok(s.tree)
}

/// Chooses a suppression action for belief `b`.
pub fn plan<T: Scalar, R: Rng + ?Sized>(
    b: &Belief,
    cfg: &PlannerConfig<T>,
    dynamics: &DynamicsParams<T>,
    sensing: &SensingParams<T>,
    utilities: &UtilityMap<T>,
    rng: &mut R,
) -> Result<Action> {
    Ok(search(b, cfg, dynamics, sensing, utilities, rng)?.best_action())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::initial_belief;
    use crate::dynamics::SpreadParams;
    use crate::rng::seeded_rng;

    fn classes(spec: &str) -> Vec<CellClass> {
        spec.chars()
            .map(|c| match c {
                'R' => CellClass::Red,
                'Y' => CellClass::Yellow,
                _ => CellClass::Green,
            })
            .collect()
    }

    fn state(rows: usize, cols: usize, cls: &str, burning: &[usize]) -> GridState {
        let n = rows * cols;
        GridState::new(rows, cols, classes(cls), vec![false; n], vec![5; n])
            .unwrap()
            .with_burning(burning)
            .unwrap()
    }

    fn no_spread(q: f64) -> DynamicsParams<f64> {
        DynamicsParams::parametric(q, SpreadParams::new(0.0, 0.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn baseline_prefers_costlier_cell() {
        let u = UtilityMap::<f64>::default();
        let cls = classes("GRGG");
        let o = Observation::new(2, 2, vec![true, true, false, false]).unwrap();
        assert_eq!(baseline_policy(&o, &cls, &u, 1).unwrap().targets(), &[1]);
        let none = Observation::new(2, 2, vec![false; 4]).unwrap();
        assert!(baseline_policy(&none, &cls, &u, 1).unwrap().is_noop());
        let cls = classes("GRGR");
        let both = Observation::new(2, 2, vec![false, true, false, true]).unwrap();
        assert_eq!(baseline_policy(&both, &cls, &u, 1).unwrap().targets(), &[1]);
        assert_eq!(baseline_policy(&both, &cls, &u, 2).unwrap().targets(), &[1, 3]);
        assert!(baseline_policy(&both, &classes("GRG"), &u, 1).is_err());
    }

    #[test]
    fn rollout_examples() {
        let u = UtilityMap::<f64>::default();
        let d = no_spread(1.0);
        let quiet = state(3, 3, "GGGGGGGGG", &[]);
        assert_eq!(rollout(&quiet, 5, &d, &u, 1, 0.95, &mut seeded_rng(0)), 0.0);
        let one = state(3, 3, "GGGGGGGGG", &[4]);
        assert_eq!(rollout(&one, 0, &d, &u, 1, 0.95, &mut seeded_rng(0)), 0.0);
        assert_eq!(rollout(&one, 3, &d, &u, 1, 0.95, &mut seeded_rng(0)), -1.0);
    }

    #[test]
    fn candidates_rank_by_expected_cost() {
        let u = UtilityMap::<f64>::default();
        let s = state(2, 2, "GRYG", &[0, 1, 2]);
        let c = candidate_actions(std::slice::from_ref(&s), &u, 1);
        let t: Vec<Vec<usize>> = c.iter().map(|a| a.targets().to_vec()).collect();
        assert_eq!(t, vec![vec![], vec![1], vec![2], vec![0], vec![3]]);
        let c2 = candidate_actions(&[s], &u, 2);
        let t2: Vec<Vec<usize>> = c2.iter().map(|a| a.targets().to_vec()).collect();
        assert_eq!(t2, vec![vec![], vec![1, 2], vec![0, 1], vec![1, 3]]);
        assert!(c2.iter().all(|a| a.len() <= 2));
    }

    #[test]
    fn candidates_include_fuelled_neighbors_only() {
        let u = UtilityMap::<f64>::default();
        // 1x4 strip: fire at 0, cell 1 burnt out, cells 2 and 3 out of reach
        let s = state(1, 4, "GRRG", &[0]).with_fuel(1, 0).unwrap();
        let t: Vec<Vec<usize>> = candidate_actions(&[s], &u, 1).iter().map(|a| a.targets().to_vec()).collect();
        assert_eq!(t, vec![vec![], vec![0]]);
        let s = state(1, 4, "GRRG", &[0]);
        let t: Vec<Vec<usize>> = candidate_actions(&[s], &u, 1).iter().map(|a| a.targets().to_vec()).collect();
        assert_eq!(t, vec![vec![], vec![0], vec![1]]);
    }

    #[test]
    fn no_fire_means_noop() {
        let u = UtilityMap::<f64>::default();
        let b = initial_belief(&state(2, 2, "GGGG", &[]), 10).unwrap();
        let a = plan(&b, &PlannerConfig::default(), &no_spread(1.0), &SensingParams::default(), &u, &mut seeded_rng(0)).unwrap();
        assert!(a.is_noop());
    }

    #[test]
    fn zero_simulations_is_an_error() {
        let u = UtilityMap::<f64>::default();
        let b = initial_belief(&state(2, 2, "GGGG", &[0]), 10).unwrap();
        let cfg = PlannerConfig { n_simulations: 0, ..PlannerConfig::default() };
        assert!(plan(&b, &cfg, &no_spread(1.0), &SensingParams::default(), &u, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn targets_red_over_green_without_spread() {
        let u = UtilityMap::<f64>::default();
        let s = state(3, 3, "GGGGRGGGG", &[4, 0]);
        let b = initial_belief(&s, 20).unwrap();
        let cfg = PlannerConfig { n_simulations: 300, ..PlannerConfig::default() };
        for seed in 0..5 {
            let a = plan(&b, &cfg, &no_spread(1.0), &SensingParams::default(), &u, &mut seeded_rng(seed)).unwrap();
            assert_eq!(a.targets(), &[4]);
        }
    }

    #[test]
    fn skips_cell_about_to_burn_out() {
        // the red cell has one unit of fuel left and goes out on its own
        let u = UtilityMap::<f64>::default();
        let s = state(1, 4, "RGGG", &[0, 3]).with_fuel(0, 1).unwrap();
        let b = initial_belief(&s, 20).unwrap();
        let cfg = PlannerConfig { n_simulations: 400, ..PlannerConfig::default() };
        let a = plan(&b, &cfg, &no_spread(1.0), &SensingParams::default(), &u, &mut seeded_rng(1)).unwrap();
        assert_eq!(a.targets(), &[3]);
    }

    #[test]
    fn tree_respects_budget_widening_and_value_bounds() {
        let u = UtilityMap::<f64>::default();
        let d = DynamicsParams::parametric(0.8, SpreadParams::new(45.0, 0.5, 0.3).unwrap()).unwrap();
        let s = state(4, 4, "RYGGRYGGRYGGRYGG", &[0, 5, 10]);
        let b = initial_belief(&s, 30).unwrap();
        let cfg = PlannerConfig { n_simulations: 500, k_max: 2, ..PlannerConfig::default() };
        let tree = search(&b, &cfg, &d, &SensingParams::default(), &u, &mut seeded_rng(3)).unwrap();
        let floor = u.worst_step_reward(&s) / (1.0 - cfg.gamma_discount);
        for a in tree.all_actions() {
            assert!(a.action.len() <= cfg.k_max);
            assert!(a.value <= 0.0 && a.value >= floor && a.value.is_finite());
            assert!(a.observation_children <= PlannerConfig::widening_limit(cfg.k_obs, cfg.alpha_obs, a.visits.max(1)));
        }
        for h in tree.all_beliefs() {
            assert!(h.action_children <= PlannerConfig::widening_limit(cfg.k_act, cfg.alpha_act, h.visits.max(1)));
        }
        let root_visits: u32 = tree.root_actions().iter().map(|a| a.visits).sum();
        assert_eq!(root_visits, cfg.n_simulations as u32);
    }

    #[test]
    fn single_worker_search_is_deterministic() {
        let u = UtilityMap::<f64>::default();
        let d = DynamicsParams::parametric(0.9, SpreadParams::new(90.0, 0.5, 0.4).unwrap()).unwrap();
        let b = initial_belief(&state(3, 3, "RYGGRYGGR", &[1, 4]), 25).unwrap();
        let cfg = PlannerConfig { n_simulations: 200, ..PlannerConfig::default() };
        let a = search(&b, &cfg, &d, &SensingParams::default(), &u, &mut seeded_rng(11)).unwrap();
        let b2 = search(&b, &cfg, &d, &SensingParams::default(), &u, &mut seeded_rng(11)).unwrap();
        assert_eq!(a.root_actions(), b2.root_actions());
    }

    #[test]
    fn config_validation() {
        let ok = PlannerConfig::<f64>::default();
        assert!(ok.validate().is_ok());
        assert!(PlannerConfig { gamma_discount: 1.5, ..ok.clone() }.validate().is_err());
        assert!(PlannerConfig { alpha_obs: 1.0, ..ok.clone() }.validate().is_err());
        assert!(PlannerConfig { k_act: 0.0, ..ok.clone() }.validate().is_err());
        assert!(PlannerConfig { ucb_c: -1.0, ..ok.clone() }.validate().is_err());
        let parsed: PlannerConfig<f64> = serde_json::from_str(r#"{"n_simulations": 50}"#).unwrap();
        assert_eq!(parsed.n_simulations, 50);
        assert_eq!(parsed.max_depth, 10);
    }
}
