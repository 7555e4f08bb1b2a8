//! Spatial grid, cell classes, the POMDP state and the reward function.
//!
//! Cells are indexed row-major with `(0, 0)` at the north-west corner.
//! Neighborhoods are the 8-connected Moore neighborhood clipped at the edges.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Value tier of a cell. Fixed for the duration of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellClass {
    /// Residences.
    Red,
    /// Valuable ecological resource.
    Yellow,
    /// Wildland.
    Green,
}

impl CellClass {
    pub const ALL: [CellClass; 3] = [CellClass::Red, CellClass::Yellow, CellClass::Green];

    pub fn as_char(self) -> char {
        match self {
            CellClass::Red => 'R',
            CellClass::Yellow => 'Y',
            CellClass::Green => 'G',
        }
    }
}

/// Per-class cost of one burning cell for one time step.
///
/// Values are non-positive and strictly ordered `red < yellow < green <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUtilities<T>", bound = "T: Scalar")]
pub struct UtilityMap<T> {
    red: T,
    yellow: T,
    green: T,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawUtilities<T> {
    red: T,
    yellow: T,
    green: T,
}

impl<T: Scalar> TryFrom<RawUtilities<T>> for UtilityMap<T> {
    type Error = Error;

    fn try_from(raw: RawUtilities<T>) -> Result<Self> {
        UtilityMap::new(raw.red, raw.yellow, raw.green)
    }
}

impl<T: Scalar> UtilityMap<T> {
    pub fn new(red: T, yellow: T, green: T) -> Result<Self> {
        if !(red < yellow && yellow < green && green <= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "utilities must satisfy red < yellow < green <= 0, got ({red}, {yellow}, {green})"
            )));
        }
        Ok(Self { red, yellow, green })
    }

    #[inline]
    pub fn get(&self, class: CellClass) -> T {
        match class {
            CellClass::Red => self.red,
            CellClass::Yellow => self.yellow,
            CellClass::Green => self.green,
        }
    }

    /// Most negative single-step reward attainable on `state`'s class map
    /// (every cell burning).
    pub fn worst_step_reward(&self, state: &GridState) -> T {
        state.classes().iter().map(|&c| self.get(c)).sum()
    }
}

impl<T: Scalar> Default for UtilityMap<T> {
    fn default() -> Self {
        Self {
            red: T::lit(-10.0),
            yellow: T::lit(-5.0),
            green: T::lit(-1.0),
        }
    }
}

/// Moore-neighborhood offsets `(d_row, d_col)`, clockwise from north.
pub(crate) const MOORE: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Fire status and fuel level of every cell at one time step.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridState {
    rows: usize,
    cols: usize,
    fire: Vec<bool>,
    fuel: Vec<u8>,
    classes: Arc<[CellClass]>,
}

impl GridState {
    pub fn new(
        rows: usize,
        cols: usize,
        classes: impl Into<Arc<[CellClass]>>,
        fire: Vec<bool>,
        fuel: Vec<u8>,
    ) -> Result<Self> {
        let classes = classes.into();
        let cells = rows
            .checked_mul(cols)
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidState(format!("degenerate grid {rows}x{cols}")))?;
        for (name, len) in [("classes", classes.len()), ("fire", fire.len()), ("fuel", fuel.len())] {
            if len != cells {
                return Err(Error::InvalidState(format!(
                    "{name} has {len} entries, grid has {cells}"
                )));
            }
        }
        if let Some(i) = (0..cells).find(|&i| fire[i] && fuel[i] == 0) {
            return Err(Error::InvalidState(format!("cell {i} burns with zero fuel")));
        }
        Ok(Self {
            rows,
            cols,
            fire,
            fuel,
            classes,
        })
    }

    /// A grid of one class with uniform fuel and no fire.
    pub fn uniform(rows: usize, cols: usize, class: CellClass, fuel: u8) -> Result<Self> {
        let n = rows * cols;
        Self::new(rows, cols, vec![class; n], vec![false; n], vec![fuel; n])
    }

    /// Returns a copy with the given cells set burning.
    pub fn with_burning(mut self, cells: &[usize]) -> Result<Self> {
        for &c in cells {
            self.check_index(c)?;
            if self.fuel[c] == 0 {
                return Err(Error::InvalidState(format!("cell {c} burns with zero fuel")));
            }
            self.fire[c] = true;
        }
        Ok(self)
    }

    /// Returns a copy with the fuel of `cell` replaced.
    pub fn with_fuel(mut self, cell: usize, fuel: u8) -> Result<Self> {
        self.check_index(cell)?;
        if fuel == 0 && self.fire[cell] {
            return Err(Error::InvalidState(format!("cell {cell} burns with zero fuel")));
        }
        self.fuel[cell] = fuel;
        Ok(self)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.fire.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.fire.is_empty()
    }

    pub fn index(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::CellOutOfRange {
                index: row.saturating_mul(self.cols).saturating_add(col),
                cells: self.len(),
            });
        }
        Ok(row * self.cols + col)
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols, cell % self.cols)
    }

    pub(crate) fn check_index(&self, cell: usize) -> Result<()> {
        if cell < self.len() {
            Ok(())
        } else {
            Err(Error::CellOutOfRange {
                index: cell,
                cells: self.len(),
            })
        }
    }

    #[inline]
    pub fn is_burning(&self, cell: usize) -> bool {
        self.fire[cell]
    }

    #[inline]
    pub fn fuel(&self, cell: usize) -> u8 {
        self.fuel[cell]
    }

    #[inline]
    pub fn class(&self, cell: usize) -> CellClass {
        self.classes[cell]
    }

    pub fn fire(&self) -> &[bool] {
        &self.fire
    }

    pub fn fuels(&self) -> &[u8] {
        &self.fuel
    }

    pub fn classes(&self) -> &Arc<[CellClass]> {
        &self.classes
    }

    pub fn burning_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.fire.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn n_burning(&self) -> usize {
        self.fire.iter().filter(|&&b| b).count()
    }

    pub fn any_burning(&self) -> bool {
        self.fire.iter().any(|&b| b)
    }

    pub fn total_fuel(&self) -> u64 {
        self.fuel.iter().map(|&f| u64::from(f)).sum()
    }

    /// In-range Moore neighbors of `cell` paired with the offset slot in
    /// [`MOORE`] that leads from `cell` to the neighbor.
    #[inline]
    pub(crate) fn moore(&self, cell: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (r, c) = self.coords(cell);
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        MOORE.iter().enumerate().filter_map(move |(slot, &(dr, dc))| {
            let nr = r as isize + dr;
            let nc = c as isize + dc;
            (nr >= 0 && nr < rows && nc >= 0 && nc < cols)
                .then(|| (nr as usize * self.cols + nc as usize, slot))
        })
    }

    /// The 8-connected neighbors of `cell`, clipped at the grid edges.
    pub fn neighbors(&self, cell: usize) -> Result<Vec<usize>> {
        self.check_index(cell)?;
        Ok(self.moore(cell).map(|(n, _)| n).collect())
    }

    pub(crate) fn set_fire(&mut self, cell: usize, burning: bool) {
        self.fire[cell] = burning;
    }

    pub(crate) fn burn_down(&mut self, cell: usize) {
        self.fuel[cell] -= 1;
        if self.fuel[cell] == 0 {
            self.fire[cell] = false;
        }
    }

    pub fn same_shape(&self, other: &GridState) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl fmt::Debug for GridState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GridState {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let mark = if self.fire[i] { '*' } else { ' ' };
                write!(f, "{}{}{} ", self.classes[i].as_char(), self.fuel[i], mark)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Set of cells receiving suppression in one step. The empty set is the no-op.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Action {
    targets: Vec<usize>,
}

impl Action {
    pub fn new(mut targets: Vec<usize>, n_cells: usize, k_max: usize) -> Result<Self> {
        targets.sort_unstable();
        if targets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAction(format!("duplicate targets in {targets:?}")));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= n_cells) {
            return Err(Error::CellOutOfRange {
                index: bad,
                cells: n_cells,
            });
        }
        if targets.len() > k_max {
            return Err(Error::InvalidAction(format!(
                "{} targets exceed the budget of {k_max}",
                targets.len()
            )));
        }
        Ok(Self { targets })
    }

    pub fn noop() -> Self {
        Self::default()
    }

    /// Builds an action from targets already known to be distinct and in range.
    pub(crate) fn from_sorted_unchecked(targets: Vec<usize>) -> Self {
        debug_assert!(targets.windows(2).all(|w| w[0] < w[1]));
        Self { targets }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_noop(&self) -> bool {
        self.targets.is_empty()
    }

    /// Same as [`Action::is_noop`].
    pub fn is_empty(&self) -> bool {
        self.is_noop()
    }

    #[inline]
    pub fn contains(&self, cell: usize) -> bool {
        self.targets.binary_search(&cell).is_ok()
    }

    pub fn validate_for(&self, state: &GridState) -> Result<()> {
        match self.targets.last() {
            Some(&t) if t >= state.len() => Err(Error::CellOutOfRange {
                index: t,
                cells: state.len(),
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.targets.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "]")
    }
}

/// Sum of the class utility over burning cells. Always `<= 0`.
pub fn reward<T: Scalar>(state: &GridState, utilities: &UtilityMap<T>) -> T {
    state
        .burning_cells()
        .map(|i| utilities.get(state.class(i)))
        .fold(T::zero(), |acc, u| acc + u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn green(rows: usize, cols: usize) -> GridState {
        GridState::uniform(rows, cols, CellClass::Green, 5).unwrap()
    }

    #[test]
    fn neighbor_counts_at_corner_edge_and_interior() {
        let g = green(4, 4);
        assert_eq!(g.neighbors(g.index(0, 0).unwrap()).unwrap().len(), 3);
        assert_eq!(g.neighbors(g.index(1, 1).unwrap()).unwrap().len(), 8);
        assert_eq!(g.neighbors(g.index(0, 1).unwrap()).unwrap().len(), 5);
        assert!(g.neighbors(16).is_err());
    }

    #[test]
    fn neighbors_never_contain_self() {
        let g = green(3, 5);
        for i in 0..g.len() {
            assert!(!g.neighbors(i).unwrap().contains(&i));
        }
    }

    #[test]
    fn reward_examples() {
        let u = UtilityMap::<f64>::default();
        let g = green(4, 4);
        assert_eq!(reward(&g, &u), 0.0);

        let mut classes = vec![CellClass::Green; 16];
        classes[0] = CellClass::Red;
        let s = GridState::new(4, 4, classes, vec![false; 16], vec![5; 16])
            .unwrap()
            .with_burning(&[0, 5, 9])
            .unwrap();
        assert_eq!(reward(&s, &u), -12.0);

        let all: Vec<usize> = (0..16).collect();
        assert_eq!(reward(&g.with_burning(&all).unwrap(), &u), -16.0);
    }

    #[test]
    fn utility_ordering_is_enforced() {
        assert!(UtilityMap::new(-10.0, -5.0, -1.0).is_ok());
        assert!(UtilityMap::new(-10.0, -5.0, 0.0).is_ok());
        assert!(UtilityMap::new(-5.0, -5.0, -1.0).is_err());
        assert!(UtilityMap::new(-10.0, -5.0, 1.0).is_err());
        let parsed: std::result::Result<UtilityMap<f64>, _> =
            serde_json::from_str(r#"{"red": -1, "yellow": -2, "green": -3}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn state_invariants() {
        assert!(GridState::new(2, 2, vec![CellClass::Green; 4], vec![true, false, false, false], vec![0, 1, 1, 1]).is_err());
        assert!(GridState::new(2, 2, vec![CellClass::Green; 3], vec![false; 4], vec![1; 4]).is_err());
        assert!(GridState::new(0, 2, Vec::<CellClass>::new(), vec![], vec![]).is_err());
    }

    #[test]
    fn action_validation() {
        assert_eq!(Action::new(vec![3, 1], 4, 2).unwrap().targets(), &[1, 3]);
        assert!(Action::new(vec![1, 1], 4, 2).is_err());
        assert!(Action::new(vec![4], 4, 2).is_err());
        assert!(Action::new(vec![0, 1, 2], 4, 2).is_err());
        assert!(Action::new(vec![], 4, 0).unwrap().is_noop());
    }

    fn arb_state() -> impl Strategy<Value = GridState> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            let n = r * c;
            (
                proptest::collection::vec(0usize..3, n),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(1u8..6, n),
            )
                .prop_map(move |(cls, fire, fuel)| {
                    let classes: Vec<CellClass> = cls.into_iter().map(|k| CellClass::ALL[k]).collect();
                    GridState::new(r, c, classes, fire, fuel).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn reward_is_additive_over_cells(s in arb_state()) {
            let u = UtilityMap::<f64>::default();
            let mut singles = 0.0;
            for c in s.burning_cells() {
                let mut fire = vec![false; s.len()];
                fire[c] = true;
                let one = GridState::new(s.rows(), s.cols(), s.classes().clone(), fire, s.fuels().to_vec()).unwrap();
                singles += reward(&one, &u);
            }
            prop_assert_eq!(reward(&s, &u), singles);
            prop_assert!(reward(&s, &u) <= 0.0);
        }

        #[test]
        fn adding_fire_never_increases_reward(s in arb_state(), pick in any::<proptest::sample::Index>()) {
            let u = UtilityMap::<f64>::default();
            let c = pick.index(s.len());
            let more = s.clone().with_burning(&[c]).unwrap();
            prop_assert!(reward(&more, &u) <= reward(&s, &u));
        }

        #[test]
        fn neighbor_relation_is_symmetric(s in arb_state()) {
            for i in 0..s.len() {
                for j in s.neighbors(i).unwrap() {
                    prop_assert!(s.neighbors(j).unwrap().contains(&i));
                }
            }
        }
    }
}
