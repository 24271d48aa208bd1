//! Observability tests and synthesis of loss-difference estimation functions.
//!
//! A pair of actions is observable (globally / locally / pairwise) when a
//! function `v` over (action, symbol) pairs with the corresponding support
//! satisfies, for every outcome column `i`,
//!
//! ```text
//!   sum_c v(c, phi(c, i)) = loss[a][i] - loss[b][i]
//! ```
//!
//! Synthesis minimizes the infinity norm of `v` by exact LP, with variables
//! only for (action, symbol) pairs actually realized by some outcome; the
//! optimum reached by Bland's rule is the canonical choice. A separate
//! graph-propagation construction produces pairwise estimators with norm at
//! most `1 + F`.

use crate::game::Game;
use crate::geometry::NeighborStructure;
use crate::lp::{Lp, LpOutcome, Rel};
use crate::rational::{rat_one, rat_zero, Rat};
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// 0/1 matrix mapping outcome indicators to feedback-symbol indicators:
/// entry `(f, i)` is 1 exactly when action `action` emits symbol `f` on
/// outcome `i`. Every column has exactly one 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalMatrix {
    pub action: usize,
    pub rows: Vec<Vec<u8>>,
}

impl SignalMatrix {
    /// Applies the matrix to a rational vector over outcomes.
    pub fn apply(&self, u: &[Rat]) -> Vec<Rat> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(u)
                    .filter(|(&m, _)| m == 1)
                    .map(|(_, v)| v.clone())
                    .sum()
            })
            .collect()
    }

    /// The rows as rational vectors (for stacking into one linear map).
    pub fn rational_rows(&self) -> Vec<Vec<Rat>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&m| if m == 1 { rat_one() } else { rat_zero() })
                    .collect()
            })
            .collect()
    }
}

/// Builds the signal matrix of one action.
pub fn signal_matrix(game: &Game, action: usize) -> SignalMatrix {
    let mut rows = vec![vec![0u8; game.num_outcomes()]; game.num_symbols];
    for (i, &f) in game.feedback[action].iter().enumerate() {
        rows[f][i] = 1;
    }
    SignalMatrix { action, rows }
}

/// A loss-difference estimation function `v` for the ordered pair (a, b),
/// estimating `loss[a] - loss[b]`. Values are kept sparse over realized
/// (action, symbol) keys; anything absent is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimator {
    pub a: usize,
    pub b: usize,
    pub values: BTreeMap<(usize, usize), Rat>,
}

impl Estimator {
    pub fn zero(a: usize, b: usize) -> Self {
        Estimator {
            a,
            b,
            values: BTreeMap::new(),
        }
    }

    pub fn value(&self, action: usize, symbol: usize) -> Rat {
        self.values
            .get(&(action, symbol))
            .cloned()
            .unwrap_or_else(rat_zero)
    }

    /// Actions carrying any nonzero value.
    pub fn support(&self) -> BTreeSet<usize> {
        self.values
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(&(c, _), _)| c)
            .collect()
    }

    pub fn inf_norm(&self) -> Rat {
        self.values
            .values()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(rat_zero)
    }

    /// The estimator for the reversed pair: `v^{ba} = -v^{ab}`.
    pub fn negated(&self) -> Estimator {
        Estimator {
            a: self.b,
            b: self.a,
            values: self
                .values
                .iter()
                .map(|(&k, v)| (k, -v.clone()))
                .collect(),
        }
    }

    /// Exact check of the defining identity on every outcome column.
    pub fn satisfies_identity(&self, game: &Game) -> bool {
        let diff = game.loss_diff(self.a, self.b);
        (0..game.num_outcomes()).all(|i| {
            let total: Rat = (0..game.num_actions())
                .map(|c| self.value(c, game.symbol(c, i)))
                .sum();
            total == diff[i]
        })
    }
}

/// Synthesizes the minimal-infinity-norm estimator for `loss[a] - loss[b]`
/// with values allowed only on `support`. Returns `None` when no estimation
/// function with that support exists (a legitimate outcome, not an error).
pub fn solve_estimator(
    game: &Game,
    a: usize,
    b: usize,
    support: &[usize],
) -> Option<Estimator> {
    if a == b {
        return Some(Estimator::zero(a, b));
    }
    // Variables only for (c, f) pairs realized by some outcome.
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for &c in support {
        for i in 0..game.num_outcomes() {
            let key = (c, game.symbol(c, i));
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }
    keys.sort_unstable();
    let num_vars = keys.len() + 1; // estimator values plus the norm bound t
    let t_var = keys.len();
    let mut lp = Lp::new(num_vars);
    let mut objective = vec![rat_zero(); num_vars];
    objective[t_var] = rat_one();
    lp.minimize(objective);

    let diff = game.loss_diff(a, b);
    for i in 0..game.num_outcomes() {
        let mut row = vec![rat_zero(); num_vars];
        for &c in support {
            let idx = keys.binary_search(&(c, game.symbol(c, i))).unwrap();
            row[idx] += rat_one();
        }
        lp.constrain(row, Rel::Eq, diff[i].clone());
    }
    for idx in 0..keys.len() {
        let mut upper = vec![rat_zero(); num_vars];
        upper[idx] = rat_one();
        upper[t_var] = -rat_one();
        lp.constrain(upper, Rel::Le, rat_zero());
        let mut lower = vec![rat_zero(); num_vars];
        lower[idx] = -rat_one();
        lower[t_var] = -rat_one();
        lp.constrain(lower, Rel::Le, rat_zero());
    }

    match lp.solve() {
        LpOutcome::Optimal(sol) => {
            let values = keys
                .into_iter()
                .zip(sol.point)
                .filter(|(_, v)| !v.is_zero())
                .collect();
            Some(Estimator { a, b, values })
        }
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("norm objective is bounded below by zero"),
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ObservabilityError {
    #[error("actions {a} and {b} are not pairwise observable")]
    NotPairwiseObservable { a: usize, b: usize },
}

/// Pairwise estimator via value propagation on the bipartite symbol graph,
/// guaranteeing `|v|_inf <= 1 + F`.
///
/// Vertices are realized (action, symbol) pairs for the two actions; each
/// outcome `i` contributes the edge `((a, phi(a,i)), (b, phi(b,i)))` carrying
/// `diff[i]`. Values propagate along spanning-tree paths; a contradictory
/// cycle is exactly a failure of pairwise observability. Each connected
/// component is then shifted so the `a`-side values are centered around zero,
/// which caps them at half the largest in-component spread.
pub fn pairwise_estimator_bounded(
    game: &Game,
    a: usize,
    b: usize,
) -> Result<Estimator, ObservabilityError> {
    if a == b {
        return Ok(Estimator::zero(a, b));
    }
    let diff = game.loss_diff(a, b);
    let e = game.num_outcomes();

    // Vertex ids: (side, symbol); side 0 is action a, side 1 is action b.
    let mut assigned: BTreeMap<(u8, usize), Rat> = BTreeMap::new();
    let mut component: BTreeMap<(u8, usize), usize> = BTreeMap::new();
    let mut num_components = 0usize;

    let edges: Vec<((u8, usize), (u8, usize), Rat)> = (0..e)
        .map(|i| {
            (
                (0u8, game.symbol(a, i)),
                (1u8, game.symbol(b, i)),
                diff[i].clone(),
            )
        })
        .collect();

    let mut adjacency: BTreeMap<(u8, usize), Vec<((u8, usize), Rat)>> = BTreeMap::new();
    for (x, y, w) in &edges {
        adjacency.entry(*x).or_default().push((*y, w.clone()));
        adjacency.entry(*y).or_default().push((*x, w.clone()));
    }

    for start in adjacency.keys().copied().collect::<Vec<_>>() {
        if assigned.contains_key(&start) {
            continue;
        }
        let id = num_components;
        num_components += 1;
        assigned.insert(start, rat_zero());
        component.insert(start, id);
        let mut queue = vec![start];
        while let Some(vertex) = queue.pop() {
            let value = assigned[&vertex].clone();
            for (next, weight) in adjacency[&vertex].clone() {
                // Edge identity: value(a-side) + value(b-side) = diff.
                let propagated = &weight - &value;
                match assigned.get(&next) {
                    Some(existing) => {
                        if *existing != propagated {
                            return Err(ObservabilityError::NotPairwiseObservable { a, b });
                        }
                    }
                    None => {
                        assigned.insert(next, propagated);
                        component.insert(next, id);
                        queue.push(next);
                    }
                }
            }
        }
    }

    // Center the a-side of each component: shift a-values by s and b-values
    // by -s with s = -(max + min) / 2.
    for id in 0..num_components {
        let a_values: Vec<&Rat> = assigned
            .iter()
            .filter(|(&(side, _), _)| side == 0)
            .filter(|(key, _)| component[key] == id)
            .map(|(_, v)| v)
            .collect();
        if a_values.is_empty() {
            continue;
        }
        let max = a_values.iter().cloned().max().unwrap().clone();
        let min = a_values.iter().cloned().min().unwrap().clone();
        let shift = -(max + min) / Rat::from_integer(2.into());
        if shift.is_zero() {
            continue;
        }
        for (key, value) in assigned.iter_mut() {
            if component[key] != id {
                continue;
            }
            if key.0 == 0 {
                *value += &shift;
            } else {
                *value -= &shift;
            }
        }
    }

    let values = assigned
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|((side, f), v)| ((if side == 0 { a } else { b }, f), v))
        .collect();
    Ok(Estimator { a, b, values })
}

/// Observability verdicts and retained estimators for one neighbor pair.
#[derive(Debug, Clone)]
pub struct NeighborPairReport {
    pub pair: (usize, usize),
    pub globally_observable: bool,
    pub locally_observable: bool,
    /// Minimal-norm estimator with the tightest feasible support: local
    /// (support `N_ab`) when it exists, otherwise global (all actions).
    pub estimator: Option<Estimator>,
}

/// Pairwise observability and retained estimator for one weak-neighbor pair.
#[derive(Debug, Clone)]
pub struct WeakPairReport {
    pub pair: (usize, usize),
    pub pairwise_observable: bool,
    /// Minimal-norm estimator supported on the two actions alone.
    pub estimator: Option<Estimator>,
}

/// Full observability report for a game.
#[derive(Debug, Clone)]
pub struct ObservabilityReport {
    pub neighbor_pairs: Vec<NeighborPairReport>,
    pub weak_pairs: Vec<WeakPairReport>,
    /// Max norm over retained neighbor-pair estimators when every neighbor
    /// pair is locally observable (the V of the locally-supported family).
    pub v_max: Option<Rat>,
    /// Max norm over pairwise estimators when every weak pair is pairwise
    /// observable.
    pub v_loc: Option<Rat>,
}

impl ObservabilityReport {
    pub fn all_neighbor_pairs_global(&self) -> bool {
        self.neighbor_pairs.iter().all(|p| p.globally_observable)
    }

    pub fn all_neighbor_pairs_local(&self) -> bool {
        self.neighbor_pairs.iter().all(|p| p.locally_observable)
    }

    /// Point-local observability: every weak pair pairwise observable.
    pub fn point_locally_observable(&self) -> bool {
        self.weak_pairs.iter().all(|p| p.pairwise_observable)
    }

    pub fn neighbor_pair(&self, a: usize, b: usize) -> Option<&NeighborPairReport> {
        let key = (a.min(b), a.max(b));
        self.neighbor_pairs.iter().find(|p| p.pair == key)
    }

    pub fn weak_pair(&self, a: usize, b: usize) -> Option<&WeakPairReport> {
        let key = (a.min(b), a.max(b));
        self.weak_pairs.iter().find(|p| p.pair == key)
    }
}

/// Decides observability per pair and retains minimal-norm estimators.
///
/// Neighbor pairs get a local flag (support `N_ab`) and a global flag
/// (unrestricted support); weak pairs get a pairwise flag (support on the two
/// actions alone).
pub fn observability_report(game: &Game, ns: &NeighborStructure) -> ObservabilityReport {
    let all_actions: Vec<usize> = (0..game.num_actions()).collect();
    let mut neighbor_pairs = Vec::new();
    for &(a, b) in &ns.neighbor_pairs {
        let local = solve_estimator(game, a, b, ns.n_ab(a, b).expect("neighbor pair"));
        let (locally_observable, globally_observable, estimator) = match local {
            Some(est) => (true, true, Some(est)),
            None => match solve_estimator(game, a, b, &all_actions) {
                Some(est) => (false, true, Some(est)),
                None => (false, false, None),
            },
        };
        neighbor_pairs.push(NeighborPairReport {
            pair: (a, b),
            globally_observable,
            locally_observable,
            estimator,
        });
    }

    let mut weak_pairs = Vec::new();
    for &(a, b) in &ns.weak_pairs {
        let estimator = solve_estimator(game, a, b, &[a, b]);
        weak_pairs.push(WeakPairReport {
            pair: (a, b),
            pairwise_observable: estimator.is_some(),
            estimator,
        });
    }

    let v_max = if neighbor_pairs.iter().all(|p| p.locally_observable) {
        neighbor_pairs
            .iter()
            .filter_map(|p| p.estimator.as_ref().map(Estimator::inf_norm))
            .max()
            .or_else(|| Some(rat_zero()))
    } else {
        None
    };
    let v_loc = if weak_pairs.iter().all(|p| p.pairwise_observable) {
        weak_pairs
            .iter()
            .filter_map(|p| p.estimator.as_ref().map(Estimator::inf_norm))
            .max()
            .or_else(|| Some(rat_zero()))
    } else {
        None
    };

    ObservabilityReport {
        neighbor_pairs,
        weak_pairs,
        v_max,
        v_loc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{fixture, fixture_ref};
    use crate::geometry::{action_taxonomy, neighbor_structure};
    use crate::rational::rat;

    fn spam(c: &str) -> Game {
        fixture("spam", Some(c)).unwrap()
    }

    #[test]
    fn signal_matrix_of_informative_row() {
        let game = spam("1/3");
        let s3 = signal_matrix(&game, 2);
        assert_eq!(s3.rows, vec![vec![1, 0], vec![0, 1]]);
        let s1 = signal_matrix(&game, 0);
        assert_eq!(s1.rows, vec![vec![1, 1], vec![0, 0]]);
    }

    #[test]
    fn flower_signal_matrix_row_two() {
        let game = fixture("flower", Some("3")).unwrap();
        let s2 = signal_matrix(&game, 1);
        assert_eq!(s2.rows, vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![0, 0, 0, 0]]);
    }

    #[test]
    fn minimal_norm_estimator_spam_pair() {
        let game = spam("1/3");
        let est = solve_estimator(&game, 0, 2, &[0, 2]).unwrap();
        assert_eq!(est.inf_norm(), rat(1, 2));
        assert!(est.satisfies_identity(&game));
        assert!(est.support().is_subset(&[0, 2].into_iter().collect()));
    }

    #[test]
    fn hopeless_pair_has_no_estimator() {
        let game = fixture("hopeless2x2", None).unwrap();
        assert!(solve_estimator(&game, 0, 1, &[0, 1]).is_none());
    }

    #[test]
    fn same_action_estimator_is_zero() {
        let game = spam("1/3");
        let est = solve_estimator(&game, 1, 1, &[0, 1, 2]).unwrap();
        assert_eq!(est.inf_norm(), rat(0, 1));
        assert!(est.satisfies_identity(&game));
    }

    #[test]
    fn bounded_construction_on_spam_pair() {
        let game = spam("1/3");
        let est = pairwise_estimator_bounded(&game, 0, 2).unwrap();
        assert!(est.satisfies_identity(&game));
        let bound = rat(3, 1); // 1 + F with F = 2
        assert!(est.inf_norm() <= bound);
    }

    #[test]
    fn bounded_construction_on_flower_pair() {
        let game = fixture("flower", Some("3")).unwrap();
        let est = pairwise_estimator_bounded(&game, 0, 1).unwrap();
        assert!(est.satisfies_identity(&game));
        assert!(est.inf_norm() <= rat(4, 1)); // 1 + F with F = 3
    }

    #[test]
    fn bounded_construction_rejects_hopeless_pair() {
        let game = fixture("hopeless2x2", None).unwrap();
        assert_eq!(
            pairwise_estimator_bounded(&game, 0, 1),
            Err(ObservabilityError::NotPairwiseObservable { a: 0, b: 1 })
        );
    }

    #[test]
    fn spam_report_locally_and_point_locally_observable() {
        let game = spam("1/3");
        let tax = action_taxonomy(&game);
        let ns = neighbor_structure(&game, &tax);
        let report = observability_report(&game, &ns);
        assert!(report.all_neighbor_pairs_local());
        assert!(report.point_locally_observable());
        assert_eq!(report.v_loc, Some(rat(1, 2)));
        assert_eq!(report.v_max, Some(rat(1, 2)));
    }

    #[test]
    fn spam_heavy_globally_but_not_locally_observable() {
        let game = spam("3/5");
        let tax = action_taxonomy(&game);
        let ns = neighbor_structure(&game, &tax);
        let report = observability_report(&game, &ns);
        let pair = report.neighbor_pair(0, 1).unwrap();
        assert!(pair.globally_observable);
        assert!(!pair.locally_observable);
        let est = pair.estimator.as_ref().unwrap();
        assert!(est.satisfies_identity(&game));
        assert!(est.support().contains(&2));
    }

    #[test]
    fn exhibit3_not_point_locally_observable() {
        let game = fixture("exhibit3", None).unwrap();
        let tax = action_taxonomy(&game);
        let ns = neighbor_structure(&game, &tax);
        let report = observability_report(&game, &ns);
        assert!(report.all_neighbor_pairs_local());
        let weak = report.weak_pair(0, 1).unwrap();
        assert!(!weak.pairwise_observable);
        assert!(!report.point_locally_observable());
    }

    #[test]
    fn flag_monotonicity_across_fixtures() {
        for name in crate::game::all_fixture_names() {
            let game = fixture_ref(name).unwrap();
            let tax = action_taxonomy(&game);
            let ns = neighbor_structure(&game, &tax);
            let report = observability_report(&game, &ns);
            for pair in &report.neighbor_pairs {
                let (a, b) = pair.pair;
                let pairwise = solve_estimator(&game, a, b, &[a, b]).is_some();
                if pairwise {
                    assert!(pair.locally_observable, "{name}: pairwise must imply local");
                }
                if pair.locally_observable {
                    assert!(pair.globally_observable, "{name}: local must imply global");
                }
                if let Some(est) = &pair.estimator {
                    assert!(est.satisfies_identity(&game), "{name}: identity");
                }
            }
        }
    }

    #[test]
    fn minimality_against_grid_search() {
        // Independent check of the LP optimum: enumerate candidate estimator
        // values on a coarse rational grid, keep those satisfying the exact
        // identity, and compare the best norm found. The spam pair has three
        // realized keys; the optimum (1/6, -1/2, 1/2) lies on the grid.
        let game = spam("1/3");
        let lp_opt = solve_estimator(&game, 0, 2, &[0, 2]).unwrap().inf_norm();
        let step = rat(1, 6);
        let lo = -3 * 6;
        let hi = 3 * 6;
        let diff = game.loss_diff(0, 2);
        let mut best: Option<Rat> = None;
        for i in lo..=hi {
            let v_a1 = rat(i, 1) * step.clone();
            // Identity pins the other two values given v(a, symbol 1).
            let v_c1 = &diff[0] - &v_a1;
            let v_c2 = &diff[1] - &v_a1;
            let norm = [v_a1.abs(), v_c1.abs(), v_c2.abs()]
                .into_iter()
                .max()
                .unwrap();
            best = Some(match best {
                Some(b) if b <= norm => b,
                _ => norm,
            });
        }
        assert_eq!(best.unwrap(), lp_opt);
    }
}
