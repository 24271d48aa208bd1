//! Exact cell decomposition of the outcome simplex.
//!
//! The cell of an action is the polytope of outcome distributions on which the
//! action is optimal. Everything here is decided over rationals: dimensions by
//! growing affinely independent feasible points, containment by per-competitor
//! LP maximization, and point-local cliques by joint-intersection-verified
//! clique enumeration.

use crate::game::Game;
use crate::linalg::nullspace;
use crate::lp::{Lp, LpOutcome, Rel};
use crate::rational::{dot, rat_one, rat_zero, Rat};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Classification of a single action by its cell dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionClass {
    Dominated,
    Degenerate,
    Pareto,
}

/// A reified cell: its dominance inequalities and exact dimension.
#[derive(Debug, Clone)]
pub struct Cell {
    pub action: usize,
    /// Rows `loss[action] - loss[b]` for `b != action`; the cell is where all
    /// of these have nonpositive inner product with `u`, inside the simplex.
    pub dominance_rows: Vec<Vec<Rat>>,
    /// Dimension of the affine hull; -1 for an empty cell.
    pub dimension: i64,
}

/// Per-action classes, duplicate classes, and the chosen maximal
/// duplicate-free set of Pareto actions.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    pub class: Vec<ActionClass>,
    pub cell_dimension: Vec<i64>,
    /// Partition of all actions by exact loss-row equality.
    pub duplicate_classes: Vec<Vec<usize>>,
    /// Lowest-index representative per Pareto duplicate class.
    pub maximal_pareto: Vec<usize>,
}

impl Taxonomy {
    pub fn pareto_actions(&self) -> Vec<usize> {
        (0..self.class.len())
            .filter(|&a| self.class[a] == ActionClass::Pareto)
            .collect()
    }

    pub fn is_pareto(&self, action: usize) -> bool {
        self.class[action] == ActionClass::Pareto
    }

    /// Actions with exactly the same loss row as `action`, excluding it.
    pub fn duplicates_of(&self, action: usize) -> Vec<usize> {
        self.duplicate_classes
            .iter()
            .find(|class| class.contains(&action))
            .map(|class| class.iter().copied().filter(|&c| c != action).collect())
            .unwrap_or_default()
    }
}

/// Neighbor relation over Pareto actions plus the in-between sets `N_ab`.
#[derive(Debug, Clone)]
pub struct NeighborStructure {
    /// Unordered Pareto pairs whose cells intersect with dimension E-2.
    pub neighbor_pairs: Vec<(usize, usize)>,
    /// Unordered Pareto pairs whose cells intersect at all.
    pub weak_pairs: Vec<(usize, usize)>,
    /// For each neighbor pair, every action whose cell contains the
    /// intersection (degenerate and duplicate actions included).
    pub n_ab: BTreeMap<(usize, usize), Vec<usize>>,
    /// Convex-combination coefficient for each `d` in `N_ab`:
    /// `loss[d] = alpha * loss[a] + (1 - alpha) * loss[b]`.
    pub alpha: BTreeMap<(usize, usize, usize), Rat>,
    /// For each Pareto action, itself plus its neighbors.
    pub n_a: BTreeMap<usize, Vec<usize>>,
    /// Union of all `N_ab`, ascending.
    pub playable: Vec<usize>,
}

impl NeighborStructure {
    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.neighbor_pairs.contains(&key)
    }

    pub fn are_weak_neighbors(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.weak_pairs.contains(&key)
    }

    pub fn n_ab(&self, a: usize, b: usize) -> Option<&Vec<usize>> {
        self.n_ab.get(&(a.min(b), a.max(b)))
    }
}

/// Maximal sets of Pareto actions whose cells share a common point.
#[derive(Debug, Clone)]
pub struct PointLocalStructure {
    /// Maximal jointly-intersecting action sets, each verified exactly.
    pub cliques: Vec<Vec<usize>>,
    pub k_loc: usize,
    /// Maximal cliques of the weak-neighbor graph that do NOT share a common
    /// point. Empty for every game we know of; surfaced rather than guessed at.
    pub discrepancies: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("actions {a} and {b} have identical loss rows; coefficient is not unique")]
    DuplicateEndpoints { a: usize, b: usize },
    #[error("loss row of action {d} is not a convex combination of actions {a} and {b}")]
    NotConvexCombination { d: usize, a: usize, b: usize },
}

/// Feasibility program for the joint cell intersection of `actions`.
///
/// Variables are the E simplex coordinates; constraints are nonnegativity,
/// the unit-sum equality, and each action's dominance inequalities.
pub fn cell_lp(game: &Game, actions: &[usize]) -> Lp {
    let e = game.num_outcomes();
    let mut lp = Lp::new(e);
    for i in 0..e {
        let mut row = vec![rat_zero(); e];
        row[i] = rat_one();
        lp.constrain(row, Rel::Ge, rat_zero());
    }
    lp.constrain(vec![rat_one(); e], Rel::Eq, rat_one());
    for &a in actions {
        for b in 0..game.num_actions() {
            if b == a {
                continue;
            }
            let row = game.loss_diff(a, b);
            if row.iter().all(Zero::is_zero) {
                continue;
            }
            lp.constrain(row, Rel::Le, rat_zero());
        }
    }
    lp
}

/// Exact membership test `u` in the joint intersection of the given cells.
pub fn in_cells(game: &Game, actions: &[usize], point: &[Rat]) -> bool {
    let zero = rat_zero();
    if point.iter().any(|v| v < &zero) {
        return false;
    }
    if point.iter().sum::<Rat>() != rat_one() {
        return false;
    }
    actions.iter().all(|&a| {
        (0..game.num_actions()).all(|b| dot(&game.loss_diff(a, b), point) <= zero)
    })
}

/// Dimension of the affine hull of the feasible set of `lp`; -1 when empty.
///
/// Grows a maximal affinely independent set of feasible points. Directions
/// orthogonal to the current affine hull are either stretched into a new
/// independent point (via max/min LPs) or certified constant over the whole
/// feasible set, so the loop ends after at most `2 * dim` rounds.
pub fn affine_dimension(lp: &Lp, dim: usize) -> i64 {
    let base_point = match lp.solve() {
        LpOutcome::Optimal(sol) => sol.point,
        LpOutcome::Infeasible => return -1,
        LpOutcome::Unbounded => unreachable!("feasibility solve has zero objective"),
    };
    let mut span_rows: Vec<Vec<Rat>> = Vec::new();
    let mut fixed_rows: Vec<Vec<Rat>> = Vec::new();
    loop {
        let mut rows = span_rows.clone();
        rows.extend(fixed_rows.iter().cloned());
        let candidates = nullspace(&rows, dim);
        let Some(direction) = candidates.into_iter().next() else {
            break;
        };
        let base_value = dot(&direction, &base_point);
        let stretched = match lp.solve_max(direction.clone()) {
            LpOutcome::Optimal(sol) if sol.value > base_value => Some(sol.point),
            LpOutcome::Optimal(_) => {
                let mut flipped = lp.clone();
                flipped.minimize(direction.clone());
                match flipped.solve() {
                    LpOutcome::Optimal(sol) if sol.value < base_value => Some(sol.point),
                    LpOutcome::Optimal(_) => None,
                    _ => unreachable!("bounded polytope"),
                }
            }
            _ => unreachable!("bounded polytope"),
        };
        match stretched {
            Some(point) => {
                let row = point
                    .iter()
                    .zip(&base_point)
                    .map(|(x, y)| x - y)
                    .collect();
                span_rows.push(row);
            }
            None => fixed_rows.push(direction),
        }
    }
    span_rows.len() as i64
}

/// Exact dimension of `C_a`, computed over rationals; -1 for an empty cell.
pub fn cell_dimension(game: &Game, action: usize) -> i64 {
    affine_dimension(&cell_lp(game, &[action]), game.num_outcomes())
}

/// Dimension of a joint cell intersection.
pub fn intersection_dimension(game: &Game, actions: &[usize]) -> i64 {
    affine_dimension(&cell_lp(game, actions), game.num_outcomes())
}

/// Reifies the cell of one action.
pub fn cell(game: &Game, action: usize) -> Cell {
    let dominance_rows = (0..game.num_actions())
        .filter(|&b| b != action)
        .map(|b| game.loss_diff(action, b))
        .collect();
    Cell {
        action,
        dominance_rows,
        dimension: cell_dimension(game, action),
    }
}

/// Classifies every action and chooses the duplicate-free Pareto set.
pub fn action_taxonomy(game: &Game) -> Taxonomy {
    let k = game.num_actions();
    let e = game.num_outcomes();
    let full = e as i64 - 1;
    let cell_dimension: Vec<i64> = (0..k).map(|a| self::cell_dimension(game, a)).collect();
    let class = cell_dimension
        .iter()
        .map(|&d| {
            if d < 0 {
                ActionClass::Dominated
            } else if d < full {
                ActionClass::Degenerate
            } else {
                ActionClass::Pareto
            }
        })
        .collect::<Vec<_>>();

    let mut duplicate_classes: Vec<Vec<usize>> = Vec::new();
    for a in 0..k {
        match duplicate_classes
            .iter_mut()
            .find(|cls| game.loss[cls[0]] == game.loss[a])
        {
            Some(cls) => cls.push(a),
            None => duplicate_classes.push(vec![a]),
        }
    }

    // Lowest index per Pareto duplicate class. Duplicates share a cell, so a
    // class is either all Pareto or none.
    let maximal_pareto = duplicate_classes
        .iter()
        .filter(|cls| class[cls[0]] == ActionClass::Pareto)
        .map(|cls| cls[0])
        .collect();

    Taxonomy {
        class,
        cell_dimension,
        duplicate_classes,
        maximal_pareto,
    }
}

/// Unique coefficient with `loss[d] = alpha * loss[a] + (1 - alpha) * loss[b]`.
pub fn convex_coefficient(
    game: &Game,
    d: usize,
    a: usize,
    b: usize,
) -> Result<Rat, GeometryError> {
    if d == a {
        return Ok(rat_one());
    }
    if d == b {
        return Ok(rat_zero());
    }
    let diff_ab = game.loss_diff(a, b);
    let Some(pivot) = diff_ab.iter().position(|v| !v.is_zero()) else {
        return Err(GeometryError::DuplicateEndpoints { a, b });
    };
    let alpha = (&game.loss[d][pivot] - &game.loss[b][pivot]) / &diff_ab[pivot];
    let not_combination = GeometryError::NotConvexCombination { d, a, b };
    if alpha < rat_zero() || alpha > rat_one() {
        return Err(not_combination);
    }
    for i in 0..game.num_outcomes() {
        let expect = &alpha * &game.loss[a][i] + (rat_one() - &alpha) * &game.loss[b][i];
        if expect != game.loss[d][i] {
            return Err(not_combination);
        }
    }
    Ok(alpha)
}

/// Containment test `C_a ∩ C_b ⊆ C_c`, decided one competitor at a time:
/// the maximum of `<loss[c] - loss[b'], u>` over the intersection must be
/// nonpositive for every competitor `b'`.
fn intersection_inside_cell(game: &Game, a: usize, b: usize, c: usize) -> bool {
    let lp = cell_lp(game, &[a, b]);
    for competitor in 0..game.num_actions() {
        if competitor == c {
            continue;
        }
        let objective = game.loss_diff(c, competitor);
        if objective.iter().all(Zero::is_zero) {
            continue;
        }
        match lp.solve_max(objective) {
            LpOutcome::Optimal(sol) => {
                if sol.value > rat_zero() {
                    return false;
                }
            }
            LpOutcome::Infeasible => return false,
            LpOutcome::Unbounded => unreachable!("bounded polytope"),
        }
    }
    true
}

/// Computes the neighbor/weak-neighbor relations and all `N_ab` sets.
pub fn neighbor_structure(game: &Game, taxonomy: &Taxonomy) -> NeighborStructure {
    let pareto = taxonomy.pareto_actions();
    let e = game.num_outcomes() as i64;
    let mut neighbor_pairs = Vec::new();
    let mut weak_pairs = Vec::new();
    for (idx, &a) in pareto.iter().enumerate() {
        for &b in &pareto[idx + 1..] {
            let dim = intersection_dimension(game, &[a, b]);
            if dim >= 0 {
                weak_pairs.push((a, b));
            }
            if dim >= 0 && dim == e - 2 {
                neighbor_pairs.push((a, b));
            }
        }
    }

    let mut n_ab = BTreeMap::new();
    let mut alpha = BTreeMap::new();
    for &(a, b) in &neighbor_pairs {
        let mut members = vec![a, b];
        for c in 0..game.num_actions() {
            if c != a && c != b && intersection_inside_cell(game, a, b, c) {
                members.push(c);
            }
        }
        members.sort_unstable();
        for &d in &members {
            let coeff = convex_coefficient(game, d, a, b)
                .expect("members of N_ab are convex combinations of the endpoints");
            alpha.insert((a, b, d), coeff);
        }
        n_ab.insert((a, b), members);
    }

    let mut n_a: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &a in &pareto {
        let mut set: BTreeSet<usize> = BTreeSet::new();
        set.insert(a);
        for &(x, y) in &neighbor_pairs {
            if x == a {
                set.insert(y);
            } else if y == a {
                set.insert(x);
            }
        }
        n_a.insert(a, set.into_iter().collect());
    }

    let playable: Vec<usize> = n_ab
        .values()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    NeighborStructure {
        neighbor_pairs,
        weak_pairs,
        n_ab,
        alpha,
        n_a,
        playable,
    }
}

/// Vertices of the joint cell intersection, by basic-feasible-solution
/// enumeration: every subset of E-1 tight inequalities (nonnegativity and
/// dominance rows) together with the unit-sum equality is solved exactly and
/// kept when the solution is unique and feasible. Intended for the small
/// intersection polytopes the lower-bound construction works with; errors out
/// rather than grinding through an astronomically large subset space.
pub fn intersection_vertices(
    game: &Game,
    actions: &[usize],
) -> Result<Vec<Vec<Rat>>, String> {
    let e = game.num_outcomes();
    if e == 0 {
        return Err("game has no outcomes".into());
    }
    // Candidate tight rows: u_i = 0, and <loss[a] - loss[b], u> = 0.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for i in 0..e {
        let mut row = vec![rat_zero(); e];
        row[i] = rat_one();
        rows.push(row);
    }
    for &a in actions {
        for b in 0..game.num_actions() {
            if b != a {
                let row = game.loss_diff(a, b);
                if row.iter().any(|v| !v.is_zero()) && !rows.contains(&row) {
                    rows.push(row);
                }
            }
        }
    }
    let m = rows.len();
    let choose = e - 1;
    let mut combinations: u128 = 1;
    for j in 0..choose {
        combinations = combinations.saturating_mul((m - j) as u128) / (j as u128 + 1);
        if combinations > 200_000 {
            return Err(format!(
                "vertex enumeration over {m} rows in dimension {e} is too large"
            ));
        }
    }

    if m < choose {
        return Ok(Vec::new());
    }
    let mut vertices: BTreeSet<Vec<Rat>> = BTreeSet::new();
    let mut subset: Vec<usize> = (0..choose).collect();
    loop {
        // Solve the tight system: chosen rows = 0, plus sum u = 1.
        let mut system: Vec<Vec<Rat>> = subset
            .iter()
            .map(|&i| {
                let mut row = rows[i].clone();
                row.push(rat_zero());
                row
            })
            .collect();
        let mut sum_row = vec![rat_one(); e];
        sum_row.push(rat_one());
        system.push(sum_row);
        if let Some(point) = solve_unique(system, e) {
            if in_cells_unchecked(game, actions, &point) {
                vertices.insert(point);
            }
        }
        if !next_combination(&mut subset, m) {
            break;
        }
    }
    Ok(vertices.into_iter().collect())
}

/// Advances `subset` to the next k-combination of `0..m` in lexicographic
/// order; `false` when exhausted. An empty subset has no successor.
fn next_combination(subset: &mut [usize], m: usize) -> bool {
    let k = subset.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < m - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian solve returning the unique solution of an augmented system, or
/// `None` when the system is singular or inconsistent.
fn solve_unique(mut system: Vec<Vec<Rat>>, dim: usize) -> Option<Vec<Rat>> {
    let rows = system.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; dim];
    let mut r = 0;
    for c in 0..dim {
        let Some(p) = (r..rows).find(|&i| !system[i][c].is_zero()) else {
            continue;
        };
        system.swap(r, p);
        let inv = system[r][c].clone();
        for v in &mut system[r] {
            *v = &*v / &inv;
        }
        for i in 0..rows {
            if i != r && !system[i][c].is_zero() {
                let factor = system[i][c].clone();
                for j in 0..=dim {
                    let delta = &factor * &system[r][j];
                    system[i][j] -= delta;
                }
            }
        }
        pivot_of_col[c] = Some(r);
        r += 1;
    }
    // Inconsistent row: all-zero coefficients with nonzero rhs.
    for row in &system {
        if row[..dim].iter().all(Zero::is_zero) && !row[dim].is_zero() {
            return None;
        }
    }
    if pivot_of_col.iter().any(Option::is_none) {
        return None; // underdetermined
    }
    Some(
        (0..dim)
            .map(|c| system[pivot_of_col[c].unwrap()][dim].clone())
            .collect(),
    )
}

/// Raw membership check without the unit-sum test (the solver enforces it).
fn in_cells_unchecked(game: &Game, actions: &[usize], point: &[Rat]) -> bool {
    let zero = rat_zero();
    if point.iter().any(|v| v < &zero) {
        return false;
    }
    actions.iter().all(|&a| {
        (0..game.num_actions()).all(|b| dot(&game.loss_diff(a, b), point) <= zero)
    })
}

/// Enumerates maximal vertex sets satisfying a downward-closed predicate.
/// With a pairwise predicate this is exactly Bron-Kerbosch.
fn maximal_sets(
    vertices: &[usize],
    feasible: &mut dyn FnMut(&[usize]) -> bool,
) -> Vec<Vec<usize>> {
    fn recurse(
        r: &mut Vec<usize>,
        p: Vec<usize>,
        mut x: Vec<usize>,
        feasible: &mut dyn FnMut(&[usize]) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            return;
        }
        let mut pending = p;
        while let Some(v) = pending.first().copied() {
            pending.remove(0);
            r.push(v);
            let filter = |set: &[usize], f: &mut dyn FnMut(&[usize]) -> bool, r: &[usize]| {
                set.iter()
                    .copied()
                    .filter(|&w| {
                        let mut candidate = r.to_vec();
                        candidate.push(w);
                        candidate.sort_unstable();
                        f(&candidate)
                    })
                    .collect::<Vec<usize>>()
            };
            let p2 = filter(&pending, feasible, r);
            let x2 = filter(&x, feasible, r);
            recurse(r, p2, x2, feasible, out);
            r.pop();
            x.push(v);
        }
    }

    let mut out = Vec::new();
    recurse(
        &mut Vec::new(),
        vertices.to_vec(),
        Vec::new(),
        feasible,
        &mut out,
    );
    out
}

/// Maximal point-local games: cliques of the weak-neighbor graph verified to
/// share a common cell point (pairwise intersection does not imply a joint
/// point, so the joint test is the authoritative one).
pub fn point_local_cliques(game: &Game, taxonomy: &Taxonomy) -> PointLocalStructure {
    let pareto = taxonomy.pareto_actions();
    let mut cache: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
    let mut jointly_feasible = |set: &[usize]| -> bool {
        if set.len() <= 1 {
            return true;
        }
        if let Some(&hit) = cache.get(set) {
            return hit;
        }
        let result = cell_lp(game, set).solve().is_feasible();
        cache.insert(set.to_vec(), result);
        result
    };

    let cliques = maximal_sets(&pareto, &mut jointly_feasible);

    // Plain graph cliques, for the discrepancy report.
    let mut weak: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, &a) in pareto.iter().enumerate() {
        for &b in &pareto[i + 1..] {
            let mut pair = vec![a, b];
            pair.sort_unstable();
            if jointly_feasible(&pair) {
                weak.insert((pair[0], pair[1]));
            }
        }
    }
    let mut pairwise = |set: &[usize]| -> bool {
        set.iter().enumerate().all(|(i, &a)| {
            set[i + 1..]
                .iter()
                .all(|&b| weak.contains(&(a.min(b), a.max(b))))
        })
    };
    let graph_cliques = maximal_sets(&pareto, &mut pairwise);
    let discrepancies = graph_cliques
        .into_iter()
        .filter(|clique| !cliques.contains(clique))
        .collect();

    let k_loc = cliques.iter().map(Vec::len).max().unwrap_or(0);
    PointLocalStructure {
        cliques,
        k_loc,
        discrepancies,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixture;
    use crate::rational::rat;

    fn spam(c: &str) -> Game {
        fixture("spam", Some(c)).unwrap()
    }

    #[test]
    fn spam_third_cell_dimensions() {
        let game = spam("1/3");
        assert_eq!(cell_dimension(&game, 0), 1);
        assert_eq!(cell_dimension(&game, 1), 1);
        assert_eq!(cell_dimension(&game, 2), 1);
        let half = spam("1/2");
        assert_eq!(cell_dimension(&half, 2), 0);
        let heavy = spam("3/5");
        assert_eq!(cell_dimension(&heavy, 2), -1);
    }

    #[test]
    fn spam_zero_taxonomy() {
        let game = spam("0");
        let tax = action_taxonomy(&game);
        assert_eq!(tax.class[2], ActionClass::Pareto);
        assert_eq!(tax.class[0], ActionClass::Degenerate);
        assert_eq!(tax.class[1], ActionClass::Degenerate);
        assert_eq!(tax.cell_dimension[2], 1);
    }

    #[test]
    fn exhibit4_taxonomy() {
        let game = fixture("exhibit4", None).unwrap();
        let tax = action_taxonomy(&game);
        let classes: Vec<ActionClass> = tax.class.clone();
        assert_eq!(
            classes,
            vec![
                ActionClass::Pareto,
                ActionClass::Pareto,
                ActionClass::Pareto,
                ActionClass::Degenerate,
                ActionClass::Degenerate,
                ActionClass::Degenerate,
            ]
        );
        assert_eq!(tax.maximal_pareto, vec![0, 1, 2]);
    }

    #[test]
    fn spam_third_neighbor_structure() {
        let game = spam("1/3");
        let tax = action_taxonomy(&game);
        let ns = neighbor_structure(&game, &tax);
        assert_eq!(ns.neighbor_pairs, vec![(0, 2), (1, 2)]);
        assert!(!ns.are_neighbors(0, 1));
        assert_eq!(ns.n_ab(0, 2).unwrap(), &vec![0, 2]);
        assert_eq!(ns.playable, vec![0, 1, 2]);
    }

    #[test]
    fn spam_heavy_has_single_neighbor_pair() {
        let game = spam("3/5");
        let tax = action_taxonomy(&game);
        let ns = neighbor_structure(&game, &tax);
        assert_eq!(ns.neighbor_pairs, vec![(0, 1)]);
        assert_eq!(ns.n_ab(0, 1).unwrap(), &vec![0, 1]);
    }

    #[test]
    fn exhibit4_n_ab_and_alpha() {
        let game = fixture("exhibit4", None).unwrap();
        let tax = action_taxonomy(&game);
        let ns = neighbor_structure(&game, &tax);
        assert_eq!(ns.neighbor_pairs, vec![(0, 2), (1, 2)]);
        // Action 4 (index 3) sits inside C_2 ∩ C_3 with alpha = 1/2; actions
        // 5 and 6 are excluded, so the playable set is {1,2,3,4}.
        assert_eq!(ns.n_ab(1, 2).unwrap(), &vec![1, 2, 3]);
        assert_eq!(ns.alpha[&(1, 2, 3)], rat(1, 2));
        assert_eq!(ns.playable, vec![0, 1, 2, 3]);
    }

    #[test]
    fn convex_coefficient_identities() {
        let game = fixture("exhibit4", None).unwrap();
        assert_eq!(convex_coefficient(&game, 1, 1, 2).unwrap(), rat(1, 1));
        assert_eq!(convex_coefficient(&game, 2, 1, 2).unwrap(), rat(0, 1));
        assert_eq!(convex_coefficient(&game, 3, 1, 2).unwrap(), rat(1, 2));
        assert!(convex_coefficient(&game, 4, 1, 2).is_err());
    }

    #[test]
    fn spam_third_cliques() {
        let game = spam("1/3");
        let tax = action_taxonomy(&game);
        let pls = point_local_cliques(&game, &tax);
        assert_eq!(pls.cliques, vec![vec![0, 2], vec![1, 2]]);
        assert_eq!(pls.k_loc, 2);
        assert!(pls.discrepancies.is_empty());
    }

    #[test]
    fn exhibit3_has_a_three_clique() {
        let game = fixture("exhibit3", None).unwrap();
        let tax = action_taxonomy(&game);
        let pls = point_local_cliques(&game, &tax);
        assert_eq!(pls.cliques, vec![vec![0, 1, 2]]);
        assert_eq!(pls.k_loc, 3);
        // The common point (1/2, 1/2, 0) satisfies every optimality constraint.
        let point = vec![rat(1, 2), rat(1, 2), rat(0, 1)];
        assert!(in_cells(&game, &[0, 1, 2], &point));
    }

    #[test]
    fn single_action_game_clique() {
        let game = crate::game::parse_game(r#"{"name":"unit","loss":[[0]],"feedback":[[1]]}"#)
            .unwrap();
        let tax = action_taxonomy(&game);
        let pls = point_local_cliques(&game, &tax);
        assert_eq!(pls.cliques, vec![vec![0]]);
        assert_eq!(pls.k_loc, 1);
    }

    #[test]
    fn vertices_of_point_and_segment_intersections() {
        let heavy = spam("3/5");
        let vs = intersection_vertices(&heavy, &[0, 1]).unwrap();
        assert_eq!(vs, vec![vec![rat(1, 2), rat(1, 2)]]);

        let game = spam("1/3");
        let vs = intersection_vertices(&game, &[2]).unwrap();
        assert_eq!(
            vs,
            vec![
                vec![rat(1, 3), rat(2, 3)],
                vec![rat(2, 3), rat(1, 3)],
            ]
        );

        let ex4 = fixture("exhibit4", None).unwrap();
        let vs = intersection_vertices(&ex4, &[1, 2]).unwrap();
        assert_eq!(vs.len(), 2);
        assert!(vs.contains(&vec![rat(0, 1), rat(1, 2), rat(1, 2)]));
        assert!(vs.contains(&vec![rat(1, 2), rat(1, 2), rat(0, 1)]));

        let empty = intersection_vertices(&game, &[0, 1]).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn intersection_dimension_bounded_by_cell_dimensions() {
        for name in ["spam:1/3", "spam:3/5", "exhibit3", "exhibit4"] {
            let game = crate::game::fixture_ref(name).unwrap();
            let dims: Vec<i64> = (0..game.num_actions())
                .map(|a| cell_dimension(&game, a))
                .collect();
            for a in 0..game.num_actions() {
                for b in a + 1..game.num_actions() {
                    let pair = intersection_dimension(&game, &[a, b]);
                    assert!(pair <= dims[a].min(dims[b]), "{name}: ({a},{b})");
                }
            }
        }
    }
}
