//! Exact linear programming over rationals.
//!
//! Dense two-phase primal simplex with Bland's rule, so every solve terminates
//! and returns an exact vertex. Variables are unrestricted in sign; they are
//! split internally. Problem sizes here are desk scale (tens of variables), so
//! a dense rational tableau is the right trade.

use crate::rational::{rat_zero, Rat};
use num::{One, Signed, Zero};

/// Constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<Rat>,
    rel: Rel,
    rhs: Rat,
}

/// A linear program over free rational variables, minimized by `solve`.
#[derive(Debug, Clone)]
pub struct Lp {
    num_vars: usize,
    objective: Vec<Rat>,
    constraints: Vec<Constraint>,
}

/// Exact optimum of an [`Lp`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rat,
    pub point: Vec<Rat>,
}

/// Solver outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(sol) => Some(sol),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl Lp {
    /// New program with `num_vars` free variables and zero objective.
    pub fn new(num_vars: usize) -> Self {
        Lp {
            num_vars,
            objective: vec![rat_zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    /// Sets the (minimization) objective.
    pub fn minimize(&mut self, objective: Vec<Rat>) {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
    }

    /// Adds the constraint `coeffs . x REL rhs`.
    pub fn constrain(&mut self, coeffs: Vec<Rat>, rel: Rel, rhs: Rat) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    /// Runs the two-phase simplex.
    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve()
    }

    /// Maximizes `objective`, reusing the same constraint set.
    pub fn solve_max(&self, objective: Vec<Rat>) -> LpOutcome {
        let mut flipped = self.clone();
        flipped.minimize(objective.into_iter().map(|c| -c).collect());
        match flipped.solve() {
            LpOutcome::Optimal(mut sol) => {
                sol.value = -sol.value;
                LpOutcome::Optimal(sol)
            }
            other => other,
        }
    }
}

/// Dense simplex tableau in canonical form.
///
/// Column layout: `2 * num_vars` split variables, then one slack/surplus per
/// inequality, then artificials. Row `rhs` is kept nonnegative throughout.
struct Tableau {
    num_vars: usize,
    cols: usize,
    first_artificial: usize,
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    phase1_cost: Vec<Rat>,
    phase2_cost: Vec<Rat>,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let split = 2 * lp.num_vars;
        let num_slack = lp
            .constraints
            .iter()
            .filter(|c| c.rel != Rel::Eq)
            .count();
        let num_artificial = lp
            .constraints
            .iter()
            .filter(|c| {
                let mut rel = c.rel;
                if c.rhs.is_negative() {
                    rel = flip(rel);
                }
                rel != Rel::Le
            })
            .count();
        let cols = split + num_slack + num_artificial;
        let first_artificial = split + num_slack;

        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut basis = Vec::with_capacity(lp.constraints.len());
        let mut next_slack = split;
        let mut next_art = first_artificial;
        for c in &lp.constraints {
            let mut coeffs = c.coeffs.clone();
            let mut rhs = c.rhs.clone();
            let mut rel = c.rel;
            if rhs.is_negative() {
                rhs = -rhs;
                for v in &mut coeffs {
                    *v = -v.clone();
                }
                rel = flip(rel);
            }
            let mut row = vec![rat_zero(); cols + 1];
            for (j, v) in coeffs.iter().enumerate() {
                row[2 * j] = v.clone();
                row[2 * j + 1] = -v.clone();
            }
            row[cols] = rhs;
            match rel {
                Rel::Le => {
                    row[next_slack] = Rat::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Rel::Ge => {
                    row[next_slack] = -Rat::one();
                    next_slack += 1;
                    row[next_art] = Rat::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Rel::Eq => {
                    row[next_art] = Rat::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }

        // Reduced-cost rows, canonicalized against the initial basis.
        let mut phase1_cost = vec![rat_zero(); cols + 1];
        for j in first_artificial..cols {
            phase1_cost[j] = Rat::one();
        }
        let mut phase2_cost = vec![rat_zero(); cols + 1];
        for (j, c) in lp.objective.iter().enumerate() {
            phase2_cost[2 * j] = c.clone();
            phase2_cost[2 * j + 1] = -c.clone();
        }
        for (i, &b) in basis.iter().enumerate() {
            if !phase1_cost[b].is_zero() {
                let factor = phase1_cost[b].clone();
                for j in 0..=cols {
                    let delta = &factor * &rows[i][j];
                    phase1_cost[j] -= delta;
                }
            }
        }

        Tableau {
            num_vars: lp.num_vars,
            cols,
            first_artificial,
            rows,
            basis,
            phase1_cost,
            phase2_cost,
        }
    }

    fn solve(mut self) -> LpOutcome {
        // Phase 1: minimize artificial mass.
        if self.run_phase(true).is_none() {
            // Phase 1 objective is bounded below by zero.
            unreachable!("phase 1 cannot be unbounded");
        }
        let infeasibility = -self.phase1_cost[self.cols].clone();
        if !infeasibility.is_zero() {
            return LpOutcome::Infeasible;
        }
        self.evict_artificials();
        if self.run_phase(false).is_none() {
            return LpOutcome::Unbounded;
        }
        LpOutcome::Optimal(self.extract())
    }

    /// Bland's rule simplex on the active cost row. Returns `None` when the
    /// program is unbounded in the current phase.
    fn run_phase(&mut self, phase1: bool) -> Option<()> {
        loop {
            let limit = if phase1 { self.cols } else { self.first_artificial };
            let cost = if phase1 {
                &self.phase1_cost
            } else {
                &self.phase2_cost
            };
            let entering = (0..limit).find(|&j| cost[j].is_negative());
            let Some(col) = entering else {
                return Some(());
            };
            let mut leaving: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = &self.rows[i][self.cols] / &self.rows[i][col];
                    let better = match &leaving {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < *best_ratio
                                || (ratio == *best_ratio
                                    && self.basis[i] < self.basis[*best_row])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return None;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col].clone();
        for v in &mut self.rows[row] {
            *v = &*v / &pivot;
        }
        let pivot_row = self.rows[row].clone();
        for (i, target) in self.rows.iter_mut().enumerate() {
            if i != row {
                Self::eliminate(&pivot_row, target, col);
            }
        }
        Self::eliminate(&pivot_row, &mut self.phase1_cost, col);
        Self::eliminate(&pivot_row, &mut self.phase2_cost, col);
        self.basis[row] = col;
    }

    fn eliminate(pivot_row: &[Rat], target: &mut [Rat], col: usize) {
        if target[col].is_zero() {
            return;
        }
        let factor = target[col].clone();
        for (t, p) in target.iter_mut().zip(pivot_row) {
            if !p.is_zero() {
                *t -= &factor * p;
            }
        }
    }

    /// Removes artificial variables from the basis after phase 1. Rows that
    /// cannot be repaired are redundant and dropped. The artificial columns
    /// themselves stay in place; phase 2 never considers them for entry.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .find(|&j| !self.rows[i][j].is_zero());
                match col {
                    Some(col) => self.pivot(i, col),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn extract(&self) -> LpSolution {
        let mut split = vec![rat_zero(); 2 * self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < 2 * self.num_vars {
                split[b] = self.rows[i][self.cols].clone();
            }
        }
        let point = (0..self.num_vars)
            .map(|j| &split[2 * j] - &split[2 * j + 1])
            .collect();
        LpSolution {
            value: -self.phase2_cost[self.cols].clone(),
            point,
        }
    }
}

fn flip(rel: Rel) -> Rel {
    match rel {
        Rel::Le => Rel::Ge,
        Rel::Ge => Rel::Le,
        Rel::Eq => Rel::Eq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn v(entries: &[(i64, i64)]) -> Vec<Rat> {
        entries.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn minimizes_with_inequalities() {
        let mut lp = Lp::new(2);
        lp.minimize(v(&[(1, 1), (1, 1)]));
        lp.constrain(v(&[(1, 1), (1, 1)]), Rel::Ge, rat_int(2));
        lp.constrain(v(&[(1, 1), (0, 1)]), Rel::Ge, rat_int(0));
        lp.constrain(v(&[(0, 1), (1, 1)]), Rel::Ge, rat_int(0));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.value, rat_int(2));
    }

    #[test]
    fn solves_equalities_exactly() {
        let mut lp = Lp::new(2);
        lp.constrain(v(&[(1, 1), (1, 1)]), Rel::Eq, rat_int(1));
        lp.constrain(v(&[(1, 1), (-1, 1)]), Rel::Eq, rat_int(0));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.point, v(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = Lp::new(1);
        lp.constrain(v(&[(1, 1)]), Rel::Le, rat_int(-1));
        lp.constrain(v(&[(1, 1)]), Rel::Ge, rat_int(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unboundedness() {
        let mut lp = Lp::new(1);
        lp.minimize(v(&[(-1, 1)]));
        lp.constrain(v(&[(1, 1)]), Rel::Ge, rat_int(0));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn handles_free_variables() {
        // min x subject to x >= -3/2 reaches the negative optimum.
        let mut lp = Lp::new(1);
        lp.minimize(v(&[(1, 1)]));
        lp.constrain(v(&[(1, 1)]), Rel::Ge, rat(-3, 2));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.value, rat(-3, 2));
        assert_eq!(sol.point, v(&[(-3, 2)]));
    }

    #[test]
    fn maximization_helper() {
        let mut lp = Lp::new(2);
        lp.constrain(v(&[(1, 1), (0, 1)]), Rel::Ge, rat_int(0));
        lp.constrain(v(&[(0, 1), (1, 1)]), Rel::Ge, rat_int(0));
        lp.constrain(v(&[(1, 1), (1, 1)]), Rel::Eq, rat_int(1));
        let sol = lp.solve_max(v(&[(1, 3), (2, 3)])).optimal().unwrap();
        assert_eq!(sol.value, rat(2, 3));
        assert_eq!(sol.point, v(&[(0, 1), (1, 1)]));
    }

    #[test]
    fn min_inf_norm_instance() {
        // minimize t with x + y = -1/3, x + z = 2/3, |x|,|y|,|z| <= t.
        // Optimum t = 1/2 (pinned independently by |y| + |z| >= |z - y| = 1).
        let mut lp = Lp::new(4); // x, y, z, t
        lp.minimize(v(&[(0, 1), (0, 1), (0, 1), (1, 1)]));
        lp.constrain(v(&[(1, 1), (1, 1), (0, 1), (0, 1)]), Rel::Eq, rat(-1, 3));
        lp.constrain(v(&[(1, 1), (0, 1), (1, 1), (0, 1)]), Rel::Eq, rat(2, 3));
        for j in 0..3 {
            let mut up = vec![rat_int(0); 4];
            up[j] = rat_int(1);
            up[3] = rat_int(-1);
            lp.constrain(up, Rel::Le, rat_int(0));
            let mut lo = vec![rat_int(0); 4];
            lo[j] = rat_int(-1);
            lo[3] = rat_int(-1);
            lp.constrain(lo, Rel::Le, rat_int(0));
        }
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.value, rat(1, 2));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = Lp::new(2);
        lp.constrain(v(&[(1, 1), (1, 1)]), Rel::Eq, rat_int(1));
        lp.constrain(v(&[(2, 1), (2, 1)]), Rel::Eq, rat_int(2));
        lp.minimize(v(&[(1, 1), (0, 1)]));
        lp.constrain(v(&[(1, 1), (0, 1)]), Rel::Ge, rat_int(0));
        lp.constrain(v(&[(0, 1), (1, 1)]), Rel::Ge, rat_int(0));
        let sol = lp.solve().optimal().unwrap();
        assert_eq!(sol.value, rat_int(0));
    }
}
