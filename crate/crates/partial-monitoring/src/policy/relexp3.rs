//! RelExp3: exponential weights over loss differences measured against a
//! moving anchor arm, for point-locally observable games.
//!
//! Dominated and degenerate actions are dropped up front. Weak-neighbor pairs
//! get pairwise-supported estimators from the bounded graph construction
//! (norm at most `1 + F`); the remaining pairs get minimal-norm estimators
//! supported on the retained actions. Exploration has two parts: a vanishing
//! uniform floor `alpha_t / K` and a dynamic component on the support sets of
//! the plausible arms `M_t`, which caps the importance weights so that
//! `eta_t |Zhat| <= 1` on every plausible arm. Learning rates decrease, so no
//! horizon is needed.

use crate::analysis::GameAnalysis;
use crate::observability::{pairwise_estimator_bounded, solve_estimator, Estimator};
use crate::policy::{check_distribution, softmax, Policy, PolicyError};
use crate::rational::rat_to_f64;
use std::collections::BTreeSet;

/// Tuning: `epsilon` shapes the exploration floor schedule
/// `alpha_t = min(1/(4K), t^(-1/2 - epsilon))`; the learning rate defaults to
/// `eta_t = min(1/(4KV), (1/(2 V_loc)) sqrt(log(K) / (2 t K_loc)))`.
#[derive(Debug, Clone)]
pub struct RelExp3Options {
    pub epsilon: f64,
    /// Constant learning-rate override (schedules are the default).
    pub eta_override: Option<f64>,
    /// Constant exploration-floor override.
    pub alpha_override: Option<f64>,
}

impl Default for RelExp3Options {
    fn default() -> Self {
        RelExp3Options {
            epsilon: 0.25,
            eta_override: None,
            alpha_override: None,
        }
    }
}

/// Snapshot of one round over the retained action set.
#[derive(Debug, Clone)]
pub struct RelExp3Round {
    pub p_tilde: Vec<f64>,
    /// Anchor arm `B_t` (internal index; ties broken toward lower index).
    pub anchor: usize,
    /// Plausible arms `M_t`.
    pub plausible: Vec<usize>,
    /// Support union `S_t` of the plausible arms' estimators.
    pub support: Vec<usize>,
    pub gamma: Vec<f64>,
    pub p: Vec<f64>,
    pub eta_t: f64,
    pub alpha_t: f64,
}

/// RelExp3 policy state.
#[derive(Debug, Clone)]
pub struct RelExp3Policy {
    num_original_actions: usize,
    /// Original index per retained (internal) index; all Pareto actions,
    /// duplicates included.
    retained: Vec<usize>,
    k: usize,
    k_loc: usize,
    v: f64,
    v_loc: f64,
    /// `V^{ab}` norms, symmetric with zero diagonal.
    v_ab: Vec<Vec<f64>>,
    /// `S^{ab}` support sets (internal indices, sorted), `S^{aa} = {a}`.
    s_ab: Vec<Vec<Vec<usize>>>,
    /// Estimator tables `v^{ab}` as `[c][f]`, for every ordered pair.
    tables: Vec<Vec<Vec<Vec<f64>>>>,
    /// Cumulative loss-difference estimates, one per retained action.
    cumulative: Vec<f64>,
    epsilon: f64,
    eta_override: Option<f64>,
    alpha_override: Option<f64>,
    rounds_done: u64,
    current: Option<RelExp3Round>,
}

impl RelExp3Policy {
    /// Builds the policy, refusing games with a weak-neighbor pair that is
    /// not pairwise observable.
    pub fn new(analysis: &GameAnalysis, options: RelExp3Options) -> Result<Self, PolicyError> {
        if !(0.0 < options.epsilon && options.epsilon < 0.5) {
            return Err(PolicyError::Refused {
                reason: format!("epsilon must lie in (0, 1/2), got {}", options.epsilon),
                witness: None,
            });
        }
        if let Some(weak) = analysis
            .observability
            .weak_pairs
            .iter()
            .find(|p| !p.pairwise_observable)
        {
            let (a, b) = weak.pair;
            return Err(PolicyError::Refused {
                reason: format!(
                    "game is not point-locally observable: weak-neighbor pair ({}, {}) \
                     is not pairwise observable",
                    a + 1,
                    b + 1
                ),
                witness: Some((a + 1, b + 1)),
            });
        }

        let game = &analysis.game;
        let retained = analysis.taxonomy.pareto_actions();
        let k = retained.len();
        let internal_of = |orig: usize| retained.iter().position(|&r| r == orig);

        let num_symbols = game.num_symbols;
        let mut v_ab = vec![vec![0.0; k]; k];
        let mut s_ab: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); k]; k];
        let mut tables = vec![vec![vec![vec![0.0; num_symbols]; k]; k]; k];
        for a in 0..k {
            s_ab[a][a] = vec![a];
        }

        for a in 0..k {
            for b in a + 1..k {
                let (oa, ob) = (retained[a], retained[b]);
                let weak = analysis.neighbors.are_weak_neighbors(oa, ob);
                let estimator: Estimator = if weak {
                    pairwise_estimator_bounded(game, oa, ob).map_err(|_| {
                        PolicyError::Refused {
                            reason: format!(
                                "weak-neighbor pair ({}, {}) is not pairwise observable",
                                oa + 1,
                                ob + 1
                            ),
                            witness: Some((oa + 1, ob + 1)),
                        }
                    })?
                } else {
                    solve_estimator(game, oa, ob, &retained).ok_or_else(|| {
                        PolicyError::Numeric(format!(
                            "no estimation function over the Pareto actions for pair \
                             ({}, {})",
                            oa + 1,
                            ob + 1
                        ))
                    })?
                };
                let norm = rat_to_f64(&estimator.inf_norm());
                v_ab[a][b] = norm;
                v_ab[b][a] = norm;
                let mut support: BTreeSet<usize> = [a, b].into();
                for orig in estimator.support() {
                    support.insert(
                        internal_of(orig).expect("estimator support is over retained actions"),
                    );
                }
                let support: Vec<usize> = support.into_iter().collect();
                s_ab[a][b] = support.clone();
                s_ab[b][a] = support;
                for (&(c, f), value) in &estimator.values {
                    let ci = internal_of(c).expect("support is retained");
                    let v = rat_to_f64(value);
                    tables[a][b][ci][f] = v;
                    tables[b][a][ci][f] = -v;
                }
            }
        }

        let v = v_ab
            .iter()
            .flatten()
            .copied()
            .fold(0.0f64, f64::max);
        let v_loc = analysis
            .neighbors
            .weak_pairs
            .iter()
            .filter_map(|&(oa, ob)| {
                let (a, b) = (internal_of(oa)?, internal_of(ob)?);
                Some(v_ab[a][b])
            })
            .fold(0.0f64, f64::max);

        Ok(RelExp3Policy {
            num_original_actions: game.num_actions(),
            retained,
            k,
            k_loc: analysis.point_local.k_loc,
            v,
            v_loc,
            v_ab,
            s_ab,
            tables,
            cumulative: vec![0.0; k],
            epsilon: options.epsilon,
            eta_override: options.eta_override,
            alpha_override: options.alpha_override,
            rounds_done: 0,
            current: None,
        })
    }

    pub fn retained_actions(&self) -> &[usize] {
        &self.retained
    }

    pub fn constants(&self) -> (usize, f64, f64) {
        (self.k_loc, self.v, self.v_loc)
    }

    /// Learning rate for round `t` (1-based). Degenerate zero norms (single
    /// action or all-duplicate games) fall back to a unit rate; the estimates
    /// are identically zero there.
    pub fn eta_at(&self, t: u64) -> f64 {
        if let Some(eta) = self.eta_override {
            return eta;
        }
        let mut candidates = Vec::new();
        if self.v > 0.0 {
            candidates.push(1.0 / (4.0 * self.k as f64 * self.v));
        }
        if self.v_loc > 0.0 {
            let logk = (self.k as f64).ln();
            candidates
                .push((1.0 / (2.0 * self.v_loc)) * (logk / (2.0 * t as f64 * self.k_loc as f64)).sqrt());
        }
        candidates.into_iter().fold(f64::INFINITY, f64::min).min(1.0)
    }

    /// Exploration floor for round `t` (1-based).
    pub fn alpha_at(&self, t: u64) -> f64 {
        if let Some(alpha) = self.alpha_override {
            return alpha;
        }
        (1.0 / (4.0 * self.k as f64)).min((t as f64).powf(-0.5 - self.epsilon))
    }

    /// Computes this round's distributions and exploration sets.
    pub fn compute_round(&mut self) -> Result<RelExp3Round, PolicyError> {
        let t = self.rounds_done + 1;
        let eta_t = self.eta_at(t);
        let alpha_t = self.alpha_at(t);

        let logits: Vec<f64> = self.cumulative.iter().map(|&l| -eta_t * l).collect();
        let p_tilde = softmax(&logits);
        check_distribution(&p_tilde, 1e-12, "exponential-weights distribution")?;

        let anchor = p_tilde
            .iter()
            .enumerate()
            .max_by(|(i, x), (j, y)| x.total_cmp(y).then(j.cmp(i)))
            .map(|(i, _)| i)
            .expect("nonempty action set");

        let threshold = eta_t / t as f64;
        let plausible: Vec<usize> = (0..self.k)
            .filter(|&a| p_tilde[a] * (eta_t * self.v_ab[a][anchor] / alpha_t).exp() > threshold)
            .collect();

        let mut support: BTreeSet<usize> = BTreeSet::new();
        for &a in &plausible {
            support.extend(self.s_ab[a][anchor].iter().copied());
        }
        let support: Vec<usize> = support.into_iter().collect();

        let max_norm = plausible
            .iter()
            .map(|&a| self.v_ab[a][anchor])
            .fold(0.0f64, f64::max);
        let floor = alpha_t / self.k as f64;
        let gamma: Vec<f64> = (0..self.k)
            .map(|a| {
                let dynamic = if support.contains(&a) {
                    eta_t * max_norm
                } else {
                    0.0
                };
                dynamic + floor
            })
            .collect();
        let gamma_mass: f64 = gamma.iter().sum();
        if gamma_mass > 1.0 {
            return Err(PolicyError::Numeric(format!(
                "schedule misuse: exploration mass {gamma_mass} exceeds 1"
            )));
        }
        if self.eta_override.is_none()
            && self.alpha_override.is_none()
            && gamma_mass > 0.5 + 1e-12
        {
            return Err(PolicyError::Numeric(format!(
                "exploration mass {gamma_mass} exceeds 1/2 under default schedules"
            )));
        }

        let p: Vec<f64> = (0..self.k)
            .map(|a| (1.0 - gamma_mass) * p_tilde[a] + gamma[a])
            .collect();
        check_distribution(&p, 1e-12, "sampling distribution")?;
        if let Some(&bad) = p.iter().find(|&&x| x < floor - 1e-15) {
            return Err(PolicyError::Numeric(format!(
                "sampling mass {bad} fell below the exploration floor {floor}"
            )));
        }

        let round = RelExp3Round {
            p_tilde,
            anchor,
            plausible,
            support,
            gamma,
            p,
            eta_t,
            alpha_t,
        };
        self.current = Some(round.clone());
        Ok(round)
    }

    /// Folds one observation into the cumulative estimates.
    pub fn update(&mut self, action: usize, symbol: usize) -> Result<(), PolicyError> {
        let Some(round) = self.current.take() else {
            return Err(PolicyError::ObserveBeforeDistribution);
        };
        let Some(played) = self.retained.iter().position(|&orig| orig == action) else {
            return Err(PolicyError::Unplayable { action });
        };
        let p_played = round.p[played];
        for a in 0..self.k {
            let value = self.tables[a][round.anchor][played][symbol];
            let z_hat = value / p_played;
            if round.plausible.contains(&a) && (round.eta_t * z_hat).abs() > 1.0 + 1e-9 {
                return Err(PolicyError::Numeric(format!(
                    "|eta Zhat| = {} exceeded 1 on a plausible arm",
                    (round.eta_t * z_hat).abs()
                )));
            }
            self.cumulative[a] += z_hat;
        }
        debug_assert_eq!(self.tables[round.anchor][round.anchor][played][symbol], 0.0);
        self.rounds_done += 1;
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn cumulative_mut(&mut self) -> &mut Vec<f64> {
        &mut self.cumulative
    }
}

impl Policy for RelExp3Policy {
    fn distribution(&mut self) -> Result<Vec<f64>, PolicyError> {
        let round = match &self.current {
            Some(r) => r.clone(),
            None => self.compute_round()?,
        };
        let mut p = vec![0.0; self.num_original_actions];
        for (&orig, &mass) in self.retained.iter().zip(&round.p) {
            p[orig] = mass;
        }
        Ok(p)
    }

    fn observe(&mut self, action: usize, symbol: usize) -> Result<(), PolicyError> {
        self.update(action, symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::game::fixture;

    fn spam_policy() -> RelExp3Policy {
        let analysis = analyze(&fixture("spam", Some("1/3")).unwrap());
        RelExp3Policy::new(&analysis, RelExp3Options::default()).unwrap()
    }

    #[test]
    fn init_retains_pareto_actions_and_constants() {
        let policy = spam_policy();
        assert_eq!(policy.retained_actions(), &[0, 1, 2]);
        let (k_loc, v, v_loc) = policy.constants();
        assert_eq!(k_loc, 2);
        // Pairwise tables come from the bounded construction; V_loc stays
        // under 1 + F = 3.
        assert!(v_loc <= 3.0);
        assert!(v >= v_loc);
    }

    #[test]
    fn init_refuses_exhibit3_naming_the_weak_pair() {
        let analysis = analyze(&fixture("exhibit3", None).unwrap());
        let err = RelExp3Policy::new(&analysis, RelExp3Options::default()).unwrap_err();
        match err {
            PolicyError::Refused { reason, witness } => {
                assert!(reason.contains("not point-locally observable"));
                assert_eq!(witness, Some((1, 2)));
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn init_refuses_hopeless_game() {
        let analysis = analyze(&fixture("hopeless2x2", None).unwrap());
        assert!(matches!(
            RelExp3Policy::new(&analysis, RelExp3Options::default()),
            Err(PolicyError::Refused { .. })
        ));
    }

    #[test]
    fn exhibit4_is_refused_like_exhibit3() {
        // Its weak pair (1, 2) has constant feedback rows, so it is locally
        // but not point-locally observable.
        let analysis = analyze(&fixture("exhibit4", None).unwrap());
        let err = RelExp3Policy::new(&analysis, RelExp3Options::default()).unwrap_err();
        assert!(matches!(err, PolicyError::Refused { witness: Some((1, 2)), .. }));
    }

    #[test]
    fn flower_game_retains_both_actions() {
        let analysis = analyze(&fixture("flower", Some("3")).unwrap());
        let policy = RelExp3Policy::new(&analysis, RelExp3Options::default()).unwrap();
        assert_eq!(policy.retained_actions(), &[0, 1]);
        let (k_loc, _, v_loc) = policy.constants();
        assert_eq!(k_loc, 2);
        assert!(v_loc <= 4.0); // 1 + F with F = 3
    }

    #[test]
    fn round_one_is_uniform_with_anchor_one() {
        let mut policy = spam_policy();
        let round = policy.compute_round().unwrap();
        assert_eq!(round.anchor, 0);
        for &w in &round.p_tilde {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        // All arms plausible at t = 1 in this game.
        assert_eq!(round.plausible, vec![0, 1, 2]);
        assert!(round.p.iter().all(|&x| x >= round.alpha_t / 3.0 - 1e-15));
    }

    #[test]
    fn schedules_are_non_increasing() {
        let policy = spam_policy();
        let mut last_eta = f64::INFINITY;
        let mut last_alpha = f64::INFINITY;
        for t in 1..2000 {
            let eta = policy.eta_at(t);
            let alpha = policy.alpha_at(t);
            assert!(eta <= last_eta + 1e-18);
            assert!(alpha <= last_alpha + 1e-18);
            last_eta = eta;
            last_alpha = alpha;
        }
    }

    #[test]
    fn anchor_estimate_stays_zero() {
        let mut policy = spam_policy();
        let round = policy.compute_round().unwrap();
        let anchor_orig = policy.retained_actions()[round.anchor];
        policy.update(anchor_orig, 0).unwrap();
        assert_eq!(policy.cumulative[round.anchor], 0.0);
    }

    #[test]
    fn shifting_all_estimates_leaves_the_round_unchanged() {
        let mut policy = spam_policy();
        policy.cumulative_mut()[0] = 1.25;
        policy.cumulative_mut()[1] = 0.5;
        policy.cumulative_mut()[2] = 2.0;
        let before = policy.compute_round().unwrap();
        policy.current = None;
        for l in policy.cumulative_mut().iter_mut() {
            *l += 17.0;
        }
        let after = policy.compute_round().unwrap();
        assert_eq!(before.anchor, after.anchor);
        for (x, y) in before.p_tilde.iter().zip(&after.p_tilde) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn single_action_game_runs() {
        let game = crate::game::parse_game(r#"{"name":"unit","loss":[[0]],"feedback":[[1]]}"#)
            .unwrap();
        let analysis = analyze(&game);
        let mut policy = RelExp3Policy::new(&analysis, RelExp3Options::default()).unwrap();
        let round = policy.compute_round().unwrap();
        assert_eq!(round.p, vec![1.0]);
        policy.update(0, 0).unwrap();
    }
}
