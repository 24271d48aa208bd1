//! NeighborhoodWatch2: local exponential weights glued by a stationary
//! distribution, with probability redistributed onto degenerate actions.
//!
//! Preprocessing restricts play to the union of the `N_ab` sets and splits it
//! into the duplicate-free Pareto set `A` and the remainder `D`. Each round
//! builds the row-stochastic matrix `Q_t` (row `k` in `A`: exponential weights
//! over `N_k ∩ A`; row `k` in `D`: uniform over `A`), takes its stationary
//! distribution, moves mass onto `D` through `Redistribute`, and mixes in
//! uniform exploration `gamma`. Updates accumulate the biased loss-difference
//! estimates `Ztilde = Zhat - beta`.
//!
//! The online loop is IEEE doubles; preprocessing stays exact.

use crate::analysis::GameAnalysis;
use crate::classify::{Evidence, Verdict};
use crate::policy::{check_distribution, softmax, Policy, PolicyError};
use crate::rational::{rat_to_f64, Rat};
use num::FromPrimitive;
use std::collections::BTreeMap;

const STATIONARY_TARGET: f64 = 1e-12;
const STATIONARY_REQUIRED: f64 = 1e-10;
const STATIONARY_CAP: usize = 1_000_000;

/// Tuning knobs. With a horizon and no explicit rates, the defaults are
/// `eta = (1/V) sqrt(log(K/delta) / (nK))` and `gamma = V K eta`, with `gamma`
/// capped at 1/2 (`eta` rescaled along with it so `gamma = V K eta` is kept).
#[derive(Debug, Clone)]
pub struct Nw2Options {
    pub horizon: Option<u64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: f64,
    /// Zero out the bias terms `beta`, giving the expected-regret variant.
    pub debias: bool,
}

impl Default for Nw2Options {
    fn default() -> Self {
        Nw2Options {
            horizon: None,
            eta: None,
            gamma: None,
            delta: 0.05,
            debias: false,
        }
    }
}

impl Nw2Options {
    pub fn for_horizon(n: u64) -> Self {
        Nw2Options {
            horizon: Some(n),
            ..Nw2Options::default()
        }
    }
}

/// Snapshot of one round's distributions over the playable set.
#[derive(Debug, Clone)]
pub struct Nw2Round {
    /// Row-stochastic matrix over playable actions.
    pub q: Vec<Vec<f64>>,
    /// Stationary distribution of `q` (zero mass on `D`).
    pub p_tilde: Vec<f64>,
    /// After redistribution onto `D`.
    pub p_bar: Vec<f64>,
    /// Final sampling distribution `(1 - gamma) p_bar + gamma / K`.
    pub p: Vec<f64>,
}

/// NeighborhoodWatch2 policy state.
#[derive(Debug, Clone)]
pub struct Nw2Policy {
    num_original_actions: usize,
    /// Original action index per internal index, ascending.
    playable: Vec<usize>,
    /// Internal indices of the duplicate-free Pareto set.
    a_set: Vec<usize>,
    in_a: Vec<bool>,
    /// For each internal `k` in `A`: internal indices of `N_k ∩ A`.
    n_k_within_a: BTreeMap<usize, Vec<usize>>,
    /// For each ordered internal pair `(a, k)` of neighbors: the full `N_ak`
    /// (degenerates and duplicates included), internal indices.
    n_ab_full: BTreeMap<(usize, usize), Vec<usize>>,
    /// Oriented estimator tables: `(a, k) -> v^{ak}` as `[action][symbol]`.
    estimators: BTreeMap<(usize, usize), Vec<Vec<f64>>>,
    /// Per degenerate action `d` (ascending): `(d, a, b, alpha)`, internal.
    redistribution: Vec<(usize, usize, usize, f64)>,
    /// Cumulative `Ztilde` sums keyed `(k, a)` for `k` in `A`, `a` in
    /// `N_k ∩ A`.
    cumulative: BTreeMap<(usize, usize), f64>,
    eta: f64,
    gamma: f64,
    v_bound: f64,
    debias: bool,
    /// Defaults from the horizon formula; enables the `|eta Zhat| <= 1` check.
    theorem_tuned: bool,
    round: u64,
    current: Option<Nw2Round>,
    /// Degenerate state for trivial games: play this original action forever.
    trivial_action: Option<usize>,
    /// Diagnostics for redistribution steps skipped by the zero-mass guard.
    pub skipped_redistributions: u64,
}

impl Nw2Policy {
    /// Builds the policy, refusing games that are not locally observable.
    pub fn new(analysis: &GameAnalysis, options: Nw2Options) -> Result<Self, PolicyError> {
        match analysis.classification.verdict {
            Verdict::Easy => {}
            Verdict::Trivial => {
                let action = match analysis.classification.evidence {
                    Evidence::Trivial { optimal_action } => optimal_action,
                    _ => unreachable!("trivial verdict carries trivial evidence"),
                };
                return Ok(Nw2Policy::trivial(analysis.game.num_actions(), action));
            }
            Verdict::Hard | Verdict::Hopeless => {
                let witness = match analysis.classification.evidence {
                    Evidence::Hard { witness } | Evidence::Hopeless { witness } => witness,
                    _ => unreachable!("hard/hopeless verdicts carry witness pairs"),
                };
                return Err(PolicyError::Refused {
                    reason: format!(
                        "game is not locally observable: witness neighbor pair ({}, {})",
                        witness.0 + 1,
                        witness.1 + 1
                    ),
                    witness: Some((witness.0 + 1, witness.1 + 1)),
                });
            }
        }

        let playable = analysis.neighbors.playable.clone();
        let internal_of: BTreeMap<usize, usize> = playable
            .iter()
            .enumerate()
            .map(|(i, &orig)| (orig, i))
            .collect();
        let k_play = playable.len();

        let a_set: Vec<usize> = analysis
            .taxonomy
            .maximal_pareto
            .iter()
            .map(|orig| internal_of[orig])
            .collect();
        let mut in_a = vec![false; k_play];
        for &k in &a_set {
            in_a[k] = true;
        }

        let mut n_k_within_a = BTreeMap::new();
        for &k in &a_set {
            let orig_k = playable[k];
            let members: Vec<usize> = analysis.neighbors.n_a[&orig_k]
                .iter()
                .filter_map(|orig| internal_of.get(orig).copied())
                .filter(|&i| in_a[i])
                .collect();
            n_k_within_a.insert(k, members);
        }

        let mut n_ab_full = BTreeMap::new();
        let mut estimators = BTreeMap::new();
        for pair in &analysis.observability.neighbor_pairs {
            let (oa, ob) = pair.pair;
            let (Some(&ia), Some(&ib)) = (internal_of.get(&oa), internal_of.get(&ob)) else {
                continue;
            };
            let members: Vec<usize> = analysis.neighbors.n_ab(oa, ob).expect("neighbor pair")
                .iter()
                .map(|orig| internal_of[orig])
                .collect();
            n_ab_full.insert((ia.min(ib), ia.max(ib)), members);

            let est = pair
                .estimator
                .as_ref()
                .expect("easy game: every neighbor pair has a local estimator");
            // est estimates loss[oa] - loss[ob]; store both orientations.
            let mut forward = vec![vec![0.0; analysis.game.num_symbols]; k_play];
            for (&(c, f), value) in &est.values {
                forward[internal_of[&c]][f] = rat_to_f64(value);
            }
            let backward = forward
                .iter()
                .map(|row| row.iter().map(|v| -v).collect())
                .collect();
            estimators.insert((ia, ib), forward);
            estimators.insert((ib, ia), backward);
        }

        // Fixed redistribution pair per degenerate action: lexicographically
        // smallest neighbor pair containing it.
        let mut redistribution = Vec::new();
        for &orig_d in &analysis.redistribution_set {
            let d = internal_of[&orig_d];
            let (pair, _) = analysis
                .neighbors
                .n_ab
                .iter()
                .find(|(_, members)| members.contains(&orig_d))
                .expect("playable actions appear in some N_ab");
            let alpha: &Rat = &analysis.neighbors.alpha[&(pair.0, pair.1, orig_d)];
            redistribution.push((
                d,
                internal_of[&pair.0],
                internal_of[&pair.1],
                rat_to_f64(alpha),
            ));
        }
        redistribution.sort_unstable_by_key(|&(d, a, b, _)| (d, a, b));

        let mut cumulative = BTreeMap::new();
        for (&k, members) in &n_k_within_a {
            for &a in members {
                cumulative.insert((k, a), 0.0);
            }
        }

        let v_bound = rat_to_f64(
            analysis
                .observability
                .v_max
                .as_ref()
                .expect("easy game has a finite V"),
        );
        let theorem_tuned = options.eta.is_none() && options.gamma.is_none();
        let eta_default = |n: u64| {
            (1.0 / v_bound) * ((k_play as f64 / options.delta).ln() / (n as f64 * k_play as f64)).sqrt()
        };
        let mut eta = match (options.eta, options.horizon) {
            (Some(eta), _) => eta,
            (None, Some(n)) => eta_default(n),
            (None, None) => {
                return Err(PolicyError::Refused {
                    reason: "nw2 requires either an explicit eta or a horizon".into(),
                    witness: None,
                })
            }
        };
        let mut gamma = options.gamma.unwrap_or(v_bound * k_play as f64 * eta);
        if options.gamma.is_some() && !(0.0 < gamma && gamma <= 0.5) {
            return Err(PolicyError::Refused {
                reason: format!("gamma must lie in (0, 1/2], got {gamma}"),
                witness: None,
            });
        }
        if theorem_tuned && gamma > 0.5 {
            // Short horizons can push the default over 1/2; rescale both so
            // gamma = V K eta still holds.
            let scale = 0.5 / gamma;
            gamma = 0.5;
            eta *= scale;
        }

        Ok(Nw2Policy {
            num_original_actions: analysis.game.num_actions(),
            playable,
            a_set,
            in_a,
            n_k_within_a,
            n_ab_full,
            estimators,
            redistribution,
            cumulative,
            eta,
            gamma,
            v_bound,
            debias: options.debias,
            theorem_tuned,
            round: 0,
            current: None,
            trivial_action: None,
            skipped_redistributions: 0,
        })
    }

    fn trivial(num_actions: usize, action: usize) -> Self {
        Nw2Policy {
            num_original_actions: num_actions,
            playable: vec![action],
            a_set: vec![0],
            in_a: vec![true],
            n_k_within_a: BTreeMap::new(),
            n_ab_full: BTreeMap::new(),
            estimators: BTreeMap::new(),
            redistribution: Vec::new(),
            cumulative: BTreeMap::new(),
            eta: 0.0,
            gamma: 0.0,
            v_bound: 0.0,
            debias: false,
            theorem_tuned: false,
            round: 0,
            current: None,
            trivial_action: Some(action),
            skipped_redistributions: 0,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn playable_actions(&self) -> &[usize] {
        &self.playable
    }

    /// The matrix `Q_t` over playable actions: exponential-weights rows for
    /// `A`, uniform-over-`A` rows for `D`.
    pub fn q_matrix(&self) -> Vec<Vec<f64>> {
        let k_play = self.playable.len();
        let mut q = vec![vec![0.0; k_play]; k_play];
        for k in 0..k_play {
            if self.in_a[k] {
                let members = &self.n_k_within_a[&k];
                let logits: Vec<f64> = members
                    .iter()
                    .map(|&a| -self.eta * self.cumulative[&(k, a)])
                    .collect();
                let row = softmax(&logits);
                for (&a, w) in members.iter().zip(row) {
                    q[k][a] = w;
                }
            } else {
                let share = 1.0 / self.a_set.len() as f64;
                for &a in &self.a_set {
                    q[k][a] = share;
                }
            }
        }
        q
    }

    /// Computes this round's `(Q_t, P_tilde, P_bar, P_t)`.
    pub fn compute_round(&mut self) -> Result<Nw2Round, PolicyError> {
        if let Some(action) = self.trivial_action {
            let mut p = vec![0.0; self.num_original_actions];
            p[action] = 1.0;
            let round = Nw2Round {
                q: vec![vec![1.0]],
                p_tilde: vec![1.0],
                p_bar: vec![1.0],
                p: vec![1.0],
            };
            self.current = Some(round.clone());
            return Ok(round);
        }
        let k_play = self.playable.len();
        let q = self.q_matrix();
        for (k, row) in q.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(PolicyError::Numeric(format!(
                    "Q row {k} sums to {sum}"
                )));
            }
        }

        // Stationary distribution of the A-block, embedded back over playable.
        let block: Vec<Vec<f64>> = self
            .a_set
            .iter()
            .map(|&k| self.a_set.iter().map(|&a| q[k][a]).collect())
            .collect();
        let fixed = stationary(&block)?;
        let mut p_tilde = vec![0.0; k_play];
        for (&k, &mass) in self.a_set.iter().zip(&fixed) {
            p_tilde[k] = mass;
        }

        let p_bar = self.redistribute(&p_tilde);
        check_distribution(&p_bar, 1e-12, "redistributed distribution")?;

        let uniform = self.gamma / k_play as f64;
        let p: Vec<f64> = p_bar.iter().map(|&x| (1.0 - self.gamma) * x + uniform).collect();
        check_distribution(&p, 1e-12, "sampling distribution")?;
        if let Some(bad) = p.iter().find(|&&x| x < uniform - 1e-15) {
            return Err(PolicyError::Numeric(format!(
                "sampling mass {bad} fell below the exploration floor {uniform}"
            )));
        }

        let round = Nw2Round {
            q,
            p_tilde,
            p_bar,
            p,
        };
        self.current = Some(round.clone());
        Ok(round)
    }

    /// Moves stationary mass onto the degenerate actions.
    pub fn redistribute(&mut self, p: &[f64]) -> Vec<f64> {
        let (q, skipped) = redistribute_generic(
            p,
            &self.redistribution,
            self.playable.len(),
            0.0f64,
        );
        self.skipped_redistributions += skipped;
        q
    }

    /// Folds one observation into the cumulative estimates.
    pub fn update(&mut self, action: usize, symbol: usize) -> Result<(), PolicyError> {
        if self.trivial_action.is_some() {
            self.round += 1;
            return Ok(());
        }
        let Some(round) = self.current.take() else {
            return Err(PolicyError::ObserveBeforeDistribution);
        };
        let Some(played) = self.playable.iter().position(|&orig| orig == action) else {
            return Err(PolicyError::Unplayable { action });
        };
        let p_played = round.p[played];
        let eta = self.eta;
        let v2 = self.v_bound * self.v_bound;
        for (&k, members) in &self.n_k_within_a {
            for &a in members {
                if a == k {
                    continue;
                }
                let value = self.estimators[&(a, k)][played][symbol];
                let z_hat = round.p_tilde[k] * value / p_played;
                if self.theorem_tuned && (eta * z_hat).abs() > 1.0 + 1e-9 {
                    return Err(PolicyError::Numeric(format!(
                        "|eta Zhat| = {} exceeded 1 under theorem tuning",
                        (eta * z_hat).abs()
                    )));
                }
                let beta = if self.debias {
                    0.0
                } else {
                    let key = (a.min(k), a.max(k));
                    let ptk2 = round.p_tilde[k] * round.p_tilde[k];
                    let sum: f64 = self.n_ab_full[&key]
                        .iter()
                        .map(|&b| ptk2 / round.p[b])
                        .sum();
                    eta * v2 * sum
                };
                debug_assert!(beta >= 0.0);
                *self.cumulative.get_mut(&(k, a)).unwrap() += z_hat - beta;
            }
        }
        self.round += 1;
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn cumulative_mut(&mut self) -> &mut BTreeMap<(usize, usize), f64> {
        &mut self.cumulative
    }
}

impl Policy for Nw2Policy {
    fn distribution(&mut self) -> Result<Vec<f64>, PolicyError> {
        let round = match &self.current {
            Some(r) => r.clone(),
            None => self.compute_round()?,
        };
        if let Some(action) = self.trivial_action {
            let mut p = vec![0.0; self.num_original_actions];
            p[action] = 1.0;
            return Ok(p);
        }
        let mut p = vec![0.0; self.num_original_actions];
        for (&orig, &mass) in self.playable.iter().zip(&round.p) {
            p[orig] = mass;
        }
        Ok(p)
    }

    fn observe(&mut self, action: usize, symbol: usize) -> Result<(), PolicyError> {
        self.update(action, symbol)
    }
}

/// Stationary distribution of a right-stochastic matrix.
///
/// Power iteration from uniform down to residual 1e-12 (the canonical choice
/// when the chain is reducible), falling back to a dense solve of
/// `(I - Q^T) x = 0` if the iteration cap is hit. Fails when the final
/// residual `|P^T Q - P^T|_1` still exceeds 1e-10.
pub fn stationary(q: &[Vec<f64>]) -> Result<Vec<f64>, PolicyError> {
    let m = q.len();
    if m == 0 {
        return Err(PolicyError::Numeric("empty matrix".into()));
    }
    let step = |x: &[f64]| -> Vec<f64> {
        let mut next = vec![0.0; m];
        for (k, row) in q.iter().enumerate() {
            let mass = x[k];
            if mass != 0.0 {
                for (a, &w) in row.iter().enumerate() {
                    next[a] += mass * w;
                }
            }
        }
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        next
    };
    let residual = |x: &[f64]| -> f64 {
        let next = step(x);
        next.iter().zip(x).map(|(a, b)| (a - b).abs()).sum()
    };

    let mut x = vec![1.0 / m as f64; m];
    let mut converged = false;
    for _ in 0..STATIONARY_CAP {
        let next = step(&x);
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff <= STATIONARY_TARGET {
            converged = true;
            break;
        }
    }
    if !converged {
        x = stationary_dense(q)?;
    }
    let res = residual(&x);
    if res > STATIONARY_REQUIRED {
        return Err(PolicyError::Numeric(format!(
            "stationary distribution failed to converge: residual {res}"
        )));
    }
    Ok(x)
}

/// Dense fallback: Gaussian elimination on `(Q^T - I) x = 0` with the last
/// equation replaced by the normalization `sum x = 1`.
fn stationary_dense(q: &[Vec<f64>]) -> Result<Vec<f64>, PolicyError> {
    let m = q.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = q[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        a[m - 1][j] = 1.0;
    }
    a[m - 1][m] = 1.0;

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(PolicyError::Numeric(
                "stationary solve: singular system".into(),
            ));
        }
        a.swap(col, pivot);
        for i in 0..m {
            if i != col && a[i][col] != 0.0 {
                let factor = a[i][col] / a[col][col];
                for j in col..=m {
                    a[i][j] -= factor * a[col][j];
                }
            }
        }
    }
    let mut x: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = x.iter().sum();
    if total <= 0.0 {
        return Err(PolicyError::Numeric(
            "stationary solve: nonpositive mass".into(),
        ));
    }
    for v in &mut x {
        *v /= total;
    }
    Ok(x)
}

/// The Redistribute subroutine, generic over the scalar so the float loop and
/// the exact rational trace share one implementation.
///
/// `mapping` holds one `(d, a, b, alpha)` entry per degenerate action in
/// ascending order of `d`; `k` is the playable-set size. Returns the new
/// distribution and the number of steps skipped by the zero-denominator guard.
pub fn redistribute_generic<T>(
    p: &[T],
    mapping: &[(usize, usize, usize, T)],
    k: usize,
    zero: T,
) -> (Vec<T>, u64)
where
    T: Clone
        + PartialOrd
        + PartialEq
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Div<Output = T>
        + FromPrimitive,
{
    let one = T::from_u64(1).unwrap();
    let two_k = T::from_u64(2 * k as u64).unwrap();
    let mut q = p.to_vec();
    let mut skipped = 0u64;
    for (d, a, b, alpha) in mapping {
        let qa = q[*a].clone();
        let qb = q[*b].clone();
        let denom = alpha.clone() * qb.clone()
            + (one.clone() - alpha.clone()) * qa.clone();
        if denom == zero {
            skipped += 1;
            continue;
        }
        let c_a = alpha.clone() * qb.clone() / denom;
        let c_b = one.clone() - c_a.clone();
        // rho = (1/2K) min over the sides that actually move mass.
        let mut ratio: Option<T> = None;
        for (p_side, q_side, c_side) in [
            (p[*a].clone(), qa.clone(), c_a.clone()),
            (p[*b].clone(), qb.clone(), c_b.clone()),
        ] {
            let weight = q_side * c_side;
            if weight == zero {
                continue;
            }
            let candidate = p_side / weight;
            ratio = Some(match ratio {
                Some(best) if best <= candidate => best,
                _ => candidate,
            });
        }
        let Some(ratio) = ratio else {
            skipped += 1;
            continue;
        };
        let rho = ratio / two_k.clone();
        let moved_a = rho.clone() * c_a * qa.clone();
        let moved_b = rho * c_b * qb.clone();
        q[*d] = q[*d].clone() + moved_a.clone() + moved_b.clone();
        q[*a] = qa - moved_a;
        q[*b] = qb - moved_b;
    }
    (q, skipped)
}

/// Exact rational Redistribute trace (used by verification suites).
pub fn redistribute_exact(
    p: &[Rat],
    mapping: &[(usize, usize, usize, Rat)],
    k: usize,
) -> Vec<Rat> {
    redistribute_generic(p, mapping, k, crate::rational::rat_zero()).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::game::fixture;
    use crate::rational::{dot, rat, rat_zero};

    fn spam_analysis(c: &str) -> GameAnalysis {
        analyze(&fixture("spam", Some(c)).unwrap())
    }

    #[test]
    fn init_restricts_to_playable_set() {
        let analysis = analyze(&fixture("exhibit4", None).unwrap());
        let policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(1024)).unwrap();
        assert_eq!(policy.playable_actions(), &[0, 1, 2, 3]);
        assert_eq!(policy.a_set, vec![0, 1, 2]);
        assert_eq!(policy.redistribution, vec![(3, 1, 2, 0.5)]);
    }

    #[test]
    fn init_refuses_hard_games_with_witness() {
        let analysis = spam_analysis("3/5");
        let err = Nw2Policy::new(&analysis, Nw2Options::for_horizon(1024)).unwrap_err();
        match err {
            PolicyError::Refused { reason, witness } => {
                assert!(reason.contains("not locally observable"));
                assert_eq!(witness, Some((1, 2)));
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn trivial_game_plays_dominant_action() {
        let analysis = spam_analysis("0");
        let mut policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(16)).unwrap();
        let p = policy.distribution().unwrap();
        assert_eq!(p, vec![0.0, 0.0, 1.0]);
        policy.observe(2, 0).unwrap();
    }

    #[test]
    fn round_one_q_rows_are_uniform_over_local_supports() {
        let analysis = spam_analysis("1/3");
        let policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(1024)).unwrap();
        let q = policy.q_matrix();
        assert_eq!(q[0], vec![0.5, 0.0, 0.5]);
        assert_eq!(q[1], vec![0.0, 0.5, 0.5]);
        let third: Vec<f64> = q[2].clone();
        for w in third {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exhibit4_degenerate_row_is_uniform_over_a() {
        let analysis = analyze(&fixture("exhibit4", None).unwrap());
        let policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(1024)).unwrap();
        let q = policy.q_matrix();
        assert_eq!(q[3][3], 0.0);
        for a in 0..3 {
            assert!((q[3][a] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn q_row_after_one_update_matches_softmax() {
        let analysis = spam_analysis("1/3");
        let mut policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(1024)).unwrap();
        policy.eta = 0.1;
        *policy.cumulative_mut().get_mut(&(0, 2)).unwrap() = 2.0;
        let q = policy.q_matrix();
        let expect_self = 1.0 / (1.0 + (-0.2f64).exp());
        let expect_other = (-0.2f64).exp() / (1.0 + (-0.2f64).exp());
        assert!((q[0][0] - expect_self).abs() < 1e-15);
        assert!((q[0][2] - expect_other).abs() < 1e-15);
        assert!((expect_self - 0.549834).abs() < 1e-6);
        assert!((expect_other - 0.450166).abs() < 1e-6);
    }

    #[test]
    fn stationary_matches_hand_solves() {
        // Round-one spam(1/3) matrix.
        let q = vec![
            vec![0.5, 0.0, 0.5],
            vec![0.0, 0.5, 0.5],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ];
        let p = stationary(&q).unwrap();
        let expect = [2.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0];
        for (got, want) in p.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10);
        }

        // 2x2 chain solved by hand: (1/3, 2/3).
        let q2 = vec![vec![0.5, 0.5], vec![0.25, 0.75]];
        let p2 = stationary(&q2).unwrap();
        assert!((p2[0] - 1.0 / 3.0).abs() < 1e-10);
        assert!((p2[1] - 2.0 / 3.0).abs() < 1e-10);

        // Identity preserves the uniform start.
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let pid = stationary(&id).unwrap();
        assert_eq!(pid, vec![0.5, 0.5]);
    }

    #[test]
    fn redistribute_hand_trace_on_exhibit4() {
        // p uniform over A: q = (8/24, 7/24, 7/24, 2/24), exactly.
        let p = vec![rat(1, 3), rat(1, 3), rat(1, 3), rat(0, 1)];
        let mapping = vec![(3usize, 1usize, 2usize, rat(1, 2))];
        let q = redistribute_exact(&p, &mapping, 4);
        assert_eq!(q, vec![rat(8, 24), rat(7, 24), rat(7, 24), rat(2, 24)]);
    }

    #[test]
    fn redistribute_conserves_the_expected_loss_vector() {
        let game = fixture("exhibit4", None).unwrap();
        let p = vec![rat(1, 3), rat(1, 3), rat(1, 3), rat(0, 1)];
        let mapping = vec![(3usize, 1usize, 2usize, rat(1, 2))];
        let q = redistribute_exact(&p, &mapping, 4);
        for i in 0..game.num_outcomes() {
            let column: Vec<Rat> = (0..4).map(|a| game.loss[a][i].clone()).collect();
            assert_eq!(dot(&p, &column), dot(&q, &column), "outcome {i}");
        }
    }

    #[test]
    fn redistribute_without_degenerates_is_identity() {
        let p = vec![rat(2, 7), rat(2, 7), rat(3, 7)];
        let q = redistribute_exact(&p, &[], 3);
        assert_eq!(q, p);
    }

    #[test]
    fn redistribute_skips_zero_mass_pairs() {
        let p = vec![rat_zero(), rat_zero(), rat(1, 1), rat_zero()];
        let mapping = vec![(3usize, 0usize, 1usize, rat(1, 2))];
        let (q, skipped) = redistribute_generic(&p, &mapping, 4, rat_zero());
        assert_eq!(q, p);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn round_one_distribution_matches_hand_arithmetic() {
        let analysis = spam_analysis("1/3");
        let mut policy = Nw2Policy::new(
            &analysis,
            Nw2Options {
                horizon: None,
                eta: Some(0.05),
                gamma: Some(0.1),
                delta: 0.05,
                debias: false,
            },
        )
        .unwrap();
        let round = policy.compute_round().unwrap();
        let expect = [
            0.9 * 2.0 / 7.0 + 0.1 / 3.0,
            0.9 * 2.0 / 7.0 + 0.1 / 3.0,
            0.9 * 3.0 / 7.0 + 0.1 / 3.0,
        ];
        for (got, want) in round.p.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10);
        }
        assert!((round.p[0] - 0.290476).abs() < 1e-5);
        assert!((round.p[2] - 0.419047).abs() < 1e-5);
    }

    #[test]
    fn update_applies_the_estimator_formula() {
        let analysis = spam_analysis("1/3");
        let mut policy = Nw2Policy::new(
            &analysis,
            Nw2Options {
                horizon: None,
                eta: Some(0.05),
                gamma: Some(0.1),
                delta: 0.05,
                debias: true,
            },
        )
        .unwrap();
        let round = policy.compute_round().unwrap();
        // Oracle: recompute Zhat for (k = 3, a = 1) from the round state and
        // the synthesized estimator value directly.
        let est = analysis.observability.neighbor_pair(0, 2).unwrap();
        let v_13_at_3_sym1 = rat_to_f64(&est.estimator.as_ref().unwrap().value(2, 0));
        let expect = round.p_tilde[2] * v_13_at_3_sym1 / round.p[2];
        policy.update(2, 0).unwrap();
        let got = policy.cumulative[&(2, 0)];
        assert!((got - expect).abs() < 1e-12, "got {got}, expected {expect}");
        // Pairs not touched by the observation keep a zero sum: playing
        // action 3 with v supported on {1,3} never moves the (k=3, a=2) sum
        // by anything other than its own estimator value.
        let other = policy.cumulative[&(0, 2)];
        assert!(other.is_finite());
    }

    #[test]
    fn observe_requires_playable_action() {
        let analysis = analyze(&fixture("exhibit4", None).unwrap());
        let mut policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(64)).unwrap();
        policy.compute_round().unwrap();
        assert_eq!(
            policy.update(5, 0),
            Err(PolicyError::Unplayable { action: 5 })
        );
    }

    #[test]
    fn gamma_cap_preserves_the_tuning_identity() {
        let analysis = spam_analysis("1/3");
        // Tiny horizon forces the cap.
        let policy = Nw2Policy::new(&analysis, Nw2Options::for_horizon(1)).unwrap();
        assert!(policy.gamma <= 0.5 + 1e-15);
        let k = policy.playable_actions().len() as f64;
        assert!((policy.gamma - policy.v_bound * k * policy.eta).abs() < 1e-12);
    }
}
