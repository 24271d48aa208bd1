//! Minimax-regret classification of a game into four regimes.
//!
//! The decision procedure runs on the raw game: no neighboring actions means
//! a single action is optimal everywhere (trivial); otherwise the verdict is
//! easy / hard / hopeless according to whether every neighbor pair is locally
//! observable, merely globally observable, or not even that.

use crate::game::Game;
use crate::geometry::{action_taxonomy, neighbor_structure};
use crate::observability::{observability_report, Estimator, ObservabilityReport};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Trivial,
    Easy,
    Hard,
    Hopeless,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verdict::Trivial => "trivial",
            Verdict::Easy => "easy",
            Verdict::Hard => "hard",
            Verdict::Hopeless => "hopeless",
        };
        write!(f, "{name}")
    }
}

/// Verdict plus the object that witnesses it.
#[derive(Debug, Clone)]
pub enum Evidence {
    /// The action whose cell is the entire outcome simplex.
    Trivial { optimal_action: usize },
    /// Local estimators for every neighbor pair.
    Easy {
        estimators: Vec<((usize, usize), Estimator)>,
    },
    /// A neighbor pair that is globally but not locally observable.
    Hard { witness: (usize, usize) },
    /// A neighbor pair with no estimation function at all.
    Hopeless { witness: (usize, usize) },
}

#[derive(Debug, Clone)]
pub struct GameClass {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Derives the verdict from a precomputed observability report.
pub fn classify_from_report(
    game: &Game,
    maximal_pareto: &[usize],
    report: &ObservabilityReport,
) -> GameClass {
    if report.neighbor_pairs.is_empty() {
        // A single Pareto duplicate class remains; its cell is the simplex.
        let optimal_action = *maximal_pareto
            .first()
            .expect("every game has a Pareto action");
        debug_assert_eq!(
            crate::geometry::cell_dimension(game, optimal_action),
            game.num_outcomes() as i64 - 1
        );
        return GameClass {
            verdict: Verdict::Trivial,
            evidence: Evidence::Trivial { optimal_action },
        };
    }
    if report.all_neighbor_pairs_local() {
        let estimators = report
            .neighbor_pairs
            .iter()
            .map(|p| {
                (
                    p.pair,
                    p.estimator.clone().expect("locally observable pair"),
                )
            })
            .collect();
        return GameClass {
            verdict: Verdict::Easy,
            evidence: Evidence::Easy { estimators },
        };
    }
    if report.all_neighbor_pairs_global() {
        let witness = report
            .neighbor_pairs
            .iter()
            .find(|p| !p.locally_observable)
            .expect("some pair fails local observability")
            .pair;
        return GameClass {
            verdict: Verdict::Hard,
            evidence: Evidence::Hard { witness },
        };
    }
    let witness = report
        .neighbor_pairs
        .iter()
        .find(|p| !p.globally_observable)
        .expect("some pair fails global observability")
        .pair;
    GameClass {
        verdict: Verdict::Hopeless,
        evidence: Evidence::Hopeless { witness },
    }
}

/// Classifies a game from scratch.
pub fn classify(game: &Game) -> GameClass {
    let taxonomy = action_taxonomy(game);
    let ns = neighbor_structure(game, &taxonomy);
    let report = observability_report(game, &ns);
    classify_from_report(game, &taxonomy.maximal_pareto, &report)
}
