//! Aggregated game analysis and its structured export.
//!
//! `analyze` runs the whole exact pipeline once (cells, taxonomy, neighbors,
//! point-local cliques, observability, classification) and is the input the
//! policies and the bench harness consume. Exports print action/outcome/symbol
//! indices 1-based and rationals as `p/q` strings.

use crate::classify::{classify_from_report, Evidence, GameClass};
use crate::game::Game;
use crate::geometry::{
    action_taxonomy, neighbor_structure, point_local_cliques, NeighborStructure,
    PointLocalStructure, Taxonomy,
};
use crate::observability::{observability_report, Estimator, ObservabilityReport};
use crate::rational::format_rat;
use serde::Serialize;

/// Everything the exact layer knows about one game.
#[derive(Debug, Clone)]
pub struct GameAnalysis {
    pub game: Game,
    pub taxonomy: Taxonomy,
    pub neighbors: NeighborStructure,
    /// Playable actions that are not in the maximal Pareto set; these receive
    /// probability through redistribution.
    pub redistribution_set: Vec<usize>,
    pub point_local: PointLocalStructure,
    pub observability: ObservabilityReport,
    pub classification: GameClass,
}

/// Runs the full exact analysis pipeline.
pub fn analyze(game: &Game) -> GameAnalysis {
    let taxonomy = action_taxonomy(game);
    let neighbors = neighbor_structure(game, &taxonomy);
    let point_local = point_local_cliques(game, &taxonomy);
    let observability = observability_report(game, &neighbors);
    let classification = classify_from_report(game, &taxonomy.maximal_pareto, &observability);
    let redistribution_set = neighbors
        .playable
        .iter()
        .copied()
        .filter(|a| !taxonomy.maximal_pareto.contains(a))
        .collect();
    GameAnalysis {
        game: game.clone(),
        taxonomy,
        neighbors,
        redistribution_set,
        point_local,
        observability,
        classification,
    }
}

fn one_based(actions: &[usize]) -> Vec<usize> {
    actions.iter().map(|&a| a + 1).collect()
}

fn pair_export(pair: (usize, usize)) -> [usize; 2] {
    [pair.0 + 1, pair.1 + 1]
}

#[derive(Debug, Serialize)]
pub struct EstimatorExport {
    /// 1-based (action, symbol, value) triples; omitted keys are zero.
    pub values: Vec<EstimatorEntry>,
    pub inf_norm: String,
    pub support: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct EstimatorEntry {
    pub action: usize,
    pub symbol: usize,
    pub value: String,
}

impl EstimatorExport {
    pub fn from_estimator(est: &Estimator) -> Self {
        EstimatorExport {
            values: est
                .values
                .iter()
                .map(|(&(c, f), v)| EstimatorEntry {
                    action: c + 1,
                    symbol: f + 1,
                    value: format_rat(v),
                })
                .collect(),
            inf_norm: format_rat(&est.inf_norm()),
            support: est.support().into_iter().map(|a| a + 1).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ActionExport {
    pub action: usize,
    pub class: crate::geometry::ActionClass,
    pub cell_dimension: i64,
}

#[derive(Debug, Serialize)]
pub struct NeighborPairExport {
    pub pair: [usize; 2],
    pub n_ab: Vec<usize>,
    /// Coefficient per member of `N_ab`, as (action, alpha) with
    /// `loss[d] = alpha * loss[a] + (1 - alpha) * loss[b]`.
    pub alpha: Vec<(usize, String)>,
    pub globally_observable: bool,
    pub locally_observable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorExport>,
}

#[derive(Debug, Serialize)]
pub struct WeakPairExport {
    pub pair: [usize; 2],
    pub pairwise_observable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorExport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_ab: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ClassificationExport {
    pub verdict: crate::classify::Verdict,
    pub evidence: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct AnalysisExport {
    pub game: String,
    pub num_actions: usize,
    pub num_outcomes: usize,
    pub num_symbols: usize,
    pub actions: Vec<ActionExport>,
    pub duplicate_classes: Vec<Vec<usize>>,
    pub maximal_pareto_set: Vec<usize>,
    pub playable_set: Vec<usize>,
    pub redistribution_set: Vec<usize>,
    pub neighbor_pairs: Vec<NeighborPairExport>,
    pub weak_pairs: Vec<WeakPairExport>,
    pub point_local_cliques: Vec<Vec<usize>>,
    pub point_local_discrepancies: Vec<Vec<usize>>,
    pub k_loc: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_loc: Option<String>,
    pub classification: ClassificationExport,
}

pub fn classification_export(class: &GameClass) -> ClassificationExport {
    let evidence = match &class.evidence {
        Evidence::Trivial { optimal_action } => serde_json::json!({
            "optimal_action": optimal_action + 1,
        }),
        Evidence::Easy { estimators } => serde_json::json!({
            "local_estimators": estimators
                .iter()
                .map(|(pair, est)| serde_json::json!({
                    "pair": pair_export(*pair),
                    "estimator": serde_json::to_value(EstimatorExport::from_estimator(est))
                        .expect("estimator export"),
                }))
                .collect::<Vec<_>>(),
        }),
        Evidence::Hard { witness } => serde_json::json!({
            "witness_pair": pair_export(*witness),
            "reason": "globally but not locally observable",
        }),
        Evidence::Hopeless { witness } => serde_json::json!({
            "witness_pair": pair_export(*witness),
            "reason": "no estimation function exists",
        }),
    };
    ClassificationExport {
        verdict: class.verdict,
        evidence,
    }
}

impl GameAnalysis {
    /// Structured export consumed by the bench harness.
    pub fn export(&self) -> AnalysisExport {
        let actions = (0..self.game.num_actions())
            .map(|a| ActionExport {
                action: a + 1,
                class: self.taxonomy.class[a],
                cell_dimension: self.taxonomy.cell_dimension[a],
            })
            .collect();
        let neighbor_pairs = self
            .observability
            .neighbor_pairs
            .iter()
            .map(|p| {
                let (a, b) = p.pair;
                let members = self.neighbors.n_ab(a, b).cloned().unwrap_or_default();
                NeighborPairExport {
                    pair: pair_export(p.pair),
                    n_ab: one_based(&members),
                    alpha: members
                        .iter()
                        .map(|&d| {
                            let coeff = &self.neighbors.alpha[&(a, b, d)];
                            (d + 1, format_rat(coeff))
                        })
                        .collect(),
                    globally_observable: p.globally_observable,
                    locally_observable: p.locally_observable,
                    estimator: p.estimator.as_ref().map(EstimatorExport::from_estimator),
                }
            })
            .collect();
        let weak_pairs = self
            .observability
            .weak_pairs
            .iter()
            .map(|p| WeakPairExport {
                pair: pair_export(p.pair),
                pairwise_observable: p.pairwise_observable,
                estimator: p.estimator.as_ref().map(EstimatorExport::from_estimator),
                v_ab: p.estimator.as_ref().map(|e| format_rat(&e.inf_norm())),
            })
            .collect();
        AnalysisExport {
            game: self.game.name.clone(),
            num_actions: self.game.num_actions(),
            num_outcomes: self.game.num_outcomes(),
            num_symbols: self.game.num_symbols,
            actions,
            duplicate_classes: self
                .taxonomy
                .duplicate_classes
                .iter()
                .map(|c| one_based(c))
                .collect(),
            maximal_pareto_set: one_based(&self.taxonomy.maximal_pareto),
            playable_set: one_based(&self.neighbors.playable),
            redistribution_set: one_based(&self.redistribution_set),
            neighbor_pairs,
            weak_pairs,
            point_local_cliques: self
                .point_local
                .cliques
                .iter()
                .map(|c| one_based(c))
                .collect(),
            point_local_discrepancies: self
                .point_local
                .discrepancies
                .iter()
                .map(|c| one_based(c))
                .collect(),
            k_loc: self.point_local.k_loc,
            v: self.observability.v_max.as_ref().map(format_rat),
            v_loc: self.observability.v_loc.as_ref().map(format_rat),
            classification: classification_export(&self.classification),
        }
    }

    pub fn export_json(&self) -> String {
        serde_json::to_string_pretty(&self.export()).expect("analysis export")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Verdict;
    use crate::game::fixture;

    #[test]
    fn exhibit4_analysis_summary() {
        let analysis = analyze(&fixture("exhibit4", None).unwrap());
        assert_eq!(analysis.classification.verdict, Verdict::Easy);
        assert_eq!(analysis.neighbors.playable, vec![0, 1, 2, 3]);
        assert_eq!(analysis.redistribution_set, vec![3]);
        let export = analysis.export();
        assert_eq!(export.playable_set, vec![1, 2, 3, 4]);
        assert_eq!(export.redistribution_set, vec![4]);
    }

    #[test]
    fn spam_export_has_expected_constants() {
        let analysis = analyze(&fixture("spam", Some("1/3")).unwrap());
        let export = analysis.export();
        assert_eq!(export.k_loc, 2);
        assert_eq!(export.v_loc.as_deref(), Some("1/2"));
        assert_eq!(export.v.as_deref(), Some("1/2"));
        let text = analysis.export_json();
        assert!(text.contains("\"verdict\": \"easy\""));
    }

    #[test]
    fn exhibit1_neighbor_pairs_pairwise_estimable() {
        let analysis = analyze(&fixture("exhibit1", None).unwrap());
        assert_eq!(analysis.classification.verdict, Verdict::Easy);
        for pair in &analysis.observability.weak_pairs {
            assert!(pair.pairwise_observable);
        }
    }
}
