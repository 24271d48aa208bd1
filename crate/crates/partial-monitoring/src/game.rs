//! Game representation, document parsing, validation, and the fixture catalog.
//!
//! A game is a loss matrix over exact rationals plus a feedback-symbol matrix.
//! Documents are JSON: `name`, optional `F`, `loss` (entries integer, decimal,
//! or `"p/q"` string, all read exactly), `feedback` (1-based symbol integers).
//! Symbols are stored 0-based internally and re-emitted 1-based.

use crate::rational::{format_rat, parse_rat, rat_one, rat_zero, Rat};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Immutable partial-monitoring problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub name: String,
    /// K x E loss matrix, entries expected in [0, 1].
    pub loss: Vec<Vec<Rat>>,
    /// K x E feedback matrix of 0-based symbol indices.
    pub feedback: Vec<Vec<usize>>,
    /// Declared number of feedback symbols F (symbols range over 0..F).
    pub num_symbols: usize,
}

impl Game {
    pub fn num_actions(&self) -> usize {
        self.loss.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.loss.first().map_or(0, |row| row.len())
    }

    pub fn loss_row(&self, action: usize) -> &[Rat] {
        &self.loss[action]
    }

    /// Loss-row difference `loss[a] - loss[b]`.
    pub fn loss_diff(&self, a: usize, b: usize) -> Vec<Rat> {
        self.loss[a]
            .iter()
            .zip(&self.loss[b])
            .map(|(x, y)| x - y)
            .collect()
    }

    pub fn symbol(&self, action: usize, outcome: usize) -> usize {
        self.feedback[action][outcome]
    }

    /// Checks every structural invariant, reifying violations as issues.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let k = self.num_actions();
        let e = self.num_outcomes();
        if k == 0 || e == 0 {
            issues.push(Issue::new("loss", "empty loss matrix"));
            return ValidationReport { issues };
        }
        for (a, row) in self.loss.iter().enumerate() {
            if row.len() != e {
                issues.push(Issue::new(format!("loss row {}", a + 1), "row length mismatch"));
            }
        }
        if self.feedback.len() != k {
            issues.push(Issue::new("feedback", "dimension mismatch with loss"));
        }
        for (a, row) in self.feedback.iter().enumerate() {
            if row.len() != self.loss.get(a).map_or(e, Vec::len) {
                issues.push(Issue::new(
                    format!("feedback row {}", a + 1),
                    "dimension mismatch with loss",
                ));
            }
        }
        let zero = rat_zero();
        let one = rat_one();
        for (a, row) in self.loss.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                if *v < zero || *v > one {
                    issues.push(Issue::new(
                        format!("loss[{}][{}]", a + 1, i + 1),
                        "loss entry outside [0,1]",
                    ));
                }
            }
        }
        if self.num_symbols == 0 {
            issues.push(Issue::new("F", "symbol count must be at least 1"));
        }
        for (a, row) in self.feedback.iter().enumerate() {
            for (i, &f) in row.iter().enumerate() {
                if f >= self.num_symbols {
                    issues.push(Issue::new(
                        format!("feedback[{}][{}]", a + 1, i + 1),
                        "symbol out of range",
                    ));
                }
            }
        }
        ValidationReport { issues }
    }

    /// Canonical document serialization; rationals emitted as `p/q` strings.
    pub fn to_document(&self) -> String {
        let doc = RawDocument {
            name: self.name.clone(),
            num_symbols: Some(self.num_symbols as u64),
            loss: self
                .loss
                .iter()
                .map(|row| row.iter().map(|v| RawEntry::Text(format_rat(v))).collect())
                .collect(),
            feedback: self
                .feedback
                .iter()
                .map(|row| row.iter().map(|&f| (f + 1) as u64).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    }
}

/// One validation finding: where and what.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

impl Issue {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Issue {
            location: location.into(),
            message: message.into(),
        }
    }
}

/// Validation outcome; `ok()` holds exactly when there are no issues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for issue in &self.issues {
            writeln!(f, "{}: {}", issue.location, issue.message)?;
        }
        Ok(())
    }
}

/// Errors from reading a game document.
#[derive(Debug, Error)]
pub enum GameError {
    #[error("malformed game document: {0}")]
    Malformed(String),
    #[error("invalid game:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Serialize, Deserialize)]
struct RawDocument {
    name: String,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    num_symbols: Option<u64>,
    loss: Vec<Vec<RawEntry>>,
    feedback: Vec<Vec<u64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Number(serde_json::Number),
    Text(String),
}

impl RawEntry {
    fn to_rat(&self, location: &str) -> Result<Rat, GameError> {
        let literal = match self {
            RawEntry::Number(n) => n.to_string(),
            RawEntry::Text(s) => s.clone(),
        };
        parse_rat(&literal).map_err(|e| GameError::Malformed(format!("{location}: {e}")))
    }
}

/// Parses a game document, validating every invariant.
pub fn parse_game(text: &str) -> Result<Game, GameError> {
    let raw: RawDocument =
        serde_json::from_str(text).map_err(|e| GameError::Malformed(e.to_string()))?;
    let mut loss = Vec::with_capacity(raw.loss.len());
    for (a, row) in raw.loss.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (i, entry) in row.iter().enumerate() {
            out.push(entry.to_rat(&format!("loss[{}][{}]", a + 1, i + 1))?);
        }
        loss.push(out);
    }
    let mut feedback = Vec::with_capacity(raw.feedback.len());
    let mut max_symbol = 0u64;
    for (a, row) in raw.feedback.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (i, &f) in row.iter().enumerate() {
            if f < 1 {
                return Err(GameError::Malformed(format!(
                    "feedback[{}][{}]: symbol must be at least 1",
                    a + 1,
                    i + 1
                )));
            }
            max_symbol = max_symbol.max(f);
            out.push((f - 1) as usize);
        }
        feedback.push(out);
    }
    let num_symbols = raw.num_symbols.unwrap_or(max_symbol.max(1)) as usize;
    let game = Game {
        name: raw.name,
        loss,
        feedback,
        num_symbols,
    };
    let report = game.validate();
    if !report.ok() {
        return Err(GameError::Invalid(report));
    }
    Ok(game)
}

/// Errors from the fixture catalog.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}")]
    Unknown(String),
    #[error("fixture {name} requires a parameter")]
    MissingParameter { name: String },
    #[error("fixture {name}: parameter out of range ({reason})")]
    ParameterOutOfRange { name: String, reason: String },
    #[error("fixture {name}: bad parameter: {reason}")]
    BadParameter { name: String, reason: String },
}

fn rows(entries: &[&[(i64, i64)]]) -> Vec<Vec<Rat>> {
    entries
        .iter()
        .map(|row| row.iter().map(|&(n, d)| Rat::new(n.into(), d.into())).collect())
        .collect()
}

fn symbols(entries: &[&[usize]]) -> Vec<Vec<usize>> {
    entries
        .iter()
        .map(|row| row.iter().map(|&f| f - 1).collect())
        .collect()
}

fn spam_game(name: &str, c: Rat) -> Result<Game, FixtureError> {
    if c < rat_zero() || c > rat_one() {
        return Err(FixtureError::ParameterOutOfRange {
            name: name.into(),
            reason: "c must lie in [0,1]".into(),
        });
    }
    Ok(Game {
        name: name.into(),
        loss: vec![
            vec![rat_zero(), rat_one()],
            vec![rat_one(), rat_zero()],
            vec![c.clone(), c],
        ],
        feedback: symbols(&[&[1, 1], &[1, 1], &[1, 2]]),
        num_symbols: 2,
    })
}

fn flower_game(f: usize) -> Result<Game, FixtureError> {
    if f < 2 {
        return Err(FixtureError::ParameterOutOfRange {
            name: "flower".into(),
            reason: "F must be at least 2".into(),
        });
    }
    let e = 2 * f - 2;
    let loss = (0..2)
        .map(|a| {
            (0..e)
                .map(|i| if i % 2 == a { rat_one() } else { rat_zero() })
                .collect()
        })
        .collect();
    // Row 1 hears outcome 1 and outcome E on their own private symbols; row 2
    // pairs outcomes (2j-1, 2j) on symbol j.
    let row1: Vec<usize> = (0..e)
        .map(|j| {
            if j == 0 {
                0
            } else if j == e - 1 {
                f - 1
            } else {
                (j + 1) / 2
            }
        })
        .collect();
    let row2: Vec<usize> = (0..e).map(|j| j / 2).collect();
    Ok(Game {
        name: format!("flower{f}"),
        loss,
        feedback: vec![row1, row2],
        num_symbols: f,
    })
}

fn parse_param(name: &str, param: Option<&str>) -> Result<Rat, FixtureError> {
    let text = param.ok_or_else(|| FixtureError::MissingParameter { name: name.into() })?;
    parse_rat(text).map_err(|e| FixtureError::BadParameter {
        name: name.into(),
        reason: e.to_string(),
    })
}

/// Builds a named fixture game.
///
/// Names: `spam(c)`, `hopeless2x2`, `exhibit1`, `exhibit2(c)`, `exhibit3`,
/// `exhibit4`, `flower(F)`. `exhibit2` is the spam game under another name;
/// the gallery prints a relabelled variant and we standardize on one matrix.
pub fn fixture(name: &str, param: Option<&str>) -> Result<Game, FixtureError> {
    match name {
        "spam" => spam_game("spam", parse_param(name, param)?),
        "exhibit2" => spam_game("exhibit2", parse_param(name, param)?),
        "hopeless2x2" => Ok(Game {
            name: "hopeless2x2".into(),
            loss: rows(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]),
            feedback: symbols(&[&[1, 1], &[1, 1]]),
            num_symbols: 1,
        }),
        "exhibit1" => Ok(Game {
            name: "exhibit1".into(),
            loss: rows(&[
                &[(1, 1), (1, 2), (1, 2), (0, 1)],
                &[(1, 2), (1, 1), (0, 1), (1, 2)],
            ]),
            feedback: symbols(&[&[1, 2, 1, 2], &[1, 2, 1, 2]]),
            num_symbols: 2,
        }),
        "exhibit3" => Ok(Game {
            name: "exhibit3".into(),
            loss: rows(&[
                &[(0, 1), (1, 1), (1, 1)],
                &[(1, 1), (0, 1), (1, 1)],
                &[(1, 2), (1, 2), (1, 2)],
            ]),
            feedback: symbols(&[&[1, 1, 1], &[1, 1, 1], &[1, 2, 3]]),
            num_symbols: 3,
        }),
        "exhibit4" => Ok(Game {
            name: "exhibit4".into(),
            loss: rows(&[
                &[(0, 1), (1, 1), (1, 1)],
                &[(1, 1), (0, 1), (1, 1)],
                &[(1, 2), (1, 2), (1, 2)],
                &[(3, 4), (1, 4), (3, 4)],
                &[(1, 1), (1, 2), (1, 2)],
                &[(1, 1), (1, 4), (3, 4)],
            ]),
            feedback: symbols(&[
                &[1, 1, 1],
                &[1, 1, 1],
                &[1, 2, 3],
                &[1, 1, 1],
                &[1, 1, 1],
                &[1, 1, 1],
            ]),
            num_symbols: 3,
        }),
        "flower" => {
            let param = parse_param(name, param)?;
            if !param.is_integer() {
                return Err(FixtureError::BadParameter {
                    name: name.into(),
                    reason: "F must be an integer".into(),
                });
            }
            let f = param
                .to_integer()
                .try_into()
                .map_err(|_| FixtureError::ParameterOutOfRange {
                    name: name.into(),
                    reason: "F out of range".into(),
                })?;
            flower_game(f)
        }
        other => Err(FixtureError::Unknown(other.into())),
    }
}

/// Parses a `name` or `name:param` fixture reference.
pub fn fixture_ref(reference: &str) -> Result<Game, FixtureError> {
    match reference.split_once(':') {
        Some((name, param)) => fixture(name.trim(), Some(param.trim())),
        None => fixture(reference.trim(), None),
    }
}

/// The catalog used by tests and the bench harness.
pub fn all_fixture_names() -> Vec<&'static str> {
    vec![
        "spam:0",
        "spam:1/10",
        "spam:1/3",
        "spam:1/2",
        "spam:3/5",
        "spam:9/10",
        "hopeless2x2",
        "exhibit1",
        "exhibit2:1/3",
        "exhibit3",
        "exhibit4",
        "flower:3",
        "flower:5",
        "flower:8",
    ]
}
