//! Analysis toolkit and online policies for finite adversarial
//! partial-monitoring games.
//!
//! The crate splits into an exact layer and a simulation layer. The exact
//! layer (rationals everywhere) parses games, decomposes the outcome simplex
//! into cells, decides observability, synthesizes loss-difference estimation
//! functions, and classifies games as trivial/easy/hard/hopeless. The
//! simulation layer runs the two online policies against oblivious
//! environments with seeded, reproducible sampling and regret accounting.

pub mod analysis;
pub mod classify;
pub mod game;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod observability;
pub mod policy;
pub mod rational;

pub use analysis::{analyze, GameAnalysis};
pub use classify::{classify, GameClass, Verdict};
pub use game::{fixture, fixture_ref, parse_game, Game, ValidationReport};
pub use rational::Rat;
