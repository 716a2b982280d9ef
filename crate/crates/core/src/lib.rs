//! Exact worst-case analysis of the generalized AB game (Mastermind with
//! pairwise-distinct colors) and its black-peg variant.
//!
//! - [`game`]: codes, grading and enumeration for every variant.
//! - [`solver`]: depth-bounded adversarial search with symmetry reduction.
//! - [`endgame`]: end-game state tables, reduction rules and the
//!   lower-bound pipeline for the black-peg game.
//! - [`twophase`]: cyclic reduction questions and the upper-bound pipeline.
//! - [`formulas`]: closed-form values and bounds for cross-checking.

pub mod endgame;
pub mod error;
pub mod formulas;
pub mod game;
pub mod solver;
pub mod twophase;

pub use error::{Error, Result};
pub use game::{Code, Color, Feedback, FeedbackMode, GameSpec, QuestionPolicy};
pub use solver::{SolveResult, SolveStatus, Solver, StrategyNode};
