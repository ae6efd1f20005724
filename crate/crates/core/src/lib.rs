//! Cautious optimistic follow-the-regularized-leader for normal-form games.
//!
//! Each learner picks its own learning rate every round by solving a small
//! one-dimensional concave problem. In self-play this keeps every player's
//! regret at `O(n log T)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod game;
pub mod harness;
pub mod learner;
pub mod lifted;
pub mod regularizer;
pub mod runner;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use game::{make_game, GameSpec, MixedProfile, NormalFormGame};
pub use regularizer::{Regularizer, RegularizerConstants, RegularizerKind};
