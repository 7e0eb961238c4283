//! Logit dynamics on finite strategic games.
//!
//! A uniformly chosen player resamples her strategy with probability
//! proportional to `exp(beta * utility)`. The crate builds the resulting
//! Markov chain exactly for small games and provides stationary, mixing,
//! coupling and path-coupling analyses on top of it.

pub mod analysis;
pub mod closed_form;
pub mod coupling;
pub mod error;
pub mod game;
pub mod logit;
pub mod or_path;
pub mod xor;

pub use error::{Error, Result};
pub use game::{GameSpec, Profile, ProfileSpace};
pub use logit::{Beta, Distribution, TransitionMatrix};
