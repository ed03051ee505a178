//! Profit-maximizing menus of information products sold by a seller who
//! competes with the buyer in a binary game.
//!
//! - [`game`]: payoffs, beliefs and the dominant strategy.
//! - [`rules`]: communication rules, the buyer's gain and the seller's cost.
//! - [`binary`]: exact menus for two buyer types.
//! - [`continuous`]: virtual-value solution for a continuum of types.
//! - [`oracle`]: brute-force and Monte-Carlo cross-checks.

pub mod binary;
pub mod continuous;
pub mod dist;
pub mod error;
pub mod game;
pub mod oracle;
mod lp;
mod quad;
pub mod rules;

pub use error::{Error, Result};
