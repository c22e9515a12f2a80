//! Deterministic graphical (DG) games in pure stationary strategies.
//!
//! The crate models games on digraphs, identifies outcomes with strongly
//! connected components, decides Nash equilibria over the full normal
//! form, and searches for preference profiles that leave a game without
//! any equilibrium, both by brute force and through a SAT encoding.

use thiserror::Error;

pub mod equilibrium;
pub mod fixtures;
pub mod gamefile;
pub mod game;
pub mod graph;
pub mod preference;
pub mod sat;

/// An enumeration would exceed its configured size bound.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{what}: size {} exceeds cap {cap}", .size.map(|s| s.to_string()).unwrap_or_else(|| "overflow".into()))]
pub struct CapExceeded {
    pub what: &'static str,
    /// `None` when the size does not fit in `usize`.
    pub size: Option<usize>,
    pub cap: usize,
}

impl CapExceeded {
    pub fn new(what: &'static str, size: Option<usize>, cap: usize) -> Self {
        CapExceeded { what, size, cap }
    }
}
