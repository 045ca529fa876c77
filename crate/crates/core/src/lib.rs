//! Leaderboards mined from the comparison tables of scientific papers.
//!
//! The pipeline reads LaTeX `tabular` blocks whose rows cite compared
//! papers ([`ingest`]), turns every numeric comparison into a directed
//! worse-to-better edge ([`graph`]), prunes implausible improvements and
//! collapses parallel edges ([`sanitize`]), ranks the resulting tournament
//! ([`rankers`]), and answers text queries with ranked leaderboards
//! ([`leaderboard`]) that can be scored against curated ones ([`eval`]).

pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod jsonl;
pub mod leaderboard;
pub mod rankers;
pub mod sanitize;

pub use error::{Error, Result};
