//! Recommends revenue-maximizing combinations of threshold-discount campaigns.
//!
//! The pipeline enumerates candidate pairs, scores each one against a revenue
//! oracle, filters them through the shop's business rules, and searches the
//! surviving sequence with greedy, randomized double-greedy or exhaustive
//! search.

pub mod domain;
pub mod encoding;
pub mod oracle;
pub mod optimizer;
pub mod pipeline;
