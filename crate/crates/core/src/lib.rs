//! Typed relation extraction for small annotated corpora.
//!
//! Two routes share one data model:
//!
//! * [`wbc`]: rule-based extraction. A relation is predicted for every
//!   type-compatible mention pair inside one sentence, or reaching at most
//!   `rho` tokens into the following sentence.
//! * supervised binary classifiers ([`models`]) over bag-of-words,
//!   bag-of-concepts ([`boc`]) and pooled sentence-embedding features
//!   ([`features`]).
//!
//! [`instancegen`] turns a [`corpus::Corpus`] into one binary dataset per
//! relation type with seeded 6:1:3 splits, and [`eval`] scores both routes
//! with micro-averaged precision, recall and F1.

pub mod corpus;
pub mod textproc;
pub mod embeddings;
pub mod boc;
pub mod instancegen;
pub mod wbc;
pub mod eval;
pub mod features;
pub mod models;
pub mod pipeline;
