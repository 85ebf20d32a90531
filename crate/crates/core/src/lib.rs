//! Entity-aspect sentiment triplet extraction (EASTE).
//!
//! The crate covers the whole offline pipeline:
//!
//! * [`corpus`] reads SemEval-style review corpora and their canonical
//!   JSON-lines form,
//! * [`labeling`] maps `(target, entity, aspect, sentiment)` quadruples to
//!   per-token label triples and back,
//! * [`model`] is a small three-head token classifier trained with the
//!   averaged ("unified") cross-entropy loss,
//! * [`prompting`] renders instruction prompts, talks to a completion
//!   endpoint or replays fixtures, and parses generated answers,
//! * [`eval`] matches predictions against gold quadruples and reports
//!   micro-averaged precision, recall and F1.

pub mod corpus;
pub mod eval;
pub mod labeling;
pub mod model;
pub mod prompting;

pub use corpus::{Corpus, Head, LabelInventory, Opinion, ReviewSentence, Split, TargetSpan};
pub use labeling::{Quad, Token, TokenLabeling, Triple};
