//! Constraint-based chart recommendation with soft-rule weights learned from
//! ranked design pairs, plus tools to measure how each study in a corpus moves
//! those weights and the resulting recommendations.
//!
//! The pieces, bottom up:
//!
//! * [`spec`] and [`corpus`]: chart designs, ranked pairs, the corpus file format.
//! * [`apt`]: channel-effectiveness rankings turned into baseline pairs.
//! * [`rules`]: the constraint language, hard filtering and featurization.
//! * [`learn`]: pairwise max-margin weight learning behind a trainer registry.
//! * [`recommend`]: design-space enumeration and cost ranking.
//! * [`analysis`]: shift vectors, influence, clustering, correlation and the
//!   study runners, plus the registry of named analyses.
//! * [`report`]: CSV, JSON and SVG emitters and run manifests.

pub mod analysis;
pub mod apt;
pub mod corpus;
pub mod error;
pub mod learn;
pub mod recommend;
pub mod report;
pub mod rules;
pub mod spec;

pub use error::Error;
