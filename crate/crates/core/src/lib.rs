//! Fact-check article ingestion, verdict harmonization, and a small
//! text-classification stack (TF-IDF features, softmax regression, F1 metrics).
//!
//! The crate is organised along the pipeline:
//!
//! * [`ingest`] crawls fact-checking sites politely and extracts [`ArticleRecord`]s.
//! * [`labels`] maps each site's verdict vocabulary onto the 4-class veracity
//!   taxonomy and topics onto the 6-class domain taxonomy.
//! * [`textprep`] cleans text and builds TF-IDF vectors.
//! * [`classifier`] trains and applies a multinomial logistic-regression head,
//!   optionally on top of a remote dense encoder.
//! * [`metrics`] scores predictions with the F1 family.
//! * [`corpus`] is the newline-delimited on-disk corpus format.

pub mod classifier;
pub mod corpus;
pub mod ingest;
pub mod labels;
pub mod metrics;
pub mod synthetic;
pub mod textprep;

pub use ingest::ArticleRecord;
pub use labels::{DomainClass, MappingTable, VerdictClass};
