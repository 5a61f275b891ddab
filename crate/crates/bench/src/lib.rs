//! Shared fixtures for the criterion benchmarks.

use walkre_core::graph::Corpus;
use walkre_core::ingest::{ingest_records, IngestOptions};
use walkre_core::synthetic::{generate, SyntheticConfig};
use walkre_core::Candidate;

/// Candidates of the default synthetic corpus, in corpus order.
pub fn synthetic_candidates() -> Vec<Candidate> {
    let (records, _) = generate(&SyntheticConfig::default());
    let ingested = ingest_records(&records, &IngestOptions::default());
    Corpus::from_sentences(ingested.graphs).all_candidates()
}
