//! JSON-lines corpus and split files.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{
    validate_sentence, Corpus, Edge, EntityMention, PairLabel, SentenceGraph, Split, TokenFeatures,
    Vertex, Violation,
};

/// Word and lemma given to entity tokens when blinding is on.
pub const BLIND_PLACEHOLDER: &str = "ENTITY";
/// Label suffix of the reversed copies added by edge symmetrization.
pub const REVERSED_SUFFIX: &str = "-rev";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub i: usize,
    pub word: String,
    pub lemma: String,
    pub pos: String,
    pub gpos: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub head: usize,
    pub dep: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub e1: String,
    pub e2: String,
    pub label: u8,
}

/// One line of the corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub doc_id: String,
    pub sent_id: String,
    pub tokens: Vec<TokenRecord>,
    pub edges: Vec<EdgeRecord>,
    pub entities: Vec<EntityRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairRecord>>,
}

impl SentenceRecord {
    /// Converts to a graph, deriving capitalization. Vertices are ordered by
    /// token index.
    pub fn to_graph(&self) -> SentenceGraph {
        let mut vertices: Vec<Vertex> = self
            .tokens
            .iter()
            .map(|t| Vertex {
                index: t.i,
                features: TokenFeatures::new(&t.word, &t.lemma, &t.pos, &t.gpos),
            })
            .collect();
        vertices.sort_by_key(|v| v.index);
        SentenceGraph {
            doc_id: self.doc_id.clone(),
            sent_id: self.sent_id.clone(),
            vertices,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    head: e.head,
                    dependent: e.dep,
                    label: e.label.clone(),
                })
                .collect(),
            entities: self
                .entities
                .iter()
                .map(|e| EntityMention {
                    id: e.id.clone(),
                    vertex: e.token,
                })
                .collect(),
            pairs: self.pairs.as_ref().map(|pairs| {
                pairs
                    .iter()
                    .map(|p| PairLabel {
                        e1: p.e1.clone(),
                        e2: p.e2.clone(),
                        related: p.label != 0,
                    })
                    .collect()
            }),
        }
    }

    pub fn from_graph(graph: &SentenceGraph) -> SentenceRecord {
        SentenceRecord {
            doc_id: graph.doc_id.clone(),
            sent_id: graph.sent_id.clone(),
            tokens: graph
                .vertices
                .iter()
                .map(|v| TokenRecord {
                    i: v.index,
                    word: v.features.word.clone(),
                    lemma: v.features.lemma.clone(),
                    pos: v.features.pos.clone(),
                    gpos: v.features.gpos.clone(),
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    head: e.head,
                    dep: e.dependent,
                    label: e.label.clone(),
                })
                .collect(),
            entities: graph
                .entities
                .iter()
                .map(|m| EntityRecord {
                    id: m.id.clone(),
                    token: m.vertex,
                })
                .collect(),
            pairs: graph.pairs.as_ref().map(|pairs| {
                pairs
                    .iter()
                    .map(|p| PairRecord {
                        e1: p.e1.clone(),
                        e2: p.e2.clone(),
                        label: u8::from(p.related),
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Add a reversed copy of every edge, labeled with [`REVERSED_SUFFIX`].
    pub symmetrize_edges: bool,
    /// Replace word and lemma of entity tokens by [`BLIND_PLACEHOLDER`].
    pub entity_blinding: bool,
}

impl IngestOptions {
    /// Applies the options to a validated graph.
    pub fn apply(&self, mut graph: SentenceGraph) -> SentenceGraph {
        if self.entity_blinding {
            let entity_vertices: HashSet<usize> = graph.entities.iter().map(|m| m.vertex).collect();
            for v in &mut graph.vertices {
                if entity_vertices.contains(&v.index) {
                    let f = &v.features;
                    v.features =
                        TokenFeatures::new(BLIND_PLACEHOLDER, BLIND_PLACEHOLDER, &f.pos, &f.gpos);
                }
            }
        }
        if self.symmetrize_edges {
            let mut present: HashSet<Edge> = graph.edges.iter().cloned().collect();
            let reversed: Vec<Edge> = graph
                .edges
                .iter()
                .map(|e| Edge {
                    head: e.dependent,
                    dependent: e.head,
                    label: format!("{}{REVERSED_SUFFIX}", e.label),
                })
                .filter(|e| present.insert(e.clone()))
                .collect();
            graph.edges.extend(reversed);
        }
        graph
    }
}

/// Parses corpus lines. Blank lines are skipped; errors carry the 1-based
/// line number.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<SentenceRecord>, Error> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Result of loading a corpus file.
#[derive(Debug, Clone)]
pub struct Ingested {
    /// Graphs that passed validation, with options applied.
    pub graphs: Vec<SentenceGraph>,
    pub violations: Vec<Violation>,
    pub sentences: usize,
}

/// Validates every record and applies the ingestion options to valid ones.
pub fn ingest_records(records: &[SentenceRecord], options: &IngestOptions) -> Ingested {
    let mut graphs = Vec::with_capacity(records.len());
    let mut violations = Vec::new();
    for r in records {
        let graph = r.to_graph();
        let found = validate_sentence(&graph);
        if found.is_empty() {
            graphs.push(options.apply(graph));
        } else {
            violations.extend(found);
        }
    }
    Ingested {
        graphs,
        violations,
        sentences: records.len(),
    }
}

/// Loads a corpus, failing on the first malformed line or on any invariant
/// violation.
pub fn load_corpus<R: BufRead>(reader: R, options: &IngestOptions) -> Result<Corpus, Error> {
    let ingested = ingest_records(&read_records(reader)?, options);
    if let Some(v) = ingested.violations.first() {
        return Err(Error::Format(format!(
            "{} invalid sentence(s); first: {v}",
            ingested.violations.len()
        )));
    }
    Ok(Corpus::from_sentences(ingested.graphs))
}

pub fn write_records<W: Write>(mut writer: W, graphs: &[SentenceGraph]) -> Result<(), Error> {
    for g in graphs {
        let line = serde_json::to_string(&SentenceRecord::from_graph(g))
            .map_err(|e| Error::Format(e.to_string()))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn read_splits<R: BufRead>(reader: R) -> Result<Vec<Split>, Error> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_splits<W: Write>(mut writer: W, splits: &[Split]) -> Result<(), Error> {
    for s in splits {
        let line = serde_json::to_string(s).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}
