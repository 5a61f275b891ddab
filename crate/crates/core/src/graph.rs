//! Labeled dependency graphs, relation candidates and their entity /
//! shortest-path annotations.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Capitalization pattern of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Caps {
    AllLower,
    Capitalized,
    AllCaps,
    Mixed,
    /// No alphabetic characters at all (numbers, punctuation).
    Other,
}

impl Caps {
    /// Derives the pattern from the alphabetic characters of `word`.
    ///
    /// A single uppercase letter counts as `Capitalized`; `AllCaps` needs at
    /// least two letters.
    pub fn of(word: &str) -> Caps {
        let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
        let Some(first) = letters.first() else {
            return Caps::Other;
        };
        let rest = &letters[1..];
        let lower = |c: &char| !c.is_uppercase();
        if letters.iter().all(lower) {
            Caps::AllLower
        } else if first.is_uppercase() && rest.iter().all(lower) {
            Caps::Capitalized
        } else if letters.iter().all(|c| c.is_uppercase()) {
            Caps::AllCaps
        } else {
            Caps::Mixed
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Caps::AllLower => "lower",
            Caps::Capitalized => "capitalized",
            Caps::AllCaps => "upper",
            Caps::Mixed => "mixed",
            Caps::Other => "other",
        }
    }
}

/// Per-token attributes compared by the vertex kernel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenFeatures {
    pub word: String,
    pub lemma: String,
    pub pos: String,
    pub gpos: String,
    pub caps: Caps,
}

impl TokenFeatures {
    /// Number of feature slots. Every token fills all of them, so the
    /// self-match count of any vertex is this constant.
    pub const SLOTS: usize = 5;

    /// Builds features, deriving `caps` from `word`.
    pub fn new(
        word: impl Into<String>,
        lemma: impl Into<String>,
        pos: impl Into<String>,
        gpos: impl Into<String>,
    ) -> Self {
        let word = word.into();
        let caps = Caps::of(&word);
        TokenFeatures {
            word,
            lemma: lemma.into(),
            pos: pos.into(),
            gpos: gpos.into(),
            caps,
        }
    }

    /// Number of slots holding equal values in `self` and `other`.
    pub fn common_slots(&self, other: &TokenFeatures) -> usize {
        usize::from(self.word == other.word)
            + usize::from(self.lemma == other.lemma)
            + usize::from(self.pos == other.pos)
            + usize::from(self.gpos == other.gpos)
            + usize::from(self.caps == other.caps)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub index: usize,
    pub features: TokenFeatures,
}

/// A directed dependency edge `head -> dependent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub head: usize,
    pub dependent: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    pub id: String,
    pub vertex: usize,
}

/// Gold label for an (unordered) pair of entity ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLabel {
    pub e1: String,
    pub e2: String,
    pub related: bool,
}

/// Dependency graph of one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceGraph {
    pub doc_id: String,
    pub sent_id: String,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub entities: Vec<EntityMention>,
    /// `None` for unlabeled data.
    pub pairs: Option<Vec<PairLabel>>,
}

/// A single invariant violation found by [`validate_sentence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub doc_id: String,
    pub sent_id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}: {}", self.doc_id, self.sent_id, self.message)
    }
}

/// Checks every structural invariant of a sentence graph and reports one
/// violation per problem found. An empty result means the graph is valid.
pub fn validate_sentence(sentence: &SentenceGraph) -> Vec<Violation> {
    let mut messages = Vec::new();
    let n = sentence.vertices.len();

    let mut seen = vec![false; n];
    let mut duplicates = Vec::new();
    for v in &sentence.vertices {
        if v.index >= n {
            messages.push(format!(
                "vertex index {} out of range (sentence has {} vertices)",
                v.index, n
            ));
        } else if seen[v.index] {
            duplicates.push(v.index);
        } else {
            seen[v.index] = true;
        }
    }
    duplicates.sort_unstable();
    duplicates.dedup();
    for index in duplicates {
        messages.push(format!("duplicate vertex index {index}"));
    }
    let missing: Vec<String> = seen
        .iter()
        .enumerate()
        .filter(|(_, s)| !**s)
        .map(|(i, _)| i.to_string())
        .collect();
    if !missing.is_empty() && messages.is_empty() {
        messages.push(format!("missing vertex indices {}", missing.join(",")));
    }

    for v in &sentence.vertices {
        let f = &v.features;
        for (slot, value) in [
            ("word", &f.word),
            ("lemma", &f.lemma),
            ("pos", &f.pos),
            ("gpos", &f.gpos),
        ] {
            if value.is_empty() {
                messages.push(format!("vertex {} has empty {slot}", v.index));
            }
        }
    }

    let mut triples = HashSet::new();
    for (k, e) in sentence.edges.iter().enumerate() {
        let mut ok = true;
        for endpoint in [e.head, e.dependent] {
            if endpoint >= n {
                messages.push(format!(
                    "edge endpoint out of range: edge {k} ({} -> {} {}) references vertex {endpoint}, sentence has {n} vertices",
                    e.head, e.dependent, e.label
                ));
                ok = false;
            }
        }
        if ok && e.head == e.dependent {
            messages.push(format!("self-loop on vertex {} (edge {k})", e.head));
        }
        if e.label.is_empty() {
            messages.push(format!("edge {k} has an empty label"));
        }
        if !triples.insert((e.head, e.dependent, e.label.as_str())) {
            messages.push(format!(
                "duplicate edge {} -> {} {}",
                e.head, e.dependent, e.label
            ));
        }
    }

    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut owners: BTreeMap<usize, &str> = BTreeMap::new();
    for m in &sentence.entities {
        if m.vertex >= n {
            messages.push(format!(
                "entity {} token {} out of range (sentence has {n} vertices)",
                m.id, m.vertex
            ));
            continue;
        }
        if ids.insert(m.id.as_str(), m.vertex).is_some() {
            messages.push(format!("duplicate entity id {}", m.id));
        }
        if let Some(other) = owners.insert(m.vertex, m.id.as_str()) {
            messages.push(format!(
                "entities {other} and {} share vertex {}",
                m.id, m.vertex
            ));
        }
    }

    if let Some(pairs) = &sentence.pairs {
        for p in pairs {
            for id in [&p.e1, &p.e2] {
                if !sentence.entities.iter().any(|m| &m.id == id) {
                    messages.push(format!("pair references unknown entity {id}"));
                }
            }
            if p.e1 == p.e2 {
                messages.push(format!("pair relates entity {} to itself", p.e1));
            }
        }
    }

    messages
        .into_iter()
        .map(|message| Violation {
            doc_id: sentence.doc_id.clone(),
            sent_id: sentence.sent_id.clone(),
            message,
        })
        .collect()
}

/// An entity pair inside one sentence, annotated with the entity and
/// shortest-path predicates used by the kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub graph: Arc<SentenceGraph>,
    pub e1: usize,
    pub e2: usize,
    pub e1_id: String,
    pub e2_id: String,
    pub is_entity: Vec<bool>,
    pub in_sp_vertex: Vec<bool>,
    pub in_sp_edge: Vec<bool>,
    /// Set when no undirected path joins `e1` and `e2`.
    pub disconnected: bool,
    pub label: Option<bool>,
}

impl Candidate {
    /// Builds an annotated candidate for the mentions at positions `m1`
    /// and `m2` of `graph.entities`.
    pub fn new(graph: Arc<SentenceGraph>, m1: usize, m2: usize) -> Candidate {
        let a = &graph.entities[m1];
        let b = &graph.entities[m2];
        let n = graph.vertices.len();
        let mut is_entity = vec![false; n];
        is_entity[a.vertex] = true;
        is_entity[b.vertex] = true;
        let label = graph.pairs.as_ref().and_then(|pairs| {
            pairs
                .iter()
                .find(|p| (p.e1 == a.id && p.e2 == b.id) || (p.e1 == b.id && p.e2 == a.id))
                .map(|p| p.related)
        });
        let candidate = Candidate {
            e1: a.vertex,
            e2: b.vertex,
            e1_id: a.id.clone(),
            e2_id: b.id.clone(),
            is_entity,
            in_sp_vertex: vec![false; n],
            in_sp_edge: vec![false; graph.edges.len()],
            disconnected: false,
            label,
            graph,
        };
        annotate_shortest_path(candidate)
    }

    /// `doc_id/sent_id/e1/e2`.
    pub fn id(&self) -> String {
        format!(
            "{}/{}/{}/{}",
            self.graph.doc_id, self.graph.sent_id, self.e1_id, self.e2_id
        )
    }

    pub fn features(&self, vertex: usize) -> &TokenFeatures {
        &self.graph.vertices[vertex].features
    }

    /// Number of edges on the flagged path, or `None` when disconnected.
    pub fn path_length(&self) -> Option<usize> {
        if self.disconnected {
            None
        } else {
            Some(self.in_sp_vertex.iter().filter(|f| **f).count() - 1)
        }
    }
}

/// Enumerates one candidate per unordered pair of entity mentions, in
/// mention order.
pub fn generate_candidates(
    sentence: &Arc<SentenceGraph>,
    arity: usize,
) -> Result<Vec<Candidate>, GraphError> {
    if arity != 2 {
        return Err(GraphError::UnsupportedArity(arity));
    }
    let k = sentence.entities.len();
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            out.push(Candidate::new(Arc::clone(sentence), i, j));
        }
    }
    Ok(out)
}

/// Sorted, deduplicated neighbor lists of the undirected view.
fn undirected_adjacency(graph: &SentenceGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.vertices.len()];
    for e in &graph.edges {
        adj[e.head].push(e.dependent);
        adj[e.dependent].push(e.head);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Breadth-first search from `from` to `to` on the undirected view.
/// Neighbors are visited in ascending index order and the first path
/// reaching `to` is returned as a vertex sequence.
pub fn shortest_path(graph: &SentenceGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let adj = undirected_adjacency(graph);
    let mut parent = vec![usize::MAX; adj.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    if parent[to] == usize::MAX {
        return None;
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    Some(path)
}

/// Recomputes the shortest-path flags of `candidate` from scratch.
///
/// Every edge joining two consecutive path vertices is flagged, in either
/// direction. Disconnected pairs flag only the two entity vertices.
pub fn annotate_shortest_path(mut candidate: Candidate) -> Candidate {
    let graph = &candidate.graph;
    candidate.in_sp_vertex = vec![false; graph.vertices.len()];
    candidate.in_sp_edge = vec![false; graph.edges.len()];
    match shortest_path(graph, candidate.e1, candidate.e2) {
        Some(path) => {
            candidate.disconnected = false;
            for &v in &path {
                candidate.in_sp_vertex[v] = true;
            }
            let steps: HashSet<(usize, usize)> = path
                .windows(2)
                .flat_map(|w| [(w[0], w[1]), (w[1], w[0])])
                .collect();
            for (flag, e) in candidate.in_sp_edge.iter_mut().zip(&graph.edges) {
                *flag = steps.contains(&(e.head, e.dependent));
            }
        }
        None => {
            candidate.disconnected = true;
            candidate.in_sp_vertex[candidate.e1] = true;
            candidate.in_sp_vertex[candidate.e2] = true;
        }
    }
    candidate
}

/// Document-level train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    #[serde(rename = "split")]
    pub id: u32,
    pub train_docs: Vec<String>,
    pub test_docs: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Arc<SentenceGraph>>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub splits: Vec<Split>,
}

impl Corpus {
    /// Groups sentences by document, keeping first-appearance order.
    pub fn from_sentences(sentences: impl IntoIterator<Item = SentenceGraph>) -> Corpus {
        let mut documents: Vec<Document> = Vec::new();
        let mut position: BTreeMap<String, usize> = BTreeMap::new();
        for s in sentences {
            let slot = *position.entry(s.doc_id.clone()).or_insert_with(|| {
                documents.push(Document {
                    doc_id: s.doc_id.clone(),
                    sentences: Vec::new(),
                });
                documents.len() - 1
            });
            documents[slot].sentences.push(Arc::new(s));
        }
        Corpus {
            documents,
            splits: Vec::new(),
        }
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Arc<SentenceGraph>> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    /// Checks that every split references known documents and keeps its
    /// train and test sets disjoint.
    pub fn check_splits(&self) -> Result<(), GraphError> {
        for split in &self.splits {
            let train: HashSet<&str> = split.train_docs.iter().map(String::as_str).collect();
            for doc in split.train_docs.iter().chain(&split.test_docs) {
                if self.document(doc).is_none() {
                    return Err(GraphError::UnknownDocument {
                        split: split.id,
                        doc_id: doc.clone(),
                    });
                }
            }
            if let Some(doc) = split.test_docs.iter().find(|d| train.contains(d.as_str())) {
                return Err(GraphError::OverlappingSplit {
                    split: split.id,
                    doc_id: doc.clone(),
                });
            }
        }
        Ok(())
    }

    /// All candidates of the listed documents, in document then sentence order.
    pub fn candidates_for(&self, doc_ids: &[String]) -> Result<Vec<Candidate>, GraphError> {
        let mut out = Vec::new();
        for doc_id in doc_ids {
            let doc = self
                .document(doc_id)
                .ok_or_else(|| GraphError::MissingDocument(doc_id.clone()))?;
            for s in &doc.sentences {
                out.extend(generate_candidates(s, 2)?);
            }
        }
        Ok(out)
    }

    pub fn all_candidates(&self) -> Vec<Candidate> {
        self.sentences()
            .flat_map(|s| generate_candidates(s, 2).expect("arity 2 is supported"))
            .collect()
    }
}
