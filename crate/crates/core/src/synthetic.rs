//! Deterministic synthetic protein-interaction corpus.
//!
//! Sentences follow three dependency templates:
//!
//! * simple clause `E1 <-nsubj- V -dobj-> E2`, related iff `V` is an
//!   interaction verb;
//! * two coordinated clauses `V1 -conj-> V2`, each with its own subject and
//!   object; only subject/object pairs of the same interaction-verb clause
//!   are related;
//! * an object conjunction `E1 <-nsubj- V -dobj-> E2 -conj-> E3`, where
//!   the subject is related to both objects when `V` is an interaction verb.
//!
//! The relation is therefore a pattern over the dependency path between the
//! two entities. In the coordinated template, related and unrelated pairs
//! flag the same multiset of entity positions across the sentence, so a
//! view without shortest-path information cannot tell them apart.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Split;
use crate::ingest::{EdgeRecord, EntityRecord, PairRecord, SentenceRecord, TokenRecord};

const PROTEINS: &[&str] = &[
    "RAD51",
    "BRCA2",
    "p53",
    "Ku70",
    "XRCC4",
    "IkappaB",
    "Cdc42",
    "MDM2",
    "TRAF6",
    "Grb2",
    "SOS1",
    "ERK2",
    "Stat3",
    "JAK1",
    "PCNA",
    "cyclin",
    "Rb",
    "E2F1",
    "Smad3",
    "actin",
    "Ras",
    "Raf1",
    "MEK1",
    "Akt",
    "PTEN",
    "Hsp90",
    "ubiquitin",
    "Src",
    "Fyn",
    "NFkappaB",
];

const INTERACTION_VERBS: &[(&str, &str)] = &[
    ("binds", "bind"),
    ("activates", "activate"),
    ("phosphorylates", "phosphorylate"),
    ("inhibits", "inhibit"),
];

const OTHER_VERBS: &[(&str, &str)] = &[
    ("resembles", "resemble"),
    ("precedes", "precede"),
    ("exceeds", "exceed"),
];

const ADVERBS: &[&str] = &["strongly", "directly", "also", "weakly"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub documents: usize,
    pub splits: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 20_110_901,
            documents: 60,
            splits: 10,
        }
    }
}

/// Accumulates one sentence.
struct Builder {
    tokens: Vec<TokenRecord>,
    edges: Vec<EdgeRecord>,
    entities: Vec<EntityRecord>,
    pairs: Vec<PairRecord>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            tokens: Vec::new(),
            edges: Vec::new(),
            entities: Vec::new(),
            pairs: Vec::new(),
        }
    }

    fn token(&mut self, word: &str, lemma: &str, pos: &str, gpos: &str) -> usize {
        let i = self.tokens.len();
        self.tokens.push(TokenRecord {
            i,
            word: word.into(),
            lemma: lemma.into(),
            pos: pos.into(),
            gpos: gpos.into(),
        });
        i
    }

    fn entity(&mut self, name: &str) -> usize {
        let i = self.token(name, &name.to_lowercase(), "NN", "N");
        let id = format!("T{}", self.entities.len() + 1);
        self.entities.push(EntityRecord { id, token: i });
        i
    }

    fn verb(&mut self, (word, lemma): (&str, &str)) -> usize {
        self.token(word, lemma, "VBZ", "V")
    }

    fn edge(&mut self, head: usize, dep: usize, label: &str) {
        self.edges.push(EdgeRecord {
            head,
            dep,
            label: label.into(),
        });
    }

    /// Labels every entity pair; `related` lists pairs of entity positions.
    fn label_all(&mut self, related: &[(usize, usize)]) {
        let k = self.entities.len();
        for a in 0..k {
            for b in a + 1..k {
                let yes = related.contains(&(a, b)) || related.contains(&(b, a));
                self.pairs.push(PairRecord {
                    e1: self.entities[a].id.clone(),
                    e2: self.entities[b].id.clone(),
                    label: u8::from(yes),
                });
            }
        }
    }

    fn finish(self, doc_id: &str, sent_id: &str) -> SentenceRecord {
        SentenceRecord {
            doc_id: doc_id.into(),
            sent_id: sent_id.into(),
            tokens: self.tokens,
            edges: self.edges,
            entities: self.entities,
            pairs: Some(self.pairs),
        }
    }
}

fn pick_verb(rng: &mut ChaCha8Rng, interaction: bool) -> (&'static str, &'static str) {
    let pool = if interaction {
        INTERACTION_VERBS
    } else {
        OTHER_VERBS
    };
    *pool.choose(rng).expect("nonempty pool")
}

fn maybe_adverb(rng: &mut ChaCha8Rng, b: &mut Builder, verb: usize) {
    if rng.random_bool(0.3) {
        let adv = *ADVERBS.choose(rng).expect("nonempty");
        let a = b.token(adv, adv, "RB", "R");
        b.edge(verb, a, "advmod");
    }
}

fn proteins(rng: &mut ChaCha8Rng, k: usize) -> Vec<&'static str> {
    PROTEINS.choose_multiple(rng, k).copied().collect()
}

fn simple_clause(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let names = proteins(rng, 2);
    let interaction = rng.random_bool(0.5);
    let e1 = b.entity(names[0]);
    let v = b.verb(pick_verb(rng, interaction));
    let e2 = b.entity(names[1]);
    b.edge(v, e1, "nsubj");
    b.edge(v, e2, "dobj");
    maybe_adverb(rng, &mut b, v);
    b.label_all(if interaction { &[(0, 1)] } else { &[] });
    b
}

fn coordinated_clauses(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let names = proteins(rng, 4);
    let first = rng.random_bool(0.8);
    let second = rng.random_bool(0.8);
    let verb1 = pick_verb(rng, first);
    let verb2 = if first == second && rng.random_bool(0.5) {
        verb1
    } else {
        pick_verb(rng, second)
    };
    let a = b.entity(names[0]);
    let v1 = b.verb(verb1);
    let c = b.entity(names[1]);
    let and = b.token("and", "and", "CC", "C");
    let d = b.entity(names[2]);
    let v2 = b.verb(verb2);
    let e = b.entity(names[3]);
    b.edge(v1, a, "nsubj");
    b.edge(v1, c, "dobj");
    b.edge(v1, and, "cc");
    b.edge(v1, v2, "conj");
    b.edge(v2, d, "nsubj");
    b.edge(v2, e, "dobj");
    maybe_adverb(rng, &mut b, v1);
    let mut related = Vec::new();
    if first {
        related.push((0, 1));
    }
    if second {
        related.push((2, 3));
    }
    b.label_all(&related);
    b
}

fn object_conjunction(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let names = proteins(rng, 3);
    let interaction = rng.random_bool(0.6);
    let e1 = b.entity(names[0]);
    let v = b.verb(pick_verb(rng, interaction));
    let e2 = b.entity(names[1]);
    let and = b.token("and", "and", "CC", "C");
    let e3 = b.entity(names[2]);
    b.edge(v, e1, "nsubj");
    b.edge(v, e2, "dobj");
    b.edge(e2, and, "cc");
    b.edge(e2, e3, "conj");
    maybe_adverb(rng, &mut b, v);
    b.label_all(if interaction { &[(0, 1), (0, 2)] } else { &[] });
    b
}

/// Generates the corpus records and `config.splits` document-level splits.
pub fn generate(config: &SyntheticConfig) -> (Vec<SentenceRecord>, Vec<Split>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();
    let mut doc_ids = Vec::with_capacity(config.documents);
    for d in 0..config.documents {
        let doc_id = format!("doc{:03}", d + 1);
        let sentences = rng.random_range(1..=3);
        for s in 0..sentences {
            let roll: f64 = rng.random();
            let b = if roll < 0.4 {
                simple_clause(&mut rng)
            } else if roll < 0.8 {
                coordinated_clauses(&mut rng)
            } else {
                object_conjunction(&mut rng)
            };
            records.push(b.finish(&doc_id, &format!("{doc_id}.s{}", s + 1)));
        }
        doc_ids.push(doc_id);
    }

    let mut shuffled = doc_ids.clone();
    shuffled.shuffle(&mut rng);
    let folds = config.splits.max(1);
    let splits = (0..folds)
        .map(|k| {
            let test: Vec<String> = shuffled
                .iter()
                .enumerate()
                .filter(|(i, _)| i % folds == k)
                .map(|(_, d)| d.clone())
                .collect();
            let train: Vec<String> = doc_ids
                .iter()
                .filter(|d| !test.contains(d))
                .cloned()
                .collect();
            let mut test_sorted = test;
            test_sorted.sort();
            Split {
                id: k as u32 + 1,
                train_docs: train,
                test_docs: test_sorted,
            }
        })
        .collect();
    (records, splits)
}
