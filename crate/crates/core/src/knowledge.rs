//! HasProperty lookups: vehicle → properties for corpus construction and
//! property → vehicle for the retrieval baseline.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::remote::{JsonLineClient, RemoteError};

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("knowledge backend unavailable while querying {concept:?}: {source}")]
    BackendUnavailable {
        concept: String,
        #[source]
        source: RemoteError,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCandidate {
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeEdge {
    pub concept: String,
    pub property: String,
    pub weight: f64,
}

/// Lowercase and trim; multiword properties are kept whole.
pub fn normalize(term: &str) -> String {
    term.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Vehicle → properties direction.
pub trait PropertyBackend: Send + Sync {
    /// Up to `k` properties of `concept`, best first. `concept` is already normalized.
    fn properties(&self, concept: &str, k: usize) -> Result<Vec<PropertyCandidate>, KnowledgeError>;
}

/// Property → concept direction.
pub trait VehicleBackend: Send + Sync {
    /// Highest-weight edge whose property equals `property` (normalized).
    fn best_edge(&self, property: &str) -> Option<KnowledgeEdge>;
}

pub fn properties_of(
    vehicle: &str,
    k: usize,
    backend: &dyn PropertyBackend,
) -> Result<Vec<PropertyCandidate>, KnowledgeError> {
    if k == 0 {
        return Err(KnowledgeError::InvalidK);
    }
    let mut out = backend.properties(&normalize(vehicle), k)?;
    out.retain(|p| !p.text.trim().is_empty());
    // stable: equal scores keep backend order
    out.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
    out.truncate(k);
    Ok(out)
}

/// Concept of the strongest edge for `property`, retrying with its direct
/// synonyms when the property itself is unknown.
pub fn vehicle_for_property(
    property: &str,
    backend: &dyn VehicleBackend,
    synonyms: &SynonymTable,
) -> Option<String> {
    let property = normalize(property);
    if property.is_empty() {
        return None;
    }
    if let Some(edge) = backend.best_edge(&property) {
        return Some(edge.concept);
    }
    synonyms
        .synonyms(&property)
        .iter()
        .filter_map(|s| backend.best_edge(s))
        .min_by(edge_order)
        .map(|e| e.concept)
}

/// Heavier first, then lexicographic concept.
fn edge_order(a: &KnowledgeEdge, b: &KnowledgeEdge) -> Ordering {
    b.weight
        .partial_cmp(&a.weight)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.concept.cmp(&b.concept))
}

/// Static weighted HasProperty table, indexed both ways.
#[derive(Debug, Clone, Default)]
pub struct EdgeTable {
    by_concept: HashMap<String, Vec<(String, f64)>>,
    by_property: HashMap<String, Vec<(String, f64)>>,
    len: usize,
}

fn by_weight_then_name(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(&b.0))
}

impl EdgeTable {
    /// Builds the index; duplicate (concept, property) pairs keep their max weight.
    pub fn from_edges(edges: impl IntoIterator<Item = KnowledgeEdge>) -> Self {
        let mut best: HashMap<(String, String), f64> = HashMap::new();
        for e in edges {
            let key = (normalize(&e.concept), normalize(&e.property));
            let w = best.entry(key).or_insert(e.weight);
            if e.weight > *w {
                *w = e.weight;
            }
        }
        let mut table = EdgeTable {
            len: best.len(),
            ..Default::default()
        };
        for ((concept, property), w) in best {
            table
                .by_concept
                .entry(concept.clone())
                .or_default()
                .push((property.clone(), w));
            table.by_property.entry(property).or_default().push((concept, w));
        }
        for v in table.by_concept.values_mut().chain(table.by_property.values_mut()) {
            v.sort_by(by_weight_then_name);
        }
        table
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn concepts_with(&self, property: &str) -> &[(String, f64)] {
        self.by_property
            .get(&normalize(property))
            .map_or(&[], Vec::as_slice)
    }

    pub fn properties_for(&self, concept: &str) -> &[(String, f64)] {
        self.by_concept
            .get(&normalize(concept))
            .map_or(&[], Vec::as_slice)
    }

    /// Parses `concept<TAB>property<TAB>weight` rows. Blank lines and `#`
    /// comments are ignored; weights must be positive.
    pub fn parse(content: &str) -> Result<Self, KnowledgeError> {
        let mut edges = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(KnowledgeError::Parse {
                    line: line_no,
                    message: format!("expected 3 tab-separated columns, found {}", cols.len()),
                });
            }
            let weight: f64 = cols[2].trim().parse().map_err(|_| KnowledgeError::Parse {
                line: line_no,
                message: format!("invalid weight {:?}", cols[2]),
            })?;
            if !(weight.is_finite() && weight > 0.0) {
                return Err(KnowledgeError::Parse {
                    line: line_no,
                    message: format!("weight must be positive, got {weight}"),
                });
            }
            if cols[0].trim().is_empty() || cols[1].trim().is_empty() {
                return Err(KnowledgeError::Parse {
                    line: line_no,
                    message: "empty concept or property".into(),
                });
            }
            edges.push(KnowledgeEdge {
                concept: cols[0].to_string(),
                property: cols[1].to_string(),
                weight,
            });
        }
        Ok(Self::from_edges(edges))
    }
}

pub fn load_edge_table(path: &Path) -> Result<EdgeTable, KnowledgeError> {
    let content = std::fs::read_to_string(path).map_err(|source| KnowledgeError::Io {
        path: path.display().to_string(),
        source,
    })?;
    EdgeTable::parse(&content)
}

impl PropertyBackend for EdgeTable {
    fn properties(&self, concept: &str, k: usize) -> Result<Vec<PropertyCandidate>, KnowledgeError> {
        Ok(self
            .properties_for(concept)
            .iter()
            .take(k)
            .map(|(p, w)| PropertyCandidate {
                text: p.clone(),
                score: *w,
            })
            .collect())
    }
}

impl VehicleBackend for EdgeTable {
    fn best_edge(&self, property: &str) -> Option<KnowledgeEdge> {
        self.concepts_with(property).first().map(|(c, w)| KnowledgeEdge {
            concept: c.clone(),
            property: normalize(property),
            weight: *w,
        })
    }
}

/// Direct (one-hop) synonyms from `word<TAB>synonym` lines.
#[derive(Debug, Clone, Default)]
pub struct SynonymTable {
    map: HashMap<String, Vec<String>>,
}

impl SynonymTable {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut map: HashMap<String, Vec<String>> = HashMap::new();
        for (w, s) in pairs {
            let list = map.entry(normalize(w)).or_default();
            let s = normalize(s);
            if !list.contains(&s) {
                list.push(s);
            }
        }
        Self { map }
    }

    pub fn parse(content: &str) -> Result<Self, KnowledgeError> {
        let mut pairs = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (w, s) = line.split_once('\t').ok_or_else(|| KnowledgeError::Parse {
                line: idx + 1,
                message: "expected word<TAB>synonym".into(),
            })?;
            pairs.push((w, s));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn load(path: &Path) -> Result<Self, KnowledgeError> {
        let content = std::fs::read_to_string(path).map_err(|source| KnowledgeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content)
    }

    pub fn synonyms(&self, word: &str) -> &[String] {
        self.map.get(&normalize(word)).map_or(&[], Vec::as_slice)
    }
}

/// Request sent to an out-of-process commonsense model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRequest {
    pub concept: String,
    pub relation: String,
    pub k: usize,
}

/// Generative commonsense model behind a [`JsonLineClient`]. Answers
/// `{concept, relation: "HasProperty", k}` with a list of `{text, score}`.
#[derive(Debug)]
pub struct RemoteKnowledge {
    client: JsonLineClient,
}

impl RemoteKnowledge {
    pub fn spawn(command: &str) -> Result<Self, RemoteError> {
        Ok(Self {
            client: JsonLineClient::spawn(command)?,
        })
    }
}

impl PropertyBackend for RemoteKnowledge {
    fn properties(&self, concept: &str, k: usize) -> Result<Vec<PropertyCandidate>, KnowledgeError> {
        let req = PropertyRequest {
            concept: concept.to_string(),
            relation: "HasProperty".into(),
            k,
        };
        self.client
            .call(&req)
            .map_err(|source| KnowledgeError::BackendUnavailable {
                concept: concept.to_string(),
                source,
            })
    }
}
