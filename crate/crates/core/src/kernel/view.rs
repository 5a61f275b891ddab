use crate::error::KernelError;
use crate::graph::{Candidate, TokenFeatures};

use super::{KernelVariant, WalkParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ViewVertex {
    pub features: TokenFeatures,
    pub is_entity: bool,
    pub in_sp: bool,
}

/// Directed edge between two view vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewEdge {
    pub from: usize,
    pub to: usize,
    pub label: String,
    pub in_sp: bool,
}

/// The labeled graph a kernel variant walks over.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphView {
    pub vertices: Vec<ViewVertex>,
    pub edges: Vec<ViewEdge>,
}

impl GraphView {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn out_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for e in &self.edges {
            deg[e.from] += 1;
        }
        deg
    }
}

/// Gated normalized linear kernel on vertex labels.
///
/// Vertices only match when they agree on both the entity and the
/// shortest-path flag; otherwise the score is the number of equal feature
/// slots over the slot count.
pub fn vertex_kernel(v: &ViewVertex, w: &ViewVertex) -> f64 {
    if v.in_sp != w.in_sp || v.is_entity != w.is_entity {
        return 0.0;
    }
    // c(v,v) = c(w,w) = SLOTS, so sqrt(c(v,v) c(w,w)) = SLOTS.
    v.features.common_slots(&w.features) as f64 / TokenFeatures::SLOTS as f64
}

/// 1 when labels are equal and both edges agree on the shortest-path flag.
pub fn edge_kernel(e: &ViewEdge, f: &ViewEdge) -> f64 {
    if e.in_sp == f.in_sp && e.label == f.label {
        1.0
    } else {
        0.0
    }
}

/// Builds the view of `candidate` walked by `variant`.
pub fn variant_view(candidate: &Candidate, variant: KernelVariant) -> GraphView {
    let graph = &candidate.graph;
    match variant {
        KernelVariant::Full | KernelVariant::NoShortestPath => {
            let keep_sp = variant == KernelVariant::Full;
            GraphView {
                vertices: graph
                    .vertices
                    .iter()
                    .map(|v| ViewVertex {
                        features: v.features.clone(),
                        is_entity: candidate.is_entity[v.index],
                        in_sp: keep_sp && candidate.in_sp_vertex[v.index],
                    })
                    .collect(),
                edges: graph
                    .edges
                    .iter()
                    .zip(&candidate.in_sp_edge)
                    .map(|(e, &sp)| ViewEdge {
                        from: e.head,
                        to: e.dependent,
                        label: e.label.clone(),
                        in_sp: keep_sp && sp,
                    })
                    .collect(),
            }
        }
        KernelVariant::ShortestPath => {
            let mut remap = vec![usize::MAX; graph.vertices.len()];
            let mut vertices = Vec::new();
            for v in &graph.vertices {
                if candidate.in_sp_vertex[v.index] {
                    remap[v.index] = vertices.len();
                    vertices.push(ViewVertex {
                        features: v.features.clone(),
                        is_entity: candidate.is_entity[v.index],
                        in_sp: true,
                    });
                }
            }
            let edges = graph
                .edges
                .iter()
                .zip(&candidate.in_sp_edge)
                .filter(|(_, &sp)| sp)
                .map(|(e, _)| ViewEdge {
                    from: remap[e.head],
                    to: remap[e.dependent],
                    label: e.label.clone(),
                    in_sp: true,
                })
                .collect();
            GraphView { vertices, edges }
        }
    }
}

/// Start, stop and per-edge transition probabilities of a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistributions {
    pub start: Vec<f64>,
    pub stop: Vec<f64>,
    /// Indexed like `GraphView::edges`.
    pub transition: Vec<f64>,
}

/// Uniform walk distributions with constant termination probability.
///
/// Every vertex is an equally likely start. A vertex with outgoing edges
/// stops with probability `gamma` and otherwise follows one of its outgoing
/// edges uniformly; a sink always stops.
pub fn walk_distributions(
    view: &GraphView,
    params: &WalkParams,
) -> Result<WalkDistributions, KernelError> {
    if view.is_empty() {
        return Err(KernelError::EmptyGraph);
    }
    let n = view.len();
    let deg = view.out_degree();
    let gamma = params.gamma;
    Ok(WalkDistributions {
        start: vec![1.0 / n as f64; n],
        stop: deg
            .iter()
            .map(|&d| if d > 0 { gamma } else { 1.0 })
            .collect(),
        transition: view
            .edges
            .iter()
            .map(|e| (1.0 - gamma) / deg[e.from] as f64)
            .collect(),
    })
}
