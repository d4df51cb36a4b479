//! Graph reductions: admissible trimmings, cleaning, quasigraph construction
//! for mixed-edge removal, and the 00-endpoint reduction. Every operation is
//! pure: it returns a new graph together with the coupling-vector
//! transformation the corresponding theorem prescribes.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{
    CouplingValue, CouplingVector, Edge, LengthSpec, MarkedGraph, Vertex, VertexType,
};

/// How the coupling at a vertex of the reduced graph is formed.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingRule {
    /// Same vertex, same coupling.
    Identity { from: String },
    /// Merged vertex: α_V + α_V'.
    Sum { a: String, b: String },
    /// Regularized quasivertex: coupling taken from the surviving endpoint.
    FromVertex { from: String },
}

/// A reduced graph plus the prescription for transporting coupling vectors.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub graph: MarkedGraph,
    /// New vertex id → rule; covers every new vertex exactly once.
    pub coupling_map: BTreeMap<String, CouplingRule>,
    /// Old vertex id → new vertex id; dropped vertices are absent.
    pub vertex_remap: BTreeMap<String, String>,
}

impl ReductionResult {
    /// Transport a coupling vector of the source graph to the reduced graph.
    pub fn apply(&self, source: &MarkedGraph, alpha: &CouplingVector) -> Result<CouplingVector> {
        let value_of = |id: &str| -> Result<CouplingValue> {
            Ok(alpha.get(source.vertex_index(id)?).clone())
        };
        let mut values = Vec::new();
        for v in self.graph.vertices() {
            let rule = self
                .coupling_map
                .get(&v.id)
                .unwrap_or_else(|| panic!("coupling_map misses vertex {}", v.id));
            let value = match rule {
                CouplingRule::Identity { from } | CouplingRule::FromVertex { from } => {
                    value_of(from)?
                }
                CouplingRule::Sum { a, b } => add_couplings(&value_of(a)?, &value_of(b)?),
            };
            values.push(value);
        }
        Ok(CouplingVector::new(values))
    }

    pub fn coupling_map_json(&self) -> Value {
        let map: BTreeMap<&String, Value> = self
            .coupling_map
            .iter()
            .map(|(id, rule)| {
                let v = match rule {
                    CouplingRule::Identity { from } => json!({"rule": "identity", "from": from}),
                    CouplingRule::Sum { a, b } => json!({"rule": "sum", "a": a, "b": b}),
                    CouplingRule::FromVertex { from } => {
                        json!({"rule": "from_vertex", "from": from})
                    }
                };
                (id, v)
            })
            .collect();
        json!({
            "coupling_map": map,
            "vertex_remap": self.vertex_remap,
        })
    }
}

fn add_couplings(a: &CouplingValue, b: &CouplingValue) -> CouplingValue {
    match (a, b) {
        (CouplingValue::Exact(x), CouplingValue::Exact(y)) => CouplingValue::Exact(x + y),
        _ => CouplingValue::Approx(a.to_f64() + b.to_f64()),
    }
}

fn add_lengths(a: &LengthSpec, b: &LengthSpec) -> LengthSpec {
    match (a, b) {
        (LengthSpec::Rational(x), LengthSpec::Rational(y)) => LengthSpec::Rational(x + y),
        _ => LengthSpec::Decimal(a.to_f64() + b.to_f64()),
    }
}

fn unique_id(base: String, taken: &[String]) -> String {
    let mut id = base;
    while taken.iter().any(|t| *t == id) {
        id.push('\'');
    }
    id
}

/// Remove a non-loop edge joining two distinct vertices of the same type,
/// gluing its endpoints. Remaining parallel edges become loops; the merged
/// vertex receives α_V + α_V'.
pub fn trim_same_type_edge(g: &MarkedGraph, edge_id: &str) -> Result<ReductionResult> {
    let e = g.edge_index(edge_id)?;
    let edge = &g.edges()[e];
    if edge.is_loop() {
        return Err(Error::IsLoop(edge_id.to_string()));
    }
    let (u, v) = (edge.u, edge.v);
    if g.vertices()[u].vtype != g.vertices()[v].vtype {
        return Err(Error::NotSameType(edge_id.to_string()));
    }
    let ids: Vec<String> = g.vertices().iter().map(|x| x.id.clone()).collect();
    let merged_id = unique_id(format!("{}+{}", ids[u], ids[v]), &ids);

    // merged vertex takes the slot of the first endpoint in declaration order
    let (keep, drop) = (u.min(v), u.max(v));
    let mut vertices = Vec::new();
    let mut remap_idx = vec![0usize; g.vertices().len()];
    for (i, vx) in g.vertices().iter().enumerate() {
        if i == drop {
            continue;
        }
        remap_idx[i] = vertices.len();
        if i == keep {
            vertices.push(Vertex {
                id: merged_id.clone(),
                vtype: vx.vtype,
            });
        } else {
            vertices.push(vx.clone());
        }
    }
    remap_idx[drop] = remap_idx[keep];

    let mut edges = Vec::new();
    for (i, ed) in g.edges().iter().enumerate() {
        if i == e {
            continue;
        }
        edges.push(Edge {
            id: ed.id.clone(),
            u: remap_idx[ed.u],
            v: remap_idx[ed.v],
            length: ed.length.clone(),
        });
    }
    let graph = MarkedGraph::new(vertices, edges)?;

    let mut coupling_map = BTreeMap::new();
    let mut vertex_remap = BTreeMap::new();
    for (i, vx) in g.vertices().iter().enumerate() {
        let new_id = graph.vertices()[remap_idx[i]].id.clone();
        vertex_remap.insert(vx.id.clone(), new_id);
    }
    for vx in graph.vertices() {
        if vx.id == merged_id {
            coupling_map.insert(
                vx.id.clone(),
                CouplingRule::Sum {
                    a: ids[u].clone(),
                    b: ids[v].clone(),
                },
            );
        } else {
            coupling_map.insert(
                vx.id.clone(),
                CouplingRule::Identity {
                    from: vx.id.clone(),
                },
            );
        }
    }
    Ok(ReductionResult {
        graph,
        coupling_map,
        vertex_remap,
    })
}

/// Remove a loop-carrying vertex together with all its incident edges. The
/// remainder must be a valid (connected, non-empty) graph; its coupling is
/// dropped.
pub fn trim_loop_vertex(g: &MarkedGraph, vertex_id: &str) -> Result<ReductionResult> {
    let v = g.vertex_index(vertex_id)?;
    if g.loops_at(v).is_empty() {
        return Err(Error::NoLoopAtVertex(vertex_id.to_string()));
    }
    let mut vertices = Vec::new();
    let mut remap_idx = vec![usize::MAX; g.vertices().len()];
    for (i, vx) in g.vertices().iter().enumerate() {
        if i == v {
            continue;
        }
        remap_idx[i] = vertices.len();
        vertices.push(vx.clone());
    }
    if vertices.is_empty() {
        return Err(Error::EmptyResult);
    }
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|ed| ed.u != v && ed.v != v)
        .map(|ed| Edge {
            id: ed.id.clone(),
            u: remap_idx[ed.u],
            v: remap_idx[ed.v],
            length: ed.length.clone(),
        })
        .collect();
    let graph = match MarkedGraph::new(vertices, edges) {
        Ok(graph) => graph,
        Err(Error::EmptyGraph) => return Err(Error::EmptyResult),
        Err(Error::DisconnectedGraph) => {
            return Err(Error::WouldDisconnect(vertex_id.to_string()))
        }
        Err(other) => return Err(other),
    };
    let mut coupling_map = BTreeMap::new();
    let mut vertex_remap = BTreeMap::new();
    for vx in graph.vertices() {
        vertex_remap.insert(vx.id.clone(), vx.id.clone());
        coupling_map.insert(
            vx.id.clone(),
            CouplingRule::Identity {
                from: vx.id.clone(),
            },
        );
    }
    Ok(ReductionResult {
        graph,
        coupling_map,
        vertex_remap,
    })
}

/// Cleaning: remove a valence-2 vertex reached by two distinct non-loop
/// edges, concatenating them into one edge of summed length. The operation
/// itself is coupling-agnostic; the 00 condition is the caller's assertion.
pub fn clean_vertex(g: &MarkedGraph, vertex_id: &str) -> Result<ReductionResult> {
    let v = g.vertex_index(vertex_id)?;
    if !g.loops_at(v).is_empty() {
        return Err(Error::LoopAtVertex(vertex_id.to_string()));
    }
    let incident = g.incident_non_loops(v);
    if incident.len() != 2 || g.degree(v) != 2 {
        return Err(Error::WrongValence(vertex_id.to_string()));
    }
    let (e1, e2) = (&g.edges()[incident[0]], &g.edges()[incident[1]]);
    let a = e1.other(v);
    let b = e2.other(v);
    let edge_ids: Vec<String> = g.edges().iter().map(|e| e.id.clone()).collect();
    let new_edge_id = unique_id(format!("{}+{}", e1.id, e2.id), &edge_ids);
    let new_length = add_lengths(&e1.length, &e2.length);

    let mut vertices = Vec::new();
    let mut remap_idx = vec![usize::MAX; g.vertices().len()];
    for (i, vx) in g.vertices().iter().enumerate() {
        if i == v {
            continue;
        }
        remap_idx[i] = vertices.len();
        vertices.push(vx.clone());
    }
    let mut edges = Vec::new();
    for (i, ed) in g.edges().iter().enumerate() {
        if i == incident[0] || i == incident[1] {
            continue;
        }
        edges.push(Edge {
            id: ed.id.clone(),
            u: remap_idx[ed.u],
            v: remap_idx[ed.v],
            length: ed.length.clone(),
        });
    }
    // parallel incident edges (a == b) degenerate to a loop at the shared
    // endpoint, which Edge models with u == v
    edges.push(Edge {
        id: new_edge_id,
        u: remap_idx[a],
        v: remap_idx[b],
        length: new_length,
    });
    let graph = MarkedGraph::new(vertices, edges)?;
    let mut coupling_map = BTreeMap::new();
    let mut vertex_remap = BTreeMap::new();
    for vx in graph.vertices() {
        vertex_remap.insert(vx.id.clone(), vx.id.clone());
        coupling_map.insert(
            vx.id.clone(),
            CouplingRule::Identity {
                from: vx.id.clone(),
            },
        );
    }
    Ok(ReductionResult {
        graph,
        coupling_map,
        vertex_remap,
    })
}

// ---------------------------------------------------------------------------
// Quasigraphs
// ---------------------------------------------------------------------------

/// Direction of a mixed-edge removal: which endpoint survives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiVertexKind {
    /// The δ' endpoint is moved into the δ endpoint.
    DeltaPrimeToDelta,
    /// The δ endpoint is moved into the δ' endpoint.
    DeltaToDeltaPrime,
}

/// Role of an edge within a quasigraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiEdgeRole {
    /// Untouched mixed edge of the original graph.
    Regular,
    /// Former edge of the eliminated vertex, now incident to the quasivertex.
    QuasiEdge,
    /// Ordinary loop (at the quasivertex these come from the survivor).
    Loop,
    /// Parallel copy of the removed edge, now a quasiloop (set L̂).
    QuasiLoopMulti,
    /// Loop inherited from the eliminated vertex (set L̂').
    QuasiLoopFromLoop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuasiVertexType {
    Regular(VertexType),
    Quasi(QuasiVertexKind),
}

#[derive(Debug, Clone)]
pub struct QuasiVertex {
    pub id: String,
    pub vtype: QuasiVertexType,
}

#[derive(Debug, Clone)]
pub struct QuasiEdgeBinding {
    pub id: String,
    pub u: usize,
    pub v: usize,
    pub length: LengthSpec,
    pub role: QuasiEdgeRole,
}

/// Result of removing exactly one mixed edge: the two endpoints glued into a
/// single quasivertex. The procedure is never iterated.
#[derive(Debug, Clone)]
pub struct QuasiGraph {
    pub vertices: Vec<QuasiVertex>,
    pub quasivertex: usize,
    pub kind: QuasiVertexKind,
    pub edges: Vec<QuasiEdgeBinding>,
    /// Old vertex id → new vertex index (both glued endpoints map to the
    /// quasivertex).
    pub vertex_remap: BTreeMap<String, usize>,
    pub removed_edge: String,
}

impl QuasiGraph {
    /// δ vertices and δ'→δ quasivertices take μ-scaled rows; the rest take
    /// 1/μ-scaled rows.
    pub fn is_delta_like(&self, k: usize) -> bool {
        match &self.vertices[k].vtype {
            QuasiVertexType::Regular(VertexType::Delta) => true,
            QuasiVertexType::Regular(VertexType::DeltaPrime) => false,
            QuasiVertexType::Quasi(QuasiVertexKind::DeltaPrimeToDelta) => true,
            QuasiVertexType::Quasi(QuasiVertexKind::DeltaToDeltaPrime) => false,
        }
    }

    pub fn quasiedges(&self) -> impl Iterator<Item = &QuasiEdgeBinding> {
        self.edges
            .iter()
            .filter(|e| e.role == QuasiEdgeRole::QuasiEdge)
    }

    pub fn quasiloops(&self) -> impl Iterator<Item = &QuasiEdgeBinding> {
        self.edges.iter().filter(|e| {
            matches!(
                e.role,
                QuasiEdgeRole::QuasiLoopMulti | QuasiEdgeRole::QuasiLoopFromLoop
            )
        })
    }

    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .map(|v| {
                let vtype = match &v.vtype {
                    QuasiVertexType::Regular(VertexType::Delta) => "delta",
                    QuasiVertexType::Regular(VertexType::DeltaPrime) => "delta'",
                    QuasiVertexType::Quasi(QuasiVertexKind::DeltaPrimeToDelta) => "delta'->delta",
                    QuasiVertexType::Quasi(QuasiVertexKind::DeltaToDeltaPrime) => "delta->delta'",
                };
                json!({"id": v.id, "type": vtype})
            })
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                let role = match e.role {
                    QuasiEdgeRole::Regular => "edge",
                    QuasiEdgeRole::QuasiEdge => "quasiedge",
                    QuasiEdgeRole::Loop => "loop",
                    QuasiEdgeRole::QuasiLoopMulti => "quasiloop_multi",
                    QuasiEdgeRole::QuasiLoopFromLoop => "quasiloop_from_loop",
                };
                json!({
                    "id": e.id,
                    "u": self.vertices[e.u].id,
                    "v": self.vertices[e.v].id,
                    "length": e.length.to_string(),
                    "role": role,
                })
            })
            .collect();
        json!({
            "removed_edge": self.removed_edge,
            "quasivertex": self.vertices[self.quasivertex].id,
            "vertices": vertices,
            "edges": edges,
        })
    }
}

/// Remove one mixed edge, gluing its endpoints into a quasivertex of the
/// requested direction. Parallel copies of the removed edge become
/// quasiloops (L̂); loops at the eliminated vertex become quasiloops (L̂');
/// other edges at the eliminated vertex become quasiedges.
pub fn quasi_remove_mixed_edge(
    g: &MarkedGraph,
    edge_id: &str,
    kind: QuasiVertexKind,
) -> Result<QuasiGraph> {
    let e = g.edge_index(edge_id)?;
    let edge = &g.edges()[e];
    if edge.is_loop() {
        return Err(Error::IsLoop(edge_id.to_string()));
    }
    let (tu, tv) = (g.vertices()[edge.u].vtype, g.vertices()[edge.v].vtype);
    if tu == tv {
        return Err(Error::NotMixedEdge(edge_id.to_string()));
    }
    let (delta_end, prime_end) = if tu == VertexType::Delta {
        (edge.u, edge.v)
    } else {
        (edge.v, edge.u)
    };
    let (survivor, eliminated) = match kind {
        QuasiVertexKind::DeltaPrimeToDelta => (delta_end, prime_end),
        QuasiVertexKind::DeltaToDeltaPrime => (prime_end, delta_end),
    };

    let ids: Vec<String> = g.vertices().iter().map(|x| x.id.clone()).collect();
    let quasi_id = unique_id(
        format!("{}~{}", ids[survivor], ids[eliminated]),
        &ids,
    );
    let mut vertices = Vec::new();
    let mut remap_idx = vec![usize::MAX; g.vertices().len()];
    for (i, vx) in g.vertices().iter().enumerate() {
        if i == eliminated {
            continue;
        }
        remap_idx[i] = vertices.len();
        if i == survivor {
            vertices.push(QuasiVertex {
                id: quasi_id.clone(),
                vtype: QuasiVertexType::Quasi(kind),
            });
        } else {
            vertices.push(QuasiVertex {
                id: vx.id.clone(),
                vtype: QuasiVertexType::Regular(vx.vtype),
            });
        }
    }
    remap_idx[eliminated] = remap_idx[survivor];
    let quasivertex = remap_idx[survivor];

    let mut edges = Vec::new();
    for (i, ed) in g.edges().iter().enumerate() {
        if i == e {
            continue;
        }
        let touches_elim = ed.u == eliminated || ed.v == eliminated;
        let touches_surv = ed.u == survivor || ed.v == survivor;
        let role = if ed.is_loop() {
            if ed.u == eliminated {
                QuasiEdgeRole::QuasiLoopFromLoop
            } else {
                QuasiEdgeRole::Loop
            }
        } else if touches_elim && touches_surv {
            QuasiEdgeRole::QuasiLoopMulti
        } else if touches_elim {
            QuasiEdgeRole::QuasiEdge
        } else {
            QuasiEdgeRole::Regular
        };
        edges.push(QuasiEdgeBinding {
            id: ed.id.clone(),
            u: remap_idx[ed.u],
            v: remap_idx[ed.v],
            length: ed.length.clone(),
            role,
        });
    }
    let vertex_remap = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, vx)| (vx.id.clone(), remap_idx[i]))
        .collect();
    Ok(QuasiGraph {
        vertices,
        quasivertex,
        kind,
        edges,
        vertex_remap,
        removed_edge: edge_id.to_string(),
    })
}

/// The 00-endpoint reduction: remove a mixed edge whose designated endpoint
/// has α = α̃ = 0, then regularize the quasivertex. Case (i) needs the δ'
/// endpoint doubly zero and yields a δ vertex with the coupling from the δ
/// endpoint; case (ii) is the mirror image. Both zero couplings are dropped.
pub fn thm00_reduce(
    g: &MarkedGraph,
    edge_id: &str,
    alpha: &CouplingVector,
    alpha2: &CouplingVector,
) -> Result<(ReductionResult, CouplingVector, CouplingVector)> {
    let e = g.edge_index(edge_id)?;
    let edge = &g.edges()[e];
    if edge.is_loop() {
        return Err(Error::IsLoop(edge_id.to_string()));
    }
    let (tu, tv) = (g.vertices()[edge.u].vtype, g.vertices()[edge.v].vtype);
    if tu == tv {
        return Err(Error::NotMixedEdge(edge_id.to_string()));
    }
    let (delta_end, prime_end) = if tu == VertexType::Delta {
        (edge.u, edge.v)
    } else {
        (edge.v, edge.u)
    };
    let doubly_zero =
        |v: usize| -> bool { alpha.get(v).is_zero() && alpha2.get(v).is_zero() };
    let kind = if doubly_zero(prime_end) {
        QuasiVertexKind::DeltaPrimeToDelta
    } else if doubly_zero(delta_end) {
        QuasiVertexKind::DeltaToDeltaPrime
    } else {
        return Err(Error::EndpointNotDoublyZero(
            g.vertices()[prime_end].id.clone(),
        ));
    };
    let q = quasi_remove_mixed_edge(g, edge_id, kind)?;
    let survivor = match kind {
        QuasiVertexKind::DeltaPrimeToDelta => delta_end,
        QuasiVertexKind::DeltaToDeltaPrime => prime_end,
    };
    let new_type = match kind {
        QuasiVertexKind::DeltaPrimeToDelta => VertexType::Delta,
        QuasiVertexKind::DeltaToDeltaPrime => VertexType::DeltaPrime,
    };

    let vertices: Vec<Vertex> = q
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| Vertex {
            id: v.id.clone(),
            vtype: if i == q.quasivertex {
                new_type
            } else {
                match v.vtype {
                    QuasiVertexType::Regular(t) => t,
                    QuasiVertexType::Quasi(_) => unreachable!("only one quasivertex"),
                }
            },
        })
        .collect();
    let edges: Vec<Edge> = q
        .edges
        .iter()
        .map(|e| Edge {
            id: e.id.clone(),
            u: e.u,
            v: e.v,
            length: e.length.clone(),
        })
        .collect();
    let graph = MarkedGraph::new(vertices, edges)?;

    let mut coupling_map = BTreeMap::new();
    let mut vertex_remap = BTreeMap::new();
    for (old_id, &new_idx) in &q.vertex_remap {
        if *old_id == g.vertices()[eliminated_of(&q, g)].id {
            continue;
        }
        vertex_remap.insert(old_id.clone(), graph.vertices()[new_idx].id.clone());
    }
    for (i, vx) in graph.vertices().iter().enumerate() {
        let rule = if i == q.quasivertex {
            CouplingRule::FromVertex {
                from: g.vertices()[survivor].id.clone(),
            }
        } else {
            CouplingRule::Identity {
                from: vx.id.clone(),
            }
        };
        coupling_map.insert(vx.id.clone(), rule);
    }
    let result = ReductionResult {
        graph,
        coupling_map,
        vertex_remap,
    };
    let new_alpha = result.apply(g, alpha)?;
    let new_alpha2 = result.apply(g, alpha2)?;
    Ok((result, new_alpha, new_alpha2))
}

fn eliminated_of(q: &QuasiGraph, g: &MarkedGraph) -> usize {
    // the vertex whose id is absent from the quasigraph vertex list
    g.vertices()
        .iter()
        .enumerate()
        .find(|(_, vx)| !q.vertices.iter().any(|qv| qv.id == vx.id))
        .map(|(i, _)| i)
        .expect("one vertex is eliminated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;

    fn parse(text: &str) -> MarkedGraph {
        MarkedGraph::parse(text).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn four_cycle() -> MarkedGraph {
        parse(
            "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\nvertex V4 delta\n\
             edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\nedge e41 V4 V1 sqrt(5)\n",
        )
    }

    #[test]
    fn trim_four_cycle_edge() {
        let g = four_cycle();
        let r = trim_same_type_edge(&g, "e12").unwrap();
        assert_eq!(r.graph.vertices().len(), 3);
        assert_eq!(r.graph.edges().len(), 3);
        assert_eq!(r.graph.vertices()[0].id, "V1+V2");
        let alpha = CouplingVector::from_i64s(&[1, -1, 1, -1]);
        let reduced = r.apply(&g, &alpha).unwrap();
        assert!(reduced.get(0).is_zero()); // α1 + α2 = 0
        assert_eq!(reduced.get(1).to_f64(), 1.0);
    }

    #[test]
    fn trim_double_edge_leaves_loop() {
        let g = parse("vertex a delta\nvertex b delta\nedge e a b 1\nedge f a b sqrt(2)\n");
        let r = trim_same_type_edge(&g, "e").unwrap();
        assert_eq!(r.graph.vertices().len(), 1);
        assert_eq!(r.graph.edges().len(), 1);
        assert!(r.graph.edges()[0].is_loop());
        assert_eq!(r.graph.edges()[0].id, "f");
    }

    #[test]
    fn trim_rejects_mixed_edge() {
        let g = parse("vertex a delta\nvertex b delta'\nedge e a b 1\n");
        assert!(matches!(
            trim_same_type_edge(&g, "e"),
            Err(Error::NotSameType(_))
        ));
    }

    #[test]
    fn trim_loop_vertex_on_cycle() {
        let g = parse(
            "vertex a delta\nvertex b delta\nvertex c delta\n\
             edge e1 a b 1\nedge e2 b c sqrt(2)\nedge e3 c a sqrt(3)\nedge l a a sqrt(5)\n",
        );
        let r = trim_loop_vertex(&g, "a").unwrap();
        assert_eq!(r.graph.vertices().len(), 2);
        assert_eq!(r.graph.edges().len(), 1);
    }

    #[test]
    fn trim_loop_vertex_error_cases() {
        let g = parse("vertex a delta\nvertex b delta\nedge e a b 1\nedge l a a sqrt(2)\n");
        // removing `a` leaves an edgeless single vertex
        assert!(matches!(trim_loop_vertex(&g, "a"), Err(Error::EmptyResult)));
        assert!(matches!(
            trim_loop_vertex(&g, "b"),
            Err(Error::NoLoopAtVertex(_))
        ));
        // loop at the cut vertex of a bowtie: the remainder splits
        let bowtie = parse(
            "vertex a delta\nvertex b delta\nvertex v delta\nvertex c delta\nvertex d delta\n\
             edge e1 a b 1\nedge e2 b v sqrt(2)\nedge e3 v a sqrt(3)\n\
             edge e4 v c sqrt(5)\nedge e5 c d sqrt(6)\nedge e6 d v sqrt(7)\nedge l v v sqrt(10)\n",
        );
        assert!(matches!(
            trim_loop_vertex(&bowtie, "v"),
            Err(Error::WouldDisconnect(_))
        ));
    }

    #[test]
    fn clean_middle_vertex_sums_lengths() {
        let g = parse(
            "vertex a delta\nvertex b delta\nvertex c delta\n\
             edge e1 a b 1/2\nedge e2 b c 1/3\n",
        );
        let r = clean_vertex(&g, "b").unwrap();
        assert_eq!(r.graph.vertices().len(), 2);
        assert_eq!(r.graph.edges().len(), 1);
        assert_eq!(r.graph.edges()[0].length, LengthSpec::Rational(rat(5, 6)));
    }

    #[test]
    fn clean_rejects_wrong_valence_and_loops() {
        let star = parse(
            "vertex c delta\nvertex r1 delta\nvertex r2 delta\nvertex r3 delta\n\
             edge e1 c r1 1\nedge e2 c r2 sqrt(2)\nedge e3 c r3 sqrt(3)\n",
        );
        assert!(matches!(
            clean_vertex(&star, "c"),
            Err(Error::WrongValence(_))
        ));
        let looped = parse("vertex a delta\nvertex b delta\nedge e a b 1\nedge l a a sqrt(2)\n");
        assert!(matches!(
            clean_vertex(&looped, "a"),
            Err(Error::LoopAtVertex(_))
        ));
    }

    #[test]
    fn clean_parallel_pair_becomes_loop() {
        let g = parse(
            "vertex a delta\nvertex b delta\nvertex c delta\n\
             edge e1 a b 1\nedge p1 b c sqrt(2)\nedge p2 b c sqrt(3)\n",
        );
        let r = clean_vertex(&g, "c").unwrap();
        let loop_edge = r
            .graph
            .edges()
            .iter()
            .find(|e| e.id == "p1+p2")
            .expect("merged edge present");
        assert!(loop_edge.is_loop());
    }

    #[test]
    fn quasi_removal_a3() {
        // A3 chain; remove e23 toward the δ endpoint V3
        let g = parse(
            "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\n\
             edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n",
        );
        let q = quasi_remove_mixed_edge(&g, "e23", QuasiVertexKind::DeltaPrimeToDelta).unwrap();
        assert_eq!(q.vertices.len(), 2);
        assert_eq!(q.vertices[q.quasivertex].id, "V3~V2");
        let qe: Vec<_> = q.quasiedges().collect();
        assert_eq!(qe.len(), 1);
        assert_eq!(qe[0].id, "e12");
        assert_eq!(q.quasiloops().count(), 0);
    }

    #[test]
    fn quasi_removal_double_edge_and_loop() {
        let g = parse(
            "vertex a delta\nvertex b delta'\n\
             edge e a b 1\nedge f a b sqrt(2)\nedge l b b sqrt(3)\n",
        );
        let q = quasi_remove_mixed_edge(&g, "e", QuasiVertexKind::DeltaPrimeToDelta).unwrap();
        let roles: Vec<QuasiEdgeRole> = q.edges.iter().map(|e| e.role).collect();
        assert!(roles.contains(&QuasiEdgeRole::QuasiLoopMulti));
        assert!(roles.contains(&QuasiEdgeRole::QuasiLoopFromLoop));
    }

    #[test]
    fn quasi_removal_requires_mixed_edge() {
        let g = parse("vertex a delta\nvertex b delta\nedge e a b 1\n");
        assert!(matches!(
            quasi_remove_mixed_edge(&g, "e", QuasiVertexKind::DeltaPrimeToDelta),
            Err(Error::NotMixedEdge(_))
        ));
    }

    #[test]
    fn thm00_case_i_reduces_a3() {
        let g = parse(
            "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\n\
             edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n",
        );
        // δ' endpoint V2 doubly zero
        let alpha = CouplingVector::from_i64s(&[5, 0, 7]);
        let alpha2 = CouplingVector::from_i64s(&[5, 0, -7]);
        let (r, a, b) = thm00_reduce(&g, "e23", &alpha, &alpha2).unwrap();
        assert_eq!(r.graph.vertices().len(), 2);
        // quasivertex regularized as δ with V3's coupling
        let merged = r.graph.vertex_index("V3~V2").unwrap();
        assert_eq!(r.graph.vertices()[merged].vtype, VertexType::Delta);
        assert_eq!(a.get(merged).to_f64(), 7.0);
        assert_eq!(b.get(merged).to_f64(), -7.0);
        // resulting edge is δ–δ (mixed structure reduced)
        assert_eq!(r.graph.edges().len(), 1);
    }

    #[test]
    fn thm00_requires_doubly_zero_endpoint() {
        let g = parse(
            "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\n\
             edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n",
        );
        let alpha = CouplingVector::from_i64s(&[5, 0, 7]);
        let alpha2 = CouplingVector::from_i64s(&[5, 1, -7]);
        assert!(matches!(
            thm00_reduce(&g, "e23", &alpha, &alpha2),
            Err(Error::EndpointNotDoublyZero(_))
        ));
    }

    #[test]
    fn thm00_structure_matches_quasigraph() {
        let g = parse(
            "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\n\
             edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n",
        );
        let alpha = CouplingVector::from_i64s(&[5, 0, 7]);
        let (r, _, _) = thm00_reduce(&g, "e23", &alpha, &alpha).unwrap();
        let q = quasi_remove_mixed_edge(&g, "e23", QuasiVertexKind::DeltaPrimeToDelta).unwrap();
        assert_eq!(r.graph.vertices().len(), q.vertices.len());
        assert_eq!(r.graph.edges().len(), q.edges.len());
        for (ge, qe) in r.graph.edges().iter().zip(&q.edges) {
            assert_eq!(ge.id, qe.id);
            assert_eq!((ge.u, ge.v), (qe.u, qe.v));
        }
    }

    #[test]
    fn reduction_graphs_revalidate_and_remap_is_onto() {
        let g = four_cycle();
        for e in ["e12", "e23", "e34", "e41"] {
            let r = trim_same_type_edge(&g, e).unwrap();
            let reparsed = MarkedGraph::parse(&r.graph.to_text()).unwrap();
            assert_eq!(reparsed, r.graph);
            for vx in r.graph.vertices() {
                assert!(r.vertex_remap.values().any(|id| id == &vx.id));
                assert!(r.coupling_map.contains_key(&vx.id));
            }
        }
    }
}
