//! Marked metric graphs: the data model, file format, and the combinatorial
//! utilities (degrees, edge classification, admissible markings) the rest of
//! the toolkit builds on.
//!
//! A graph is a finite connected multigraph with strictly positive edge
//! lengths and every vertex marked `delta` or `delta'`. Loops and multiple
//! edges are first-class. Vertex declaration order is significant: it fixes
//! the row order of every matrix built from the graph.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexType {
    Delta,
    DeltaPrime,
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexType::Delta => write!(f, "delta"),
            VertexType::DeltaPrime => write!(f, "delta'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub vtype: VertexType,
}

/// Edge length as written in the graph file. The literal form is kept so
/// serialization round-trips and rational lengths stay exact.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthSpec {
    Rational(BigRational),
    Sqrt(u64),
    Decimal(f64),
}

impl LengthSpec {
    pub fn to_f64(&self) -> f64 {
        match self {
            LengthSpec::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            LengthSpec::Sqrt(n) => (*n as f64).sqrt(),
            LengthSpec::Decimal(d) => *d,
        }
    }

    fn parse(tok: &str) -> Option<LengthSpec> {
        if let Some(rest) = tok.strip_prefix("sqrt(") {
            let inner = rest.strip_suffix(')')?;
            return inner.parse::<u64>().ok().map(LengthSpec::Sqrt);
        }
        if tok.contains('/') {
            return parse_rational(tok).map(LengthSpec::Rational);
        }
        if !tok.contains('.') {
            if let Ok(int) = tok.parse::<i64>() {
                return Some(LengthSpec::Rational(BigRational::from_integer(int.into())));
            }
        }
        tok.parse::<f64>().ok().map(LengthSpec::Decimal)
    }
}

impl fmt::Display for LengthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthSpec::Rational(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            LengthSpec::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            LengthSpec::Sqrt(n) => write!(f, "sqrt({n})"),
            LengthSpec::Decimal(d) => write!(f, "{d}"),
        }
    }
}

/// Parse `p/q` or a plain integer into an exact rational.
pub fn parse_rational(tok: &str) -> Option<BigRational> {
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n, d),
        None => (tok, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    /// Endpoint indices into the graph's vertex list; `u == v` is a loop.
    pub u: usize,
    pub v: usize,
    pub length: LengthSpec,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint other than `w`, for non-loop edges.
    pub fn other(&self, w: usize) -> usize {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// Partition of the edge set by the endpoint type pattern.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeClassification {
    /// Non-loop edges joining vertices of the same type.
    pub c: Vec<usize>,
    /// Non-loop edges joining vertices of different types.
    pub c_prime: Vec<usize>,
    /// Loops at delta vertices.
    pub loops_delta: Vec<usize>,
    /// Loops at delta' vertices.
    pub loops_delta_prime: Vec<usize>,
}

/// Admissible marking of vertices by incident edges (one edge per vertex).
#[derive(Debug, Clone, PartialEq)]
pub struct Marking {
    pub marks: BTreeMap<String, String>,
    /// True exactly in the tree case, where one edge is doubly marked.
    pub is_maximal_tree_marking: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    vertex_ids: HashMap<String, usize>,
    edge_ids: HashMap<String, usize>,
}

impl MarkedGraph {
    /// Build and validate a graph from parts. Vertex order is preserved.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        let mut vertex_ids = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_ids.insert(v.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(v.id.clone()));
            }
        }
        let mut edge_ids = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            if edge_ids.insert(e.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            if e.u >= vertices.len() || e.v >= vertices.len() {
                return Err(Error::UnknownVertexRef {
                    edge: e.id.clone(),
                    vertex: format!("#{}", e.u.max(e.v)),
                });
            }
            if !(e.length.to_f64() > 0.0) {
                return Err(Error::NonPositiveLength(e.id.clone()));
            }
        }
        let g = MarkedGraph {
            vertices,
            edges,
            vertex_ids,
            edge_ids,
        };
        if g.vertices.is_empty() || g.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if !g.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(g)
    }

    /// Parse the line-oriented graph file format:
    ///
    /// ```text
    /// vertex <id> <delta|delta'>
    /// edge <id> <u> <v> <length>     # length: decimal | p/q | sqrt(n)
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut edges: Vec<(String, String, String, LengthSpec)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let lineno = lineno + 1;
            match toks[0] {
                "vertex" => {
                    if toks.len() != 3 {
                        return Err(Error::Syntax(
                            lineno,
                            "expected `vertex <id> <delta|delta'>`".into(),
                        ));
                    }
                    let vtype = match toks[2] {
                        "delta" => VertexType::Delta,
                        "delta'" => VertexType::DeltaPrime,
                        other => {
                            return Err(Error::Syntax(
                                lineno,
                                format!("unknown vertex type `{other}`"),
                            ))
                        }
                    };
                    vertices.push(Vertex {
                        id: toks[1].to_string(),
                        vtype,
                    });
                }
                "edge" => {
                    if toks.len() != 5 {
                        return Err(Error::Syntax(
                            lineno,
                            "expected `edge <id> <u> <v> <length>`".into(),
                        ));
                    }
                    let length = LengthSpec::parse(toks[4]).ok_or_else(|| {
                        Error::Syntax(lineno, format!("bad length literal `{}`", toks[4]))
                    })?;
                    edges.push((
                        toks[1].to_string(),
                        toks[2].to_string(),
                        toks[3].to_string(),
                        length,
                    ));
                }
                other => {
                    return Err(Error::Syntax(
                        lineno,
                        format!("unknown directive `{other}`"),
                    ))
                }
            }
        }
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let mut resolved = Vec::new();
        for (id, u, v, length) in edges {
            let ui = *index.get(u.as_str()).ok_or_else(|| Error::UnknownVertexRef {
                edge: id.clone(),
                vertex: u.clone(),
            })?;
            let vi = *index.get(v.as_str()).ok_or_else(|| Error::UnknownVertexRef {
                edge: id.clone(),
                vertex: v.clone(),
            })?;
            resolved.push(Edge {
                id,
                u: ui,
                v: vi,
                length,
            });
        }
        MarkedGraph::new(vertices, resolved)
    }

    /// Serialize in the file format; `parse(to_text(g)) == g`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("vertex {} {}\n", v.id, v.vtype));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {} {}\n",
                e.id, self.vertices[e.u].id, self.vertices[e.v].id, e.length
            ));
        }
        out
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.vertex_ids
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edge_ids
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    /// Valence: number of edge endpoints at `v`; a loop contributes 2.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.u == v) as usize + (e.v == v) as usize)
            .sum()
    }

    pub fn degree_by_id(&self, id: &str) -> Result<usize> {
        Ok(self.degree(self.vertex_index(id)?))
    }

    /// Indices of non-loop edges incident to `v`.
    pub fn incident_non_loops(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_loop() && (e.u == v || e.v == v))
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of loops attached to `v`.
    pub fn loops_at(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_loop() && e.u == v)
            .map(|(i, _)| i)
            .collect()
    }

    /// Non-loop edges between the distinct vertices `u` and `v`.
    pub fn edges_between(&self, u: usize, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_loop() && ((e.u == u && e.v == v) || (e.u == v && e.v == u)))
            .map(|(i, _)| i)
            .collect()
    }

    /// Distinct neighbors of `v` through non-loop edges.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for e in &self.edges {
            if e.is_loop() {
                continue;
            }
            let w = if e.u == v {
                e.v
            } else if e.v == v {
                e.u
            } else {
                continue;
            };
            if seen.insert(w) {
                out.push(w);
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                for w in [e.u, e.v] {
                    let o = e.other(w);
                    if w == v && !seen[o] {
                        seen[o] = true;
                        queue.push_back(o);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Partition of the edge set per the four classes C, C', L, L'.
    /// A loop has both endpoints at one vertex, so mixed loops cannot occur.
    pub fn classify_edges(&self) -> EdgeClassification {
        let mut cls = EdgeClassification::default();
        for (i, e) in self.edges.iter().enumerate() {
            let tu = self.vertices[e.u].vtype;
            let tv = self.vertices[e.v].vtype;
            if e.is_loop() {
                match tu {
                    VertexType::Delta => cls.loops_delta.push(i),
                    VertexType::DeltaPrime => cls.loops_delta_prime.push(i),
                }
            } else if tu == tv {
                cls.c.push(i);
            } else {
                cls.c_prime.push(i);
            }
        }
        cls
    }

    /// True when every non-loop edge joins vertices of different types.
    pub fn all_edges_mixed(&self) -> bool {
        let cls = self.classify_edges();
        cls.c.is_empty()
    }

    /// BFS spanning tree from `root`: returns `parent_edge[v]` (edge index
    /// used to reach `v`), `None` at the root, ignoring edges in `skip`.
    fn bfs_tree(&self, root: usize, skip: Option<usize>) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (i, e) in self.edges.iter().enumerate() {
                if Some(i) == skip || e.is_loop() {
                    continue;
                }
                let w = if e.u == v {
                    e.v
                } else if e.v == v {
                    e.u
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(i);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// True when the multigraph is a tree (no loops, no cycles).
    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.vertices.len() - 1 && self.edges.iter().all(|e| !e.is_loop())
    }

    /// Admissible marking of vertices by incident edges: no non-loop edge
    /// carries both endpoint marks, except exactly one in the tree case.
    ///
    /// Non-tree graphs get a marking over pairwise-distinct edges; trees get
    /// the maximal marking whose doubly-marked edge is the first edge
    /// incident to `root`.
    pub fn admissible_marking(&self, root: &str) -> Result<Marking> {
        let root = self.vertex_index(root)?;
        let n = self.vertices.len();
        if self.is_tree() {
            let parent = self.bfs_tree(root, None);
            let root_edge = self
                .incident_non_loops(root)
                .into_iter()
                .next()
                .expect("connected tree vertex has an incident edge");
            let mut marks = BTreeMap::new();
            for v in 0..n {
                let e = parent[v].unwrap_or(root_edge);
                marks.insert(self.vertices[v].id.clone(), self.edges[e].id.clone());
            }
            return Ok(Marking {
                marks,
                is_maximal_tree_marking: true,
            });
        }
        // Not a tree: some edge lies outside a spanning tree, hence on a
        // cycle (or is a loop); marking its endpoint with it is admissible.
        let parent = self.bfs_tree(root, None);
        let tree_edges: HashSet<usize> = parent.iter().flatten().copied().collect();
        let extra = (0..self.edges.len())
            .find(|i| !tree_edges.contains(i))
            .expect("non-tree graph has a non-tree edge");
        let anchor = self.edges[extra].u;
        let parent = self.bfs_tree(anchor, Some(extra));
        let mut marks = BTreeMap::new();
        for v in 0..n {
            let e = if v == anchor {
                extra
            } else {
                parent[v].expect("graph stays connected without a cycle edge")
            };
            marks.insert(self.vertices[v].id.clone(), self.edges[e].id.clone());
        }
        Ok(Marking {
            marks,
            is_maximal_tree_marking: false,
        })
    }

    /// Brute-force search for small integer relations between edge lengths:
    /// all k with |k_i| <= bound and |sum k_i l_i| < 1e-9 * sum |k_i| l_i.
    /// An empty result is evidence, not proof, of rational independence.
    pub fn rational_independence_heuristic(&self, bound: i64) -> Vec<Vec<i64>> {
        let lengths: Vec<f64> = self.edges.iter().map(|e| e.length.to_f64()).collect();
        let mut hits = Vec::new();
        let mut k = vec![-bound; lengths.len()];
        'outer: loop {
            // skip the zero vector and sign duplicates (first nonzero > 0)
            if let Some(first) = k.iter().find(|&&x| x != 0) {
                if *first > 0 {
                    let dot: f64 = k.iter().zip(&lengths).map(|(&a, &l)| a as f64 * l).sum();
                    let scale: f64 = k
                        .iter()
                        .zip(&lengths)
                        .map(|(&a, &l)| (a as f64).abs() * l)
                        .sum();
                    if dot.abs() < 1e-9 * scale {
                        hits.push(k.clone());
                    }
                }
            }
            for i in 0..k.len() {
                if k[i] < bound {
                    k[i] += 1;
                    continue 'outer;
                }
                k[i] = -bound;
            }
            break;
        }
        hits
    }
}

// ---------------------------------------------------------------------------
// Coupling vectors
// ---------------------------------------------------------------------------

/// A coupling constant: exact when written as an integer or `p/q`, binary
/// float otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingValue {
    Exact(BigRational),
    Approx(f64),
}

impl CouplingValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            CouplingValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            CouplingValue::Approx(d) => *d,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CouplingValue::Exact(r) => r.is_zero(),
            CouplingValue::Approx(d) => *d == 0.0,
        }
    }
}

impl fmt::Display for CouplingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingValue::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            CouplingValue::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            CouplingValue::Approx(d) => write!(f, "{d}"),
        }
    }
}

/// One coupling constant per vertex, aligned with the graph's vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingVector {
    values: Vec<CouplingValue>,
}

impl CouplingVector {
    pub fn new(values: Vec<CouplingValue>) -> Self {
        CouplingVector { values }
    }

    pub fn from_rationals(values: Vec<BigRational>) -> Self {
        CouplingVector {
            values: values.into_iter().map(CouplingValue::Exact).collect(),
        }
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        CouplingVector::from_rationals(
            values
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Self {
        CouplingVector::from_rationals(vec![BigRational::zero(); n])
    }

    /// Parse a coupling file (`coupling <vertex-id> <rational-or-decimal>`),
    /// requiring exactly one line per graph vertex.
    pub fn parse(text: &str, graph: &MarkedGraph) -> Result<Self> {
        let mut values: Vec<Option<CouplingValue>> = vec![None; graph.vertices().len()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "coupling" {
                return Err(Error::Syntax(
                    lineno,
                    "expected `coupling <vertex-id> <value>`".into(),
                ));
            }
            let idx = graph.vertex_index(toks[1])?;
            let value = if toks[2].contains('.') || toks[2].contains('e') || toks[2].contains('E')
            {
                CouplingValue::Approx(toks[2].parse::<f64>().map_err(|_| {
                    Error::Syntax(lineno, format!("bad coupling literal `{}`", toks[2]))
                })?)
            } else {
                CouplingValue::Exact(parse_rational(toks[2]).ok_or_else(|| {
                    Error::Syntax(lineno, format!("bad coupling literal `{}`", toks[2]))
                })?)
            };
            if values[idx].replace(value).is_some() {
                return Err(Error::DuplicateId(toks[1].to_string()));
            }
        }
        let mut out = Vec::with_capacity(values.len());
        for (i, v) in values.into_iter().enumerate() {
            out.push(v.ok_or_else(|| Error::MissingCoupling(graph.vertices()[i].id.clone()))?);
        }
        Ok(CouplingVector { values: out })
    }

    pub fn to_text(&self, graph: &MarkedGraph) -> String {
        self.values
            .iter()
            .zip(graph.vertices())
            .map(|(c, v)| format!("coupling {} {}\n", v.id, c))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: usize) -> &CouplingValue {
        &self.values[idx]
    }

    pub fn values(&self) -> &[CouplingValue] {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        self.values
            .iter()
            .all(|v| matches!(v, CouplingValue::Exact(_)))
    }

    /// Exact rationals for all entries. Approximate entries are rationalized
    /// by continued fractions with the given denominator cap; the returned
    /// flag is true when any entry needed that treatment.
    pub fn rationalized(&self, max_denominator: u64) -> (Vec<BigRational>, bool) {
        let mut approximate = false;
        let values = self
            .values
            .iter()
            .map(|v| match v {
                CouplingValue::Exact(r) => r.clone(),
                CouplingValue::Approx(d) => {
                    approximate = true;
                    rationalize(*d, max_denominator)
                }
            })
            .collect();
        (values, approximate)
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }

    /// Number of zero couplings at vertices of the given type.
    pub fn zero_count(&self, graph: &MarkedGraph, vtype: VertexType) -> usize {
        self.values
            .iter()
            .zip(graph.vertices())
            .filter(|(c, v)| v.vtype == vtype && c.is_zero())
            .count()
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by the continued fraction expansion.
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let negative = x < 0.0;
    let mut x = x.abs();
    // convergents p/q of the continued fraction of x
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::from(0),
        BigInt::from(1),
        BigInt::from(1),
        BigInt::from(0),
    );
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let r = BigRational::new(p1, q1);
    if negative {
        -r
    } else {
        r
    }
}

/// Exact rational equal to the float bit pattern (no rounding).
pub fn exact_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Signum of a rational as -1, 0, 1.
pub fn rational_signum(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}
