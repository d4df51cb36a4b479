//! Shared test corpus: small marked graphs covering trees, cycles,
//! multi-edges, loops, and every vertex-type pattern, with pairwise
//! rationally independent lengths (distinct square-free surds, at most one
//! rational length per graph).

use qgraph::MarkedGraph;

pub struct CorpusEntry {
    pub name: &'static str,
    pub text: &'static str,
}

pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "edge-dd",
        text: "vertex a delta\nvertex b delta\nedge e a b 1\n",
    },
    CorpusEntry {
        name: "edge-dp",
        text: "vertex a delta\nvertex b delta'\nedge e a b 1\n",
    },
    CorpusEntry {
        name: "edge-pp",
        text: "vertex a delta'\nvertex b delta'\nedge e a b sqrt(2)\n",
    },
    CorpusEntry {
        name: "path3-dpd",
        text: "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n",
    },
    CorpusEntry {
        name: "path3-pdp",
        text: "vertex V1 delta'\nvertex V2 delta\nvertex V3 delta'\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\n",
    },
    CorpusEntry {
        name: "path3-ddd",
        text: "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\n\
               edge e12 V1 V2 sqrt(2)\nedge e23 V2 V3 sqrt(3)\n",
    },
    CorpusEntry {
        name: "path3-ppp",
        text: "vertex V1 delta'\nvertex V2 delta'\nvertex V3 delta'\n\
               edge e12 V1 V2 sqrt(2)\nedge e23 V2 V3 sqrt(3)\n",
    },
    CorpusEntry {
        name: "path3-ddp",
        text: "vertex V1 delta\nvertex V2 delta\nvertex V3 delta'\n\
               edge e12 V1 V2 sqrt(5)\nedge e23 V2 V3 sqrt(3)\n",
    },
    CorpusEntry {
        name: "path4-alt",
        text: "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\nvertex V4 delta'\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\n",
    },
    CorpusEntry {
        name: "path4-ddd'd'",
        text: "vertex V1 delta\nvertex V2 delta\nvertex V3 delta'\nvertex V4 delta'\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\n",
    },
    CorpusEntry {
        name: "path4-all-delta",
        text: "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\nvertex V4 delta\n\
               edge e12 V1 V2 sqrt(2)\nedge e23 V2 V3 sqrt(3)\nedge e34 V3 V4 sqrt(5)\n",
    },
    CorpusEntry {
        name: "star3-all-delta",
        text: "vertex c delta\nvertex r1 delta\nvertex r2 delta\nvertex r3 delta\n\
               edge e1 c r1 1\nedge e2 c r2 sqrt(2)\nedge e3 c r3 sqrt(3)\n",
    },
    CorpusEntry {
        name: "star3-mixed",
        text: "vertex c delta\nvertex r1 delta'\nvertex r2 delta'\nvertex r3 delta'\n\
               edge e1 c r1 1\nedge e2 c r2 sqrt(2)\nedge e3 c r3 sqrt(3)\n",
    },
    CorpusEntry {
        name: "star3-prime-center",
        text: "vertex c delta'\nvertex r1 delta\nvertex r2 delta\nvertex r3 delta\n\
               edge e1 c r1 1\nedge e2 c r2 sqrt(2)\nedge e3 c r3 sqrt(3)\n",
    },
    CorpusEntry {
        name: "star4-mixed",
        text: "vertex c delta\nvertex r1 delta'\nvertex r2 delta'\nvertex r3 delta'\nvertex r4 delta'\n\
               edge e1 c r1 1\nedge e2 c r2 sqrt(2)\nedge e3 c r3 sqrt(3)\nedge e4 c r4 sqrt(5)\n",
    },
    CorpusEntry {
        name: "cycle3-delta",
        text: "vertex a delta\nvertex b delta\nvertex c delta\n\
               edge e1 a b 1\nedge e2 b c sqrt(2)\nedge e3 c a sqrt(3)\n",
    },
    CorpusEntry {
        name: "cycle3-prime",
        text: "vertex a delta'\nvertex b delta'\nvertex c delta'\n\
               edge e1 a b 1\nedge e2 b c sqrt(2)\nedge e3 c a sqrt(3)\n",
    },
    CorpusEntry {
        name: "cycle3-mixed-types",
        text: "vertex a delta\nvertex b delta'\nvertex c delta\n\
               edge e1 a b 1\nedge e2 b c sqrt(2)\nedge e3 c a sqrt(3)\n",
    },
    CorpusEntry {
        name: "cycle4-delta",
        text: "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\nvertex V4 delta\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\nedge e41 V4 V1 sqrt(5)\n",
    },
    CorpusEntry {
        name: "cycle4-alternating",
        text: "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\nvertex V4 delta'\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\nedge e41 V4 V1 sqrt(5)\n",
    },
    CorpusEntry {
        name: "cycle5-delta",
        text: "vertex V1 delta\nvertex V2 delta\nvertex V3 delta\nvertex V4 delta\nvertex V5 delta\n\
               edge e1 V1 V2 sqrt(2)\nedge e2 V2 V3 sqrt(3)\nedge e3 V3 V4 sqrt(5)\n\
               edge e4 V4 V5 sqrt(6)\nedge e5 V5 V1 sqrt(7)\n",
    },
    CorpusEntry {
        name: "double-edge-dd",
        text: "vertex a delta\nvertex b delta\nedge e a b 1\nedge f a b sqrt(2)\n",
    },
    CorpusEntry {
        name: "double-edge-mixed",
        text: "vertex a delta\nvertex b delta'\nedge e a b 1\nedge f a b sqrt(2)\n",
    },
    CorpusEntry {
        name: "triple-edge-mixed",
        text: "vertex a delta\nvertex b delta'\n\
               edge e a b 1\nedge f a b sqrt(2)\nedge g a b sqrt(3)\n",
    },
    CorpusEntry {
        name: "theta-prime",
        text: "vertex a delta'\nvertex b delta'\n\
               edge e a b 1\nedge f a b sqrt(2)\nedge g a b sqrt(3)\n",
    },
    CorpusEntry {
        name: "lollipop-delta",
        text: "vertex a delta\nvertex b delta\nedge e a b 1\nedge l a a sqrt(2)\n",
    },
    CorpusEntry {
        name: "lollipop-prime-loop",
        text: "vertex a delta'\nvertex b delta\nedge e a b 1\nedge l a a sqrt(2)\n",
    },
    CorpusEntry {
        name: "single-vertex-loop",
        text: "vertex a delta\nedge l a a 1\n",
    },
    CorpusEntry {
        name: "single-vertex-prime-loop",
        text: "vertex a delta'\nedge l a a sqrt(2)\n",
    },
    CorpusEntry {
        name: "cycle3-with-loop",
        text: "vertex a delta\nvertex b delta\nvertex c delta'\n\
               edge e1 a b 1\nedge e2 b c sqrt(2)\nedge e3 c a sqrt(3)\nedge l b b sqrt(5)\n",
    },
    CorpusEntry {
        name: "tadpole-mixed",
        text: "vertex a delta\nvertex b delta'\nvertex c delta\n\
               edge e1 a b 1\nedge e2 b c sqrt(2)\nedge l c c sqrt(3)\n",
    },
    CorpusEntry {
        name: "two-loops",
        text: "vertex a delta\nvertex b delta'\n\
               edge e a b 1\nedge l1 a a sqrt(2)\nedge l2 b b sqrt(3)\n",
    },
    CorpusEntry {
        name: "caterpillar5-mixed",
        text: "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\nvertex V4 delta'\nvertex V5 delta\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\nedge e35 V3 V5 sqrt(5)\n",
    },
    CorpusEntry {
        name: "tree6-mixed",
        text: "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\nvertex V4 delta'\nvertex V5 delta'\nvertex V6 delta\n\
               edge e12 V1 V2 1\nedge e23 V2 V3 sqrt(2)\nedge e34 V3 V4 sqrt(3)\n\
               edge e35 V3 V5 sqrt(5)\nedge e56 V5 V6 sqrt(6)\n",
    },
    CorpusEntry {
        name: "k4-delta",
        text: "vertex a delta\nvertex b delta\nvertex c delta\nvertex d delta\n\
               edge e1 a b 1\nedge e2 a c sqrt(2)\nedge e3 a d sqrt(3)\n\
               edge e4 b c sqrt(5)\nedge e5 b d sqrt(6)\nedge e6 c d sqrt(7)\n",
    },
    CorpusEntry {
        name: "cycle6-alternating",
        text: "vertex V1 delta\nvertex V2 delta'\nvertex V3 delta\nvertex V4 delta'\nvertex V5 delta\nvertex V6 delta'\n\
               edge e1 V1 V2 1\nedge e2 V2 V3 sqrt(2)\nedge e3 V3 V4 sqrt(3)\n\
               edge e4 V4 V5 sqrt(5)\nedge e5 V5 V6 sqrt(6)\nedge e6 V6 V1 sqrt(7)\n",
    },
    CorpusEntry {
        name: "kite-mixed",
        text: "vertex a delta\nvertex b delta'\nvertex c delta\nvertex d delta'\n\
               edge e1 a b 1\nedge e2 b c sqrt(2)\nedge e3 c d sqrt(3)\nedge e4 d a sqrt(5)\nedge e5 a b sqrt(6)\n",
    },
];

pub fn corpus_graphs() -> Vec<(&'static str, MarkedGraph)> {
    CORPUS
        .iter()
        .map(|e| (e.name, MarkedGraph::parse(e.text).expect(e.name)))
        .collect()
}

/// Graphs without loops (for the strict oracle-equivalence comparison).
pub fn loopless_graphs() -> Vec<(&'static str, MarkedGraph)> {
    corpus_graphs()
        .into_iter()
        .filter(|(_, g)| g.edges().iter().all(|e| !e.is_loop()))
        .collect()
}

/// Graphs with at least one loop.
pub fn loop_graphs() -> Vec<(&'static str, MarkedGraph)> {
    corpus_graphs()
        .into_iter()
        .filter(|(_, g)| g.edges().iter().any(|e| e.is_loop()))
        .collect()
}
