//! Directed multigraph storage, strongly connected components and the
//! condensation.
//!
//! Vertices and edges keep their insertion order. Everything downstream
//! (component numbering, outcome labels, strategy enumeration) breaks ties
//! by that order, so two structurally equal graphs declared in different
//! orders are deliberately treated as different inputs.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
}

/// A finite digraph with named vertices. Parallel edges and loops are allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Digraph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<(VertexId, VertexId)>,
    out: Vec<Vec<EdgeId>>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a digraph from vertex names and edges given by name.
    pub fn from_names<S: AsRef<str>>(
        vertices: &[S],
        edges: &[(S, S)],
    ) -> Result<Self, GraphError> {
        let mut g = Digraph::new();
        for v in vertices {
            g.add_vertex(v.as_ref())?;
        }
        for (t, h) in edges {
            g.add_edge_by_name(t.as_ref(), h.as_ref())?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<VertexId, GraphError> {
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateVertex(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.out.push(Vec::new());
        Ok(id)
    }

    /// Adds an edge between existing vertices.
    ///
    /// Panics if either endpoint is out of range.
    pub fn add_edge(&mut self, tail: VertexId, head: VertexId) -> EdgeId {
        assert!(tail < self.names.len() && head < self.names.len());
        let id = self.edges.len();
        self.edges.push((tail, head));
        self.out[tail].push(id);
        id
    }

    pub fn add_edge_by_name(&mut self, tail: &str, head: &str) -> Result<EdgeId, GraphError> {
        let t = self.require(tail)?;
        let h = self.require(head)?;
        Ok(self.add_edge(t, h))
    }

    fn require(&self, name: &str) -> Result<VertexId, GraphError> {
        self.vertex(name)
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.names.len()
    }

    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Outgoing edges of `v` in input order.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out[v].len()
    }

    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out[v].iter().map(move |&e| self.edges[e].1)
    }

    pub fn has_edge(&self, tail: VertexId, head: VertexId) -> bool {
        self.successors(tail).any(|w| w == head)
    }

    /// Renders an edge as `tail->head`.
    pub fn edge_label(&self, e: EdgeId) -> String {
        let (t, h) = self.edges[e];
        format!("{}->{}", self.names[t], self.names[h])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SccClass {
    /// No edge leaves the component.
    Terminal,
    /// A single loop-free vertex with at least one leaving edge.
    Transient,
    /// Contains a dicycle and has a leaving edge.
    Inner,
}

impl fmt::Display for SccClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SccClass::Terminal => "terminal",
            SccClass::Transient => "transient",
            SccClass::Inner => "inner",
        })
    }
}

/// The SCC partition of a digraph.
///
/// Components are numbered by the smallest vertex id they contain, and each
/// component lists its vertices in increasing id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    components: Vec<Vec<VertexId>>,
    component_of: Vec<usize>,
    classes: Vec<SccClass>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Vec<VertexId>] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &[VertexId] {
        &self.components[j]
    }

    pub fn component_of(&self, v: VertexId) -> usize {
        self.component_of[v]
    }

    pub fn class(&self, j: usize) -> SccClass {
        self.classes[j]
    }

    pub fn classes(&self) -> &[SccClass] {
        &self.classes
    }
}

/// Computes the SCC decomposition with an iterative Tarjan traversal.
///
/// Runs in O(|V| + |E|) plus a final renumbering pass.
pub fn scc_decompose(g: &Digraph) -> SccDecomposition {
    const UNVISITED: usize = usize::MAX;
    let n = g.vertex_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<VertexId> = Vec::new();
    let mut raw_of = vec![UNVISITED; n];
    let mut raw_count = 0usize;
    let mut next_index = 0usize;
    // (vertex, position in its out-edge list)
    let mut call: Vec<(VertexId, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let out = g.out_edges(v);
            if *pos < out.len() {
                let w = g.edge(out[*pos]).1;
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    raw_of[w] = raw_count;
                    if w == v {
                        break;
                    }
                }
                raw_count += 1;
            }
        }
    }

    // Renumber by smallest member vertex. Scanning vertices in id order
    // visits each component first at its smallest vertex.
    let mut renumber = vec![UNVISITED; raw_count];
    let mut components: Vec<Vec<VertexId>> = Vec::with_capacity(raw_count);
    let mut component_of = vec![0usize; n];
    for v in 0..n {
        let r = raw_of[v];
        if renumber[r] == UNVISITED {
            renumber[r] = components.len();
            components.push(Vec::new());
        }
        let j = renumber[r];
        components[j].push(v);
        component_of[v] = j;
    }

    let mut leaves = vec![false; components.len()];
    let mut has_loop = vec![false; components.len()];
    for &(t, h) in g.edges() {
        let (jt, jh) = (component_of[t], component_of[h]);
        if jt != jh {
            leaves[jt] = true;
        } else if t == h {
            has_loop[jt] = true;
        }
    }
    let classes = components
        .iter()
        .enumerate()
        .map(|(j, members)| {
            if !leaves[j] {
                SccClass::Terminal
            } else if members.len() == 1 && !has_loop[j] {
                SccClass::Transient
            } else {
                SccClass::Inner
            }
        })
        .collect();

    SccDecomposition {
        components,
        component_of,
        classes,
    }
}

/// The acyclic digraph obtained by contracting every SCC to one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    pub digraph: Digraph,
    /// Condensation vertex -> component index. Identity under the current
    /// numbering, kept explicit so callers never rely on that.
    pub origin: Vec<usize>,
}

impl Condensation {
    /// Components whose condensation vertex has no outgoing edge.
    pub fn sinks(&self) -> Vec<usize> {
        self.digraph
            .vertices()
            .filter(|&v| self.digraph.out_degree(v) == 0)
            .map(|v| self.origin[v])
            .collect()
    }
}

/// Contracts each component of `d` into a vertex named `scc<j>`.
///
/// Edges between distinct components are kept once each, in order of first
/// occurrence in `g`.
pub fn condense(g: &Digraph, d: &SccDecomposition) -> Condensation {
    let mut digraph = Digraph::new();
    for j in 0..d.len() {
        digraph
            .add_vertex(&format!("scc{j}"))
            .expect("component names are unique");
    }
    let mut seen = std::collections::HashSet::new();
    for &(t, h) in g.edges() {
        let (jt, jh) = (d.component_of(t), d.component_of(h));
        if jt != jh && seen.insert((jt, jh)) {
            digraph.add_edge(jt, jh);
        }
    }
    Condensation {
        digraph,
        origin: (0..d.len()).collect(),
    }
}

/// Whether every edge `(u, v)` has its reverse `(v, u)`, except edges into
/// a terminal and edges out of the initial vertex.
pub fn is_symmetric(g: &Digraph, terminals: &[VertexId], initial: VertexId) -> bool {
    let mut is_terminal = vec![false; g.vertex_count()];
    for &t in terminals {
        is_terminal[t] = true;
    }
    g.edges()
        .iter()
        .all(|&(u, v)| is_terminal[v] || u == initial || g.has_edge(v, u))
}

/// Vertices reachable from `start` (including itself), as a membership mask.
pub fn reachable_from(g: &Digraph, start: VertexId) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for w in g.successors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Topological order of an acyclic digraph, or `None` if it has a dicycle.
pub fn topological_order(g: &Digraph) -> Option<Vec<VertexId>> {
    let mut indegree = vec![0usize; g.vertex_count()];
    for &(_, h) in g.edges() {
        indegree[h] += 1;
    }
    let mut queue: VecDeque<VertexId> = g.vertices().filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(g.vertex_count());
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for w in g.successors(v) {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == g.vertex_count()).then_some(order)
}
