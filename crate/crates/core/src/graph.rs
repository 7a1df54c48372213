//! Feynman diagrams and the spanning-tree / spanning-2-tree enumerators.
//!
//! Vertices and lines are renumbered densely at build time (index `i` is
//! displayed as the `i+1`-th entry); the original names are kept for output.
//! Line orientation is irrelevant to every quantity computed here and is not
//! stored.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub external: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub name: String,
    pub ends: (usize, usize),
    pub massive: bool,
}

/// Parsed diagram description, before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramSpec {
    pub name: String,
    pub dimension: i64,
    pub vertices: Vec<(String, bool)>,
    /// `(id, from, to, massive)`
    pub lines: Vec<(String, String, String, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    name: String,
    vertices: Vec<Vertex>,
    lines: Vec<Line>,
    dimension: u32,
}

/// A set of lines, bit `i` standing for line `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSubset(pub u64);

impl EdgeSubset {
    pub fn contains(self, line: usize) -> bool {
        self.0 >> line & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn lines(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// Lexicographic key over the sorted line ids.
    fn lex_key(self) -> Vec<usize> {
        self.lines().collect()
    }
}

/// A set of vertices, bit `i` standing for vertex `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        VertexSet(it.into_iter().fold(0, |m, i| m | 1 << i))
    }

    pub fn contains(self, v: usize) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

#[derive(Clone)]
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&self, mut x: usize) -> usize {
        while self.0[x] != x {
            x = self.0[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

pub fn build_diagram(spec: &DiagramSpec) -> Result<Diagram> {
    if spec.dimension <= 0 || spec.dimension % 2 != 0 {
        return Err(Error::InvalidDiagram(format!(
            "dimension D must be a positive even integer, got {}",
            spec.dimension
        )));
    }
    if spec.vertices.len() > 64 || spec.lines.len() > 64 {
        return Err(Error::InvalidDiagram(
            "at most 64 vertices and 64 lines".into(),
        ));
    }
    let mut vertices = Vec::with_capacity(spec.vertices.len());
    for (name, external) in &spec.vertices {
        if vertices.iter().any(|v: &Vertex| &v.name == name) {
            return Err(Error::InvalidDiagram(format!(
                "duplicate vertex id `{name}`"
            )));
        }
        vertices.push(Vertex {
            name: name.clone(),
            external: *external,
        });
    }
    let lookup = |id: &str, line: &str| {
        vertices.iter().position(|v| v.name == id).ok_or_else(|| {
            Error::InvalidDiagram(format!("line `{line}` references undeclared vertex `{id}`"))
        })
    };
    let mut lines = Vec::with_capacity(spec.lines.len());
    for (name, from, to, massive) in &spec.lines {
        if lines.iter().any(|l: &Line| &l.name == name) {
            return Err(Error::InvalidDiagram(format!("duplicate line id `{name}`")));
        }
        let ends = (lookup(from, name)?, lookup(to, name)?);
        lines.push(Line {
            name: name.clone(),
            ends,
            massive: *massive,
        });
    }
    Ok(Diagram {
        name: spec.name.clone(),
        vertices,
        lines,
        dimension: spec.dimension as u32,
    })
}

/// The `h`-loop ladder: rails `u_0..u_h` and `v_0..v_h`, rungs `u_i v_i`,
/// then top rail `u_i u_{i+1}`, then bottom rail `v_i v_{i+1}`. Externals are
/// `1 = u_0, 2 = v_0, 3 = v_h, 4 = u_h`.
pub fn build_ladder(h: usize, dimension: i64) -> Result<Diagram> {
    if h < 1 {
        return Err(Error::InvalidDiagram("ladder needs h >= 1".into()));
    }
    let u = |i: usize| match i {
        0 => "1".to_string(),
        i if i == h => "4".to_string(),
        i => format!("u{i}"),
    };
    let v = |i: usize| match i {
        0 => "2".to_string(),
        i if i == h => "3".to_string(),
        i => format!("v{i}"),
    };
    let mut vertices: Vec<(String, bool)> = ["1", "2", "3", "4"]
        .iter()
        .map(|s| (s.to_string(), true))
        .collect();
    vertices.extend((1..h).map(|i| (u(i), false)));
    vertices.extend((1..h).map(|i| (v(i), false)));
    let mut ends = Vec::new();
    ends.extend((0..=h).map(|i| (u(i), v(i))));
    ends.extend((0..h).map(|i| (u(i), u(i + 1))));
    ends.extend((0..h).map(|i| (v(i), v(i + 1))));
    let lines = ends
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| (format!("l{}", i + 1), a, b, true))
        .collect();
    build_diagram(&DiagramSpec {
        name: format!("ladder{h}"),
        dimension,
        vertices,
        lines,
    })
}

fn simple_spec(name: &str, dimension: i64, nv: usize, ends: &[(usize, usize)]) -> DiagramSpec {
    DiagramSpec {
        name: name.into(),
        dimension,
        vertices: (1..=nv).map(|i| (format!("V{i}"), true)).collect(),
        lines: ends
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                (
                    format!("l{}", i + 1),
                    format!("V{a}"),
                    format!("V{b}"),
                    true,
                )
            })
            .collect(),
    }
}

/// Two external vertices joined by two parallel lines.
pub fn bubble(dimension: i64) -> Result<Diagram> {
    build_diagram(&simple_spec("bubble", dimension, 2, &[(1, 2), (1, 2)]))
}

/// One-loop triangle with all three vertices external.
pub fn triangle(dimension: i64) -> Result<Diagram> {
    build_diagram(&simple_spec(
        "triangle",
        dimension,
        3,
        &[(1, 2), (2, 3), (3, 1)],
    ))
}

/// One-loop box with cyclic line numbering `l1 = 12, l2 = 23, l3 = 34, l4 = 41`.
pub fn cyclic_box(dimension: i64) -> Result<Diagram> {
    build_diagram(&simple_spec(
        "cyclic-box",
        dimension,
        4,
        &[(1, 2), (2, 3), (3, 4), (4, 1)],
    ))
}

impl Diagram {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// `N`
    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    /// `n`
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// External vertex indices in vertex order.
    pub fn externals(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.vertices[i].external)
            .collect()
    }

    pub fn external_set(&self) -> VertexSet {
        VertexSet::from_indices(self.externals())
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.n_vertices());
        let mut c = self.n_vertices();
        for l in &self.lines {
            if uf.union(l.ends.0, l.ends.1) {
                c -= 1;
            }
        }
        c
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Number of independent loops, `N - n + c`.
    pub fn loop_number(&self) -> usize {
        self.n_lines() + self.components() - self.n_vertices()
    }

    pub fn to_spec(&self) -> DiagramSpec {
        DiagramSpec {
            name: self.name.clone(),
            dimension: self.dimension as i64,
            vertices: self
                .vertices
                .iter()
                .map(|v| (v.name.clone(), v.external))
                .collect(),
            lines: self
                .lines
                .iter()
                .map(|l| {
                    (
                        l.name.clone(),
                        self.vertices[l.ends.0].name.clone(),
                        self.vertices[l.ends.1].name.clone(),
                        l.massive,
                    )
                })
                .collect(),
        }
    }

    pub fn with_dimension(&self, dimension: u32) -> Diagram {
        Diagram {
            dimension,
            ..self.clone()
        }
    }

    pub fn format_vertex_set(&self, set: VertexSet) -> String {
        let names: Vec<&str> = set
            .indices()
            .map(|i| self.vertices[i].name.as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    fn require_connected(&self) -> Result<()> {
        match self.components() {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    /// Checks that `chi` is a non-empty proper subset of the external vertices.
    pub fn validate_chi(&self, chi: VertexSet) -> Result<()> {
        let ext = self.external_set();
        if chi.is_empty() {
            return Err(Error::InvalidSubset("empty subset".into()));
        }
        if chi.0 & !ext.0 != 0 {
            return Err(Error::InvalidSubset(format!(
                "{} contains non-external vertices",
                self.format_vertex_set(chi)
            )));
        }
        if chi == ext {
            return Err(Error::InvalidSubset(
                "subset equals all external vertices".into(),
            ));
        }
        Ok(())
    }

    /// Acyclic line subsets of the given size, by include/exclude recursion
    /// over lines in index order. `accept` filters the completed forests.
    fn forests<F>(&self, size: usize, accept: F) -> Vec<EdgeSubset>
    where
        F: Fn(&UnionFind) -> bool,
    {
        fn rec<F: Fn(&UnionFind) -> bool>(
            d: &Diagram,
            line: usize,
            chosen: u64,
            left: usize,
            uf: &UnionFind,
            accept: &F,
            out: &mut Vec<EdgeSubset>,
        ) {
            if left == 0 {
                if accept(uf) {
                    out.push(EdgeSubset(chosen));
                }
                return;
            }
            if d.lines.len() - line < left {
                return;
            }
            let (a, b) = d.lines[line].ends;
            if uf.find(a) != uf.find(b) {
                let mut joined = uf.clone();
                joined.union(a, b);
                rec(
                    d,
                    line + 1,
                    chosen | 1 << line,
                    left - 1,
                    &joined,
                    accept,
                    out,
                );
            }
            rec(d, line + 1, chosen, left, uf, accept, out);
        }
        let mut out = Vec::new();
        rec(
            self,
            0,
            0,
            size,
            &UnionFind::new(self.n_vertices()),
            &accept,
            &mut out,
        );
        out.sort_by_key(|s| s.lex_key());
        out
    }

    /// All spanning trees, lexicographically ordered by sorted line ids.
    pub fn spanning_trees(&self) -> Result<Vec<EdgeSubset>> {
        self.require_connected()?;
        Ok(self.forests(self.n_vertices() - 1, |_| true))
    }

    /// Spanning 2-trees with one component containing `chi` and the other
    /// containing the remaining external vertices.
    pub fn spanning_2trees(&self, chi: VertexSet) -> Result<Vec<EdgeSubset>> {
        self.require_connected()?;
        self.validate_chi(chi)?;
        if self.n_vertices() < 2 {
            return Ok(Vec::new());
        }
        let rest = VertexSet(self.external_set().0 & !chi.0);
        let first = chi.indices().next().unwrap();
        let other = rest.indices().next().unwrap();
        Ok(self.forests(self.n_vertices() - 2, |uf| {
            let root = uf.find(first);
            let root_other = uf.find(other);
            root != root_other
                && chi.indices().all(|v| uf.find(v) == root)
                && rest.indices().all(|v| uf.find(v) == root_other)
        }))
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (N={}, n={}, h={}, D={})",
            self.name,
            self.n_lines(),
            self.n_vertices(),
            self.loop_number(),
            self.dimension
        )
    }
}
