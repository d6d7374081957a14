//! Factor graphs (paths and cycles), their Cartesian products, fibers, and
//! the precomputed 4-path/4-cycle structure tables used by the checker and
//! the solver.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("a cycle factor needs at least 3 vertices, got {0}")]
    DegenerateCycle(usize),
    #[error("a path factor needs at least 1 vertex")]
    EmptyPath,
    #[error("fiber index {index} out of range for {side} side (limit {limit})")]
    FiberIndex {
        side: Side,
        index: usize,
        limit: usize,
    },
    #[error("edge id {0} out of range ({1} edges)")]
    EdgeRange(usize, usize),
    #[error("graph is not cubic: vertex {0} has degree {1}")]
    NotCubic(String, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorKind {
    Path,
    Cycle,
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorKind::Path => write!(f, "path"),
            FactorKind::Cycle => write!(f, "cycle"),
        }
    }
}

/// One factor of a product: a path `P_n` or a cycle `C_n` with vertices
/// `0..n`. A path has edges `{i, i+1}`; a cycle additionally wraps with
/// `{n-1, 0}` as its last edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorGraph {
    kind: FactorKind,
    n: usize,
}

impl FactorGraph {
    pub fn path(n: usize) -> Result<Self, GridError> {
        if n < 1 {
            return Err(GridError::EmptyPath);
        }
        Ok(FactorGraph {
            kind: FactorKind::Path,
            n,
        })
    }

    pub fn cycle(n: usize) -> Result<Self, GridError> {
        if n < 3 {
            return Err(GridError::DegenerateCycle(n));
        }
        Ok(FactorGraph {
            kind: FactorKind::Cycle,
            n,
        })
    }

    pub fn new(kind: FactorKind, n: usize) -> Result<Self, GridError> {
        match kind {
            FactorKind::Path => Self::path(n),
            FactorKind::Cycle => Self::cycle(n),
        }
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn is_cycle(&self) -> bool {
        self.kind == FactorKind::Cycle
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        match self.kind {
            FactorKind::Path => self.n - 1,
            FactorKind::Cycle => self.n,
        }
    }

    /// Endpoints of factor edge `idx`; for a cycle the last edge is the wrap
    /// `{n-1, 0}`.
    pub fn endpoints(&self, idx: usize) -> (usize, usize) {
        debug_assert!(idx < self.edge_count());
        if self.kind == FactorKind::Cycle && idx == self.n - 1 {
            (self.n - 1, 0)
        } else {
            (idx, idx + 1)
        }
    }
}

impl fmt::Display for FactorGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FactorKind::Path => write!(f, "P{}", self.n),
            FactorKind::Cycle => write!(f, "C{}", self.n),
        }
    }
}

/// Which factor a fiber or an edge belongs to: `Left` edges change the first
/// coordinate, `Right` edges the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

/// A grid vertex: `i` indexes the left factor, `j` the right factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub i: usize,
    pub j: usize,
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Dense index into the canonical edge list of a [`GridGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Path4,
    Cycle4,
}

/// A 4-edge path or 4-edge cycle, edges in traversal order.
#[derive(Debug, Clone, Copy)]
pub struct Structure {
    pub kind: StructureKind,
    pub edges: [u32; 4],
}

/// The Cartesian product of two factors.
///
/// Edge ids are canonical and stable: all left-factor edges first (ordered by
/// right index `j`, then by left factor edge index), then all right-factor
/// edges (ordered by left index `i`, then right factor edge index). Colorings,
/// files and fixtures all rely on this order.
///
/// Construction also precomputes, once, every 4-edge path and 4-edge cycle of
/// the product together with a per-edge index into them; the conflict check is
/// the innermost loop of the solver.
#[derive(Debug)]
pub struct GridGraph {
    left: FactorGraph,
    right: FactorGraph,
    endpoints: Vec<(u32, u32)>,
    // incident edges per flattened vertex
    vert_off: Vec<u32>,
    vert_edges: Vec<u32>,
    // adjacent edges per edge (sharing an endpoint)
    adj_off: Vec<u32>,
    adj: Vec<u32>,
    // all 4-paths/4-cycles, sorted by their canonical edge sequence
    structures: Vec<Structure>,
    // per edge: indices into `structures`
    through_off: Vec<u32>,
    through: Vec<u32>,
}

impl GridGraph {
    pub fn product(left: FactorGraph, right: FactorGraph) -> Arc<GridGraph> {
        let ln = left.n;
        let rn = right.n;
        let le = left.edge_count();
        let re = right.edge_count();
        let nv = ln * rn;
        let ne = le * rn + ln * re;

        let flat = |i: usize, j: usize| i * rn + j;

        let mut endpoints = Vec::with_capacity(ne);
        for j in 0..rn {
            for a in 0..le {
                let (u, v) = left.endpoints(a);
                endpoints.push((flat(u, j) as u32, flat(v, j) as u32));
            }
        }
        for i in 0..ln {
            for b in 0..re {
                let (u, v) = right.endpoints(b);
                endpoints.push((flat(i, u) as u32, flat(i, v) as u32));
            }
        }
        debug_assert_eq!(endpoints.len(), ne);

        // vertex -> incident edges (CSR)
        let mut deg = vec![0u32; nv];
        for &(u, v) in &endpoints {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut vert_off = Vec::with_capacity(nv + 1);
        let mut acc = 0u32;
        for d in &deg {
            vert_off.push(acc);
            acc += d;
        }
        vert_off.push(acc);
        let mut vert_edges = vec![0u32; acc as usize];
        let mut cursor = vert_off.clone();
        for (e, &(u, v)) in endpoints.iter().enumerate() {
            vert_edges[cursor[u as usize] as usize] = e as u32;
            cursor[u as usize] += 1;
            vert_edges[cursor[v as usize] as usize] = e as u32;
            cursor[v as usize] += 1;
        }

        // edge -> adjacent edges (CSR), ascending ids
        let mut adj_off = Vec::with_capacity(ne + 1);
        let mut adj = Vec::new();
        for (e, &(u, v)) in endpoints.iter().enumerate() {
            adj_off.push(adj.len() as u32);
            let mut local: Vec<u32> = Vec::with_capacity(6);
            for &w in [u, v].iter() {
                let lo = vert_off[w as usize] as usize;
                let hi = vert_off[w as usize + 1] as usize;
                for &o in &vert_edges[lo..hi] {
                    if o as usize != e {
                        local.push(o);
                    }
                }
            }
            local.sort_unstable();
            local.dedup();
            adj.extend_from_slice(&local);
        }
        adj_off.push(adj.len() as u32);

        let structures = enumerate_structures(nv, &endpoints, &vert_off, &vert_edges);

        // edge -> structures through it (CSR)
        let mut tdeg = vec![0u32; ne];
        for s in &structures {
            for &e in &s.edges {
                tdeg[e as usize] += 1;
            }
        }
        let mut through_off = Vec::with_capacity(ne + 1);
        let mut acc = 0u32;
        for d in &tdeg {
            through_off.push(acc);
            acc += d;
        }
        through_off.push(acc);
        let mut through = vec![0u32; acc as usize];
        let mut cursor = through_off.clone();
        for (si, s) in structures.iter().enumerate() {
            for &e in &s.edges {
                through[cursor[e as usize] as usize] = si as u32;
                cursor[e as usize] += 1;
            }
        }

        Arc::new(GridGraph {
            left,
            right,
            endpoints,
            vert_off,
            vert_edges,
            adj_off,
            adj,
            structures,
            through_off,
            through,
        })
    }

    pub fn left(&self) -> &FactorGraph {
        &self.left
    }

    pub fn right(&self) -> &FactorGraph {
        &self.right
    }

    pub fn vertex_count(&self) -> usize {
        self.left.n * self.right.n
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn left_edge_count(&self) -> usize {
        self.left.edge_count() * self.right.n
    }

    pub fn same_shape(&self, other: &GridGraph) -> bool {
        self.left == other.left && self.right == other.right
    }

    fn unflatten(&self, v: u32) -> Vertex {
        Vertex {
            i: v as usize / self.right.n,
            j: v as usize % self.right.n,
        }
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        let (u, v) = self.endpoints[e.0];
        (self.unflatten(u), self.unflatten(v))
    }

    pub(crate) fn endpoints_flat(&self, e: usize) -> (u32, u32) {
        self.endpoints[e]
    }

    /// Id of the left-factor edge `a` in the fiber at right vertex `j`.
    pub fn left_edge(&self, a: usize, j: usize) -> EdgeId {
        debug_assert!(a < self.left.edge_count() && j < self.right.n);
        EdgeId(j * self.left.edge_count() + a)
    }

    /// Id of the right-factor edge `b` in the fiber at left vertex `i`.
    pub fn right_edge(&self, i: usize, b: usize) -> EdgeId {
        debug_assert!(i < self.left.n && b < self.right.edge_count());
        EdgeId(self.left_edge_count() + i * self.right.edge_count() + b)
    }

    /// Side and (fiber index, factor edge index) of an edge.
    pub fn classify(&self, e: EdgeId) -> (Side, usize, usize) {
        let le = self.left_edge_count();
        if e.0 < le {
            let fe = self.left.edge_count();
            (Side::Left, e.0 / fe, e.0 % fe)
        } else {
            let fe = self.right.edge_count();
            let o = e.0 - le;
            (Side::Right, o / fe, o % fe)
        }
    }

    /// Edges of one fiber, in factor order: the copy of the `side` factor at
    /// the given vertex of the opposite factor.
    pub fn fiber(&self, side: Side, index: usize) -> Result<Vec<EdgeId>, GridError> {
        match side {
            Side::Left => {
                if index >= self.right.n {
                    return Err(GridError::FiberIndex {
                        side,
                        index,
                        limit: self.right.n,
                    });
                }
                Ok((0..self.left.edge_count())
                    .map(|a| self.left_edge(a, index))
                    .collect())
            }
            Side::Right => {
                if index >= self.left.n {
                    return Err(GridError::FiberIndex {
                        side,
                        index,
                        limit: self.left.n,
                    });
                }
                Ok((0..self.right.edge_count())
                    .map(|b| self.right_edge(index, b))
                    .collect())
            }
        }
    }

    pub fn degree(&self, v: Vertex) -> usize {
        let f = (v.i * self.right.n + v.j) as usize;
        (self.vert_off[f + 1] - self.vert_off[f]) as usize
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|f| (self.vert_off[f + 1] - self.vert_off[f]) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn incident_edges(&self, v: Vertex) -> Vec<EdgeId> {
        let f = v.i * self.right.n + v.j;
        let lo = self.vert_off[f] as usize;
        let hi = self.vert_off[f + 1] as usize;
        let mut ids: Vec<usize> = self.vert_edges[lo..hi].iter().map(|&e| e as usize).collect();
        ids.sort_unstable();
        ids.into_iter().map(EdgeId).collect()
    }

    pub(crate) fn adjacent_edges(&self, e: usize) -> &[u32] {
        let lo = self.adj_off[e] as usize;
        let hi = self.adj_off[e + 1] as usize;
        &self.adj[lo..hi]
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    pub(crate) fn structures_through_raw(&self, e: usize) -> &[u32] {
        let lo = self.through_off[e] as usize;
        let hi = self.through_off[e + 1] as usize;
        &self.through[lo..hi]
    }

    /// Every 4-edge path and 4-edge cycle containing `e`, each listed once.
    pub fn local_p4_c4(&self, e: EdgeId) -> Result<Vec<Structure>, GridError> {
        if e.0 >= self.edge_count() {
            return Err(GridError::EdgeRange(e.0, self.edge_count()));
        }
        Ok(self
            .structures_through_raw(e.0)
            .iter()
            .map(|&si| self.structures[si as usize])
            .collect())
    }

    /// The plain cycle length when this grid is a cycle times a single vertex.
    pub fn as_plain_cycle(&self) -> Option<usize> {
        if self.left.is_cycle() && self.right.kind == FactorKind::Path && self.right.n == 1 {
            Some(self.left.n)
        } else if self.right.is_cycle() && self.left.kind == FactorKind::Path && self.left.n == 1 {
            Some(self.right.n)
        } else {
            None
        }
    }

    /// True iff there is a graph homomorphism onto the 3-cube that is
    /// bijective on every neighborhood. Requires a cubic graph.
    pub fn covers_q3(&self) -> Result<bool, GridError> {
        let nv = self.vertex_count();
        for f in 0..nv {
            let d = (self.vert_off[f + 1] - self.vert_off[f]) as usize;
            if d != 3 {
                return Err(GridError::NotCubic(
                    self.unflatten(f as u32).to_string(),
                    d,
                ));
            }
        }
        // neighbor lists per vertex
        let mut nbrs: Vec<[u32; 3]> = vec![[0; 3]; nv];
        for f in 0..nv {
            let lo = self.vert_off[f] as usize;
            let mut slot = 0;
            for &e in &self.vert_edges[lo..lo + 3] {
                let (u, v) = self.endpoints[e as usize];
                nbrs[f][slot] = if u as usize == f { v } else { u };
                slot += 1;
            }
        }
        // BFS order so every vertex after the first touches an assigned one
        let mut order = Vec::with_capacity(nv);
        let mut seen = vec![false; nv];
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(0usize);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &nbrs[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w as usize);
                }
            }
        }
        if order.len() != nv {
            return Ok(false); // disconnected cubic graph cannot arise here
        }

        let q3_adj = |a: u8, b: u8| (a ^ b) == 1 || (a ^ b) == 2 || (a ^ b) == 4;
        const UNSET: u8 = 8;
        let mut img = vec![UNSET; nv];

        fn consistent(
            v: usize,
            cand: u8,
            img: &[u8],
            nbrs: &[[u32; 3]],
            q3_adj: &dyn Fn(u8, u8) -> bool,
        ) -> bool {
            for &w in &nbrs[v] {
                let iw = img[w as usize];
                if iw != 8 && !q3_adj(cand, iw) {
                    return false;
                }
            }
            // local injectivity around each assigned neighbor
            for &w in &nbrs[v] {
                if img[w as usize] == 8 {
                    continue;
                }
                let mut seen_imgs = [false; 8];
                for &x in &nbrs[w as usize] {
                    let ix = if x as usize == v { cand } else { img[x as usize] };
                    if ix != 8 {
                        if seen_imgs[ix as usize] {
                            return false;
                        }
                        seen_imgs[ix as usize] = true;
                    }
                }
            }
            true
        }

        fn rec(
            idx: usize,
            order: &[usize],
            img: &mut [u8],
            nbrs: &[[u32; 3]],
            q3_adj: &dyn Fn(u8, u8) -> bool,
        ) -> bool {
            if idx == order.len() {
                return true;
            }
            let v = order[idx];
            // the cube is vertex-transitive and its stabilizer permutes the
            // three directions, so the first two images can be pinned
            let cands: Vec<u8> = match idx {
                0 => vec![0],
                1 => vec![1],
                _ => (0..8).collect(),
            };
            for cand in cands {
                if consistent(v, cand, img, nbrs, q3_adj) {
                    img[v] = cand;
                    if rec(idx + 1, order, img, nbrs, q3_adj) {
                        return true;
                    }
                    img[v] = 8;
                }
            }
            false
        }

        Ok(rec(0, &order, &mut img, &nbrs, &q3_adj))
    }
}

impl fmt::Display for GridGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[]{}", self.left, self.right)
    }
}

/// Enumerate every 4-edge simple path and 4-edge cycle exactly once, sorted
/// by the canonical orientation of their edge sequence.
fn enumerate_structures(
    nv: usize,
    endpoints: &[(u32, u32)],
    vert_off: &[u32],
    vert_edges: &[u32],
) -> Vec<Structure> {
    let other = |e: usize, v: u32| {
        let (a, b) = endpoints[e];
        if a == v {
            b
        } else {
            a
        }
    };
    let incid = |v: u32| {
        let lo = vert_off[v as usize] as usize;
        let hi = vert_off[v as usize + 1] as usize;
        &vert_edges[lo..hi]
    };

    let mut out = Vec::new();

    // 4-paths: walks v0..v4 over distinct vertices, deduplicated by v0 < v4
    for v0 in 0..nv as u32 {
        for &e1 in incid(v0) {
            let v1 = other(e1 as usize, v0);
            for &e2 in incid(v1) {
                if e2 == e1 {
                    continue;
                }
                let v2 = other(e2 as usize, v1);
                if v2 == v0 {
                    continue;
                }
                for &e3 in incid(v2) {
                    if e3 == e2 {
                        continue;
                    }
                    let v3 = other(e3 as usize, v2);
                    if v3 == v0 || v3 == v1 {
                        continue;
                    }
                    for &e4 in incid(v3) {
                        if e4 == e3 {
                            continue;
                        }
                        let v4 = other(e4 as usize, v3);
                        if v4 == v0 || v4 == v1 || v4 == v2 {
                            continue;
                        }
                        if v0 < v4 {
                            out.push(Structure {
                                kind: StructureKind::Path4,
                                edges: orient_path([e1, e2, e3, e4]),
                            });
                        }
                    }
                }
            }
        }
    }

    // 4-cycles a-b-d-c-a with a minimal and b < c
    for a in 0..nv as u32 {
        let inc_a = incid(a);
        for (x, &eab) in inc_a.iter().enumerate() {
            let b = other(eab as usize, a);
            if b <= a {
                continue;
            }
            for &eac in inc_a.iter().skip(x + 1) {
                let c = other(eac as usize, a);
                if c <= a || c == b {
                    continue;
                }
                let (b, c, eab, eac) = if b < c { (b, c, eab, eac) } else { (c, b, eac, eab) };
                for &ebd in incid(b) {
                    if ebd == eab {
                        continue;
                    }
                    let d = other(ebd as usize, b);
                    if d == a || d == c || d <= a {
                        continue;
                    }
                    for &edc in incid(d) {
                        if edc == ebd {
                            continue;
                        }
                        if other(edc as usize, d) == c {
                            out.push(Structure {
                                kind: StructureKind::Cycle4,
                                edges: orient_cycle([eab, ebd, edc, eac]),
                            });
                        }
                    }
                }
            }
        }
    }

    out.sort_by(|s, t| s.edges.cmp(&t.edges).then_with(|| {
        let k = |x: &Structure| matches!(x.kind, StructureKind::Cycle4) as u8;
        k(s).cmp(&k(t))
    }));
    out
}

fn orient_path(e: [u32; 4]) -> [u32; 4] {
    let rev = [e[3], e[2], e[1], e[0]];
    if rev < e {
        rev
    } else {
        e
    }
}

fn orient_cycle(e: [u32; 4]) -> [u32; 4] {
    let mut best = e;
    for r in 0..4 {
        let rot = [e[r], e[(r + 1) % 4], e[(r + 2) % 4], e[(r + 3) % 4]];
        let rev = [rot[3], rot[2], rot[1], rot[0]];
        if rot < best {
            best = rot;
        }
        if rev < best {
            best = rev;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize) -> FactorGraph {
        FactorGraph::path(n).unwrap()
    }
    fn c(n: usize) -> FactorGraph {
        FactorGraph::cycle(n).unwrap()
    }

    #[test]
    fn factor_basics() {
        assert_eq!(p(2).edge_count(), 1);
        assert_eq!(p(2).endpoints(0), (0, 1));
        assert_eq!(c(3).edge_count(), 3);
        assert_eq!(c(3).endpoints(2), (2, 0));
        assert!(FactorGraph::cycle(2).is_err());
        assert!(FactorGraph::path(0).is_err());
        assert!(FactorGraph::path(1).is_ok());
    }

    #[test]
    fn product_counts() {
        let g = GridGraph::product(c(3), p(2));
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 9);
        let g = GridGraph::product(c(4), c(5));
        assert_eq!(g.vertex_count(), 20);
        assert_eq!(g.edge_count(), 40);
        // P2 x P2 is the 4-cycle
        let g = GridGraph::product(p(2), p(2));
        assert_eq!(g.edge_count(), 4);
        assert_eq!(
            g.structures()
                .iter()
                .filter(|s| s.kind == StructureKind::Cycle4)
                .count(),
            1
        );
        assert_eq!(
            g.structures()
                .iter()
                .filter(|s| s.kind == StructureKind::Path4)
                .count(),
            0
        );
    }

    #[test]
    fn edge_count_formula_holds() {
        for lf in [p(1), p(2), p(4), c(3), c(5)] {
            for rf in [p(1), p(3), c(3), c(4)] {
                let g = GridGraph::product(lf.clone(), rf.clone());
                assert_eq!(
                    g.edge_count(),
                    lf.edge_count() * rf.n() + lf.n() * rf.edge_count()
                );
            }
        }
    }

    #[test]
    fn canonical_edge_order() {
        // C3 x P2: left edges at j=0, j=1, then right edges at i=0,1,2
        let g = GridGraph::product(c(3), p(2));
        let (u, v) = g.endpoints(EdgeId(0));
        assert_eq!((u, v), (Vertex { i: 0, j: 0 }, Vertex { i: 1, j: 0 }));
        let (u, v) = g.endpoints(EdgeId(2));
        assert_eq!((u, v), (Vertex { i: 2, j: 0 }, Vertex { i: 0, j: 0 }));
        let (u, v) = g.endpoints(EdgeId(6));
        assert_eq!((u, v), (Vertex { i: 0, j: 0 }, Vertex { i: 0, j: 1 }));
    }

    #[test]
    fn fibers_partition_edges() {
        let g = GridGraph::product(c(5), c(7));
        let mut seen = vec![0u32; g.edge_count()];
        for j in 0..7 {
            for e in g.fiber(Side::Left, j).unwrap() {
                seen[e.0] += 1;
            }
        }
        for i in 0..5 {
            for e in g.fiber(Side::Right, i).unwrap() {
                seen[e.0] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
        assert_eq!(g.fiber(Side::Right, 4).unwrap().len(), 7);
        assert!(g.fiber(Side::Left, 7).is_err());
    }

    #[test]
    fn fiber_of_triangle_prism() {
        let g = GridGraph::product(c(3), p(2));
        assert_eq!(g.fiber(Side::Left, 0).unwrap().len(), 3);
        assert_eq!(g.fiber(Side::Right, 1).unwrap().len(), 1);
    }

    #[test]
    fn middle_edge_of_p5_has_one_path4() {
        let g = GridGraph::product(p(5), p(1));
        for e in 0..4 {
            let s = g.local_p4_c4(EdgeId(e)).unwrap();
            assert_eq!(s.len(), 1);
            assert_eq!(s[0].kind, StructureKind::Path4);
        }
    }

    /// Independent whole-graph enumeration used to cross-check the
    /// precomputed tables: walks of length four without vertex repeats.
    fn brute_structures(g: &GridGraph) -> Vec<(StructureKind, Vec<usize>)> {
        use std::collections::BTreeSet;
        let nv = g.vertex_count();
        let mut nbr: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for e in 0..g.edge_count() {
            let (u, v) = g.endpoints_flat(e);
            nbr[u as usize].push((v as usize, e));
            nbr[v as usize].push((u as usize, e));
        }
        let mut paths = BTreeSet::new();
        let mut cycles = BTreeSet::new();
        for v0 in 0..nv {
            let mut stack = vec![(vec![v0], Vec::<usize>::new())];
            while let Some((vs, es)) = stack.pop() {
                if es.len() == 4 {
                    let mut key = es.clone();
                    key.sort_unstable();
                    paths.insert(key);
                    continue;
                }
                let last = *vs.last().unwrap();
                for &(w, e) in &nbr[last] {
                    if es.len() == 3 && w == v0 {
                        let mut key = es.clone();
                        key.push(e);
                        key.sort_unstable();
                        cycles.insert(key);
                        continue;
                    }
                    if vs.contains(&w) {
                        continue;
                    }
                    let mut vs2 = vs.clone();
                    vs2.push(w);
                    let mut es2 = es.clone();
                    es2.push(e);
                    stack.push((vs2, es2));
                }
            }
        }
        let mut out: Vec<(StructureKind, Vec<usize>)> = Vec::new();
        for p in paths {
            out.push((StructureKind::Path4, p));
        }
        for c in cycles {
            out.push((StructureKind::Cycle4, c));
        }
        out
    }

    #[test]
    fn structure_tables_match_brute_enumeration() {
        let products: Vec<(FactorGraph, FactorGraph)> = vec![
            (c(3), c(3)),
            (c(3), p(2)),
            (c(4), p(2)),
            (p(2), p(2)),
            (p(4), p(4)),
            (c(5), c(3)),
            (c(4), c(4)),
            (p(5), p(1)),
            (c(6), p(2)),
            (c(3), c(4)),
        ];
        for (lf, rf) in products {
            let g = GridGraph::product(lf, rf);
            assert!(g.vertex_count() <= 30);
            let mut got: Vec<(StructureKind, Vec<usize>)> = g
                .structures()
                .iter()
                .map(|s| {
                    let mut key: Vec<usize> = s.edges.iter().map(|&e| e as usize).collect();
                    key.sort_unstable();
                    (s.kind, key)
                })
                .collect();
            got.sort_by(|a, b| a.1.cmp(&b.1));
            let mut want = brute_structures(&g);
            want.sort_by(|a, b| a.1.cmp(&b.1));
            assert_eq!(got.len(), want.len(), "{}", g);
            for (x, y) in got.iter().zip(want.iter()) {
                assert_eq!(x.1, y.1, "{}", g);
                assert_eq!(x.0, y.0, "{}", g);
            }
            // local lists union equals the global list
            let mut through_total = 0usize;
            for e in 0..g.edge_count() {
                through_total += g.local_p4_c4(EdgeId(e)).unwrap().len();
            }
            assert_eq!(through_total, 4 * g.structures().len());
        }
    }

    #[test]
    fn q3_cover_prisms() {
        for (m, want) in [(3, false), (4, true), (5, false), (6, false), (7, false), (8, true), (12, true)] {
            let g = GridGraph::product(c(m), p(2));
            assert_eq!(g.covers_q3().unwrap(), want, "C{} x P2", m);
        }
        let g = GridGraph::product(c(3), c(3));
        assert!(g.covers_q3().is_err());
    }
}
