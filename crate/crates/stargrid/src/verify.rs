//! Star-validity checking, the window-inclusion relation for cycle products,
//! and canonical forms for cycle colorings.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::grid::{EdgeId, FactorGraph, GridError, GridGraph, StructureKind};

/// Sentinel for an uncolored edge.
pub const UNSET: u8 = u8::MAX;

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("color vector has length {got}, graph has {want} edges")]
    Length { got: usize, want: usize },
    #[error("color {color} at edge {edge} exceeds the budget k={k}")]
    ColorRange { edge: usize, color: u8, k: u32 },
    #[error("coloring is not total: edge {0} is unset")]
    NotTotal(usize),
    #[error("coloring is not star-valid: {0}")]
    NotStarValid(Violation),
    #[error("window length {m} out of range: need 3 <= m < {n}")]
    WindowRange { m: usize, n: usize },
    #[error("the {0} factor is not a cycle")]
    NotACycle(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    AdjacentSameColor,
    BichromaticPath4,
    BichromaticCycle4,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::AdjacentSameColor => write!(f, "adjacent-same-color"),
            ViolationKind::BichromaticPath4 => write!(f, "bichromatic-4-path"),
            ViolationKind::BichromaticCycle4 => write!(f, "bichromatic-4-cycle"),
        }
    }
}

/// A witnessed failure of the star condition: either two adjacent edges with
/// one color, or a 4-edge path/cycle colored with exactly two colors. The
/// witness lists the offending edges (in traversal order for 4-structures).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witness: Vec<EdgeId>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.kind)?;
        for (i, e) in self.witness.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", e)?;
        }
        write!(f, "]")
    }
}

/// A total or partial assignment of colors `0..k` to the edges of a grid.
#[derive(Debug, Clone)]
pub struct EdgeColoring {
    graph: Arc<GridGraph>,
    k: u32,
    colors: Vec<u8>,
}

impl EdgeColoring {
    pub fn new_unset(graph: Arc<GridGraph>, k: u32) -> Self {
        let n = graph.edge_count();
        EdgeColoring {
            graph,
            k,
            colors: vec![UNSET; n],
        }
    }

    pub fn from_colors(graph: Arc<GridGraph>, k: u32, colors: Vec<u8>) -> Result<Self, ColoringError> {
        if colors.len() != graph.edge_count() {
            return Err(ColoringError::Length {
                got: colors.len(),
                want: graph.edge_count(),
            });
        }
        for (e, &c) in colors.iter().enumerate() {
            if c != UNSET && u32::from(c) >= k {
                return Err(ColoringError::ColorRange { edge: e, color: c, k });
            }
        }
        Ok(EdgeColoring { graph, k, colors })
    }

    /// A total coloring of a plain cycle `C_n` (as `C_n [] P1`) from the edge
    /// color sequence around the cycle.
    pub fn cycle(seq: &[u8], k: u32) -> Result<Self, ColoringError> {
        let g = GridGraph::product(FactorGraph::cycle(seq.len())?, FactorGraph::path(1)?);
        Self::from_colors(g, k, seq.to_vec())
    }

    pub fn graph(&self) -> &Arc<GridGraph> {
        &self.graph
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn color(&self, e: EdgeId) -> Option<u8> {
        match self.colors[e.0] {
            UNSET => None,
            c => Some(c),
        }
    }

    pub fn set(&mut self, e: EdgeId, c: u8) -> Result<(), ColoringError> {
        if u32::from(c) >= self.k {
            return Err(ColoringError::ColorRange {
                edge: e.0,
                color: c,
                k: self.k,
            });
        }
        self.colors[e.0] = c;
        Ok(())
    }

    pub fn clear(&mut self, e: EdgeId) {
        self.colors[e.0] = UNSET;
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(|&c| c != UNSET)
    }

    pub fn first_unset(&self) -> Option<EdgeId> {
        self.colors.iter().position(|&c| c == UNSET).map(EdgeId)
    }

    /// Number of distinct colors actually used.
    pub fn used_colors(&self) -> usize {
        let mut seen = [false; 256];
        let mut n = 0;
        for &c in &self.colors {
            if c != UNSET && !seen[c as usize] {
                seen[c as usize] = true;
                n += 1;
            }
        }
        n
    }
}

fn find_violation(graph: &GridGraph, colors: &[u8]) -> Option<Violation> {
    // adjacency violations first, in canonical edge order
    for e in 0..graph.edge_count() {
        let ce = colors[e];
        if ce == UNSET {
            continue;
        }
        for &a in graph.adjacent_edges(e) {
            let a = a as usize;
            if a > e && colors[a] == ce {
                return Some(Violation {
                    kind: ViolationKind::AdjacentSameColor,
                    witness: vec![EdgeId(e), EdgeId(a)],
                });
            }
        }
    }
    // then bichromatic 4-structures, in canonical structure order; structures
    // with an unset edge cannot be bichromatic yet
    for s in graph.structures() {
        let mut mask = 0u32;
        let mut complete = true;
        for &e in &s.edges {
            let c = colors[e as usize];
            if c == UNSET {
                complete = false;
                break;
            }
            mask |= 1 << c;
        }
        if !complete {
            continue;
        }
        if mask.count_ones() == 2 {
            return Some(Violation {
                kind: match s.kind {
                    StructureKind::Path4 => ViolationKind::BichromaticPath4,
                    StructureKind::Cycle4 => ViolationKind::BichromaticCycle4,
                },
                witness: s.edges.iter().map(|&e| EdgeId(e as usize)).collect(),
            });
        }
    }
    None
}

/// Check a total coloring: proper, and no 4-edge path or cycle in exactly two
/// colors. `Ok(None)` means star-valid; `Ok(Some(v))` carries the first
/// witness in canonical edge order, adjacency violations before bichromatic
/// ones. Partial input is rejected.
pub fn verify_star(c: &EdgeColoring) -> Result<Option<Violation>, ColoringError> {
    if let Some(e) = c.first_unset() {
        return Err(ColoringError::NotTotal(e.0));
    }
    Ok(find_violation(c.graph(), c.colors()))
}

/// Check only what is already colored; unset edges cannot contribute.
pub fn verify_partial(c: &EdgeColoring) -> Option<Violation> {
    find_violation(c.graph(), c.colors())
}

/// Require a total, star-valid coloring; error otherwise.
pub fn require_star_valid(c: &EdgeColoring) -> Result<(), ColoringError> {
    match verify_star(c)? {
        None => Ok(()),
        Some(v) => Err(ColoringError::NotStarValid(v)),
    }
}

/// The shrunken-cycle window of a grid whose shrunk factor is a cycle: the
/// first `m` fibers of that side plus wrap edges that inherit the long wrap's
/// position. Each window edge records its source edge in the base grid.
pub(crate) struct WindowMap {
    pub window: Arc<GridGraph>,
    /// window edge id -> base edge id
    pub source: Vec<usize>,
}

impl WindowMap {
    pub fn new(
        base: &GridGraph,
        left_m: Option<usize>,
        right_m: Option<usize>,
    ) -> Result<WindowMap, ColoringError> {
        let lf = match left_m {
            Some(m) => {
                if !base.left().is_cycle() {
                    return Err(ColoringError::NotACycle("left"));
                }
                if m < 3 || m >= base.left().n() {
                    return Err(ColoringError::WindowRange {
                        m,
                        n: base.left().n(),
                    });
                }
                FactorGraph::cycle(m)?
            }
            None => base.left().clone(),
        };
        let rf = match right_m {
            Some(m) => {
                if !base.right().is_cycle() {
                    return Err(ColoringError::NotACycle("right"));
                }
                if m < 3 || m >= base.right().n() {
                    return Err(ColoringError::WindowRange {
                        m,
                        n: base.right().n(),
                    });
                }
                FactorGraph::cycle(m)?
            }
            None => base.right().clone(),
        };
        let window = GridGraph::product(lf, rf);
        let mut source = Vec::with_capacity(window.edge_count());
        for e in 0..window.edge_count() {
            let (side, fiber, fe) = window.classify(EdgeId(e));
            let src = match side {
                crate::grid::Side::Left => {
                    // wrap of the shrunken cycle inherits the base wrap
                    let a = if left_m.is_some() && fe == window.left().edge_count() - 1 {
                        base.left().edge_count() - 1
                    } else {
                        fe
                    };
                    base.left_edge(a, fiber).0
                }
                crate::grid::Side::Right => {
                    let b = if right_m.is_some() && fe == window.right().edge_count() - 1 {
                        base.right().edge_count() - 1
                    } else {
                        fe
                    };
                    base.right_edge(fiber, b).0
                }
            };
            source.push(src);
        }
        Ok(WindowMap { window, source })
    }

    /// Pull the base colors back onto the window graph.
    pub fn pullback(&self, colors: &[u8], k: u32) -> EdgeColoring {
        let cs = self.source.iter().map(|&s| colors[s]).collect();
        EdgeColoring::from_colors(Arc::clone(&self.window), k, cs)
            .expect("window pullback preserves the budget")
    }
}

/// Pins the content of a shrunken-cycle window onto the base grid: a
/// coloring of the window graph becomes a precoloring of the base. Used to
/// grow hard catalog colorings from verified smaller ones, one window at a
/// time.
pub struct WindowSeed {
    map: WindowMap,
}

impl WindowSeed {
    pub fn left(base: &GridGraph, m: usize) -> Result<Self, ColoringError> {
        Ok(WindowSeed {
            map: WindowMap::new(base, Some(m), None)?,
        })
    }

    pub fn right(base: &GridGraph, m: usize) -> Result<Self, ColoringError> {
        Ok(WindowSeed {
            map: WindowMap::new(base, None, Some(m))?,
        })
    }

    /// Both sides shrunk at once (the corner block).
    pub fn block(base: &GridGraph, left_m: usize, right_m: usize) -> Result<Self, ColoringError> {
        Ok(WindowSeed {
            map: WindowMap::new(base, Some(left_m), Some(right_m))?,
        })
    }

    /// The window graph the seed colors must live on.
    pub fn window_graph(&self) -> &Arc<GridGraph> {
        &self.map.window
    }

    /// Pull base-grid colors back onto the window graph.
    pub fn pull(&self, base_colors: &[u8]) -> Vec<u8> {
        self.map.source.iter().map(|&s| base_colors[s]).collect()
    }

    /// Does the window of this seed hold for the given total base coloring?
    pub fn holds(&self, base_colors: &[u8]) -> bool {
        let pulled = self.map.pullback(base_colors, 255);
        verify_partial(&pulled).is_none()
    }

    /// Translate window-graph colors into base-grid precolored edges.
    pub fn precoloring(&self, window_colors: &[u8]) -> Vec<(EdgeId, u8)> {
        assert_eq!(window_colors.len(), self.map.window.edge_count());
        self.map
            .source
            .iter()
            .enumerate()
            .map(|(w, &src)| (EdgeId(src), window_colors[w]))
            .collect()
    }
}

/// Check whether a star-valid coloring of `C_n [] H` includes a star-valid
/// coloring of `C_m [] H` on the first `m` fibers of the left cycle, with the
/// window wrap inheriting the long wrap's colors. Violations are reported in
/// the window graph's edge ids.
pub fn check_inclusion(c: &EdgeColoring, m: usize) -> Result<Option<Violation>, ColoringError> {
    if let Some(e) = c.first_unset() {
        return Err(ColoringError::NotTotal(e.0));
    }
    require_star_valid(c)?;
    let map = WindowMap::new(c.graph(), Some(m), None)?;
    let w = map.pullback(c.colors(), c.k());
    Ok(find_violation(w.graph(), w.colors()))
}

/// Symmetry group for identifying cycle colorings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryGroup {
    /// Relabel colors by first occurrence only.
    ColorPerm,
    /// Color relabeling together with all rotations and reflections of the
    /// cycle.
    Full,
}

fn relabel(seq: &[u8]) -> Vec<u8> {
    let mut map = [UNSET; 256];
    let mut next = 0u8;
    let mut out = Vec::with_capacity(seq.len());
    for &c in seq {
        if map[c as usize] == UNSET {
            map[c as usize] = next;
            next += 1;
        }
        out.push(map[c as usize]);
    }
    out
}

/// Lexicographically least representative of a cycle coloring's orbit under
/// the chosen group. Two colorings are isomorphic iff their canonical forms
/// are equal. Computed by explicit orbit enumeration; orbits have at most
/// `2n` cycle images.
pub fn canonical_cycle_coloring(seq: &[u8], group: SymmetryGroup) -> Vec<u8> {
    match group {
        SymmetryGroup::ColorPerm => relabel(seq),
        SymmetryGroup::Full => {
            let n = seq.len();
            let mut best: Option<Vec<u8>> = None;
            let mut buf = Vec::with_capacity(n);
            for r in 0..n {
                for refl in [false, true] {
                    buf.clear();
                    if refl {
                        buf.extend((0..n).map(|t| seq[(r + n - t) % n]));
                    } else {
                        buf.extend((0..n).map(|t| seq[(r + t) % n]));
                    }
                    let cand = relabel(&buf);
                    if best.as_ref().map_or(true, |b| cand < *b) {
                        best = Some(cand);
                    }
                }
            }
            best.unwrap_or_default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FactorGraph, GridGraph};

    fn c4_coloring(seq: [u8; 4], k: u32) -> EdgeColoring {
        let g = GridGraph::product(FactorGraph::cycle(4).unwrap(), FactorGraph::path(1).unwrap());
        EdgeColoring::from_colors(g, k, seq.to_vec()).unwrap()
    }

    #[test]
    fn c4_patterns() {
        let v = verify_star(&c4_coloring([0, 1, 0, 1], 3)).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::BichromaticCycle4);
        assert!(verify_star(&c4_coloring([0, 1, 0, 2], 3)).unwrap().is_none());
    }

    #[test]
    fn path4_pattern() {
        let g = GridGraph::product(FactorGraph::path(5).unwrap(), FactorGraph::path(1).unwrap());
        let bad = EdgeColoring::from_colors(g.clone(), 2, vec![0, 1, 0, 1]).unwrap();
        let v = verify_star(&bad).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::BichromaticPath4);
        assert_eq!(v.witness.len(), 4);
        let ok = EdgeColoring::from_colors(g, 3, vec![0, 1, 0, 2]).unwrap();
        assert!(verify_star(&ok).unwrap().is_none());
    }

    #[test]
    fn adjacency_beats_bichromatic() {
        let g = GridGraph::product(FactorGraph::path(5).unwrap(), FactorGraph::path(1).unwrap());
        let c = EdgeColoring::from_colors(g, 2, vec![0, 0, 1, 0]).unwrap();
        let v = verify_star(&c).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::AdjacentSameColor);
        assert_eq!(v.witness, vec![EdgeId(0), EdgeId(1)]);
    }

    #[test]
    fn partial_checks() {
        let g = GridGraph::product(FactorGraph::path(5).unwrap(), FactorGraph::path(1).unwrap());
        let all_unset = EdgeColoring::new_unset(g.clone(), 3);
        assert!(verify_partial(&all_unset).is_none());
        assert!(verify_star(&all_unset).is_err());

        let mut two_adjacent = EdgeColoring::new_unset(g.clone(), 3);
        two_adjacent.set(EdgeId(1), 2).unwrap();
        two_adjacent.set(EdgeId(2), 2).unwrap();
        let v = verify_partial(&two_adjacent).unwrap();
        assert_eq!(v.kind, ViolationKind::AdjacentSameColor);

        // a,b,a with the fourth edge unset is not yet bichromatic
        let mut aba = EdgeColoring::new_unset(g, 2);
        aba.set(EdgeId(0), 0).unwrap();
        aba.set(EdgeId(1), 1).unwrap();
        aba.set(EdgeId(2), 0).unwrap();
        assert!(verify_partial(&aba).is_none());
    }

    #[test]
    fn star_implies_partial() {
        let c = c4_coloring([0, 1, 0, 2], 3);
        assert!(verify_star(&c).unwrap().is_none());
        assert!(verify_partial(&c).is_none());
    }

    #[test]
    fn inclusion_window_cases() {
        // valid on C9, window of length 5 exposes a bichromatic 4-path
        // through the inherited wrap
        let c = EdgeColoring::cycle(&[1, 2, 0, 1, 2, 0, 1, 2, 0], 3).unwrap();
        assert!(verify_star(&c).unwrap().is_none());
        let v = check_inclusion(&c, 5).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::BichromaticPath4);
        // the 3-window of the same coloring is the plain periodic triangle
        assert!(check_inclusion(&c, 3).unwrap().is_none());
        // window length must satisfy 3 <= m < n
        assert!(check_inclusion(&c, 9).is_err());
        assert!(check_inclusion(&c, 2).is_err());
    }

    #[test]
    fn inclusion_adjacent_wrap() {
        // window wrap inherits the long wrap's color and collides with the
        // window's last fiber edge
        let c = EdgeColoring::cycle(&[0, 1, 2, 0, 1, 3, 2], 4).unwrap();
        assert!(verify_star(&c).unwrap().is_none());
        let v = check_inclusion(&c, 4).unwrap().unwrap();
        assert_eq!(v.kind, ViolationKind::AdjacentSameColor);
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(
            canonical_cycle_coloring(&[1, 2, 0], SymmetryGroup::ColorPerm),
            vec![0, 1, 2]
        );
        let a = canonical_cycle_coloring(&[0, 1, 2], SymmetryGroup::Full);
        let b = canonical_cycle_coloring(&[2, 0, 1], SymmetryGroup::Full);
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_is_idempotent_and_orbit_constant() {
        let seqs: Vec<Vec<u8>> = vec![
            vec![0, 1, 0, 2, 0, 3],
            vec![0, 1, 2, 0, 3, 4],
            vec![0, 1, 2, 3, 4, 5],
            vec![1, 5, 2, 4, 0, 3],
        ];
        for s in seqs {
            for group in [SymmetryGroup::ColorPerm, SymmetryGroup::Full] {
                let c = canonical_cycle_coloring(&s, group);
                assert_eq!(canonical_cycle_coloring(&c, group), c);
            }
            let n = s.len();
            let base = canonical_cycle_coloring(&s, SymmetryGroup::Full);
            for r in 0..n {
                let rot: Vec<u8> = (0..n).map(|t| s[(r + t) % n]).collect();
                assert_eq!(canonical_cycle_coloring(&rot, SymmetryGroup::Full), base);
                let refl: Vec<u8> = rot.iter().rev().copied().collect();
                assert_eq!(canonical_cycle_coloring(&refl, SymmetryGroup::Full), base);
            }
            // an arbitrary color permutation
            let perm: Vec<u8> = s.iter().map(|&c| (c + 3) % 6).collect();
            assert_eq!(canonical_cycle_coloring(&perm, SymmetryGroup::Full), base);
        }
    }
}
