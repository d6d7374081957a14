//! Exact backtracking search for star edge-colorings: greedy edge ordering,
//! incremental conflict checking, precoloring, pluggable monotone pruning
//! constraints, symmetry breaking, counting/enumeration, and extendability
//! tests for precolored cycle fibers.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU8, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::grid::{EdgeId, FactorGraph, GridGraph, Side, Vertex};
use crate::verify::{
    self, canonical_cycle_coloring, ColoringError, EdgeColoring, SymmetryGroup, Violation,
    WindowMap, UNSET,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("precoloring is not a partial star edge-coloring: {0}")]
    PrecoloringInvalid(Violation),
    #[error("fiber precoloring is not a star edge-coloring of the cycle: {0}")]
    FiberInvalid(String),
    #[error("no star edge-coloring with at most {k_max} colors (lower bound search passed k_max)")]
    KMaxExceeded { k_max: u32 },
    #[error("search budget exceeded while computing an exact answer")]
    Budget,
    #[error("full-group canonical forms are only defined for plain cycles")]
    NonCycleFullGroup,
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// A monotone pruning predicate: once it rejects a partial coloring it must
/// reject every extension of it. Plugins must also be invariant under global
/// color permutations, so that symmetry breaking stays complete.
pub trait ConstraintPlugin: Send + Sync {
    fn name(&self) -> &str;
    /// Incremental check; the tentative color is already written at `e`.
    fn allows(&self, colors: &[u8], e: usize) -> bool;
    /// Re-check a complete coloring from scratch.
    fn check_total(&self, colors: &[u8]) -> bool;
}

/// Requires the coloring restricted to a shrunken-cycle window (plus the
/// inherited wrap edges) to stay star-valid.
pub struct WindowConstraint {
    name: String,
    map: WindowMap,
    rev: Vec<Vec<u32>>,
}

impl WindowConstraint {
    pub fn left(base: &GridGraph, m: usize) -> Result<Self, ColoringError> {
        Self::new(base, Some(m), None)
    }

    pub fn right(base: &GridGraph, m: usize) -> Result<Self, ColoringError> {
        Self::new(base, None, Some(m))
    }

    /// Both sides shrunk at once: the corner block window.
    pub fn block(base: &GridGraph, left_m: usize, right_m: usize) -> Result<Self, ColoringError> {
        Self::new(base, Some(left_m), Some(right_m))
    }

    fn new(
        base: &GridGraph,
        left_m: Option<usize>,
        right_m: Option<usize>,
    ) -> Result<Self, ColoringError> {
        let map = WindowMap::new(base, left_m, right_m)?;
        let mut rev = vec![Vec::new(); base.edge_count()];
        for (w, &src) in map.source.iter().enumerate() {
            rev[src].push(w as u32);
        }
        let name = match (left_m, right_m) {
            (Some(a), None) => format!("window-left-{a}"),
            (None, Some(b)) => format!("window-right-{b}"),
            (Some(a), Some(b)) => format!("window-block-{a}x{b}"),
            (None, None) => "window-trivial".to_string(),
        };
        Ok(WindowConstraint { name, map, rev })
    }
}

impl ConstraintPlugin for WindowConstraint {
    fn name(&self) -> &str {
        &self.name
    }

    fn allows(&self, colors: &[u8], e: usize) -> bool {
        let w = &self.map.window;
        let src = &self.map.source;
        for &we in &self.rev[e] {
            let we = we as usize;
            let c = colors[src[we]];
            for &a in w.adjacent_edges(we) {
                if colors[src[a as usize]] == c {
                    return false;
                }
            }
            for &si in w.structures_through_raw(we) {
                let s = &w.structures()[si as usize];
                let mut mask = 0u32;
                let mut complete = true;
                for &x in &s.edges {
                    let cx = colors[src[x as usize]];
                    if cx == UNSET {
                        complete = false;
                        break;
                    }
                    mask |= 1 << cx;
                }
                if complete && mask.count_ones() == 2 {
                    return false;
                }
            }
        }
        true
    }

    fn check_total(&self, colors: &[u8]) -> bool {
        let pulled = self.map.pullback(colors, 255);
        verify::verify_partial(&pulled).is_none()
    }
}

/// Requires every four consecutive edges of every fiber on one side to carry
/// four distinct colors.
pub struct FiberRainbowConstraint {
    name: String,
    windows: Vec<[u32; 4]>,
    per_edge: Vec<Vec<u32>>,
}

impl FiberRainbowConstraint {
    pub fn new(g: &GridGraph, side: Side) -> Self {
        let opposite = match side {
            Side::Left => g.right().n(),
            Side::Right => g.left().n(),
        };
        let mut windows: Vec<[u32; 4]> = Vec::new();
        for f in 0..opposite {
            let fiber = g.fiber(side, f).expect("fiber index in range");
            let factor = match side {
                Side::Left => g.left(),
                Side::Right => g.right(),
            };
            let ne = fiber.len();
            if ne < 4 {
                continue;
            }
            if factor.is_cycle() {
                let count = if ne == 4 { 1 } else { ne };
                for s in 0..count {
                    windows.push([
                        fiber[s].0 as u32,
                        fiber[(s + 1) % ne].0 as u32,
                        fiber[(s + 2) % ne].0 as u32,
                        fiber[(s + 3) % ne].0 as u32,
                    ]);
                }
            } else {
                for s in 0..=(ne - 4) {
                    windows.push([
                        fiber[s].0 as u32,
                        fiber[s + 1].0 as u32,
                        fiber[s + 2].0 as u32,
                        fiber[s + 3].0 as u32,
                    ]);
                }
            }
        }
        let mut per_edge = vec![Vec::new(); g.edge_count()];
        for (wi, w) in windows.iter().enumerate() {
            for &e in w {
                per_edge[e as usize].push(wi as u32);
            }
        }
        FiberRainbowConstraint {
            name: format!("fiber-rainbow-{side}"),
            windows,
            per_edge,
        }
    }

    fn window_ok(&self, colors: &[u8], w: &[u32; 4]) -> bool {
        let mut mask = 0u32;
        for &e in w {
            let c = colors[e as usize];
            if c == UNSET {
                return true;
            }
            mask |= 1 << c;
        }
        mask.count_ones() == 4
    }
}

impl ConstraintPlugin for FiberRainbowConstraint {
    fn name(&self) -> &str {
        &self.name
    }

    fn allows(&self, colors: &[u8], e: usize) -> bool {
        self.per_edge[e]
            .iter()
            .all(|&wi| self.window_ok(colors, &self.windows[wi as usize]))
    }

    fn check_total(&self, colors: &[u8]) -> bool {
        self.windows.iter().all(|w| self.window_ok(colors, w))
    }
}

/// Requires the coloring to be invariant under the torus translation
/// `(i, j) -> (i + d, j + 1)`. Only meaningful when both factors are cycles;
/// such colorings are determined by a single column, which makes otherwise
/// intractable toroidal searches shallow.
pub struct TranslationConstraint {
    name: String,
    next: Vec<u32>,
    prev: Vec<u32>,
}

impl TranslationConstraint {
    pub fn new(g: &GridGraph, d: usize) -> Result<Self, SearchError> {
        if !g.left().is_cycle() || !g.right().is_cycle() {
            return Err(SearchError::InvalidConfig(
                "translation invariance needs two cycle factors".into(),
            ));
        }
        let m = g.left().n();
        let n = g.right().n();
        let mut next = vec![0u32; g.edge_count()];
        for j in 0..n {
            for a in 0..m {
                next[g.left_edge(a, j).0] = g.left_edge((a + d) % m, (j + 1) % n).0 as u32;
            }
        }
        for i in 0..m {
            for b in 0..n {
                next[g.right_edge(i, b).0] = g.right_edge((i + d) % m, (b + 1) % n).0 as u32;
            }
        }
        let mut prev = vec![0u32; g.edge_count()];
        for (e, &t) in next.iter().enumerate() {
            prev[t as usize] = e as u32;
        }
        Ok(TranslationConstraint {
            name: format!("translation-{d}"),
            next,
            prev,
        })
    }
}

impl ConstraintPlugin for TranslationConstraint {
    fn name(&self) -> &str {
        &self.name
    }

    fn allows(&self, colors: &[u8], e: usize) -> bool {
        let c = colors[e];
        let n = colors[self.next[e] as usize];
        if n != UNSET && n != c {
            return false;
        }
        let p = colors[self.prev[e] as usize];
        p == UNSET || p == c
    }

    fn check_total(&self, colors: &[u8]) -> bool {
        (0..colors.len()).all(|e| colors[e] == colors[self.next[e] as usize])
    }
}

/// The torus translation `(i, j) -> (i + d, j + 1)` as an edge permutation.
pub fn translation_permutation(g: &GridGraph, d: usize) -> Result<Vec<u32>, SearchError> {
    Ok(TranslationConstraint::new(g, d)?.next)
}

/// The factor swap `(i, j) -> (j, i)` as an edge permutation. Requires equal
/// factors.
pub fn transpose_permutation(g: &GridGraph) -> Result<Vec<u32>, SearchError> {
    if g.left() != g.right() {
        return Err(SearchError::InvalidConfig(
            "factor swap needs two equal factors".into(),
        ));
    }
    let m = g.left().n();
    let fe = g.left().edge_count();
    let mut perm = vec![0u32; g.edge_count()];
    for j in 0..m {
        for a in 0..fe {
            perm[g.left_edge(a, j).0] = g.right_edge(j, a).0 as u32;
        }
    }
    for i in 0..m {
        for b in 0..fe {
            perm[g.right_edge(i, b).0] = g.left_edge(b, i).0 as u32;
        }
    }
    Ok(perm)
}

/// Star `k`-edge-colorings constant on the orbits of the given edge
/// permutations (each permutation must be a graph automorphism), searched
/// orbit-at-a-time with all plugins active, up to `cap` colorings. The
/// quotient space is tiny compared to the full grid, which makes otherwise
/// intractable toroidal instances searchable.
pub fn invariant_colorings(
    g: &Arc<GridGraph>,
    perms: &[Vec<u32>],
    k: u32,
    plugins: &[Arc<dyn ConstraintPlugin>],
    cap: usize,
) -> Result<Vec<EdgeColoring>, SearchError> {
    let ne = g.edge_count();
    for p in perms {
        if p.len() != ne {
            return Err(SearchError::InvalidConfig(
                "permutation length does not match the edge count".into(),
            ));
        }
    }
    // orbit partition under the group generated by the permutations
    let mut orbit_of = vec![u32::MAX; ne];
    let mut orbits: Vec<Vec<u32>> = Vec::new();
    for e in 0..ne {
        if orbit_of[e] != u32::MAX {
            continue;
        }
        let id = orbits.len() as u32;
        let mut orbit = vec![e as u32];
        orbit_of[e] = id;
        let mut queue = vec![e];
        while let Some(x) = queue.pop() {
            for p in perms {
                let y = p[x] as usize;
                if orbit_of[y] == u32::MAX {
                    orbit_of[y] = id;
                    orbit.push(y as u32);
                    queue.push(y);
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }

    let k8 = k.min(254) as u8;
    let mut colors = vec![UNSET; ne];
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cursor = vec![0u8; orbits.len().max(1)];

    let conflict_at = |colors: &[u8], e: usize| -> bool {
        let c = colors[e];
        for &a in g.adjacent_edges(e) {
            if a as usize != e && colors[a as usize] == c {
                return true;
            }
        }
        for &si in g.structures_through_raw(e) {
            let s = &g.structures()[si as usize];
            let mut mask = 0u32;
            let mut complete = true;
            for &x in &s.edges {
                let cx = colors[x as usize];
                if cx == UNSET {
                    complete = false;
                    break;
                }
                mask |= 1 << cx;
            }
            if complete && mask.count_ones() == 2 {
                return true;
            }
        }
        false
    };

    if orbits.is_empty() {
        return Ok(out);
    }
    loop {
        let mut advanced = false;
        while cursor[depth] < k8 {
            let c = cursor[depth];
            cursor[depth] += 1;
            for &e in &orbits[depth] {
                colors[e as usize] = c;
            }
            let bad = orbits[depth].iter().any(|&e| {
                conflict_at(&colors, e as usize)
                    || plugins.iter().any(|p| !p.allows(&colors, e as usize))
            });
            if bad {
                for &e in &orbits[depth] {
                    colors[e as usize] = UNSET;
                }
                continue;
            }
            advanced = true;
            break;
        }
        if advanced {
            if depth + 1 == orbits.len() {
                out.push(EdgeColoring::from_colors(Arc::clone(g), k, colors.clone())?);
                if out.len() >= cap {
                    return Ok(out);
                }
                for &e in &orbits[depth] {
                    colors[e as usize] = UNSET;
                }
                continue;
            }
            depth += 1;
            cursor[depth] = 0;
        } else {
            if depth == 0 {
                return Ok(out);
            }
            depth -= 1;
            for &e in &orbits[depth] {
                colors[e as usize] = UNSET;
            }
        }
    }
}

/// Translation-invariant colorings for the shift `d` (no extra plugins).
pub fn translation_invariant_colorings(
    g: &Arc<GridGraph>,
    d: usize,
    k: u32,
    cap: usize,
) -> Result<Vec<EdgeColoring>, SearchError> {
    let perm = translation_permutation(g, d)?;
    invariant_colorings(g, &[perm], k, &[], cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryBreaking {
    None,
    /// Pin the colors of the edges at vertex (0,0) to 0,1,2,... in canonical
    /// edge order. Sound for existence and infeasibility, not for counting.
    FixMaxDegreeVertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    First,
    CountAll,
    CollectAll,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchLimits {
    pub node_budget: Option<u64>,
    pub time_budget: Option<Duration>,
}

pub struct SearchConfig {
    pub k: u32,
    pub precoloring: Vec<(EdgeId, u8)>,
    pub constraints: Vec<Arc<dyn ConstraintPlugin>>,
    pub symmetry_breaking: SymmetryBreaking,
    pub mode: SearchMode,
    pub limits: SearchLimits,
    /// Stop counting/collecting after this many solutions.
    pub solution_cap: Option<u64>,
    /// Worker threads for fanning out the root edge's color choices. Results
    /// are identical for any worker count when limits are disabled.
    pub workers: usize,
}

impl SearchConfig {
    pub fn new(k: u32) -> Self {
        SearchConfig {
            k,
            precoloring: Vec::new(),
            constraints: Vec::new(),
            symmetry_breaking: SymmetryBreaking::None,
            mode: SearchMode::First,
            limits: SearchLimits::default(),
            solution_cap: None,
            workers: 1,
        }
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetry_breaking = SymmetryBreaking::FixMaxDegreeVertex;
        self
    }

    pub fn mode(mut self, mode: SearchMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Found,
    Exhausted,
    BudgetExceeded,
}

pub struct SearchOutcome {
    pub status: SearchStatus,
    pub colorings: Vec<EdgeColoring>,
    /// Raw number of complete colorings encountered (counting modes).
    pub count: u64,
    pub nodes: u64,
    pub elapsed: Duration,
}

/// Greedy ordering of the uncolored edges: repeatedly take the edge with the
/// most precolored incident edges, breaking ties by the number of incident
/// edges already in the ordering, then by smallest edge id.
pub fn get_edge_ordering(g: &GridGraph, precolored: &[EdgeId]) -> Vec<EdgeId> {
    let ne = g.edge_count();
    let mut is_pre = vec![false; ne];
    for e in precolored {
        is_pre[e.0] = true;
    }
    let mut pre_cnt = vec![0u32; ne];
    for e in 0..ne {
        for &a in g.adjacent_edges(e) {
            if is_pre[a as usize] {
                pre_cnt[e] += 1;
            }
        }
    }
    let mut ord_cnt = vec![0u32; ne];
    let mut picked = vec![false; ne];
    let mut out = Vec::with_capacity(ne - precolored.len());
    for _ in 0..ne - precolored.len() {
        let mut best: Option<usize> = None;
        for e in 0..ne {
            if picked[e] || is_pre[e] {
                continue;
            }
            match best {
                None => best = Some(e),
                Some(b) => {
                    if (pre_cnt[e], ord_cnt[e]) > (pre_cnt[b], ord_cnt[b]) {
                        best = Some(e);
                    }
                }
            }
        }
        let b = best.expect("uncolored edge remains");
        picked[b] = true;
        out.push(EdgeId(b));
        for &a in g.adjacent_edges(b) {
            ord_cnt[a as usize] += 1;
        }
    }
    out
}

/// Would assigning `color` to the unset edge `e` violate the star condition
/// through `e`? Returns the first witness in canonical order.
pub fn conflict(c: &EdgeColoring, e: EdgeId, color: u8) -> Option<Violation> {
    use crate::grid::StructureKind;
    use crate::verify::ViolationKind;
    debug_assert!(c.color(e).is_none());
    let g = c.graph();
    let colors = c.colors();
    let mut adjacent: Vec<usize> = g
        .adjacent_edges(e.0)
        .iter()
        .map(|&a| a as usize)
        .filter(|&a| colors[a] == color)
        .collect();
    adjacent.sort_unstable();
    if let Some(&a) = adjacent.first() {
        let mut w = vec![EdgeId(e.0), EdgeId(a)];
        w.sort();
        return Some(Violation {
            kind: ViolationKind::AdjacentSameColor,
            witness: w,
        });
    }
    for &si in g.structures_through_raw(e.0) {
        let s = &g.structures()[si as usize];
        let mut mask = 1u32 << color;
        let mut complete = true;
        for &x in &s.edges {
            if x as usize == e.0 {
                continue;
            }
            let cx = colors[x as usize];
            if cx == UNSET {
                complete = false;
                break;
            }
            mask |= 1 << cx;
        }
        if complete && mask.count_ones() == 2 {
            return Some(Violation {
                kind: match s.kind {
                    StructureKind::Path4 => ViolationKind::BichromaticPath4,
                    StructureKind::Cycle4 => ViolationKind::BichromaticCycle4,
                },
                witness: s.edges.iter().map(|&x| EdgeId(x as usize)).collect(),
            });
        }
    }
    None
}

enum EngineStatus {
    Done,
    Stopped,
    Budget,
    Cancelled,
}

struct Engine<'a> {
    g: &'a GridGraph,
    k: u8,
    order: &'a [usize],
    plugins: &'a [Arc<dyn ConstraintPlugin>],
    colors: Vec<u8>,
    cursor: Vec<u8>,
    nodes: u64,
    node_budget: u64,
    deadline: Option<Instant>,
    cancel: Option<(&'a AtomicU8, u8)>,
}

impl<'a> Engine<'a> {
    #[inline]
    fn conflict(&self, e: usize) -> bool {
        let c = self.colors[e];
        for &a in self.g.adjacent_edges(e) {
            if self.colors[a as usize] == c {
                return true;
            }
        }
        for &si in self.g.structures_through_raw(e) {
            let s = unsafe { self.g.structures().get_unchecked(si as usize) };
            let mut mask = 0u32;
            let mut complete = true;
            for &x in &s.edges {
                let cx = self.colors[x as usize];
                if cx == UNSET {
                    complete = false;
                    break;
                }
                mask |= 1 << cx;
            }
            if complete && mask.count_ones() == 2 {
                return true;
            }
        }
        false
    }

    /// Depth-first search over the edge ordering with root color fixed.
    /// `on_solution` returns true to stop after the current solution.
    fn run(&mut self, root_color: u8, on_solution: &mut dyn FnMut(&[u8]) -> bool) -> EngineStatus {
        let n = self.order.len();
        if n == 0 {
            // everything precolored; the precoloring itself is the solution
            if root_color == 0 && on_solution(&self.colors) {
                return EngineStatus::Stopped;
            }
            return EngineStatus::Done;
        }
        let mut depth = 0usize;
        self.cursor[0] = root_color;
        let root_end = root_color + 1;
        loop {
            let e = self.order[depth];
            let end = if depth == 0 { root_end } else { self.k };
            let mut advanced = false;
            while self.cursor[depth] < end {
                let c = self.cursor[depth];
                self.cursor[depth] += 1;
                self.nodes += 1;
                if self.nodes > self.node_budget {
                    return EngineStatus::Budget;
                }
                if self.nodes & 0x1FFF == 0 {
                    if let Some((flag, me)) = self.cancel {
                        if flag.load(AtomicOrdering::Relaxed) < me {
                            return EngineStatus::Cancelled;
                        }
                    }
                    if let Some(d) = self.deadline {
                        if Instant::now() >= d {
                            return EngineStatus::Budget;
                        }
                    }
                }
                self.colors[e] = c;
                if self.conflict(e) || self.plugins.iter().any(|p| !p.allows(&self.colors, e)) {
                    self.colors[e] = UNSET;
                    continue;
                }
                advanced = true;
                break;
            }
            if advanced {
                if depth + 1 == n {
                    if on_solution(&self.colors) {
                        return EngineStatus::Stopped;
                    }
                    self.colors[e] = UNSET;
                    continue;
                }
                depth += 1;
                self.cursor[depth] = 0;
            } else {
                if depth == 0 {
                    return EngineStatus::Done;
                }
                depth -= 1;
                self.colors[self.order[depth]] = UNSET;
            }
        }
    }
}

struct BranchOutput {
    root_color: u8,
    status: EngineStatus,
    nodes: u64,
    found: Option<Vec<u8>>,
    count: u64,
    collected: Vec<Vec<u8>>,
    canon: BTreeSet<Vec<u8>>,
}

enum CanonKind {
    Off,
    Cycle(SymmetryGroup),
    EdgeVector,
}

fn run_branch(
    g: &GridGraph,
    k: u8,
    order: &[usize],
    plugins: &[Arc<dyn ConstraintPlugin>],
    base_colors: &[u8],
    root_color: u8,
    mode: SearchMode,
    canon: &CanonKind,
    limits: SearchLimits,
    solution_cap: u64,
    started: Instant,
    cancel: Option<(&AtomicU8, u8)>,
) -> BranchOutput {
    let mut out = BranchOutput {
        root_color,
        status: EngineStatus::Done,
        nodes: 0,
        found: None,
        count: 0,
        collected: Vec::new(),
        canon: BTreeSet::new(),
    };
    let mut engine = Engine {
        g,
        k,
        order,
        plugins,
        colors: base_colors.to_vec(),
        cursor: vec![0; order.len().max(1)],
        nodes: 0,
        node_budget: limits.node_budget.unwrap_or(u64::MAX),
        deadline: limits.time_budget.map(|t| started + t),
        cancel,
    };
    let status = {
        let found = &mut out.found;
        let count = &mut out.count;
        let collected = &mut out.collected;
        let canon_set = &mut out.canon;
        let mut cb = |colors: &[u8]| -> bool {
            match mode {
                SearchMode::First => {
                    *found = Some(colors.to_vec());
                    true
                }
                SearchMode::CountAll => {
                    *count += 1;
                    match canon {
                        CanonKind::Off => {}
                        CanonKind::Cycle(group) => {
                            canon_set.insert(canonical_cycle_coloring(colors, *group));
                        }
                        CanonKind::EdgeVector => {
                            canon_set.insert(relabel_vector(colors));
                        }
                    }
                    *count >= solution_cap
                }
                SearchMode::CollectAll => {
                    *count += 1;
                    collected.push(colors.to_vec());
                    *count >= solution_cap
                }
            }
        };
        engine.run(root_color, &mut cb)
    };
    out.status = status;
    out.nodes = engine.nodes;
    out
}

fn relabel_vector(colors: &[u8]) -> Vec<u8> {
    canonical_cycle_coloring(colors, SymmetryGroup::ColorPerm)
}

fn resolve_precoloring(
    g: &Arc<GridGraph>,
    cfg: &SearchConfig,
) -> Result<(Vec<u8>, Vec<EdgeId>), SearchError> {
    let mut colors = vec![UNSET; g.edge_count()];
    let mut pinned = Vec::new();
    for &(e, c) in &cfg.precoloring {
        if e.0 >= g.edge_count() {
            return Err(SearchError::InvalidConfig(format!(
                "precolored edge {} out of range",
                e
            )));
        }
        if u32::from(c) >= cfg.k {
            return Err(SearchError::InvalidConfig(format!(
                "precolor {} at {} exceeds k={}",
                c, e, cfg.k
            )));
        }
        colors[e.0] = c;
        pinned.push(e);
    }
    if cfg.symmetry_breaking == SymmetryBreaking::FixMaxDegreeVertex {
        if !cfg.precoloring.is_empty() {
            return Err(SearchError::InvalidConfig(
                "symmetry breaking cannot be combined with an explicit precoloring".into(),
            ));
        }
        if !matches!(cfg.mode, SearchMode::First) {
            return Err(SearchError::InvalidConfig(
                "symmetry breaking is unsound for counting modes".into(),
            ));
        }
        let origin = Vertex { i: 0, j: 0 };
        for (next, e) in g.incident_edges(origin).into_iter().enumerate() {
            if next as u32 >= cfg.k {
                break; // more incident edges than colors: the search will fail anyway
            }
            colors[e.0] = next as u8;
            pinned.push(e);
        }
    }
    let pre = EdgeColoring::from_colors(Arc::clone(g), cfg.k.max(1), colors.clone())?;
    if let Some(v) = verify::verify_partial(&pre) {
        return Err(SearchError::PrecoloringInvalid(v));
    }
    // monotone plugins may already reject the precoloring; that makes the
    // constrained space empty rather than the input invalid
    Ok((colors, pinned))
}

fn search_inner(
    g: &Arc<GridGraph>,
    cfg: &SearchConfig,
    canon: CanonKind,
) -> Result<(SearchOutcome, BTreeSet<Vec<u8>>), SearchError> {
    if cfg.k < 1 && g.edge_count() > 0 {
        return Err(SearchError::InvalidConfig("need k >= 1".into()));
    }
    if cfg.k > 200 {
        return Err(SearchError::InvalidConfig("k too large".into()));
    }
    let started = Instant::now();
    let (base_colors, pinned) = resolve_precoloring(g, cfg)?;

    // a precoloring that a plugin already rejects has an empty search space
    for e in &pinned {
        if cfg.constraints.iter().any(|p| !p.allows(&base_colors, e.0)) {
            return Ok((
                SearchOutcome {
                    status: SearchStatus::Exhausted,
                    colorings: Vec::new(),
                    count: 0,
                    nodes: 0,
                    elapsed: started.elapsed(),
                },
                BTreeSet::new(),
            ));
        }
    }

    let ordering = get_edge_ordering(g, &pinned);
    let order: Vec<usize> = ordering.iter().map(|e| e.0).collect();
    let k = cfg.k.min(254) as u8;

    let root_branches: Vec<u8> = if order.is_empty() {
        vec![0]
    } else {
        (0..k).collect()
    };

    let workers = cfg.workers.max(1).min(root_branches.len().max(1));
    let stop_at_first = matches!(cfg.mode, SearchMode::First);
    let cap = cfg.solution_cap.unwrap_or(u64::MAX);

    let mut branch_results: Vec<Option<BranchOutput>> = Vec::new();
    branch_results.resize_with(root_branches.len(), || None);

    if workers <= 1 {
        // true sequential semantics: one shared budget across root branches
        let mut remaining = cfg.limits.node_budget.unwrap_or(u64::MAX);
        for (bi, &rc) in root_branches.iter().enumerate() {
            let lim = SearchLimits {
                node_budget: Some(remaining),
                time_budget: cfg.limits.time_budget,
            };
            let out = run_branch(
                g,
                k,
                &order,
                &cfg.constraints,
                &base_colors,
                rc,
                cfg.mode,
                &canon,
                lim,
                cap,
                started,
                None,
            );
            remaining = remaining.saturating_sub(out.nodes);
            let decisive = matches!(out.status, EngineStatus::Stopped | EngineStatus::Budget);
            branch_results[bi] = Some(out);
            if decisive {
                break;
            }
            if matches!(
                branch_results[bi].as_ref().unwrap().status,
                EngineStatus::Budget
            ) {
                break;
            }
        }
    } else {
        let best = AtomicU8::new(u8::MAX);
        let results: Vec<(usize, BranchOutput)> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..workers {
                let order = &order;
                let base_colors = &base_colors;
                let constraints = &cfg.constraints;
                let best = &best;
                let canon = &canon;
                let branches: Vec<(usize, u8)> = root_branches
                    .iter()
                    .copied()
                    .enumerate()
                    .skip(t)
                    .step_by(workers)
                    .collect();
                let limits = cfg.limits;
                let mode = cfg.mode;
                handles.push(scope.spawn(move || {
                    let mut mine = Vec::new();
                    for (bi, rc) in branches {
                        if best.load(AtomicOrdering::Relaxed) < rc {
                            continue;
                        }
                        let cancel = if stop_at_first { Some((best, rc)) } else { None };
                        let out = run_branch(
                            g, k, order, constraints, base_colors, rc, mode, canon, limits, cap,
                            started, cancel,
                        );
                        if matches!(out.status, EngineStatus::Stopped) {
                            best.fetch_min(rc, AtomicOrdering::SeqCst);
                        }
                        mine.push((bi, out));
                    }
                    mine
                }));
            }
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        });
        for (bi, out) in results {
            branch_results[bi] = Some(out);
        }
    }

    // deterministic reduction in ascending root-color order
    let mut nodes = 0u64;
    let mut count = 0u64;
    let mut collected: Vec<Vec<u8>> = Vec::new();
    let mut canon_set: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut status = SearchStatus::Exhausted;
    let mut winner: Option<Vec<u8>> = None;
    for slot in branch_results.into_iter() {
        let Some(out) = slot else { continue };
        if matches!(out.status, EngineStatus::Cancelled) {
            continue;
        }
        nodes += out.nodes;
        count += out.count;
        collected.extend(out.collected);
        canon_set.extend(out.canon);
        match out.status {
            EngineStatus::Budget => {
                status = SearchStatus::BudgetExceeded;
                break;
            }
            EngineStatus::Stopped => {
                if stop_at_first {
                    winner = out.found;
                }
                status = SearchStatus::Found;
                break;
            }
            _ => {}
        }
    }

    if count > cap {
        count = cap;
    }
    collected.truncate(cap as usize);

    let mut colorings = Vec::new();
    if let Some(w) = winner {
        colorings.push(EdgeColoring::from_colors(Arc::clone(g), cfg.k, w)?);
    }
    if matches!(cfg.mode, SearchMode::CollectAll) {
        if !matches!(status, SearchStatus::BudgetExceeded) {
            status = if collected.is_empty() {
                SearchStatus::Exhausted
            } else {
                SearchStatus::Found
            };
        }
        for w in collected {
            colorings.push(EdgeColoring::from_colors(Arc::clone(g), cfg.k, w)?);
        }
    }
    if matches!(cfg.mode, SearchMode::CountAll) && count > 0 {
        if !matches!(status, SearchStatus::BudgetExceeded) {
            status = SearchStatus::Found;
        }
    }

    // postcondition: everything returned passes the checker and every plugin
    for c in &colorings {
        if verify::verify_star(c)?.is_some() {
            panic!("internal error: search returned an invalid coloring");
        }
        for p in &cfg.constraints {
            if !p.check_total(c.colors()) {
                panic!("internal error: search violated plugin {}", p.name());
            }
        }
    }

    Ok((
        SearchOutcome {
            status,
            colorings,
            count,
            nodes,
            elapsed: started.elapsed(),
        },
        canon_set,
    ))
}

/// Depth-first star edge-coloring search over the greedy edge ordering.
pub fn star_color(g: &Arc<GridGraph>, cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let (outcome, _) = search_inner(g, cfg, CanonKind::Off)?;
    Ok(outcome)
}

/// Exact star chromatic index by scanning the color budget upward from the
/// maximum degree. Infeasibility at each budget is a completed search, never
/// a timeout.
pub fn chi_star(g: &Arc<GridGraph>, k_max: u32) -> Result<u32, SearchError> {
    chi_star_with(g, k_max, 1)
}

pub fn chi_star_with(g: &Arc<GridGraph>, k_max: u32, workers: usize) -> Result<u32, SearchError> {
    if g.edge_count() == 0 {
        return Ok(0);
    }
    let lo = g.max_degree() as u32;
    if k_max < lo {
        return Err(SearchError::InvalidConfig(format!(
            "k_max={} below the maximum degree {}",
            k_max, lo
        )));
    }
    for k in lo..=k_max {
        let cfg = SearchConfig::new(k).symmetric().workers(workers);
        let outcome = star_color(g, &cfg)?;
        match outcome.status {
            SearchStatus::Found => return Ok(k),
            SearchStatus::Exhausted => continue,
            SearchStatus::BudgetExceeded => return Err(SearchError::Budget),
        }
    }
    Err(SearchError::KMaxExceeded { k_max })
}

pub struct Enumeration {
    /// Total colorings found by the search, before identification.
    pub raw_count: u64,
    /// Canonical forms under the requested group, sorted.
    pub forms: Vec<Vec<u8>>,
    pub nodes: u64,
}

/// Enumerate all star `k`-edge-colorings and identify them under the chosen
/// group: arbitrary grids support color permutation; plain cycles also
/// support the full rotation/reflection group.
pub fn enumerate_colorings(
    g: &Arc<GridGraph>,
    k: u32,
    group: SymmetryGroup,
    limits: SearchLimits,
    workers: usize,
) -> Result<Enumeration, SearchError> {
    let canon = match group {
        SymmetryGroup::Full => {
            if g.as_plain_cycle().is_none() {
                return Err(SearchError::NonCycleFullGroup);
            }
            CanonKind::Cycle(SymmetryGroup::Full)
        }
        SymmetryGroup::ColorPerm => {
            if g.as_plain_cycle().is_some() {
                CanonKind::Cycle(SymmetryGroup::ColorPerm)
            } else {
                CanonKind::EdgeVector
            }
        }
    };
    let mut cfg = SearchConfig::new(k).mode(SearchMode::CountAll).workers(workers);
    cfg.limits = limits;
    let (outcome, canon_set) = search_inner(g, &cfg, canon)?;
    if matches!(outcome.status, SearchStatus::BudgetExceeded) {
        return Err(SearchError::Budget);
    }
    Ok(Enumeration {
        raw_count: outcome.count,
        forms: canon_set.into_iter().collect(),
        nodes: outcome.nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extendability {
    Yes(Vec<u8>),
    No,
    BudgetExceeded,
}

/// Can a star-valid coloring of the cycle `C_m`, pinned onto the middle
/// fiber of `C_m [] P_t`, extend to a star `k`-edge-coloring of the whole
/// grid? A `No` at depth `t` rules out every depth >= `t`, because the
/// shallower grid is a subgraph of the deeper one.
pub fn extendable(
    m: usize,
    fiber_colors: &[u8],
    k: u32,
    depth: usize,
    limits: SearchLimits,
    workers: usize,
) -> Result<Extendability, SearchError> {
    if fiber_colors.len() != m || m < 3 {
        return Err(SearchError::FiberInvalid(format!(
            "expected {} colors for the cycle fiber",
            m
        )));
    }
    if depth < 1 {
        return Err(SearchError::FiberInvalid("depth must be at least 1".into()));
    }
    let as_cycle = EdgeColoring::cycle(fiber_colors, k)?;
    if let Some(v) = verify::verify_star(&as_cycle)? {
        return Err(SearchError::FiberInvalid(v.to_string()));
    }
    let g = GridGraph::product(FactorGraph::cycle(m)?, FactorGraph::path(depth)?);
    let mid = (depth + 1) / 2 - 1; // path vertex ceil(t/2), 0-based
    let mut cfg = SearchConfig::new(k).workers(workers);
    cfg.limits = limits;
    for (a, &c) in fiber_colors.iter().enumerate() {
        cfg.precoloring.push((g.left_edge(a, mid), c));
    }
    let outcome = star_color(&g, &cfg)?;
    Ok(match outcome.status {
        SearchStatus::Found => Extendability::Yes(outcome.colorings[0].colors().to_vec()),
        SearchStatus::Exhausted => Extendability::No,
        SearchStatus::BudgetExceeded => Extendability::BudgetExceeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{FactorGraph, GridGraph};

    fn p(n: usize) -> FactorGraph {
        FactorGraph::path(n).unwrap()
    }
    fn c(n: usize) -> FactorGraph {
        FactorGraph::cycle(n).unwrap()
    }

    #[test]
    fn ordering_rules() {
        // C3 with one precolored edge: both remaining edges touch it,
        // smaller id first
        let g = GridGraph::product(c(3), p(1));
        let ord = get_edge_ordering(&g, &[EdgeId(1)]);
        assert_eq!(ord, vec![EdgeId(0), EdgeId(2)]);
        // no precoloring: starts at edge 0, deterministic permutation
        let g = GridGraph::product(c(3), c(3));
        let o1 = get_edge_ordering(&g, &[]);
        let o2 = get_edge_ordering(&g, &[]);
        assert_eq!(o1[0], EdgeId(0));
        assert_eq!(o1, o2);
        let mut sorted: Vec<usize> = o1.iter().map(|e| e.0).collect();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..g.edge_count()).collect::<Vec<_>>());
    }

    #[test]
    fn conflict_cases() {
        let g = GridGraph::product(p(5), p(1));
        let mut col = EdgeColoring::new_unset(g.clone(), 3);
        col.set(EdgeId(0), 0).unwrap();
        col.set(EdgeId(1), 1).unwrap();
        col.set(EdgeId(2), 0).unwrap();
        // adjacent same color
        let v = conflict(&col, EdgeId(3), 0).unwrap();
        assert_eq!(v.kind, crate::verify::ViolationKind::AdjacentSameColor);
        // completing a,b,a with b
        let v = conflict(&col, EdgeId(3), 1).unwrap();
        assert_eq!(v.kind, crate::verify::ViolationKind::BichromaticPath4);
        // fresh color
        assert!(conflict(&col, EdgeId(3), 2).is_none());
    }

    #[test]
    fn small_sat_and_unsat() {
        let g = GridGraph::product(p(2), p(2));
        let out = star_color(&g, &SearchConfig::new(3).symmetric()).unwrap();
        assert_eq!(out.status, SearchStatus::Found);

        let g = GridGraph::product(c(3), c(3));
        let out = star_color(&g, &SearchConfig::new(6).symmetric()).unwrap();
        assert_eq!(out.status, SearchStatus::Found);
        let out = star_color(&g, &SearchConfig::new(5).symmetric()).unwrap();
        assert_eq!(out.status, SearchStatus::Exhausted);
    }

    #[test]
    fn chi_star_small() {
        // plain 4-cycle: brute force over all 3^4 assignments says 3
        let g = GridGraph::product(c(4), p(1));
        assert_eq!(chi_star(&g, 7).unwrap(), 3);
        let g = GridGraph::product(p(3), p(3));
        assert_eq!(chi_star(&g, 7).unwrap(), 5);
        let g = GridGraph::product(c(3), p(2));
        assert_eq!(chi_star(&g, 7).unwrap(), 6);
    }

    #[test]
    fn budget_is_reported() {
        let g = GridGraph::product(c(5), c(5));
        let mut cfg = SearchConfig::new(6);
        cfg.limits.node_budget = Some(50);
        let out = star_color(&g, &cfg).unwrap();
        assert_eq!(out.status, SearchStatus::BudgetExceeded);
        assert!(out.nodes >= 50);
    }

    #[test]
    fn enumerate_cycles_small() {
        let g = GridGraph::product(c(3), p(1));
        let e = enumerate_colorings(&g, 3, SymmetryGroup::ColorPerm, SearchLimits::default(), 1)
            .unwrap();
        assert_eq!(e.forms.len(), 1);
        let g = GridGraph::product(c(6), p(1));
        let e =
            enumerate_colorings(&g, 6, SymmetryGroup::Full, SearchLimits::default(), 1).unwrap();
        assert_eq!(e.forms.len(), 9);
        // full group on a non-cycle grid is rejected
        let g = GridGraph::product(c(3), p(2));
        assert!(matches!(
            enumerate_colorings(&g, 6, SymmetryGroup::Full, SearchLimits::default(), 1),
            Err(SearchError::NonCycleFullGroup)
        ));
    }

    /// Plain recursive reference solver: tries colors ascending at each edge
    /// in the given order, no shared bookkeeping at all.
    fn reference_dfs(
        g: &GridGraph,
        order: &[usize],
        colors: &mut Vec<u8>,
        k: u8,
        depth: usize,
        nodes: &mut u64,
        count: &mut u64,
        first: &mut Option<Vec<u8>>,
        stop_at_first: bool,
    ) -> bool {
        if depth == order.len() {
            *count += 1;
            if first.is_none() {
                *first = Some(colors.clone());
            }
            return stop_at_first;
        }
        let e = order[depth];
        for c in 0..k {
            *nodes += 1;
            colors[e] = c;
            let bad = {
                let mut bad = false;
                for &a in g.adjacent_edges(e) {
                    if a as usize != e && colors[a as usize] == c {
                        bad = true;
                        break;
                    }
                }
                if !bad {
                    'outer: for &si in g.structures_through_raw(e) {
                        let s = &g.structures()[si as usize];
                        let mut mask = 0u32;
                        for &x in &s.edges {
                            let cx = colors[x as usize];
                            if cx == UNSET {
                                continue 'outer;
                            }
                            mask |= 1 << cx;
                        }
                        if mask.count_ones() == 2 {
                            bad = true;
                            break;
                        }
                    }
                }
                bad
            };
            if !bad
                && reference_dfs(g, order, colors, k, depth + 1, nodes, count, first, stop_at_first)
            {
                return true;
            }
            colors[e] = UNSET;
        }
        colors[e] = UNSET;
        false
    }

    #[test]
    fn cursor_bookkeeping_matches_plain_recursion() {
        // per-depth tried-color state must behave exactly like a fresh loop
        // at every visit of a depth
        let cases: Vec<(FactorGraph, FactorGraph, u8)> = vec![
            (c(3), p(2), 4),
            (p(4), p(3), 3),
            (c(4), p(2), 3),
            (c(5), p(2), 3),
            (p(2), p(2), 2),
            (c(3), c(3), 3),
        ];
        for (lf, rf, k) in cases {
            let g = GridGraph::product(lf, rf);
            if g.edge_count() > 18 {
                continue;
            }
            let order: Vec<usize> = get_edge_ordering(&g, &[]).iter().map(|e| e.0).collect();

            let mut colors = vec![UNSET; g.edge_count()];
            let mut nodes = 0u64;
            let mut cnt = 0u64;
            let mut first = None;
            reference_dfs(
                &g, &order, &mut colors, k, 0, &mut nodes, &mut cnt, &mut first, true,
            );
            let out = star_color(&g, &SearchConfig::new(k as u32)).unwrap();
            match (&first, out.status) {
                (Some(f), SearchStatus::Found) => {
                    assert_eq!(out.colorings[0].colors(), &f[..], "{}", g);
                    assert_eq!(out.nodes, nodes, "first-mode node count {}", g);
                }
                (None, SearchStatus::Exhausted) => assert_eq!(out.nodes, nodes, "{}", g),
                other => panic!("mismatch on {}: {:?}", g, other.1),
            }

            let mut colors = vec![UNSET; g.edge_count()];
            let mut nodes = 0u64;
            let mut cnt = 0u64;
            let mut first = None;
            reference_dfs(
                &g, &order, &mut colors, k, 0, &mut nodes, &mut cnt, &mut first, false,
            );
            let out = star_color(
                &g,
                &SearchConfig::new(k as u32).mode(SearchMode::CountAll),
            )
            .unwrap();
            assert_eq!(out.count, cnt, "count-all on {}", g);
            assert_eq!(out.nodes, nodes, "count-all node count on {}", g);
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let g = GridGraph::product(c(3), c(3));
        let base = star_color(&g, &SearchConfig::new(6).symmetric()).unwrap();
        for w in [2, 4, 8] {
            let out = star_color(&g, &SearchConfig::new(6).symmetric().workers(w)).unwrap();
            assert_eq!(out.status, base.status);
            assert_eq!(out.nodes, base.nodes);
            assert_eq!(out.colorings[0].colors(), base.colorings[0].colors());
        }
        // an unsat instance: node counts must also agree
        let un = star_color(&g, &SearchConfig::new(5).symmetric()).unwrap();
        for w in [2, 4] {
            let out = star_color(&g, &SearchConfig::new(5).symmetric().workers(w)).unwrap();
            assert_eq!(out.status, SearchStatus::Exhausted);
            assert_eq!(out.nodes, un.nodes);
        }
        // counting agrees too
        let g = GridGraph::product(c(4), p(1));
        let c1 = star_color(&g, &SearchConfig::new(3).mode(SearchMode::CountAll)).unwrap();
        let c4 = star_color(
            &g,
            &SearchConfig::new(3).mode(SearchMode::CountAll).workers(4),
        )
        .unwrap();
        assert_eq!(c1.count, c4.count);
        assert_eq!(c1.nodes, c4.nodes);
    }

    #[test]
    fn extendable_cases() {
        // fixing a rainbow triangle in the middle of C3 x P3 works
        let r = extendable(3, &[0, 1, 2], 6, 3, SearchLimits::default(), 1).unwrap();
        assert!(matches!(r, Extendability::Yes(_)));
        // rejects an invalid fiber coloring
        assert!(extendable(4, &[0, 1, 0, 1], 6, 3, SearchLimits::default(), 1).is_err());
        assert!(extendable(3, &[0, 0, 1], 6, 3, SearchLimits::default(), 1).is_err());
    }

    #[test]
    fn symmetry_rejects_counting() {
        let g = GridGraph::product(c(3), p(1));
        let cfg = SearchConfig::new(3).symmetric().mode(SearchMode::CountAll);
        assert!(star_color(&g, &cfg).is_err());
    }

    #[test]
    fn fiber_rainbow_monotone() {
        // once a partial coloring violates the window, every extension does
        let g = GridGraph::product(c(4), c(5));
        let plugin = FiberRainbowConstraint::new(&g, Side::Right);
        let fiber = g.fiber(Side::Right, 0).unwrap();
        let mut colors = vec![UNSET; g.edge_count()];
        colors[fiber[0].0] = 0;
        colors[fiber[1].0] = 1;
        colors[fiber[2].0] = 0;
        colors[fiber[3].0] = 2;
        assert!(!plugin.allows(&colors, fiber[3].0));
        // extend arbitrarily: still rejected through the same window edge
        let mut ext = colors.clone();
        for e in 0..ext.len() {
            if ext[e] == UNSET {
                ext[e] = (e % 5) as u8;
            }
        }
        assert!(!plugin.allows(&ext, fiber[3].0));
        assert!(!plugin.check_total(&ext));
    }

    #[test]
    fn window_constraint_prunes_and_checks() {
        use crate::verify::check_inclusion;
        let g = GridGraph::product(c(6), p(1));
        // unconstrained: every star 3-coloring of C6
        let all = star_color(&g, &SearchConfig::new(3).mode(SearchMode::CollectAll)).unwrap();
        let with_window: Vec<_> = all
            .colorings
            .iter()
            .filter(|c| check_inclusion(c, 3).unwrap().is_none())
            .collect();
        assert!(!with_window.is_empty());
        assert!(with_window.len() < all.colorings.len());
        // the plugin enumerates exactly the colorings whose window holds
        let w = Arc::new(WindowConstraint::left(&g, 3).unwrap());
        let mut cfg = SearchConfig::new(3).mode(SearchMode::CountAll);
        cfg.constraints.push(w);
        let constrained = star_color(&g, &cfg).unwrap();
        assert_eq!(constrained.count, with_window.len() as u64);
    }
}
