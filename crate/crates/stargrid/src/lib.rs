//! Star edge-colorings of square grids: Cartesian products of paths and
//! cycles, and Cartesian products of two cycles.
//!
//! A *star edge-coloring* is a proper edge-coloring in which no path or cycle
//! on four edges is colored with exactly two colors. The *star chromatic
//! index* of a graph is the least number of colors admitting such a coloring.
//!
//! The crate provides:
//!
//! - [`grid`] — path/cycle factors, their Cartesian products, fibers, the
//!   local 4-path/4-cycle structure tables, and the cubic Q3-cover test;
//! - [`verify`] — the star-validity checker, partial-coloring checks, the
//!   window-inclusion relation on cycle products, and canonical forms for
//!   cycle colorings;
//! - [`search`] — an exact backtracking solver with greedy edge ordering,
//!   precoloring, pluggable monotone pruning constraints, symmetry breaking,
//!   full enumeration, and fiber-precoloring extendability tests;
//! - [`lift`] — constructive liftings: tiling a cycle-product coloring,
//!   combining a coloring with an included window, coin-problem
//!   representations, transposition, and subgraph restriction;
//! - [`atlas`] — closed-form star-chromatic-index lookup for the three grid
//!   families, the persisted catalog of base colorings, and end-to-end
//!   certification of upper bounds by explicit colorings;
//! - [`scjson`] / [`render`] — the `.scjson` coloring file format and
//!   deterministic SVG/DOT rendering;
//! - [`cli`] — the implementations behind the `stargrid` binary.
//!
//! Start with the runnable examples (`cargo run --release --example <name>`):
//!
//! - `solve_and_verify` — find a coloring and re-check it by hand
//! - `chi_by_search` — exact star chromatic indices of small grids
//! - `enumerate_cycles` — counting cycle colorings up to symmetry
//! - `tile_combine` — growing colorings along a cycle factor
//! - `extend_fibers` — which cycle-fiber precolorings extend to deep grids
//! - `atlas_tables` — the exact-value/range tables for all three families
//! - `certify_cell` — a verified witness coloring for any table cell
//! - `render_svg` — SVG/DOT pictures of a coloring
//! - `q3_cover` — prisms that cover the 3-cube

pub mod atlas;
pub mod cli;
pub mod grid;
pub mod lift;
pub mod render;
pub mod scjson;
pub mod search;
pub mod verify;

pub use grid::{EdgeId, FactorGraph, FactorKind, GridGraph, Side, Vertex};
pub use verify::{EdgeColoring, Violation, ViolationKind};
