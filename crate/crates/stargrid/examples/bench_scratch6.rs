use std::sync::Arc;
use std::time::Instant;
use stargrid::grid::{FactorGraph, GridGraph};
use stargrid::search::{
    enumerate_colorings, star_color, SearchConfig, SearchError, SearchLimits, SearchStatus,
    WindowConstraint,
};
use stargrid::verify::SymmetryGroup;

fn cyc(n: usize) -> FactorGraph {
    FactorGraph::cycle(n).unwrap()
}
fn pat(n: usize) -> FactorGraph {
    FactorGraph::path(n).unwrap()
}

fn fiber_seeded(name: &str, m: usize, right: FactorGraph, k: u32, lw: &[usize], budget: u64) {
    let t0 = Instant::now();
    let fiber_graph = GridGraph::product(cyc(m), pat(1));
    let classes =
        enumerate_colorings(&fiber_graph, k, SymmetryGroup::Full, SearchLimits::default(), 1)
            .unwrap();
    let g = GridGraph::product(cyc(m), right);
    let mid = (g.right().n() + 1) / 2 - 1;
    println!("{name}: {} classes, seeding fiber at j={mid}", classes.forms.len());
    for (ci, class) in classes.forms.iter().enumerate() {
        let mut cfg = SearchConfig::new(k).workers(8);
        for &w in lw {
            cfg.constraints
                .push(Arc::new(WindowConstraint::left(&g, w).unwrap()));
        }
        for (a, &c) in class.iter().enumerate() {
            cfg.precoloring.push((g.left_edge(a, mid), c));
        }
        cfg.limits.node_budget = Some(budget);
        let out = match star_color(&g, &cfg) {
            Ok(o) => o,
            Err(SearchError::PrecoloringInvalid(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        if out.status == SearchStatus::Found {
            println!("  class {ci}: FOUND nodes={} TOTAL {:.2?}", out.nodes, t0.elapsed());
            return;
        }
    }
    println!("  FAILED {:.2?}", t0.elapsed());
}

fn main() {
    fiber_seeded("cp7x6 k6", 7, pat(6), 6, &[], 100_000_000);
    fiber_seeded("cp10x6 k6 lw3", 10, pat(6), 6, &[3], 100_000_000);
    fiber_seeded("cp11x8 k6", 11, pat(8), 6, &[], 100_000_000);
    fiber_seeded("cp14x8 k6 lw3", 14, pat(8), 6, &[3], 100_000_000);
}
