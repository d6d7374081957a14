use std::sync::Arc;
use std::time::Instant;
use stargrid::grid::{FactorGraph, GridGraph};
use stargrid::search::{star_color, SearchConfig, SearchStatus, WindowConstraint};

fn cyc(n: usize) -> FactorGraph {
    FactorGraph::cycle(n).unwrap()
}
fn pat(n: usize) -> FactorGraph {
    FactorGraph::path(n).unwrap()
}

fn run(name: &str, l: FactorGraph, r: FactorGraph, k: u32, lw: &[usize], rw: &[usize]) {
    let g = GridGraph::product(l, r);
    let mut cfg = SearchConfig::new(k).symmetric().workers(8);
    for &m in lw {
        cfg.constraints
            .push(Arc::new(WindowConstraint::left(&g, m).unwrap()));
    }
    for &m in rw {
        cfg.constraints
            .push(Arc::new(WindowConstraint::right(&g, m).unwrap()));
    }
    cfg.limits.node_budget = Some(400_000_000);
    let t = Instant::now();
    let out = star_color(&g, &cfg).unwrap();
    assert!(out.status == SearchStatus::Found, "{name} not found!");
    println!("{name}: {:?} nodes={} in {:.2?}", out.status, out.nodes, t.elapsed());
}

fn main() {
    run("cc3x4 k7", cyc(3), cyc(4), 7, &[], &[]);
    run("cc3x5 k7", cyc(3), cyc(5), 7, &[], &[]);
    run("cc3x7 k7 rw3", cyc(3), cyc(7), 7, &[], &[3]);
    run("cc3x8 k7 rw3", cyc(3), cyc(8), 7, &[], &[3]);
    run("cc4x5 k7", cyc(4), cyc(5), 7, &[], &[]);
    run("cc4x6 k6", cyc(4), cyc(6), 6, &[], &[]);
    run("cc4x7 k7 rw4", cyc(4), cyc(7), 7, &[], &[4]);
    run("cc4x9 k7 rw4", cyc(4), cyc(9), 7, &[], &[4]);
    run("cc5x5 k7", cyc(5), cyc(5), 7, &[], &[]);
    run("cc5x11 k7", cyc(5), cyc(11), 7, &[], &[]);
    run("cp5x6 k6", cyc(5), pat(6), 6, &[], &[]);
    run("cp7x6 k6", cyc(7), pat(6), 6, &[], &[]);
    run("cp10x6 k6 lw3", cyc(10), pat(6), 6, &[3], &[]);
    run("cp11x8 k6", cyc(11), pat(8), 6, &[], &[]);
    run("cp14x8 k6 lw3", cyc(14), pat(8), 6, &[3], &[]);
}
