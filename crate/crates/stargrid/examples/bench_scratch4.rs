use std::sync::Arc;
use std::time::Instant;
use stargrid::grid::{EdgeId, FactorGraph, GridGraph};
use stargrid::lift::transpose;
use stargrid::search::{
    star_color, ConstraintPlugin, SearchConfig, SearchError, SearchMode, SearchStatus,
    WindowConstraint,
};
use stargrid::verify::{check_inclusion, EdgeColoring, WindowSeed, UNSET};

fn cyc(n: usize) -> FactorGraph {
    FactorGraph::cycle(n).unwrap()
}

fn collect(
    g: &Arc<GridGraph>,
    k: u32,
    plugins: Vec<Arc<dyn ConstraintPlugin>>,
    pre: Vec<(EdgeId, u8)>,
    cap: u64,
    budget: u64,
) -> Result<Vec<EdgeColoring>, SearchError> {
    let mut cfg = SearchConfig::new(k).mode(SearchMode::CollectAll);
    cfg.solution_cap = Some(cap);
    cfg.limits.node_budget = Some(budget);
    cfg.constraints = plugins;
    cfg.precoloring = pre;
    Ok(star_color(g, &cfg)?.colorings)
}

fn main() {
    let t0 = Instant::now();
    // stage A: C3 x C11 at 7, plain
    let x3g = GridGraph::product(cyc(3), cyc(11));
    let x3s = collect(&x3g, 7, vec![], vec![], 4000, 2_000_000_000).unwrap();
    let stride_a = (x3s.len() / 25).max(1);
    println!("A: {} C3xC11 colorings in {:.2?}", x3s.len(), t0.elapsed());

    // stage B: E = C7 x C11 with left window 3 seeded from X3b
    let eg = GridGraph::product(cyc(7), cyc(11));
    let e_lw = WindowSeed::left(&eg, 3).unwrap();
    let mut es: Vec<EdgeColoring> = Vec::new();
    for (xi, x) in x3s.iter().enumerate().step_by(stride_a) {
        let pre = e_lw.precoloring(x.colors());
        let got = match collect(
            &eg,
            7,
            vec![Arc::new(WindowConstraint::left(&eg, 3).unwrap())],
            pre,
            4,
            40_000_000,
        ) {
            Ok(g) => g,
            Err(SearchError::PrecoloringInvalid(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        if !got.is_empty() {
            println!("  B: x{xi} gave {} E-candidates ({:.2?})", got.len(), t0.elapsed());
            es.extend(got);
        }
        if es.len() >= 20 {
            break;
        }
    }
    println!("B: {} E candidates total ({:.2?})", es.len(), t0.elapsed());

    // stage C: sigma on C11 x C11, right window 7 = E, rw3 plugin
    let g = GridGraph::product(cyc(11), cyc(11));
    let rw7 = WindowSeed::right(&g, 7).unwrap();
    for (ei, e) in es.iter().enumerate() {
        let et = transpose(e);
        let pre = rw7.precoloring(et.colors());
        let mut cfg = SearchConfig::new(7).workers(8);
        cfg.precoloring = pre;
        cfg.constraints = vec![
            Arc::new(WindowConstraint::right(&g, 7).unwrap()),
            Arc::new(WindowConstraint::right(&g, 3).unwrap()),
        ];
        cfg.limits.node_budget = Some(60_000_000);
        let out = match star_color(&g, &cfg) {
            Ok(o) => o,
            Err(SearchError::PrecoloringInvalid(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        println!("  C: E{ei} -> {:?} nodes={} ({:.2?})", out.status, out.nodes, t0.elapsed());
        if out.status == SearchStatus::Found {
            let c = &out.colorings[0];
            let tr = transpose(c);
            println!(
                "FOUND: rw7={} rw3={} TOTAL {:.2?}",
                check_inclusion(&tr, 7).unwrap().is_none(),
                check_inclusion(&tr, 3).unwrap().is_none(),
                t0.elapsed()
            );
            let _ = UNSET;
            return;
        }
    }
    println!("failed ({:.2?})", t0.elapsed());
}
