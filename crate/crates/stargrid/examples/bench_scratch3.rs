use std::sync::Arc;
use std::time::Instant;
use stargrid::grid::{EdgeId, FactorGraph, GridGraph};
use stargrid::lift::transpose;
use stargrid::search::{
    star_color, ConstraintPlugin, SearchConfig, SearchMode, SearchStatus, WindowConstraint,
};
use stargrid::verify::{EdgeColoring, WindowSeed};

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
) -> Vec<EdgeColoring> {
    let mut cfg = SearchConfig::new(k).mode(SearchMode::CollectAll);
    cfg.solution_cap = Some(cap);
    cfg.limits.node_budget = Some(budget);
    cfg.constraints = plugins;
    cfg.precoloring = pre;
    star_color(g, &cfg).unwrap().colorings
}

// stages: X3 on C3xC7 (rw3) -> Y3 on C7xC3 consistent with X3 (lw3 plugin)
// -> sigma on C7xC7 with both windows seeded
fn main() {
    let t0 = Instant::now();
    let x3g = GridGraph::product(cyc(3), cyc(7));
    let x3s = collect(
        &x3g,
        7,
        vec![Arc::new(WindowConstraint::right(&x3g, 3).unwrap())],
        vec![],
        4000,
        2_000_000_000,
    );
    // stride for diversity
    let stride = (x3s.len() / 40).max(1);
    println!("X3 candidates: {} (stride {}) in {:.2?}", x3s.len(), stride, t0.elapsed());

    let g = GridGraph::product(cyc(7), cyc(7));
    let lw_seed = WindowSeed::left(&g, 3).unwrap();
    let rw_seed = WindowSeed::right(&g, 3).unwrap();
    let y3g = GridGraph::product(cyc(7), cyc(3));

    for (xi, x3) in x3s.iter().enumerate().step_by(stride) {
        // precolor sigma's left window from x3
        let pre_l = lw_seed.precoloring(x3.colors());
        // Y3 must agree with sigma's already-pinned edges: express that as a
        // precoloring of the Y3 search through the right-window source map
        let mut sigma_partial = vec![stargrid::verify::UNSET; g.edge_count()];
        for &(e, c) in &pre_l {
            sigma_partial[e.0] = c;
        }
        let y3_pre: Vec<(EdgeId, u8)> = rw_seed
            .pull(&sigma_partial)
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != stargrid::verify::UNSET)
            .map(|(w, &c)| (EdgeId(w), c))
            .collect();
        let y3s = collect(
            &y3g,
            7,
            vec![Arc::new(WindowConstraint::left(&y3g, 3).unwrap())],
            y3_pre,
            20,
            50_000_000,
        );
        for (yi, y3) in y3s.iter().enumerate() {
            let mut pre = pre_l.clone();
            let pre_r = rw_seed.precoloring(y3.colors());
            for (e, c) in pre_r {
                if sigma_partial[e.0] == stargrid::verify::UNSET {
                    pre.push((e, c));
                }
            }
            pre.sort_by_key(|&(e, _)| e.0);
            pre.dedup();
            let mut cfg = SearchConfig::new(7).workers(8);
            cfg.precoloring = pre;
            cfg.constraints = vec![
                Arc::new(WindowConstraint::left(&g, 3).unwrap()),
                Arc::new(WindowConstraint::right(&g, 3).unwrap()),
                Arc::new(WindowConstraint::block(&g, 3, 3).unwrap()),
            ];
            cfg.limits.node_budget = Some(20_000_000);
            let out = match star_color(&g, &cfg) {
                Ok(o) => o,
                Err(stargrid::search::SearchError::PrecoloringInvalid(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            if out.status == SearchStatus::Found {
                println!(
                    "FOUND with x{xi} y{yi}: nodes={} TOTAL {:.2?}",
                    out.nodes,
                    t0.elapsed()
                );
                let c = &out.colorings[0];
                println!("colors: {:?}", c.colors());
                let tr = transpose(c);
                println!(
                    "incl: l3={} r3={}",
                    stargrid::verify::check_inclusion(c, 3).unwrap().is_none(),
                    stargrid::verify::check_inclusion(&tr, 3).unwrap().is_none()
                );
                return;
            }
        }
        if xi / stride % 5 == 0 {
            println!("  x{xi}: {} y-candidates, no extension yet ({:.2?})", y3s.len(), t0.elapsed());
        }
    }
    println!("staged search failed ({:.2?})", t0.elapsed());
}
