use std::time::Instant;
use stargrid::grid::{FactorGraph, GridGraph};
use stargrid::search::translation_invariant_colorings;
use stargrid::verify::WindowSeed;

fn cyc(n: usize) -> FactorGraph {
    FactorGraph::cycle(n).unwrap()
}

// rotation of base colors as an index permutation: result[e] = colors[perm[e]]
fn rot_perm(g: &GridGraph, rl: usize, rr: usize) -> Vec<usize> {
    let m = g.left().n();
    let n = g.right().n();
    let mut perm = vec![0usize; g.edge_count()];
    for j in 0..n {
        for a in 0..g.left().edge_count() {
            perm[g.left_edge(a, j).0] = g.left_edge((a + rl) % m, (j + rr) % n).0;
        }
    }
    for i in 0..m {
        for b in 0..g.right().edge_count() {
            perm[g.right_edge(i, b).0] = g.right_edge((i + rl) % m, (b + rr) % n).0;
        }
    }
    perm
}

fn scan(m: usize, n: usize, k: u32, lw: &[usize], rw: &[usize], block: &[(usize, usize)], cap: usize) {
    let g = GridGraph::product(cyc(m), cyc(n));
    let mut seeds: Vec<WindowSeed> = Vec::new();
    for &w in lw {
        seeds.push(WindowSeed::left(&g, w).unwrap());
    }
    for &w in rw {
        seeds.push(WindowSeed::right(&g, w).unwrap());
    }
    for &(a, b) in block {
        seeds.push(WindowSeed::block(&g, a, b).unwrap());
    }
    let perms: Vec<Vec<usize>> = (0..m)
        .flat_map(|rl| (0..n).map(move |rr| (rl, rr)))
        .map(|(rl, rr)| rot_perm(&g, rl, rr))
        .collect();
    let t0 = Instant::now();
    for d in 0..m {
        let t = Instant::now();
        let cs = translation_invariant_colorings(&g, d, k, cap).unwrap();
        let mut hits = 0usize;
        let mut first = None;
        for (ci, c) in cs.iter().enumerate() {
            let cols = c.colors();
            for (pi, perm) in perms.iter().enumerate() {
                let rotated: Vec<u8> = (0..cols.len()).map(|e| cols[perm[e]]).collect();
                if seeds.iter().all(|s| s.holds(&rotated)) {
                    hits += 1;
                    if first.is_none() {
                        first = Some((ci, pi));
                    }
                    break;
                }
            }
        }
        println!(
            "C{m}xC{n} d={d}: {} invariant, {} window-satisfying (first {:?}) ({:.2?})",
            cs.len(),
            hits,
            first,
            t.elapsed()
        );
        if hits > 0 {
            println!("TOTAL {:.2?}", t0.elapsed());
            return;
        }
    }
    println!("no hit ({:.2?})", t0.elapsed());
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "b" => scan(7, 7, 7, &[3], &[3], &[(3, 3)], 200_000),
        "c" => scan(11, 11, 7, &[], &[7, 3], &[], 50_000),
        _ => println!("pass b|c"),
    }
}
