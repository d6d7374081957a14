//! Constructive liftings of star edge-colorings along a cycle factor:
//! tiling a coloring of `C_m [] H` around `C_{k*m} [] H`, combining a
//! coloring with an included shorter window into `C_{p*m+q*n} [] H`,
//! coin-problem representations of cycle lengths, transposition, and
//! restriction to subgrids.
//!
//! Both lifted constructions re-verify their output instead of trusting the
//! construction; a failure is an internal error, never silently returned.

use thiserror::Error;

use crate::grid::{FactorGraph, GridError, GridGraph, Side};
use crate::verify::{self, ColoringError, EdgeColoring, Violation};

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("the left factor must be a cycle, got {0}")]
    LeftNotCycle(String),
    #[error("need at least one copy (k >= 1)")]
    ZeroCopies,
    #[error("input coloring is not usable: {0}")]
    Input(#[from] ColoringError),
    #[error("the coloring does not include a window of length {m}: {violation}")]
    InclusionFails { m: usize, violation: Violation },
    #[error("p*m + q*n = {0} does not form a cycle (need >= 3)")]
    DegenerateLength(usize),
    #[error("constructed coloring failed verification: {0} (internal error)")]
    ConstructionInvalid(Violation),
    #[error("cannot restrict {side} factor of length {have} to a path on {want} vertices")]
    RestrictRange {
        side: Side,
        have: usize,
        want: usize,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A representation `target = alpha*n + beta*m` over the non-negative
/// integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrobeniusPair {
    pub alpha: u64,
    pub beta: u64,
}

/// The representation with the smallest `alpha`, if any. For coprime `n`,
/// `m` every `target >= (n-1)(m-1)` is representable.
pub fn frobenius(n: u64, m: u64, target: u64) -> Option<FrobeniusPair> {
    assert!(n >= 1 && m >= 1, "factors must be positive");
    let mut alpha = 0u64;
    while alpha * n <= target {
        let rest = target - alpha * n;
        if rest % m == 0 {
            return Some(FrobeniusPair {
                alpha,
                beta: rest / m,
            });
        }
        alpha += 1;
    }
    None
}

fn require_left_cycle(c: &EdgeColoring) -> Result<usize, LiftError> {
    let left = c.graph().left();
    if !left.is_cycle() {
        return Err(LiftError::LeftNotCycle(left.to_string()));
    }
    Ok(left.n())
}

fn verified(out: EdgeColoring) -> Result<EdgeColoring, LiftError> {
    match verify::verify_star(&out)? {
        None => Ok(out),
        Some(v) => Err(LiftError::ConstructionInvalid(v)),
    }
}

/// Replicate a star-valid coloring of `C_m [] H` around the longer cycle
/// `C_{k*m} [] H`: position `t` copies position `t mod m`, and the long
/// cycle's edges copy the corresponding short-cycle edges (the wrap copies
/// the wrap).
pub fn tile(sigma: &EdgeColoring, copies: usize) -> Result<EdgeColoring, LiftError> {
    let m = require_left_cycle(sigma)?;
    if copies < 1 {
        return Err(LiftError::ZeroCopies);
    }
    verify::require_star_valid(sigma)?;
    let g = sigma.graph();
    let big = GridGraph::product(FactorGraph::cycle(copies * m)?, g.right().clone());
    let mut colors = vec![0u8; big.edge_count()];
    for j in 0..g.right().n() {
        for t in 0..copies * m {
            colors[big.left_edge(t, j).0] = sigma.colors()[g.left_edge(t % m, j).0];
        }
    }
    for i in 0..copies * m {
        for b in 0..g.right().edge_count() {
            colors[big.right_edge(i, b).0] = sigma.colors()[g.right_edge(i % m, b).0];
        }
    }
    let out = EdgeColoring::from_colors(big, sigma.k(), colors)?;
    verified(out)
}

/// Concatenate `p` copies of the included length-`m` window followed by `q`
/// copies of the full coloring of `C_n [] H`, yielding `C_{p*m+q*n} [] H`.
/// Requires the inclusion of the window to hold.
pub fn combine(
    sigma: &EdgeColoring,
    m: usize,
    p: usize,
    q: usize,
) -> Result<EdgeColoring, LiftError> {
    let n = require_left_cycle(sigma)?;
    match verify::check_inclusion(sigma, m)? {
        None => {}
        Some(v) => return Err(LiftError::InclusionFails { m, violation: v }),
    }
    let total = p * m + q * n;
    if total < 3 {
        return Err(LiftError::DegenerateLength(total));
    }
    let g = sigma.graph();
    let big = GridGraph::product(FactorGraph::cycle(total)?, g.right().clone());
    let pm = p * m;

    // cycle edge leaving 0-based position t of the long cycle -> source
    // factor edge of sigma's left cycle (the last window edge maps to the
    // long wrap, so junctions inherit the wrap's colors)
    let left_source = |t0: usize| -> usize {
        let t = t0 + 1;
        if t <= pm {
            let s = (t - 1) % m;
            if s == m - 1 {
                n - 1
            } else {
                s
            }
        } else {
            (t - pm - 1) % n
        }
    };
    // 0-based position t -> source vertex of sigma's left cycle
    let vertex_source = |t0: usize| -> usize {
        let t = t0 + 1;
        if t <= pm {
            (t - 1) % m
        } else {
            (t - pm - 1) % n
        }
    };

    let mut colors = vec![0u8; big.edge_count()];
    for j in 0..g.right().n() {
        for t in 0..total {
            colors[big.left_edge(t, j).0] = sigma.colors()[g.left_edge(left_source(t), j).0];
        }
    }
    for i in 0..total {
        for b in 0..g.right().edge_count() {
            colors[big.right_edge(i, b).0] = sigma.colors()[g.right_edge(vertex_source(i), b).0];
        }
    }
    let out = EdgeColoring::from_colors(big, sigma.k(), colors)?;
    verified(out)
}

/// Rotate a cycle left factor: position `i` of the result takes its colors
/// from position `(i + r) mod m` of the input. Window checks are anchored at
/// position 0, so callers align a window by rotating first.
pub fn rotate_left(c: &EdgeColoring, r: usize) -> Result<EdgeColoring, LiftError> {
    let m = require_left_cycle(c)?;
    let g = c.graph();
    let out = GridGraph::product(g.left().clone(), g.right().clone());
    let mut colors = vec![0u8; out.edge_count()];
    for j in 0..g.right().n() {
        for a in 0..m {
            colors[out.left_edge(a, j).0] = c.colors()[g.left_edge((a + r) % m, j).0];
        }
    }
    for i in 0..m {
        for b in 0..g.right().edge_count() {
            colors[out.right_edge(i, b).0] = c.colors()[g.right_edge((i + r) % m, b).0];
        }
    }
    Ok(EdgeColoring::from_colors(out, c.k(), colors)?)
}

/// Rotate a cycle right factor, analogously.
pub fn rotate_right(c: &EdgeColoring, r: usize) -> Result<EdgeColoring, LiftError> {
    Ok(transpose(&rotate_left(&transpose(c), r)?))
}

/// Swap the two factors: the color of edge ((i,j),(i',j')) moves to
/// ((j,i),(j',i')). Star validity is preserved (the graphs are isomorphic).
pub fn transpose(c: &EdgeColoring) -> EdgeColoring {
    let g = c.graph();
    let t = GridGraph::product(g.right().clone(), g.left().clone());
    let mut colors = vec![0u8; t.edge_count()];
    for j in 0..g.right().n() {
        for a in 0..g.left().edge_count() {
            colors[t.right_edge(j, a).0] = c.colors()[g.left_edge(a, j).0];
        }
    }
    for i in 0..g.left().n() {
        for b in 0..g.right().edge_count() {
            colors[t.left_edge(b, i).0] = c.colors()[g.right_edge(i, b).0];
        }
    }
    EdgeColoring::from_colors(t, c.k(), colors).expect("transpose preserves the budget")
}

/// Keep the first `n` vertices of the right factor as a path, dropping its
/// wrap and any later fibers. A subgraph of a star-valid coloring stays
/// star-valid; the output is re-verified all the same.
pub fn restrict_right_to_path(c: &EdgeColoring, n: usize) -> Result<EdgeColoring, LiftError> {
    let g = c.graph();
    if n < 1 || n > g.right().n() {
        return Err(LiftError::RestrictRange {
            side: Side::Right,
            have: g.right().n(),
            want: n,
        });
    }
    verify::require_star_valid(c)?;
    let small = GridGraph::product(g.left().clone(), FactorGraph::path(n)?);
    let mut colors = vec![0u8; small.edge_count()];
    for j in 0..n {
        for a in 0..g.left().edge_count() {
            colors[small.left_edge(a, j).0] = c.colors()[g.left_edge(a, j).0];
        }
    }
    for i in 0..g.left().n() {
        for b in 0..n - 1 {
            colors[small.right_edge(i, b).0] = c.colors()[g.right_edge(i, b).0];
        }
    }
    let out = EdgeColoring::from_colors(small, c.k(), colors)?;
    verified(out)
}

/// Keep the first `n` vertices of the left factor as a path.
pub fn restrict_left_to_path(c: &EdgeColoring, n: usize) -> Result<EdgeColoring, LiftError> {
    let g = c.graph();
    if n < 1 || n > g.left().n() {
        return Err(LiftError::RestrictRange {
            side: Side::Left,
            have: g.left().n(),
            want: n,
        });
    }
    Ok(transpose(&restrict_right_to_path(&transpose(c), n)?))
}

/// The coloring of `C_m [] H` included in the first `m` fibers (one window
/// copy and nothing else).
pub fn extract_window(sigma: &EdgeColoring, m: usize) -> Result<EdgeColoring, LiftError> {
    combine(sigma, m, 1, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EdgeId;
    use crate::search::{star_color, SearchConfig, SearchStatus};
    use crate::verify::check_inclusion;

    fn solve(l: FactorGraph, r: FactorGraph, k: u32) -> EdgeColoring {
        let g = GridGraph::product(l, r);
        let out = star_color(&g, &SearchConfig::new(k).symmetric()).unwrap();
        assert_eq!(out.status, SearchStatus::Found);
        out.colorings.into_iter().next().unwrap()
    }

    #[test]
    fn tile_identity() {
        let c = EdgeColoring::cycle(&[0, 1, 2, 0, 1, 2], 3).unwrap();
        let t = tile(&c, 1).unwrap();
        assert_eq!(t.colors(), c.colors());
    }

    #[test]
    fn tile_grows_triangle_torus() {
        let sigma = solve(
            FactorGraph::cycle(3).unwrap(),
            FactorGraph::cycle(3).unwrap(),
            6,
        );
        let tiled = tile(&sigma, 3).unwrap();
        assert_eq!(tiled.graph().left().n(), 9);
        assert!(verify::verify_star(&tiled).unwrap().is_none());
        // the tiling construction includes the base window
        assert!(check_inclusion(&tiled, 3).unwrap().is_none());
    }

    #[test]
    fn combine_with_zero_window_copies_is_tiling() {
        let sigma = EdgeColoring::cycle(&[1, 2, 0, 1, 2, 0, 1, 2, 0], 3).unwrap();
        assert!(check_inclusion(&sigma, 3).unwrap().is_none());
        let a = combine(&sigma, 3, 0, 2).unwrap();
        let b = tile(&sigma, 2).unwrap();
        assert_eq!(a.colors(), b.colors());
    }

    #[test]
    fn combine_mixes_window_and_full_copies() {
        let sigma = EdgeColoring::cycle(&[1, 2, 0, 1, 2, 0, 1, 2, 0], 3).unwrap();
        // p=1, q=1: C3 window + full C9 -> C12
        let out = combine(&sigma, 3, 1, 1).unwrap();
        assert_eq!(out.graph().left().n(), 12);
        // extraction is the p=1, q=0 special case
        let w = extract_window(&sigma, 3).unwrap();
        assert_eq!(w.graph().left().n(), 3);
        assert_eq!(w.colors(), &[1, 2, 0]);
    }

    #[test]
    fn combine_rejects_bad_window() {
        let sigma = EdgeColoring::cycle(&[1, 2, 0, 1, 2, 0, 1, 2, 0], 3).unwrap();
        assert!(matches!(
            combine(&sigma, 5, 1, 1),
            Err(LiftError::InclusionFails { .. })
        ));
        assert!(matches!(
            combine(&sigma, 3, 0, 0),
            Err(LiftError::DegenerateLength(0))
        ));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(
            frobenius(3, 7, 12),
            Some(FrobeniusPair { alpha: 4, beta: 0 })
        );
        assert_eq!(frobenius(3, 7, 11), None);
        assert_eq!(
            frobenius(3, 7, 13),
            Some(FrobeniusPair { alpha: 2, beta: 1 })
        );
        // Sylvester guarantee for a coprime pair
        for target in 12..=100 {
            assert!(frobenius(3, 7, target).is_some(), "target {}", target);
        }
    }

    #[test]
    fn frobenius_matches_brute_force_spot() {
        for n in 1..=6u64 {
            for m in 1..=6u64 {
                for target in 0..=60u64 {
                    let brute = (0..=target / n.max(1)).find_map(|a| {
                        let rest = target - a * n;
                        (rest % m == 0).then_some((a, rest / m))
                    });
                    let got = frobenius(n, m, target).map(|f| (f.alpha, f.beta));
                    assert_eq!(got, brute, "n={} m={} t={}", n, m, target);
                }
            }
        }
    }

    #[test]
    fn transpose_involution() {
        let sigma = solve(
            FactorGraph::cycle(3).unwrap(),
            FactorGraph::path(2).unwrap(),
            6,
        );
        let t = transpose(&sigma);
        assert_eq!(t.graph().left().n(), 2);
        let tt = transpose(&t);
        assert_eq!(tt.colors(), sigma.colors());
        assert!(verify::verify_star(&t).unwrap().is_none());
    }

    #[test]
    fn transpose_preserves_violations() {
        // an invalid coloring stays invalid after transposition
        let g = GridGraph::product(FactorGraph::path(2).unwrap(), FactorGraph::path(2).unwrap());
        let c = EdgeColoring::from_colors(g, 2, vec![0, 0, 1, 1]).unwrap();
        let v = verify::verify_star(&c).unwrap().unwrap();
        let t = transpose(&c);
        let tv = verify::verify_star(&t).unwrap().unwrap();
        assert_eq!(v.kind, tv.kind);
    }

    #[test]
    fn restriction_drops_fibers() {
        let sigma = solve(
            FactorGraph::cycle(3).unwrap(),
            FactorGraph::cycle(3).unwrap(),
            6,
        );
        let r = restrict_right_to_path(&sigma, 3).unwrap();
        assert_eq!(r.graph().right().to_string(), "P3");
        assert_eq!(r.graph().edge_count(), 3 * 3 + 3 * 2);
        // colors carried over edge-for-edge on the kept part
        for j in 0..3 {
            for a in 0..3 {
                assert_eq!(
                    r.colors()[r.graph().left_edge(a, j).0],
                    sigma.colors()[sigma.graph().left_edge(a, j).0]
                );
            }
        }
        let r2 = restrict_left_to_path(&sigma, 2).unwrap();
        assert_eq!(r2.graph().left().to_string(), "P2");
        assert!(restrict_right_to_path(&sigma, 4).is_err());
        let _ = EdgeId(0);
    }
}
