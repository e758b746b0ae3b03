//! Structural properties of the labeled tree over the named test curves.

use ellsym::curve::CurveSpec;
use ellsym::stree::SLabel;
use ellsym::ttree::{Tree, VertexAddress};
use proptest::prelude::*;

fn test_curves() -> Vec<CurveSpec> {
    vec![
        CurveSpec::new(2, [0, 0, 1, 1, 1]).unwrap(),
        CurveSpec::new(2, [1, 0, 1, 0, 1]).unwrap(),
        CurveSpec::new(3, [0, 0, 0, 1, 2]).unwrap(),
        CurveSpec::new(3, [0, 0, 0, 2, 1]).unwrap(),
        CurveSpec::new(5, [0, 0, 0, 1, 1]).unwrap(),
        CurveSpec::new(5, [0, 0, 0, 0, 1]).unwrap(),
    ]
}

#[test]
fn balls_satisfy_degree_multiset_and_invariant_rules() {
    for spec in test_curves() {
        let q = spec.q();
        let tree = Tree::new(spec);
        for v in tree.ball(&VertexAddress::root(), 5).unwrap() {
            let kids = tree.children(&v);
            let expected = if v.addr.is_root() { q + 1 } else { q } as usize;
            assert_eq!(kids.len(), expected, "at {}", v.addr);
            let mut labels: Vec<SLabel> = kids.iter().map(|k| k.label).collect();
            if let Some(pl) = v.parent_label {
                labels.push(pl);
            }
            labels.sort();
            let mut multiset = tree.neighbor_multiset(&v.label);
            multiset.sort();
            assert_eq!(labels, multiset, "multiset rule at {}", v.addr);
            for k in &kids {
                assert_eq!(
                    (k.invariant() - v.invariant()).abs(),
                    1,
                    "invariant step at {}",
                    k.addr
                );
            }
        }
    }
}

#[test]
fn minimal_vertices_are_exactly_the_local_minima_candidates() {
    for spec in test_curves() {
        let tree = Tree::new(spec.clone());
        let solved_fibers = spec
            .all_x()
            .iter()
            .filter(|&&x| !spec.fiber_solutions(x).solutions.is_empty())
            .count();
        for v in tree.ball(&VertexAddress::root(), 4).unwrap() {
            let mut higher = 0;
            for k in tree.children(&v) {
                if k.invariant() > v.invariant() {
                    higher += 1;
                }
            }
            if let Some(pl) = &v.parent_label {
                if pl.invariant() > v.invariant() {
                    higher += 1;
                }
            }
            let expect = match v.label {
                SLabel::O => solved_fibers >= 2,
                other => other.is_minimal(),
            };
            assert_eq!(higher >= 2, expect, "at {} ({})", v.addr, v.label);
        }
    }
}

#[test]
fn ray_count_equals_point_count() {
    for spec in test_curves() {
        let tree = Tree::new(spec.clone());
        assert_eq!(
            tree.quotient().ray_points().len(),
            spec.point_count(),
            "curve {spec}"
        );
    }
}

proptest! {
    #[test]
    fn address_resolution_is_prefix_stable(indices in proptest::collection::vec(0u32..4, 0..7)) {
        let tree = Tree::new(CurveSpec::new(3, [0, 0, 0, 1, 2]).unwrap());
        let addr = VertexAddress::new(indices);
        if let Ok(v) = tree.vertex(&addr) {
            // Every prefix resolves, and re-resolving the full address gives
            // the same label.
            for l in 0..addr.len() {
                prop_assert!(tree.vertex(&addr.truncated(l)).is_ok());
            }
            prop_assert_eq!(tree.vertex(&addr).unwrap().label, v.label);
            // Text form round-trips.
            let text = addr.to_string();
            let parsed: VertexAddress = text.parse().unwrap();
            prop_assert_eq!(parsed, addr);
        }
    }

    #[test]
    fn geodesics_have_lcp_length(a in proptest::collection::vec(0u32..3, 0..6),
                                 b in proptest::collection::vec(0u32..3, 0..6)) {
        let tree = Tree::new(CurveSpec::new(2, [0, 0, 1, 1, 1]).unwrap());
        let a = VertexAddress::new(a);
        let b = VertexAddress::new(b);
        if tree.vertex(&a).is_ok() && tree.vertex(&b).is_ok() {
            let g = tree.geodesic(&a, &b).unwrap();
            let lcp = a.common_prefix_len(&b);
            prop_assert_eq!(g.len(), a.len() + b.len() - 2 * lcp + 1);
            prop_assert_eq!(g.first().unwrap(), &a);
            prop_assert_eq!(g.last().unwrap(), &b);
            // Consecutive addresses are adjacent.
            for w in g.windows(2) {
                let d = w[0].len().abs_diff(w[1].len());
                prop_assert_eq!(d, 1);
                prop_assert!(w[0].starts_with(&w[1]) || w[1].starts_with(&w[0]));
            }
        }
    }
}
