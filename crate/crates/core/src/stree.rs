//! The labeled quotient tree: typed vertices, invariants, the successor
//! relation, and DOT export.

use std::collections::BTreeMap;
use std::fmt;

use crate::curve::{CurveSpec, FiberClass, FiberKind, Point, XCoord};

/// Vertex label of the quotient tree (and, by extension, of the full tree).
///
/// The derived order is the canonical one: o < v(x) < c(p,n) < e(p), with
/// v-labels by x (affine ascending, infinity last) and c/e-labels by point
/// then index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SLabel {
    O,
    V { x: XCoord, class: FiberKind },
    C { p: Point, n: u32 },
    E { p: Point },
}

impl SLabel {
    /// The integer invariant attached to each label: c(p,n) -> n; v(x) of
    /// type os or s and e(p) -> 0; o -> -1; v(x) of type ns -> -2.
    pub fn invariant(&self) -> i32 {
        match self {
            SLabel::O => -1,
            SLabel::V {
                class: FiberKind::Ns,
                ..
            } => -2,
            SLabel::V { .. } => 0,
            SLabel::C { n, .. } => *n as i32,
            SLabel::E { .. } => 0,
        }
    }

    /// Minimal vertices are those of type e, s, o, or ns.
    pub fn is_minimal(&self) -> bool {
        matches!(
            self,
            SLabel::O
                | SLabel::E { .. }
                | SLabel::V {
                    class: FiberKind::S | FiberKind::Ns,
                    ..
                }
        )
    }

    /// Short type tag: "o", "ns", "os", "s", "c", "e".
    pub fn type_tag(&self) -> &'static str {
        match self {
            SLabel::O => "o",
            SLabel::V {
                class: FiberKind::Ns,
                ..
            } => "ns",
            SLabel::V {
                class: FiberKind::Os,
                ..
            } => "os",
            SLabel::V {
                class: FiberKind::S,
                ..
            } => "s",
            SLabel::C { .. } => "c",
            SLabel::E { .. } => "e",
        }
    }
}

impl fmt::Display for SLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SLabel::O => write!(f, "o"),
            SLabel::V { x, .. } => write!(f, "v({x})"),
            SLabel::C { p, n } => write!(f, "c({p},{n})"),
            SLabel::E { p } => write!(f, "e({p})"),
        }
    }
}

/// The quotient tree of the full tree under the arithmetic group action,
/// built combinatorially from the fiber classification.
///
/// Core vertices are o, the v(x), and the e(p); each rational point p
/// carries one infinite ray c(p,1), c(p,2), ... stored symbolically.
#[derive(Debug, Clone)]
pub struct QuotientTree {
    spec: CurveSpec,
    fibers: BTreeMap<XCoord, FiberClass>,
}

impl QuotientTree {
    pub fn new(spec: CurveSpec) -> QuotientTree {
        let fibers = spec.fiber_map();
        QuotientTree { spec, fibers }
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn q(&self) -> u64 {
        self.spec.q()
    }

    pub fn fiber(&self, x: XCoord) -> &FiberClass {
        &self.fibers[&x]
    }

    pub fn fiber_kind(&self, x: XCoord) -> FiberKind {
        self.fibers[&x].kind
    }

    /// The v-label of an x-line, carrying its fiber class.
    pub fn v_label(&self, x: XCoord) -> SLabel {
        SLabel::V {
            x,
            class: self.fiber_kind(x),
        }
    }

    /// One ray per rational point; the number of rays equals #E(F_q).
    pub fn ray_points(&self) -> Vec<Point> {
        self.spec.rational_points()
    }

    /// Minimal vertices of the quotient tree: every e(p), the s-typed v(x),
    /// the o vertex, and the ns-typed v(x).
    pub fn minimal_vertices(&self) -> Vec<SLabel> {
        let mut out = Vec::new();
        for p in self.ray_points() {
            if self.fiber_kind(p.x()) == FiberKind::Os {
                out.push(SLabel::E { p });
            }
        }
        for (&x, fiber) in &self.fibers {
            if fiber.kind == FiberKind::S {
                out.push(self.v_label(x));
            }
        }
        out.push(SLabel::O);
        for (&x, fiber) in &self.fibers {
            if fiber.kind == FiberKind::Ns {
                out.push(self.v_label(x));
            }
        }
        out
    }

    /// Successors along the ends of the quotient tree, in the construction's
    /// order: e(p) and c(p,2) follow c(p,1) on an os-branch.
    pub fn successors(&self, l: &SLabel) -> Vec<SLabel> {
        match l {
            SLabel::O => self
                .spec
                .all_x()
                .into_iter()
                .map(|x| self.v_label(x))
                .collect(),
            SLabel::V { x, class } => match class {
                FiberKind::Ns => vec![],
                _ => self.fibers[x]
                    .solutions
                    .iter()
                    .map(|&p| SLabel::C { p, n: 1 })
                    .collect(),
            },
            SLabel::C { p, n: 1 } => match self.fiber_kind(p.x()) {
                FiberKind::Os => vec![SLabel::E { p: *p }, SLabel::C { p: *p, n: 2 }],
                FiberKind::S => vec![SLabel::C { p: *p, n: 2 }],
                FiberKind::Ns => unreachable!("c-label over an ns fiber"),
            },
            SLabel::C { p, n } => vec![SLabel::C { p: *p, n: n + 1 }],
            SLabel::E { .. } => vec![],
        }
    }

    /// The unique predecessor toward o, if any.
    pub fn predecessor(&self, l: &SLabel) -> Option<SLabel> {
        match l {
            SLabel::O => None,
            SLabel::V { .. } => Some(SLabel::O),
            SLabel::C { p, n: 1 } => Some(self.v_label(p.x())),
            SLabel::C { p, n } => Some(SLabel::C { p: *p, n: n - 1 }),
            SLabel::E { p } => Some(SLabel::C { p: *p, n: 1 }),
        }
    }

    /// All vertices with rays materialized to the given depth, in canonical
    /// order starting from o.
    pub fn vertices_to_depth(&self, depth: u32) -> Vec<SLabel> {
        let mut out = vec![SLabel::O];
        for x in self.spec.all_x() {
            out.push(self.v_label(x));
        }
        for p in self.ray_points() {
            if self.fiber_kind(p.x()) == FiberKind::Os {
                out.push(SLabel::E { p });
            }
            for n in 1..=depth {
                out.push(SLabel::C { p, n });
            }
        }
        out
    }

    /// Edges of the truncation produced by `vertices_to_depth`.
    pub fn edges_to_depth(&self, depth: u32) -> Vec<(SLabel, SLabel)> {
        let mut out = Vec::new();
        for v in self.vertices_to_depth(depth) {
            for s in self.successors(&v) {
                if let SLabel::C { n, .. } = s {
                    if n > depth {
                        continue;
                    }
                }
                out.push((v, s));
            }
        }
        out
    }

    /// DOT rendering with rays truncated at `ray_depth`.
    pub fn to_dot(&self, ray_depth: u32) -> String {
        let mut s = String::from("graph quotient_tree {\n");
        s.push_str("  node [shape=box];\n");
        for v in self.vertices_to_depth(ray_depth) {
            s.push_str(&format!(
                "  \"{v}\" [label=\"{v} [{}, {}]\"];\n",
                v.type_tag(),
                v.invariant()
            ));
        }
        for (a, b) in self.edges_to_depth(ray_depth) {
            s.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3_tree() -> QuotientTree {
        QuotientTree::new(CurveSpec::new(3, [0, 0, 0, 1, 2]).unwrap())
    }

    fn f2_tree() -> QuotientTree {
        QuotientTree::new(CurveSpec::new(2, [0, 0, 1, 1, 1]).unwrap())
    }

    #[test]
    fn quotient_structure_of_running_curves() {
        let t = f3_tree();
        assert_eq!(t.fiber_kind(XCoord::Affine(0)), FiberKind::Ns);
        assert_eq!(t.fiber_kind(XCoord::Affine(1)), FiberKind::S);
        assert_eq!(t.fiber_kind(XCoord::Affine(2)), FiberKind::Os);
        assert_eq!(t.fiber_kind(XCoord::Infinity), FiberKind::Os);
        assert_eq!(t.ray_points().len(), 4);

        let t2 = f2_tree();
        assert_eq!(t2.fiber_kind(XCoord::Affine(0)), FiberKind::Ns);
        assert_eq!(t2.fiber_kind(XCoord::Affine(1)), FiberKind::Ns);
        assert_eq!(t2.fiber_kind(XCoord::Infinity), FiberKind::Os);
        assert_eq!(t2.ray_points(), vec![Point::Infinity]);
    }

    #[test]
    fn degree_of_o_is_q_plus_one() {
        for t in [f3_tree(), f2_tree()] {
            assert_eq!(t.successors(&SLabel::O).len() as u64, t.q() + 1);
        }
    }

    #[test]
    fn invariant_table() {
        let t = f3_tree();
        let p = Point::Affine { x: 2, y: 0 };
        assert_eq!(SLabel::C { p, n: 5 }.invariant(), 5);
        assert_eq!(SLabel::O.invariant(), -1);
        assert_eq!(t.v_label(XCoord::Affine(0)).invariant(), -2);
        assert_eq!(t.v_label(XCoord::Affine(1)).invariant(), 0);
        assert_eq!(t.v_label(XCoord::Affine(2)).invariant(), 0);
        assert_eq!(SLabel::E { p }.invariant(), 0);
    }

    #[test]
    fn minimal_vertex_census() {
        let t = f3_tree();
        let minimal = t.minimal_vertices();
        assert_eq!(minimal.len(), 5);
        assert_eq!(
            minimal,
            vec![
                SLabel::E {
                    p: Point::Affine { x: 2, y: 0 }
                },
                SLabel::E { p: Point::Infinity },
                t.v_label(XCoord::Affine(1)),
                SLabel::O,
                t.v_label(XCoord::Affine(0)),
            ]
        );

        let t2 = f2_tree();
        assert_eq!(
            t2.minimal_vertices(),
            vec![
                SLabel::E { p: Point::Infinity },
                SLabel::O,
                t2.v_label(XCoord::Affine(0)),
                t2.v_label(XCoord::Affine(1)),
            ]
        );
    }

    #[test]
    fn successor_examples() {
        let t = f3_tree();
        assert_eq!(
            t.successors(&SLabel::O),
            vec![
                t.v_label(XCoord::Affine(0)),
                t.v_label(XCoord::Affine(1)),
                t.v_label(XCoord::Affine(2)),
                t.v_label(XCoord::Infinity),
            ]
        );
        let p = Point::Affine { x: 2, y: 0 };
        assert_eq!(
            t.successors(&SLabel::C { p, n: 1 }),
            vec![SLabel::E { p }, SLabel::C { p, n: 2 }]
        );
        assert_eq!(t.successors(&SLabel::E { p }), vec![]);
        assert_eq!(t.successors(&t.v_label(XCoord::Affine(0))), vec![]);
        let ps = Point::Affine { x: 1, y: 1 };
        let ps2 = Point::Affine { x: 1, y: 2 };
        assert_eq!(
            t.successors(&t.v_label(XCoord::Affine(1))),
            vec![SLabel::C { p: ps, n: 1 }, SLabel::C { p: ps2, n: 1 }]
        );
    }

    #[test]
    fn adjacent_invariants_differ_by_one() {
        for t in [f3_tree(), f2_tree()] {
            let edges = t.edges_to_depth(10);
            assert!(!edges.is_empty());
            for (a, b) in &edges {
                assert_eq!((a.invariant() - b.invariant()).abs(), 1, "{a} -- {b}");
            }
            // Tree check on the truncation: |edges| = |vertices| - 1.
            assert_eq!(edges.len(), t.vertices_to_depth(10).len() - 1);
        }
    }

    #[test]
    fn dot_export_is_deterministic() {
        let t = f3_tree();
        let dot = t.to_dot(3);
        assert_eq!(dot, t.to_dot(3));
        assert!(dot.contains("\"o\" [label=\"o [o, -1]\"]"));
        assert!(dot.contains("\"v(0)\" [label=\"v(0) [ns, -2]\"]"));
        assert!(dot.contains("\"e((2,0))\""));
        assert!(dot.contains("\"c((2,0),3)\""));
        assert!(!dot.contains("c((2,0),4)"));
    }
}
