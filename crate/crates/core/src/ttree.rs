//! Lazy materialization of the full (q+1)-regular tree with the quotient
//! labeling, vertex addressing, geodesics, and cusp anchors.
//!
//! Every vertex of the full tree carries a label from the quotient tree. The
//! neighbors of a vertex labeled L form a fixed multiset M(L): the quotient
//! successors of L plus copies of L's predecessor label filling up to q+1.
//! A vertex's children are M(L) minus one occurrence of its parent's label,
//! ordered successors-first in canonical label order, then fills.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::curve::{CurveSpec, FiberKind, Point};
use crate::error::{Error, Result};
use crate::stree::{QuotientTree, SLabel};

/// Path of child indices from the root (empty = root).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexAddress(Vec<u32>);

impl VertexAddress {
    pub fn root() -> VertexAddress {
        VertexAddress(Vec::new())
    }

    pub fn new(indices: Vec<u32>) -> VertexAddress {
        VertexAddress(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<VertexAddress> {
        if self.0.is_empty() {
            None
        } else {
            Some(VertexAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, index: usize) -> VertexAddress {
        let mut v = self.0.clone();
        v.push(index as u32);
        VertexAddress(v)
    }

    pub fn truncated(&self, len: usize) -> VertexAddress {
        VertexAddress(self.0[..len].to_vec())
    }

    pub fn starts_with(&self, prefix: &VertexAddress) -> bool {
        self.0.len() >= prefix.0.len() && self.0[..prefix.0.len()] == prefix.0[..]
    }

    /// Length of the longest common prefix with another address.
    pub fn common_prefix_len(&self, other: &VertexAddress) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "/");
        }
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

impl FromStr for VertexAddress {
    type Err = Error;

    /// Parses the text form `/i1/i2/.../ik` with `/` for the root.
    fn from_str(s: &str) -> Result<VertexAddress> {
        let s = s.trim();
        if s == "/" {
            return Ok(VertexAddress::root());
        }
        let body = s
            .strip_prefix('/')
            .ok_or_else(|| Error::Parse(format!("address `{s}` must start with `/`")))?;
        let mut indices = Vec::new();
        for part in body.split('/') {
            let i: u32 = part
                .parse()
                .map_err(|_| Error::Parse(format!("address `{s}`: bad index `{part}`")))?;
            indices.push(i);
        }
        Ok(VertexAddress(indices))
    }
}

/// A materialized vertex of the full tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TVertex {
    pub addr: VertexAddress,
    pub label: SLabel,
    pub parent_label: Option<SLabel>,
}

impl TVertex {
    pub fn invariant(&self) -> i32 {
        self.label.invariant()
    }
}

/// A rational end, named canonically by its anchor: the c(p,1)-labeled
/// vertex from which the end's labels ascend through children forever.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cusp {
    anchor: VertexAddress,
    point: Point,
}

impl Cusp {
    pub fn anchor(&self) -> &VertexAddress {
        &self.anchor
    }

    pub fn point(&self) -> Point {
        self.point
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.anchor)
    }
}

/// The lazily evaluated full tree over a curve.
#[derive(Debug, Clone)]
pub struct Tree {
    quot: QuotientTree,
}

impl Tree {
    pub fn new(spec: CurveSpec) -> Tree {
        Tree {
            quot: QuotientTree::new(spec),
        }
    }

    pub fn from_quotient(quot: QuotientTree) -> Tree {
        Tree { quot }
    }

    pub fn quotient(&self) -> &QuotientTree {
        &self.quot
    }

    pub fn spec(&self) -> &CurveSpec {
        self.quot.spec()
    }

    pub fn q(&self) -> u64 {
        self.quot.q()
    }

    /// The fixed neighbor-label multiset M(L) of any vertex labeled L.
    pub fn neighbor_multiset(&self, label: &SLabel) -> Vec<SLabel> {
        let mut m = self.quot.successors(label);
        if let Some(pred) = self.quot.predecessor(label) {
            let fills = (self.q() as usize + 1) - m.len();
            m.extend(std::iter::repeat_n(pred, fills));
        }
        m
    }

    /// Ordered child labels of a vertex: M(label) minus one occurrence of the
    /// parent label; quotient successors first in canonical order, then fill
    /// copies of the predecessor label.
    pub fn child_labels(&self, label: &SLabel, parent: Option<&SLabel>) -> Vec<SLabel> {
        let mut succ = self.quot.successors(label);
        succ.sort();
        match parent {
            None => {
                debug_assert_eq!(*label, SLabel::O, "only the root has no parent");
                succ
            }
            Some(pl) => {
                if let Some(pos) = succ.iter().position(|s| s == pl) {
                    succ.remove(pos);
                } else {
                    debug_assert_eq!(self.quot.predecessor(label).as_ref(), Some(pl));
                }
                let fills = self.q() as usize - succ.len();
                if fills > 0 {
                    let pred = self
                        .quot
                        .predecessor(label)
                        .expect("fill labels require a predecessor");
                    succ.extend(std::iter::repeat_n(pred, fills));
                }
                succ
            }
        }
    }

    pub fn root(&self) -> TVertex {
        TVertex {
            addr: VertexAddress::root(),
            label: SLabel::O,
            parent_label: None,
        }
    }

    /// Walks from the root to resolve an address into a labeled vertex.
    pub fn vertex(&self, addr: &VertexAddress) -> Result<TVertex> {
        let mut label = SLabel::O;
        let mut parent: Option<SLabel> = None;
        for (depth, &idx) in addr.indices().iter().enumerate() {
            let kids = self.child_labels(&label, parent.as_ref());
            let next = *kids.get(idx as usize).ok_or_else(|| Error::InvalidAddress {
                addr: addr.to_string(),
                reason: format!(
                    "index {idx} out of range at depth {depth} ({} children)",
                    kids.len()
                ),
            })?;
            parent = Some(label);
            label = next;
        }
        Ok(TVertex {
            addr: addr.clone(),
            label,
            parent_label: parent,
        })
    }

    pub fn label_of(&self, addr: &VertexAddress) -> Result<SLabel> {
        Ok(self.vertex(addr)?.label)
    }

    pub fn invariant_at(&self, addr: &VertexAddress) -> Result<i32> {
        Ok(self.vertex(addr)?.label.invariant())
    }

    pub fn children(&self, v: &TVertex) -> Vec<TVertex> {
        self.child_labels(&v.label, v.parent_label.as_ref())
            .into_iter()
            .enumerate()
            .map(|(i, label)| TVertex {
                addr: v.addr.child(i),
                label,
                parent_label: Some(v.label),
            })
            .collect()
    }

    pub fn parent_vertex(&self, v: &TVertex) -> Option<TVertex> {
        v.addr.parent().map(|p| {
            self.vertex(&p)
                .expect("parent of a valid address is valid")
        })
    }

    /// The unique non-backtracking path between two addresses, inclusive.
    pub fn geodesic(
        &self,
        a: &VertexAddress,
        b: &VertexAddress,
    ) -> Result<Vec<VertexAddress>> {
        self.vertex(a)?;
        self.vertex(b)?;
        let lcp = a.common_prefix_len(b);
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * lcp + 1);
        for l in (lcp..=a.len()).rev() {
            out.push(a.truncated(l));
        }
        for l in lcp + 1..=b.len() {
            out.push(b.truncated(l));
        }
        Ok(out)
    }

    /// Wraps a canonical anchor: a vertex labeled c(p,1) whose children
    /// include c(p,2), i.e. whose parent is not the ray continuation.
    pub fn cusp_from_anchor(&self, addr: &VertexAddress) -> Result<Cusp> {
        let v = self.vertex(addr)?;
        match v.label {
            SLabel::C { p, n: 1 } => {
                if v.parent_label == Some(SLabel::C { p, n: 2 }) {
                    Err(Error::NotAnAnchor {
                        addr: addr.to_string(),
                        reason: "its ray ascends through the parent, not a child".into(),
                    })
                } else {
                    Ok(Cusp {
                        anchor: addr.clone(),
                        point: p,
                    })
                }
            }
            other => Err(Error::NotAnAnchor {
                addr: addr.to_string(),
                reason: format!("label is {other}"),
            }),
        }
    }

    /// The ascending ray c(p,1), c(p,2), ... from a cusp's anchor, to the
    /// requested depth.
    pub fn tail(&self, cusp: &Cusp, depth: u32) -> Vec<TVertex> {
        let mut out = Vec::with_capacity(depth as usize);
        let mut cur = self
            .vertex(cusp.anchor())
            .expect("cusp anchors are valid addresses");
        for _ in 1..=depth {
            let next = self.tail_step(&cur);
            out.push(cur);
            cur = next;
        }
        out
    }

    /// From a tail vertex labeled c(p,n), the unique child labeled c(p,n+1).
    pub(crate) fn tail_step(&self, v: &TVertex) -> TVertex {
        let SLabel::C { p, n } = v.label else {
            panic!("tail_step on non-c label {}", v.label);
        };
        let target = SLabel::C { p, n: n + 1 };
        let kids = self.child_labels(&v.label, v.parent_label.as_ref());
        let pos = kids
            .iter()
            .position(|k| *k == target)
            .expect("canonical tails ascend through children");
        TVertex {
            addr: v.addr.child(pos),
            label: target,
            parent_label: Some(v.label),
        }
    }

    /// Address of the n-th tail vertex (n >= 1) of a cusp.
    pub fn tail_address(&self, cusp: &Cusp, n: u32) -> VertexAddress {
        let mut cur = self
            .vertex(cusp.anchor())
            .expect("cusp anchors are valid addresses");
        for _ in 1..n {
            cur = self.tail_step(&cur);
        }
        cur.addr
    }

    /// The canonical cusp reached by ascending invariants from a vertex:
    /// the child of maximal invariant is taken at each step (canonical label
    /// order on ties, the parent when no child ascends) and the resulting
    /// end is resolved to its canonical anchor.
    pub fn canonical_cusp_ascending(&self, addr: &VertexAddress) -> Result<Cusp> {
        let mut cur = self.vertex(addr)?;
        loop {
            if matches!(cur.label, SLabel::C { .. }) {
                return self.c_ascent(cur);
            }
            let inv = cur.label.invariant();
            let kids = self.children(&cur);
            let best = kids
                .into_iter()
                .filter(|k| k.label.invariant() > inv)
                .reduce(|best, k| {
                    let better = k.label.invariant() > best.label.invariant()
                        || (k.label.invariant() == best.label.invariant()
                            && k.label < best.label);
                    if better {
                        k
                    } else {
                        best
                    }
                });
            match best {
                Some(k) => cur = k,
                None => {
                    let parent = self.parent_vertex(&cur).ok_or_else(|| {
                        Error::Internal(format!("no ascending neighbor at {}", cur.addr))
                    })?;
                    debug_assert!(parent.label.invariant() > inv);
                    cur = parent;
                }
            }
        }
    }

    /// Resolves the unique ascending end through a c-labeled vertex to its
    /// canonical anchor: ascend through parents while the parent continues
    /// the ray, then the first child step pins the anchor as an ancestor.
    fn c_ascent(&self, mut cur: TVertex) -> Result<Cusp> {
        loop {
            let SLabel::C { p, n } = cur.label else {
                return Err(Error::Internal(format!(
                    "c_ascent on non-c label {}",
                    cur.label
                )));
            };
            let next_label = SLabel::C { p, n: n + 1 };
            if cur.parent_label == Some(next_label) {
                cur = self
                    .parent_vertex(&cur)
                    .ok_or_else(|| Error::Internal("c-label at the root".into()))?;
            } else {
                let kids = self.child_labels(&cur.label, cur.parent_label.as_ref());
                let pos = kids
                    .iter()
                    .position(|k| *k == next_label)
                    .ok_or_else(|| Error::Internal("ray continuation missing".into()))?;
                let child_addr = cur.addr.child(pos);
                // The anchor sits n steps above the c(p,n+1) child.
                let anchor = child_addr.truncated(child_addr.len() - n as usize);
                return self.cusp_from_anchor(&anchor);
            }
        }
    }

    /// All cusps attached to a minimal vertex: the cusps a reduced symbol of
    /// the vertex's type can enter or exit, sorted canonically.
    pub fn attached_cusps(&self, addr: &VertexAddress) -> Result<Vec<Cusp>> {
        let v = self.vertex(addr)?;
        let mut cusps = Vec::new();
        match v.label {
            SLabel::E { p } => {
                for child in self.children(&v) {
                    debug_assert_eq!(child.label, SLabel::C { p, n: 1 });
                    cusps.push(Cusp {
                        anchor: child.addr,
                        point: p,
                    });
                }
                if let Some(parent) = self.parent_vertex(&v) {
                    cusps.push(self.c_ascent(parent)?);
                }
            }
            SLabel::V {
                class: FiberKind::S,
                ..
            } => {
                cusps.extend(self.cusps_through_v(&v)?);
            }
            SLabel::O => {
                for u in self.v_neighbors(&v) {
                    if !matches!(
                        u.label,
                        SLabel::V {
                            class: FiberKind::Ns,
                            ..
                        }
                    ) {
                        cusps.extend(self.cusps_through_v(&u)?);
                    }
                }
            }
            SLabel::V {
                x: z,
                class: FiberKind::Ns,
            } => {
                for o in self.o_neighbors(&v) {
                    for u in self.v_neighbors(&o) {
                        let SLabel::V { x, class } = u.label else {
                            unreachable!("o-vertices have v-labeled neighbors")
                        };
                        if x != z && class != FiberKind::Ns {
                            cusps.extend(self.cusps_through_v(&u)?);
                        }
                    }
                }
            }
            other => {
                return Err(Error::NotMinimal {
                    addr: addr.to_string(),
                    label: other.to_string(),
                })
            }
        }
        cusps.sort();
        debug_assert!(cusps.windows(2).all(|w| w[0] != w[1]));
        Ok(cusps)
    }

    /// Cusps through the c-neighbors of an os- or s-typed v-vertex.
    fn cusps_through_v(&self, u: &TVertex) -> Result<Vec<Cusp>> {
        let mut out = Vec::new();
        for child in self.children(u) {
            if let SLabel::C { p, n: 1 } = child.label {
                out.push(Cusp {
                    anchor: child.addr,
                    point: p,
                });
            }
        }
        if matches!(u.parent_label, Some(SLabel::C { .. })) {
            let parent = self
                .parent_vertex(u)
                .expect("a vertex with a parent label has a parent");
            out.push(self.c_ascent(parent)?);
        }
        Ok(out)
    }

    /// The v-labeled neighbors (children and parent) of an o-vertex.
    fn v_neighbors(&self, o: &TVertex) -> Vec<TVertex> {
        let mut out = self.children(o);
        if let Some(parent) = self.parent_vertex(o) {
            out.push(parent);
        }
        out
    }

    /// The o-labeled neighbors (children and parent) of an ns-vertex.
    fn o_neighbors(&self, v: &TVertex) -> Vec<TVertex> {
        let mut out = self.children(v);
        if let Some(parent) = self.parent_vertex(v) {
            debug_assert_eq!(parent.label, SLabel::O);
            out.push(parent);
        }
        out
    }

    /// All vertices within the given tree distance of a center, sorted by
    /// address.
    pub fn ball(&self, center: &VertexAddress, radius: u32) -> Result<Vec<TVertex>> {
        self.vertex(center)?;
        let mut seen: BTreeSet<VertexAddress> = BTreeSet::new();
        let mut queue: VecDeque<(VertexAddress, u32)> = VecDeque::new();
        seen.insert(center.clone());
        queue.push_back((center.clone(), 0));
        while let Some((addr, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            let v = self.vertex(&addr)?;
            let mut nbrs: Vec<VertexAddress> =
                self.children(&v).into_iter().map(|c| c.addr).collect();
            if let Some(p) = addr.parent() {
                nbrs.push(p);
            }
            for n in nbrs {
                if seen.insert(n.clone()) {
                    queue.push_back((n, d + 1));
                }
            }
        }
        seen.into_iter().map(|a| self.vertex(&a)).collect()
    }

    /// DOT rendering of a ball around an address.
    pub fn ball_to_dot(&self, center: &VertexAddress, radius: u32) -> Result<String> {
        let vertices = self.ball(center, radius)?;
        let in_ball: BTreeSet<&VertexAddress> = vertices.iter().map(|v| &v.addr).collect();
        let mut s = String::from("graph tree_ball {\n");
        s.push_str("  node [shape=box];\n");
        for v in &vertices {
            s.push_str(&format!(
                "  \"{}\" [label=\"{} {} [{}]\"];\n",
                v.addr,
                v.addr,
                v.label,
                v.invariant()
            ));
        }
        for v in &vertices {
            if let Some(p) = v.addr.parent() {
                if in_ball.contains(&p) {
                    s.push_str(&format!("  \"{}\" -- \"{}\";\n", p, v.addr));
                }
            }
        }
        s.push_str("}\n");
        Ok(s)
    }

    /// Canonical quotient-tree addresses of all minimal vertices, used as
    /// instantiation sites for the relation rows: the root o, the s- and
    /// ns-typed v(x) among its children, and the e(p) at depth three.
    pub fn quotient_minimal_sites(&self) -> Vec<(SLabel, VertexAddress)> {
        let mut out = Vec::new();
        let root = self.root();
        let root_kids = self.children(&root);
        for label in self.quot.minimal_vertices() {
            match label {
                SLabel::O => out.push((label, VertexAddress::root())),
                SLabel::V { .. } => {
                    let child = root_kids
                        .iter()
                        .find(|c| c.label == label)
                        .expect("v-labels appear among root children");
                    out.push((label, child.addr.clone()));
                }
                SLabel::E { p } => {
                    let vx = root_kids
                        .iter()
                        .find(|c| matches!(c.label, SLabel::V { x, .. } if x == p.x()))
                        .expect("the fiber of an os-point appears among root children");
                    let c1 = self
                        .children(vx)
                        .into_iter()
                        .find(|c| c.label == SLabel::C { p, n: 1 })
                        .expect("os v-vertices carry their ray anchor");
                    let e = self
                        .children(&c1)
                        .into_iter()
                        .find(|c| c.label == SLabel::E { p })
                        .expect("anchors over os-points carry the e-vertex");
                    out.push((label, e.addr));
                }
                SLabel::C { .. } => unreachable!("c-labels are never minimal"),
            }
        }
        out
    }
}

/// Convenience map from labels to the multiset of labels, for tests and
/// diagnostics: label -> (count per neighbor label).
pub fn label_multiset_counts(labels: &[SLabel]) -> BTreeMap<SLabel, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(*l).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    fn f3() -> Tree {
        Tree::new(CurveSpec::new(3, [0, 0, 0, 1, 2]).unwrap())
    }

    fn addr(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    #[test]
    fn address_text_round_trip() {
        assert_eq!(addr("/").to_string(), "/");
        assert_eq!(addr("/1/0").to_string(), "/1/0");
        assert_eq!(addr("/1/0").indices(), &[1, 0]);
        assert!("1/0".parse::<VertexAddress>().is_err());
        assert!("/x".parse::<VertexAddress>().is_err());
    }

    #[test]
    fn root_children_are_the_v_labels() {
        let t = f3();
        let kids = t.children(&t.root());
        let labels: Vec<String> = kids.iter().map(|k| k.label.to_string()).collect();
        assert_eq!(labels, vec!["v(0)", "v(1)", "v(2)", "v(inf)"]);
    }

    #[test]
    fn label_walk_examples() {
        let t = f3();
        assert_eq!(t.label_of(&addr("/")).unwrap(), SLabel::O);
        assert_eq!(t.label_of(&addr("/1")).unwrap().to_string(), "v(1)");
        assert_eq!(t.label_of(&addr("/1/0")).unwrap().to_string(), "c((1,1),1)");
        assert_eq!(t.invariant_at(&addr("/")).unwrap(), -1);
        assert!(t.label_of(&addr("/9")).is_err());
    }

    #[test]
    fn e_vertex_children_are_anchor_fills() {
        let t = f3();
        // /2 = v(2) (os), /2/0 = c((2,0),1), whose children are
        // [c((2,0),2), e((2,0)), v(2)].
        let c1 = t.vertex(&addr("/2/0")).unwrap();
        let kid_labels: Vec<String> = t
            .children(&c1)
            .iter()
            .map(|k| k.label.to_string())
            .collect();
        assert_eq!(kid_labels, vec!["c((2,0),2)", "e((2,0))", "v(2)"]);

        let e = t.vertex(&addr("/2/0/1")).unwrap();
        assert_eq!(e.label.to_string(), "e((2,0))");
        let e_kids = t.children(&e);
        assert_eq!(e_kids.len(), 3);
        for k in &e_kids {
            assert_eq!(k.label.to_string(), "c((2,0),1)");
        }
    }

    #[test]
    fn c2_children_follow_the_multiset_rule() {
        let t = f3();
        let c2 = t.vertex(&addr("/2/0/0")).unwrap();
        assert_eq!(c2.label.to_string(), "c((2,0),2)");
        let labels: Vec<String> = t
            .children(&c2)
            .iter()
            .map(|k| k.label.to_string())
            .collect();
        assert_eq!(labels, vec!["c((2,0),3)", "c((2,0),1)", "c((2,0),1)"]);
    }

    #[test]
    fn vertex_degree_and_multiset_rule_hold_on_balls() {
        for (q, coeffs) in [(2u64, [0, 0, 1, 1, 1]), (3, [0, 0, 0, 1, 2])] {
            let t = Tree::new(CurveSpec::new(q, coeffs).unwrap());
            for v in t.ball(&VertexAddress::root(), 5).unwrap() {
                let kids = t.children(&v);
                let expected = if v.addr.is_root() { q + 1 } else { q } as usize;
                assert_eq!(kids.len(), expected);
                // Child labels + parent label = the neighbor multiset.
                let mut labels: Vec<SLabel> = kids.iter().map(|k| k.label).collect();
                if let Some(pl) = v.parent_label {
                    labels.push(pl);
                }
                let mut multiset = t.neighbor_multiset(&v.label);
                labels.sort();
                multiset.sort();
                assert_eq!(labels, multiset, "at {}", v.addr);
                for k in &kids {
                    assert_eq!((k.invariant() - v.invariant()).abs(), 1);
                }
            }
        }
    }

    #[test]
    fn prefix_stability_of_labels() {
        let t = f3();
        let target = addr("/1/1/1/0");
        let v = t.vertex(&target).unwrap();
        for l in 0..target.len() {
            let prefix = target.truncated(l);
            let before = t.label_of(&prefix).unwrap();
            // Resolving the longer address must agree with the prefix walk.
            let via_walk = t.vertex(&target).unwrap();
            assert_eq!(via_walk.label, v.label);
            assert_eq!(t.label_of(&prefix).unwrap(), before);
        }
    }

    #[test]
    fn geodesic_examples() {
        let t = f3();
        let g = t.geodesic(&addr("/0/1"), &addr("/0/2")).unwrap();
        assert_eq!(g, vec![addr("/0/1"), addr("/0"), addr("/0/2")]);
        let g = t.geodesic(&addr("/1/0"), &addr("/1/0")).unwrap();
        assert_eq!(g, vec![addr("/1/0")]);
        let g = t.geodesic(&addr("/"), &addr("/2/0")).unwrap();
        assert_eq!(g, vec![addr("/"), addr("/2"), addr("/2/0")]);
        assert_eq!(
            t.geodesic(&addr("/1/0/0"), &addr("/2/0/1")).unwrap().len(),
            7
        );
    }

    #[test]
    fn cusp_anchor_validation() {
        let t = f3();
        let c = t.cusp_from_anchor(&addr("/2/0")).unwrap();
        assert_eq!(c.point(), Point::Affine { x: 2, y: 0 });
        let labels: Vec<String> = t
            .tail(&c, 3)
            .iter()
            .map(|v| v.label.to_string())
            .collect();
        assert_eq!(labels, vec!["c((2,0),1)", "c((2,0),2)", "c((2,0),3)"]);

        // An e-vertex is not an anchor.
        assert!(matches!(
            t.cusp_from_anchor(&addr("/2/0/1")),
            Err(Error::NotAnAnchor { .. })
        ));
        // A c(p,1)-vertex reached by descending fills ascends through its
        // parent, hence is not canonical.
        let fill = addr("/2/0/0/1");
        assert_eq!(t.label_of(&fill).unwrap().to_string(), "c((2,0),1)");
        assert!(matches!(
            t.cusp_from_anchor(&fill),
            Err(Error::NotAnAnchor { .. })
        ));
        // Its ascending end merges into the canonical anchor /2/0.
        let resolved = t.canonical_cusp_ascending(&fill).unwrap();
        assert_eq!(resolved.anchor(), &addr("/2/0"));
    }

    #[test]
    fn attached_cusp_counts_match_structure() {
        let t = f3();
        // e-vertex: q+1 cusps.
        let e = t.attached_cusps(&addr("/2/0/1")).unwrap();
        assert_eq!(e.len(), 4);
        // s-typed v(1): two cusps.
        let s = t.attached_cusps(&addr("/1")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].anchor(), &addr("/1/0"));
        assert_eq!(s[1].anchor(), &addr("/1/1"));
        // the root o: #E(F_3) = 4 cusps.
        let o = t.attached_cusps(&addr("/")).unwrap();
        assert_eq!(o.len(), 4);
        // ns-typed v(0): (q+1) * #E(F_3) = 16 cusps.
        let ns = t.attached_cusps(&addr("/0")).unwrap();
        assert_eq!(ns.len(), 16);
        // An os-typed v(x) is not minimal.
        assert!(matches!(
            t.attached_cusps(&addr("/2")),
            Err(Error::NotMinimal { .. })
        ));
    }

    #[test]
    fn minimality_census_on_a_ball() {
        // A vertex has >= 2 strictly larger neighbors iff its label is
        // minimal (for this curve every o-vertex qualifies: two fibers have
        // solutions).
        let t = f3();
        for v in t.ball(&VertexAddress::root(), 4).unwrap() {
            let mut higher = 0;
            for k in t.children(&v) {
                if k.invariant() > v.invariant() {
                    higher += 1;
                }
            }
            if let Some(pl) = &v.parent_label {
                if pl.invariant() > v.invariant() {
                    higher += 1;
                }
            }
            assert_eq!(
                higher >= 2,
                v.label.is_minimal(),
                "at {} label {}",
                v.addr,
                v.label
            );
        }
    }

    #[test]
    fn quotient_sites_materialize() {
        let t = f3();
        let sites = t.quotient_minimal_sites();
        let rendered: Vec<(String, String)> = sites
            .iter()
            .map(|(l, a)| (l.to_string(), a.to_string()))
            .collect();
        assert_eq!(
            rendered,
            vec![
                ("e((2,0))".into(), "/2/0/1".into()),
                ("e(inf)".into(), "/3/0/1".into()),
                ("v(1)".into(), "/1".into()),
                ("o".into(), "/".into()),
                ("v(0)".into(), "/0".into()),
            ]
        );
    }

    #[test]
    fn ball_dot_contains_labels() {
        let t = f3();
        let dot = t.ball_to_dot(&addr("/2/0"), 1).unwrap();
        assert!(dot.contains("c((2,0),1)"));
        assert!(dot.contains("e((2,0))"));
        assert!(dot.contains("\"/2\" -- \"/2/0\""));
    }

    #[test]
    fn trees_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Tree>();
        assert_send_sync::<crate::stree::QuotientTree>();
        assert_send_sync::<CurveSpec>();
        assert_send_sync::<Cusp>();
        // Concurrent readers resolve identical labels.
        let t = std::sync::Arc::new(f3());
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let t = t.clone();
                std::thread::spawn(move || t.label_of(&addr("/1/0")).unwrap().to_string())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), "c((1,1),1)");
        }
    }
}
