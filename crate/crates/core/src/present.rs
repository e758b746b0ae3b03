//! Enumeration of the reduced-symbol classes of a curve, assembly of the
//! integer relation matrix from the generator relations at the quotient
//! minimal vertices, and the Borel-Moore homology group via Smith normal
//! form.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::curve::{FiberKind, Point};
use crate::error::{Error, Result};
use crate::snf::{self, Matrix};
use crate::stree::{QuotientTree, SLabel};
use crate::symbols::ReducedClass;
use crate::ttree::{Cusp, Tree, VertexAddress};

/// The complete, canonically ordered list of oriented reduced classes
/// existing for a curve.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    classes: Vec<ReducedClass>,
    index: BTreeMap<ReducedClass, usize>,
}

impl GeneratorSet {
    pub fn classes(&self) -> &[ReducedClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, class: &ReducedClass) -> Option<usize> {
        self.index.get(class).copied()
    }

    /// (e, s, o, ns) counts.
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for class in &self.classes {
            match class {
                ReducedClass::E { .. } => c.0 += 1,
                ReducedClass::S { .. } => c.1 += 1,
                ReducedClass::O { .. } => c.2 += 1,
                ReducedClass::Ns { .. } => c.3 += 1,
            }
        }
        c
    }
}

/// Enumerates every oriented reduced class of the curve: one e-class per
/// os-point, two s-classes per s-fiber, o-classes for ordered point pairs
/// with distinct x, and ns-classes for every (point, ns-fiber, point)
/// triple.
pub fn enumerate_classes(quot: &QuotientTree) -> GeneratorSet {
    let spec = quot.spec();
    let points = spec.rational_points();
    let mut classes = Vec::new();
    for &p in &points {
        if quot.fiber_kind(p.x()) == FiberKind::Os {
            classes.push(ReducedClass::E { p });
        }
    }
    for x in spec.all_x() {
        let fiber = quot.fiber(x);
        if fiber.kind == FiberKind::S {
            let [a, b] = [fiber.solutions[0], fiber.solutions[1]];
            if let (Point::Affine { x, y }, Point::Affine { y: y2, .. }) = (a, b) {
                classes.push(ReducedClass::S {
                    x,
                    y_from: y,
                    y_to: y2,
                });
                classes.push(ReducedClass::S {
                    x,
                    y_from: y2,
                    y_to: y,
                });
            }
        }
    }
    for &a in &points {
        for &b in &points {
            if a.x() != b.x() {
                classes.push(ReducedClass::O { from: a, to: b });
            }
        }
    }
    for x in spec.all_x() {
        if quot.fiber_kind(x) != FiberKind::Ns {
            continue;
        }
        let crate::curve::XCoord::Affine(z) = x else {
            unreachable!("infinity is always an os fiber");
        };
        for &a in &points {
            for &b in &points {
                classes.push(ReducedClass::Ns { from: a, z, to: b });
            }
        }
    }
    classes.sort();
    classes.dedup();
    let index = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();
    GeneratorSet { classes, index }
}

/// Sparse integer rows over the generator set: one per deduplicated
/// class-projected relation instance at a minimal vertex of the quotient
/// tree.
#[derive(Debug, Clone)]
pub struct RelationMatrix {
    pub gens: GeneratorSet,
    /// Sorted sparse rows (class index, coefficient), deduplicated and in
    /// canonical order.
    pub rows: Vec<Vec<(usize, i64)>>,
}

impl RelationMatrix {
    pub fn to_dense(&self) -> Matrix {
        let mut out = vec![vec![BigInt::from(0); self.gens.len()]; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row {
                out[i][*j] = BigInt::from(*c);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let names: Vec<String> = self.gens.classes().iter().map(|c| c.to_string()).collect();
        s.push_str(&names.join(","));
        s.push('\n');
        for row in &self.rows {
            let mut dense = vec![0i64; self.gens.len()];
            for (j, c) in row {
                dense[*j] = *c;
            }
            let cells: Vec<String> = dense.iter().map(|c| c.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Per-site cusp inventory carrying exactly the data class projection
/// needs: the branch a cusp attaches through and its point.
enum SiteCusps {
    E {
        p: Point,
        n: usize,
    },
    S {
        x: u64,
        ys: Vec<u64>,
    },
    O {
        points: Vec<Point>,
    },
    Ns {
        z: u64,
        branches: Vec<VertexAddress>,
        points: Vec<Point>,
    },
}

impl SiteCusps {
    fn build(tree: &Tree, label: &SLabel, site: &VertexAddress) -> Result<SiteCusps> {
        let cusps = tree.attached_cusps(site)?;
        Ok(match label {
            SLabel::E { p } => SiteCusps::E {
                p: *p,
                n: cusps.len(),
            },
            SLabel::V {
                x: crate::curve::XCoord::Affine(x),
                class: FiberKind::S,
            } => SiteCusps::S {
                x: *x,
                ys: cusps
                    .iter()
                    .map(|c| match c.point() {
                        Point::Affine { y, .. } => Ok(y),
                        Point::Infinity => Err(Error::Internal(
                            "s-fiber cusp at infinity".into(),
                        )),
                    })
                    .collect::<Result<_>>()?,
            },
            SLabel::O => SiteCusps::O {
                points: cusps.iter().map(|c| c.point()).collect(),
            },
            SLabel::V {
                x: crate::curve::XCoord::Affine(z),
                class: FiberKind::Ns,
            } => {
                let branches = cusps
                    .iter()
                    .map(|c| branch_toward(tree, site, c))
                    .collect::<Result<_>>()?;
                SiteCusps::Ns {
                    z: *z,
                    branches,
                    points: cusps.iter().map(|c| c.point()).collect(),
                }
            }
            other => {
                return Err(Error::NotMinimal {
                    addr: site.to_string(),
                    label: other.to_string(),
                })
            }
        })
    }

    fn len(&self) -> usize {
        match self {
            SiteCusps::E { n, .. } => *n,
            SiteCusps::S { ys, .. } => ys.len(),
            SiteCusps::O { points } => points.len(),
            SiteCusps::Ns { points, .. } => points.len(),
        }
    }

    /// Whether the ordered pair (i, j) is a same-branch pair (type o or s
    /// rather than the site's own type).
    fn same_branch(&self, i: usize, j: usize) -> bool {
        match self {
            SiteCusps::E { .. } => false,
            SiteCusps::S { .. } => false,
            SiteCusps::O { points } => points[i].x() == points[j].x(),
            SiteCusps::Ns { branches, .. } => branches[i] == branches[j],
        }
    }

    /// The oriented class of the symbol from cusp i to cusp j.
    fn pair_class(&self, i: usize, j: usize) -> ReducedClass {
        match self {
            SiteCusps::E { p, .. } => ReducedClass::E { p: *p },
            SiteCusps::S { x, ys } => ReducedClass::S {
                x: *x,
                y_from: ys[i],
                y_to: ys[j],
            },
            SiteCusps::O { points } => {
                if points[i].x() == points[j].x() {
                    let (Point::Affine { x, y }, Point::Affine { y: y2, .. }) =
                        (points[i], points[j])
                    else {
                        unreachable!("shared x-branches are affine s-fibers")
                    };
                    ReducedClass::S {
                        x,
                        y_from: y,
                        y_to: y2,
                    }
                } else {
                    ReducedClass::O {
                        from: points[i],
                        to: points[j],
                    }
                }
            }
            SiteCusps::Ns {
                z,
                branches,
                points,
            } => {
                if branches[i] != branches[j] {
                    ReducedClass::Ns {
                        from: points[i],
                        z: *z,
                        to: points[j],
                    }
                } else if points[i].x() == points[j].x() {
                    let (Point::Affine { x, y }, Point::Affine { y: y2, .. }) =
                        (points[i], points[j])
                    else {
                        unreachable!("shared v-branches are affine s-fibers")
                    };
                    ReducedClass::S {
                        x,
                        y_from: y,
                        y_to: y2,
                    }
                } else {
                    ReducedClass::O {
                        from: points[i],
                        to: points[j],
                    }
                }
            }
        }
    }

    fn has_three_term(&self) -> bool {
        !matches!(self, SiteCusps::S { .. })
    }
}

/// The first vertex on the path from a site toward a cusp's anchor.
fn branch_toward(tree: &Tree, site: &VertexAddress, cusp: &Cusp) -> Result<VertexAddress> {
    let g = tree.geodesic(site, cusp.anchor())?;
    g.get(1)
        .cloned()
        .ok_or_else(|| Error::Internal(format!("cusp {cusp} anchored at site {site}")))
}

fn push_row(rows: &mut BTreeSet<Vec<(usize, i64)>>, entries: &[(usize, i64)]) {
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for (idx, c) in entries {
        *acc.entry(*idx).or_insert(0) += c;
    }
    let row: Vec<(usize, i64)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
    if !row.is_empty() {
        rows.insert(row);
    }
}

/// Builds the relation matrix: every admissible two- and three-cusp tuple
/// of every generator rule at every minimal vertex of the quotient tree,
/// projected to class coordinates and deduplicated.
pub fn relation_rows(tree: &Tree) -> Result<RelationMatrix> {
    let gens = enumerate_classes(tree.quotient());
    let mut rows: BTreeSet<Vec<(usize, i64)>> = BTreeSet::new();
    for (label, site) in tree.quotient_minimal_sites() {
        let sc = SiteCusps::build(tree, &label, &site)?;
        let n = sc.len();
        let idx = |c: &ReducedClass| -> Result<usize> {
            gens.index_of(c).ok_or_else(|| {
                Error::Internal(format!("class {c} missing from the generator set"))
            })
        };
        // Two-term rows.
        for i in 0..n {
            for j in i + 1..n {
                if sc.same_branch(i, j) && !matches!(sc, SiteCusps::S { .. }) {
                    // The pair is a relation of the lower site type; its
                    // rows arise there.
                    continue;
                }
                push_row(
                    &mut rows,
                    &[(idx(&sc.pair_class(i, j))?, 1), (idx(&sc.pair_class(j, i))?, 1)],
                );
            }
        }
        // Three- and Y-term rows.
        if sc.has_three_term() {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        for (a, b, c) in [(i, j, k), (i, k, j)] {
                            let same = [
                                sc.same_branch(a, b),
                                sc.same_branch(b, c),
                                sc.same_branch(c, a),
                            ];
                            // Zero shared branches is the plain three-term
                            // rule, exactly one the Y-term rule; a fully
                            // shared branch belongs to the lower site type.
                            if same.iter().filter(|s| **s).count() > 1 {
                                continue;
                            }
                            push_row(
                                &mut rows,
                                &[
                                    (idx(&sc.pair_class(a, b))?, 1),
                                    (idx(&sc.pair_class(b, c))?, 1),
                                    (idx(&sc.pair_class(c, a))?, 1),
                                ],
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(RelationMatrix {
        gens,
        rows: rows.into_iter().collect(),
    })
}

/// The abelian group presented by the relation matrix, with the end-count
/// cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct HomologyReport {
    pub free_rank: usize,
    pub torsion: Vec<String>,
    pub generator_count: usize,
    pub relation_rows: usize,
    /// Number of ends of the quotient tree (= #E(F_q)); the expected free
    /// rank is ends - 1. This is a cross-check derived from the quotient
    /// construction, not part of the matrix computation.
    pub ends: usize,
    pub expected_free_rank_from_ends: usize,
    pub matches_ends_oracle: bool,
}

/// Computes the cokernel of the relation matrix as free rank plus torsion.
pub fn homology(tree: &Tree) -> Result<HomologyReport> {
    let matrix = relation_rows(tree)?;
    Ok(homology_of_matrix(tree, &matrix))
}

pub fn homology_of_matrix(tree: &Tree, matrix: &RelationMatrix) -> HomologyReport {
    let dense = matrix.to_dense();
    let factors = snf::invariant_factors(&dense);
    let rank = factors.len();
    let torsion: Vec<String> = factors
        .iter()
        .filter(|f| **f > BigInt::one())
        .map(|f| f.to_string())
        .collect();
    let free_rank = matrix.gens.len() - rank;
    let ends = tree.quotient().ray_points().len();
    let expected = ends - 1;
    HomologyReport {
        free_rank,
        torsion: torsion.clone(),
        generator_count: matrix.gens.len(),
        relation_rows: matrix.rows.len(),
        ends,
        expected_free_rank_from_ends: expected,
        matches_ends_oracle: free_rank == expected && torsion.is_empty(),
    }
}

/// Full JSON-facing presentation report.
#[derive(Debug, Clone, Serialize)]
pub struct PresentationReport {
    pub curve: String,
    pub point_count: usize,
    pub class_counts: ClassCounts,
    pub generators: Vec<String>,
    pub matrix_rows: usize,
    pub matrix_cols: usize,
    pub invariant_factors: Vec<String>,
    pub rank: usize,
    pub homology: HomologyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassCounts {
    pub e: usize,
    pub s: usize,
    pub o: usize,
    pub ns: usize,
    pub total: usize,
}

pub fn presentation(tree: &Tree) -> Result<PresentationReport> {
    let matrix = relation_rows(tree)?;
    let (e, s, o, ns) = matrix.gens.counts();
    let dense = matrix.to_dense();
    let factors = snf::invariant_factors(&dense);
    let homology = homology_of_matrix(tree, &matrix);
    Ok(PresentationReport {
        curve: tree.spec().to_string(),
        point_count: tree.spec().point_count(),
        class_counts: ClassCounts {
            e,
            s,
            o,
            ns,
            total: matrix.gens.len(),
        },
        generators: matrix.gens.classes().iter().map(|c| c.to_string()).collect(),
        matrix_rows: matrix.rows.len(),
        matrix_cols: matrix.gens.len(),
        rank: factors.len(),
        invariant_factors: factors.iter().map(|f| f.to_string()).collect(),
        homology,
    })
}
