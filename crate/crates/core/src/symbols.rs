//! Modular symbols as ordered cusp pairs: geodesics, invariant profiles,
//! reduced-type classification, and decomposition into reduced symbols.

use std::fmt;

use serde::Serialize;

use crate::curve::{FiberKind, Point, XCoord};
use crate::error::{Error, Result};
use crate::stree::SLabel;
use crate::ttree::{Cusp, TVertex, Tree, VertexAddress};

/// An ordered pair of distinct cusps, identified with the unique
/// non-backtracking bi-infinite path between them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModularSymbol {
    from: Cusp,
    to: Cusp,
}

impl ModularSymbol {
    pub fn new(from: Cusp, to: Cusp) -> Result<ModularSymbol> {
        if from == to {
            return Err(Error::DegenerateSymbol {
                addr: from.anchor().to_string(),
            });
        }
        Ok(ModularSymbol { from, to })
    }

    pub fn from_cusp(&self) -> &Cusp {
        &self.from
    }

    pub fn to_cusp(&self) -> &Cusp {
        &self.to
    }

    /// The orientation-reversed symbol.
    pub fn reversed(&self) -> ModularSymbol {
        ModularSymbol {
            from: self.to.clone(),
            to: self.from.clone(),
        }
    }
}

impl fmt::Display for ModularSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.from.anchor(), self.to.anchor())
    }
}

/// Parses the symbol text form `{<anchor-address>,<anchor-address>}`,
/// validating both anchors on the tree.
pub fn parse_symbol(tree: &Tree, s: &str) -> Result<ModularSymbol> {
    let bad = |m: &str| Error::Parse(format!("symbol `{s}`: {m}"));
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| bad("expected `{addr,addr}`"))?;
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| bad("expected two comma-separated addresses"))?;
    let from = tree.cusp_from_anchor(&a.trim().parse()?)?;
    let to = tree.cusp_from_anchor(&b.trim().parse()?)?;
    ModularSymbol::new(from, to)
}

/// The finite segment of a symbol's bi-infinite geodesic lying between the
/// two cusp tails, with its invariant profile.
#[derive(Debug, Clone)]
pub struct SymbolPath {
    pub core: Vec<TVertex>,
    pub profile: Vec<i32>,
    /// Indices of local minima of the bi-infinite profile (all interior).
    pub minima: Vec<usize>,
    /// Indices of local maxima strictly between two minima.
    pub maxima: Vec<usize>,
}

impl SymbolPath {
    pub fn labels(&self) -> Vec<SLabel> {
        self.core.iter().map(|v| v.label).collect()
    }
}

/// Walks the infinite ray of a cusp from the root: the anchor's indices,
/// then the ascending tail children.
struct RayIndices<'t> {
    tree: &'t Tree,
    anchor: VertexAddress,
    pos: usize,
    tail: Option<TVertex>,
}

impl<'t> RayIndices<'t> {
    fn new(tree: &'t Tree, cusp: &Cusp) -> RayIndices<'t> {
        RayIndices {
            tree,
            anchor: cusp.anchor().clone(),
            pos: 0,
            tail: None,
        }
    }

    fn next_index(&mut self) -> u32 {
        if self.pos < self.anchor.len() {
            let i = self.anchor.indices()[self.pos];
            self.pos += 1;
            return i;
        }
        let cur = self.tail.take().unwrap_or_else(|| {
            self.tree
                .vertex(&self.anchor)
                .expect("cusp anchors are valid")
        });
        let next = self.tree.tail_step(&cur);
        let idx = *next.addr.indices().last().expect("tail steps descend");
        self.tail = Some(next);
        self.pos += 1;
        idx
    }
}

/// The deepest vertex common to both cusps' rays from the root.
fn ray_divergence(tree: &Tree, a: &Cusp, b: &Cusp) -> VertexAddress {
    let mut ra = RayIndices::new(tree, a);
    let mut rb = RayIndices::new(tree, b);
    let mut prefix = Vec::new();
    loop {
        let ia = ra.next_index();
        let ib = rb.next_index();
        if ia != ib {
            return VertexAddress::new(prefix);
        }
        prefix.push(ia);
    }
}

/// Computes the core of the bi-infinite geodesic of a symbol. The core runs
/// from where the from-tail leaves the geodesic to where the to-tail joins
/// it; its profile continues strictly increasing into both tails.
pub fn symbol_path(tree: &Tree, sym: &ModularSymbol) -> Result<SymbolPath> {
    let d = ray_divergence(tree, &sym.from, &sym.to);
    let endpoint = |cusp: &Cusp| -> VertexAddress {
        if d.len() >= cusp.anchor().len() {
            // The rays diverge on this cusp's tail.
            d.clone()
        } else {
            cusp.anchor().clone()
        }
    };
    let p_from = endpoint(&sym.from);
    let p_to = endpoint(&sym.to);
    let core: Vec<TVertex> = tree
        .geodesic(&p_from, &p_to)?
        .iter()
        .map(|a| tree.vertex(a))
        .collect::<Result<_>>()?;
    let profile: Vec<i32> = core.iter().map(|v| v.invariant()).collect();
    let n = profile.len() as isize;
    debug_assert!(profile.windows(2).all(|w| (w[0] - w[1]).abs() == 1));
    // Virtual extension: the profile ascends into both tails.
    let at = |i: isize| -> i32 {
        if i < 0 {
            profile[0] + (-i) as i32
        } else if i >= n {
            profile[n as usize - 1] + (i - n + 1) as i32
        } else {
            profile[i as usize]
        }
    };
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 0..n {
        if at(i - 1) > at(i) && at(i) < at(i + 1) {
            minima.push(i as usize);
        }
        if at(i - 1) < at(i) && at(i) > at(i + 1) {
            maxima.push(i as usize);
        }
    }
    Ok(SymbolPath {
        core,
        profile,
        minima,
        maxima,
    })
}

/// One of the four oriented reduced-symbol classes, read off the label
/// sequence around the single minimum of a reduced path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReducedClass {
    /// ..., c(p,1), e(p), c(p,1), ...
    E { p: Point },
    /// ..., c((x,y),1), v(x), c((x,y'),1), ... with y' the negation of y.
    S { x: u64, y_from: u64, y_to: u64 },
    /// ..., c(p,1), v(x), o, v(x'), c(p',1), ... with x != x'.
    O { from: Point, to: Point },
    /// ..., c(p,1), v(x), o, v(z), o, v(x'), c(p',1), ... with z a ns fiber.
    Ns { from: Point, z: u64, to: Point },
}

impl ReducedClass {
    pub fn type_tag(&self) -> &'static str {
        match self {
            ReducedClass::E { .. } => "e",
            ReducedClass::S { .. } => "s",
            ReducedClass::O { .. } => "o",
            ReducedClass::Ns { .. } => "ns",
        }
    }

    /// The class of the orientation-reversed symbol.
    pub fn reversed(&self) -> ReducedClass {
        match *self {
            ReducedClass::E { p } => ReducedClass::E { p },
            ReducedClass::S { x, y_from, y_to } => ReducedClass::S {
                x,
                y_from: y_to,
                y_to: y_from,
            },
            ReducedClass::O { from, to } => ReducedClass::O { from: to, to: from },
            ReducedClass::Ns { from, z, to } => ReducedClass::Ns { from: to, z, to: from },
        }
    }
}

impl fmt::Display for ReducedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReducedClass::E { p } => write!(f, "e({p})"),
            ReducedClass::S { x, y_from, y_to } => write!(f, "s({x};{y_from},{y_to})"),
            ReducedClass::O { from, to } => write!(f, "o({from}->{to})"),
            ReducedClass::Ns { from, z, to } => write!(f, "ns({from};{z};{to})"),
        }
    }
}

/// Result of matching a symbol against the four reduced templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Reduced(ReducedClass),
    NotReduced,
}

impl Classification {
    pub fn reduced(self) -> Option<ReducedClass> {
        match self {
            Classification::Reduced(c) => Some(c),
            Classification::NotReduced => None,
        }
    }
}

fn anchor_point_on_side(path: &SymbolPath, idx: usize) -> Result<Point> {
    match path.core[idx].label {
        SLabel::C { p, n: 1 } => Ok(p),
        other => Err(Error::Internal(format!(
            "expected a c(p,1) label on a reduced side, found {other}"
        ))),
    }
}

/// Classifies a symbol's path. A path is reduced iff its bi-infinite
/// profile has a single minimum and strictly monotone sides; the class is
/// read off the labels around the minimum.
pub fn classify_path(path: &SymbolPath) -> Result<Classification> {
    if path.minima.len() != 1 {
        return Ok(Classification::NotReduced);
    }
    if !path.maxima.is_empty() {
        return Err(Error::Internal(
            "single-minimum profile with a local maximum".into(),
        ));
    }
    let i = path.minima[0];
    let min = &path.core[i];
    let class = match min.label {
        SLabel::E { p } => ReducedClass::E { p },
        SLabel::V {
            x: XCoord::Affine(x),
            class: FiberKind::S,
        } => {
            let side = |idx: usize| -> Result<u64> {
                match path.core[idx].label {
                    SLabel::C {
                        p: Point::Affine { y, .. },
                        n: 1,
                    } => Ok(y),
                    other => Err(Error::Internal(format!("s-minimum flanked by {other}"))),
                }
            };
            ReducedClass::S {
                x,
                y_from: side(i - 1)?,
                y_to: side(i + 1)?,
            }
        }
        SLabel::O => ReducedClass::O {
            from: anchor_point_on_side(path, i - 2)?,
            to: anchor_point_on_side(path, i + 2)?,
        },
        SLabel::V {
            x: XCoord::Affine(z),
            class: FiberKind::Ns,
        } => ReducedClass::Ns {
            from: anchor_point_on_side(path, i - 3)?,
            z,
            to: anchor_point_on_side(path, i + 3)?,
        },
        other => {
            return Err(Error::Internal(format!(
                "profile minimum at non-minimal label {other}"
            )))
        }
    };
    Ok(Classification::Reduced(class))
}

/// Classifies a modular symbol against the four reduced templates.
pub fn classify(tree: &Tree, sym: &ModularSymbol) -> Result<Classification> {
    classify_path(&symbol_path(tree, sym)?)
}

/// A path-splitting record: the identity {from,to} = {from,via} + {via,to}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub symbol: ModularSymbol,
    pub via: Cusp,
}

/// Decomposes a symbol into reduced symbols, one per local minimum of its
/// profile, recording the split at each step.
///
/// At each step the first local minimum is isolated: the canonical cusp
/// through the following local maximum is computed by ascending invariants,
/// the piece up to that cusp split off, and the remainder recursed on.
pub fn decompose_with_splits(
    tree: &Tree,
    sym: &ModularSymbol,
) -> Result<(Vec<ModularSymbol>, Vec<Split>)> {
    let mut pieces = Vec::new();
    let mut splits = Vec::new();
    let mut cur = sym.clone();
    loop {
        let path = symbol_path(tree, &cur)?;
        if path.minima.len() <= 1 {
            pieces.push(cur);
            break;
        }
        let i1 = path.minima[0];
        let j = *path
            .maxima
            .iter()
            .find(|&&j| j > i1)
            .ok_or_else(|| Error::Internal("no maximum after the first minimum".into()))?;
        let gamma = tree.canonical_cusp_ascending(&path.core[j].addr)?;
        splits.push(Split {
            symbol: cur.clone(),
            via: gamma.clone(),
        });
        pieces.push(ModularSymbol::new(cur.from.clone(), gamma.clone())?);
        cur = ModularSymbol::new(gamma, cur.to)?;
    }
    Ok((pieces, splits))
}

/// Decomposes a symbol into reduced symbols (telescoping, one per profile
/// minimum).
pub fn decompose(tree: &Tree, sym: &ModularSymbol) -> Result<Vec<ModularSymbol>> {
    Ok(decompose_with_splits(tree, sym)?.0)
}

/// JSON-facing diagnostics for a symbol.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolDiagnostics {
    pub symbol: String,
    pub labels: Vec<String>,
    pub profile: Vec<i32>,
    pub minima: Vec<usize>,
    pub class: Option<String>,
}

pub fn diagnostics(tree: &Tree, sym: &ModularSymbol) -> Result<SymbolDiagnostics> {
    let path = symbol_path(tree, sym)?;
    let class = classify_path(&path)?;
    Ok(SymbolDiagnostics {
        symbol: sym.to_string(),
        labels: path.labels().iter().map(|l| l.to_string()).collect(),
        profile: path.profile.clone(),
        minima: path.minima.clone(),
        class: class.reduced().map(|c| c.to_string()),
    })
}
