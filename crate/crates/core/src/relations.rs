//! Formal integer combinations of symbols, cusp and edge balance, the nine
//! generator relations, and the certified reduction of balanced relations
//! over those generators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{
    classify_path, decompose_with_splits, symbol_path, Classification, ModularSymbol,
    ReducedClass, Split,
};
use crate::ttree::{Cusp, Tree, VertexAddress};

/// A formal integer combination of modular symbols in canonical form:
/// equal symbols merged, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormalSum {
    terms: BTreeMap<ModularSymbol, i64>,
}

impl FormalSum {
    pub fn new() -> FormalSum {
        FormalSum::default()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, sym: &ModularSymbol) -> i64 {
        self.terms.get(sym).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, sym: ModularSymbol, coeff: i64) {
        use std::collections::btree_map::Entry;
        if coeff == 0 {
            return;
        }
        match self.terms.entry(sym) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FormalSum, k: i64) {
        for (sym, c) in &other.terms {
            self.add_term(sym.clone(), c * k);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModularSymbol, i64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &ModularSymbol> {
        self.terms.keys()
    }

    /// The elimination metric: the sum of absolute coefficients.
    pub fn metric(&self) -> u64 {
        self.terms.values().map(|c| c.unsigned_abs()).sum()
    }

    /// Parses the text form: one `<coeff> * {<addr>,<addr>}` per line.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(tree: &Tree, text: &str) -> Result<FormalSum> {
        let mut fs = FormalSum::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad =
                |m: &str| Error::Parse(format!("formal sum line {}: {m}", lineno + 1));
            let (coeff_str, sym_str) = line
                .split_once('*')
                .ok_or_else(|| bad("expected `<coeff> * {addr,addr}`"))?;
            let coeff: i64 = coeff_str
                .trim()
                .parse()
                .map_err(|_| bad("coefficient is not an integer"))?;
            let sym = crate::symbols::parse_symbol(tree, sym_str.trim())?;
            fs.add_term(sym, coeff);
        }
        Ok(fs)
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sym, c) in &self.terms {
            writeln!(f, "{c} * {sym}")?;
        }
        Ok(())
    }
}

/// Net coefficient flow per cusp: entering counts positive, leaving
/// negative. A formal sum is a relation iff every net is zero.
pub fn cusp_balance(fs: &FormalSum) -> BTreeMap<Cusp, i64> {
    let mut net = BTreeMap::new();
    for (sym, c) in fs.iter() {
        *net.entry(sym.to_cusp().clone()).or_insert(0) += c;
        *net.entry(sym.from_cusp().clone()).or_insert(0) -= c;
    }
    net
}

pub fn is_cusp_balanced(fs: &FormalSum) -> bool {
    cusp_balance(fs).values().all(|&v| v == 0)
}

/// Directed edge flows of a formal sum over the finite truncation that
/// covers every participating geodesic: tails are cut one step past the
/// deepest divergence they carry.
#[derive(Debug, Clone, Default)]
pub struct EdgeFlows {
    pub flows: BTreeMap<(VertexAddress, VertexAddress), i64>,
}

impl EdgeFlows {
    pub fn flow(&self, from: &VertexAddress, to: &VertexAddress) -> i64 {
        self.flows
            .get(&(from.clone(), to.clone()))
            .copied()
            .unwrap_or(0)
    }

    /// Edges whose two directed flows differ, with both values.
    pub fn unbalanced(&self) -> Vec<(VertexAddress, VertexAddress, i64, i64)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (u, v) in self.flows.keys() {
            let key = if u < v {
                (u.clone(), v.clone())
            } else {
                (v.clone(), u.clone())
            };
            if !seen.insert(key.clone()) {
                continue;
            }
            let fwd = self.flow(&key.0, &key.1);
            let back = self.flow(&key.1, &key.0);
            if fwd != back {
                out.push((key.0, key.1, fwd, back));
            }
        }
        out
    }

    pub fn all_balanced(&self) -> bool {
        self.unbalanced().is_empty()
    }
}

pub fn edge_flows(tree: &Tree, fs: &FormalSum) -> Result<EdgeFlows> {
    let mut paths = Vec::new();
    let mut core_set: BTreeSet<VertexAddress> = BTreeSet::new();
    let mut max_core_depth = 0usize;
    for (sym, c) in fs.iter() {
        let path = symbol_path(tree, sym)?;
        for v in &path.core {
            max_core_depth = max_core_depth.max(v.addr.len());
            core_set.insert(v.addr.clone());
        }
        paths.push((sym.clone(), c, path));
    }

    // Tail addresses per cusp, to one step past the deepest divergence.
    let mut cusps: BTreeSet<Cusp> = BTreeSet::new();
    for (sym, _, _) in &paths {
        cusps.insert(sym.from_cusp().clone());
        cusps.insert(sym.to_cusp().clone());
    }
    let mut tails: BTreeMap<Cusp, Vec<VertexAddress>> = BTreeMap::new();
    for cusp in cusps {
        let mut addrs = Vec::new();
        let mut cur = tree.vertex(cusp.anchor())?;
        let mut deepest_hit = 1usize;
        let mut n = 1usize;
        loop {
            addrs.push(cur.addr.clone());
            if core_set.contains(&cur.addr) {
                deepest_hit = n;
            }
            if cur.addr.len() > max_core_depth {
                break;
            }
            cur = tree.tail_step(&cur);
            n += 1;
        }
        // Cut at M = deepest divergence + 1.
        addrs.truncate(deepest_hit + 1);
        if addrs.len() < deepest_hit + 1 {
            let mut cur = tree.vertex(addrs.last().expect("anchor present"))?;
            while addrs.len() < deepest_hit + 1 {
                cur = tree.tail_step(&cur);
                addrs.push(cur.addr.clone());
            }
        }
        tails.insert(cusp, addrs);
    }

    let mut flows: BTreeMap<(VertexAddress, VertexAddress), i64> = BTreeMap::new();
    let mut add = |a: &VertexAddress, b: &VertexAddress, c: i64| {
        *flows.entry((a.clone(), b.clone())).or_insert(0) += c;
    };
    for (sym, c, path) in &paths {
        for w in path.core.windows(2) {
            add(&w[0].addr, &w[1].addr, *c);
        }
        // Tail segments beyond the core, on both sides.
        let tail_index = |cusp: &Cusp, endpoint: &VertexAddress| -> usize {
            endpoint.len() - cusp.anchor().len() + 1
        };
        let from = sym.from_cusp();
        let m_from = tail_index(from, &path.core[0].addr);
        let from_tail = &tails[from];
        for i in m_from..from_tail.len() {
            // Traffic descends the from-tail into the core.
            add(&from_tail[i], &from_tail[i - 1], *c);
        }
        let to = sym.to_cusp();
        let m_to = tail_index(to, &path.core[path.core.len() - 1].addr);
        let to_tail = &tails[to];
        for i in m_to..to_tail.len() {
            add(&to_tail[i - 1], &to_tail[i], *c);
        }
    }
    Ok(EdgeFlows { flows })
}

/// The nine generator relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationRule {
    E2,
    E3,
    S2,
    O2,
    O3,
    OY,
    NS2,
    NS3,
    NSY,
}

impl RelationRule {
    pub fn arity(&self) -> usize {
        match self {
            RelationRule::E2 | RelationRule::S2 | RelationRule::O2 | RelationRule::NS2 => 2,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RelationRule::E2 => "e2",
            RelationRule::E3 => "e3",
            RelationRule::S2 => "s2",
            RelationRule::O2 => "o2",
            RelationRule::O3 => "o3",
            RelationRule::OY => "oY",
            RelationRule::NS2 => "ns2",
            RelationRule::NS3 => "ns3",
            RelationRule::NSY => "nsY",
        }
    }
}

impl fmt::Display for RelationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for RelationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<RelationRule> {
        match s {
            "e2" => Ok(RelationRule::E2),
            "e3" => Ok(RelationRule::E3),
            "s2" => Ok(RelationRule::S2),
            "o2" => Ok(RelationRule::O2),
            "o3" => Ok(RelationRule::O3),
            "oY" => Ok(RelationRule::OY),
            "ns2" => Ok(RelationRule::NS2),
            "ns3" => Ok(RelationRule::NS3),
            "nsY" => Ok(RelationRule::NSY),
            other => Err(Error::Parse(format!("unknown relation rule `{other}`"))),
        }
    }
}

/// A generator relation instantiated at a minimal vertex with an ordered
/// cusp tuple, together with its expansion as a formal sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    pub rule: RelationRule,
    pub site: VertexAddress,
    pub cusps: Vec<Cusp>,
    pub expansion: FormalSum,
}

/// The first vertex on the path from a site toward a cusp's anchor.
fn branch_of(tree: &Tree, site: &VertexAddress, cusp: &Cusp) -> Result<VertexAddress> {
    let g = tree.geodesic(site, cusp.anchor())?;
    g.get(1).cloned().ok_or_else(|| {
        Error::Internal(format!("cusp {cusp} anchored at its own site {site}"))
    })
}

/// The second vertex on the path from an ns-site toward a cusp's anchor:
/// the v-vertex under the intermediate o-vertex.
fn second_of(tree: &Tree, site: &VertexAddress, cusp: &Cusp) -> Result<VertexAddress> {
    let g = tree.geodesic(site, cusp.anchor())?;
    g.get(2).cloned().ok_or_else(|| {
        Error::Internal(format!("cusp {cusp} too close to ns-site {site}"))
    })
}

/// Instantiates a generator relation at a minimal vertex.
///
/// Two-term rules expand to {c1,c2} + {c2,c1}; three-term and Y-term rules
/// to {c1,c2} + {c2,c3} + {c3,c1}. The Y-term rules require the middle pair
/// {c2,c3} to be the one of lower type (s under an o-site; o or s under an
/// ns-site).
pub fn instantiate(
    tree: &Tree,
    rule: RelationRule,
    site: &VertexAddress,
    cusps: &[Cusp],
) -> Result<RelationInstance> {
    use crate::curve::FiberKind;
    use crate::stree::SLabel;

    let v = tree.vertex(site)?;
    let site_ok = match v.label {
        SLabel::E { .. } => matches!(rule, RelationRule::E2 | RelationRule::E3),
        SLabel::V {
            class: FiberKind::S,
            ..
        } => rule == RelationRule::S2,
        SLabel::O => matches!(
            rule,
            RelationRule::O2 | RelationRule::O3 | RelationRule::OY
        ),
        SLabel::V {
            class: FiberKind::Ns,
            ..
        } => matches!(
            rule,
            RelationRule::NS2 | RelationRule::NS3 | RelationRule::NSY
        ),
        _ => false,
    };
    if !site_ok {
        return Err(Error::WrongSiteType {
            rule: rule.to_string(),
            site: site.to_string(),
        });
    }

    let shape_err = |reason: &str| Error::YShapeViolated {
        rule: rule.to_string(),
        site: site.to_string(),
        reason: reason.to_string(),
    };

    if cusps.len() != rule.arity() {
        return Err(shape_err(&format!(
            "expected {} cusps, got {}",
            rule.arity(),
            cusps.len()
        )));
    }
    for (i, a) in cusps.iter().enumerate() {
        for b in cusps.iter().skip(i + 1) {
            if a == b {
                return Err(shape_err("cusps must be pairwise distinct"));
            }
        }
    }
    let attached: BTreeSet<Cusp> = tree.attached_cusps(site)?.into_iter().collect();
    for c in cusps {
        if !attached.contains(c) {
            return Err(Error::CuspNotAttached {
                cusp: c.to_string(),
                site: site.to_string(),
            });
        }
    }

    match rule {
        RelationRule::E2 | RelationRule::E3 | RelationRule::S2 => {}
        RelationRule::O2 | RelationRule::O3 | RelationRule::OY => {
            // The v-branch of a cusp at an o-site is determined by the
            // x-line of its point.
            let xs: Vec<_> = cusps.iter().map(|c| c.point().x()).collect();
            match rule {
                RelationRule::O2 => {
                    if xs[0] == xs[1] {
                        return Err(shape_err(
                            "the cusps share an s-vertex; the pair is an s2 relation",
                        ));
                    }
                }
                RelationRule::O3 => {
                    if xs[0] == xs[1] || xs[1] == xs[2] || xs[0] == xs[2] {
                        return Err(shape_err(
                            "cusps must pass through pairwise distinct v-vertices",
                        ));
                    }
                }
                RelationRule::OY => {
                    if xs[1] != xs[2] {
                        return Err(shape_err(
                            "the middle pair must share an s-vertex",
                        ));
                    }
                    if xs[0] == xs[1] {
                        return Err(shape_err(
                            "the first cusp must pass through a different v-vertex",
                        ));
                    }
                }
                _ => unreachable!(),
            }
        }
        RelationRule::NS2 | RelationRule::NS3 | RelationRule::NSY => {
            let branches: Vec<VertexAddress> = cusps
                .iter()
                .map(|c| branch_of(tree, site, c))
                .collect::<Result<_>>()?;
            match rule {
                RelationRule::NS2 => {
                    if branches[0] == branches[1] {
                        return Err(shape_err(
                            "the cusps share an o-vertex; the pair is type o or s",
                        ));
                    }
                }
                RelationRule::NS3 => {
                    if branches[0] == branches[1]
                        || branches[1] == branches[2]
                        || branches[0] == branches[2]
                    {
                        return Err(shape_err(
                            "cusps must pass through pairwise distinct o-vertices",
                        ));
                    }
                }
                RelationRule::NSY => {
                    if branches[1] != branches[2] {
                        return Err(shape_err("the middle pair must share an o-vertex"));
                    }
                    if branches[0] == branches[1] {
                        return Err(shape_err(
                            "the first cusp must pass through a different o-vertex",
                        ));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    let mut expansion = FormalSum::new();
    match rule.arity() {
        2 => {
            expansion.add_term(ModularSymbol::new(cusps[0].clone(), cusps[1].clone())?, 1);
            expansion.add_term(ModularSymbol::new(cusps[1].clone(), cusps[0].clone())?, 1);
        }
        3 => {
            expansion.add_term(ModularSymbol::new(cusps[0].clone(), cusps[1].clone())?, 1);
            expansion.add_term(ModularSymbol::new(cusps[1].clone(), cusps[2].clone())?, 1);
            expansion.add_term(ModularSymbol::new(cusps[2].clone(), cusps[0].clone())?, 1);
        }
        _ => unreachable!(),
    }
    Ok(RelationInstance {
        rule,
        site: site.clone(),
        cusps: cusps.to_vec(),
        expansion,
    })
}

/// A replayable transcript proving that a balanced formal sum is an integer
/// combination of generator relations: path splits rewrite non-reduced
/// symbols, then the recorded instances sum to the rewritten input.
#[derive(Debug, Clone, Default)]
pub struct Certificate {
    pub splits: Vec<Split>,
    pub combination: Vec<(RelationInstance, i64)>,
}

/// Serialization mirror of a certificate (addresses as text).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateData {
    pub splits: Vec<SplitData>,
    pub combination: Vec<InstanceData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitData {
    pub from: String,
    pub to: String,
    pub via: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceData {
    pub rule: String,
    pub site: String,
    pub cusps: Vec<String>,
    pub multiplier: i64,
}

impl Certificate {
    pub fn to_data(&self) -> CertificateData {
        CertificateData {
            splits: self
                .splits
                .iter()
                .map(|s| SplitData {
                    from: s.symbol.from_cusp().anchor().to_string(),
                    to: s.symbol.to_cusp().anchor().to_string(),
                    via: s.via.anchor().to_string(),
                })
                .collect(),
            combination: self
                .combination
                .iter()
                .map(|(inst, m)| InstanceData {
                    rule: inst.rule.to_string(),
                    site: inst.site.to_string(),
                    cusps: inst.cusps.iter().map(|c| c.anchor().to_string()).collect(),
                    multiplier: *m,
                })
                .collect(),
        }
    }

    /// Rebuilds a certificate from its data form, re-validating every
    /// instance on the tree.
    pub fn from_data(tree: &Tree, data: &CertificateData) -> Result<Certificate> {
        let mut splits = Vec::new();
        for s in &data.splits {
            let from = tree.cusp_from_anchor(&s.from.parse()?)?;
            let to = tree.cusp_from_anchor(&s.to.parse()?)?;
            let via = tree.cusp_from_anchor(&s.via.parse()?)?;
            splits.push(Split {
                symbol: ModularSymbol::new(from, to)?,
                via,
            });
        }
        let mut combination = Vec::new();
        for i in &data.combination {
            let rule: RelationRule = i.rule.parse()?;
            let site: VertexAddress = i.site.parse()?;
            let cusps: Vec<Cusp> = i
                .cusps
                .iter()
                .map(|c| tree.cusp_from_anchor(&c.parse()?))
                .collect::<Result<_>>()?;
            combination.push((instantiate(tree, rule, &site, &cusps)?, i.multiplier));
        }
        Ok(Certificate {
            splits,
            combination,
        })
    }
}

/// Replays a certificate against a formal sum: applies the splits, then
/// subtracts each instance times its multiplier. Succeeds iff the result is
/// empty. Purely syntactic integer arithmetic.
pub fn verify_certificate_detailed(
    tree: &Tree,
    fs: &FormalSum,
    cert: &Certificate,
) -> std::result::Result<(), String> {
    let mut work = fs.clone();
    for split in &cert.splits {
        if split.via == *split.symbol.from_cusp() || split.via == *split.symbol.to_cusp() {
            return Err(format!(
                "split of {} via one of its own endpoints",
                split.symbol
            ));
        }
        let c = work.coeff(&split.symbol);
        work.add_term(split.symbol.clone(), -c);
        let left = ModularSymbol::new(split.symbol.from_cusp().clone(), split.via.clone())
            .map_err(|e| e.to_string())?;
        let right = ModularSymbol::new(split.via.clone(), split.symbol.to_cusp().clone())
            .map_err(|e| e.to_string())?;
        work.add_term(left, c);
        work.add_term(right, c);
    }
    for (inst, m) in &cert.combination {
        let rebuilt = instantiate(tree, inst.rule, &inst.site, &inst.cusps)
            .map_err(|e| format!("malformed instance: {e}"))?;
        if rebuilt.expansion != inst.expansion {
            return Err(format!(
                "instance expansion mismatch for {} at {}",
                inst.rule, inst.site
            ));
        }
        work.add_scaled(&rebuilt.expansion, -m);
    }
    if work.is_empty() {
        Ok(())
    } else {
        Err(format!("replay leaves a nonzero remainder:\n{work}"))
    }
}

pub fn verify_certificate(tree: &Tree, fs: &FormalSum, cert: &Certificate) -> bool {
    verify_certificate_detailed(tree, fs, cert).is_ok()
}

/// Per-stage metrics of a reduction run: (stage name, metric after).
#[derive(Debug, Clone, Default)]
pub struct ReduceTrace {
    pub stages: Vec<(String, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    E,
    S,
    O,
    Ns,
}

impl Family {
    fn of(class: &ReducedClass) -> Family {
        match class {
            ReducedClass::E { .. } => Family::E,
            ReducedClass::S { .. } => Family::S,
            ReducedClass::O { .. } => Family::O,
            ReducedClass::Ns { .. } => Family::Ns,
        }
    }

    fn two_term_rule(self) -> RelationRule {
        match self {
            Family::E => RelationRule::E2,
            Family::S => RelationRule::S2,
            Family::O => RelationRule::O2,
            Family::Ns => RelationRule::NS2,
        }
    }
}

/// The reduced class and minimal-vertex site of a reduced symbol.
pub(crate) fn class_and_site(
    tree: &Tree,
    sym: &ModularSymbol,
) -> Result<(ReducedClass, VertexAddress)> {
    let path = symbol_path(tree, sym)?;
    match classify_path(&path)? {
        Classification::Reduced(class) => {
            Ok((class, path.core[path.minima[0]].addr.clone()))
        }
        Classification::NotReduced => Err(Error::Internal(format!(
            "symbol {sym} is not reduced"
        ))),
    }
}

struct Reducer<'t> {
    tree: &'t Tree,
    work: FormalSum,
    splits: Vec<Split>,
    comb: Vec<(RelationInstance, i64)>,
    cache: BTreeMap<ModularSymbol, (ReducedClass, VertexAddress)>,
    trace: ReduceTrace,
}

impl<'t> Reducer<'t> {
    fn class_site(&mut self, sym: &ModularSymbol) -> Result<(ReducedClass, VertexAddress)> {
        if let Some(hit) = self.cache.get(sym) {
            return Ok(hit.clone());
        }
        let v = class_and_site(self.tree, sym)?;
        self.cache.insert(sym.clone(), v.clone());
        Ok(v)
    }

    fn mark(&mut self, stage: &str, extra: u64) {
        self.trace
            .stages
            .push((stage.to_string(), self.work.metric() + extra));
    }

    /// Rewrites every non-reduced symbol through its decomposition.
    fn split_stage(&mut self) -> Result<()> {
        let snapshot: Vec<(ModularSymbol, i64)> =
            self.work.iter().map(|(s, c)| (s.clone(), c)).collect();
        for (sym, c) in snapshot {
            if classify_path(&symbol_path(self.tree, &sym)?)? == Classification::NotReduced {
                let (pieces, splits) = decompose_with_splits(self.tree, &sym)?;
                self.splits.extend(splits);
                self.work.add_term(sym, -c);
                for p in pieces {
                    self.work.add_term(p, c);
                }
            }
        }
        Ok(())
    }

    /// Sites (minimal-vertex addresses) of the given family present in the
    /// working sum, deepest first.
    fn sites_of(&mut self, family: Family) -> Result<Vec<VertexAddress>> {
        let symbols: Vec<ModularSymbol> = self.work.symbols().cloned().collect();
        let mut sites = BTreeSet::new();
        for sym in symbols {
            let (class, site) = self.class_site(&sym)?;
            if Family::of(&class) == family {
                sites.insert(site);
            }
        }
        let mut sites: Vec<VertexAddress> = sites.into_iter().collect();
        sites.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(sites)
    }

    /// Moves every symbol of the given family minimal at `site` from the
    /// working sum into a sub-sum.
    fn extract_at(&mut self, site: &VertexAddress, family: Family) -> Result<FormalSum> {
        let snapshot: Vec<(ModularSymbol, i64)> =
            self.work.iter().map(|(s, c)| (s.clone(), c)).collect();
        let mut sub = FormalSum::new();
        for (sym, c) in snapshot {
            let (class, msite) = self.class_site(&sym)?;
            if Family::of(&class) == family && msite == *site {
                self.work.add_term(sym.clone(), -c);
                sub.add_term(sym, c);
            }
        }
        Ok(sub)
    }

    /// Records an instance with a multiplier; the caller adjusts the sums.
    fn record(&mut self, inst: RelationInstance, m: i64) {
        self.comb.push((inst, m));
    }

    /// Subtracts m * instance from a sub-sum and records it.
    fn apply(&mut self, sub: &mut FormalSum, inst: RelationInstance, m: i64) {
        sub.add_scaled(&inst.expansion, -m);
        self.record(inst, m);
    }

    /// Two-term instance canceling reversed pairs and flipping negative
    /// coefficients, leaving all coefficients positive with no reversed
    /// pairs. Metric never increases.
    fn normalize(&mut self, sub: &mut FormalSum) -> Result<()> {
        let snapshot: Vec<ModularSymbol> = sub.symbols().cloned().collect();
        for sym in &snapshot {
            let rev = sym.reversed();
            if *sym > rev {
                continue;
            }
            let cr = sub.coeff(&rev);
            if sub.coeff(sym) != 0 && cr != 0 {
                let inst = self.two_term_of(sym)?;
                self.apply(sub, inst, cr);
            }
        }
        let snapshot: Vec<ModularSymbol> = sub.symbols().cloned().collect();
        for sym in &snapshot {
            let c = sub.coeff(sym);
            if c < 0 {
                let inst = self.two_term_of(sym)?;
                self.apply(sub, inst, c);
            }
        }
        debug_assert!(sub.iter().all(|(_, c)| c > 0));
        Ok(())
    }

    fn two_term_of(&mut self, sym: &ModularSymbol) -> Result<RelationInstance> {
        let (class, site) = self.class_site(sym)?;
        instantiate(
            self.tree,
            Family::of(&class).two_term_rule(),
            &site,
            &[sym.from_cusp().clone(), sym.to_cusp().clone()],
        )
    }

    /// Makes the extracted sub-sum at a site self-balanced by pairing its
    /// per-branch cusp surpluses with two-term corrections, as the
    /// edge-balance of the site's incident edges guarantees is possible.
    /// One orientation of each correction joins the sub-sum, the other
    /// returns to the working sum.
    fn decouple(
        &mut self,
        sub: &mut FormalSum,
        site: &VertexAddress,
        family: Family,
    ) -> Result<()> {
        let balance = cusp_balance(sub);
        let mut groups: BTreeMap<VertexAddress, Vec<(Cusp, i64)>> = BTreeMap::new();
        for (cusp, net) in balance {
            if net == 0 {
                continue;
            }
            let branch = branch_of(self.tree, site, &cusp)?;
            groups.entry(branch).or_default().push((cusp, net));
        }
        for (branch, entries) in groups {
            let total: i64 = entries.iter().map(|(_, n)| n).sum();
            if total != 0 {
                return Err(Error::Internal(format!(
                    "branch {branch} of site {site} is not edge-balanced (net {total})"
                )));
            }
            let mut pos: Vec<(Cusp, i64)> =
                entries.iter().filter(|(_, n)| *n > 0).cloned().collect();
            let mut neg: Vec<(Cusp, i64)> =
                entries.iter().filter(|(_, n)| *n < 0).cloned().collect();
            while let Some((alpha, a)) = pos.first().cloned() {
                let (beta, b) = neg
                    .first()
                    .cloned()
                    .ok_or_else(|| Error::Internal("pairing ran out of deficits".into()))?;
                let k = a.min(-b);
                // The correction pair lives at the shared s-vertex when both
                // cusps continue through the same v-vertex, else at the
                // shared o-vertex. At an o-site the branch itself is that
                // s-vertex; at an ns-site the branch is the o-vertex and the
                // v-vertices sit one step further.
                let (pair_site, rule) = match family {
                    Family::O => (branch.clone(), RelationRule::S2),
                    Family::Ns => {
                        let va = second_of(self.tree, site, &alpha)?;
                        let vb = second_of(self.tree, site, &beta)?;
                        if va == vb {
                            (va, RelationRule::S2)
                        } else {
                            (branch.clone(), RelationRule::O2)
                        }
                    }
                    _ => {
                        return Err(Error::Internal(
                            "decoupling applies to ns- and o-stages only".into(),
                        ))
                    }
                };
                let inst = instantiate(
                    self.tree,
                    rule,
                    &pair_site,
                    &[alpha.clone(), beta.clone()],
                )?;
                self.record(inst, -k);
                sub.add_term(ModularSymbol::new(alpha.clone(), beta.clone())?, k);
                self.work
                    .add_term(ModularSymbol::new(beta.clone(), alpha.clone())?, k);
                if a == k {
                    pos.remove(0);
                } else {
                    pos[0].1 -= k;
                }
                if -b == k {
                    neg.remove(0);
                } else {
                    neg[0].1 += k;
                }
            }
            if !neg.is_empty() {
                return Err(Error::Internal("pairing left a deficit".into()));
            }
        }
        debug_assert!(is_cusp_balanced(sub));
        Ok(())
    }

    /// Shapes a three-term elimination step at a site into the correct rule
    /// with the Y-pair in the middle.
    fn three_term(
        &mut self,
        family: Family,
        site: &VertexAddress,
        alpha: &Cusp,
        beta: &Cusp,
        gamma: &Cusp,
    ) -> Result<RelationInstance> {
        let (rule, ordered): (RelationRule, [&Cusp; 3]) = match family {
            Family::E => (RelationRule::E3, [alpha, beta, gamma]),
            Family::O => {
                let (xa, xb, xg) = (
                    alpha.point().x(),
                    beta.point().x(),
                    gamma.point().x(),
                );
                if xg == xb {
                    (RelationRule::OY, [alpha, beta, gamma])
                } else if xg == xa {
                    (RelationRule::OY, [beta, gamma, alpha])
                } else {
                    (RelationRule::O3, [alpha, beta, gamma])
                }
            }
            Family::Ns => {
                let ba = branch_of(self.tree, site, alpha)?;
                let bb = branch_of(self.tree, site, beta)?;
                let bg = branch_of(self.tree, site, gamma)?;
                if bg == bb {
                    (RelationRule::NSY, [alpha, beta, gamma])
                } else if bg == ba {
                    (RelationRule::NSY, [beta, gamma, alpha])
                } else {
                    debug_assert_ne!(ba, bb);
                    (RelationRule::NS3, [alpha, beta, gamma])
                }
            }
            Family::S => {
                return Err(Error::Internal(
                    "s-sites admit no three-term relation".into(),
                ))
            }
        };
        instantiate(
            self.tree,
            rule,
            site,
            &[ordered[0].clone(), ordered[1].clone(), ordered[2].clone()],
        )
    }

    /// Eliminates every symbol of the given family minimal at `site` from
    /// the sub-sum using two-, three- and Y-term instances. The metric
    /// strictly decreases at every elimination step.
    fn eliminate(
        &mut self,
        sub: &mut FormalSum,
        site: &VertexAddress,
        family: Family,
    ) -> Result<()> {
        self.normalize(sub)?;
        let mut guard = sub.metric() + 1;
        loop {
            let metric = sub.metric();
            if metric >= guard {
                return Err(Error::Internal(format!(
                    "elimination metric failed to decrease at site {site} \
                     (stuck at {metric}); state:\n{sub}"
                )));
            }
            guard = metric;
            let snapshot: Vec<ModularSymbol> = sub.symbols().cloned().collect();
            let mut target = None;
            for sym in &snapshot {
                let (class, msite) = self.class_site(sym)?;
                if Family::of(&class) == family && msite == *site {
                    target = Some(sym.clone());
                    break;
                }
            }
            let Some(t1) = target else { break };
            let n1 = sub.coeff(&t1);
            debug_assert!(n1 > 0);
            let beta = t1.to_cusp().clone();
            let t2 = sub
                .iter()
                .filter(|(s, c)| *c > 0 && *s.from_cusp() == beta)
                .map(|(s, _)| s.clone())
                .next()
                .ok_or_else(|| {
                    Error::Internal(format!(
                        "no continuation out of {beta} at site {site}; state:\n{sub}"
                    ))
                })?;
            let n2 = sub.coeff(&t2);
            let gamma = t2.to_cusp().clone();
            let alpha = t1.from_cusp().clone();
            let inst = self.three_term(family, site, &alpha, &beta, &gamma)?;
            let m = n1.min(n2);
            self.apply(sub, inst, m);
            self.normalize(sub)?;
        }
        Ok(())
    }

    fn run(mut self) -> Result<(Certificate, ReduceTrace)> {
        if !is_cusp_balanced(&self.work) {
            return Err(Error::UnbalancedInput);
        }
        self.mark("input", 0);
        self.split_stage()?;
        self.mark("split", 0);

        // Stage e: symbols over one e-vertex form a closed relation.
        for site in self.sites_of(Family::E)? {
            let mut sub = self.extract_at(&site, Family::E)?;
            self.eliminate(&mut sub, &site, Family::E)?;
            if !sub.is_empty() {
                return Err(Error::Internal(format!(
                    "e-site {site} left residue:\n{sub}"
                )));
            }
        }
        self.assert_family_gone(Family::E, "e")?;
        self.mark("e", 0);

        // Stage ns, deepest sites first: decouple per o-branch, then
        // eliminate; leftover o/s corrections rejoin the working sum.
        for site in self.sites_of(Family::Ns)? {
            let mut sub = self.extract_at(&site, Family::Ns)?;
            self.decouple(&mut sub, &site, Family::Ns)?;
            self.eliminate(&mut sub, &site, Family::Ns)?;
            let leftover: Vec<(ModularSymbol, i64)> =
                sub.iter().map(|(s, c)| (s.clone(), c)).collect();
            for (s, c) in leftover {
                self.work.add_term(s, c);
            }
        }
        self.assert_family_gone(Family::Ns, "ns")?;
        self.mark("ns", 0);

        // Stage o.
        for site in self.sites_of(Family::O)? {
            let mut sub = self.extract_at(&site, Family::O)?;
            self.decouple(&mut sub, &site, Family::O)?;
            self.eliminate(&mut sub, &site, Family::O)?;
            let leftover: Vec<(ModularSymbol, i64)> =
                sub.iter().map(|(s, c)| (s.clone(), c)).collect();
            for (s, c) in leftover {
                self.work.add_term(s, c);
            }
        }
        self.assert_family_gone(Family::O, "o")?;
        self.mark("o", 0);

        // Stage s: only the two-term relation exists.
        for site in self.sites_of(Family::S)? {
            let mut sub = self.extract_at(&site, Family::S)?;
            self.normalize(&mut sub)?;
            if !sub.is_empty() {
                return Err(Error::Internal(format!(
                    "s-site {site} left residue:\n{sub}"
                )));
            }
        }
        self.mark("s", 0);

        if !self.work.is_empty() {
            return Err(Error::Internal(format!(
                "reduction left a residue:\n{}",
                self.work
            )));
        }
        Ok((
            Certificate {
                splits: self.splits,
                combination: self.comb,
            },
            self.trace,
        ))
    }

    fn assert_family_gone(&mut self, family: Family, name: &str) -> Result<()> {
        let symbols: Vec<ModularSymbol> = self.work.symbols().cloned().collect();
        for sym in symbols {
            let (class, _) = self.class_site(&sym)?;
            if Family::of(&class) == family {
                return Err(Error::Internal(format!(
                    "{name}-symbol {sym} survived its stage"
                )));
            }
        }
        Ok(())
    }
}

/// Rewrites a cusp-balanced formal sum as a certified integer combination
/// of generator-relation instances, with per-stage metrics.
///
/// Stage order: split non-reduced symbols, delete e-symbols per e-vertex,
/// then ns-symbols (deepest sites first, decoupling shared cusps with
/// two-term corrections), then o-symbols, then the remaining s-symbols.
pub fn reduce_with_trace(tree: &Tree, fs: &FormalSum) -> Result<(Certificate, ReduceTrace)> {
    Reducer {
        tree,
        work: fs.clone(),
        splits: Vec::new(),
        comb: Vec::new(),
        cache: BTreeMap::new(),
        trace: ReduceTrace::default(),
    }
    .run()
}

pub fn reduce_to_generators(tree: &Tree, fs: &FormalSum) -> Result<Certificate> {
    Ok(reduce_with_trace(tree, fs)?.0)
}

/// One interaction edge between two minimal sites at the same invariant
/// level: the cusps used by both sites' symbols.
#[derive(Debug, Clone, Serialize)]
pub struct InteractionEdge {
    pub a: String,
    pub b: String,
    pub shared_used_cusps: Vec<String>,
    pub nontrivial: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub invariant: i32,
    pub sites: Vec<String>,
    pub edges: Vec<InteractionEdge>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionReport {
    pub levels: Vec<LevelReport>,
}

/// Groups the minimal sites participating in a balanced sum of reduced
/// symbols by invariant level and reports which sites share used cusps:
/// one shared used cusp is a trivial interaction, two or more nontrivial.
pub fn interaction_analysis(tree: &Tree, fs: &FormalSum) -> Result<InteractionReport> {
    let mut used: BTreeMap<VertexAddress, BTreeSet<Cusp>> = BTreeMap::new();
    let mut level_of: BTreeMap<VertexAddress, i32> = BTreeMap::new();
    for (sym, _) in fs.iter() {
        let (_, site) = class_and_site(tree, sym)?;
        let inv = tree.vertex(&site)?.label.invariant();
        level_of.insert(site.clone(), inv);
        let entry = used.entry(site).or_default();
        entry.insert(sym.from_cusp().clone());
        entry.insert(sym.to_cusp().clone());
    }
    let mut levels: BTreeMap<i32, Vec<VertexAddress>> = BTreeMap::new();
    for (site, inv) in &level_of {
        levels.entry(*inv).or_default().push(site.clone());
    }
    let mut out = Vec::new();
    for (inv, sites) in levels.into_iter().rev() {
        let mut edges = Vec::new();
        for (i, a) in sites.iter().enumerate() {
            for b in sites.iter().skip(i + 1) {
                let shared: Vec<Cusp> =
                    used[a].intersection(&used[b]).cloned().collect();
                if !shared.is_empty() {
                    edges.push(InteractionEdge {
                        a: a.to_string(),
                        b: b.to_string(),
                        shared_used_cusps: shared.iter().map(|c| c.to_string()).collect(),
                        nontrivial: shared.len() >= 2,
                    });
                }
            }
        }
        out.push(LevelReport {
            invariant: inv,
            sites: sites.iter().map(|s| s.to_string()).collect(),
            edges,
        });
    }
    Ok(InteractionReport { levels: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;

    fn f3() -> Tree {
        Tree::new(CurveSpec::new(3, [0, 0, 0, 1, 2]).unwrap())
    }

    fn addr(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    fn cusp(t: &Tree, s: &str) -> Cusp {
        t.cusp_from_anchor(&addr(s)).unwrap()
    }

    fn sym(t: &Tree, a: &str, b: &str) -> ModularSymbol {
        ModularSymbol::new(cusp(t, a), cusp(t, b)).unwrap()
    }

    #[test]
    fn cusp_balance_examples() {
        let t = f3();
        let (a, b, g) = (cusp(&t, "/1/0"), cusp(&t, "/1/1"), cusp(&t, "/2/0"));
        let mut cycle = FormalSum::new();
        cycle.add_term(ModularSymbol::new(a.clone(), b.clone()).unwrap(), 1);
        cycle.add_term(ModularSymbol::new(b.clone(), g.clone()).unwrap(), 1);
        cycle.add_term(ModularSymbol::new(g.clone(), a.clone()).unwrap(), 1);
        assert!(is_cusp_balanced(&cycle));

        let mut double = FormalSum::new();
        double.add_term(ModularSymbol::new(a.clone(), b.clone()).unwrap(), 2);
        let net = cusp_balance(&double);
        assert_eq!(net[&a], -2);
        assert_eq!(net[&b], 2);

        assert!(cusp_balance(&FormalSum::new()).is_empty());
    }

    #[test]
    fn canonical_form_merges_and_drops() {
        let t = f3();
        let s = sym(&t, "/1/0", "/1/1");
        let mut fs = FormalSum::new();
        fs.add_term(s.clone(), 2);
        fs.add_term(s.clone(), 3);
        assert_eq!(fs.coeff(&s), 5);
        fs.add_term(s.clone(), -5);
        assert!(fs.is_empty());
    }

    #[test]
    fn edge_flows_detect_imbalance() {
        let t = f3();
        let s = sym(&t, "/1/0", "/2/0");
        let mut fs = FormalSum::new();
        fs.add_term(s.clone(), 1);
        let flows = edge_flows(&t, &fs).unwrap();
        assert!(!flows.all_balanced());
        assert_eq!(flows.flow(&addr("/1/0"), &addr("/1")), 1);
        assert_eq!(flows.flow(&addr("/1"), &addr("/1/0")), 0);

        let mut pair = fs.clone();
        pair.add_term(s.reversed(), 1);
        assert!(edge_flows(&t, &pair).unwrap().all_balanced());
    }

    #[test]
    fn instantiate_e3_and_s2() {
        let t = f3();
        let e_site = addr("/2/0/1");
        let cs = t.attached_cusps(&e_site).unwrap();
        let inst = instantiate(&t, RelationRule::E3, &e_site, &cs[0..3]).unwrap();
        assert_eq!(inst.expansion.len(), 3);
        assert!(is_cusp_balanced(&inst.expansion));
        assert!(edge_flows(&t, &inst.expansion).unwrap().all_balanced());
        for (s, _) in inst.expansion.iter() {
            let (class, site) = class_and_site(&t, s).unwrap();
            assert_eq!(class.type_tag(), "e");
            assert_eq!(site, e_site);
        }

        let s_site = addr("/1");
        let sc = t.attached_cusps(&s_site).unwrap();
        let s2 = instantiate(&t, RelationRule::S2, &s_site, &sc).unwrap();
        assert_eq!(s2.expansion.len(), 2);
        assert!(is_cusp_balanced(&s2.expansion));
    }

    #[test]
    fn instantiate_o_rules_at_root() {
        let t = f3();
        let root = addr("/");
        let cs = t.attached_cusps(&root).unwrap();
        // Cusps: /1/0 (x=1), /1/1 (x=1), /2/0 (x=2), /3/0 (x=inf).
        let by_addr = |s: &str| cs.iter().find(|c| c.anchor() == &addr(s)).unwrap().clone();
        let c10 = by_addr("/1/0");
        let c11 = by_addr("/1/1");
        let c20 = by_addr("/2/0");
        let c30 = by_addr("/3/0");

        let o3 = instantiate(
            &t,
            RelationRule::O3,
            &root,
            &[c10.clone(), c20.clone(), c30.clone()],
        )
        .unwrap();
        for (s, _) in o3.expansion.iter() {
            assert_eq!(class_and_site(&t, s).unwrap().0.type_tag(), "o");
        }

        // oY: the middle pair shares the s-vertex v(1).
        let oy = instantiate(
            &t,
            RelationRule::OY,
            &root,
            &[c20.clone(), c10.clone(), c11.clone()],
        )
        .unwrap();
        let tags: Vec<&str> = oy
            .expansion
            .iter()
            .map(|(s, _)| class_and_site(&t, s).unwrap().0.type_tag())
            .collect();
        assert_eq!(tags.iter().filter(|t| **t == "s").count(), 1);
        assert_eq!(tags.iter().filter(|t| **t == "o").count(), 2);

        // Shape violations.
        assert!(matches!(
            instantiate(&t, RelationRule::O3, &root, &[c10.clone(), c11.clone(), c20.clone()]),
            Err(Error::YShapeViolated { .. })
        ));
        assert!(matches!(
            instantiate(&t, RelationRule::OY, &root, &[c20.clone(), c10.clone(), c30.clone()]),
            Err(Error::YShapeViolated { .. })
        ));
        assert!(matches!(
            instantiate(&t, RelationRule::E2, &root, &[c10.clone(), c20.clone()]),
            Err(Error::WrongSiteType { .. })
        ));
        // A cusp not attached to v(1).
        assert!(matches!(
            instantiate(&t, RelationRule::S2, &addr("/1"), &[c10, c20]),
            Err(Error::CuspNotAttached { .. })
        ));
    }

    #[test]
    fn instantiate_nsy_middle_is_o_or_s() {
        let t = f3();
        let site = addr("/0");
        let cs = t.attached_cusps(&site).unwrap();
        // Group cusps by o-branch.
        let mut by_branch: BTreeMap<VertexAddress, Vec<Cusp>> = BTreeMap::new();
        for c in &cs {
            by_branch
                .entry(branch_of(&t, &site, c).unwrap())
                .or_default()
                .push(c.clone());
        }
        let branches: Vec<_> = by_branch.keys().cloned().collect();
        let first = &by_branch[&branches[0]];
        let second = &by_branch[&branches[1]];
        let inst = instantiate(
            &t,
            RelationRule::NSY,
            &site,
            &[first[0].clone(), second[0].clone(), second[1].clone()],
        )
        .unwrap();
        let tags: Vec<&str> = inst
            .expansion
            .iter()
            .map(|(s, _)| class_and_site(&t, s).unwrap().0.type_tag())
            .collect();
        assert_eq!(tags.iter().filter(|t| **t == "ns").count(), 2);
        assert_eq!(
            tags.iter().filter(|t| **t == "o" || **t == "s").count(),
            1
        );
    }

    #[test]
    fn reduce_single_instance_round_trip() {
        let t = f3();
        let e_site = addr("/2/0/1");
        let cs = t.attached_cusps(&e_site).unwrap();
        let inst = instantiate(&t, RelationRule::E3, &e_site, &cs[0..3]).unwrap();
        let fs = inst.expansion.clone();
        let (cert, trace) = reduce_with_trace(&t, &fs).unwrap();
        assert!(cert.splits.is_empty());
        assert_eq!(cert.combination.len(), 1);
        assert_eq!(cert.combination[0].0.rule, RelationRule::E3);
        assert_eq!(cert.combination[0].1, 1);
        assert!(verify_certificate(&t, &fs, &cert));
        // Metric non-increasing across stages.
        let metrics: Vec<u64> = trace.stages.iter().map(|(_, m)| *m).collect();
        assert!(metrics.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn reduce_empty_and_unbalanced() {
        let t = f3();
        let fs = FormalSum::new();
        let cert = reduce_to_generators(&t, &fs).unwrap();
        assert!(cert.splits.is_empty());
        assert!(cert.combination.is_empty());
        assert!(verify_certificate(&t, &fs, &cert));

        let mut bad = FormalSum::new();
        bad.add_term(sym(&t, "/1/0", "/1/1"), 1);
        assert!(matches!(
            reduce_to_generators(&t, &bad),
            Err(Error::UnbalancedInput)
        ));
    }

    #[test]
    fn tampered_certificate_fails() {
        let t = f3();
        let e_site = addr("/2/0/1");
        let cs = t.attached_cusps(&e_site).unwrap();
        let inst = instantiate(&t, RelationRule::E3, &e_site, &cs[0..3]).unwrap();
        let fs = inst.expansion.clone();
        let mut cert = reduce_to_generators(&t, &fs).unwrap();
        assert!(verify_certificate(&t, &fs, &cert));
        cert.combination[0].1 += 1;
        assert!(!verify_certificate(&t, &fs, &cert));
        // A non-relation never verifies.
        let mut bad = FormalSum::new();
        bad.add_term(sym(&t, "/1/0", "/1/1"), 1);
        assert!(!verify_certificate(&t, &bad, &Certificate::default()));
    }

    #[test]
    fn certificate_data_round_trip() {
        let t = f3();
        let s = sym(&t, "/1/0", "/1/1/1/0");
        let mut fs = FormalSum::new();
        fs.add_term(s.clone(), 1);
        fs.add_term(s.reversed(), 1);
        let cert = reduce_to_generators(&t, &fs).unwrap();
        assert!(!cert.splits.is_empty());
        let data = cert.to_data();
        let rebuilt = Certificate::from_data(&t, &data).unwrap();
        assert!(verify_certificate(&t, &fs, &rebuilt));
    }

    #[test]
    fn formal_sum_text_round_trip() {
        let t = f3();
        let mut fs = FormalSum::new();
        fs.add_term(sym(&t, "/1/0", "/1/1"), 2);
        fs.add_term(sym(&t, "/2/0", "/1/0"), -1);
        let text = fs.to_string();
        let parsed = FormalSum::parse(&t, &text).unwrap();
        assert_eq!(parsed, fs);
        let with_comments = format!("# header\n\n{text}");
        assert_eq!(FormalSum::parse(&t, &with_comments).unwrap(), fs);
    }

    #[test]
    fn two_s_sites_sharing_one_used_cusp_interact_trivially() {
        let t = f3();
        // /1 and /1/1/1 are both s-vertices labeled v(1); the cusp anchored
        // at /1/1 is attached to both.
        let site_a = addr("/1");
        let site_b = addr("/1/1/1");
        assert_eq!(t.label_of(&site_b).unwrap().to_string(), "v(1)");
        let ca = t.attached_cusps(&site_a).unwrap();
        let cb = t.attached_cusps(&site_b).unwrap();
        let shared: Vec<&Cusp> = ca.iter().filter(|c| cb.contains(c)).collect();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].anchor(), &addr("/1/1"));

        let mut fs = FormalSum::new();
        for cusps in [&ca, &cb] {
            fs.add_term(ModularSymbol::new(cusps[0].clone(), cusps[1].clone()).unwrap(), 1);
            fs.add_term(ModularSymbol::new(cusps[1].clone(), cusps[0].clone()).unwrap(), 1);
        }
        let report = interaction_analysis(&t, &fs).unwrap();
        let level = report
            .levels
            .iter()
            .find(|l| l.invariant == 0)
            .expect("s-level present");
        assert_eq!(level.sites.len(), 2);
        assert_eq!(level.edges.len(), 1);
        assert!(!level.edges[0].nontrivial);
        assert_eq!(level.edges[0].shared_used_cusps, vec!["/1/1".to_string()]);
    }

    #[test]
    fn interaction_report_shapes() {
        let t = f3();
        // Two s-symbols at different s-sites of the same fiber interact
        // through at most one shared cusp here: use a single site, expect
        // no edges.
        let mut fs = FormalSum::new();
        fs.add_term(sym(&t, "/1/0", "/1/1"), 1);
        fs.add_term(sym(&t, "/1/1", "/1/0"), 1);
        let report = interaction_analysis(&t, &fs).unwrap();
        assert_eq!(report.levels.len(), 1);
        assert!(report.levels[0].edges.is_empty());

        // An o-symbol and an s-symbol sharing the two cusps of v(1):
        // nontrivial interaction across levels is not reported (levels
        // differ), but two o-sites flanking v(1) are.
        let o_site_a = addr("/");
        let o_site_b = addr("/1/2"); // fill child of v(1) labeled o
        assert_eq!(t.label_of(&o_site_b).unwrap().to_string(), "o");
        let cs_a = t.attached_cusps(&o_site_a).unwrap();
        let cs_b = t.attached_cusps(&o_site_b).unwrap();
        // Both o-vertices see the two cusps /1/0 and /1/1 of v(1).
        let shared: Vec<&Cusp> = cs_a.iter().filter(|c| cs_b.contains(c)).collect();
        assert_eq!(shared.len(), 2);
        let mut fs2 = FormalSum::new();
        let other_a = cs_a.iter().find(|c| !cs_b.contains(*c)).unwrap().clone();
        let other_b = cs_b.iter().find(|c| !cs_a.contains(*c)).unwrap().clone();
        fs2.add_term(
            ModularSymbol::new(other_a.clone(), shared[0].clone()).unwrap(),
            1,
        );
        fs2.add_term(
            ModularSymbol::new(shared[0].clone(), other_a.clone()).unwrap(),
            1,
        );
        fs2.add_term(
            ModularSymbol::new(other_b.clone(), shared[0].clone()).unwrap(),
            1,
        );
        fs2.add_term(
            ModularSymbol::new(shared[0].clone(), other_b.clone()).unwrap(),
            1,
        );
        let report = interaction_analysis(&t, &fs2).unwrap();
        let level = report
            .levels
            .iter()
            .find(|l| l.invariant == -1)
            .expect("o-level present");
        assert_eq!(level.sites.len(), 2);
        assert_eq!(level.edges.len(), 1);
        assert!(!level.edges[0].nontrivial);

        // Use both shared cusps at both sites: nontrivial.
        let mut fs3 = fs2.clone();
        fs3.add_term(
            ModularSymbol::new(shared[1].clone(), other_a.clone()).unwrap(),
            1,
        );
        fs3.add_term(
            ModularSymbol::new(other_a.clone(), shared[1].clone()).unwrap(),
            1,
        );
        fs3.add_term(
            ModularSymbol::new(shared[1].clone(), other_b.clone()).unwrap(),
            1,
        );
        fs3.add_term(
            ModularSymbol::new(other_b.clone(), shared[1].clone()).unwrap(),
            1,
        );
        let report = interaction_analysis(&t, &fs3).unwrap();
        let level = report
            .levels
            .iter()
            .find(|l| l.invariant == -1)
            .expect("o-level present");
        assert_eq!(level.edges.len(), 1);
        assert!(level.edges[0].nontrivial);
    }
}
