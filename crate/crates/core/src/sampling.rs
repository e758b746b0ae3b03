//! Seeded deterministic generators for curves, cusps, symbols, and
//! cusp-balanced formal sums, shared by the property suites and the fuzz
//! subcommand.

use crate::curve::CurveSpec;
use crate::error::Result;
use crate::relations::{instantiate, FormalSum, RelationInstance, RelationRule};
use crate::symbols::ModularSymbol;
use crate::ttree::{Cusp, TVertex, Tree, VertexAddress};

/// SplitMix64: tiny, fast, and stable across platforms and releases, which
/// keeps seeded outputs byte-identical.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, bound); bound must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Uniform in [lo, hi] inclusive.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }
}

/// A uniformly drawn valid curve over F_q (rejection sampling on the
/// discriminant).
pub fn random_curve(rng: &mut SplitMix64, q: u64) -> CurveSpec {
    loop {
        let coeffs = [
            rng.below(q),
            rng.below(q),
            rng.below(q),
            rng.below(q),
            rng.below(q),
        ];
        if let Ok(spec) = CurveSpec::new(q, coeffs) {
            return spec;
        }
    }
}

/// A random vertex reached by a child walk of random length <= max_depth.
pub fn random_vertex(tree: &Tree, rng: &mut SplitMix64, max_depth: u32) -> TVertex {
    let mut v = tree.root();
    let depth = rng.below(max_depth as u64 + 1);
    for _ in 0..depth {
        let kids = tree.children(&v);
        v = kids[rng.below(kids.len() as u64) as usize].clone();
    }
    v
}

/// A random cusp with anchor depth <= max_anchor_depth, found by walking to
/// a random vertex and ascending to the canonical cusp through it.
pub fn random_cusp(tree: &Tree, rng: &mut SplitMix64, max_anchor_depth: u32) -> Cusp {
    loop {
        let v = random_vertex(tree, rng, max_anchor_depth.saturating_sub(2));
        let cusp = tree
            .canonical_cusp_ascending(&v.addr)
            .expect("every vertex ascends to a cusp");
        if cusp.anchor().len() <= max_anchor_depth as usize {
            return cusp;
        }
    }
}

/// A random symbol between two distinct random cusps.
pub fn random_symbol(tree: &Tree, rng: &mut SplitMix64, max_anchor_depth: u32) -> ModularSymbol {
    loop {
        let a = random_cusp(tree, rng, max_anchor_depth);
        let b = random_cusp(tree, rng, max_anchor_depth);
        if let Ok(sym) = ModularSymbol::new(a, b) {
            return sym;
        }
    }
}

/// A random minimal vertex with address length <= max_depth.
pub fn random_minimal_vertex(
    tree: &Tree,
    rng: &mut SplitMix64,
    max_depth: u32,
) -> VertexAddress {
    loop {
        let v = random_vertex(tree, rng, max_depth);
        if v.label.is_minimal() {
            return v.addr;
        }
    }
}

/// A random generator-relation instance at a random minimal vertex.
pub fn random_instance(
    tree: &Tree,
    rng: &mut SplitMix64,
    max_site_depth: u32,
) -> Result<RelationInstance> {
    use crate::curve::FiberKind;
    use crate::stree::SLabel;
    loop {
        let site = random_minimal_vertex(tree, rng, max_site_depth);
        let label = tree.label_of(&site)?;
        let cusps = tree.attached_cusps(&site)?;
        let rules: &[RelationRule] = match label {
            SLabel::E { .. } => &[RelationRule::E2, RelationRule::E3],
            SLabel::V {
                class: FiberKind::S,
                ..
            } => &[RelationRule::S2],
            SLabel::O => &[RelationRule::O2, RelationRule::O3, RelationRule::OY],
            SLabel::V {
                class: FiberKind::Ns,
                ..
            } => &[RelationRule::NS2, RelationRule::NS3, RelationRule::NSY],
            _ => unreachable!("minimal labels only"),
        };
        let rule = *rng.choose(rules);
        if cusps.len() < rule.arity() {
            continue;
        }
        // Draw a tuple and retry on shape violations; the shape constraints
        // are sparse enough that rejection converges quickly.
        for _ in 0..30 {
            let mut tuple = Vec::new();
            while tuple.len() < rule.arity() {
                let c = rng.choose(&cusps).clone();
                if !tuple.contains(&c) {
                    tuple.push(c);
                }
            }
            match instantiate(tree, rule, &site, &tuple) {
                Ok(inst) => return Ok(inst),
                Err(_) => continue,
            }
        }
    }
}

/// A telescoping cycle over random cusps: {c1,c2} + {c2,c3} + ... + {ck,c1},
/// scaled by a random nonzero coefficient. Cusp-balanced by construction.
pub fn random_cycle(
    tree: &Tree,
    rng: &mut SplitMix64,
    max_len: usize,
    max_anchor_depth: u32,
    coeff_bound: i64,
) -> FormalSum {
    let len = 2 + rng.below(max_len.max(3) as u64 - 2) as usize;
    let mut cusps: Vec<Cusp> = Vec::new();
    while cusps.len() < len {
        let c = random_cusp(tree, rng, max_anchor_depth);
        if !cusps.contains(&c) {
            cusps.push(c);
        }
    }
    let mut coeff = rng.range_i64(-coeff_bound, coeff_bound);
    if coeff == 0 {
        coeff = 1;
    }
    let mut fs = FormalSum::new();
    for i in 0..len {
        let a = cusps[i].clone();
        let b = cusps[(i + 1) % len].clone();
        fs.add_term(ModularSymbol::new(a, b).expect("distinct cusps"), coeff);
    }
    fs
}

/// A random cusp-balanced formal sum: an integer combination of generator
/// instances plus telescoping cycles.
pub fn random_balanced_sum(
    tree: &Tree,
    rng: &mut SplitMix64,
    instances: usize,
    cycles: usize,
    coeff_bound: i64,
    max_depth: u32,
) -> Result<FormalSum> {
    let mut fs = FormalSum::new();
    for _ in 0..instances {
        let inst = random_instance(tree, rng, max_depth.min(6))?;
        let mut coeff = rng.range_i64(-coeff_bound, coeff_bound);
        if coeff == 0 {
            coeff = 1;
        }
        fs.add_scaled(&inst.expansion, coeff);
    }
    for _ in 0..cycles {
        let cycle = random_cycle(tree, rng, 5, max_depth, coeff_bound);
        fs.add_scaled(&cycle, 1);
    }
    Ok(fs)
}
