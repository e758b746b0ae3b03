//! Weierstrass curves over small prime fields and the classification of
//! every x-line by its number of curve solutions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An element of the projective x-line P^1(F_q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum XCoord {
    Affine(u64),
    Infinity,
}

impl XCoord {
    pub fn is_infinity(&self) -> bool {
        matches!(self, XCoord::Infinity)
    }
}

impl fmt::Display for XCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XCoord::Affine(x) => write!(f, "{x}"),
            XCoord::Infinity => write!(f, "inf"),
        }
    }
}

/// A rational point of the curve, including the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Affine { x: u64, y: u64 },
    Infinity,
}

impl Point {
    pub fn x(&self) -> XCoord {
        match self {
            Point::Affine { x, .. } => XCoord::Affine(*x),
            Point::Infinity => XCoord::Infinity,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Affine { x, y } => write!(f, "({x},{y})"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

/// Number of curve solutions over a fixed x: none, one, or two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FiberKind {
    /// No solution y ("non-square").
    Ns,
    /// Exactly one solution, including the x = inf case.
    Os,
    /// Two distinct solutions ("square").
    S,
}

impl fmt::Display for FiberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberKind::Ns => write!(f, "ns"),
            FiberKind::Os => write!(f, "os"),
            FiberKind::S => write!(f, "s"),
        }
    }
}

/// Fiber classification of one x together with its solutions, sorted by y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberClass {
    pub kind: FiberKind,
    pub solutions: Vec<Point>,
}

/// A validated nonsingular Weierstrass curve
/// y^2 + a1*xy + a3*y = x^3 + a2*x^2 + a4*x + a6 over F_q, q prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    q: u64,
    a: [u64; 5],
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl CurveSpec {
    /// Validates and constructs a curve. Fails on a non-prime modulus or a
    /// vanishing discriminant.
    pub fn new(q: u64, coeffs: [u64; 5]) -> Result<CurveSpec> {
        if !is_prime(q) {
            return Err(Error::NonPrimeModulus(q));
        }
        let a = [
            coeffs[0] % q,
            coeffs[1] % q,
            coeffs[2] % q,
            coeffs[3] % q,
            coeffs[4] % q,
        ];
        let spec = CurveSpec { q, a };
        if spec.discriminant() == 0 {
            return Err(Error::SingularCurve { q });
        }
        Ok(spec)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coeffs(&self) -> [u64; 5] {
        self.a
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    fn mul_small(&self, k: u64, a: u64) -> u64 {
        self.mul(k % self.q, a)
    }

    /// The discriminant via the standard b2, b4, b6, b8 quantities, valid in
    /// every characteristic.
    pub fn discriminant(&self) -> u64 {
        let [a1, a2, a3, a4, a6] = self.a;
        let b2 = self.add(self.mul(a1, a1), self.mul_small(4, a2));
        let b4 = self.add(self.mul_small(2, a4), self.mul(a1, a3));
        let b6 = self.add(self.mul(a3, a3), self.mul_small(4, a6));
        let b8 = {
            let t1 = self.mul(self.mul(a1, a1), a6);
            let t2 = self.mul_small(4, self.mul(a2, a6));
            let t3 = self.mul(self.mul(a1, a3), a4);
            let t4 = self.mul(a2, self.mul(a3, a3));
            let t5 = self.mul(a4, a4);
            self.sub(self.add(self.add(t1, t2), t4), self.add(t3, t5))
        };
        let d1 = self.mul(self.mul(b2, b2), b8);
        let d2 = self.mul_small(8, self.mul(self.mul(b4, b4), b4));
        let d3 = self.mul_small(27, self.mul(b6, b6));
        let d4 = self.mul_small(9, self.mul(self.mul(b2, b4), b6));
        self.sub(d4, self.add(self.add(d1, d2), d3))
    }

    /// Evaluates y^2 + a1*xy + a3*y - (x^3 + a2*x^2 + a4*x + a6).
    pub fn evaluate(&self, x: u64, y: u64) -> u64 {
        let [a1, a2, a3, a4, a6] = self.a;
        let lhs = self.add(
            self.add(self.mul(y, y), self.mul(self.mul(a1, x), y)),
            self.mul(a3, y),
        );
        let x2 = self.mul(x, x);
        let rhs = self.add(
            self.add(self.mul(x2, x), self.mul(a2, x2)),
            self.add(self.mul(a4, x), a6),
        );
        self.sub(lhs, rhs)
    }

    /// The second solution over x paired with y by the negation map
    /// y |-> -y - a1*x - a3.
    pub fn negate_y(&self, x: u64, y: u64) -> u64 {
        let [a1, _, a3, _, _] = self.a;
        self.sub(0, self.add(y, self.add(self.mul(a1, x), a3)))
    }

    /// Classifies one x-line by exhaustive enumeration of y.
    pub fn fiber_solutions(&self, x: XCoord) -> FiberClass {
        match x {
            XCoord::Infinity => FiberClass {
                kind: FiberKind::Os,
                solutions: vec![Point::Infinity],
            },
            XCoord::Affine(x) => {
                let x = x % self.q;
                let solutions: Vec<Point> = (0..self.q)
                    .filter(|&y| self.evaluate(x, y) == 0)
                    .map(|y| Point::Affine { x, y })
                    .collect();
                let kind = match solutions.len() {
                    0 => FiberKind::Ns,
                    1 => FiberKind::Os,
                    2 => FiberKind::S,
                    n => unreachable!("quadratic fiber with {n} solutions"),
                };
                FiberClass { kind, solutions }
            }
        }
    }

    /// All x in P^1(F_q): affine residues ascending, then infinity.
    pub fn all_x(&self) -> Vec<XCoord> {
        let mut xs: Vec<XCoord> = (0..self.q).map(XCoord::Affine).collect();
        xs.push(XCoord::Infinity);
        xs
    }

    /// Fiber classification of every x-line.
    pub fn fiber_map(&self) -> BTreeMap<XCoord, FiberClass> {
        self.all_x()
            .into_iter()
            .map(|x| (x, self.fiber_solutions(x)))
            .collect()
    }

    /// All rational points including infinity, sorted.
    pub fn rational_points(&self) -> Vec<Point> {
        let mut pts = vec![Point::Infinity];
        for x in 0..self.q {
            pts.extend(self.fiber_solutions(XCoord::Affine(x)).solutions);
        }
        pts.sort();
        pts
    }

    pub fn point_count(&self) -> usize {
        self.rational_points().len()
    }

    /// Diagnostic Hasse bound check: | #E - (q+1) | <= 2*sqrt(q).
    pub fn hasse_bound_holds(&self) -> bool {
        let n = self.point_count() as i64;
        let q = self.q as i64;
        let d = (n - (q + 1)).unsigned_abs();
        (d * d) as i64 <= 4 * q
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = self.a;
        write!(f, "q={};a=[{},{},{},{},{}]", self.q, a1, a2, a3, a4, a6)
    }
}

impl FromStr for CurveSpec {
    type Err = Error;

    /// Parses the curve text form `q=<int>;a=[a1,a2,a3,a4,a6]`.
    fn from_str(s: &str) -> Result<CurveSpec> {
        let bad = |m: &str| Error::Parse(format!("curve `{s}`: {m}"));
        let s = s.trim();
        let rest = s
            .strip_prefix("q=")
            .ok_or_else(|| bad("expected `q=<int>;a=[...]`"))?;
        let (q_str, a_str) = rest
            .split_once(";a=")
            .ok_or_else(|| bad("expected `;a=[...]` after the modulus"))?;
        let q: u64 = q_str
            .trim()
            .parse()
            .map_err(|_| bad("modulus is not an integer"))?;
        let inner = a_str
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("coefficients must be bracketed"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(bad("expected exactly five coefficients a1,a2,a3,a4,a6"));
        }
        let mut coeffs = [0u64; 5];
        for (slot, part) in coeffs.iter_mut().zip(&parts) {
            let v: i64 = part
                .parse()
                .map_err(|_| bad("coefficient is not an integer"))?;
            *slot = v.rem_euclid(q.max(1) as i64) as u64;
        }
        CurveSpec::new(q, coeffs)
    }
}
