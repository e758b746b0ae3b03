//! Exact Smith normal form of integer matrices with unimodular transforms,
//! via elimination with smallest-nonzero pivot selection and
//! arbitrary-precision integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn from_i64(rows: &[Vec<i64>]) -> Matrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let m = a.len();
    let k = if m > 0 { a[0].len() } else { 0 };
    let n = if b.is_empty() { 0 } else { b[0].len() };
    assert_eq!(k, b.len(), "dimension mismatch");
    let mut out = vec![vec![BigInt::zero(); n]; m];
    for i in 0..m {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..n {
                let prod = &a[i][l] * &b[l][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

/// D = U * A * V with U, V unimodular and D diagonal with a divisibility
/// chain d1 | d2 | ...
#[derive(Debug, Clone)]
pub struct SnfResult {
    pub rows: usize,
    pub cols: usize,
    /// The nonzero invariant factors, in chain order.
    pub diag: Vec<BigInt>,
    pub rank: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
    pub u: Matrix,
    pub v: Matrix,
}

impl SnfResult {
    /// Reconstructs the full rows x cols diagonal matrix D.
    pub fn d_matrix(&self) -> Matrix {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (i, f) in self.diag.iter().enumerate() {
            d[i][i] = f.clone();
        }
        d
    }
}

/// row_dst -= q * row_src, borrowing both rows disjointly.
fn row_axpy(m: &mut Matrix, dst: usize, src: usize, q: &BigInt) {
    debug_assert_ne!(dst, src);
    let (target, source) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in target.iter_mut().zip(source.iter()) {
        *x -= q * y;
    }
}

struct Engine {
    d: Matrix,
    u: Option<Matrix>,
    v: Option<Matrix>,
    m: usize,
    n: usize,
}

impl Engine {
    fn new(a: &Matrix, track: bool) -> Engine {
        let m = a.len();
        let n = if m > 0 { a[0].len() } else { 0 };
        Engine {
            d: a.clone(),
            u: track.then(|| identity(m)),
            v: track.then(|| identity(n)),
            m,
            n,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.d.swap(a, b);
        if let Some(u) = &mut self.u {
            u.swap(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for row in &mut self.d {
            row.swap(a, b);
        }
        if let Some(v) = &mut self.v {
            for row in v.iter_mut() {
                row.swap(a, b);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.d[i] {
            let neg = -&*x;
            *x = neg;
        }
        if let Some(u) = &mut self.u {
            for x in &mut u[i] {
                let neg = -&*x;
                *x = neg;
            }
        }
    }

    /// row_i -= q * row_t
    fn row_sub(&mut self, i: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        row_axpy(&mut self.d, i, t, q);
        if let Some(u) = &mut self.u {
            row_axpy(u, i, t, q);
        }
    }

    /// row_t += row_i
    fn row_add(&mut self, t: usize, i: usize) {
        let minus_one = -BigInt::one();
        row_axpy(&mut self.d, t, i, &minus_one);
        if let Some(u) = &mut self.u {
            row_axpy(u, t, i, &minus_one);
        }
    }

    /// col_j -= q * col_t
    fn col_sub(&mut self, j: usize, t: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.m {
            let delta = q * &self.d[i][t];
            self.d[i][j] -= delta;
        }
        if let Some(v) = &mut self.v {
            for row in v.iter_mut() {
                let delta = q * &row[t];
                row[j] -= delta;
            }
        }
    }

    fn smallest_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.m {
            for j in t..self.n {
                if self.d[i][j].is_zero() {
                    continue;
                }
                match &best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if self.d[i][j].abs() < self.d[*bi][*bj].abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }

    fn run(mut self) -> (Vec<BigInt>, Option<Matrix>, Option<Matrix>) {
        let bound = self.m.min(self.n);
        let mut t = 0;
        while t < bound {
            let Some((pi, pj)) = self.smallest_pivot(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            'reduce: loop {
                if self.d[t][t].is_negative() {
                    self.negate_row(t);
                }
                // Clear the pivot column.
                for i in t + 1..self.m {
                    if !self.d[i][t].is_zero() {
                        let q = self.d[i][t].div_floor(&self.d[t][t]);
                        self.row_sub(i, t, &q);
                        if !self.d[i][t].is_zero() {
                            // The remainder is a smaller pivot.
                            self.swap_rows(t, i);
                            continue 'reduce;
                        }
                    }
                }
                // Clear the pivot row.
                for j in t + 1..self.n {
                    if !self.d[t][j].is_zero() {
                        let q = self.d[t][j].div_floor(&self.d[t][t]);
                        self.col_sub(j, t, &q);
                        if !self.d[t][j].is_zero() {
                            self.swap_cols(t, j);
                            continue 'reduce;
                        }
                    }
                }
                // Divisibility fixup: the pivot must divide the rest.
                let mut fix = None;
                'scan: for i in t + 1..self.m {
                    for j in t + 1..self.n {
                        if !self.d[i][j].mod_floor(&self.d[t][t]).is_zero() {
                            fix = Some(i);
                            break 'scan;
                        }
                    }
                }
                match fix {
                    Some(i) => {
                        self.row_add(t, i);
                        continue 'reduce;
                    }
                    None => break 'reduce,
                }
            }
            t += 1;
        }
        let diag: Vec<BigInt> = (0..t).map(|i| self.d[i][i].clone()).collect();
        debug_assert!(diag.windows(2).all(|w| w[1].mod_floor(&w[0]).is_zero()));
        (diag, self.u, self.v)
    }
}

/// Smith normal form with unimodular transforms.
pub fn smith_normal_form(a: &Matrix) -> SnfResult {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let (diag, u, v) = Engine::new(a, true).run();
    let rank = diag.len();
    let torsion = diag.iter().filter(|d| **d > BigInt::one()).cloned().collect();
    SnfResult {
        rows,
        cols,
        diag,
        rank,
        torsion,
        u: u.expect("tracked"),
        v: v.expect("tracked"),
    }
}

/// The nonzero invariant factors only, skipping transform bookkeeping.
pub fn invariant_factors(a: &Matrix) -> Vec<BigInt> {
    Engine::new(a, false).run().0
}
