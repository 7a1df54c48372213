//! Dense exact linear algebra over the rationals.
//!
//! Elimination is fraction-free: rows are scaled to integer vectors, updated
//! by cross-multiplication and kept primitive (divided by their content), and
//! only the final reduced rows are normalised back to rationals. Pivots are
//! chosen leftmost-column first, then lowest row index; the reduced row
//! echelon form is unique, so results do not depend on row order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exec::Exec;
use crate::poly::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Rational::from_integer(x.into()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Appends `b` as an extra column.
    pub fn augment(&self, b: &[Rational]) -> Self {
        assert_eq!(b.len(), self.rows);
        Self::from_rows(
            (0..self.rows)
                .map(|r| {
                    let mut row = self.row(r).to_vec();
                    row.push(b[r].clone());
                    row
                })
                .collect(),
        )
    }

    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let lcm = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
                let ints: Vec<BigInt> =
                    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
                make_primitive(ints)
            })
            .collect()
    }
}

fn make_primitive(mut row: Vec<BigInt>) -> Vec<BigInt> {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x /= &g;
        }
    }
    row
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rref(m: &RationalMatrix) -> Rref {
    rref_with(m, Exec::default())
}

pub fn rref_with(m: &RationalMatrix, exec: Exec) -> Rref {
    let mut rows = m.integer_rows();
    let ncols = m.cols;
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..ncols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        let p = &pivot_row[col];
        let pivot_index = next;
        exec.for_each_mut(&mut rows, |i, row| {
            if i == pivot_index || row[col].is_zero() {
                return;
            }
            let f = row[col].clone();
            let updated: Vec<BigInt> = row
                .iter()
                .zip(&pivot_row)
                .map(|(x, y)| x * p - &f * y)
                .collect();
            *row = make_primitive(updated);
        });
        pivots.push(col);
        next += 1;
    }
    let mut out = RationalMatrix::zeros(m.rows, ncols);
    for (r, &pc) in pivots.iter().enumerate() {
        let p = rows[r][pc].clone();
        for c in 0..ncols {
            if !rows[r][c].is_zero() {
                out.set(r, c, Rational::new(rows[r][c].clone(), p.clone()));
            }
        }
    }
    Rref {
        matrix: out,
        pivots,
    }
}

pub fn rank(m: &RationalMatrix) -> usize {
    rref(m).rank()
}

/// Canonical kernel basis: one vector per free column, with a 1 in that
/// position, ordered by free column.
pub fn nullspace(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    nullspace_from(&rref(m), m.cols)
}

pub fn nullspace_with(m: &RationalMatrix, exec: Exec) -> Vec<Vec<Rational>> {
    nullspace_from(&rref_with(m, exec), m.cols)
}

fn nullspace_from(red: &Rref, ncols: usize) -> Vec<Vec<Rational>> {
    let mut is_pivot = vec![false; ncols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); ncols];
            v[free] = Rational::one();
            for (r, &pc) in red.pivots.iter().enumerate() {
                let e = red.matrix.get(r, free);
                if !e.is_zero() {
                    v[pc] = -e.clone();
                }
            }
            v
        })
        .collect()
}

/// A particular solution of `A x = b` with all free variables set to zero.
pub fn solve(a: &RationalMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    solve_with(a, b, Exec::default())
}

pub fn solve_with(a: &RationalMatrix, b: &[Rational], exec: Exec) -> Option<Vec<Rational>> {
    let red = rref_with(&a.augment(b), exec);
    if red.pivots.last() == Some(&a.cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); a.cols];
    for (r, &pc) in red.pivots.iter().enumerate() {
        x[pc] = red.matrix.get(r, a.cols).clone();
    }
    Some(x)
}

/// Exact determinant by Bareiss elimination.
pub fn determinant(m: &RationalMatrix) -> Rational {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return Rational::one();
    }
    // Scale each row to integers and remember the scale.
    let mut scale = Rational::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|r| {
            let row = m.row(r);
            let lcm = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            scale *= Rational::from_integer(lcm.clone());
            row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    Rational::from_integer(sign * &a[n - 1][n - 1]) / scale
}

/// Whether `v` lies in the row space spanned by `basis`.
pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    let m = RationalMatrix::from_rows(basis.to_vec()).transpose();
    solve(&m, v).is_some()
}

/// Scales a vector to coprime integers with a positive first non-zero entry.
pub fn normalize_primitive(v: &[Rational]) -> Vec<Rational> {
    let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut ints = make_primitive(ints);
    if ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        for x in ints.iter_mut() {
            *x = -&*x;
        }
    }
    ints.into_iter().map(Rational::from_integer).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use proptest::prelude::*;

    #[test]
    fn identity_rref() {
        let red = rref(&RationalMatrix::identity(3));
        assert_eq!(red.matrix, RationalMatrix::identity(3));
        assert_eq!(red.pivots, vec![0, 1, 2]);
        assert!(nullspace(&RationalMatrix::identity(4)).is_empty());
    }

    #[test]
    fn rank_one_rref() {
        let red = rref(&RationalMatrix::from_i64(&[&[2, 4], &[1, 2]]));
        assert_eq!(red.matrix, RationalMatrix::from_i64(&[&[1, 2], &[0, 0]]));
        assert_eq!(red.pivots, vec![0]);
    }

    #[test]
    fn rank_of_product_of_rank_three_factors() {
        let l = RationalMatrix::from_i64(&[
            &[1, 0, 2],
            &[3, 1, 0],
            &[0, 5, 1],
            &[2, 2, 2],
            &[-1, 4, 7],
        ]);
        let r = RationalMatrix::from_i64(&[
            &[1, 2, 0, 3, 1, 0, 4],
            &[0, 1, 1, -2, 0, 3, 1],
            &[2, 0, 1, 1, 5, -1, 0],
        ]);
        let mut prod = RationalMatrix::zeros(5, 7);
        for i in 0..5 {
            for j in 0..7 {
                let v: Rational = (0..3).map(|k| l.get(i, k) * r.get(k, j)).sum();
                prod.set(i, j, v);
            }
        }
        assert_eq!(rank(&prod), 3);
        assert_eq!(nullspace(&prod).len(), 4);
    }

    #[test]
    fn small_nullspaces() {
        assert_eq!(nullspace(&RationalMatrix::zeros(2, 3)).len(), 3);
        let ns = nullspace(&RationalMatrix::from_i64(&[&[1, 1, 0], &[0, 0, 1]]));
        assert_eq!(ns, vec![vec![rat(-1), rat(1), rat(0)]]);
    }

    #[test]
    fn solve_cases() {
        let b = vec![rat(3), rat(-1), rat(7)];
        assert_eq!(solve(&RationalMatrix::identity(3), &b), Some(b));
        let a = RationalMatrix::from_i64(&[&[1], &[1]]);
        assert_eq!(solve(&a, &[rat(0), rat(1)]), None);
    }

    #[test]
    fn determinants() {
        let m = RationalMatrix::from_i64(&[&[0, 2, 1], &[1, 1, 0], &[3, 0, 4]]);
        assert_eq!(determinant(&m), rat(-11));
        let s = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(determinant(&s), rat(0));
    }

    #[test]
    fn exec_strategies_agree() {
        let m =
            RationalMatrix::from_i64(&[&[1, 2, 3, 4], &[2, 3, 4, 5], &[3, 5, 7, 9], &[1, 0, 1, 0]]);
        assert_eq!(
            rref_with(&m, Exec::Sequential),
            rref_with(&m, Exec::Parallel)
        );
    }

    fn arb_matrix() -> impl Strategy<Value = RationalMatrix> {
        (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(-3i64..4, c), r).prop_map(|rows| {
                RationalMatrix::from_rows(
                    rows.into_iter()
                        .map(|row| row.into_iter().map(rat).collect())
                        .collect(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn kernel_vectors_annihilate(m in arb_matrix()) {
            let ns = nullspace(&m);
            for v in &ns {
                prop_assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
            }
            prop_assert_eq!(rank(&m) + ns.len(), m.ncols());
        }

        #[test]
        fn solutions_satisfy(m in arb_matrix(), seed in prop::collection::vec(-3i64..4, 5)) {
            let b: Vec<Rational> = (0..m.nrows()).map(|i| rat(seed[i % seed.len()])).collect();
            if let Some(x) = solve(&m, &b) {
                prop_assert_eq!(m.mul_vec(&x), b);
            }
        }

        #[test]
        fn rref_ignores_row_order(m in arb_matrix()) {
            let mut rows: Vec<Vec<Rational>> = (0..m.nrows()).map(|r| m.row(r).to_vec()).collect();
            rows.reverse();
            let flipped = RationalMatrix::from_rows(rows);
            prop_assert_eq!(rref(&m), rref(&flipped));
        }
    }
}
