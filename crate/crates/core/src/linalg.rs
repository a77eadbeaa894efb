//! Exact integer linear algebra: Smith normal form with transforms,
//! lattice indices, primitive vectors and alternating two-forms.
//!
//! All arithmetic is arbitrary precision. Polytope duals and Smith
//! invariants overflow machine words even on small inputs, so nothing
//! here is allowed to round or wrap.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::field::Field;
use crate::IVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinalgError {
    DimensionMismatch,
    ZeroVector,
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::DimensionMismatch => write!(f, "dimension mismatch"),
            LinalgError::ZeroVector => write!(f, "zero vector has no primitive part"),
        }
    }
}

/// Dense integer matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: alloc::vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[IVec]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            entries: rows.iter().flat_map(|v| v.iter().cloned()).collect(),
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut BigInt {
        &mut self.entries[r * self.cols + c]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.at(i, k).is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = self.at(i, k) * other.at(k, j);
                    *out.at_mut(i, j) += add;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.entries.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[a] += q * row[b]
    fn add_row_mul(&mut self, a: usize, b: usize, q: &BigInt) {
        for c in 0..self.cols {
            let add = q * self.at(b, c);
            *self.at_mut(a, c) += add;
        }
    }

    fn add_col_mul(&mut self, a: usize, b: usize, q: &BigInt) {
        for r in 0..self.rows {
            let add = q * self.at(r, b);
            *self.at_mut(r, a) += add;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for c in 0..self.cols {
            let v = -self.at(a, c).clone();
            *self.at_mut(a, c) = v;
        }
    }

    /// Rank over the rationals (fraction-free elimination).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..m.cols {
            let Some(p) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            for r in row + 1..m.rows {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let a = m.at(row, col).clone();
                let b = m.at(r, col).clone();
                let g = a.gcd(&b);
                let fa = &b / &g;
                let fb = &a / &g;
                for c in col..m.cols {
                    let v = m.at(r, c) * &fb - m.at(row, c) * &fa;
                    *m.at_mut(r, c) = v;
                }
            }
            rank += 1;
            row += 1;
            if row == m.rows {
                break;
            }
        }
        rank
    }

    /// Determinant by Bareiss fraction-free elimination; square only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m.at(r, k).is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j)) / &prev;
                    *m.at_mut(i, j) = v;
                }
                *m.at_mut(i, k) = BigInt::zero();
            }
            prev = m.at(k, k).clone();
        }
        sign * m.at(n - 1, n - 1).clone()
    }
}

/// Result of a Smith decomposition `left * m * right = diag`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub diag: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

/// Smith normal form with unimodular transforms: `left * m * right` is
/// diagonal with nonnegative entries d1 | d2 | ... .
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let mut a = m.clone();
    let mut left = IntMatrix::identity(m.rows);
    let mut right = IntMatrix::identity(m.cols);
    let n = core::cmp::min(m.rows, m.cols);

    let mut t = 0;
    while t < n {
        // Find a nonzero pivot at or after (t, t).
        let mut pivot = None;
        'search: for r in t..a.rows {
            for c in t..a.cols {
                if !a.at(r, c).is_zero() {
                    pivot = Some((r, c));
                    break 'search;
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        a.swap_rows(t, pr);
        left.swap_rows(t, pr);
        a.swap_cols(t, pc);
        right.swap_cols(t, pc);

        // Clear row and column t; restart whenever a reduction reopens one.
        loop {
            let mut touched = false;
            for r in t + 1..a.rows {
                if a.at(r, t).is_zero() {
                    continue;
                }
                let q = a.at(r, t).div_floor(a.at(t, t));
                if !q.is_zero() {
                    let nq = -q;
                    a.add_row_mul(r, t, &nq);
                    left.add_row_mul(r, t, &nq);
                }
                if !a.at(r, t).is_zero() {
                    a.swap_rows(r, t);
                    left.swap_rows(r, t);
                    touched = true;
                }
            }
            for c in t + 1..a.cols {
                if a.at(t, c).is_zero() {
                    continue;
                }
                let q = a.at(t, c).div_floor(a.at(t, t));
                if !q.is_zero() {
                    let nq = -q;
                    a.add_col_mul(c, t, &nq);
                    right.add_col_mul(c, t, &nq);
                }
                if !a.at(t, c).is_zero() {
                    a.swap_cols(c, t);
                    right.swap_cols(c, t);
                    touched = true;
                }
            }
            if !touched {
                break;
            }
        }

        // Enforce divisibility d_t | entries of the trailing block.
        let mut fixed = true;
        'divisibility: for r in t + 1..a.rows {
            for c in t + 1..a.cols {
                if !(a.at(r, c) % a.at(t, t)).is_zero() {
                    // Fold row r into row t and redo the pivot step.
                    a.add_row_mul(t, r, &BigInt::one());
                    left.add_row_mul(t, r, &BigInt::one());
                    fixed = false;
                    break 'divisibility;
                }
            }
        }
        if fixed {
            if a.at(t, t).is_negative() {
                a.negate_row(t);
                left.negate_row(t);
            }
            t += 1;
        }
    }

    let diag = (0..n).map(|i| a.at(i, i).clone()).collect();
    SmithDecomposition { diag, left, right }
}

/// Index of the subgroup of Z^rank generated by the given vectors:
/// finite (product of Smith invariants) when they have full rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupIndex {
    Finite(BigInt),
    Infinite,
}

pub fn group_index(generators: &[IVec], ambient_rank: usize) -> Result<GroupIndex, LinalgError> {
    if generators.iter().any(|g| g.len() != ambient_rank) {
        return Err(LinalgError::DimensionMismatch);
    }
    if generators.len() < ambient_rank {
        return Ok(GroupIndex::Infinite);
    }
    let m = IntMatrix::from_rows(generators);
    let snf = smith_normal_form(&m);
    let nonzero: Vec<&BigInt> = snf.diag.iter().filter(|d| !d.is_zero()).collect();
    if nonzero.len() < ambient_rank {
        return Ok(GroupIndex::Infinite);
    }
    let mut idx = BigInt::one();
    for d in nonzero {
        idx *= d;
    }
    Ok(GroupIndex::Finite(idx))
}

/// v / gcd(entries); errors on the zero vector.
pub fn primitive_part(v: &[BigInt]) -> Result<IVec, LinalgError> {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / &g).collect())
}

/// Alternating two-form over a field, stored as the full antisymmetric
/// coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm<F: Field> {
    pub dim: usize,
    coeffs: Vec<F::Elem>,
}

impl<F: Field> TwoForm<F> {
    pub fn zero(field: &F, dim: usize) -> Self {
        TwoForm {
            dim,
            coeffs: alloc::vec![field.zero(); dim * dim],
        }
    }

    /// The basis form e_i wedge e_j.
    pub fn basis(field: &F, dim: usize, i: usize, j: usize) -> Self {
        assert!(i < dim && j < dim && i != j);
        let mut f = Self::zero(field, dim);
        f.coeffs[i * dim + j] = field.one();
        f.coeffs[j * dim + i] = field.neg(&field.one());
        f
    }

    pub fn coeff(&self, i: usize, j: usize) -> &F::Elem {
        &self.coeffs[i * self.dim + j]
    }

    pub fn set_coeff(&mut self, field: &F, i: usize, j: usize, v: F::Elem) {
        assert!(i != j, "diagonal of a two-form is zero");
        self.coeffs[j * self.dim + i] = field.neg(&v);
        self.coeffs[i * self.dim + j] = v;
    }

    pub fn add(&self, field: &F, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        TwoForm {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| field.add(a, b))
                .collect(),
        }
    }
}

/// Contraction alpha(p, -) with the convention
/// contract(e_i wedge e_j, e_i*) = e_j: component k is sum_j alpha_{jk} p_j.
pub fn wedge_contract<F: Field>(
    field: &F,
    alpha: &TwoForm<F>,
    p: &[F::Elem],
) -> Result<Vec<F::Elem>, LinalgError> {
    if p.len() != alpha.dim {
        return Err(LinalgError::DimensionMismatch);
    }
    let mut out = alloc::vec![field.zero(); alpha.dim];
    for (k, slot) in out.iter_mut().enumerate() {
        for (j, pj) in p.iter().enumerate() {
            let term = field.mul(alpha.coeff(j, k), pj);
            *slot = field.add(slot, &term);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::ivec_from;

    fn diag_embedding(diag: &[BigInt], rows: usize, cols: usize) -> IntMatrix {
        let mut d = IntMatrix::zero(rows, cols);
        for (i, v) in diag.iter().enumerate() {
            *d.at_mut(i, i) = v.clone();
        }
        d
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::identity(2);
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, alloc::vec![BigInt::from(1), BigInt::from(1)]);
    }

    #[test]
    fn snf_reference_case() {
        // Oracle: d1 = gcd of entries, d1*d2 = gcd of 2x2 minors (= |det|).
        let m = IntMatrix::from_rows(&[ivec_from([2, 4]), ivec_from([6, 8])]);
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, alloc::vec![BigInt::from(2), BigInt::from(4)]);
        let lmr = s.left.mul(&m).mul(&s.right);
        assert_eq!(lmr, diag_embedding(&s.diag, 2, 2));
        assert_eq!(s.left.det().abs(), BigInt::from(1));
        assert_eq!(s.right.det().abs(), BigInt::from(1));
    }

    #[test]
    fn snf_zero() {
        let m = IntMatrix::zero(2, 3);
        let s = smith_normal_form(&m);
        assert!(s.diag.iter().all(|d| d.is_zero()));
    }

    #[test]
    fn snf_rectangular_roundtrip() {
        let m = IntMatrix::from_rows(&[ivec_from([3, 0, -6]), ivec_from([0, 9, 12])]);
        let s = smith_normal_form(&m);
        let lmr = s.left.mul(&m).mul(&s.right);
        assert_eq!(lmr, diag_embedding(&s.diag, 2, 3));
        for w in s.diag.windows(2) {
            if !w[0].is_zero() {
                assert!((&w[1] % &w[0]).is_zero());
            }
        }
    }

    #[test]
    fn group_index_cases() {
        let e = group_index(&[ivec_from([1, 0]), ivec_from([0, 1])], 2).unwrap();
        assert_eq!(e, GroupIndex::Finite(BigInt::from(1)));
        let g = group_index(&[ivec_from([1, 1]), ivec_from([1, -1])], 2).unwrap();
        assert_eq!(g, GroupIndex::Finite(BigInt::from(2)));
        let inf = group_index(&[ivec_from([1, 0])], 2).unwrap();
        assert_eq!(inf, GroupIndex::Infinite);
        assert!(group_index(&[ivec_from([1, 0, 0])], 2).is_err());
    }

    #[test]
    fn group_index_redundant_generators() {
        let g = group_index(
            &[ivec_from([1, 1]), ivec_from([1, -1]), ivec_from([2, 0])],
            2,
        )
        .unwrap();
        assert_eq!(g, GroupIndex::Finite(BigInt::from(2)));
    }

    #[test]
    fn primitive_part_cases() {
        assert_eq!(primitive_part(&ivec_from([2, 4])).unwrap(), ivec_from([1, 2]));
        assert_eq!(
            primitive_part(&ivec_from([-3, 0, 6])).unwrap(),
            ivec_from([-1, 0, 2])
        );
        assert_eq!(primitive_part(&ivec_from([1, 1])).unwrap(), ivec_from([1, 1]));
        assert_eq!(
            primitive_part(&ivec_from([0, 0])),
            Err(LinalgError::ZeroVector)
        );
    }

    #[test]
    fn wedge_contract_convention() {
        let q = Rationals;
        let alpha = TwoForm::basis(&q, 2, 0, 1);
        let p = alloc::vec![q.one(), q.zero()];
        let out = wedge_contract(&q, &alpha, &p).unwrap();
        assert_eq!(out, alloc::vec![q.zero(), q.one()]);
    }

    #[test]
    fn wedge_contract_mixed() {
        // alpha = e1^e2 + e2^e3 in dim 3, p = e2* -> -e1 + e3.
        let q = Rationals;
        let alpha = TwoForm::basis(&q, 3, 0, 1).add(&q, &TwoForm::basis(&q, 3, 1, 2));
        let p = alloc::vec![q.zero(), q.one(), q.zero()];
        let out = wedge_contract(&q, &alpha, &p).unwrap();
        assert_eq!(out, alloc::vec![q.from_i64(-1), q.zero(), q.one()]);
    }

    #[test]
    fn wedge_contract_antisymmetry() {
        // alpha(p, p) = 0 for all alpha, p.
        let q = Rationals;
        let mut alpha = TwoForm::zero(&q, 3);
        alpha.set_coeff(&q, 0, 1, q.from_i64(3));
        alpha.set_coeff(&q, 0, 2, q.from_i64(-2));
        alpha.set_coeff(&q, 1, 2, q.from_i64(5));
        let p = alloc::vec![q.from_i64(2), q.from_i64(-7), q.from_i64(4)];
        let out = wedge_contract(&q, &alpha, &p).unwrap();
        let mut pairing = q.zero();
        for (a, b) in out.iter().zip(&p) {
            pairing = q.add(&pairing, &q.mul(a, b));
        }
        assert!(q.is_zero(&pairing));
    }
}
