//! Field abstraction shared by the linear-algebra paths.
//!
//! Everything downstream (kernels, Cech ranks, Hochschild coefficient
//! tables) is generic over a coefficient field: the rationals for the
//! characteristic-zero statements, and prime fields for the
//! characteristic checks.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A field given as a context object; elements do not know their field.
pub trait Field {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Image of an arbitrary-precision integer.
    fn from_bigint(&self, n: &BigInt) -> Self::Elem;
    fn describe(&self) -> String;
}

/// The rational numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_bigint(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn describe(&self) -> String {
        String::from("Q")
    }
}

/// The prime field F_p for a validated prime p (p fits in 63 bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotPrime(pub u64);

impl PrimeField {
    /// Constructs F_p, rejecting composite or degenerate moduli by a
    /// deterministic Miller-Rabin check.
    pub fn new(p: u64) -> Result<Self, NotPrime> {
        if is_prime_u64(p) {
            Ok(PrimeField { p })
        } else {
            Err(NotPrime(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, n: i64) -> u64 {
        (n as i128).rem_euclid(self.p as i128) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        addmod(*a, *b, self.p)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        addmod(*a, self.p - *b % self.p, self.p)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mulmod(*a, *b, self.p)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - *a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a % self.p == 0 {
            None
        } else {
            Some(powmod(*a, self.p - 2, self.p))
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a % self.p == 0
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let mut r = n % &p;
        if r.is_negative() {
            r += &p;
        }
        let digits = r.to_u64_digits().1;
        digits.first().copied().unwrap_or(0)
    }
    fn describe(&self) -> String {
        alloc::format!("F_{}", self.p)
    }
}

fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let (s, c) = a.overflowing_add(b);
    if c || s >= p {
        s.wrapping_sub(p)
    } else {
        s
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin over the witness set that covers all of u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Dense matrix over a field, row-major. Small sizes only; used for
/// kernels and ranks where exactness matters more than speed.
#[derive(Clone, Debug)]
pub struct Mat<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<F::Elem>,
}

impl<F: Field> Mat<F> {
    pub fn zero(field: &F, rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: alloc::vec![field.zero(); rows * cols],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &F::Elem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.data[r * self.cols + c] = v;
    }

    /// Row-reduces in place; returns the pivot columns.
    pub fn row_reduce(&mut self, field: &F) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !field.is_zero(self.at(r, col))) else {
                continue;
            };
            for c in 0..self.cols {
                self.data.swap(p * self.cols + c, row * self.cols + c);
            }
            let inv = field.inv(self.at(row, col)).expect("pivot nonzero");
            for c in col..self.cols {
                let v = field.mul(self.at(row, c), &inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && !field.is_zero(self.at(r, col)) {
                    let factor = self.at(r, col).clone();
                    for c in col..self.cols {
                        let v = field.sub(self.at(r, c), &field.mul(&factor, self.at(row, c)));
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(mut self, field: &F) -> usize {
        self.row_reduce(field).len()
    }

    /// Basis of the right kernel.
    pub fn kernel(mut self, field: &F) -> Vec<Vec<F::Elem>> {
        let pivots = self.row_reduce(field);
        let mut basis = Vec::new();
        let pivot_set: alloc::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = alloc::vec![field.zero(); self.cols];
            v[free] = field.one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = field.neg(self.at(prow, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self * x = b`; returns one solution if consistent.
    pub fn solve(&self, field: &F, b: &[F::Elem]) -> Option<Vec<F::Elem>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::<F>::zero(field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let pivots = aug.row_reduce(field);
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = alloc::vec![field.zero(); self.cols];
        for (prow, &pcol) in pivots.iter().enumerate() {
            x[pcol] = aug.at(prow, self.cols).clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(97));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(91));
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_007u64 * 3));
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.add(&5, &4), 2);
        assert_eq!(f.mul(&3, &5), 1);
        assert_eq!(f.inv(&3), Some(5));
        assert_eq!(f.inv(&0), None);
        assert!(PrimeField::new(6).is_err());
    }

    #[test]
    fn rational_kernel() {
        let q = Rationals;
        // x + y = 0 has a one-dimensional kernel.
        let mut m = Mat::<Rationals>::zero(&q, 1, 2);
        m.set(0, 0, q.one());
        m.set(0, 1, q.one());
        let k = m.kernel(&q);
        assert_eq!(k.len(), 1);
    }
}
