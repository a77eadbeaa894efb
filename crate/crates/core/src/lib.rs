//! Exact-arithmetic machinery for Batyrev mirror pairs.
//!
//! The crate is `no_std` (with `alloc`): everything here is pure
//! computation on exact integers and rationals, except the `tropical`
//! module which performs floating-point sampling of the piecewise-linear
//! degeneration picture. IO, file formats and the command-line driver
//! live in the companion `batymir` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cech;
pub mod fan;
pub mod field;
pub mod hochschild;
pub mod linalg;
pub mod logcoh;
pub mod lp;
pub mod mirror;
pub mod polytope;
pub mod ring;
pub mod tropical;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Integer vectors are used for lattice points, ray generators and
/// characters alike.
pub type IVec = alloc::vec::Vec<BigInt>;
/// Rational vectors appear as linear-form certificates and LP solutions.
pub type QVec = alloc::vec::Vec<BigRational>;

pub(crate) fn ivec_from<const N: usize>(v: [i64; N]) -> IVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Dot product of an integer functional with an integer vector.
pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    assert_eq!(a.len(), b.len(), "dimension mismatch in dot product");
    let mut acc = BigInt::from(0);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Dot product of a rational functional with an integer vector.
pub fn dot_qi(a: &[BigRational], b: &[BigInt]) -> BigRational {
    assert_eq!(a.len(), b.len(), "dimension mismatch in dot product");
    let mut acc = BigRational::from_integer(BigInt::from(0));
    for (x, y) in a.iter().zip(b) {
        acc += x * BigRational::from_integer(y.clone());
    }
    acc
}

/// Dot product of two rational vectors.
pub fn dot_qq(a: &[BigRational], b: &[BigRational]) -> BigRational {
    assert_eq!(a.len(), b.len(), "dimension mismatch in dot product");
    let mut acc = BigRational::from_integer(BigInt::from(0));
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
