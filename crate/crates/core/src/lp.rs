//! Exact rational linear programming.
//!
//! A dense two-phase simplex over `BigRational` with Bland's rule, so
//! every pivot sequence is deterministic and cycling is impossible. The
//! problem sizes here are tiny (certificate searches, cone membership,
//! kappa shifts), so no effort is spent on sparsity.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::QVec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// Optimal solution of the phase-two objective.
    Optimal { x: QVec, value: BigRational },
    Infeasible,
    Unbounded,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Minimizes `c . x` subject to `a x = b`, `x >= 0`.
///
/// Rows with negative right-hand side are flipped internally; artificial
/// variables drive phase one.
pub fn simplex_min(a: &[QVec], b: &[BigRational], c: &[BigRational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    assert!(a.iter().all(|row| row.len() == n), "ragged constraint row");
    assert_eq!(b.len(), m);

    // Tableau columns: n structural + m artificial + 1 rhs.
    let width = n + m + 1;
    let mut t: Vec<QVec> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = alloc::vec![BigRational::zero(); width];
        let flip = b[i].is_negative();
        for j in 0..n {
            row[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[n + i] = BigRational::one();
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase one: minimize the sum of artificials.
    let mut obj = alloc::vec![BigRational::zero(); width];
    for j in n..n + m {
        obj[j] = BigRational::one();
    }
    price_out(&mut obj, &t, &basis);
    if run_simplex(&mut t, &mut basis, &mut obj, n + m) == Outcome::Unbounded {
        unreachable!("phase one objective is bounded below by zero");
    }
    let phase1 = -obj[width - 1].clone();
    if phase1 > BigRational::zero() {
        return LpOutcome::Infeasible;
    }
    // Pivot artificials out of the basis; rows that resist are redundant
    // (identically zero on structural columns) and are dropped so no
    // artificial can drift positive during phase two.
    for i in 0..t.len() {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut keep = Vec::with_capacity(t.len());
    let mut kept_basis = Vec::with_capacity(basis.len());
    for (row, bv) in t.into_iter().zip(basis.into_iter()) {
        if bv < n {
            keep.push(row);
            kept_basis.push(bv);
        }
    }
    let mut t = keep;
    let mut basis = kept_basis;

    // Phase two.
    let mut obj2 = alloc::vec![BigRational::zero(); width];
    obj2[..n].clone_from_slice(c);
    price_out(&mut obj2, &t, &basis);
    match run_simplex(&mut t, &mut basis, &mut obj2, n) {
        Outcome::Unbounded => LpOutcome::Unbounded,
        Outcome::Optimal => {
            let mut x = alloc::vec![BigRational::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i][width - 1].clone();
                }
            }
            let value = -obj2[width - 1].clone();
            LpOutcome::Optimal { x, value }
        }
    }
}

#[derive(PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

fn price_out(obj: &mut [BigRational], t: &[QVec], basis: &[usize]) {
    for (i, &bv) in basis.iter().enumerate() {
        if !obj[bv].is_zero() {
            let f = obj[bv].clone();
            for j in 0..obj.len() {
                let sub = &f * &t[i][j];
                obj[j] -= sub;
            }
        }
    }
}

/// Bland's rule: entering = lowest-index column with negative reduced
/// cost (restricted to columns < allowed), leaving = lowest-index basic
/// variable among the ratio-test ties.
fn run_simplex(
    t: &mut [QVec],
    basis: &mut [usize],
    obj: &mut [BigRational],
    allowed: usize,
) -> Outcome {
    let width = obj.len();
    loop {
        let Some(enter) = (0..allowed).find(|&j| obj[j].is_negative()) else {
            return Outcome::Optimal;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..t.len() {
            if t[i][enter] > BigRational::zero() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Outcome::Unbounded;
        };
        pivot_with_obj(t, basis, obj, leave, enter);
    }
}

fn pivot(t: &mut [QVec], basis: &mut [usize], row: usize, col: usize) {
    let width = t[0].len();
    let p = t[row][col].clone();
    for j in 0..width {
        t[row][j] = &t[row][j] / &p;
    }
    for i in 0..t.len() {
        if i != row && !t[i][col].is_zero() {
            let f = t[i][col].clone();
            for j in 0..width {
                let sub = &f * &t[row][j];
                t[i][j] -= sub;
            }
        }
    }
    basis[row] = col;
}

fn pivot_with_obj(
    t: &mut [QVec],
    basis: &mut [usize],
    obj: &mut [BigRational],
    row: usize,
    col: usize,
) {
    pivot(t, basis, row, col);
    if !obj[col].is_zero() {
        let f = obj[col].clone();
        for j in 0..obj.len() {
            let sub = &f * &t[row][j];
            obj[j] -= sub;
        }
    }
}

/// Feasibility of `a x = b, x >= 0`, returning a witness.
pub fn feasible_point(a: &[QVec], b: &[BigRational]) -> Option<QVec> {
    let n = a.first().map_or(0, |r| r.len());
    let c = alloc::vec![BigRational::zero(); n];
    match simplex_min(a, b, &c) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

/// Decides whether `target` is a nonnegative combination of `gens`
/// (exact cone membership); returns the coefficients if so.
pub fn in_cone(gens: &[crate::IVec], target: &[BigRational]) -> Option<QVec> {
    let dim = target.len();
    if gens.is_empty() {
        return if target.iter().all(|x| x.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let mut rows: Vec<QVec> = Vec::with_capacity(dim);
    for d in 0..dim {
        rows.push(
            gens.iter()
                .map(|g| BigRational::from_integer(g[d].clone()))
                .collect(),
        );
    }
    feasible_point(&rows, target)
}

/// Decides whether the relative interiors of two cones intersect:
/// exists x = sum t_i g_i = sum s_j h_j with all t_i, s_j >= 1.
pub fn relint_intersect(gens_a: &[crate::IVec], gens_b: &[crate::IVec]) -> bool {
    if gens_a.is_empty() || gens_b.is_empty() {
        // relint of the zero cone is {0}, which lies in every cone's
        // relint only when that cone is also zero.
        return gens_a.is_empty() && gens_b.is_empty();
    }
    let dim = gens_a[0].len();
    // Substitute t_i = 1 + u_i, s_j = 1 + v_j with u, v >= 0:
    // sum u_i g_i - sum v_j h_j = sum h_j - sum g_i.
    let mut rhs = alloc::vec![BigRational::zero(); dim];
    for d in 0..dim {
        let mut acc = BigRational::zero();
        for h in gens_b {
            acc += BigRational::from_integer(h[d].clone());
        }
        for g in gens_a {
            acc -= BigRational::from_integer(g[d].clone());
        }
        rhs[d] = acc;
    }
    let mut rows: Vec<QVec> = Vec::with_capacity(dim);
    for d in 0..dim {
        let mut row = Vec::with_capacity(gens_a.len() + gens_b.len());
        for g in gens_a {
            row.push(BigRational::from_integer(g[d].clone()));
        }
        for h in gens_b {
            row.push(BigRational::from_integer(-h[d].clone()));
        }
        rows.push(row);
    }
    feasible_point(&rows, &rhs).is_some()
}

/// Maximizes `t` subject to `lhs_i . y + t <= rhs_i` and `t <= cap`;
/// used to find strictly-satisfying points of open systems. Returns
/// (y, t) at the optimum, or None if infeasible (it never is, for
/// cap >= any achievable slack, but kept for safety).
pub fn max_min_slack(
    lhs: &[QVec],
    rhs: &[BigRational],
    ncols: usize,
    cap: &BigRational,
) -> Option<(QVec, BigRational)> {
    // Variables: y (free, split into y+ - y-), t >= 0, slacks.
    let m = lhs.len();
    let nv = 2 * ncols + 1 + m;
    let mut rows: Vec<QVec> = Vec::with_capacity(m + 1);
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = alloc::vec![BigRational::zero(); nv];
        for j in 0..ncols {
            row[j] = lhs[i][j].clone();
            row[ncols + j] = -lhs[i][j].clone();
        }
        row[2 * ncols] = BigRational::one();
        row[2 * ncols + 1 + i] = BigRational::one();
        rows.push(row);
        b.push(rhs[i].clone());
    }
    // t <= cap.
    let mut row = alloc::vec![BigRational::zero(); nv];
    row[2 * ncols] = BigRational::one();
    // Slack for the cap constraint shares the last artificial-free slot:
    // append one more column.
    for r in rows.iter_mut() {
        r.push(BigRational::zero());
    }
    row.push(BigRational::one());
    rows.push(row);
    b.push(cap.clone());

    let nv = nv + 1;
    let mut c = alloc::vec![BigRational::zero(); nv];
    c[2 * ncols] = -BigRational::one(); // maximize t
    match simplex_min(&rows, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            let y: QVec = (0..ncols).map(|j| &x[j] - &x[ncols + j]).collect();
            let t = x[2 * ncols].clone();
            Some((y, t))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivec_from;

    #[test]
    fn minimizes_simple_program() {
        // min x + y  s.t.  x + 2y = 4, x, y >= 0  ->  (0, 2), value 2.
        let a = alloc::vec![alloc::vec![q(1), q(2)]];
        let b = alloc::vec![q(4)];
        let c = alloc::vec![q(1), q(1)];
        match simplex_min(&a, &b, &c) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, q(2));
                assert_eq!(x, alloc::vec![q(0), q(2)]);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        // x = -1, x >= 0 is infeasible.
        let a = alloc::vec![alloc::vec![q(1)]];
        let b = alloc::vec![q(-1)];
        let c = alloc::vec![q(0)];
        assert_eq!(simplex_min(&a, &b, &c), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // min -x s.t. x - y = 0 is unbounded along the diagonal.
        let a = alloc::vec![alloc::vec![q(1), q(-1)]];
        let b = alloc::vec![q(0)];
        let c = alloc::vec![q(-1), q(0)];
        assert_eq!(simplex_min(&a, &b, &c), LpOutcome::Unbounded);
    }

    #[test]
    fn cone_membership() {
        let gens = alloc::vec![ivec_from([1, 0]), ivec_from([1, 2])];
        assert!(in_cone(&gens, &[q(2), q(2)]).is_some());
        assert!(in_cone(&gens, &[q(0), q(1)]).is_none());
        assert!(in_cone(&gens, &[q(0), q(0)]).is_some());
    }

    #[test]
    fn relint_disjoint_for_adjacent_quadrants() {
        let a = alloc::vec![ivec_from([1, 0]), ivec_from([0, 1])];
        let b = alloc::vec![ivec_from([0, 1]), ivec_from([-1, 0])];
        assert!(!relint_intersect(&a, &b));
        assert!(relint_intersect(&a, &a));
    }

    #[test]
    fn degenerate_pivots_terminate() {
        // A classic degenerate system; Bland's rule must not cycle.
        let a = alloc::vec![
            alloc::vec![q(1), q(1), q(1), q(0)],
            alloc::vec![q(1), q(-1), q(0), q(1)],
        ];
        let b = alloc::vec![q(0), q(0)];
        let c = alloc::vec![q(-1), q(0), q(0), q(0)];
        // Feasible region is {x = y = 0 slice}; objective bounded at 0.
        match simplex_min(&a, &b, &c) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(0)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
