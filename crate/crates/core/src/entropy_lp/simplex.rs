//! Fraction-free revised simplex.
//!
//! Solves `min c·y` subject to `A y = rhs`, `y ≥ 0`, with `rhs ≥ 0` and
//! integer data. The basis inverse is kept as `M / d` with an integer
//! matrix `M` and `d > 0`; pivots use exact Bareiss division, so no gcd is
//! ever taken. Entering column: lowest index with negative reduced cost.
//! Leaving row: minimum ratio, ties broken by lowest basic column index.
//!
//! Entries stay small on the entropy LPs, so the solver first runs on
//! checked `i128` and repeats the identical pivot sequence on `BigInt` only
//! if an operation overflows.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sparse integer column: `(row, coefficient)`.
pub(crate) type Column = Vec<(usize, BigInt)>;

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Stop {
    Timeout,
}

#[derive(Debug)]
enum Halt {
    Stop(Stop),
    Overflow,
}

impl From<Overflow> for Halt {
    fn from(_: Overflow) -> Self {
        Halt::Overflow
    }
}

#[derive(Debug)]
struct Overflow;

type R<T> = Result<T, Overflow>;

trait Ring: Clone + Ord + Sized {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> R<Self>;
    fn sub(&self, o: &Self) -> R<Self>;
    fn mul(&self, o: &Self) -> R<Self>;
    /// Division known to be exact.
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> R<Self>;
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Ring for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add(&self, o: &Self) -> R<Self> {
        self.checked_add(*o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> R<Self> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> R<Self> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> R<Self> {
        self.checked_neg().ok_or(Overflow)
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> R<Self> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> R<Self> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> R<Self> {
        Ok(self * o)
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> R<Self> {
        Ok(-self)
    }
}

pub(crate) struct Problem<'a> {
    pub rows: usize,
    pub columns: &'a [Column],
    pub rhs: Vec<BigInt>,
}

pub(crate) enum Outcome {
    /// Phase 1 failed. `π = duals` satisfies `π·A_j ≤ 0` for every column
    /// and `π·rhs > 0`.
    Infeasible { duals: Vec<BigInt> },
    /// Primal values `y / det`; with costs, the optimum `objective / det`.
    Solved { y: Vec<BigInt>, det: BigInt, objective: Option<BigInt> },
    Unbounded,
}

/// Phase 1 and, when `costs` are given, phase 2.
pub(crate) fn solve(problem: &Problem<'_>, costs: Option<&[BigInt]>, deadline: Option<Instant>) -> Result<Outcome, Stop> {
    assert!(problem.rhs.iter().all(|b| !Signed::is_negative(b)), "rhs must be nonnegative");
    match run::<i128>(problem, costs, deadline) {
        Ok(out) => Ok(out),
        Err(Halt::Stop(s)) => Err(s),
        Err(Halt::Overflow) => match run::<BigInt>(problem, costs, deadline) {
            Ok(out) => Ok(out),
            Err(Halt::Stop(s)) => Err(s),
            Err(Halt::Overflow) => unreachable!("BigInt never overflows"),
        },
    }
}

fn convert<T: Ring>(v: &BigInt) -> Result<T, Halt> {
    T::from_big(v).ok_or(Halt::Overflow)
}

fn run<T: Ring>(problem: &Problem<'_>, costs: Option<&[BigInt]>, deadline: Option<Instant>) -> Result<Outcome, Halt> {
    let columns: Vec<Vec<(usize, T)>> = problem
        .columns
        .iter()
        .map(|c| c.iter().map(|(r, a)| Ok((*r, convert(a)?))).collect::<Result<_, Halt>>())
        .collect::<Result<_, Halt>>()?;
    let rhs: Vec<T> = problem.rhs.iter().map(convert).collect::<Result<_, _>>()?;
    let n = columns.len();
    let mut solver = Solver::new(problem.rows, n, rhs, deadline);

    let phase1 = |j: usize| if j >= n { T::one() } else { T::zero() };
    solver.iterate(&columns, &phase1)?;
    let infeasible = solver.basis.iter().zip(&solver.xbar).any(|(&col, x)| col >= n && x.is_positive());
    if infeasible {
        let duals = solver.duals(&phase1)?;
        return Ok(Outcome::Infeasible { duals: duals.iter().map(Ring::to_big).collect() });
    }
    solver.drive_out_artificials(&columns)?;

    let objective = match costs {
        None => None,
        Some(costs) => {
            let costs: Vec<T> = costs.iter().map(convert).collect::<Result<_, _>>()?;
            let cost = |j: usize| if j < n { costs[j].clone() } else { T::zero() };
            if !solver.iterate(&columns, &cost)? {
                return Ok(Outcome::Unbounded);
            }
            let mut num = T::zero();
            for (i, &col) in solver.basis.iter().enumerate() {
                if col < n {
                    num = num.add(&costs[col].mul(&solver.xbar[i])?)?;
                }
            }
            Some(num.to_big())
        }
    };
    let mut y = vec![<BigInt as Zero>::zero(); n];
    for (i, &col) in solver.basis.iter().enumerate() {
        if col < n {
            y[col] = solver.xbar[i].to_big();
        }
    }
    Ok(Outcome::Solved { y, det: solver.det.to_big(), objective })
}

struct Solver<T> {
    m: usize,
    n_structural: usize,
    /// Column index per row; `n_structural + i` is the artificial of row `i`.
    basis: Vec<usize>,
    inv: Vec<Vec<T>>,
    det: T,
    xbar: Vec<T>,
    deadline: Option<Instant>,
}

impl<T: Ring> Solver<T> {
    fn new(m: usize, n_structural: usize, rhs: Vec<T>, deadline: Option<Instant>) -> Self {
        let inv = (0..m).map(|i| (0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
        Solver { m, n_structural, basis: (0..m).map(|i| n_structural + i).collect(), inv, det: T::one(), xbar: rhs, deadline }
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n_structural
    }

    fn check_time(&self) -> Result<(), Halt> {
        match self.deadline {
            Some(t) if Instant::now() > t => Err(Halt::Stop(Stop::Timeout)),
            _ => Ok(()),
        }
    }

    fn dot(row: &[T], column: &[(usize, T)]) -> R<T> {
        column.iter().try_fold(T::zero(), |acc, (r, a)| acc.add(&row[*r].mul(a)?))
    }

    /// `M · A_col` (the column in the current basis, scaled by `det`).
    fn alpha(&self, columns: &[Vec<(usize, T)>], col: usize) -> R<Vec<T>> {
        if self.is_artificial(col) {
            let k = col - self.n_structural;
            return Ok(self.inv.iter().map(|row| row[k].clone()).collect());
        }
        self.inv.iter().map(|row| Self::dot(row, &columns[col])).collect()
    }

    /// `c_B · M`, i.e. the simplex multipliers scaled by `det`.
    fn duals(&self, cost: &dyn Fn(usize) -> T) -> R<Vec<T>> {
        let mut p = vec![T::zero(); self.m];
        for (i, &col) in self.basis.iter().enumerate() {
            let c = cost(col);
            if c.is_zero() {
                continue;
            }
            for (pj, mij) in p.iter_mut().zip(&self.inv[i]) {
                *pj = pj.add(&c.mul(mij)?)?;
            }
        }
        Ok(p)
    }

    fn entering(&self, columns: &[Vec<(usize, T)>], cost: &dyn Fn(usize) -> T, p: &[T]) -> R<Option<usize>> {
        for (j, column) in columns.iter().enumerate() {
            if cost(j).mul(&self.det)? < Self::dot(p, column)? {
                return Ok(Some(j));
            }
        }
        Ok(None)
    }

    fn leaving(&self, alpha: &[T]) -> R<Option<usize>> {
        let mut best: Option<usize> = None;
        for i in 0..self.m {
            if !alpha[i].is_positive() {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(k) => {
                    let lhs = self.xbar[i].mul(&alpha[k])?;
                    let rhs = self.xbar[k].mul(&alpha[i])?;
                    if lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[k]) {
                        Some(i)
                    } else {
                        Some(k)
                    }
                }
            };
        }
        Ok(best)
    }

    fn pivot(&mut self, row: usize, col: usize, alpha: &[T]) -> R<()> {
        let ap = alpha[row].clone();
        let pivot_row = self.inv[row].clone();
        let pivot_x = self.xbar[row].clone();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let ai = &alpha[i];
            if ai.is_zero() {
                for mij in self.inv[i].iter_mut() {
                    *mij = mij.mul(&ap)?.div(&self.det);
                }
                self.xbar[i] = self.xbar[i].mul(&ap)?.div(&self.det);
                continue;
            }
            for (mij, mpj) in self.inv[i].iter_mut().zip(&pivot_row) {
                *mij = mij.mul(&ap)?.sub(&ai.mul(mpj)?)?.div(&self.det);
            }
            self.xbar[i] = self.xbar[i].mul(&ap)?.sub(&ai.mul(&pivot_x)?)?.div(&self.det);
        }
        self.det = ap;
        if self.det.is_negative() {
            self.det = self.det.neg()?;
            for row in &mut self.inv {
                for v in row.iter_mut() {
                    *v = v.neg()?;
                }
            }
            for v in &mut self.xbar {
                *v = v.neg()?;
            }
        }
        self.basis[row] = col;
        Ok(())
    }

    /// `Ok(true)` at an optimum, `Ok(false)` when unbounded.
    fn iterate(&mut self, columns: &[Vec<(usize, T)>], cost: &dyn Fn(usize) -> T) -> Result<bool, Halt> {
        loop {
            self.check_time()?;
            let p = self.duals(cost)?;
            let Some(q) = self.entering(columns, cost, &p)? else {
                return Ok(true);
            };
            let alpha = self.alpha(columns, q)?;
            let Some(r) = self.leaving(&alpha)? else {
                return Ok(false);
            };
            self.pivot(r, q, &alpha)?;
        }
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn drive_out_artificials(&mut self, columns: &[Vec<(usize, T)>]) -> R<()> {
        for i in 0..self.m {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let mut candidate = None;
            for j in 0..self.n_structural {
                if !self.basis.contains(&j) && !Self::dot(&self.inv[i], &columns[j])?.is_zero() {
                    candidate = Some(j);
                    break;
                }
            }
            if let Some(j) = candidate {
                let alpha = self.alpha(columns, j)?;
                self.pivot(i, j, &alpha)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(entries: &[(usize, i64)]) -> Column {
        entries.iter().map(|&(r, a)| (r, BigInt::from(a))).collect()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn feasible_and_optimal() {
        // y0 + y1 = 2, y1 + y2 = 1; min y0 + 2 y1 + y2
        let columns = vec![col(&[(0, 1)]), col(&[(0, 1), (1, 1)]), col(&[(1, 1)])];
        let problem = Problem { rows: 2, columns: &columns, rhs: big(&[2, 1]) };
        let Outcome::Solved { det, objective: Some(num), .. } = solve(&problem, Some(&big(&[1, 2, 1])), None).unwrap()
        else {
            panic!("not solved")
        };
        assert_eq!(num, BigInt::from(3) * &det);
    }

    #[test]
    fn infeasible_gives_separating_duals() {
        // y0 = 1, y0 = 2
        let columns = vec![col(&[(0, 1), (1, 1)])];
        let rhs = big(&[1, 2]);
        let problem = Problem { rows: 2, columns: &columns, rhs: rhs.clone() };
        let Outcome::Infeasible { duals } = solve(&problem, None, None).unwrap() else { panic!("feasible") };
        let dot: BigInt = columns[0].iter().map(|(r, a)| &duals[*r] * a).sum();
        assert!(!Signed::is_positive(&dot));
        let value: BigInt = duals.iter().zip(&rhs).map(|(p, b)| p * b).sum();
        assert!(Signed::is_positive(&value));
    }

    #[test]
    fn unbounded_detected() {
        // y0 − y1 = 0; min −y0
        let columns = vec![col(&[(0, 1)]), col(&[(0, -1)])];
        let problem = Problem { rows: 1, columns: &columns, rhs: big(&[0]) };
        assert!(matches!(solve(&problem, Some(&big(&[-1, 0])), None).unwrap(), Outcome::Unbounded));
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        // y0 = 2^130 does not fit the small ring.
        let huge = BigInt::from(2).pow(130);
        let columns = vec![col(&[(0, 1)])];
        let problem = Problem { rows: 1, columns: &columns, rhs: vec![huge.clone()] };
        let Outcome::Solved { y, det, .. } = solve(&problem, None, None).unwrap() else { panic!() };
        assert_eq!(&y[0] / det, huge);
    }

    #[test]
    fn small_and_big_rings_agree() {
        let columns = vec![col(&[(0, 3), (1, -2)]), col(&[(0, 1), (1, 4)]), col(&[(1, 1)]), col(&[(0, 2), (1, 1)])];
        let problem = Problem { rows: 2, columns: &columns, rhs: big(&[7, 5]) };
        let costs = big(&[2, 3, -1, 1]);
        let a = run::<i128>(&problem, Some(&costs), None).unwrap();
        let b = run::<BigInt>(&problem, Some(&costs), None).unwrap();
        match (a, b) {
            (Outcome::Solved { y: ya, det: da, objective: oa }, Outcome::Solved { y: yb, det: db, objective: ob }) => {
                assert_eq!((ya, da, oa), (yb, db, ob));
            }
            _ => panic!("different outcomes"),
        }
    }
}
