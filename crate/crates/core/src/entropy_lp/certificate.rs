//! Independent re-verification of solver output. Nothing here calls into
//! the simplex; the checks are plain exact substitutions.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{EntropyLP, Relation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("row {row}: multiplier {value} has the wrong sign for its relation")]
    Sign { row: usize, value: String },
    #[error("combination leaves coefficient {value} on variable {var}")]
    Residual { var: usize, value: String },
    #[error("combined right-hand side {0} is not negative")]
    NoContradiction(String),
    #[error("sample violates row {row}: lhs {lhs}, rhs {rhs}")]
    Violated { row: usize, lhs: String, rhs: String },
}

/// Accepts `λ` when `λ_i ≥ 0` on `≤` rows, `λ_i ≤ 0` on `≥` rows,
/// `Σ λ_i a_i = 0` and `Σ λ_i b_i < 0`: summing `λ_i (a_i·x − b_i)` then
/// gives `0 < 0` on any feasible `x`.
pub fn check_farkas(lp: &EntropyLP, multipliers: &[BigRational]) -> Result<(), CertificateError> {
    let rows = lp.constraints();
    if multipliers.len() != rows.len() {
        return Err(CertificateError::Length { expected: rows.len(), got: multipliers.len() });
    }
    let mut combined = vec![BigRational::zero(); lp.n_vars()];
    let mut rhs = BigRational::zero();
    for (row, (c, lambda)) in rows.iter().zip(multipliers).enumerate() {
        if lambda.is_zero() {
            continue;
        }
        let wrong_sign = match c.relation {
            Relation::Le => lambda.is_negative(),
            Relation::Ge => lambda.is_positive(),
            Relation::Eq => false,
        };
        if wrong_sign {
            return Err(CertificateError::Sign { row, value: lambda.to_string() });
        }
        for (v, a) in &c.coeffs {
            combined[*v] += lambda * a;
        }
        rhs += lambda * &c.rhs;
    }
    if let Some((var, value)) = combined.iter().enumerate().find(|(_, v)| !v.is_zero()) {
        return Err(CertificateError::Residual { var, value: value.to_string() });
    }
    if !rhs.is_negative() {
        return Err(CertificateError::NoContradiction(rhs.to_string()));
    }
    Ok(())
}

/// Substitutes `x` into every row.
pub fn check_sample(lp: &EntropyLP, x: &[BigRational]) -> Result<(), CertificateError> {
    if x.len() != lp.n_vars() {
        return Err(CertificateError::Length { expected: lp.n_vars(), got: x.len() });
    }
    for (row, c) in lp.constraints().iter().enumerate() {
        let lhs = c.coeffs.iter().fold(BigRational::zero(), |acc, (v, a)| acc + a * &x[*v]);
        let ok = match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Ge => lhs >= c.rhs,
            Relation::Eq => lhs == c.rhs,
        };
        if !ok {
            return Err(CertificateError::Violated { row, lhs: lhs.to_string(), rhs: c.rhs.to_string() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy_lp::{Constraint, Tag};
    use std::collections::BTreeMap;

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn pair_lp() -> EntropyLP {
        let mut f = BTreeMap::new();
        f.insert(0, int(1));
        EntropyLP::from_constraints(
            1,
            vec![
                Constraint::new(f.clone(), Relation::Le, int(0), Tag::User),
                Constraint::new(f, Relation::Ge, int(1), Tag::User),
            ],
        )
        .unwrap()
    }

    #[test]
    fn accepts_valid_and_rejects_tampered() {
        let lp = pair_lp();
        assert_eq!(check_farkas(&lp, &[int(1), int(-1)]), Ok(()));
        assert!(matches!(check_farkas(&lp, &[int(1), int(1)]), Err(CertificateError::Sign { .. })));
        assert!(matches!(check_farkas(&lp, &[int(2), int(-1)]), Err(CertificateError::Residual { .. })));
        assert!(matches!(check_farkas(&lp, &[int(0), int(0)]), Err(CertificateError::NoContradiction(_))));
        assert!(matches!(check_farkas(&lp, &[int(1)]), Err(CertificateError::Length { .. })));
    }

    #[test]
    fn sample_substitution() {
        let lp = pair_lp();
        assert!(matches!(check_sample(&lp, &[int(0)]), Err(CertificateError::Violated { row: 1, .. })));
    }
}
