//! k-uniformity and AME checks, and the shadow inequality
//! `s_T = Σ_S (−1)^{|S∩T|} Tr(ρ_S²) ≥ 0`, both on concrete states (floats)
//! and on symbolic purity patterns (exact rationals).
//!
//! The shadow sum runs over every `S ⊆ [N]`, including `∅` and the full
//! register, each with purity 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::par::{self, Exec};
use crate::qstate::{self, low_bits, PureState, QStateError, QubitSubset, MIXED_TOL};

#[derive(Debug, Error)]
pub enum UniformityError {
    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("incomplete purity pattern: {0}")]
    IncompletePattern(String),
    #[error("unknown purities span {0} complement pairs; one shared value cannot represent them")]
    AmbiguousUnknowns(usize),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// `Tr(ρ_X²)` for every qubit mask `X`; `∅` and the full register give 1.
pub fn purity_table(state: &PureState, exec: Exec) -> Result<Vec<f64>, QStateError> {
    let n = state.n_qubits();
    let full = low_bits(n);
    let reps: Vec<u32> = (1..full).filter(|&m| m.count_ones() * 2 <= n as u32).collect();
    let values = par::map_slice(exec, &reps, |&m| qstate::subset_purity(state, QubitSubset::from_mask(m)));
    let mut table = vec![f64::NAN; full as usize + 1];
    table[0] = 1.0;
    table[full as usize] = 1.0;
    for (&m, p) in reps.iter().zip(values) {
        let p = p?;
        table[m as usize] = p;
        table[(full & !m) as usize] = p;
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KUniformity {
    pub uniform: bool,
    /// First subset (ascending mask) of size `k` whose reduction is not
    /// maximally mixed, with its purity.
    pub witness: Option<(QubitSubset, f64)>,
}

fn first_non_mixed(state: &PureState, k: usize, tol: f64, exec: Exec) -> Result<Option<(QubitSubset, f64)>, QStateError> {
    let n = state.n_qubits();
    let subsets: Vec<u32> = (1..=low_bits(n)).filter(|m| m.count_ones() as usize == k).collect();
    let purities = par::map_slice(exec, &subsets, |&m| qstate::subset_purity(state, QubitSubset::from_mask(m)));
    let target = (0.5f64).powi(k as i32);
    for (&m, p) in subsets.iter().zip(purities) {
        let p = p?;
        if (p - target).abs() > tol {
            return Ok(Some((QubitSubset::from_mask(m), p)));
        }
    }
    Ok(None)
}

pub fn is_k_uniform(state: &PureState, k: usize) -> Result<KUniformity, UniformityError> {
    is_k_uniform_with(state, k, Exec::default())
}

/// Checks every `k`-subset only; smaller subsets follow by partial trace.
pub fn is_k_uniform_with(state: &PureState, k: usize, exec: Exec) -> Result<KUniformity, UniformityError> {
    is_k_uniform_tol(state, k, MIXED_TOL, exec)
}

/// Same check with a caller-chosen purity tolerance.
pub fn is_k_uniform_tol(state: &PureState, k: usize, tol: f64, exec: Exec) -> Result<KUniformity, UniformityError> {
    let max = state.n_qubits() / 2;
    if k == 0 || k > max {
        return Err(UniformityError::KOutOfRange { k, max });
    }
    let witness = first_non_mixed(state, k, tol, exec)?;
    Ok(KUniformity { uniform: witness.is_none(), witness })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniformityCertificate {
    pub k_max: usize,
    /// Failure at `k_max + 1`; absent when `k_max = ⌊N/2⌋`.
    pub witness: Option<(QubitSubset, f64)>,
}

pub fn max_uniformity(state: &PureState) -> Result<UniformityCertificate, UniformityError> {
    max_uniformity_with(state, Exec::default())
}

pub fn max_uniformity_with(state: &PureState, exec: Exec) -> Result<UniformityCertificate, UniformityError> {
    max_uniformity_tol(state, MIXED_TOL, exec)
}

pub fn max_uniformity_tol(state: &PureState, tol: f64, exec: Exec) -> Result<UniformityCertificate, UniformityError> {
    let max = state.n_qubits() / 2;
    for k in 1..=max {
        if let Some(w) = first_non_mixed(state, k, tol, exec)? {
            return Ok(UniformityCertificate { k_max: k - 1, witness: Some(w) });
        }
    }
    Ok(UniformityCertificate { k_max: max, witness: None })
}

pub fn is_ame(state: &PureState) -> Result<bool, UniformityError> {
    Ok(max_uniformity(state)?.witness.is_none())
}

/// In-place Walsh–Hadamard transform: `out[T] = Σ_S (−1)^{|S∩T|} in[S]`.
pub fn walsh_hadamard(values: &mut [f64]) {
    let len = values.len();
    assert!(len.is_power_of_two(), "length must be a power of two");
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (values[i], values[i + h]);
                values[i] = x + y;
                values[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// `s_T` for every `T`, indexed by qubit mask.
pub fn shadow_spectrum(state: &PureState) -> Result<Vec<f64>, UniformityError> {
    shadow_spectrum_with(state, Exec::default())
}

pub fn shadow_spectrum_with(state: &PureState, exec: Exec) -> Result<Vec<f64>, UniformityError> {
    let mut table = purity_table(state, exec)?;
    walsh_hadamard(&mut table);
    Ok(table)
}

pub fn shadow_sum(state: &PureState, t: QubitSubset) -> Result<f64, UniformityError> {
    let table = purity_table(state, Exec::default())?;
    Ok(shadow_sum_from_table(&table, t))
}

pub fn shadow_sum_from_table(table: &[f64], t: QubitSubset) -> f64 {
    table
        .iter()
        .enumerate()
        .map(|(s, p)| if (s as u32 & t.mask()).count_ones().is_multiple_of(2) { *p } else { -p })
        .sum()
}

/// `2^{-m}` as an exact rational.
pub fn dyadic(m: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << m)
}

/// Range of the shared unknown purity `x`: `lo < x` (or `lo ≤ x`), `x ≤ hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub lo_open: bool,
    pub hi: BigRational,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { "(" } else { "[" };
        write!(f, "{open}{}, {}]", self.lo, self.hi)
    }
}

/// Purities of every subset of size at most `⌊N/2⌋`, each either a fixed
/// rational or the shared unknown `x`. Larger subsets take the value of
/// their complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PurityPattern {
    n_qubits: usize,
    fixed: BTreeMap<u32, BigRational>,
    unknown: BTreeSet<u32>,
    interval: Interval,
}

impl PurityPattern {
    pub fn new(
        n_qubits: usize,
        fixed: BTreeMap<u32, BigRational>,
        unknown: BTreeSet<u32>,
        interval: Interval,
    ) -> Result<Self, UniformityError> {
        let full = low_bits(n_qubits);
        for m in 1..full {
            if m.count_ones() as usize * 2 > n_qubits {
                continue;
            }
            match (fixed.get(&m), unknown.contains(&m)) {
                (Some(_), true) => {
                    return Err(UniformityError::IncompletePattern(format!(
                        "{} is both fixed and unknown",
                        QubitSubset::from_mask(m)
                    )))
                }
                (None, false) => {
                    return Err(UniformityError::IncompletePattern(format!(
                        "{} has no purity",
                        QubitSubset::from_mask(m)
                    )))
                }
                _ => {}
            }
            let c = full & !m;
            if c.count_ones() == m.count_ones() && (fixed.get(&m) != fixed.get(&c) || unknown.contains(&m) != unknown.contains(&c)) {
                return Err(UniformityError::IncompletePattern(format!(
                    "{} and its complement differ",
                    QubitSubset::from_mask(m)
                )));
            }
        }
        if let Some(&m) = fixed.keys().chain(unknown.iter()).find(|&&m| m == 0 || m > full || m.count_ones() as usize * 2 > n_qubits) {
            return Err(UniformityError::IncompletePattern(format!("unexpected subset {}", QubitSubset::from_mask(m))));
        }
        Ok(PurityPattern { n_qubits, fixed, unknown, interval })
    }

    /// Every subset of size at most `⌊N/2⌋` maximally mixed, except the
    /// listed ones, which share the unknown.
    pub fn mixed_except(n_qubits: usize, unknown: &[u32], interval: Interval) -> Result<Self, UniformityError> {
        let unknown: BTreeSet<u32> = unknown.iter().copied().collect();
        let fixed = (1..low_bits(n_qubits))
            .filter(|m| m.count_ones() as usize * 2 <= n_qubits && !unknown.contains(m))
            .map(|m| (m, dyadic(m.count_ones() as usize)))
            .collect();
        Self::new(n_qubits, fixed, unknown, interval)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn fixed(&self) -> &BTreeMap<u32, BigRational> {
        &self.fixed
    }

    pub fn unknown(&self) -> &BTreeSet<u32> {
        &self.unknown
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    /// Number of distinct `{X, X^c}` pairs among the unknowns.
    pub fn unknown_pairs(&self) -> usize {
        let full = low_bits(self.n_qubits);
        self.unknown.iter().map(|&m| m.min(full & !m)).collect::<BTreeSet<_>>().len()
    }

    /// Fixed purity of `mask`, or `None` for the unknown.
    fn purity(&self, mask: u32) -> Option<BigRational> {
        let full = low_bits(self.n_qubits);
        if mask == 0 || mask == full {
            return Some(BigRational::one());
        }
        let key = if mask.count_ones() as usize * 2 <= self.n_qubits { mask } else { full & !mask };
        self.fixed.get(&key).cloned()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ShadowVerdict {
    Violated,
    Inconclusive,
}

/// `s_T = a·x + b` over the pattern's interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub a: BigRational,
    pub b: BigRational,
    pub verdict: ShadowVerdict,
}

impl AffineForm {
    pub fn eval(&self, x: &BigRational) -> BigRational {
        &self.a * x + &self.b
    }
}

/// Decides whether `a·x + b < 0` for every `x` in the interval.
pub fn affine_verdict(a: &BigRational, b: &BigRational, interval: &Interval) -> ShadowVerdict {
    let (sup, attained) = if a.is_positive() {
        (a * &interval.hi + b, true)
    } else if a.is_negative() {
        (a * &interval.lo + b, !interval.lo_open)
    } else {
        (b.clone(), true)
    };
    if sup.is_negative() || (sup.is_zero() && !attained) {
        ShadowVerdict::Violated
    } else {
        ShadowVerdict::Inconclusive
    }
}

pub fn shadow_obstruction(pattern: &PurityPattern, t: QubitSubset) -> Result<AffineForm, UniformityError> {
    let pairs = pattern.unknown_pairs();
    if pairs > 1 {
        return Err(UniformityError::AmbiguousUnknowns(pairs));
    }
    let full = low_bits(pattern.n_qubits);
    if t.mask() & !full != 0 {
        return Err(UniformityError::IncompletePattern(format!("T = {t} is outside the register")));
    }
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    for s in 0..=full {
        let negative = (s & t.mask()).count_ones() % 2 == 1;
        match pattern.purity(s) {
            Some(p) if negative => b -= p,
            Some(p) => b += p,
            None if negative => a -= BigRational::one(),
            None => a += BigRational::one(),
        }
    }
    let verdict = affine_verdict(&a, &b, &pattern.interval);
    Ok(AffineForm { a, b, verdict })
}

/// First `T` (ascending mask) on which the pattern violates the shadow
/// inequality.
pub fn find_shadow_violation(pattern: &PurityPattern) -> Result<Option<(QubitSubset, AffineForm)>, UniformityError> {
    for t in 0..=low_bits(pattern.n_qubits) {
        let form = shadow_obstruction(pattern, QubitSubset::from_mask(t))?;
        if form.verdict == ShadowVerdict::Violated {
            return Ok(Some((QubitSubset::from_mask(t), form)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook;
    use crate::qssverify::build_qss_state;
    use num_complex::Complex64;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ame6() -> PureState {
        build_qss_state(&codebook::five_qubit_encoding()).unwrap()
    }

    fn steane() -> PureState {
        build_qss_state(&codebook::steane_encoding()).unwrap()
    }

    fn ghz(n: usize) -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(h, 0.0);
        amps[(1 << n) - 1] = Complex64::new(h, 0.0);
        PureState::new(n, amps).unwrap()
    }

    fn exceptional_pair_pattern() -> PurityPattern {
        let interval = Interval { lo: q(1, 8), lo_open: true, hi: q(1, 1) };
        PurityPattern::mixed_except(6, &[0b000111, 0b111000], interval).unwrap()
    }

    #[test]
    fn steane_state_is_three_uniform_only() {
        let s = steane();
        assert!(is_k_uniform(&s, 3).unwrap().uniform);
        let four = is_k_uniform(&s, 4).unwrap();
        assert!(!four.uniform);
        let (subset, p) = four.witness.unwrap();
        assert_eq!(subset.len(), 4);
        assert!(p > 1.0 / 16.0 + 1e-9);
        let cert = max_uniformity(&s).unwrap();
        assert_eq!(cert.k_max, 3);
        assert!(!is_ame(&s).unwrap());
    }

    #[test]
    fn ame_and_trivial_cases() {
        assert_eq!(max_uniformity(&ame6()).unwrap().k_max, 3);
        assert!(is_ame(&ame6()).unwrap());
        assert!(is_ame(&ghz(2)).unwrap());
        assert_eq!(max_uniformity(&PureState::basis(4, 0).unwrap()).unwrap().k_max, 0);
        let g = is_k_uniform(&ghz(4), 2).unwrap();
        assert!(!g.uniform);
        let (w, p) = g.witness.unwrap();
        assert_eq!(w.indices(), vec![0, 1]);
        assert!((p - 0.5).abs() < 1e-12);
        assert!(matches!(is_k_uniform(&ghz(4), 3), Err(UniformityError::KOutOfRange { .. })));
    }

    #[test]
    fn shadow_trivial_values() {
        let zero = PureState::basis(1, 0).unwrap();
        assert!(shadow_sum(&zero, QubitSubset::from_mask(1)).unwrap().abs() < 1e-15);
        assert!((shadow_sum(&ghz(2), QubitSubset::EMPTY).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_matches_direct_sum() {
        let s = ame6();
        let table = purity_table(&s, Exec::Sequential).unwrap();
        let spectrum = shadow_spectrum(&s).unwrap();
        for t in 0..64u32 {
            let direct = shadow_sum_from_table(&table, QubitSubset::from_mask(t));
            assert!((spectrum[t as usize] - direct).abs() < 1e-12);
            assert!(direct >= -1e-7);
        }
    }

    #[test]
    fn exceptional_pair_gives_minus_two_x_plus_quarter() {
        let form = shadow_obstruction(&exceptional_pair_pattern(), QubitSubset::from_indices([0, 1, 2, 3])).unwrap();
        assert_eq!(form.a, q(-2, 1));
        assert_eq!(form.b, q(1, 4));
        assert_eq!(form.verdict, ShadowVerdict::Violated);
        assert_eq!(form.eval(&q(1, 8)), q(0, 1));
    }

    #[test]
    fn boundary_and_ame_patterns_are_inconclusive() {
        let closed = Interval { lo: q(1, 8), lo_open: false, hi: q(1, 1) };
        let boundary = PurityPattern::mixed_except(6, &[0b000111, 0b111000], closed).unwrap();
        let form = shadow_obstruction(&boundary, QubitSubset::from_indices([0, 1, 2, 3])).unwrap();
        assert_eq!(form.verdict, ShadowVerdict::Inconclusive);

        let interval = Interval { lo: q(1, 8), lo_open: false, hi: q(1, 8) };
        let ame = PurityPattern::mixed_except(6, &[], interval).unwrap();
        let form = shadow_obstruction(&ame, QubitSubset::from_indices([0, 1, 2, 3])).unwrap();
        assert!(form.a.is_zero());
        assert!(!form.b.is_negative());
        assert_eq!(form.verdict, ShadowVerdict::Inconclusive);
        assert!(find_shadow_violation(&ame).unwrap().is_none());
    }

    #[test]
    fn pattern_validation() {
        let interval = Interval { lo: q(1, 8), lo_open: true, hi: q(1, 1) };
        assert!(matches!(
            PurityPattern::mixed_except(6, &[0b000111], interval.clone()),
            Err(UniformityError::IncompletePattern(_))
        ));
        let two_pairs = PurityPattern::mixed_except(6, &[0b000111, 0b111000, 0b001011, 0b110100], interval).unwrap();
        assert_eq!(two_pairs.unknown_pairs(), 2);
        assert!(matches!(
            shadow_obstruction(&two_pairs, QubitSubset::EMPTY),
            Err(UniformityError::AmbiguousUnknowns(2))
        ));
    }

    #[test]
    fn walsh_hadamard_small() {
        let mut v = [1.0, 2.0, 3.0, 4.0];
        walsh_hadamard(&mut v);
        assert_eq!(v, [10.0, -2.0, -4.0, 0.0]);
    }
}
