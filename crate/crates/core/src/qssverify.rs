//! QSS states built from encoding pairs, and the mutual-information test
//! that decides which player sets are authorized.
//!
//! A share set `A` is authorized when `I(R:A) = 2` bits and unauthorized when
//! `I(R:A) = 0`. Values in neither band mean the state is not a QSS state for
//! any access structure; they are reported, never rounded.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{all_players, AccessError, AccessStructure, PlayerSet};
use crate::par::{self, Exec};
use crate::qstate::{self, PureState, QStateError, QubitSubset, STATE_TOL};

/// Default band half-width for mutual-information classification (bits).
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("images are not orthogonal (|<0|1>| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },
    #[error("images act on {image0} and {image1} qubits")]
    ImageSizeMismatch { image0: usize, image1: usize },
    #[error("state has {state_qubits} qubits but the structure needs {expected}")]
    SizeMismatch { state_qubits: usize, expected: usize },
    #[error("access structure is not combinatorially valid")]
    InvalidStructure,
    #[error("not a QSS state: I(R:{subset}) = {value} bits{detail}")]
    NotAQSSState { subset: PlayerSet, value: f64, detail: String },
    #[error(transparent)]
    State(#[from] QStateError),
    #[error(transparent)]
    Access(#[from] AccessError),
}

/// Images of `|0⟩` and `|1⟩` under a pure share map.
#[derive(Clone, Debug)]
pub struct EncodingPair {
    n_players: usize,
    image0: PureState,
    image1: PureState,
}

impl EncodingPair {
    pub fn new(image0: PureState, image1: PureState) -> Result<Self, VerifyError> {
        if image0.n_qubits() != image1.n_qubits() {
            return Err(VerifyError::ImageSizeMismatch { image0: image0.n_qubits(), image1: image1.n_qubits() });
        }
        let overlap = image0.inner(&image1).norm();
        if overlap > STATE_TOL {
            return Err(VerifyError::NotOrthogonal { overlap });
        }
        Ok(EncodingPair { n_players: image0.n_qubits(), image0, image1 })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn image0(&self) -> &PureState {
        &self.image0
    }

    pub fn image1(&self) -> &PureState {
        &self.image1
    }
}

/// `(|0⟩⊗Λ(|0⟩) + |1⟩⊗Λ(|1⟩)) / √2`, reference qubit first.
pub fn build_qss_state(enc: &EncodingPair) -> Result<PureState, VerifyError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps: Vec<Complex64> = enc
        .image0
        .amplitudes()
        .iter()
        .chain(enc.image1.amplitudes())
        .map(|a| a * h)
        .collect();
    Ok(PureState::new(enc.n_players + 1, amps)?)
}

/// Von Neumann entropy of every subset of a pure state, indexed by qubit
/// mask. `∅` and the full register hold 0.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyProfile {
    n_qubits: usize,
    values: Vec<f64>,
}

impl EntropyProfile {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, subset: QubitSubset) -> f64 {
        self.values[subset.mask() as usize]
    }

    /// `(subset, S)` for every nonempty proper subset, ascending by mask.
    pub fn iter(&self) -> impl Iterator<Item = (QubitSubset, f64)> + '_ {
        let last = self.values.len() - 1;
        (1..last).map(move |m| (QubitSubset::from_mask(m as u32), self.values[m]))
    }

    /// `I(A:B)` from the table (disjoint `A`, `B`).
    pub fn mutual_information(&self, a: QubitSubset, b: QubitSubset) -> f64 {
        self.get(a) + self.get(b) - self.get(a.union(b))
    }
}

pub fn entropy_profile(state: &PureState) -> Result<EntropyProfile, VerifyError> {
    entropy_profile_with(state, Exec::default())
}

/// Only the smaller side of every cut is diagonalized; its complement
/// shares the value.
pub fn entropy_profile_with(state: &PureState, exec: Exec) -> Result<EntropyProfile, VerifyError> {
    let n = state.n_qubits();
    let full = QubitSubset::full(n).mask();
    let reps: Vec<u32> = (1..full)
        .filter(|&m| {
            let c = full & !m;
            m.count_ones() < c.count_ones() || (m.count_ones() == c.count_ones() && m < c)
        })
        .collect();
    let computed = par::map_slice(exec, &reps, |&m| {
        qstate::reduced_density(state, QubitSubset::from_mask(m)).and_then(|rho| qstate::von_neumann_entropy(&rho))
    });
    let mut values = vec![0.0; full as usize + 1];
    for (&m, s) in reps.iter().zip(computed) {
        let s = s?;
        values[m as usize] = s;
        values[(full & !m) as usize] = s;
    }
    Ok(EntropyProfile { n_qubits: n, values })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Authorized,
    Unauthorized,
}

impl Expectation {
    pub fn target_bits(self) -> f64 {
        match self {
            Expectation::Authorized => 2.0,
            Expectation::Unauthorized => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    /// 1-indexed players.
    pub subset: Vec<usize>,
    pub mutual_information_bits: f64,
    pub expected: Expectation,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<SubsetRecord>,
    pub pass: bool,
    pub max_deviation: f64,
}

impl VerificationReport {
    /// First failing record, if any.
    pub fn first_failure(&self) -> Option<&SubsetRecord> {
        self.records.iter().find(|r| !r.pass)
    }
}

pub fn verify_scheme(state: &PureState, a: &AccessStructure, tol: f64) -> Result<VerificationReport, VerifyError> {
    verify_scheme_with(state, a, tol, Exec::default())
}

/// Checks `I(R:A)` against the structure on all `2^n − 1` nonempty share
/// sets; records are ascending by mask.
pub fn verify_scheme_with(
    state: &PureState,
    a: &AccessStructure,
    tol: f64,
    exec: Exec,
) -> Result<VerificationReport, VerifyError> {
    let n = a.n_players();
    if state.n_qubits() != n + 1 {
        return Err(VerifyError::SizeMismatch { state_qubits: state.n_qubits(), expected: n + 1 });
    }
    if !a.is_combinatorially_valid() {
        return Err(VerifyError::InvalidStructure);
    }
    let profile = entropy_profile_with(state, exec)?;
    let reference = QubitSubset::from_mask(1);
    let mut records = Vec::with_capacity((1 << n) - 1);
    let mut max_deviation = 0.0f64;
    for mask in (2..=all_players(n)).step_by(2) {
        let info = profile.mutual_information(reference, QubitSubset::from_mask(mask));
        let expected = if a.is_authorized(mask) { Expectation::Authorized } else { Expectation::Unauthorized };
        let deviation = (info - expected.target_bits()).abs();
        max_deviation = max_deviation.max(deviation);
        records.push(SubsetRecord {
            subset: PlayerSet(mask).players(),
            mutual_information_bits: info,
            expected,
            pass: deviation < tol,
        });
    }
    let pass = records.iter().all(|r| r.pass);
    Ok(VerificationReport { records, pass, max_deviation })
}

/// Reads the access structure off a QSS state of `n + 1` qubits.
pub fn derive_access(state: &PureState, tol: f64) -> Result<AccessStructure, VerifyError> {
    derive_access_with(state, tol, Exec::default())
}

pub fn derive_access_with(state: &PureState, tol: f64, exec: Exec) -> Result<AccessStructure, VerifyError> {
    let n = state.n_qubits().checked_sub(1).filter(|&n| n >= 1).ok_or(VerifyError::SizeMismatch {
        state_qubits: state.n_qubits(),
        expected: 2,
    })?;
    let profile = entropy_profile_with(state, exec)?;
    let reference = QubitSubset::from_mask(1);
    let all = all_players(n);
    let info_of = |mask: u32| profile.mutual_information(reference, QubitSubset::from_mask(mask));
    let mut authorized = vec![false; all as usize + 1];
    for mask in (2..=all).step_by(2) {
        let info = info_of(mask);
        authorized[mask as usize] = if (info - 2.0).abs() < tol {
            true
        } else if info.abs() < tol {
            false
        } else {
            return Err(VerifyError::NotAQSSState { subset: PlayerSet(mask), value: info, detail: String::new() });
        };
    }
    // The empty set is unauthorized, so [n] must be authorized.
    for mask in (0..=all).step_by(2) {
        let comp = all & !mask;
        if authorized[mask as usize] == authorized[comp as usize] {
            let witness = if mask == 0 { comp } else { mask };
            return Err(VerifyError::NotAQSSState {
                subset: PlayerSet(witness),
                value: info_of(witness),
                detail: " (violates no-cloning)".into(),
            });
        }
        if authorized[mask as usize] {
            for p in 1..=n {
                let sup = mask | 1 << p;
                if !authorized[sup as usize] {
                    return Err(VerifyError::NotAQSSState {
                        subset: PlayerSet(sup),
                        value: info_of(sup),
                        detail: " (violates monotonicity)".into(),
                    });
                }
            }
        }
    }
    let minimal: Vec<u32> = (2..=all)
        .step_by(2)
        .filter(|&m| authorized[m as usize] && (1..=n).all(|p| m >> p & 1 == 0 || !authorized[(m & !(1 << p)) as usize]))
        .collect();
    let structure = AccessStructure::new(n, minimal)?;
    if !structure.satisfies_no_redundancy() {
        let covered = structure.minimal_sets().iter().fold(0, |acc, &m| acc | m);
        let player = (1..=n).find(|&p| covered >> p & 1 == 0).expect("uncovered player");
        return Err(VerifyError::NotAQSSState {
            subset: PlayerSet(1 << player),
            value: info_of(1 << player),
            detail: format!(" (player {player} is in no minimal authorized set)"),
        });
    }
    Ok(structure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn ghz_from_repetition_images() {
        let enc = EncodingPair::new(PureState::basis(3, 0).unwrap(), PureState::basis(3, 7).unwrap()).unwrap();
        let ghz = build_qss_state(&enc).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(ghz.n_qubits(), 4);
        assert!((ghz.amplitudes()[0] - c(h)).norm() < 1e-15);
        assert!((ghz.amplitudes()[15] - c(h)).norm() < 1e-15);
    }

    #[test]
    fn non_orthogonal_images_rejected() {
        let zero = PureState::basis(2, 0).unwrap();
        assert!(matches!(EncodingPair::new(zero.clone(), zero), Err(VerifyError::NotOrthogonal { .. })));
    }

    #[test]
    fn product_state_is_not_a_qss_state() {
        let s = PureState::basis(4, 0).unwrap();
        match derive_access(&s, DEFAULT_TOL) {
            Err(VerifyError::NotAQSSState { subset, value, .. }) => {
                assert_eq!(subset.players(), vec![1, 2, 3]);
                assert!(value.abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn steane_fails_against_threshold_four() {
        let state = build_qss_state(&codebook::steane_encoding()).unwrap();
        let wrong = AccessStructure::threshold(7, 4).unwrap();
        let report = verify_scheme(&state, &wrong, DEFAULT_TOL).unwrap();
        assert!(!report.pass);
        let first = report.first_failure().unwrap();
        assert_eq!(first.subset, vec![1, 2, 3]);
        assert!((first.mutual_information_bits - 2.0).abs() < 1e-9);
    }

    #[test]
    fn size_mismatch_and_invalid_structure() {
        let state = build_qss_state(&codebook::five_qubit_encoding()).unwrap();
        let fano = codebook::fano_structure();
        assert!(matches!(verify_scheme(&state, &fano, DEFAULT_TOL), Err(VerifyError::SizeMismatch { .. })));
        let bad = AccessStructure::threshold(5, 2).unwrap();
        assert!(matches!(verify_scheme(&state, &bad, DEFAULT_TOL), Err(VerifyError::InvalidStructure)));
    }

    #[test]
    fn profile_matches_direct_entropy() {
        let state = build_qss_state(&codebook::five_qubit_encoding()).unwrap();
        let profile = entropy_profile_with(&state, Exec::Sequential).unwrap();
        for (subset, s) in profile.iter() {
            let direct = qstate::subset_entropy(&state, subset).unwrap();
            assert!((s - direct).abs() < 1e-9, "{subset}");
        }
        assert_eq!(profile, entropy_profile_with(&state, Exec::Parallel).unwrap());
    }
}
