//! Dense pure states and density matrices of a few qubits: partial traces,
//! Hermitian spectra, von Neumann entropy (in bits), purity and mutual
//! information.
//!
//! Basis labels are big-endian: qubit 0 is the most significant bit of the
//! amplitude index. In QSS states qubit 0 is the reference system `r` and
//! qubit `i` holds the share of player `i`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported register.
pub const MAX_QUBITS: usize = 12;
/// Tolerance on normalization, Hermiticity and trace.
pub const STATE_TOL: f64 = 1e-9;
/// Purity tolerance used to decide maximal mixedness everywhere in the crate.
pub const MIXED_TOL: f64 = 1e-9;
/// Eigenvalues below this contribute nothing to the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum QStateError {
    #[error("{n} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    CapacityExceeded { n: usize },
    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("subset is empty")]
    EmptySubset,
    #[error("subset covers the whole system")]
    FullSubset,
    #[error("subset {mask:#b} refers to qubits outside a {n}-qubit system")]
    SubsetOutOfRange { mask: u32, n: usize },
    #[error("subsets overlap")]
    OverlappingSubsets,
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("trace {trace} differs from 1")]
    BadTrace { trace: f64 },
    #[error("matrix has negative eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },
    #[error("dimension {0} is not a power of two")]
    BadDimension(usize),
    #[error("invalid basis label {0:?}")]
    BadBasis(String),
    #[error("basis label {0:?} listed twice")]
    DuplicateBasis(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A set of qubit indices, stored as a bitmask (bit `i` = qubit `i`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitSubset(u32);

impl QubitSubset {
    pub const EMPTY: QubitSubset = QubitSubset(0);

    pub fn from_mask(mask: u32) -> Self {
        QubitSubset(mask)
    }

    /// Panics if an index is 32 or larger.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut mask = 0u32;
        for i in indices {
            assert!(i < 32, "qubit index {i} out of range");
            mask |= 1 << i;
        }
        QubitSubset(mask)
    }

    /// All qubits of an `n`-qubit register.
    pub fn full(n: usize) -> Self {
        QubitSubset(low_bits(n))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, qubit: usize) -> bool {
        qubit < 32 && self.0 >> qubit & 1 == 1
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|&i| self.contains(i)).collect()
    }

    pub fn union(self, other: Self) -> Self {
        QubitSubset(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        QubitSubset(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        QubitSubset(!self.0 & low_bits(n))
    }

    pub fn fits(self, n: usize) -> bool {
        self.0 & !low_bits(n) == 0
    }
}

impl fmt::Display for QubitSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn low_bits(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Normalized amplitude vector of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self, QStateError> {
        check_capacity(n_qubits)?;
        let expected = 1usize << n_qubits;
        if amplitudes.len() != expected {
            return Err(QStateError::LengthMismatch { expected, got: amplitudes.len() });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > STATE_TOL {
            return Err(QStateError::NotNormalized { norm_sqr });
        }
        Ok(PureState { n_qubits, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm first.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self, QStateError> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QStateError::NotNormalized { norm_sqr: 0.0 });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        PureState::new(n_qubits, amplitudes)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QStateError> {
        check_capacity(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        PureState::new(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of the basis state written as a bit string (qubit 0 first).
    pub fn amplitude_of(&self, bits: &str) -> Result<Complex64, QStateError> {
        Ok(self.amplitudes[parse_basis(bits, self.n_qubits)?])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Equality up to a global phase: `|⟨self|other⟩| ≥ 1 − tol`.
    pub fn equals_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.n_qubits == other.n_qubits && self.inner(other).norm() >= 1.0 - tol
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState, QStateError> {
        let n = self.n_qubits + other.n_qubits;
        check_capacity(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(PureState { n_qubits: n, amplitudes: amps })
    }

    /// Relabels qubits: old qubit `q` becomes qubit `perm[q]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> PureState {
        let n = self.n_qubits;
        assert_eq!(perm.len(), n, "permutation length");
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let mut j = 0usize;
            for (q, &p) in perm.iter().enumerate() {
                let bit = i >> (n - 1 - q) & 1;
                j |= bit << (n - 1 - p);
            }
            amps[j] = *a;
        }
        PureState { n_qubits: n, amplitudes: amps }
    }

    pub fn from_json(text: &str) -> Result<PureState, QStateError> {
        let file: StateFile = serde_json::from_str(text)?;
        file.into_state()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateFile::from_state(self)).expect("state serializes")
    }
}

fn check_capacity(n: usize) -> Result<(), QStateError> {
    if n > MAX_QUBITS {
        Err(QStateError::CapacityExceeded { n })
    } else {
        Ok(())
    }
}

/// Index of a big-endian bit string such as `"0110"`.
pub fn parse_basis(bits: &str, n_qubits: usize) -> Result<usize, QStateError> {
    if bits.len() != n_qubits || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(QStateError::BadBasis(bits.to_string()));
    }
    Ok(bits.bytes().fold(0usize, |acc, b| acc << 1 | usize::from(b == b'1')))
}

pub fn basis_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|q| if index >> (n_qubits - 1 - q) & 1 == 1 { '1' } else { '0' }).collect()
}

/// On-disk JSON form of a pure state. Omitted basis labels have amplitude 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub n_qubits: usize,
    pub amplitudes: Vec<AmplitudeEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub basis: String,
    pub re: f64,
    pub im: f64,
}

impl StateFile {
    pub fn from_state(state: &PureState) -> StateFile {
        let amplitudes = state
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| AmplitudeEntry { basis: basis_label(i, state.n_qubits), re: a.re, im: a.im })
            .collect();
        StateFile { n_qubits: state.n_qubits, amplitudes }
    }

    pub fn into_state(self) -> Result<PureState, QStateError> {
        check_capacity(self.n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        let mut seen = BTreeMap::new();
        for entry in self.amplitudes {
            let idx = parse_basis(&entry.basis, self.n_qubits)?;
            if seen.insert(idx, ()).is_some() {
                return Err(QStateError::DuplicateBasis(entry.basis));
            }
            amps[idx] = Complex64::new(entry.re, entry.im);
        }
        PureState::new(self.n_qubits, amps)
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, QStateError> {
        if !dim.is_power_of_two() {
            return Err(QStateError::BadDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(QStateError::LengthMismatch { expected: dim * dim, got: entries.len() });
        }
        let dm = DensityMatrix { dim, entries };
        let trace = dm.trace();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(QStateError::BadTrace { trace });
        }
        let spectrum = hermitian_eigenvalues(dim, &dm.entries)?;
        if let Some(&low) = spectrum.last() {
            if low < -STATE_TOL {
                return Err(QStateError::NotPositive { eigenvalue: low });
            }
        }
        Ok(dm)
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> DensityMatrix {
        let dim = 1usize << n_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    /// Largest entrywise distance to `I / dim`.
    pub fn distance_to_maximally_mixed(&self) -> f64 {
        let target = 1.0 / self.dim as f64;
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let want = if r == c { target } else { 0.0 };
                worst = worst.max((self.entry(r, c) - want).norm());
            }
        }
        worst
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_of(state: &PureState) -> DensityMatrix {
    let dim = state.dim();
    let amps = state.amplitudes();
    let mut entries = Vec::with_capacity(dim * dim);
    for a in amps {
        for b in amps {
            entries.push(a * b.conj());
        }
    }
    DensityMatrix { dim, entries }
}

fn check_subset(state: &PureState, keep: QubitSubset) -> Result<(), QStateError> {
    let n = state.n_qubits();
    if !keep.fits(n) {
        return Err(QStateError::SubsetOutOfRange { mask: keep.mask(), n });
    }
    if keep.is_empty() {
        return Err(QStateError::EmptySubset);
    }
    if keep == QubitSubset::full(n) {
        return Err(QStateError::FullSubset);
    }
    Ok(())
}

/// Splits every basis index into (kept index, traced index); both registers
/// keep ascending qubit order.
fn split_indices(n: usize, keep: QubitSubset) -> (Vec<usize>, Vec<usize>) {
    let dim = 1usize << n;
    let mut kept = vec![0usize; dim];
    let mut traced = vec![0usize; dim];
    for i in 0..dim {
        let (mut a, mut b) = (0usize, 0usize);
        for q in 0..n {
            let bit = i >> (n - 1 - q) & 1;
            if keep.contains(q) {
                a = a << 1 | bit;
            } else {
                b = b << 1 | bit;
            }
        }
        kept[i] = a;
        traced[i] = b;
    }
    (kept, traced)
}

/// `ρ_keep = Tr_{keep^c} |ψ⟩⟨ψ|`.
pub fn reduced_density(state: &PureState, keep: QubitSubset) -> Result<DensityMatrix, QStateError> {
    check_subset(state, keep)?;
    let n = state.n_qubits();
    let dim_a = 1usize << keep.len();
    let dim_b = 1usize << (n - keep.len());
    let (kept, traced) = split_indices(n, keep);
    let mut m = vec![Complex64::new(0.0, 0.0); dim_a * dim_b];
    for (i, amp) in state.amplitudes().iter().enumerate() {
        m[kept[i] * dim_b + traced[i]] = *amp;
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim_a * dim_a];
    for r in 0..dim_a {
        let row_r = &m[r * dim_b..(r + 1) * dim_b];
        for c in r..dim_a {
            let row_c = &m[c * dim_b..(c + 1) * dim_b];
            let v: Complex64 = row_r.iter().zip(row_c).map(|(x, y)| x * y.conj()).sum();
            entries[r * dim_a + c] = v;
            entries[c * dim_a + r] = v.conj();
        }
    }
    Ok(DensityMatrix { dim: dim_a, entries })
}

/// Spectrum of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted descending. Values are not clamped.
pub fn hermitian_eigenvalues(dim: usize, entries: &[Complex64]) -> Result<Vec<f64>, QStateError> {
    let mut deviation = 0.0f64;
    for r in 0..dim {
        for c in r..dim {
            deviation = deviation.max((entries[r * dim + c] - entries[c * dim + r].conj()).norm());
        }
    }
    if deviation > STATE_TOL {
        return Err(QStateError::NotHermitian { deviation });
    }
    let mut a = entries.to_vec();
    for i in 0..dim {
        a[i * dim + i].im = 0.0;
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..dim)
            .flat_map(|r| (0..dim).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * dim + c].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                jacobi_rotate(&mut a, dim, p, q);
            }
        }
    }
    let mut eig: Vec<f64> = (0..dim).map(|i| a[i * dim + i].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Zeroes `a[p][q]` with the unitary `V = diag(1, w̄) · R(c, s)` on the
/// (p, q) plane, where `a[p][q] = r·w`, `|w| = 1`.
fn jacobi_rotate(a: &mut [Complex64], dim: usize, p: usize, q: usize) {
    let apq = a[p * dim + q];
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let w = apq / r;
    let app = a[p * dim + p].re;
    let aqq = a[q * dim + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let wc = w.conj();
    // A <- A V
    for k in 0..dim {
        let akp = a[k * dim + p];
        let akq = a[k * dim + q];
        a[k * dim + p] = akp * c - akq * wc * s;
        a[k * dim + q] = akp * s + akq * wc * c;
    }
    // A <- V† A
    for k in 0..dim {
        let apk = a[p * dim + k];
        let aqk = a[q * dim + k];
        a[p * dim + k] = apk * c - aqk * w * s;
        a[q * dim + k] = apk * s + aqk * w * c;
    }
    a[p * dim + q] = Complex64::new(0.0, 0.0);
    a[q * dim + p] = Complex64::new(0.0, 0.0);
    a[p * dim + p].im = 0.0;
    a[q * dim + q].im = 0.0;
}

/// Eigenvalues of a density matrix, descending, with values within `1e-9`
/// of `[0, 1]` clamped into it.
pub fn eigenvalues_hermitian(dm: &DensityMatrix) -> Result<Vec<f64>, QStateError> {
    let mut eig = hermitian_eigenvalues(dm.dim, &dm.entries)?;
    for v in &mut eig {
        if *v < 0.0 && *v >= -STATE_TOL {
            *v = 0.0;
        } else if *v > 1.0 && *v <= 1.0 + STATE_TOL {
            *v = 1.0;
        }
    }
    Ok(eig)
}

/// `S(ρ) = −Tr ρ log₂ ρ`, in bits.
pub fn von_neumann_entropy(dm: &DensityMatrix) -> Result<f64, QStateError> {
    let eig = eigenvalues_hermitian(dm)?;
    let s: f64 = eig.iter().filter(|&&l| l > ENTROPY_CUTOFF).map(|&l| -l * l.log2()).sum();
    Ok(s.max(0.0))
}

/// `Tr ρ²`.
pub fn purity(dm: &DensityMatrix) -> f64 {
    dm.entries.iter().map(|z| z.norm_sqr()).sum()
}

/// Purity of `ρ_A` compared against `2^{-|A|}`.
pub fn is_maximally_mixed(dm: &DensityMatrix) -> bool {
    (purity(dm) - 1.0 / dm.dim as f64).abs() <= MIXED_TOL
}

/// `Tr ρ_A²` of a pure state; computed on the smaller side of the cut.
/// The empty set and the full register both give 1.
pub fn subset_purity(state: &PureState, subset: QubitSubset) -> Result<f64, QStateError> {
    let n = state.n_qubits();
    if !subset.fits(n) {
        return Err(QStateError::SubsetOutOfRange { mask: subset.mask(), n });
    }
    if subset.is_empty() || subset == QubitSubset::full(n) {
        return Ok(1.0);
    }
    let side = smaller_side(subset, n);
    Ok(purity(&reduced_density(state, side)?))
}

fn smaller_side(subset: QubitSubset, n: usize) -> QubitSubset {
    let comp = subset.complement(n);
    if comp.len() < subset.len() {
        comp
    } else {
        subset
    }
}

/// `S(A)` in bits. Evaluated on whichever of `A`, `A^c` is smaller.
pub fn subset_entropy(state: &PureState, subset: QubitSubset) -> Result<f64, QStateError> {
    check_subset(state, subset)?;
    let side = smaller_side(subset, state.n_qubits());
    von_neumann_entropy(&reduced_density(state, side)?)
}

/// `I(A:B) = S(A) + S(B) − S(A∪B)` for disjoint `A`, `B` with `A∪B` proper.
pub fn mutual_information(state: &PureState, a: QubitSubset, b: QubitSubset) -> Result<f64, QStateError> {
    if !a.intersection(b).is_empty() {
        return Err(QStateError::OverlappingSubsets);
    }
    let sa = subset_entropy(state, a)?;
    let sb = subset_entropy(state, b)?;
    let sab = subset_entropy(state, a.union(b))?;
    Ok(sa + sb - sab)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(2, vec![c(h), c(0.0), c(0.0), c(h)]).unwrap()
    }

    #[test]
    fn density_of_basis_and_plus() {
        let zero = PureState::basis(1, 0).unwrap();
        let dm = density_of(&zero);
        assert_eq!(dm.entries(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(1, vec![c(h), c(h)]).unwrap();
        for z in density_of(&plus).entries() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let rho = reduced_density(&bell(), QubitSubset::from_indices([0])).unwrap();
        assert!(rho.distance_to_maximally_mixed() < 1e-15);
        for ev in eigenvalues_hermitian(&rho).unwrap() {
            assert!((ev - 0.5).abs() < 1e-15);
        }
        assert!((von_neumann_entropy(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_reduction_keeps_local_state() {
        let s = PureState::basis(2, 0).unwrap();
        let rho = reduced_density(&s, QubitSubset::from_indices([1])).unwrap();
        assert_eq!(rho.entries(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(eigenvalues_hermitian(&rho).unwrap(), vec![1.0, 0.0]);
        assert_eq!(von_neumann_entropy(&rho).unwrap(), 0.0);
    }

    #[test]
    fn reduced_density_rejects_degenerate_subsets() {
        let s = bell();
        assert!(matches!(reduced_density(&s, QubitSubset::EMPTY), Err(QStateError::EmptySubset)));
        assert!(matches!(reduced_density(&s, QubitSubset::full(2)), Err(QStateError::FullSubset)));
        assert!(matches!(
            reduced_density(&s, QubitSubset::from_indices([5])),
            Err(QStateError::SubsetOutOfRange { .. })
        ));
    }

    #[test]
    fn reduced_order_is_ascending_qubit_index() {
        // |0⟩|1⟩|+⟩ style check: qubit 0 in |1⟩, qubit 2 in |0⟩, keep {0,2} → |10⟩⟨10|
        let s = PureState::basis(3, 0b100).unwrap();
        let rho = reduced_density(&s, QubitSubset::from_indices([0, 2])).unwrap();
        assert_eq!(rho.entry(2, 2), c(1.0));
    }

    #[test]
    fn entropy_of_mixed_registers() {
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(3)).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(purity(&DensityMatrix::maximally_mixed(3)), 0.125);
        assert!((purity(&density_of(&bell())) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_jacobi_handles_phases() {
        // [[2, i],[−i, 2]] has eigenvalues 3 and 1.
        let m = vec![c(2.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), c(2.0)];
        let eig = hermitian_eigenvalues(2, &m).unwrap();
        assert!((eig[0] - 3.0).abs() < 1e-12 && (eig[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = vec![c(0.5), c(1.0), c(0.0), c(0.5)];
        assert!(matches!(hermitian_eigenvalues(2, &m), Err(QStateError::NotHermitian { .. })));
        assert!(DensityMatrix::new(2, m).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(matches!(
            DensityMatrix::new(2, vec![c(1.0), c(0.0), c(0.0), c(1.0)]),
            Err(QStateError::BadTrace { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(2, vec![c(1.5), c(0.0), c(0.0), c(-0.5)]),
            Err(QStateError::NotPositive { .. })
        ));
        assert!(DensityMatrix::new(2, vec![c(0.5), c(0.0), c(0.0), c(0.5)]).is_ok());
    }

    #[test]
    fn mutual_information_cases() {
        let s = PureState::basis(2, 0).unwrap();
        let (a, b) = (QubitSubset::from_indices([0]), QubitSubset::from_indices([1]));
        assert!(mutual_information(&s, a, b).is_err()); // A∪B is the full register
        let s3 = PureState::basis(3, 0).unwrap();
        assert!(mutual_information(&s3, a, b).unwrap().abs() < 1e-12);
        assert!(matches!(mutual_information(&s3, a, a), Err(QStateError::OverlappingSubsets)));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = bell();
        let back = PureState::from_json(&s.to_json()).unwrap();
        assert!(back.equals_up_to_phase(&s, 1e-12));
        let dup = r#"{"n_qubits":1,"amplitudes":[{"basis":"0","re":1,"im":0},{"basis":"0","re":0,"im":0}]}"#;
        assert!(matches!(PureState::from_json(dup), Err(QStateError::DuplicateBasis(_))));
        let bad = r#"{"n_qubits":2,"amplitudes":[{"basis":"0","re":1,"im":0}]}"#;
        assert!(matches!(PureState::from_json(bad), Err(QStateError::BadBasis(_))));
        let unnormalized = r#"{"n_qubits":1,"amplitudes":[{"basis":"0","re":2,"im":0}]}"#;
        assert!(matches!(PureState::from_json(unnormalized), Err(QStateError::NotNormalized { .. })));
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(PureState::basis(13, 0), Err(QStateError::CapacityExceeded { n: 13 })));
    }

    #[test]
    fn permutation_moves_qubits() {
        let s = PureState::basis(3, 0b100).unwrap(); // qubit 0 set
        let p = s.permute_qubits(&[2, 0, 1]); // old 0 -> new 2
        assert_eq!(p.amplitude_of("001").unwrap(), c(1.0));
    }
}
