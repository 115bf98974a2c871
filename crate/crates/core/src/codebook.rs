//! Known schemes: the five-qubit and Steane encodings, the Fano-plane
//! structure, threshold structures and the AME existence table for small
//! `n`.
//!
//! Amplitudes are kept as signed basis labels with one shared exact
//! coefficient and rendered to floats on load.

use num_complex::Complex64;
use thiserror::Error;

use crate::access::AccessStructure;
use crate::qssverify::{build_qss_state, EncodingPair};
use crate::qstate::PureState;

#[derive(Debug, Error)]
pub enum CodebookError {
    #[error("bad threshold parameters ({k}, {n}): need 1 <= k <= n <= 12")]
    BadParams { n: usize, k: usize },
    #[error("unknown builtin {0:?}")]
    UnknownName(String),
}

#[derive(Clone, Copy)]
enum Coefficient {
    /// `1/4`
    Quarter,
    /// `1/(2√2)`
    InvTwoRootTwo,
}

impl Coefficient {
    fn value(self) -> f64 {
        match self {
            Coefficient::Quarter => 0.25,
            Coefficient::InvTwoRootTwo => 0.5 * std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

fn render(n: usize, coefficient: Coefficient, terms: &[(i8, &str)]) -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for &(sign, label) in terms {
        let idx = usize::from_str_radix(label, 2).expect("codebook label");
        debug_assert_eq!(label.len(), n);
        amps[idx] = Complex64::new(f64::from(sign) * coefficient.value(), 0.0);
    }
    PureState::new(n, amps).expect("codebook state is normalized")
}

const FIVE_ZERO: [(i8, &str); 16] = [
    (1, "00000"), (1, "10010"), (1, "01001"), (1, "10100"),
    (1, "01010"), (-1, "11011"), (-1, "00110"), (-1, "11000"),
    (-1, "11101"), (-1, "00011"), (-1, "11110"), (-1, "01111"),
    (-1, "10001"), (-1, "01100"), (-1, "10111"), (1, "00101"),
];

const FIVE_ONE: [(i8, &str); 16] = [
    (1, "11111"), (1, "01101"), (1, "10110"), (1, "01011"),
    (1, "10101"), (-1, "00100"), (-1, "11001"), (-1, "00111"),
    (-1, "00010"), (-1, "11100"), (-1, "00001"), (-1, "10000"),
    (-1, "01110"), (-1, "10011"), (-1, "01000"), (1, "11010"),
];

// Labeling of the printed eight-qubit QSS state; its weight-3 odd
// codewords are exactly the lines of `fano_structure`.
const STEANE_ZERO: [&str; 8] = [
    "0000000", "0001111", "0110011", "0111100",
    "1010101", "1011010", "1100110", "1101001",
];

const STEANE_ONE: [&str; 8] = [
    "0010110", "0011001", "0100101", "0101010",
    "1000011", "1001100", "1110000", "1111111",
];

// The same code in the labeling of the printed encoding map.
const STEANE_MAP_ZERO: [&str; 8] = [
    "0000000", "1000111", "0101011", "0011110",
    "1101100", "1011001", "0110101", "1110010",
];

const STEANE_MAP_ONE: [&str; 8] = [
    "1111111", "0111000", "1010100", "1100001",
    "0010011", "0100110", "1001010", "0001101",
];

/// Five-qubit code; its QSS state realizes the `(3,5)` threshold structure.
pub fn five_qubit_encoding() -> EncodingPair {
    let zero = render(5, Coefficient::Quarter, &FIVE_ZERO);
    let one = render(5, Coefficient::Quarter, &FIVE_ONE);
    EncodingPair::new(zero, one).expect("five-qubit images are orthogonal")
}

fn plus_terms(labels: &[&'static str]) -> Vec<(i8, &'static str)> {
    labels.iter().map(|&l| (1, l)).collect()
}

/// Steane code, labeled so its QSS state realizes `fano_structure` exactly.
pub fn steane_encoding() -> EncodingPair {
    let zero = render(7, Coefficient::InvTwoRootTwo, &plus_terms(&STEANE_ZERO));
    let one = render(7, Coefficient::InvTwoRootTwo, &plus_terms(&STEANE_ONE));
    EncodingPair::new(zero, one).expect("Steane images are orthogonal")
}

/// Steane code in the alternative qubit labeling (a relabeled Fano plane).
pub fn steane_encoding_map_labeling() -> EncodingPair {
    let zero = render(7, Coefficient::InvTwoRootTwo, &plus_terms(&STEANE_MAP_ZERO));
    let one = render(7, Coefficient::InvTwoRootTwo, &plus_terms(&STEANE_MAP_ONE));
    EncodingPair::new(zero, one).expect("Steane images are orthogonal")
}

/// Lines of the Fano plane as minimal authorized sets on 7 players.
pub fn fano_structure() -> AccessStructure {
    let lines = [[1, 2, 3], [1, 4, 5], [1, 6, 7], [2, 4, 6], [2, 5, 7], [3, 4, 7], [3, 5, 6]];
    let lists: Vec<Vec<usize>> = lines.iter().map(|l| l.to_vec()).collect();
    AccessStructure::from_lists(7, &lists).expect("Fano lines form an antichain")
}

pub fn threshold_structure(n: usize, k: usize) -> Result<AccessStructure, CodebookError> {
    AccessStructure::threshold(n, k).map_err(|_| CodebookError::BadParams { n, k })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmeExistence {
    Exists,
    DoesNotExist,
}

/// Existence of `AME(n, 2)` qubit states for `2 <= n <= 8`.
pub const AME_TABLE: [(usize, AmeExistence); 7] = [
    (2, AmeExistence::Exists),
    (3, AmeExistence::Exists),
    (4, AmeExistence::DoesNotExist),
    (5, AmeExistence::Exists),
    (6, AmeExistence::Exists),
    (7, AmeExistence::DoesNotExist),
    (8, AmeExistence::DoesNotExist),
];

pub fn ame_exists(n_qubits: usize) -> Option<AmeExistence> {
    AME_TABLE.iter().find(|(n, _)| *n == n_qubits).map(|&(_, e)| e)
}

/// A named scheme with the structure its QSS state realizes.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub name: &'static str,
    pub encoding: EncodingPair,
    pub structure: AccessStructure,
}

impl Scheme {
    pub fn state(&self) -> PureState {
        build_qss_state(&self.encoding).expect("codebook encodings are valid")
    }
}

pub fn schemes() -> Vec<Scheme> {
    vec![
        Scheme {
            name: "five-qubit",
            encoding: five_qubit_encoding(),
            structure: AccessStructure::threshold(5, 3).expect("threshold(5,3)"),
        },
        Scheme { name: "steane", encoding: steane_encoding(), structure: fano_structure() },
    ]
}

pub fn scheme(name: &str) -> Option<Scheme> {
    schemes().into_iter().find(|s| s.name == name)
}

/// What `builtin --name` resolves to.
#[derive(Clone, Debug)]
pub enum Builtin {
    Scheme(Scheme),
    Structure { stem: String, structure: AccessStructure },
}

fn structure_stem(s: &AccessStructure) -> String {
    match s.thresholdness() {
        Some(k) => format!("threshold_{}_{k}", s.n_players()),
        None => "fano".into(),
    }
}

/// Accepts `five-qubit`, `steane`, `fano` and `threshold:<n>:<k>`.
pub fn builtin(name: &str) -> Result<Builtin, CodebookError> {
    if let Some(s) = scheme(name) {
        return Ok(Builtin::Scheme(s));
    }
    if name == "fano" {
        return Ok(Builtin::Structure { stem: "fano".into(), structure: fano_structure() });
    }
    let unknown = || CodebookError::UnknownName(name.to_string());
    let rest = name.strip_prefix("threshold:").ok_or_else(unknown)?;
    let (n, k) = rest.split_once(':').ok_or_else(unknown)?;
    let n: usize = n.parse().map_err(|_| unknown())?;
    let k: usize = k.parse().map_err(|_| unknown())?;
    let structure = threshold_structure(n, k)?;
    Ok(Builtin::Structure { stem: format!("threshold_{n}_{k}"), structure })
}

impl Builtin {
    /// The JSON document printed on stdout: the QSS state for schemes, the
    /// access structure otherwise.
    pub fn primary_json(&self) -> String {
        match self {
            Builtin::Scheme(s) => s.state().to_json(),
            Builtin::Structure { structure, .. } => structure.to_json(),
        }
    }

    /// `(file name, contents)` for every file `--out` writes.
    pub fn files(&self) -> Vec<(String, String)> {
        match self {
            Builtin::Scheme(s) => vec![
                (format!("{}_qss.json", s.name), s.state().to_json()),
                (format!("{}.json", structure_stem(&s.structure)), s.structure.to_json()),
            ],
            Builtin::Structure { stem, structure } => vec![(format!("{stem}.json"), structure.to_json())],
        }
    }
}

/// A codebook QSS state relabeled to realize `structure`, when `structure`
/// is isomorphic to a codebook scheme.
pub fn realization_for(structure: &AccessStructure) -> Option<(&'static str, PureState)> {
    let n = structure.n_players();
    let (canon, to_canon) = structure.canonical_form_with_perm();
    schemes().into_iter().filter(|s| s.structure.n_players() == n).find_map(|s| {
        let (scanon, s_to_canon) = s.structure.canonical_form_with_perm();
        if scanon != canon {
            return None;
        }
        // scheme player p -> canonical s_to_canon[p] -> structure player inv(to_canon)
        let mut inv = vec![0usize; n + 1];
        for (p, &q) in to_canon.iter().enumerate() {
            inv[q] = p;
        }
        let perm: Vec<usize> = (0..=n).map(|p| inv[s_to_canon[p]]).collect();
        Some((s.name, s.state().permute_qubits(&perm)))
    })
}
