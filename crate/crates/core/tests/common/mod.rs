//! Test-side oracles, written without reference to the library internals
//! they check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use qsskit::access::AccessStructure;

/// Every antichain of subsets of `{1..n}` satisfying no-cloning and
/// no-redundancy, canonicalized by brute force over all relabelings.
pub fn brute_force_structures(n: usize) -> BTreeSet<Vec<Vec<usize>>> {
    let subsets: Vec<u32> = (1u32..1 << n).collect();
    let mut out = BTreeSet::new();
    let mut chosen = Vec::new();
    antichains(&subsets, 0, &mut chosen, &mut |family| {
        if valid(n, family) {
            out.insert(canonical(n, family));
        }
    });
    out
}

fn antichains(subsets: &[u32], i: usize, chosen: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
    if i == subsets.len() {
        visit(chosen);
        return;
    }
    let s = subsets[i];
    // Subsets come in increasing numeric order, so a superset never precedes
    // its subsets; only supersets of chosen sets need excluding.
    if chosen.iter().all(|&c| c & s != c && c & s != s) {
        chosen.push(s);
        antichains(subsets, i + 1, chosen, visit);
        chosen.pop();
    }
    antichains(subsets, i + 1, chosen, visit);
}

fn authorized(family: &[u32], x: u32) -> bool {
    family.iter().any(|&c| c & !x == 0)
}

fn valid(n: usize, family: &[u32]) -> bool {
    let full = (1u32 << n) - 1;
    let covered = family.iter().fold(0, |a, &c| a | c);
    covered == full && (0..=full).all(|x| authorized(family, x) != authorized(family, full & !x))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Lexicographically least sorted list-of-lists (1-indexed) over relabelings.
fn canonical(n: usize, family: &[u32]) -> Vec<Vec<usize>> {
    permutations(n)
        .into_iter()
        .map(|perm| {
            let mut sets: Vec<Vec<usize>> = family
                .iter()
                .map(|&c| {
                    let mut v: Vec<usize> = (0..n).filter(|&i| c >> i & 1 == 1).map(|i| perm[i] + 1).collect();
                    v.sort();
                    v
                })
                .collect();
            sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            sets
        })
        .min()
        .expect("at least one permutation")
}

/// Library structures mapped into the oracle's canonical representation.
pub fn oracle_canonical(a: &AccessStructure) -> Vec<Vec<usize>> {
    let n = a.n_players();
    let family: Vec<u32> = a
        .to_lists()
        .iter()
        .map(|s| s.iter().fold(0, |m, &p| m | 1 << (p - 1)))
        .collect();
    canonical(n, &family)
}

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use qsskit::qstate::PureState;
use rand::Rng;

/// Uniform-box complex amplitudes, normalized.
pub fn random_state<R: Rng>(rng: &mut R, n_qubits: usize) -> PureState {
    let amps: Vec<Complex64> =
        (0..1usize << n_qubits).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    PureState::normalized(n_qubits, amps).expect("nonzero vector")
}

/// Applies an independent random SU(2) rotation to every qubit.
pub fn random_local_unitaries<R: Rng>(rng: &mut R, state: &PureState) -> PureState {
    let n = state.n_qubits();
    let mut amps = state.amplitudes().to_vec();
    for q in 0..n {
        let (theta, phi, lambda): (f64, f64, f64) = (rng.gen_range(0.0..3.2), rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3));
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let u = [
            [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
            [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
        ];
        // Qubit 0 is the most significant bit of the basis index.
        let bit = 1usize << (n - 1 - q);
        for i in 0..amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (amps[i], amps[i | bit]);
                amps[i] = u[0][0] * a0 + u[0][1] * a1;
                amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }
    PureState::new(n, amps).expect("unitaries preserve the norm")
}

/// Reduced density matrix by explicit summation over the traced-out
/// qubits, with kept qubits in increasing order as big-endian bits.
pub fn partial_trace_oracle(state: &PureState, keep: &[usize]) -> DMatrix<Complex<f64>> {
    let n = state.n_qubits();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let compose = |kept: usize, env: usize| {
        let mut idx = 0usize;
        for (j, &q) in keep.iter().enumerate() {
            idx |= ((kept >> (k - 1 - j)) & 1) << (n - 1 - q);
        }
        for (j, &q) in traced.iter().enumerate() {
            idx |= ((env >> (traced.len() - 1 - j)) & 1) << (n - 1 - q);
        }
        idx
    };
    let amps = state.amplitudes();
    DMatrix::from_fn(1 << k, 1 << k, |r, c| {
        (0..1usize << traced.len())
            .map(|e| {
                let a = amps[compose(r, e)];
                let b = amps[compose(c, e)];
                let z = a * b.conj();
                Complex::new(z.re, z.im)
            })
            .sum()
    })
}

/// Von Neumann entropy in bits via nalgebra's Hermitian eigen-solver.
pub fn entropy_oracle(rho: &DMatrix<Complex<f64>>) -> f64 {
    let eig = rho.clone().symmetric_eigenvalues();
    eig.iter().filter(|&&l| l > 1e-12).map(|&l| -l * l.log2()).sum()
}
