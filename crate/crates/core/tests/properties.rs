mod common;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use qsskit::access::AccessStructure;
use qsskit::codebook;
use qsskit::entropy_lp::certificate::{check_farkas, check_sample};
use qsskit::entropy_lp::{build_qss_lp, lp_feasible, Constraint, EntropyLP, FeasibilityResult, Relation, Tag};
use qsskit::qssverify::{derive_access, verify_scheme, DEFAULT_TOL};
use qsskit::qstate::{reduced_density, subset_entropy, subset_purity, PureState, QubitSubset};
use qsskit::uniformity::{is_k_uniform, max_uniformity, shadow_spectrum, shadow_sum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_density_matches_oracle(seed in any::<u64>(), n in 2usize..=6, mask in 1u32..64) {
        let mut r = rng(seed);
        let state = common::random_state(&mut r, n);
        let keep = QubitSubset::from_mask(mask & ((1 << n) - 1));
        // The full register is rejected; its reduced state is the state itself.
        prop_assume!(!keep.is_empty() && keep.len() < n);
        let rho = reduced_density(&state, keep).unwrap();
        let oracle = common::partial_trace_oracle(&state, &keep.indices());
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                prop_assert!((rho.entry(i, j) - oracle[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn entropy_matches_oracle_and_schmidt(seed in any::<u64>(), n in 2usize..=6, mask in 1u32..63) {
        let mut r = rng(seed);
        let state = common::random_state(&mut r, n);
        let full = (1u32 << n) - 1;
        let a = QubitSubset::from_mask(mask & full);
        prop_assume!(!a.is_empty() && a.mask() != full);
        let s = subset_entropy(&state, a).unwrap();
        let direct = common::entropy_oracle(&common::partial_trace_oracle(&state, &a.indices()));
        let other = common::entropy_oracle(&common::partial_trace_oracle(&state, &a.complement(n).indices()));
        prop_assert!((s - direct).abs() < 1e-9);
        prop_assert!((direct - other).abs() < 1e-8);
    }

    #[test]
    fn uniformity_is_monotone(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let base = match which {
            0 => codebook::scheme("five-qubit").unwrap().state(),
            1 => codebook::scheme("steane").unwrap().state(),
            _ => common::random_state(&mut r, 6),
        };
        let state = common::random_local_unitaries(&mut r, &base);
        let n = state.n_qubits();
        for k in 1..=n / 2 {
            if is_k_uniform(&state, k).unwrap().uniform {
                for j in 1..k {
                    prop_assert!(is_k_uniform(&state, j).unwrap().uniform);
                }
            }
        }
        // Local unitaries leave every reduced spectrum unchanged.
        prop_assert_eq!(max_uniformity(&state).unwrap().k_max, max_uniformity(&base).unwrap().k_max);
    }

    #[test]
    fn shadow_sums_nonnegative(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let state = common::random_state(&mut r, n);
        for (t, v) in shadow_spectrum(&state).unwrap().iter().enumerate() {
            prop_assert!(*v >= -1e-7, "T = {t:#b}: {v}");
        }
    }

    #[test]
    fn verify_and_derive_follow_relabeling(seed in any::<u64>(), which in 0usize..2) {
        let scheme = &codebook::schemes()[which];
        let n = scheme.structure.n_players();
        let mut players: Vec<usize> = (1..=n).collect();
        let mut r = rng(seed);
        rand::seq::SliceRandom::shuffle(players.as_mut_slice(), &mut r);
        let mut perm = vec![0];
        perm.extend(players);
        let state = scheme.state().permute_qubits(&perm);
        let expected = scheme.structure.permute(&perm);
        prop_assert!(verify_scheme(&state, &expected, DEFAULT_TOL).unwrap().pass);
        prop_assert_eq!(derive_access(&state, DEFAULT_TOL).unwrap(), expected);
    }
}

#[test]
fn shadow_spectrum_matches_direct_sum() {
    let mut r = rng(7);
    for n in 1..=5 {
        let state = common::random_state(&mut r, n);
        let spectrum = shadow_spectrum(&state).unwrap();
        for t in 0..1u32 << n {
            let direct: f64 = (0..1u32 << n)
                .map(|s| {
                    let sign = if (s & t).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    sign * subset_purity(&state, QubitSubset::from_mask(s)).unwrap()
                })
                .sum();
            assert!((spectrum[t as usize] - direct).abs() < 1e-10);
            assert!((shadow_sum(&state, QubitSubset::from_mask(t)).unwrap() - direct).abs() < 1e-10);
        }
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn random_constraint(n_vars: usize, terms: &[(usize, i64)], rel: u8, rhs: i64) -> Constraint {
    let mut coeffs = BTreeMap::new();
    for &(v, c) in terms {
        *coeffs.entry(v % n_vars).or_insert_with(|| int(0)) += int(c);
    }
    let relation = match rel % 3 {
        0 => Relation::Le,
        1 => Relation::Ge,
        _ => Relation::Eq,
    };
    Constraint::new(coeffs, relation, int(rhs), Tag::User)
}

fn assert_certified(lp: &EntropyLP, result: &FeasibilityResult) {
    match result {
        FeasibilityResult::Feasible { sample } => assert_eq!(check_sample(lp, sample), Ok(())),
        FeasibilityResult::Infeasible { farkas } => assert_eq!(check_farkas(lp, farkas), Ok(())),
        FeasibilityResult::Timeout => panic!("timeout on a tiny LP"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn augmentation_never_restores_feasibility(
        additions in prop::collection::vec(
            (prop::collection::vec((0usize..16, -2i64..=2), 1..4), any::<u8>(), -3i64..=3),
            1..5,
        )
    ) {
        let mut lp = build_qss_lp(&AccessStructure::threshold(3, 2).unwrap()).unwrap();
        let mut was_feasible = true;
        for (terms, rel, rhs) in additions {
            lp.push(random_constraint(lp.n_vars(), &terms, rel, rhs)).unwrap();
            let result = lp_feasible(&lp);
            assert_certified(&lp, &result);
            let feasible = result.is_feasible();
            prop_assert!(was_feasible || !feasible);
            was_feasible = feasible;
        }
    }
}

#[test]
fn json_round_trips() {
    let state = codebook::scheme("steane").unwrap().state();
    let back = PureState::from_json(&state.to_json()).unwrap();
    assert_eq!(back.amplitudes(), state.amplitudes());

    let fano = codebook::fano_structure();
    assert_eq!(AccessStructure::from_json(&fano.to_json()).unwrap(), fano);

    let lp = build_qss_lp(&AccessStructure::threshold(5, 3).unwrap()).unwrap();
    let again = EntropyLP::from_json(&lp.to_json()).unwrap();
    assert_eq!(again.to_json(), lp.to_json());
    assert_eq!(again.constraints().len(), lp.constraints().len());
}
