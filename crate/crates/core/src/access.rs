//! Access structures over players `1..=n`, stored as bitmasks with player
//! `i` at bit `i`. Bit 0 is reserved for the reference qubit so that a player
//! set doubles as a [`QubitSubset`](crate::qstate::QubitSubset) of the QSS
//! state.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest player count accepted for ad-hoc checks.
pub const MAX_PLAYERS: usize = 12;
/// Largest player count for canonicalization (full `n!` scan).
pub const MAX_CANONICAL_PLAYERS: usize = 8;

#[derive(Debug, Error)]
pub enum AccessError {
    #[error("player count {0} outside 1..={MAX_PLAYERS}")]
    BadPlayerCount(usize),
    #[error("minimal set list contains an empty set")]
    EmptySet,
    #[error("set {set} mentions players outside 1..={n}")]
    PlayerOutOfRange { set: PlayerSet, n: usize },
    #[error("not an antichain: {smaller} is contained in {larger}")]
    NotAntichain { smaller: PlayerSet, larger: PlayerSet },
    #[error("structure is not 3-homogeneous with at least 5 players")]
    NotThreeHomogeneous,
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A set of players as a bitmask (bit `i` = player `i`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerSet(pub u32);

impl PlayerSet {
    pub fn from_players<I: IntoIterator<Item = usize>>(players: I) -> Self {
        PlayerSet(players.into_iter().fold(0, |m, p| m | 1 << p))
    }

    pub fn players(self) -> Vec<usize> {
        (1..32).filter(|&p| self.0 >> p & 1 == 1).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: PlayerSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.players().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", body.join(","))
    }
}

/// Mask of all players `1..=n`.
pub fn all_players(n: usize) -> u32 {
    ((1u64 << (n + 1)) - 2) as u32
}

/// Player count plus the antichain of minimal authorized sets, kept sorted by
/// mask value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccessStructure {
    n_players: usize,
    minimal: Vec<u32>,
}

/// Bound check for the smallest minimal set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EllBound {
    pub ell: usize,
    pub upper: usize,
    pub holds: bool,
}

/// Outcome of the two-overlap filter for 3-homogeneous structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum X2Outcome {
    Holds,
    /// No suitable third set exists for this pair of minimal sets.
    Violated { first: PlayerSet, second: PlayerSet },
}

impl AccessStructure {
    pub fn new(n_players: usize, sets: Vec<u32>) -> Result<Self, AccessError> {
        if n_players == 0 || n_players > MAX_PLAYERS {
            return Err(AccessError::BadPlayerCount(n_players));
        }
        let all = all_players(n_players);
        let mut sets = sets;
        sets.sort_unstable();
        sets.dedup();
        for &s in &sets {
            if s == 0 {
                return Err(AccessError::EmptySet);
            }
            if s & !all != 0 {
                return Err(AccessError::PlayerOutOfRange { set: PlayerSet(s), n: n_players });
            }
        }
        for (i, &a) in sets.iter().enumerate() {
            for &b in &sets[i + 1..] {
                if a & b == a || a & b == b {
                    let (smaller, larger) = if a & b == a { (a, b) } else { (b, a) };
                    return Err(AccessError::NotAntichain {
                        smaller: PlayerSet(smaller),
                        larger: PlayerSet(larger),
                    });
                }
            }
        }
        Ok(AccessStructure { n_players, minimal: sets })
    }

    /// From 1-indexed player lists.
    pub fn from_lists(n_players: usize, sets: &[Vec<usize>]) -> Result<Self, AccessError> {
        let masks = sets
            .iter()
            .map(|s| {
                let mut m = 0u32;
                for &p in s {
                    if p == 0 || p > n_players {
                        return Err(AccessError::PlayerOutOfRange {
                            set: PlayerSet::from_players(s.iter().copied().filter(|&q| q < 32)),
                            n: n_players,
                        });
                    }
                    m |= 1 << p;
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>, _>>()?;
        AccessStructure::new(n_players, masks)
    }

    /// All `k`-subsets of `[n]` (`1 ≤ k ≤ n`).
    pub fn threshold(n_players: usize, k: usize) -> Result<Self, AccessError> {
        if k == 0 || k > n_players {
            return Err(AccessError::PreconditionNotMet(format!("threshold needs 1 <= k <= n, got k={k}, n={n_players}")));
        }
        let all = all_players(n_players);
        let sets = (0..=all).filter(|m| m & 1 == 0 && m & !all == 0 && m.count_ones() as usize == k).collect();
        AccessStructure::new(n_players, sets)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn minimal_sets(&self) -> &[u32] {
        &self.minimal
    }

    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.minimal.iter().map(|&m| PlayerSet(m).players()).collect()
    }

    pub fn all_players(&self) -> u32 {
        all_players(self.n_players)
    }

    pub fn is_authorized(&self, set: u32) -> bool {
        self.minimal.iter().any(|&m| m & !set == 0)
    }

    /// Every superset of a minimal set, ascending by mask.
    pub fn monotone_closure(&self) -> Vec<u32> {
        let all = self.all_players();
        (2..=all).step_by(2).filter(|&s| s & !all == 0 && self.is_authorized(s)).collect()
    }

    /// Exactly one of each complementary pair `A`, `A^c` (over all subsets,
    /// including `∅`/`[n]`) is authorized.
    pub fn satisfies_no_cloning(&self) -> bool {
        let all = self.all_players();
        (0..=all).step_by(2).filter(|&s| s & !all == 0).all(|s| self.is_authorized(s) != self.is_authorized(all & !s))
    }

    pub fn satisfies_no_redundancy(&self) -> bool {
        let covered = self.minimal.iter().fold(0, |acc, &m| acc | m);
        covered == self.all_players()
    }

    /// Antichain (guaranteed by construction), no-cloning and no-redundancy.
    pub fn is_combinatorially_valid(&self) -> bool {
        !self.minimal.is_empty() && self.satisfies_no_cloning() && self.satisfies_no_redundancy()
    }

    pub fn ell_min(&self) -> EllBound {
        let ell = self.minimal.iter().map(|m| m.count_ones() as usize).min().unwrap_or(0);
        let upper = self.n_players.div_ceil(2);
        EllBound { ell, upper, holds: 2 <= ell && ell <= upper }
    }

    /// `Some(k)` when every minimal set has size `k`.
    pub fn homogeneity(&self) -> Option<usize> {
        let k = self.minimal.first()?.count_ones();
        self.minimal.iter().all(|m| m.count_ones() == k).then_some(k as usize)
    }

    /// `Some(k)` when the minimal sets are exactly all `k`-subsets.
    pub fn thresholdness(&self) -> Option<usize> {
        let k = self.homogeneity()?;
        (self.minimal.len() as u64 == binomial(self.n_players, k)).then_some(k)
    }

    /// For odd `n` with smallest minimal set `(n+1)/2`, the structure must
    /// be the `(n+1)/2`-threshold structure.
    pub fn threshold_forcing_check(&self) -> Result<bool, AccessError> {
        let n = self.n_players;
        if n.is_multiple_of(2) || self.ell_min().ell != n.div_ceil(2) || !self.is_combinatorially_valid() {
            return Err(AccessError::PreconditionNotMet(
                "needs a valid structure with odd n and smallest minimal set (n+1)/2".into(),
            ));
        }
        Ok(self.thresholdness() == Some(n.div_ceil(2)))
    }

    /// Necessary condition on 3-homogeneous structures: every pair of
    /// minimal sets `{i,j,k1}`, `{i,j,k2}` admits a minimal set
    /// `{k1,k2,k3}` with `k3` outside both, whose union with the pair meets
    /// every minimal set in at least two players.
    pub fn lemma_x2_filter(&self) -> Result<X2Outcome, AccessError> {
        if self.homogeneity() != Some(3) || self.n_players < 5 {
            return Err(AccessError::NotThreeHomogeneous);
        }
        for (i, &a1) in self.minimal.iter().enumerate() {
            for &a2 in &self.minimal[i + 1..] {
                if (a1 & a2).count_ones() != 2 {
                    continue;
                }
                let pair = a1 ^ a2; // {k1, k2}
                let outside = a1 | a2;
                let ok = self.minimal.iter().any(|&a3| {
                    a3 & pair == pair
                        && (a3 & !outside).count_ones() == 1
                        && self.minimal.iter().all(|&b| (b & (outside | a3)).count_ones() >= 2)
                });
                if !ok {
                    return Ok(X2Outcome::Violated { first: PlayerSet(a1), second: PlayerSet(a2) });
                }
            }
        }
        Ok(X2Outcome::Holds)
    }

    /// Number of minimal sets containing each pair `{i, j}` (`i < j`).
    pub fn pair_coverage(&self) -> BTreeMap<(usize, usize), usize> {
        let n = self.n_players;
        let mut out = BTreeMap::new();
        for i in 1..=n {
            for j in i + 1..=n {
                let pair = 1u32 << i | 1 << j;
                out.insert((i, j), self.minimal.iter().filter(|&&m| m & pair == pair).count());
            }
        }
        out
    }

    pub fn all_pairs_covered(&self) -> bool {
        self.pair_coverage().values().all(|&c| c > 0)
    }

    /// Applies `perm` (indexed by player, `perm[0]` ignored) to every set.
    pub fn permute(&self, perm: &[usize]) -> AccessStructure {
        let mut sets: Vec<u32> = self.minimal.iter().map(|&m| map_mask(m, perm)).collect();
        sets.sort_unstable();
        AccessStructure { n_players: self.n_players, minimal: sets }
    }

    /// Lexicographically least sorted mask list over all player
    /// relabelings.
    pub fn canonical_form(&self) -> AccessStructure {
        self.canonical_form_with_perm().0
    }

    /// Canonical form and a relabeling `perm` with
    /// `self.permute(&perm) == canonical`.
    pub fn canonical_form_with_perm(&self) -> (AccessStructure, Vec<usize>) {
        let n = self.n_players;
        assert!(n <= MAX_CANONICAL_PLAYERS, "canonical form limited to {MAX_CANONICAL_PLAYERS} players");
        let mut perm: Vec<usize> = (0..=n).collect();
        let mut best = self.minimal.clone();
        let mut best_perm = perm.clone();
        let mut scratch = Vec::with_capacity(self.minimal.len());
        // Heap's algorithm over positions 1..=n.
        let mut counters = vec![0usize; n + 1];
        let mut i = 1;
        while i <= n {
            if counters[i] < i - 1 {
                if i % 2 == 1 {
                    perm.swap(1, i);
                } else {
                    perm.swap(1 + counters[i], i);
                }
                scratch.clear();
                scratch.extend(self.minimal.iter().map(|&m| map_mask(m, &perm)));
                scratch.sort_unstable();
                if scratch < best {
                    best.clone_from(&scratch);
                    best_perm.clone_from(&perm);
                }
                counters[i] += 1;
                i = 1;
            } else {
                counters[i] = 0;
                i += 1;
            }
        }
        (AccessStructure { n_players: n, minimal: best }, best_perm)
    }

    pub fn from_json(text: &str) -> Result<Self, AccessError> {
        let file: AccessFile = serde_json::from_str(text)?;
        AccessStructure::from_lists(file.n_players, &file.minimal_authorized)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AccessFile::from(self)).expect("access structure serializes")
    }
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} [", self.n_players)?;
        for (k, &m) in self.minimal.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", PlayerSet(m))?;
        }
        write!(f, "]")
    }
}

/// JSON form with 1-indexed players.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AccessFile {
    pub n_players: usize,
    pub minimal_authorized: Vec<Vec<usize>>,
}

impl From<&AccessStructure> for AccessFile {
    fn from(a: &AccessStructure) -> Self {
        AccessFile { n_players: a.n_players, minimal_authorized: a.to_lists() }
    }
}

pub(crate) fn map_mask(mask: u32, perm: &[usize]) -> u32 {
    let mut out = 0u32;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros() as usize;
        out |= 1 << perm[p];
        m &= m - 1;
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}
