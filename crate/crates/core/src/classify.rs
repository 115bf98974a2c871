//! Enumeration of candidate access structures for small `n` and the filter
//! pipeline that decides each one.
//!
//! Filters, in order, stopping at the first elimination:
//! F1 combinatorial validity, F2 AME existence for `(n+1)/2`-threshold
//! structures, F3 entropy LP infeasibility, F4 counting conditions for
//! 3-homogeneous structures on 7 players, F5 shadow inequality on the
//! LP-forced purity pattern, F6 realization by a codebook state.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::access::{all_players, AccessStructure, PlayerSet, X2Outcome};
use crate::codebook::{self, AmeExistence};
use crate::entropy_lp::{
    self, build_qss_lp, forced_uniformity_pattern_bounded, lp_feasible_with, rational_string, FeasibilityResult,
    LpError, SolveOptions,
};
use crate::par::{self, Exec};
use crate::qssverify::{verify_scheme, DEFAULT_TOL};
use crate::qstate::{low_bits, QubitSubset};
use crate::uniformity::{find_shadow_violation, Interval, UniformityError};

pub const MIN_N: usize = 3;
pub const MAX_N: usize = 7;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("n = {0} out of range {MIN_N}..={MAX_N}")]
    BadN(usize),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn low_set(size: usize) -> u32 {
    ((1u32 << size) - 1) << 1
}

struct Search {
    n: usize,
    all: u32,
    cands: Vec<u32>,
    index_of: Vec<usize>,
    homogeneous: Option<usize>,
    chosen: Vec<u32>,
    found: Vec<Vec<u32>>,
}

impl Search {
    fn authorized(&self, x: u32) -> bool {
        self.chosen.iter().any(|&c| c & !x == 0)
    }

    fn compatible(&self, x: u32) -> bool {
        !self.authorized(x)
            && self.chosen.iter().all(|&c| c & x != 0)
            && self.homogeneous.is_none_or(|k| x.count_ones() as usize == k)
    }

    fn includable(&self, x: u32) -> bool {
        self.compatible(x) && (!self.chosen.is_empty() || x == low_set(x.count_ones() as usize))
    }

    /// Can `y` still become authorized through a candidate at index `>= from`?
    fn reachable(&self, y: u32, from: usize) -> bool {
        if self.authorized(y) {
            return true;
        }
        let mut c = y;
        while c != 0 {
            let idx = self.index_of[c as usize];
            if idx != usize::MAX && idx >= from && self.compatible(c) {
                return true;
            }
            c = (c - 1) & y;
        }
        false
    }

    fn leaf_ok(&self) -> bool {
        let covered = self.chosen.iter().fold(0, |acc, &c| acc | c);
        if covered != self.all {
            return false;
        }
        (0..=self.all).step_by(2).all(|x| self.authorized(x) != self.authorized(self.all & !x))
    }

    fn run(&mut self, i: usize, pending: &[u32]) {
        if pending.iter().any(|&y| !self.reachable(y, i)) {
            return;
        }
        if i == self.cands.len() {
            if self.leaf_ok() {
                self.found.push(self.chosen.clone());
            }
            return;
        }
        let x = self.cands[i];
        let comp = self.all & !x;
        let complement_final = comp.count_ones() < x.count_ones();
        if self.includable(x) && !(complement_final && self.authorized(comp)) {
            self.chosen.push(x);
            let next: Vec<u32> = pending.iter().copied().filter(|&y| !self.authorized(y)).collect();
            self.run(i + 1, &next);
            self.chosen.pop();
        }
        if self.authorized(x) {
            self.run(i + 1, pending);
            return;
        }
        // Excluding an unauthorized x obliges its complement.
        if complement_final && !self.authorized(comp) {
            return;
        }
        let mut next = pending.to_vec();
        if !self.authorized(comp) {
            next.push(comp);
        }
        self.run(i + 1, &next);
    }
}

/// Raw DFS leaves, before canonical deduplication. The first chosen set is
/// always `{1..m}` for its size `m`.
pub fn enumerate_raw(n: usize, homogeneous: Option<usize>) -> Result<Vec<AccessStructure>, ClassifyError> {
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(ClassifyError::BadN(n));
    }
    let all = all_players(n);
    let mut cands: Vec<u32> =
        (2..=all).step_by(2).filter(|x| (2..n).contains(&(x.count_ones() as usize))).collect();
    cands.sort_by_key(|&x| (x.count_ones(), x));
    let mut index_of = vec![usize::MAX; all as usize + 1];
    for (i, &c) in cands.iter().enumerate() {
        index_of[c as usize] = i;
    }
    let mut search = Search { n, all, cands, index_of, homogeneous, chosen: Vec::new(), found: Vec::new() };
    // Every (n−1)-set must end up authorized.
    let pending: Vec<u32> = (1..=n).map(|p| all & !(1 << p)).collect();
    search.run(0, &pending);
    let n = search.n;
    Ok(search.found.into_iter().map(|sets| AccessStructure::new(n, sets).expect("DFS keeps antichains")).collect())
}

/// All combinatorially valid minimal access structures on `n` players up
/// to relabeling, sorted by canonical mask list.
pub fn enumerate_structures(n: usize, homogeneous_only: bool) -> Result<Vec<AccessStructure>, ClassifyError> {
    enumerate_structures_with(n, homogeneous_only, Exec::default())
}

pub fn enumerate_structures_with(n: usize, homogeneous_only: bool, exec: Exec) -> Result<Vec<AccessStructure>, ClassifyError> {
    let mut raw = Vec::new();
    if homogeneous_only {
        for k in 2..n {
            raw.extend(enumerate_raw(n, Some(k))?);
        }
    } else {
        raw = enumerate_raw(n, None)?;
    }
    let canon = par::map_slice(exec, &raw, |a| a.canonical_form());
    let mut unique: BTreeMap<Vec<u32>, AccessStructure> = BTreeMap::new();
    for a in canon {
        unique.entry(a.minimal_sets().to_vec()).or_insert(a);
    }
    Ok(unique.into_values().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Filter {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Eliminated,
    Inconclusive,
    Skipped,
    Realized,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReasonStep {
    pub filter: Filter,
    pub outcome: Outcome,
    pub detail: String,
}

/// Evidence behind a verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    AmeTable { n_qubits: usize },
    /// Multipliers over the rows of `build_qss_lp(structure)`.
    Farkas { multipliers: Vec<BigRational> },
    UncoveredPair { pair: (usize, usize) },
    LemmaX2 { first: PlayerSet, second: PlayerSet },
    TooFewSets { count: usize },
    /// Five qubits (reference = 0) none of whose 4-subsets can be impure.
    FiveSubset { qubits: Vec<usize> },
    Shadow { t: Vec<usize>, a: BigRational, b: BigRational, interval: Interval },
    Realization { scheme: String, max_deviation: f64 },
}

impl Certificate {
    pub fn to_json(&self, structure: &AccessStructure) -> Value {
        let base = json!({ "minimal_authorized": structure.to_lists() });
        let body = match self {
            Certificate::AmeTable { n_qubits } => json!({
                "kind": "AME_TABLE",
                "claim": format!("AME({n_qubits},2) does not exist"),
            }),
            Certificate::Farkas { multipliers } => {
                let lp = build_qss_lp(structure).expect("certificate structures are valid");
                let mut v = FeasibilityResult::Infeasible { farkas: multipliers.clone() }.to_json_value(&lp);
                v["kind"] = json!("FARKAS");
                v["lp_rows"] = json!(lp.constraints().len());
                v
            }
            Certificate::UncoveredPair { pair } => json!({ "kind": "PAIR_COVERAGE", "pair": [pair.0, pair.1] }),
            Certificate::LemmaX2 { first, second } => {
                json!({ "kind": "LEMMA_X2", "first": first.players(), "second": second.players() })
            }
            Certificate::TooFewSets { count } => json!({ "kind": "MIN_SET_COUNT", "count": count, "needed": 7 }),
            Certificate::FiveSubset { qubits } => json!({ "kind": "FIVE_SUBSET", "qubits": qubits }),
            Certificate::Shadow { t, a, b, interval } => json!({
                "kind": "SHADOW",
                "t": t,
                "a": rational_string(a),
                "b": rational_string(b),
                "x_lo": rational_string(&interval.lo),
                "x_lo_open": interval.lo_open,
                "x_hi": rational_string(&interval.hi),
                "verdict": "VIOLATED",
            }),
            Certificate::Realization { scheme, max_deviation } => {
                json!({ "kind": "REALIZATION", "scheme": scheme, "max_deviation": max_deviation })
            }
        };
        let mut out = base;
        for (k, v) in body.as_object().expect("object").clone() {
            out[k] = v;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Realized { scheme: String },
    Eliminated { filter: Filter },
    Undecided { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Realized { .. } => "REALIZED",
            Verdict::Eliminated { .. } => "ELIMINATED",
            Verdict::Undecided { .. } => "UNDECIDED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StructureResult {
    pub structure: AccessStructure,
    pub verdict: Verdict,
    pub reasons: Vec<ReasonStep>,
    pub certificate: Option<Certificate>,
    /// Exact sample point when the LP was feasible.
    pub lp_sample: Option<Vec<BigRational>>,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub n_players: usize,
    pub homogeneous_only: bool,
    pub results: Vec<StructureResult>,
    pub wall_time_secs: f64,
}

impl ClassificationReport {
    pub fn survivors(&self) -> impl Iterator<Item = &StructureResult> {
        self.results.iter().filter(|r| !matches!(r.verdict, Verdict::Eliminated { .. }))
    }

    pub fn realized(&self) -> impl Iterator<Item = &StructureResult> {
        self.results.iter().filter(|r| matches!(r.verdict, Verdict::Realized { .. }))
    }

    pub fn undecided(&self) -> impl Iterator<Item = &StructureResult> {
        self.results.iter().filter(|r| matches!(r.verdict, Verdict::Undecided { .. }))
    }

    /// Enumerated total, eliminations per filter, realized and undecided.
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        out.insert("enumerated".to_string(), self.results.len());
        for r in &self.results {
            let key = match &r.verdict {
                Verdict::Eliminated { filter } => format!("eliminated_{filter}"),
                Verdict::Realized { .. } => "realized".into(),
                Verdict::Undecided { .. } => "undecided".into(),
            };
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }

    fn certificate_name(index: usize) -> String {
        format!("cert_{index:04}.json")
    }

    pub fn to_json(&self) -> Value {
        let structures: Vec<Value> = self
            .results
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut v = json!({
                    "minimal_authorized": r.structure.to_lists(),
                    "verdict": r.verdict.label(),
                    "reasons": r.reasons,
                });
                match &r.verdict {
                    Verdict::Eliminated { filter } => {
                        v["filter"] = json!(filter);
                        v["certificate"] = json!(Self::certificate_name(i));
                    }
                    Verdict::Realized { scheme } => v["scheme"] = json!(scheme),
                    Verdict::Undecided { reason } => v["reason"] = json!(reason),
                }
                v
            })
            .collect();
        json!({
            "n_players": self.n_players,
            "homogeneous_only": self.homogeneous_only,
            "counts": self.counts(),
            "wall_time_secs": self.wall_time_secs,
            "structures": structures,
        })
    }

    /// Writes `report.json` and one certificate file per eliminated
    /// structure.
    pub fn write_to(&self, dir: &Path) -> Result<(), ClassifyError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| ClassifyError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for (i, r) in self.results.iter().enumerate() {
            if let (Verdict::Eliminated { .. }, Some(cert)) = (&r.verdict, &r.certificate) {
                let path = dir.join(Self::certificate_name(i));
                let text = serde_json::to_string_pretty(&cert.to_json(&r.structure)).expect("json") + "\n";
                fs::write(&path, text).map_err(io(&path))?;
            }
        }
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(&self.to_json()).expect("json") + "\n";
        fs::write(&path, text).map_err(io(&path))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PipelineOptions {
    pub exec: Exec,
    pub solve: SolveOptions,
}

/// For a 3-uniform 8-qubit QSS state a 4-subset `B` is impure iff
/// `B \ {r}` is authorized (when `r ∈ B`) or unauthorized (when `r ∉ B`).
/// Every 5-subset must contain an impure 4-subset.
fn five_subset_witness(a: &AccessStructure) -> Option<Vec<usize>> {
    let full = low_bits(a.n_players() + 1);
    let impure = |b: u32| if b & 1 == 1 { a.is_authorized(b & !1) } else { !a.is_authorized(b) };
    (0..=full).filter(|m| m.count_ones() == 5).find_map(|five| {
        let mut bits = five;
        let mut any = false;
        while bits != 0 {
            let q = bits & bits.wrapping_neg();
            any |= impure(five & !q);
            bits &= bits - 1;
        }
        (!any).then(|| QubitSubset::from_mask(five).indices())
    })
}

fn step(reasons: &mut Vec<ReasonStep>, filter: Filter, outcome: Outcome, detail: impl Into<String>) {
    reasons.push(ReasonStep { filter, outcome, detail: detail.into() });
}

fn eliminated(
    structure: &AccessStructure,
    reasons: Vec<ReasonStep>,
    filter: Filter,
    certificate: Option<Certificate>,
    lp_sample: Option<Vec<BigRational>>,
) -> StructureResult {
    StructureResult { structure: structure.clone(), verdict: Verdict::Eliminated { filter }, reasons, certificate, lp_sample }
}

pub fn classify_structure(a: &AccessStructure, options: PipelineOptions) -> StructureResult {
    let n = a.n_players();
    let mut reasons = Vec::new();

    // F1
    if !a.is_combinatorially_valid() {
        let detail = if !a.satisfies_no_cloning() { "violates no-cloning" } else { "violates no-redundancy" };
        step(&mut reasons, Filter::F1, Outcome::Eliminated, detail);
        return eliminated(a, reasons, Filter::F1, None, None);
    }
    step(&mut reasons, Filter::F1, Outcome::Pass, "combinatorially valid");

    // F2
    match a.thresholdness() {
        Some(k) if 2 * k == n + 1 => match codebook::ame_exists(n + 1) {
            Some(AmeExistence::DoesNotExist) => {
                step(&mut reasons, Filter::F2, Outcome::Eliminated, format!("AME({},2) does not exist", n + 1));
                return eliminated(a, reasons, Filter::F2, Some(Certificate::AmeTable { n_qubits: n + 1 }), None);
            }
            Some(AmeExistence::Exists) => {
                step(&mut reasons, Filter::F2, Outcome::Pass, format!("AME({},2) exists", n + 1))
            }
            None => step(&mut reasons, Filter::F2, Outcome::Inconclusive, "outside the AME table"),
        },
        _ => step(&mut reasons, Filter::F2, Outcome::Skipped, "not a threshold structure"),
    }

    // F3
    let lp = build_qss_lp(a).expect("valid structure within LP size");
    let lp_sample = match lp_feasible_with(&lp, options.solve) {
        FeasibilityResult::Infeasible { farkas } => {
            step(&mut reasons, Filter::F3, Outcome::Eliminated, format!("entropy LP infeasible ({} rows)", lp.constraints().len()));
            return eliminated(a, reasons, Filter::F3, Some(Certificate::Farkas { multipliers: farkas }), None);
        }
        FeasibilityResult::Timeout => {
            step(&mut reasons, Filter::F3, Outcome::Inconclusive, "LP timed out");
            return StructureResult {
                structure: a.clone(),
                verdict: Verdict::Undecided { reason: "timeout".into() },
                reasons,
                certificate: None,
                lp_sample: None,
            };
        }
        FeasibilityResult::Feasible { sample } => {
            step(&mut reasons, Filter::F3, Outcome::Pass, "entropy LP feasible");
            Some(sample)
        }
    };

    // F4
    if n == 7 && a.homogeneity() == Some(3) {
        if let Some((&pair, _)) = a.pair_coverage().iter().find(|(_, &c)| c == 0) {
            step(&mut reasons, Filter::F4, Outcome::Eliminated, format!("pair {pair:?} in no minimal set"));
            return eliminated(a, reasons, Filter::F4, Some(Certificate::UncoveredPair { pair }), lp_sample);
        }
        if let Ok(X2Outcome::Violated { first, second }) = a.lemma_x2_filter() {
            step(&mut reasons, Filter::F4, Outcome::Eliminated, format!("no third set for {first} and {second}"));
            return eliminated(a, reasons, Filter::F4, Some(Certificate::LemmaX2 { first, second }), lp_sample);
        }
        let count = a.minimal_sets().len();
        if count < 7 {
            step(&mut reasons, Filter::F4, Outcome::Eliminated, format!("{count} minimal sets, need at least 7"));
            return eliminated(a, reasons, Filter::F4, Some(Certificate::TooFewSets { count }), lp_sample);
        }
        if let Some(qubits) = five_subset_witness(a) {
            step(&mut reasons, Filter::F4, Outcome::Eliminated, format!("every 4-subset of qubits {qubits:?} maximally mixed"));
            return eliminated(a, reasons, Filter::F4, Some(Certificate::FiveSubset { qubits }), lp_sample);
        }
        step(&mut reasons, Filter::F4, Outcome::Pass, "pair coverage, third-set, count and five-subset checks hold");
    } else {
        step(&mut reasons, Filter::F4, Outcome::Skipped, "applies to 3-homogeneous structures on 7 players");
    }

    // F5
    match forced_uniformity_pattern_bounded(a, options.solve, Some(1)).map_err(|e| match e {
        LpError::Pattern(UniformityError::AmbiguousUnknowns(k)) => format!("{k} unknown complement pairs"),
        other => other.to_string(),
    }) {
        Ok(pattern) if pattern.unknown_pairs() <= 1 => match find_shadow_violation(&pattern) {
            Ok(Some((t, form))) => {
                step(&mut reasons, Filter::F5, Outcome::Eliminated, format!("s_T = {}·x + {} < 0 at T = {t}", form.a, form.b));
                let certificate =
                    Certificate::Shadow { t: t.indices(), a: form.a, b: form.b, interval: pattern.interval().clone() };
                return eliminated(a, reasons, Filter::F5, Some(certificate), lp_sample);
            }
            Ok(None) => step(&mut reasons, Filter::F5, Outcome::Pass, "shadow inequality satisfiable"),
            Err(e) => step(&mut reasons, Filter::F5, Outcome::Inconclusive, e.to_string()),
        },
        Ok(pattern) => step(
            &mut reasons,
            Filter::F5,
            Outcome::Inconclusive,
            format!("{} unknown complement pairs", pattern.unknown_pairs()),
        ),
        Err(e) => step(&mut reasons, Filter::F5, Outcome::Inconclusive, e),
    }

    // F6
    if let Some((name, state)) = codebook::realization_for(a) {
        let report = verify_scheme(&state, a, DEFAULT_TOL).expect("sizes match");
        if report.pass {
            step(&mut reasons, Filter::F6, Outcome::Realized, format!("{name} state verifies"));
            return StructureResult {
                structure: a.clone(),
                verdict: Verdict::Realized { scheme: name.to_string() },
                reasons,
                certificate: Some(Certificate::Realization { scheme: name.into(), max_deviation: report.max_deviation }),
                lp_sample,
            };
        }
        step(&mut reasons, Filter::F6, Outcome::Inconclusive, format!("{name} state fails verification"));
    } else {
        step(&mut reasons, Filter::F6, Outcome::Inconclusive, "no known realization");
    }
    StructureResult {
        structure: a.clone(),
        verdict: Verdict::Undecided { reason: "survived all filters without a realization".into() },
        reasons,
        certificate: None,
        lp_sample,
    }
}

/// Runs every structure through the filters. Structures outside the
/// homogeneous classification on 7 players stay `UNDECIDED` when they
/// survive.
pub fn run_pipeline(structures: &[AccessStructure], n: usize, homogeneous_only: bool, options: PipelineOptions) -> ClassificationReport {
    let start = Instant::now();
    let mut results = par::map_slice(options.exec, structures, |a| classify_structure(a, options));
    for r in &mut results {
        if n == 7 && r.structure.homogeneity().is_none() && !matches!(r.verdict, Verdict::Eliminated { .. }) {
            r.verdict = Verdict::Undecided { reason: "non-homogeneous on 7 players: outside the classification".into() };
        }
    }
    ClassificationReport { n_players: n, homogeneous_only, results, wall_time_secs: start.elapsed().as_secs_f64() }
}

pub fn classify(n: usize, homogeneous_only: bool, options: PipelineOptions) -> Result<ClassificationReport, ClassifyError> {
    let start = Instant::now();
    let structures = enumerate_structures_with(n, homogeneous_only, options.exec)?;
    let mut report = run_pipeline(&structures, n, homogeneous_only, options);
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Every surviving 3-homogeneous structure on 7 players has exactly 7
/// minimal sets with each pair covered exactly once.
pub fn lemma_r7_audit(report: &ClassificationReport) -> bool {
    report
        .survivors()
        .filter(|r| r.structure.n_players() == 7 && r.structure.homogeneity() == Some(3))
        .all(|r| r7_counting_holds(&r.structure))
}

pub fn r7_counting_holds(a: &AccessStructure) -> bool {
    a.minimal_sets().len() == 7 && a.pair_coverage().values().all(|&c| c == 1)
}

/// Re-checks a Farkas certificate with the independent checker.
pub fn recheck_farkas(structure: &AccessStructure, multipliers: &[BigRational]) -> Result<(), String> {
    let lp = build_qss_lp(structure).map_err(|e| e.to_string())?;
    entropy_lp::certificate::check_farkas(&lp, multipliers).map_err(|e| e.to_string())
}

pub fn recheck_sample(structure: &AccessStructure, sample: &[BigRational]) -> Result<(), String> {
    let lp = build_qss_lp(structure).map_err(|e| e.to_string())?;
    entropy_lp::certificate::check_sample(&lp, sample).map_err(|e| e.to_string())
}
