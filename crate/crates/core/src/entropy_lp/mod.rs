//! Linear feasibility over entropy vectors of a pure `(n+1)`-qubit QSS
//! state.
//!
//! There is one variable `S(X)` per subset `X` of `{r} ∪ [n]`, indexed by
//! qubit mask (bit 0 is the reference). Apart from the purity rows, every
//! constraint is written in canonical variables `min(X, X^c)` with the `∅`
//! terms dropped. Infeasibility comes with exact Farkas multipliers and
//! feasibility with an exact sample point; `certificate` checks both
//! without touching the solver.

pub mod certificate;
mod simplex;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::access::{all_players, AccessStructure};
use crate::qstate::{low_bits, QubitSubset};
use crate::uniformity::{dyadic, Interval, PurityPattern, UniformityError};
use simplex::{Column, Outcome, Problem, Stop};

/// Largest player count accepted by `build_qss_lp`.
pub const MAX_LP_PLAYERS: usize = 7;
/// Default wall-clock budget per LP solve.
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(60);

#[derive(Debug, Error)]
pub enum LpError {
    #[error("LP too large: {0} players (limit {MAX_LP_PLAYERS})")]
    TooLarge(usize),
    #[error("access structure is not combinatorially valid")]
    InvalidStructure,
    #[error("LP is infeasible")]
    InfeasibleLP,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("solver exceeded its time limit")]
    Timeout,
    #[error("constraint references variable {var} but the LP has {n_vars}")]
    BadVariable { var: usize, n_vars: usize },
    #[error("bad rational {0:?}")]
    BadRational(String),
    #[error(transparent)]
    Pattern(#[from] UniformityError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tag {
    Purity,
    Cap,
    Subadd,
    ArakiLieb,
    Ssa,
    Rec,
    Sec,
    User,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::Purity => "PURITY",
            Tag::Cap => "CAP",
            Tag::Subadd => "SUBADD",
            Tag::ArakiLieb => "ARAKI_LIEB",
            Tag::Ssa => "SSA",
            Tag::Rec => "REC",
            Tag::Sec => "SEC",
            Tag::User => "USER",
        };
        f.write_str(s)
    }
}

/// `Σ coeffs[v]·S(v)  relation  rhs`, coefficients sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<(usize, BigRational)>,
    pub relation: Relation,
    pub rhs: BigRational,
    pub tag: Tag,
}

impl Constraint {
    pub fn new(coeffs: BTreeMap<usize, BigRational>, relation: Relation, rhs: BigRational, tag: Tag) -> Constraint {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Constraint { coeffs, relation, rhs, tag }
    }
}

/// A linear objective over the LP variables.
pub type LinearForm = BTreeMap<usize, BigRational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntropyLP {
    n_players: usize,
    n_vars: usize,
    constraints: Vec<Constraint>,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

impl EntropyLP {
    /// A general LP over `n_vars` free variables (no player semantics).
    pub fn from_constraints(n_vars: usize, constraints: Vec<Constraint>) -> Result<EntropyLP, LpError> {
        for c in &constraints {
            if let Some(&(var, _)) = c.coeffs.iter().find(|(v, _)| *v >= n_vars) {
                return Err(LpError::BadVariable { var, n_vars });
            }
        }
        Ok(EntropyLP { n_players: 0, n_vars, constraints })
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn push(&mut self, constraint: Constraint) -> Result<(), LpError> {
        if let Some(&(var, _)) = constraint.coeffs.iter().find(|(v, _)| *v >= self.n_vars) {
            return Err(LpError::BadVariable { var, n_vars: self.n_vars });
        }
        self.constraints.push(constraint);
        Ok(())
    }

    /// Rows per tag.
    pub fn counts(&self) -> BTreeMap<Tag, usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            *out.entry(c.tag).or_insert(0) += 1;
        }
        out
    }

    /// `S(X)` in canonical form: the smaller of `X`, `X^c`; `∅` and the full
    /// register give the zero form.
    pub fn entropy_form(&self, mask: u32) -> LinearForm {
        let mut form = LinearForm::new();
        add_entropy(&mut form, self.n_qubits(), mask, 1);
        form
    }

    /// [`Self::entropy_form`] for a subset that must lie in the register.
    pub fn subset_form(&self, subset: QubitSubset) -> Result<LinearForm, LpError> {
        if !subset.fits(self.n_qubits()) {
            return Err(LpError::BadVariable { var: subset.mask() as usize, n_vars: self.n_vars });
        }
        Ok(self.entropy_form(subset.mask()))
    }

    fn n_qubits(&self) -> usize {
        self.n_vars.trailing_zeros() as usize
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self.constraints.iter().map(constraint_json).collect();
        let doc = json!({
            "n_players": self.n_players,
            "n_variables": self.n_vars,
            "constraints": rows,
        });
        serde_json::to_string_pretty(&doc).expect("LP serializes")
    }

    pub fn from_json(text: &str) -> Result<EntropyLP, LpError> {
        let file: LpFile = serde_json::from_str(text)?;
        let mut constraints = Vec::with_capacity(file.constraints.len());
        for row in file.constraints {
            let mut coeffs = BTreeMap::new();
            for (v, c) in row.coeffs {
                *coeffs.entry(v).or_insert_with(BigRational::zero) += parse_rational(&c)?;
            }
            constraints.push(Constraint::new(coeffs, row.relation, parse_rational(&row.rhs)?, row.tag));
        }
        let mut lp = EntropyLP::from_constraints(file.n_variables, constraints)?;
        lp.n_players = file.n_players;
        Ok(lp)
    }
}

#[derive(Deserialize)]
struct LpFile {
    #[serde(default)]
    n_players: usize,
    n_variables: usize,
    constraints: Vec<RowFile>,
}

#[derive(Deserialize)]
struct RowFile {
    coeffs: Vec<(usize, String)>,
    relation: Relation,
    rhs: String,
    tag: Tag,
}

fn constraint_json(c: &Constraint) -> Value {
    let coeffs: Vec<Value> = c.coeffs.iter().map(|(v, a)| json!([v, rational_string(a)])).collect();
    json!({ "tag": c.tag, "coeffs": coeffs, "relation": c.relation, "rhs": rational_string(&c.rhs) })
}

/// `"p/q"`, or `"p"` for integers.
pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, LpError> {
    let bad = || LpError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

fn canonical(n_qubits: usize, mask: u32) -> u32 {
    mask.min(low_bits(n_qubits) & !mask)
}

fn add_entropy(form: &mut LinearForm, n_qubits: usize, mask: u32, coeff: i64) {
    let c = canonical(n_qubits, mask);
    if c == 0 {
        return;
    }
    let entry = form.entry(c as usize).or_insert_with(BigRational::zero);
    *entry += int(coeff);
    if entry.is_zero() {
        form.remove(&(c as usize));
    }
}

/// Normalized row: sorted terms, equality flag, right-hand side.
type RowKey = (Vec<(usize, BigRational)>, bool, BigRational);

struct Builder {
    n_qubits: usize,
    rows: Vec<Constraint>,
    seen: HashSet<RowKey>,
}

impl Builder {
    /// Adds `Σ terms  relation  rhs` unless an equivalent row is present.
    fn add(&mut self, terms: &[(u32, i64)], relation: Relation, rhs: i64, tag: Tag) {
        let mut form = LinearForm::new();
        for &(mask, c) in terms {
            add_entropy(&mut form, self.n_qubits, mask, c);
        }
        let rhs = int(rhs);
        if form.is_empty() {
            let holds = match relation {
                Relation::Le => !rhs.is_negative(),
                Relation::Ge => !rhs.is_positive(),
                Relation::Eq => rhs.is_zero(),
            };
            if holds {
                return;
            }
        }
        // Inequalities are keyed in `≥` orientation, equalities with a
        // positive leading coefficient.
        let flip = match relation {
            Relation::Le => true,
            Relation::Ge => false,
            Relation::Eq => form.values().next().is_some_and(|c| c.is_negative()),
        };
        let key_form: Vec<(usize, BigRational)> =
            form.iter().map(|(v, c)| (*v, if flip { -c } else { c.clone() })).collect();
        let key_rhs = if flip { -&rhs } else { rhs.clone() };
        if self.seen.insert((key_form, relation == Relation::Eq, key_rhs)) {
            self.rows.push(Constraint::new(form, relation, rhs, tag));
        }
    }
}

/// Entropy LP of a combinatorially valid structure on at most 7 players.
pub fn build_qss_lp(a: &AccessStructure) -> Result<EntropyLP, LpError> {
    let n = a.n_players();
    if n > MAX_LP_PLAYERS {
        return Err(LpError::TooLarge(n));
    }
    if !a.is_combinatorially_valid() {
        return Err(LpError::InvalidStructure);
    }
    let nq = n + 1;
    let full = low_bits(nq);
    let n_vars = 1usize << nq;
    let mut rows = Vec::new();

    let mut zero = BTreeMap::new();
    zero.insert(0usize, int(1));
    rows.push(Constraint::new(zero, Relation::Eq, int(0), Tag::Purity));
    for x in 0..=full {
        let c = full & !x;
        if x < c {
            let mut form = BTreeMap::new();
            form.insert(x as usize, int(1));
            form.insert(c as usize, int(-1));
            rows.push(Constraint::new(form, Relation::Eq, int(0), Tag::Purity));
        }
    }

    let mut b = Builder { n_qubits: nq, rows: Vec::new(), seen: HashSet::new() };
    for q in 0..nq {
        b.add(&[(1 << q, 1)], Relation::Ge, 0, Tag::Cap);
        b.add(&[(1 << q, 1)], Relation::Le, 1, Tag::Cap);
    }
    for x in 1..=full {
        // Disjoint pairs (x, y) with x < y.
        let rest = full & !x;
        let mut y = rest;
        while y != 0 {
            if x < y {
                b.add(&[(x, 1), (y, 1), (x | y, -1)], Relation::Ge, 0, Tag::Subadd);
                b.add(&[(x | y, 1), (x, -1), (y, 1)], Relation::Ge, 0, Tag::ArakiLieb);
                b.add(&[(x | y, 1), (y, -1), (x, 1)], Relation::Ge, 0, Tag::ArakiLieb);
            }
            y = (y - 1) & rest;
        }
    }
    for x in 1..=full {
        for y in x + 1..=full {
            let i = x & y;
            if i == 0 || i == x || i == y {
                continue;
            }
            b.add(&[(x, 1), (y, 1), (x | y, -1), (i, -1)], Relation::Ge, 0, Tag::Ssa);
        }
    }
    for set in (2..=all_players(n)).step_by(2) {
        if a.is_authorized(set) {
            b.add(&[(1, 1), (set, 1), (set | 1, -1)], Relation::Eq, 2, Tag::Rec);
        } else {
            b.add(&[(1, 1), (set, 1), (set | 1, -1)], Relation::Eq, 0, Tag::Sec);
        }
    }
    rows.extend(b.rows);
    Ok(EntropyLP { n_players: n, n_vars, constraints: rows })
}

/// Solver settings; `time_limit = None` disables the deadline.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { time_limit: Some(DEFAULT_TIME_LIMIT) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityResult {
    /// One value per LP variable.
    Feasible { sample: Vec<BigRational> },
    /// One multiplier per constraint: `≥ 0` on `≤` rows, `≤ 0` on `≥` rows,
    /// free on `=` rows, with `Σ λ_i a_i = 0` and `Σ λ_i b_i < 0`.
    Infeasible { farkas: Vec<BigRational> },
    Timeout,
}

impl FeasibilityResult {
    pub fn status(&self) -> &'static str {
        match self {
            FeasibilityResult::Feasible { .. } => "FEASIBLE",
            FeasibilityResult::Infeasible { .. } => "INFEASIBLE",
            FeasibilityResult::Timeout => "UNDECIDED",
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, FeasibilityResult::Infeasible { .. })
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }

    /// Sparse multipliers as `[[row, "p/q"], ...]`, or the sample as
    /// `["p/q", ...]`.
    pub fn to_json_value(&self, lp: &EntropyLP) -> Value {
        match self {
            FeasibilityResult::Feasible { sample } => json!({
                "status": "FEASIBLE",
                "sample": sample.iter().map(rational_string).collect::<Vec<_>>(),
            }),
            FeasibilityResult::Infeasible { farkas } => {
                let rows: Vec<Value> = farkas
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| !l.is_zero())
                    .map(|(i, l)| {
                        let c = &lp.constraints[i];
                        json!({
                            "row": i,
                            "multiplier": rational_string(l),
                            "constraint": constraint_json(c),
                        })
                    })
                    .collect();
                json!({ "status": "INFEASIBLE", "farkas": rows })
            }
            FeasibilityResult::Timeout => json!({ "status": "UNDECIDED", "reason": "timeout" }),
        }
    }
}

/// Rows in `≤` orientation after scaling to integers: `ã·x ≤ b̃`.
struct ScaledRow {
    source: usize,
    /// Original multiplier per unit of this column.
    unit: BigRational,
    coeffs: Vec<(usize, BigInt)>,
    rhs: BigInt,
}

struct Presolved {
    /// Active constraint indices.
    active: Vec<usize>,
    /// `(row, var)` pairs in elimination order.
    eliminated: Vec<(usize, usize)>,
}

/// Drops equality rows holding a variable that occurs nowhere else.
fn presolve(lp: &EntropyLP, protected: &BTreeSet<usize>) -> Presolved {
    let mut alive = vec![true; lp.constraints.len()];
    let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); lp.n_vars];
    for (i, c) in lp.constraints.iter().enumerate() {
        for (v, _) in &c.coeffs {
            occurrences[*v].push(i);
        }
    }
    let mut count: Vec<usize> = occurrences.iter().map(Vec::len).collect();
    let mut eliminated = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..lp.n_vars {
            if count[v] != 1 || protected.contains(&v) {
                continue;
            }
            let row = *occurrences[v].iter().find(|&&r| alive[r]).expect("live occurrence");
            if lp.constraints[row].relation != Relation::Eq {
                continue;
            }
            alive[row] = false;
            for (u, _) in &lp.constraints[row].coeffs {
                count[*u] -= 1;
            }
            eliminated.push((row, v));
            changed = true;
        }
    }
    let active = (0..lp.constraints.len()).filter(|&i| alive[i]).collect();
    Presolved { active, eliminated }
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a BigRational>) -> BigInt {
    values.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

fn scaled_rows(lp: &EntropyLP, active: &[usize]) -> Vec<ScaledRow> {
    let mut out = Vec::new();
    for &i in active {
        let c = &lp.constraints[i];
        let scale = lcm_of_denominators(c.coeffs.iter().map(|(_, a)| a).chain(std::iter::once(&c.rhs)));
        let to_int = |r: &BigRational| (r * &scale).to_integer();
        let le: Vec<(usize, BigInt)> = c.coeffs.iter().map(|(v, a)| (*v, to_int(a))).collect();
        let ge: Vec<(usize, BigInt)> = le.iter().map(|(v, a)| (*v, -a)).collect();
        let scale_q = BigRational::from_integer(scale.clone());
        if matches!(c.relation, Relation::Le | Relation::Eq) {
            out.push(ScaledRow { source: i, unit: scale_q.clone(), coeffs: le, rhs: to_int(&c.rhs) });
        }
        if matches!(c.relation, Relation::Ge | Relation::Eq) {
            out.push(ScaledRow { source: i, unit: -scale_q, coeffs: ge, rhs: -to_int(&c.rhs) });
        }
    }
    out
}

/// Dense indices for the variables used by the active rows.
fn variable_index(rows: &[ScaledRow], extra: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
    let used: BTreeSet<usize> = rows.iter().flat_map(|r| r.coeffs.iter().map(|(v, _)| *v)).chain(extra).collect();
    used.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
}

fn deadline(options: SolveOptions) -> Option<Instant> {
    options.time_limit.map(|d| Instant::now() + d)
}

fn back_substitute(lp: &EntropyLP, eliminated: &[(usize, usize)], x: &mut [BigRational]) {
    for &(row, v) in eliminated.iter().rev() {
        let c = &lp.constraints[row];
        let mut rest = c.rhs.clone();
        let mut own = BigRational::zero();
        for (u, a) in &c.coeffs {
            if *u == v {
                own = a.clone();
            } else {
                rest -= a * &x[*u];
            }
        }
        x[v] = rest / own;
    }
}

pub fn lp_feasible(lp: &EntropyLP) -> FeasibilityResult {
    lp_feasible_with(lp, SolveOptions::default())
}

/// Solves the Farkas system `Σ y_j ã_j = 0`, `Σ y_j b̃_j = −1`, `y ≥ 0`.
/// A solution is an infeasibility certificate; otherwise the phase-one
/// multipliers `(z, τ)` give the sample `x = z/τ`.
pub fn lp_feasible_with(lp: &EntropyLP, options: SolveOptions) -> FeasibilityResult {
    let pre = presolve(lp, &BTreeSet::new());
    let rows = scaled_rows(lp, &pre.active);
    let index = variable_index(&rows, std::iter::empty());
    let m = index.len() + 1;
    let columns: Vec<Column> = rows
        .iter()
        .map(|r| {
            let mut col: Column = r.coeffs.iter().map(|(v, a)| (index[v], a.clone())).collect();
            if !r.rhs.is_zero() {
                col.push((m - 1, -&r.rhs));
            }
            col
        })
        .collect();
    let mut rhs = vec![BigInt::zero(); m];
    rhs[m - 1] = BigInt::one();
    let problem = Problem { rows: m, columns: &columns, rhs };
    match simplex::solve(&problem, None, deadline(options)) {
        Err(Stop::Timeout) => FeasibilityResult::Timeout,
        Ok(Outcome::Solved { y, .. }) => {
            let mut farkas = vec![BigRational::zero(); lp.constraints.len()];
            for (r, yj) in rows.iter().zip(y) {
                if !yj.is_zero() {
                    farkas[r.source] += &r.unit * BigRational::from_integer(yj);
                }
            }
            FeasibilityResult::Infeasible { farkas: normalize(farkas) }
        }
        Ok(Outcome::Infeasible { duals }) => {
            let tau = BigRational::from_integer(duals[m - 1].clone());
            let mut x = vec![BigRational::zero(); lp.n_vars];
            for (&v, &i) in &index {
                x[v] = BigRational::from_integer(duals[i].clone()) / &tau;
            }
            back_substitute(lp, &pre.eliminated, &mut x);
            FeasibilityResult::Feasible { sample: x }
        }
        Ok(Outcome::Unbounded) => unreachable!("no phase 2 without costs"),
    }
}

/// Divides the multipliers by the gcd of their numerators.
fn normalize(values: Vec<BigRational>) -> Vec<BigRational> {
    let l = lcm_of_denominators(values.iter());
    let ints: Vec<BigInt> = values.iter().map(|v| (v * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return values;
    }
    ints.into_iter().map(|v| BigRational::new(v, g.clone())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

pub fn lp_extremum(lp: &EntropyLP, objective: &LinearForm, direction: Direction) -> Result<BigRational, LpError> {
    lp_extremum_with(lp, objective, direction, SolveOptions::default())
}

/// `min c·x = −min{b̃·y : Σ y_j ã_j = −c, y ≥ 0}`; `max` negates `c`.
pub fn lp_extremum_with(
    lp: &EntropyLP,
    objective: &LinearForm,
    direction: Direction,
    options: SolveOptions,
) -> Result<BigRational, LpError> {
    if let Some((&var, _)) = objective.iter().find(|(v, _)| **v >= lp.n_vars) {
        return Err(LpError::BadVariable { var, n_vars: lp.n_vars });
    }
    let c: LinearForm = match direction {
        Direction::Min => objective.clone(),
        Direction::Max => objective.iter().map(|(v, a)| (*v, -a)).collect(),
    };
    let protected: BTreeSet<usize> = c.keys().copied().collect();
    let pre = presolve(lp, &protected);
    let rows = scaled_rows(lp, &pre.active);
    let index = variable_index(&rows, protected.iter().copied());
    let m = index.len();
    let scale = lcm_of_denominators(c.values());
    let scale_q = BigRational::from_integer(scale.clone());
    let mut target = vec![BigInt::zero(); m];
    for (v, a) in &c {
        target[index[v]] = -(a * &scale_q).to_integer();
    }
    // Rows with a negative target are negated so the rhs is nonnegative.
    let sign: Vec<bool> = target.iter().map(|t| t.is_negative()).collect();
    let columns: Vec<Column> = rows
        .iter()
        .map(|r| {
            r.coeffs
                .iter()
                .map(|(v, a)| {
                    let i = index[v];
                    (i, if sign[i] { -a } else { a.clone() })
                })
                .collect()
        })
        .collect();
    let rhs: Vec<BigInt> = target.iter().map(|t| t.abs()).collect();
    let costs: Vec<BigInt> = rows.iter().map(|r| r.rhs.clone()).collect();
    let problem = Problem { rows: m, columns: &columns, rhs };
    match simplex::solve(&problem, Some(&costs), deadline(options)) {
        Err(Stop::Timeout) => Err(LpError::Timeout),
        Ok(Outcome::Infeasible { .. }) => Err(match lp_feasible_with(lp, options) {
            FeasibilityResult::Infeasible { .. } => LpError::InfeasibleLP,
            FeasibilityResult::Timeout => LpError::Timeout,
            FeasibilityResult::Feasible { .. } => LpError::Unbounded,
        }),
        Ok(Outcome::Unbounded) => Err(LpError::InfeasibleLP),
        Ok(Outcome::Solved { det, objective, .. }) => {
            let num = objective.expect("costs were given");
            let dual_min = BigRational::new(num, det) / scale_q;
            Ok(match direction {
                Direction::Min => -dual_min,
                Direction::Max => dual_min,
            })
        }
    }
}

/// `(min, max)` of a form.
pub fn lp_range(lp: &EntropyLP, objective: &LinearForm, options: SolveOptions) -> Result<(BigRational, BigRational), LpError> {
    let lo = lp_extremum_with(lp, objective, Direction::Min, options)?;
    let hi = lp_extremum_with(lp, objective, Direction::Max, options)?;
    Ok((lo, hi))
}

/// Purity pattern implied by the LP: subsets whose entropy is forced to
/// `|X|` are maximally mixed, the rest share the unknown. The unknown's
/// lower bound `2^{-|X|}` is strict when the LP caps `S(X)` below `|X|`.
pub fn forced_uniformity_pattern(a: &AccessStructure) -> Result<PurityPattern, LpError> {
    forced_uniformity_pattern_with(a, SolveOptions::default())
}

pub fn forced_uniformity_pattern_with(a: &AccessStructure, options: SolveOptions) -> Result<PurityPattern, LpError> {
    forced_uniformity_pattern_bounded(a, options, None)
}

/// Like [`forced_uniformity_pattern_with`], but gives up with
/// `AmbiguousUnknowns` as soon as more than `max_unknown_pairs` complement
/// pairs are not forced. Larger subsets are scanned first.
pub fn forced_uniformity_pattern_bounded(
    a: &AccessStructure,
    options: SolveOptions,
    max_unknown_pairs: Option<usize>,
) -> Result<PurityPattern, LpError> {
    let lp = build_qss_lp(a)?;
    if !lp_feasible_with(&lp, options).is_feasible() {
        return Err(LpError::InfeasibleLP);
    }
    let nq = a.n_players() + 1;
    let full = low_bits(nq);
    let mut masks: Vec<u32> = (1..full).filter(|x| x.count_ones() as usize * 2 <= nq).collect();
    masks.sort_by_key(|&x| (std::cmp::Reverse(x.count_ones()), x));
    let mut fixed = BTreeMap::new();
    let mut unknown = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    let mut strict = Vec::new();
    let mut sizes = BTreeSet::new();
    for x in masks {
        let k = x.count_ones() as usize;
        let comp = full & !x;
        // Half-size complements share one LP variable.
        if k * 2 == nq && comp < x {
            if fixed.contains_key(&comp) {
                fixed.insert(x, dyadic(k));
            } else {
                unknown.insert(x);
            }
            continue;
        }
        let form = lp.entropy_form(x);
        let lo = lp_extremum_with(&lp, &form, Direction::Min, options)?;
        if lo == int(k as i64) {
            fixed.insert(x, dyadic(k));
            continue;
        }
        pairs.insert(x.min(comp));
        if max_unknown_pairs.is_some_and(|m| pairs.len() > m) {
            return Err(LpError::Pattern(UniformityError::AmbiguousUnknowns(pairs.len())));
        }
        let hi = lp_extremum_with(&lp, &form, Direction::Max, options)?;
        strict.push(hi < int(k as i64));
        unknown.insert(x);
        sizes.insert(k);
    }
    // 2^{-k} bounds every unknown only for the largest size present.
    let interval = match sizes.iter().next_back() {
        Some(&k) => Interval { lo: dyadic(k), lo_open: sizes.len() == 1 && strict.iter().all(|&s| s), hi: int(1) },
        None => Interval { lo: int(1), lo_open: false, hi: int(1) },
    };
    Ok(PurityPattern::new(nq, fixed, unknown, interval)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditLemma {
    /// `S(A), S(B) ≥ 1` for unauthorized `A`, `B` with authorized union.
    SingleBound,
    /// `S({i} ∪ X) = S({i}) + S(X)` for `X ⊆ B`, `B` unauthorized, `B ∪ {i}`
    /// authorized.
    Additivity,
    /// `S(A) + S(B) − S(A∪B) − S(A∩B) ≥ 2` for authorized `A`, `B` with
    /// unauthorized intersection.
    TwoBitGap,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditEntry {
    pub lemma: AuditLemma,
    /// Player sets involved (1-indexed), in the order named above.
    pub sets: Vec<Vec<usize>>,
    pub min: String,
    pub max: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub all_hold: bool,
}

fn players_of(mask: u32) -> Vec<usize> {
    crate::access::PlayerSet(mask).players()
}

/// Checks the derived entropy lemmas over the LP polytope, instantiated on
/// minimal authorized sets.
pub fn derived_lemma_audit(a: &AccessStructure) -> Result<AuditReport, LpError> {
    derived_lemma_audit_with(a, SolveOptions::default())
}

pub fn derived_lemma_audit_with(a: &AccessStructure, options: SolveOptions) -> Result<AuditReport, LpError> {
    let lp = build_qss_lp(a)?;
    if !lp_feasible_with(&lp, options).is_feasible() {
        return Err(LpError::InfeasibleLP);
    }
    let nq = a.n_players() + 1;
    let form = |terms: &[(u32, i64)]| {
        let mut f = LinearForm::new();
        for &(m, c) in terms {
            add_entropy(&mut f, nq, m, c);
        }
        f
    };
    let mut entries = Vec::new();
    let mut record = |lemma, sets: Vec<u32>, f: LinearForm, check: &dyn Fn(&BigRational, &BigRational) -> bool| {
        let (lo, hi) = lp_range(&lp, &f, options)?;
        entries.push(AuditEntry {
            lemma,
            sets: sets.into_iter().map(players_of).collect(),
            holds: check(&lo, &hi),
            min: rational_string(&lo),
            max: rational_string(&hi),
        });
        Ok::<(), LpError>(())
    };
    let minimal = a.minimal_sets().to_vec();
    for &m in &minimal {
        // Proper nonempty splits m = s ∪ (m \ s), each unordered pair once.
        let mut s = (m - 1) & m;
        while s != 0 {
            let t = m & !s;
            if s < t {
                for part in [s, t] {
                    record(AuditLemma::SingleBound, vec![part, m & !part], form(&[(part, 1)]), &|lo, _| *lo >= int(1))?;
                }
            }
            s = (s - 1) & m;
        }
        for i in 1..=a.n_players() {
            if m >> i & 1 == 0 {
                continue;
            }
            let b = m & !(1 << i);
            let mut x = b;
            while x != 0 {
                let f = form(&[(x | 1 << i, 1), (1 << i, -1), (x, -1)]);
                record(AuditLemma::Additivity, vec![b, 1 << i, x], f, &|lo, hi| lo.is_zero() && hi.is_zero())?;
                x = (x - 1) & b;
            }
        }
    }
    for (k, &p) in minimal.iter().enumerate() {
        for &q in &minimal[k + 1..] {
            let f = form(&[(p, 1), (q, 1), (p | q, -1), (p & q, -1)]);
            record(AuditLemma::TwoBitGap, vec![p, q], f, &|lo, _| *lo >= int(2))?;
        }
    }
    let all_hold = entries.iter().all(|e| e.holds);
    Ok(AuditReport { entries, all_hold })
}

/// `S(X)` for a qubit subset, as an objective.
pub fn entropy_objective(n_players: usize, subset: QubitSubset) -> LinearForm {
    let mut f = LinearForm::new();
    add_entropy(&mut f, n_players + 1, subset.mask(), 1);
    f
}
