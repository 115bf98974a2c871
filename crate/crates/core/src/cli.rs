//! Command-line front end. Each subcommand reads JSON inputs, calls one
//! library operation and prints JSON on stdout.
//!
//! Exit codes: 0 success or passing verdict, 1 failing verdict, 2 usage or
//! input-format error, 3 capacity exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::access::AccessStructure;
use crate::classify::{self, ClassifyError, PipelineOptions, Verdict};
use crate::codebook::{self, CodebookError};
use crate::entropy_lp::{
    self, build_qss_lp, lp_feasible_with, lp_range, rational_string, EntropyLP, FeasibilityResult,
    LpError, SolveOptions,
};
use crate::formats::{self, render, FormatError};
use crate::par::Exec;
use crate::qssverify::{self, VerifyError, DEFAULT_TOL};
use crate::qstate::{PureState, QStateError, QubitSubset, MIXED_TOL};
use crate::uniformity::{self, ShadowVerdict, UniformityError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qsskit", version, about = "Pure qubit quantum secret sharing: verification and classification")]
struct Cli {
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check I(R:A) against an access structure for every share subset.
    VerifyState {
        /// State file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        state: String,
        #[arg(long)]
        access: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Recover the minimal authorized sets realized by a QSS state.
    DeriveAccess {
        #[arg(long, default_value = "-")]
        state: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// k-uniformity of a state; without `--k`, the largest such k.
    CheckUniform {
        #[arg(long, default_value = "-")]
        state: String,
        #[arg(long)]
        k: Option<usize>,
        /// Tolerance on purity.
        #[arg(long, default_value_t = MIXED_TOL)]
        tol: f64,
    },
    /// Shadow sums of a state, or the shadow obstruction of a purity
    /// pattern (from a pattern file or forced by an access structure's LP).
    Shadow {
        #[arg(long, conflicts_with_all = ["pattern", "access"])]
        state: Option<String>,
        #[arg(long, conflicts_with = "access")]
        pattern: Option<PathBuf>,
        #[arg(long)]
        access: Option<PathBuf>,
        /// Comma-separated 0-indexed qubits (qubit 0 is the reference).
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        t: Option<Vec<usize>>,
    },
    /// Exact feasibility of the entropy LP, with sample or Farkas
    /// certificate.
    LpFeasible {
        #[arg(long, required_unless_present = "lp")]
        access: Option<PathBuf>,
        /// A serialized LP instead of an access structure.
        #[arg(long, conflicts_with = "access")]
        lp: Option<PathBuf>,
        /// Seconds per LP solve.
        #[arg(long, default_value_t = 60)]
        time_limit: u64,
        /// Report the exact range of S(X) for these 0-indexed qubits instead.
        #[arg(long, value_delimiter = ',')]
        range: Option<Vec<usize>>,
    },
    /// Enumerate structures on n players and run the filter pipeline.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        homogeneous: bool,
        /// Allow the non-homogeneous enumeration on 7 players.
        #[arg(long)]
        full_n7: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        time_limit: u64,
    },
    /// Emit built-in states and structures.
    Builtin {
        /// five-qubit | steane | fano | threshold:<n>:<k>
        #[arg(long)]
        name: String,
        /// Directory for the JSON files; stdout gets the primary document.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy of every nonempty proper subset, in bits.
    EntropyProfile {
        #[arg(long, default_value = "-")]
        state: String,
    },
}

/// A failure that ends the command without a verdict.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, message: e.to_string() }
}

fn capacity(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_CAPACITY, message: e.to_string() }
}

impl From<QStateError> for Failure {
    fn from(e: QStateError) -> Self {
        match e {
            QStateError::CapacityExceeded { .. } => capacity(e),
            other => usage(other),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::State(s) => s.into(),
            other => usage(other),
        }
    }
}

impl From<UniformityError> for Failure {
    fn from(e: UniformityError) -> Self {
        match e {
            UniformityError::State(s) => s.into(),
            other => usage(other),
        }
    }
}

impl From<LpError> for Failure {
    fn from(e: LpError) -> Self {
        match e {
            LpError::TooLarge(_) => capacity(e),
            other => usage(other),
        }
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        usage(e)
    }
}

impl From<CodebookError> for Failure {
    fn from(e: CodebookError) -> Self {
        usage(e)
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        usage(e)
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
}

impl Io<'_> {
    fn read_text(&mut self, source: &str) -> Result<String, Failure> {
        if source == "-" {
            let mut text = String::new();
            self.stdin.read_to_string(&mut text).map_err(|e| usage(format!("stdin: {e}")))?;
            return Ok(text);
        }
        read_file(Path::new(source))
    }

    fn state(&mut self, source: &str) -> Result<PureState, Failure> {
        let text = self.read_text(source)?;
        Ok(PureState::from_json(&text)?)
    }

    fn emit(&mut self, v: Value) -> Result<(), Failure> {
        self.out.write_all(render(v).as_bytes()).map_err(|e| usage(format!("stdout: {e}")))
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn access_file(path: &Path) -> Result<AccessStructure, Failure> {
    AccessStructure::from_json(&read_file(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn to_value(text: &str) -> Value {
    serde_json::from_str(text).expect("library emits valid JSON")
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn exit_for(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn dispatch(cli: Cli, io: &mut Io<'_>) -> Result<i32, Failure> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match cli.command {
        Command::VerifyState { state, access, tol } => {
            let state = io.state(&state)?;
            let a = access_file(&access)?;
            let report = qssverify::verify_scheme_with(&state, &a, tol, exec)?;
            io.emit(serde_json::to_value(&report).expect("report serializes"))?;
            Ok(exit_for(report.pass))
        }
        Command::DeriveAccess { state, tol } => {
            let state = io.state(&state)?;
            match qssverify::derive_access_with(&state, tol, exec) {
                Ok(a) => {
                    io.emit(to_value(&a.to_json()))?;
                    Ok(EXIT_OK)
                }
                Err(VerifyError::NotAQSSState { subset, value, detail }) => {
                    io.emit(json!({
                        "error": "not a QSS state",
                        "subset": subset.players(),
                        "mutual_information_bits": value,
                        "detail": detail,
                    }))?;
                    Ok(EXIT_FAIL)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::CheckUniform { state, k, tol } => {
            let state = io.state(&state)?;
            match k {
                Some(k) => {
                    let r = uniformity::is_k_uniform_tol(&state, k, tol, exec)?;
                    io.emit(formats::k_uniformity_json(k, &r))?;
                    Ok(exit_for(r.uniform))
                }
                None => {
                    let c = uniformity::max_uniformity_tol(&state, tol, exec)?;
                    io.emit(formats::uniformity_certificate_json(&c))?;
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Shadow { state, pattern, access, t } => {
            let t = t.map(QubitSubset::from_indices);
            let pattern = match (pattern, access) {
                (Some(path), _) => formats::parse_pattern(&read_file(&path)?)?,
                (None, Some(path)) => entropy_lp::forced_uniformity_pattern(&access_file(&path)?)?,
                (None, None) => {
                    let state = io.state(state.as_deref().unwrap_or("-"))?;
                    if let Some(t) = t {
                        if !t.fits(state.n_qubits()) {
                            return Err(usage(format!("T = {t} is outside the register")));
                        }
                    }
                    let rows = formats::shadow_rows(&state, t, exec)?;
                    io.emit(Value::Array(rows))?;
                    return Ok(EXIT_OK);
                }
            };
            let found = match t {
                Some(t) => Some((t, uniformity::shadow_obstruction(&pattern, t)?)),
                None => uniformity::find_shadow_violation(&pattern)?,
            };
            match found {
                Some((t, form)) => {
                    let mut v = formats::affine_json(t, &form);
                    v["interval"] = formats::interval_json(pattern.interval());
                    io.emit(v)?;
                    Ok(exit_for(form.verdict != ShadowVerdict::Violated))
                }
                None => {
                    io.emit(json!({ "verdict": ShadowVerdict::Inconclusive, "interval": formats::interval_json(pattern.interval()) }))?;
                    Ok(EXIT_OK)
                }
            }
        }
        Command::LpFeasible { access, lp, time_limit, range } => {
            let lp = match (access, lp) {
                (Some(path), _) => build_qss_lp(&access_file(&path)?)?,
                (None, Some(path)) => EntropyLP::from_json(&read_file(&path)?)?,
                (None, None) => return Err(usage("one of --access or --lp is required")),
            };
            let options = SolveOptions { time_limit: Some(Duration::from_secs(time_limit)) };
            if let Some(qubits) = range {
                let objective = lp.subset_form(QubitSubset::from_indices(qubits))?;
                let (lo, hi) = lp_range(&lp, &objective, options)?;
                io.emit(json!({ "min": rational_string(&lo), "max": rational_string(&hi) }))?;
                return Ok(EXIT_OK);
            }
            let result = lp_feasible_with(&lp, options);
            let mut v = result.to_json_value(&lp);
            v["rows"] = json!(lp.constraints().len());
            v["counts"] = json!(lp.counts());
            io.emit(v)?;
            Ok(exit_for(matches!(result, FeasibilityResult::Feasible { .. })))
        }
        Command::Classify { n, homogeneous, full_n7, out, time_limit } => {
            if n == classify::MAX_N && !homogeneous && !full_n7 {
                return Err(usage("n = 7 needs --homogeneous, or --full-n7 for the unclassified full enumeration"));
            }
            let options = PipelineOptions { exec, solve: SolveOptions { time_limit: Some(Duration::from_secs(time_limit)) } };
            let report = classify::classify(n, homogeneous, options)?;
            report.write_to(&out)?;
            let survivors: Vec<Value> = report
                .survivors()
                .map(|r| {
                    let detail = match &r.verdict {
                        Verdict::Realized { scheme } => scheme.clone(),
                        Verdict::Undecided { reason } => reason.clone(),
                        Verdict::Eliminated { .. } => unreachable!("survivors are not eliminated"),
                    };
                    json!({ "minimal_authorized": r.structure.to_lists(), "verdict": r.verdict.label(), "detail": detail })
                })
                .collect();
            io.emit(json!({
                "n_players": n,
                "counts": report.counts(),
                "survivors": survivors,
                "report": out.join("report.json").display().to_string(),
            }))?;
            Ok(EXIT_OK)
        }
        Command::Builtin { name, out } => {
            let b = codebook::builtin(&name)?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
                for (file, text) in b.files() {
                    write_file(&dir.join(file), &render(to_value(&text)))?;
                }
            }
            io.emit(to_value(&b.primary_json()))?;
            Ok(EXIT_OK)
        }
        Command::EntropyProfile { state } => {
            let state = io.state(&state)?;
            let profile = qssverify::entropy_profile_with(&state, exec)?;
            io.emit(formats::profile_json(&profile))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
    T: Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut io = Io { stdin, out };
    match dispatch(cli, &mut io) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
