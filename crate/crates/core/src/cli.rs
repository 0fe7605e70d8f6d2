//! Command-line front end. Every subcommand parses its inputs, calls the
//! library once and prints the result; analysis results are JSON on stdout,
//! failures a JSON object `{"error", "message"}` on stderr.
//!
//! Exit codes: 0 ok, 2 usage, 3 data error, 4 limit exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bounds::{self, BoundInputs, BoundsError, CeilingMap};
use crate::boolfourier::{self, BoolFunction, FourierError};
use crate::cipher::{self, CipherContainer, CipherError, Keystream};
use crate::galois::Field;
use crate::infotheory::{uniform_rational, JointPmf, PmfFixture};
use crate::lsc::LscCode;
use crate::secrecy::{self, SecrecyError, MAX_PROFILE_N};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

/// Significant digits for printed reals.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "lsckit", version, about = "List-source codes, symbol secrecy and estimation bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write random key bytes from the operating system.
    Keygen(KeygenArgs),
    /// Encrypt a file into an LSC container.
    Encrypt(EncryptArgs),
    /// Decrypt an LSC container.
    Decrypt(DecryptArgs),
    /// Exact secrecy analysis.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Estimation-error bounds (JSON in, JSON out).
    Bounds(BoundsArgs),
    /// Fourier analysis of Boolean functions.
    #[command(subcommand)]
    Fourier(FourierCommand),
}

#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    /// Field order (prime, or a power of two up to 2^16).
    #[arg(long, default_value_t = 256)]
    pub q: u64,
    /// Block length in symbols.
    #[arg(long, default_value_t = 255)]
    pub n: usize,
    /// Coset dimension; each block hides among q^k candidates.
    #[arg(long, default_value_t = 64)]
    pub k: usize,
}

impl CodeArgs {
    fn code(&self) -> Result<LscCode, CliError> {
        let field = Field::with_order(self.q).map_err(|e| CliError::usage(e.to_string()))?;
        LscCode::new(&field, self.n, self.k).map_err(|e| CliError::usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    /// Number of bytes.
    #[arg(long, conflicts_with = "for_input", required_unless_present = "for_input")]
    pub bytes: Option<usize>,
    /// Size the key for a strict one-time pad over this plaintext.
    #[arg(long = "for", value_name = "FILE")]
    pub for_input: Option<PathBuf>,
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Phase {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeystreamArg {
    /// One-time pad; the key must cover the whole phase-2 payload.
    Strict,
    /// Deterministic expansion of a short key (testing only).
    Test,
}

impl From<KeystreamArg> for Keystream {
    fn from(k: KeystreamArg) -> Self {
        match k {
            KeystreamArg::Strict => Keystream::StrictOtp,
            KeystreamArg::Test => Keystream::Test,
        }
    }
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Key file (not needed for --phase 1).
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Phase::Both)]
    pub phase: Phase,
    #[arg(long, value_enum, default_value_t = KeystreamArg::Strict)]
    pub keystream: KeystreamArg,
    #[command(flatten)]
    pub code: CodeArgs,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    /// Full container, or the phase-2 container when --phase1 is given.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    /// Separately delivered phase-1 container.
    #[arg(long)]
    pub phase1: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Symbol-secrecy profile of a joint pmf or of an MDS code with uniform
    /// source.
    Secrecy(SecrecyArgs),
}

#[derive(Debug, Args)]
pub struct SecrecyArgs {
    /// Joint pmf JSON: {"x_arity": [...], "z_arity": m, "probs": [...]}.
    #[arg(long, conflicts_with = "mds", required_unless_present = "mds")]
    pub pmf: Option<PathBuf>,
    /// MDS code parameters q n k.
    #[arg(long, num_args = 3, value_names = ["Q", "N", "K"])]
    pub mds: Option<Vec<u64>>,
    /// Also decide μ₀ with exact rational arithmetic (--mds only).
    #[arg(long)]
    pub exact: bool,
    /// Report μ_ε at these ε values.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    /// z_n(a, b) with its primal/dual certificate.
    Quad,
    /// MMSE lower bounds from correlations and ceilings.
    Mmse,
    /// Error-probability bounds for one-bit targets.
    Onebit,
    /// Function secrecy from a dual symbol-secrecy profile.
    Funsec,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(value_enum)]
    pub kind: BoundKind,
    /// JSON input file; "-" reads stdin.
    #[arg(long, short, default_value = "-")]
    pub input: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum FourierCommand {
    /// Fourier spectrum of a truth table ("n" then a line of +/-).
    Transform {
        #[arg(long, short, default_value = "-")]
        input: PathBuf,
    },
    /// Generalized one-time-pad leakage bound (JSON input).
    Otpbound {
        #[arg(long, short, default_value = "-")]
        input: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub extra: Option<Value>,
}

impl CliError {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        CliError { code, kind, message: message.into(), extra: None }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, "usage", message)
    }

    fn data(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(EXIT_DATA, kind, message)
    }

    fn limit(message: impl Into<String>) -> Self {
        Self::new(EXIT_LIMIT, "too_large", message)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind, "message": self.message });
        if let (Some(Value::Object(extra)), Value::Object(map)) = (&self.extra, &mut v) {
            map.extend(extra.clone());
        }
        v
    }
}

impl From<CipherError> for CliError {
    fn from(e: CipherError) -> Self {
        let kind = match &e {
            CipherError::BadContainer(_) => "bad_container",
            CipherError::BadKey(_) | CipherError::KeyOutOfRange { .. } => "bad_key",
            CipherError::KeyTooShort { .. } => "key_too_short",
            CipherError::CorruptPhase(_) => "corrupt_phase",
            CipherError::BadParameters(_) => "bad_parameters",
            CipherError::Phase2Missing { .. } => "phase2_missing",
            CipherError::Lsc(_) | CipherError::Galois(_) => "bad_parameters",
        };
        let mut err = CliError::data(kind, e.to_string());
        if let CipherError::Phase2Missing { q, k, list_size } = &e {
            err.message = format!("phase 2 missing; residual list size q^k = {q}^{k} = {list_size}");
            err.extra = Some(json!({ "q": q, "k": k, "list_size": list_size.to_string() }));
        }
        err
    }
}

impl From<SecrecyError> for CliError {
    fn from(e: SecrecyError) -> Self {
        match e {
            SecrecyError::TooLarge(m) => CliError::limit(m),
            other => CliError::data("invalid_input", other.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::data("invalid_input", e.to_string())
    }
}

impl From<FourierError> for CliError {
    fn from(e: FourierError) -> Self {
        match e {
            FourierError::TooLarge(_) => CliError::limit(e.to_string()),
            other => CliError::data("invalid_input", other.to_string()),
        }
    }
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Applies [`round_significant`] to every float in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::data("io", format!("stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path)?)
        .map_err(|_| CliError::data("io", format!("{}: not UTF-8", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::data("schema", e.to_string()))
}

fn keygen(args: &KeygenArgs) -> Result<Option<Value>, CliError> {
    let len = match (&args.bytes, &args.for_input) {
        (Some(n), _) => *n,
        (None, Some(path)) => {
            let plaintext_len = fs::metadata(path)
                .map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?
                .len() as usize;
            cipher::phase2_len(&args.code.code()?, plaintext_len)?.max(1)
        }
        (None, None) => return Err(CliError::usage("give --bytes or --for")),
    };
    let mut key = vec![0u8; len];
    rand::rngs::OsRng.fill_bytes(&mut key);
    write_bytes(&args.output, &key)?;
    Ok(None)
}

fn encrypt(args: &EncryptArgs) -> Result<Option<Value>, CliError> {
    let code = args.code.code()?;
    let plaintext = read_bytes(&args.input)?;
    let container = if args.phase == Phase::One {
        cipher::phase1_encrypt(&code, &plaintext)?
    } else {
        let key_path = args
            .key
            .as_ref()
            .ok_or_else(|| CliError::usage("--key is required for phase 2"))?;
        let key = read_bytes(key_path)?;
        let full = cipher::two_phase_encrypt(&code, &plaintext, &key, args.keystream.into())?;
        if args.phase == Phase::Two {
            full.phase2_only()
        } else {
            full
        }
    };
    write_bytes(&args.output, &container.to_bytes())?;
    Ok(None)
}

fn decrypt(args: &DecryptArgs) -> Result<Option<Value>, CliError> {
    let mut container = CipherContainer::from_bytes(&read_bytes(&args.input)?)?;
    if let Some(p1) = &args.phase1 {
        let phase1 = CipherContainer::from_bytes(&read_bytes(p1)?)?;
        container = CipherContainer::merge(&phase1, &container)?;
    }
    let key = read_bytes(&args.key)?;
    let plaintext = cipher::two_phase_decrypt(&container, &key)?;
    write_bytes(&args.output, &plaintext)?;
    Ok(None)
}

fn analyze_secrecy(args: &SecrecyArgs) -> Result<Option<Value>, CliError> {
    let mut exact_mu0 = None;
    let profile = if let Some(mds) = &args.mds {
        let (q, n, k) = (mds[0], mds[1] as usize, mds[2] as usize);
        if n > MAX_PROFILE_N {
            return Err(CliError::limit(format!(
                "n = {n} exceeds the subset-enumeration limit of {MAX_PROFILE_N}"
            )));
        }
        let field = Field::with_order(q).map_err(|e| CliError::usage(e.to_string()))?;
        let code = LscCode::new(&field, n, k).map_err(|e| CliError::usage(e.to_string()))?;
        let source = vec![1.0 / q as f64; q as usize];
        let pmf = secrecy::lsc_leakage_channel(&code, &source)?;
        if args.exact {
            let exact = secrecy::lsc_leakage_channel_exact(&code, &uniform_rational(q as u32))?;
            exact_mu0 = Some(secrecy::exact_mu0(&exact)?);
        }
        secrecy::secrecy_profile(&pmf)?
    } else {
        if args.exact {
            return Err(CliError::usage("--exact applies to --mds"));
        }
        let path = args.pmf.as_ref().expect("clap enforces --pmf or --mds");
        let fixture: PmfFixture = parse_json(path)?;
        if fixture.x_arity.len() > MAX_PROFILE_N {
            return Err(CliError::limit(format!(
                "n = {} exceeds the subset-enumeration limit of {MAX_PROFILE_N}",
                fixture.x_arity.len()
            )));
        }
        let pmf = JointPmf::from_fixture(&fixture).map_err(|e| CliError::data("invalid_input", e.to_string()))?;
        secrecy::secrecy_profile(&pmf)?
    };
    let mut out = serde_json::to_value(profile.to_json()).expect("serializable");
    if let Some(m) = exact_mu0 {
        out["mu0_exact"] = json!(m);
    }
    if !args.eps.is_empty() {
        out["mu"] = args
            .eps
            .iter()
            .map(|&e| json!({ "eps": e, "mu": profile.mu(e) }))
            .collect();
    }
    Ok(Some(out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadInput {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MmseInput {
    rho: Vec<f64>,
    lambda: Vec<f64>,
    #[serde(default)]
    t: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OnebitInput {
    rho: Vec<f64>,
    alpha: Vec<f64>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum CeilingArg {
    AsStated,
    ErrorToCorrelation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunsecInput {
    /// Truth table as a string of 2^n characters from {+, -}.
    function: String,
    eps_star: Vec<f64>,
    #[serde(default)]
    ceiling: Option<CeilingArg>,
}

fn function_from_string(table: &str) -> Result<BoolFunction, CliError> {
    let len = table.chars().count();
    if !len.is_power_of_two() {
        return Err(CliError::data("schema", format!("field `function`: length {len} is not a power of two")));
    }
    let n = len.trailing_zeros();
    BoolFunction::parse_truth_table(&format!("{n}\n{table}\n"))
        .map_err(|e| CliError::data("schema", format!("field `function`: {e}")))
}

fn run_bounds(args: &BoundsArgs) -> Result<Option<Value>, CliError> {
    let out = match args.kind {
        BoundKind::Quad => {
            let QuadInput { a, b } = parse_json(&args.input)?;
            let sol = bounds::solve_quadratic(&a, &b)?;
            json!({
                "value": sol.value,
                "k_star": sol.k_star,
                "primal": sol.primal,
                "dual": sol.dual,
            })
        }
        BoundKind::Mmse => {
            let MmseInput { rho, lambda, t } = parse_json(&args.input)?;
            let inputs = BoundInputs::new(rho, lambda)?;
            let mut out = json!({
                "b_m": bounds::b_m(&inputs),
                "rho0": inputs.rho0(),
                "mmse_lower": bounds::mmse_lower_loose(&inputs),
            });
            if let Some(t) = t {
                out["mmse_lower_tight"] = json!(bounds::mmse_lower_tight(&inputs, t)?);
            }
            out
        }
        BoundKind::Onebit => {
            let OnebitInput { rho, alpha } = parse_json(&args.input)?;
            let inputs = BoundInputs::from_errors(rho.clone(), &alpha)?;
            let mut out = json!({
                "b_m": bounds::b_m(&inputs),
                "error_lower": bounds::onebit_error_lower(&inputs),
            });
            if rho.len() == 1 {
                out["simple_error_lower"] = json!(bounds::simple_error_lower(rho[0], alpha[0])?);
                out["triangle_error_lower"] = json!(bounds::triangle_error_lower(rho[0], alpha[0])?);
            }
            out
        }
        BoundKind::Funsec => {
            let input: FunsecInput = parse_json(&args.input)?;
            let f = function_from_string(&input.function)?;
            let spectrum = boolfourier::fourier_transform(&f)?;
            let map = match input.ceiling.unwrap_or(CeilingArg::ErrorToCorrelation) {
                CeilingArg::AsStated => CeilingMap::AsStated,
                CeilingArg::ErrorToCorrelation => CeilingMap::ErrorToCorrelation,
            };
            let b = bounds::function_secrecy_bound(&spectrum, &input.eps_star, map)?;
            json!({
                "error_lower": b.value(),
                "ceiling_bound": b.ceiling_bound,
                "mu0_bound": b.mu0_bound,
            })
        }
    };
    Ok(Some(out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OtpInput {
    function: String,
    #[serde(default)]
    key_pmf: Option<Vec<f64>>,
    #[serde(default)]
    key_eps: Option<f64>,
}

fn run_fourier(cmd: &FourierCommand) -> Result<Option<Value>, CliError> {
    match cmd {
        FourierCommand::Transform { input } => {
            let f = BoolFunction::parse_truth_table(&read_text(input)?)?;
            let spectrum = boolfourier::fourier_transform(&f)?;
            let coefficients: Vec<Value> = spectrum
                .support(boolfourier::ZERO_TOLERANCE)
                .map(|(s, c)| json!({ "subset": s, "coefficient": c }))
                .collect();
            Ok(Some(json!({
                "n": spectrum.n(),
                "coefficients": coefficients,
                "norm_sq": spectrum.norm_sq(),
            })))
        }
        FourierCommand::Otpbound { input } => {
            let OtpInput { function, key_pmf, key_eps } = parse_json(input)?;
            let f = function_from_string(&function)?;
            let spectrum = boolfourier::fourier_transform(&f)?;
            let attenuation = match (key_pmf, key_eps) {
                (Some(p), None) => boolfourier::channel_attenuation(&p)?,
                (None, Some(e)) => boolfourier::iid_attenuation(f.n(), e)?,
                _ => {
                    return Err(CliError::data("schema", "give exactly one of `key_pmf`, `key_eps`"));
                }
            };
            let b = boolfourier::otp_mi_bound(&spectrum, &attenuation)?;
            Ok(Some(json!({
                "mi_bound": b.bits,
                "exactly_zero": b.exactly_zero,
                "mmse": boolfourier::keyed_mmse(&spectrum, &attenuation)?,
            })))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Option<Value>, CliError> {
    match &cli.command {
        Command::Keygen(a) => keygen(a),
        Command::Encrypt(a) => encrypt(a),
        Command::Decrypt(a) => decrypt(a),
        Command::Analyze(AnalyzeCommand::Secrecy(a)) => analyze_secrecy(a),
        Command::Bounds(a) => run_bounds(a),
        Command::Fourier(c) => run_fourier(c),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("LSCKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if a pool already exists, in which case it stays as is
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the CLI, writing results to `stdout` and errors to `stderr`;
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let err = CliError::usage(e.to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.to_json());
            return EXIT_USAGE;
        }
    };
    configure_threads();
    match dispatch(&cli) {
        Ok(Some(v)) => {
            let text = serde_json::to_string_pretty(&round_json(v)).expect("serializable");
            let _ = writeln!(stdout, "{text}");
            EXIT_OK
        }
        Ok(None) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.code
        }
    }
}
