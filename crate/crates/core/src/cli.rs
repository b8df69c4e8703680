//! Command-line front end: spec files, subcommands and output.
//!
//! Spec files are JSON documents
//! `{"breakpoints": [..], "coefficients": [..], "alpha_breakpoints": [..], "alpha_values": [..]}`.
//! Results go to `--out`, else to `$MULTISTABLE_OUTPUT_DIR/<command>.<ext>`,
//! else to stdout. Every float is written with 17 significant digits.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::asymptote::{ratio_scan, TailAsymptote};
use crate::charfn::CharExponent;
use crate::error::Error;
use crate::fixtures;
use crate::function_space::{ExponentFunction, MultistableSpec, StepFunction};
use crate::inversion::Inverter;
use crate::prooflab::{build_mollifier, lemmas, Mollifier};
use crate::quadrature::{OscillationPolicy, QuadratureConfig, Truncation};
use crate::sampler;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MULTISTABLE_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
/// A verification ran but its inequality did not hold, or another failure.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SPEC: i32 = 3;
pub const EXIT_ACCURACY: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// On-disk form of a [`MultistableSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub breakpoints: Vec<f64>,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub alpha_breakpoints: Vec<f64>,
    pub alpha_values: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read spec file {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed spec file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("{field} must be strictly increasing, but entry {index} is {value} after {previous}")]
    Unsorted {
        field: &'static str,
        index: usize,
        value: f64,
        previous: f64,
    },
    #[error("alpha_values[{index}] = {value} is outside (0, 2); the tail asymptote needs 0 < a <= alpha <= b < 2")]
    ExponentRange { index: usize, value: f64 },
    #[error("{field}[{index}] = {value} is not finite")]
    NonFinite {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{0}")]
    Shape(String),
}

impl SpecFile {
    pub fn from_spec(spec: &MultistableSpec) -> Self {
        Self {
            breakpoints: spec.f().breakpoints().to_vec(),
            coefficients: spec.f().coefficients().to_vec(),
            alpha_breakpoints: spec.alpha().breakpoints().to_vec(),
            alpha_values: spec.alpha().values().to_vec(),
        }
    }

    /// Validates the fields and refines `f` against `α`.
    pub fn into_spec(self) -> Result<MultistableSpec, SpecError> {
        for (field, xs) in [
            ("breakpoints", &self.breakpoints),
            ("coefficients", &self.coefficients),
            ("alpha_breakpoints", &self.alpha_breakpoints),
            ("alpha_values", &self.alpha_values),
        ] {
            if let Some((index, &value)) = xs.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                return Err(SpecError::NonFinite { field, index, value });
            }
        }
        for (field, xs) in [
            ("breakpoints", &self.breakpoints),
            ("alpha_breakpoints", &self.alpha_breakpoints),
        ] {
            if let Some(i) = (1..xs.len()).find(|&i| xs[i] <= xs[i - 1]) {
                return Err(SpecError::Unsorted {
                    field,
                    index: i,
                    value: xs[i],
                    previous: xs[i - 1],
                });
            }
        }
        if let Some((index, &value)) = self
            .alpha_values
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0 && **a < 2.0))
        {
            return Err(SpecError::ExponentRange { index, value });
        }
        if self.alpha_values.len() != self.alpha_breakpoints.len() + 1 {
            return Err(SpecError::Shape(format!(
                "alpha_values needs alpha_breakpoints.len() + 1 = {} entries, got {}",
                self.alpha_breakpoints.len() + 1,
                self.alpha_values.len()
            )));
        }
        let empty = self.breakpoints.is_empty() && self.coefficients.is_empty();
        if !empty && self.breakpoints.len() != self.coefficients.len() + 1 {
            return Err(SpecError::Shape(format!(
                "breakpoints needs coefficients.len() + 1 = {} entries, got {}",
                self.coefficients.len() + 1,
                self.breakpoints.len()
            )));
        }
        let f = StepFunction::new(self.breakpoints, self.coefficients).map_err(|e| SpecError::Shape(e.to_string()))?;
        let alpha = ExponentFunction::new(self.alpha_breakpoints, self.alpha_values)
            .map_err(|e| SpecError::Shape(e.to_string()))?;
        Ok(MultistableSpec::new(f, alpha))
    }
}

pub fn parse_spec_str(text: &str) -> Result<MultistableSpec, SpecError> {
    serde_json::from_str::<SpecFile>(text)?.into_spec()
}

pub fn parse_spec(path: &Path) -> Result<MultistableSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_spec_str(&text)
}

/// The spec as a JSON document that [`parse_spec_str`] reads back exactly.
pub fn spec_to_json(spec: &MultistableSpec) -> String {
    to_json(&SpecFile::from_spec(spec))
}

/// Writes floats as `{:.16e}`.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(value))
    }
}

/// Compact JSON with every float at 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).expect("serialising to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Parser)]
#[command(
    name = "multistable",
    version,
    about = "Densities, tails and tail asymptotics of multistable laws"
)]
pub struct Cli {
    /// Output file (default: $MULTISTABLE_OUTPUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Rotated,
    ZeroSplit,
    Panels,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub abs_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 200_000)]
    pub max_panels: usize,
    /// Fixed θ cut-off for the real-axis policies.
    #[arg(long, global = true)]
    pub truncation: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Policy::Rotated)]
    pub policy: Policy,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        let cfg = QuadratureConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            truncation: self.truncation.map_or(Truncation::Auto, Truncation::At),
            max_panels: self.max_panels,
            oscillation: match self.policy {
                Policy::Rotated => OscillationPolicy::RotatedContour,
                Policy::ZeroSplit => OscillationPolicy::ZeroSplitAccelerated,
                Policy::Panels => OscillationPolicy::AdaptivePanels,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SpecSource {
    /// JSON spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Built-in fixture (cauchy, constant_0.6, constant_1.4, constant_1.8,
    /// two_exponent, mixed, mixed_quasinorm, three_cell).
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
pub struct OptionalSpecSource {
    /// JSON spec file (default: every unit-sphere fixture).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    Csv,
    /// Little-endian f64.
    Bin,
    Quantiles,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quasinorm ‖f‖_α.
    Quasinorm {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Characteristic function on a θ grid.
    Cf {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
        theta: Vec<f64>,
    },
    /// Density on an x grid.
    Density {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
    },
    /// P(|I(f)| > λ) on a λ grid.
    Tail {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, required = true, value_delimiter = ',')]
        lambda: Vec<f64>,
    },
    /// Tail asymptote T_f(λ) and its log-log slope.
    Asymptote {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, required = true, value_delimiter = ',')]
        lambda: Vec<f64>,
    },
    /// P(|I(f)| > λ) / T_f(λ) on a λ grid.
    RatioScan {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long, required = true, value_delimiter = ',')]
        lambda: Vec<f64>,
    },
    /// Numerical checks of the intermediate inequalities.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Monte Carlo draws of I(f).
    Sample {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
        format: SampleFormat,
        /// Probabilities for `--format quantiles`.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.001,0.01,0.05,0.25,0.5,0.75,0.95,0.99,0.999"
        )]
        probs: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct MollifierArgs {
    #[arg(long, default_value_t = 1.5)]
    pub q: f64,
    /// Table points per period of the mollifier.
    #[arg(long, default_value_t = crate::prooflab::DEFAULT_TABLE_RESOLUTION)]
    pub resolution: usize,
    /// Also write the raw per-point values as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Override the default grid.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// η(q^{j₀+1}) ≤ P(|I|>λ) ≤ η(q^{j₀-1}); grid over λ.
    Lemma1 {
        #[command(flatten)]
        source: OptionalSpecSource,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// 0 ≤ u - 1 + e^{-u} ≤ u²/2 on random u ∈ [0, 10³].
    Lemma2 {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// q^{-γ} h_q(γ) ≤ C(γ) ≤ q^γ h_q(γ); grid over γ.
    Lemma3 {
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// ρ bounds and τ - ρ ≤ η ≤ τ + ρ; grid over ξ.
    Lemma4 {
        #[command(flatten)]
        source: OptionalSpecSource,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// T(qξ) ≤ τ(ξ) ≤ T(ξ/q); grid over ξ.
    Lemma5 {
        #[command(flatten)]
        source: OptionalSpecSource,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// η/T sandwich; grid over λ.
    Lemma6 {
        #[command(flatten)]
        source: OptionalSpecSource,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Scaling sandwiches of T_f on random specs.
    Remarks {
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// ∫(1-φ̂_q(δx))D_f(x)dx = ∫φ_q(θ)(1-Φ_f(δθ))dθ; grid over δ.
    Parseval {
        #[command(flatten)]
        source: OptionalSpecSource,
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// ∫φ_q = 1 and stabilisation of ∫(1+|θ|)^γ|φ_q|; grid over γ.
    Moments {
        #[command(flatten)]
        moll: MollifierArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Every check above with default grids.
    All {
        #[command(flatten)]
        moll: MollifierArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const LEMMA1_GRID: [f64; 4] = [10.0, 50.0, 100.0, 1000.0];
const LEMMA4_GRID: [f64; 3] = [10.0, 100.0, 1000.0];
const LEMMA5_GRID: [f64; 3] = [1.0, 10.0, 100.0];
const LEMMA6_GRID: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];
const PARSEVAL_GRID: [f64; 2] = [0.1, 1.0];
const MOMENT_GRID: [f64; 3] = [0.0, 2.0, 3.9];

fn lemma3_grid() -> Vec<f64> {
    (3..=19).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("verification failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Numeric(Error::Domain(_)) => EXIT_USAGE,
            CliError::Spec(_) => EXIT_SPEC,
            CliError::Numeric(Error::Accuracy { .. }) => EXIT_ACCURACY,
            CliError::Io { .. } => EXIT_IO,
            CliError::Failed(_) => EXIT_FAILURE,
        }
    }
}

/// A command's result, ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Csv(String),
    Json(String),
    Bytes(Vec<u8>),
}

impl Output {
    fn extension(&self) -> &'static str {
        match self {
            Output::Csv(_) => "csv",
            Output::Json(_) => "json",
            Output::Bytes(_) => "bin",
        }
    }

    fn bytes(&self) -> &[u8] {
        match self {
            Output::Csv(s) | Output::Json(s) => s.as_bytes(),
            Output::Bytes(b) => b,
        }
    }
}

fn load(spec: &Option<PathBuf>, fixture: &Option<String>) -> Result<Option<MultistableSpec>, CliError> {
    match (spec, fixture) {
        (Some(path), _) => Ok(Some(parse_spec(path)?)),
        (None, Some(name)) => fixtures::by_name(name)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("unknown fixture `{name}`"))),
        (None, None) => Ok(None),
    }
}

fn load_required(source: &SpecSource) -> Result<MultistableSpec, CliError> {
    load(&source.spec, &source.fixture)?.ok_or_else(|| CliError::Usage("a spec is required".into()))
}

/// The named spec, or the whole unit-sphere family.
fn load_cases(source: &OptionalSpecSource) -> Result<Vec<(String, MultistableSpec)>, CliError> {
    Ok(match load(&source.spec, &source.fixture)? {
        Some(spec) => vec![(source.fixture.clone().unwrap_or_else(|| "spec".into()), spec)],
        None => fixtures::unit_sphere_family()
            .into_iter()
            .map(|(n, s)| (n.to_string(), s))
            .collect(),
    })
}

fn sorted_grid(mut xs: Vec<f64>) -> Result<Vec<f64>, CliError> {
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("grid value {x} is not finite")));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    Ok(xs)
}

fn grid_or(grid: &GridArgs, default: &[f64]) -> Result<Vec<f64>, CliError> {
    sorted_grid(grid.grid.clone().unwrap_or_else(|| default.to_vec()))
}

fn mollifier(args: &MollifierArgs) -> Result<Mollifier, CliError> {
    Ok(build_mollifier(args.q, args.resolution)?)
}

fn csv<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [f64; N]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Reports keyed by case, with the overall verdict.
struct Verdict {
    json: Value,
    csv_rows: Vec<(String, Value)>,
    failures: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            json: Value::Object(Map::new()),
            csv_rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn add<T: Serialize>(&mut self, label: &str, report: &T) {
        let value = report_value(report);
        if value.get("pass") == Some(&Value::Bool(false)) {
            self.failures.push(label.to_string());
        }
        if let Some(Value::Array(points)) = value.get("points") {
            self.csv_rows
                .extend(points.iter().map(|p| (label.to_string(), p.clone())));
        }
        if let Value::Object(m) = &mut self.json {
            m.insert(label.to_string(), value);
        }
    }

    fn nest(&mut self, key: &str, inner: Verdict) {
        self.failures
            .extend(inner.failures.into_iter().map(|f| format!("{key}/{f}")));
        self.csv_rows
            .extend(inner.csv_rows.into_iter().map(|(l, v)| (format!("{key}/{l}"), v)));
        if let Value::Object(m) = &mut self.json {
            m.insert(key.to_string(), inner.json);
        }
    }

    fn csv(&self) -> String {
        let mut columns: Vec<String> = Vec::new();
        for (_, row) in &self.csv_rows {
            if let Value::Object(m) = row {
                for k in m.keys() {
                    if !columns.contains(k) {
                        columns.push(k.clone());
                    }
                }
            }
        }
        let mut out = format!("case,{}\n", columns.join(","));
        for (label, row) in &self.csv_rows {
            let cells: Vec<String> = columns
                .iter()
                .map(|c| match row.get(c) {
                    Some(Value::Number(n)) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
                    Some(Value::Null) | None => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                })
                .collect();
            out.push_str(&format!("{label},{}\n", cells.join(",")));
        }
        out
    }
}

fn per_case<T: Serialize>(
    source: &OptionalSpecSource,
    mut f: impl FnMut(&MultistableSpec) -> Result<T, Error>,
) -> Result<Verdict, CliError> {
    let mut v = Verdict::new();
    for (name, spec) in load_cases(source)? {
        v.add(&name, &f(&spec)?);
    }
    Ok(v)
}

fn report_value<T: Serialize>(report: &T) -> Value {
    serde_json::to_value(report).expect("reports serialise")
}

fn lemma2_samples(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..=1000.0)).collect()
}

fn run_verify(check: &VerifyCommand, cfg: &QuadratureConfig) -> Result<(Verdict, Option<PathBuf>), CliError> {
    use VerifyCommand::*;
    let single = |label: &str, report: Value| {
        let mut v = Verdict::new();
        v.add(label, &report);
        v
    };
    Ok(match check {
        Lemma1 { source, moll, grid } => {
            let m = mollifier(moll)?;
            let g = grid_or(grid, &LEMMA1_GRID)?;
            (
                per_case(source, |s| lemmas::verify_lemma1(s, &m, &g, cfg))?,
                moll.csv.clone(),
            )
        }
        Lemma2 { samples, seed } => {
            let r = lemmas::lemma2_report(&lemma2_samples(*samples, *seed))?;
            (single("lemma2", report_value(&r)), None)
        }
        Lemma3 { moll, grid } => {
            let m = mollifier(moll)?;
            let r = lemmas::verify_lemma3(&m, &grid_or(grid, &lemma3_grid())?)?;
            (single("lemma3", report_value(&r)), moll.csv.clone())
        }
        Lemma4 { source, moll, grid } => {
            let m = mollifier(moll)?;
            let g = grid_or(grid, &LEMMA4_GRID)?;
            (
                per_case(source, |s| lemmas::verify_lemma4(s, &m, &g))?,
                moll.csv.clone(),
            )
        }
        Lemma5 { source, moll, grid } => {
            let m = mollifier(moll)?;
            let g = grid_or(grid, &LEMMA5_GRID)?;
            (
                per_case(source, |s| lemmas::verify_lemma5(s, &m, &g))?,
                moll.csv.clone(),
            )
        }
        Lemma6 { source, moll, grid } => {
            let m = mollifier(moll)?;
            let g = grid_or(grid, &LEMMA6_GRID)?;
            (
                per_case(source, |s| lemmas::verify_lemma6(s, &m, &g))?,
                moll.csv.clone(),
            )
        }
        Remarks { draws, seed } => (
            single("remarks", report_value(&lemmas::verify_remarks(*draws, *seed)?)),
            None,
        ),
        Parseval { source, moll, grid } => {
            let m = mollifier(moll)?;
            let g = grid_or(grid, &PARSEVAL_GRID)?;
            let v = per_case(source, |s| {
                let points = g
                    .iter()
                    .map(|&d| lemmas::verify_parseval(s, &m, d, cfg))
                    .collect::<Result<Vec<_>, _>>()?;
                let pass = points.iter().all(|p| p.pass);
                Ok(serde_json::json!({ "points": points, "pass": pass }))
            })?;
            (v, moll.csv.clone())
        }
        Moments { moll, grid } => {
            let m = mollifier(moll)?;
            let r = lemmas::verify_moments(&m, &grid_or(grid, &MOMENT_GRID)?)?;
            (single("moments", report_value(&r)), moll.csv.clone())
        }
        All { moll, seed } => {
            let args = |g: Option<Vec<f64>>| GridArgs { grid: g };
            let none = || OptionalSpecSource {
                spec: None,
                fixture: None,
            };
            let margs = || MollifierArgs {
                q: moll.q,
                resolution: moll.resolution,
                csv: None,
            };
            let mut all = Verdict::new();
            let checks: Vec<(&str, VerifyCommand)> = vec![
                (
                    "lemma1",
                    Lemma1 {
                        source: none(),
                        moll: margs(),
                        grid: args(None),
                    },
                ),
                (
                    "lemma2",
                    Lemma2 {
                        samples: 100_000,
                        seed: *seed,
                    },
                ),
                (
                    "lemma3",
                    Lemma3 {
                        moll: margs(),
                        grid: args(None),
                    },
                ),
                (
                    "lemma4",
                    Lemma4 {
                        source: none(),
                        moll: margs(),
                        grid: args(None),
                    },
                ),
                (
                    "lemma5",
                    Lemma5 {
                        source: none(),
                        moll: margs(),
                        grid: args(None),
                    },
                ),
                (
                    "lemma6",
                    Lemma6 {
                        source: none(),
                        moll: margs(),
                        grid: args(None),
                    },
                ),
                (
                    "remarks",
                    Remarks {
                        draws: 1000,
                        seed: *seed,
                    },
                ),
                (
                    "parseval",
                    Parseval {
                        source: none(),
                        moll: margs(),
                        grid: args(None),
                    },
                ),
                (
                    "moments",
                    Moments {
                        moll: margs(),
                        grid: args(None),
                    },
                ),
            ];
            for (key, c) in &checks {
                all.nest(key, run_verify(c, cfg)?.0);
            }
            (all, moll.csv.clone())
        }
    })
}

fn quantiles(mut draws: Vec<f64>, probs: &[f64]) -> Result<String, CliError> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Usage(format!("quantile probability {p} is outside [0, 1]")));
    }
    draws.sort_by(f64::total_cmp);
    let n = draws.len();
    let probs = sorted_grid(probs.to_vec())?;
    Ok(csv(
        ["p", "quantile"],
        probs.iter().map(|&p| {
            let h = p * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let (a, b) = (draws[lo], draws[hi]);
            let x = if a == b { a } else { a + (h - lo as f64) * (b - a) };
            [p, x]
        }),
    ))
}

/// Primary output, optional CSV side output with its path, and the labels
/// of failed verifications.
type Executed = (Output, Option<(PathBuf, String)>, Vec<String>);

fn execute(cli: &Cli) -> Result<Executed, CliError> {
    let cfg = cli.quad.config()?;
    let out = match &cli.command {
        Command::Quasinorm { source, tol } => {
            let spec = load_required(source)?;
            let n = spec.quasinorm(*tol)?;
            let modular = spec.modular_integral(n)?;
            Output::Csv(csv(["quasinorm", "modular_at_quasinorm"], [[n, modular]]))
        }
        Command::Cf { source, theta } => {
            let psi = CharExponent::new(&load_required(source)?);
            Output::Csv(csv(
                ["theta", "value"],
                sorted_grid(theta.clone())?.into_iter().map(|t| [t, psi.cf(t)]),
            ))
        }
        Command::Density { source, x } => {
            let inv = Inverter::new(&load_required(source)?)?;
            let rows = sorted_grid(x.clone())?
                .into_iter()
                .map(|x| inv.density(x, &cfg).map(|d| [x, d.value, d.error]))
                .collect::<Result<Vec<_>, _>>()?;
            Output::Csv(csv(["x", "value", "est_error"], rows))
        }
        Command::Tail { source, lambda } => {
            let inv = Inverter::new(&load_required(source)?)?;
            let rows = sorted_grid(lambda.clone())?
                .into_iter()
                .map(|l| inv.tail(l, &cfg).map(|p| [l, p.value, p.error]))
                .collect::<Result<Vec<_>, _>>()?;
            Output::Csv(csv(["lambda", "value", "est_error"], rows))
        }
        Command::Asymptote { source, lambda } => {
            let asym = TailAsymptote::new(&load_required(source)?)?;
            let rows = sorted_grid(lambda.clone())?
                .into_iter()
                .map(|l| Ok([l, asym.value(l)?, asym.log_slope(l)?]))
                .collect::<Result<Vec<_>, Error>>()?;
            Output::Csv(csv(["lambda", "T", "log_slope"], rows))
        }
        Command::RatioScan { source, lambda } => {
            let rows = ratio_scan(&load_required(source)?, &sorted_grid(lambda.clone())?, &cfg)?;
            Output::Csv(csv(
                ["lambda", "T", "P", "ratio", "abs_err_bound"],
                rows.iter()
                    .map(|r| [r.lambda, r.asymptote, r.probability.value, r.ratio, r.abs_err_bound]),
            ))
        }
        Command::Verify { check } => {
            let (v, csv_path) = run_verify(check, &cfg)?;
            let side = csv_path.map(|p| (p, v.csv()));
            return Ok((Output::Json(to_json(&v.json)), side, v.failures));
        }
        Command::Sample {
            source,
            n,
            seed,
            format,
            probs,
        } => {
            let draws = sampler::sample(&load_required(source)?, *n, *seed)?;
            match format {
                SampleFormat::Csv => Output::Csv(csv(["draw"], draws.into_iter().map(|x| [x]))),
                SampleFormat::Bin => Output::Bytes(draws.iter().flat_map(|x| x.to_le_bytes()).collect()),
                SampleFormat::Quantiles => Output::Csv(quantiles(draws, probs)?),
            }
        }
    };
    Ok((out, None, Vec::new()))
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Quasinorm { .. } => "quasinorm".into(),
        Command::Cf { .. } => "cf".into(),
        Command::Density { .. } => "density".into(),
        Command::Tail { .. } => "tail".into(),
        Command::Asymptote { .. } => "asymptote".into(),
        Command::RatioScan { .. } => "ratio-scan".into(),
        Command::Sample { .. } => "sample".into(),
        Command::Verify { check } => {
            let name = match check {
                VerifyCommand::Lemma1 { .. } => "lemma1",
                VerifyCommand::Lemma2 { .. } => "lemma2",
                VerifyCommand::Lemma3 { .. } => "lemma3",
                VerifyCommand::Lemma4 { .. } => "lemma4",
                VerifyCommand::Lemma5 { .. } => "lemma5",
                VerifyCommand::Lemma6 { .. } => "lemma6",
                VerifyCommand::Remarks { .. } => "remarks",
                VerifyCommand::Parseval { .. } => "parseval",
                VerifyCommand::Moments { .. } => "moments",
                VerifyCommand::All { .. } => "all",
            };
            format!("verify-{name}")
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    std::fs::write(path, bytes).map_err(io_err)
}

fn emit(cli: &Cli, output: &Output) -> Result<(), CliError> {
    let path = match (&cli.out, std::env::var_os(OUTPUT_DIR_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) if !dir.is_empty() => {
            Some(PathBuf::from(dir).join(format!("{}.{}", command_name(&cli.command), output.extension())))
        }
        _ => None,
    };
    match path {
        Some(p) => write_file(&p, output.bytes()),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(output.bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Parses `argv` (including the program name), runs the command, writes its
/// output and returns the process exit code. Diagnostics go to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = execute(&cli).and_then(|(output, side, failures)| {
        emit(&cli, &output)?;
        if let Some((path, text)) = side {
            write_file(&path, text.as_bytes())?;
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Failed(failures.join(", ")))
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("multistable: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAUCHY: &str = r#"{"breakpoints": [0, 1], "coefficients": [1], "alpha_values": [1]}"#;

    #[test]
    fn parses_minimal_cauchy_spec() {
        let s = parse_spec_str(CAUCHY).unwrap();
        assert_eq!(s.cells().len(), 1);
        assert_eq!(s, fixtures::cauchy());
    }

    #[test]
    fn distinct_diagnostics() {
        let malformed = parse_spec_str("{\"breakpoints\": [0, 1]").unwrap_err();
        assert!(matches!(malformed, SpecError::Malformed(_)));
        let unknown = parse_spec_str(r#"{"breakpoints": [], "coefficients": [], "alpha_values": [1], "x": 1}"#);
        assert!(matches!(unknown, Err(SpecError::Malformed(_))));
        let two = parse_spec_str(r#"{"breakpoints": [0, 1], "coefficients": [1], "alpha_values": [2.0]}"#).unwrap_err();
        assert!(matches!(two, SpecError::ExponentRange { index: 0, value } if value == 2.0));
        assert!(two.to_string().contains("b < 2"));
        let unsorted =
            parse_spec_str(r#"{"breakpoints": [0, 2, 1], "coefficients": [1, 1], "alpha_values": [1]}"#).unwrap_err();
        assert!(matches!(
            unsorted,
            SpecError::Unsorted {
                field: "breakpoints",
                index: 2,
                ..
            }
        ));
        let unsorted_alpha = parse_spec_str(
            r#"{"breakpoints": [0, 1], "coefficients": [1], "alpha_breakpoints": [1, 1], "alpha_values": [1, 1, 1]}"#,
        )
        .unwrap_err();
        assert!(matches!(
            unsorted_alpha,
            SpecError::Unsorted {
                field: "alpha_breakpoints",
                ..
            }
        ));
        let shape =
            parse_spec_str(r#"{"breakpoints": [0, 1], "coefficients": [1], "alpha_values": [1, 1]}"#).unwrap_err();
        assert!(matches!(shape, SpecError::Shape(_)));
    }

    #[test]
    fn spec_round_trip() {
        for (_, spec) in fixtures::unit_sphere_family() {
            assert_eq!(parse_spec_str(&spec_to_json(&spec)).unwrap(), spec);
        }
    }

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "n": 3, "nan": f64::NAN}));
        assert_eq!(s, "{\"n\":3,\"nan\":null,\"x\":1.0000000000000001e-1}\n");
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(
            csv(["a", "b"], [[1.0, -0.5]]),
            "a,b\n1.0000000000000000e0,-5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn quantiles_interpolate() {
        let q = quantiles(vec![3.0, 1.0, 2.0], &[0.5, 0.0, 1.0, 0.25]).unwrap();
        let rows: Vec<&str> = q.lines().collect();
        assert_eq!(rows[0], "p,quantile");
        assert_eq!(rows[1], format!("{},{}", num(0.0), num(1.0)));
        assert_eq!(rows[2], format!("{},{}", num(0.25), num(1.5)));
        assert_eq!(rows[4], format!("{},{}", num(1.0), num(3.0)));
        assert!(quantiles(vec![1.0], &[1.5]).is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run_command(["multistable", "bogus"]), EXIT_USAGE);
        assert_eq!(run_command(["multistable", "tail", "--lambda", "1"]), EXIT_USAGE);
        assert_eq!(
            run_command(["multistable", "tail", "--fixture", "nope", "--lambda", "1"]),
            EXIT_USAGE
        );
        assert_eq!(run_command(["multistable", "--help"]), EXIT_OK);
    }
}
