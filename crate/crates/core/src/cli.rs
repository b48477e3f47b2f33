//! Command-line frontend: `lyndon`, `conditions`, `verify`, `converge`.
//!
//! Exit codes: 0 success, 1 verification (or computation) failure, 2 usage
//! or I/O error. Results go to `out`, diagnostics to `err`.

use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_arith::{format_rational, parse_rational, rational, rational_int, ArithError};
use crate::lyndon::{bracketing, generate_lyndon};
use crate::numeric_validation::{empirical_order, ConvergenceReport, NumericError};
use crate::order_conditions::{
    conditions, verify_scheme, ConcreteScheme, ConditionRecord, OrderError, Route, SchemeShape,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scheme file {path}: {message}")]
    SchemeFile { path: String, message: String },
    #[error("unknown scheme {0:?} (not a registry name or an existing file)")]
    UnknownScheme(String),
    #[error("bad grid: {0}")]
    Grid(String),
    #[error("registry entry {name} fails its declared order {order}")]
    RegistrySelfTest { name: String, order: usize },
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(NumericError::InvalidGrid(_) | NumericError::BadDimension(_)) => {
                EXIT_USAGE
            }
            CliError::Numeric(_) | CliError::Order(_) => EXIT_FAILURE,
            _ => EXIT_USAGE,
        }
    }
}

/// A built-in scheme together with the order it is known to have.
#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub scheme: ConcreteScheme,
    pub declared_order: usize,
}

/// `lie-trotter`, `strang` (as `e^{A/2} e^{B} e^{A/2} e^{0 B}`) and the
/// rational three-stage third-order scheme `paper-order3`.
pub fn registry() -> Vec<RegistryEntry> {
    let entry = |name: &str, a, b, declared_order| RegistryEntry {
        scheme: ConcreteScheme::named(name, a, b).expect("registry schemes are well formed"),
        declared_order,
    };
    vec![
        entry(
            "lie-trotter",
            vec![rational_int(1)],
            vec![rational_int(1)],
            1,
        ),
        entry(
            "strang",
            vec![rational(1, 2), rational(1, 2)],
            vec![rational_int(1), rational_int(0)],
            2,
        ),
        entry(
            "paper-order3",
            vec![rational(7, 24), rational(3, 4), rational(-1, 24)],
            vec![rational(2, 3), rational(-2, 3), rational_int(1)],
            3,
        ),
    ]
}

pub fn lookup(name: &str) -> Option<RegistryEntry> {
    registry()
        .into_iter()
        .find(|e| e.scheme.name() == Some(name))
}

/// On-disk scheme: `{"name": ..., "a": ["7/24", ...], "b": [...]}`.
/// Coefficients are rational strings, never floats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub name: String,
    pub a: Vec<String>,
    pub b: Vec<String>,
}

impl SchemeFile {
    pub fn from_scheme(scheme: &ConcreteScheme) -> Self {
        SchemeFile {
            name: scheme.label().to_string(),
            a: scheme.a().iter().map(format_rational).collect(),
            b: scheme.b().iter().map(format_rational).collect(),
        }
    }

    pub fn to_scheme(&self) -> Result<ConcreteScheme, CliError> {
        let parse = |v: &[String]| {
            v.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(ConcreteScheme::named(
            &self.name,
            parse(&self.a)?,
            parse(&self.b)?,
        )?)
    }

    pub fn parse(text: &str) -> Result<ConcreteScheme, String> {
        let file: SchemeFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        file.to_scheme().map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

pub fn load_scheme_file(path: &Path) -> Result<ConcreteScheme, CliError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: display.clone(),
        source,
    })?;
    SchemeFile::parse(&text).map_err(|message| CliError::SchemeFile {
        path: display,
        message,
    })
}

/// A registry name, or else a path to a scheme file.
fn resolve_scheme(name_or_path: &str) -> Result<(ConcreteScheme, Option<usize>), CliError> {
    if let Some(e) = lookup(name_or_path) {
        return Ok((e.scheme, Some(e.declared_order)));
    }
    let path = Path::new(name_or_path);
    if path.extension().is_some() || path.exists() {
        return Ok((load_scheme_file(path)?, None));
    }
    Err(CliError::UnknownScheme(name_or_path.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum RouteArg {
    #[default]
    Taylor,
    Bch,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Taylor => Route::Taylor,
            RouteArg::Bch => Route::Bch,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "splitorder",
    version,
    about = "Order conditions for exponential splitting schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List Lyndon words with their standard bracketing
    Lyndon {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=26))]
        alphabet: u8,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..=16))]
        max_len: u16,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Generate the order conditions for s stages and order p
    Conditions {
        #[arg(short = 's', long, value_parser = clap::value_parser!(u16).range(1..=16))]
        stages: u16,
        #[arg(short = 'p', long, value_parser = clap::value_parser!(u16).range(1..=8))]
        order: u16,
        #[arg(long, value_enum, default_value_t)]
        route: RouteArg,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Check a registry scheme or scheme file against the order-p conditions
    Verify {
        /// Registry name (lie-trotter, strang, paper-order3) or JSON file
        scheme: String,
        #[arg(short = 'p', long, value_parser = clap::value_parser!(u16).range(1..=8))]
        order: u16,
        #[arg(long, value_enum, default_value_t)]
        route: RouteArg,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Measure the local-error decay rate on random matrices
    Converge {
        /// Registry name or JSON file
        scheme: String,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..=64))]
        dim: u16,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Largest step is 2^-T_MAX_EXP
        #[arg(long, default_value_t = 4)]
        t_max_exp: i32,
        /// Smallest step is 2^-T_MIN_EXP
        #[arg(long, default_value_t = 10)]
        t_min_exp: i32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Serialize)]
struct LyndonEntry {
    word: String,
    bracket: String,
}

#[derive(Serialize)]
struct LyndonListing {
    alphabet: usize,
    max_len: usize,
    words: Vec<LyndonEntry>,
}

#[derive(Serialize)]
struct ConditionListing {
    stages: usize,
    order: usize,
    route: Route,
    conditions: Vec<ConditionRecord>,
}

#[derive(Serialize)]
struct ResidualRecord {
    order: usize,
    lyndon: String,
    value: String,
}

#[derive(Serialize)]
struct VerifyReport {
    scheme: String,
    a: Vec<String>,
    b: Vec<String>,
    order: usize,
    route: Route,
    satisfied: bool,
    residuals: Vec<ResidualRecord>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn cmd_lyndon(alphabet: usize, max_len: usize, format: Format) -> String {
    let mut words = generate_lyndon(alphabet, max_len);
    words.sort_by(|x, y| (x.degree(), x).cmp(&(y.degree(), y)));
    match format {
        Format::Text => words
            .iter()
            .map(|w| {
                if w.degree() == 1 {
                    format!("{w}\n")
                } else {
                    format!("{w} = {}\n", bracketing(w))
                }
            })
            .collect(),
        Format::Json => {
            let listing = LyndonListing {
                alphabet,
                max_len,
                words: words
                    .iter()
                    .map(|w| LyndonEntry {
                        word: w.to_string(),
                        bracket: bracketing(w).to_string(),
                    })
                    .collect(),
            };
            to_json(&listing) + "\n"
        }
    }
}

fn cmd_conditions(
    stages: usize,
    order: usize,
    route: Route,
    format: Format,
) -> Result<String, CliError> {
    let system = conditions(SchemeShape::new(stages)?, order, route)?;
    Ok(match format {
        Format::Text => system.to_string(),
        Format::Json => {
            let listing = ConditionListing {
                stages,
                order,
                route,
                conditions: system.records(),
            };
            to_json(&listing) + "\n"
        }
    })
}

fn cmd_verify(
    name_or_path: &str,
    order: usize,
    route: Route,
    format: Format,
) -> Result<(String, bool), CliError> {
    let (scheme, declared) = resolve_scheme(name_or_path)?;
    if let Some(declared_order) = declared {
        if !verify_scheme(&scheme, declared_order, route)?.satisfied {
            return Err(CliError::RegistrySelfTest {
                name: scheme.label().to_string(),
                order: declared_order,
            });
        }
    }
    let v = verify_scheme(&scheme, order, route)?;
    let text = match format {
        Format::Text => {
            let mut s = format!("scheme: {scheme}\n");
            let verdict = if v.satisfied {
                "satisfied"
            } else {
                "NOT satisfied"
            };
            s += &format!("order {order} via {route}: {verdict}\n");
            for r in v.failing() {
                s += &format!("  q={} {}: {}\n", r.degree, r.lyndon, r.value);
            }
            s
        }
        Format::Json => {
            let file = SchemeFile::from_scheme(&scheme);
            let report = VerifyReport {
                scheme: file.name,
                a: file.a,
                b: file.b,
                order,
                route,
                satisfied: v.satisfied,
                residuals: v
                    .residuals
                    .iter()
                    .map(|r| ResidualRecord {
                        order: r.degree,
                        lyndon: r.lyndon.to_string(),
                        value: format_rational(&r.value),
                    })
                    .collect(),
            };
            to_json(&report) + "\n"
        }
    };
    Ok((text, v.satisfied))
}

fn grid_from_exponents(t_max_exp: i32, t_min_exp: i32) -> Result<Vec<f64>, CliError> {
    if !(3..=14).contains(&t_max_exp) || !(3..=14).contains(&t_min_exp) {
        return Err(CliError::Grid("exponents must lie in 3..=14".into()));
    }
    if t_min_exp <= t_max_exp {
        return Err(CliError::Grid("--t-min-exp must exceed --t-max-exp".into()));
    }
    Ok((t_max_exp..=t_min_exp).map(|k| 2f64.powi(-k)).collect())
}

fn render_convergence(report: &ConvergenceReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report) + "\n",
        Format::Text => {
            let mut s = format!(
                "scheme: {}  n={}  seed={}\n",
                report.scheme, report.n, report.seed
            );
            for [t, e] in &report.pairs {
                s += &format!("  t={t:.6e}  error={e:.6e}\n");
            }
            s += &format!(
                "slope: {:.4}  residual: {:.3e}\n",
                report.slope, report.residual
            );
            s
        }
    }
}

fn cmd_converge(
    name_or_path: &str,
    dim: usize,
    seed: u64,
    t_max_exp: i32,
    t_min_exp: i32,
    format: Format,
) -> Result<String, CliError> {
    let (scheme, _) = resolve_scheme(name_or_path)?;
    let grid = grid_from_exponents(t_max_exp, t_min_exp)?;
    let report = empirical_order(&scheme, dim, seed, &grid)?;
    Ok(render_convergence(&report, format))
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Lyndon {
            alphabet,
            max_len,
            format,
        } => Ok((
            cmd_lyndon(alphabet as usize, max_len as usize, format),
            true,
        )),
        Command::Conditions {
            stages,
            order,
            route,
            format,
        } => {
            cmd_conditions(stages as usize, order as usize, route.into(), format).map(|s| (s, true))
        }
        Command::Verify {
            scheme,
            order,
            route,
            format,
        } => cmd_verify(&scheme, order as usize, route.into(), format),
        Command::Converge {
            scheme,
            dim,
            seed,
            t_max_exp,
            t_min_exp,
            format,
        } => cmd_converge(&scheme, dim as usize, seed, t_max_exp, t_min_exp, format)
            .map(|s| (s, true)),
    };
    match result {
        Ok((text, ok)) => {
            if write!(out, "{text}").is_err() {
                return EXIT_USAGE;
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
