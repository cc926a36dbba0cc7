//! Batch command-line front end. [`run`] returns the exit code and both
//! output streams so it can be driven in-process.
//!
//! Exit codes: 0 success, 1 malformed input, 2 mathematical/domain error,
//! 3 quadrature tolerance not reached.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::calculus::QsFunction;
use crate::error::{Error, Result};
use crate::expr::{parse, parse_free};
use crate::integral::{integral_breakdown, Integrand};
use crate::lift::lift_eval;
use crate::literal::{format_g17, parse_fermat, to_json};
use crate::number::FermatReal;
use crate::quadrature::QuadratureConfig;
use crate::region::{integrate_elementary, iterated_integral, ElementarySet, FBox, FInterval};
use crate::vector::{curl, divergence, InfinitesimalParallelepiped, VectorField3, COORDS};

#[derive(Parser, Debug)]
#[command(
    name = "fermat",
    version,
    about = "Arithmetic and calculus on Fermat reals",
    after_help = "Fermat literals look like `1 + 2 eps(2) - 0.5 eps(1)`; bindings are \
                  comma-separated `name=literal` pairs. FERMAT_QUAD_TOL sets the default \
                  quadrature tolerance."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the extension of an expression at a Fermat point.
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        common: Common,
    },
    /// Differentiate symbolically; with --at, evaluate the lifted derivative.
    Diff {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Variable to differentiate in (default: the only free variable).
        #[arg(long)]
        var: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate over [from, to] with Fermat endpoints and parameters.
    Int {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Integration variable (default: the only free non-parameter).
        #[arg(long)]
        var: Option<String>,
        #[arg(long, default_value = "")]
        params: String,
        /// Print the standard part and the three infinitesimal corrections.
        #[arg(long)]
        breakdown: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Iterated integral over one box.
    Int2 {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long = "box")]
        region: String,
        /// Axis variables in box order, comma-separated.
        #[arg(long)]
        vars: Option<String>,
        /// Axis order, outermost first, 1-based and comma-separated.
        #[arg(long)]
        perm: Option<String>,
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        common: Common,
    },
    /// Integral over an elementary set (disjoint union of boxes).
    Region {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long = "box")]
        region: String,
        #[arg(long)]
        vars: Option<String>,
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        common: Common,
    },
    /// Divergence of (A1, A2, A3) in x, y, z at a standard point.
    Div {
        #[arg(allow_hyphen_values = true)]
        a1: String,
        #[arg(allow_hyphen_values = true)]
        a2: String,
        #[arg(allow_hyphen_values = true)]
        a3: String,
        #[arg(long)]
        at: String,
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        common: Common,
    },
    /// Curl of (A1, A2, A3) in x, y, z at a standard point.
    Curl {
        #[arg(allow_hyphen_values = true)]
        a1: String,
        #[arg(allow_hyphen_values = true)]
        a2: String,
        #[arg(allow_hyphen_values = true)]
        a3: String,
        #[arg(long)]
        at: String,
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare two Fermat literals: prints <, = or >.
    Compare {
        #[arg(allow_hyphen_values = true)]
        lhs: String,
        #[arg(allow_hyphen_values = true)]
        rhs: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_parse_error() {
        1
    } else if matches!(e, Error::ToleranceNotReached { .. }) {
        3
    } else {
        2
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(mut out) => {
            out.push('\n');
            Outcome {
                code: 0,
                stdout: out,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn parse_bindings(text: &str) -> Result<Vec<(String, FermatReal)>> {
    let mut out: Vec<(String, FermatReal)> = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::syntax(0, format!("binding `{item}` is not name=value")))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::syntax(0, format!("invalid variable name `{name}`")));
        }
        if out.iter().any(|(n, _)| n == name) {
            return Err(Error::syntax(0, format!("`{name}` bound twice")));
        }
        out.push((name.to_string(), parse_fermat(value)?));
    }
    Ok(out)
}

fn names(bindings: &[(String, FermatReal)]) -> Vec<&str> {
    bindings.iter().map(|(n, _)| n.as_str()).collect()
}

fn config(common: &Common) -> Result<QuadratureConfig> {
    match common.tol {
        Some(t) => QuadratureConfig::with_tol(t),
        None => QuadratureConfig::from_env(),
    }
}

fn render(x: &FermatReal, json: bool) -> String {
    if json {
        to_json(x).to_string()
    } else {
        x.to_string()
    }
}

fn render_real(x: f64, json: bool) -> String {
    if json {
        json!(x).to_string()
    } else {
        format_g17(x)
    }
}

/// The free variables of `text` that are not parameters.
fn unbound_vars(text: &str, params: &[(String, FermatReal)]) -> Result<Vec<String>> {
    Ok(parse_free(text)?
        .free_vars()
        .into_iter()
        .filter(|v| !params.iter().any(|(n, _)| n == v))
        .collect())
}

fn axis_vars(
    text: &str,
    explicit: Option<&str>,
    params: &[(String, FermatReal)],
    dim: usize,
) -> Result<Vec<String>> {
    if let Some(list) = explicit {
        let vars: Vec<String> = list.split(',').map(|v| v.trim().to_string()).collect();
        if vars.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: vars.len(),
            });
        }
        return Ok(vars);
    }
    let free = unbound_vars(text, params)?;
    if dim <= 3 && free.iter().all(|v| COORDS[..dim].contains(&v.as_str())) {
        return Ok(COORDS[..dim].iter().map(|c| c.to_string()).collect());
    }
    if free.len() == dim {
        return Ok(free);
    }
    Err(Error::syntax(
        0,
        format!("cannot tell the {dim} axis variables apart from {free:?}; pass --vars"),
    ))
}

fn parse_perm(text: &str, dim: usize) -> Result<Vec<usize>> {
    let perm: Vec<usize> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&k| (1..=dim).contains(&k))
                .map(|k| k - 1)
                .ok_or_else(|| Error::syntax(0, format!("invalid axis `{s}` in --perm")))
        })
        .collect::<Result<_>>()?;
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    if sorted != (0..dim).collect::<Vec<_>>() {
        return Err(Error::syntax(0, format!("--perm {text} is not a permutation of 1..{dim}")));
    }
    Ok(perm)
}

fn standard_point(at: &str) -> Result<[f64; 3]> {
    let bindings = parse_bindings(at)?;
    let mut point = [0.0; 3];
    for (k, c) in COORDS.iter().enumerate() {
        let (_, v) = bindings
            .iter()
            .find(|(n, _)| n == c)
            .ok_or_else(|| Error::syntax(0, format!("--at must bind `{c}`")))?;
        if !v.is_standard() {
            return Err(Error::Domain(format!("base point coordinate {c} = {v} is not standard")));
        }
        point[k] = v.std();
    }
    if let Some((n, _)) = bindings.iter().find(|(n, _)| !COORDS.contains(&n.as_str())) {
        return Err(Error::UnknownVariable(n.clone()));
    }
    Ok(point)
}

fn json_region(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}

fn execute(command: Command) -> Result<String> {
    match command {
        Command::Eval { expr, at, common } => {
            let env = parse_bindings(&at)?;
            let e = parse(&expr, &names(&env))?;
            let env: HashMap<String, FermatReal> = env.into_iter().collect();
            Ok(render(&lift_eval(&e, &env)?, common.json))
        }
        Command::Diff {
            expr,
            var,
            at,
            common,
        } => {
            let env = match &at {
                Some(at) => parse_bindings(at)?,
                None => Vec::new(),
            };
            let e = match &at {
                Some(_) => parse(&expr, &names(&env))?,
                None => parse_free(&expr)?,
            };
            let var = match var {
                Some(v) => v,
                None => {
                    let free = e.free_vars();
                    if free.len() != 1 {
                        return Err(Error::syntax(
                            0,
                            format!("expression has variables {free:?}; pass --var"),
                        ));
                    }
                    free.into_iter().next().expect("one variable")
                }
            };
            let d = e.diff(&var);
            if at.is_some() {
                let env: HashMap<String, FermatReal> = env.into_iter().collect();
                Ok(render(&lift_eval(&d, &env)?, common.json))
            } else if common.json {
                Ok(json!({ "expr": d.to_string() }).to_string())
            } else {
                Ok(d.to_string())
            }
        }
        Command::Int {
            expr,
            from,
            to,
            var,
            params,
            breakdown,
            common,
        } => {
            let cfg = config(&common)?;
            let params = parse_bindings(&params)?;
            let var = match var {
                Some(v) => v,
                None => {
                    let free = unbound_vars(&expr, &params)?;
                    match free.len() {
                        0 => "s".to_string(),
                        1 => free.into_iter().next().expect("one variable"),
                        _ => {
                            return Err(Error::syntax(
                                0,
                                format!("several integration variables {free:?}; pass --var"),
                            ))
                        }
                    }
                }
            };
            let borrowed: Vec<(&str, FermatReal)> =
                params.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
            let f = QsFunction::parse(&expr, &var, &borrowed, FInterval::real_line())?;
            let u = parse_fermat(&from)?;
            let v = parse_fermat(&to)?;
            let b = integral_breakdown(&f, &u, &v, &cfg)?;
            if !breakdown {
                return Ok(render(&b.total(), common.json));
            }
            if common.json {
                Ok(json!({
                    "std": b.std,
                    "lower": to_json(&b.endpoint_lower),
                    "upper": to_json(&b.endpoint_upper),
                    "param": to_json(&b.param),
                    "total": to_json(&b.total()),
                })
                .to_string())
            } else {
                Ok(format!(
                    "std: {}\nlower: {}\nupper: {}\nparam: {}\ntotal: {}",
                    format_g17(b.std),
                    b.endpoint_lower,
                    b.endpoint_upper,
                    b.param,
                    b.total()
                ))
            }
        }
        Command::Int2 {
            expr,
            region,
            vars,
            perm,
            params,
            common,
        } => {
            let cfg = config(&common)?;
            let params = parse_bindings(&params)?;
            let set = ElementarySet::from_json(&json_region(&region)?)?;
            let b = match set.boxes() {
                [b] => b.clone(),
                [] => FBox::new(vec![FInterval::empty(); set.dim()])?,
                _ => {
                    return Err(Error::Json(
                        "int2 takes a single box; use `region` for unions".into(),
                    ))
                }
            };
            let vars = axis_vars(&expr, vars.as_deref(), &params, b.dim())?;
            let perm = match perm {
                Some(p) => parse_perm(&p, b.dim())?,
                None => (0..b.dim()).collect(),
            };
            let g = integrand(&expr, &vars, &params)?;
            Ok(render(&iterated_integral(&g, &b, &perm, &cfg)?, common.json))
        }
        Command::Region {
            expr,
            region,
            vars,
            params,
            common,
        } => {
            let cfg = config(&common)?;
            let params = parse_bindings(&params)?;
            let set = ElementarySet::from_json(&json_region(&region)?)?;
            let vars = axis_vars(&expr, vars.as_deref(), &params, set.dim())?;
            let g = integrand(&expr, &vars, &params)?;
            Ok(render(&integrate_elementary(&g, &set, &cfg)?, common.json))
        }
        Command::Div {
            a1,
            a2,
            a3,
            at,
            params,
            common,
        } => {
            let cfg = config(&common)?;
            let field = field(&a1, &a2, &a3, &params)?;
            let p = InfinitesimalParallelepiped::canonical(standard_point(&at)?);
            Ok(render_real(divergence(&field, &p, &cfg)?, common.json))
        }
        Command::Curl {
            a1,
            a2,
            a3,
            at,
            params,
            common,
        } => {
            let cfg = config(&common)?;
            let field = field(&a1, &a2, &a3, &params)?;
            let c = curl(&field, standard_point(&at)?, &cfg)?;
            if common.json {
                Ok(json!(c).to_string())
            } else {
                Ok(c.map(format_g17).join(" "))
            }
        }
        Command::Compare { lhs, rhs, common } => {
            let symbol = match parse_fermat(&lhs)?.compare(&parse_fermat(&rhs)?) {
                Ordering::Less => "<",
                Ordering::Equal => "=",
                Ordering::Greater => ">",
            };
            Ok(if common.json {
                json!(symbol).to_string()
            } else {
                symbol.to_string()
            })
        }
    }
}

fn integrand(expr: &str, vars: &[String], params: &[(String, FermatReal)]) -> Result<Integrand> {
    let vars: Vec<&str> = vars.iter().map(String::as_str).collect();
    let borrowed: Vec<(&str, FermatReal)> =
        params.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
    Integrand::parse(expr, &vars, &borrowed)
}

fn field(a1: &str, a2: &str, a3: &str, params: &str) -> Result<VectorField3> {
    let params = parse_bindings(params)?;
    let borrowed: Vec<(&str, FermatReal)> =
        params.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
    VectorField3::parse([a1, a2, a3], &borrowed)
}
