//! Closed expression language for ordinary smooth functions.
//!
//! An [`Expr`] is built from constants, variables, the field operations,
//! integer and rational powers and the elementary functions `sin`, `cos`,
//! `exp`, `log` and `sqrt`. Partial derivatives are computed symbolically and
//! kept small by a conservative simplifier (constant folding plus absorption
//! of `0` and `1`); nothing is expanded or factored.

mod compiled;
mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number::Rational;

pub use compiled::CompiledExpr;
pub use parse::{parse, parse_free};

/// Elementary functions of one argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    /// Real evaluation with the domain guard `argument > 0` for log and sqrt.
    pub fn apply(self, x: f64) -> Result<f64> {
        let y = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => {
                if !(x > 0.0) {
                    return Err(Error::Domain(format!("log of non-positive argument {x}")));
                }
                x.ln()
            }
            Func::Sqrt => {
                if !(x > 0.0) {
                    return Err(Error::Domain(format!("sqrt of non-positive argument {x}")));
                }
                x.sqrt()
            }
        };
        finite(y)
    }

    /// `n`-th derivative at `x`.
    pub fn derivative_at(self, n: u32, x: f64) -> Result<f64> {
        let y = match self {
            Func::Sin => match n % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            Func::Cos => match n % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            },
            Func::Exp => x.exp(),
            Func::Log => {
                if !(x > 0.0) {
                    return Err(Error::Domain(format!("log of non-positive argument {x}")));
                }
                if n == 0 {
                    x.ln()
                } else {
                    // (-1)^{n-1} (n-1)! / x^n
                    let mut v = 1.0 / x;
                    for k in 1..n {
                        v *= -(k as f64) / x;
                    }
                    v
                }
            }
            Func::Sqrt => return power_derivative_at(0.5, n, x),
        };
        finite(y)
    }
}

/// `n`-th derivative of `t -> t^r` at `x > 0`.
pub(crate) fn power_derivative_at(r: f64, n: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("non-integer power of non-positive base {x}")));
    }
    let mut falling = 1.0;
    for k in 0..n {
        falling *= r - k as f64;
    }
    finite(falling * x.powf(r - n as f64))
}

pub(crate) fn finite(y: f64) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Domain(format!("non-finite result {y}")))
    }
}

/// Expression tree of an ordinary smooth function.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, i32),
    /// Non-integer rational power; the base must be positive.
    PowRat(Box<Expr>, Rational),
    Call(Func, Box<Expr>),
}

use Expr::*;

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Const(c) => Some(*c),
        _ => None,
    }
}

/// Folds `f` only when the result is a finite number; otherwise the node is
/// kept so that evaluation reports the domain error.
fn fold(v: Result<f64>) -> Option<Expr> {
    v.ok().map(Const)
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Const(c)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Var(name.into())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Const(c) if *c == 1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) => fold(finite(x + y)).unwrap_or_else(|| Add(a.into(), b.into())),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Add(a.into(), b.into()),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) => fold(finite(x - y)).unwrap_or_else(|| Sub(a.into(), b.into())),
            (_, Some(y)) if y == 0.0 => a,
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            _ => Sub(a.into(), b.into()),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Const(c) => Const(-c),
            Neg(inner) => *inner,
            other => Neg(other.into()),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) => fold(finite(x * y)).unwrap_or_else(|| Mul(a.into(), b.into())),
            (Some(x), _) if x == 0.0 => Const(0.0),
            (_, Some(y)) if y == 0.0 => Const(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            // constants to the left, and merged with a constant factor on the right
            (None, Some(_)) => Expr::mul(b, a),
            (Some(x), None) => match b {
                Mul(l, r) if as_const(&l).is_some() => {
                    let c = as_const(&l).expect("checked");
                    match fold(finite(x * c)) {
                        Some(k) => Expr::mul(k, *r),
                        None => Mul(Const(x).into(), Mul(l, r).into()),
                    }
                }
                other => Mul(Const(x).into(), other.into()),
            },
            _ => Mul(a.into(), b.into()),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (as_const(&a), as_const(&b)) {
            (Some(x), Some(y)) if y != 0.0 => {
                fold(finite(x / y)).unwrap_or_else(|| Div(a.into(), b.into()))
            }
            (_, Some(y)) if y == 1.0 => a,
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            (Some(x), _) if x == 0.0 => Const(0.0),
            _ => Div(a.into(), b.into()),
        }
    }

    pub fn powi(a: Expr, n: i32) -> Expr {
        match n {
            0 => Const(1.0),
            1 => a,
            _ => match as_const(&a) {
                Some(c) if !(c == 0.0 && n < 0) => {
                    fold(finite(c.powi(n))).unwrap_or_else(|| PowInt(a.into(), n))
                }
                _ => PowInt(a.into(), n),
            },
        }
    }

    /// `a^r`; integer `r` becomes [`Expr::PowInt`].
    pub fn pow_rational(a: Expr, r: Rational) -> Expr {
        if r.is_integer() {
            if let Some(n) = r.to_integer().to_i32() {
                return Expr::powi(a, n);
            }
        }
        match as_const(&a) {
            Some(c) if c > 0.0 => {
                let rf = r.to_f64().unwrap_or(f64::NAN);
                fold(finite(c.powf(rf))).unwrap_or_else(|| PowRat(a.into(), r))
            }
            _ => PowRat(a.into(), r),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        match as_const(&a) {
            Some(c) => fold(f.apply(c)).unwrap_or_else(|| Call(f, a.into())),
            None => Call(f, a.into()),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::call(Func::Sin, a)
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::call(Func::Cos, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::call(Func::Exp, a)
    }

    pub fn log(a: Expr) -> Expr {
        Expr::call(Func::Log, a)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::call(Func::Sqrt, a)
    }

    /// Rebuilds the tree bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        match self {
            Const(_) | Var(_) => self.clone(),
            Add(a, b) => Expr::add(a.simplify(), b.simplify()),
            Sub(a, b) => Expr::sub(a.simplify(), b.simplify()),
            Neg(a) => Expr::neg(a.simplify()),
            Mul(a, b) => Expr::mul(a.simplify(), b.simplify()),
            Div(a, b) => Expr::div(a.simplify(), b.simplify()),
            PowInt(a, n) => Expr::powi(a.simplify(), *n),
            PowRat(a, r) => Expr::pow_rational(a.simplify(), r.clone()),
            Call(f, a) => Expr::call(*f, a.simplify()),
        }
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        match self {
            Const(_) => Const(0.0),
            Var(name) => Const(if name == var { 1.0 } else { 0.0 }),
            Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Neg(a) => Expr::neg(a.diff(var)),
            Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(var)),
            ),
            Div(a, b) => {
                // a'/b - a b'/b^2
                let da = a.diff(var);
                let db = b.diff(var);
                Expr::sub(
                    Expr::div(da, (**b).clone()),
                    Expr::div(Expr::mul((**a).clone(), db), Expr::powi((**b).clone(), 2)),
                )
            }
            PowInt(a, n) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Const(0.0);
                }
                Expr::mul(
                    Expr::mul(Const(*n as f64), Expr::powi((**a).clone(), n - 1)),
                    da,
                )
            }
            PowRat(a, r) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Const(0.0);
                }
                let rf = r.to_f64().unwrap_or(f64::NAN);
                Expr::mul(
                    Expr::mul(Const(rf), Expr::pow_rational((**a).clone(), r - Rational::one())),
                    da,
                )
            }
            Call(f, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Const(0.0);
                }
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::cos(inner),
                    Func::Cos => Expr::neg(Expr::sin(inner)),
                    Func::Exp => Expr::exp(inner),
                    Func::Log => Expr::div(Const(1.0), inner),
                    Func::Sqrt => Expr::div(Const(0.5), Expr::sqrt(inner)),
                };
                Expr::mul(da, outer)
            }
        }
    }

    /// Iterated partial derivative `∂^n / ∂var^n`.
    pub fn diff_n(&self, var: &str, n: u32) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(var))
    }

    /// Evaluates with variables looked up through `env`.
    pub fn eval_with(&self, env: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let v = match self {
            Const(c) => *c,
            Var(name) => env(name).ok_or_else(|| Error::UnknownVariable(name.clone()))?,
            Add(a, b) => a.eval_with(env)? + b.eval_with(env)?,
            Sub(a, b) => a.eval_with(env)? - b.eval_with(env)?,
            Neg(a) => -a.eval_with(env)?,
            Mul(a, b) => a.eval_with(env)? * b.eval_with(env)?,
            Div(a, b) => {
                let num = a.eval_with(env)?;
                let den = b.eval_with(env)?;
                if den == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                num / den
            }
            PowInt(a, n) => {
                let base = a.eval_with(env)?;
                if base == 0.0 && *n < 0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                base.powi(*n)
            }
            PowRat(a, r) => {
                let base = a.eval_with(env)?;
                if !(base > 0.0) {
                    return Err(Error::Domain(format!(
                        "non-integer power of non-positive base {base}"
                    )));
                }
                base.powf(r.to_f64().unwrap_or(f64::NAN))
            }
            Call(f, a) => return f.apply(a.eval_with(env)?),
        };
        finite(v)
    }

    /// IEEE evaluation at a real point.
    pub fn eval_real(&self, env: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(&|name| env.get(name).copied())
    }

    /// Free variables in sorted order.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Const(_) => {}
            Var(name) => {
                out.insert(name.clone());
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Neg(a) | PowInt(a, _) | PowRat(a, _) | Call(_, a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Const(_) => false,
            Var(name) => name == var,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => a.depends_on(var) || b.depends_on(var),
            Neg(a) | PowInt(a, _) | PowRat(a, _) | Call(_, a) => a.depends_on(var),
        }
    }

    /// Replaces every occurrence of the listed variables, simplifying on the way up.
    pub fn substitute(&self, bindings: &HashMap<&str, Expr>) -> Expr {
        match self {
            Const(_) => self.clone(),
            Var(name) => bindings
                .get(name.as_str())
                .cloned()
                .unwrap_or_else(|| self.clone()),
            Add(a, b) => Expr::add(a.substitute(bindings), b.substitute(bindings)),
            Sub(a, b) => Expr::sub(a.substitute(bindings), b.substitute(bindings)),
            Neg(a) => Expr::neg(a.substitute(bindings)),
            Mul(a, b) => Expr::mul(a.substitute(bindings), b.substitute(bindings)),
            Div(a, b) => Expr::div(a.substitute(bindings), b.substitute(bindings)),
            PowInt(a, n) => Expr::powi(a.substitute(bindings), *n),
            PowRat(a, r) => Expr::pow_rational(a.substitute(bindings), r.clone()),
            Call(f, a) => Expr::call(*f, a.substitute(bindings)),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Const(_) | Var(_) => 1,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => 1 + a.size() + b.size(),
            Neg(a) | PowInt(a, _) | PowRat(a, _) | Call(_, a) => 1 + a.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Const(c) if c.is_sign_negative() => 3,
            PowInt(..) | PowRat(..) => 4,
            Const(_) | Var(_) | Call(..) => 5,
        }
    }
}

/// A name not occurring in `taken`, derived from `base`.
pub(crate) fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded search")
}

pub(crate) fn format_const(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{:?}", c)
    }
}

fn format_exponent_rational(r: &Rational) -> String {
    format!("({}/{})", r.numer(), r.denom())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Const(c) => {
                if *c == 0.0 && c.is_sign_negative() {
                    // keep the sign bit through a round trip
                    f.write_str("-0")
                } else {
                    f.write_str(&format_const(*c))
                }
            }
            Var(name) => f.write_str(name),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let (op, prec) = match self {
                    Add(..) => (" + ", 1),
                    Sub(..) => (" - ", 1),
                    Mul(..) => (" * ", 2),
                    _ => (" / ", 2),
                };
                wrap(f, a, a.precedence() < prec)?;
                f.write_str(op)?;
                wrap(f, b, b.precedence() <= prec)
            }
            Neg(a) => {
                f.write_str("-")?;
                let literal = matches!(**a, Const(c) if !c.is_sign_negative());
                wrap(f, a, literal || a.precedence() < 3)
            }
            PowInt(a, n) => {
                wrap(f, a, a.precedence() < 5)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            PowRat(a, r) => {
                wrap(f, a, a.precedence() < 5)?;
                write!(f, "^{}", format_exponent_rational(r))
            }
            Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Exact rational from a decimal literal such as `0.25`.
pub(crate) fn decimal_to_rational(text: &str) -> Option<Rational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(Rational::new(num, den))
}
