//! Test-side generators and oracles shared by the integration tests.
//!
//! The oracles here deliberately avoid the library's own machinery: the
//! Taylor oracle works in truncated power series of `τ = t^(1/6)` (so
//! `dt_a = τ^(6/a)`), derivatives come from forward-mode jets, and real
//! integrals from a fixed composite Gauss-Legendre rule.

#![allow(dead_code)]

use std::collections::HashMap;

use fermat::{rational, Expr, FermatReal, Func, Rational};
use num_traits::ToPrimitive;
use rand::distributions::uniform::SampleRange;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- generators

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn small_const(rng: &mut ChaCha8Rng) -> f64 {
    // quarter steps keep printed forms short
    (rng.gen_range(-6..=6) as f64) * 0.25
}

/// `1 + e^2`, positive everywhere.
fn positive(e: Expr) -> Expr {
    Expr::Add(b(Expr::Const(1.0)), b(Expr::PowInt(b(e), 2)))
}

/// Random smooth expression defined on the whole of `R^vars`, with values
/// of moderate size for arguments in `[-2, 2]`.
pub fn random_expr(rng: &mut ChaCha8Rng, vars: &[&str], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.75) && !vars.is_empty() {
            Expr::Var(vars[rng.gen_range(0..vars.len())].to_string())
        } else {
            Expr::Const(small_const(rng))
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..13) {
        0 | 1 => Expr::Add(b(random_expr(rng, vars, d)), b(random_expr(rng, vars, d))),
        2 => Expr::Sub(b(random_expr(rng, vars, d)), b(random_expr(rng, vars, d))),
        3 | 4 => Expr::Mul(b(random_expr(rng, vars, d)), b(random_expr(rng, vars, d))),
        5 => Expr::Div(
            b(random_expr(rng, vars, d)),
            b(positive(random_expr(rng, vars, d))),
        ),
        6 => Expr::Call(Func::Sin, b(random_expr(rng, vars, d))),
        7 => Expr::Call(Func::Cos, b(random_expr(rng, vars, d))),
        8 => Expr::Call(
            Func::Exp,
            b(Expr::Mul(b(Expr::Const(0.5)), b(random_expr(rng, vars, d)))),
        ),
        9 => Expr::Call(Func::Log, b(positive(random_expr(rng, vars, d)))),
        10 => Expr::Call(Func::Sqrt, b(positive(random_expr(rng, vars, d)))),
        11 => Expr::PowRat(
            b(positive(random_expr(rng, vars, d))),
            [rational(1, 3), rational(-1, 2), rational(3, 2)][rng.gen_range(0..3)].clone(),
        ),
        _ => Expr::PowInt(b(random_expr(rng, vars, d)), rng.gen_range(2..=3)),
    }
}

/// Like [`random_expr`] but guaranteed to mention `var`.
pub fn random_expr_in(rng: &mut ChaCha8Rng, var: &str, others: &[&str], depth: u32) -> Expr {
    let mut vars = vec![var];
    vars.extend_from_slice(others);
    loop {
        let e = random_expr(rng, &vars, depth);
        if e.depends_on(var) {
            return e;
        }
    }
}

pub const ORDERS: [(i64, i64); 4] = [(1, 1), (3, 2), (2, 1), (3, 1)];

/// `st + Σ c_i dt_{a_i}` with up to `max_terms` orders drawn from [`ORDERS`].
pub fn random_fermat(
    rng: &mut ChaCha8Rng,
    std: impl SampleRange<f64>,
    max_terms: usize,
) -> FermatReal {
    let mut x = FermatReal::real(rng.gen_range(std));
    for _ in 0..rng.gen_range(0..=max_terms) {
        let (n, d) = ORDERS[rng.gen_range(0..ORDERS.len())];
        let c = rng.gen_range(-1.0..1.0);
        x = x + FermatReal::term(c, rational(n, d));
    }
    x
}

/// A nonzero nilpotent increment.
pub fn random_increment(rng: &mut ChaCha8Rng) -> FermatReal {
    loop {
        let h = random_fermat(rng, 0.0..=0.0, 3);
        if !h.is_zero() {
            return h;
        }
    }
}

// ------------------------------------------------------------------- jets

/// Truncated power series `Σ_{k ≤ n} c_k τ^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(c: f64, n: usize) -> Jet {
        let mut v = vec![0.0; n + 1];
        v[0] = c;
        Jet(v)
    }

    /// `x0 + τ`, the seed for first derivatives when `n = 1`.
    pub fn variable(x0: f64, n: usize) -> Jet {
        let mut j = Jet::constant(x0, n);
        if n >= 1 {
            j.0[1] = 1.0;
        }
        j
    }

    fn n(&self) -> usize {
        self.0.len() - 1
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet(self.0.iter().map(|a| a * s).collect())
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.n();
        let mut out = vec![0.0; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                out[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(out)
    }

    /// `g(self)` from the derivatives `g^(k)(c_0)`, `k = 0..=n`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let n = self.n();
        let mut nil = self.clone();
        nil.0[0] = 0.0;
        let mut out = Jet::constant(derivs[0], n);
        let mut power = Jet::constant(1.0, n);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1).take(n) {
            power = power.mul(&nil);
            fact *= k as f64;
            out = out.add(&power.scale(d / fact));
        }
        out
    }
}

/// `d^k/dx^k x^p` at `x`, `k = 0..=n`.
fn power_derivs(x: f64, p: f64, n: usize) -> Vec<f64> {
    let mut falling = 1.0;
    (0..=n)
        .map(|k| {
            let v = falling * x.powf(p - k as f64);
            falling *= p - k as f64;
            v
        })
        .collect()
}

fn func_derivs(f: Func, x: f64, n: usize) -> Vec<f64> {
    match f {
        Func::Sin => (0..=n)
            .map(|k| [x.sin(), x.cos(), -x.sin(), -x.cos()][k % 4])
            .collect(),
        Func::Cos => (0..=n)
            .map(|k| [x.cos(), -x.sin(), -x.cos(), x.sin()][k % 4])
            .collect(),
        Func::Exp => vec![x.exp(); n + 1],
        Func::Log => {
            assert!(x > 0.0, "log outside its domain in oracle");
            let mut v = vec![x.ln()];
            let mut fact = 1.0;
            for k in 1..=n {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                v.push(sign * fact / x.powi(k as i32));
                fact *= k as f64;
            }
            v
        }
        Func::Sqrt => {
            assert!(x > 0.0, "sqrt outside its domain in oracle");
            power_derivs(x, 0.5, n)
        }
    }
}

/// Evaluates `e` in jets of degree `n`.
pub fn eval_jet(e: &Expr, env: &HashMap<String, Jet>, n: usize) -> Jet {
    match e {
        Expr::Const(c) => Jet::constant(*c, n),
        Expr::Var(v) => env.get(v).unwrap_or_else(|| panic!("unbound `{v}`")).clone(),
        Expr::Add(a, c) => eval_jet(a, env, n).add(&eval_jet(c, env, n)),
        Expr::Sub(a, c) => eval_jet(a, env, n).sub(&eval_jet(c, env, n)),
        Expr::Neg(a) => eval_jet(a, env, n).scale(-1.0),
        Expr::Mul(a, c) => eval_jet(a, env, n).mul(&eval_jet(c, env, n)),
        Expr::Div(a, c) => {
            let den = eval_jet(c, env, n);
            let inv = den.compose(&power_derivs(den.0[0], -1.0, n));
            eval_jet(a, env, n).mul(&inv)
        }
        Expr::PowInt(a, k) => {
            let base = eval_jet(a, env, n);
            let mut out = Jet::constant(1.0, n);
            for _ in 0..k.unsigned_abs() {
                out = out.mul(&base);
            }
            if *k < 0 {
                out = out.compose(&power_derivs(out.0[0], -1.0, n));
            }
            out
        }
        Expr::PowRat(a, p) => {
            let base = eval_jet(a, env, n);
            let p = p.to_f64().unwrap();
            base.compose(&power_derivs(base.0[0], p, n))
        }
        Expr::Call(f, a) => {
            let arg = eval_jet(a, env, n);
            arg.compose(&func_derivs(*f, arg.0[0], n))
        }
    }
}

/// `∂e/∂var` at a real point, by forward-mode jets of degree 1.
pub fn partial(e: &Expr, var: &str, point: &[(&str, f64)]) -> f64 {
    let env = point
        .iter()
        .map(|&(k, v)| {
            let j = if k == var {
                Jet::variable(v, 1)
            } else {
                Jet::constant(v, 1)
            };
            (k.to_string(), j)
        })
        .collect();
    eval_jet(e, &env, 1).0[1]
}

/// Real value of `e` at a point.
pub fn value(e: &Expr, point: &[(&str, f64)]) -> f64 {
    let env = point
        .iter()
        .map(|&(k, v)| (k.to_string(), Jet::constant(v, 0)))
        .collect();
    eval_jet(e, &env, 0).0[0]
}

// ------------------------------------------------------- τ-series bridge

pub const TAU_DEGREE: usize = 6;

/// Embeds a Fermat real whose orders all have the form `6/k` into the
/// series ring in `τ = t^(1/6)`, truncated after `τ^6 = t`.
pub fn to_tau(x: &FermatReal) -> Jet {
    let mut j = Jet::constant(x.std(), TAU_DEGREE);
    for t in x.terms() {
        let k = rational(6, 1) / &t.order;
        assert!(k.is_integer(), "order {} has no τ exponent", t.order);
        j.0[k.to_integer().to_usize().unwrap()] += t.coeff;
    }
    j
}

/// Coefficient of `dt_order` in `x`, 0 when absent.
pub fn coeff_of(x: &FermatReal, order: &Rational) -> f64 {
    x.terms()
        .iter()
        .find(|t| &t.order == order)
        .map_or(0.0, |t| t.coeff)
}

/// Compares `x` with a τ-series coefficient by coefficient.
pub fn match_tau(x: &FermatReal, want: &Jet, tol: f64) -> Result<(), String> {
    for t in x.terms() {
        let k = rational(6, 1) / &t.order;
        if !k.is_integer() {
            return Err(format!("unexpected order {} in {x}", t.order));
        }
    }
    let check = |label: String, got: f64, exp: f64| -> Result<(), String> {
        if close(got, exp, tol) {
            Ok(())
        } else {
            Err(format!("{label}: got {got:e}, expected {exp:e} (in {x})"))
        }
    };
    check("std".into(), x.std(), want.0[0])?;
    for (k, &exp) in want.0.iter().enumerate().skip(1) {
        let order = rational(6, k as i64);
        check(format!("dt_{order}"), coeff_of(x, &order), exp)?;
    }
    Ok(())
}

// ------------------------------------------------------------ comparison

/// `|a - b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Coefficient-wise agreement of two Fermat reals, as in [`close`].
pub fn fermat_close(x: &FermatReal, y: &FermatReal, tol: f64) -> Result<(), String> {
    let fail = |what: String, a: f64, b: f64| {
        Err(format!("{what}: {a:e} vs {b:e}\n  lhs = {x}\n  rhs = {y}"))
    };
    if !close(x.std(), y.std(), tol) {
        return fail("std".into(), x.std(), y.std());
    }
    let mut orders: Vec<&Rational> = x.terms().iter().chain(y.terms()).map(|t| &t.order).collect();
    orders.sort();
    orders.dedup();
    for o in orders {
        let (a, b) = (coeff_of(x, o), coeff_of(y, o));
        if !close(a, b, tol) {
            return fail(format!("dt_{o}"), a, b);
        }
    }
    Ok(())
}

/// `x ≤ y` in the total order after treating coefficients of `y − x` within
/// `slack` of zero as zero.
pub fn leq_with_slack(x: &FermatReal, y: &FermatReal, slack: f64) -> bool {
    let d = y - x;
    let mut cleaned = FermatReal::real(if d.std().abs() <= slack { 0.0 } else { d.std() });
    for t in d.terms() {
        if t.coeff.abs() > slack {
            cleaned = cleaned + FermatReal::term(t.coeff, t.order.clone());
        }
    }
    cleaned.compare(&FermatReal::zero()) != std::cmp::Ordering::Less
}

// ----------------------------------------------------------- quadrature

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Composite five-point Gauss-Legendre rule on `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL5 {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

pub fn env(pairs: &[(&str, FermatReal)]) -> HashMap<String, FermatReal> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}
