//! Extension of ordinary smooth functions to Fermat arguments.
//!
//! For `x = st(x) + h` with `h` nilpotent the Taylor formula
//! `f(x) = Σ_{j} h^j / j! · ∂^j f(st x)` has no remainder: every product
//! `h^j` with `Σ j_v / ω(h_v) > 1` vanishes, so the sum runs over a finite
//! set of multi-indices fixed by the orders of the increments.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{power_derivative_at, Expr};
use crate::number::{truncation_order, FermatReal, Rational};

/// All multi-indices `j` with `Σ j_v / ω_v ≤ 1`, i.e. those whose monomial
/// `Π h_v^{j_v}` can be nonzero when `ω(h_v) = ω_v`. Sorted by total degree,
/// so the parent `j - e_v` of every index precedes it.
pub(crate) fn multi_indices(orders: &[Rational]) -> Vec<Vec<u32>> {
    fn walk(
        orders: &[Rational],
        v: usize,
        budget: &Rational,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if v == orders.len() {
            out.push(current.clone());
            return;
        }
        let mut j = 0u32;
        loop {
            let used = Rational::from_integer(BigInt::from(j)) / &orders[v];
            if &used > budget {
                break;
            }
            current.push(j);
            walk(orders, v + 1, &(budget - &used), current, out);
            current.pop();
            j += 1;
        }
    }
    let mut out = Vec::new();
    walk(orders, 0, &Rational::one(), &mut Vec::new(), &mut out);
    out.sort_by_key(|j| j.iter().sum::<u32>());
    out
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Powers `h^0 ..= h^k` of one increment.
pub(crate) fn powers(h: &FermatReal, k: u32) -> Vec<FermatReal> {
    let mut out = Vec::with_capacity(k as usize + 1);
    out.push(FermatReal::one());
    for n in 1..=k {
        let next = &out[n as usize - 1] * h;
        out.push(next);
    }
    out
}

/// `Π_v h_v^{j_v} / j_v!` from precomputed power tables.
pub(crate) fn monomial(pows: &[Vec<FermatReal>], j: &[u32]) -> FermatReal {
    let mut m = FermatReal::one();
    let mut denom = 1.0;
    for (v, &jv) in j.iter().enumerate() {
        if jv > 0 {
            m = &m * &pows[v][jv as usize];
            denom *= factorial(jv);
        }
    }
    m.scale(1.0 / denom)
}

/// Memo of symbolic partial derivatives `∂^j e` keyed by multi-index.
pub(crate) struct Partials {
    vars: Vec<String>,
    memo: HashMap<Vec<u32>, Expr>,
}

impl Partials {
    pub(crate) fn new(base: Expr, vars: Vec<String>) -> Self {
        let mut memo = HashMap::new();
        memo.insert(vec![0; vars.len()], base);
        Partials { vars, memo }
    }

    pub(crate) fn get(&mut self, j: &[u32]) -> &Expr {
        if !self.memo.contains_key(j) {
            let v = j.iter().rposition(|&n| n > 0).expect("zero index is seeded");
            let mut parent = j.to_vec();
            parent[v] -= 1;
            self.get(&parent);
            let d = self.memo[&parent].diff(&self.vars[v]);
            self.memo.insert(j.to_vec(), d);
        }
        &self.memo[j]
    }
}

/// The increments of the arguments that actually move: `(name, δv)` with
/// `δv ≠ 0`, plus the standard point.
fn split_env(
    e: &Expr,
    env: &HashMap<String, FermatReal>,
) -> Result<(HashMap<String, f64>, Vec<(String, FermatReal)>)> {
    let mut std_env = HashMap::new();
    let mut active = Vec::new();
    for name in e.free_vars() {
        let x = env
            .get(&name)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        std_env.insert(name.clone(), x.std());
        let h = x.infinitesimal_part();
        if !h.is_zero() {
            active.push((name, h));
        }
    }
    Ok((std_env, active))
}

/// `ext e` at the Fermat point `env`: a single Taylor expansion of the whole
/// expression at the standard point, with partials taken symbolically.
pub fn lift_eval(e: &Expr, env: &HashMap<String, FermatReal>) -> Result<FermatReal> {
    let (std_env, active) = split_env(e, env)?;
    let value = e.eval_real(&std_env)?;
    if active.is_empty() {
        return Ok(FermatReal::real(value));
    }
    let orders: Vec<Rational> = active.iter().map(|(_, h)| h.order()).collect();
    let pows: Vec<Vec<FermatReal>> = active
        .iter()
        .map(|(_, h)| powers(h, truncation_order(h)))
        .collect();
    let names = active.iter().map(|(n, _)| n.clone()).collect();
    let mut partials = Partials::new(e.clone(), names);
    let mut std = value;
    let mut raw: Vec<(Rational, f64)> = Vec::new();
    for j in multi_indices(&orders).into_iter().skip(1) {
        let c = partials.get(&j).eval_real(&std_env)?;
        if c == 0.0 {
            continue;
        }
        let m = monomial(&pows, &j).scale(c);
        std += m.std();
        raw.extend(m.terms().iter().map(|t| (t.order.clone(), t.coeff)));
    }
    Ok(FermatReal::normalize(std, raw))
}

/// One-variable lift `Σ_{n ≤ ⌊ω(δx)⌋} f^{(n)}(st x) / n! · δx^n`, with the
/// derivatives supplied by `deriv(n)`.
pub fn lift_univariate(
    x: &FermatReal,
    mut deriv: impl FnMut(u32) -> Result<f64>,
) -> Result<FermatReal> {
    let h = x.infinitesimal_part();
    let mut out = FermatReal::real(deriv(0)?);
    if h.is_zero() {
        return Ok(out);
    }
    let k = truncation_order(&h);
    let mut hn = FermatReal::one();
    for n in 1..=k {
        hn = &hn * &h;
        let c = deriv(n)?;
        if c != 0.0 {
            out = out + hn.scale(c / factorial(n));
        }
    }
    Ok(out)
}

/// `ext e` computed bottom-up, lifting each primitive node separately.
/// Agrees with [`lift_eval`] by the chain rule; usually much cheaper for
/// large expressions because no symbolic derivative trees are built.
pub fn lift_eval_nodewise(e: &Expr, env: &HashMap<String, FermatReal>) -> Result<FermatReal> {
    Ok(match e {
        Expr::Const(c) => FermatReal::real(*c),
        Expr::Var(name) => env
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?,
        Expr::Add(a, b) => lift_eval_nodewise(a, env)? + lift_eval_nodewise(b, env)?,
        Expr::Sub(a, b) => lift_eval_nodewise(a, env)? - lift_eval_nodewise(b, env)?,
        Expr::Mul(a, b) => lift_eval_nodewise(a, env)? * lift_eval_nodewise(b, env)?,
        Expr::Neg(a) => -lift_eval_nodewise(a, env)?,
        Expr::Div(a, b) => {
            let num = lift_eval_nodewise(a, env)?;
            let den = lift_eval_nodewise(b, env)?;
            if den.std() == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            num * den.invert()?
        }
        Expr::PowInt(a, n) => {
            let base = lift_eval_nodewise(a, env)?;
            if *n >= 0 {
                base.powi(*n as u32)
            } else {
                if base.std() == 0.0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                base.invert()?.powi(n.unsigned_abs())
            }
        }
        Expr::PowRat(a, r) => {
            let base = lift_eval_nodewise(a, env)?;
            let r = num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN);
            let s = base.std();
            lift_univariate(&base, |n| power_derivative_at(r, n, s))?
        }
        Expr::Call(f, a) => {
            let arg = lift_eval_nodewise(a, env)?;
            let s = arg.std();
            lift_univariate(&arg, |n| f.derivative_at(n, s))?
        }
    })
}
