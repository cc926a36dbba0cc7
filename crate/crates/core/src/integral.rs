//! Integrals with Fermat endpoints and parameters.
//!
//! For a box `Π [a_i, b_i]` and an integrand `α(q, s)` the primitive
//! `G(q, a, b) = ∫_{a_1}^{b_1} … ∫ α(q, s) ds` is an ordinary smooth
//! function, and the integral at Fermat data is its Taylor lift. Its partials
//! are known in closed form: `∂_{b_i}^m G` is `∂_{s_i}^{m-1} α` with `s_i`
//! fixed at `b_i`, `∂_{a_i}^m G` is the same at `a_i` with a minus sign,
//! `∂_{a_i} ∂_{b_i} G = 0`, and parameter partials pass under the integral
//! sign. Only the remaining free axes are left to real quadrature.

use std::collections::HashMap;

use crate::calculus::QsFunction;
use crate::error::{Error, Result};
use crate::expr::{parse, CompiledExpr, Expr};
use crate::lift::{monomial, multi_indices, powers, Partials};
use crate::number::{truncation_order, FermatReal, Rational};
use crate::quadrature::{nested_quadrature, QuadratureConfig};

/// An integral split as `std + lower + upper + param`: the Riemann integral
/// of the shadow over the standard box, the Taylor corrections from moving
/// the lower and upper endpoints, and every correction involving the
/// infinitesimal part of a parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct StdInfBreakdown {
    pub std: f64,
    pub endpoint_lower: FermatReal,
    pub endpoint_upper: FermatReal,
    pub param: FermatReal,
}

impl StdInfBreakdown {
    pub fn total(&self) -> FermatReal {
        FermatReal::real(self.std)
            + &self.endpoint_lower
            + &self.endpoint_upper
            + &self.param
    }
}

/// A smooth integrand `α(q, s_1, …, s_d)` with parameter values `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    alpha: Expr,
    vars: Vec<String>,
    params: Vec<(String, FermatReal)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Param(usize),
    Lower(usize),
    Upper(usize),
}

impl Integrand {
    pub fn new(alpha: Expr, vars: Vec<String>, params: Vec<(String, FermatReal)>) -> Result<Self> {
        let known: Vec<&str> = vars
            .iter()
            .map(String::as_str)
            .chain(params.iter().map(|(n, _)| n.as_str()))
            .collect();
        for (i, n) in known.iter().enumerate() {
            if known[..i].contains(n) {
                return Err(Error::Domain(format!("variable `{n}` bound twice")));
            }
        }
        if let Some(unknown) = alpha
            .free_vars()
            .into_iter()
            .find(|v| !known.contains(&v.as_str()))
        {
            return Err(Error::UnknownVariable(unknown));
        }
        Ok(Integrand {
            alpha,
            vars,
            params,
        })
    }

    pub fn parse(text: &str, vars: &[&str], params: &[(&str, FermatReal)]) -> Result<Self> {
        let mut names: Vec<&str> = vars.to_vec();
        names.extend(params.iter().map(|(n, _)| *n));
        Self::new(
            parse(text, &names)?,
            vars.iter().map(|v| v.to_string()).collect(),
            params.iter().map(|(n, v)| (n.to_string(), v.clone())).collect(),
        )
    }

    pub fn alpha(&self) -> &Expr {
        &self.alpha
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn params(&self) -> &[(String, FermatReal)] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    /// `∫_{a_1}^{b_1} … ∫_{a_d}^{b_d} α`, oriented on every axis. `nesting`
    /// orders the real quadratures from the outermost axis inwards.
    pub fn integrate_box(
        &self,
        bounds: &[(FermatReal, FermatReal)],
        nesting: &[usize],
        cfg: &QuadratureConfig,
    ) -> Result<StdInfBreakdown> {
        let d = self.dim();
        if bounds.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bounds.len(),
            });
        }
        let mut seen = vec![false; d];
        if nesting.len() != d || nesting.iter().any(|&i| i >= d || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::Domain(format!(
                "axis order {nesting:?} is not a permutation of 0..{d}"
            )));
        }

        let np = self.params.len();
        let mut slots = Vec::new();
        let mut deltas = Vec::new();
        for (k, (_, p)) in self.params.iter().enumerate() {
            let h = p.infinitesimal_part();
            if !h.is_zero() {
                slots.push(Slot::Param(k));
                deltas.push(h);
            }
        }
        for (i, (a, b)) in bounds.iter().enumerate() {
            for (slot, x) in [(Slot::Lower(i), a), (Slot::Upper(i), b)] {
                let h = x.infinitesimal_part();
                if !h.is_zero() {
                    slots.push(slot);
                    deltas.push(h);
                }
            }
        }
        let orders: Vec<Rational> = deltas.iter().map(FermatReal::order).collect();
        let pows: Vec<Vec<FermatReal>> = deltas
            .iter()
            .map(|h| powers(h, truncation_order(h)))
            .collect();

        // Symbolic partials are indexed by derivative counts over
        // (parameters, integration variables).
        let names: Vec<String> = self
            .params
            .iter()
            .map(|(n, _)| n.clone())
            .chain(self.vars.iter().cloned())
            .collect();
        let slot_names: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut partials = Partials::new(self.alpha.clone(), names.clone());
        let mut compiled: HashMap<Vec<u32>, CompiledExpr> = HashMap::new();

        let mut point: Vec<f64> = self.params.iter().map(|(_, p)| p.std()).collect();
        point.extend(std::iter::repeat_n(0.0, d));
        let std_bounds: Vec<(f64, f64)> = bounds.iter().map(|(a, b)| (a.std(), b.std())).collect();

        let mut std = 0.0;
        let mut lower: Vec<(Rational, f64)> = Vec::new();
        let mut upper: Vec<(Rational, f64)> = Vec::new();
        let mut param: Vec<(Rational, f64)> = Vec::new();

        'terms: for j in multi_indices(&orders) {
            let mut key = vec![0u32; np + d];
            let mut fixed: Vec<Option<f64>> = vec![None; d];
            let mut sign = 1.0;
            let mut touches_param = false;
            let mut touches_lower = false;
            for (s, &m) in slots.iter().zip(&j) {
                if m == 0 {
                    continue;
                }
                match *s {
                    Slot::Param(k) => {
                        key[k] += m;
                        touches_param = true;
                    }
                    Slot::Lower(i) | Slot::Upper(i) => {
                        if fixed[i].is_some() {
                            continue 'terms;
                        }
                        let at_lower = matches!(s, Slot::Lower(_));
                        fixed[i] = Some(if at_lower { std_bounds[i].0 } else { std_bounds[i].1 });
                        if at_lower {
                            sign = -sign;
                            touches_lower = true;
                        }
                        key[np + i] += m - 1;
                    }
                }
            }
            let c = compiled.entry(key.clone()).or_insert_with(|| {
                CompiledExpr::new(partials.get(&key), &slot_names).expect("variables checked")
            });
            let mut axes = Vec::with_capacity(d);
            for &i in nesting {
                match fixed[i] {
                    Some(x) => point[np + i] = x,
                    None => axes.push((np + i, std_bounds[i].0, std_bounds[i].1)),
                }
            }
            let value = sign * nested_quadrature(&mut |p| c.eval(p), &axes, &mut point, cfg)?;
            if j.iter().all(|&m| m == 0) {
                std = value;
                continue;
            }
            if value == 0.0 {
                continue;
            }
            let m = monomial(&pows, &j).scale(value);
            let target = if touches_param {
                &mut param
            } else if touches_lower {
                &mut lower
            } else {
                &mut upper
            };
            target.extend(m.terms().iter().map(|t| (t.order.clone(), t.coeff)));
        }
        Ok(StdInfBreakdown {
            std,
            endpoint_lower: FermatReal::normalize(0.0, lower),
            endpoint_upper: FermatReal::normalize(0.0, upper),
            param: FermatReal::normalize(0.0, param),
        })
    }
}

fn as_integrand(f: &QsFunction) -> Integrand {
    Integrand {
        alpha: f.alpha().clone(),
        vars: vec![f.var().to_string()],
        params: f.params().to_vec(),
    }
}

/// `∫_u^v f`, with the standard, endpoint and parameter contributions kept
/// apart.
pub fn integral_breakdown(
    f: &QsFunction,
    u: &FermatReal,
    v: &FermatReal,
    cfg: &QuadratureConfig,
) -> Result<StdInfBreakdown> {
    f.check_in_domain(u)?;
    f.check_in_domain(v)?;
    f.check_thick_domain()?;
    as_integrand(f).integrate_box(&[(u.clone(), v.clone())], &[0], cfg)
}

/// `∫_u^v f`, oriented: swapping `u` and `v` negates the result.
pub fn integrate(
    f: &QsFunction,
    u: &FermatReal,
    v: &FermatReal,
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    Ok(integral_breakdown(f, u, v, cfg)?.total())
}

/// The primitive `x ↦ ∫_u^x f`, the unique smooth `I` with `I(u) = 0` and
/// `I' = f`.
#[derive(Clone, Debug)]
pub struct Primitive {
    f: QsFunction,
    base: FermatReal,
    cfg: QuadratureConfig,
}

pub fn primitive(f: &QsFunction, u: &FermatReal, cfg: &QuadratureConfig) -> Result<Primitive> {
    f.check_in_domain(u)?;
    f.check_thick_domain()?;
    Ok(Primitive {
        f: f.clone(),
        base: u.clone(),
        cfg: *cfg,
    })
}

impl Primitive {
    pub fn base(&self) -> &FermatReal {
        &self.base
    }

    pub fn eval(&self, x: &FermatReal) -> Result<FermatReal> {
        integrate(&self.f, &self.base, x, &self.cfg)
    }

    /// `I'(x) = f(x)`.
    pub fn derivative(&self, x: &FermatReal) -> Result<FermatReal> {
        self.f.eval(x)
    }
}
