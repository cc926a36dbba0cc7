//! Quasi-standard smooth functions `x ↦ ext α(p, x)`: values, derivatives,
//! incremental ratios and their standard and infinitesimal parts.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::expr::{fresh_name, parse, CompiledExpr, Expr};
use crate::integral::Integrand;
use crate::lift::lift_eval;
use crate::number::{FermatExt, FermatReal};
use crate::quadrature::QuadratureConfig;
use crate::region::FInterval;

/// `f(x) = ext α(p, x)` on `domain`, with one variable and fixed parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct QsFunction {
    alpha: Expr,
    var: String,
    params: Vec<(String, FermatReal)>,
    domain: FInterval,
}

impl QsFunction {
    /// Checks that `alpha` mentions only `var` and the parameters, and that
    /// it is defined at the standard parameters and a point of the domain.
    pub fn new(
        alpha: Expr,
        var: impl Into<String>,
        params: Vec<(String, FermatReal)>,
        domain: FInterval,
    ) -> Result<Self> {
        let var = var.into();
        let mut names: BTreeSet<&str> = BTreeSet::new();
        names.insert(&var);
        for (p, _) in &params {
            if !names.insert(p) {
                return Err(Error::Domain(format!("variable `{p}` bound twice")));
            }
        }
        if let Some(unknown) = alpha.free_vars().into_iter().find(|v| !names.contains(v.as_str())) {
            return Err(Error::UnknownVariable(unknown));
        }
        if domain.is_empty() {
            return Err(Error::Domain("empty domain".into()));
        }
        let f = QsFunction {
            alpha,
            var,
            params,
            domain,
        };
        f.std_part().eval(f.representative_point())?;
        Ok(f)
    }

    /// Parses `text` in the variable `var` and the named parameters.
    pub fn parse(
        text: &str,
        var: &str,
        params: &[(&str, FermatReal)],
        domain: FInterval,
    ) -> Result<Self> {
        let mut names: Vec<&str> = params.iter().map(|(n, _)| *n).collect();
        names.push(var);
        let alpha = parse(text, &names)?;
        Self::new(
            alpha,
            var,
            params.iter().map(|(n, v)| (n.to_string(), v.clone())).collect(),
            domain,
        )
    }

    /// The extension of an ordinary function on the whole line.
    pub fn extension(text: &str, var: &str) -> Result<Self> {
        Self::parse(text, var, &[], FInterval::real_line())
    }

    pub fn alpha(&self) -> &Expr {
        &self.alpha
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn params(&self) -> &[(String, FermatReal)] {
        &self.params
    }

    pub fn domain(&self) -> &FInterval {
        &self.domain
    }

    /// A standard point of the domain where the guard is checked.
    fn representative_point(&self) -> f64 {
        let st = |e: Option<&FermatExt>| e.and_then(FermatExt::finite).map(FermatReal::std);
        match (st(self.domain.lower()), st(self.domain.upper())) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) => a + 1.0,
            (None, Some(b)) => b - 1.0,
            (None, None) => 0.0,
        }
    }

    pub(crate) fn check_in_domain(&self, x: &FermatReal) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!("{x}")))
        }
    }

    /// Non-infinitesimal domain, the standing hypothesis of derivatives and
    /// integrals: `st(inf) < st(sup)`.
    pub(crate) fn check_thick_domain(&self) -> Result<()> {
        let st = |e: Option<&FermatExt>| match e {
            Some(FermatExt::Finite(x)) => Some(x.std()),
            _ => None,
        };
        match (st(self.domain.lower()), st(self.domain.upper())) {
            (Some(a), Some(b)) if a >= b => {
                Err(Error::Domain("domain is an infinitesimal interval".into()))
            }
            _ => Ok(()),
        }
    }

    fn env(&self, x: &FermatReal) -> HashMap<String, FermatReal> {
        let mut env: HashMap<String, FermatReal> = self.params.iter().cloned().collect();
        env.insert(self.var.clone(), x.clone());
        env
    }

    /// `f(x)`.
    pub fn eval(&self, x: &FermatReal) -> Result<FermatReal> {
        self.check_in_domain(x)?;
        lift_eval(&self.alpha, &self.env(x))
    }

    /// `f' = ext(∂α/∂x)(p, ·)` as a function on the same domain.
    pub fn derivative_function(&self) -> QsFunction {
        QsFunction {
            alpha: self.alpha.diff(&self.var),
            ..self.clone()
        }
    }

    /// `f'(x) = r(x, 0)`.
    pub fn derivative(&self, x: &FermatReal) -> Result<FermatReal> {
        self.check_thick_domain()?;
        self.derivative_function().eval(x)
    }

    /// The smooth incremental ratio `r(x, h) = ∫_0^1 f'(x + σh) dσ`, so that
    /// `f(x + h) = f(x) + h · r(x, h)`.
    pub fn incremental_ratio(
        &self,
        x: &FermatReal,
        h: &FermatReal,
        cfg: &QuadratureConfig,
    ) -> Result<FermatReal> {
        self.check_in_domain(x)?;
        self.check_in_domain(&(x + h))?;
        if h.is_zero() {
            return self.derivative(x);
        }
        self.check_thick_domain()?;
        let mut taken = self.alpha.free_vars();
        taken.insert(self.var.clone());
        taken.extend(self.params.iter().map(|(n, _)| n.clone()));
        let base = fresh_name("x0", &taken);
        taken.insert(base.clone());
        let step = fresh_name("h0", &taken);
        taken.insert(step.clone());
        let sigma = fresh_name("sigma", &taken);
        let moved = Expr::add(
            Expr::var(&base),
            Expr::mul(Expr::var(&sigma), Expr::var(&step)),
        );
        let bindings = HashMap::from([(self.var.as_str(), moved)]);
        let integrand = self.alpha.diff(&self.var).substitute(&bindings);
        let mut params = self.params.clone();
        params.push((base, x.clone()));
        params.push((step, h.clone()));
        let ratio = Integrand::new(integrand, vec![sigma], params)?;
        Ok(ratio
            .integrate_box(&[(FermatReal::zero(), FermatReal::one())], &[0], cfg)?
            .total())
    }

    /// `°f`: the parameters replaced by their standard parts.
    pub fn shadow(&self) -> QsFunction {
        QsFunction {
            params: self
                .params
                .iter()
                .map(|(n, p)| (n.clone(), FermatReal::real(p.std())))
                .collect(),
            ..self.clone()
        }
    }

    /// `δf = f − °f`, whose values are all infinitesimal. The shadow's
    /// parameters are bound under fresh names.
    pub fn inf_part(&self) -> QsFunction {
        let mut taken = self.alpha.free_vars();
        taken.insert(self.var.clone());
        taken.extend(self.params.iter().map(|(n, _)| n.clone()));
        let mut params = self.params.clone();
        let mut renames = HashMap::new();
        for (n, p) in &self.params {
            let fresh = fresh_name(&format!("{n}_st"), &taken);
            taken.insert(fresh.clone());
            params.push((fresh.clone(), FermatReal::real(p.std())));
            renames.insert(n.as_str(), Expr::var(fresh));
        }
        let shadow_alpha = self.alpha.substitute(&renames);
        QsFunction {
            alpha: Expr::sub(self.alpha.clone(), shadow_alpha),
            params,
            ..self.clone()
        }
    }

    /// The ordinary function `t ↦ α(st p, t)` on standard points.
    pub fn std_part(&self) -> StandardPart {
        let mut slots: Vec<&str> = self.params.iter().map(|(n, _)| n.as_str()).collect();
        slots.push(&self.var);
        let compiled = CompiledExpr::new(&self.alpha, &slots).expect("variables checked");
        let mut values: Vec<f64> = self.params.iter().map(|(_, p)| p.std()).collect();
        values.push(0.0);
        StandardPart { compiled, values }
    }
}

/// Real-valued handle for `°f`.
#[derive(Clone, Debug)]
pub struct StandardPart {
    compiled: CompiledExpr,
    values: Vec<f64>,
}

impl StandardPart {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let mut values = self.values.clone();
        *values.last_mut().expect("variable slot") = x;
        self.compiled.eval(&values)
    }
}
