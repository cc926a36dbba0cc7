//! Divergence and curl as ratios of infinitesimals: the flux of a field
//! through a nilpotent parallelepiped is `div A · Vol`, and its circulation
//! around a nilpotent cycle is `curl A · (h₁ × h₂)`, both exactly.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::expr::{fresh_name, parse, Expr};
use crate::integral::Integrand;
use crate::number::{coeff_epsilon, FermatReal, IdealIndex};
use crate::quadrature::QuadratureConfig;

/// Coordinate names of every field.
pub const COORDS: [&str; 3] = ["x", "y", "z"];

/// Relative tolerance of [`infinitesimal_ratio`].
pub const RATIO_REL_TOL: f64 = 1e-8;

pub type Vec3 = [FermatReal; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField3 {
    components: [Expr; 3],
    params: Vec<(String, FermatReal)>,
}

impl VectorField3 {
    pub fn new(components: [Expr; 3], params: Vec<(String, FermatReal)>) -> Result<Self> {
        let mut known: BTreeSet<&str> = COORDS.into_iter().collect();
        for (n, _) in &params {
            if !known.insert(n) {
                return Err(Error::Domain(format!("variable `{n}` bound twice")));
            }
        }
        for c in &components {
            if let Some(v) = c.free_vars().into_iter().find(|v| !known.contains(v.as_str())) {
                return Err(Error::UnknownVariable(v));
            }
        }
        Ok(VectorField3 { components, params })
    }

    pub fn parse(components: [&str; 3], params: &[(&str, FermatReal)]) -> Result<Self> {
        let mut names: Vec<&str> = COORDS.to_vec();
        names.extend(params.iter().map(|(n, _)| *n));
        let parsed = [
            parse(components[0], &names)?,
            parse(components[1], &names)?,
            parse(components[2], &names)?,
        ];
        Self::new(
            parsed,
            params.iter().map(|(n, v)| (n.to_string(), v.clone())).collect(),
        )
    }

    pub fn components(&self) -> &[Expr; 3] {
        &self.components
    }

    pub fn params(&self) -> &[(String, FermatReal)] {
        &self.params
    }

    /// `∫ A(P(t)) · w dt` over `[-1/2, 1/2]^k` for the affine point
    /// `P(t) = base + offset + Σ t_i dirs_i` and weight vector `w`.
    fn weighted_integral(
        &self,
        base: &[f64; 3],
        offset: &Vec3,
        dirs: &[&Vec3],
        weight: &Vec3,
        cfg: &QuadratureConfig,
    ) -> Result<FermatReal> {
        let mut taken: BTreeSet<String> = COORDS.iter().map(|c| c.to_string()).collect();
        taken.extend(self.params.iter().map(|(n, _)| n.clone()));
        let mut fresh = |stem: &str| {
            let n = fresh_name(stem, &taken);
            taken.insert(n.clone());
            n
        };
        let mut params = self.params.clone();
        let mut bind = |stem: &str, value: &FermatReal, params: &mut Vec<(String, FermatReal)>| {
            let n = fresh(stem);
            params.push((n.clone(), value.clone()));
            Expr::var(n)
        };
        let mut ts = Vec::new();
        let mut point = Vec::with_capacity(3);
        let offsets: Vec<Expr> = (0..3)
            .map(|k| bind(&format!("o{k}"), &offset[k], &mut params))
            .collect();
        let mut dir_exprs: Vec<Vec<Expr>> = Vec::new();
        for (i, d) in dirs.iter().enumerate() {
            dir_exprs.push(
                (0..3)
                    .map(|k| bind(&format!("d{i}{k}"), &d[k], &mut params))
                    .collect(),
            );
        }
        let weights: Vec<Expr> = (0..3)
            .map(|k| bind(&format!("w{k}"), &weight[k], &mut params))
            .collect();
        for i in 0..dirs.len() {
            ts.push(fresh(&format!("t{i}")));
        }
        for k in 0..3 {
            let mut pk = Expr::add(Expr::constant(base[k]), offsets[k].clone());
            for (i, t) in ts.iter().enumerate() {
                pk = Expr::add(pk, Expr::mul(Expr::var(t), dir_exprs[i][k].clone()));
            }
            point.push(pk);
        }
        let bindings: HashMap<&str, Expr> = COORDS.iter().copied().zip(point).collect();
        let mut integrand = Expr::constant(0.0);
        for k in 0..3 {
            integrand = Expr::add(
                integrand,
                Expr::mul(self.components[k].substitute(&bindings), weights[k].clone()),
            );
        }
        let half = FermatReal::real(0.5);
        let bounds = vec![(-&half, half.clone()); ts.len()];
        let nesting: Vec<usize> = (0..ts.len()).collect();
        Ok(Integrand::new(integrand, ts, params)?
            .integrate_box(&bounds, &nesting, cfg)?
            .total())
    }
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn dot(a: &Vec3, b: &Vec3) -> FermatReal {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn check_ideal(edges: &[Vec3], k: u32, what: &str) -> Result<()> {
    for (i, h) in edges.iter().enumerate() {
        for (j, c) in h.iter().enumerate() {
            if !c.in_dk(&IdealIndex::nat(k)) {
                return Err(Error::InvariantViolation(format!(
                    "{what}: component {j} of edge {} is {c}, not in D_{k}",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// Base point with edges whose components all lie in `D_3`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinitesimalParallelepiped {
    base: [f64; 3],
    edges: [Vec3; 3],
}

impl InfinitesimalParallelepiped {
    pub fn new(base: [f64; 3], edges: [Vec3; 3]) -> Result<Self> {
        check_ideal(&edges, 3, "parallelepiped")?;
        Ok(InfinitesimalParallelepiped { base, edges })
    }

    /// Edges `dt_3 e_1, dt_3 e_2, dt_3 e_3`, of volume `dt`.
    pub fn canonical(base: [f64; 3]) -> Self {
        let h = FermatReal::dt_q(3, 1);
        let z = FermatReal::zero();
        InfinitesimalParallelepiped {
            base,
            edges: [
                [h.clone(), z.clone(), z.clone()],
                [z.clone(), h.clone(), z.clone()],
                [z.clone(), z, h],
            ],
        }
    }

    pub fn base(&self) -> &[f64; 3] {
        &self.base
    }

    pub fn edges(&self) -> &[Vec3; 3] {
        &self.edges
    }

    /// Oriented volume `det(h_1, h_2, h_3)`.
    pub fn volume(&self) -> FermatReal {
        dot(&self.edges[0], &cross(&self.edges[1], &self.edges[2]))
    }
}

/// Base point with two edges whose components all lie in `D_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinitesimalCycle {
    base: [f64; 3],
    edges: [Vec3; 2],
}

impl InfinitesimalCycle {
    pub fn new(base: [f64; 3], edges: [Vec3; 2]) -> Result<Self> {
        check_ideal(&edges, 2, "cycle")?;
        Ok(InfinitesimalCycle { base, edges })
    }

    /// The cycle in the coordinate plane normal to `e_axis`, with edges
    /// `dt_2 e_{axis+1}` and `dt_2 e_{axis+2}` so that `h_1 × h_2 = dt e_axis`.
    pub fn coordinate(base: [f64; 3], axis: usize) -> Self {
        let unit = |i: usize| -> Vec3 {
            std::array::from_fn(|k| {
                if k == i {
                    FermatReal::dt_q(2, 1)
                } else {
                    FermatReal::zero()
                }
            })
        };
        InfinitesimalCycle {
            base,
            edges: [unit((axis + 1) % 3), unit((axis + 2) % 3)],
        }
    }

    pub fn base(&self) -> &[f64; 3] {
        &self.base
    }

    pub fn edges(&self) -> &[Vec3; 2] {
        &self.edges
    }

    /// `h_1 × h_2`.
    pub fn area_vector(&self) -> Vec3 {
        cross(&self.edges[0], &self.edges[1])
    }
}

/// Outward flux through the six faces, each parameterized over
/// `[-1/2, 1/2]^2` with normal `h_a × h_b` for cyclic `(c, a, b)`.
pub fn flux(
    field: &VectorField3,
    p: &InfinitesimalParallelepiped,
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    let mut total = FermatReal::zero();
    for c in 0..3 {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        let normal = cross(&p.edges[a], &p.edges[b]);
        if normal.iter().all(FermatReal::is_zero) {
            continue;
        }
        let half: Vec3 = std::array::from_fn(|k| p.edges[c][k].scale(0.5));
        let dirs = [&p.edges[a], &p.edges[b]];
        let outer = field.weighted_integral(&p.base, &half, &dirs, &normal, cfg)?;
        let neg_half: Vec3 = std::array::from_fn(|k| -&half[k]);
        let inner = field.weighted_integral(&p.base, &neg_half, &dirs, &normal, cfg)?;
        total = total + outer - inner;
    }
    Ok(total)
}

/// `div A(x)`: the real ratio of the flux to the volume.
pub fn divergence(
    field: &VectorField3,
    p: &InfinitesimalParallelepiped,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let vol = p.volume();
    if vol.is_zero() {
        return Err(Error::ZeroVolume);
    }
    infinitesimal_ratio(&flux(field, p, cfg)?, &vol)
}

/// Signed sum of the line integrals along the four sides
/// `x ∓ h_2/2 + t h_1` and `x ± h_1/2 + t h_2`, `t ∈ [-1/2, 1/2]`.
pub fn circulation(
    field: &VectorField3,
    c: &InfinitesimalCycle,
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    let [h1, h2] = &c.edges;
    let half = |h: &Vec3, s: f64| -> Vec3 { std::array::from_fn(|k| h[k].scale(s)) };
    let bottom = field.weighted_integral(&c.base, &half(h2, -0.5), &[h1], h1, cfg)?;
    let right = field.weighted_integral(&c.base, &half(h1, 0.5), &[h2], h2, cfg)?;
    let top = field.weighted_integral(&c.base, &half(h2, 0.5), &[h1], h1, cfg)?;
    let left = field.weighted_integral(&c.base, &half(h1, -0.5), &[h2], h2, cfg)?;
    Ok(bottom + right - top - left)
}

/// `curl A(x)` from the circulations around the three coordinate-plane
/// cycles of [`InfinitesimalCycle::coordinate`].
pub fn curl(field: &VectorField3, base: [f64; 3], cfg: &QuadratureConfig) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (axis, slot) in out.iter_mut().enumerate() {
        let cycle = InfinitesimalCycle::coordinate(base, axis);
        let area = cycle.area_vector();
        *slot = infinitesimal_ratio(&circulation(field, &cycle, cfg)?, &area[axis])?;
    }
    Ok(out)
}

/// The real `r` with `x = r·y`, matched term by term: every coefficient of
/// `x − r·y` must be within [`RATIO_REL_TOL`] of the largest coefficient.
pub fn infinitesimal_ratio(x: &FermatReal, y: &FermatReal) -> Result<f64> {
    if !x.is_infinitesimal() || !y.is_infinitesimal() {
        return Err(Error::NotInfinitesimal);
    }
    let Some(lead) = y.terms().first() else {
        return Err(Error::ZeroDivisor);
    };
    let matching = x
        .terms()
        .iter()
        .find(|t| t.order == lead.order)
        .map_or(0.0, |t| t.coeff);
    let r = matching / lead.coeff;
    let residual = x - &y.scale(r);
    let scale = x
        .terms()
        .iter()
        .chain(y.scale(r).terms())
        .map(|t| t.coeff.abs())
        .fold(0.0, f64::max);
    let tol = (RATIO_REL_TOL * scale).max(coeff_epsilon());
    if residual.terms().iter().all(|t| t.coeff.abs() <= tol) {
        Ok(r)
    } else {
        Err(Error::NotProportional)
    }
}
