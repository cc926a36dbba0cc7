//! Intervals and boxes in `•ℝ^d` and the Boolean algebra of elementary sets
//! (finite disjoint unions of boxes). All decisions go through the total
//! order of Fermat reals, so an infinitesimal gap separates two intervals
//! just as a standard one does.

use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::calculus::QsFunction;
use crate::error::{Error, Result};
use crate::integral::Integrand;
use crate::literal::{fermat_ext_from_json, fermat_ext_to_json};
use crate::number::{FermatExt, FermatReal};
use crate::quadrature::QuadratureConfig;

/// An interval with Fermat (or infinite) endpoints. Infinite endpoints are
/// always open. The empty interval has a single canonical representation.
#[derive(Clone, Debug, PartialEq)]
pub struct FInterval {
    bounds: Option<Bounds>,
}

#[derive(Clone, Debug, PartialEq)]
struct Bounds {
    lower: FermatExt,
    upper: FermatExt,
    lower_closed: bool,
    upper_closed: bool,
}

impl FInterval {
    /// Fails with `InvalidInterval` when `lower > upper`. Degenerate
    /// intervals that contain no point normalize to the empty interval.
    pub fn new(
        lower: FermatExt,
        upper: FermatExt,
        lower_closed: bool,
        upper_closed: bool,
    ) -> Result<Self> {
        if lower.compare(&upper) == Ordering::Greater {
            return Err(Error::InvalidInterval);
        }
        Ok(Self::build(lower, upper, lower_closed, upper_closed))
    }

    fn build(lower: FermatExt, upper: FermatExt, lower_closed: bool, upper_closed: bool) -> Self {
        let lower_closed = lower_closed && lower.finite().is_some();
        let upper_closed = upper_closed && upper.finite().is_some();
        let nonempty = match lower.compare(&upper) {
            Ordering::Less => true,
            Ordering::Equal => lower_closed && upper_closed,
            Ordering::Greater => false,
        };
        FInterval {
            bounds: nonempty.then_some(Bounds {
                lower,
                upper,
                lower_closed,
                upper_closed,
            }),
        }
    }

    pub fn closed(lower: FermatReal, upper: FermatReal) -> Result<Self> {
        Self::new(lower.into(), upper.into(), true, true)
    }

    pub fn open(lower: FermatReal, upper: FermatReal) -> Result<Self> {
        Self::new(lower.into(), upper.into(), false, false)
    }

    /// `[lo, hi)`.
    pub fn closed_open(lower: FermatReal, upper: FermatReal) -> Result<Self> {
        Self::new(lower.into(), upper.into(), true, false)
    }

    pub fn point(x: FermatReal) -> Self {
        Self::build(x.clone().into(), x.into(), true, true)
    }

    pub fn real_line() -> Self {
        Self::build(FermatExt::NegInf, FermatExt::PosInf, false, false)
    }

    pub fn empty() -> Self {
        FInterval { bounds: None }
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn lower(&self) -> Option<&FermatExt> {
        self.bounds.as_ref().map(|b| &b.lower)
    }

    pub fn upper(&self) -> Option<&FermatExt> {
        self.bounds.as_ref().map(|b| &b.upper)
    }

    pub fn lower_closed(&self) -> bool {
        self.bounds.as_ref().is_some_and(|b| b.lower_closed)
    }

    pub fn upper_closed(&self) -> bool {
        self.bounds.as_ref().is_some_and(|b| b.upper_closed)
    }

    /// Finite endpoints `(inf, sup)`; `Unbounded` if either is infinite.
    pub fn finite_bounds(&self) -> Result<Option<(FermatReal, FermatReal)>> {
        match &self.bounds {
            None => Ok(None),
            Some(b) => match (b.lower.finite(), b.upper.finite()) {
                (Some(l), Some(u)) => Ok(Some((l.clone(), u.clone()))),
                _ => Err(Error::Unbounded),
            },
        }
    }

    pub fn contains(&self, x: &FermatReal) -> bool {
        let Some(b) = &self.bounds else {
            return false;
        };
        let x = FermatExt::Finite(x.clone());
        let above = match b.lower.compare(&x) {
            Ordering::Less => true,
            Ordering::Equal => b.lower_closed,
            Ordering::Greater => false,
        };
        let below = match x.compare(&b.upper) {
            Ordering::Less => true,
            Ordering::Equal => b.upper_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &FInterval) -> bool {
        self.intersect(other) == *self
    }

    pub fn intersect(&self, other: &FInterval) -> FInterval {
        let (Some(a), Some(b)) = (&self.bounds, &other.bounds) else {
            return FInterval::empty();
        };
        let (lower, lower_closed) = match a.lower.compare(&b.lower) {
            Ordering::Greater => (a.lower.clone(), a.lower_closed),
            Ordering::Less => (b.lower.clone(), b.lower_closed),
            Ordering::Equal => (a.lower.clone(), a.lower_closed && b.lower_closed),
        };
        let (upper, upper_closed) = match a.upper.compare(&b.upper) {
            Ordering::Less => (a.upper.clone(), a.upper_closed),
            Ordering::Greater => (b.upper.clone(), b.upper_closed),
            Ordering::Equal => (a.upper.clone(), a.upper_closed && b.upper_closed),
        };
        Self::build(lower, upper, lower_closed, upper_closed)
    }

    /// The complement as at most two disjoint pieces: the points below
    /// every point of `self`, then the points above.
    pub fn complement_pieces(&self) -> Vec<FInterval> {
        let Some(b) = &self.bounds else {
            return vec![FInterval::real_line()];
        };
        [
            Self::build(FermatExt::NegInf, b.lower.clone(), false, !b.lower_closed),
            Self::build(b.upper.clone(), FermatExt::PosInf, !b.upper_closed, false),
        ]
        .into_iter()
        .filter(|i| !i.is_empty())
        .collect()
    }

    /// `self ∖ other` as at most two disjoint pieces.
    pub fn difference(&self, other: &FInterval) -> Vec<FInterval> {
        other
            .complement_pieces()
            .iter()
            .map(|c| self.intersect(c))
            .filter(|i| !i.is_empty())
            .collect()
    }

    pub fn to_json(&self) -> Value {
        match &self.bounds {
            None => json!({"empty": true}),
            Some(b) => json!({
                "lo": fermat_ext_to_json(&b.lower),
                "hi": fermat_ext_to_json(&b.upper),
                "lo_closed": b.lower_closed,
                "hi_closed": b.upper_closed,
            }),
        }
    }

    /// `{"lo": .., "hi": .., "lo_closed": bool, "hi_closed": bool}`; the
    /// flags default to closed.
    pub fn from_json(v: &Value) -> Result<Self> {
        if v.get("empty").and_then(Value::as_bool) == Some(true) {
            return Ok(FInterval::empty());
        }
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Json(format!("missing field `{k}`")));
        let flag = |k: &str| match v.get(k) {
            None => Ok(true),
            Some(Value::Bool(b)) => Ok(*b),
            Some(other) => Err(Error::Json(format!("`{k}` must be a boolean, got {other}"))),
        };
        Self::new(
            fermat_ext_from_json(field("lo")?)?,
            fermat_ext_from_json(field("hi")?)?,
            flag("lo_closed")?,
            flag("hi_closed")?,
        )
    }
}

/// A product of `d ≥ 1` intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct FBox {
    factors: Vec<FInterval>,
}

impl FBox {
    pub fn new(factors: Vec<FInterval>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(FBox { factors })
    }

    /// `[lo_1, hi_1] × … × [lo_d, hi_d]`.
    pub fn closed(bounds: &[(FermatReal, FermatReal)]) -> Result<Self> {
        Self::new(
            bounds
                .iter()
                .map(|(l, u)| FInterval::closed(l.clone(), u.clone()))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[FInterval] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.iter().any(FInterval::is_empty)
    }

    fn check_dim(&self, other: &FBox) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        }
    }

    pub fn contains(&self, x: &[FermatReal]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.factors.iter().zip(x).all(|(i, xi)| i.contains(xi)))
    }

    pub fn intersect(&self, other: &FBox) -> Result<FBox> {
        self.check_dim(other)?;
        Ok(FBox {
            factors: self
                .factors
                .iter()
                .zip(&other.factors)
                .map(|(a, b)| a.intersect(b))
                .collect(),
        })
    }

    /// `self ∖ other` as pairwise disjoint boxes: the i-th slab keeps the
    /// first `i` coordinates inside `other` and puts coordinate `i` outside.
    pub fn difference(&self, other: &FBox) -> Result<Vec<FBox>> {
        let cut = self.intersect(other)?;
        if self.is_empty() {
            return Ok(Vec::new());
        }
        if cut.is_empty() {
            return Ok(vec![self.clone()]);
        }
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for piece in self.factors[i].difference(&cut.factors[i]) {
                let mut factors = Vec::with_capacity(self.dim());
                factors.extend_from_slice(&cut.factors[..i]);
                factors.push(piece);
                factors.extend_from_slice(&self.factors[i + 1..]);
                out.push(FBox { factors });
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({"dims": self.factors.iter().map(FInterval::to_json).collect::<Vec<_>>()})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dims = v
            .get("dims")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("box needs a `dims` array".into()))?;
        Self::new(dims.iter().map(FInterval::from_json).collect::<Result<_>>()?)
    }
}

/// A finite union of pairwise disjoint nonempty boxes of one dimension.
/// Boxes are kept as generated; equality of sets is [`ElementarySet::set_eq`].
#[derive(Clone, Debug, PartialEq)]
pub struct ElementarySet {
    dim: usize,
    boxes: Vec<FBox>,
}

impl ElementarySet {
    /// Fails with `NotDisjoint` if two of the boxes meet.
    pub fn new(dim: usize, boxes: Vec<FBox>) -> Result<Self> {
        let boxes: Vec<FBox> = boxes.into_iter().filter(|b| !b.is_empty()).collect();
        for b in &boxes {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.dim(),
                });
            }
        }
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                if !a.intersect(b)?.is_empty() {
                    return Err(Error::NotDisjoint);
                }
            }
        }
        Ok(ElementarySet { dim, boxes })
    }

    pub fn empty(dim: usize) -> Self {
        ElementarySet {
            dim,
            boxes: Vec::new(),
        }
    }

    pub fn from_box(b: FBox) -> Self {
        let dim = b.dim();
        ElementarySet {
            dim,
            boxes: if b.is_empty() { Vec::new() } else { vec![b] },
        }
    }

    /// One-dimensional set from intervals.
    pub fn from_intervals(intervals: Vec<FInterval>) -> Result<Self> {
        Self::new(
            1,
            intervals
                .into_iter()
                .map(|i| FBox::new(vec![i]))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[FBox] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn check_dim(&self, other: &ElementarySet) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            })
        }
    }

    pub fn contains(&self, x: &[FermatReal]) -> Result<bool> {
        for b in &self.boxes {
            if b.contains(x)? {
                return Ok(true);
            }
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(false)
    }

    fn subtract_box(&self, cut: &FBox) -> Result<Vec<FBox>> {
        let mut out = Vec::new();
        for b in &self.boxes {
            out.extend(b.difference(cut)?);
        }
        Ok(out)
    }

    pub fn difference(&self, other: &ElementarySet) -> Result<ElementarySet> {
        self.check_dim(other)?;
        let mut current = self.clone();
        for cut in &other.boxes {
            current.boxes = current.subtract_box(cut)?;
        }
        Ok(current)
    }

    pub fn union(&self, other: &ElementarySet) -> Result<ElementarySet> {
        let extra = other.difference(self)?;
        let mut boxes = self.boxes.clone();
        boxes.extend(extra.boxes);
        Ok(ElementarySet {
            dim: self.dim,
            boxes,
        })
    }

    pub fn intersection(&self, other: &ElementarySet) -> Result<ElementarySet> {
        self.check_dim(other)?;
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                let c = a.intersect(b)?;
                if !c.is_empty() {
                    boxes.push(c);
                }
            }
        }
        Ok(ElementarySet {
            dim: self.dim,
            boxes,
        })
    }

    pub fn symmetric_difference(&self, other: &ElementarySet) -> Result<ElementarySet> {
        self.difference(other)?.union(&other.difference(self)?)
    }

    /// Equality as sets of points.
    pub fn set_eq(&self, other: &ElementarySet) -> Result<bool> {
        Ok(self.symmetric_difference(other)?.is_empty())
    }

    pub fn to_json(&self) -> Value {
        json!({"boxes": self.boxes.iter().map(FBox::to_json).collect::<Vec<_>>()})
    }

    /// `{"boxes": [{"dims": [..]}, ..]}`, or a single `{"dims": [..]}` box.
    pub fn from_json(v: &Value) -> Result<Self> {
        if v.get("dims").is_some() {
            return Ok(Self::from_box(FBox::from_json(v)?));
        }
        let boxes = v
            .get("boxes")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("elementary set needs a `boxes` array".into()))?;
        let boxes: Vec<FBox> = boxes.iter().map(FBox::from_json).collect::<Result<_>>()?;
        let dim = boxes.first().map(FBox::dim).unwrap_or(1);
        Self::new(dim, boxes)
    }
}

/// Non-oriented `∫_I f = ∫_{inf I}^{sup I} f`; open and closed ends agree.
pub fn integrate_interval(
    f: &QsFunction,
    interval: &FInterval,
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    let Some((lo, hi)) = interval.finite_bounds()? else {
        return Ok(FermatReal::zero());
    };
    if !interval.is_subset(f.domain()) {
        return Err(Error::OutOfDomain(format!("[{lo}, {hi}]")));
    }
    f.check_thick_domain()?;
    Integrand::new(f.alpha().clone(), vec![f.var().to_string()], f.params().to_vec())?
        .integrate_box(&[(lo, hi)], &[0], cfg)
        .map(|b| b.total())
}

/// `Σ_k ∫_{I_k} f` over the intervals of a one-dimensional elementary set.
pub fn integrate_disjoint_union(
    f: &QsFunction,
    set: &ElementarySet,
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    if set.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: set.dim(),
        });
    }
    let mut total = FermatReal::zero();
    for b in set.boxes() {
        total = total + integrate_interval(f, &b.factors()[0], cfg)?;
    }
    Ok(total)
}

/// `∫_B g` as iterated integrals; `perm[0]` is the outermost axis.
pub fn iterated_integral(
    g: &Integrand,
    b: &FBox,
    perm: &[usize],
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    if b.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: b.dim(),
        });
    }
    let mut bounds = Vec::with_capacity(b.dim());
    for factor in b.factors() {
        match factor.finite_bounds()? {
            Some(pair) => bounds.push(pair),
            None => return Ok(FermatReal::zero()),
        }
    }
    Ok(g.integrate_box(&bounds, perm, cfg)?.total())
}

/// `Σ_B ∫_B g` over the boxes of `set`, summed in stored order.
pub fn integrate_elementary(
    g: &Integrand,
    set: &ElementarySet,
    cfg: &QuadratureConfig,
) -> Result<FermatReal> {
    let identity: Vec<usize> = (0..set.dim()).collect();
    let mut total = FermatReal::zero();
    for b in set.boxes() {
        total = total + iterated_integral(g, b, &identity, cfg)?;
    }
    Ok(total)
}
