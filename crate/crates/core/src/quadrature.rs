//! Globally adaptive Gauss–Kronrod (7/15) quadrature over standard intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances for the real quadratures underneath every integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

/// Environment variable overriding both default tolerances.
pub const TOL_ENV_VAR: &str = "FERMAT_QUAD_TOL";

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 1 << 15,
        }
    }
}

impl QuadratureConfig {
    /// Both tolerances set to `tol`.
    pub fn with_tol(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        Ok(QuadratureConfig {
            abs_tol: tol,
            rel_tol: tol,
            ..Default::default()
        })
    }

    /// Defaults, with tolerances taken from `FERMAT_QUAD_TOL` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOL_ENV_VAR) {
            Ok(text) => {
                let tol: f64 = text.trim().parse().map_err(|_| {
                    Error::syntax(0, format!("{TOL_ENV_VAR} is not a number: `{text}`"))
                })?;
                Self::with_tol(tol)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    /// Tolerances for quadratures nested inside an outer one, tight enough
    /// that inner error does not stall outer refinement.
    pub(crate) fn inner(&self) -> Self {
        QuadratureConfig {
            abs_tol: self.abs_tol * 0.01,
            rel_tol: (self.rel_tol * 0.01).max(1e-14),
            max_subdivisions: self.max_subdivisions,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const ROUNDOFF_FACTOR: f64 = 1000.0;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut f1 = [0.0; 7];
    let mut f2 = [0.0; 7];
    for k in 0..7 {
        let dx = half * XGK[k];
        let lo = f(center - dx)?;
        let hi = f(center + dx)?;
        f1[k] = lo;
        f2[k] = hi;
        kronrod += WGK[k] * (lo + hi);
        abs_sum += WGK[k] * (lo.abs() + hi.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (lo + hi);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for k in 0..7 {
        asc += WGK[k] * ((f1[k] - mean).abs() + (f2[k] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = abs_sum * half.abs();
    let resasc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        resabs,
    })
}

/// `∫_a^b f` by globally adaptive GK15: the segment with the largest error
/// estimate is bisected until the summed estimate meets the tolerance.
/// Oriented: `b < a` gives the negated integral, `a == b` gives 0.
pub fn quadrature(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    adaptive(f, a, b, cfg, false)
}

/// With `roundoff_ok`, also stops once the estimate is within the rounding
/// noise of the summed `∫|f|`; used only for internally tightened levels.
fn adaptive(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    roundoff_ok: bool,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Unbounded);
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return Ok(-adaptive(f, b, a, cfg, roundoff_ok)?);
    }
    let first = gk15(f, a, b)?;
    let roundoff = if roundoff_ok {
        ROUNDOFF_FACTOR * f64::EPSILON * first.resabs
    } else {
        0.0
    };
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1usize;
    loop {
        if !total.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * total.abs()).max(roundoff) {
            return Ok(heap.iter().map(|s| s.value).sum());
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::ToleranceNotReached {
                subdivisions,
                estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::ToleranceNotReached {
                subdivisions,
                estimate: error,
            });
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions.is_multiple_of(64) {
            // Re-sum to keep the running totals free of cancellation drift.
            total = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Iterated quadrature of `f` over a standard box. `axes` lists
/// `(coordinate, lower, upper)` from the outermost integral inwards; the
/// coordinates not listed keep the values already stored in `point`.
pub fn nested_quadrature(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    axes: &[(usize, f64, f64)],
    point: &mut [f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    match axes.split_first() {
        None => f(point),
        Some((&(i, a, b), rest)) => {
            let inner = cfg.inner();
            let mut g = |t| {
                point[i] = t;
                nested_level(f, rest, point, &inner)
            };
            quadrature(&mut g, a, b, cfg)
        }
    }
}

fn nested_level(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    axes: &[(usize, f64, f64)],
    point: &mut [f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    match axes.split_first() {
        None => f(point),
        Some((&(i, a, b), rest)) => {
            let inner = cfg.inner();
            let mut g = |t| {
                point[i] = t;
                nested_level(f, rest, point, &inner)
            };
            adaptive(&mut g, a, b, cfg, true)
        }
    }
}
