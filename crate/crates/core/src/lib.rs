//! Fermat reals: a ring of real numbers extended by nilpotent infinitesimals,
//! the lifting of ordinary smooth functions to it, and the integral calculus
//! built on top (primitives, integrals with infinitesimal endpoints, multiple
//! integrals over boxes, divergence and curl as ratios of infinitesimals).

pub mod calculus;
pub mod cli;
pub mod error;
pub mod expr;
pub mod integral;
pub mod lift;
pub mod literal;
pub mod number;
pub mod quadrature;
pub mod region;
pub mod vector;

pub use error::{Error, Result};
pub use expr::{parse, parse_free, CompiledExpr, Expr, Func};
pub use literal::{format_fermat, format_g17, parse_fermat, parse_fermat_ext};
pub use number::{
    coeff_epsilon, product_vanishes, rational, set_coeff_epsilon, truncation_order, FermatExt,
    FermatReal, IdealIndex, Rational, Term,
};
pub use calculus::{QsFunction, StandardPart};
pub use integral::{integral_breakdown, integrate, primitive, Integrand, Primitive, StdInfBreakdown};
pub use lift::{lift_eval, lift_eval_nodewise};
pub use quadrature::{quadrature, QuadratureConfig};
pub use region::{
    integrate_disjoint_union, integrate_elementary, integrate_interval, iterated_integral,
    ElementarySet, FBox, FInterval,
};
pub use vector::{
    circulation, curl, divergence, flux, infinitesimal_ratio, InfinitesimalCycle,
    InfinitesimalParallelepiped, VectorField3,
};
