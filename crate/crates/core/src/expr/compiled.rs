use num_traits::ToPrimitive;

use super::{finite, Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Load(usize),
    Add,
    Sub,
    Neg,
    Mul,
    Div,
    PowI(i32),
    PowF(f64),
    Call(Func),
}

/// Postfix form of an [`Expr`] with variables resolved to slot indices, for
/// evaluating the same expression at many points.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledExpr {
    /// Compiles `expr` against the slot layout `slots`.
    pub fn new(expr: &Expr, slots: &[&str]) -> Result<Self> {
        let mut ops = Vec::with_capacity(expr.size());
        emit(expr, slots, &mut ops)?;
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Load(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                _ => {}
            }
            max_depth = max_depth.max(depth);
        }
        Ok(CompiledExpr {
            ops,
            depth: max_depth,
        })
    }

    /// Evaluates at the point whose coordinates are `values` (slot order).
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Load(i) => stack.push(values[i]),
                Op::Neg => {
                    let a = stack.pop().expect("operand");
                    stack.push(-a);
                }
                Op::PowI(n) => {
                    let a = stack.pop().expect("operand");
                    if a == 0.0 && n < 0 {
                        return Err(Error::Domain("negative power of zero".into()));
                    }
                    stack.push(a.powi(n));
                }
                Op::PowF(r) => {
                    let a = stack.pop().expect("operand");
                    if !(a > 0.0) {
                        return Err(Error::Domain(format!(
                            "non-integer power of non-positive base {a}"
                        )));
                    }
                    stack.push(a.powf(r));
                }
                Op::Call(f) => {
                    let a = stack.pop().expect("operand");
                    stack.push(f.apply(a)?);
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let b = stack.pop().expect("operand");
                    let a = stack.pop().expect("operand");
                    stack.push(match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        _ => {
                            if b == 0.0 {
                                return Err(Error::Domain("division by zero".into()));
                            }
                            a / b
                        }
                    });
                }
            }
        }
        finite(stack.pop().expect("result"))
    }
}

fn emit(e: &Expr, slots: &[&str], ops: &mut Vec<Op>) -> Result<()> {
    match e {
        Expr::Const(c) => ops.push(Op::Const(*c)),
        Expr::Var(name) => {
            let i = slots
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
            ops.push(Op::Load(i));
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            emit(a, slots, ops)?;
            emit(b, slots, ops)?;
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
        Expr::Neg(a) => {
            emit(a, slots, ops)?;
            ops.push(Op::Neg);
        }
        Expr::PowInt(a, n) => {
            emit(a, slots, ops)?;
            ops.push(Op::PowI(*n));
        }
        Expr::PowRat(a, r) => {
            emit(a, slots, ops)?;
            ops.push(Op::PowF(r.to_f64().unwrap_or(f64::NAN)));
        }
        Expr::Call(f, a) => {
            emit(a, slots, ops)?;
            ops.push(Op::Call(*f));
        }
    }
    Ok(())
}
