//! Expression evaluation: a reference tree walk and a compiled postfix
//! program for hot loops.
//!
//! Both routes are eager (no short-circuiting of `&&`/`||`), so a division
//! by zero is reported identically regardless of the route or of operand
//! order.

use thiserror::Error;

use super::ast::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("division by zero while evaluating expression")]
pub struct EvalError;

/// Result of evaluating a subexpression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Bool(bool),
}

impl Value {
    fn real(self) -> f64 {
        match self {
            Value::Real(r) => r,
            Value::Bool(_) => unreachable!("sort checking rejects booleans here"),
        }
    }

    fn bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Real(_) => unreachable!("sort checking rejects numbers here"),
        }
    }
}

/// Reference evaluator. Assumes a sort-checked tree.
pub fn eval_expr(e: &Expr, x: &[f64], v: &[f64]) -> Result<Value, EvalError> {
    let real = |e: &Expr| -> Result<f64, EvalError> { Ok(eval_expr(e, x, v)?.real()) };
    Ok(match e {
        Expr::Num(n) => Value::Real(*n),
        Expr::Coord(i) => Value::Real(x[*i]),
        Expr::Vel(i) => Value::Real(v[*i]),
        Expr::Neg(a) => Value::Real(-real(a)?),
        Expr::Add(a, b) => Value::Real(real(a)? + real(b)?),
        Expr::Sub(a, b) => Value::Real(real(a)? - real(b)?),
        Expr::Mul(a, b) => Value::Real(real(a)? * real(b)?),
        Expr::Div(a, b) => {
            let num = real(a)?;
            let den = real(b)?;
            if den == 0.0 {
                return Err(EvalError);
            }
            Value::Real(num / den)
        }
        Expr::Pow(a, k) => Value::Real(real(a)?.powi(*k as i32)),
        Expr::Abs(a) => Value::Real(real(a)?.abs()),
        Expr::Min(es) => {
            let mut acc = real(&es[0])?;
            for e in &es[1..] {
                acc = acc.min(real(e)?);
            }
            Value::Real(acc)
        }
        Expr::Max(es) => {
            let mut acc = real(&es[0])?;
            for e in &es[1..] {
                acc = acc.max(real(e)?);
            }
            Value::Real(acc)
        }
        Expr::Ge(a, b) => Value::Bool(real(a)? >= real(b)?),
        Expr::Le(a, b) => Value::Bool(real(a)? <= real(b)?),
        Expr::Gt(a, b) => Value::Bool(real(a)? > real(b)?),
        Expr::Lt(a, b) => Value::Bool(real(a)? < real(b)?),
        Expr::And(a, b) => {
            let l = eval_expr(a, x, v)?.bool();
            let r = eval_expr(b, x, v)?.bool();
            Value::Bool(l && r)
        }
        Expr::Or(a, b) => {
            let l = eval_expr(a, x, v)?.bool();
            let r = eval_expr(b, x, v)?.bool();
            Value::Bool(l || r)
        }
        Expr::Not(a) => Value::Bool(!eval_expr(a, x, v)?.bool()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Num(f64),
    Coord(u8),
    Vel(u8),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Abs,
    Min(u8),
    Max(u8),
    Ge,
    Le,
    Gt,
    Lt,
    And,
    Or,
    Not,
}

/// Postfix program over an f64 stack; booleans are 1.0 / 0.0. Compiled once
/// per expression and evaluated with a caller-owned scratch stack so hot
/// loops do not allocate.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledExpr {
    pub fn new(e: &Expr) -> Self {
        let mut ops = Vec::new();
        compile(e, &mut ops);
        let mut depth = 0usize;
        let mut top = 0usize;
        for op in &ops {
            let (pop, push) = match op {
                Op::Num(_) | Op::Coord(_) | Op::Vel(_) => (0, 1),
                Op::Neg | Op::Abs | Op::Not | Op::Pow(_) => (1, 1),
                Op::Min(n) | Op::Max(n) => (*n as usize, 1),
                _ => (2, 1),
            };
            top = top - pop + push;
            depth = depth.max(top);
        }
        Self { ops, depth }
    }

    pub fn stack_depth(&self) -> usize {
        self.depth
    }

    /// Raw evaluation; the caller reuses `stack` across calls.
    pub fn eval_raw(&self, x: &[f64], v: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        stack.clear();
        stack.reserve(self.depth);
        let mut divided_by_zero = false;
        for op in &self.ops {
            match op {
                Op::Num(n) => stack.push(*n),
                Op::Coord(i) => stack.push(x[*i as usize]),
                Op::Vel(i) => stack.push(v[*i as usize]),
                Op::Neg => {
                    let a = stack.last_mut().unwrap();
                    *a = -*a;
                }
                Op::Abs => {
                    let a = stack.last_mut().unwrap();
                    *a = a.abs();
                }
                Op::Not => {
                    let a = stack.last_mut().unwrap();
                    *a = if *a == 0.0 { 1.0 } else { 0.0 };
                }
                Op::Pow(k) => {
                    let a = stack.last_mut().unwrap();
                    *a = a.powi(*k);
                }
                Op::Min(n) | Op::Max(n) => {
                    let n = *n as usize;
                    let from = stack.len() - n;
                    let fold: fn(f64, f64) -> f64 =
                        if matches!(op, Op::Min(_)) { f64::min } else { f64::max };
                    let mut acc = stack[from];
                    for k in from + 1..stack.len() {
                        acc = fold(acc, stack[k]);
                    }
                    stack.truncate(from);
                    stack.push(acc);
                }
                binary => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a = match binary {
                        Op::Add => *a + b,
                        Op::Sub => *a - b,
                        Op::Mul => *a * b,
                        Op::Div => {
                            if b == 0.0 {
                                divided_by_zero = true;
                                f64::NAN
                            } else {
                                *a / b
                            }
                        }
                        Op::Ge => f64::from(*a >= b),
                        Op::Le => f64::from(*a <= b),
                        Op::Gt => f64::from(*a > b),
                        Op::Lt => f64::from(*a < b),
                        Op::And => f64::from(*a != 0.0 && b != 0.0),
                        Op::Or => f64::from(*a != 0.0 || b != 0.0),
                        _ => unreachable!(),
                    };
                }
            }
        }
        if divided_by_zero {
            return Err(EvalError);
        }
        Ok(stack[0])
    }

    pub fn eval_bool(&self, x: &[f64], v: &[f64], stack: &mut Vec<f64>) -> Result<bool, EvalError> {
        Ok(self.eval_raw(x, v, stack)? != 0.0)
    }

    pub fn eval_real(&self, x: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        self.eval_raw(x, &[], stack)
    }
}

fn compile(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Num(n) => ops.push(Op::Num(*n)),
        Expr::Coord(i) => ops.push(Op::Coord(*i as u8)),
        Expr::Vel(i) => ops.push(Op::Vel(*i as u8)),
        Expr::Neg(a) => {
            compile(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Abs(a) => {
            compile(a, ops);
            ops.push(Op::Abs);
        }
        Expr::Not(a) => {
            compile(a, ops);
            ops.push(Op::Not);
        }
        Expr::Pow(a, k) => {
            compile(a, ops);
            ops.push(Op::Pow(*k as i32));
        }
        Expr::Min(es) | Expr::Max(es) => {
            for a in es {
                compile(a, ops);
            }
            let n = es.len() as u8;
            ops.push(if matches!(e, Expr::Min(_)) { Op::Min(n) } else { Op::Max(n) });
        }
        Expr::Add(a, b)
        | Expr::Sub(a, b)
        | Expr::Mul(a, b)
        | Expr::Div(a, b)
        | Expr::Ge(a, b)
        | Expr::Le(a, b)
        | Expr::Gt(a, b)
        | Expr::Lt(a, b)
        | Expr::And(a, b)
        | Expr::Or(a, b) => {
            compile(a, ops);
            compile(b, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                Expr::Div(..) => Op::Div,
                Expr::Ge(..) => Op::Ge,
                Expr::Le(..) => Op::Le,
                Expr::Gt(..) => Op::Gt,
                Expr::Lt(..) => Op::Lt,
                Expr::And(..) => Op::And,
                Expr::Or(..) => Op::Or,
                _ => unreachable!(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_expr;
    use super::*;
    use proptest::prelude::*;

    fn both(text: &str, dim: usize, x: &[f64], v: &[f64]) -> (Result<Value, EvalError>, Result<f64, EvalError>) {
        let e = parse_expr(text, dim).unwrap();
        let tree = eval_expr(&e, x, v);
        let mut stack = Vec::new();
        let compiled = CompiledExpr::new(&e).eval_raw(x, v, &mut stack);
        (tree, compiled)
    }

    #[test]
    fn membership_examples() {
        let (t, c) = both("v2 >= 0 && v1*v2 >= x3^2*v1^2 + v3^2", 3, &[0.0, 0.0, 1.0], &[1.0, 5.0, 1.0]);
        assert_eq!(t, Ok(Value::Bool(true)));
        assert_eq!(c, Ok(1.0));
        let (t, c) = both("v2 >= 0 && v1*v2 >= x3^2*v1^2 + v3^2", 3, &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(t, Ok(Value::Bool(false)));
        assert_eq!(c, Ok(0.0));
        let (t, _) = both("v1 >= abs(v2)", 2, &[0.3, -0.7], &[1.0, 1.0]);
        assert_eq!(t, Ok(Value::Bool(true)));
    }

    #[test]
    fn division_by_zero_errors_in_both_routes() {
        // Eager evaluation: the true left branch of || does not mask the
        // division on the right.
        let (t, c) = both("v1 >= 0 || v1/x1 >= 0", 1, &[0.0], &[1.0]);
        assert_eq!(t, Err(EvalError));
        assert_eq!(c, Err(EvalError));
    }

    #[test]
    fn min_max_abs() {
        let (t, c) = both("min(x1, x2, 3) + max(x1, x2) - abs(-2)", 2, &[5.0, -1.0], &[]);
        assert_eq!(t, Ok(Value::Real(-1.0 + 5.0 - 2.0)));
        assert_eq!(c, Ok(2.0));
    }

    #[test]
    fn integer_power() {
        let (t, _) = both("(-2)^2 + 2^0", 1, &[0.0], &[]);
        assert_eq!(t, Ok(Value::Real(5.0)));
        let (t, _) = both("-2^2", 1, &[0.0], &[]);
        // The power's base is a full unary term, sign included.
        assert_eq!(t, Ok(Value::Real(4.0)));
    }

    // Only parser-reachable trees: literals are nonnegative (the parser
    // builds negative values as Neg(Num)).
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..4.0).prop_map(Expr::Num),
            (0usize..2).prop_map(Expr::Coord),
            (0usize..2).prop_map(Expr::Vel),
        ];
        leaf.prop_recursive(4, 48, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                inner.clone().prop_map(|e| Expr::Abs(Box::new(e))),
                (inner.clone(), 0u32..4).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::Min),
                proptest::collection::vec(inner, 2..4).prop_map(Expr::Max),
            ]
        })
    }

    proptest! {
        #[test]
        fn compiled_matches_tree_walk(e in arb_expr(), xs in proptest::array::uniform2(-3.0f64..3.0), vs in proptest::array::uniform2(-3.0f64..3.0)) {
            let tree = eval_expr(&e, &xs, &vs);
            let mut stack = Vec::new();
            let compiled = CompiledExpr::new(&e).eval_raw(&xs, &vs, &mut stack);
            match (tree, compiled) {
                (Ok(Value::Real(a)), Ok(b)) => {
                    prop_assert!(a == b || (a.is_nan() && b.is_nan()), "{a} vs {b}");
                }
                (Err(EvalError), Err(EvalError)) => {}
                (t, c) => prop_assert!(false, "diverged: {t:?} vs {c:?}"),
            }
        }

        #[test]
        fn round_trip_display(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expr(&printed, 2).map_err(|err| {
                TestCaseError::fail(format!("{printed}: {err:?}"))
            })?;
            prop_assert_eq!(e, reparsed);
        }
    }
}
