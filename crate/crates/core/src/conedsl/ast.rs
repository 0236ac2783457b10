//! Expression trees for cone predicates and scalar functions.

use std::fmt;

/// Abstract syntax over reals and booleans. Coordinate and tangent indices
/// are zero-based internally; the surface syntax (`x1`, `v1`) is one-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Vel(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
    Min(Vec<Expr>),
    Max(Vec<Expr>),
    Ge(Box<Expr>, Box<Expr>),
    Le(Box<Expr>, Box<Expr>),
    Gt(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

/// Value sort of a subexpression. Booleans appear only at comparison roots
/// and above; everything below is real-valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Real,
    Bool,
}

impl Expr {
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Num(_)
            | Expr::Coord(_)
            | Expr::Vel(_)
            | Expr::Neg(_)
            | Expr::Add(..)
            | Expr::Sub(..)
            | Expr::Mul(..)
            | Expr::Div(..)
            | Expr::Pow(..)
            | Expr::Abs(_)
            | Expr::Min(_)
            | Expr::Max(_) => Sort::Real,
            Expr::Ge(..)
            | Expr::Le(..)
            | Expr::Gt(..)
            | Expr::Lt(..)
            | Expr::And(..)
            | Expr::Or(..)
            | Expr::Not(_) => Sort::Bool,
        }
    }

    /// True when any tangent component `v_i` occurs.
    pub fn uses_velocity(&self) -> bool {
        match self {
            Expr::Vel(_) => true,
            Expr::Num(_) | Expr::Coord(_) => false,
            Expr::Neg(e) | Expr::Abs(e) | Expr::Not(e) | Expr::Pow(e, _) => e.uses_velocity(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Ge(a, b)
            | Expr::Le(a, b)
            | Expr::Gt(a, b)
            | Expr::Lt(a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b) => a.uses_velocity() || b.uses_velocity(),
            Expr::Min(es) | Expr::Max(es) => es.iter().any(Expr::uses_velocity),
        }
    }
}

/// Fully parenthesized printing; reparsing the output yields an identical
/// tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, es: &[Expr]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")
        }
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Vel(i) => write!(f, "v{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(b, k) => write!(f, "({b}^{k})"),
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Min(es) => list(f, "min", es),
            Expr::Max(es) => list(f, "max", es),
            Expr::Ge(a, b) => write!(f, "({a} >= {b})"),
            Expr::Le(a, b) => write!(f, "({a} <= {b})"),
            Expr::Gt(a, b) => write!(f, "({a} > {b})"),
            Expr::Lt(a, b) => write!(f, "({a} < {b})"),
            Expr::And(a, b) => write!(f, "({a} && {b})"),
            Expr::Or(a, b) => write!(f, "({a} || {b})"),
            Expr::Not(e) => write!(f, "(!{e})"),
        }
    }
}
