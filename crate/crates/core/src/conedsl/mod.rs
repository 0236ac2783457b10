//! The expression language for cone fields and scalar functions, plus
//! pointwise cone classification.
//!
//! Cone predicates are boolean expressions in point coordinates `x1..xd`
//! and tangent components `v1..vd`, closed under non-strict comparisons so
//! that every cone is closed once the (never queried) zero vector is
//! adjoined. Scalar functions use the same grammar restricted to `x`.

mod ast;
mod classify;
mod directions;
mod eval;
mod parse;

pub use ast::{Expr, Sort};
pub use classify::{
    classify_cone_at, classify_mask, convexity_spot_check, validate_homogeneity,
    BorderlineRegular, ClassifyError, HomogeneityReport, MarginMode, DEFAULT_GAMMA_MIN,
};
pub use directions::{default_sphere_samples, sphere_sample};
pub use eval::{eval_expr, CompiledExpr, EvalError, Value};
pub use parse::{parse_expr, parse_predicate, parse_scalar, ParseError};

use serde::Serialize;

/// A cone field: one boolean predicate evaluated at (x, v), positively
/// homogeneous in v by convention (checked statistically at scene load).
#[derive(Debug, Clone)]
pub struct ConeSpec {
    expr: Expr,
    dim: usize,
    compiled: CompiledExpr,
}

impl ConeSpec {
    pub fn parse(text: &str, dim: usize) -> Result<Self, ParseError> {
        let expr = parse_predicate(text, dim)?;
        let compiled = CompiledExpr::new(&expr);
        Ok(Self { expr, dim, compiled })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn compiled(&self) -> &CompiledExpr {
        &self.compiled
    }

    /// Membership of the tangent vector `v` in the cone at `x`. Only called
    /// with v != 0.
    pub fn member(&self, x: &[f64], v: &[f64]) -> Result<bool, EvalError> {
        debug_assert!(v.iter().any(|&c| c != 0.0));
        eval_expr(&self.expr, x, v).map(|val| match val {
            Value::Bool(b) => b,
            Value::Real(_) => unreachable!("cone predicates are boolean-sorted"),
        })
    }

    /// Same membership through the compiled program with a reusable stack;
    /// the fast path for grid-wide passes.
    pub fn member_fast(
        &self,
        x: &[f64],
        v: &[f64],
        stack: &mut Vec<f64>,
    ) -> Result<bool, EvalError> {
        self.compiled.eval_bool(x, v, stack)
    }
}

/// A scalar function of position built from the same grammar.
#[derive(Debug, Clone)]
pub struct ScalarExpr {
    expr: Expr,
    dim: usize,
    compiled: CompiledExpr,
}

impl ScalarExpr {
    pub fn parse(text: &str, dim: usize) -> Result<Self, ParseError> {
        let expr = parse_scalar(text, dim)?;
        let compiled = CompiledExpr::new(&expr);
        Ok(Self { expr, dim, compiled })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        eval_expr(&self.expr, x, &[]).map(|val| match val {
            Value::Real(r) => r,
            Value::Bool(_) => unreachable!("scalar expressions are real-sorted"),
        })
    }

    pub fn eval_fast(&self, x: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        self.compiled.eval_real(x, stack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    /// No member direction: the empty cone.
    Degenerate,
    /// Contained in an open half space, witnessed by a supporting form.
    Regular,
    /// Every direction is a member: the full cone.
    Singular,
}

/// Supporting linear form for a regular cone: `p . u >= margin` for every
/// sampled member direction u, with `|p| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub p: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeClass {
    pub kind: ConeKind,
    pub witness: Option<Witness>,
}

impl ConeClass {
    pub fn degenerate() -> Self {
        Self { kind: ConeKind::Degenerate, witness: None }
    }

    pub fn singular() -> Self {
        Self { kind: ConeKind::Singular, witness: None }
    }

    pub fn regular(witness: Witness) -> Self {
        Self { kind: ConeKind::Regular, witness: Some(witness) }
    }
}
