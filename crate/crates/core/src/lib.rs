//! Discrete causality engine for closed cone fields.
//!
//! The engine samples a product manifold (circles and intervals) on a regular
//! grid, attaches a closed cone to every sample point through a small
//! expression language, and studies the induced causal order combinatorially:
//! reachability futures, recurrence under cone enlargements, neutral versus
//! strict values of causal functions, and staircase Lyapunov functions that
//! approximate a causal function to a prescribed accuracy.
//!
//! Modules mirror the pipeline: [`geometry`] builds grids, [`conedsl`] parses
//! and classifies cone expressions, [`causal_graph`] turns a cone field into
//! directed graphs and answers order queries, [`analysis`] classifies scalar
//! fields against the order, [`lyapunov`] synthesizes and verifies monotone
//! fields, and [`scene`] ties everything to a JSON scene description.

pub mod analysis;
pub mod causal_graph;
pub mod conedsl;
pub mod geometry;
pub mod lyapunov;
pub mod scene;

pub use analysis::{NeutralityReport, ScalarField, ValueBins, VertexTag};
pub use causal_graph::{CausalGraph, Enlargement, VertexSet};
pub use conedsl::{ConeClass, ConeKind, ConeSpec, Expr};
pub use geometry::{Displacement, GridFactor, ManifoldGrid};
pub use lyapunov::{LyapunovReport, StepSpec};
pub use scene::{Scene, SceneContext};
