//! Constraint-based chart model: deconstruct a static vector chart into
//! control points and spatial constraints, then relax it after edits.

pub mod model;
pub mod solver;
pub mod svg;
pub mod infer;
pub mod fixture;
pub mod manipulate;
pub mod export;
pub mod session;
