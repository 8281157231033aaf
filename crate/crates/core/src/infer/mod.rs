//! Constraint inference for parsed charts.

pub mod axis;
pub mod baseline;
pub mod circles;
pub mod constraints;
pub mod intervals;
mod shape;

pub use axis::{classify_axis, AxisClassification};
pub use baseline::{build_axes, detect_baseline_axis, BaselineError};
pub use circles::{detect_circle_collisions, CircleCollisions};
pub use constraints::{build_constraints, group_constraints, tick_of, ConstraintSystem, GROUPED_GAP, STACKED_GAP};
pub use intervals::{detect_even_intervals, IntervalDetection, PeriodicityError};
pub use shape::is_rect_like;
pub mod pipeline;
pub use pipeline::{infer_scene, InferError, InferWarning, Inference};
