//! Projection families with prescribed approximate diagonals: rational
//! approximation, the finite block construction, and the discrete, tracial
//! and UHF pipelines built on it.

mod approx;
mod block;
mod discrete;
mod family;
mod rounding;
mod spec;
mod tracial;
mod uhf;

pub use approx::{approx_rationals_step, approx_rationals_table, depth_for, RationalTable};
pub use block::{carpenter_block, BlockConstruction, BlockPlan, BlockReport, ClampRecord};
pub use discrete::{
    carpenter_discrete, BudgetStage, DiscreteConstruction, DiscreteReport, HeadAssignment, IndexEntry, IndexRole,
    TailClass,
};
pub use family::{FamilyBlock, ProjectionFamily, SpectrumRecurrence};
pub use spec::{DiagonalSpec, JointPartitionSpec};
pub use tracial::{
    carpenter_tracial, carpenter_tracial_capped, TraceEntry, TracialConstruction, TracialPartition, TracialReport,
    DEFAULT_MAX_DIM,
};
pub use uhf::{carpenter_uhf, carpenter_uhf_capped, UhfConstruction, UhfReport};

pub(crate) use rounding::{colors_from_counts, round_with_sum};
