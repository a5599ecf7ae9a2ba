//! Filtered discontinuous Galerkin solver for hyperbolic conservation laws.
//!
//! A nodal DG operator and a first-order finite-volume operator advance the
//! same state; after every SSP Runge–Kutta stage the two results are blended
//! nodewise through a filter function, so the high-order result survives
//! where it is close to the monotone one and is replaced near
//! discontinuities.

pub mod amr;
pub mod basis;
pub mod config;
pub mod discretization;
pub mod error;
pub mod field;
pub mod filter;
pub mod high_order;
pub mod low_order;
pub mod mesh;
pub mod models;
pub mod output;
pub mod reference;
pub mod runner;
pub mod time_stepper;

pub use amr::{AdaptPolicy, IndicatorField, Transfer};
pub use basis::{LobattoBasis1D, TensorBasis2D};
pub use config::{FieldFormat, RunConfig};
pub use discretization::Discretization;
pub use error::{Error, Result};
pub use field::{CellAverageField, NodalField, StageVector};
pub use filter::{FilterConfig, FilterFunction, FilterMode};
pub use high_order::BoundaryRule;
pub use mesh::{Cell, CellKey, Face, QuadMesh, Rect};
pub use models::{
    AdvectionModel, Benchmark, BenchmarkKind, EulerModel, EulerState, IdealGasEos, PdeModel,
    State,
};
pub use output::{emit_table, HistoryRow, TableStyle};
pub use reference::ErrorReport;
pub use runner::{convergence, run, RunOutput, RunReport};
pub use time_stepper::{Blend, SchemeKind, StageScheme, StepController, StepMode};
