//! Reference solutions and analysis utilities.

pub mod norms;
pub mod radial;
pub mod riemann;
pub mod vortex;

pub use norms::{convergence_rate, error_norms, l2_distance, ErrorReport, MassBaseline};
pub use radial::{radial_bins, RadialBins, RadialReference, RadialSetup, EXPLOSION_CELLS};
pub use riemann::{sod_exact, ExactRiemann, Primitive1D, RiemannStarState, WaveKind};
pub use vortex::vortex_exact;
