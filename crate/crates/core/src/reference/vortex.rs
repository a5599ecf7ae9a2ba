//! Exact isentropic vortex: the initial state carried with the free stream
//! on a periodic box.

use crate::mesh::Rect;
use crate::models::{EulerState, IdealGasEos, Point, State, VortexParams};

/// Conserved state at `x` and time `t`.
pub fn vortex_exact(x: Point, t: f64, params: &VortexParams, domain: &Rect) -> State {
    let wrap = |d: f64, len: f64| d - len * (d / len).round();
    let dx = wrap(x[0] - params.center[0] - params.u_inf[0] * t, domain.width());
    let dy = wrap(x[1] - params.center[1] - params.u_inf[1] * t, domain.height());
    let (rho, vel, p) = params.primitive_at_offset(dx, dy);
    EulerState::from_primitive(rho, vel, p, &IdealGasEos { gamma: params.gamma }).to_array()
}
