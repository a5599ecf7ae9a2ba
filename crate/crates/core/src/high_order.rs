//! Nodal DG operator: one forward-Euler substep of the collocated
//! Gauss–Lobatto weak form with Rusanov interface fluxes.
//!
//! With collocation the mass matrix is diagonal, `M_i = w_i |K| / 4`, and
//! the semi-discrete update at node `i` is
//!
//! ```text
//! du_i/dt = (1/M_i) [ sum_K F(u_h) . grad(phi_i)  -  sum_faces Fhat . n phi_i ]
//! ```
//!
//! On a hanging face the fine side owns the face quadrature; the coarse
//! side's trace is its polynomial evaluated at the fine points and its
//! lifting is accumulated over both sub-faces, so the two sides see the same
//! flux values and the scheme stays conservative.

use serde::{Deserialize, Serialize};

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::{FaceSide, QuadMesh};
use crate::models::{Benchmark, PdeModel, Point, State, MAX_VARS};

/// Exterior-state rule on physical boundary faces.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryRule {
    /// Only valid on meshes without physical boundaries.
    Periodic,
    Dirichlet(State),
    /// Dirichlet data taken from the benchmark's initial condition.
    InitialState(Benchmark),
    /// Scalar advection: exterior value 0.
    InflowZero,
    /// Exterior copies the interior trace.
    Transmissive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
    InitialState,
    InflowZero,
    Transmissive,
}

impl BoundaryRule {
    pub fn kind(&self) -> BoundaryKind {
        match self {
            BoundaryRule::Periodic => BoundaryKind::Periodic,
            BoundaryRule::Dirichlet(_) => BoundaryKind::Dirichlet,
            BoundaryRule::InitialState(_) => BoundaryKind::InitialState,
            BoundaryRule::InflowZero => BoundaryKind::InflowZero,
            BoundaryRule::Transmissive => BoundaryKind::Transmissive,
        }
    }
}

/// Exterior trace on a boundary face with outward normal `n`.
pub fn apply_boundary(
    rule: &BoundaryRule,
    interior: &State,
    x: Point,
    _t: f64,
    _n: [f64; 2],
) -> Result<State> {
    match rule {
        BoundaryRule::Periodic => Err(Error::Config(format!(
            "periodic boundary rule reached a physical boundary at ({}, {})",
            x[0], x[1]
        ))),
        BoundaryRule::Dirichlet(s) => Ok(*s),
        BoundaryRule::InitialState(b) => Ok(b.initial_condition(x)),
        BoundaryRule::InflowZero => Ok([0.0; MAX_VARS]),
        BoundaryRule::Transmissive => Ok(*interior),
    }
}

/// `Fhat = (F(wl) + F(wr)) . n / 2 - lambda (wr - wl) / 2`, with `lambda` the
/// larger of the two wave speeds along `n`.
pub fn rusanov_flux<M: PdeModel + ?Sized>(
    model: &M,
    wl: &State,
    wr: &State,
    x: Point,
    t: f64,
    n: [f64; 2],
) -> Result<State> {
    let (fl, sl) = model.normal_flux_and_speed(wl, x, t, n)?;
    let (fr, sr) = model.normal_flux_and_speed(wr, x, t, n)?;
    let lambda = sl.max(sr);
    let mut out = [0.0; MAX_VARS];
    for v in 0..model.n_vars() {
        out[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * lambda * (wr[v] - wl[v]);
    }
    Ok(out)
}

/// Node index of the `t`-th face node at the low (`end = 0`) or high
/// (`end = k`) end of `axis`.
#[inline]
pub(crate) fn face_node(n1: usize, axis: usize, end: usize, t: usize) -> usize {
    if axis == 0 {
        end + n1 * t
    } else {
        t + n1 * end
    }
}

impl<M: PdeModel> Discretization<M> {
    /// Trace of `side`'s polynomial at face point `q`.
    #[inline]
    fn trace(&self, v: &NodalField, side: FaceSide, axis: usize, end: usize, q: usize) -> State {
        let n1 = self.basis.n1();
        match side.half {
            None => v.node(side.cell, face_node(n1, axis, end, q)),
            Some(h) => {
                let row = &self.half_interp[h as usize][q];
                let nv = v.n_vars();
                let mut s = [0.0; MAX_VARS];
                for (j, &c) in row.iter().enumerate() {
                    let u = v.node(side.cell, face_node(n1, axis, end, j));
                    for var in 0..nv {
                        s[var] += c * u[var];
                    }
                }
                s
            }
        }
    }

    /// Subtract `sign * (1/M_i) int_face fhat phi_i` from the residual of
    /// `side`'s face nodes.
    #[allow(clippy::too_many_arguments)]
    fn lift(
        &self,
        mesh: &QuadMesh,
        res: &mut [f64],
        nv: usize,
        side: FaceSide,
        axis: usize,
        end: usize,
        face_len: f64,
        fhat: &[State],
        sign: f64,
    ) {
        let n1 = self.basis.n1();
        let npc = n1 * n1;
        let w = self.basis.basis1d().weights();
        let cell = mesh.cell(side.cell);
        let jac = 0.25 * cell.area();
        let base = side.cell * npc * nv;
        match side.half {
            None => {
                for (q, f) in fhat.iter().enumerate() {
                    let coef = sign * w[q] * 0.5 * face_len / (w[end] * w[q] * jac);
                    let i = face_node(n1, axis, end, q);
                    for var in 0..nv {
                        res[base + i * nv + var] -= coef * f[var];
                    }
                }
            }
            Some(h) => {
                let interp = &self.half_interp[h as usize];
                for j in 0..n1 {
                    let i = face_node(n1, axis, end, j);
                    let scale = sign * 0.5 * face_len / (w[end] * w[j] * jac);
                    for (q, f) in fhat.iter().enumerate() {
                        let coef = scale * w[q] * interp[q][j];
                        for var in 0..nv {
                            res[base + i * nv + var] -= coef * f[var];
                        }
                    }
                }
            }
        }
    }

    /// Semi-discrete DG right-hand side `R(v)`, laid out like `v`.
    pub fn dg_residual(&self, mesh: &QuadMesh, v: &NodalField, t: f64) -> Result<Vec<f64>> {
        v.check_mesh(mesh)?;
        let nv = self.model.n_vars();
        if v.n_vars() != nv || v.degree() != self.degree() {
            return Err(Error::MeshMismatch(format!(
                "field has k={} with {} vars, operator expects k={} with {nv}",
                v.degree(),
                v.n_vars(),
                self.degree()
            )));
        }
        let n1 = self.basis.n1();
        let npc = n1 * n1;
        let mut res = vec![0.0; v.values().len()];
        let mut fx = vec![[0.0; MAX_VARS]; npc];
        let mut fy = vec![[0.0; MAX_VARS]; npc];

        for (ci, cell) in mesh.cells().iter().enumerate() {
            let sx = 2.0 / cell.extent[0];
            let sy = 2.0 / cell.extent[1];
            for i in 0..npc {
                let u = v.node(ci, i);
                let x = cell.map(self.basis.node(i));
                let [f, g] = self.model.flux(&u, x, t).map_err(|e| e.in_cell(ci))?;
                fx[i] = f;
                fy[i] = g;
            }
            let base = ci * npc * nv;
            for b in 0..n1 {
                for a in 0..n1 {
                    let mut acc = [0.0; MAX_VARS];
                    let row_a = &self.vol[a];
                    let row_b = &self.vol[b];
                    for c in 0..n1 {
                        let cx = sx * row_a[c];
                        let cy = sy * row_b[c];
                        let jx = c + n1 * b;
                        let jy = a + n1 * c;
                        for var in 0..nv {
                            acc[var] += cx * fx[jx][var] + cy * fy[jy][var];
                        }
                    }
                    let i = a + n1 * b;
                    res[base + i * nv..base + i * nv + nv].copy_from_slice(&acc[..nv]);
                }
            }
        }

        let k = n1 - 1;
        let nodes = self.basis.basis1d().nodes();
        let mut fhat = vec![[0.0; MAX_VARS]; n1];
        for face in mesh.faces() {
            let axis = face.axis;
            let n = face.normal();
            let outward_right = [-n[0], -n[1]];
            for (q, &s) in nodes.iter().enumerate() {
                let x = face.point(s);
                let (ul, ur) = match (face.left, face.right) {
                    (Some(l), Some(r)) => (
                        self.trace(v, l, axis, k, q),
                        self.trace(v, r, axis, 0, q),
                    ),
                    (Some(l), None) => {
                        let ul = self.trace(v, l, axis, k, q);
                        (ul, apply_boundary(&self.bc, &ul, x, t, n)?)
                    }
                    (None, Some(r)) => {
                        let ur = self.trace(v, r, axis, 0, q);
                        (apply_boundary(&self.bc, &ur, x, t, outward_right)?, ur)
                    }
                    (None, None) => unreachable!("face without cells"),
                };
                let owner = face.left.or(face.right).map_or(0, |s| s.cell);
                fhat[q] = rusanov_flux(&self.model, &ul, &ur, x, t, n)
                    .map_err(|e| e.in_cell(owner))?;
            }
            if let Some(l) = face.left {
                self.lift(mesh, &mut res, nv, l, axis, k, face.length, &fhat, 1.0);
            }
            if let Some(r) = face.right {
                self.lift(mesh, &mut res, nv, r, axis, 0, face.length, &fhat, -1.0);
            }
        }
        Ok(res)
    }

    /// `S^H(v) = v + dt R(v)`.
    pub fn dg_euler_substep(
        &self,
        mesh: &QuadMesh,
        v: &NodalField,
        t: f64,
        dt: f64,
    ) -> Result<NodalField> {
        Self::check_dt(dt)?;
        let r = self.dg_residual(mesh, v, t)?;
        let mut out = v.clone();
        for (o, ri) in out.values_mut().iter_mut().zip(r) {
            *o += dt * ri;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::models::{AdvectionModel, EulerModel, EulerState, IdealGasEos, VelocityField};
    use crate::mesh::Rect;

    fn advection(vel: [f64; 2]) -> AdvectionModel {
        AdvectionModel::new(VelocityField::Uniform { velocity: vel })
    }

    #[test]
    fn rusanov_examples() {
        let m = advection([1.0, 0.0]);
        let f = rusanov_flux(&m, &[1.0, 0.0, 0.0, 0.0], &[0.0; 4], [0.0; 2], 0.0, [1.0, 0.0])
            .unwrap();
        assert_eq!(f[0], 1.0);
        let same = rusanov_flux(&m, &[0.7; 4], &[0.7; 4], [0.0; 2], 0.0, [1.0, 0.0]).unwrap();
        assert!((same[0] - 0.7).abs() < 1e-15);

        let e = EulerModel::default();
        let eos = IdealGasEos::default();
        let l = EulerState::from_primitive(1.0, [0.0, 0.0], 1.0, &eos).to_array();
        let r = EulerState::from_primitive(0.125, [0.0, 0.0], 0.1, &eos).to_array();
        let f = rusanov_flux(&e, &l, &r, [0.0; 2], 0.0, [1.0, 0.0]).unwrap();
        // lambda = sqrt(1.4) from the left state
        let expected = -0.5 * 1.4f64.sqrt() * (0.125 - 1.0);
        assert!((f[0] - expected).abs() < 1e-14);
        assert!((f[0] - 0.51766).abs() < 1e-5);
    }

    #[test]
    fn boundary_rules() {
        let s = [0.3, 0.1, 0.0, 2.0];
        assert_eq!(
            apply_boundary(&BoundaryRule::Transmissive, &s, [0.0; 2], 0.0, [1.0, 0.0]).unwrap(),
            s
        );
        assert_eq!(
            apply_boundary(&BoundaryRule::InflowZero, &s, [0.0; 2], 0.0, [1.0, 0.0]).unwrap(),
            [0.0; 4]
        );
        let sod = apply_boundary(
            &BoundaryRule::InitialState(Benchmark::Sod),
            &s,
            [-0.5, 0.0],
            0.13,
            [-1.0, 0.0],
        )
        .unwrap();
        let prim = EulerModel::default().primitive(&sod).unwrap();
        assert_eq!(prim, [1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            apply_boundary(&BoundaryRule::Periodic, &s, [0.0; 2], 0.0, [1.0, 0.0]),
            Err(Error::Config(_))
        ));
    }

    fn adaptive_mesh() -> QuadMesh {
        let m = QuadMesh::build_uniform(4, 4, Rect::square(0.0, 1.0))
            .unwrap()
            .with_max_level(2);
        let m = m.refine(&HashSet::from([5, 6]));
        let fine = (0..m.n_cells()).find(|&i| m.cell(i).level() == 1).unwrap();
        m.refine(&HashSet::from([fine]))
    }

    #[test]
    fn free_stream_preserved_on_adaptive_mesh() {
        let eos = IdealGasEos::default();
        let w = EulerState::from_primitive(0.8, [0.3, -0.45], 0.6, &eos).to_array();
        let mesh = adaptive_mesh();
        assert!(mesh.faces().iter().any(|f| f.left.is_some_and(|s| s.half.is_some())));
        for k in 1..=3 {
            let disc =
                Discretization::new(EulerModel::default(), k, BoundaryRule::Dirichlet(w)).unwrap();
            let v = NodalField::interpolate(&mesh, disc.basis(), 4, |_| w);
            let r = disc.dg_residual(&mesh, &v, 0.0).unwrap();
            let worst = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            assert!(worst < 1e-12, "k={k}: {worst}");
        }
    }

    #[test]
    fn constant_field_unchanged_on_periodic_mesh() {
        let mesh = QuadMesh::uniform(5, 3, Rect::square(0.0, 1.0), [true, true]).unwrap();
        let disc =
            Discretization::new(advection([0.7, -0.2]), 2, BoundaryRule::Periodic).unwrap();
        let v = NodalField::interpolate(&mesh, disc.basis(), 1, |_| [2.5, 0.0, 0.0, 0.0]);
        let u = disc.dg_euler_substep(&mesh, &v, 0.0, 0.01).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_substep_conserves_mass() {
        let mesh = QuadMesh::uniform(6, 5, Rect::square(0.0, 1.0), [true, true]).unwrap();
        for k in 1..=3 {
            let disc =
                Discretization::new(advection([1.0, 0.5]), k, BoundaryRule::Periodic).unwrap();
            let v = NodalField::interpolate(&mesh, disc.basis(), 1, |x| {
                [if x[0] < 0.4 { 1.0 } else { 0.2 } + x[1] * x[1], 0.0, 0.0, 0.0]
            });
            let before = v.integral(&mesh, disc.basis(), 0);
            let u = disc.dg_euler_substep(&mesh, &v, 0.0, 0.01).unwrap();
            let after = u.integral(&mesh, disc.basis(), 0);
            assert!(((after - before) / before).abs() < 1e-12);
        }
    }

    #[test]
    fn hanging_faces_conserve_mass() {
        let mesh = adaptive_mesh();
        let disc = Discretization::new(
            AdvectionModel::new(VelocityField::Rotation {
                omega: 1.0,
                center: [0.5, 0.5],
            }),
            2,
            BoundaryRule::InflowZero,
        )
        .unwrap();
        // compactly supported data: boundary fluxes vanish
        let v = NodalField::interpolate(&mesh, disc.basis(), 1, |x| {
            let r2 = (x[0] - 0.45).powi(2) + (x[1] - 0.5).powi(2);
            [if r2 < 0.09 { (0.09 - r2) * 10.0 } else { 0.0 }, 0.0, 0.0, 0.0]
        });
        let before = v.integral(&mesh, disc.basis(), 0);
        let u = disc.dg_euler_substep(&mesh, &v, 0.0, 1e-3).unwrap();
        let after = u.integral(&mesh, disc.basis(), 0);
        assert!(((after - before) / before).abs() < 1e-12, "{before} {after}");
    }

    #[test]
    fn residual_converges_to_transport_derivative() {
        // u = sin(2 pi x) on a periodic strip; dudt = -a du/dx
        let a = 1.0;
        for k in 1..=3 {
            let mut errs = Vec::new();
            for &n in &[8usize, 16, 32] {
                let mesh = QuadMesh::uniform(n, 1, Rect::new(0.0, 1.0, 0.0, 1.0 / n as f64), [true, true])
                    .unwrap();
                let disc =
                    Discretization::new(advection([a, 0.0]), k, BoundaryRule::Periodic).unwrap();
                let tau = 2.0 * std::f64::consts::PI;
                let v = NodalField::interpolate(&mesh, disc.basis(), 1, |x| {
                    [(tau * x[0]).sin(), 0.0, 0.0, 0.0]
                });
                let r = disc.dg_residual(&mesh, &v, 0.0).unwrap();
                let mut err: f64 = 0.0;
                for (ci, cell) in mesh.cells().iter().enumerate() {
                    for i in 0..disc.basis().n_nodes() {
                        let x = cell.map(disc.basis().node(i));
                        let exact = -a * tau * (tau * x[0]).cos();
                        err = err.max((r[v.index(ci, i, 0)] - exact).abs());
                    }
                }
                errs.push(err);
            }
            let rate = (errs[1] / errs[2]).log2();
            assert!(rate >= k as f64 - 0.2, "k={k} errors {errs:?} rate {rate}");
        }
    }

    #[test]
    fn advection_substep_is_affine() {
        let mesh = adaptive_mesh();
        let disc = Discretization::new(
            AdvectionModel::new(VelocityField::Rotation {
                omega: 1.0,
                center: [0.5, 0.5],
            }),
            2,
            BoundaryRule::InflowZero,
        )
        .unwrap();
        let f1 = NodalField::interpolate(&mesh, disc.basis(), 1, |x| [x[0].sin() + x[1], 0.0, 0.0, 0.0]);
        let f2 = NodalField::interpolate(&mesh, disc.basis(), 1, |x| {
            [if x[0] > 0.5 { 1.0 } else { -0.3 }, 0.0, 0.0, 0.0]
        });
        let zero = NodalField::zeros(&mesh, 2, 1);
        let (a, b) = (0.7, -1.9);
        let mix = crate::field::StageVector::lincomb(a, &f1, b, &f2).unwrap();
        let dt = 0.003;
        let s0 = disc.dg_euler_substep(&mesh, &zero, 0.0, dt).unwrap();
        let s1 = disc.dg_euler_substep(&mesh, &f1, 0.0, dt).unwrap();
        let s2 = disc.dg_euler_substep(&mesh, &f2, 0.0, dt).unwrap();
        let sm = disc.dg_euler_substep(&mesh, &mix, 0.0, dt).unwrap();
        for i in 0..sm.values().len() {
            let lhs = sm.values()[i] - s0.values()[i];
            let rhs = a * (s1.values()[i] - s0.values()[i]) + b * (s2.values()[i] - s0.values()[i]);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mesh = QuadMesh::build_uniform(2, 2, Rect::square(0.0, 1.0)).unwrap();
        let disc = Discretization::new(EulerModel::default(), 1, BoundaryRule::Transmissive).unwrap();
        let v = NodalField::zeros(&mesh, 1, 4);
        assert!(matches!(
            disc.dg_euler_substep(&mesh, &v, 0.0, 0.1),
            Err(Error::State { .. })
        ));
        assert!(matches!(
            disc.dg_euler_substep(&mesh, &v, 0.0, 0.0),
            Err(Error::InvalidStep(_))
        ));
        let other = QuadMesh::build_uniform(2, 2, Rect::square(0.0, 2.0)).unwrap();
        assert!(matches!(
            disc.dg_residual(&other, &v, 0.0),
            Err(Error::MeshMismatch(_))
        ));
        assert!(Discretization::new(EulerModel::default(), 0, BoundaryRule::Transmissive).is_err());
    }
}
