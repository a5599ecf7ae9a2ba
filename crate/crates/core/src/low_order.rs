//! First-order finite-volume operator on cell averages of the nodal state.

use crate::basis::TensorBasis2D;
use crate::discretization::Discretization;
use crate::error::Result;
use crate::field::{CellAverageField, NodalField};
use crate::high_order::{apply_boundary, rusanov_flux};
use crate::mesh::QuadMesh;
use crate::models::{PdeModel, MAX_VARS};

/// Quadrature mean of every variable in every cell.
pub fn project_to_averages(mesh: &QuadMesh, basis: &TensorBasis2D, v: &NodalField) -> Result<CellAverageField> {
    v.check_mesh(mesh)?;
    let nv = v.n_vars();
    let mut out = CellAverageField::zeros(mesh, nv);
    for ci in 0..mesh.n_cells() {
        let mut acc = [0.0; MAX_VARS];
        for i in 0..basis.n_nodes() {
            let w = 0.25 * basis.weight(i);
            let u = v.node(ci, i);
            for var in 0..nv {
                acc[var] += w * u[var];
            }
        }
        out.set_cell(ci, &acc);
    }
    Ok(out)
}

/// Copy each cell's average onto all of its nodes.
pub fn broadcast_to_nodes(mesh: &QuadMesh, a: &CellAverageField, degree: usize) -> Result<NodalField> {
    a.check_mesh(mesh)?;
    let mut out = NodalField::zeros(mesh, degree, a.n_vars());
    for ci in 0..mesh.n_cells() {
        let s = a.cell(ci);
        for i in 0..out.nodes_per_cell() {
            out.set_node(ci, i, &s);
        }
    }
    Ok(out)
}

impl<M: PdeModel> Discretization<M> {
    /// One forward-Euler step of the Rusanov finite-volume scheme.
    pub fn fv_substep(
        &self,
        mesh: &QuadMesh,
        a: &CellAverageField,
        t: f64,
        dt: f64,
    ) -> Result<CellAverageField> {
        Self::check_dt(dt)?;
        a.check_mesh(mesh)?;
        let nv = a.n_vars();
        let mut out = a.clone();
        for face in mesh.faces() {
            let n = face.normal();
            let x = face.point(0.0);
            let (ul, ur) = match (face.left, face.right) {
                (Some(l), Some(r)) => (a.cell(l.cell), a.cell(r.cell)),
                (Some(l), None) => {
                    let ul = a.cell(l.cell);
                    (ul, apply_boundary(&self.bc, &ul, x, t, n)?)
                }
                (None, Some(r)) => {
                    let ur = a.cell(r.cell);
                    (apply_boundary(&self.bc, &ur, x, t, [-n[0], -n[1]])?, ur)
                }
                (None, None) => unreachable!("face without cells"),
            };
            let owner = face.left.or(face.right).map_or(0, |s| s.cell);
            let f = rusanov_flux(&self.model, &ul, &ur, x, t, n).map_err(|e| e.in_cell(owner))?;
            let vals = out.values_mut();
            if let Some(l) = face.left {
                let c = dt * face.length / mesh.cell(l.cell).area();
                for var in 0..nv {
                    vals[l.cell * nv + var] -= c * f[var];
                }
            }
            if let Some(r) = face.right {
                let c = dt * face.length / mesh.cell(r.cell).area();
                for var in 0..nv {
                    vals[r.cell * nv + var] += c * f[var];
                }
            }
        }
        for ci in 0..mesh.n_cells() {
            self.model.check_admissible(&out.cell(ci)).map_err(|e| e.in_cell(ci))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::high_order::BoundaryRule;
    use crate::mesh::Rect;
    use crate::models::{AdvectionModel, EulerModel, EulerState, IdealGasEos, VelocityField};

    fn advect_x() -> Discretization<AdvectionModel> {
        Discretization::new(
            AdvectionModel::new(VelocityField::Uniform { velocity: [1.0, 0.0] }),
            1,
            BoundaryRule::Periodic,
        )
        .unwrap()
    }

    #[test]
    fn projection_examples() {
        let mesh = QuadMesh::build_uniform(1, 1, Rect::square(-1.0, 1.0)).unwrap();
        let b1 = TensorBasis2D::new(1);
        let v = NodalField::interpolate(&mesh, &b1, 1, |x| [0.5 * (x[0] + 1.0), 0.0, 0.0, 0.0]);
        let a = project_to_averages(&mesh, &b1, &v).unwrap();
        assert!((a.values()[0] - 0.5).abs() < 1e-9);

        let b2 = TensorBasis2D::new(2);
        let v = NodalField::interpolate(&mesh, &b2, 1, |x| [x[0] * x[0], 0.0, 0.0, 0.0]);
        let a = project_to_averages(&mesh, &b2, &v).unwrap();
        assert!((a.values()[0] - 1.0 / 3.0).abs() < 1e-9);

        let c = NodalField::interpolate(&mesh, &b2, 2, |_| [0.7, -3.0, 0.0, 0.0]);
        let a = project_to_averages(&mesh, &b2, &c).unwrap();
        assert!((a.values()[0] - 0.7).abs() < 1e-15 && (a.values()[1] + 3.0).abs() < 1e-15);
    }

    #[test]
    fn broadcast_round_trip() {
        let mesh = QuadMesh::build_uniform(3, 2, Rect::square(0.0, 1.0)).unwrap();
        let a = CellAverageField::from_values(&mesh, 1, vec![0.7, 0.1, -2.0, 3.0, 0.0, 1.5]).unwrap();
        let v = broadcast_to_nodes(&mesh, &a, 2).unwrap();
        assert!(v.cell_values(0).iter().all(|&x| x == 0.7));
        assert_eq!(v.cell_values(0).len(), 9);
        let b = TensorBasis2D::new(2);
        let back = project_to_averages(&mesh, &b, &v).unwrap();
        for (x, y) in back.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((v.integral(&mesh, &b, 0) - a.integral(&mesh, 0)).abs() < 1e-14);
    }

    #[test]
    fn upwind_two_cell_example() {
        let mesh = QuadMesh::uniform(2, 1, Rect::new(0.0, 1.0, 0.0, 0.5), [true, true]).unwrap();
        let a = CellAverageField::from_values(&mesh, 1, vec![1.0, 0.0]).unwrap();
        let out = advect_x().fv_substep(&mesh, &a, 0.0, 0.1).unwrap();
        assert!((out.values()[0] - 0.8).abs() < 1e-15);
        assert!((out.values()[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn uniform_state_unchanged() {
        let eos = IdealGasEos::default();
        let w = EulerState::from_primitive(1.3, [0.4, -0.2], 0.8, &eos).to_array();
        let mesh = QuadMesh::build_uniform(4, 3, Rect::square(0.0, 1.0)).unwrap();
        let d = Discretization::new(EulerModel::default(), 1, BoundaryRule::Transmissive).unwrap();
        let mut a = CellAverageField::zeros(&mesh, 4);
        for c in 0..mesh.n_cells() {
            a.set_cell(c, &w);
        }
        let out = d.fv_substep(&mesh, &a, 0.0, 0.01).unwrap();
        for (x, y) in out.values().iter().zip(a.values()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn maximum_principle_on_random_profiles() {
        use proptest::prelude::*;
        let mesh = QuadMesh::uniform(16, 1, Rect::new(0.0, 1.0, 0.0, 1.0 / 16.0), [true, true]).unwrap();
        let d = advect_x();
        proptest!(|(vals in proptest::collection::vec(-5.0f64..5.0, 16), cfl in 0.05f64..1.0)| {
            let a = CellAverageField::from_values(&mesh, 1, vals.clone()).unwrap();
            let out = d.fv_substep(&mesh, &a, 0.0, cfl / 16.0).unwrap();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for &x in out.values() {
                prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
            }
            let before = a.integral(&mesh, 0);
            let after = out.integral(&mesh, 0);
            prop_assert!((after - before).abs() <= 1e-12 * vals.iter().map(|v| v.abs()).sum::<f64>().max(1.0));
        });
    }

    #[test]
    fn conservation_on_adaptive_periodic_free_mesh() {
        use std::collections::HashSet;
        let mesh = QuadMesh::build_uniform(4, 4, Rect::square(0.0, 1.0)).unwrap().with_max_level(1);
        let mesh = mesh.refine(&HashSet::from([5, 10]));
        let d = Discretization::new(
            AdvectionModel::new(VelocityField::Rotation { omega: 1.0, center: [0.5, 0.5] }),
            1,
            BoundaryRule::InflowZero,
        )
        .unwrap();
        let mut a = CellAverageField::zeros(&mesh, 1);
        for (i, c) in mesh.cells().iter().enumerate() {
            let r = (c.center[0] - 0.5).hypot(c.center[1] - 0.5);
            a.set_cell(i, &[if r < 0.3 { 1.0 + c.center[0] } else { 0.0 }, 0.0, 0.0, 0.0]);
        }
        let out = d.fv_substep(&mesh, &a, 0.0, 0.01).unwrap();
        let (b, e) = (a.integral(&mesh, 0), out.integral(&mesh, 0));
        assert!(((b - e) / b).abs() < 1e-12);
    }

    #[test]
    fn negative_density_is_a_state_error() {
        let mesh = QuadMesh::build_uniform(2, 1, Rect::square(0.0, 1.0)).unwrap();
        let d = Discretization::new(EulerModel::default(), 1, BoundaryRule::Transmissive).unwrap();
        let eos = IdealGasEos::default();
        let mut a = CellAverageField::zeros(&mesh, 4);
        a.set_cell(0, &EulerState::from_primitive(1.0, [0.0, 0.0], 1000.0, &eos).to_array());
        a.set_cell(1, &EulerState::from_primitive(1e-3, [0.0, 0.0], 1e-3, &eos).to_array());
        let r = d.fv_substep(&mesh, &a, 0.0, 0.05);
        assert!(matches!(r, Err(Error::State { .. })), "{r:?}");
    }
}
