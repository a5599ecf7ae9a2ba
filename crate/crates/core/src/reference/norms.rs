//! Error norms against an exact sampler, convergence rates and mass drift.

use serde::{Deserialize, Serialize};

use crate::basis::{lobatto_rule, TensorBasis2D};
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::QuadMesh;
use crate::models::Point;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l1_rel: f64,
    pub l2_rel: f64,
    pub linf_rel: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub mass_drift_rel: f64,
    /// Set when the exact solution vanishes and the norms are absolute.
    pub absolute: bool,
}

/// Reference mass for drift reporting: `|M(t) - M0| / max(|M0|, int |u0|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassBaseline {
    pub mass: f64,
    pub scale: f64,
}

impl MassBaseline {
    pub fn of(field: &NodalField, mesh: &QuadMesh, basis: &TensorBasis2D, var: usize) -> Self {
        let mass = field.integral(mesh, basis, var);
        let scale = mass.abs().max(field.abs_integral(mesh, basis, var));
        Self { mass, scale }
    }

    pub fn drift(&self, field: &NodalField, mesh: &QuadMesh, basis: &TensorBasis2D, var: usize) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        (field.integral(mesh, basis, var) - self.mass).abs() / self.scale
    }
}

/// Relative L1 and L2 errors of `var` by a `(k + 3)`-point Lobatto rule per
/// direction, relative nodal L-infinity error, and nodal extrema.
pub fn error_norms(
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    var: usize,
    exact: &dyn Fn(Point) -> f64,
    baseline: Option<&MassBaseline>,
) -> Result<ErrorReport> {
    field.check_mesh(mesh)?;
    let k = basis.degree();
    let (qx, qw) = lobatto_rule(k + 2);
    let b1 = basis.basis1d();
    let tab: Vec<Vec<f64>> = qx.iter().map(|&s| b1.eval_all(s)).collect();
    let n1 = basis.n1();
    let nv = field.n_vars();
    let (mut e1, mut e2, mut x1, mut x2) = (0.0, 0.0, 0.0, 0.0);
    let (mut einf, mut xinf) = (0.0f64, 0.0f64);
    for (ci, cell) in mesh.cells().iter().enumerate() {
        let jac = 0.25 * cell.area();
        let vals = field.cell_values(ci);
        for (qb, &wb) in qw.iter().enumerate() {
            for (qa, &wa) in qw.iter().enumerate() {
                let mut u = 0.0;
                for b in 0..n1 {
                    for a in 0..n1 {
                        u += tab[qa][a] * tab[qb][b] * vals[(a + n1 * b) * nv + var];
                    }
                }
                let e = exact(cell.map([qx[qa], qx[qb]]));
                let w = wa * wb * jac;
                let d = (u - e).abs();
                e1 += w * d;
                e2 += w * d * d;
                x1 += w * e.abs();
                x2 += w * e * e;
            }
        }
        for i in 0..basis.n_nodes() {
            let e = exact(cell.map(basis.node(i)));
            einf = einf.max((vals[i * nv + var] - e).abs());
            xinf = xinf.max(e.abs());
        }
    }
    let (min_value, max_value) = field.extrema(var);
    let absolute = x1 == 0.0 || xinf == 0.0;
    let (n1_, n2_, ninf) = if absolute { (1.0, 1.0, 1.0) } else { (x1, x2.sqrt(), xinf) };
    Ok(ErrorReport {
        l1_rel: e1 / n1_,
        l2_rel: e2.sqrt() / n2_,
        linf_rel: einf / ninf,
        max_value,
        min_value,
        mass_drift_rel: baseline.map_or(0.0, |b| b.drift(field, mesh, basis, var)),
        absolute,
    })
}

/// L2 distance between two fields on the same mesh (same quadrature as
/// [`error_norms`]).
pub fn l2_distance(
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    a: &NodalField,
    b: &NodalField,
    var: usize,
) -> Result<f64> {
    a.check_congruent(b)?;
    a.check_mesh(mesh)?;
    let k = basis.degree();
    let (qx, qw) = lobatto_rule(k + 2);
    let b1 = basis.basis1d();
    let tab: Vec<Vec<f64>> = qx.iter().map(|&s| b1.eval_all(s)).collect();
    let n1 = basis.n1();
    let nv = a.n_vars();
    let mut acc = 0.0;
    for (ci, cell) in mesh.cells().iter().enumerate() {
        let jac = 0.25 * cell.area();
        let (va, vb) = (a.cell_values(ci), b.cell_values(ci));
        for (qb, &wb) in qw.iter().enumerate() {
            for (qa, &wa) in qw.iter().enumerate() {
                let mut d = 0.0;
                for j in 0..n1 {
                    for i in 0..n1 {
                        let idx = (i + n1 * j) * nv + var;
                        d += tab[qa][i] * tab[qb][j] * (va[idx] - vb[idx]);
                    }
                }
                acc += wa * wb * jac * d * d;
            }
        }
    }
    Ok(acc.sqrt())
}

/// `rate_i = log(e_{i-1} / e_i) / log(factor_i)`; `factors` has one entry
/// per pair or a single shared entry.
pub fn convergence_rate(errors: &[f64], factors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidInput("need at least two errors".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidInput(format!("non-positive error {e}")));
    }
    let pairs = errors.len() - 1;
    if factors.len() != 1 && factors.len() != pairs {
        return Err(Error::InvalidInput(format!("{} factors for {pairs} pairs", factors.len())));
    }
    Ok((0..pairs)
        .map(|i| {
            let f = factors[if factors.len() == 1 { 0 } else { i }];
            (errors[i] / errors[i + 1]).ln() / f.ln()
        })
        .collect())
}
