//! Gradient-based refinement indicator and the adapt cycle.
//!
//! Refinement interpolates the parent polynomial at the children's nodes;
//! coarsening is the L2 projection of the four child polynomials onto the
//! parent space, computed with exact 1D mass and coupling matrices. Both
//! transfers keep every variable's integral and compose to the identity.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{lobatto_rule, TensorBasis2D};
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::{CellKey, QuadMesh};
use crate::models::{PdeModel, Point, State, MAX_VARS};

/// One nonnegative value per leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub eta: Vec<f64>,
}

impl IndicatorField {
    pub fn max(&self) -> f64 {
        self.eta.iter().fold(0.0, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptPolicy {
    /// Refine where `eta > refine * max eta`.
    pub refine: f64,
    /// Coarsen sibling quadruples with every `eta < coarsen * max eta`.
    pub coarsen: f64,
    pub max_level: u8,
    /// Steps between adapt calls.
    pub interval: usize,
    /// Adapt cycles on the initial condition before the first step.
    pub initial_cycles: usize,
}

impl Default for AdaptPolicy {
    fn default() -> Self {
        Self {
            refine: 0.2,
            coarsen: 0.05,
            max_level: 2,
            interval: 5,
            initial_cycles: 3,
        }
    }
}

impl AdaptPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.refine > 0.0 && self.refine < 1.0) {
            return Err(Error::Config(format!("amr.refine must lie in (0, 1), got {}", self.refine)));
        }
        if !(self.coarsen > 0.0 && self.coarsen < self.refine) {
            return Err(Error::Config(format!(
                "amr.coarsen must lie in (0, refine), got {}",
                self.coarsen
            )));
        }
        if self.interval == 0 {
            return Err(Error::Config("amr.interval must be at least 1".into()));
        }
        Ok(())
    }
}

/// `eta_K = max over nodes of |grad u_var|`.
pub fn compute_indicator(
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    var: usize,
) -> Result<IndicatorField> {
    field.check_mesh(mesh)?;
    let d = basis.basis1d().diff_matrix()?;
    let n1 = basis.n1();
    let mut eta = Vec::with_capacity(mesh.n_cells());
    for (ci, cell) in mesh.cells().iter().enumerate() {
        let sx = 2.0 / cell.extent[0];
        let sy = 2.0 / cell.extent[1];
        let mut m = 0.0f64;
        for b in 0..n1 {
            for a in 0..n1 {
                let mut gx = 0.0;
                let mut gy = 0.0;
                for c in 0..n1 {
                    gx += d[a][c] * field.get(ci, c + n1 * b, var);
                    gy += d[b][c] * field.get(ci, a + n1 * c, var);
                }
                m = m.max((sx * gx).hypot(sy * gy));
            }
        }
        eta.push(m);
    }
    Ok(IndicatorField { eta })
}

/// Leaves to refine and to coarsen under `policy`.
pub fn mark(mesh: &QuadMesh, policy: &AdaptPolicy, ind: &IndicatorField) -> (HashSet<usize>, HashSet<usize>) {
    let top = ind.max();
    if top == 0.0 {
        return (HashSet::new(), HashSet::new());
    }
    let mut refine = HashSet::new();
    let mut coarsen = HashSet::new();
    for (i, (&e, cell)) in ind.eta.iter().zip(mesh.cells()).enumerate() {
        if e > policy.refine * top {
            if cell.level() < policy.max_level {
                refine.insert(i);
            }
        } else if e < policy.coarsen * top && cell.level() > 0 {
            coarsen.insert(i);
        }
    }
    (refine, coarsen)
}

/// Precomputed solution transfer between parent and child cells.
#[derive(Debug, Clone)]
pub struct Transfer {
    basis: TensorBasis2D,
    /// `restrict[h][i][j]`: parent coefficient `i` from child node `j` of
    /// half `h`, one dimension.
    restrict: [Vec<Vec<f64>>; 2],
}

impl Transfer {
    pub fn new(degree: usize) -> Self {
        let basis = TensorBasis2D::new(degree);
        let b1 = basis.basis1d();
        let n1 = b1.n_nodes();
        // exact for the degree-2k integrands
        let (qx, qw) = lobatto_rule(degree + 1);
        let mut mass = DMatrix::<f64>::zeros(n1, n1);
        let mut couple = [DMatrix::<f64>::zeros(n1, n1), DMatrix::<f64>::zeros(n1, n1)];
        for (&s, &w) in qx.iter().zip(&qw) {
            let phi = b1.eval_all(s);
            for i in 0..n1 {
                for j in 0..n1 {
                    mass[(i, j)] += w * phi[i] * phi[j];
                }
            }
            for (h, c) in couple.iter_mut().enumerate() {
                let sign = if h == 0 { -1.0 } else { 1.0 };
                let parent = b1.eval_all(0.5 * (s + sign));
                for i in 0..n1 {
                    for j in 0..n1 {
                        c[(i, j)] += 0.5 * w * parent[i] * phi[j];
                    }
                }
            }
        }
        let inv = mass.try_inverse().expect("Lagrange mass matrix is SPD");
        let to_rows = |m: DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..n1).map(|i| (0..n1).map(|j| m[(i, j)]).collect()).collect()
        };
        let [c0, c1] = couple;
        Self {
            basis,
            restrict: [to_rows(&inv * c0), to_rows(&inv * c1)],
        }
    }

    pub fn basis(&self) -> &TensorBasis2D {
        &self.basis
    }

    /// Parent nodal values from the four children, slot order of
    /// [`CellKey::children`]. `children[s]` holds node-major values.
    pub fn coarsen_cell(&self, children: [&[f64]; 4], nv: usize, out: &mut [f64]) {
        let n1 = self.basis.n1();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (slot, child) in children.iter().enumerate() {
            let rx = &self.restrict[slot % 2];
            let ry = &self.restrict[slot / 2];
            for b in 0..n1 {
                for a in 0..n1 {
                    let o = (a + n1 * b) * nv;
                    for l in 0..n1 {
                        for j in 0..n1 {
                            let c = rx[a][j] * ry[b][l];
                            let src = (j + n1 * l) * nv;
                            for v in 0..nv {
                                out[o + v] += c * child[src + v];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Move `field` from `old` onto `new`, where every new leaf either
    /// exists in `old`, descends from an old leaf, or is the parent of four
    /// old leaves. Interpolated children containing a state rejected by
    /// `admissible` fall back to the parent's average.
    pub fn transfer(
        &self,
        old: &QuadMesh,
        new: &QuadMesh,
        field: &NodalField,
        admissible: &dyn Fn(&State) -> bool,
    ) -> Result<NodalField> {
        field.check_mesh(old)?;
        let nv = field.n_vars();
        let npc = self.basis.n_nodes();
        let len = npc * nv;
        let mut out = NodalField::zeros(new, field.degree(), nv);
        let mut buf = vec![0.0; len];
        for (ni, cell) in new.cells().iter().enumerate() {
            let key = cell.key;
            if let Some(oi) = old.find(key) {
                out.values_mut()[ni * len..(ni + 1) * len].copy_from_slice(field.cell_values(oi));
            } else if let Some(oi) = old.covering(key) {
                let parent = old.cell(oi);
                let src = field.cell_values(oi);
                let mut ok = true;
                for i in 0..npc {
                    let x = cell.map(self.basis.node(i));
                    let xi = [
                        (x[0] - parent.center[0]) / (0.5 * parent.extent[0]),
                        (x[1] - parent.center[1]) / (0.5 * parent.extent[1]),
                    ];
                    let mut s = [0.0; MAX_VARS];
                    for (v, sv) in s.iter_mut().enumerate().take(nv) {
                        *sv = self.basis.evaluate(src, nv, v, xi);
                    }
                    ok &= admissible(&s);
                    out.set_node(ni, i, &s);
                }
                if !ok {
                    let mean = self.cell_mean(src, nv);
                    for i in 0..npc {
                        out.set_node(ni, i, &mean);
                    }
                }
            } else {
                let kids = key.children().map(|k: CellKey| {
                    old.find(k).ok_or_else(|| {
                        Error::MeshMismatch(format!("no old leaves under {key:?}"))
                    })
                });
                let mut idx = [0usize; 4];
                for (s, k) in kids.into_iter().enumerate() {
                    idx[s] = k?;
                }
                self.coarsen_cell(idx.map(|i| field.cell_values(i)), nv, &mut buf);
                out.values_mut()[ni * len..(ni + 1) * len].copy_from_slice(&buf);
            }
        }
        Ok(out)
    }

    fn cell_mean(&self, values: &[f64], nv: usize) -> State {
        let mut m = [0.0; MAX_VARS];
        for i in 0..self.basis.n_nodes() {
            for v in 0..nv {
                m[v] += 0.25 * self.basis.weight(i) * values[i * nv + v];
            }
        }
        m
    }
}

/// Outcome of one adapt call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AdaptStats {
    pub refined: usize,
    pub coarsened: usize,
}

/// Mark, refine, coarsen and transfer. Periodic meshes are left alone.
pub fn adapt<M: PdeModel + ?Sized>(
    mesh: &QuadMesh,
    field: &NodalField,
    transfer: &Transfer,
    policy: &AdaptPolicy,
    model: &M,
) -> Result<(QuadMesh, NodalField, AdaptStats)> {
    if mesh.is_periodic() {
        return Ok((mesh.clone(), field.clone(), AdaptStats::default()));
    }
    let ind = compute_indicator(mesh, transfer.basis(), field, model.indicator_var())?;
    let (refine, coarsen) = mark(mesh, policy, &ind);
    let admissible = |s: &State| model.check_admissible(s).is_ok();

    // an unchanged leaf set keeps the original mesh identity
    let mut fine = mesh.refine(&refine);
    let f1 = if fine.n_cells() == mesh.n_cells() {
        fine = mesh.clone();
        field.clone()
    } else {
        transfer.transfer(mesh, &fine, field, &admissible)?
    };
    // carry the coarsening marks over to leaves that survived refinement
    let marks: HashSet<usize> = coarsen
        .iter()
        .filter_map(|&i| fine.find(mesh.cell(i).key))
        .collect();
    let mut merged = fine.coarsen(&marks);
    let f2 = if merged.n_cells() == fine.n_cells() {
        merged = fine.clone();
        f1
    } else {
        transfer.transfer(&fine, &merged, &f1, &admissible)?
    };
    let stats = AdaptStats {
        refined: (fine.n_cells() - mesh.n_cells()) / 3,
        coarsened: (fine.n_cells() - merged.n_cells()) / 3,
    };
    Ok((merged, f2, stats))
}

/// Adapt to the initial condition: `cycles` rounds of sample, mark, remesh,
/// then a final sample on the resulting mesh.
pub fn adapt_initial<M: PdeModel + ?Sized>(
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    policy: &AdaptPolicy,
    model: &M,
    initial: &dyn Fn(Point) -> State,
) -> Result<(QuadMesh, NodalField)> {
    let nv = model.n_vars();
    let mut mesh = mesh.clone();
    let mut field = NodalField::interpolate(&mesh, basis, nv, initial);
    if mesh.is_periodic() {
        return Ok((mesh, field));
    }
    for _ in 0..policy.initial_cycles {
        let ind = compute_indicator(&mesh, basis, &field, model.indicator_var())?;
        let (refine, coarsen) = mark(&mesh, policy, &ind);
        let fine = mesh.refine(&refine);
        let marks: HashSet<usize> = coarsen
            .iter()
            .filter_map(|&i| fine.find(mesh.cell(i).key))
            .collect();
        let next = fine.coarsen(&marks);
        let same = next.n_cells() == mesh.n_cells() && refine.is_empty();
        mesh = next;
        field = NodalField::interpolate(&mesh, basis, nv, initial);
        if same {
            break;
        }
    }
    Ok((mesh, field))
}
