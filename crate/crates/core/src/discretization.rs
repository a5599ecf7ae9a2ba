//! Shared setup of the high- and low-order operators: the model, the nodal
//! basis, the boundary rule and the precomputed reference-element tables.

use crate::basis::TensorBasis2D;
use crate::error::{Error, Result};
use crate::high_order::BoundaryRule;
use crate::models::PdeModel;

#[derive(Debug, Clone)]
pub struct Discretization<M> {
    pub(crate) model: M,
    pub(crate) basis: TensorBasis2D,
    pub(crate) bc: BoundaryRule,
    /// Weak-form volume weights: `vol[a][c] = w_c D[c][a] / w_a`.
    pub(crate) vol: Vec<Vec<f64>>,
    /// Coarse-face interpolation to the points of each half sub-face:
    /// `half_interp[h][q][j]` is cardinal `j` at the image of node `q`.
    pub(crate) half_interp: [Vec<Vec<f64>>; 2],
}

impl<M: PdeModel> Discretization<M> {
    pub fn new(model: M, degree: usize, bc: BoundaryRule) -> Result<Self> {
        let basis = TensorBasis2D::new(degree);
        let b1 = basis.basis1d();
        let d = b1.diff_matrix()?;
        let w = b1.weights();
        let n1 = b1.n_nodes();
        let vol = (0..n1)
            .map(|a| (0..n1).map(|c| w[c] * d[c][a] / w[a]).collect())
            .collect();
        let to_half = |h: f64| -> Vec<f64> {
            b1.nodes().iter().map(|&s| 0.5 * (s + h)).collect()
        };
        let half_interp = [
            b1.interpolation_matrix(&to_half(-1.0)),
            b1.interpolation_matrix(&to_half(1.0)),
        ];
        Ok(Self {
            model,
            basis,
            bc,
            vol,
            half_interp,
        })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn basis(&self) -> &TensorBasis2D {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn boundary_rule(&self) -> &BoundaryRule {
        &self.bc
    }

    pub fn n_vars(&self) -> usize {
        self.model.n_vars()
    }

    pub(crate) fn check_dt(dt: f64) -> Result<()> {
        if dt > 0.0 && dt.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidStep(format!("dt = {dt}")))
        }
    }
}
