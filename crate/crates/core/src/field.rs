//! Discrete fields: nodal Q_k coefficients and per-cell averages.

use crate::basis::TensorBasis2D;
use crate::error::{Error, Result};
use crate::mesh::QuadMesh;
use crate::models::{Point, State, MAX_VARS};

/// Nodal values of all conserved variables on every leaf cell.
///
/// Storage is `[(cell * nodes_per_cell + node) * n_vars + var]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    mesh_id: u64,
    n_cells: usize,
    degree: usize,
    n_vars: usize,
    nodes_per_cell: usize,
    data: Vec<f64>,
}

impl NodalField {
    pub fn zeros(mesh: &QuadMesh, degree: usize, n_vars: usize) -> Self {
        assert!(n_vars >= 1 && n_vars <= MAX_VARS);
        let npc = (degree + 1) * (degree + 1);
        Self {
            mesh_id: mesh.id(),
            n_cells: mesh.n_cells(),
            degree,
            n_vars,
            nodes_per_cell: npc,
            data: vec![0.0; mesh.n_cells() * npc * n_vars],
        }
    }

    /// Interpolate `f` at the nodes. A node on a discontinuity of `f` takes
    /// the one-sided value from inside its own cell.
    pub fn interpolate(
        mesh: &QuadMesh,
        basis: &TensorBasis2D,
        n_vars: usize,
        f: impl Fn(Point) -> State,
    ) -> Self {
        const INWARD: f64 = 1e-10;
        let mut field = Self::zeros(mesh, basis.degree(), n_vars);
        for (ci, cell) in mesh.cells().iter().enumerate() {
            for i in 0..basis.n_nodes() {
                let xi = basis.node(i);
                let x = cell.map([xi[0] * (1.0 - INWARD), xi[1] * (1.0 - INWARD)]);
                field.set_node(ci, i, &f(x));
            }
        }
        field
    }

    pub(crate) fn from_parts(
        mesh: &QuadMesh,
        degree: usize,
        n_vars: usize,
        data: Vec<f64>,
    ) -> Self {
        let npc = (degree + 1) * (degree + 1);
        assert_eq!(data.len(), mesh.n_cells() * npc * n_vars);
        Self {
            mesh_id: mesh.id(),
            n_cells: mesh.n_cells(),
            degree,
            n_vars,
            nodes_per_cell: npc,
            data,
        }
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.nodes_per_cell
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, cell: usize, node: usize, var: usize) -> usize {
        (cell * self.nodes_per_cell + node) * self.n_vars + var
    }

    #[inline]
    pub fn get(&self, cell: usize, node: usize, var: usize) -> f64 {
        self.data[self.index(cell, node, var)]
    }

    #[inline]
    pub fn node(&self, cell: usize, node: usize) -> State {
        let mut s = [0.0; MAX_VARS];
        let base = self.index(cell, node, 0);
        s[..self.n_vars].copy_from_slice(&self.data[base..base + self.n_vars]);
        s
    }

    #[inline]
    pub fn set_node(&mut self, cell: usize, node: usize, s: &State) {
        let base = self.index(cell, node, 0);
        let nv = self.n_vars;
        self.data[base..base + nv].copy_from_slice(&s[..nv]);
    }

    /// All values of one cell, node-major.
    pub fn cell_values(&self, cell: usize) -> &[f64] {
        let len = self.nodes_per_cell * self.n_vars;
        &self.data[cell * len..(cell + 1) * len]
    }

    pub fn check_mesh(&self, mesh: &QuadMesh) -> Result<()> {
        if self.mesh_id != mesh.id() || self.n_cells != mesh.n_cells() {
            return Err(Error::MeshMismatch(format!(
                "field on mesh {} ({} cells), mesh {} ({} cells)",
                self.mesh_id,
                self.n_cells,
                mesh.id(),
                mesh.n_cells()
            )));
        }
        Ok(())
    }

    pub fn check_congruent(&self, other: &NodalField) -> Result<()> {
        if self.mesh_id != other.mesh_id
            || self.n_cells != other.n_cells
            || self.degree != other.degree
            || self.n_vars != other.n_vars
        {
            return Err(Error::MeshMismatch(format!(
                "mesh {}/{} cells/k={}/{} vars vs mesh {}/{} cells/k={}/{} vars",
                self.mesh_id,
                self.n_cells,
                self.degree,
                self.n_vars,
                other.mesh_id,
                other.n_cells,
                other.degree,
                other.n_vars
            )));
        }
        Ok(())
    }

    /// Quadrature integral of `var` over the mesh.
    pub fn integral(&self, mesh: &QuadMesh, basis: &TensorBasis2D, var: usize) -> f64 {
        let mut total = 0.0;
        for (ci, cell) in mesh.cells().iter().enumerate() {
            let jac = 0.25 * cell.area();
            for i in 0..self.nodes_per_cell {
                total += basis.weight(i) * jac * self.get(ci, i, var);
            }
        }
        total
    }

    /// Integral of `|var|`, used to normalise drift of sign-changing variables.
    pub fn abs_integral(&self, mesh: &QuadMesh, basis: &TensorBasis2D, var: usize) -> f64 {
        let mut total = 0.0;
        for (ci, cell) in mesh.cells().iter().enumerate() {
            let jac = 0.25 * cell.area();
            for i in 0..self.nodes_per_cell {
                total += basis.weight(i) * jac * self.get(ci, i, var).abs();
            }
        }
        total
    }

    /// `(min, max)` of `var` over all nodes.
    pub fn extrema(&self, var: usize) -> (f64, f64) {
        self.data
            .iter()
            .skip(var)
            .step_by(self.n_vars)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// One value per leaf and variable, `[cell * n_vars + var]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAverageField {
    mesh_id: u64,
    n_vars: usize,
    data: Vec<f64>,
}

impl CellAverageField {
    pub fn zeros(mesh: &QuadMesh, n_vars: usize) -> Self {
        Self {
            mesh_id: mesh.id(),
            n_vars,
            data: vec![0.0; mesh.n_cells() * n_vars],
        }
    }

    pub fn from_values(mesh: &QuadMesh, n_vars: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != mesh.n_cells() * n_vars {
            return Err(Error::MeshMismatch(format!(
                "{} values for {} cells x {} vars",
                data.len(),
                mesh.n_cells(),
                n_vars
            )));
        }
        Ok(Self {
            mesh_id: mesh.id(),
            n_vars,
            data,
        })
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / self.n_vars
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn cell(&self, cell: usize) -> State {
        let mut s = [0.0; MAX_VARS];
        let b = cell * self.n_vars;
        s[..self.n_vars].copy_from_slice(&self.data[b..b + self.n_vars]);
        s
    }

    #[inline]
    pub fn set_cell(&mut self, cell: usize, s: &State) {
        let b = cell * self.n_vars;
        let nv = self.n_vars;
        self.data[b..b + nv].copy_from_slice(&s[..nv]);
    }

    pub fn check_mesh(&self, mesh: &QuadMesh) -> Result<()> {
        if self.mesh_id != mesh.id() || self.n_cells() != mesh.n_cells() {
            return Err(Error::MeshMismatch(format!(
                "averages on mesh {}, mesh {}",
                self.mesh_id,
                mesh.id()
            )));
        }
        Ok(())
    }

    pub fn integral(&self, mesh: &QuadMesh, var: usize) -> f64 {
        mesh.cells()
            .iter()
            .enumerate()
            .map(|(i, c)| c.area() * self.data[i * self.n_vars + var])
            .sum()
    }
}

/// Vectors the SSP tableau can combine: `a * x + b * y`.
pub trait StageVector: Sized {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self>;
}

impl StageVector for f64 {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        Ok(a * x + b * y)
    }
}

impl StageVector for NodalField {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        x.check_congruent(y)?;
        let mut out = x.clone();
        for (o, &yv) in out.data.iter_mut().zip(&y.data) {
            *o = a * *o + b * yv;
        }
        Ok(out)
    }
}

impl StageVector for CellAverageField {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        if x.mesh_id != y.mesh_id || x.data.len() != y.data.len() {
            return Err(Error::MeshMismatch("cell averages differ in layout".into()));
        }
        let mut out = x.clone();
        for (o, &yv) in out.data.iter_mut().zip(&y.data) {
            *o = a * *o + b * yv;
        }
        Ok(out)
    }
}
