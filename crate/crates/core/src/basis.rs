//! Gauss–Lobatto nodes and the nodal Lagrange bases built on them.
//!
//! The 1D basis holds the `k + 1` Lobatto points on `[-1, 1]`, their
//! quadrature weights and the collocation differentiation matrix. The 2D
//! basis is the tensor product with node index `a + (k + 1) * b`, where `a`
//! runs along x and `b` along y.

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Legendre polynomials `P_{n-1}(x)` and `P_n(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (mut prev, mut cur) = (1.0, x);
    for m in 2..=n {
        let m = m as f64;
        let next = ((2.0 * m - 1.0) * x * cur - (m - 1.0) * prev) / m;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Gauss–Lobatto nodes for degree `k`, ascending.
///
/// Roots of `(1 - x^2) P_k'(x)`, found by Newton iteration from the
/// Chebyshev–Lobatto points. Degree 0 degenerates to the single midpoint.
pub fn lobatto_nodes(k: usize) -> Vec<f64> {
    lobatto_rule(k).0
}

/// Gauss–Lobatto nodes and weights for degree `k` (`k + 1` points).
pub fn lobatto_rule(k: usize) -> (Vec<f64>, Vec<f64>) {
    if k == 0 {
        return (vec![0.0], vec![2.0]);
    }
    let n = k;
    let nf = n as f64;
    let mut x: Vec<f64> = (0..=n)
        .map(|j| -(std::f64::consts::PI * j as f64 / nf).cos())
        .collect();
    for xi in x.iter_mut() {
        for _ in 0..NEWTON_MAX_ITER {
            let (pm1, p) = legendre_pair(n, *xi);
            let step = (*xi * p - pm1) / ((nf + 1.0) * p);
            *xi -= step;
            if step.abs() < NEWTON_TOL {
                break;
            }
        }
    }
    // enforce exact symmetry about the origin
    for j in 0..=n / 2 {
        let s = 0.5 * (x[n - j] - x[j]);
        x[j] = -s;
        x[n - j] = s;
    }
    if n % 2 == 0 {
        x[n / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&xi| {
            let (_, p) = legendre_pair(n, xi);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    (x, w)
}

#[derive(Debug, Clone)]
pub struct LobattoBasis1D {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    diff: Option<Vec<Vec<f64>>>,
}

impl LobattoBasis1D {
    pub fn new(degree: usize) -> Self {
        let (nodes, weights) = lobatto_rule(degree);
        let bary: Vec<f64> = (0..nodes.len())
            .map(|j| {
                let prod: f64 = (0..nodes.len())
                    .filter(|&m| m != j)
                    .map(|m| nodes[j] - nodes[m])
                    .product();
                1.0 / prod
            })
            .collect();
        let diff = (degree >= 1).then(|| {
            let n = nodes.len();
            let mut d = vec![vec![0.0; n]; n];
            for i in 0..n {
                let mut diag = 0.0;
                for j in 0..n {
                    if i != j {
                        d[i][j] = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                        diag -= d[i][j];
                    }
                }
                d[i][i] = diag;
            }
            d
        });
        Self {
            degree,
            nodes,
            weights,
            bary,
            diff,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Value of the `j`-th Lagrange cardinal polynomial at `x`.
    pub fn eval_lagrange(&self, j: usize, x: f64) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != j)
            .map(|(_, &xm)| (x - xm) / (self.nodes[j] - xm))
            .product()
    }

    /// All cardinal polynomials at `x`.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        if let Some(hit) = self.nodes.iter().position(|&xn| xn == x) {
            let mut v = vec![0.0; self.nodes.len()];
            v[hit] = 1.0;
            return v;
        }
        // barycentric form, second kind
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.bary)
            .map(|(&xn, &b)| b / (x - xn))
            .collect();
        let sum: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / sum).collect()
    }

    /// Row `q` holds the cardinal values at `points[q]`.
    pub fn interpolation_matrix(&self, points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&x| self.eval_all(x)).collect()
    }

    /// `D[i][j]`: derivative of cardinal polynomial `j` at node `i`.
    pub fn diff_matrix(&self) -> Result<&[Vec<f64>]> {
        self.diff
            .as_deref()
            .ok_or(Error::DegreeTooLow(self.degree))
    }
}

/// Tensor-product Q_k basis on the reference square `[-1, 1]^2`.
#[derive(Debug, Clone)]
pub struct TensorBasis2D {
    basis1d: LobattoBasis1D,
}

impl TensorBasis2D {
    pub fn new(degree: usize) -> Self {
        Self {
            basis1d: LobattoBasis1D::new(degree),
        }
    }

    pub fn basis1d(&self) -> &LobattoBasis1D {
        &self.basis1d
    }

    pub fn degree(&self) -> usize {
        self.basis1d.degree
    }

    /// Nodes per direction.
    pub fn n1(&self) -> usize {
        self.basis1d.n_nodes()
    }

    pub fn n_nodes(&self) -> usize {
        self.n1() * self.n1()
    }

    pub fn node_index(&self, a: usize, b: usize) -> usize {
        a + self.n1() * b
    }

    /// Reference coordinates of node `i`.
    pub fn node(&self, i: usize) -> [f64; 2] {
        let n1 = self.n1();
        [self.basis1d.nodes[i % n1], self.basis1d.nodes[i / n1]]
    }

    /// Quadrature weight attached to node `i` (sums to 4).
    pub fn weight(&self, i: usize) -> f64 {
        let n1 = self.n1();
        self.basis1d.weights[i % n1] * self.basis1d.weights[i / n1]
    }

    /// Shape function `i` at reference point `xi`.
    pub fn eval_shape(&self, i: usize, xi: [f64; 2]) -> f64 {
        let n1 = self.n1();
        self.basis1d.eval_lagrange(i % n1, xi[0]) * self.basis1d.eval_lagrange(i / n1, xi[1])
    }

    /// Evaluate the polynomial with nodal values `values` (stride `stride`,
    /// offset `offset`) at `xi`.
    pub fn evaluate(&self, values: &[f64], stride: usize, offset: usize, xi: [f64; 2]) -> f64 {
        let lx = self.basis1d.eval_all(xi[0]);
        let ly = self.basis1d.eval_all(xi[1]);
        let n1 = self.n1();
        let mut acc = 0.0;
        for (b, &wy) in ly.iter().enumerate() {
            for (a, &wx) in lx.iter().enumerate() {
                acc += wx * wy * values[(a + n1 * b) * stride + offset];
            }
        }
        acc
    }
}
