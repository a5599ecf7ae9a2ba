//! Radially symmetric reference for the cylindrical explosion: the 1D Euler
//! equations in `r` with geometric source `-(1/r) (rho u, rho u^2, (E + p) u)`,
//! solved by MUSCL-Hancock with minmod slopes and Rusanov fluxes.

use std::io::Write;
use std::path::Path;

use crate::basis::TensorBasis2D;
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::QuadMesh;

type Cons = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSetup {
    pub n_cells: usize,
    pub r_max: f64,
    pub gamma: f64,
    /// Discontinuity radius of the initial data.
    pub radius: f64,
    /// `(rho, p)` inside and outside, both at rest.
    pub inner: (f64, f64),
    pub outer: (f64, f64),
    pub cfl: f64,
}

impl RadialSetup {
    pub fn explosion(n_cells: usize) -> Self {
        Self {
            n_cells,
            r_max: 1.2,
            gamma: 1.4,
            radius: 0.5,
            inner: (1.0, 1.0),
            outer: (0.125, 0.1),
            cfl: 0.4,
        }
    }

    pub fn initial(&self, r: f64) -> [f64; 3] {
        let (rho, p) = if r <= self.radius { self.inner } else { self.outer };
        [rho, 0.0, p]
    }
}

/// Snapshots `(rho, u, p)` at cell centres for a list of times.
#[derive(Debug, Clone)]
pub struct RadialReference {
    setup: RadialSetup,
    times: Vec<f64>,
    snapshots: Vec<Vec<[f64; 3]>>,
}

pub const EXPLOSION_CELLS: usize = 10_000;

impl RadialReference {
    pub fn explosion(times: &[f64]) -> Result<Self> {
        Self::compute(RadialSetup::explosion(EXPLOSION_CELLS), times)
    }

    pub fn compute(setup: RadialSetup, times: &[f64]) -> Result<Self> {
        let mut times: Vec<f64> = times.to_vec();
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput(format!("bad snapshot times {times:?}")));
        }
        let g = setup.gamma;
        let n = setup.n_cells;
        let dr = setup.r_max / n as f64;
        let centre = |i: usize| (i as f64 + 0.5) * dr;
        let mut u: Vec<Cons> = (0..n).map(|i| to_cons(setup.initial(centre(i)), g)).collect();
        let mut t = 0.0;
        let mut snapshots = Vec::with_capacity(times.len());

        let mut slopes = vec![[0.0; 3]; n];
        let mut left = vec![[0.0; 3]; n];
        let mut right = vec![[0.0; 3]; n];
        let mut half = vec![[0.0; 3]; n];
        let mut flux = vec![[0.0; 3]; n + 1];

        for &target in &times {
            while t < target - 1e-14 {
                let mut smax = 0.0f64;
                for c in &u {
                    let [rho, v, p] = to_prim(c, g)?;
                    smax = smax.max(v.abs() + (g * p / rho).sqrt());
                }
                let mut dt = setup.cfl * dr / smax;
                if t + dt > target {
                    dt = target - t;
                }
                let ghost = |i: isize, u: &[Cons]| -> Cons {
                    if i < 0 {
                        let c = u[(-i - 1) as usize];
                        [c[0], -c[1], c[2]]
                    } else if i as usize >= n {
                        u[n - 1]
                    } else {
                        u[i as usize]
                    }
                };
                for i in 0..n {
                    let a = ghost(i as isize - 1, &u);
                    let b = u[i];
                    let c = ghost(i as isize + 1, &u);
                    for v in 0..3 {
                        slopes[i][v] = minmod(b[v] - a[v], c[v] - b[v]);
                    }
                }
                for i in 0..n {
                    let mut l = [0.0; 3];
                    let mut r = [0.0; 3];
                    for v in 0..3 {
                        l[v] = u[i][v] - 0.5 * slopes[i][v];
                        r[v] = u[i][v] + 0.5 * slopes[i][v];
                    }
                    let fl = phys_flux(&l, g)?;
                    let fr = phys_flux(&r, g)?;
                    let s = source(&u[i], centre(i), g)?;
                    for v in 0..3 {
                        let d = -0.5 * dt / dr * (fr[v] - fl[v]) + 0.5 * dt * s[v];
                        left[i][v] = l[v] + d;
                        right[i][v] = r[v] + d;
                        half[i][v] = u[i][v] + d;
                    }
                }
                for f in 0..=n {
                    let wl = if f == 0 {
                        let c = left[0];
                        [c[0], -c[1], c[2]]
                    } else {
                        right[f - 1]
                    };
                    let wr = if f == n { right[n - 1] } else { left[f] };
                    flux[f] = rusanov(&wl, &wr, g)?;
                }
                for i in 0..n {
                    let s = source(&half[i], centre(i), g)?;
                    for v in 0..3 {
                        u[i][v] -= dt / dr * (flux[i + 1][v] - flux[i][v]) - dt * s[v];
                    }
                }
                t += dt;
            }
            let snap = if target == 0.0 {
                (0..n).map(|i| setup.initial(centre(i))).collect()
            } else {
                u.iter().map(|c| to_prim(c, g)).collect::<Result<Vec<_>>>()?
            };
            snapshots.push(snap);
        }
        Ok(Self {
            setup,
            times,
            snapshots,
        })
    }

    pub fn setup(&self) -> &RadialSetup {
        &self.setup
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `(rho, u_r, p)` at radius `r`, linear between cell centres; `t` must be
    /// one of the stored times.
    pub fn sample(&self, r: f64, t: f64) -> Result<[f64; 3]> {
        let ti = self
            .times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * s.abs().max(1.0))
            .ok_or_else(|| Error::Range(format!("no reference snapshot at t = {t}")))?;
        if !(r >= 0.0 && r <= self.setup.r_max) {
            return Err(Error::Range(format!(
                "r = {r} outside [0, {}]",
                self.setup.r_max
            )));
        }
        let snap = &self.snapshots[ti];
        let dr = self.setup.r_max / self.setup.n_cells as f64;
        let pos = r / dr - 0.5;
        if pos <= 0.0 {
            return Ok(snap[0]);
        }
        let i = pos.floor() as usize;
        if i + 1 >= snap.len() {
            return Ok(snap[snap.len() - 1]);
        }
        let w = pos - i as f64;
        let mut out = [0.0; 3];
        for v in 0..3 {
            out[v] = (1.0 - w) * snap[i][v] + w * snap[i + 1][v];
        }
        Ok(out)
    }

    /// CSV with columns `t,r,rho,u,p`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(f, "t,r,rho,u,p").map_err(io)?;
        let dr = self.setup.r_max / self.setup.n_cells as f64;
        for (t, snap) in self.times.iter().zip(&self.snapshots) {
            for (i, s) in snap.iter().enumerate() {
                let r = (i as f64 + 0.5) * dr;
                writeln!(f, "{t:?},{r:?},{:?},{:?},{:?}", s[0], s[1], s[2]).map_err(io)?;
            }
        }
        f.flush().map_err(io)
    }
}

/// Nodal values of one variable grouped by distance from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialBins {
    pub width: f64,
    pub mean: Vec<Option<f64>>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl RadialBins {
    pub fn centre(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.width
    }
}

/// Bin the nodes of `field` with `|x| < r_max` into `n_bins` equal shells.
pub fn radial_bins(
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    var: usize,
    n_bins: usize,
    r_max: f64,
) -> Result<RadialBins> {
    field.check_mesh(mesh)?;
    if n_bins == 0 || !(r_max > 0.0) {
        return Err(Error::InvalidInput(format!("{n_bins} bins up to {r_max}")));
    }
    let width = r_max / n_bins as f64;
    let mut sum = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    let mut min = vec![f64::INFINITY; n_bins];
    let mut max = vec![f64::NEG_INFINITY; n_bins];
    for (ci, cell) in mesh.cells().iter().enumerate() {
        for i in 0..basis.n_nodes() {
            let x = cell.map(basis.node(i));
            let r = x[0].hypot(x[1]);
            if r >= r_max {
                continue;
            }
            let b = ((r / width) as usize).min(n_bins - 1);
            let v = field.get(ci, i, var);
            sum[b] += v;
            count[b] += 1;
            min[b] = min[b].min(v);
            max[b] = max[b].max(v);
        }
    }
    let mean = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    Ok(RadialBins { width, mean, min, max })
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn to_cons(p: [f64; 3], g: f64) -> Cons {
    [p[0], p[0] * p[1], p[2] / (g - 1.0) + 0.5 * p[0] * p[1] * p[1]]
}

fn to_prim(c: &Cons, g: f64) -> Result<[f64; 3]> {
    let rho = c[0];
    let u = c[1] / rho;
    let p = (g - 1.0) * (c[2] - 0.5 * rho * u * u);
    if !(rho > 0.0 && p > 0.0) {
        return Err(Error::NegativePressure(format!("radial reference state {c:?}")));
    }
    Ok([rho, u, p])
}

fn phys_flux(c: &Cons, g: f64) -> Result<Cons> {
    let [_, u, p] = to_prim(c, g)?;
    Ok([c[1], c[1] * u + p, (c[2] + p) * u])
}

fn source(c: &Cons, r: f64, g: f64) -> Result<Cons> {
    let [_, u, p] = to_prim(c, g)?;
    Ok([-c[1] / r, -c[1] * u / r, -(c[2] + p) * u / r])
}

fn rusanov(l: &Cons, r: &Cons, g: f64) -> Result<Cons> {
    let pl = to_prim(l, g)?;
    let pr = to_prim(r, g)?;
    let lam = (pl[1].abs() + (g * pl[2] / pl[0]).sqrt()).max(pr[1].abs() + (g * pr[2] / pr[0]).sqrt());
    let fl = phys_flux(l, g)?;
    let fr = phys_flux(r, g)?;
    let mut out = [0.0; 3];
    for v in 0..3 {
        out[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * lam * (r[v] - l[v]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_snapshot_and_range() {
        let r = RadialReference::compute(RadialSetup::explosion(200), &[0.0]).unwrap();
        assert_eq!(r.sample(0.2, 0.0).unwrap(), [1.0, 0.0, 1.0]);
        assert_eq!(r.sample(0.9, 0.0).unwrap(), [0.125, 0.0, 0.1]);
        assert!(matches!(r.sample(1.3, 0.0), Err(Error::Range(_))));
        assert!(matches!(r.sample(0.3, 0.1), Err(Error::Range(_))));
    }

    #[test]
    fn uniform_gas_stays_at_rest() {
        let setup = RadialSetup {
            inner: (0.7, 0.5),
            outer: (0.7, 0.5),
            ..RadialSetup::explosion(100)
        };
        let r = RadialReference::compute(setup, &[0.1]).unwrap();
        for i in 0..100 {
            let s = r.sample(0.012 * i as f64, 0.1).unwrap();
            assert!((s[0] - 0.7).abs() < 1e-12 && s[1].abs() < 1e-12 && (s[2] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bins_of_radial_field() {
        let mesh = QuadMesh::build_uniform(8, 8, crate::mesh::Rect::square(-1.0, 1.0)).unwrap();
        let b = TensorBasis2D::new(1);
        let f = NodalField::interpolate(&mesh, &b, 1, |x| [2.0 + x[0].hypot(x[1]), 0.0, 0.0, 0.0]);
        let bins = radial_bins(&mesh, &b, &f, 0, 4, 1.0).unwrap();
        for i in 0..4 {
            let m = bins.mean[i].unwrap();
            assert!((m - 2.0 - bins.centre(i)).abs() <= 0.5 * bins.width + 1e-9);
            assert!(bins.min[i] >= 2.0 + i as f64 * 0.25 - 1e-9);
            assert!(bins.max[i] <= 2.0 + (i + 1) as f64 * 0.25 + 1e-9);
        }
        assert!(radial_bins(&mesh, &b, &f, 0, 0, 1.0).is_err());
    }

    #[test]
    fn explosion_structure() {
        let r = RadialReference::compute(RadialSetup::explosion(1000), &[0.2]).unwrap();
        // undisturbed far field and core, outward flow behind the shock,
        // expansion between
        assert_eq!(r.sample(1.15, 0.2).unwrap(), [0.125, 0.0, 0.1]);
        let core = r.sample(0.05, 0.2).unwrap();
        assert!((core[0] - 1.0).abs() < 1e-10 && core[1].abs() < 1e-10);
        let mid = r.sample(0.7, 0.2).unwrap();
        assert!(mid[1] > 0.3 && mid[0] > 0.125);
        assert!(r.sample(0.4, 0.2).unwrap()[0] < 0.9);
    }
}
