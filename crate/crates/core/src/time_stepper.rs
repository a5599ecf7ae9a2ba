//! SSP Runge–Kutta drivers written as convex combinations of forward-Euler
//! substeps, the filtered stage update, and Courant-based step selection.

use serde::{Deserialize, Serialize};

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::field::{NodalField, StageVector};
use crate::filter::FilterConfig;
use crate::low_order::{broadcast_to_nodes, project_to_averages};
use crate::mesh::QuadMesh;
use crate::models::PdeModel;

/// One stage: `c_old v^n + c_prev E(v_prev, c_euler dt)` with
/// `E(v, tau) = v + tau R(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SspStage {
    pub c_old: f64,
    pub c_prev: f64,
    pub c_euler: f64,
    /// Stage time offset as a fraction of `dt`.
    pub c_time: f64,
}

impl SspStage {
    /// The stage's advancement factor: `c_prev` times the substep length.
    pub fn alpha(&self) -> f64 {
        self.c_prev * self.c_euler
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Ssp2,
    Ssp3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageScheme {
    order: usize,
    stages: Vec<SspStage>,
}

impl StageScheme {
    fn from_stages(order: usize, stages: Vec<SspStage>) -> Self {
        for s in &stages {
            assert!(s.c_old >= 0.0 && s.c_prev >= 0.0 && s.c_euler >= 0.0);
            assert!((s.c_old + s.c_prev - 1.0).abs() < 1e-15);
        }
        Self { order, stages }
    }

    pub fn ssp2() -> Self {
        let st = |c_old, c_prev, c_time| SspStage {
            c_old,
            c_prev,
            c_euler: 1.0,
            c_time,
        };
        Self::from_stages(2, vec![st(0.0, 1.0, 0.0), st(0.5, 0.5, 1.0)])
    }

    pub fn ssp3() -> Self {
        let st = |c_old, c_prev, c_time| SspStage {
            c_old,
            c_prev,
            c_euler: 1.0,
            c_time,
        };
        Self::from_stages(
            3,
            vec![
                st(0.0, 1.0, 0.0),
                st(0.75, 0.25, 1.0),
                st(1.0 / 3.0, 2.0 / 3.0, 0.5),
            ],
        )
    }

    pub fn new(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::Ssp2 => Self::ssp2(),
            SchemeKind::Ssp3 => Self::ssp3(),
        }
    }

    /// Default pairing with the polynomial degree.
    pub fn default_kind(degree: usize) -> SchemeKind {
        if degree <= 1 {
            SchemeKind::Ssp2
        } else {
            SchemeKind::Ssp3
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stages(&self) -> &[SspStage] {
        &self.stages
    }

    pub fn alpha(&self, stage: usize) -> f64 {
        self.stages[stage].alpha()
    }
}

/// Stage `idx` of `scheme` given the step start `v_n`, the previous stage
/// `v_prev` and a forward-Euler substep `euler(v, t_stage, tau)`.
pub fn ssp_stage<V, E>(
    scheme: &StageScheme,
    idx: usize,
    v_n: &V,
    v_prev: &V,
    t: f64,
    dt: f64,
    euler: &mut E,
) -> Result<V>
where
    V: StageVector,
    E: FnMut(&V, f64, f64) -> Result<V>,
{
    let s = scheme.stages[idx];
    let sub = euler(v_prev, t + s.c_time * dt, s.c_euler * dt)?;
    V::lincomb(s.c_old, v_n, s.c_prev, &sub)
}

/// A full step built from [`ssp_stage`].
pub fn ssp_step<V, E>(scheme: &StageScheme, v_n: &V, t: f64, dt: f64, mut euler: E) -> Result<V>
where
    V: StageVector + Clone,
    E: FnMut(&V, f64, f64) -> Result<V>,
{
    let mut v = v_n.clone();
    for idx in 0..scheme.stages.len() {
        v = ssp_stage(scheme, idx, v_n, &v, t, dt, &mut euler)?;
    }
    Ok(v)
}

/// How each stage combines the two operators.
#[derive(Debug, Clone, PartialEq)]
pub enum Blend {
    HighOnly,
    LowOnly,
    Filter(FilterConfig),
}

/// One SSP step with `blend` applied after every stage.
pub fn filtered_step<M: PdeModel>(
    disc: &Discretization<M>,
    mesh: &QuadMesh,
    v_n: &NodalField,
    t: f64,
    dt: f64,
    scheme: &StageScheme,
    blend: &Blend,
) -> Result<NodalField> {
    Discretization::<M>::check_dt(dt)?;
    if let Blend::HighOnly = blend {
        return ssp_step(scheme, v_n, t, dt, |v, ts, tau| {
            disc.dg_euler_substep(mesh, v, ts, tau)
        });
    }
    let k = disc.degree();
    let avg_n = project_to_averages(mesh, disc.basis(), v_n)?;
    let mut v = v_n.clone();
    for (idx, s) in scheme.stages().iter().enumerate() {
        let ts = t + s.c_time * dt;
        let tau = s.c_euler * dt;
        let avg_prev = project_to_averages(mesh, disc.basis(), &v)?;
        let low = disc.fv_substep(mesh, &avg_prev, ts, tau)?;
        let u_m = broadcast_to_nodes(mesh, &StageVector::lincomb(s.c_old, &avg_n, s.c_prev, &low)?, k)?;
        v = match blend {
            Blend::LowOnly => u_m,
            Blend::Filter(cfg) => {
                let high = disc.dg_euler_substep(mesh, &v, ts, tau)?;
                let u_h = NodalField::lincomb(s.c_old, v_n, s.c_prev, &high)?;
                cfg.apply(mesh, &u_h, &u_m, scheme.alpha(idx) * dt, disc.model())?
            }
            Blend::HighOnly => unreachable!(),
        };
    }
    Ok(v)
}

/// `dt = C H / (k max speed)` with `H` the smallest cell diameter; degree 0
/// uses the factor 1.
pub fn compute_dt<M: PdeModel + ?Sized>(
    courant: f64,
    field: &NodalField,
    model: &M,
    mesh: &QuadMesh,
    t: f64,
    basis: &crate::basis::TensorBasis2D,
) -> Result<f64> {
    field.check_mesh(mesh)?;
    let mut speed = 0.0f64;
    for (ci, cell) in mesh.cells().iter().enumerate() {
        for i in 0..field.nodes_per_cell() {
            let x = cell.map(basis.node(i));
            let s = model
                .courant_speed(&field.node(ci, i), x, t)
                .map_err(|e| e.in_cell(ci))?;
            speed = speed.max(s);
        }
    }
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::DegenerateDynamics);
    }
    let k = field.degree().max(1) as f64;
    Ok(courant * mesh.min_diameter() / (k * speed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    FixedDt(f64),
    Courant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController {
    pub mode: StepMode,
    pub t_final: f64,
}

impl StepController {
    pub fn new(mode: StepMode, t_final: f64) -> Result<Self> {
        let v = match mode {
            StepMode::FixedDt(v) | StepMode::Courant(v) => v,
        };
        if !(v > 0.0 && v.is_finite()) || !(t_final > 0.0) {
            return Err(Error::Config(format!("invalid time control {mode:?}, t_final {t_final}")));
        }
        Ok(Self { mode, t_final })
    }

    /// Step size from time `t`, clipped so the last step lands on `t_final`.
    /// Returns `None` once `t_final` is reached.
    pub fn next_dt<M: PdeModel + ?Sized>(
        &self,
        t: f64,
        field: &NodalField,
        model: &M,
        mesh: &QuadMesh,
        basis: &crate::basis::TensorBasis2D,
    ) -> Result<Option<f64>> {
        let remaining = self.t_final - t;
        if remaining <= 1e-12 * self.t_final.max(1.0) {
            return Ok(None);
        }
        let dt = match self.mode {
            StepMode::FixedDt(dt) => dt,
            StepMode::Courant(c) => compute_dt(c, field, model, mesh, t, basis)?,
        };
        // avoid a sliver step at the end
        if dt >= remaining * (1.0 - 1e-9) {
            Ok(Some(remaining))
        } else {
            Ok(Some(dt))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::TensorBasis2D;
    use crate::filter::{FilterFunction, FilterMode};
    use crate::high_order::BoundaryRule;
    use crate::mesh::Rect;
    use crate::models::{AdvectionModel, EulerModel, EulerState, IdealGasEos, VelocityField};

    fn decay(scheme: &StageScheme, dt: f64, steps: usize) -> f64 {
        let mut y = 1.0;
        for _ in 0..steps {
            y = ssp_step(scheme, &y, 0.0, dt, |v: &f64, _, tau| Ok(v - tau * v)).unwrap();
        }
        y
    }

    #[test]
    fn ode_examples() {
        let s2 = StageScheme::ssp2();
        let first =
            ssp_stage(&s2, 0, &1.0, &1.0, 0.0, 0.1, &mut |v: &f64, _, tau| Ok(v - tau * v)).unwrap();
        assert!((first - 0.9).abs() < 1e-15);
        assert!((decay(&s2, 0.1, 1) - 0.905).abs() < 1e-15);
        let y3 = decay(&StageScheme::ssp3(), 0.1, 1);
        assert!((y3 - 0.9048333333333334).abs() < 1e-15);
        let zero = ssp_step(&StageScheme::ssp3(), &0.37, 0.0, 0.1, |v: &f64, _, _| Ok(*v)).unwrap();
        assert_eq!(zero, 0.37);
    }

    #[test]
    fn alphas_and_convexity() {
        let a2: Vec<f64> = (0..2).map(|i| StageScheme::ssp2().alpha(i)).collect();
        assert_eq!(a2, vec![1.0, 0.5]);
        let s3 = StageScheme::ssp3();
        assert_eq!((s3.alpha(0), s3.alpha(1)), (1.0, 0.25));
        assert!((s3.alpha(2) - 2.0 / 3.0).abs() < 1e-15);
        for s in StageScheme::ssp3().stages() {
            assert!((s.c_old + s.c_prev - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn global_order() {
        let exact = (-1.0f64).exp();
        for (scheme, order) in [(StageScheme::ssp2(), 2.0), (StageScheme::ssp3(), 3.0)] {
            let errs: Vec<f64> = [10usize, 20, 40]
                .iter()
                .map(|&n| (decay(&scheme, 1.0 / n as f64, n) - exact).abs())
                .collect();
            for w in errs.windows(2) {
                let ratio = w[0] / w[1];
                let target = 2f64.powf(order);
                assert!((ratio / target - 1.0).abs() < 0.1, "{ratio}");
            }
        }
    }

    #[test]
    fn courant_examples() {
        let mesh = QuadMesh::build_uniform(1, 1, Rect::square(0.0, 0.01 / 2f64.sqrt())).unwrap();
        let adv = AdvectionModel::new(VelocityField::Uniform { velocity: [1.0, 0.0] });
        let b1 = TensorBasis2D::new(1);
        let f = NodalField::interpolate(&mesh, &b1, 1, |_| [1.0, 0.0, 0.0, 0.0]);
        let dt = compute_dt(0.1, &f, &adv, &mesh, 0.0, &b1).unwrap();
        assert!((dt - 1e-3).abs() < 1e-15);

        let eos = IdealGasEos::default();
        let w = EulerState::from_primitive(1.0, [0.0, 0.0], 1.0, &eos).to_array();
        let b2 = TensorBasis2D::new(2);
        let f = NodalField::interpolate(&mesh, &b2, 4, |_| w);
        let dt = compute_dt(0.1, &f, &EulerModel::default(), &mesh, 0.0, &b2).unwrap();
        assert!((dt - 4.226e-4).abs() < 1e-7);

        let fine = QuadMesh::build_uniform(2, 2, Rect::square(0.0, 0.01 / 2f64.sqrt())).unwrap();
        let f = NodalField::interpolate(&fine, &b2, 4, |_| w);
        let half = compute_dt(0.1, &f, &EulerModel::default(), &fine, 0.0, &b2).unwrap();
        assert!((half - dt / 2.0).abs() < 1e-15);

        let still = AdvectionModel::new(VelocityField::Uniform { velocity: [0.0, 0.0] });
        let f = NodalField::interpolate(&mesh, &b1, 1, |_| [1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            compute_dt(0.1, &f, &still, &mesh, 0.0, &b1),
            Err(Error::DegenerateDynamics)
        ));
    }

    #[test]
    fn controller_clips_last_step() {
        let mesh = QuadMesh::build_uniform(1, 1, Rect::square(0.0, 1.0)).unwrap();
        let b = TensorBasis2D::new(1);
        let f = NodalField::zeros(&mesh, 1, 1);
        let adv = AdvectionModel::new(VelocityField::Uniform { velocity: [1.0, 0.0] });
        let c = StepController::new(StepMode::FixedDt(0.3), 1.0).unwrap();
        let mut t = 0.0;
        let mut steps = vec![];
        while let Some(dt) = c.next_dt(t, &f, &adv, &mesh, &b).unwrap() {
            steps.push(dt);
            t += dt;
        }
        assert_eq!(steps.len(), 4);
        assert!((steps[3] - 0.1).abs() < 1e-12);
        assert!((t - 1.0).abs() < 1e-15);
        assert!(StepController::new(StepMode::Courant(0.0), 1.0).is_err());
    }

    fn square_wave() -> (QuadMesh, Discretization<AdvectionModel>, NodalField) {
        let mesh = QuadMesh::uniform(12, 12, Rect::square(0.0, 1.0), [true, true]).unwrap();
        let disc = Discretization::new(
            AdvectionModel::new(VelocityField::Uniform { velocity: [1.0, 0.5] }),
            1,
            BoundaryRule::Periodic,
        )
        .unwrap();
        let v = NodalField::interpolate(&mesh, disc.basis(), 1, |x| {
            [if (x[0] - 0.5).abs() < 0.2 && (x[1] - 0.5).abs() < 0.2 { 1.0 } else { 0.0 }, 0.0, 0.0, 0.0]
        });
        (mesh, disc, v)
    }

    #[test]
    fn filter_limits() {
        let (mesh, disc, v) = square_wave();
        let s = StageScheme::ssp2();
        let dt = 0.004;
        let high = filtered_step(&disc, &mesh, &v, 0.0, dt, &s, &Blend::HighOnly).unwrap();
        let wide = Blend::Filter(FilterConfig {
            function: FilterFunction::F1,
            mode: FilterMode::Relative { betas: vec![1e300] },
            floor: 1e-8,
        });
        let through = filtered_step(&disc, &mesh, &v, 0.0, dt, &s, &wide).unwrap();
        assert_eq!(through, high);

        let low = filtered_step(&disc, &mesh, &v, 0.0, dt, &s, &Blend::LowOnly).unwrap();
        let tight = Blend::Filter(FilterConfig::absolute(FilterFunction::F1, 1e-300));
        let cut = filtered_step(&disc, &mesh, &v, 0.0, dt, &s, &tight).unwrap();
        for i in 0..cut.values().len() {
            // at nodes where the operators agree exactly either value is the same
            assert_eq!(cut.values()[i], low.values()[i]);
        }
    }

    #[test]
    fn low_only_is_first_order_fv() {
        let (mesh, disc, v) = square_wave();
        let s = StageScheme::ssp2();
        let low = filtered_step(&disc, &mesh, &v, 0.0, 0.004, &s, &Blend::LowOnly).unwrap();
        let a0 = project_to_averages(&mesh, disc.basis(), &v).unwrap();
        let a1 = ssp_step(&s, &a0, 0.0, 0.004, |a, ts, tau| disc.fv_substep(&mesh, a, ts, tau)).unwrap();
        let expect = broadcast_to_nodes(&mesh, &a1, 1).unwrap();
        for (x, y) in low.values().iter().zip(expect.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
