//! PDE models: scalar linear advection and the 2D Euler equations with an
//! ideal-gas equation of state, plus the benchmark initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Rect;

/// Largest number of conserved variables of any model.
pub const MAX_VARS: usize = 4;

/// Conserved variables at a point; unused trailing slots stay zero.
pub type State = [f64; MAX_VARS];
pub type Point = [f64; 2];

pub trait PdeModel: Send + Sync {
    fn n_vars(&self) -> usize;

    fn var_names(&self) -> &'static [&'static str];

    /// Physical flux, one column per coordinate direction.
    fn flux(&self, u: &State, x: Point, t: f64) -> Result<[State; 2]>;

    /// `F(u) . n`.
    fn normal_flux(&self, u: &State, x: Point, t: f64, n: [f64; 2]) -> Result<State>;

    /// Largest characteristic speed along `n`.
    fn max_wave_speed(&self, u: &State, x: Point, t: f64, n: [f64; 2]) -> Result<f64>;

    /// Normal flux and wave speed together; models override this when the two
    /// share work.
    fn normal_flux_and_speed(
        &self,
        u: &State,
        x: Point,
        t: f64,
        n: [f64; 2],
    ) -> Result<(State, f64)> {
        Ok((
            self.normal_flux(u, x, t, n)?,
            self.max_wave_speed(u, x, t, n)?,
        ))
    }

    /// Speed entering the Courant number: `U` for advection, `U + c` for gas.
    fn courant_speed(&self, u: &State, x: Point, t: f64) -> Result<f64>;

    fn check_admissible(&self, u: &State) -> Result<()>;

    /// Filter parameter group of a variable (momentum components share one).
    fn filter_group(&self, var: usize) -> usize {
        let _ = var;
        0
    }

    fn n_filter_groups(&self) -> usize {
        1
    }

    /// Variable driving the refinement indicator.
    fn indicator_var(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityField {
    Uniform { velocity: [f64; 2] },
    /// Solid-body rotation `omega * (-(y - yc), x - xc)`.
    Rotation { omega: f64, center: [f64; 2] },
}

impl VelocityField {
    pub fn at(&self, x: Point, _t: f64) -> [f64; 2] {
        match *self {
            VelocityField::Uniform { velocity } => velocity,
            VelocityField::Rotation { omega, center } => {
                [-omega * (x[1] - center[1]), omega * (x[0] - center[0])]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionModel {
    pub velocity: VelocityField,
}

impl AdvectionModel {
    pub fn new(velocity: VelocityField) -> Self {
        Self { velocity }
    }
}

impl PdeModel for AdvectionModel {
    fn n_vars(&self) -> usize {
        1
    }

    fn var_names(&self) -> &'static [&'static str] {
        &["u"]
    }

    fn flux(&self, u: &State, x: Point, t: f64) -> Result<[State; 2]> {
        let a = self.velocity.at(x, t);
        Ok([[a[0] * u[0], 0.0, 0.0, 0.0], [a[1] * u[0], 0.0, 0.0, 0.0]])
    }

    fn normal_flux(&self, u: &State, x: Point, t: f64, n: [f64; 2]) -> Result<State> {
        let a = self.velocity.at(x, t);
        Ok([(a[0] * n[0] + a[1] * n[1]) * u[0], 0.0, 0.0, 0.0])
    }

    fn max_wave_speed(&self, _u: &State, x: Point, t: f64, n: [f64; 2]) -> Result<f64> {
        let a = self.velocity.at(x, t);
        Ok((a[0] * n[0] + a[1] * n[1]).abs())
    }

    fn courant_speed(&self, _u: &State, x: Point, t: f64) -> Result<f64> {
        let a = self.velocity.at(x, t);
        Ok(a[0].hypot(a[1]))
    }

    fn check_admissible(&self, u: &State) -> Result<()> {
        if u[0].is_finite() {
            Ok(())
        } else {
            Err(Error::NegativePressure(format!("non-finite value {}", u[0])))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealGasEos {
    pub gamma: f64,
}

impl Default for IdealGasEos {
    fn default() -> Self {
        Self { gamma: 1.4 }
    }
}

impl IdealGasEos {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 {
            Ok(Self { gamma })
        } else {
            Err(Error::InvalidInput(format!("gamma = {gamma} must exceed 1")))
        }
    }

    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerState {
    pub rho: f64,
    pub momentum: [f64; 2],
    pub rho_e: f64,
}

impl EulerState {
    pub fn from_primitive(rho: f64, velocity: [f64; 2], p: f64, eos: &IdealGasEos) -> Self {
        let ke = 0.5 * rho * (velocity[0] * velocity[0] + velocity[1] * velocity[1]);
        Self {
            rho,
            momentum: [rho * velocity[0], rho * velocity[1]],
            rho_e: p / (eos.gamma - 1.0) + ke,
        }
    }

    pub fn from_array(u: &State) -> Self {
        Self {
            rho: u[0],
            momentum: [u[1], u[2]],
            rho_e: u[3],
        }
    }

    pub fn to_array(&self) -> State {
        [self.rho, self.momentum[0], self.momentum[1], self.rho_e]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.momentum[0] / self.rho, self.momentum[1] / self.rho]
    }
}

/// `p = (gamma - 1)(rho E - |m|^2 / (2 rho))`, rejecting non-physical states.
pub fn pressure(state: &EulerState, eos: &IdealGasEos) -> Result<f64> {
    let rho = state.rho;
    if !(rho > 0.0) {
        return Err(Error::NegativePressure(format!("density {rho}")));
    }
    let m = state.momentum;
    let p = (eos.gamma - 1.0) * (state.rho_e - 0.5 * (m[0] * m[0] + m[1] * m[1]) / rho);
    if p > 0.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(Error::NegativePressure(format!("pressure {p} (rho = {rho})")))
    }
}

/// Flux columns `[F_x, F_y]` of the Euler system.
pub fn euler_flux(state: &EulerState, eos: &IdealGasEos) -> Result<[State; 2]> {
    let p = pressure(state, eos)?;
    let [u, v] = state.velocity();
    let m = state.momentum;
    let h = state.rho_e + p;
    Ok([
        [m[0], m[0] * u + p, m[1] * u, h * u],
        [m[1], m[0] * v, m[1] * v + p, h * v],
    ])
}

/// `|u . n| + c`.
pub fn max_wave_speed(state: &EulerState, eos: &IdealGasEos, n: [f64; 2]) -> Result<f64> {
    let p = pressure(state, eos)?;
    let [u, v] = state.velocity();
    Ok((u * n[0] + v * n[1]).abs() + eos.sound_speed(state.rho, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerModel {
    pub eos: IdealGasEos,
}

impl EulerModel {
    pub fn new(eos: IdealGasEos) -> Self {
        Self { eos }
    }

    /// `(rho, u, v, p)` of a conserved state.
    pub fn primitive(&self, u: &State) -> Result<[f64; 4]> {
        let s = EulerState::from_array(u);
        let p = pressure(&s, &self.eos)?;
        let [vx, vy] = s.velocity();
        Ok([s.rho, vx, vy, p])
    }
}

impl PdeModel for EulerModel {
    fn n_vars(&self) -> usize {
        4
    }

    fn var_names(&self) -> &'static [&'static str] {
        &["rho", "rho_u", "rho_v", "rho_E"]
    }

    fn flux(&self, u: &State, _x: Point, _t: f64) -> Result<[State; 2]> {
        euler_flux(&EulerState::from_array(u), &self.eos)
    }

    fn normal_flux(&self, u: &State, x: Point, t: f64, n: [f64; 2]) -> Result<State> {
        Ok(self.normal_flux_and_speed(u, x, t, n)?.0)
    }

    fn max_wave_speed(&self, u: &State, _x: Point, _t: f64, n: [f64; 2]) -> Result<f64> {
        max_wave_speed(&EulerState::from_array(u), &self.eos, n)
    }

    fn normal_flux_and_speed(
        &self,
        u: &State,
        _x: Point,
        _t: f64,
        n: [f64; 2],
    ) -> Result<(State, f64)> {
        let s = EulerState::from_array(u);
        let p = pressure(&s, &self.eos)?;
        let inv = 1.0 / s.rho;
        let un = (u[1] * n[0] + u[2] * n[1]) * inv;
        let flux = [
            u[0] * un,
            u[1] * un + p * n[0],
            u[2] * un + p * n[1],
            (u[3] + p) * un,
        ];
        Ok((flux, un.abs() + self.eos.sound_speed(s.rho, p)))
    }

    fn courant_speed(&self, u: &State, _x: Point, _t: f64) -> Result<f64> {
        let s = EulerState::from_array(u);
        let p = pressure(&s, &self.eos)?;
        let [vx, vy] = s.velocity();
        Ok(vx.hypot(vy) + self.eos.sound_speed(s.rho, p))
    }

    fn check_admissible(&self, u: &State) -> Result<()> {
        pressure(&EulerState::from_array(u), &self.eos).map(|_| ())
    }

    fn filter_group(&self, var: usize) -> usize {
        match var {
            0 => 0,
            1 | 2 => 1,
            _ => 2,
        }
    }

    fn n_filter_groups(&self) -> usize {
        3
    }
}

/// Parameters of the isentropic vortex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexParams {
    /// Vortex strength (named apart from the filter tolerance).
    pub beta_vortex: f64,
    pub center: [f64; 2],
    pub u_inf: [f64; 2],
    pub gamma: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        Self {
            beta_vortex: 5.0,
            center: [0.0, 0.0],
            u_inf: [0.0, 0.0],
            gamma: 1.4,
        }
    }
}

impl VortexParams {
    /// `(rho, velocity, p)` at offset `(dx, dy)` from the vortex centre.
    pub fn primitive_at_offset(&self, dx: f64, dy: f64) -> (f64, [f64; 2], f64) {
        let g = self.gamma;
        let b = self.beta_vortex;
        let r2 = dx * dx + dy * dy;
        let pi = std::f64::consts::PI;
        let dt = (1.0 - g) / (8.0 * g * pi * pi) * b * b * (1.0 - r2).exp();
        let rho = (1.0 + dt).powf(1.0 / (g - 1.0));
        let p = (1.0 + dt).powf(g / (g - 1.0));
        let s = b * (0.5 * (1.0 - r2)).exp() / (2.0 * pi);
        let vel = [self.u_inf[0] - dy * s, self.u_inf[1] + dx * s];
        (rho, vel, p)
    }
}

/// Smooth or discontinuous profile for free-form advection runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `sin(2 pi x / Lx) sin(2 pi y / Ly)` shifted to `[0, 2]`.
    Sine,
    /// Indicator of the centred square of half the box size.
    Square,
}

/// Periodic constant-velocity advection on a user-chosen box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CustomAdvection {
    pub domain: Rect,
    pub velocity: [f64; 2],
    pub profile: Profile,
    pub t_final: f64,
}

impl CustomAdvection {
    /// Exact solution: the initial profile transported with periodic wrap.
    pub fn exact(&self, x: Point, t: f64) -> f64 {
        let d = self.domain;
        let wrap = |v: f64, lo: f64, len: f64| lo + (v - lo).rem_euclid(len);
        let px = wrap(x[0] - self.velocity[0] * t, d.x_min, d.width());
        let py = wrap(x[1] - self.velocity[1] * t, d.y_min, d.height());
        let sx = (px - d.x_min) / d.width();
        let sy = (py - d.y_min) / d.height();
        match self.profile {
            Profile::Sine => {
                1.0 + (2.0 * std::f64::consts::PI * sx).sin()
                    * (2.0 * std::f64::consts::PI * sy).sin()
            }
            Profile::Square => {
                if (sx - 0.5).abs() <= 0.25 && (sy - 0.5).abs() <= 0.25 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    SolidBodyRotation,
    IsentropicVortex,
    Sod,
    Explosion,
    Riemann2d,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Benchmark {
    SolidBodyRotation,
    IsentropicVortex(VortexParams),
    Sod,
    Explosion,
    Riemann2d,
    Custom(CustomAdvection),
}

/// The concrete model a benchmark runs on.
#[derive(Debug, Clone, Copy)]
pub enum ModelKind {
    Advection(AdvectionModel),
    Euler(EulerModel),
}

const SOLID_BODY_CENTER: [f64; 2] = [1.0 / 6.0, 1.0 / 6.0];
const SOLID_BODY_SIGMA: f64 = 0.2;
const EXPLOSION_RADIUS: f64 = 0.5;

impl Benchmark {
    pub fn kind(&self) -> BenchmarkKind {
        match self {
            Benchmark::SolidBodyRotation => BenchmarkKind::SolidBodyRotation,
            Benchmark::IsentropicVortex(_) => BenchmarkKind::IsentropicVortex,
            Benchmark::Sod => BenchmarkKind::Sod,
            Benchmark::Explosion => BenchmarkKind::Explosion,
            Benchmark::Riemann2d => BenchmarkKind::Riemann2d,
            Benchmark::Custom(_) => BenchmarkKind::Custom,
        }
    }

    pub fn is_euler(&self) -> bool {
        matches!(self.model(), ModelKind::Euler(_))
    }

    pub fn model(&self) -> ModelKind {
        match self {
            Benchmark::SolidBodyRotation => ModelKind::Advection(AdvectionModel::new(
                VelocityField::Rotation {
                    omega: 1.0,
                    center: [0.0, 0.0],
                },
            )),
            Benchmark::Custom(c) => ModelKind::Advection(AdvectionModel::new(
                VelocityField::Uniform {
                    velocity: c.velocity,
                },
            )),
            Benchmark::IsentropicVortex(p) => {
                ModelKind::Euler(EulerModel::new(IdealGasEos { gamma: p.gamma }))
            }
            _ => ModelKind::Euler(EulerModel::default()),
        }
    }

    /// Computational box for an `nx x ny` base grid. The 1D shock tube is a
    /// strip of square cells, periodic across.
    pub fn domain(&self, nx: usize, ny: usize) -> Rect {
        match self {
            Benchmark::SolidBodyRotation => Rect::square(-0.5, 0.5),
            Benchmark::IsentropicVortex(_) => Rect::square(-5.0, 5.0),
            Benchmark::Sod => Rect::new(-0.5, 0.5, 0.0, ny as f64 / nx as f64),
            Benchmark::Explosion => Rect::square(-1.0, 1.0),
            Benchmark::Riemann2d => Rect::square(0.0, 1.0),
            Benchmark::Custom(c) => c.domain,
        }
    }

    pub fn periodic(&self) -> [bool; 2] {
        match self {
            Benchmark::IsentropicVortex(_) | Benchmark::Custom(_) => [true, true],
            Benchmark::Sod => [false, true],
            _ => [false, false],
        }
    }

    pub fn t_final(&self) -> f64 {
        match self {
            Benchmark::SolidBodyRotation => 2.0 * std::f64::consts::PI,
            Benchmark::IsentropicVortex(_) => 10.0,
            Benchmark::Sod | Benchmark::Explosion => 0.2,
            Benchmark::Riemann2d => 0.25,
            Benchmark::Custom(c) => c.t_final,
        }
    }

    /// Conserved initial state at `x`.
    pub fn initial_condition(&self, x: Point) -> State {
        let eos = IdealGasEos::default();
        let gas = |rho: f64, u: f64, v: f64, p: f64| {
            EulerState::from_primitive(rho, [u, v], p, &eos).to_array()
        };
        match self {
            Benchmark::SolidBodyRotation => {
                let xx = (x[0] - SOLID_BODY_CENTER[0]) / SOLID_BODY_SIGMA;
                let yy = (x[1] - SOLID_BODY_CENTER[1]) / SOLID_BODY_SIGMA;
                let u = if xx * xx + yy * yy <= 1.0 { 1.0 } else { 0.0 };
                [u, 0.0, 0.0, 0.0]
            }
            Benchmark::IsentropicVortex(p) => {
                let (rho, vel, pr) =
                    p.primitive_at_offset(x[0] - p.center[0], x[1] - p.center[1]);
                let eos = IdealGasEos { gamma: p.gamma };
                EulerState::from_primitive(rho, vel, pr, &eos).to_array()
            }
            Benchmark::Sod => {
                if x[0] < 0.0 {
                    gas(1.0, 0.0, 0.0, 1.0)
                } else {
                    gas(0.125, 0.0, 0.0, 0.1)
                }
            }
            Benchmark::Explosion => {
                if x[0].hypot(x[1]) <= EXPLOSION_RADIUS {
                    gas(1.0, 0.0, 0.0, 1.0)
                } else {
                    gas(0.125, 0.0, 0.0, 0.1)
                }
            }
            Benchmark::Riemann2d => {
                let right = x[0] > 0.5;
                let top = x[1] > 0.5;
                match (right, top) {
                    (true, true) => gas(1.1, 0.0, 0.0, 1.1),
                    (false, true) => gas(0.5065, 0.8939, 0.0, 0.35),
                    (false, false) => gas(1.1, 0.8939, 0.8939, 1.1),
                    (true, false) => gas(0.5065, 0.0, 0.8939, 0.35),
                }
            }
            Benchmark::Custom(c) => [c.exact(x, 0.0), 0.0, 0.0, 0.0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EOS: IdealGasEos = IdealGasEos { gamma: 1.4 };

    #[test]
    fn pressure_examples() {
        let s = EulerState {
            rho: 1.0,
            momentum: [0.0, 0.0],
            rho_e: 2.5,
        };
        assert!((pressure(&s, &EOS).unwrap() - 1.0).abs() < 1e-15);
        let s = EulerState {
            rho: 0.125,
            momentum: [0.0, 0.0],
            rho_e: 0.25,
        };
        assert!((pressure(&s, &EOS).unwrap() - 0.1).abs() < 1e-15);
        let s = EulerState {
            rho: 1.0,
            momentum: [1.0, 0.0],
            rho_e: 3.0,
        };
        assert!((pressure(&s, &EOS).unwrap() - 1.0).abs() < 1e-15);
        let bad = EulerState {
            rho: 1.0,
            momentum: [3.0, 0.0],
            rho_e: 1.0,
        };
        assert!(matches!(pressure(&bad, &EOS), Err(Error::NegativePressure(_))));
        assert!(IdealGasEos::new(1.0).is_err());
    }

    #[test]
    fn flux_examples() {
        let rest = EulerState {
            rho: 1.0,
            momentum: [0.0, 0.0],
            rho_e: 2.5,
        };
        let f = euler_flux(&rest, &EOS).unwrap();
        for (got, want) in f.iter().zip([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]) {
            for (a, b) in got.iter().zip(want) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        let moving = EulerState {
            rho: 1.0,
            momentum: [1.0, 0.0],
            rho_e: 3.0,
        };
        let f = euler_flux(&moving, &EOS).unwrap();
        for (a, b) in f[0].iter().zip([1.0, 2.0, 0.0, 4.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let m = EulerModel::default();
        let (nf, _) = m
            .normal_flux_and_speed(&moving.to_array(), [0.0; 2], 0.0, [1.0, 0.0])
            .unwrap();
        for (a, b) in nf.iter().zip(f[0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn wave_speed_examples() {
        let rest = EulerState::from_primitive(1.0, [0.0, 0.0], 1.0, &EOS);
        let c = max_wave_speed(&rest, &EOS, [1.0, 0.0]).unwrap();
        assert!((c - 1.4f64.sqrt()).abs() < 1e-14);
        assert!((c - 1.18322).abs() < 1e-5);
        let scaled = EulerState::from_primitive(3.0, [0.0, 0.0], 3.0, &EOS);
        assert!((max_wave_speed(&scaled, &EOS, [0.0, 1.0]).unwrap() - c).abs() < 1e-14);

        let adv = AdvectionModel::new(VelocityField::Rotation {
            omega: 1.0,
            center: [0.0, 0.0],
        });
        let s = adv.courant_speed(&[0.0; 4], [0.5, 0.5], 0.0).unwrap();
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rotation_field_is_divergence_free() {
        let f = VelocityField::Rotation {
            omega: 1.3,
            center: [0.1, -0.2],
        };
        // affine field: centred differences are exact
        for &(x, y) in &[(0.3, 0.4), (-0.45, 0.11), (0.0, 0.0)] {
            let h = 1e-3;
            let dudx = (f.at([x + h, y], 0.0)[0] - f.at([x - h, y], 0.0)[0]) / (2.0 * h);
            let dvdy = (f.at([x, y + h], 0.0)[1] - f.at([x, y - h], 0.0)[1]) / (2.0 * h);
            assert_eq!(dudx + dvdy, 0.0);
        }
    }

    #[test]
    fn primitive_round_trip() {
        for &(rho, u, v, p) in &[(1.0, 0.3, -0.2, 0.7), (0.125, 2.0, 1.0, 0.1), (5.0, 0.0, 0.0, 3.0)] {
            let s = EulerState::from_primitive(rho, [u, v], p, &EOS);
            assert!((pressure(&s, &EOS).unwrap() - p).abs() < 1e-13);
            let f = euler_flux(&s, &EOS).unwrap();
            assert!((f[0][3] - (s.rho_e + p) * u).abs() < 1e-13);
        }
    }

    #[test]
    fn benchmark_initial_data() {
        assert_eq!(
            Benchmark::SolidBodyRotation.initial_condition([1.0 / 6.0, 1.0 / 6.0])[0],
            1.0
        );
        assert_eq!(Benchmark::SolidBodyRotation.initial_condition([-0.3, -0.3])[0], 0.0);

        let m = EulerModel::default();
        let sod = m.primitive(&Benchmark::Sod.initial_condition([-0.25, 0.0])).unwrap();
        assert_eq!(sod, [1.0, 0.0, 0.0, 1.0]);
        let right = m.primitive(&Benchmark::Sod.initial_condition([0.25, 0.0])).unwrap();
        assert!((right[3] - 0.1).abs() < 1e-15);

        let vortex = Benchmark::IsentropicVortex(VortexParams::default());
        let far = m.primitive(&vortex.initial_condition([40.0, 0.0])).unwrap();
        assert!((far[0] - 1.0).abs() < 1e-12 && (far[3] - 1.0).abs() < 1e-12);
        assert!(far[1].abs() < 1e-12 && far[2].abs() < 1e-12);
        let center = vortex.initial_condition([0.0, 0.0]);
        // delta T = (1 - gamma) / (8 gamma pi^2) beta^2 e, then the power law
        let dt = -0.4 / (8.0 * 1.4 * std::f64::consts::PI.powi(2)) * 25.0 * 1f64.exp();
        assert!((center[0] - (1.0 + dt).powf(2.5)).abs() < 1e-14);
        assert!((center[0] - 0.4938).abs() < 1e-4);
    }
}
