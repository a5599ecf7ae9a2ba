//! Exact solution of the 1D Euler Riemann problem for an ideal gas.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive1D {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Primitive1D {
    pub fn new(rho: f64, u: f64, p: f64) -> Self {
        Self { rho, u, p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Shock,
    Rarefaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannStarState {
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    pub left_wave: WaveKind,
    pub right_wave: WaveKind,
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRiemann {
    pub left: Primitive1D,
    pub right: Primitive1D,
    pub gamma: f64,
    pub star: RiemannStarState,
}

impl ExactRiemann {
    pub fn new(left: Primitive1D, right: Primitive1D, gamma: f64) -> Result<Self> {
        for s in [left, right] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(Error::InvalidInput(format!("non-physical Riemann state {s:?}")));
            }
        }
        let g = gamma;
        let cl = (g * left.p / left.rho).sqrt();
        let cr = (g * right.p / right.rho).sqrt();
        if 2.0 / (g - 1.0) * (cl + cr) <= right.u - left.u {
            return Err(Error::InvalidInput("Riemann data generate vacuum".into()));
        }
        // two-rarefaction guess
        let z = (g - 1.0) / (2.0 * g);
        let mut p = ((cl + cr - 0.5 * (g - 1.0) * (right.u - left.u))
            / (cl / left.p.powf(z) + cr / right.p.powf(z)))
        .powf(1.0 / z);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (fl, dl) = pressure_function(p, &left, g);
            let (fr, dr) = pressure_function(p, &right, g);
            let f = fl + fr + right.u - left.u;
            let next = (p - f / (dl + dr)).max(1e-14 * p);
            let change = 2.0 * (next - p).abs() / (next + p);
            p = next;
            if change < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RiemannNoConvergence(NEWTON_MAX_ITER));
        }
        let (fl, _) = pressure_function(p, &left, g);
        let (fr, _) = pressure_function(p, &right, g);
        let u = 0.5 * (left.u + right.u) + 0.5 * (fr - fl);
        let star_rho = |s: &Primitive1D| {
            if p > s.p {
                let r = p / s.p;
                let q = (g - 1.0) / (g + 1.0);
                s.rho * (r + q) / (q * r + 1.0)
            } else {
                s.rho * (p / s.p).powf(1.0 / g)
            }
        };
        let kind = |s: &Primitive1D| if p > s.p { WaveKind::Shock } else { WaveKind::Rarefaction };
        Ok(Self {
            left,
            right,
            gamma,
            star: RiemannStarState {
                p_star: p,
                u_star: u,
                rho_star_left: star_rho(&left),
                rho_star_right: star_rho(&right),
                left_wave: kind(&left),
                right_wave: kind(&right),
            },
        })
    }

    /// Sod's shock tube: `(1, 0, 1)` against `(0.125, 0, 0.1)`, `gamma = 1.4`.
    pub fn sod() -> Self {
        Self::new(
            Primitive1D::new(1.0, 0.0, 1.0),
            Primitive1D::new(0.125, 0.0, 0.1),
            1.4,
        )
        .expect("Sod data are admissible")
    }

    /// Speed of the right shock (only meaningful if the right wave is one).
    pub fn right_shock_speed(&self) -> f64 {
        let g = self.gamma;
        let r = self.right;
        let c = (g * r.p / r.rho).sqrt();
        r.u + c * ((g + 1.0) / (2.0 * g) * self.star.p_star / r.p + (g - 1.0) / (2.0 * g)).sqrt()
    }

    /// Solution on the ray `x / t = s`.
    pub fn sample(&self, s: f64) -> Primitive1D {
        let g = self.gamma;
        let st = &self.star;
        if s <= st.u_star {
            let l = self.left;
            let c = (g * l.p / l.rho).sqrt();
            match st.left_wave {
                WaveKind::Shock => {
                    let speed = l.u
                        - c * ((g + 1.0) / (2.0 * g) * st.p_star / l.p + (g - 1.0) / (2.0 * g))
                            .sqrt();
                    if s <= speed {
                        l
                    } else {
                        Primitive1D::new(st.rho_star_left, st.u_star, st.p_star)
                    }
                }
                WaveKind::Rarefaction => {
                    let head = l.u - c;
                    let c_star = c * (st.p_star / l.p).powf((g - 1.0) / (2.0 * g));
                    let tail = st.u_star - c_star;
                    if s <= head {
                        l
                    } else if s >= tail {
                        Primitive1D::new(st.rho_star_left, st.u_star, st.p_star)
                    } else {
                        let k = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (l.u - s);
                        Primitive1D::new(
                            l.rho * k.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * l.u + s),
                            l.p * k.powf(2.0 * g / (g - 1.0)),
                        )
                    }
                }
            }
        } else {
            let r = self.right;
            let c = (g * r.p / r.rho).sqrt();
            match st.right_wave {
                WaveKind::Shock => {
                    if s >= self.right_shock_speed() {
                        r
                    } else {
                        Primitive1D::new(st.rho_star_right, st.u_star, st.p_star)
                    }
                }
                WaveKind::Rarefaction => {
                    let head = r.u + c;
                    let c_star = c * (st.p_star / r.p).powf((g - 1.0) / (2.0 * g));
                    let tail = st.u_star + c_star;
                    if s >= head {
                        r
                    } else if s <= tail {
                        Primitive1D::new(st.rho_star_right, st.u_star, st.p_star)
                    } else {
                        let k = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c) * (r.u - s);
                        Primitive1D::new(
                            r.rho * k.powf(2.0 / (g - 1.0)),
                            2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * r.u + s),
                            r.p * k.powf(2.0 * g / (g - 1.0)),
                        )
                    }
                }
            }
        }
    }

    /// State at `x` (interface at `x0`) and time `t > 0`.
    pub fn at(&self, x: f64, x0: f64, t: f64) -> Result<Primitive1D> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("exact Riemann sample needs t > 0, got {t}")));
        }
        Ok(self.sample((x - x0) / t))
    }
}

/// Toro's `f_K(p)` and its derivative.
fn pressure_function(p: f64, s: &Primitive1D, g: f64) -> (f64, f64) {
    let c = (g * s.p / s.rho).sqrt();
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let r = p / s.p;
        let e = (g - 1.0) / (2.0 * g);
        (
            2.0 * c / (g - 1.0) * (r.powf(e) - 1.0),
            r.powf(-(g + 1.0) / (2.0 * g)) / (s.rho * c),
        )
    }
}

/// Exact Sod solution `(rho, u, p)` at `x` and `t > 0`, interface at 0.
pub fn sod_exact(x: f64, t: f64) -> Result<(f64, f64, f64)> {
    let s = ExactRiemann::sod().at(x, 0.0, t)?;
    Ok((s.rho, s.u, s.p))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Root of the pressure function by bisection, independent of Newton.
    fn bisect(r: &ExactRiemann) -> f64 {
        let f = |p: f64| {
            pressure_function(p, &r.left, r.gamma).0 + pressure_function(p, &r.right, r.gamma).0
                + r.right.u
                - r.left.u
        };
        let (mut lo, mut hi) = (1e-8, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn conserved(s: Primitive1D, g: f64) -> [f64; 3] {
        [s.rho, s.rho * s.u, s.p / (g - 1.0) + 0.5 * s.rho * s.u * s.u]
    }

    fn flux(s: Primitive1D, g: f64) -> [f64; 3] {
        let e = conserved(s, g)[2];
        [s.rho * s.u, s.rho * s.u * s.u + s.p, (e + s.p) * s.u]
    }

    #[test]
    fn sod_star_state() {
        let r = ExactRiemann::sod();
        assert!((r.star.p_star - 0.30313).abs() < 1e-4);
        assert!((r.star.u_star - 0.9275).abs() < 5e-4);
        assert!((r.star.p_star - bisect(&r)).abs() < 1e-12);
        assert_eq!(r.star.left_wave, WaveKind::Rarefaction);
        assert_eq!(r.star.right_wave, WaveKind::Shock);
        let (fl, _) = pressure_function(r.star.p_star, &r.left, 1.4);
        let (fr, _) = pressure_function(r.star.p_star, &r.right, 1.4);
        assert!((fl + fr).abs() < 1e-12);
    }

    #[test]
    fn shock_satisfies_jump_conditions() {
        let r = ExactRiemann::sod();
        let g = r.gamma;
        let star = Primitive1D::new(r.star.rho_star_right, r.star.u_star, r.star.p_star);
        let s = r.right_shock_speed();
        let (fs, fr) = (flux(star, g), flux(r.right, g));
        let (us, ur) = (conserved(star, g), conserved(r.right, g));
        for i in 0..3 {
            assert!((fs[i] - fr[i] - s * (us[i] - ur[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling() {
        assert_eq!(sod_exact(-0.45, 0.2).unwrap(), (1.0, 0.0, 1.0));
        assert_eq!(sod_exact(0.45, 0.2).unwrap(), (0.125, 0.0, 0.1));
        let (rho, u, p) = sod_exact(0.1, 0.2).unwrap();
        let r = ExactRiemann::sod();
        assert_eq!((rho, u, p), (r.star.rho_star_left, r.star.u_star, r.star.p_star));
        // the fan is continuous at its edges
        let g = 1.4f64;
        let head = -g.sqrt();
        let a = r.sample(head - 1e-12);
        let b = r.sample(head + 1e-12);
        assert!((a.rho - b.rho).abs() < 1e-9);
        assert!(sod_exact(0.0, 0.0).is_err());
    }

    #[test]
    fn symmetric_and_vacuum_cases() {
        let s = Primitive1D::new(1.0, 0.0, 1.0);
        let r = ExactRiemann::new(Primitive1D { u: 0.5, ..s }, Primitive1D { u: -0.5, ..s }, 1.4).unwrap();
        assert!(r.star.u_star.abs() < 1e-14);
        assert_eq!(r.star.left_wave, WaveKind::Shock);
        assert!((r.star.p_star - bisect(&r)).abs() < 1e-10);
        let v = ExactRiemann::new(Primitive1D { u: -20.0, ..s }, Primitive1D { u: 20.0, ..s }, 1.4);
        assert!(v.is_err());
    }
}
