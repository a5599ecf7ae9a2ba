//! Nodewise blending of the high- and low-order stage results.
//!
//! Both filter functions are odd, equal the identity on `[-1, 1]` and have
//! compact support, so the blend `uM + d F((uH - uM) / d)` returns `uH`
//! wherever the two operators agree to within the threshold `d` and falls
//! back towards `uM` elsewhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::QuadMesh;
use crate::models::PdeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterFunction {
    /// Identity on `[-1, 1]`, zero outside.
    F1,
    /// Tent: identity on `[-1, 1]`, linear back to zero at `|x| = 2`.
    F2,
}

impl FilterFunction {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            FilterFunction::F1 => filter_f1(x),
            FilterFunction::F2 => filter_f2(x),
        }
    }
}

#[inline]
pub fn filter_f1(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        x
    } else {
        0.0
    }
}

#[inline]
pub fn filter_f2(x: f64) -> f64 {
    let m = (1.0 - (x.abs() - 1.0).abs()).max(0.0);
    if x < 0.0 {
        -m
    } else {
        m
    }
}

/// `uM + d F((uH - uM) / d)` for one value.
#[inline]
pub fn blend(f: FilterFunction, uh: f64, um: f64, d: f64) -> f64 {
    let diff = uh - um;
    let x = diff / d;
    if x.abs() <= 1.0 {
        // identity branch: return uH itself rather than a rounded reconstruction
        return uh;
    }
    um + d * f.eval(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FilterMode {
    /// Threshold `c0 h_K alpha dt`.
    Absolute { c0: f64 },
    /// Threshold `beta |uM|`; one beta per filter group of the model, or a
    /// single value shared by all groups.
    Relative { betas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub function: FilterFunction,
    pub mode: FilterMode,
    /// Relative mode: lower bound on `|uM|`, as a fraction of the variable's
    /// global maximum magnitude.
    pub floor: f64,
}

pub const DEFAULT_FLOOR: f64 = 1e-8;

impl FilterConfig {
    pub fn relative(function: FilterFunction, betas: Vec<f64>) -> Self {
        Self {
            function,
            mode: FilterMode::Relative { betas },
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn absolute(function: FilterFunction, c0: f64) -> Self {
        Self {
            function,
            mode: FilterMode::Absolute { c0 },
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.floor > 0.0) {
            return bad(format!("filter floor must be positive, got {}", self.floor));
        }
        match &self.mode {
            FilterMode::Absolute { c0 } if !(*c0 > 0.0) => {
                bad(format!("filter c0 must be positive, got {c0}"))
            }
            FilterMode::Relative { betas } if betas.is_empty() => bad("filter betas are empty".into()),
            FilterMode::Relative { betas } if betas.iter().any(|b| !(*b > 0.0)) => {
                bad(format!("filter betas must be positive, got {betas:?}"))
            }
            _ => Ok(()),
        }
    }

    /// Beta of every variable of `model` (relative mode).
    pub fn betas_for<M: PdeModel + ?Sized>(&self, model: &M) -> Result<Vec<f64>> {
        let FilterMode::Relative { betas } = &self.mode else {
            return Err(Error::Config("betas requested from an absolute filter".into()));
        };
        let groups = model.n_filter_groups();
        if betas.len() != 1 && betas.len() != groups {
            return Err(Error::Config(format!(
                "{} betas given, model has {groups} filter groups",
                betas.len()
            )));
        }
        Ok((0..model.n_vars())
            .map(|v| betas[if betas.len() == 1 { 0 } else { model.filter_group(v) }])
            .collect())
    }

    /// Filter `uh` against `um` in whichever mode is configured.
    pub fn apply<M: PdeModel + ?Sized>(
        &self,
        mesh: &QuadMesh,
        uh: &NodalField,
        um: &NodalField,
        alpha_dt: f64,
        model: &M,
    ) -> Result<NodalField> {
        match self.mode {
            FilterMode::Absolute { .. } => apply_absolute(mesh, uh, um, alpha_dt, self),
            FilterMode::Relative { .. } => apply_relative(uh, um, self, &self.betas_for(model)?),
        }
    }
}

/// Absolute filter with `eps = c0 h_K` on each cell.
pub fn apply_absolute(
    mesh: &QuadMesh,
    uh: &NodalField,
    um: &NodalField,
    alpha_dt: f64,
    cfg: &FilterConfig,
) -> Result<NodalField> {
    let FilterMode::Absolute { c0 } = cfg.mode else {
        return Err(Error::Config("absolute filter applied with a relative config".into()));
    };
    if !(alpha_dt > 0.0) {
        return Err(Error::InvalidStep(format!("alpha dt = {alpha_dt}")));
    }
    uh.check_congruent(um)?;
    uh.check_mesh(mesh)?;
    let mut out = uh.clone();
    let len = uh.nodes_per_cell() * uh.n_vars();
    for (ci, cell) in mesh.cells().iter().enumerate() {
        let d = c0 * cell.diameter() * alpha_dt;
        let range = ci * len..(ci + 1) * len;
        for (o, &m) in out.values_mut()[range.clone()].iter_mut().zip(&um.values()[range]) {
            *o = blend(cfg.function, *o, m, d);
        }
    }
    Ok(out)
}

/// Relative filter with one beta per variable.
pub fn apply_relative(
    uh: &NodalField,
    um: &NodalField,
    cfg: &FilterConfig,
    betas: &[f64],
) -> Result<NodalField> {
    uh.check_congruent(um)?;
    let nv = uh.n_vars();
    if betas.len() != nv {
        return Err(Error::Config(format!("{} betas for {nv} variables", betas.len())));
    }
    let mut out = uh.clone();
    for (var, &beta) in betas.iter().enumerate() {
        let scale = um
            .values()
            .iter()
            .skip(var)
            .step_by(nv)
            .fold(0.0f64, |a, b| a.max(b.abs()));
        let o = out.values_mut();
        if scale == 0.0 {
            for (o, m) in o.iter_mut().zip(um.values()).skip(var).step_by(nv) {
                *o = *m;
            }
            continue;
        }
        let floor = cfg.floor * scale;
        for (o, &m) in o.iter_mut().zip(um.values()).skip(var).step_by(nv) {
            let d = beta * m.abs().max(floor);
            *o = blend(cfg.function, *o, m, d);
        }
    }
    Ok(out)
}
