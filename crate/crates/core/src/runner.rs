//! Benchmark driver: builds the mesh, model and operators from a
//! [`RunConfig`], advances to the final time and compares with the reference.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::amr::{adapt, adapt_initial, Transfer};
use crate::basis::TensorBasis2D;
use crate::config::{FieldFormat, RunConfig};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::high_order::BoundaryRule;
use crate::mesh::QuadMesh;
use crate::models::{Benchmark, BenchmarkKind, ModelKind, PdeModel, Point};
use crate::output::{write_field_csv, write_field_vtk, write_history, HistoryRow};
use crate::reference::{error_norms, sod_exact, vortex_exact, ErrorReport, MassBaseline, RadialReference};
use crate::time_stepper::{filtered_step, StageScheme, StepController};

/// Summary of one run, also written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub benchmark: BenchmarkKind,
    pub degree: usize,
    pub nx: usize,
    pub ny: usize,
    /// Leaves at the final time.
    pub n_cells: usize,
    pub steps: usize,
    pub t_final: f64,
    /// Error of the first variable against the reference, when one exists.
    pub error: Option<ErrorReport>,
    /// Nodal extrema of the first variable over all steps.
    pub run_min: f64,
    pub run_max: f64,
    pub mass_drift: f64,
    pub wall_seconds: f64,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn empty() -> Self {
        Self {
            benchmark: BenchmarkKind::Custom,
            degree: 0,
            nx: 0,
            ny: 0,
            n_cells: 0,
            steps: 0,
            t_final: 0.0,
            error: None,
            run_min: 0.0,
            run_max: 0.0,
            mass_drift: 0.0,
            wall_seconds: 0.0,
            artifacts: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }
}

/// Final state of a run together with its report.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub mesh: QuadMesh,
    pub field: NodalField,
    pub history: Vec<HistoryRow>,
}

pub fn boundary_rule(benchmark: &Benchmark) -> BoundaryRule {
    match benchmark {
        Benchmark::SolidBodyRotation => BoundaryRule::InflowZero,
        Benchmark::IsentropicVortex(_) | Benchmark::Custom(_) => BoundaryRule::Periodic,
        Benchmark::Sod => BoundaryRule::InitialState(*benchmark),
        Benchmark::Explosion | Benchmark::Riemann2d => BoundaryRule::Transmissive,
    }
}

pub fn initial_mesh(cfg: &RunConfig) -> Result<QuadMesh> {
    let b = &cfg.benchmark;
    let mesh = QuadMesh::uniform(cfg.nx, cfg.ny, b.domain(cfg.nx, cfg.ny), b.periodic())?;
    Ok(mesh.with_max_level(cfg.amr.map_or(0, |p| p.max_level)))
}

/// Run one configuration, writing artifacts if an output directory is set.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.benchmark.model() {
        ModelKind::Advection(m) => run_with(cfg, m),
        ModelKind::Euler(m) => run_with(cfg, m),
    }
}

fn run_with<M: PdeModel>(cfg: &RunConfig, model: M) -> Result<RunOutput> {
    let clock = Instant::now();
    let bench = cfg.benchmark;
    let disc = Discretization::new(model, cfg.degree, boundary_rule(&bench))?;
    let basis = disc.basis().clone();
    let model = disc.model();
    let scheme = StageScheme::new(cfg.scheme);
    let ctrl = StepController::new(cfg.step, cfg.t_final)?;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut artifacts = Vec::new();

    let mesh0 = initial_mesh(cfg)?;
    let initial = |x: Point| bench.initial_condition(x);
    let (mut mesh, mut field) = match &cfg.amr {
        Some(policy) => adapt_initial(&mesh0, &basis, policy, model, &initial)?,
        None => {
            let f = NodalField::interpolate(&mesh0, &basis, model.n_vars(), initial);
            (mesh0, f)
        }
    };
    let transfer = cfg.amr.map(|_| Transfer::new(cfg.degree));
    let baseline = MassBaseline::of(&field, &mesh, &basis, 0);
    let (mut run_min, mut run_max) = field.extrema(0);

    let mut dumps: Vec<f64> = cfg.fields_at.clone();
    dumps.sort_by(f64::total_cmp);
    dumps.dedup();
    let mut dumps = dumps.into_iter().peekable();
    let tol = 1e-12 * cfg.t_final.max(1.0);

    let mut t = 0.0;
    let mut step = 0usize;
    let mut history = vec![HistoryRow {
        step: 0,
        t,
        dt: 0.0,
        n_cells: mesh.n_cells(),
        min: run_min,
        max: run_max,
        mass_drift: 0.0,
    }];
    loop {
        while let Some(&td) = dumps.peek() {
            if td > t + tol {
                break;
            }
            if let Some(dir) = &cfg.output_dir {
                artifacts.extend(dump_fields(dir, cfg.format, td, &mesh, &basis, &field, model.var_names())?);
            }
            dumps.next();
        }
        if let (Some(policy), Some(tr)) = (&cfg.amr, &transfer) {
            if step > 0 && step % policy.interval == 0 {
                let (m, f, _) = adapt(&mesh, &field, tr, policy, model)?;
                mesh = m;
                field = f;
            }
        }
        let Some(mut dt) = ctrl.next_dt(t, &field, model, &mesh, &basis)? else {
            break;
        };
        if let Some(&td) = dumps.peek() {
            if t + dt > td - tol {
                dt = td - t;
            }
        }
        field = filtered_step(&disc, &mesh, &field, t, dt, &scheme, &cfg.blend)?;
        t += dt;
        step += 1;
        check_state(&field, &mesh, model)?;
        let (lo, hi) = field.extrema(0);
        run_min = run_min.min(lo);
        run_max = run_max.max(hi);
        history.push(HistoryRow {
            step,
            t,
            dt,
            n_cells: mesh.n_cells(),
            min: lo,
            max: hi,
            mass_drift: baseline.drift(&field, &mesh, &basis, 0),
        });
    }

    let error = reference_error(&bench, &mesh, &basis, &field, t, &baseline)?;
    let mut report = RunReport {
        benchmark: bench.kind(),
        degree: cfg.degree,
        nx: cfg.nx,
        ny: cfg.ny,
        n_cells: mesh.n_cells(),
        steps: step,
        t_final: t,
        error,
        run_min,
        run_max,
        mass_drift: baseline.drift(&field, &mesh, &basis, 0),
        wall_seconds: clock.elapsed().as_secs_f64(),
        artifacts: Vec::new(),
    };
    if let Some(dir) = &cfg.output_dir {
        let manifest = dir.join("manifest.toml");
        std::fs::write(&manifest, cfg.to_toml()).map_err(|e| Error::io(&manifest, e))?;
        let hist = dir.join("history.csv");
        write_history(&hist, &history)?;
        if bench.kind() == BenchmarkKind::Explosion {
            let times: Vec<f64> = cfg.fields_at.iter().copied().filter(|&t| t > 0.0).collect();
            if !times.is_empty() {
                let path = dir.join("reference_radial.csv");
                RadialReference::explosion(&times)?.write_csv(&path)?;
                artifacts.push(path);
            }
        }
        let json = dir.join("report.json");
        artifacts.extend([manifest, hist, json.clone()]);
        report.artifacts = artifacts;
        let text = serde_json::to_string_pretty(&report).expect("report serialises");
        std::fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
    }
    Ok(RunOutput {
        report,
        mesh,
        field,
        history,
    })
}

fn dump_fields(
    dir: &Path,
    format: FieldFormat,
    t: f64,
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    names: &[&str],
) -> Result<Vec<PathBuf>> {
    let stem = format!("field_t{t:.6}");
    let mut out = Vec::new();
    if matches!(format, FieldFormat::Csv | FieldFormat::Both) {
        let p = dir.join(format!("{stem}.csv"));
        write_field_csv(&p, mesh, basis, field, names)?;
        out.push(p);
    }
    if matches!(format, FieldFormat::Vtk | FieldFormat::Both) {
        let p = dir.join(format!("{stem}.vtk"));
        write_field_vtk(&p, mesh, basis, field, names)?;
        out.push(p);
    }
    Ok(out)
}

fn check_state<M: PdeModel>(field: &NodalField, mesh: &QuadMesh, model: &M) -> Result<()> {
    for ci in 0..mesh.n_cells() {
        for i in 0..field.nodes_per_cell() {
            let s = field.node(ci, i);
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::State {
                    cell: ci,
                    detail: format!("non-finite value {s:?}"),
                });
            }
            model.check_admissible(&s).map_err(|e| e.in_cell(ci))?;
        }
    }
    Ok(())
}

/// Exact first variable of `bench` at `(x, t)`, where one is available.
pub fn exact_solution(bench: &Benchmark, t: f64) -> Result<Option<Box<dyn Fn(Point) -> f64>>> {
    Ok(match *bench {
        Benchmark::SolidBodyRotation => Some(Box::new(move |x: Point| {
            let (s, c) = t.sin_cos();
            let back = [c * x[0] + s * x[1], -s * x[0] + c * x[1]];
            Benchmark::SolidBodyRotation.initial_condition(back)[0]
        })),
        Benchmark::Custom(c) => Some(Box::new(move |x: Point| c.exact(x, t))),
        Benchmark::IsentropicVortex(p) => {
            let domain = bench.domain(1, 1);
            Some(Box::new(move |x: Point| vortex_exact(x, t, &p, &domain)[0]))
        }
        Benchmark::Sod if t > 0.0 => Some(Box::new(move |x: Point| {
            sod_exact(x[0], t).map(|s| s.0).unwrap_or(f64::NAN)
        })),
        Benchmark::Explosion if t > 0.0 => {
            let r = RadialReference::explosion(&[t])?;
            let r_max = r.setup().r_max;
            Some(Box::new(move |x: Point| {
                let rad = x[0].hypot(x[1]).min(r_max);
                r.sample(rad, t).map(|s| s[0]).unwrap_or(f64::NAN)
            }))
        }
        _ => None,
    })
}

fn reference_error(
    bench: &Benchmark,
    mesh: &QuadMesh,
    basis: &TensorBasis2D,
    field: &NodalField,
    t: f64,
    baseline: &MassBaseline,
) -> Result<Option<ErrorReport>> {
    match exact_solution(bench, t)? {
        Some(f) => Ok(Some(error_norms(mesh, basis, field, 0, &*f, Some(baseline))?)),
        None => Ok(None),
    }
}

/// Run `levels` successively doubled meshes; a fixed step is halved with
/// the mesh, output goes to `level_<i>` below the configured directory.
pub fn convergence(cfg: &RunConfig, levels: usize) -> Result<Vec<RunReport>> {
    if levels == 0 {
        return Err(Error::Config("convergence needs at least one level".into()));
    }
    let mut out = Vec::with_capacity(levels);
    for i in 0..levels {
        let f = 1usize << i;
        let mut c = cfg.clone();
        c.nx *= f;
        if cfg.benchmark.kind() != BenchmarkKind::Sod {
            c.ny *= f;
        }
        if let crate::time_stepper::StepMode::FixedDt(dt) = c.step {
            c.step = crate::time_stepper::StepMode::FixedDt(dt / f as f64);
        }
        c.output_dir = cfg.output_dir.as_ref().map(|d| d.join(format!("level_{i}")));
        out.push(run(&c)?.report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CustomAdvection, Profile};
    use crate::mesh::Rect;
    use crate::time_stepper::{Blend, StepMode};

    fn custom(n: usize) -> RunConfig {
        let b = Benchmark::Custom(CustomAdvection {
            domain: Rect::square(0.0, 1.0),
            velocity: [1.0, 0.5],
            profile: Profile::Sine,
            t_final: 0.25,
        });
        RunConfig::new(b, n, n, 2).with_step(StepMode::Courant(0.2))
    }

    #[test]
    fn smooth_custom_run_converges() {
        let a = run(&custom(4)).unwrap().report;
        let b = run(&custom(8)).unwrap().report;
        let (ea, eb) = (a.error.unwrap().l2_rel, b.error.unwrap().l2_rel);
        assert!(eb < ea / 5.0, "{ea} {eb}");
        assert!(b.mass_drift < 1e-12);
        assert!((b.t_final - 0.25).abs() < 1e-14);
    }

    #[test]
    fn writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = custom(4).with_blend(Blend::LowOnly);
        c.output_dir = Some(dir.path().to_path_buf());
        c.fields_at = vec![0.0, 0.1, 0.25];
        c.format = FieldFormat::Both;
        let out = run(&c).unwrap();
        for name in ["manifest.toml", "history.csv", "report.json", "field_t0.100000.csv", "field_t0.250000.vtk"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        assert!(out.history.iter().any(|h| (h.t - 0.1).abs() < 1e-14));
        let back = RunReport::load(&dir.path().join("report.json")).unwrap();
        assert_eq!(back, out.report);
        let again = RunConfig::load(&dir.path().join("manifest.toml"), &[]).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn solid_body_exact_rotates() {
        let f = exact_solution(&Benchmark::SolidBodyRotation, std::f64::consts::FRAC_PI_2).unwrap().unwrap();
        // the cylinder centred at (1/6, 1/6) moves to (-1/6, 1/6)
        assert_eq!(f([-1.0 / 6.0, 1.0 / 6.0]), 1.0);
        assert_eq!(f([1.0 / 6.0, 1.0 / 6.0]), 0.0);
        assert!(exact_solution(&Benchmark::Riemann2d, 0.1).unwrap().is_none());
    }
}
