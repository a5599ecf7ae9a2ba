//! Fixtures shared by the operator benchmarks.

use dgfilter::models::ModelKind;
use dgfilter::runner::{boundary_rule, initial_mesh};
use dgfilter::{
    AdvectionModel, Benchmark, Discretization, EulerModel, NodalField, QuadMesh, RunConfig,
};

/// A discretization together with its mesh and initial state.
pub struct Fixture<M: dgfilter::PdeModel> {
    pub disc: Discretization<M>,
    pub mesh: QuadMesh,
    pub field: NodalField,
}

fn parts(bench: Benchmark, n: usize, degree: usize) -> (RunConfig, QuadMesh) {
    let cfg = RunConfig::new(bench, n, n, degree);
    let mesh = initial_mesh(&cfg).expect("benchmark mesh");
    (cfg, mesh)
}

/// Solid-body rotation on an `n x n` grid.
pub fn advection(n: usize, degree: usize) -> Fixture<AdvectionModel> {
    let bench = Benchmark::SolidBodyRotation;
    let (_, mesh) = parts(bench, n, degree);
    let ModelKind::Advection(model) = bench.model() else {
        unreachable!("solid-body rotation is scalar")
    };
    let disc = Discretization::new(model, degree, boundary_rule(&bench)).expect("discretization");
    let field = NodalField::interpolate(&mesh, disc.basis(), 1, |x| bench.initial_condition(x));
    Fixture { disc, mesh, field }
}

/// Two-dimensional explosion on an `n x n` grid.
pub fn euler(n: usize, degree: usize) -> Fixture<EulerModel> {
    let bench = Benchmark::Explosion;
    let (_, mesh) = parts(bench, n, degree);
    let ModelKind::Euler(model) = bench.model() else {
        unreachable!("explosion is Euler")
    };
    let disc = Discretization::new(model, degree, boundary_rule(&bench)).expect("discretization");
    let field = NodalField::interpolate(&mesh, disc.basis(), 4, |x| bench.initial_condition(x));
    Fixture { disc, mesh, field }
}
