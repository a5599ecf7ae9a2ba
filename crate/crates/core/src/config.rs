//! Run configuration: a TOML file with one section per subsystem, `--set
//! section.key=value` overrides, and validation into a [`RunConfig`].
//!
//! ```toml
//! benchmark = "sod"            # solid_body_rotation | isentropic_vortex | sod
//!                              # | explosion | riemann2d | custom
//! [mesh]
//! nx = 100
//! ny = 1
//! degree = 1
//!
//! [time]
//! scheme = "ssp2"              # ssp2 | ssp3; default by degree
//! dt = 5e-4                    # or: courant = 0.1
//! t_final = 0.2                # default from the benchmark
//!
//! [filter]
//! mode = "relative"            # none | low_order | absolute | relative
//! function = "f2"              # f1 | f2
//! beta = 0.3                   # scalar or one value per filter group
//! c0 = 5.0                     # absolute mode
//! floor = 1e-8
//!
//! [amr]
//! enabled = false
//! max_level = 2
//! refine = 0.2
//! coarsen = 0.05
//! interval = 5
//! initial_cycles = 3
//!
//! [output]
//! dir = "out/sod"
//! fields_at = [0.2]
//! format = "csv"               # csv | vtk | both | none
//!
//! [custom]                     # only for benchmark = "custom"
//! domain = [0.0, 1.0, 0.0, 1.0]
//! velocity = [1.0, 0.5]
//! profile = "sine"             # sine | square
//! t_final = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amr::AdaptPolicy;
use crate::error::{Error, Result};
use crate::filter::{FilterConfig, FilterFunction, FilterMode, DEFAULT_FLOOR};
use crate::mesh::Rect;
use crate::models::{Benchmark, BenchmarkKind, CustomAdvection, Profile, VortexParams};
use crate::time_stepper::{Blend, SchemeKind, StageScheme, StepMode};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub benchmark: Option<BenchmarkKind>,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub amr: AmrSection,
    #[serde(default)]
    pub output: OutputSection,
    pub custom: Option<CustomSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub scheme: Option<SchemeKind>,
    pub dt: Option<f64>,
    pub courant: Option<f64>,
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterModeName {
    None,
    LowOrder,
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub mode: Option<FilterModeName>,
    pub function: Option<FilterFunction>,
    pub beta: Option<BetaValue>,
    pub c0: Option<f64>,
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmrSection {
    pub enabled: Option<bool>,
    pub max_level: Option<u8>,
    pub refine: Option<f64>,
    pub coarsen: Option<f64>,
    pub interval: Option<usize>,
    pub initial_cycles: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Csv,
    Vtk,
    Both,
    None,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub fields_at: Option<Vec<f64>>,
    pub format: Option<FieldFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub domain: [f64; 4],
    pub velocity: [f64; 2],
    pub profile: Profile,
    pub t_final: f64,
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub benchmark: Benchmark,
    pub nx: usize,
    pub ny: usize,
    pub degree: usize,
    pub scheme: SchemeKind,
    pub step: StepMode,
    pub t_final: f64,
    pub blend: Blend,
    pub amr: Option<AdaptPolicy>,
    pub output_dir: Option<PathBuf>,
    pub fields_at: Vec<f64>,
    pub format: FieldFormat,
}

impl RunConfig {
    /// Defaults for `benchmark` on an `nx x ny` grid: SSP pairing by degree,
    /// Courant 0.1, no filter, no refinement, no output.
    pub fn new(benchmark: Benchmark, nx: usize, ny: usize, degree: usize) -> Self {
        Self {
            benchmark,
            nx,
            ny,
            degree,
            scheme: StageScheme::default_kind(degree),
            step: StepMode::Courant(0.1),
            t_final: benchmark.t_final(),
            blend: Blend::HighOnly,
            amr: None,
            output_dir: None,
            fields_at: Vec::new(),
            format: FieldFormat::Csv,
        }
    }

    pub fn with_blend(mut self, blend: Blend) -> Self {
        self.blend = blend;
        self
    }

    pub fn with_step(mut self, step: StepMode) -> Self {
        self.step = step;
        self
    }

    pub fn with_amr(mut self, amr: AdaptPolicy) -> Self {
        self.amr = Some(amr);
        self
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let file: ConfigFile = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::Config(format!("config: {e}")))?;
        Self::from_file(&file)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_file(f: &ConfigFile) -> Result<Self> {
        let bad = |m: String| Error::Config(m);
        let kind = f.benchmark.ok_or_else(|| bad("missing `benchmark`".into()))?;
        let benchmark = match kind {
            BenchmarkKind::SolidBodyRotation => Benchmark::SolidBodyRotation,
            BenchmarkKind::IsentropicVortex => Benchmark::IsentropicVortex(VortexParams::default()),
            BenchmarkKind::Sod => Benchmark::Sod,
            BenchmarkKind::Explosion => Benchmark::Explosion,
            BenchmarkKind::Riemann2d => Benchmark::Riemann2d,
            BenchmarkKind::Custom => {
                let c = f
                    .custom
                    .as_ref()
                    .ok_or_else(|| bad("benchmark `custom` needs a [custom] section".into()))?;
                let [x0, x1, y0, y1] = c.domain;
                if !(x1 > x0 && y1 > y0) {
                    return Err(bad(format!("custom.domain is degenerate: {:?}", c.domain)));
                }
                if !(c.t_final > 0.0) {
                    return Err(bad(format!("custom.t_final must be positive, got {}", c.t_final)));
                }
                Benchmark::Custom(CustomAdvection {
                    domain: Rect::new(x0, x1, y0, y1),
                    velocity: c.velocity,
                    profile: c.profile,
                    t_final: c.t_final,
                })
            }
        };
        if f.custom.is_some() && kind != BenchmarkKind::Custom {
            return Err(bad("[custom] is only valid with benchmark = \"custom\"".into()));
        }
        let nx = f.mesh.nx.ok_or_else(|| bad("missing mesh.nx".into()))?;
        let ny = f.mesh.ny.unwrap_or(if kind == BenchmarkKind::Sod { 1 } else { nx });
        if nx == 0 || ny == 0 {
            return Err(bad("mesh.nx and mesh.ny must be at least 1".into()));
        }
        let degree = f.mesh.degree.unwrap_or(1);
        if degree == 0 {
            return Err(bad("mesh.degree must be at least 1".into()));
        }
        let mut cfg = Self::new(benchmark, nx, ny, degree);
        if let Some(s) = f.time.scheme {
            cfg.scheme = s;
        }
        cfg.step = match (f.time.dt, f.time.courant) {
            (Some(_), Some(_)) => return Err(bad("set only one of time.dt and time.courant".into())),
            (Some(dt), None) => StepMode::FixedDt(dt),
            (None, Some(c)) => StepMode::Courant(c),
            (None, None) => StepMode::Courant(0.1),
        };
        if let Some(t) = f.time.t_final {
            cfg.t_final = t;
        }
        crate::time_stepper::StepController::new(cfg.step, cfg.t_final)?;

        let fs = &f.filter;
        cfg.blend = match fs.mode.unwrap_or(FilterModeName::None) {
            FilterModeName::None => Blend::HighOnly,
            FilterModeName::LowOrder => Blend::LowOnly,
            mode => {
                let function = fs.function.unwrap_or(FilterFunction::F1);
                let mode = if mode == FilterModeName::Absolute {
                    FilterMode::Absolute {
                        c0: fs.c0.ok_or_else(|| bad("absolute filter needs filter.c0".into()))?,
                    }
                } else {
                    let betas = match fs.beta.clone() {
                        Some(BetaValue::One(b)) => vec![b],
                        Some(BetaValue::Many(v)) => v,
                        None => return Err(bad("relative filter needs filter.beta".into())),
                    };
                    FilterMode::Relative { betas }
                };
                let fc = FilterConfig {
                    function,
                    mode,
                    floor: fs.floor.unwrap_or(DEFAULT_FLOOR),
                };
                fc.validate()?;
                if let FilterMode::Relative { betas } = &fc.mode {
                    let groups = if benchmark.is_euler() { 3 } else { 1 };
                    if betas.len() != 1 && betas.len() != groups {
                        return Err(bad(format!(
                            "filter.beta has {} entries, {kind:?} needs 1 or {groups}",
                            betas.len()
                        )));
                    }
                }
                Blend::Filter(fc)
            }
        };

        if f.amr.enabled.unwrap_or(false) {
            let d = AdaptPolicy::default();
            let a = &f.amr;
            let policy = AdaptPolicy {
                refine: a.refine.unwrap_or(d.refine),
                coarsen: a.coarsen.unwrap_or(d.coarsen),
                max_level: a.max_level.unwrap_or(d.max_level),
                interval: a.interval.unwrap_or(d.interval),
                initial_cycles: a.initial_cycles.unwrap_or(d.initial_cycles),
            };
            policy.validate()?;
            if benchmark.periodic().iter().any(|&p| p) {
                return Err(bad(format!("adaptive refinement is not supported on the periodic {kind:?} mesh")));
            }
            cfg.amr = Some(policy);
        }

        cfg.output_dir = f.output.dir.clone();
        cfg.format = f.output.format.unwrap_or(FieldFormat::Csv);
        cfg.fields_at = match &f.output.fields_at {
            Some(v) => v.clone(),
            None if cfg.output_dir.is_some() => vec![cfg.t_final],
            None => vec![],
        };
        if let Some(t) = cfg.fields_at.iter().find(|&&t| !(t >= 0.0 && t <= cfg.t_final)) {
            return Err(bad(format!("output.fields_at time {t} outside [0, {}]", cfg.t_final)));
        }
        Ok(cfg)
    }

    /// The fully resolved configuration in file form.
    pub fn to_file(&self) -> ConfigFile {
        let (dt, courant) = match self.step {
            StepMode::FixedDt(d) => (Some(d), None),
            StepMode::Courant(c) => (None, Some(c)),
        };
        let filter = match &self.blend {
            Blend::HighOnly => FilterSection {
                mode: Some(FilterModeName::None),
                ..Default::default()
            },
            Blend::LowOnly => FilterSection {
                mode: Some(FilterModeName::LowOrder),
                ..Default::default()
            },
            Blend::Filter(fc) => match &fc.mode {
                FilterMode::Absolute { c0 } => FilterSection {
                    mode: Some(FilterModeName::Absolute),
                    function: Some(fc.function),
                    c0: Some(*c0),
                    floor: Some(fc.floor),
                    beta: None,
                },
                FilterMode::Relative { betas } => FilterSection {
                    mode: Some(FilterModeName::Relative),
                    function: Some(fc.function),
                    beta: Some(BetaValue::Many(betas.clone())),
                    floor: Some(fc.floor),
                    c0: None,
                },
            },
        };
        let amr = match &self.amr {
            None => AmrSection {
                enabled: Some(false),
                ..Default::default()
            },
            Some(p) => AmrSection {
                enabled: Some(true),
                max_level: Some(p.max_level),
                refine: Some(p.refine),
                coarsen: Some(p.coarsen),
                interval: Some(p.interval),
                initial_cycles: Some(p.initial_cycles),
            },
        };
        let custom = match self.benchmark {
            Benchmark::Custom(c) => Some(CustomSection {
                domain: [c.domain.x_min, c.domain.x_max, c.domain.y_min, c.domain.y_max],
                velocity: c.velocity,
                profile: c.profile,
                t_final: c.t_final,
            }),
            _ => None,
        };
        ConfigFile {
            benchmark: Some(self.benchmark.kind()),
            mesh: MeshSection {
                nx: Some(self.nx),
                ny: Some(self.ny),
                degree: Some(self.degree),
            },
            time: TimeSection {
                scheme: Some(self.scheme),
                dt,
                courant,
                t_final: Some(self.t_final),
            },
            filter,
            amr,
            output: OutputSection {
                dir: self.output_dir.clone(),
                fields_at: Some(self.fields_at.clone()),
                format: Some(self.format),
            },
            custom,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serialises")
    }
}

/// Apply `section.key=value`; the value is read as a TOML value, falling back
/// to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::FilterMode;

    const SOD: &str = r#"
benchmark = "sod"
[mesh]
nx = 100
degree = 1
[time]
dt = 5e-4
[filter]
mode = "relative"
function = "f2"
beta = [0.3, 0.3, 0.3]
"#;

    #[test]
    fn parses_and_defaults() {
        let c = RunConfig::from_toml_str(SOD, &[]).unwrap();
        assert_eq!((c.nx, c.ny, c.degree), (100, 1, 1));
        assert_eq!(c.scheme, SchemeKind::Ssp2);
        assert_eq!(c.step, StepMode::FixedDt(5e-4));
        assert_eq!(c.t_final, 0.2);
        let Blend::Filter(fc) = &c.blend else { panic!() };
        assert_eq!(fc.function, FilterFunction::F2);
        assert_eq!(fc.mode, FilterMode::Relative { betas: vec![0.3; 3] });
        assert!(c.fields_at.is_empty());
    }

    #[test]
    fn overrides_apply() {
        let c = RunConfig::from_toml_str(
            SOD,
            &["filter.beta=1.4".into(), "mesh.degree=2".into(), "output.dir=out/x".into()],
        )
        .unwrap();
        assert_eq!(c.degree, 2);
        assert_eq!(c.scheme, SchemeKind::Ssp3);
        let Blend::Filter(fc) = &c.blend else { panic!() };
        assert_eq!(fc.mode, FilterMode::Relative { betas: vec![1.4] });
        assert_eq!(c.output_dir, Some(PathBuf::from("out/x")));
        assert_eq!(c.fields_at, vec![0.2]);
    }

    #[test]
    fn manifest_round_trips() {
        for extra in [vec![], vec!["amr.enabled=true".to_string(), "benchmark=\"explosion\"".into(), "mesh.ny=100".into()]] {
            let c = RunConfig::from_toml_str(SOD, &extra).unwrap();
            let again = RunConfig::from_toml_str(&c.to_toml(), &[]).unwrap();
            assert_eq!(c, again);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            "benchmark = \"sod\"\n[mesh]\nnx = 10\ncolour = 3\n",
            "benchmark = \"nope\"\n[mesh]\nnx = 10\n",
            "benchmark = \"sod\"\n",
            "benchmark = \"sod\"\n[mesh]\nnx = 10\n[time]\ndt = 0.1\ncourant = 0.1\n",
            "benchmark = \"sod\"\n[mesh]\nnx = 10\n[filter]\nmode = \"relative\"\n",
            "benchmark = \"sod\"\n[mesh]\nnx = 10\n[filter]\nmode = \"relative\"\nbeta = [1.0, 2.0]\n",
            "benchmark = \"isentropic_vortex\"\n[mesh]\nnx = 10\n[amr]\nenabled = true\n",
            "benchmark = \"custom\"\n[mesh]\nnx = 10\n",
            "benchmark = \"sod\"\n[mesh]\nnx = 10\ndegree = 0\n",
            "benchmark = \"sod\"\n[mesh\nnx = 10\n",
        ];
        for c in cases {
            assert!(matches!(RunConfig::from_toml_str(c, &[]), Err(Error::Config(_))), "{c}");
        }
        assert!(RunConfig::from_toml_str(SOD, &["nonsense".into()]).is_err());
    }

    #[test]
    fn custom_section() {
        let text = "benchmark = \"custom\"\n[mesh]\nnx = 8\n[custom]\ndomain = [0.0, 2.0, 0.0, 1.0]\nvelocity = [1.0, 0.0]\nprofile = \"square\"\nt_final = 2.0\n";
        let c = RunConfig::from_toml_str(text, &[]).unwrap();
        assert_eq!(c.t_final, 2.0);
        assert_eq!(c.ny, 8);
        assert!(matches!(c.benchmark, Benchmark::Custom(_)));
    }
}
