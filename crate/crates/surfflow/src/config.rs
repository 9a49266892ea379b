//! JSON run configuration.
//!
//! A document has six optional top-level sections, each with every field
//! optional:
//!
//! ```json
//! {
//!   "surface":   { "kind": "sphere", "radius": 1.0, "subdivision": 3 },
//!   "evolution": { "law": "oscillating", "amplitude": 0.5, "frequency": 6.0,
//!                  "project_compatible": true },
//!   "initial":   { "phase": { "kind": "random", "mean": 0.0, "amplitude": 0.05,
//!                             "seed": 0, "smoothing_passes": 5 },
//!                  "velocity": { "kind": "rotation", "omega": [0.0, 0.0, 1.0] } },
//!   "material":  { "theta": 0.8, "theta0": 1.6, "rho1": 1.0, "rho2": 3.0,
//!                  "nu1": 1.0, "nu2": 2.0, "mobility": 1.0, "eps_guard": 1e-9 },
//!   "stepping":  { "dt": 1e-3, "t_end": 0.1, "penalty_weight": null,
//!                  "stabilization": 0.1 },
//!   "output":    { "snapshot_every": 0, "obj": true,
//!                  "svg_columns": ["E_tot", "E_kin", "dissipation"] }
//! }
//! ```
//!
//! Unknown keys are rejected. Errors name the JSON path of the offending
//! value.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use surfflow_core::material::MaterialParams;
use surfflow_core::mesh::NormalVelocityLaw;
use surfflow_core::navier_stokes::DEFAULT_STABILIZATION;
use surfflow_core::sim::{InitialPhase, InitialVelocity, LedgerRecord, ScenarioConfig};
use surfflow_core::Vec3;

use crate::error::{IoError, IoResult};

/// Largest accepted subdivision level; level 7 already has 163842 vertices.
pub const MAX_SUBDIVISION: u32 = 7;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub surface: SurfaceSpec,
    pub evolution: EvolutionSpec,
    pub initial: InitialSpec,
    pub material: MaterialSpec,
    pub stepping: SteppingSpec,
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    #[default]
    Sphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    pub radius: f64,
    pub subdivision: u32,
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self { kind: SurfaceKind::Sphere, radius: 1.0, subdivision: 3 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    #[default]
    Stationary,
    /// `v_n = a z`
    Linear,
    /// `v_n = a cos(omega t) z`
    Oscillating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSpec {
    pub law: LawKind,
    pub amplitude: f64,
    pub frequency: f64,
    pub project_compatible: bool,
}

impl Default for EvolutionSpec {
    fn default() -> Self {
        Self { law: LawKind::Stationary, amplitude: 0.0, frequency: 0.0, project_compatible: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub phase: PhaseSpec,
    pub velocity: VelocitySpec,
}

fn default_noise() -> f64 {
    0.05
}

fn default_passes() -> u32 {
    5
}

fn default_degree() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhaseSpec {
    Constant {
        #[serde(default)]
        value: f64,
    },
    Harmonic {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        #[serde(default = "default_degree")]
        degree: u32,
    },
    Random {
        #[serde(default)]
        mean: f64,
        #[serde(default = "default_noise")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_passes")]
        smoothing_passes: u32,
    },
}

impl Default for PhaseSpec {
    fn default() -> Self {
        PhaseSpec::Random { mean: 0.0, amplitude: default_noise(), seed: 0, smoothing_passes: default_passes() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum VelocitySpec {
    #[default]
    Zero,
    Rotation {
        omega: [f64; 3],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSpec {
    pub theta: f64,
    pub theta0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub mobility: f64,
    pub eps_guard: f64,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        Self::from(&MaterialParams::default())
    }
}

impl From<&MaterialParams> for MaterialSpec {
    fn from(p: &MaterialParams) -> Self {
        Self {
            theta: p.theta,
            theta0: p.theta0,
            rho1: p.rho1_tilde,
            rho2: p.rho2_tilde,
            nu1: p.nu1,
            nu2: p.nu2,
            mobility: p.mobility,
            eps_guard: p.eps_guard,
        }
    }
}

impl From<&MaterialSpec> for MaterialParams {
    fn from(m: &MaterialSpec) -> Self {
        Self {
            theta: m.theta,
            theta0: m.theta0,
            rho1_tilde: m.rho1,
            rho2_tilde: m.rho2,
            nu1: m.nu1,
            nu2: m.nu2,
            mobility: m.mobility,
            eps_guard: m.eps_guard,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteppingSpec {
    pub dt: f64,
    pub t_end: f64,
    /// `null` selects `1e4 nu_min / h_mean`.
    pub penalty_weight: Option<f64>,
    pub stabilization: f64,
}

impl Default for SteppingSpec {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 0.1, penalty_weight: None, stabilization: DEFAULT_STABILIZATION }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Write an OBJ snapshot every this many steps; 0 keeps only the first
    /// and last.
    pub snapshot_every: usize,
    pub obj: bool,
    pub svg_columns: Vec<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { snapshot_every: 0, obj: true, svg_columns: vec!["E_tot".into(), "E_kin".into(), "dissipation".into()] }
    }
}

/// A validated run: the scenario for the core plus output controls.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub output: OutputSpec,
}

/// Parses and validates a document.
pub fn parse_config(text: &str) -> IoResult<RunConfig> {
    RunConfig::from_document(&parse_document(text)?)
}

/// Parses a document without validating it.
pub fn parse_document(text: &str) -> IoResult<ConfigDocument> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            IoError::Syntax { line: inner.line(), column: inner.column(), message: inner.to_string() }
        } else {
            IoError::config(path, strip_position(&inner))
        }
    })?;
    de.end().map_err(|e| IoError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })?;
    Ok(doc)
}

/// Parses a document from a JSON value, as produced by [`set_path`].
pub fn document_from_value(value: Value) -> IoResult<ConfigDocument> {
    serde_path_to_error::deserialize(value)
        .map_err(|e| IoError::config(e.path().to_string(), e.into_inner().to_string()))
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(k) => s[..k].to_string(),
        None => s,
    }
}

/// Normalized pretty-printed form with every default spelled out.
/// `parse_config(&print_config(&c)) == c` for every valid `c`.
pub fn print_config(config: &RunConfig) -> String {
    serde_json::to_string_pretty(&config.to_document()).expect("config documents always serialize")
}

/// Assigns `value` at the dotted `path` (`material.theta`,
/// `initial.phase.seed`), creating intermediate objects.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> IoResult<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(IoError::config(path, "empty path segment"));
    }
    let mut cur = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = cur.as_object_mut().ok_or_else(|| IoError::config(path, format!("{key} is not inside an object")))?;
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cur.as_object_mut().ok_or_else(|| IoError::config(path, "parent is not an object"))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Converts and validates; errors carry the JSON path.
    pub fn from_document(doc: &ConfigDocument) -> IoResult<Self> {
        let s = &doc.surface;
        if s.subdivision > MAX_SUBDIVISION {
            return Err(IoError::config(
                "surface.subdivision",
                format!("must be at most {MAX_SUBDIVISION}, got {}", s.subdivision),
            ));
        }
        positive("surface.radius", s.radius)?;

        let e = &doc.evolution;
        let law = match e.law {
            LawKind::Stationary => NormalVelocityLaw::Stationary,
            LawKind::Linear => NormalVelocityLaw::Linear { amplitude: e.amplitude },
            LawKind::Oscillating => NormalVelocityLaw::Oscillating { amplitude: e.amplitude, frequency: e.frequency },
        };
        if !e.amplitude.is_finite() {
            return Err(IoError::config("evolution.amplitude", "must be finite"));
        }
        if !e.frequency.is_finite() {
            return Err(IoError::config("evolution.frequency", "must be finite"));
        }

        let material = MaterialParams::from(&doc.material);
        material.validate_solver_bounds().map_err(|err| IoError::config("material", err.to_string()))?;
        material.validate().map_err(|err| IoError::config("material.theta", err.to_string()))?;

        let initial_phase = match doc.initial.phase {
            PhaseSpec::Constant { value } => {
                mean_below_one("initial.phase.value", value)?;
                InitialPhase::Constant { value }
            }
            PhaseSpec::Harmonic { mean, amplitude, degree } => {
                mean_below_one("initial.phase.mean", mean)?;
                finite("initial.phase.amplitude", amplitude)?;
                if !(1..=2).contains(&degree) {
                    return Err(IoError::config("initial.phase.degree", format!("must be 1 or 2, got {degree}")));
                }
                InitialPhase::Harmonic { mean, amplitude, degree }
            }
            PhaseSpec::Random { mean, amplitude, seed, smoothing_passes } => {
                mean_below_one("initial.phase.mean", mean)?;
                finite("initial.phase.amplitude", amplitude)?;
                InitialPhase::Random { mean, amplitude, seed, smoothing_passes }
            }
        };
        let initial_velocity = match doc.initial.velocity {
            VelocitySpec::Zero => InitialVelocity::Zero,
            VelocitySpec::Rotation { omega } => {
                if omega.iter().any(|w| !w.is_finite()) {
                    return Err(IoError::config("initial.velocity.omega", "must be finite"));
                }
                InitialVelocity::Rotation { omega: Vec3::new(omega[0], omega[1], omega[2]) }
            }
        };

        let st = &doc.stepping;
        positive("stepping.dt", st.dt)?;
        if !(st.t_end >= st.dt && st.t_end.is_finite()) {
            return Err(IoError::config(
                "stepping.t_end",
                format!("must be finite and at least dt = {}, got {}", st.dt, st.t_end),
            ));
        }
        if let Some(w) = st.penalty_weight {
            positive("stepping.penalty_weight", w)?;
        }
        positive("stepping.stabilization", st.stabilization)?;

        for (k, c) in doc.output.svg_columns.iter().enumerate() {
            if LedgerRecord::column_index(c).is_none() {
                return Err(IoError::config(
                    format!("output.svg_columns[{k}]"),
                    format!("unknown ledger column {c:?}"),
                ));
            }
        }

        let scenario = ScenarioConfig {
            radius: s.radius,
            subdivision: s.subdivision,
            law,
            project_compatible: e.project_compatible,
            initial_phase,
            initial_velocity,
            material,
            dt: st.dt,
            t_end: st.t_end,
            penalty_weight: st.penalty_weight,
            stabilization: st.stabilization,
        };
        // backstop for checks the core adds later
        scenario.validate().map_err(|err| IoError::config("$", err.to_string()))?;
        Ok(Self { scenario, output: doc.output.clone() })
    }

    /// The fully spelled-out document of this config.
    pub fn to_document(&self) -> ConfigDocument {
        let c = &self.scenario;
        let (law, amplitude, frequency) = match c.law {
            NormalVelocityLaw::Stationary => (LawKind::Stationary, 0.0, 0.0),
            NormalVelocityLaw::Linear { amplitude } => (LawKind::Linear, amplitude, 0.0),
            NormalVelocityLaw::Oscillating { amplitude, frequency } => (LawKind::Oscillating, amplitude, frequency),
        };
        let phase = match c.initial_phase {
            InitialPhase::Constant { value } => PhaseSpec::Constant { value },
            InitialPhase::Harmonic { mean, amplitude, degree } => PhaseSpec::Harmonic { mean, amplitude, degree },
            InitialPhase::Random { mean, amplitude, seed, smoothing_passes } => {
                PhaseSpec::Random { mean, amplitude, seed, smoothing_passes }
            }
        };
        let velocity = match c.initial_velocity {
            InitialVelocity::Zero => VelocitySpec::Zero,
            InitialVelocity::Rotation { omega } => VelocitySpec::Rotation { omega: [omega.x(), omega.y(), omega.z()] },
        };
        ConfigDocument {
            surface: SurfaceSpec { kind: SurfaceKind::Sphere, radius: c.radius, subdivision: c.subdivision },
            evolution: EvolutionSpec { law, amplitude, frequency, project_compatible: c.project_compatible },
            initial: InitialSpec { phase, velocity },
            material: MaterialSpec::from(&c.material),
            stepping: SteppingSpec {
                dt: c.dt,
                t_end: c.t_end,
                penalty_weight: c.penalty_weight,
                stabilization: c.stabilization,
            },
            output: self.output.clone(),
        }
    }

    /// Replaces the seed of a random initial phase; `false` if the initial
    /// phase is not random.
    pub fn set_seed(&mut self, seed: u64) -> bool {
        match &mut self.scenario.initial_phase {
            InitialPhase::Random { seed: s, .. } => {
                *s = seed;
                true
            }
            _ => false,
        }
    }
}

fn finite(path: &str, v: f64) -> IoResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(IoError::config(path, format!("must be finite, got {v}")))
    }
}

fn positive(path: &str, v: f64) -> IoResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(IoError::config(path, format!("must be positive and finite, got {v}")))
    }
}

fn mean_below_one(path: &str, m: f64) -> IoResult<()> {
    if m.abs() < 1.0 {
        Ok(())
    } else {
        Err(IoError::config(path, format!("the initial mean phase must satisfy |mean| < 1, got {m}")))
    }
}
