//! Scenario files: a TOML schema, its validating loader and dotted-path overrides.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::baseline::QuasiStaticGains;
use super::plant::PlantOptions;
use super::trajectory::{make_circle, make_square, TrajectoryRef};
use crate::arm::ArmGeometry;
use crate::dynamics::DynamicsParams;
use crate::error::{Error, Result};
use crate::finder::{ConstraintBox, FinderConfig, Sphere};
use crate::linearize::DriftHold;
use crate::mpc::{BoundSteps, Initialization, MpcConfig};
use crate::opt::{QpSettings, SqpSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    RobustMpc,
    PenalizedMpc,
    SoftMpc,
    QuasiStatic,
}

impl ControllerKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "robust_mpc" => Ok(ControllerKind::RobustMpc),
            "penalized_mpc" => Ok(ControllerKind::PenalizedMpc),
            "soft_mpc" => Ok(ControllerKind::SoftMpc),
            "quasi_static" => Ok(ControllerKind::QuasiStatic),
            other => Err(Error::config(
                "controller",
                format!("unknown controller `{other}` (robust_mpc, penalized_mpc, soft_mpc, quasi_static)"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::RobustMpc => "robust_mpc",
            ControllerKind::PenalizedMpc => "penalized_mpc",
            ControllerKind::SoftMpc => "soft_mpc",
            ControllerKind::QuasiStatic => "quasi_static",
        }
    }
}

/// Where the arm starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Straight, at rest, zero pressure.
    #[default]
    Rest,
    /// At rest on the first reference sample, held by the static pressure.
    Reference,
}

/// A scalar applied to every entry, or one value per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Each(Vec<f64>),
}

impl Values {
    fn vector(&self, path: &str, len: usize) -> Result<DVector<f64>> {
        match self {
            Values::One(v) => Ok(DVector::from_element(len, *v)),
            Values::Each(v) if v.len() == len => Ok(DVector::from_vec(v.clone())),
            Values::Each(v) => Err(Error::config(path, format!("expected {len} entries, found {}", v.len()))),
        }
    }

    fn diagonal(&self, path: &str, len: usize) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_diagonal(&self.vector(path, len)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmSection {
    pub segments: usize,
    pub pcc_per_segment: usize,
    pub rest_length: Values,
    pub segment_mass: Values,
    pub connector_mass: Values,
    pub connector_length: Values,
    pub radius: f64,
    /// Chamber positions around the axis, degrees, shared by all segments.
    pub chamber_angles_deg: [f64; 3],
    pub gravity: f64,
    pub stiffness: f64,
    pub damping: f64,
    /// Torque per unit pseudo-pressure, N·m/kPa, per segment.
    pub moment_arm: Values,
}

impl Default for ArmSection {
    fn default() -> Self {
        ArmSection {
            segments: 2,
            pcc_per_segment: 1,
            rest_length: Values::One(0.125),
            segment_mass: Values::One(0.1),
            connector_mass: Values::One(0.02),
            connector_length: Values::One(0.02),
            radius: 0.015,
            chamber_angles_deg: [0.0, 120.0, 240.0],
            gravity: 9.81,
            stiffness: 0.5,
            damping: 0.05,
            moment_arm: Values::One(0.004),
        }
    }
}

impl ArmSection {
    pub fn geometry(&self) -> Result<ArmGeometry> {
        let n = self.segments;
        if n == 0 {
            return Err(Error::config("arm.segments", "must be at least 1"));
        }
        let list = |v: &Values, path: &str| v.vector(path, n).map(|d| d.as_slice().to_vec());
        let angles = self.chamber_angles_deg.map(f64::to_radians);
        let geom = ArmGeometry {
            n_segments: n,
            pcc_per_segment: self.pcc_per_segment,
            segment_rest_length: list(&self.rest_length, "arm.rest_length")?,
            connector_offset: list(&self.connector_length, "arm.connector_length")?
                .into_iter()
                .map(|l| Vector3::new(0.0, 0.0, l))
                .collect(),
            chamber_angles: vec![angles; n],
            segment_mass: list(&self.segment_mass, "arm.segment_mass")?,
            connector_mass: list(&self.connector_mass, "arm.connector_mass")?,
            segment_radius: self.radius,
            gravity: Vector3::new(0.0, 0.0, -self.gravity),
            ..ArmGeometry::default()
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn params(&self, geom: &ArmGeometry) -> Result<DynamicsParams> {
        if !(self.stiffness > 0.0) {
            return Err(Error::config("arm.stiffness", "must be positive"));
        }
        if !(self.damping >= 0.0) {
            return Err(Error::config("arm.damping", "must be non-negative"));
        }
        let arm = self.moment_arm.vector("arm.moment_arm", geom.n_segments)?;
        if arm.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::config("arm.moment_arm", "must be positive"));
        }
        Ok(DynamicsParams::new(geom, self.stiffness, self.damping, arm.as_slice()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpcSection {
    pub horizon: usize,
    pub q_track: Values,
    pub q_terminal: Values,
    pub s_velocity: Values,
    pub r_input: Values,
    pub r_delta: Values,
    pub p_min: Values,
    pub p_max: Values,
    pub slew: Values,
    pub tube_clamp: Values,
    pub initial_q_offset: Values,
    pub initial_qd_offset: Values,
    pub bound_steps: String,
    pub initialization: String,
    pub drift: String,
    pub dare_q: Values,
    pub dare_r: Values,
    pub dare_cache_tol: Option<f64>,
    pub qp_tol: f64,
    pub qp_max_iter: usize,
    pub sqp_max_outer: usize,
    pub sqp_tol: f64,
    pub penalty_gain: f64,
    pub penalty_decay: f64,
    pub soft_weight: f64,
}

impl Default for MpcSection {
    fn default() -> Self {
        let d = MpcConfig::new(1, 1);
        MpcSection {
            horizon: d.horizon,
            q_track: Values::One(d.q_track[(0, 0)]),
            q_terminal: Values::One(d.q_terminal[(0, 0)]),
            s_velocity: Values::One(d.s_velocity[(0, 0)]),
            r_input: Values::One(d.r_input[(0, 0)]),
            r_delta: Values::One(d.r_delta[(0, 0)]),
            p_min: Values::One(d.p_min[0]),
            p_max: Values::One(d.p_max[0]),
            slew: Values::One(d.slew[0]),
            tube_clamp: Values::One(d.tube_clamp[0]),
            initial_q_offset: Values::One(d.initial_q_offset[0]),
            initial_qd_offset: Values::One(d.initial_qd_offset[0]),
            bound_steps: "ceil".into(),
            initialization: "warm".into(),
            drift: "euler".into(),
            dare_q: Values::One(d.dare_q[(0, 0)]),
            dare_r: Values::One(d.dare_r[(0, 0)]),
            dare_cache_tol: None,
            qp_tol: d.sqp.qp.tol_feas,
            qp_max_iter: d.sqp.qp.max_iter,
            sqp_max_outer: d.sqp.max_outer,
            sqp_tol: d.sqp.tol,
            penalty_gain: 200.0,
            penalty_decay: 1000.0,
            soft_weight: 1e4,
        }
    }
}

impl MpcSection {
    pub fn config(&self, q_size: usize, n_inputs: usize, ts: f64) -> Result<MpcConfig> {
        let (n, m) = (q_size, n_inputs);
        let m3 = |v: &Values, path: &str| -> Result<Matrix3<f64>> {
            let d = v.vector(path, 3)?;
            Ok(Matrix3::from_diagonal(&Vector3::new(d[0], d[1], d[2])))
        };
        let cfg = MpcConfig {
            horizon: self.horizon,
            ts,
            q_track: m3(&self.q_track, "mpc.q_track")?,
            q_terminal: m3(&self.q_terminal, "mpc.q_terminal")?,
            s_velocity: self.s_velocity.diagonal("mpc.s_velocity", n)?,
            r_input: self.r_input.diagonal("mpc.r_input", m)?,
            r_delta: self.r_delta.diagonal("mpc.r_delta", m)?,
            p_min: self.p_min.vector("mpc.p_min", m)?,
            p_max: self.p_max.vector("mpc.p_max", m)?,
            slew: self.slew.vector("mpc.slew", m)?,
            initial_q_offset: self.initial_q_offset.vector("mpc.initial_q_offset", n)?,
            initial_qd_offset: self.initial_qd_offset.vector("mpc.initial_qd_offset", n)?,
            tube_clamp: self.tube_clamp.vector("mpc.tube_clamp", m)?,
            obstacles: None,
            soft_set: None,
            bound_steps: match self.bound_steps.as_str() {
                "ceil" => BoundSteps::Ceil,
                "floor" => BoundSteps::Floor,
                _ => return Err(Error::config("mpc.bound_steps", "expected `ceil` or `floor`")),
            },
            initialization: match self.initialization.as_str() {
                "warm" => Initialization::Warm,
                "cold" => Initialization::Cold,
                _ => return Err(Error::config("mpc.initialization", "expected `warm` or `cold`")),
            },
            drift: match self.drift.as_str() {
                "euler" => DriftHold::Euler,
                "exact" => DriftHold::Exact,
                _ => return Err(Error::config("mpc.drift", "expected `euler` or `exact`")),
            },
            dare_q: self.dare_q.diagonal("mpc.dare_q", 2 * n)?,
            dare_r: self.dare_r.diagonal("mpc.dare_r", m)?,
            dare_cache_tol: self.dare_cache_tol,
            regularization: 1e-9,
            sqp: SqpSettings {
                max_outer: self.sqp_max_outer.max(1),
                tol: self.sqp_tol,
                qp: QpSettings { tol_feas: self.qp_tol, tol_stat: self.qp_tol, max_iter: self.qp_max_iter, ..QpSettings::default() },
                ..SqpSettings::default()
            },
        };
        if !(self.qp_tol > 0.0) || self.qp_max_iter == 0 {
            return Err(Error::config("mpc.qp_tol", "tolerance and iteration cap must be positive"));
        }
        if !(self.penalty_gain > 0.0 && self.penalty_decay > 0.0) {
            return Err(Error::config("mpc.penalty_gain", "penalty gain and decay must be positive"));
        }
        if !(self.soft_weight > 0.0) {
            return Err(Error::config("mpc.soft_weight", "must be positive"));
        }
        cfg.validate().map_err(|e| match e {
            Error::InvalidConfig { path, message } => Error::InvalidConfig { path: path.replacen("controller.", "mpc.", 1), message },
            other => other,
        })?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub gain: f64,
    pub damping: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        let d = QuasiStaticGains::default();
        BaselineSection { gain: d.gain, damping: d.damping }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySection {
    Circle {
        radius: f64,
        center: [f64; 3],
        period: f64,
        #[serde(default = "one")]
        turns: f64,
    },
    Square {
        side: f64,
        center: [f64; 2],
        height: f64,
        period: f64,
    },
    Fixed {
        point: [f64; 3],
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantSection {
    pub substeps: usize,
    /// Fractional model mismatch: masses scaled by `1 + p`, stiffness by `1 − p`.
    pub perturbation: f64,
    pub noise_std: f64,
    pub lag: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        let d = PlantOptions::default();
        PlantSection { substeps: d.substeps, perturbation: 0.0, noise_std: d.noise_std, lag: d.lag }
    }
}

fn default_rate() -> f64 {
    15.0
}

fn default_true() -> bool {
    true
}

fn default_transient() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    0.01
}

/// On-disk layout of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub duration: f64,
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub controller: ControllerKind,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "default_true")]
    pub log_solve_time: bool,
    /// Leading seconds excluded from tracking metrics.
    #[serde(default = "default_transient")]
    pub transient: f64,
    /// Required end-effector clearance beyond obstacle radii, meters.
    #[serde(default = "default_margin")]
    pub clearance_margin: f64,
    #[serde(default)]
    pub arm: ArmSection,
    #[serde(default)]
    pub mpc: MpcSection,
    #[serde(default)]
    pub baseline: BaselineSection,
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub plant: PlantSection,
    #[serde(default)]
    pub obstacles: Vec<Sphere>,
    pub finder: Option<FinderSection>,
    #[serde(rename = "box")]
    pub constraint_box: Option<ConstraintBox>,
}

/// Finder settings; obstacles default to the scenario's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinderSection {
    pub n_trials: usize,
    pub n_samples: usize,
    #[serde(default)]
    pub targets: Vec<[f64; 3]>,
    /// Sample this many targets along the scenario trajectory when `targets` is empty.
    #[serde(default)]
    pub trajectory_targets: usize,
    #[serde(default = "finder_neighborhood")]
    pub neighborhood: f64,
    #[serde(default = "finder_threshold")]
    pub threshold: f64,
    pub obstacles: Option<Vec<Sphere>>,
    #[serde(default)]
    pub seed: u64,
}

fn finder_neighborhood() -> f64 {
    0.02
}

fn finder_threshold() -> f64 {
    0.9
}

/// Validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub rate: f64,
    pub seed: u64,
    pub controller: ControllerKind,
    pub initial: InitialState,
    pub log_solve_time: bool,
    pub transient: f64,
    pub clearance_margin: f64,
    pub geometry: ArmGeometry,
    pub params: DynamicsParams,
    /// Controller settings without obstacles or soft set (attached per controller kind).
    pub mpc: MpcConfig,
    pub penalty: (f64, f64),
    pub soft_weight: f64,
    pub baseline: QuasiStaticGains,
    pub trajectory: TrajectoryRef,
    pub plant: PlantOptions,
    pub perturbation: f64,
    pub obstacles: Vec<Sphere>,
    pub finder: Option<FinderConfig>,
    pub constraint_box: Option<ConstraintBox>,
}

impl Scenario {
    pub fn ts(&self) -> f64 {
        1.0 / self.rate
    }

    /// Number of control steps, `⌊duration · rate⌋`.
    pub fn steps(&self) -> usize {
        (self.duration * self.rate + 1e-9).floor() as usize
    }

    pub fn set_rate(&mut self, rate: f64) -> Result<()> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::config("rate", "must be positive"));
        }
        self.rate = rate;
        self.mpc.ts = 1.0 / rate;
        Ok(())
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        if !(file.duration >= 0.0 && file.duration.is_finite()) {
            return Err(Error::config("duration", "must be non-negative"));
        }
        if !(file.rate > 0.0 && file.rate.is_finite()) {
            return Err(Error::config("rate", "must be positive"));
        }
        if !(file.transient >= 0.0) {
            return Err(Error::config("transient", "must be non-negative"));
        }
        let geometry = file.arm.geometry()?;
        let params = file.arm.params(&geometry)?;
        let mpc = file.mpc.config(geometry.q_size(), geometry.n_inputs(), 1.0 / file.rate)?;
        if !(file.baseline.gain > 0.0) || !(file.baseline.damping >= 0.0) {
            return Err(Error::config("baseline.gain", "gain must be positive and damping non-negative"));
        }
        let trajectory = build_trajectory(&file.trajectory)?;
        let p = &file.plant;
        if p.substeps == 0 {
            return Err(Error::config("plant.substeps", "must be at least 1"));
        }
        if !(p.perturbation.abs() < 1.0) {
            return Err(Error::config("plant.perturbation", "must lie in (-1, 1)"));
        }
        if !(p.noise_std >= 0.0) || !(p.lag >= 0.0) {
            return Err(Error::config("plant.noise_std", "noise and lag must be non-negative"));
        }
        check_obstacles(&file.obstacles)?;
        let finder = match &file.finder {
            Some(f) => Some(f.config(Some(&trajectory), file.duration, &file.obstacles)?),
            None => None,
        };
        if let Some(b) = &file.constraint_box {
            b.validate()?;
            if b.dim() != geometry.q_size() {
                return Err(Error::config("box", format!("expected {} coordinates", geometry.q_size())));
            }
        }
        if file.controller == ControllerKind::SoftMpc && file.constraint_box.is_none() && finder.is_none() {
            return Err(Error::config("controller", "soft_mpc needs a [box] or a [finder] table"));
        }
        if file.controller == ControllerKind::PenalizedMpc && file.obstacles.is_empty() {
            return Err(Error::config("controller", "penalized_mpc needs at least one [[obstacles]] entry"));
        }
        Ok(Scenario {
            name: file.name.clone(),
            duration: file.duration,
            rate: file.rate,
            seed: file.seed,
            controller: file.controller,
            initial: file.initial,
            log_solve_time: file.log_solve_time,
            transient: file.transient,
            clearance_margin: file.clearance_margin,
            geometry,
            params,
            mpc,
            penalty: (file.mpc.penalty_gain, file.mpc.penalty_decay),
            soft_weight: file.mpc.soft_weight,
            baseline: QuasiStaticGains { gain: file.baseline.gain, damping: file.baseline.damping },
            trajectory,
            plant: PlantOptions { substeps: p.substeps, lag: p.lag, noise_std: p.noise_std },
            perturbation: p.perturbation,
            obstacles: file.obstacles.clone(),
            finder,
            constraint_box: file.constraint_box.clone(),
        })
    }
}

fn build_trajectory(section: &TrajectorySection) -> Result<TrajectoryRef> {
    match section {
        TrajectorySection::Circle { radius, center, period, turns } => make_circle(*radius, Vector3::from(*center), *period, *turns),
        TrajectorySection::Square { side, center, height, period } => make_square(*side, *center, *height, *period),
        TrajectorySection::Fixed { point } => Ok(TrajectoryRef::Fixed(Vector3::from(*point))),
    }
    .map_err(|e| match e {
        Error::InvalidConfig { message, .. } => Error::config("trajectory", message),
        other => other,
    })
}

fn check_obstacles(obstacles: &[Sphere]) -> Result<()> {
    for (i, o) in obstacles.iter().enumerate() {
        if !(o.radius > 0.0) {
            return Err(Error::config(format!("obstacles[{i}].radius"), "must be positive"));
        }
    }
    Ok(())
}

impl FinderSection {
    /// Finder settings with targets resolved; `fallback_span` is used when the
    /// trajectory has no natural duration.
    pub fn config(&self, trajectory: Option<&TrajectoryRef>, fallback_span: f64, obstacles: &[Sphere]) -> Result<FinderConfig> {
        let mut targets = self.targets.clone();
        if targets.is_empty() && self.trajectory_targets > 0 {
            let traj = trajectory.ok_or_else(|| Error::config("finder.trajectory_targets", "needs a [trajectory] table"))?;
            let span = traj.duration().unwrap_or(fallback_span);
            let k = self.trajectory_targets;
            targets = (0..k).map(|i| traj.sample(span * i as f64 / k as f64).into()).collect();
        }
        let cfg = FinderConfig {
            n_trials: self.n_trials,
            n_samples: self.n_samples,
            targets,
            neighborhood: self.neighborhood,
            threshold: self.threshold,
            obstacles: self.obstacles.clone().unwrap_or_else(|| obstacles.to_vec()),
            seed: self.seed,
        };
        check_obstacles(&cfg.obstacles)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Input of an offline box search: arm, finder settings, obstacles and an
/// optional trajectory to draw targets from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinderFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub arm: ArmSection,
    pub finder: FinderSection,
    #[serde(default)]
    pub obstacles: Vec<Sphere>,
    pub trajectory: Option<TrajectorySection>,
}

/// Validated finder input.
#[derive(Debug, Clone)]
pub struct FinderJob {
    pub name: String,
    pub geometry: ArmGeometry,
    pub config: FinderConfig,
}

pub fn parse_finder_file(text: &str) -> Result<FinderJob> {
    let file: FinderFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let geometry = file.arm.geometry()?;
    check_obstacles(&file.obstacles)?;
    let trajectory = file.trajectory.as_ref().map(build_trajectory).transpose()?;
    let config = file.finder.config(trajectory.as_ref(), 0.0, &file.obstacles)?;
    Ok(FinderJob { name: file.name, geometry, config })
}

/// A box as a `[box]` table that can be pasted into a scenario file.
pub fn box_to_toml(b: &ConstraintBox) -> String {
    #[derive(Serialize)]
    struct Wrapper<'a> {
        #[serde(rename = "box")]
        b: &'a ConstraintBox,
    }
    toml::to_string(&Wrapper { b }).expect("box serializes")
}

/// Parses scenario text. Syntax and type errors carry line and column.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    Scenario::from_file(&parse_scenario_file(text)?)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Parses a value written as on the right-hand side of a TOML assignment;
/// bare words are taken as strings.
pub fn parse_override_value(text: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {text}")) {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

/// Sets `path` (dot separated, tables created as needed) in a TOML table.
pub fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(path, "empty path component"));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(path, format!("`{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses scenario text after applying `(path, value)` overrides.
pub fn parse_scenario_with_overrides(text: &str, overrides: &[(String, toml::Value)]) -> Result<Scenario> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    for (path, value) in overrides {
        set_path(&mut table, path, value.clone())?;
    }
    let file: ScenarioFile = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    Scenario::from_file(&file)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
duration = 2.0
[trajectory]
kind = "fixed"
point = [0.0, 0.0, -0.29]
"#;

    #[test]
    fn minimal_scenario_uses_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.rate, 15.0);
        assert_eq!(s.steps(), 30);
        assert_eq!(s.mpc.horizon, 7);
        assert_eq!(s.geometry.q_size(), 4);
        assert_eq!(s.controller, ControllerKind::RobustMpc);
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_scenario("duration = 2.0\n[trajectory\nkind = 1").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = parse_scenario(&format!("{MINIMAL}\n[plant]\nsubstep = 3\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("substep") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = parse_scenario(&format!("{MINIMAL}\n[mpc]\np_min = [0.0, 0.0, 0.0]\n")).unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { path, .. } if path == "mpc.p_min"), "{err}");
        let err = parse_scenario(&format!("{MINIMAL}\n[plant]\nsubsteps = 0\n")).unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { path, .. } if path == "plant.substeps"), "{err}");
        let err = parse_scenario("duration = 1.0\ncontroller = \"soft_mpc\"\n[trajectory]\nkind = \"fixed\"\npoint = [0.0, 0.0, -0.2]\n")
            .unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { path, .. } if path == "controller"), "{err}");
    }

    #[test]
    fn overrides_reach_nested_tables() {
        let o = vec![
            ("mpc.horizon".to_string(), parse_override_value("9")),
            ("plant.noise_std".to_string(), parse_override_value("1e-3")),
            ("controller".to_string(), parse_override_value("quasi_static")),
        ];
        let s = parse_scenario_with_overrides(MINIMAL, &o).unwrap();
        assert_eq!(s.mpc.horizon, 9);
        assert_eq!(s.plant.noise_std, 1e-3);
        assert_eq!(s.controller, ControllerKind::QuasiStatic);
        assert!(parse_scenario_with_overrides(MINIMAL, &[("duration.x".into(), parse_override_value("1"))]).is_err());
    }
}
