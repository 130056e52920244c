//! JSON scenario files and the batch commands behind the `wallstokes` binary.
//!
//! Every command parses and validates the whole file before computing.
//! Outputs are returned as a [`Report`]; the binary prints and writes them.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{self, FluidParams, Vec3};
use crate::liealg::{self, GridSpec, RankOptions};
use crate::planner::{self, PlannerOptions};
use crate::series;
use crate::sim::{self, fmt17, SimOptions, Stroke, Swimmer};
use crate::swimmer::{self, FieldOptions, FourSphereState, Order, SwimmerParams, ThreeSphereState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fields,
    Rankmap,
    Simulate,
    Plan,
    Verify,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fields" => Self::Fields,
            "rankmap" => Self::Rankmap,
            "simulate" => Self::Simulate,
            "plan" => Self::Plan,
            "verify" => Self::Verify,
            _ => return Err(Error::Argument(format!("unknown command `{s}`"))),
        })
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fields => "fields",
            Self::Rankmap => "rankmap",
            Self::Simulate => "simulate",
            Self::Plan => "plan",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwimmerKind {
    ThreeSphere,
    FourSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourStateConfig {
    pub xi: [f64; 4],
    pub c: [f64; 3],
    /// Orientation quaternion `[w, x, y, z]`; normalised on load.
    pub q: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Three(ThreeSphereState),
    Four(FourSphereState),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    #[serde(default)]
    pub order: Order,
    #[serde(default)]
    pub rotlet: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeConfig {
    pub times: Vec<f64>,
    pub shapes: Vec<Vec<f64>>,
    /// Integration step; defaults to the stroke duration over 4096.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Append the reversed stroke (a reciprocal stroke).
    #[serde(default)]
    pub out_and_back: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankConfig {
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_rank_tol")]
    pub tol: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_depth() -> usize {
    3
}

fn default_rank_tol() -> f64 {
    1e-6
}

fn default_step() -> f64 {
    1e-4
}

impl Default for RankConfig {
    fn default() -> Self {
        Self { depth: default_depth(), tol: default_rank_tol(), step: default_step() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    #[serde(default = "default_plan_tol")]
    pub tol: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_plan_dt")]
    pub dt: f64,
    #[serde(default = "default_trust")]
    pub trust_radius: f64,
}

fn default_plan_tol() -> f64 {
    1e-4
}

fn default_budget() -> usize {
    50
}

fn default_plan_dt() -> f64 {
    0.02
}

fn default_trust() -> f64 {
    1e-2
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { tol: default_plan_tol(), budget: default_budget(), dt: default_plan_dt(), trust_radius: default_trust() }
    }
}

pub const SUITES: [&str; 7] = ["wall_no_slip", "lorentz_drag", "reciprocity", "symmetry", "scallop", "holonomy", "rank"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Suites to run; all applicable suites when absent.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    1
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { suites: None, seed: default_seed() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    swimmer: SwimmerKind,
    params: ParamsConfig,
    wall: bool,
    state: serde_json::Value,
    #[serde(default)]
    fields: Option<FieldsConfig>,
    #[serde(default)]
    stroke: Option<StrokeConfig>,
    #[serde(default)]
    grid: Option<GridSpec>,
    #[serde(default)]
    rank: Option<RankConfig>,
    #[serde(default)]
    target: Option<ThreeSphereState>,
    #[serde(default)]
    planner: Option<PlannerConfig>,
    #[serde(default)]
    verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub swimmer: SwimmerKind,
    pub params: SwimmerParams,
    pub wall: bool,
    pub state: InitialState,
    pub fields: FieldsConfig,
    pub stroke: Option<StrokeConfig>,
    pub grid: Option<GridSpec>,
    pub rank: RankConfig,
    pub target: Option<ThreeSphereState>,
    pub planner: PlannerConfig,
    pub verify: VerifyConfig,
}

/// Parses a scenario file; syntax errors carry line and column.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
    let params = SwimmerParams::new(raw.params.a, raw.params.mu).map_err(|e| Error::Configuration(format!("params: {e}")))?;
    let state = match raw.swimmer {
        SwimmerKind::ThreeSphere => InitialState::Three(
            serde_json::from_value(raw.state).map_err(|e| Error::Configuration(format!("state: {e}")))?,
        ),
        SwimmerKind::FourSphere => {
            let s: FourStateConfig = serde_json::from_value(raw.state).map_err(|e| Error::Configuration(format!("state: {e}")))?;
            let q = Quaternion::new(s.q[0], s.q[1], s.q[2], s.q[3]);
            if !(q.norm() > 0.0) || !q.norm().is_finite() {
                return Err(Error::Configuration("state.q: quaternion must be finite and nonzero".into()));
            }
            InitialState::Four(FourSphereState::new(s.xi, Vec3::from(s.c), UnitQuaternion::from_quaternion(q)))
        }
    };
    Ok(ScenarioConfig {
        swimmer: raw.swimmer,
        params,
        wall: raw.wall,
        state,
        fields: raw.fields.unwrap_or_default(),
        stroke: raw.stroke,
        grid: raw.grid,
        rank: raw.rank.unwrap_or_default(),
        target: raw.target,
        planner: raw.planner.unwrap_or_default(),
        verify: raw.verify.unwrap_or_default(),
    })
}

pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Configuration(format!("{key}: {msg}"))
}

impl ScenarioConfig {
    pub fn field_options(&self) -> FieldOptions {
        FieldOptions { wall: self.wall, order: self.fields.order, rotlet: self.fields.rotlet }
    }

    pub fn rank_options(&self) -> RankOptions {
        RankOptions { depth: self.rank.depth, tol: self.rank.tol, step: self.rank.step, ..RankOptions::default() }
    }

    pub fn planner_options(&self) -> PlannerOptions {
        PlannerOptions {
            tol: self.planner.tol,
            budget: self.planner.budget,
            dt: self.planner.dt,
            trust_radius: self.planner.trust_radius,
            wall: self.wall,
            rank: RankOptions { depth: 3, ..self.rank_options() },
            ..PlannerOptions::default()
        }
    }

    fn three(&self, cmd: Command) -> Result<ThreeSphereState> {
        match self.state {
            InitialState::Three(s) => Ok(s),
            InitialState::Four(_) => Err(cfg_err("swimmer", format!("`{}` needs a three_sphere swimmer", cmd.name()))),
        }
    }

    pub fn stroke(&self) -> Result<Option<Stroke>> {
        let Some(c) = &self.stroke else { return Ok(None) };
        let s = Stroke::new(c.times.clone(), c.shapes.clone()).map_err(|e| cfg_err("stroke", e))?;
        Ok(Some(if c.out_and_back { s.out_and_back() } else { s }))
    }

    fn stroke_dt(&self, stroke: &Stroke) -> f64 {
        self.stroke.as_ref().and_then(|c| c.dt).unwrap_or_else(|| sim::default_dt(stroke))
    }

    /// Checks everything `cmd` needs before any computation.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        let shape_dim = match self.state {
            InitialState::Three(s) => {
                s.validate(&self.params).map_err(|e| cfg_err("state", e))?;
                2
            }
            InitialState::Four(s) => {
                s.validate(&self.params).map_err(|e| cfg_err("state", e))?;
                4
            }
        };
        if self.rank.depth == 0 || !(self.rank.tol > 0.0) || !(self.rank.step > 0.0) {
            return Err(cfg_err("rank", "depth must be at least 1, tol and step positive"));
        }
        match cmd {
            Command::Fields => {}
            Command::Rankmap => {
                self.three(cmd)?;
                let g = self.grid.as_ref().ok_or_else(|| cfg_err("grid", "required by `rankmap`"))?;
                if [&g.xi1, &g.xi2, &g.y, &g.theta].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
                    return Err(cfg_err("grid", "axis values must be finite"));
                }
            }
            Command::Simulate => {
                let st = self.stroke()?.ok_or_else(|| cfg_err("stroke", "required by `simulate`"))?;
                if st.dim() != shape_dim {
                    return Err(cfg_err("stroke.shapes", format!("expected {shape_dim} shape coordinates, got {}", st.dim())));
                }
                if !(self.stroke_dt(&st) > 0.0) {
                    return Err(cfg_err("stroke.dt", "must be positive"));
                }
                let v = match self.state {
                    InitialState::Three(s) => Swimmer::with_shape(&s, st.first()).violations(&self.params),
                    InitialState::Four(s) => Swimmer::with_shape(&s, st.first()).violations(&self.params),
                };
                if !v.is_empty() {
                    return Err(cfg_err("stroke.shapes[0]", v.join("; ")));
                }
            }
            Command::Plan => {
                self.three(cmd)?;
                let t = self.target.ok_or_else(|| cfg_err("target", "required by `plan`"))?;
                t.validate(&self.params).map_err(|e| cfg_err("target", e))?;
                let p = &self.planner;
                if !(p.tol > 0.0) || p.budget == 0 || !(p.dt > 0.0) || !(p.trust_radius > 0.0) {
                    return Err(cfg_err("planner", "tol, dt, trust_radius must be positive and budget at least 1"));
                }
            }
            Command::Verify => {
                if let Some(s) = &self.verify.suites {
                    if let Some(bad) = s.iter().find(|n| !SUITES.contains(&n.as_str())) {
                        return Err(cfg_err("verify.suites", format!("unknown suite `{bad}`; known: {}", SUITES.join(", "))));
                    }
                }
                if let Some(st) = self.stroke()? {
                    if st.dim() != shape_dim {
                        return Err(cfg_err("stroke.shapes", format!("expected {shape_dim} shape coordinates, got {}", st.dim())));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One verification check: `value op threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub op: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, op: "<", threshold, pass: value < threshold }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, op: ">=", threshold, pass: value >= threshold }
    }

    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, op: "<=", threshold, pass: value <= threshold }
    }

    pub fn line(&self) -> String {
        let t = if self.threshold.fract() == 0.0 { format!("{}", self.threshold) } else { format!("{:e}", self.threshold) };
        format!("{} {} {t}: {}", self.name, self.op, if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Text for stdout, files for the output directory, failed checks.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub failures: Vec<Check>,
}

impl Report {
    pub fn failures_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({ "failures": self.failures })).expect("serialisable")
    }
}

/// Machine-readable form of an error.
pub fn error_json(e: &Error) -> String {
    let mut v = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::NotLocallyControllable { rank, .. } = e {
        v["rank"] = (*rank).into();
    }
    serde_json::to_string_pretty(&v).expect("serialisable")
}

pub fn run(cmd: Command, cfg: &ScenarioConfig) -> Result<Report> {
    cfg.validate(cmd)?;
    match cmd {
        Command::Fields => cmd_fields(cfg),
        Command::Rankmap => cmd_rankmap(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Plan => cmd_plan(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

const THREE_NAMES: [&str; 5] = ["xi1", "xi2", "x", "y", "theta"];
const FOUR_NAMES: [&str; 10] = ["xi1", "xi2", "xi3", "xi4", "cx", "cy", "cz", "wx", "wy", "wz"];

fn csv_row(head: &str, vals: &[f64]) -> String {
    let mut s = head.to_string();
    for v in vals {
        s.push(',');
        s.push_str(&fmt17(*v));
    }
    s.push('\n');
    s
}

/// Field table. In wall mode the three-sphere table adds the series values,
/// their deviation and the truncation budget `a^2 + a / y^5`.
pub fn cmd_fields(cfg: &ScenarioConfig) -> Result<Report> {
    let opts = cfg.field_options();
    let mut out = String::new();
    match cfg.state {
        InitialState::Three(s) => {
            let (f1, f2) = swimmer::three_sphere_fields_with(&s, &cfg.params, &opts)?;
            if cfg.wall {
                let a = cfg.params.a;
                let [g1, g2] = series::series_fields(s.xi1, s.xi2, s.y, s.theta, a)?;
                let (g1, g2) = (g1.value(), g2.value());
                let budget = a * a + a / s.y.powi(5);
                out.push_str("component,f1,f2,series_f1,series_f2,dev_f1,dev_f2,budget\n");
                for (i, n) in THREE_NAMES.iter().enumerate() {
                    out.push_str(&csv_row(n, &[f1[i], f2[i], g1[i], g2[i], (f1[i] - g1[i]).abs(), (f2[i] - g2[i]).abs(), budget]));
                }
            } else {
                out.push_str("component,f1,f2\n");
                for (i, n) in THREE_NAMES.iter().enumerate() {
                    out.push_str(&csv_row(n, &[f1[i], f2[i]]));
                }
            }
        }
        InitialState::Four(s) => {
            let f = swimmer::four_sphere_fields_with(&s, &cfg.params, &opts)?;
            out.push_str("component,f1,f2,f3,f4\n");
            for (i, n) in FOUR_NAMES.iter().enumerate() {
                out.push_str(&csv_row(n, &[f[0][i], f[1][i], f[2][i], f[3][i]]));
            }
        }
    }
    Ok(Report { stdout: out.clone(), files: vec![("fields.csv".into(), out)], failures: vec![] })
}

pub fn cmd_rankmap(cfg: &ScenarioConfig) -> Result<Report> {
    let grid = cfg.grid.as_ref().expect("validated");
    let rows = liealg::rank_map(grid, &cfg.params, &cfg.field_options(), &cfg.rank_options());
    let mut csv = String::from("xi1,xi2,y,theta,dim,sigma_min_ratio\n");
    let mut counts = std::collections::BTreeMap::new();
    for r in &rows {
        writeln!(csv, "{},{},{},{},{},{}", fmt17(r.xi1), fmt17(r.xi2), fmt17(r.y), fmt17(r.theta), r.dim, fmt17(r.sigma_min_ratio)).unwrap();
        *counts.entry(r.dim).or_insert(0usize) += 1;
    }
    let mut text = format!("{} grid points\n", rows.len());
    for (d, n) in counts {
        writeln!(text, "dim {d}: {n}").unwrap();
    }
    Ok(Report { stdout: text, files: vec![("rankmap.csv".into(), csv)], failures: vec![] })
}

fn trajectory_csv<S: Swimmer>(t: &sim::Trajectory<S>) -> String {
    let mut buf = Vec::new();
    t.write_csv(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("ascii")
}

pub fn cmd_simulate(cfg: &ScenarioConfig) -> Result<Report> {
    let stroke = cfg.stroke()?.expect("validated");
    let opts = SimOptions { dt: cfg.stroke_dt(&stroke), fields: cfg.field_options(), record: true };
    let (csv, disp, stats) = match cfg.state {
        InitialState::Three(s) => {
            let t = sim::integrate(&s, &stroke, &cfg.params, &opts)?;
            (trajectory_csv(&t), sim::net_displacement(&t), t.stats)
        }
        InitialState::Four(s) => {
            let t = sim::integrate(&s, &stroke, &cfg.params, &opts)?;
            (trajectory_csv(&t), sim::net_displacement(&t), t.stats)
        }
    };
    let mut text = format!("steps {}, field evaluations {}\nnet pose displacement:", stats.steps, stats.field_evaluations);
    for v in disp.iter() {
        write!(text, " {}", fmt17(*v)).unwrap();
    }
    text.push('\n');
    Ok(Report { stdout: text, files: vec![("trajectory.csv".into(), csv)], failures: vec![] })
}

pub fn cmd_plan(cfg: &ScenarioConfig) -> Result<Report> {
    let s = cfg.three(Command::Plan)?;
    let target = cfg.target.expect("validated");
    let plan = planner::plan_local(&s, &target, &cfg.params, &cfg.planner_options())?;
    let opts = SimOptions { dt: plan.dt, fields: FieldOptions::with_wall(plan.wall), record: true };
    let traj = sim::integrate(&plan.start, &plan.stroke, &cfg.params, &opts)?;
    let replay_err = planner::pose_residual(traj.last(), &plan.predicted_final).norm();
    let text = format!(
        "converged {}, error {:e}, iterations {}, simulations {}, primitives {}, duration {}\nreplay deviation {:e}\n",
        plan.converged,
        plan.error,
        plan.iterations,
        plan.simulations,
        plan.primitives.len(),
        fmt17(plan.stroke.duration()),
        replay_err
    );
    let failures = if plan.converged {
        vec![]
    } else {
        vec![Check::below("plan_error", plan.error, cfg.planner.tol)]
    };
    Ok(Report {
        stdout: text,
        files: vec![("plan.json".into(), plan.to_json()), ("plan_trajectory.csv".into(), trajectory_csv(&traj))],
        failures,
    })
}

fn wall_no_slip(seed: u64, fluid: &FluidParams) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x0 = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.1..5.0), rng.gen_range(-5.0..5.0));
        let f = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for _ in 0..100 {
            let w = Vec3::new(rng.gen_range(-10.0..10.0), 0.0, rng.gen_range(-10.0..10.0));
            let u = greens::blake_tensor(&w, &x0, fluid)? * f;
            let scale = (greens::stokeslet(&(w - x0), fluid)? * f).norm();
            worst = worst.max(u.norm() / scale);
        }
    }
    Ok(worst)
}

/// Worst ratio of the single-sphere correction error to `2 (a/y)^2`, over the
/// assembled resistance `A` and the inverse of the mobility `I + 6 pi mu a M`.
fn lorentz_ratio(fluid: &FluidParams) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for ay in [0.01, 0.02, 0.05] {
        let p = SwimmerParams { a: ay, fluid: *fluid };
        let pos = [Vec3::new(0.0, 1.0, 0.0)];
        let resistance = swimmer::assemble(&pos, &p, true)?;
        let k = 6.0 * std::f64::consts::PI * fluid.mu * ay;
        let mobility = DMatrix::identity(3, 3) + swimmer::interaction_matrix(&pos, &p, true)? * k;
        let inverse = mobility.try_inverse().ok_or_else(|| Error::Degenerate("single-sphere mobility".into()))?;
        for r in [&resistance, &inverse] {
            for (i, c) in [(0, 9.0 / 16.0), (1, 9.0 / 8.0), (2, 9.0 / 16.0)] {
                let want = 1.0 + c * ay;
                worst = worst.max(((r[(i, i)] - want) / want).abs() / (2.0 * ay * ay));
            }
        }
    }
    Ok(worst)
}

fn default_stroke(shape: &[f64]) -> Result<Stroke> {
    let mut a = shape.to_vec();
    a[0] *= 1.15;
    let mut b = a.clone();
    b[1] *= 0.9;
    Ok(Stroke::through(&[shape.to_vec(), a, b])?.out_and_back())
}

fn suite_enabled(cfg: &ScenarioConfig, name: &str) -> bool {
    cfg.verify.suites.as_ref().map_or(true, |s| s.iter().any(|n| n == name))
}

fn max_rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

pub fn cmd_verify(cfg: &ScenarioConfig) -> Result<Report> {
    let mut checks = Vec::new();
    let fluid = cfg.params.fluid;
    let fopts = cfg.field_options();
    if suite_enabled(cfg, "wall_no_slip") {
        checks.push(Check::below("wall_no_slip", wall_no_slip(cfg.verify.seed, &fluid)?, 1e-12));
    }
    if suite_enabled(cfg, "lorentz_drag") {
        checks.push(Check::at_most("lorentz_drag_error_over_2_ay2", lorentz_ratio(&fluid)?, 1.0));
    }
    if suite_enabled(cfg, "reciprocity") {
        let pos: Vec<Vec3> = match cfg.state {
            InitialState::Three(s) => swimmer::three_sphere_positions(&s).to_vec(),
            InitialState::Four(s) => swimmer::four_sphere_positions(&s).to_vec(),
        };
        // independent evaluations in both argument orders
        let mut asym: f64 = 0.0;
        for i in 0..pos.len() {
            for j in 0..pos.len() {
                if i != j {
                    let k = greens::blake_tensor(&pos[i], &pos[j], &fluid)?;
                    let kt = greens::blake_tensor(&pos[j], &pos[i], &fluid)?.transpose();
                    asym = asym.max((k - kt).norm() / k.norm());
                }
            }
        }
        checks.push(Check::below("blake_reciprocity", asym, 1e-12));
    }
    if let InitialState::Three(s) = cfg.state {
        if suite_enabled(cfg, "symmetry") {
            let sm = DMatrix::from_column_slice(5, 5, swimmer::s_matrix().as_slice());
            let tm = DMatrix::from_column_slice(5, 5, swimmer::t_matrix().as_slice());
            let (f1, f2) = swimmer::three_sphere_fields_with(&s, &cfg.params, &fopts)?;
            let (g1, g2) = swimmer::three_sphere_fields_with(&swimmer::s_image(&s), &cfg.params, &fopts)?;
            let (h1, h2) = swimmer::three_sphere_fields_with(&swimmer::t_image(&s), &cfg.params, &fopts)?;
            let s_err = max_rel(&f1, &(&sm * &g2)).max(max_rel(&f2, &(&sm * &g1)));
            let t_err = max_rel(&h1, &(&tm * &f1)).max(max_rel(&h2, &(&tm * &f2)));
            checks.push(Check::below("symmetry_s_fields", s_err, 1e-10));
            checks.push(Check::below("symmetry_t_fields", t_err, 1e-10));
        }
    }
    if suite_enabled(cfg, "scallop") {
        let stroke = match cfg.stroke()? {
            Some(st) => st.out_and_back(),
            None => match cfg.state {
                InitialState::Three(s) => default_stroke(&Swimmer::shape(&s))?,
                InitialState::Four(s) => default_stroke(&Swimmer::shape(&s))?,
            },
        };
        let opts = SimOptions { dt: stroke.duration() / 1e4, fields: fopts, record: false };
        let d = match cfg.state {
            InitialState::Three(s) => sim::net_displacement(&sim::integrate(&s, &stroke, &cfg.params, &opts)?),
            InitialState::Four(s) => sim::net_displacement(&sim::integrate(&s, &stroke, &cfg.params, &opts)?),
        };
        checks.push(Check::below("scallop_net_displacement", d.norm(), 1e-8));
    }
    if let InitialState::Three(s) = cfg.state {
        if suite_enabled(cfg, "holonomy") && s.theta.cos().abs() > 1e-6 {
            let eps = 0.02 * s.xi1.min(s.xi2);
            let h = liealg::three_sphere_handles(cfg.params, fopts);
            let x = DVector::from_column_slice(s.to_vector().as_slice());
            let b = liealg::lie_bracket(&h[0], &h[1], &x, cfg.rank.step)?;
            let pred = Vector3::new(b[2], b[3], b[4]) * eps * eps;
            let l = planner::bracket_loop(&s, (0, 1), eps, &cfg.params)?;
            let opts = SimOptions { dt: l.duration() / 2000.0, fields: fopts, record: false };
            let d = sim::net_displacement(&sim::integrate(&s, &l, &cfg.params, &opts)?);
            let err = (Vector3::new(d[0], d[1], d[2]) - pred).norm() / pred.norm();
            checks.push(Check::below("holonomy_loop_vs_bracket", err, 1e-2));
        }
    }
    if suite_enabled(cfg, "rank") {
        let (dim, want) = match cfg.state {
            InitialState::Three(s) => {
                let r = liealg::three_sphere_rank(&s, &cfg.params, &fopts, &cfg.rank_options())?;
                let want = if s.theta.cos().abs() < 1e-9 { 3 } else { 5 };
                (r.dimension, want)
            }
            InitialState::Four(s) => {
                let opts = RankOptions { depth: cfg.rank.depth.min(2), ..cfg.rank_options() };
                (liealg::four_sphere_rank(&s, &cfg.params, &fopts, &opts)?.dimension, 10)
            }
        };
        if want == 3 {
            checks.push(Check::at_most("bracket_rank", dim as f64, 3.0));
        } else {
            checks.push(Check::at_least("bracket_rank", dim as f64, want as f64));
        }
    }
    let mut text = String::new();
    for c in &checks {
        text.push_str(&c.line());
        text.push('\n');
    }
    let failures: Vec<Check> = checks.iter().filter(|c| !c.pass).cloned().collect();
    let report = serde_json::to_string_pretty(&serde_json::json!({ "checks": checks })).expect("serialisable");
    Ok(Report { stdout: text, files: vec![("verify.json".into(), report)], failures })
}
