//! Problem files, plan/trajectory serialization and the command runners behind the CLI.

use std::f64::consts::TAU;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chained::{EquilibriumPoint, Input2, State6};
use crate::planner::{compress, synthesize, Plan, PlanningProblem};
use crate::simulator::{compare, oracle_trajectory, simulate, Sample, SimConfig, Trajectory};
use crate::steering::Channel;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const PLAN_JSON: &str = "plan.json";
pub const REPORT_JSON: &str = "report.json";
pub const PLOT_SVG: &str = "plot.svg";

/// CSV column order.
pub const CSV_HEADER: [&str; 10] = ["t", "z1", "z2", "z3", "z4", "z5", "z6", "u1", "u2", "phase_index"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(#[from] crate::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl IoError {
    /// Process exit code: 2 parse, 3 validation, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Parse(_) => 2,
            IoError::Validation(_) => 3,
            IoError::Io { .. } => 4,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }
}

fn default_duration() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// On-disk planning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub start: [f64; 3],
    pub goal: [f64; 3],
    #[serde(rename = "T", default = "default_duration")]
    pub phase_duration: f64,
    /// Defaults to `2 pi / T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_true")]
    pub compress: bool,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
    }

    /// Unreadable files count as parse failures.
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| IoError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn omega(&self) -> f64 {
        self.omega.unwrap_or(TAU / self.phase_duration)
    }

    pub fn to_problem(&self) -> Result<PlanningProblem, IoError> {
        let start = EquilibriumPoint::from_array(self.start)?;
        let goal = EquilibriumPoint::from_array(self.goal)?;
        Ok(PlanningProblem::new(start, goal, self.phase_duration, self.omega())?)
    }

    /// Synthesized plan, compressed at zero tolerance when `compress` is set.
    pub fn plan(&self) -> Result<Plan, IoError> {
        let plan = synthesize(&self.to_problem()?)?;
        Ok(if self.compress { compress(&plan, 0.0) } else { plan })
    }
}

pub fn plan_to_json(plan: &Plan) -> String {
    serde_json::to_string_pretty(plan).expect("plans always serialize")
}

pub fn plan_from_json(text: &str) -> Result<Plan, IoError> {
    let plan: Plan = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    plan.validate()?;
    Ok(plan)
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    z1: f64,
    z2: f64,
    z3: f64,
    z4: f64,
    z5: f64,
    z6: f64,
    u1: f64,
    u2: f64,
    phase_index: usize,
}

impl From<&Sample> for CsvRow {
    fn from(s: &Sample) -> Self {
        let [z1, z2, z3, z4, z5, z6] = s.state.0;
        CsvRow { t: s.t, z1, z2, z3, z4, z5, z6, u1: s.input.u1, u2: s.input.u2, phase_index: s.phase_index }
    }
}

impl From<CsvRow> for Sample {
    fn from(r: CsvRow) -> Self {
        Sample {
            t: r.t,
            state: State6([r.z1, r.z2, r.z3, r.z4, r.z5, r.z6]),
            input: Input2::new(r.u1, r.u2),
            phase_index: r.phase_index,
        }
    }
}

/// Writes one row per sample; floats use shortest round-trip formatting.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for s in &trajectory.samples {
        w.serialize(CsvRow::from(s))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory CSV. `dt` and the phase boundaries are reconstructed from the rows.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| IoError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(IoError::Parse(format!("unexpected CSV header {header:?}")));
    }
    let samples = r
        .deserialize::<CsvRow>()
        .map(|row| row.map(Sample::from).map_err(|e| IoError::Parse(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let Some(last) = samples.last() else {
        return Err(IoError::Parse("trajectory CSV has no rows".into()));
    };
    let dt = if samples.len() > 1 { last.t / (samples.len() - 1) as f64 } else { 1.0 };
    let mut boundaries = vec![0];
    boundaries.extend((1..samples.len()).filter(|&i| samples[i].phase_index != samples[i - 1].phase_index));
    if samples.len() > 1 {
        boundaries.push(samples.len() - 1);
    }
    let tr = Trajectory { samples, dt, phase_boundaries: boundaries };
    tr.validate()?;
    Ok(tr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub label: String,
    pub channel: Channel,
    pub amplitude: f64,
    pub omega: f64,
    pub duration: f64,
    /// Net displacement of the driven double integrator.
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub trajectory_csv: PathBuf,
    pub plan_json: PathBuf,
    pub report_json: PathBuf,
    pub plot_svg: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub phases: Vec<PhaseSummary>,
    pub dt: f64,
    pub steps: usize,
    pub goal: State6,
    pub final_state: State6,
    /// Infinity norm of `final_state - goal`.
    pub final_state_error: f64,
    /// Largest state deviation between the integrator and the exact solution.
    pub oracle_deviation: f64,
    pub outputs: OutputPaths,
}

pub fn summarize(plan: &Plan) -> Vec<PhaseSummary> {
    plan.phases
        .iter()
        .map(|p| PhaseSummary {
            label: p.label.clone(),
            channel: p.channel,
            amplitude: p.amplitude(),
            omega: p.signal.omega,
            duration: p.duration(),
            displacement: p.signal.displacement(),
        })
        .collect()
}

/// `plan`: synthesized plan as JSON.
pub fn run_plan(problem_path: &Path) -> Result<String, IoError> {
    let plan = ProblemFile::load(problem_path)?.plan()?;
    Ok(plan_to_json(&plan))
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub dt: Option<f64>,
    pub no_compress: bool,
}

/// `simulate`: runs plan, integrator and oracle, and writes all artifacts to `out_dir`.
pub fn run_simulate(problem_path: &Path, out_dir: &Path, opts: &SimulateOptions) -> Result<RunReport, IoError> {
    let mut file = ProblemFile::load(problem_path)?;
    if opts.no_compress {
        file.compress = false;
    }
    if opts.dt.is_some() {
        file.dt = opts.dt;
    }
    let problem = file.to_problem()?;
    let plan = file.plan()?;
    let start = State6::from(problem.start);
    let goal = State6::from(problem.goal);

    let config = SimConfig { dt: file.dt, record_inputs: true };
    let trajectory = simulate(&plan, &start, &config)?;
    let oracle = oracle_trajectory(&plan, &start, trajectory.dt)?;
    let oracle_deviation = compare(&trajectory, &oracle)?;
    let final_state = trajectory.final_state().expect("trajectories are never empty");

    fs::create_dir_all(out_dir).map_err(|e| IoError::io(out_dir, e))?;
    let outputs = OutputPaths {
        trajectory_csv: out_dir.join(TRAJECTORY_CSV),
        plan_json: out_dir.join(PLAN_JSON),
        report_json: out_dir.join(REPORT_JSON),
        plot_svg: out_dir.join(PLOT_SVG),
    };

    let csv_file = fs::File::create(&outputs.trajectory_csv).map_err(|e| IoError::io(&outputs.trajectory_csv, e))?;
    write_trajectory_csv(&trajectory, std::io::BufWriter::new(csv_file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(err) => IoError::io(&outputs.trajectory_csv, err),
        other => IoError::Parse(format!("{other:?}")),
    })?;
    fs::write(&outputs.plan_json, plan_to_json(&plan)).map_err(|e| IoError::io(&outputs.plan_json, e))?;
    crate::plot::emit_plot(&trajectory, &outputs.plot_svg).map_err(|e| IoError::io(&outputs.plot_svg, e))?;

    let report = RunReport {
        phases: summarize(&plan),
        dt: trajectory.dt,
        steps: trajectory.len() - 1,
        goal,
        final_state,
        final_state_error: final_state.max_abs_diff(&goal),
        oracle_deviation,
        outputs,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
    fs::write(&report.outputs.report_json, text).map_err(|e| IoError::io(&report.outputs.report_json, e))?;
    Ok(report)
}
