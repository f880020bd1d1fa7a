//! Run configuration documents and figure presets.
//!
//! A config is a JSON object; unknown keys are rejected and missing ones take
//! the defaults below. Lengths are in units of the final object size and
//! times in units of `τ`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::{ScheduleKind, SizeSchedule};

pub const DEFAULT_SNAPSHOTS: [f64; 8] = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 18.0, 24.0];
pub const DEFAULT_LINE_LENGTH: f64 = 10_000.0;
pub const DEFAULT_PLANE_SIDE: f64 = 500.0;
pub const DEFAULT_LINE_REPLICAS: usize = 10_000;
pub const DEFAULT_PLANE_REPLICAS: usize = 100;

/// Desk-scale plane side and replica divisors applied by figure presets.
pub const DESK_PLANE_SIDE: f64 = 200.0;
pub const DESK_PLANE_REPLICA_DIVISOR: usize = 5;
pub const DESK_LINE_REPLICA_DIVISOR: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sim1d,
    Sim2d,
    Kinetics,
    Exact,
    Analyze,
    Figure,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sim1d => "sim1d",
            Mode::Sim2d => "sim2d",
            Mode::Kinetics => "kinetics",
            Mode::Exact => "exact",
            Mode::Analyze => "analyze",
            Mode::Figure => "figure",
        }
    }

    fn dimension(self) -> u8 {
        if self == Mode::Sim2d {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6, Figure::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown figure `{s}`; expected one of fig2..fig7")))
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    #[serde(default = "one")]
    pub final_size: f64,
    #[serde(default = "one")]
    pub flux: f64,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self { kind: ScheduleKind::Exponential, final_size: 1.0, flux: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramParams {
    /// Gap histogram bin width on the line.
    pub bin_width: f64,
    /// Pair correlation range and bin width in the plane.
    pub r_max: f64,
    pub dr: f64,
}

impl Default for HistogramParams {
    fn default() -> Self {
        Self { bin_width: 0.02, r_max: 5.0, dr: 0.02 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub dx: f64,
    pub t0: f64,
    /// Range of exported curves.
    pub x_max: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { dx: 0.005, t0: 0.01, x_max: 6.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisParams {
    /// `peaks.csv`, or a directory holding one.
    pub input: Option<PathBuf>,
    pub t_min: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self { input: None, t_min: 4.0 }
    }
}

fn default_snapshots() -> Vec<f64> {
    DEFAULT_SNAPSHOTS.to_vec()
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    /// Line length or square side; defaults depend on the mode.
    #[serde(default)]
    pub box_size: Option<f64>,
    #[serde(default)]
    pub replicas: Option<usize>,
    #[serde(default = "default_snapshots")]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub histogram: HistogramParams,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub analysis: AnalysisParams,
    #[serde(default)]
    pub figure: Option<Figure>,
    #[serde(default)]
    pub desk_scale: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    /// A config for `mode` with every default applied.
    pub fn new(mode: Mode, seed: u64) -> Self {
        let mut c = Self {
            mode,
            seed,
            schedule: ScheduleSpec::default(),
            box_size: None,
            replicas: None,
            snapshots: default_snapshots(),
            histogram: HistogramParams::default(),
            solver: SolverParams::default(),
            analysis: AnalysisParams::default(),
            figure: None,
            desk_scale: false,
            out_dir: default_out_dir(),
            threads: None,
        };
        c.fill_defaults();
        c
    }

    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.fill_defaults();
        c.validate()?;
        Ok(c)
    }

    /// Canonical JSON; parsing it back yields the same config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fills mode-dependent defaults left as `None`.
    pub fn fill_defaults(&mut self) {
        match self.mode {
            Mode::Sim1d => {
                self.box_size.get_or_insert(DEFAULT_LINE_LENGTH);
                self.replicas.get_or_insert(DEFAULT_LINE_REPLICAS);
            }
            Mode::Sim2d => {
                self.box_size.get_or_insert(DEFAULT_PLANE_SIDE);
                self.replicas.get_or_insert(DEFAULT_PLANE_REPLICAS);
            }
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parse(msg));
        if let Some(r) = self.replicas {
            if r == 0 {
                return bad("replicas must be at least 1".into());
            }
        }
        if let Some(b) = self.box_size {
            if !(b.is_finite() && b > 0.0) {
                return bad(format!("box_size must be positive, got {b}"));
            }
        }
        if self.snapshots.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("snapshot times must be finite and non-negative".into());
        }
        if self.snapshots.windows(2).any(|w| w[1] <= w[0]) {
            return bad("snapshot times must be strictly increasing".into());
        }
        let h = &self.histogram;
        for (name, v) in [("bin_width", h.bin_width), ("r_max", h.r_max), ("dr", h.dr)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("histogram.{name} must be positive, got {v}"));
            }
        }
        let s = &self.solver;
        if !(s.dx > 0.0 && s.dx <= 0.1) {
            return bad(format!("solver.dx must lie in (0, 0.1], got {}", s.dx));
        }
        if !(s.t0 > 0.0 && s.t0 <= 0.1) {
            return bad(format!("solver.t0 must lie in (0, 0.1], got {}", s.t0));
        }
        if !(s.x_max.is_finite() && s.x_max > 0.0) {
            return bad(format!("solver.x_max must be positive, got {}", s.x_max));
        }
        if !(self.analysis.t_min.is_finite() && self.analysis.t_min >= 0.0) {
            return bad(format!("analysis.t_min must be non-negative, got {}", self.analysis.t_min));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        self.schedule_for(self.mode.dimension()).map_err(|e| Error::Parse(e.to_string()))?;
        match self.mode {
            Mode::Sim2d => {
                let side = self.box_size.unwrap_or(DEFAULT_PLANE_SIDE);
                if h.r_max > 0.5 * side {
                    return bad(format!("histogram.r_max = {} exceeds half the box side {}", h.r_max, side));
                }
            }
            Mode::Kinetics => {
                if self.snapshots.iter().any(|&t| t < s.t0) {
                    return bad(format!("kinetics snapshots must not precede solver.t0 = {}", s.t0));
                }
            }
            Mode::Analyze if self.analysis.input.is_none() => {
                return bad("analyze needs analysis.input".into());
            }
            Mode::Figure if self.figure.is_none() => {
                return bad("figure mode needs a figure name".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// The schedule in `dimension` dimensions.
    pub fn schedule_for(&self, dimension: u8) -> Result<SizeSchedule> {
        let s = self.schedule;
        SizeSchedule::new(s.kind, s.final_size, s.flux, dimension)
    }

    /// The schedule in this mode's dimension.
    pub fn schedule(&self) -> Result<SizeSchedule> {
        self.schedule_for(self.mode.dimension())
    }

    /// The config actually run: with `desk_scale` set, Monte Carlo modes use
    /// the desk-scale box and replica count.
    pub fn effective(&self) -> RunConfig {
        let mut c = self.clone();
        if c.desk_scale {
            match c.mode {
                Mode::Sim1d => {
                    c.replicas = Some((c.replicas_or_default() / DESK_LINE_REPLICA_DIVISOR).max(1));
                }
                Mode::Sim2d => {
                    c.box_size = Some(c.box_size_or_default().min(DESK_PLANE_SIDE));
                    c.replicas = Some((c.replicas_or_default() / DESK_PLANE_REPLICA_DIVISOR).max(1));
                }
                _ => {}
            }
        }
        c
    }

    pub fn box_size_or_default(&self) -> f64 {
        self.box_size.unwrap_or(if self.mode == Mode::Sim2d { DEFAULT_PLANE_SIDE } else { DEFAULT_LINE_LENGTH })
    }

    pub fn replicas_or_default(&self) -> usize {
        self.replicas.unwrap_or(if self.mode == Mode::Sim2d { DEFAULT_PLANE_REPLICAS } else { DEFAULT_LINE_REPLICAS })
    }
}

/// Peak fit over one part of a figure plan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitSpec {
    pub name: String,
    /// Subdirectory whose `peaks.csv` is fitted.
    pub part: String,
    pub t_min: f64,
}

/// The runs behind one figure, each written to its own subdirectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigurePlan {
    pub figure: Figure,
    pub desk_scale: bool,
    pub parts: Vec<(String, RunConfig)>,
    pub fits: Vec<FitSpec>,
}

fn plane_run(seed: u64, kind: ScheduleKind, snapshots: &[f64], desk: bool) -> RunConfig {
    let mut c = RunConfig::new(Mode::Sim2d, seed);
    c.schedule.kind = kind;
    c.snapshots = snapshots.to_vec();
    if desk {
        c.box_size = Some(DESK_PLANE_SIDE);
        c.replicas = Some(DEFAULT_PLANE_REPLICAS / DESK_PLANE_REPLICA_DIVISOR);
    }
    c
}

fn line_run(seed: u64, desk: bool) -> RunConfig {
    let mut c = RunConfig::new(Mode::Sim1d, seed);
    if desk {
        c.replicas = Some(DEFAULT_LINE_REPLICAS / DESK_LINE_REPLICA_DIVISOR);
    }
    c
}

/// Parameter sets reproducing each figure; `desk` shrinks the Monte Carlo
/// runs to the desk-scale sizes.
pub fn figure_plan(figure: Figure, seed: u64, desk: bool) -> FigurePlan {
    let peak_times = [4.0, 6.0, 8.0, 10.0, 12.0, 18.0, 24.0];
    let (parts, fits) = match figure {
        Figure::Fig2 => {
            (vec![("sim2d".to_string(), plane_run(seed, ScheduleKind::Exponential, &DEFAULT_SNAPSHOTS, desk))], vec![])
        }
        Figure::Fig3 => (
            vec![("sim2d".to_string(), plane_run(seed, ScheduleKind::Exponential, &peak_times, desk))],
            vec![FitSpec { name: "sim2d".into(), part: "sim2d".into(), t_min: 4.0 }],
        ),
        Figure::Fig4 => (
            ScheduleKind::SHRINKING
                .into_iter()
                .map(|k| (k.name().to_string(), plane_run(seed, k, &[10.0], desk)))
                .collect(),
            vec![],
        ),
        Figure::Fig5 => (vec![("sim1d".to_string(), line_run(seed, desk))], vec![]),
        Figure::Fig6 => {
            let mut c = RunConfig::new(Mode::Exact, seed);
            c.schedule.kind = ScheduleKind::Constant;
            c.snapshots = vec![1.0, 2.0, 4.0, 6.0, 8.0, 1000.0];
            (vec![("exact".to_string(), c)], vec![])
        }
        Figure::Fig7 => {
            let mut exact = RunConfig::new(Mode::Exact, seed);
            exact.schedule.kind = ScheduleKind::Constant;
            exact.snapshots = vec![4.0, 6.0, 8.0, 12.0, 18.0, 24.0, 100.0, 1000.0, 10_000.0];
            (
                vec![("sim1d".to_string(), line_run(seed, desk)), ("exact".to_string(), exact)],
                vec![
                    FitSpec { name: "sim1d".into(), part: "sim1d".into(), t_min: 4.0 },
                    FitSpec { name: "exact".into(), part: "exact".into(), t_min: 100.0 },
                ],
            )
        }
    };
    FigurePlan { figure, desk_scale: desk, parts, fits }
}
