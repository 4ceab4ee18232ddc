use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use phasefield::fem::{build_single_notch_mesh, StructuredGrid};
use phasefield::opsplit::{HistoryField, OpSplitConfig, OpSplitMode, OpSplitSolver, OpSplitStatus};
use phasefield::tnnmg::TnnmgSolver;
use phasefield::{IncrementProblem, State};

use crate::config::{RunConfig, SolverChoice};
use crate::error::BenchError;
use crate::output::{fmt_f64, write_vtk, CsvSink, FORCE_HEADER, STATS_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepStatus {
    Converged,
    MaxIterations,
    InnerFailure,
    Failed,
}

impl StepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepStatus::Converged => "converged",
            StepStatus::MaxIterations => "max-iterations",
            StepStatus::InnerFailure => "inner-failure",
            StepStatus::Failed => "failed",
        }
    }
}

/// Everything recorded about one load step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub load: f64,
    pub force: f64,
    pub iterations: usize,
    pub walltime_s: f64,
    pub final_stationarity: f64,
    pub truncated_dofs: usize,
    pub dofs: usize,
    pub status: StepStatus,
    /// Energy never increased between recorded iterates (TNNMG only).
    pub monotone: bool,
    /// Every recorded iterate satisfied the constraints (TNNMG only).
    pub feasible: bool,
    /// Number of recorded iterates that increased the energy.
    pub monotonicity_violations: usize,
    pub feasibility_violations: usize,
    pub max_damage: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub grid: StructuredGrid,
    pub records: Vec<StepRecord>,
    pub final_state: State,
}

impl RunSummary {
    pub fn all_converged(&self) -> bool {
        self.records.iter().all(|r| r.status == StepStatus::Converged)
    }

    pub fn forces(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.force).collect()
    }

    /// First step whose force drops below 5% of the running peak.
    pub fn rupture_step(&self) -> Option<usize> {
        rupture_index(&self.forces()).map(|i| self.records[i].step)
    }
}

pub fn rupture_index(forces: &[f64]) -> Option<usize> {
    let mut peak = 0.0f64;
    for (i, &f) in forces.iter().enumerate() {
        if peak > 0.0 && f < 0.05 * peak {
            return Some(i);
        }
        peak = peak.max(f);
    }
    None
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    step: usize,
    load: f64,
    state: State,
    history: Option<HistoryField>,
}

enum Engine<'h> {
    Tnnmg(TnnmgSolver<'h>),
    OpSplit(OpSplitSolver<'h>, OpSplitMode, HistoryField),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> BenchError + '_ {
    move |e| BenchError::Io(path.to_path_buf(), e)
}

/// Drive the quasi-static load ramp. Steps that fail are recorded and the
/// run continues from the last good state.
pub fn run_experiment(config: &RunConfig) -> Result<RunSummary, BenchError> {
    let material = config.material();
    material.validate()?;
    let (hierarchy, bcs) = build_single_notch_mesh(config.length, config.refine_steps)?;
    let grid = *hierarchy.finest();
    let nv = grid.num_vertices();
    let dofs = 3 * nv;

    let out: PathBuf = config.out_dir.clone();
    let wants_files = config.write_csv || config.vtk_every > 0 || config.vtk_final || config.checkpoint;
    if wants_files {
        fs::create_dir_all(&out).map_err(io_err(&out))?;
    }
    let (mut force_csv, mut stats_csv) = if config.write_csv {
        (
            Some(CsvSink::create(&out.join("force.csv"), &FORCE_HEADER)?),
            Some(CsvSink::create(&out.join("stats.csv"), &STATS_HEADER)?),
        )
    } else {
        (None, None)
    };

    let p0 = IncrementProblem::new(grid, material, &bcs, 0.0, vec![0.0; nv])?;
    let mut engine = match config.solver {
        SolverChoice::TnnmgEx | SolverChoice::TnnmgPre => {
            Engine::Tnnmg(TnnmgSolver::new(&hierarchy, &p0, config.tnnmg())?)
        }
        SolverChoice::OpsplitFull | SolverChoice::OpsplitSemi => {
            let cfg = OpSplitConfig { tolerance: config.tolerance, max_outer: config.max_iterations, ..OpSplitConfig::default() };
            let mode = if config.solver == SolverChoice::OpsplitFull {
                OpSplitMode::FullyImplicit
            } else {
                OpSplitMode::SemiImplicit
            };
            Engine::OpSplit(OpSplitSolver::new(&hierarchy, &p0, cfg)?, mode, HistoryField::zeros(grid.num_cells()))
        }
    };

    let mut state = State::zeros(nv);
    let mut records = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let load = step as f64 * config.increment;
        let rec = match &mut engine {
            Engine::Tnnmg(solver) => {
                let problem = IncrementProblem::new(grid, material, &bcs, load, state.damage())?;
                match solver.solve_increment(&problem, &state) {
                    Ok((next, report)) => {
                        let mono = report
                            .iterations
                            .iter()
                            .filter(|r| !(r.energy_smoothed <= r.energy_start && r.energy <= r.energy_smoothed))
                            .count();
                        let infeasible = report.iterations.iter().filter(|r| !r.feasible).count()
                            + usize::from(!problem.is_feasible(&next));
                        state = next;
                        StepRecord {
                            step,
                            load,
                            force: problem.reaction_force(&state),
                            iterations: report.num_iterations(),
                            walltime_s: report.walltime_s,
                            final_stationarity: report.final_stationarity,
                            truncated_dofs: report.last_truncated(),
                            dofs,
                            status: if report.converged() { StepStatus::Converged } else { StepStatus::MaxIterations },
                            monotone: mono == 0,
                            feasible: infeasible == 0,
                            monotonicity_violations: mono,
                            feasibility_violations: infeasible,
                            max_damage: 0.0,
                        }
                    }
                    Err(e) => failed_step(step, load, dofs, &e, &problem, &state),
                }
            }
            Engine::OpSplit(solver, mode, history) => {
                // The history field replaces the irreversibility bound.
                let problem = IncrementProblem::new(grid, material, &bcs, load, vec![0.0; nv])?;
                let mut h = history.clone();
                match solver.solve_increment(&problem, &state, &mut h, *mode) {
                    Ok((next, report)) => {
                        let (ru, rd) = solver.euler_residuals(&problem, &h, &next);
                        state = next;
                        *history = h;
                        StepRecord {
                            step,
                            load,
                            force: problem.reaction_force(&state),
                            iterations: report.outer_iterations,
                            walltime_s: report.walltime_s,
                            final_stationarity: ru.max(rd),
                            truncated_dofs: report.damage_out_of_range,
                            dofs,
                            status: match report.status {
                                OpSplitStatus::Converged => StepStatus::Converged,
                                OpSplitStatus::MaxIterations => StepStatus::MaxIterations,
                                OpSplitStatus::InnerFailure => StepStatus::InnerFailure,
                            },
                            monotone: true,
                            feasible: true,
                            monotonicity_violations: 0,
                            feasibility_violations: 0,
                            max_damage: 0.0,
                        }
                    }
                    Err(e) => failed_step(step, load, dofs, &e, &problem, &state),
                }
            }
        };
        let rec = StepRecord { max_damage: state.damage().iter().cloned().fold(f64::NEG_INFINITY, f64::max), ..rec };
        log::info!(
            "step {step}: load {:.3e} force {:.6e} iterations {} status {}",
            rec.load,
            rec.force,
            rec.iterations,
            rec.status.as_str()
        );

        if let Some(w) = force_csv.as_mut() {
            w.row(&[step.to_string(), fmt_f64(load), fmt_f64(rec.force)])?;
        }
        if let Some(w) = stats_csv.as_mut() {
            w.row(&[
                step.to_string(),
                rec.iterations.to_string(),
                fmt_f64(rec.walltime_s),
                fmt_f64(rec.final_stationarity),
                rec.truncated_dofs.to_string(),
                rec.dofs.to_string(),
                rec.status.as_str().to_string(),
            ])?;
        }
        let periodic = config.vtk_every > 0 && step % config.vtk_every == 0;
        let last = config.vtk_final && step == config.steps;
        if periodic || last {
            let path = out.join(format!("state_{step:04}.vtk"));
            write_vtk(&path, &grid, &state, &format!("{} step {step} load {load:e}", config.solver.name()))?;
        }
        if config.checkpoint {
            let history = match &engine {
                Engine::OpSplit(_, _, h) => Some(h.clone()),
                Engine::Tnnmg(_) => None,
            };
            let cp = Checkpoint { step, load, state: state.clone(), history };
            let path = out.join("checkpoint.json");
            let tmp = out.join("checkpoint.json.tmp");
            fs::write(&tmp, serde_json::to_vec(&cp)?).map_err(io_err(&tmp))?;
            fs::rename(&tmp, &path).map_err(io_err(&path))?;
        }
        records.push(rec);
    }
    Ok(RunSummary { grid, records, final_state: state })
}

fn failed_step(
    step: usize,
    load: f64,
    dofs: usize,
    e: &phasefield::Error,
    problem: &IncrementProblem,
    state: &State,
) -> StepRecord {
    log::warn!("step {step} failed: {e}");
    StepRecord {
        step,
        load,
        force: f64::NAN,
        iterations: 0,
        walltime_s: 0.0,
        final_stationarity: problem.stationarity_measure(state),
        truncated_dofs: 0,
        dofs,
        status: StepStatus::Failed,
        monotone: true,
        feasible: true,
        monotonicity_violations: 0,
        feasibility_violations: 0,
        max_damage: 0.0,
    }
}
