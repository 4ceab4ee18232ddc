use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use phasefield::material::AtVariant;
use phasefield::tnnmg::{SmootherKind, TnnmgConfig};
use phasefield::{CrackDensity, Degradation, MaterialModel, Split};

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum SolverChoice {
    TnnmgEx,
    TnnmgPre,
    OpsplitFull,
    OpsplitSemi,
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::TnnmgEx => "tnnmg-ex",
            SolverChoice::TnnmgPre => "tnnmg-pre",
            SolverChoice::OpsplitFull => "opsplit-full",
            SolverChoice::OpsplitSemi => "opsplit-semi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegradationChoice {
    Ga,
    Gb,
    Gc,
    Gd,
}

/// Flat run description; every key defaults to the notched tension setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Edge length of the square specimen, mm.
    pub length: f64,
    pub refine_steps: usize,

    pub lambda: f64,
    pub mu: f64,
    pub k: f64,
    pub g_c: f64,
    pub l: f64,
    pub degradation: DegradationChoice,
    /// Parameter `b` of the exponential degradation.
    pub degradation_b: f64,
    pub split: Split,
    pub crack: AtVariant,
    /// Overrides the crack density `β` of the chosen variant.
    pub beta: Option<f64>,

    pub steps: usize,
    /// Displacement increment per step, mm.
    pub increment: f64,

    pub solver: SolverChoice,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub truncation_tol: f64,
    pub warm_start_displacement: bool,

    pub out_dir: PathBuf,
    pub write_csv: bool,
    /// Write a VTK file every this many steps (0: none).
    pub vtk_every: usize,
    /// Always write a VTK file of the last step.
    pub vtk_final: bool,
    /// Serialize the state after each step for restarts.
    pub checkpoint: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = MaterialModel::notched_tension(CrackDensity::AT2, Split::Isotropic);
        RunConfig {
            length: 1.0,
            refine_steps: 2,
            lambda: m.lambda,
            mu: m.mu,
            k: m.k,
            g_c: m.g_c,
            l: m.l,
            degradation: DegradationChoice::Ga,
            degradation_b: 2.0,
            split: Split::Isotropic,
            crack: AtVariant::At2,
            beta: None,
            steps: 160,
            increment: 2e-5,
            solver: SolverChoice::TnnmgEx,
            tolerance: 1e-7,
            max_iterations: 500,
            truncation_tol: 1e-10,
            warm_start_displacement: false,
            out_dir: PathBuf::from("out"),
            write_csv: true,
            vtk_every: 0,
            vtk_final: true,
            checkpoint: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, BenchError> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.to_path_buf(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn material(&self) -> MaterialModel {
        let mut crack = CrackDensity::new(self.crack);
        if let Some(b) = self.beta {
            crack.beta = b;
        }
        MaterialModel {
            lambda: self.lambda,
            mu: self.mu,
            k: self.k,
            g_c: self.g_c,
            l: self.l,
            degradation: match self.degradation {
                DegradationChoice::Ga => Degradation::Ga,
                DegradationChoice::Gb => Degradation::Gb,
                DegradationChoice::Gc => Degradation::Gc,
                DegradationChoice::Gd => Degradation::Gd { b: self.degradation_b },
            },
            split: self.split,
            crack,
        }
    }

    pub fn tnnmg(&self) -> TnnmgConfig {
        TnnmgConfig {
            smoother: if self.solver == SolverChoice::TnnmgPre { SmootherKind::Pre } else { SmootherKind::Ex },
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            truncation_tol: self.truncation_tol,
            warm_start_displacement: self.warm_start_displacement,
            ..TnnmgConfig::default()
        }
    }
}
