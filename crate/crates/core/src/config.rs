//! JSON run configuration shared by the command-line workflows.
//!
//! ```json
//! {
//!   "problem": { "kind": "diffusion2d", "nx": 70, "ny": 70, "nt": 50 },
//!   "train_mus": [[-0.9, -0.9], [-0.9, -0.5], [-0.5, -0.9], [-0.5, -0.5]],
//!   "target_mu": [-0.7, -0.7],
//!   "test_mus": { "grid": { "mu1": [-1.7, -0.2, 15], "mu2": [-1.7, -0.2, 15] } },
//!   "n_s": 5,
//!   "n_t": { "start": 1, "stop": 3 },
//!   "flavor": "both",
//!   "seed": 0,
//!   "output_dir": "out/diffusion"
//! }
//! ```
//!
//! `test_mus` is either a list of pairs or a tensor grid of inclusive
//! `[start, stop, count]` axes. `n_s` and `n_t` accept an integer, a list or
//! an inclusive range with optional `step`.

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::rom::Flavor;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_TIMING_REPEATS: usize = 7;

/// Inclusive linspace axis `[start, stop, count]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis(pub f64, pub f64, pub usize);

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        let Axis(a, b, n) = *self;
        match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub mu1: Axis,
    pub mu2: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuSet {
    Points(Vec<[f64; 2]>),
    Grid { grid: GridSpec },
}

impl Default for MuSet {
    fn default() -> Self {
        MuSet::Points(Vec::new())
    }
}

impl MuSet {
    /// Points with `mu1` varying fastest.
    pub fn points(&self) -> Vec<[f64; 2]> {
        match self {
            MuSet::Points(p) => p.clone(),
            MuSet::Grid { grid } => {
                let (xs, ys) = (grid.mu1.points(), grid.mu2.points());
                ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimSpec {
    One(usize),
    List(Vec<usize>),
    Range {
        start: usize,
        stop: usize,
        #[serde(default = "one")]
        step: usize,
    },
}

fn one() -> usize {
    1
}

impl DimSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            DimSpec::One(v) => vec![*v],
            DimSpec::List(v) => v.clone(),
            DimSpec::Range { start, stop, step } => (*start..=*stop).step_by((*step).max(1)).collect(),
        }
    }

    pub fn max(&self) -> usize {
        self.values().into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FlavorChoice {
    Galerkin,
    Pg,
    #[default]
    Both,
}

impl FlavorChoice {
    pub fn flavors(self) -> Vec<Flavor> {
        match self {
            FlavorChoice::Galerkin => vec![Flavor::Galerkin],
            FlavorChoice::Pg => vec![Flavor::PetrovGalerkin],
            FlavorChoice::Both => Flavor::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub train_mus: Vec<[f64; 2]>,
    /// Parameter for `predict` when none is given on the command line.
    #[serde(default)]
    pub target_mu: Option<[f64; 2]>,
    #[serde(default)]
    pub test_mus: MuSet,
    pub n_s: DimSpec,
    pub n_t: DimSpec,
    #[serde(default)]
    pub flavor: FlavorChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Timed runs per measurement (median reported).
    #[serde(default = "default_repeats")]
    pub timing_repeats: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_repeats() -> usize {
    DEFAULT_TIMING_REPEATS
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that can be made before any full-order run.
    pub fn validate(&self) -> Result<()> {
        if self.train_mus.is_empty() {
            return Err(Error::InvalidInput("train_mus must not be empty".into()));
        }
        let all_mus = self.train_mus.iter().chain(self.target_mu.iter());
        if let Some(bad) = all_mus.clone().find(|m| !m.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite parameter {bad:?}")));
        }
        for (name, dims) in [("n_s", &self.n_s), ("n_t", &self.n_t)] {
            let v = dims.values();
            if v.is_empty() || v.contains(&0) {
                return Err(Error::InvalidInput(format!("{name} must list positive values")));
            }
        }
        let bound = self.train_mus.len().min(self.problem.n_t_steps);
        if self.n_t.max() > bound {
            return Err(Error::BasisRank {
                requested: self.n_t.max(),
                bound,
            });
        }
        if self.timing_repeats < 3 {
            return Err(Error::InvalidInput("timing_repeats must be at least 3".into()));
        }
        Ok(())
    }

    pub fn flavors(&self) -> Vec<Flavor> {
        self.flavor.flavors()
    }

    pub fn test_points(&self) -> Vec<[f64; 2]> {
        self.test_mus.points()
    }
}
