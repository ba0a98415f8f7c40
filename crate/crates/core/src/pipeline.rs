//! Offline training and per-parameter evaluation shared by the workflows.

use crate::analysis::{
    check_error_bound, combine_residuals, measure, relative_error, stability_constant_with, step_residual_norms,
    StudyReport, STABILITY_CAP,
};
use crate::basis::{build_snapshots, SpaceTimeBasis, SvdMethod};
use crate::error::{Error, Result};
use crate::fom::{march, Forcing, TimeSteps, Trajectory, DEFAULT_ORACLE_CAP};
use crate::model::{assemble_system, ProblemSpec, SpatialSystem};
use crate::rom::{assemble_naive, assemble_with, coordinates, reconstruct, solve_reduced, Flavor, ReducedSystem, RomSolution};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Timings and spectra of one training run; kept apart from the basis
/// bundle so the bundle itself is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub problem: ProblemSpec,
    pub training_parameters: Vec<[f64; 2]>,
    pub n_s: usize,
    pub n_t: usize,
    pub fom_times_s: Vec<f64>,
    pub svd_time_s: f64,
    pub total_time_s: f64,
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub basis: SpaceTimeBasis<f64>,
    pub trajectories: Vec<Trajectory<f64>>,
    pub manifest: TrainingManifest,
}

/// One full-order solve, with assembly excluded from the wall time.
pub fn run_fom_timed(spec: &ProblemSpec, mu: [f64; 2]) -> Result<(Trajectory<f64>, f64)> {
    let inner = || -> Result<(Trajectory<f64>, f64)> {
        let system = assemble_system(spec, mu)?;
        let steps = TimeSteps::for_spec(spec);
        let forcing = Forcing::from_spec(spec, mu, &steps)?;
        let start = Instant::now();
        let traj = march(&system, &steps, &forcing)?;
        Ok((traj, start.elapsed().as_secs_f64()))
    };
    inner().map_err(|e| e.at(mu))
}

/// Full-order runs at every training parameter, then both POD stages.
pub fn train(spec: &ProblemSpec, train_mus: &[[f64; 2]], n_s: usize, n_t: usize) -> Result<TrainOutput> {
    let runs = train_mus
        .iter()
        .map(|&mu| run_fom_timed(spec, mu))
        .collect::<Result<Vec<_>>>()?;
    let (trajectories, times): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    train_from_trajectories(spec, trajectories, times, n_s, n_t)
}

pub fn train_from_trajectories(
    spec: &ProblemSpec,
    trajectories: Vec<Trajectory<f64>>,
    fom_times_s: Vec<f64>,
    n_s: usize,
    n_t: usize,
) -> Result<TrainOutput> {
    let start = Instant::now();
    let snapshots = build_snapshots(&trajectories)?;
    let basis = SpaceTimeBasis::from_snapshots(&snapshots, n_s, n_t, SvdMethod::Direct)?;
    let svd_time_s = start.elapsed().as_secs_f64();
    let manifest = TrainingManifest {
        problem: spec.clone(),
        training_parameters: snapshots.parameter_order.clone(),
        n_s,
        n_t,
        total_time_s: fom_times_s.iter().sum::<f64>() + svd_time_s,
        fom_times_s,
        svd_time_s,
        singular_values: basis.spatial_singular_values.clone(),
    };
    Ok(TrainOutput {
        basis,
        trajectories,
        manifest,
    })
}

/// Full-order data at one parameter, computed once and shared by every
/// reduced model evaluated there.
#[derive(Debug, Clone)]
pub struct FomReference {
    pub mu: [f64; 2],
    pub system: SpatialSystem<f64>,
    pub steps: TimeSteps<f64>,
    pub forcing: Forcing<f64>,
    pub trajectory: Trajectory<f64>,
    /// Median wall time of factorization plus marching.
    pub fom_time_s: f64,
}

impl FomReference {
    pub fn compute(spec: &ProblemSpec, mu: [f64; 2], repeats: usize) -> Result<Self> {
        let mut r = Self::prepare(spec, mu)?;
        r.time(repeats)?;
        Ok(r)
    }

    /// Untimed reference; `fom_time_s` stays NaN until [`FomReference::time`].
    pub fn prepare(spec: &ProblemSpec, mu: [f64; 2]) -> Result<Self> {
        let inner = || -> Result<Self> {
            let system = assemble_system(spec, mu)?;
            let steps = TimeSteps::for_spec(spec);
            let forcing = Forcing::from_spec(spec, mu, &steps)?;
            let trajectory = march(&system, &steps, &forcing)?;
            Ok(Self {
                mu,
                system,
                steps,
                forcing,
                trajectory,
                fom_time_s: f64::NAN,
            })
        };
        inner().map_err(|e| e.at(mu))
    }

    pub fn time(&mut self, repeats: usize) -> Result<()> {
        let (system, steps, forcing) = (&self.system, &self.steps, &self.forcing);
        self.fom_time_s = measure(|| march(system, steps, forcing), repeats).map_err(|e| e.at(self.mu))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOptions {
    /// Timed runs of the online phase; zero skips timing (times are NaN).
    pub repeats: usize,
    /// Assemble through the materialized space–time basis.
    pub naive: bool,
    pub oracle_cap: usize,
    /// Compute the stability constant and the error bound.
    pub with_bound: bool,
}

impl Default for CellOptions {
    fn default() -> Self {
        Self {
            repeats: crate::config::DEFAULT_TIMING_REPEATS,
            naive: false,
            oracle_cap: DEFAULT_ORACLE_CAP,
            with_bound: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub report: StudyReport,
    pub rom: Trajectory<f64>,
    pub reduced: ReducedSystem<f64>,
    pub solution: RomSolution<f64>,
}

/// Reduced model at `reference.mu` with the given basis and flavor.
pub fn evaluate_cell(
    spec: &ProblemSpec,
    reference: &FomReference,
    basis: &SpaceTimeBasis<f64>,
    flavor: Flavor,
    opts: &CellOptions,
) -> Result<CellOutcome> {
    evaluate_inner(spec, reference, basis, flavor, opts).map_err(|e| e.at(reference.mu))
}

fn assemble_cell(
    r: &FomReference,
    basis: &SpaceTimeBasis<f64>,
    flavor: Flavor,
    opts: &CellOptions,
) -> Result<ReducedSystem<f64>> {
    if opts.naive {
        assemble_naive(flavor, &r.system, basis, &r.steps, &r.forcing, opts.oracle_cap)
    } else {
        assemble_with(flavor, &r.system, basis, &r.steps, &r.forcing)
    }
}

/// Median wall time of reduced assembly, reduced solve and coordinate
/// recovery.
pub fn time_online(
    reference: &FomReference,
    basis: &SpaceTimeBasis<f64>,
    flavor: Flavor,
    opts: &CellOptions,
) -> Result<f64> {
    let online = || -> Result<()> {
        let rs = assemble_cell(reference, basis, flavor, opts)?;
        let sol = solve_reduced(&rs)?;
        coordinates(basis, &sol)?;
        Ok(())
    };
    let mut first = Ok(());
    let t = measure(
        || {
            if let Err(e) = online() {
                first = Err(e);
            }
        },
        opts.repeats,
    );
    first.map_err(|e| e.at(reference.mu))?;
    t
}

fn evaluate_inner(
    spec: &ProblemSpec,
    r: &FomReference,
    basis: &SpaceTimeBasis<f64>,
    flavor: Flavor,
    opts: &CellOptions,
) -> Result<CellOutcome> {
    let reduced = assemble_cell(r, basis, flavor, opts)?;
    let solution = solve_reduced(&reduced)?;
    let rom = reconstruct(basis, &solution, &r.forcing.u0, spec.dt(), r.mu)?;

    let rom_online_time_s = if opts.repeats == 0 {
        f64::NAN
    } else {
        time_online(r, basis, flavor, opts)?
    };

    let residuals = step_residual_norms(&r.system, &r.steps, &r.forcing, &rom)?;
    let (bound_lhs, bound_rhs, eta) = if opts.with_bound {
        let est = stability_constant_with(&r.system, &r.steps, STABILITY_CAP.max(opts.oracle_cap))?;
        let b = check_error_bound(&r.trajectory, &rom, &residuals, est.eta)?;
        (Some(b.lhs), Some(b.rhs), Some(est.eta))
    } else {
        (None, None, None)
    };
    let report = StudyReport {
        problem: spec.kind,
        flavor,
        mu: r.mu,
        n_s: basis.n_s(),
        n_t: basis.n_t(),
        relative_error: relative_error(&r.trajectory, &rom)?,
        st_residual_norm: combine_residuals(&residuals),
        fom_time_s: r.fom_time_s,
        rom_online_time_s,
        speedup: r.fom_time_s / rom_online_time_s,
        bound_lhs,
        bound_rhs,
        eta,
    };
    Ok(CellOutcome {
        report,
        rom,
        reduced,
        solution,
    })
}

/// Checks that a stored basis fits the problem discretization.
pub fn check_basis_fits(spec: &ProblemSpec, basis: &SpaceTimeBasis<f64>) -> Result<()> {
    if basis.big_n_s() != spec.n_s() || basis.big_n_t() != spec.n_t_steps {
        return Err(Error::DimensionMismatch {
            context: "basis bundle vs problem (N_s·N_t)",
            expected: spec.n_s() * spec.n_t_steps,
            found: basis.big_n_s() * basis.big_n_t(),
        });
    }
    Ok(())
}
