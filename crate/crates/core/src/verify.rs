//! Oracle suite on tiny discretizations.
//!
//! Every check compares the production path against a dense computation
//! built from `A^st` and `Φ_st`, or evaluates an identity that must hold
//! exactly up to rounding.

use crate::analysis::{
    check_error_bound, combine_residuals, dense_residual, relative_error, stability_constant_with,
    step_residual_norms, STABILITY_CAP,
};
use crate::basis::{build_snapshots, dense_space_time_basis, spatial_pod, SpaceTimeBasis, SvdMethod};
use crate::error::{Error, Result};
use crate::fom::{march, space_time_dense_with, Forcing, TimeSteps, DEFAULT_ORACLE_CAP};
use crate::model::{assemble_system, ProblemKind, ProblemSpec};
use crate::rom::{assemble_with, reconstruct, solve_reduced, Flavor};
use serde::{Deserialize, Serialize};

pub const ORACLE_TOL: f64 = 1e-10;
pub const STATIONARITY_TOL: f64 = 1e-8;
pub const POD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub kinds: Vec<ProblemKind>,
    /// Mesh intervals per axis (`nx = ny`).
    pub meshes: Vec<usize>,
    pub time_steps: Vec<usize>,
    pub n_s_values: Vec<usize>,
    pub n_t_values: Vec<usize>,
    pub oracle_cap: usize,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            kinds: ProblemKind::ALL.to_vec(),
            meshes: vec![4, 6],
            time_steps: vec![3, 5],
            n_s_values: vec![1, 2, 3],
            n_t_values: vec![1, 2],
            oracle_cap: DEFAULT_ORACLE_CAP,
        }
    }
}

impl VerifyGrid {
    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
            || self.meshes.is_empty()
            || self.time_steps.is_empty()
            || self.n_s_values.is_empty()
            || self.n_t_values.is_empty()
    }
}

/// Deliberate corruption of the block path, to show the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Negates `Φ^t_i[k, j]` for every `i` before block assembly.
    FlipD { k: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub case: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, check: &str, case: &str, value: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            check: check.to_string(),
            case: case.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        });
    }

    fn push_error(&mut self, check: &str, case: &str, err: &Error) {
        self.warnings.push(format!("{case}: {check}: {err}"));
        self.checks.push(CheckResult {
            check: check.to_string(),
            case: case.to_string(),
            value: f64::INFINITY,
            tolerance: 0.0,
            passed: false,
        });
    }
}

/// `max |a - b| / max |b|`; zero when both vanish.
pub fn rel_max_abs(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// `|a - b| / |b|`, or `|a - b|` when `b` vanishes.
fn relative_gap(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Two training parameters per problem: opposite corners of the full-size
/// training rectangle; the prediction target is its centre.
pub fn tiny_training_set(kind: ProblemKind) -> [[f64; 2]; 2] {
    let t = kind.training_parameters();
    [t[0], t[3]]
}

pub fn run_verify(grid: &VerifyGrid, mutation: Mutation) -> VerifyReport {
    let mut report = VerifyReport::default();
    if grid.is_empty() {
        report.warnings.push("empty verification grid: nothing to check".into());
        return report;
    }
    for &kind in &grid.kinds {
        for &mesh in &grid.meshes {
            for &nt in &grid.time_steps {
                let case = format!("{kind}/{mesh}x{mesh}/Nt={nt}");
                if let Err(e) = verify_discretization(grid, kind, mesh, nt, mutation, &case, &mut report) {
                    report.push_error("setup", &case, &e);
                }
            }
        }
    }
    report
}

fn verify_discretization(
    grid: &VerifyGrid,
    kind: ProblemKind,
    mesh: usize,
    nt: usize,
    mutation: Mutation,
    case: &str,
    report: &mut VerifyReport,
) -> Result<()> {
    let spec = ProblemSpec::new(kind, mesh, mesh, nt)?;
    let steps = TimeSteps::for_spec(&spec);
    let train_mus = tiny_training_set(kind);
    let trajectories = train_mus
        .iter()
        .map(|&mu| {
            let sys = assemble_system(&spec, mu)?;
            march(&sys, &steps, &Forcing::from_spec(&spec, mu, &steps)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let snapshots = build_snapshots(&trajectories)?;

    // Discarded energy equals the tail of the singular spectrum.
    let full = snapshots.data.clone().svd(false, false).singular_values;
    for &n_s in &grid.n_s_values {
        let pod = match spatial_pod(&snapshots, n_s, SvdMethod::Direct) {
            Ok(p) => p,
            Err(e) => {
                report.push_error("pod_identity", &format!("{case}/n_s={n_s}"), &e);
                continue;
            }
        };
        let proj = &pod.phi_s * pod.phi_s.tr_mul(&snapshots.data);
        let lhs = (&snapshots.data - proj).norm_squared();
        let rhs: f64 = full.iter().skip(n_s).map(|s| s * s).sum();
        report.push("pod_identity", &format!("{case}/n_s={n_s}"), relative_gap(lhs, rhs), POD_TOL);
    }

    let target = kind.target_parameter();
    let system = assemble_system(&spec, target)?;
    let forcing = Forcing::from_spec(&spec, target, &steps)?;
    let fom = march(&system, &steps, &forcing)?;
    let dense = space_time_dense_with(&system, &steps, &forcing, grid.oracle_cap)?;
    let b = &dense.f_st + &dense.u0_st;
    let eta = stability_constant_with(&system, &steps, STABILITY_CAP)?;
    report.push(
        "stability_converged",
        case,
        if eta.converged { 0.0 } else { 1.0 },
        0.0,
    );

    for &n_s in &grid.n_s_values {
        for &n_t in &grid.n_t_values {
            let cell = format!("{case}/n_s={n_s}/n_t={n_t}");
            let basis = match SpaceTimeBasis::from_snapshots(&snapshots, n_s, n_t, SvdMethod::Direct) {
                Ok(b) => b,
                Err(e) => {
                    report.push_error("basis", &cell, &e);
                    continue;
                }
            };
            let block_basis = mutate(&basis, mutation);
            let phi = dense_space_time_basis(&basis, grid.oracle_cap)?;
            let ap = &dense.a_st * &phi;
            let mut residual_norms = Vec::new();

            for flavor in Flavor::ALL {
                let fcell = format!("{cell}/{flavor}");
                let rs = assemble_with(flavor, &system, &block_basis, &steps, &forcing)?;
                let test = match flavor {
                    Flavor::Galerkin => &phi,
                    Flavor::PetrovGalerkin => &ap,
                };
                let a_ref = test.tr_mul(&ap);
                let f_ref = test.tr_mul(&dense.f_st);
                let u_ref = test.tr_mul(&dense.u0_st);
                report.push("oracle_a_hat", &fcell, rel_max_abs(rs.a_hat.as_slice(), a_ref.as_slice()), ORACLE_TOL);
                report.push("oracle_f_hat", &fcell, rel_max_abs(rs.f_hat.as_slice(), f_ref.as_slice()), ORACLE_TOL);
                report.push("oracle_u0_hat", &fcell, rel_max_abs(rs.u0_hat.as_slice(), u_ref.as_slice()), ORACLE_TOL);

                let sol = match solve_reduced(&rs) {
                    Ok(s) => s,
                    Err(e) => {
                        report.push_error("reduced_solve", &fcell, &e);
                        continue;
                    }
                };
                let rom = reconstruct(&block_basis, &sol, &forcing.u0, steps.dt(0), target)?;
                let r = dense_residual(&dense.a_st, &dense.f_st, &dense.u0_st, &rom)?;
                let norms = step_residual_norms(&system, &steps, &forcing, &rom)?;
                let ours = combine_residuals(&norms);
                report.push("residual_oracle", &fcell, relative_gap(ours, r.norm()), ORACLE_TOL);

                // Projected residual vanishes: Φ_stᵀ r for Galerkin, (A^st Φ_st)ᵀ r for PG.
                let stat = test.tr_mul(&r).amax();
                let scale = ap.norm() * (r.norm() + 1e-12 * b.norm());
                report.push("stationarity", &fcell, stat / scale.max(f64::MIN_POSITIVE), STATIONARITY_TOL);

                let bound = check_error_bound(&fom, &rom, &norms, eta.eta)?;
                let excess = if bound.holds {
                    0.0
                } else {
                    (bound.lhs - bound.rhs) / bound.rhs.max(f64::MIN_POSITIVE)
                };
                report.push("error_bound", &fcell, excess, 0.0);
                if let Ok(e) = relative_error(&fom, &rom) {
                    if !e.is_finite() {
                        report.push("relative_error_finite", &fcell, f64::INFINITY, 0.0);
                    }
                }
                residual_norms.push(ours);
            }
            if let [g, pg] = residual_norms[..] {
                let excess = (pg - g - 1e-12 * b.norm()).max(0.0);
                report.push("residual_minimality", &cell, excess / b.norm().max(f64::MIN_POSITIVE), 0.0);
            }
        }
    }
    Ok(())
}

fn mutate(basis: &SpaceTimeBasis<f64>, mutation: Mutation) -> SpaceTimeBasis<f64> {
    let mut out = basis.clone();
    if let Mutation::FlipD { k, j } = mutation {
        for m in &mut out.phi_t {
            if k < m.nrows() && j < m.ncols() {
                m[(k, j)] = -m[(k, j)];
            }
        }
    }
    out
}

/// Tab-separated `check  case  value  tolerance  PASS|FAIL` lines.
pub fn format_table(report: &VerifyReport) -> String {
    let mut out = String::from("check\tcase\tvalue\ttolerance\tstatus\n");
    for c in &report.checks {
        out.push_str(&format!(
            "{}\t{}\t{:.3e}\t{:.1e}\t{}\n",
            c.check,
            c.case,
            c.value,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        ));
    }
    out
}
