//! Error measures, the stability constant, timing and the assembly
//! complexity study.

use crate::banded::BandedLu;
use crate::basis::SpaceTimeBasis;
use crate::error::{check_dim, Error, Result};
use crate::fom::{step_residual_into, Forcing, TimeSteps, Trajectory};
use crate::model::{assemble_system, ProblemKind, ProblemSpec, SpatialSystem};
use crate::rom::{assemble_naive, assemble_with, Flavor};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Default cap on `N_s·N_t` for the iterative stability estimate.
pub const STABILITY_CAP: usize = 200_000;
pub const STABILITY_TOL: f64 = 1e-8;
pub const STABILITY_MAX_ITERS: usize = 500;

/// `‖ũ - u‖ / ‖u‖` over the stacked states.
pub fn relative_error<T: Real>(fom: &Trajectory<T>, rom: &Trajectory<T>) -> Result<T> {
    check_dim("relative error (N_s)", fom.n_s(), rom.n_s())?;
    check_dim("relative error (N_t)", fom.n_t(), rom.n_t())?;
    let denom = fom.states.norm();
    if !(denom > T::zero()) {
        return Err(Error::UndefinedRelativeError);
    }
    Ok((&rom.states - &fom.states).norm() / denom)
}

/// `‖r̂^(k)‖` for every step, with `ũ^(0) = u0`.
pub fn step_residual_norms<T: Real>(
    system: &SpatialSystem<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
    rom: &Trajectory<T>,
) -> Result<Vec<T>> {
    check_dim("residual (N_s)", system.n_s(), rom.n_s())?;
    check_dim("residual (N_t)", steps.len(), rom.n_t())?;
    check_dim("residual (forcing)", steps.len(), forcing.n_t())?;
    let n = system.n_s();
    let mut out = vec![T::zero(); n];
    let mut norms = Vec::with_capacity(steps.len());
    for k in 0..steps.len() {
        let prev = if k == 0 {
            forcing.u0.as_slice()
        } else {
            &rom.states.as_slice()[(k - 1) * n..k * n]
        };
        step_residual_into(
            system,
            steps.dt(k),
            &forcing.f.as_slice()[k * n..(k + 1) * n],
            prev,
            &rom.states.as_slice()[k * n..(k + 1) * n],
            &mut out,
        );
        norms.push(out.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt());
    }
    Ok(norms)
}

/// `√(Σ_k ‖r̂^(k)‖²)` for the uniform steps of `spec`.
pub fn st_residual_norm<T: Real>(
    system: &SpatialSystem<T>,
    spec: &ProblemSpec,
    mu: [T; 2],
    rom: &Trajectory<T>,
) -> Result<T> {
    let steps = TimeSteps::for_spec(spec);
    let forcing = Forcing::from_spec(spec, mu, &steps)?;
    Ok(combine_residuals(&step_residual_norms(system, &steps, &forcing, rom)?))
}

pub fn combine_residuals<T: Real>(norms: &[T]) -> T {
    norms.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    /// `√N_t · ‖(A^st)^{-1}‖`.
    pub eta: f64,
    /// `‖(A^st)^{-1}‖ = 1/σ_min(A^st)`.
    pub inv_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Stability constant for `N_t` uniform steps of size `dt`.
pub fn stability_constant<T: Real>(system: &SpatialSystem<T>, dt: T, n_t: usize) -> Result<StabilityEstimate> {
    stability_constant_with(system, &TimeSteps::uniform(dt, n_t), STABILITY_CAP)
}

/// Inverse power iteration on `(A^st)ᵀ A^st`, applying its inverse through
/// block forward and backward substitution with the factored step matrices.
pub fn stability_constant_with<T: Real>(
    system: &SpatialSystem<T>,
    steps: &TimeSteps<T>,
    cap: usize,
) -> Result<StabilityEstimate> {
    let n = system.n_s();
    let nt = steps.len();
    if nt == 0 {
        return Err(Error::InvalidInput("stability constant needs at least one step".into()));
    }
    if n * nt > cap {
        return Err(Error::OracleCap { size: n * nt, cap });
    }
    let mut factors: Vec<(T, BandedLu<T>)> = Vec::new();
    let mut which = Vec::with_capacity(nt);
    for (k, &dt) in steps.as_slice().iter().enumerate() {
        match factors.iter().position(|(d, _)| *d == dt) {
            Some(p) => which.push(p),
            None => {
                let lu = BandedLu::factor(&system.step_matrix(dt)).map_err(|e| match e {
                    Error::Factorization { column, .. } => Error::Factorization { step: k + 1, column },
                    other => other,
                })?;
                factors.push((dt, lu));
                which.push(factors.len() - 1);
            }
        }
    }

    // z = (A^st)^{-ᵀ} (A^st)^{-1} x, whose dominant eigenvalue is 1/σ_min².
    let apply = |x: &[T], z: &mut [T]| {
        z.copy_from_slice(x);
        for k in 0..nt {
            if k > 0 {
                let (done, rest) = z.split_at_mut(k * n);
                for (a, b) in rest[..n].iter_mut().zip(&done[(k - 1) * n..]) {
                    *a += *b;
                }
            }
            factors[which[k]].1.solve_in_place(&mut z[k * n..(k + 1) * n]);
        }
        for k in (0..nt).rev() {
            if k + 1 < nt {
                let (head, tail) = z.split_at_mut((k + 1) * n);
                for (a, b) in head[k * n..].iter_mut().zip(&tail[..n]) {
                    *a += *b;
                }
            }
            factors[which[k]].1.solve_transpose_in_place(&mut z[k * n..(k + 1) * n]);
        }
    };

    let len = n * nt;
    let mut x: Vec<T> = (0..len).map(|i| T::one() + T::lit(0.01 * (i % 7) as f64)).collect();
    let scale = T::one() / x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
    x.iter_mut().for_each(|v| *v *= scale);
    let mut z = vec![T::zero(); len];
    let mut lambda = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < STABILITY_MAX_ITERS {
        iterations += 1;
        apply(&x, &mut z);
        let rayleigh = x.iter().zip(&z).fold(T::zero(), |a, (&p, &q)| a + p * q).as_f64();
        let norm = z.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
        if !(norm > T::zero()) || !rayleigh.is_finite() {
            return Err(Error::InvalidInput("stability iteration broke down".into()));
        }
        let change = (rayleigh - lambda).abs() / rayleigh.abs();
        lambda = rayleigh;
        let inv = T::one() / norm;
        for (xi, &zi) in x.iter_mut().zip(&z) {
            *xi = zi * inv;
        }
        if change < STABILITY_TOL {
            converged = true;
            break;
        }
    }
    let inv_norm = lambda.sqrt();
    Ok(StabilityEstimate {
        eta: (nt as f64).sqrt() * inv_norm,
        inv_norm,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `max_k ‖e^(k)‖`.
    pub lhs: f64,
    /// `η · max_k ‖r̂^(k)‖`.
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack allowed in the bound comparison.
pub const BOUND_SLACK: f64 = 1e-10;

pub fn check_error_bound<T: Real>(
    fom: &Trajectory<T>,
    rom: &Trajectory<T>,
    residuals: &[T],
    eta: f64,
) -> Result<BoundReport> {
    check_dim("error bound (N_s)", fom.n_s(), rom.n_s())?;
    check_dim("error bound (N_t)", fom.n_t(), rom.n_t())?;
    check_dim("error bound (residuals)", fom.n_t(), residuals.len())?;
    let lhs = (0..fom.n_t())
        .map(|k| (rom.states.column(k) - fom.states.column(k)).norm().as_f64())
        .fold(0.0, f64::max);
    let rmax = residuals.iter().map(|r| r.as_f64()).fold(0.0, f64::max);
    let rhs = eta * rmax;
    Ok(BoundReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + BOUND_SLACK),
    })
}

/// Median wall time in seconds over `repeats` runs after one warm-up run.
pub fn measure<R, F: FnMut() -> R>(mut f: F, repeats: usize) -> Result<f64> {
    if repeats < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 timing repeats, got {repeats}")));
    }
    std::hint::black_box(f());
    let mut times: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(median_sorted(&times))
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One (problem, flavor, μ, n_s, n_t) study cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub problem: ProblemKind,
    pub flavor: Flavor,
    pub mu: [f64; 2],
    pub n_s: usize,
    pub n_t: usize,
    pub relative_error: f64,
    pub st_residual_norm: f64,
    pub fom_time_s: f64,
    pub rom_online_time_s: f64,
    pub speedup: f64,
    pub bound_lhs: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub eta: Option<f64>,
}

impl StudyReport {
    pub const CSV_COLUMNS: [&'static str; 14] = [
        "problem",
        "flavor",
        "mu_1",
        "mu_2",
        "n_s",
        "n_t",
        "relative_error",
        "st_residual_norm",
        "fom_time_s",
        "rom_online_time_s",
        "speedup",
        "bound_lhs",
        "bound_rhs",
        "eta",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let num = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            self.problem.name().to_string(),
            self.flavor.name().to_string(),
            num(self.mu[0]),
            num(self.mu[1]),
            self.n_s.to_string(),
            self.n_t.to_string(),
            num(self.relative_error),
            num(self.st_residual_norm),
            num(self.fom_time_s),
            num(self.rom_online_time_s),
            num(self.speedup),
            opt(self.bound_lhs),
            opt(self.bound_rhs),
            opt(self.eta),
        ]
    }
}

/// Aggregate over a set of reports, per flavor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlavorSummary {
    pub flavor: Flavor,
    pub cells: usize,
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
    pub max_st_residual_norm: f64,
    pub median_speedup: f64,
    pub bound_violations: usize,
}

pub fn summarize(reports: &[StudyReport]) -> Vec<FlavorSummary> {
    Flavor::ALL
        .iter()
        .filter_map(|&flavor| {
            let cells: Vec<&StudyReport> = reports.iter().filter(|r| r.flavor == flavor).collect();
            if cells.is_empty() {
                return None;
            }
            let mut speedups: Vec<f64> = cells.iter().map(|r| r.speedup).collect();
            speedups.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            Some(FlavorSummary {
                flavor,
                cells: cells.len(),
                max_relative_error: cells.iter().map(|r| r.relative_error).fold(0.0, f64::max),
                mean_relative_error: cells.iter().map(|r| r.relative_error).sum::<f64>() / cells.len() as f64,
                max_st_residual_norm: cells.iter().map(|r| r.st_residual_norm).fold(0.0, f64::max),
                median_speedup: median_sorted(&speedups),
                bound_violations: cells
                    .iter()
                    .filter(|r| matches!((r.bound_lhs, r.bound_rhs), (Some(l), Some(h)) if l > h * (1.0 + BOUND_SLACK)))
                    .count(),
            })
        })
        .collect()
}

/// Scaling grid for the assembly complexity study.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityConfig {
    pub kind: ProblemKind,
    /// Mesh intervals per axis, one entry per size (`N_s = (n-1)²`).
    pub mesh_sizes: Vec<usize>,
    pub n_t_steps: usize,
    pub n_s: usize,
    pub n_t: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Cap on `N_s·N_t` for the naive path.
    pub naive_cap: usize,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::ConvDiff2D,
            mesh_sizes: vec![21, 31, 41, 51],
            n_t_steps: 20,
            n_s: 4,
            n_t: 2,
            repeats: 5,
            seed: 0,
            naive_cap: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub flavor: Flavor,
    pub big_n_s: usize,
    pub big_n_t: usize,
    pub n_s: usize,
    pub n_t: usize,
    pub naive_time: f64,
    pub block_time: f64,
}

impl ComplexityRow {
    pub const CSV_COLUMNS: [&'static str; 7] = ["flavor", "N_s", "N_t", "n_s", "n_t", "naive_time", "block_time"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.flavor.name().to_string(),
            self.big_n_s.to_string(),
            self.big_n_t.to_string(),
            self.n_s.to_string(),
            self.n_t.to_string(),
            format!("{:.16e}", self.naive_time),
            format!("{:.16e}", self.block_time),
        ]
    }
}

/// Matrix with orthonormal columns from a seeded uniform draw.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() - 0.5);
    raw.qr().q()
}

/// Random space–time basis with the given shape; the assembly cost does not
/// depend on the basis values.
pub fn random_basis(big_n_s: usize, big_n_t: usize, n_s: usize, n_t: usize, seed: u64) -> SpaceTimeBasis<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi_s = random_orthonormal(big_n_s, n_s, &mut rng);
    let phi_t = (0..n_s).map(|_| random_orthonormal(big_n_t, n_t, &mut rng)).collect();
    SpaceTimeBasis {
        phi_s,
        phi_t,
        spatial_singular_values: vec![1.0; n_s],
        n_mu: n_t,
    }
}

/// Times block and naive assembly over the scaling grid, both flavors.
pub fn complexity_study(cfg: &ComplexityConfig) -> Result<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    let domain = cfg.kind.default_mu_domain();
    let mu = [
        0.5 * (domain[0][0] + domain[0][1]),
        0.5 * (domain[1][0] + domain[1][1]),
    ];
    for (idx, &m) in cfg.mesh_sizes.iter().enumerate() {
        let spec = ProblemSpec::new(cfg.kind, m, m, cfg.n_t_steps)?;
        let system = assemble_system(&spec, mu)?;
        let steps = TimeSteps::for_spec(&spec);
        let forcing = Forcing::from_spec(&spec, mu, &steps)?;
        let basis = random_basis(spec.n_s(), cfg.n_t_steps, cfg.n_s, cfg.n_t, cfg.seed.wrapping_add(idx as u64));
        for flavor in Flavor::ALL {
            let block = assemble_with(flavor, &system, &basis, &steps, &forcing)?;
            let naive = assemble_naive(flavor, &system, &basis, &steps, &forcing, cfg.naive_cap)?;
            let diff = (&block.a_hat - &naive.a_hat).norm();
            if diff > 1e-8 * naive.a_hat.norm() {
                return Err(Error::InvalidInput(format!(
                    "block and naive {flavor} operators differ by {diff:e} at N_s = {}",
                    spec.n_s()
                )));
            }
            let block_time = measure(|| assemble_with(flavor, &system, &basis, &steps, &forcing), cfg.repeats)?;
            let naive_time = measure(
                || assemble_naive(flavor, &system, &basis, &steps, &forcing, cfg.naive_cap),
                cfg.repeats,
            )?;
            rows.push(ComplexityRow {
                flavor,
                big_n_s: spec.n_s(),
                big_n_t: cfg.n_t_steps,
                n_s: cfg.n_s,
                n_t: cfg.n_t,
                naive_time,
                block_time,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput("slope fit needs at least two matching points".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("slope fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Dense space–time residual `f^st + u0^st - A^st ũ^st`, for verification.
pub fn dense_residual<T: Real>(
    a_st: &DMatrix<T>,
    f_st: &DVector<T>,
    u0_st: &DVector<T>,
    rom: &Trajectory<T>,
) -> Result<DVector<T>> {
    let u = rom.stacked();
    check_dim("dense residual", a_st.ncols(), u.len())?;
    Ok(f_st + u0_st - a_st * u)
}
