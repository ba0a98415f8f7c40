//! Benchmark problems: finite-difference operators, sources and initial
//! states on the unit square with homogeneous Dirichlet boundaries.
//!
//! Unknowns live on interior nodes `(ix, iy)` at `((ix+1)·hx, (iy+1)·hy)`,
//! ordered row-major with `ix` fastest.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::{CsrMatrix, DiagonalMatrix};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The three benchmark PDEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    /// Diffusion with a parameterized reaction term and source.
    #[serde(rename = "diffusion2d", alias = "Diffusion2D")]
    Diffusion2D,
    /// Convection-diffusion, no source, bump initial state.
    #[serde(rename = "convdiff2d", alias = "ConvDiff2D")]
    ConvDiff2D,
    /// Anisotropic convection-diffusion driven by a moving Gaussian source.
    #[serde(rename = "convdiff_source2d", alias = "ConvDiffSource2D")]
    ConvDiffSource2D,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [
        ProblemKind::Diffusion2D,
        ProblemKind::ConvDiff2D,
        ProblemKind::ConvDiffSource2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Diffusion2D => "diffusion2d",
            ProblemKind::ConvDiff2D => "convdiff2d",
            ProblemKind::ConvDiffSource2D => "convdiff_source2d",
        }
    }

    /// Parameter rectangle `[[lo1, hi1], [lo2, hi2]]`.
    pub fn default_mu_domain(self) -> [[f64; 2]; 2] {
        match self {
            ProblemKind::Diffusion2D => [[-1.7, -0.2], [-1.7, -0.2]],
            ProblemKind::ConvDiff2D => [[0.01, 0.07], [0.31, 0.37]],
            ProblemKind::ConvDiffSource2D => [[0.195, 0.205], [0.018, 0.022]],
        }
    }

    /// The four corner parameters of the training rectangle.
    pub fn training_parameters(self) -> [[f64; 2]; 4] {
        match self {
            ProblemKind::Diffusion2D => [[-0.9, -0.9], [-0.9, -0.5], [-0.5, -0.9], [-0.5, -0.5]],
            ProblemKind::ConvDiff2D => [[0.03, 0.33], [0.03, 0.35], [0.05, 0.33], [0.05, 0.35]],
            ProblemKind::ConvDiffSource2D => [[0.195, 0.018], [0.195, 0.022], [0.205, 0.018], [0.205, 0.022]],
        }
    }

    /// Centre of the training rectangle, the default prediction target.
    pub fn target_parameter(self) -> [f64; 2] {
        match self {
            ProblemKind::Diffusion2D => [-0.7, -0.7],
            ProblemKind::ConvDiff2D => [0.04, 0.34],
            ProblemKind::ConvDiffSource2D => [0.2, 0.02],
        }
    }

    pub fn default_t_final(self) -> f64 {
        match self {
            ProblemKind::ConvDiff2D => 1.0,
            _ => 2.0,
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidInput(format!("unknown problem kind `{s}`")))
    }
}

/// Uniform mesh of the unit square. `nx`, `ny` count mesh intervals; the
/// unknowns are the `(nx-1)·(ny-1)` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 interior points per axis (nx = {nx}, ny = {ny})"
            )));
        }
        Ok(Self { nx, ny })
    }

    pub fn interior_x(&self) -> usize {
        self.nx - 1
    }

    pub fn interior_y(&self) -> usize {
        self.ny - 1
    }

    /// Spatial unknown count `N_s`.
    pub fn n_nodes(&self) -> usize {
        self.interior_x() * self.interior_y()
    }

    pub fn hx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.interior_x() + ix
    }

    #[inline]
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % self.interior_x(), idx / self.interior_x())
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix + 1) as f64 * self.hx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy + 1) as f64 * self.hy()
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (ix, iy) = self.node(idx);
        (self.x(ix), self.y(iy))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ProblemSpecRepr {
    kind: ProblemKind,
    nx: usize,
    ny: usize,
    #[serde(default)]
    t_final: Option<f64>,
    nt: usize,
    #[serde(default)]
    mu: Option<[[f64; 2]; 2]>,
}

/// A benchmark problem on a concrete discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpecRepr", into = "ProblemSpecRepr")]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub grid: Grid2D,
    pub t_final: f64,
    pub n_t_steps: usize,
    pub mu_domain: [[f64; 2]; 2],
}

impl TryFrom<ProblemSpecRepr> for ProblemSpec {
    type Error = Error;

    fn try_from(r: ProblemSpecRepr) -> Result<Self> {
        let mut spec = ProblemSpec::new(r.kind, r.nx, r.ny, r.nt)?;
        if let Some(t) = r.t_final {
            spec = spec.with_t_final(t)?;
        }
        if let Some(mu) = r.mu {
            spec.mu_domain = mu;
        }
        Ok(spec)
    }
}

impl From<ProblemSpec> for ProblemSpecRepr {
    fn from(s: ProblemSpec) -> Self {
        Self {
            kind: s.kind,
            nx: s.grid.nx,
            ny: s.grid.ny,
            t_final: Some(s.t_final),
            nt: s.n_t_steps,
            mu: Some(s.mu_domain),
        }
    }
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, nx: usize, ny: usize, nt: usize) -> Result<Self> {
        if nt == 0 {
            return Err(Error::InvalidInput("nt must be positive".into()));
        }
        Ok(Self {
            kind,
            grid: Grid2D::new(nx, ny)?,
            t_final: kind.default_t_final(),
            n_t_steps: nt,
            mu_domain: kind.default_mu_domain(),
        })
    }

    /// The 70×70 mesh, 50-step configuration.
    pub fn full_size(kind: ProblemKind) -> Self {
        Self::new(kind, 70, 70, 50).expect("valid full-size configuration")
    }

    pub fn with_t_final(mut self, t_final: f64) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidInput(format!("t_final must be positive, got {t_final}")));
        }
        self.t_final = t_final;
        Ok(self)
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_t_steps as f64
    }

    pub fn n_s(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }
}

/// The spatial operator `A(μ)` with `B(μ) = I`.
#[derive(Debug, Clone)]
pub struct SpatialSystem<T> {
    pub a_matrix: CsrMatrix<T>,
    pub mu: [T; 2],
    pub band_width: usize,
    /// Diagonal layout of `A` when it has few occupied diagonals.
    pub a_diagonals: Option<DiagonalMatrix<T>>,
}

/// Stencil operators beyond this many diagonals stay CSR only.
const MAX_STORED_DIAGONALS: usize = 9;

impl<T: Real> SpatialSystem<T> {
    pub fn new(a_matrix: CsrMatrix<T>, mu: [T; 2]) -> Self {
        Self {
            band_width: a_matrix.band_width(),
            a_diagonals: DiagonalMatrix::from_csr(&a_matrix, MAX_STORED_DIAGONALS),
            a_matrix,
            mu,
        }
    }

    /// `A X` for a dense block of columns.
    pub fn apply(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        match &self.a_diagonals {
            Some(d) => d.mul_dense(x),
            None => self.a_matrix.mul_dense(x),
        }
    }

    pub fn n_s(&self) -> usize {
        self.a_matrix.nrows()
    }

    /// `I - dt·A`.
    pub fn step_matrix(&self, dt: T) -> CsrMatrix<T> {
        self.a_matrix.shifted_identity(T::one(), -dt)
    }
}

fn check_mu(mu: [f64; 2]) -> Result<()> {
    if mu.iter().all(|m| m.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite parameter {mu:?}")))
    }
}

fn reaction_coefficient(grid: &Grid2D, mu: [f64; 2]) -> Result<Vec<f64>> {
    (0..grid.n_nodes())
        .map(|idx| {
            let (x, y) = grid.coords(idx);
            let dist = ((x - mu[0]).powi(2) + (y - mu[1]).powi(2)).sqrt();
            if dist < 1e-12 {
                Err(Error::SingularCoefficient { x, y })
            } else {
                Ok(1.0 / dist)
            }
        })
        .collect()
}

/// Assembles `A(μ)` for the problem.
pub fn assemble_system<T: Real>(spec: &ProblemSpec, mu: [T; 2]) -> Result<SpatialSystem<T>> {
    let mu64 = [mu[0].as_f64(), mu[1].as_f64()];
    check_mu(mu64)?;
    let g = &spec.grid;
    let (mx, my) = (g.interior_x(), g.interior_y());
    let (hx, hy) = (g.hx(), g.hy());
    let (lx, ly) = (1.0 / (hx * hx), 1.0 / (hy * hy));

    // Coefficients: diffusion scale, backward-difference convection speeds (x, y).
    let (diff, cx, cy) = match spec.kind {
        ProblemKind::Diffusion2D => (1.0, 0.0, 0.0),
        ProblemKind::ConvDiff2D => (mu64[1], mu64[0], mu64[0]),
        ProblemKind::ConvDiffSource2D => (mu64[1], 0.1 * mu64[0], mu64[0]),
    };
    let reaction = match spec.kind {
        ProblemKind::Diffusion2D => Some(reaction_coefficient(g, mu64)?),
        _ => None,
    };

    let mut triplets = Vec::with_capacity(5 * g.n_nodes());
    for iy in 0..my {
        for ix in 0..mx {
            let row = g.index(ix, iy);
            let mut center = -2.0 * diff * (lx + ly) - cx / hx - cy / hy;
            if let Some(c) = &reaction {
                center -= c[row];
            }
            triplets.push((row, row, T::lit(center)));
            if ix > 0 {
                triplets.push((row, g.index(ix - 1, iy), T::lit(diff * lx + cx / hx)));
            }
            if ix + 1 < mx {
                triplets.push((row, g.index(ix + 1, iy), T::lit(diff * lx)));
            }
            if iy > 0 {
                triplets.push((row, g.index(ix, iy - 1), T::lit(diff * ly + cy / hy)));
            }
            if iy + 1 < my {
                triplets.push((row, g.index(ix, iy + 1), T::lit(diff * ly)));
            }
        }
    }
    let n = g.n_nodes();
    Ok(SpatialSystem::new(CsrMatrix::from_triplets(n, n, &triplets), mu))
}

/// Source evaluator for one `(spec, μ)`.
///
/// Every source in the benchmark set is a product of a time factor and
/// per-axis spatial factors, so a step costs `N_s` multiplications.
#[derive(Debug, Clone)]
pub struct SourceField<T> {
    grid: Grid2D,
    form: SourceForm<T>,
}

#[derive(Debug, Clone)]
enum SourceForm<T> {
    Zero,
    /// `profile · sin(2πt)`.
    Oscillating { profile: Vec<T> },
    /// `1e5 · gx(x, t) · gy(y)`, a Gaussian whose x-centre moves in time.
    MovingGaussian { gy: Vec<T> },
}

impl<T: Real> SourceField<T> {
    pub fn new(spec: &ProblemSpec, mu: [T; 2]) -> Result<Self> {
        let mu64 = [mu[0].as_f64(), mu[1].as_f64()];
        check_mu(mu64)?;
        let g = spec.grid;
        let form = match spec.kind {
            ProblemKind::Diffusion2D => SourceForm::Oscillating {
                profile: reaction_coefficient(&g, mu64)?
                    .into_iter()
                    .map(T::lit)
                    .collect(),
            },
            ProblemKind::ConvDiff2D => SourceForm::Zero,
            ProblemKind::ConvDiffSource2D => SourceForm::MovingGaussian {
                gy: (0..g.interior_y())
                    .map(|iy| T::lit((-(g.y(iy) / 0.05).powi(2)).exp()))
                    .collect(),
            },
        };
        Ok(Self { grid: g, form })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, SourceForm::Zero)
    }

    /// `(g, a)` with `f(t) = a(t)·g`, when the source factors that way.
    pub fn rank_one(&self) -> Option<(&[T], fn(f64) -> f64)> {
        match &self.form {
            SourceForm::Oscillating { profile } => Some((profile, |t| (2.0 * PI * t).sin())),
            _ => None,
        }
    }

    /// Writes `f(t)` into `out` (length `N_s`).
    pub fn eval_into(&self, t: f64, out: &mut [T]) {
        match &self.form {
            SourceForm::Zero => out.iter_mut().for_each(|v| *v = T::zero()),
            SourceForm::Oscillating { profile } => {
                let s = T::lit((2.0 * PI * t).sin());
                for (o, &p) in out.iter_mut().zip(profile) {
                    *o = p * s;
                }
            }
            SourceForm::MovingGaussian { gy } => {
                let mx = self.grid.interior_x();
                let shift = 0.5 - 0.2 * (2.0 * PI * t).sin();
                let gx: Vec<T> = (0..mx)
                    .map(|ix| T::lit(1e5 * (-((self.grid.x(ix) - shift) / 0.1).powi(2)).exp()))
                    .collect();
                for (iy, &wy) in gy.iter().enumerate() {
                    let row = &mut out[iy * mx..(iy + 1) * mx];
                    for (o, &wx) in row.iter_mut().zip(&gx) {
                        *o = wx * wy;
                    }
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> DVector<T> {
        let mut v = DVector::zeros(self.grid.n_nodes());
        self.eval_into(t, v.as_mut_slice());
        v
    }
}

/// `f(t; μ)` at the interior nodes.
pub fn source_vector<T: Real>(spec: &ProblemSpec, mu: [T; 2], t: f64) -> Result<DVector<T>> {
    if !(0.0..=spec.t_final * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::InvalidInput(format!(
            "time {t} outside [0, {}]",
            spec.t_final
        )));
    }
    Ok(SourceField::new(spec, mu)?.eval(t))
}

/// `u(x, y, 0; μ)` at the interior nodes.
pub fn initial_state<T: Real>(spec: &ProblemSpec, _mu: [T; 2]) -> DVector<T> {
    let g = &spec.grid;
    match spec.kind {
        ProblemKind::Diffusion2D | ProblemKind::ConvDiffSource2D => DVector::zeros(g.n_nodes()),
        ProblemKind::ConvDiff2D => DVector::from_fn(g.n_nodes(), |idx, _| {
            let (x, y) = g.coords(idx);
            if x <= 0.5 && y <= 0.5 {
                T::lit(100.0 * (2.0 * PI * x).sin().powi(3) * (2.0 * PI * y).sin().powi(3))
            } else {
                T::zero()
            }
        }),
    }
}
