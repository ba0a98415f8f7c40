//! Full-order model: backward Euler time marching, step residuals and the
//! dense space–time system used as a verification oracle.

use crate::banded::BandedLu;
use crate::error::{check_dim, Error, Result};
use crate::model::{initial_state, ProblemSpec, SourceField, SpatialSystem};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};

/// Default cap on `N_s·N_t` for routines that materialize dense space–time
/// matrices.
pub const DEFAULT_ORACLE_CAP: usize = 5000;

/// Step sizes `Δt_1 … Δt_{N_t}`; `t_k` is the running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSteps<T> {
    steps: Vec<T>,
}

impl<T: Real> TimeSteps<T> {
    pub fn uniform(dt: T, n_t: usize) -> Self {
        Self {
            steps: vec![dt; n_t],
        }
    }

    pub fn from_steps(steps: Vec<T>) -> Result<Self> {
        if steps.is_empty() || steps.iter().any(|&d| !(d > T::zero())) {
            return Err(Error::InvalidInput("time steps must be positive and nonempty".into()));
        }
        Ok(Self { steps })
    }

    pub fn for_spec(spec: &ProblemSpec) -> Self {
        Self::uniform(T::lit(spec.dt()), spec.n_t_steps)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `Δt_k` for 0-based step `k` (the step producing `u^(k+1)`).
    pub fn dt(&self, k: usize) -> T {
        self.steps[k]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.steps
    }

    /// Single value when every step is identical.
    pub fn uniform_step(&self) -> Option<T> {
        let first = self.steps[0];
        self.steps.iter().all(|&d| d == first).then_some(first)
    }

    /// `t_k` for 1-based `k` (`t_0 = 0`).
    pub fn time(&self, k: usize) -> T {
        self.steps[..k].iter().fold(T::zero(), |acc, &d| acc + d)
    }
}

/// Forcings of one parameter instance: `u0` and the columns `f^(k)`,
/// `k = 1..N_t`, evaluated at the right endpoint `t_k`.
#[derive(Debug, Clone)]
pub struct Forcing<T> {
    pub u0: DVector<T>,
    pub f: DMatrix<T>,
    /// True when every `f^(k)` vanishes identically.
    pub source_free: bool,
    /// `f^(k) = amplitude[k]·profile` when the source has that form.
    pub rank_one: Option<RankOneSource<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSource<T> {
    pub profile: DVector<T>,
    pub amplitude: Vec<T>,
}

impl<T: Real> Forcing<T> {
    pub fn from_spec(spec: &ProblemSpec, mu: [T; 2], steps: &TimeSteps<T>) -> Result<Self> {
        let source = SourceField::new(spec, mu)?;
        let n_s = spec.n_s();
        let mut f = DMatrix::zeros(n_s, steps.len());
        let mut t = T::zero();
        if !source.is_zero() {
            for k in 0..steps.len() {
                t += steps.dt(k);
                source.eval_into(t.as_f64(), f.column_mut(k).as_mut_slice());
            }
        }
        let rank_one = source.rank_one().map(|(profile, a)| {
            let mut t = T::zero();
            RankOneSource {
                profile: DVector::from_column_slice(profile),
                amplitude: (0..steps.len())
                    .map(|k| {
                        t += steps.dt(k);
                        T::lit(a(t.as_f64()))
                    })
                    .collect(),
            }
        });
        Ok(Self {
            u0: initial_state(spec, mu),
            f,
            source_free: source.is_zero(),
            rank_one,
        })
    }

    pub fn n_s(&self) -> usize {
        self.u0.len()
    }

    pub fn n_t(&self) -> usize {
        self.f.ncols()
    }
}

/// Solution `u^(1) … u^(N_t)` of one full-order run. The initial state is
/// kept separately and is not a column of `states`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub states: DMatrix<T>,
    pub u0: DVector<T>,
    pub dt: T,
    pub mu: [T; 2],
}

impl<T: Real> Trajectory<T> {
    pub fn n_s(&self) -> usize {
        self.states.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.states.ncols()
    }

    /// Column-stacked space–time vector `[u^(1); …; u^(N_t)]`.
    pub fn stacked(&self) -> DVector<T> {
        DVector::from_column_slice(self.states.as_slice())
    }
}

/// Backward Euler with a factorization of `I - Δt·A` reused across steps.
pub fn solve_fom<T: Real>(system: &SpatialSystem<T>, spec: &ProblemSpec) -> Result<Trajectory<T>> {
    check_dim("solve_fom (N_s)", spec.n_s(), system.n_s())?;
    let steps = TimeSteps::for_spec(spec);
    let forcing = Forcing::from_spec(spec, system.mu, &steps)?;
    march(system, &steps, &forcing)
}

/// Time marching for arbitrary step sizes; one factorization per distinct
/// step size.
pub fn march<T: Real>(
    system: &SpatialSystem<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
) -> Result<Trajectory<T>> {
    let n_s = system.n_s();
    check_dim("march (forcing N_s)", n_s, forcing.n_s())?;
    check_dim("march (forcing N_t)", steps.len(), forcing.n_t())?;
    let mut factors: Vec<(T, BandedLu<T>)> = Vec::new();
    let mut states = DMatrix::zeros(n_s, steps.len());
    let mut prev = forcing.u0.clone();
    for k in 0..steps.len() {
        let dt = steps.dt(k);
        let pos = match factors.iter().position(|(d, _)| *d == dt) {
            Some(p) => p,
            None => {
                let lu = BandedLu::factor(&system.step_matrix(dt)).map_err(|e| match e {
                    Error::Factorization { column, .. } => Error::Factorization { step: k + 1, column },
                    other => other,
                })?;
                factors.push((dt, lu));
                factors.len() - 1
            }
        };
        let mut col = states.column_mut(k);
        let rhs = col.as_mut_slice();
        if forcing.source_free {
            rhs.copy_from_slice(prev.as_slice());
        } else {
            for ((r, &p), &f) in rhs.iter_mut().zip(prev.iter()).zip(forcing.f.column(k).iter()) {
                *r = p + dt * f;
            }
        }
        factors[pos].1.solve_in_place(rhs);
        prev.copy_from(&col);
    }
    Ok(Trajectory {
        states,
        u0: forcing.u0.clone(),
        dt: steps.dt(0),
        mu: system.mu,
    })
}

/// `Δt·f^(k) + u_prev − (I − Δt·A)·u_cur`.
pub fn step_residual<T: Real>(
    system: &SpatialSystem<T>,
    dt: T,
    f_k: &DVector<T>,
    u_prev: &DVector<T>,
    u_cur: &DVector<T>,
) -> Result<DVector<T>> {
    let n = system.n_s();
    check_dim("step_residual (f_k)", n, f_k.len())?;
    check_dim("step_residual (u_prev)", n, u_prev.len())?;
    check_dim("step_residual (u_cur)", n, u_cur.len())?;
    let mut out = DVector::zeros(n);
    step_residual_into(system, dt, f_k.as_slice(), u_prev.as_slice(), u_cur.as_slice(), out.as_mut_slice());
    Ok(out)
}

pub(crate) fn step_residual_into<T: Real>(
    system: &SpatialSystem<T>,
    dt: T,
    f_k: &[T],
    u_prev: &[T],
    u_cur: &[T],
    out: &mut [T],
) {
    system.a_matrix.mul_vec_into(u_cur, out);
    for i in 0..out.len() {
        out[i] = dt * f_k[i] + u_prev[i] - u_cur[i] + dt * out[i];
    }
}

/// Dense `A^st`, `f^st`, `u0^st`.
#[derive(Debug, Clone)]
pub struct SpaceTimeDense<T> {
    pub a_st: DMatrix<T>,
    pub f_st: DVector<T>,
    pub u0_st: DVector<T>,
}

/// Materializes the block-bidiagonal space–time system for a uniform step.
pub fn space_time_dense<T: Real>(
    system: &SpatialSystem<T>,
    spec: &ProblemSpec,
    mu: [T; 2],
    cap: usize,
) -> Result<SpaceTimeDense<T>> {
    let steps = TimeSteps::for_spec(spec);
    let forcing = Forcing::from_spec(spec, mu, &steps)?;
    space_time_dense_with(system, &steps, &forcing, cap)
}

pub fn space_time_dense_with<T: Real>(
    system: &SpatialSystem<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
    cap: usize,
) -> Result<SpaceTimeDense<T>> {
    let n_s = system.n_s();
    let n_t = steps.len();
    let size = n_s * n_t;
    if size > cap {
        return Err(Error::OracleCap { size, cap });
    }
    check_dim("space_time_dense (forcing N_t)", n_t, forcing.n_t())?;
    let a = system.a_matrix.to_dense();
    let mut a_st = DMatrix::zeros(size, size);
    let mut f_st = DVector::zeros(size);
    let mut u0_st = DVector::zeros(size);
    for k in 0..n_t {
        let dt = steps.dt(k);
        let off = k * n_s;
        for r in 0..n_s {
            for c in 0..n_s {
                let id = if r == c { T::one() } else { T::zero() };
                a_st[(off + r, off + c)] = id - dt * a[(r, c)];
            }
            if k > 0 {
                a_st[(off + r, off - n_s + r)] = -T::one();
            }
            f_st[off + r] = dt * forcing.f[(r, k)];
        }
    }
    u0_st.rows_mut(0, n_s).copy_from(&forcing.u0);
    Ok(SpaceTimeDense { a_st, f_st, u0_st })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_system, ProblemKind};
    use crate::sparse::CsrMatrix;

    fn tiny(kind: ProblemKind) -> (ProblemSpec, SpatialSystem<f64>) {
        let spec = ProblemSpec::new(kind, 4, 4, 4).unwrap();
        let mu = match kind {
            ProblemKind::Diffusion2D => [-0.7, -0.7],
            ProblemKind::ConvDiff2D => [0.04, 0.34],
            ProblemKind::ConvDiffSource2D => [0.2, 0.02],
        };
        let sys = assemble_system(&spec, mu).unwrap();
        (spec, sys)
    }

    #[test]
    fn zero_operator_keeps_initial_state() {
        let n = 5;
        let sys = SpatialSystem::new(CsrMatrix::<f64>::zeros(n, n), [0.0, 0.0]);
        let v = DVector::from_fn(n, |i, _| i as f64 - 1.5);
        let forcing = Forcing {
            u0: v.clone(),
            f: DMatrix::zeros(n, 6),
            source_free: false,
            rank_one: None,
        };
        let traj = march(&sys, &TimeSteps::uniform(0.1, 6), &forcing).unwrap();
        for k in 0..6 {
            assert_eq!(traj.states.column(k).clone_owned(), v);
        }
    }

    #[test]
    fn marching_matches_monolithic_solve() {
        for kind in ProblemKind::ALL {
            let (spec, sys) = tiny(kind);
            let traj = solve_fom(&sys, &spec).unwrap();
            let st = space_time_dense(&sys, &spec, sys.mu, DEFAULT_ORACLE_CAP).unwrap();
            let x = st.a_st.clone().lu().solve(&(&st.f_st + &st.u0_st)).unwrap();
            let diff = (x - traj.stacked()).amax();
            assert!(diff <= 1e-10 * (1.0 + traj.states.amax()), "{kind}: {diff}");
        }
    }

    #[test]
    fn dense_layout() {
        let (mut spec, sys) = tiny(ProblemKind::ConvDiff2D);
        spec.n_t_steps = 1;
        let st = space_time_dense(&sys, &spec, sys.mu, DEFAULT_ORACLE_CAP).unwrap();
        let e = sys.step_matrix(spec.dt()).to_dense();
        assert_eq!(st.a_st, e);

        spec.n_t_steps = 3;
        let st = space_time_dense(&sys, &spec, sys.mu, DEFAULT_ORACLE_CAP).unwrap();
        let n = sys.n_s();
        let e = sys.step_matrix(spec.dt()).to_dense();
        let nnz_e = e.iter().filter(|v| **v != 0.0).count();
        let nnz = st.a_st.iter().filter(|v| **v != 0.0).count();
        assert_eq!(nnz, 2 * n + 3 * nnz_e);
        for k in 0..3 {
            for j in 0..3 {
                let block = st.a_st.view((k * n, j * n), (n, n)).clone_owned();
                if j == k {
                    assert_eq!(block, e);
                } else if j + 1 == k {
                    assert_eq!(block, -DMatrix::<f64>::identity(n, n));
                } else {
                    assert_eq!(block.amax(), 0.0);
                }
            }
        }
        assert_eq!(st.u0_st.rows(0, n).clone_owned(), initial_state(&spec, sys.mu));
        assert_eq!(st.u0_st.rows(n, 2 * n).amax(), 0.0);
    }

    #[test]
    fn oracle_cap_enforced() {
        let spec = ProblemSpec::new(ProblemKind::Diffusion2D, 30, 30, 10).unwrap();
        let sys = assemble_system(&spec, [-0.7, -0.7]).unwrap();
        assert!(matches!(
            space_time_dense(&sys, &spec, sys.mu, DEFAULT_ORACLE_CAP),
            Err(Error::OracleCap { size: 8410, cap: 5000 })
        ));
    }

    #[test]
    fn residual_of_exact_steps_vanishes_and_is_linear() {
        let (spec, sys) = tiny(ProblemKind::Diffusion2D);
        let traj = solve_fom(&sys, &spec).unwrap();
        let steps = TimeSteps::for_spec(&spec);
        let forcing = Forcing::from_spec(&spec, sys.mu, &steps).unwrap();
        let dt = spec.dt();
        let mut prev = traj.u0.clone();
        for k in 0..spec.n_t_steps {
            let cur = traj.states.column(k).clone_owned();
            let f = forcing.f.column(k).clone_owned();
            let r = step_residual(&sys, dt, &f, &prev, &cur).unwrap();
            assert!(r.amax() <= 1e-10 * (1.0 + cur.amax()));

            let eps = 1e-3;
            let mut bumped = cur.clone();
            bumped[0] += eps;
            let rb = step_residual(&sys, dt, &f, &prev, &bumped).unwrap();
            let mut e1 = DVector::zeros(cur.len());
            e1[0] = eps;
            let expected = -sys.step_matrix(dt).mul_vec(&e1).unwrap();
            assert!((rb - r - expected).amax() < 1e-12);
            prev = cur;
        }
        assert!(step_residual(&sys, dt, &DVector::zeros(3), &prev, &prev).is_err());
    }

    #[test]
    fn reused_factorization_is_bit_identical_to_refactoring() {
        let (spec, sys) = tiny(ProblemKind::ConvDiffSource2D);
        let traj = solve_fom(&sys, &spec).unwrap();
        let steps = TimeSteps::for_spec(&spec);
        let forcing = Forcing::from_spec(&spec, sys.mu, &steps).unwrap();
        let dt = spec.dt();
        let mut prev = forcing.u0.clone();
        for k in 0..spec.n_t_steps {
            let lu = BandedLu::factor(&sys.step_matrix(dt)).unwrap();
            let mut rhs: Vec<f64> = prev.iter().zip(forcing.f.column(k).iter()).map(|(p, f)| p + dt * f).collect();
            lu.solve_in_place(&mut rhs);
            let col = DVector::from_vec(rhs);
            assert_eq!(col, traj.states.column(k).clone_owned());
            prev = col;
        }
    }

    #[test]
    fn singular_step_matrix_reports_step() {
        // A = I/dt makes I - dt·A vanish.
        let sys = SpatialSystem::new(CsrMatrix::<f64>::identity(3).scale(10.0), [0.0, 0.0]);
        let forcing = Forcing {
            u0: DVector::zeros(3),
            f: DMatrix::zeros(3, 2),
            source_free: true,
            rank_one: None,
        };
        let steps = TimeSteps::from_steps(vec![0.05, 0.1]).unwrap();
        match march(&sys, &steps, &forcing) {
            Err(Error::Factorization { step, .. }) => assert_eq!(step, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonuniform_steps_follow_running_time() {
        let steps = TimeSteps::<f64>::from_steps(vec![0.1, 0.2, 0.3]).unwrap();
        assert!((steps.time(3) - 0.6).abs() < 1e-15);
        assert_eq!(steps.uniform_step(), None);
        assert_eq!(TimeSteps::uniform(0.5, 3).uniform_step(), Some(0.5));
        assert!(TimeSteps::from_steps(vec![0.1, -0.1]).is_err());
    }
}
