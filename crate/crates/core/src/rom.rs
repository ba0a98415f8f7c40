//! Reduced space–time operators and their solution.
//!
//! Block assembly works entirely in terms of `Φ_s`, `A Φ_s` and the
//! diagonals `D_k^j`; neither `Φ_st` nor `A^st` is formed. The naive path
//! materializes both and exists for the complexity comparison and as a
//! cross-check.

use crate::basis::{dense_space_time_basis, SpaceTimeBasis};
use crate::error::{check_dim, Error, Result};
use crate::fom::{Forcing, TimeSteps, Trajectory};
use crate::model::{ProblemSpec, SpatialSystem};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// 1-norm condition number above which the reduced system is rejected.
pub const MAX_REDUCED_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "galerkin")]
    Galerkin,
    #[serde(rename = "pg")]
    PetrovGalerkin,
}

impl Flavor {
    pub const ALL: [Flavor; 2] = [Flavor::Galerkin, Flavor::PetrovGalerkin];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Galerkin => "galerkin",
            Flavor::PetrovGalerkin => "pg",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "galerkin" | "g" => Ok(Flavor::Galerkin),
            "pg" | "petrov-galerkin" | "lspg" => Ok(Flavor::PetrovGalerkin),
            other => Err(Error::InvalidInput(format!("unknown flavor '{other}'"))),
        }
    }
}

/// `Â x̂ = f̂ + û0`, with `x̂` stored j-major (`x̂[i + n_s·j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem<T> {
    pub flavor: Flavor,
    pub a_hat: DMatrix<T>,
    pub f_hat: DVector<T>,
    pub u0_hat: DVector<T>,
    pub n_s: usize,
    pub n_t: usize,
}

impl<T: Real> ReducedSystem<T> {
    pub fn dim(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn rhs(&self) -> DVector<T> {
        &self.f_hat + &self.u0_hat
    }
}

/// Reduced coordinates `x̂` of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RomSolution<T> {
    pub flavor: Flavor,
    pub coeffs: DVector<T>,
    pub n_s: usize,
    pub n_t: usize,
}

fn check_inputs<T: Real>(
    system: &SpatialSystem<T>,
    basis: &SpaceTimeBasis<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
) -> Result<()> {
    check_dim("reduced assembly (N_s)", system.n_s(), basis.big_n_s())?;
    check_dim("reduced assembly (N_t)", steps.len(), basis.big_n_t())?;
    check_dim("reduced assembly (forcing N_s)", system.n_s(), forcing.n_s())?;
    check_dim("reduced assembly (forcing N_t)", steps.len(), forcing.n_t())
}

/// Block assembly for the uniform steps of `spec`.
pub fn assemble<T: Real>(
    flavor: Flavor,
    system: &SpatialSystem<T>,
    basis: &SpaceTimeBasis<T>,
    spec: &ProblemSpec,
) -> Result<ReducedSystem<T>> {
    let steps = TimeSteps::for_spec(spec);
    let forcing = Forcing::from_spec(spec, system.mu, &steps)?;
    assemble_with(flavor, system, basis, &steps, &forcing)
}

pub fn assemble_with<T: Real>(
    flavor: Flavor,
    system: &SpatialSystem<T>,
    basis: &SpaceTimeBasis<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
) -> Result<ReducedSystem<T>> {
    match flavor {
        Flavor::Galerkin => assemble_galerkin(system, basis, steps, forcing),
        Flavor::PetrovGalerkin => assemble_petrov_galerkin(system, basis, steps, forcing),
    }
}

/// Source projections as columns over the steps: `Φ_sᵀ f^(k)` and, when
/// `a_phi` is given, `(A Φ_s)ᵀ f^(k)`. `None` when the source vanishes.
fn project_sources<T: Real>(
    phi: &DMatrix<T>,
    a_phi: Option<&DMatrix<T>>,
    forcing: &Forcing<T>,
) -> Option<(DMatrix<T>, Option<DMatrix<T>>)> {
    if forcing.source_free {
        return None;
    }
    Some(match &forcing.rank_one {
        Some(src) => {
            let amp = DMatrix::from_row_slice(1, src.amplitude.len(), &src.amplitude);
            (phi.tr_mul(&src.profile) * &amp, a_phi.map(|m| m.tr_mul(&src.profile) * &amp))
        }
        None => (phi.tr_mul(&forcing.f), a_phi.map(|m| m.tr_mul(&forcing.f))),
    })
}

/// `Σ_k w_k d_kᵀ e_k` over rows `d_k`, `e_k` of the two views.
fn weighted_gram<T: Real>(d: &DMatrix<T>, e: &DMatrix<T>, w: &[T]) -> DMatrix<T> {
    let mut wd = d.clone();
    for (k, &wk) in w.iter().enumerate() {
        wd.row_mut(k).scale_mut(wk);
    }
    wd.tr_mul(e)
}

/// `D` without its last row and without its first row.
fn shifted<T: Real>(d: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let nt = d.nrows();
    (d.rows(0, nt - 1).into_owned(), d.rows(1, nt - 1).into_owned())
}

pub fn assemble_galerkin<T: Real>(
    system: &SpatialSystem<T>,
    basis: &SpaceTimeBasis<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
) -> Result<ReducedSystem<T>> {
    check_inputs(system, basis, steps, forcing)?;
    let (n_s, n_t, nt) = (basis.n_s(), basis.n_t(), basis.big_n_t());
    let d = basis.d_matrix();
    let phi = &basis.phi_s;
    let r = phi.tr_mul(&system.apply(phi)?);

    // temporal couplings between columns a = (ip, jp) and b = (i, j)
    let coupled = weighted_gram(&d, &d, steps.as_slice());
    let (head, tail) = shifted(&d);
    let ident = d.tr_mul(&d) - tail.tr_mul(&head);

    let n = n_s * n_t;
    let a_hat = DMatrix::from_fn(n, n, |a, b| {
        let (ip, i) = (a % n_s, b % n_s);
        let v = -coupled[(a, b)] * r[(ip, i)];
        if ip == i {
            v + ident[(a, b)]
        } else {
            v
        }
    });

    let mut f_hat = DVector::zeros(n);
    if let Some((g, _)) = project_sources(phi, None, forcing) {
        for b in 0..n {
            let i = b % n_s;
            f_hat[b] = (0..nt).fold(T::zero(), |acc, k| acc + steps.dt(k) * d[(k, b)] * g[(i, k)]);
        }
    }
    let g0 = phi.tr_mul(&forcing.u0);
    let u0_hat = DVector::from_fn(n, |b, _| d[(0, b)] * g0[b % n_s]);
    Ok(ReducedSystem {
        flavor: Flavor::Galerkin,
        a_hat,
        f_hat,
        u0_hat,
        n_s,
        n_t,
    })
}

/// `M = YᵀY` and `S = Φ_sᵀY` for `Y = (I - Δt A) Φ_s`, one pair per
/// distinct step size, expanded in `Δt` with `Φ_sᵀΦ_s = I` so no
/// `N_s`-sized work repeats.
struct StepProducts<T: Real> {
    m: Vec<DMatrix<T>>,
    s: Vec<DMatrix<T>>,
    /// Index into the vectors above for each step.
    class: Vec<usize>,
}

impl<T: Real> StepProducts<T> {
    fn new(r: &DMatrix<T>, q: &DMatrix<T>, steps: &TimeSteps<T>) -> Self {
        let mut distinct: Vec<T> = Vec::new();
        let class = steps
            .as_slice()
            .iter()
            .map(|&dt| match distinct.iter().position(|&d| d == dt) {
                Some(p) => p,
                None => {
                    distinct.push(dt);
                    distinct.len() - 1
                }
            })
            .collect();
        let n = r.ncols();
        let eye = DMatrix::<T>::identity(n, n);
        let sym = r + r.transpose();
        let m = distinct
            .iter()
            .map(|&dt| &eye - &sym * dt + q * (dt * dt))
            .collect();
        let s = distinct.iter().map(|&dt| &eye - r * dt).collect();
        Self { m, s, class }
    }

    /// 0/1 weights selecting the steps of class `c`.
    fn mask(&self, c: usize, range: std::ops::Range<usize>) -> Vec<T> {
        self.class[range]
            .iter()
            .map(|&k| if k == c { T::one() } else { T::zero() })
            .collect()
    }
}

pub fn assemble_petrov_galerkin<T: Real>(
    system: &SpatialSystem<T>,
    basis: &SpaceTimeBasis<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
) -> Result<ReducedSystem<T>> {
    check_inputs(system, basis, steps, forcing)?;
    let (n_s, n_t, nt) = (basis.n_s(), basis.n_t(), basis.big_n_t());
    let d = basis.d_matrix();
    let phi = &basis.phi_s;
    let a_phi = system.apply(phi)?;
    let prod = StepProducts::new(&phi.tr_mul(&a_phi), &a_phi.tr_mul(&a_phi), steps);

    // per class c: Σ_{c_k = c} d_kᵀ d_k and Σ_{c_(k+1) = c} d_kᵀ d_(k+1)
    let (head, tail) = shifted(&d);
    let diag: Vec<_> = (0..prod.m.len())
        .map(|c| weighted_gram(&d, &d, &prod.mask(c, 0..nt)))
        .collect();
    let off: Vec<_> = (0..prod.s.len())
        .map(|c| weighted_gram(&head, &tail, &prod.mask(c, 1..nt)))
        .collect();
    let ident = head.tr_mul(&head);

    let n = n_s * n_t;
    let a_hat = DMatrix::from_fn(n, n, |a, b| {
        let (ip, i) = (a % n_s, b % n_s);
        let mut v = if ip == i { ident[(a, b)] } else { T::zero() };
        for (m, t) in prod.m.iter().zip(&diag) {
            v += m[(ip, i)] * t[(a, b)];
        }
        for (s, t) in prod.s.iter().zip(&off) {
            v -= s[(ip, i)] * t[(a, b)] + s[(i, ip)] * t[(b, a)];
        }
        v
    });

    let mut f_hat = DVector::zeros(n);
    if let Some((g, Some(ag))) = project_sources(phi, Some(&a_phi), forcing) {
        for b in 0..n {
            let i = b % n_s;
            let mut acc = T::zero();
            for k in 0..nt {
                // Y_kᵀ f^(k) = Φ_sᵀ f^(k) - Δt_k (A Φ_s)ᵀ f^(k)
                let h = g[(i, k)] - steps.dt(k) * ag[(i, k)];
                acc += d[(k, b)] * steps.dt(k) * h;
            }
            for k in 0..nt - 1 {
                acc -= d[(k, b)] * steps.dt(k + 1) * g[(i, k + 1)];
            }
            f_hat[b] = acc;
        }
    }
    let h0 = phi.tr_mul(&forcing.u0) - a_phi.tr_mul(&forcing.u0) * steps.dt(0);
    let u0_hat = DVector::from_fn(n, |b, _| d[(0, b)] * h0[b % n_s]);
    Ok(ReducedSystem {
        flavor: Flavor::PetrovGalerkin,
        a_hat,
        f_hat,
        u0_hat,
        n_s,
        n_t,
    })
}

/// Reference assembly through the materialized `Φ_st` and dense step
/// matrices; `cap` bounds `N_s·N_t`.
pub fn assemble_naive<T: Real>(
    flavor: Flavor,
    system: &SpatialSystem<T>,
    basis: &SpaceTimeBasis<T>,
    steps: &TimeSteps<T>,
    forcing: &Forcing<T>,
    cap: usize,
) -> Result<ReducedSystem<T>> {
    check_inputs(system, basis, steps, forcing)?;
    let phi_st = dense_space_time_basis(basis, cap)?;
    let (big_ns, nt) = (basis.big_n_s(), basis.big_n_t());
    let n = basis.reduced_dim();

    // Y = A^st Φ_st, block row k: E_k Φ_st,k - Φ_st,k-1.
    let mut y = DMatrix::zeros(big_ns * nt, n);
    let mut cached: Option<(T, DMatrix<T>)> = None;
    for k in 0..nt {
        let dt = steps.dt(k);
        if cached.as_ref().map_or(true, |(d, _)| *d != dt) {
            cached = Some((dt, system.step_matrix(dt).to_dense()));
        }
        let e = &cached.as_ref().unwrap().1;
        let mut block = e * phi_st.rows(k * big_ns, big_ns);
        if k > 0 {
            block -= phi_st.rows((k - 1) * big_ns, big_ns);
        }
        y.rows_mut(k * big_ns, big_ns).copy_from(&block);
    }
    let mut f_st = DVector::zeros(big_ns * nt);
    for k in 0..nt {
        f_st.rows_mut(k * big_ns, big_ns)
            .copy_from(&(forcing.f.column(k) * steps.dt(k)));
    }
    let test = match flavor {
        Flavor::Galerkin => &phi_st,
        Flavor::PetrovGalerkin => &y,
    };
    let a_hat = test.tr_mul(&y);
    let f_hat = test.tr_mul(&f_st);
    let u0_hat = test.rows(0, big_ns).tr_mul(&forcing.u0);
    Ok(ReducedSystem {
        flavor,
        a_hat,
        f_hat,
        u0_hat,
        n_s: basis.n_s(),
        n_t: basis.n_t(),
    })
}

fn one_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, v| acc + v.abs()))
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}

/// LU solve with a 1-norm condition check.
pub fn solve_reduced<T: Real>(rs: &ReducedSystem<T>) -> Result<RomSolution<T>> {
    let n = rs.dim();
    check_dim("reduced solve (rows)", n, rs.a_hat.nrows())?;
    check_dim("reduced solve (cols)", n, rs.a_hat.ncols())?;
    let lu = rs.a_hat.clone().lu();
    let inverse = lu.try_inverse().ok_or(Error::IllPosedReduction {
        condition: f64::INFINITY,
    })?;
    let condition = (one_norm(&rs.a_hat) * one_norm(&inverse)).as_f64();
    if !(condition <= MAX_REDUCED_CONDITION) {
        return Err(Error::IllPosedReduction { condition });
    }
    let coeffs = lu.solve(&rs.rhs()).ok_or(Error::IllPosedReduction { condition })?;
    Ok(RomSolution {
        flavor: rs.flavor,
        coeffs,
        n_s: rs.n_s,
        n_t: rs.n_t,
    })
}

/// Spatial coordinates `C` (`n_s × N_t`), `C[i, k] = Σ_j Φ^t_i[k, j] x̂[i + n_s·j]`.
pub fn coordinates<T: Real>(basis: &SpaceTimeBasis<T>, sol: &RomSolution<T>) -> Result<DMatrix<T>> {
    check_dim("coordinates (n_s)", basis.n_s(), sol.n_s)?;
    check_dim("coordinates (n_t)", basis.n_t(), sol.n_t)?;
    let (n_s, n_t) = (sol.n_s, sol.n_t);
    Ok(DMatrix::from_fn(n_s, basis.big_n_t(), |i, k| {
        let mut acc = T::zero();
        for j in 0..n_t {
            acc += basis.phi_t[i][(k, j)] * sol.coeffs[i + n_s * j];
        }
        acc
    }))
}

/// Full-order trajectory `ũ^(k) = Φ_s C[:, k]`.
pub fn reconstruct<T: Real>(
    basis: &SpaceTimeBasis<T>,
    sol: &RomSolution<T>,
    u0: &DVector<T>,
    dt: T,
    mu: [T; 2],
) -> Result<Trajectory<T>> {
    let c = coordinates(basis, sol)?;
    check_dim("reconstruct (u0)", basis.big_n_s(), u0.len())?;
    Ok(Trajectory {
        states: &basis.phi_s * c,
        u0: u0.clone(),
        dt,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_snapshots;
    use crate::basis::SvdMethod;
    use crate::fom::{solve_fom, space_time_dense_with};
    use crate::model::{assemble_system, ProblemKind};

    fn setup(kind: ProblemKind, mus: &[[f64; 2]], n_s: usize, n_t: usize) -> (ProblemSpec, SpaceTimeBasis<f64>) {
        let spec = ProblemSpec::new(kind, 5, 5, 4).unwrap();
        let trajs: Vec<_> = mus
            .iter()
            .map(|&mu| solve_fom(&assemble_system(&spec, mu).unwrap(), &spec).unwrap())
            .collect();
        let snaps = build_snapshots(&trajs).unwrap();
        (spec, SpaceTimeBasis::from_snapshots(&snaps, n_s, n_t, SvdMethod::Direct).unwrap())
    }

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn flavor_parsing() {
        assert_eq!("pg".parse::<Flavor>().unwrap(), Flavor::PetrovGalerkin);
        assert_eq!("Galerkin".parse::<Flavor>().unwrap(), Flavor::Galerkin);
        assert!("foo".parse::<Flavor>().is_err());
        assert_eq!(serde_json::to_string(&Flavor::PetrovGalerkin).unwrap(), "\"pg\"");
    }

    #[test]
    fn block_matches_projected_dense_operator() {
        for kind in ProblemKind::ALL {
            let mu = kind.default_mu_domain();
            let mus = [[mu[0][0], mu[1][0]], [mu[0][1], mu[1][1]]];
            let (spec, basis) = setup(kind, &mus, 3, 2);
            let target = [(mu[0][0] + mu[0][1]) / 2.0, (mu[1][0] + mu[1][1]) / 2.0];
            let sys = assemble_system(&spec, target).unwrap();
            let steps = TimeSteps::for_spec(&spec);
            let forcing = Forcing::from_spec(&spec, target, &steps).unwrap();
            let dense = space_time_dense_with(&sys, &steps, &forcing, 5000).unwrap();
            let phi = crate::basis::dense_space_time_basis_default(&basis).unwrap();
            let ap = &dense.a_st * &phi;

            let g = assemble(Flavor::Galerkin, &sys, &basis, &spec).unwrap();
            assert!(rel(&g.a_hat, &phi.tr_mul(&ap)) < 1e-10, "{kind:?}");
            let pg = assemble(Flavor::PetrovGalerkin, &sys, &basis, &spec).unwrap();
            assert!(rel(&pg.a_hat, &ap.tr_mul(&ap)) < 1e-10, "{kind:?}");
            let u0 = DMatrix::from_column_slice(dense.u0_st.len(), 1, dense.u0_st.as_slice());
            let u0_pg = DMatrix::from_column_slice(pg.u0_hat.len(), 1, pg.u0_hat.as_slice());
            assert!(rel(&u0_pg, &ap.tr_mul(&u0)) < 1e-10 || ap.tr_mul(&u0).norm() == 0.0);
        }
    }

    #[test]
    fn naive_matches_block() {
        let (spec, basis) = setup(ProblemKind::ConvDiffSource2D, &[[0.195, 0.018], [0.205, 0.022]], 3, 2);
        let sys = assemble_system(&spec, [0.2, 0.02]).unwrap();
        let steps = TimeSteps::for_spec(&spec);
        let forcing = Forcing::from_spec(&spec, [0.2, 0.02], &steps).unwrap();
        for flavor in Flavor::ALL {
            let b = assemble_with(flavor, &sys, &basis, &steps, &forcing).unwrap();
            let n = assemble_naive(flavor, &sys, &basis, &steps, &forcing, 5000).unwrap();
            assert!(rel(&b.a_hat, &n.a_hat) < 1e-10);
            assert!((&b.f_hat - &n.f_hat).norm() <= 1e-10 * n.f_hat.norm());
            assert!((&b.u0_hat - &n.u0_hat).norm() <= 1e-10 * n.u0_hat.norm().max(1e-300));
        }
        assert!(matches!(
            assemble_naive(Flavor::Galerkin, &sys, &basis, &steps, &forcing, 10),
            Err(Error::OracleCap { .. })
        ));
    }

    #[test]
    fn nonuniform_steps_match_naive() {
        let (spec, basis) = setup(ProblemKind::Diffusion2D, &[[-0.9, -0.9], [-0.5, -0.5]], 2, 2);
        let sys = assemble_system(&spec, [-0.7, -0.7]).unwrap();
        let steps = TimeSteps::from_steps(vec![0.3, 0.5, 0.3, 0.9]).unwrap();
        let forcing = Forcing::from_spec(&spec, [-0.7, -0.7], &steps).unwrap();
        for flavor in Flavor::ALL {
            let b = assemble_with(flavor, &sys, &basis, &steps, &forcing).unwrap();
            let n = assemble_naive(flavor, &sys, &basis, &steps, &forcing, 5000).unwrap();
            assert!(rel(&b.a_hat, &n.a_hat) < 1e-10);
            assert!((&b.f_hat - &n.f_hat).norm() <= 1e-10 * n.f_hat.norm());
        }
    }

    #[test]
    fn pg_operator_is_symmetric_positive_definite() {
        let (spec, basis) = setup(ProblemKind::ConvDiff2D, &[[0.03, 0.33], [0.05, 0.35]], 3, 2);
        let sys = assemble_system(&spec, [0.04, 0.34]).unwrap();
        let pg = assemble(Flavor::PetrovGalerkin, &sys, &basis, &spec).unwrap();
        assert!((&pg.a_hat - pg.a_hat.transpose()).amax() < 1e-10 * pg.a_hat.amax());
        assert!(pg.a_hat.clone().cholesky().is_some());
    }

    #[test]
    fn reconstruction_of_training_point_is_accurate() {
        let (spec, basis) = setup(ProblemKind::ConvDiff2D, &[[0.03, 0.33], [0.05, 0.35]], 4, 2);
        let mu = [0.03, 0.33];
        let sys = assemble_system(&spec, mu).unwrap();
        let fom = solve_fom(&sys, &spec).unwrap();
        for flavor in Flavor::ALL {
            let rs = assemble(flavor, &sys, &basis, &spec).unwrap();
            let sol = solve_reduced(&rs).unwrap();
            let rom = reconstruct(&basis, &sol, &fom.u0, spec.dt(), mu).unwrap();
            let err = (&rom.states - &fom.states).norm() / fom.states.norm();
            assert!(err < 0.05, "{flavor}: {err}");
        }
    }

    #[test]
    fn coordinates_layout() {
        let (_, basis) = setup(ProblemKind::ConvDiff2D, &[[0.03, 0.33], [0.05, 0.35]], 2, 2);
        let sol = RomSolution {
            flavor: Flavor::Galerkin,
            coeffs: DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            n_s: 2,
            n_t: 2,
        };
        let c = coordinates(&basis, &sol).unwrap();
        assert_eq!(c.row(0).transpose(), basis.phi_t[0].column(0));
        assert!(c.row(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_reduced_system_is_rejected() {
        let rs = ReducedSystem {
            flavor: Flavor::Galerkin,
            a_hat: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            f_hat: DVector::zeros(2),
            u0_hat: DVector::zeros(2),
            n_s: 2,
            n_t: 1,
        };
        assert!(matches!(solve_reduced(&rs), Err(Error::IllPosedReduction { .. })));
        let near = ReducedSystem {
            a_hat: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-15]),
            ..rs
        };
        assert!(matches!(solve_reduced(&near), Err(Error::IllPosedReduction { .. })));
    }
}
