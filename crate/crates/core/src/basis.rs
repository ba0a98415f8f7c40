//! Space–time POD basis from the method of snapshots.
//!
//! The spatial modes are the leading left singular vectors of the
//! concatenated snapshot matrix. Each right singular vector `v_i` is cut
//! into `n_mu` segments of length `N_t` (one per training parameter); the
//! leading left singular vectors of that `N_t × n_mu` matrix are the
//! temporal modes paired with spatial mode `i`.

use crate::error::{check_dim, Error, Result};
use crate::fom::{Trajectory, DEFAULT_ORACLE_CAP};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

/// Spatial singular values below this fraction of the largest are rejected
/// when their mode is requested.
pub const DEGENERATE_MODE_RATIO: f64 = 1e-13;

/// Snapshot matrix `U = [U^(1) … U^(n_mu)]`.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix<T> {
    pub data: DMatrix<T>,
    pub parameter_order: Vec<[T; 2]>,
    pub n_t: usize,
}

impl<T: Real> SnapshotMatrix<T> {
    pub fn n_mu(&self) -> usize {
        self.parameter_order.len()
    }
}

/// Concatenates trajectories column-wise in the given order.
pub fn build_snapshots<T: Real>(trajectories: &[Trajectory<T>]) -> Result<SnapshotMatrix<T>> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidInput("no trajectories to concatenate".into()))?;
    let (n_s, n_t) = (first.n_s(), first.n_t());
    for tr in trajectories {
        check_dim("build_snapshots (N_s)", n_s, tr.n_s())?;
        check_dim("build_snapshots (N_t)", n_t, tr.n_t())?;
        if tr.dt != first.dt {
            return Err(Error::InvalidInput(format!(
                "trajectories use different time steps ({:e} vs {:e})",
                first.dt, tr.dt
            )));
        }
    }
    let mut data = DMatrix::zeros(n_s, n_t * trajectories.len());
    for (p, tr) in trajectories.iter().enumerate() {
        data.columns_mut(p * n_t, n_t).copy_from(&tr.states);
    }
    Ok(SnapshotMatrix {
        data,
        parameter_order: trajectories.iter().map(|t| t.mu).collect(),
        n_t,
    })
}

/// How the thin SVD of the snapshot matrix is obtained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SvdMethod {
    /// Golub–Kahan bidiagonalization of the matrix itself.
    #[default]
    Direct,
    /// Eigendecomposition of the Gram matrix of the smaller dimension.
    Gram,
}

/// Thin SVD with descending singular values and the sign convention that
/// the largest-magnitude entry of each left vector (lowest index on ties) is
/// positive.
#[derive(Debug, Clone)]
pub struct ThinSvd<T> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: DMatrix<T>,
}

fn fix_signs<T: Real>(u: &mut DMatrix<T>, v: &mut DMatrix<T>) {
    for i in 0..u.ncols() {
        let col = u.column(i);
        let mut best = T::zero();
        let mut sign_negative = false;
        for &x in col.iter() {
            if x.abs() > best {
                best = x.abs();
                sign_negative = x < T::zero();
            }
        }
        if sign_negative {
            u.column_mut(i).neg_mut();
            v.column_mut(i).neg_mut();
        }
    }
}

pub fn thin_svd<T: Real>(matrix: &DMatrix<T>, method: SvdMethod) -> Result<ThinSvd<T>> {
    let (m, n) = matrix.shape();
    if m == 0 || n == 0 {
        return Err(Error::Svd("empty matrix".into()));
    }
    let (mut u, singular_values, mut v) = match method {
        SvdMethod::Direct => {
            let svd = SVD::try_new(matrix.clone(), true, true, T::machine_eps(), 0)
                .ok_or_else(|| Error::Svd("bidiagonal QR did not converge".into()))?;
            let u = svd.u.ok_or_else(|| Error::Svd("left vectors missing".into()))?;
            let vt = svd.v_t.ok_or_else(|| Error::Svd("right vectors missing".into()))?;
            (u, svd.singular_values.iter().copied().collect::<Vec<_>>(), vt.transpose())
        }
        SvdMethod::Gram => gram_svd(matrix)?,
    };
    fix_signs(&mut u, &mut v);
    Ok(ThinSvd {
        u,
        singular_values,
        v,
    })
}

fn gram_svd<T: Real>(matrix: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<T>, DMatrix<T>)> {
    let (m, n) = matrix.shape();
    let tall = m >= n;
    let gram = if tall {
        matrix.tr_mul(matrix)
    } else {
        matrix * matrix.transpose()
    };
    let eig = SymmetricEigen::try_new(gram, T::machine_eps(), 0)
        .ok_or_else(|| Error::Svd("Gram eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let k = order.len();
    let sigma: Vec<T> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(T::zero()).sqrt())
        .collect();
    let small = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut big = if tall { matrix * &small } else { matrix.tr_mul(&small) };
    for (c, &s) in sigma.iter().enumerate() {
        if s > T::zero() {
            big.column_mut(c).unscale_mut(s);
        } else {
            big.column_mut(c).fill(T::zero());
        }
    }
    Ok(if tall {
        (big, sigma, small)
    } else {
        (small, sigma, big)
    })
}

/// Output of the spatial POD stage.
#[derive(Debug, Clone)]
pub struct SpatialPod<T> {
    pub phi_s: DMatrix<T>,
    /// All `ℓ = min(N_s, n_mu·N_t)` singular values, descending.
    pub singular_values: Vec<T>,
    /// Leading `n_s` right singular vectors, one per column.
    pub right_vectors: DMatrix<T>,
}

pub fn spatial_pod<T: Real>(
    snapshots: &SnapshotMatrix<T>,
    n_s: usize,
    method: SvdMethod,
) -> Result<SpatialPod<T>> {
    let (rows, cols) = snapshots.data.shape();
    let ell = rows.min(cols);
    let bound = ell.min(cols.saturating_sub(1));
    if n_s == 0 || n_s > bound {
        return Err(Error::ModeCount {
            requested: n_s,
            bound,
        });
    }
    let svd = thin_svd(&snapshots.data, method)?;
    let s1 = svd.singular_values[0];
    for i in 0..n_s {
        let s = svd.singular_values[i];
        let ratio = if s1 > T::zero() { (s / s1).as_f64() } else { 0.0 };
        if !(ratio >= DEGENERATE_MODE_RATIO) {
            return Err(Error::DegenerateMode { index: i, ratio });
        }
    }
    Ok(SpatialPod {
        phi_s: svd.u.columns(0, n_s).clone_owned(),
        singular_values: svd.singular_values,
        right_vectors: svd.v.columns(0, n_s).clone_owned(),
    })
}

/// Reshapes right singular vector `v` (length `n_mu·N_t`) into the
/// `N_t × n_mu` temporal snapshot matrix: column `p` is segment `p`.
pub fn temporal_snapshot<T: Real>(v: &DVector<T>, n_mu: usize, n_t_steps: usize) -> Result<DMatrix<T>> {
    check_dim("temporal snapshot length", n_mu * n_t_steps, v.len())?;
    Ok(DMatrix::from_column_slice(n_t_steps, n_mu, v.as_slice()))
}

/// Temporal bases `Φ^t_i`, each `N_t × n_t`, for the first `n_s` right vectors.
pub fn temporal_bases<T: Real>(
    right_vectors: &DMatrix<T>,
    n_s: usize,
    n_t: usize,
    n_mu: usize,
    n_t_steps: usize,
) -> Result<Vec<DMatrix<T>>> {
    let bound = n_t_steps.min(n_mu);
    if n_t == 0 || n_t > bound {
        return Err(Error::BasisRank {
            requested: n_t,
            bound,
        });
    }
    if n_s > right_vectors.ncols() {
        return Err(Error::ModeCount {
            requested: n_s,
            bound: right_vectors.ncols(),
        });
    }
    (0..n_s)
        .map(|i| {
            let t_i = temporal_snapshot(&right_vectors.column(i).clone_owned(), n_mu, n_t_steps)?;
            let svd = thin_svd(&t_i, SvdMethod::Direct)?;
            Ok(svd.u.columns(0, n_t).clone_owned())
        })
        .collect()
}

/// Spatial basis plus one temporal basis per spatial mode.
///
/// Column `i + n_s·j` of the implicit space–time basis is
/// `Φ^t_i[:, j] ⊗ Φ_s[:, i]`; it is only materialized by
/// [`dense_space_time_basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBasis<T> {
    pub phi_s: DMatrix<T>,
    pub phi_t: Vec<DMatrix<T>>,
    pub spatial_singular_values: Vec<T>,
    pub n_mu: usize,
}

/// Diagonal of `D_k^j`: entry `i` is `Φ^t_i[k, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DBlock<T> {
    pub k: usize,
    pub j: usize,
    pub diag: Vec<T>,
}

impl<T: Real> SpaceTimeBasis<T> {
    /// Runs both POD stages on a snapshot matrix.
    pub fn from_snapshots(
        snapshots: &SnapshotMatrix<T>,
        n_s: usize,
        n_t: usize,
        method: SvdMethod,
    ) -> Result<Self> {
        let n_mu = snapshots.n_mu();
        let bound = snapshots.n_t.min(n_mu);
        if n_t == 0 || n_t > bound {
            return Err(Error::BasisRank {
                requested: n_t,
                bound,
            });
        }
        let pod = spatial_pod(snapshots, n_s, method)?;
        let phi_t = temporal_bases(&pod.right_vectors, n_s, n_t, n_mu, snapshots.n_t)?;
        Ok(Self {
            phi_s: pod.phi_s,
            phi_t,
            spatial_singular_values: pod.singular_values,
            n_mu,
        })
    }

    pub fn n_s(&self) -> usize {
        self.phi_s.ncols()
    }

    pub fn n_t(&self) -> usize {
        self.phi_t.first().map_or(0, |m| m.ncols())
    }

    /// Full-order spatial dimension `N_s`.
    pub fn big_n_s(&self) -> usize {
        self.phi_s.nrows()
    }

    /// Number of time steps `N_t`.
    pub fn big_n_t(&self) -> usize {
        self.phi_t.first().map_or(0, |m| m.nrows())
    }

    pub fn reduced_dim(&self) -> usize {
        self.n_s() * self.n_t()
    }

    /// Leading `n_s` spatial and `n_t` temporal modes. Identical to training
    /// with those counts directly.
    pub fn truncate(&self, n_s: usize, n_t: usize) -> Result<Self> {
        if n_s == 0 || n_s > self.n_s() {
            return Err(Error::ModeCount {
                requested: n_s,
                bound: self.n_s(),
            });
        }
        if n_t == 0 || n_t > self.n_t() {
            return Err(Error::BasisRank {
                requested: n_t,
                bound: self.n_t(),
            });
        }
        Ok(Self {
            phi_s: self.phi_s.columns(0, n_s).clone_owned(),
            phi_t: self.phi_t[..n_s]
                .iter()
                .map(|m| m.columns(0, n_t).clone_owned())
                .collect(),
            spatial_singular_values: self.spatial_singular_values.clone(),
            n_mu: self.n_mu,
        })
    }

    /// `D_k^j` for 0-based step `k` and temporal index `j`.
    pub fn d_block(&self, k: usize, j: usize) -> Result<DBlock<T>> {
        if k >= self.big_n_t() || j >= self.n_t() {
            return Err(Error::IndexOutOfRange(format!(
                "D block (k = {k}, j = {j}) outside N_t = {}, n_t = {}",
                self.big_n_t(),
                self.n_t()
            )));
        }
        Ok(DBlock {
            k,
            j,
            diag: self.phi_t.iter().map(|m| m[(k, j)]).collect(),
        })
    }

    /// The diagonals as one `N_t × n_s·n_t` matrix: row `k`, column
    /// `i + n_s·j` holds `Φ^t_i[k, j]`.
    pub fn d_matrix(&self) -> DMatrix<T> {
        let n_s = self.n_s();
        DMatrix::from_fn(self.big_n_t(), n_s * self.n_t(), |k, idx| {
            self.phi_t[idx % n_s][(k, idx / n_s)]
        })
    }

    /// All diagonals at once: `result[k][j][i] = Φ^t_i[k, j]`.
    pub fn d_table(&self) -> Vec<Vec<Vec<T>>> {
        (0..self.big_n_t())
            .map(|k| {
                (0..self.n_t())
                    .map(|j| self.phi_t.iter().map(|m| m[(k, j)]).collect())
                    .collect()
            })
            .collect()
    }
}

/// Materializes `Φ_st` (`N_s·N_t × n_s·n_t`) from the D-block layout:
/// block row `k`, block column `j` is `Φ_s · D_k^j`.
pub fn dense_space_time_basis<T: Real>(basis: &SpaceTimeBasis<T>, cap: usize) -> Result<DMatrix<T>> {
    let (big_ns, big_nt) = (basis.big_n_s(), basis.big_n_t());
    let size = big_ns * big_nt;
    if size > cap {
        return Err(Error::OracleCap { size, cap });
    }
    let (n_s, n_t) = (basis.n_s(), basis.n_t());
    let mut out = DMatrix::zeros(size, n_s * n_t);
    for k in 0..big_nt {
        for j in 0..n_t {
            let d = basis.d_block(k, j)?;
            for i in 0..n_s {
                let scale = d.diag[i];
                for r in 0..big_ns {
                    out[(k * big_ns + r, i + n_s * j)] = basis.phi_s[(r, i)] * scale;
                }
            }
        }
    }
    Ok(out)
}

/// [`dense_space_time_basis`] with the default cap.
pub fn dense_space_time_basis_default<T: Real>(basis: &SpaceTimeBasis<T>) -> Result<DMatrix<T>> {
    dense_space_time_basis(basis, DEFAULT_ORACLE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::solve_fom;
    use crate::model::{assemble_system, ProblemKind, ProblemSpec};

    fn tiny_snapshots(kind: ProblemKind, n: usize, nt: usize, mus: &[[f64; 2]]) -> SnapshotMatrix<f64> {
        let spec = ProblemSpec::new(kind, n, n, nt).unwrap();
        let trajs: Vec<_> = mus
            .iter()
            .map(|&mu| solve_fom(&assemble_system(&spec, mu).unwrap(), &spec).unwrap())
            .collect();
        build_snapshots(&trajs).unwrap()
    }

    fn gram_defect(m: &DMatrix<f64>) -> f64 {
        (m.tr_mul(m) - DMatrix::identity(m.ncols(), m.ncols())).amax()
    }

    #[test]
    fn snapshot_concatenation() {
        let mus = [[0.03, 0.33], [0.05, 0.35], [0.04, 0.34]];
        let spec = ProblemSpec::new(ProblemKind::ConvDiff2D, 5, 5, 4).unwrap();
        let trajs: Vec<_> = mus
            .iter()
            .map(|&mu| solve_fom(&assemble_system(&spec, mu).unwrap(), &spec).unwrap())
            .collect();
        let one = build_snapshots(&trajs[..1]).unwrap();
        assert_eq!(one.data, trajs[0].states);
        let u = build_snapshots(&trajs).unwrap();
        assert_eq!(u.data.shape(), (16, 12));
        for (p, tr) in trajs.iter().enumerate() {
            for k in 0..4 {
                assert_eq!(u.data.column(p * 4 + k), tr.states.column(k));
            }
        }
        assert_eq!(u.parameter_order, mus.to_vec());

        let other = ProblemSpec::new(ProblemKind::ConvDiff2D, 5, 5, 3).unwrap();
        let bad = solve_fom(&assemble_system(&other, mus[0]).unwrap(), &other).unwrap();
        assert!(build_snapshots(&[trajs[0].clone(), bad]).is_err());
        assert!(build_snapshots::<f64>(&[]).is_err());
    }

    #[test]
    fn already_diagonal_case() {
        // Orthogonal columns with norms 3, 2, 1 (plus a zero column).
        let mut data = DMatrix::<f64>::zeros(5, 4);
        data[(0, 0)] = 3.0;
        data[(2, 1)] = -2.0;
        data[(4, 2)] = 1.0;
        let snaps = SnapshotMatrix {
            data: data.clone(),
            parameter_order: vec![[0.0, 0.0]; 2],
            n_t: 2,
        };
        for method in [SvdMethod::Direct, SvdMethod::Gram] {
            let pod = spatial_pod(&snaps, 3, method).unwrap();
            let sv = &pod.singular_values;
            assert!((sv[0] - 3.0).abs() < 1e-12 && (sv[1] - 2.0).abs() < 1e-12 && (sv[2] - 1.0).abs() < 1e-12);
            for (i, row) in [0usize, 2, 4].iter().enumerate() {
                let mut e = DVector::zeros(5);
                e[*row] = 1.0;
                assert!((pod.phi_s.column(i) - &e).amax() < 1e-12, "{method:?} mode {i}");
            }
            // Sign convention flips the right vector with the left one.
            assert!((pod.right_vectors[(1, 1)] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_count_and_degenerate_checks() {
        let snaps = tiny_snapshots(ProblemKind::Diffusion2D, 4, 3, &[[-0.9, -0.9], [-0.5, -0.5]]);
        assert!(matches!(spatial_pod(&snaps, 0, SvdMethod::Direct), Err(Error::ModeCount { .. })));
        assert!(matches!(spatial_pod(&snaps, 6, SvdMethod::Direct), Err(Error::ModeCount { bound: 5, .. })));
        let rank_one = SnapshotMatrix {
            data: DMatrix::from_fn(6, 4, |i, j| (i + 1) as f64 * (j + 1) as f64),
            parameter_order: vec![[0.0, 0.0]; 2],
            n_t: 2,
        };
        assert!(matches!(
            spatial_pod(&rank_one, 2, SvdMethod::Direct),
            Err(Error::DegenerateMode { index: 1, .. })
        ));
    }

    #[test]
    fn pod_energy_identity() {
        let snaps = tiny_snapshots(ProblemKind::ConvDiff2D, 6, 5, &[[0.03, 0.33], [0.05, 0.35]]);
        let full = snaps.data.clone().svd(false, false).singular_values;
        for n_s in 1..=4 {
            let pod = spatial_pod(&snaps, n_s, SvdMethod::Direct).unwrap();
            let proj = &pod.phi_s * pod.phi_s.tr_mul(&snaps.data);
            let lhs = (&snaps.data - proj).norm_squared();
            let rhs: f64 = full.iter().skip(n_s).map(|s| s * s).sum();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs, "n_s = {n_s}: {lhs} vs {rhs}");
            assert!(gram_defect(&pod.phi_s) < 1e-12);
        }
    }

    #[test]
    fn gram_route_agrees_with_direct() {
        let snaps = tiny_snapshots(ProblemKind::ConvDiff2D, 6, 5, &[[0.03, 0.33], [0.05, 0.35]]);
        let d = spatial_pod(&snaps, 3, SvdMethod::Direct).unwrap();
        let g = spatial_pod(&snaps, 3, SvdMethod::Gram).unwrap();
        for i in 0..3 {
            assert!((d.singular_values[i] - g.singular_values[i]).abs() < 1e-8 * d.singular_values[0]);
        }
        assert!((d.phi_s - g.phi_s).amax() < 1e-6);
    }

    #[test]
    fn temporal_reshape_layout() {
        let v = DVector::from_fn(6, |i, _| i as f64);
        let t = temporal_snapshot(&v, 2, 3).unwrap();
        // Element 1 + (k-1)·N_t (1-based) lands in row 1, column k.
        assert_eq!(t[(0, 0)], 0.0);
        assert_eq!(t[(0, 1)], 3.0);
        assert_eq!(t[(2, 1)], 5.0);
    }

    #[test]
    fn single_parameter_temporal_basis_is_normalized_segment() {
        let snaps = tiny_snapshots(ProblemKind::ConvDiff2D, 5, 4, &[[0.04, 0.34]]);
        let pod = spatial_pod(&snaps, 2, SvdMethod::Direct).unwrap();
        let phi_t = temporal_bases(&pod.right_vectors, 2, 1, 1, 4).unwrap();
        for i in 0..2 {
            let v = pod.right_vectors.column(i).normalize();
            let col = phi_t[i].column(0);
            let same = (col - &v).amax().min((col + &v).amax());
            assert!(same < 1e-12);
        }
        assert!(matches!(
            temporal_bases(&pod.right_vectors, 2, 2, 1, 4),
            Err(Error::BasisRank { requested: 2, bound: 1 })
        ));
    }

    #[test]
    fn temporal_svd_matches_gram_eigenvalues() {
        let snaps = tiny_snapshots(ProblemKind::Diffusion2D, 5, 3, &[[-0.9, -0.9], [-0.5, -0.6]]);
        let pod = spatial_pod(&snaps, 3, SvdMethod::Direct).unwrap();
        for i in 0..3 {
            let t_i = temporal_snapshot(&pod.right_vectors.column(i).clone_owned(), 2, 3).unwrap();
            let svd = thin_svd(&t_i, SvdMethod::Direct).unwrap();
            let gram = t_i.tr_mul(&t_i);
            let mut eig: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
            eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (s, l) in svd.singular_values.iter().zip(&eig) {
                assert!((s * s - l).abs() < 1e-12);
            }
            // Left vectors are eigenvectors of T Tᵀ.
            let ttt = &t_i * t_i.transpose();
            for c in 0..2 {
                let u = svd.u.column(c);
                let s2 = svd.singular_values[c].powi(2);
                assert!((&ttt * u - u * s2).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_orthonormality_and_d_blocks() {
        let snaps = tiny_snapshots(ProblemKind::ConvDiffSource2D, 6, 5, &[[0.195, 0.018], [0.205, 0.022]]);
        let basis = SpaceTimeBasis::from_snapshots(&snaps, 3, 2, SvdMethod::Direct).unwrap();
        assert!(gram_defect(&basis.phi_s) < 1e-12);
        for m in &basis.phi_t {
            assert!(gram_defect(m) < 1e-12);
        }
        let dense = dense_space_time_basis_default(&basis).unwrap();
        assert!(gram_defect(&dense) < 1e-10);

        // Kronecker construction, column i + n_s·j.
        for i in 0..3 {
            for j in 0..2 {
                let kron = basis.phi_t[i].column(j).kronecker(&basis.phi_s.column(i));
                assert!((dense.column(i + 3 * j) - kron).amax() < 1e-12);
            }
        }

        // Σ_k D_k^j D_k^j' = δ_jj' I.
        for j in 0..2 {
            for jp in 0..2 {
                let mut acc = vec![0.0; 3];
                for k in 0..5 {
                    let a = basis.d_block(k, j).unwrap();
                    let b = basis.d_block(k, jp).unwrap();
                    for i in 0..3 {
                        acc[i] += a.diag[i] * b.diag[i];
                    }
                }
                let target = if j == jp { 1.0 } else { 0.0 };
                assert!(acc.iter().all(|v| (v - target).abs() < 1e-12));
            }
        }
        assert!(basis.d_block(5, 0).is_err());
        assert!(basis.d_block(0, 2).is_err());
        assert_eq!(basis.d_block(2, 1).unwrap().diag[1], basis.phi_t[1][(2, 1)]);
    }

    #[test]
    fn single_mode_basis_and_truncation() {
        let snaps = tiny_snapshots(ProblemKind::ConvDiff2D, 4, 3, &[[0.03, 0.33], [0.05, 0.35]]);
        let basis = SpaceTimeBasis::from_snapshots(&snaps, 3, 2, SvdMethod::Direct).unwrap();
        let small = basis.truncate(1, 1).unwrap();
        let direct = SpaceTimeBasis::from_snapshots(&snaps, 1, 1, SvdMethod::Direct).unwrap();
        assert_eq!(small, direct);
        let d = small.d_block(1, 0).unwrap();
        assert_eq!(d.diag, vec![small.phi_t[0][(1, 0)]]);
        let dense = dense_space_time_basis_default(&small).unwrap();
        assert_eq!(dense.ncols(), 1);
        assert!((dense.norm() - 1.0).abs() < 1e-12);
        assert!(basis.truncate(4, 1).is_err());
    }

    #[test]
    fn deterministic_rebuild() {
        let snaps = tiny_snapshots(ProblemKind::Diffusion2D, 6, 5, &[[-0.9, -0.9], [-0.5, -0.5]]);
        let a = SpaceTimeBasis::from_snapshots(&snaps, 3, 2, SvdMethod::Direct).unwrap();
        let b = SpaceTimeBasis::from_snapshots(&snaps, 3, 2, SvdMethod::Direct).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dense_basis_cap() {
        let snaps = tiny_snapshots(ProblemKind::Diffusion2D, 6, 5, &[[-0.9, -0.9], [-0.5, -0.5]]);
        let basis = SpaceTimeBasis::from_snapshots(&snaps, 2, 1, SvdMethod::Direct).unwrap();
        assert!(matches!(dense_space_time_basis(&basis, 100), Err(Error::OracleCap { size: 125, cap: 100 })));
    }
}
