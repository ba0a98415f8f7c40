//! On-disk formats.
//!
//! Matrices are headerless CSV, one matrix row per line, every value in
//! scientific notation with 17 significant digits so files round-trip
//! exactly. Each bundle is a directory of such files plus a JSON header.

use crate::basis::SpaceTimeBasis;
use crate::error::{check_dim, Error, Result};
use crate::fom::Trajectory;
use crate::model::ProblemSpec;
use crate::rom::{Flavor, ReducedSystem, RomSolution};
use nalgebra::{DMatrix, DVector};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Creates the parent directory of an output file.
fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|&v| format_value(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    file: path.display().to_string(),
                    message: format!("line {}: '{s}': {e}", rows.len() + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse {
            file: path.display().to_string(),
            message: "ragged rows".into(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

pub fn write_vector_csv(path: &Path, v: &DVector<f64>) -> Result<()> {
    write_matrix_csv(path, &DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

pub fn read_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() > 1 {
        return Err(Error::Parse {
            file: path.display().to_string(),
            message: format!("expected one column, found {}", m.ncols()),
        });
    }
    Ok(DVector::from_column_slice(m.as_slice()))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    ensure_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.display().to_string(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub mu: [f64; 2],
    pub dt: f64,
    pub n_s: usize,
    pub n_t: usize,
}

/// Writes `<stem>.csv` (states, row = node, column = step), `<stem>_u0.csv`
/// and `<stem>.json`.
pub fn write_trajectory(dir: &Path, stem: &str, traj: &Trajectory<f64>) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join(format!("{stem}.csv")), &traj.states)?;
    write_vector_csv(&dir.join(format!("{stem}_u0.csv")), &traj.u0)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &TrajectoryHeader {
            mu: traj.mu,
            dt: traj.dt,
            n_s: traj.n_s(),
            n_t: traj.n_t(),
        },
    )
}

pub fn read_trajectory(dir: &Path, stem: &str) -> Result<Trajectory<f64>> {
    let header: TrajectoryHeader = read_json(&dir.join(format!("{stem}.json")))?;
    let states = read_matrix_csv(&dir.join(format!("{stem}.csv")))?;
    let u0 = read_vector_csv(&dir.join(format!("{stem}_u0.csv")))?;
    check_dim("trajectory file (N_s)", header.n_s, states.nrows())?;
    check_dim("trajectory file (N_t)", header.n_t, states.ncols())?;
    check_dim("trajectory file (u0)", header.n_s, u0.len())?;
    Ok(Trajectory {
        states,
        u0,
        dt: header.dt,
        mu: header.mu,
    })
}

pub const BASIS_HEADER: &str = "basis.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisHeader {
    pub problem: ProblemSpec,
    pub n_s: usize,
    pub n_t: usize,
    pub n_mu: usize,
    #[serde(rename = "N_t")]
    pub big_n_t: usize,
    #[serde(rename = "N_s")]
    pub big_n_s: usize,
    pub training_parameters: Vec<[f64; 2]>,
}

/// Basis bundle: `phi_s.csv` (`N_s × n_s`), `phi_t.csv` (`n_s·N_t × n_t`,
/// block `i` holds `Φ^t_i`), `singular_values.csv` and `basis.json`.
pub fn write_basis(dir: &Path, basis: &SpaceTimeBasis<f64>, problem: &ProblemSpec, training: &[[f64; 2]]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (n_s, n_t, nt) = (basis.n_s(), basis.n_t(), basis.big_n_t());
    let mut stacked = DMatrix::zeros(n_s * nt, n_t);
    for (i, m) in basis.phi_t.iter().enumerate() {
        stacked.rows_mut(i * nt, nt).copy_from(m);
    }
    write_matrix_csv(&dir.join("phi_s.csv"), &basis.phi_s)?;
    write_matrix_csv(&dir.join("phi_t.csv"), &stacked)?;
    write_vector_csv(
        &dir.join("singular_values.csv"),
        &DVector::from_column_slice(&basis.spatial_singular_values),
    )?;
    write_json(
        &dir.join(BASIS_HEADER),
        &BasisHeader {
            problem: problem.clone(),
            n_s,
            n_t,
            n_mu: basis.n_mu,
            big_n_t: nt,
            big_n_s: basis.big_n_s(),
            training_parameters: training.to_vec(),
        },
    )
}

pub fn read_basis(dir: &Path) -> Result<(SpaceTimeBasis<f64>, BasisHeader)> {
    let header: BasisHeader = read_json(&dir.join(BASIS_HEADER))?;
    let phi_s = read_matrix_csv(&dir.join("phi_s.csv"))?;
    let stacked = read_matrix_csv(&dir.join("phi_t.csv"))?;
    let sv = read_vector_csv(&dir.join("singular_values.csv"))?;
    check_dim("basis bundle (phi_s rows)", header.big_n_s, phi_s.nrows())?;
    check_dim("basis bundle (phi_s cols)", header.n_s, phi_s.ncols())?;
    check_dim("basis bundle (phi_t rows)", header.n_s * header.big_n_t, stacked.nrows())?;
    check_dim("basis bundle (phi_t cols)", header.n_t, stacked.ncols())?;
    let nt = header.big_n_t;
    let phi_t = (0..header.n_s)
        .map(|i| stacked.rows(i * nt, nt).clone_owned())
        .collect();
    Ok((
        SpaceTimeBasis {
            phi_s,
            phi_t,
            spatial_singular_values: sv.iter().copied().collect(),
            n_mu: header.n_mu,
        },
        header,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedHeader {
    pub flavor: Flavor,
    pub n_s: usize,
    pub n_t: usize,
    pub mu: [f64; 2],
}

pub fn write_reduced_system(dir: &Path, rs: &ReducedSystem<f64>, mu: [f64; 2]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("a_hat.csv"), &rs.a_hat)?;
    write_vector_csv(&dir.join("f_hat.csv"), &rs.f_hat)?;
    write_vector_csv(&dir.join("u0_hat.csv"), &rs.u0_hat)?;
    write_json(
        &dir.join("reduced.json"),
        &ReducedHeader {
            flavor: rs.flavor,
            n_s: rs.n_s,
            n_t: rs.n_t,
            mu,
        },
    )
}

pub fn read_reduced_system(dir: &Path) -> Result<(ReducedSystem<f64>, [f64; 2])> {
    let h: ReducedHeader = read_json(&dir.join("reduced.json"))?;
    let a_hat = read_matrix_csv(&dir.join("a_hat.csv"))?;
    let f_hat = read_vector_csv(&dir.join("f_hat.csv"))?;
    let u0_hat = read_vector_csv(&dir.join("u0_hat.csv"))?;
    let n = h.n_s * h.n_t;
    check_dim("reduced bundle (a_hat rows)", n, a_hat.nrows())?;
    check_dim("reduced bundle (a_hat cols)", n, a_hat.ncols())?;
    check_dim("reduced bundle (f_hat)", n, f_hat.len())?;
    check_dim("reduced bundle (u0_hat)", n, u0_hat.len())?;
    Ok((
        ReducedSystem {
            flavor: h.flavor,
            a_hat,
            f_hat,
            u0_hat,
            n_s: h.n_s,
            n_t: h.n_t,
        },
        h.mu,
    ))
}

pub fn write_rom_solution(dir: &Path, sol: &RomSolution<f64>, mu: [f64; 2]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_vector_csv(&dir.join("coeffs.csv"), &sol.coeffs)?;
    write_json(
        &dir.join("solution.json"),
        &ReducedHeader {
            flavor: sol.flavor,
            n_s: sol.n_s,
            n_t: sol.n_t,
            mu,
        },
    )
}

pub fn read_rom_solution(dir: &Path) -> Result<(RomSolution<f64>, [f64; 2])> {
    let h: ReducedHeader = read_json(&dir.join("solution.json"))?;
    let coeffs = read_vector_csv(&dir.join("coeffs.csv"))?;
    check_dim("solution bundle (coeffs)", h.n_s * h.n_t, coeffs.len())?;
    Ok((
        RomSolution {
            flavor: h.flavor,
            coeffs,
            n_s: h.n_s,
            n_t: h.n_t,
        },
        h.mu,
    ))
}

/// Writes rows under a header line; values are already formatted.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
