use crate::{BoundArgs, ComplexityArgs, Global, PredictArgs, SweepArgs, TrainArgs, VerifyArgs};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use strom::analysis::{
    complexity_study as run_complexity, loglog_slope, stability_constant_with, summarize, ComplexityConfig,
    ComplexityRow, FlavorSummary, StudyReport, STABILITY_CAP,
};
use strom::config::{FlavorChoice, RunConfig};
use strom::fom::{TimeSteps, DEFAULT_ORACLE_CAP};
use strom::io::{
    format_value, read_basis, read_json, write_basis, write_json, write_matrix_csv, write_reduced_system,
    write_rom_solution, write_table, write_trajectory,
};
use strom::model::assemble_system;
use strom::pipeline::{
    check_basis_fits, evaluate_cell, time_online, train as run_train, CellOptions, FomReference, TrainingManifest,
};
use strom::verify::{format_table, run_verify, Mutation, VerifyGrid};
use strom::{Error, Flavor, ProblemKind, ProblemSpec, Result, SpaceTimeBasis};

const MANIFEST: &str = "training_manifest.json";

fn load_config(g: &Global) -> Result<RunConfig> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("this command needs --config".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: Option<&RunConfig>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| cfg.map(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn pool(g: &Global) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(g.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))
}

fn cell_options(g: &Global, cfg: &RunConfig) -> CellOptions {
    CellOptions {
        repeats: cfg.timing_repeats,
        naive: g.naive,
        oracle_cap: g.oracle_cap.unwrap_or(DEFAULT_ORACLE_CAP),
        with_bound: false,
    }
}

fn load_basis(spec: &ProblemSpec, dir: &Path) -> Result<SpaceTimeBasis> {
    if !dir.join(strom::io::BASIS_HEADER).exists() {
        return Err(Error::InvalidInput(format!(
            "no basis bundle at {}; run `strom train` first",
            dir.display()
        )));
    }
    let (basis, header) = read_basis(dir)?;
    if header.problem.kind != spec.kind {
        return Err(Error::InvalidInput(format!(
            "basis bundle is for {}, config is {}",
            header.problem.kind, spec.kind
        )));
    }
    check_basis_fits(spec, &basis)?;
    Ok(basis)
}

pub fn train(g: &Global, args: &TrainArgs) -> Result<bool> {
    let cfg = load_config(g)?;
    let out = out_dir(g, Some(&cfg));
    let n_s = args.n_s.unwrap_or_else(|| cfg.n_s.max());
    let n_t = args.n_t.unwrap_or_else(|| cfg.n_t.max());
    let result = run_train(&cfg.problem, &cfg.train_mus, n_s, n_t)?;
    write_basis(&out.join("basis"), &result.basis, &cfg.problem, &result.manifest.training_parameters)?;
    write_json(&out.join(MANIFEST), &result.manifest)?;
    println!(
        "trained {} basis: N_s={} N_t={} n_s={} n_t={} in {:.3}s -> {}",
        cfg.problem.kind,
        result.basis.big_n_s(),
        result.basis.big_n_t(),
        n_s,
        n_t,
        result.manifest.total_time_s,
        out.display()
    );
    Ok(true)
}

pub fn predict(g: &Global, args: &PredictArgs) -> Result<bool> {
    let cfg = load_config(g)?;
    let out = out_dir(g, Some(&cfg));
    let spec = &cfg.problem;
    let mu = args
        .mu
        .or(cfg.target_mu)
        .ok_or_else(|| Error::InvalidInput("no --mu given and the config has no target_mu".into()))?;
    let full = load_basis(spec, &args.basis.clone().unwrap_or_else(|| out.join("basis")))?;
    let basis = full.truncate(args.n_s.unwrap_or(full.n_s()), args.n_t.unwrap_or(full.n_t()))?;
    let flavors = args.flavor.map(FlavorChoice::flavors).unwrap_or_else(|| cfg.flavors());
    let opts = cell_options(g, &cfg);

    let reference = FomReference::compute(spec, mu, opts.repeats)?;
    let dir = out.join("predict");
    let grid = &spec.grid;
    let final_grid = |v: &[f64]| {
        // Rows follow y, columns follow x.
        nalgebra::DMatrix::from_fn(grid.interior_y(), grid.interior_x(), |iy, ix| v[grid.index(ix, iy)])
    };
    let fom_final = reference.trajectory.states.column(reference.trajectory.n_t() - 1);
    write_matrix_csv(&dir.join("fom_final.csv"), &final_grid(fom_final.as_slice()))?;

    let mut reports = Vec::new();
    for &flavor in &flavors {
        let cell = evaluate_cell(spec, &reference, &basis, flavor, &opts)?;
        let sub = dir.join(flavor.name());
        write_reduced_system(&sub.join("reduced"), &cell.reduced, mu)?;
        write_rom_solution(&sub.join("solution"), &cell.solution, mu)?;
        write_trajectory(&sub, "rom", &cell.rom)?;
        let last = cell.rom.states.column(cell.rom.n_t() - 1);
        write_matrix_csv(&dir.join(format!("{}_final.csv", flavor.name())), &final_grid(last.as_slice()))?;
        let r = &cell.report;
        println!(
            "{:<8} mu=({}, {}) n_s={} n_t={} error={:.4e} residual={:.4e} speedup={:.1}",
            flavor.name(),
            r.mu[0],
            r.mu[1],
            r.n_s,
            r.n_t,
            r.relative_error,
            r.st_residual_norm,
            r.speedup
        );
        reports.push(cell.report);
    }
    write_reports(&dir.join("report.csv"), &reports)?;
    write_json(&dir.join("report.json"), &reports)?;
    Ok(true)
}

fn write_reports(path: &Path, reports: &[StudyReport]) -> Result<()> {
    write_table(path, &StudyReport::CSV_COLUMNS, reports.iter().map(StudyReport::csv_record))
}

#[derive(Debug, Clone, Serialize)]
struct CellFailure {
    mu: [f64; 2],
    n_s: usize,
    n_t: usize,
    flavor: Flavor,
    error: String,
}

#[derive(Debug, Clone, Serialize)]
struct TotalSpeedup {
    flavor: Flavor,
    n_s: usize,
    n_t: usize,
    cells: usize,
    fom_total_s: f64,
    training_s: f64,
    rom_online_total_s: f64,
    rom_total_s: f64,
    total_speedup: f64,
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary {
    problem: ProblemKind,
    cells: usize,
    failures: usize,
    flavors: Vec<FlavorSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total: Option<Vec<TotalSpeedup>>,
}

pub fn sweep(g: &Global, args: &SweepArgs) -> Result<bool> {
    let cfg = load_config(g)?;
    let out = out_dir(g, Some(&cfg));
    let spec = &cfg.problem;
    let basis_dir = args.basis.clone().unwrap_or_else(|| out.join("basis"));
    let full = load_basis(spec, &basis_dir)?;
    let n_s_values = args.n_s.clone().unwrap_or_else(|| cfg.n_s.values());
    let n_t_values = args.n_t.clone().unwrap_or_else(|| cfg.n_t.values());
    let training = if args.total {
        let path = basis_dir.parent().unwrap_or(Path::new(".")).join(MANIFEST);
        let manifest: TrainingManifest = read_json(&path)?;
        Some(manifest.total_time_s)
    } else {
        None
    };

    let mut mus = cfg.test_points();
    if mus.is_empty() {
        mus.extend(cfg.target_mu);
    }
    if mus.is_empty() {
        return Err(Error::InvalidInput("config has neither test_mus nor target_mu".into()));
    }

    let mut failures = Vec::new();
    let mut dims = Vec::new();
    for &n_s in &n_s_values {
        for &n_t in &n_t_values {
            match full.truncate(n_s, n_t) {
                Ok(b) => dims.push((n_s, n_t, b)),
                Err(e) => failures.extend(cfg.flavors().into_iter().flat_map(|flavor| {
                    let error = e.to_string();
                    mus.iter().map(move |&mu| CellFailure {
                        mu,
                        n_s,
                        n_t,
                        flavor,
                        error: error.clone(),
                    })
                })),
            }
        }
    }
    let cells: Vec<(usize, Flavor)> = (0..dims.len())
        .flat_map(|d| cfg.flavors().into_iter().map(move |f| (d, f)))
        .collect();

    let opts = cell_options(g, &cfg);
    let untimed = CellOptions {
        repeats: 0,
        ..opts.clone()
    };
    let workers = pool(g)?;
    let mut reports = Vec::new();
    for (idx, &mu) in mus.iter().enumerate() {
        let mut reference = match FomReference::prepare(spec, mu) {
            Ok(r) => r,
            Err(e) => {
                for &(d, flavor) in &cells {
                    failures.push(CellFailure {
                        mu,
                        n_s: dims[d].0,
                        n_t: dims[d].1,
                        flavor,
                        error: e.to_string(),
                    });
                }
                continue;
            }
        };
        // Accuracy in parallel; every timed region below runs alone.
        let evaluated: Vec<Result<StudyReport>> = workers.install(|| {
            cells
                .par_iter()
                .map(|&(d, flavor)| evaluate_cell(spec, &reference, &dims[d].2, flavor, &untimed).map(|c| c.report))
                .collect()
        });
        if let Err(e) = reference.time(opts.repeats) {
            eprintln!("warning: FOM timing failed: {e}");
        }
        for (&(d, flavor), res) in cells.iter().zip(evaluated) {
            let timed = res.and_then(|mut r| {
                r.rom_online_time_s = time_online(&reference, &dims[d].2, flavor, &opts)?;
                r.fom_time_s = reference.fom_time_s;
                r.speedup = r.fom_time_s / r.rom_online_time_s;
                Ok(r)
            });
            match timed {
                Ok(r) => reports.push(r),
                Err(e) => failures.push(CellFailure {
                    mu,
                    n_s: dims[d].0,
                    n_t: dims[d].1,
                    flavor,
                    error: e.to_string(),
                }),
            }
        }
        eprintln!("[{}/{}] mu=({}, {})", idx + 1, mus.len(), mu[0], mu[1]);
    }

    std::fs::create_dir_all(&out)?;
    write_reports(&out.join("sweep.csv"), &reports)?;
    write_table(
        &out.join("sweep_failures.csv"),
        &["flavor", "mu_1", "mu_2", "n_s", "n_t", "error"],
        failures.iter().map(|f| {
            vec![
                f.flavor.name().to_string(),
                format_value(f.mu[0]),
                format_value(f.mu[1]),
                f.n_s.to_string(),
                f.n_t.to_string(),
                f.error.clone(),
            ]
        }),
    )?;
    let total = training.map(|training_s| total_speedups(&reports, training_s));
    let summary = SweepSummary {
        problem: spec.kind,
        cells: reports.len(),
        failures: failures.len(),
        flavors: summarize(&reports),
        total,
    };
    write_json(&out.join("sweep_summary.json"), &summary)?;
    for s in &summary.flavors {
        println!(
            "{:<8} cells={} max_error={:.4e} mean_error={:.4e} median_speedup={:.1}",
            s.flavor.name(),
            s.cells,
            s.max_relative_error,
            s.mean_relative_error,
            s.median_speedup
        );
    }
    for t in summary.total.iter().flatten() {
        println!(
            "total {:<8} n_s={} n_t={} fom={:.3}s rom={:.3}s speedup={:.3}",
            t.flavor.name(),
            t.n_s,
            t.n_t,
            t.fom_total_s,
            t.rom_total_s,
            t.total_speedup
        );
    }
    for f in &failures {
        eprintln!(
            "failed {} mu=({}, {}) n_s={} n_t={}: {}",
            f.flavor, f.mu[0], f.mu[1], f.n_s, f.n_t, f.error
        );
    }
    Ok(failures.is_empty())
}

/// Training cost charged once to every (flavor, n_s, n_t) series.
fn total_speedups(reports: &[StudyReport], training_s: f64) -> Vec<TotalSpeedup> {
    let mut keys: Vec<(Flavor, usize, usize)> = Vec::new();
    for r in reports {
        let k = (r.flavor, r.n_s, r.n_t);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(flavor, n_s, n_t)| {
            let series: Vec<&StudyReport> = reports
                .iter()
                .filter(|r| (r.flavor, r.n_s, r.n_t) == (flavor, n_s, n_t))
                .collect();
            let fom_total_s: f64 = series.iter().map(|r| r.fom_time_s).sum();
            let rom_online_total_s: f64 = series.iter().map(|r| r.rom_online_time_s).sum();
            let rom_total_s = training_s + rom_online_total_s;
            TotalSpeedup {
                flavor,
                n_s,
                n_t,
                cells: series.len(),
                fom_total_s,
                training_s,
                rom_online_total_s,
                rom_total_s,
                total_speedup: fom_total_s / rom_total_s,
            }
        })
        .collect()
}

pub fn verify(g: &Global, args: &VerifyArgs) -> Result<bool> {
    let defaults = VerifyGrid::default();
    let grid = VerifyGrid {
        kinds: args.kinds.clone().unwrap_or(defaults.kinds),
        meshes: args.meshes.clone().map(|l| l.0).unwrap_or(defaults.meshes),
        time_steps: args.time_steps.clone().map(|l| l.0).unwrap_or(defaults.time_steps),
        n_s_values: args.n_s.clone().map(|l| l.0).unwrap_or(defaults.n_s_values),
        n_t_values: args.n_t.clone().map(|l| l.0).unwrap_or(defaults.n_t_values),
        oracle_cap: g.oracle_cap.unwrap_or(defaults.oracle_cap),
    };
    let mutation = match args.inject_flip {
        Some((k, j)) => Mutation::FlipD { k, j },
        None => Mutation::None,
    };
    let report = run_verify(&grid, mutation);
    print!("{}", format_table(&report));
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(out) = &g.out {
        write_json(&out.join("verify.json"), &report)?;
    }
    let failed = report.failures().count();
    println!("{} checks, {} failed", report.checks.len(), failed);
    Ok(failed == 0)
}

pub fn bound_study(g: &Global, args: &BoundArgs) -> Result<bool> {
    let cfg = g.config.as_ref().map(|_| load_config(g)).transpose()?;
    let out = out_dir(g, cfg.as_ref());
    let kind = args
        .problem
        .or(cfg.as_ref().map(|c| c.problem.kind))
        .unwrap_or(ProblemKind::Diffusion2D);
    let nx = args.nx.or(cfg.as_ref().map(|c| c.problem.grid.nx)).unwrap_or(70);
    let mu = args.mu.unwrap_or_else(|| kind.target_parameter());
    let spec = ProblemSpec::new(kind, nx, nx, 1)?;
    let system = assemble_system(&spec, mu)?;
    let cap = g.oracle_cap.unwrap_or(STABILITY_CAP);

    let mut all_ok = true;
    let mut rows = Vec::new();
    for &nt in &args.nt {
        let steps = TimeSteps::uniform(args.dt, nt);
        let row = match stability_constant_with(&system, &steps, cap) {
            Ok(est) => {
                all_ok &= est.converged;
                println!(
                    "N_t={nt:<4} inv_norm={:.6e} eta={:.6e} iterations={} converged={}",
                    est.inv_norm, est.eta, est.iterations, est.converged
                );
                vec![
                    nt.to_string(),
                    format_value(args.dt),
                    format_value(est.inv_norm),
                    format_value(est.eta),
                    est.converged.to_string(),
                    est.iterations.to_string(),
                    String::new(),
                ]
            }
            Err(e) => {
                all_ok = false;
                eprintln!("N_t={nt}: {e}");
                vec![
                    nt.to_string(),
                    format_value(args.dt),
                    String::new(),
                    String::new(),
                    "false".into(),
                    "0".into(),
                    e.to_string(),
                ]
            }
        };
        rows.push(row);
    }
    write_table(
        &out.join("bound_study.csv"),
        &["N_t", "dt", "inv_norm", "eta", "converged", "iterations", "error"],
        rows,
    )?;
    Ok(all_ok)
}

#[derive(Debug, Serialize)]
struct Slopes {
    flavor: Flavor,
    block_slope: f64,
    naive_slope: f64,
}

pub fn complexity_study(g: &Global, args: &ComplexityArgs) -> Result<bool> {
    let cfg = g.config.as_ref().map(|_| load_config(g)).transpose()?;
    let out = out_dir(g, cfg.as_ref());
    let defaults = ComplexityConfig::default();
    let study = ComplexityConfig {
        kind: args.problem,
        mesh_sizes: args.meshes.clone(),
        n_t_steps: args.nt,
        n_s: args.n_s,
        n_t: args.n_t,
        repeats: args.repeats,
        seed: g.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(defaults.seed),
        naive_cap: g.oracle_cap.unwrap_or(defaults.naive_cap),
    };
    let rows = run_complexity(&study)?;
    write_table(
        &out.join("complexity.csv"),
        &ComplexityRow::CSV_COLUMNS,
        rows.iter().map(ComplexityRow::csv_record),
    )?;
    let mut slopes = Vec::new();
    for flavor in Flavor::ALL {
        let series: Vec<&ComplexityRow> = rows.iter().filter(|r| r.flavor == flavor).collect();
        let n: Vec<f64> = series.iter().map(|r| r.big_n_s as f64).collect();
        let block: Vec<f64> = series.iter().map(|r| r.block_time).collect();
        let naive: Vec<f64> = series.iter().map(|r| r.naive_time).collect();
        let s = Slopes {
            flavor,
            block_slope: loglog_slope(&n, &block)?,
            naive_slope: loglog_slope(&n, &naive)?,
        };
        println!(
            "{:<8} block slope {:.3}  naive slope {:.3}",
            flavor.name(),
            s.block_slope,
            s.naive_slope
        );
        slopes.push(s);
    }
    write_json(&out.join("complexity_slopes.json"), &slopes)?;
    Ok(true)
}
