//! The five subcommands. Each reads its section of the configuration, runs
//! the computation and writes its files under the output directory.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vortwave::verifier::{ReportOptions, Status, VerificationReport};
use vortwave::wavesolver::{self, AmplitudeConstraint, WaveGrid, WaveSolution};
use vortwave::{diagnostics, dispersion, flowforce, laminar, VorticityModel};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{row, write_atomic, Header};
use crate::solution_file;

/// Amplitude of the uniform noise added to the seed by `--seed`.
pub const SEED_NOISE: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub tol_scale: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            out: PathBuf::from("."),
            seed: None,
            tol_scale: 1.0,
        }
    }
}

fn model(config: &RunConfig) -> CliResult<VorticityModel> {
    Ok(VorticityModel::from_spec(config.vorticity.clone())?)
}

fn linspace(range: [f64; 2], n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| range[0] + (range[1] - range[0]) * k as f64 / (n - 1) as f64)
        .collect()
}

fn infinite_as_text(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "inf".to_string()
    }
}

/// `laminar.csv`: d, R, σ and κ over the configured slips at Bernoulli `r`.
pub fn laminar(config: &RunConfig, opts: &Options) -> CliResult<Vec<PathBuf>> {
    let cfg = config.section(&config.laminar, "laminar")?;
    let model = model(config)?;
    let family = laminar::StreamFamily::new(model.clone())?;
    let rc = family.regime();
    if cfg.s_range[0] <= rc.s_0 {
        return Err(CliError::Config(format!(
            "laminar.s_range must lie above s_0 = {}, got {:?}",
            rc.s_0, cfg.s_range
        )));
    }
    let pair = family.conjugate(cfg.r)?;

    let mut header = Header::with_config("vortwave laminar", config);
    header
        .set("r", cfg.r)
        .set("s_0", rc.s_0)
        .set("s_c", rc.s_c)
        .set("R_c", rc.r_c)
        .set("d_0", infinite_as_text(rc.d_0))
        .set("R_0", infinite_as_text(rc.r_0))
        .set("s_minus", pair.s_minus)
        .set("s_plus", pair.s_plus)
        .set("d_minus", pair.d_minus)
        .set("d_plus", pair.d_plus)
        .set("FF_minus", pair.ff_minus)
        .set("FF_plus", pair.ff_plus)
        .set("kappa_reference", "FF_minus");
    let mut text = header.render();
    text.push_str("s,d,R,sigma,kappa\n");
    for s in linspace(cfg.s_range, cfg.n_samples) {
        let d = laminar::depth(&model, s)?;
        let big_r = laminar::bernoulli_of_slip(&model, s)?;
        let sigma = diagnostics::sigma(&model, s, cfg.r)?;
        let kappa = 2.0 * (pair.ff_minus - sigma) - (cfg.r - big_r).powi(2);
        text.push_str(&row(&[s, d, big_r, sigma, kappa]));
    }
    let path = opts.out.join("laminar.csv");
    write_atomic(&path, &text)?;
    Ok(vec![path])
}

/// `dispersion.csv`: the eigenfunction at one slip, or μ₁ with λ₁ or k over
/// a range of slips.
pub fn dispersion(config: &RunConfig, opts: &Options) -> CliResult<Vec<PathBuf>> {
    let cfg = config.section(&config.dispersion, "dispersion")?;
    let model = model(config)?;
    let mut header = Header::with_config("vortwave dispersion", config);
    let text = match (cfg.s, cfg.s_range) {
        (Some(s), _) => {
            let e = dispersion::principal_eigenpair(&model, s, cfg.n_nodes)?;
            header
                .set("s", s)
                .set("mu", e.mu)
                .set("lambda", e.lambda.map_or("none".to_string(), crate::output::num))
                .set("k", e.wavenumber.map_or("none".to_string(), crate::output::num))
                .set("richardson_gap", e.richardson_gap)
                .set("n_nodes", e.n_nodes);
            let mut text = header.render();
            text.push_str("p,phi\n");
            for (p, phi) in e.p_grid.iter().zip(&e.phi) {
                text.push_str(&row(&[*p, *phi]));
            }
            text
        }
        (None, Some(range)) => {
            let n = cfg.n_samples.unwrap_or(2);
            header.set("n_nodes", cfg.n_nodes);
            let mut text = header.render();
            text.push_str("s,mu,lambda,k\n");
            for s in linspace(range, n) {
                let e = dispersion::principal_eigenpair(&model, s, cfg.n_nodes)?;
                let nan = f64::NAN;
                text.push_str(&row(&[s, e.mu, e.lambda.unwrap_or(nan), e.wavenumber.unwrap_or(nan)]));
            }
            text
        }
        (None, None) => unreachable!("validated configuration"),
    };
    let path = opts.out.join("dispersion.csv");
    write_atomic(&path, &text)?;
    Ok(vec![path])
}

fn noisy_base(model: &VorticityModel, grid: &WaveGrid, s: f64, seed: u64) -> CliResult<WaveSolution> {
    let base = wavesolver::exact_laminar(model, grid, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = grid.n_p - 1;
    let h = Array2::from_shape_fn((grid.n_q, grid.n_p), |(i, j)| {
        let v = base.h[[i, j]];
        if j == 0 {
            v
        } else {
            v + SEED_NOISE * rng.gen_range(-1.0..1.0) * if j == top { 1.0 } else { v.abs().max(1e-3) }
        }
    });
    let mut sol = wavesolver::newton_solve(model, grid, &h, base.r, AmplitudeConstraint::crest_trough(0.0))?;
    sol.seed_slip = Some(s);
    Ok(sol)
}

struct BranchRow {
    a: f64,
    r: f64,
    ff: f64,
    eta_min: f64,
    eta_max: f64,
    lower: f64,
    upper: f64,
    deviation: f64,
    residual: f64,
}

fn branch_row(sol: &WaveSolution) -> CliResult<BranchRow> {
    let ff = flowforce::flow_force(sol)?;
    let eta = wavesolver::surface_profile(sol);
    let (lower, upper) = match laminar::conjugate_streams(&sol.model, sol.r) {
        Ok(p) => (ff.ff - p.ff_minus, p.ff_plus - ff.ff),
        Err(_) => (f64::NAN, f64::NAN),
    };
    Ok(BranchRow {
        a: sol.amplitude.value,
        r: sol.r,
        ff: ff.ff,
        eta_min: eta.min,
        eta_max: eta.max,
        lower,
        upper,
        deviation: ff.max_column_deviation,
        residual: sol.residual_norm,
    })
}

/// One solution file per continuation step and `branch.csv`, all under
/// `<out>/<output_path>/`. A branch that stops early is still written, then
/// reported as a numerical failure.
pub fn solve(config: &RunConfig, opts: &Options) -> CliResult<Vec<PathBuf>> {
    let cfg = config.section(&config.solve, "solve")?;
    let model = model(config)?;
    let (period, period_source) = match cfg.period.value() {
        Some(&l) => (l, "config"),
        None => {
            let k = dispersion::bifurcation_wavenumber(&model, cfg.s)?;
            (2.0 * std::f64::consts::PI / k, "auto")
        }
    };
    let grid = WaveGrid::new(period, cfg.n_q, cfg.n_p)?;
    let mut branch = wavesolver::continue_in_amplitude(&model, cfg.s, &grid, cfg.a_max, cfg.n_steps)?;
    if let Some(seed) = opts.seed {
        branch.solutions[0] = noisy_base(&model, &grid, cfg.s, seed)?;
    }

    let dir = opts.out.join(&cfg.output_path);
    let mut written = Vec::new();
    let mut summary = Header::with_config("vortwave branch", config);
    summary
        .set("s", cfg.s)
        .set("period", period)
        .set("period_source", period_source)
        .set("wavenumber", branch.wavenumber)
        .set("seed", opts.seed.map_or("none".to_string(), |s| s.to_string()))
        .set("members", branch.solutions.len())
        .set("stop_reason", branch.stop_reason.as_deref().unwrap_or("none"));
    let mut table = summary.render();
    table.push_str("step,a,r,ff,eta_min,eta_max,ff_minus_margin,ff_plus_margin,max_column_deviation,residual_norm\n");
    for (step, sol) in branch.solutions.iter().enumerate() {
        let mut extra = Header::with_config("vortwave solution", config);
        extra
            .set("step", step)
            .set("period_source", period_source)
            .set("seed", opts.seed.map_or("none".to_string(), |s| s.to_string()));
        let path = dir.join(format!("step_{step:03}.csv"));
        solution_file::write(&path, sol, &extra)?;
        written.push(path);
        let b = branch_row(sol)?;
        table.push_str(&row(&[step as f64, b.a, b.r, b.ff, b.eta_min, b.eta_max, b.lower, b.upper, b.deviation, b.residual]));
    }
    let path = dir.join("branch.csv");
    write_atomic(&path, &table)?;
    written.push(path);
    match branch.stop_reason {
        Some(reason) => Err(CliError::Numerical(vortwave::Error::Convergence(format!(
            "continuation stopped after {} member(s): {reason}",
            branch.solutions.len()
        )))),
        None => Ok(written),
    }
}

/// `flux.csv` with Φ and w at every node and `flux_top.csv` with the surface
/// traces.
pub fn flux(config: &RunConfig, opts: &Options) -> CliResult<Vec<PathBuf>> {
    let cfg = config.section(&config.flux, "flux")?;
    let sol = solution_file::read(Path::new(&cfg.solution_path))?;
    check_model(config, &sol)?;
    let f = flowforce::flux_function(&sol, cfg.s)?;
    let big_r = laminar::bernoulli_of_slip(&sol.model, cfg.s)?;
    let sigma = diagnostics::sigma(&sol.model, cfg.s, sol.r)?;
    let (i_min, phi_min) = f
        .top_trace
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });

    let mut header = Header::with_config("vortwave flux", config);
    header
        .set("s", cfg.s)
        .set("r", sol.r)
        .set("R", big_r)
        .set("ff", f.ff)
        .set("sigma", sigma)
        .set("kappa", 2.0 * (f.ff - sigma) - (sol.r - big_r).powi(2))
        .set("top_min", phi_min)
        .set("top_argmin_q", sol.grid.q(i_min));
    let mut full = header.render();
    full.push_str("q,p,phi,w\n");
    let (n_q, n_p) = (sol.grid.n_q, sol.grid.n_p);
    for i in 0..n_q {
        for j in 0..n_p {
            full.push_str(&row(&[sol.grid.q(i), sol.grid.p(j), f.phi[[i, j]], f.w[[i, j]]]));
        }
    }
    let mut top = header.render();
    top.push_str("q,eta,phi,w\n");
    for i in 0..n_q {
        top.push_str(&row(&[sol.grid.q(i), sol.h[[i, n_p - 1]], f.top_trace[i], f.w[[i, n_p - 1]]]));
    }
    let paths = vec![opts.out.join("flux.csv"), opts.out.join("flux_top.csv")];
    write_atomic(&paths[0], &full)?;
    write_atomic(&paths[1], &top)?;
    Ok(paths)
}

fn check_model(config: &RunConfig, sol: &WaveSolution) -> CliResult<()> {
    if sol.model.spec() != &config.vorticity {
        return Err(CliError::Config(
            "vorticity in the configuration differs from the solution file".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config_hash: String,
    solution_path: &'a str,
    tol_scale: f64,
    s_probes: Option<&'a [f64]>,
    passed: usize,
    failed: usize,
    inconclusive: usize,
    report: &'a VerificationReport,
}

/// `report.txt` and `report.json`. Any failed check is returned as
/// [`CliError::VerificationFailed`] after both files are written.
pub fn verify(config: &RunConfig, opts: &Options) -> CliResult<Vec<PathBuf>> {
    let cfg = config.section(&config.verify, "verify")?;
    let sol = solution_file::read(Path::new(&cfg.solution_path))?;
    check_model(config, &sol)?;
    let options = ReportOptions {
        tol_scale: opts.tol_scale,
        s_probes: cfg.s_probe.value().cloned(),
    };
    let report = vortwave::verifier::full_report_with(&sol, &options)?;
    let failed = report.count(Status::Fail);

    let mut header = Header::with_config("vortwave verification", config);
    header
        .set("solution_path", &cfg.solution_path)
        .set("tol_scale", opts.tol_scale)
        .set(
            "s_probe",
            options
                .s_probes
                .as_ref()
                .map_or("auto".to_string(), |v| format!("{v:?}")),
        )
        .set("passed", report.count(Status::Pass))
        .set("failed", failed)
        .set("inconclusive", report.count(Status::Inconclusive));
    let text = header.render() + &report.to_text();
    let json = JsonReport {
        config_hash: config.hash(),
        solution_path: &cfg.solution_path,
        tol_scale: opts.tol_scale,
        s_probes: options.s_probes.as_deref(),
        passed: report.count(Status::Pass),
        failed,
        inconclusive: report.count(Status::Inconclusive),
        report: &report,
    };
    let mut json_text = serde_json::to_string_pretty(&json).expect("report serializes");
    json_text.push('\n');
    let paths = vec![opts.out.join("report.txt"), opts.out.join("report.json")];
    write_atomic(&paths[0], &text)?;
    write_atomic(&paths[1], &json_text)?;
    if failed > 0 {
        return Err(CliError::VerificationFailed(failed));
    }
    Ok(paths)
}
