//! Solution files: a `# key = value` header followed by the height field as
//! CSV in row-major order.
//!
//! ```text
//! # vortwave solution
//! # format = 1
//! # vorticity = {"kind":"constant","b":-1.0}
//! # period = 6.98...
//! # n_q = 128
//! # n_p = 64
//! # r = 1.62...
//! # amplitude = {"measure":"crest-trough","value":0.05}
//! # residual_norm = 4.5e-12
//! # iterations = 2
//! # seed_slip = 0.36
//! # columns = i,j,q,p,h
//! i,j,q,p,h
//! 0,0,0,0,0
//! ...
//! ```
//!
//! Rows run over `i` (q index) in the outer loop and `j` (p index) inside.
//! Readers recompute the residual and the near-solitary flag from the data
//! rather than trusting the header.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use vortwave::wavesolver::{self, AmplitudeConstraint, WaveGrid, WaveSolution};
use vortwave::{VorticityModel, VorticitySpec};

use crate::error::{CliError, CliResult};
use crate::output::{row, write_atomic, Header};

pub const FORMAT_VERSION: u32 = 1;
const COLUMNS: &str = "i,j,q,p,h";

/// Renders a solution, with extra header lines placed after the title.
pub fn render(sol: &WaveSolution, extra: &Header) -> String {
    let mut out = extra.render();
    let mut h = Header::default();
    h.set("format", FORMAT_VERSION)
        .set("vorticity", serde_json::to_string(sol.model.spec()).expect("spec serializes"))
        .set("period", sol.grid.period)
        .set("n_q", sol.grid.n_q)
        .set("n_p", sol.grid.n_p)
        .set("r", sol.r)
        .set("amplitude", serde_json::to_string(&sol.amplitude).expect("amplitude serializes"))
        .set("residual_norm", sol.residual_norm)
        .set("iterations", sol.iterations)
        .set(
            "seed_slip",
            sol.seed_slip.map_or_else(|| "none".to_string(), crate::output::num),
        )
        .set("columns", COLUMNS);
    out.push_str(&h.render());
    out.push_str(COLUMNS);
    out.push('\n');
    for i in 0..sol.grid.n_q {
        for j in 0..sol.grid.n_p {
            out.push_str(&row(&[i as f64, j as f64, sol.grid.q(i), sol.grid.p(j), sol.h[[i, j]]]));
        }
    }
    out
}

pub fn write(path: &Path, sol: &WaveSolution, extra: &Header) -> CliResult<()> {
    write_atomic(path, &render(sol, extra))
}

fn parse_err(path: &Path, line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::file(path, format!("line {line}: {message}"))
}

pub fn read(path: &Path) -> CliResult<WaveSolution> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> CliResult<WaveSolution> {
    let mut header = BTreeMap::new();
    let mut body = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                let key = k.trim();
                if !key.contains(':') {
                    header.insert(key.to_string(), (line_no, v.trim().to_string()));
                }
            }
        } else if !line.trim().is_empty() {
            body.push((line_no, line));
        }
    }
    let get = |key: &str| {
        header
            .get(key)
            .ok_or_else(|| CliError::file(path, format!("missing header key `{key}`")))
    };
    let number = |key: &str| -> CliResult<f64> {
        let (line, v) = get(key)?;
        v.parse::<f64>().map_err(|e| parse_err(path, *line, format!("{key}: {e}")))
    };
    let count = |key: &str| -> CliResult<usize> {
        let (line, v) = get(key)?;
        v.parse::<usize>().map_err(|e| parse_err(path, *line, format!("{key}: {e}")))
    };

    let (line, v) = get("format")?;
    if v.parse::<u32>().ok() != Some(FORMAT_VERSION) {
        return Err(parse_err(path, *line, format!("unsupported format `{v}`")));
    }
    let (line, v) = get("vorticity")?;
    let spec: VorticitySpec =
        serde_json::from_str(v).map_err(|e| parse_err(path, *line, format!("vorticity: {e}")))?;
    let model = VorticityModel::from_spec(spec).map_err(|e| parse_err(path, *line, e))?;
    let (line, v) = get("amplitude")?;
    let amplitude: AmplitudeConstraint =
        serde_json::from_str(v).map_err(|e| parse_err(path, *line, format!("amplitude: {e}")))?;
    let (n_q, n_p) = (count("n_q")?, count("n_p")?);
    let grid = WaveGrid::new(number("period")?, n_q, n_p).map_err(|e| CliError::file(path, e))?;
    let r = number("r")?;
    let iterations = count("iterations").unwrap_or(0);
    let seed_slip = match header.get("seed_slip") {
        None => None,
        Some((_, v)) if v == "none" => None,
        Some((line, v)) => Some(
            v.parse::<f64>()
                .map_err(|e| parse_err(path, *line, format!("seed_slip: {e}")))?,
        ),
    };

    let mut rows = body.into_iter();
    match rows.next() {
        Some((_, l)) if l.trim() == COLUMNS => {}
        Some((line, l)) => return Err(parse_err(path, line, format!("expected `{COLUMNS}`, got `{l}`"))),
        None => return Err(CliError::file(path, "no data")),
    }
    let mut h = Array2::from_elem((n_q, n_p), f64::NAN);
    let mut seen = 0usize;
    for (line, l) in rows {
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(parse_err(path, line, format!("expected 5 fields, got {}", fields.len())));
        }
        let i: usize = fields[0].parse().map_err(|e| parse_err(path, line, e))?;
        let j: usize = fields[1].parse().map_err(|e| parse_err(path, line, e))?;
        let value: f64 = fields[4].parse().map_err(|e| parse_err(path, line, e))?;
        if i >= n_q || j >= n_p {
            return Err(parse_err(path, line, format!("index ({i}, {j}) outside {n_q} x {n_p}")));
        }
        if !value.is_finite() {
            return Err(parse_err(path, line, "non-finite height"));
        }
        if !h[[i, j]].is_nan() {
            return Err(parse_err(path, line, format!("duplicate node ({i}, {j})")));
        }
        h[[i, j]] = value;
        seen += 1;
    }
    if seen != n_q * n_p {
        return Err(CliError::file(path, format!("expected {} nodes, found {seen}", n_q * n_p)));
    }

    let residual = wavesolver::residual(&model, &grid, &h, r).map_err(|e| CliError::file(path, e))?;
    let top = n_p - 1;
    let residual_norm = residual
        .indexed_iter()
        .filter(|((_, j), _)| *j > 0 && *j <= top)
        .fold(0.0f64, |a, (_, v)| a.max(v.abs()));
    Ok(WaveSolution {
        near_solitary: wavesolver::is_near_solitary(&model, grid.period, r),
        grid,
        h,
        r,
        model,
        amplitude,
        residual_norm,
        iterations,
        residual_history: vec![residual_norm],
        seed_slip,
    })
}
