//! Run files of `key = value` lines. Each entry is turned into the matching
//! command-line flag and placed ahead of the user's own flags, so that flags given
//! on the command line win.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use gkp_core::kernel::QuadratureSpec;
use gkp_core::spectral::{Exponent, Grid, SolverOptions};

use crate::error::{config, CliError};

pub const SUBCOMMANDS: [&str; 4] = ["kernel", "solve", "verify", "riesz"];
/// Options valid before the subcommand.
pub const GLOBAL_KEYS: [&str; 3] = ["out-dir", "rng-seed", "threads"];
const GLOBAL_WITH_VALUE: [&str; 4] = ["--config", "--out-dir", "--rng-seed", "--threads"];

/// Parses a run file. Blank lines and `#` comments are skipped; `_` in keys is read as `-`.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(format!("line {}: bad key '{}'", no + 1, k.trim()));
        }
        if key == "config" {
            return Err(format!("line {}: run files cannot include other run files", no + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn as_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return args.get(i + 1).map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
        if SUBCOMMANDS.contains(&s.as_ref()) {
            break;
        }
    }
    None
}

fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if SUBCOMMANDS.contains(&s.as_ref()) {
            return Some(i);
        }
        i += if GLOBAL_WITH_VALUE.contains(&s.as_ref()) { 2 } else { 1 };
    }
    None
}

/// Splices the entries of the `--config` file (if any) into `args`.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    let entries = parse_file(&text).map_err(|m| config(format!("{}: {m}", path.display())))?;
    let (global, local): (Vec<_>, Vec<_>) = entries.into_iter().partition(|(k, _)| GLOBAL_KEYS.contains(&k.as_str()));
    let mut out = args;
    if let Some(pos) = subcommand_position(&out) {
        let tail = out.split_off(pos + 1);
        out.extend(as_flags(&local));
        out.extend(tail);
    } else if !local.is_empty() {
        return Err(config(format!("{}: subcommand options given but no subcommand", path.display())));
    }
    let tail = out.split_off(1);
    out.extend(as_flags(&global));
    out.extend(tail);
    Ok(out)
}

/// Comma-separated reals.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| config(format!("'{t}' in '{s}' is not a number"))))
        .collect()
}

/// Semicolon-separated points.
pub fn parse_points(s: &str, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let pts: Vec<Vec<f64>> = s.split(';').filter(|t| !t.trim().is_empty()).map(parse_vector).collect::<Result<_, _>>()?;
    if pts.is_empty() {
        return Err(config("no points given"));
    }
    if let Some(p) = pts.iter().find(|p| p.len() != dim) {
        return Err(config(format!("point {p:?} does not have {dim} components")));
    }
    Ok(pts)
}

/// A scalar applied to every axis or one value per axis.
pub fn per_axis<T: Copy + std::str::FromStr>(s: &str, dim: usize, what: &str) -> Result<Vec<T>, CliError> {
    let vals: Vec<T> = s
        .split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| config(format!("bad {what} '{s}'"))))
        .collect::<Result<_, _>>()?;
    match vals.len() {
        1 => Ok(vec![vals[0]; dim]),
        n if n == dim => Ok(vals),
        n => Err(config(format!("{what} has {n} entries for dimension {dim}"))),
    }
}

pub fn quadrature(abs_tol: f64, rel_tol: f64, lambda: Option<f64>, max_subdivisions: usize) -> Result<QuadratureSpec, CliError> {
    if !(abs_tol > 0.0 && rel_tol > 0.0) {
        return Err(config("tolerances must be positive"));
    }
    if lambda.is_some_and(|l| !(l > 0.0)) {
        return Err(config("lambda must be positive"));
    }
    Ok(QuadratureSpec {
        lambda,
        abs_tol,
        rel_tol,
        max_subdivisions,
        ..Default::default()
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeedChoice {
    Gaussian,
    Lump,
    /// The Gaussian seed with a smooth random perturbation.
    Random(u64),
    File(PathBuf),
}

/// A validated solver run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dim: usize,
    pub p: Exponent,
    pub grid: Grid,
    pub seed: SeedChoice,
    pub solver: SolverOptions,
    pub out_dir: PathBuf,
}

pub struct RunInputs<'a> {
    pub dim: usize,
    pub p: &'a str,
    pub grid: &'a str,
    pub half_length: &'a str,
    pub seed: &'a str,
    pub seed_file: Option<&'a Path>,
    pub rng_seed: Option<u64>,
    pub max_iter: usize,
    pub tol: f64,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Checks the exponent against the existence bound before anything is allocated.
    pub fn resolve(i: RunInputs) -> Result<Self, CliError> {
        if i.dim < 2 {
            return Err(config(format!("dimension must be at least 2, got {}", i.dim)));
        }
        let p = Exponent::parse(i.p)?;
        p.check_admissible(i.dim)?;
        let sizes: Vec<usize> = per_axis(i.grid, i.dim, "grid")?;
        let half: Vec<f64> = per_axis(i.half_length, i.dim, "box")?;
        let grid = Grid::new(half, sizes)?;
        let seed = match i.seed {
            "gaussian" => SeedChoice::Gaussian,
            "lump" => SeedChoice::Lump,
            "random" => SeedChoice::Random(
                i.rng_seed
                    .ok_or_else(|| config("--seed random needs an explicit --rng-seed"))?,
            ),
            "file" => SeedChoice::File(
                i.seed_file
                    .ok_or_else(|| config("--seed file needs --seed-file"))?
                    .to_path_buf(),
            ),
            other => return Err(config(format!("unknown seed '{other}' (gaussian, lump, random, file)"))),
        };
        if !(i.tol > 0.0) {
            return Err(config("tol must be positive"));
        }
        Ok(RunConfig {
            dim: i.dim,
            p,
            grid,
            seed,
            solver: SolverOptions {
                max_iter: i.max_iter,
                tol: i.tol,
                ..Default::default()
            },
            out_dir: i.out_dir,
        })
    }
}
