use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use gkp_core::io::{load_wave, save_wave};
use gkp_core::spectral::{solve_solitary_wave, Field, Grid, Seed, SpectralError};

use super::csv_line;
use crate::config::{RunConfig, RunInputs, SeedChoice};
use crate::error::{config, CliError};
use crate::output::Output;
use crate::Globals;

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Exponent m/n with n odd.
    #[arg(long, default_value = "1/1")]
    p: String,
    /// Points per axis (one value, or one per axis).
    #[arg(long, default_value = "512")]
    grid: String,
    /// Half length of the box [−L, L) (one value, or one per axis).
    #[arg(long = "box", default_value = "40")]
    half_length: String,
    /// gaussian, lump, random (perturbed gaussian, needs --rng-seed) or file.
    #[arg(long, default_value = "gaussian")]
    seed: String,
    #[arg(long)]
    seed_file: Option<PathBuf>,
    /// 0 exports the projected seed without iterating.
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Stop when the relative update falls below this.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Basename of the wave file pair inside the output directory.
    #[arg(long, default_value = "wave")]
    name: String,
}

/// A seed is "near a fixed point" when one map application moves it by < 1%
/// and the stabilizing factor is within 1% of one.
const NEAR_FIXED_POINT: f64 = 1e-2;

fn random_seed(grid: &Grid, rng_seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let modes: Vec<(Vec<f64>, f64)> = (0..8)
        .map(|_| {
            let k: Vec<f64> = (0..grid.dim()).map(|_| rng.gen_range(-0.4..0.4)).collect();
            (k, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let amp: f64 = rng.gen_range(0.1..0.3);
    Field::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let base = (2.0 / 25.0 - 4.0 * x[0] * x[0] / 625.0) * (-r2 / 25.0).exp();
        let wobble: f64 = modes
            .iter()
            .map(|(k, ph)| (k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + ph).cos())
            .sum::<f64>()
            / modes.len() as f64;
        base * (1.0 + amp * wobble)
    })
}

pub fn run(args: SolveArgs, g: &Globals) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve(RunInputs {
        dim: args.dim,
        p: &args.p,
        grid: &args.grid,
        half_length: &args.half_length,
        seed: &args.seed,
        seed_file: args.seed_file.as_deref(),
        rng_seed: g.rng_seed,
        max_iter: args.max_iter,
        tol: args.tol,
        out_dir: g.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
    })?;
    let seed = match &cfg.seed {
        SeedChoice::Gaussian => Seed::Gaussian,
        SeedChoice::Lump => Seed::Lump,
        SeedChoice::Random(s) => {
            // The perturbation has ξ₁ = 0 content; strip it as the solver would.
            Seed::Field(gkp_core::spectral::project_zero_mean_x1(&random_seed(&cfg.grid, *s)))
        }
        SeedChoice::File(path) => {
            let (w, _) = load_wave(path)?;
            if w.grid() != &cfg.grid {
                return Err(config(format!("{} lives on a different grid", path.display())));
            }
            Seed::Field(w.field().clone())
        }
    };
    let mut out = Output::new(Some(&cfg.out_dir), g.command_line.clone())?;
    let start = Instant::now();
    let result = solve_solitary_wave(&cfg.grid, cfg.p, seed, &cfg.solver);
    let elapsed = start.elapsed().as_secs_f64();
    let (outcome, failure) = match result {
        Ok(o) => (Some(o), None),
        Err(e @ (SpectralError::NotConverged { .. } | SpectralError::Diverged { .. })) => (None, Some(e)),
        Err(e) => return Err(e.into()),
    };
    let history = match (&outcome, &failure) {
        (Some(o), _) => o.state.history().to_vec(),
        (None, Some(SpectralError::NotConverged { history, .. } | SpectralError::Diverged { history, .. })) => history.clone(),
        _ => Vec::new(),
    };
    let mut csv = String::from("iteration,residual,factor,update\n");
    for (k, r) in history.iter().enumerate() {
        csv += &format!("{k},{}\n", csv_line(&[r.residual, r.factor, r.update]));
    }
    out.write("history.csv", &csv)?;
    let Some(o) = outcome else {
        let e = failure.expect("failure recorded");
        out.write_json("summary.json", &json!({ "converged": false, "error": e.to_string(), "seconds": elapsed }))?;
        out.finish()?;
        return Err(e.into());
    };
    let (jp, bp) = save_wave(&cfg.out_dir.join(&args.name), &o.state, o.residual)?;
    out.record(jp.clone());
    out.record(bp);
    let near = o.seed_residual < NEAR_FIXED_POINT && (o.seed_factor - 1.0).abs() < NEAR_FIXED_POINT;
    let summary = json!({
        "dim": cfg.dim,
        "p": cfg.p.to_string(),
        "half_lengths": cfg.grid.half_lengths(),
        "sizes": cfg.grid.sizes(),
        "iterations": o.iterations,
        "converged": o.converged,
        "residual": o.residual,
        "seed_residual": o.seed_residual,
        "seed_factor": o.seed_factor,
        "seed_near_fixed_point": near,
        "seconds": elapsed,
        "wave": jp.file_name().map(|s| s.to_string_lossy().into_owned()),
    });
    out.write_json("summary.json", &summary)?;
    out.finish()?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(true)
}
