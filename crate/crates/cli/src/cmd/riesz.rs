use clap::Args;
use serde_json::json;

use gkp_core::kernel::{verify_riesz_identity, Direction, QuadratureSpec};

use super::{csv_line, pass_word};
use crate::config::parse_vector;
use crate::error::{config, CliError};
use crate::output::Output;
use crate::{Globals, QuadArgs};

pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct RieszArgs {
    /// Direction σ (normalized). Without it, a sweep over N ∈ {2, 3} and four directions each.
    #[arg(long)]
    sigma: Option<String>,
    /// 1-based axis; default: every axis with σ_j ≠ 0.
    #[arg(long)]
    axis: Option<usize>,
    #[command(flatten)]
    quad: QuadArgs,
}

/// The default sweep: axes, diagonals and one generic direction in N = 2 and 3.
pub fn sweep_directions() -> Vec<Direction> {
    let raw: [&[f64]; 8] = [
        &[1.0, 0.0],
        &[0.0, 1.0],
        &[1.0, 1.0],
        &[0.6, -0.8],
        &[1.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0],
        &[1.0, 1.0, 1.0],
        &[0.6, 0.0, 0.8],
    ];
    raw.iter().map(|v| Direction::normalized(v).expect("nonzero")).collect()
}

/// Checks every requested (σ, j); prints and records one row each.
pub fn check(dirs: &[Direction], axis: Option<usize>, quad: &QuadratureSpec, out: &mut Output) -> Result<bool, CliError> {
    let mut csv = String::from("dim,sigma,axis,rhs,expected,residual,pass\n");
    let mut rows = Vec::new();
    let mut all = true;
    for s in dirs {
        let axes: Vec<usize> = match axis {
            Some(0) => return Err(config("--axis is 1-based")),
            Some(a) if a > s.dim() => return Err(config(format!("--axis {a} exceeds dimension {}", s.dim()))),
            Some(a) => vec![a - 1],
            None => (0..s.dim()).filter(|&j| s.components()[j] != 0.0).collect(),
        };
        for j in axes {
            let r = verify_riesz_identity(s, j, quad)?;
            let pass = r.residual < TOLERANCE;
            all &= pass;
            let sigma = s.components().iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(" ");
            csv += &format!(
                "{},{},{},{},{}\n",
                s.dim(),
                sigma,
                j + 1,
                csv_line(&[r.rhs, r.expected, r.residual]),
                pass
            );
            rows.push(json!({
                "sigma": s.components(), "axis": j + 1, "rhs": r.rhs, "rhs_imag": r.rhs_imag,
                "expected": r.expected, "residual": r.residual, "pass": pass,
            }));
        }
    }
    print!("{csv}");
    eprintln!("riesz identity: {}", pass_word(all));
    out.write("riesz.csv", &csv)?;
    out.write_json("riesz.json", &json!(rows))?;
    Ok(all)
}

pub fn run(args: RieszArgs, g: &Globals) -> Result<bool, CliError> {
    let quad = args.quad.spec()?;
    let dirs = match &args.sigma {
        Some(s) => vec![Direction::normalized(&parse_vector(s)?)?],
        None => sweep_directions(),
    };
    let mut out = Output::new(g.out_dir.as_deref(), g.command_line.clone())?;
    let pass = check(&dirs, args.axis, &quad, &mut out)?;
    out.finish()?;
    Ok(pass)
}
