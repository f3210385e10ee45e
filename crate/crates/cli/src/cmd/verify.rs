use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use gkp_core::diagnostics::{
    decay_exponent, expected_decay, pohozaev_check, profile_extract, standard_report, v_infinity_from_energy,
    v_infinity_prediction, CheckRow, DecayTarget, DECAY_WINDOW,
};
use gkp_core::io::load_wave;
use gkp_core::kernel::Direction;

use crate::config::parse_vector;
use crate::error::{config, CliError};
use crate::output::Output;
use crate::Globals;

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    /// Wave file (`.json`, `.f64` or their common basename).
    wavefile: PathBuf,
    /// Extract R^N v(Rσ) and compare with the predicted far-field profile.
    #[arg(long)]
    profile: bool,
    /// Radii for --profile (default 1/32, 2/32, 3/32 of the smallest half length).
    #[arg(long)]
    radii: Option<String>,
    /// Directions in the (x₁, x₂) plane for --profile.
    #[arg(long, default_value_t = 32)]
    directions: usize,
    /// Fit the decay rates of v and ∇v along x₁.
    #[arg(long)]
    decay: bool,
}

pub fn run(args: VerifyArgs, g: &Globals) -> Result<bool, CliError> {
    let (w, header) = load_wave(&args.wavefile)?;
    let mut out = Output::new(g.out_dir.as_deref(), g.command_line.clone())?;
    let mut report = standard_report(&w);
    let ph = pohozaev_check(&w);
    let pred = v_infinity_prediction(&w);
    let mut doc = json!({
        "wave": args.wavefile.display().to_string(),
        "header": header,
        "pohozaev": ph,
        "v_infinity": pred,
        "energy_profiles": v_infinity_from_energy(&w).ok(),
    });
    let dim = w.grid().dim();
    let axis = Direction::new({
        let mut c = vec![0.0; dim];
        c[0] = 1.0;
        c
    })?;
    if args.profile {
        let l = w.grid().min_half_length();
        let radii = match &args.radii {
            Some(s) => parse_vector(s)?,
            None => vec![l / 32.0, l / 16.0, 3.0 * l / 32.0],
        };
        if args.directions < 4 {
            return Err(config("--directions must be at least 4"));
        }
        let dirs: Vec<Direction> = (0..args.directions)
            .map(|i| Direction::planar(dim, std::f64::consts::TAU * i as f64 / args.directions as f64))
            .collect();
        let prof = profile_extract(&w, &radii, &dirs)?;
        report.push(CheckRow::below("profile_sup_gap_extrapolated", prof.sup_gap_extrapolated, 0.05));
        if !prof.uniformity_expected {
            log::warn!("p < 1/N: convergence of the profile is pointwise only");
        }
        doc["profile"] = json!(prof);
    }
    if args.decay {
        let mut fits = Vec::new();
        for (which, name, tol) in [(DecayTarget::Value, "decay_v", 0.1), (DecayTarget::Gradient, "decay_grad_v", 0.15)] {
            let fit = decay_exponent(&w, &axis, which, DECAY_WINDOW)?;
            report.push(CheckRow::absolute(name, fit.exponent, expected_decay(dim, w.p(), which), tol));
            fits.push(json!({ "target": name, "exponent": fit.exponent, "std_error": fit.std_error }));
        }
        doc["decay"] = json!(fits);
    }
    doc["rows"] = report.to_json()["rows"].clone();
    let csv = report.to_csv();
    print!("{csv}");
    out.write("report.csv", &csv)?;
    out.write_json("report.json", &doc)?;
    out.finish()?;
    let pass = report.all_pass();
    eprintln!("verify: {}", super::pass_word(pass));
    Ok(pass)
}
