use std::path::PathBuf;

use gkp_core::diagnostics::DiagnosticsError;
use gkp_core::io::IoError;
use gkp_core::kernel::KernelError;
use gkp_core::spectral::SpectralError;
use gkp_core::symbol::SymbolError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

fn spectral_code(e: &SpectralError) -> i32 {
    match e {
        SpectralError::SignDegenerate { .. } | SpectralError::Diverged { .. } | SpectralError::NotConverged { .. } => 1,
        SpectralError::Kernel(k) => kernel_code(k),
        _ => 2,
    }
}

fn kernel_code(e: &KernelError) -> i32 {
    match e {
        KernelError::Quadrature(_) | KernelError::TooFewSamples(_) => 1,
        _ => 2,
    }
}

impl CliError {
    /// 1 when a computation ran and failed, 2 for configuration, input and guard errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spectral(e) => spectral_code(e),
            CliError::Kernel(e) => kernel_code(e),
            CliError::Diagnostics(DiagnosticsError::Spectral(e)) => spectral_code(e),
            CliError::Diagnostics(DiagnosticsError::Kernel(e)) => kernel_code(e),
            _ => 2,
        }
    }
}

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
