//! Probe-field linear response of an atom-opto-magnomechanical cavity.
//!
//! A microwave cavity `c` couples to an atomic ensemble `a` (collective
//! coupling g_N) and, by radiation pressure, to a mechanical mode `b` that
//! is in turn coupled to a driven magnon mode `n`. Given the effective
//! couplings G_c, G_n and effective detunings, the crate computes the
//! intracavity response to a weak probe at detuning δ from the drive and the
//! derived observables: output field ε_out = ε_R + iε_I, transmission T,
//! its phase and the group delay τ.
//!
//! Two independent routes compute the cavity amplitude c₋:
//! [`oracle`] solves the full 7×7 sideband system, and
//! [`response::cavity_amplitude_closed_form`] evaluates the closed-form
//! coefficient cascade (both as printed and in corrected form).
//!
//! ```
//! use mmit::{model::SystemParams, sweep::{run_sweep, Execution, SweepSpec}};
//!
//! let p = SystemParams::reference_preset().validate().unwrap();
//! let spec = SweepSpec { n_points: 101, ..SweepSpec::default_for(p.omega_b) };
//! let spectrum = run_sweep(&p, &spec, Execution::Sequential).unwrap();
//! assert_eq!(spectrum.points.len(), 101);
//! ```

pub mod config;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod output;
pub mod response;
pub mod sweep;
pub mod windows;

use thiserror::Error;

pub type Complex = num_complex::Complex64;

/// Exit code for configuration and input errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a steady state that did not converge.
pub const EXIT_NO_CONVERGENCE: i32 = 3;
/// Exit code for a singular sideband system or a pole of the closed form.
pub const EXIT_SINGULAR: i32 = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Param(#[from] model::ParamError),
    #[error(transparent)]
    SteadyState(#[from] model::SteadyStateError),
    #[error(transparent)]
    Response(#[from] response::ResponseError),
    #[error(transparent)]
    Sweep(#[from] sweep::SweepSpecError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<oracle::OracleError> for Error {
    fn from(e: oracle::OracleError) -> Self {
        Error::Response(e.into())
    }
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        use response::ResponseError as R;
        match self {
            Error::SteadyState(model::SteadyStateError::NoConvergence { .. }) => EXIT_NO_CONVERGENCE,
            Error::Response(R::Oracle(_) | R::PoleEncountered { .. } | R::StepTooLarge { .. }) => EXIT_SINGULAR,
            _ => EXIT_CONFIG,
        }
    }

    /// Short machine-readable error class.
    pub fn kind(&self) -> &'static str {
        use response::ResponseError as R;
        match self {
            Error::Config(config::ConfigError::Parse { .. }) => "parse_error",
            Error::Config(config::ConfigError::MissingField(_)) => "missing_field",
            Error::Config(config::ConfigError::ConflictingModes) => "conflicting_modes",
            Error::Config(config::ConfigError::Io { .. }) | Error::Io(_) => "io_error",
            Error::Config(config::ConfigError::Param(_)) | Error::Param(_) => "invalid_params",
            Error::Config(config::ConfigError::Sweep(_)) | Error::Sweep(_) => "invalid_sweep",
            Error::SteadyState(model::SteadyStateError::NoConvergence { .. }) => "no_convergence",
            Error::SteadyState(_) => "invalid_params",
            Error::Response(R::Oracle(_)) => "singular_system",
            Error::Response(R::PoleEncountered { .. }) => "pole_encountered",
            Error::Response(R::StepTooLarge { .. }) => "step_too_large",
            Error::Response(R::UnwrapAmbiguity { .. }) => "unwrap_ambiguity",
            Error::Response(R::BadStep(_)) => "invalid_sweep",
        }
    }
}
