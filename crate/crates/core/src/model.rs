//! Physical parameters, validation and the zero-order (steady-state) problem.
//!
//! All frequency-like quantities are stored as angular frequencies in rad/s.
//! Configuration files quote ordinary frequencies ν and are converted with
//! [`hz`] at load time.

use std::f64::consts::{PI, SQRT_2};

use thiserror::Error;

use crate::Complex;

/// Converts an ordinary frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz(nu: f64) -> f64 {
    2.0 * PI * nu
}

/// Damping factor of the Picard iteration for the mechanical displacement.
pub const PICARD_DAMPING: f64 = 0.5;
/// Default fixed-point tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("rate `{0}` must be strictly positive")]
    NonPositiveRate(&'static str),
    #[error("field `{0}` is not finite")]
    NonFiniteValue(&'static str),
    #[error("coupling `{0}` must be non-negative")]
    NegativeCoupling(&'static str),
    #[error("probe amplitude eps_p must be non-zero")]
    ZeroProbeAmplitude,
}

/// One physical configuration in the effective-coupling picture.
///
/// The detunings are the effective ones (already shifted by the static
/// mechanical displacement) and the opto/magnomechanical couplings are the
/// drive-enhanced complex couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Cavity decay rate κ_c.
    pub kappa_c: f64,
    /// Magnon decay rate κ_n.
    pub kappa_n: f64,
    /// Atomic decay rate γ_a.
    pub gamma_a: f64,
    /// Mechanical damping rate γ_b.
    pub gamma_b: f64,
    /// Mechanical resonance frequency ω_b.
    pub omega_b: f64,
    /// Atom-drive detuning Δ_a.
    pub delta_a: f64,
    /// Effective cavity detuning Δ̄_c.
    pub delta_c_eff: f64,
    /// Effective magnon detuning Δ̄_n.
    pub delta_n_eff: f64,
    /// Collective atom-cavity coupling g_N.
    pub g_atom: f64,
    /// Effective optomechanical coupling G_c.
    pub g_opto: Complex,
    /// Effective magnomechanical coupling G_n.
    pub g_magno: Complex,
    /// Probe amplitude ε_p. Only sets the normalization of the amplitudes.
    pub eps_p: f64,
}

impl SystemParams {
    /// Parameter set of the reference hybrid magnomechanical experiment.
    ///
    /// κ_n/2π = 1 MHz, κ_c = 2κ_n, γ_a = κ_n, γ_b/2π = 100 Hz,
    /// ω_b/2π = 40 MHz, g_N/2π = 8 MHz, Δ_a = −ω_b, Δ̄_c = 0.5ω_b,
    /// Δ̄_n = ω_b, G_n/2π = 5.6 MHz and G_c/2π = 4 MHz.
    pub fn reference_preset() -> Self {
        let kappa_n = hz(1e6);
        let omega_b = hz(40e6);
        Self {
            kappa_c: 2.0 * kappa_n,
            kappa_n,
            gamma_a: kappa_n,
            gamma_b: hz(100.0),
            omega_b,
            delta_a: -omega_b,
            delta_c_eff: 0.5 * omega_b,
            delta_n_eff: omega_b,
            g_atom: hz(8e6),
            g_opto: Complex::new(hz(4e6), 0.0),
            g_magno: Complex::new(hz(5.6e6), 0.0),
            eps_p: 1.0,
        }
    }

    /// Same configuration with a real optomechanical coupling G_c/2π = `nu` Hz.
    pub fn with_opto_hz(mut self, nu: f64) -> Self {
        self.g_opto = Complex::new(hz(nu), 0.0);
        self
    }

    /// Same configuration with a real magnomechanical coupling G_n/2π = `nu` Hz.
    pub fn with_magno_hz(mut self, nu: f64) -> Self {
        self.g_magno = Complex::new(hz(nu), 0.0);
        self
    }

    pub fn validate(self) -> Result<ValidatedParams, ParamError> {
        validate_params(self)
    }
}

/// [`SystemParams`] whose invariants have been checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(SystemParams);

impl ValidatedParams {
    pub fn get(&self) -> &SystemParams {
        &self.0
    }

    pub fn into_inner(self) -> SystemParams {
        self.0
    }
}

impl std::ops::Deref for ValidatedParams {
    type Target = SystemParams;

    fn deref(&self) -> &SystemParams {
        &self.0
    }
}

fn check_finite(field: &'static str, v: f64) -> Result<(), ParamError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonFiniteValue(field))
    }
}

fn check_rate(field: &'static str, v: f64) -> Result<(), ParamError> {
    check_finite(field, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositiveRate(field))
    }
}

fn check_complex(field: &'static str, v: Complex) -> Result<(), ParamError> {
    check_finite(field, v.re)?;
    check_finite(field, v.im)
}

/// Checks every invariant of `raw` in declaration order and reports the
/// first violation.
pub fn validate_params(raw: SystemParams) -> Result<ValidatedParams, ParamError> {
    check_rate("kappa_c", raw.kappa_c)?;
    check_rate("kappa_n", raw.kappa_n)?;
    check_rate("gamma_a", raw.gamma_a)?;
    check_rate("gamma_b", raw.gamma_b)?;
    check_rate("omega_b", raw.omega_b)?;
    check_finite("delta_a", raw.delta_a)?;
    check_finite("delta_c_eff", raw.delta_c_eff)?;
    check_finite("delta_n_eff", raw.delta_n_eff)?;
    check_finite("g_N", raw.g_atom)?;
    if raw.g_atom < 0.0 {
        return Err(ParamError::NegativeCoupling("g_N"));
    }
    check_complex("G_c", raw.g_opto)?;
    check_complex("G_n", raw.g_magno)?;
    check_finite("eps_p", raw.eps_p)?;
    if raw.eps_p == 0.0 {
        return Err(ParamError::ZeroProbeAmplitude);
    }
    Ok(ValidatedParams(raw))
}

/// Parameters in terms of bare couplings and the magnon drive, from which
/// the steady state and the effective couplings follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawDriveParams {
    pub kappa_c: f64,
    pub kappa_n: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub omega_b: f64,
    pub delta_a: f64,
    pub g_atom: f64,
    pub eps_p: f64,
    /// Bare optomechanical coupling g_c.
    pub g_c_bare: f64,
    /// Bare cavity detuning Δ_c.
    pub delta_c_bare: f64,
    /// Bare magnomechanical coupling g_n.
    pub g_n_bare: f64,
    /// Bare magnon detuning Δ_n.
    pub delta_n_bare: f64,
    /// Magnon drive Rabi frequency Ω_L.
    pub omega_l_rabi: f64,
}

impl RawDriveParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check_rate("kappa_c", self.kappa_c)?;
        check_rate("kappa_n", self.kappa_n)?;
        check_rate("gamma_a", self.gamma_a)?;
        check_rate("gamma_b", self.gamma_b)?;
        check_rate("omega_b", self.omega_b)?;
        check_finite("delta_a", self.delta_a)?;
        check_finite("g_N", self.g_atom)?;
        if self.g_atom < 0.0 {
            return Err(ParamError::NegativeCoupling("g_N"));
        }
        check_finite("eps_p", self.eps_p)?;
        if self.eps_p == 0.0 {
            return Err(ParamError::ZeroProbeAmplitude);
        }
        check_finite("g_c_bare", self.g_c_bare)?;
        check_finite("delta_c_bare", self.delta_c_bare)?;
        check_finite("g_n_bare", self.g_n_bare)?;
        check_finite("delta_n_bare", self.delta_n_bare)?;
        check_finite("omega_L", self.omega_l_rabi)?;
        if self.omega_l_rabi < 0.0 {
            return Err(ParamError::NegativeCoupling("omega_L"));
        }
        Ok(())
    }

    /// Effective-coupling parameters around the given steady state.
    pub fn effective(&self, ss: &SteadyState) -> SystemParams {
        let (g_opto, g_magno) = effective_couplings(self.g_c_bare, ss.c0, self.g_n_bare, ss.n0);
        SystemParams {
            kappa_c: self.kappa_c,
            kappa_n: self.kappa_n,
            gamma_a: self.gamma_a,
            gamma_b: self.gamma_b,
            omega_b: self.omega_b,
            delta_a: self.delta_a,
            delta_c_eff: ss.delta_c_eff,
            delta_n_eff: ss.delta_n_eff,
            g_atom: self.g_atom,
            g_opto,
            g_magno,
            eps_p: self.eps_p,
        }
    }
}

/// Zero-order amplitudes and the detunings they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a0: Complex,
    pub c0: Complex,
    pub n0: Complex,
    /// Static mechanical displacement. Real by construction.
    pub q0: f64,
    pub delta_c_eff: f64,
    pub delta_n_eff: f64,
    /// |q₀ω_b + g_n|n₀|²| at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// The cubic for q₀ has three real roots (bistable drive); the returned
    /// root is the one the iteration converged to.
    pub multiple_roots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SteadyStateError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("tolerance must be positive and max_iter at least 1")]
    BadOptions,
    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Magnon amplitude n₀ for a given displacement q₀.
#[inline]
fn magnon_amplitude(p: &RawDriveParams, q0: f64) -> Complex {
    let detuning = p.delta_n_bare + p.g_n_bare * q0;
    Complex::new(p.omega_l_rabi, 0.0) / Complex::new(p.kappa_n, detuning)
}

/// Solves the zero-order problem with c₀ = a₀ = 0 (the cavity carries no
/// zero-order drive), so that q₀ = −g_n|n₀|²/ω_b and
/// n₀ = Ω_L/(κ_n + i(Δ_n + g_n q₀)).
///
/// Uses a damped Picard iteration started from q₀ = 0. Convergence means
/// |q₀ω_b + g_n|n₀|²| ≤ tol·ω_b·|q₀|, a relative test on q₀.
pub fn solve_magnon_steady_state(
    p: &RawDriveParams,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyState, SteadyStateError> {
    p.validate()?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(SteadyStateError::BadOptions);
    }
    let residual_at = |q0: f64| {
        let n0 = magnon_amplitude(p, q0);
        (q0 * p.omega_b + p.g_n_bare * n0.norm_sqr()).abs()
    };

    let mut q0 = 0.0_f64;
    let mut residual = residual_at(q0);
    let mut iterations = 0;
    while residual > tol * p.omega_b * q0.abs() {
        if iterations == max_iter {
            return Err(SteadyStateError::NoConvergence { iterations, residual });
        }
        let target = -p.g_n_bare * magnon_amplitude(p, q0).norm_sqr() / p.omega_b;
        q0 = (1.0 - PICARD_DAMPING) * q0 + PICARD_DAMPING * target;
        if !q0.is_finite() {
            return Err(SteadyStateError::NoConvergence { iterations, residual: f64::INFINITY });
        }
        residual = residual_at(q0);
        iterations += 1;
    }

    let n0 = magnon_amplitude(p, q0);
    let zero = Complex::new(0.0, 0.0);
    Ok(SteadyState {
        a0: zero,
        c0: zero,
        n0,
        q0,
        delta_c_eff: p.delta_c_bare - p.g_c_bare * q0,
        delta_n_eff: p.delta_n_bare + p.g_n_bare * q0,
        residual,
        iterations,
        multiple_roots: has_three_real_roots(p),
    })
}

/// Whether the steady-state cubic admits three real solutions.
///
/// With y = Δ_n + g_n q₀ and K = g_n²Ω_L²/ω_b the condition reads
/// (y − Δ_n)(κ_n² + y²) + K = 0. Written in units of κ_n, the monic cubic
/// s³ + b s² + s + d has three real roots iff it has two critical points
/// with the local maximum above zero and the local minimum below.
fn has_three_real_roots(p: &RawDriveParams) -> bool {
    if p.g_n_bare == 0.0 || p.omega_l_rabi == 0.0 {
        return false;
    }
    let k = p.kappa_n;
    let b = -p.delta_n_bare / k;
    let drive = (p.g_n_bare * p.omega_l_rabi / k).powi(2) / (p.omega_b * k);
    let d = b + drive;
    let f = |s: f64| ((s + b) * s + 1.0) * s + d;
    // f'(s) = 3s² + 2bs + 1
    let disc = b * b - 3.0;
    if disc <= 0.0 {
        return false;
    }
    let root = disc.sqrt();
    let s_max = (-b - root) / 3.0;
    let s_min = (-b + root) / 3.0;
    f(s_max) > 0.0 && f(s_min) < 0.0
}

/// G_c = i√2·g_c·c₀ and G_n = i√2·g_n·n₀.
pub fn effective_couplings(g_c: f64, c0: Complex, g_n: f64, n0: Complex) -> (Complex, Complex) {
    let factor = Complex::new(0.0, SQRT_2);
    (factor * g_c * c0, factor * g_n * n0)
}
