//! Observable spectra: output field, transmission, phase and group delay,
//! plus the closed-form coefficient cascade for the cavity amplitude.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::ValidatedParams;
use crate::oracle::{self, OracleError};
use crate::Complex;

/// A divisor smaller than this fraction of its dividend is treated as a pole.
pub const POLE_RATIO: f64 = 1e-30;
/// Relative change of τ under step halving above which the step is rejected.
pub const STEP_HALVING_TOL: f64 = 0.01;
/// Neighbouring raw phase jumps this close to ±π cannot be unwrapped.
pub const UNWRAP_AMBIGUITY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ResponseError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("pole encountered in `{term}` at delta = {delta:e} rad/s")]
    PoleEncountered { delta: f64, term: &'static str },
    #[error("phase jump of pi between grid points {index} and {next}; refine the grid", next = index + 1)]
    UnwrapAmbiguity { index: usize },
    #[error("finite-difference step too large at delta = {delta:e} rad/s: tau = {tau:e} s, half step gives {tau_half_step:e} s")]
    StepTooLarge { delta: f64, tau: f64, tau_half_step: f64 },
    #[error("finite-difference step must be positive and finite, got {0:e}")]
    BadStep(f64),
}

/// Which route computes the intracavity amplitude c₋.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    /// Direct solve of the 7×7 sideband system.
    #[default]
    Oracle,
    /// Closed-form cascade with the coefficients exactly as printed.
    ClosedPrinted,
    /// Closed-form cascade with coefficients from eliminating the sideband
    /// system.
    ClosedCorrected,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Oracle, Engine::ClosedPrinted, Engine::ClosedCorrected];

    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Oracle => "oracle",
            Engine::ClosedPrinted => "closed_printed",
            Engine::ClosedCorrected => "closed_corrected",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(Engine::Oracle),
            "closed_printed" => Ok(Engine::ClosedPrinted),
            "closed_corrected" => Ok(Engine::ClosedCorrected),
            other => Err(format!(
                "unknown engine `{other}` (expected oracle, closed_printed or closed_corrected)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeVariant {
    Printed,
    Corrected,
}

/// Single-mode response factors at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCoefficients {
    pub delta: f64,
    /// γ_a + i(Δ_a − δ)
    pub h1: Complex,
    /// γ_a + i(Δ_a + δ)
    pub h2: Complex,
    /// κ_c + i(Δ̄_c − δ)
    pub h3: Complex,
    /// κ_c + i(Δ̄_c + δ)
    pub h4: Complex,
    /// κ_n + i(Δ̄_n − δ)
    pub h5: Complex,
    /// κ_n + i(Δ̄_n + δ)
    pub h6: Complex,
    /// ω_b² − δ² − iγ_bδ
    pub h7: Complex,
    /// ω_b² − δ² + iγ_bδ
    pub h8: Complex,
}

pub fn h_coefficients(p: &ValidatedParams, delta: f64) -> HCoefficients {
    let c = Complex::new;
    let mech = (p.omega_b - delta) * (p.omega_b + delta);
    HCoefficients {
        delta,
        h1: c(p.gamma_a, p.delta_a - delta),
        h2: c(p.gamma_a, p.delta_a + delta),
        h3: c(p.kappa_c, p.delta_c_eff - delta),
        h4: c(p.kappa_c, p.delta_c_eff + delta),
        h5: c(p.kappa_n, p.delta_n_eff - delta),
        h6: c(p.kappa_n, p.delta_n_eff + delta),
        h7: c(mech, -p.gamma_b * delta),
        h8: c(mech, p.gamma_b * delta),
    }
}

/// The composite coefficients 𝓗₁..𝓗₆ of the cavity cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptHCoefficients {
    pub variant: CascadeVariant,
    pub h1: Complex,
    pub h2: Complex,
    pub h3: Complex,
    pub h4: Complex,
    pub h5: Complex,
    pub h6: Complex,
}

fn div(num: Complex, den: Complex, delta: f64, term: &'static str) -> Result<Complex, ResponseError> {
    let d = den.norm();
    if d == 0.0 || !d.is_finite() || d < POLE_RATIO * num.norm() {
        return Err(ResponseError::PoleEncountered { delta, term });
    }
    Ok(num / den)
}

/// Evaluates 𝓗₁..𝓗₆ for the requested variant.
///
/// `Printed` follows the published definitions literally, including the
/// plain squares G² and the G_c² term of 𝓗₄ without the factor 1/2.
/// `Corrected` is what elimination of the sideband system produces when
/// q₊* is carried as a separate unknown: moduli |G|², the 1/2 restored and
/// 𝓗₁* in 𝓗₄, and G_c* in 𝓗₆. Both agree with each other when G_c = 0.
pub fn script_h_coefficients(
    h: &HCoefficients,
    p: &ValidatedParams,
    variant: CascadeVariant,
) -> Result<ScriptHCoefficients, ResponseError> {
    let d = h.delta;
    let i = Complex::i();
    let one = Complex::new(1.0, 0.0);
    let wb = p.omega_b;
    let g2 = Complex::new(p.g_atom * p.g_atom, 0.0);

    let s1 = one + div(g2, h.h2 * h.h4, d, "H1")?;

    let (gc2, gn2, gc_lead) = match variant {
        CascadeVariant::Printed => (p.g_opto * p.g_opto, p.g_magno * p.g_magno, p.g_opto),
        CascadeVariant::Corrected => (
            Complex::new(p.g_opto.norm_sqr(), 0.0),
            Complex::new(p.g_magno.norm_sqr(), 0.0),
            p.g_opto.conj(),
        ),
    };

    let magno_upper = div(gn2, 2.0 * h.h6.conj(), d, "H2")?;
    let opto_upper = div(gc2, 2.0 * s1.conj() * h.h4.conj(), d, "H2")?;
    let s2 = i * h.h8.conj() - wb * (opto_upper + magno_upper);
    let s3 = -wb * div(gn2, 2.0 * h.h5, d, "H3")? - i * h.h7;
    let s4 = match variant {
        CascadeVariant::Printed => wb * (div(gc2, h.h4.conj() * s1, d, "H4")? + magno_upper),
        CascadeVariant::Corrected => wb * (opto_upper + magno_upper),
    };
    let s5 = s3 - div(wb * gn2 * s4, 2.0 * h.h5 * s2, d, "H5")?;
    let s6 = wb * gc_lead * FRAC_1_SQRT_2 * (one + div(s4, s2, d, "H6")?);

    Ok(ScriptHCoefficients { variant, h1: s1, h2: s2, h3: s3, h4: s4, h5: s5, h6: s6 })
}

/// c₋ = ε_p / (h3 + g_N²/h1 − (G_c/√2)·𝓗₆/𝓗₅).
pub fn cavity_amplitude_closed_form(
    p: &ValidatedParams,
    delta: f64,
    variant: CascadeVariant,
) -> Result<Complex, ResponseError> {
    let h = h_coefficients(p, delta);
    let s = script_h_coefficients(&h, p, variant)?;
    let atom = div(Complex::new(p.g_atom * p.g_atom, 0.0), h.h1, delta, "g_N^2/h1")?;
    let mech = p.g_opto * FRAC_1_SQRT_2 * div(s.h6, s.h5, delta, "H6/H5")?;
    div(Complex::new(p.eps_p, 0.0), h.h3 + atom - mech, delta, "c_minus")
}

/// Intracavity lower-sideband amplitude c₋ by the chosen route.
pub fn cavity_amplitude(engine: Engine, p: &ValidatedParams, delta: f64) -> Result<Complex, ResponseError> {
    match engine {
        Engine::Oracle => Ok(oracle::solve_at(p, delta)?.c_minus),
        Engine::ClosedPrinted => cavity_amplitude_closed_form(p, delta, CascadeVariant::Printed),
        Engine::ClosedCorrected => cavity_amplitude_closed_form(p, delta, CascadeVariant::Corrected),
    }
}

/// ε_out = 2κ_c·c₋/ε_p. Real part: absorption; imaginary part: dispersion.
#[inline]
pub fn output_field(c_minus: Complex, p: &ValidatedParams) -> Complex {
    c_minus * (2.0 * p.kappa_c / p.eps_p)
}

/// T = (ε_p − 2κ_c·c₋)/ε_p = 1 − ε_out.
#[inline]
pub fn transmission(c_minus: Complex, p: &ValidatedParams) -> Complex {
    Complex::new(1.0, 0.0) - output_field(c_minus, p)
}

/// One row of a computed spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    /// δ in rad/s.
    pub delta: f64,
    pub c_minus: Complex,
    pub eps_out: Complex,
    pub transmission: Complex,
    /// |T|²
    pub t_sq: f64,
    /// Unwrapped Arg T in rad.
    pub phase: f64,
    /// Group delay in s; positive is slow light.
    pub tau: f64,
    /// Whether τ passed the step-halving check.
    pub tau_converged: bool,
}

/// Unwraps Arg T along an ordered grid so that neighbouring phases differ by
/// less than π.
pub fn phase_profile(points: &[Complex]) -> Result<Vec<f64>, ResponseError> {
    let mut out = Vec::with_capacity(points.len());
    let mut iter = points.iter().enumerate();
    let Some((_, first)) = iter.next() else {
        return Ok(out);
    };
    let mut prev_raw = first.arg();
    let mut prev = prev_raw;
    out.push(prev);
    for (k, t) in iter {
        let raw = t.arg();
        let mut jump = raw - prev_raw;
        jump -= 2.0 * PI * (jump / (2.0 * PI)).round();
        if (jump.abs() - PI).abs() < UNWRAP_AMBIGUITY {
            return Err(ResponseError::UnwrapAmbiguity { index: k - 1 });
        }
        prev += jump;
        prev_raw = raw;
        out.push(prev);
    }
    Ok(out)
}

/// τ from a central difference of T with half-width `step`, given T(δ).
fn delay_from(
    engine: Engine,
    p: &ValidatedParams,
    delta: f64,
    t_center: Complex,
    step: f64,
) -> Result<f64, ResponseError> {
    let t_hi = transmission(cavity_amplitude(engine, p, delta + step)?, p);
    let t_lo = transmission(cavity_amplitude(engine, p, delta - step)?, p);
    let slope = (t_hi - t_lo) / (2.0 * step);
    Ok((slope / t_center).im)
}

/// Group delay evaluated with a step and with half that step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEstimate {
    pub delta: f64,
    pub step: f64,
    pub tau: f64,
    pub tau_half_step: f64,
    /// Roundoff level of the central difference, in s.
    pub noise_floor: f64,
}

impl DelayEstimate {
    /// Step halving changed τ by at most 1% (or by less than roundoff).
    pub fn converged(&self) -> bool {
        let change = (self.tau - self.tau_half_step).abs();
        change <= STEP_HALVING_TOL * self.tau_half_step.abs() || change <= self.noise_floor
    }
}

fn estimate_with_center(
    engine: Engine,
    p: &ValidatedParams,
    delta: f64,
    t_center: Complex,
    step: f64,
) -> Result<DelayEstimate, ResponseError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(ResponseError::BadStep(step));
    }
    let tau = delay_from(engine, p, delta, t_center, step)?;
    let tau_half_step = delay_from(engine, p, delta, t_center, 0.5 * step)?;
    let noise_floor = 16.0 * f64::EPSILON / (0.5 * step * t_center.norm());
    Ok(DelayEstimate { delta, step, tau, tau_half_step, noise_floor })
}

pub fn estimate_group_delay(
    engine: Engine,
    p: &ValidatedParams,
    delta: f64,
    fd_step: f64,
) -> Result<DelayEstimate, ResponseError> {
    let t = transmission(cavity_amplitude(engine, p, delta)?, p);
    estimate_with_center(engine, p, delta, t, fd_step)
}

/// τ = Im[(1/T)·∂T/∂δ] by central differences; ∂/∂ω_p = ∂/∂δ at fixed
/// drive frequency. Fails with `StepTooLarge` when halving the step moves τ
/// by more than 1%.
pub fn group_delay(
    engine: Engine,
    p: &ValidatedParams,
    delta: f64,
    fd_step: f64,
) -> Result<f64, ResponseError> {
    let est = estimate_group_delay(engine, p, delta, fd_step)?;
    if est.converged() {
        Ok(est.tau)
    } else {
        Err(ResponseError::StepTooLarge { delta, tau: est.tau, tau_half_step: est.tau_half_step })
    }
}

/// Everything except the phase, which needs the whole ordered grid.
pub(crate) fn evaluate_point(
    engine: Engine,
    p: &ValidatedParams,
    delta: f64,
    fd_step: f64,
) -> Result<ResponsePoint, ResponseError> {
    let c_minus = cavity_amplitude(engine, p, delta)?;
    let eps_out = output_field(c_minus, p);
    let t = Complex::new(1.0, 0.0) - eps_out;
    let est = estimate_with_center(engine, p, delta, t, fd_step)?;
    Ok(ResponsePoint {
        delta,
        c_minus,
        eps_out,
        transmission: t,
        t_sq: t.norm_sqr(),
        phase: t.arg(),
        tau: est.tau,
        tau_converged: est.converged(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    fn preset() -> ValidatedParams {
        SystemParams::reference_preset().validate().unwrap()
    }

    fn uncoupled() -> ValidatedParams {
        let mut p = SystemParams::reference_preset();
        p.g_opto = Complex::new(0.0, 0.0);
        p.g_magno = Complex::new(0.0, 0.0);
        p.g_atom = 0.0;
        p.validate().unwrap()
    }

    #[test]
    fn h3_real_on_cavity_resonance() {
        let p = preset();
        let h = h_coefficients(&p, p.delta_c_eff);
        assert_eq!(h.h3, Complex::new(p.kappa_c, 0.0));
    }

    #[test]
    fn mechanical_factors_real_at_zero_detuning() {
        let p = preset();
        let h = h_coefficients(&p, 0.0);
        assert_eq!(h.h7, Complex::new(p.omega_b * p.omega_b, 0.0));
        assert_eq!(h.h7, h.h8);
    }

    #[test]
    fn couplings_off_cascade() {
        let p = uncoupled();
        let h = h_coefficients(&p, 0.8 * p.omega_b);
        for variant in [CascadeVariant::Printed, CascadeVariant::Corrected] {
            let s = script_h_coefficients(&h, &p, variant).unwrap();
            assert_eq!(s.h1, Complex::new(1.0, 0.0));
            assert_eq!(s.h2, Complex::i() * h.h8.conj());
            assert_eq!(s.h3, -Complex::i() * h.h7);
            assert_eq!(s.h4, Complex::new(0.0, 0.0));
            assert_eq!(s.h6, Complex::new(0.0, 0.0));
        }
    }

    #[test]
    fn atom_decoupled_gives_unit_h1() {
        let mut p = SystemParams::reference_preset();
        p.g_atom = 0.0;
        let p = p.validate().unwrap();
        let h = h_coefficients(&p, p.omega_b);
        let s = script_h_coefficients(&h, &p, CascadeVariant::Printed).unwrap();
        assert_eq!(s.h1, Complex::new(1.0, 0.0));
    }

    #[test]
    fn bare_cavity_on_resonance() {
        let mut p = SystemParams::reference_preset();
        p.g_opto = Complex::new(0.0, 0.0);
        p.g_atom = 0.0;
        let p = p.validate().unwrap();
        let c = cavity_amplitude_closed_form(&p, p.delta_c_eff, CascadeVariant::Printed).unwrap();
        assert!((c - Complex::new(p.eps_p / p.kappa_c, 0.0)).norm() * p.kappa_c < 1e-15);
        let eps = output_field(c, &p);
        assert!((eps - Complex::new(2.0, 0.0)).norm() < 1e-15);
        let t = transmission(c, &p);
        assert!((t - Complex::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((t.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_cavity_transmits_fully() {
        let p = preset();
        let zero = Complex::new(0.0, 0.0);
        assert_eq!(output_field(zero, &p), zero);
        assert_eq!(transmission(zero, &p), Complex::new(1.0, 0.0));
    }

    #[test]
    fn constant_transmission_has_flat_phase() {
        let phase = phase_profile(&[Complex::new(1.0, 0.0); 10]).unwrap();
        assert!(phase.iter().all(|&v| v == 0.0));
        assert!(phase_profile(&[]).unwrap().is_empty());
    }

    #[test]
    fn unwrap_crosses_negative_real_axis() {
        // T = e^{iθ} with θ sweeping through π.
        let pts: Vec<Complex> = (0..50).map(|k| Complex::from_polar(1.0, 2.5 + 0.03 * k as f64)).collect();
        let phase = phase_profile(&pts).unwrap();
        for (k, w) in phase.windows(2).enumerate() {
            assert!((w[1] - w[0] - 0.03).abs() < 1e-12, "step {k}");
        }
        assert!(*phase.last().unwrap() > PI);
    }

    #[test]
    fn half_turn_jump_is_ambiguous() {
        let pts = [Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)];
        assert_eq!(phase_profile(&pts), Err(ResponseError::UnwrapAmbiguity { index: 0 }));
    }

    #[test]
    fn far_detuned_delay_vanishes() {
        let p = uncoupled();
        let tau = group_delay(Engine::Oracle, &p, 50.0 * p.omega_b, 1e-6 * p.omega_b).unwrap();
        assert!(tau.abs() < 1e-12, "{tau:e}");
    }

    #[test]
    fn bare_cavity_delay_matches_all_pass_phase() {
        // T = (iΔ − κ)/(iΔ + κ) with Δ = Δ̄_c − δ, so dφ/dδ = 2κ/(κ² + Δ²).
        let p = uncoupled();
        for frac in [0.3, 0.5, 0.52, 0.9, 1.5] {
            let delta = frac * p.omega_b;
            let detuning = p.delta_c_eff - delta;
            let expected = 2.0 * p.kappa_c / (p.kappa_c * p.kappa_c + detuning * detuning);
            let tau = group_delay(Engine::Oracle, &p, delta, 1e-6 * p.omega_b).unwrap();
            assert!((tau - expected).abs() < 1e-6 * expected, "{frac}: {tau:e} vs {expected:e}");
        }
    }

    #[test]
    fn oversized_step_is_flagged() {
        let p = preset();
        let err = group_delay(Engine::Oracle, &p, p.delta_c_eff, 2.0 * p.kappa_c).unwrap_err();
        assert!(matches!(err, ResponseError::StepTooLarge { .. }));
        assert!(matches!(
            group_delay(Engine::Oracle, &p, p.omega_b, 0.0),
            Err(ResponseError::BadStep(_))
        ));
    }

    #[test]
    fn engines_parse() {
        for e in Engine::ALL {
            assert_eq!(e.as_str().parse::<Engine>().unwrap(), e);
        }
        assert!("exact".parse::<Engine>().is_err());
    }
}
