//! Detuning sweeps and engine comparison.
//!
//! Grid points are independent, so they are evaluated in parallel when the
//! `parallel` feature is enabled. Phase unwrapping and window detection run
//! afterwards as sequential passes over the δ-ordered result, so the output
//! does not depend on the thread count.

use thiserror::Error;

use crate::model::ValidatedParams;
use crate::response::{self, Engine, ResponseError, ResponsePoint};
use crate::windows::{self, Window};
use crate::Complex;

pub const DEFAULT_POINTS: usize = 2001;
pub const DEFAULT_PROMINENCE: f64 = 0.05;
/// Default finite-difference half-width, as a fraction of ω_b.
pub const DEFAULT_FD_STEP_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SweepSpecError {
    #[error("delta_start ({start:e}) must be below delta_stop ({stop:e})")]
    EmptyRange { start: f64, stop: f64 },
    #[error("n_points must be at least 3, got {0}")]
    TooFewPoints(usize),
    #[error("fd_step must be positive, got {0:e}")]
    BadStep(f64),
    #[error("prominence must lie in (0, 1), got {0}")]
    BadProminence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    /// rad/s
    pub delta_start: f64,
    /// rad/s
    pub delta_stop: f64,
    pub n_points: usize,
    /// rad/s
    pub fd_step: f64,
    pub prominence: f64,
    pub engine: Engine,
}

impl SweepSpec {
    /// δ/ω_b ∈ [0.5, 1.5] on 2001 points, fd step 1e-6·ω_b.
    pub fn default_for(omega_b: f64) -> Self {
        Self {
            delta_start: 0.5 * omega_b,
            delta_stop: 1.5 * omega_b,
            n_points: DEFAULT_POINTS,
            fd_step: DEFAULT_FD_STEP_FRACTION * omega_b,
            prominence: DEFAULT_PROMINENCE,
            engine: Engine::Oracle,
        }
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn validate(&self) -> Result<(), SweepSpecError> {
        if !(self.delta_start < self.delta_stop) || !self.delta_start.is_finite() || !self.delta_stop.is_finite() {
            return Err(SweepSpecError::EmptyRange { start: self.delta_start, stop: self.delta_stop });
        }
        if self.n_points < 3 {
            return Err(SweepSpecError::TooFewPoints(self.n_points));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(SweepSpecError::BadStep(self.fd_step));
        }
        if !(self.prominence > 0.0 && self.prominence < 1.0) {
            return Err(SweepSpecError::BadProminence(self.prominence));
        }
        Ok(())
    }

    /// Evenly spaced detunings; the last point is exactly `delta_stop`.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.n_points - 1;
        let span = self.delta_stop - self.delta_start;
        (0..self.n_points)
            .map(|k| {
                if k == last {
                    self.delta_stop
                } else {
                    self.delta_start + span * (k as f64 / last as f64)
                }
            })
            .collect()
    }
}

/// How grid points are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon data parallelism, optionally bounded to a number of threads.
    /// Falls back to sequential evaluation without the `parallel` feature.
    #[default]
    Parallel,
    Threads(usize),
}

/// Evaluates `f` on every grid value, preserving order.
pub fn map_grid<T, E, F>(grid: &[f64], exec: Execution, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(f64) -> Result<T, E> + Sync + Send,
{
    match exec {
        Execution::Sequential => grid.iter().map(|&d| f(d)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            grid.par_iter().map(|&d| f(d)).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::Threads(n) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(|| grid.par_iter().map(|&d| f(d)).collect()),
                Err(_) => grid.iter().map(|&d| f(d)).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::Threads(_) => grid.iter().map(|&d| f(d)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub engine: Engine,
    pub points: Vec<ResponsePoint>,
}

impl Spectrum {
    /// (δ, ε_R) pairs.
    pub fn absorption(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.delta, p.eps_out.re)).collect()
    }

    /// (δ, ε_I) pairs.
    pub fn dispersion(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.delta, p.eps_out.im)).collect()
    }

    pub fn windows(&self, prominence: f64) -> Vec<Window> {
        windows::find_transparency_windows(&self.absorption(), prominence)
    }

    /// Points whose τ failed the step-halving check.
    pub fn unconverged_delays(&self) -> usize {
        self.points.iter().filter(|p| !p.tau_converged).count()
    }
}

/// One response point per grid δ, computed with `spec.engine`.
pub fn run_sweep(p: &ValidatedParams, spec: &SweepSpec, exec: Execution) -> Result<Spectrum, ResponseError> {
    let grid = spec.grid();
    let mut points = map_grid(&grid, exec, |d| response::evaluate_point(spec.engine, p, d, spec.fd_step))?;
    let ts: Vec<Complex> = points.iter().map(|pt| pt.transmission).collect();
    let phase = response::phase_profile(&ts)?;
    for (pt, phi) in points.iter_mut().zip(phase) {
        pt.phase = phi;
    }
    Ok(Spectrum { engine: spec.engine, points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub delta: f64,
    pub oracle: Complex,
    pub printed: Complex,
    pub corrected: Complex,
}

fn rel_diff(a: Complex, reference: Complex) -> f64 {
    let scale = reference.norm();
    if scale == 0.0 {
        a.norm()
    } else {
        (a - reference).norm() / scale
    }
}

impl ComparisonRow {
    pub fn printed_vs_oracle(&self) -> f64 {
        rel_diff(self.printed, self.oracle)
    }

    pub fn corrected_vs_oracle(&self) -> f64 {
        rel_diff(self.corrected, self.oracle)
    }

    pub fn printed_vs_corrected(&self) -> f64 {
        rel_diff(self.printed, self.corrected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSummary {
    pub max: f64,
    pub mean: f64,
    /// δ at which the maximum occurs.
    pub argmax: f64,
}

/// Per-δ relative differences of c₋ between the three engines.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    fn summarize(&self, f: impl Fn(&ComparisonRow) -> f64) -> DiffSummary {
        let mut max = 0.0;
        let mut argmax = self.rows.first().map_or(0.0, |r| r.delta);
        let mut sum = 0.0;
        for r in &self.rows {
            let v = f(r);
            sum += v;
            if v > max {
                max = v;
                argmax = r.delta;
            }
        }
        DiffSummary { max, mean: sum / self.rows.len().max(1) as f64, argmax }
    }

    pub fn printed_vs_oracle(&self) -> DiffSummary {
        self.summarize(ComparisonRow::printed_vs_oracle)
    }

    pub fn corrected_vs_oracle(&self) -> DiffSummary {
        self.summarize(ComparisonRow::corrected_vs_oracle)
    }

    pub fn printed_vs_corrected(&self) -> DiffSummary {
        self.summarize(ComparisonRow::printed_vs_corrected)
    }
}

pub fn compare_engines(p: &ValidatedParams, spec: &SweepSpec, exec: Execution) -> Result<ComparisonReport, ResponseError> {
    let rows = map_grid(&spec.grid(), exec, |d| {
        Ok::<_, ResponseError>(ComparisonRow {
            delta: d,
            oracle: response::cavity_amplitude(Engine::Oracle, p, d)?,
            printed: response::cavity_amplitude(Engine::ClosedPrinted, p, d)?,
            corrected: response::cavity_amplitude(Engine::ClosedCorrected, p, d)?,
        })
    })?;
    Ok(ComparisonReport { rows })
}
