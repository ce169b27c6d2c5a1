//! Frequency-domain sideband solver.
//!
//! Inserting ⟨X⟩ = X₀ + X₋e^{−iδt} + X₊e^{iδt} into the linearized Langevin
//! equations and keeping first-order terms in ε_p gives a 7×7 complex linear
//! system in
//!
//! ```text
//! x = (a₋, c₋, n₋, a₊*, c₊*, n₊*, q₋)
//! ```
//!
//! The momentum sideband is eliminated through p₋ = −iδq₋/ω_b, and q₊ = q₋*
//! because the mechanical position is Hermitian. With i·g_c·c₀ = G_c/√2 and
//! i·g_n·n₀ = G_n/√2 the rows read
//!
//! ```text
//! h1 a₋  + i g_N c₋                          = 0
//! h3 c₋  + i g_N a₋  − (G_c/√2) q₋           = ε_p
//! h5 n₋  + (G_n/√2) q₋                       = 0
//! h2* a₊* − i g_N c₊*                        = 0
//! h4* c₊* − i g_N a₊* − (G_c*/√2) q₋         = 0
//! h6* n₊* + (G_n*/√2) q₋                     = 0
//! h7 q₋ − (iω_b/√2)(G_c* c₋ − G_c c₊* − G_n* n₋ + G_n n₊*) = 0
//! ```
//!
//! with h1..h7 as in [`crate::response::HCoefficients`].

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::linalg;
use crate::model::ValidatedParams;
use crate::Complex;

pub const DIM: usize = 7;

pub const A_MINUS: usize = 0;
pub const C_MINUS: usize = 1;
pub const N_MINUS: usize = 2;
pub const A_PLUS_CONJ: usize = 3;
pub const C_PLUS_CONJ: usize = 4;
pub const N_PLUS_CONJ: usize = 5;
pub const Q_MINUS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OracleError {
    #[error("sideband system is singular at delta = {delta:e} rad/s (pivot {pivot:e})")]
    SingularSystem { delta: f64, pivot: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandSystem {
    pub matrix: [[Complex; DIM]; DIM],
    pub rhs: [Complex; DIM],
    /// Probe-drive detuning δ in rad/s.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandSolution {
    pub delta: f64,
    pub a_minus: Complex,
    pub c_minus: Complex,
    pub n_minus: Complex,
    pub a_plus_conj: Complex,
    pub c_plus_conj: Complex,
    pub n_plus_conj: Complex,
    pub q_minus: Complex,
    /// Normwise relative residual of the solve.
    pub residual: f64,
}

impl SidebandSolution {
    /// Upper mechanical sideband, q₊ = q₋*.
    pub fn q_plus(&self) -> Complex {
        self.q_minus.conj()
    }

    pub fn as_array(&self) -> [Complex; DIM] {
        [
            self.a_minus,
            self.c_minus,
            self.n_minus,
            self.a_plus_conj,
            self.c_plus_conj,
            self.n_plus_conj,
            self.q_minus,
        ]
    }
}

pub fn assemble_sideband_system(p: &ValidatedParams, delta: f64) -> SidebandSystem {
    let i = Complex::i();
    let zero = Complex::new(0.0, 0.0);
    let c = |re: f64, im: f64| Complex::new(re, im);

    let gc = p.g_opto * FRAC_1_SQRT_2;
    let gn = p.g_magno * FRAC_1_SQRT_2;
    let g_atom = i * p.g_atom;

    let mut m = [[zero; DIM]; DIM];
    m[A_MINUS][A_MINUS] = c(p.gamma_a, p.delta_a - delta);
    m[A_MINUS][C_MINUS] = g_atom;

    m[C_MINUS][C_MINUS] = c(p.kappa_c, p.delta_c_eff - delta);
    m[C_MINUS][A_MINUS] = g_atom;
    m[C_MINUS][Q_MINUS] = -gc;

    m[N_MINUS][N_MINUS] = c(p.kappa_n, p.delta_n_eff - delta);
    m[N_MINUS][Q_MINUS] = gn;

    m[A_PLUS_CONJ][A_PLUS_CONJ] = c(p.gamma_a, -(p.delta_a + delta));
    m[A_PLUS_CONJ][C_PLUS_CONJ] = -g_atom;

    m[C_PLUS_CONJ][C_PLUS_CONJ] = c(p.kappa_c, -(p.delta_c_eff + delta));
    m[C_PLUS_CONJ][A_PLUS_CONJ] = -g_atom;
    m[C_PLUS_CONJ][Q_MINUS] = -gc.conj();

    m[N_PLUS_CONJ][N_PLUS_CONJ] = c(p.kappa_n, -(p.delta_n_eff + delta));
    m[N_PLUS_CONJ][Q_MINUS] = gn.conj();

    let force = i * p.omega_b;
    m[Q_MINUS][Q_MINUS] = c((p.omega_b - delta) * (p.omega_b + delta), -p.gamma_b * delta);
    m[Q_MINUS][C_MINUS] = -force * gc.conj();
    m[Q_MINUS][C_PLUS_CONJ] = force * gc;
    m[Q_MINUS][N_MINUS] = force * gn.conj();
    m[Q_MINUS][N_PLUS_CONJ] = -force * gn;

    let mut rhs = [zero; DIM];
    rhs[C_MINUS] = c(p.eps_p, 0.0);

    SidebandSystem { matrix: m, rhs, delta }
}

pub fn solve_sideband(sys: &SidebandSystem) -> Result<SidebandSolution, OracleError> {
    let x = linalg::solve(sys.matrix, sys.rhs).map_err(|e| OracleError::SingularSystem {
        delta: sys.delta,
        pivot: e.pivot,
    })?;
    let residual = linalg::relative_residual(&sys.matrix, &x, &sys.rhs);
    Ok(SidebandSolution {
        delta: sys.delta,
        a_minus: x[A_MINUS],
        c_minus: x[C_MINUS],
        n_minus: x[N_MINUS],
        a_plus_conj: x[A_PLUS_CONJ],
        c_plus_conj: x[C_PLUS_CONJ],
        n_plus_conj: x[N_PLUS_CONJ],
        q_minus: x[Q_MINUS],
        residual,
    })
}

/// Assembles and solves at one detuning.
pub fn solve_at(p: &ValidatedParams, delta: f64) -> Result<SidebandSolution, OracleError> {
    solve_sideband(&assemble_sideband_system(p, delta))
}
