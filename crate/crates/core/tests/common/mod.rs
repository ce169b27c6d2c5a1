#![allow(dead_code)]

use mmit::model::{hz, RawDriveParams, SystemParams};

/// Raw-drive parameters at preset rates with Δ_n = ω_b and no cavity drive.
pub fn raw_drive(omega_l: f64, g_n: f64) -> RawDriveParams {
    let p = SystemParams::reference_preset();
    RawDriveParams {
        kappa_c: p.kappa_c,
        kappa_n: p.kappa_n,
        gamma_a: p.gamma_a,
        gamma_b: p.gamma_b,
        omega_b: p.omega_b,
        delta_a: p.delta_a,
        g_atom: p.g_atom,
        eps_p: p.eps_p,
        g_c_bare: hz(1.0),
        delta_c_bare: p.delta_c_eff,
        g_n_bare: g_n,
        delta_n_bare: p.omega_b,
        omega_l_rabi: omega_l,
    }
}

/// f(q) = qω_b(κ_n² + (Δ_n + g_n q)²) + g_nΩ², whose zeros are the static
/// displacements.
pub fn cubic(p: &RawDriveParams, q: f64) -> f64 {
    let y = p.delta_n_bare + p.g_n_bare * q;
    q * p.omega_b * (p.kappa_n * p.kappa_n + y * y) + p.g_n_bare * p.omega_l_rabi * p.omega_l_rabi
}

fn bisect(p: &RawDriveParams, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = cubic(p, lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if cubic(p, lo).abs() < cubic(p, hi).abs() { lo } else { hi };
        }
        let f_mid = cubic(p, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// All real roots of the steady-state cubic for g_n > 0, found by a dense
/// scan of [−g_nΩ²/(ω_bκ_n²), 0] and bisection of every sign change.
pub fn cubic_roots(p: &RawDriveParams, n_scan: usize) -> Vec<f64> {
    let q_lo = -p.g_n_bare * p.omega_l_rabi * p.omega_l_rabi / (p.omega_b * p.kappa_n * p.kappa_n);
    if q_lo == 0.0 {
        return vec![0.0];
    }
    let mut roots = Vec::new();
    let at = |k: usize| q_lo * (1.0 - k as f64 / n_scan as f64);
    let mut prev = (at(0), cubic(p, at(0)));
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    for k in 1..=n_scan {
        let q = at(k);
        let f = cubic(p, q);
        if f == 0.0 {
            roots.push(q);
        } else if prev.1 != 0.0 && (f < 0.0) != (prev.1 < 0.0) {
            roots.push(bisect(p, prev.0, q));
        }
        prev = (q, f);
    }
    roots
}

/// The cubic root nearest to `q`.
pub fn nearest_root(p: &RawDriveParams, q: f64) -> f64 {
    cubic_roots(p, 200_000)
        .into_iter()
        .min_by(|a, b| (a - q).abs().total_cmp(&(b - q).abs()))
        .expect("the cubic changes sign on the bracket")
}
