//! CSV and JSON writers for spectra and engine comparisons.
//!
//! Numbers use Rust's shortest round-trip formatting, so the same input
//! always produces byte-identical files.

use std::io::{self, Write};

use serde_json::{json, Map, Value};

use crate::model::{SteadyState, SystemParams};
use crate::response::ResponsePoint;
use crate::sweep::{ComparisonReport, SweepSpec};
use crate::windows::Window;
use crate::Complex;

pub const SPECTRUM_HEADER: &str = "delta_rad_s,eps_R,eps_I,T_re,T_im,T_sq,phase_rad,tau_s";
pub const COMPARE_HEADER: &str = "delta_rad_s,c_oracle_re,c_oracle_im,c_printed_re,c_printed_im,c_corrected_re,c_corrected_im,rel_printed_vs_oracle,rel_corrected_vs_oracle,rel_printed_vs_corrected";

pub fn write_spectrum_csv<W: Write>(mut w: W, points: &[ResponsePoint]) -> io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            p.delta,
            p.eps_out.re,
            p.eps_out.im,
            p.transmission.re,
            p.transmission.im,
            p.t_sq,
            p.phase,
            p.tau
        )?;
    }
    Ok(())
}

fn complex_json(c: Complex) -> Value {
    json!({ "re": c.re, "im": c.im })
}

/// Resolved parameters in rad/s.
pub fn params_json(p: &SystemParams) -> Value {
    json!({
        "kappa_c": p.kappa_c,
        "kappa_n": p.kappa_n,
        "gamma_a": p.gamma_a,
        "gamma_b": p.gamma_b,
        "omega_b": p.omega_b,
        "delta_a": p.delta_a,
        "delta_c_eff": p.delta_c_eff,
        "delta_n_eff": p.delta_n_eff,
        "g_N": p.g_atom,
        "G_c": complex_json(p.g_opto),
        "G_n": complex_json(p.g_magno),
        "eps_p": p.eps_p,
    })
}

pub fn sweep_json(s: &SweepSpec) -> Value {
    json!({
        "delta_start": s.delta_start,
        "delta_stop": s.delta_stop,
        "n_points": s.n_points,
        "fd_step": s.fd_step,
        "prominence": s.prominence,
        "engine": s.engine.as_str(),
    })
}

pub fn steady_state_json(ss: &SteadyState) -> Value {
    json!({
        "a0": complex_json(ss.a0),
        "c0": complex_json(ss.c0),
        "n0": complex_json(ss.n0),
        "q0": ss.q0,
        "delta_c_eff": ss.delta_c_eff,
        "delta_n_eff": ss.delta_n_eff,
        "residual": ss.residual,
        "iterations": ss.iterations,
        "multiple_roots": ss.multiple_roots,
    })
}

pub fn window_json(w: &Window) -> Value {
    json!({
        "delta_min": w.delta_min,
        "value": w.value,
        "depth": w.depth,
        "width": w.width,
        "left_peak": w.left_peak,
        "right_peak": w.right_peak,
    })
}

/// `{"meta": {...}, "rows": [...]}` with the same per-row fields as the CSV.
pub fn spectrum_json(
    points: &[ResponsePoint],
    params: &SystemParams,
    sweep: &SweepSpec,
    steady: Option<&SteadyState>,
) -> Value {
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "delta_rad_s": p.delta,
                "eps_R": p.eps_out.re,
                "eps_I": p.eps_out.im,
                "T_re": p.transmission.re,
                "T_im": p.transmission.im,
                "T_sq": p.t_sq,
                "phase_rad": p.phase,
                "tau_s": p.tau,
            })
        })
        .collect();
    let mut meta = Map::new();
    meta.insert("params".into(), params_json(params));
    meta.insert("sweep".into(), sweep_json(sweep));
    if let Some(ss) = steady {
        meta.insert("steady_state".into(), steady_state_json(ss));
    }
    json!({ "meta": meta, "rows": rows })
}

pub fn write_spectrum_json<W: Write>(
    mut w: W,
    points: &[ResponsePoint],
    params: &SystemParams,
    sweep: &SweepSpec,
    steady: Option<&SteadyState>,
) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, &spectrum_json(points, params, sweep, steady))?;
    writeln!(w)
}

pub fn write_comparison_csv<W: Write>(mut w: W, report: &ComparisonReport) -> io::Result<()> {
    writeln!(w, "{COMPARE_HEADER}")?;
    for r in &report.rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.delta,
            r.oracle.re,
            r.oracle.im,
            r.printed.re,
            r.printed.im,
            r.corrected.re,
            r.corrected.im,
            r.printed_vs_oracle(),
            r.corrected_vs_oracle(),
            r.printed_vs_corrected()
        )?;
    }
    Ok(())
}

/// Summary block of a comparison, one `key = value` per line.
pub fn comparison_summary(report: &ComparisonReport) -> String {
    let mut out = String::new();
    for (name, s) in [
        ("printed_vs_oracle", report.printed_vs_oracle()),
        ("corrected_vs_oracle", report.corrected_vs_oracle()),
        ("printed_vs_corrected", report.printed_vs_corrected()),
    ] {
        out.push_str(&format!("{name}.max = {:e}\n", s.max));
        out.push_str(&format!("{name}.mean = {:e}\n", s.mean));
        out.push_str(&format!("{name}.argmax_delta_rad_s = {:e}\n", s.argmax));
    }
    out
}
