use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use mmit::config::{load_config, parse_complex, OutputFormat, ParamMode, RunConfig};
use mmit::model::{hz, SteadyState, ValidatedParams};
use mmit::output;
use mmit::response::{estimate_group_delay, DelayEstimate, ResponseError};
use mmit::sweep::{compare_engines, map_grid, run_sweep, Execution};
use serde_json::{json, Map, Value};

use crate::Common;

pub enum CliError {
    Core(mmit::Error),
    /// A command-line value that the configuration cannot accept.
    Override(String),
    /// The subcommand needs the other parameter mode.
    WrongMode(&'static str),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Override(_) => "invalid_override",
            CliError::WrongMode(_) => "wrong_mode",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            _ => mmit::EXIT_CONFIG,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Override(m) => f.write_str(m),
            CliError::WrongMode(m) => f.write_str(m),
        }
    }
}

impl<E: Into<mmit::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Run {
    config: RunConfig,
    params: ValidatedParams,
    steady: Option<SteadyState>,
    exec: Execution,
}

impl Run {
    fn meta(&self) -> Map<String, Value> {
        let mut meta = Map::new();
        meta.insert("params".into(), output::params_json(&self.params));
        meta.insert("sweep".into(), output::sweep_json(&self.config.sweep));
        if let Some(ss) = &self.steady {
            meta.insert("steady_state".into(), output::steady_state_json(ss));
        }
        meta
    }

    fn out(&self) -> Option<&Path> {
        self.config.output.as_deref()
    }
}

fn coupling_override(flag: &str, text: &str) -> Result<mmit::Complex> {
    let c = parse_complex(text)
        .ok_or_else(|| CliError::Override(format!("--{flag}: expected `re` or `re+imj` in Hz, got `{text}`")))?;
    Ok(c * hz(1.0))
}

/// Loads the configuration and applies the command-line overrides.
fn prepare(common: &Common) -> Result<Run> {
    let mut config = load_config(&common.config)?;

    if common.gc.is_some() || common.gn.is_some() {
        let ParamMode::Effective(p) = config.mode else {
            return Err(CliError::Override(
                "--gc/--gn override effective couplings; the configuration uses raw-drive parameters".into(),
            ));
        };
        let mut p = p.into_inner();
        if let Some(gc) = &common.gc {
            p.g_opto = coupling_override("gc", gc)?;
        }
        if let Some(gn) = &common.gn {
            p.g_magno = coupling_override("gn", gn)?;
        }
        config.mode = ParamMode::Effective(p.validate()?);
    }
    if let Some(engine) = common.engine {
        config.sweep.engine = engine;
    }
    if let Some(n) = common.points {
        config.sweep.n_points = n;
    }
    config.sweep.validate()?;
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    if let Some(format) = common.format {
        config.format = format;
    }
    let exec = match common.threads {
        None => Execution::Parallel,
        Some(0) => return Err(CliError::Override("--threads must be at least 1".into())),
        Some(n) => Execution::Threads(n),
    };

    let (params, steady) = config.resolve()?;
    Ok(Run { config, params, steady, exec })
}

fn with_sink(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json(w: &mut dyn Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)
}

pub fn spectrum(common: &Common) -> Result<()> {
    let run = prepare(common)?;
    let s = run_sweep(&run.params, &run.config.sweep, run.exec)?;
    let unconverged = s.unconverged_delays();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} points failed the group-delay step-halving check");
    }
    with_sink(run.out(), |w| match run.config.format {
        OutputFormat::Csv => output::write_spectrum_csv(w, &s.points),
        OutputFormat::Json => {
            output::write_spectrum_json(w, &s.points, &run.params, &run.config.sweep, run.steady.as_ref())
        }
    })
}

const DELAY_HEADER: &str = "delta_rad_s,tau_s,tau_half_step_s,step_rad_s";

pub fn delay(common: &Common, at: &[f64]) -> Result<()> {
    let run = prepare(common)?;
    let spec = &run.config.sweep;
    let grid = if at.is_empty() { spec.grid() } else { at.to_vec() };
    let estimates: Vec<DelayEstimate> = map_grid(&grid, run.exec, |d| {
        estimate_group_delay(spec.engine, &run.params, d, spec.fd_step)
    })?;
    if let Some(e) = estimates.iter().find(|e| !e.converged()) {
        return Err(ResponseError::StepTooLarge { delta: e.delta, tau: e.tau, tau_half_step: e.tau_half_step }.into());
    }
    with_sink(run.out(), |w| match run.config.format {
        OutputFormat::Csv => {
            writeln!(w, "{DELAY_HEADER}")?;
            for e in &estimates {
                writeln!(w, "{:e},{:e},{:e},{:e}", e.delta, e.tau, e.tau_half_step, e.step)?;
            }
            Ok(())
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = estimates
                .iter()
                .map(|e| {
                    json!({
                        "delta_rad_s": e.delta,
                        "tau_s": e.tau,
                        "tau_half_step_s": e.tau_half_step,
                        "step_rad_s": e.step,
                    })
                })
                .collect();
            write_json(w, &json!({ "meta": run.meta(), "rows": rows }))
        }
    })
}

const STEADY_HEADER: &str =
    "q0,n0_re,n0_im,delta_c_eff_rad_s,delta_n_eff_rad_s,G_c_re,G_c_im,G_n_re,G_n_im,residual,iterations,multiple_roots";

pub fn steady_state(common: &Common) -> Result<()> {
    let run = prepare(common)?;
    let Some(ss) = run.steady else {
        return Err(CliError::WrongMode("steady-state needs a raw-drive configuration (g_c_bare, g_n_bare, omega_L, ...)"));
    };
    if ss.multiple_roots {
        eprintln!("warning: bistable drive; the steady state reached from q0 = 0 is reported");
    }
    let p = &run.params;
    with_sink(run.out(), |w| match run.config.format {
        OutputFormat::Csv => {
            writeln!(w, "{STEADY_HEADER}")?;
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
                ss.q0,
                ss.n0.re,
                ss.n0.im,
                ss.delta_c_eff,
                ss.delta_n_eff,
                p.g_opto.re,
                p.g_opto.im,
                p.g_magno.re,
                p.g_magno.im,
                ss.residual,
                ss.iterations,
                ss.multiple_roots
            )
        }
        OutputFormat::Json => write_json(w, &json!({ "meta": run.meta() })),
    })
}

const WINDOW_HEADER: &str = "index,delta_min_rad_s,eps_R_min,depth,width_rad_s,left_peak_rad_s,right_peak_rad_s";

pub fn windows(common: &Common, prominence: Option<f64>) -> Result<()> {
    let mut run = prepare(common)?;
    if let Some(prom) = prominence {
        run.config.sweep.prominence = prom;
        run.config.sweep.validate()?;
    }
    let s = run_sweep(&run.params, &run.config.sweep, run.exec)?;
    let found = s.windows(run.config.sweep.prominence);
    eprintln!("{} transparency windows at prominence {}", found.len(), run.config.sweep.prominence);
    with_sink(run.out(), |w| match run.config.format {
        OutputFormat::Csv => {
            writeln!(w, "{WINDOW_HEADER}")?;
            for win in &found {
                writeln!(
                    w,
                    "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                    win.index, win.delta_min, win.value, win.depth, win.width, win.left_peak, win.right_peak
                )?;
            }
            Ok(())
        }
        OutputFormat::Json => {
            let list: Vec<Value> = found.iter().map(output::window_json).collect();
            write_json(w, &json!({ "meta": run.meta(), "windows": list }))
        }
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".summary.txt");
    PathBuf::from(name)
}

pub fn compare(common: &Common) -> Result<()> {
    let run = prepare(common)?;
    let report = compare_engines(&run.params, &run.config.sweep, run.exec)?;
    let summary = output::comparison_summary(&report);
    eprint!("{summary}");
    with_sink(run.out(), |w| match run.config.format {
        OutputFormat::Csv => output::write_comparison_csv(w, &report),
        OutputFormat::Json => {
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "delta_rad_s": r.delta,
                        "c_oracle": { "re": r.oracle.re, "im": r.oracle.im },
                        "c_printed": { "re": r.printed.re, "im": r.printed.im },
                        "c_corrected": { "re": r.corrected.re, "im": r.corrected.im },
                        "rel_printed_vs_oracle": r.printed_vs_oracle(),
                        "rel_corrected_vs_oracle": r.corrected_vs_oracle(),
                        "rel_printed_vs_corrected": r.printed_vs_corrected(),
                    })
                })
                .collect();
            write_json(w, &json!({ "meta": run.meta(), "rows": rows }))
        }
    })?;
    if let Some(out) = run.out() {
        std::fs::write(summary_path(out), &summary)?;
    }
    Ok(())
}
