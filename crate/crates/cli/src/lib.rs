//! Command-line front end: pathway tables, simulation with metrics and CSV
//! export, and exact broadening ratios.
//!
//! Exit codes: 0 on success, 1 for domain errors (unreachable acquisition
//! order, unknown transition, no peak to measure, output not writable), 2 for
//! usage errors and `.pp` parse issues.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use stmas_core::coherence::{acquisitions_per_cycle, enumerate_with_bound};
use stmas_core::simulate::{simulate, ShearSetting, SimulationConfig};
use stmas_core::spectrum::{ascii_contour, write_projection_csv, write_spectrum_csv};
use stmas_core::spin::transitions;
use stmas_core::{
    broadening_ratio, parse_program, BroadeningRatio, PulseProgram, Spin, TransitionLabel,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stmas",
    version,
    about = "STMAS phase-cycle and spectrum simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the coherence pathways that survive the program's phase cycle.
    Pathways {
        file: PathBuf,
        /// Largest |coherence order| allowed between pulses (default 2S).
        #[arg(long)]
        pmax: Option<i32>,
    },
    /// Synthesize, transform and measure the 2D spectrum.
    Simulate {
        file: PathBuf,
        /// Spectrum CSV path; projections go next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Powder orientations.
        #[arg(long, default_value_t = NonZeroUsize::new(256).unwrap())]
        powder: NonZeroUsize,
        #[arg(long = "lb-f2", default_value_t = 50.0)]
        lb_f2: f64,
        #[arg(long = "lb-f1", default_value_t = 10.0)]
        lb_f1: f64,
        /// Shear ratio `p/q`, or `auto` for the ST1/CT ratio of the spin.
        #[arg(long, value_parser = parse_shear)]
        shear: Option<ShearSetting>,
        /// Print a coarse contour map.
        #[arg(long)]
        ascii: bool,
        /// Rotor angle in degrees (default: magic angle).
        #[arg(long = "chi-deg")]
        chi_deg: Option<f64>,
        /// Complete phase cycles summed.
        #[arg(long, default_value_t = 1)]
        cycles: u64,
    },
    /// Exact ridge slopes of every transition against the central one.
    Ratios { spin: String },
}

fn parse_shear(s: &str) -> Result<ShearSetting, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(ShearSetting::Auto);
    }
    s.parse::<BroadeningRatio>()
        .map(ShearSetting::Ratio)
        .map_err(|e| e.to_string())
}

/// Result of one command: exit code, captured streams and files written.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub files: Vec<PathBuf>,
}

impl CommandOutcome {
    fn fail(code: i32, msg: impl std::fmt::Display) -> Self {
        CommandOutcome {
            exit_code: code,
            stderr: format!("error: {msg}\n"),
            ..Default::default()
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                CommandOutcome {
                    stdout: text,
                    ..Default::default()
                }
            } else {
                CommandOutcome {
                    exit_code: EXIT_USAGE,
                    stderr: text,
                    ..Default::default()
                }
            };
        }
    };
    match cli.command {
        Command::Pathways { file, pmax } => cmd_pathways(&file, pmax),
        Command::Simulate {
            file,
            out,
            powder,
            lb_f2,
            lb_f1,
            shear,
            ascii,
            chi_deg,
            cycles,
        } => {
            let mut cfg = SimulationConfig {
                powder_n: powder,
                lb_f2,
                lb_f1,
                shear: shear.unwrap_or_default(),
                cycles,
                ..Default::default()
            };
            if let Some(deg) = chi_deg {
                cfg.chi = deg.to_radians();
            }
            cmd_simulate(&file, out.as_deref(), &cfg, ascii)
        }
        Command::Ratios { spin } => cmd_ratios(&spin),
    }
}

fn load(file: &Path) -> Result<PulseProgram, CommandOutcome> {
    let text = fs::read_to_string(file).map_err(|e| {
        CommandOutcome::fail(EXIT_USAGE, format!("cannot read {}: {e}", file.display()))
    })?;
    parse_program(&text).map_err(|issues| {
        let mut stderr = String::new();
        for i in &issues.0 {
            let _ = writeln!(stderr, "{}:{i}", file.display());
        }
        CommandOutcome {
            exit_code: EXIT_USAGE,
            stderr,
            ..Default::default()
        }
    })
}

fn format_dp(dp: &[i32]) -> String {
    let parts: Vec<String> = dp
        .iter()
        .map(|&d| if d == 0 { "0".into() } else { format!("{d:+}") })
        .collect();
    format!("({})", parts.join(","))
}

pub fn cmd_pathways(file: &Path, pmax: Option<i32>) -> CommandOutcome {
    let prog = match load(file) {
        Ok(p) => p,
        Err(o) => return o,
    };
    if let Some(p) = pmax {
        if p < 0 {
            return CommandOutcome::fail(EXIT_USAGE, format!("--pmax must be >= 0, got {p}"));
        }
    }
    let bound = pmax.unwrap_or(prog.spin.max_order());
    let found = enumerate_with_bound(&prog.cycle, bound);
    if found.is_empty() {
        return CommandOutcome::fail(
            EXIT_DOMAIN,
            format!(
                "acquisition order {} is unreachable within |p| <= {bound}",
                prog.cycle.acquisition_order()
            ),
        );
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "acquisitions_per_cycle={}",
        acquisitions_per_cycle(&prog.cycle)
    );
    let _ = writeln!(out, "pmax={bound}");
    let _ = writeln!(out, "pathways={}", found.len());
    for p in &found {
        let routes: Vec<_> = prog.routes.iter().filter(|r| r.dp == p.dp).collect();
        let names = routes
            .iter()
            .map(|r| r.name.as_str())
            .collect::<Vec<_>>()
            .join(",");
        let branches = routes
            .iter()
            .map(|r| r.t1_branch.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(
            out,
            "dp={} t1_branch={} route={} survival=1",
            format_dp(&p.dp),
            if branches.is_empty() { "-" } else { &branches },
            if names.is_empty() { "-" } else { &names },
        );
    }
    CommandOutcome {
        stdout: out,
        ..Default::default()
    }
}

/// `<dir>/<stem>_f1_proj.csv` and `<dir>/<stem>_f2_proj.csv` next to `out`.
pub fn projection_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "spectrum".into());
    (
        out.with_file_name(format!("{stem}_f1_proj.csv")),
        out.with_file_name(format!("{stem}_f2_proj.csv")),
    )
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CommandOutcome>
where
    F: FnOnce(BufWriter<fs::File>) -> std::io::Result<()>,
{
    fs::File::create(path)
        .and_then(|file| f(BufWriter::new(file)))
        .map_err(|e| {
            CommandOutcome::fail(EXIT_DOMAIN, format!("cannot write {}: {e}", path.display()))
        })
}

pub fn cmd_simulate(
    file: &Path,
    out: Option<&Path>,
    cfg: &SimulationConfig,
    ascii: bool,
) -> CommandOutcome {
    let prog = match load(file) {
        Ok(p) => p,
        Err(o) => return o,
    };
    if !(cfg.lb_f1 >= 0.0 && cfg.lb_f2 >= 0.0) || !cfg.chi.is_finite() {
        return CommandOutcome::fail(EXIT_USAGE, "line broadening must be >= 0 and chi finite");
    }
    let sim = match simulate(&prog, cfg) {
        Ok(s) => s,
        Err(e) => return CommandOutcome::fail(EXIT_DOMAIN, e),
    };
    let mut text = String::new();
    for r in &sim.routes {
        let _ = writeln!(
            text,
            "route={} dp={} t1_branch={} amp={:?} survival={}",
            r.name,
            format_dp(&r.pathway.dp),
            r.pathway.t1_branch.unwrap_or(TransitionLabel::Central),
            r.pathway.amplitude.re,
            u8::from(r.survives)
        );
    }
    let _ = writeln!(text, "scans={}", sim.scans);
    let _ = writeln!(text, "powder={}", cfg.powder_n);
    match sim.shear {
        Some(r) => {
            let _ = writeln!(text, "shear={r}");
        }
        None => text.push_str("shear=none\n"),
    }
    let mut files = Vec::new();
    if let Some(path) = out {
        let (p1, p2) = projection_paths(path);
        let written = write_with(path, |w| write_spectrum_csv(&sim.spectrum, w))
            .and_then(|_| write_with(&p1, |w| write_projection_csv(&sim.f1_projection(), w)))
            .and_then(|_| write_with(&p2, |w| write_projection_csv(&sim.f2_projection(), w)));
        if let Err(mut o) = written {
            o.stdout = text;
            return o;
        }
        for p in [path.to_path_buf(), p1, p2] {
            let _ = writeln!(text, "wrote={}", p.display());
            files.push(p);
        }
    }
    let _ = writeln!(text, "integral={}", sim.integral());
    let metrics = sim.metrics();
    if let Ok(m) = &metrics {
        let _ = writeln!(text, "fwhm_f1_hz={}", m.fwhm_f1.hz);
        let _ = writeln!(text, "fwhm_f1_ppm={}", m.fwhm_f1.ppm);
        let _ = writeln!(text, "fwhm_f2_hz={}", m.fwhm_f2.hz);
        let _ = writeln!(text, "fwhm_f2_ppm={}", m.fwhm_f2.ppm);
    }
    if ascii {
        text.push_str(&ascii_contour(&sim.spectrum, 72, 24));
    }
    match metrics {
        Ok(_) => CommandOutcome {
            stdout: text,
            files,
            ..Default::default()
        },
        Err(e) => CommandOutcome {
            exit_code: EXIT_DOMAIN,
            stdout: text,
            stderr: format!("error: {e}\n"),
            files,
        },
    }
}

pub fn cmd_ratios(spin: &str) -> CommandOutcome {
    let spin = match spin
        .parse::<Spin>()
        .map_err(|e| e.to_string())
        .and_then(|s| Spin::half_integer(s.twice()).map_err(|e| e.to_string()))
    {
        Ok(s) => s,
        Err(e) => return CommandOutcome::fail(EXIT_USAGE, e),
    };
    let ts = transitions(spin);
    let ct = ts[0];
    let mut out = String::new();
    // One row per ST_k/-ST_k pair: both members share the ratio.
    for t in ts.iter().filter(|t| t.m.twice() > 0) {
        match broadening_ratio(spin, t, &ct) {
            Ok(r) => {
                let _ = writeln!(out, "{}-CT {r}", t.label);
            }
            Err(e) => return CommandOutcome::fail(EXIT_DOMAIN, e),
        }
    }
    CommandOutcome {
        stdout: out,
        ..Default::default()
    }
}
