//! Commands behind the `qprobe` binary.
//!
//! Exit codes: 0 success (peaks found), 1 sweep finished without peaks,
//! 2 usage error, 3 I/O, 4 parse, 5 invalid model or parameters,
//! 6 numerical failure, 7 validation found missing transitions,
//! 8 preparation step aborted. Errors print one line `error[<kind>]: <message>`
//! on stderr.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qprobe::io::{
    load_model, read_spectrum, write_plot_data, write_spectrum_csv, write_spectrum_json,
    SpectrumDocument,
};
use qprobe::oracle::{
    eigendecompose, match_peaks_by, transition_table, validate_spectrum, ValidationReport,
};
use qprobe::spectroscopy::{
    detect_peaks, predict_spectrum, prepare_eigenstate_chain, run_sweep, ChainStep, Method, Peak,
    PrepareOptions, Spectrum, SweepMode, SweepPlan, ThresholdPolicy,
};
use qprobe::{preset_coupling, CouplingPreset, Model, Statevector, TrotterOrder};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_PEAKS: u8 = 1;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PARSE: u8 = 4;
pub const EXIT_MODEL: u8 = 5;
pub const EXIT_NUMERICAL: u8 = 6;
pub const EXIT_MISSING: u8 = 7;
pub const EXIT_ABORTED: u8 = 8;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        Self::new(EXIT_IO, "io", format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keep it on one line
        let msg = self.message.replace('\n', " ");
        write!(f, "error[{}]: {msg}", self.kind)
    }
}

impl From<qprobe::Error> for CliError {
    fn from(e: qprobe::Error) -> Self {
        use qprobe::Error as E;
        let (code, kind) = match &e {
            E::Io(_) => (EXIT_IO, "io"),
            E::Parse { .. } | E::Json(_) => (EXIT_PARSE, "parse"),
            E::Structure(_) | E::Dimension(_) | E::Validation(_) => (EXIT_MODEL, "model"),
            E::Resource { .. } => (EXIT_MODEL, "resource"),
            E::Parameter(_) => (EXIT_MODEL, "config"),
            E::Numerical(_) | E::Projection { .. } | E::Sweep(_) => (EXIT_NUMERICAL, "numerical"),
            E::StepAborted { .. } => (EXIT_ABORTED, "step-aborted"),
        };
        Self::new(code, kind, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "qprobe",
    version,
    about = "Probe-qubit spectroscopy on a statevector simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a frequency sweep and detect peaks.
    Sweep(SweepArgs),
    /// Closed-form spectrum from the transition table, no time evolution.
    Predict(PredictArgs),
    /// Compare a sweep (or a spectrum file) against the exact transitions.
    Validate(ValidateArgs),
    /// Prepare an eigenstate by a chain of resonant steps.
    Prepare(PrepareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Absorption,
    Emission,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Absorption => SweepMode::Absorption,
            ModeArg::Emission => SweepMode::Emission,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Override the coupling strength.
    #[arg(long)]
    pub c: Option<f64>,
    /// Override the interaction time.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Replace the model's coupling operator (eq5, eq6, eq7, uniform-x).
    #[arg(long)]
    pub coupling_preset: Option<String>,
    /// Initial system basis state as a bitstring, most-significant qubit first.
    #[arg(long)]
    pub initial: Option<String>,
}

impl ModelArgs {
    pub fn load(&self) -> CliResult<Model> {
        if !self.model.exists() {
            return Err(CliError::io(&self.model, "no such file"));
        }
        let mut m = load_model(&self.model).map_err(|e| match e {
            qprobe::Error::Io(io) => CliError::io(&self.model, io),
            other => other.into(),
        })?;
        if let Some(c) = self.c {
            m.c = c;
        }
        if let Some(tau) = self.tau {
            m.tau = tau;
        }
        if let Some(name) = &self.coupling_preset {
            m.coupling = preset_coupling(name.parse::<CouplingPreset>()?, m.width())?;
        }
        if let Some(bits) = &self.initial {
            m.initial = Statevector::from_bitstring(bits)?;
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub omega_min: f64,
    #[arg(long)]
    pub omega_max: f64,
    /// Number of frequency intervals.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Defaults to absorption for an excited probe, emission for a ground one.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

impl GridArgs {
    fn plan(&self, model: &Model) -> SweepPlan {
        let mode = self
            .mode
            .map(SweepMode::from)
            .unwrap_or(match model.probe_init {
                qprobe::ProbeState::Excited => SweepMode::Absorption,
                qprobe::ProbeState::Ground => SweepMode::Emission,
            });
        SweepPlan::new(self.omega_min, self.omega_max, self.points).with_mode(mode)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PeakArgs {
    /// Relative peak threshold (fraction of the spectrum maximum).
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Absolute detection floor.
    #[arg(long, default_value_t = 1e-4)]
    pub floor: f64,
}

impl PeakArgs {
    fn policy(&self) -> CliResult<ThresholdPolicy> {
        if !(self.threshold >= 0.0 && self.floor >= 0.0) {
            return Err(CliError::new(
                EXIT_MODEL,
                "config",
                "thresholds must be non-negative",
            ));
        }
        Ok(ThresholdPolicy {
            floor: self.floor,
            relative: self.threshold,
            merge_gap: None,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Fixed Trotter step count; chosen from the Hamiltonian norm when absent.
    #[arg(long)]
    pub trotter_steps: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub trotter_order: u32,
}

impl MethodArgs {
    fn method(&self) -> CliResult<Method> {
        Ok(match self.method {
            MethodArg::Exact => Method::Exact,
            MethodArg::Trotter => Method::Trotter {
                order: TrotterOrder::from_number(self.trotter_order)?,
                steps: self.trotter_steps,
            },
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    /// Two-column `omega probability` file for plotting.
    #[arg(long)]
    pub out_plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Sample this many shots per frequency instead of exact probabilities.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub peaks: PeakArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Validate this spectrum (CSV or JSON) instead of running a sweep.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[command(flatten)]
    pub peaks: PeakArgs,
    /// Write the report as JSON.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PrepareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated eigenstate steps, e.g. `13-14,14-20` (ascending-energy indices).
    #[arg(long, default_value = "")]
    pub path: String,
    /// Abort when a step flips the probe with lower probability.
    #[arg(long, default_value_t = 1e-3)]
    pub min_flip: f64,
    /// Interaction time per step; the resonant pi-time when absent.
    #[arg(long)]
    pub step_tau: Option<f64>,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Prepare(a) => cmd_prepare(&a),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn with_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> qprobe::Result<()>,
) -> CliResult<()> {
    let mut w = create(path)?;
    f(&mut w).map_err(|e| match e {
        qprobe::Error::Io(io) => CliError::io(path, io),
        other => other.into(),
    })?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_outputs(out: &OutputArgs, doc: &SpectrumDocument) -> CliResult<()> {
    if let Some(p) = &out.out_csv {
        with_file(p, |w| write_spectrum_csv(&doc.spectrum, w))?;
    }
    if let Some(p) = &out.out_json {
        with_file(p, |w| write_spectrum_json(doc, w))?;
    }
    if let Some(p) = &out.out_plot {
        with_file(p, |w| write_plot_data(&doc.spectrum, w))?;
    }
    Ok(())
}

fn print_peaks(peaks: &[Peak]) {
    if peaks.is_empty() {
        println!("no peaks detected");
        return;
    }
    println!(
        "{:>4} {:>12} {:>12} {:>12}  assignment",
        "#", "omega", "height", "fwhm"
    );
    for (i, p) in peaks.iter().enumerate() {
        println!(
            "{:>4} {:>12.6} {:>12.6} {:>12.6}  {}",
            i,
            p.center,
            p.height,
            p.fwhm,
            p.assignment.as_deref().unwrap_or("-")
        );
    }
}

/// Peaks plus their oracle assignments when the eigensystem fits the cap.
fn analyse(model: &Model, spectrum: &Spectrum, policy: &ThresholdPolicy) -> SpectrumDocument {
    let mut peaks = detect_peaks(spectrum, policy);
    let mut assignments = vec![];
    let table = eigendecompose(&model.system).and_then(|eig| {
        transition_table(
            &eig,
            model.coupling.op(),
            &model.initial,
            (spectrum.omega_min, spectrum.omega_max),
            spectrum.mode,
        )
    });
    match table {
        Ok(t) => {
            let dw = spectrum.delta_omega();
            let visible: Vec<_> = t.visible(0.0).copied().collect();
            let report = match_peaks_by(&peaks, &visible, |p| (2.0 * dw).max(p.fwhm));
            for a in &report.assignments {
                peaks[a.peak].assignment = Some(a.record.label());
            }
            assignments = report.assignments;
        }
        Err(e) => log::warn!("skipping peak assignment: {e}"),
    }
    SpectrumDocument {
        spectrum: spectrum.clone(),
        peaks,
        assignments,
    }
}

fn finish(doc: &SpectrumDocument) -> u8 {
    print_peaks(&doc.peaks);
    if doc.peaks.is_empty() {
        EXIT_NO_PEAKS
    } else {
        EXIT_OK
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<u8> {
    let model = args.model.load()?;
    let policy = args.peaks.policy()?;
    let mut plan = args.grid.plan(&model).with_method(args.method.method()?);
    if let Some(shots) = args.shots {
        plan = plan.with_shots(shots, args.seed);
    }
    let spectrum = run_sweep(&model, &plan)?;
    let doc = analyse(&model, &spectrum, &policy);
    write_outputs(&args.out, &doc)?;
    Ok(finish(&doc))
}

pub fn cmd_predict(args: &PredictArgs) -> CliResult<u8> {
    let model = args.model.load()?;
    let policy = args.peaks.policy()?;
    let plan = args.grid.plan(&model);
    let eig = eigendecompose(&model.system)?;
    let table = transition_table(
        &eig,
        model.coupling.op(),
        &model.initial,
        (plan.omega_min, plan.omega_max),
        plan.mode,
    )?;
    let spectrum = predict_spectrum(&table.records, model.c, model.tau, &plan)?;
    let doc = analyse(&model, &spectrum, &policy);
    write_outputs(&args.out, &doc)?;
    Ok(finish(&doc))
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult<u8> {
    let model = args.model.load()?;
    let policy = args.peaks.policy()?;
    let plan = args.grid.plan(&model).with_method(args.method.method()?);
    let spectrum = match &args.spectrum {
        Some(path) => {
            let mut s = read_spectrum(path).map_err(|e| CliError::io(path, e))?;
            if s.tau == 0.0 {
                s.c = model.c;
                s.tau = model.tau;
                s.mode = plan.mode;
            }
            s
        }
        None => run_sweep(&model, &plan)?,
    };
    let eig = eigendecompose(&model.system)?;
    let table = transition_table(
        &eig,
        model.coupling.op(),
        &model.initial,
        (spectrum.omega_min, spectrum.omega_max),
        spectrum.mode,
    )?;
    let report = validate_spectrum(&spectrum, &table, &policy);
    print_report(&report);
    if let Some(p) = &args.out_json {
        with_file(p, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_MISSING
    })
}

fn print_report(r: &ValidationReport) {
    println!("detection floor {:.6}", r.floor);
    for a in &r.matches.assignments {
        let p = &r.peaks[a.peak];
        println!(
            "matched   {:<8} omega={:.6} delta_e={:.6}{}",
            a.record.label(),
            p.center,
            a.record.delta_e,
            if a.ambiguous { " (ambiguous)" } else { "" }
        );
    }
    for m in &r.missing {
        println!(
            "missing   {:<8} delta_e={:.6} M={:.3e} overlap={:.3e}",
            m.label(),
            m.delta_e,
            m.matrix_element,
            m.overlap
        );
    }
    for p in &r.spurious {
        println!("spurious  omega={:.6} height={:.6}", p.center, p.height);
    }
    for s in &r.selection_rule {
        println!(
            "note      {:<8} delta_e={:.6} expected-missing by selection rule (matrix element {:.1e})",
            s.label(),
            s.delta_e,
            s.matrix_element
        );
    }
    println!(
        "{} matched, {} missing, {} spurious",
        r.matches.assignments.len(),
        r.missing.len(),
        r.spurious.len()
    );
}

pub fn parse_path(text: &str) -> CliResult<Vec<ChainStep>> {
    let bad = |tok: &str| {
        CliError::new(
            EXIT_PARSE,
            "parse",
            format!("bad path step `{tok}`, expected FROM-TO"),
        )
    };
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|tok| {
            let (a, b) = tok.split_once('-').ok_or_else(|| bad(tok))?;
            let from = a.trim().parse().map_err(|_| bad(tok))?;
            let to = b.trim().parse().map_err(|_| bad(tok))?;
            Ok(ChainStep::new(from, to))
        })
        .collect()
}

#[derive(Serialize)]
struct PrepareOutput<'a> {
    target: usize,
    fidelity: f64,
    steps: &'a [qprobe::spectroscopy::StepReport],
    amplitudes: Vec<[f64; 2]>,
}

pub fn cmd_prepare(args: &PrepareArgs) -> CliResult<u8> {
    let model = args.model.load()?;
    let path = parse_path(&args.path)?;
    let opts = PrepareOptions {
        min_flip_probability: args.min_flip,
        method: args.method.method()?,
        tau: args.step_tau,
    };
    let report = prepare_eigenstate_chain(&model, &path, &opts).map_err(|e| match e {
        qprobe::Error::StepAborted { step, .. } if step < path.len() => {
            let s = path[step];
            CliError::new(
                EXIT_ABORTED,
                "step-aborted",
                format!("{e} ({}->{})", s.from, s.to),
            )
        }
        other => other.into(),
    })?;
    for (i, s) in report.steps.iter().enumerate() {
        println!(
            "step {i}: {}->{} omega={:.6} tau={:.3} flip={:.6} fidelity={:.6}",
            s.from, s.to, s.omega, s.tau, s.flip_probability, s.fidelity
        );
    }
    println!("target {} fidelity {:.6}", report.target, report.fidelity);
    if let Some(p) = &args.out_json {
        let out = PrepareOutput {
            target: report.target,
            fidelity: report.fidelity,
            steps: &report.steps,
            amplitudes: report
                .state
                .amplitudes()
                .iter()
                .map(|a| [a.re, a.im])
                .collect(),
        };
        with_file(p, |w| {
            serde_json::to_writer_pretty(&mut *w, &out)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    Ok(EXIT_OK)
}
