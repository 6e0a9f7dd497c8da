//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SpinSystemConfig;
use crate::dj::{closed_form_expectation, run_dj, DjDecision};
use crate::error::{Error, Result};
use crate::heff::{cancel_top_weight, decompose_diagonal, effective_hamiltonian, DiagonalHamiltonian};
use crate::oracle::{classify, BooleanOracle, FunctionClass, PhaseOracle};
use crate::pulse::{verify, Compiler, FidelityReport, GridRounding};
use crate::spectrum::{apply_unitary, cnot, integrated_signal, multiplet_of, plot_table, render_spectrum, Multiplet};
use crate::spin_algebra::{format_real, parse_operator_sum, y90, OperatorSum, SpinSystem};
use crate::thermal::{prepare_rho0, prepare_rho1, ThermalParams};

/// Total sequence length reported for the glycine implementation of `f_b`.
pub const REFERENCE_DURATION_S: f64 = 0.084;
pub const MAX_SWEEP_BITS: usize = 4;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "thermal-dj", version, about = "Thermal-state Deutsch-Jozsa simulator and pulse compiler")]
pub struct Cli {
    /// Spin-system TOML file; the bundled glycine system when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Emit JSON instead of aligned text.
    #[arg(long, global = true)]
    pub machine_output: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the algorithm and report <I1x>, the decision and rho_2.
    Dj(DjArgs),
    /// Compile cU_f to a pulse program and verify it.
    Compile(CompileArgs),
    /// Predict the detect-spin multiplet.
    Spectrum(SpectrumArgs),
    /// Run every truth table for n input bits.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Boolean expression over x2..x{n+1}, e.g. "x2*x3 ^ x4".
    #[arg(long, conflicts_with = "table")]
    pub function: Option<String>,
    /// Truth table as a bit string, x2 most significant.
    #[arg(long)]
    pub table: Option<String>,
}

impl FunctionArgs {
    fn given(&self) -> bool {
        self.function.is_some() || self.table.is_some()
    }

    fn oracle(&self, n: usize) -> Result<BooleanOracle> {
        let f = match (&self.function, &self.table) {
            (Some(e), _) => BooleanOracle::parse(e, n)?,
            (None, Some(t)) => BooleanOracle::from_bits(t)?,
            (None, None) => return Err(Error::InvalidArgument("one of --function or --table is required".into())),
        };
        if f.n() != n {
            return Err(Error::SpinCount { expected: n + 1, got: f.n() + 1 });
        }
        Ok(f)
    }

    fn source(&self) -> String {
        self.function.clone().or_else(|| self.table.clone()).unwrap_or_default()
    }
}

#[derive(Debug, Args)]
pub struct DjArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Principal logarithm.
    Principal,
    /// Principal, then shifted to cancel the full-weight term when possible.
    Auto,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub f: FunctionArgs,
    /// Evolution time tau in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Round delays to the config's grid.
    #[arg(long)]
    pub grid: bool,
    /// Grid spacing override in microseconds (implies --grid).
    #[arg(long)]
    pub delta_us: Option<f64>,
    #[arg(long, value_enum, default_value_t = Branch::Auto)]
    pub branch: Branch,
    /// Explicit 2*pi branch shifts per basis state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Option<Vec<i64>>,
    /// Write the streamlined program here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Oracle to apply (to rho_1, or to --operator when given).
    #[command(flatten)]
    pub f: FunctionArgs,
    /// Product-operator state literal, e.g. "2*I1x*I4z".
    #[arg(long)]
    pub operator: Option<String>,
    /// Controlled-NOT as CONTROL,TARGET; repeatable, applied in order.
    #[arg(long, value_name = "CONTROL,TARGET")]
    pub cnot: Vec<String>,
    /// 90-degree y readout pulse on this spin, applied last; repeatable.
    #[arg(long)]
    pub readout: Vec<String>,
    #[arg(long, default_value = "1")]
    pub detect: String,
    #[arg(long, default_value_t = 2.0)]
    pub linewidth: f64,
    #[arg(long, default_value_t = 2048)]
    pub points: usize,
    /// Write the rendered two-column spectrum here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of input bits (at most 4).
    pub n: usize,
}

#[derive(Serialize)]
struct TermOut {
    operator: String,
    coefficient: f64,
}

fn terms_out(s: &OperatorSum) -> Vec<TermOut> {
    s.terms().iter().map(|t| TermOut { operator: t.operator_string(), coefficient: t.coefficient.re }).collect()
}

fn json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<SpinSystemConfig> {
    match &cli.config {
        Some(p) => SpinSystemConfig::load(p),
        None => Ok(SpinSystemConfig::glycine()),
    }
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Dj(a) => cmd_dj(cli, a, out),
        Command::Compile(a) => cmd_compile(cli, a, out),
        Command::Spectrum(a) => cmd_spectrum(cli, a, out),
        Command::Sweep(a) => cmd_sweep(cli, a, out),
    }
}

#[derive(Serialize)]
struct DjReport {
    function: String,
    table: String,
    class: String,
    alpha1: f64,
    expectation: f64,
    decision: String,
    rho2_terms: Vec<TermOut>,
}

pub fn cmd_dj(cli: &Cli, a: &DjArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    let n = cfg.system.spins() - 1;
    let f = a.f.oracle(n)?;
    let o = run_dj(&cfg.system, &f, &cfg.thermal)?;
    let report = DjReport {
        function: a.f.source(),
        table: f.to_bits(),
        class: classify(&f).to_string(),
        alpha1: cfg.thermal.alpha1(),
        expectation: o.expectation,
        decision: o.decision.to_string(),
        rho2_terms: terms_out(&o.rho2_terms),
    };
    if cli.machine_output {
        json(out, &report)?;
    } else {
        writeln!(out, "{:<12} {}", "function", report.function)?;
        writeln!(out, "{:<12} {}", "table", report.table)?;
        writeln!(out, "{:<12} {}", "class", report.class)?;
        writeln!(out, "{:<12} {}", "<I1x>", format_real(o.expectation))?;
        writeln!(out, "{:<12} {}", "decision", report.decision)?;
        writeln!(out, "{:<12} (1/{})(1 + {})", "rho_2", 1u64 << cfg.system.spins(), o.rho2_terms)?;
    }
    Ok(if o.decision == DjDecision::Indeterminate { EXIT_INDETERMINATE } else { EXIT_OK })
}

#[derive(Serialize)]
struct CompileReport {
    function: String,
    table: String,
    branch: Branch,
    shifts: Vec<i64>,
    tau_s: f64,
    hamiltonian: Vec<TermOut>,
    raw_events: usize,
    events: usize,
    total_duration_s: f64,
    reference_duration_s: f64,
    grid_s: Option<f64>,
    verifier: FidelityReport,
    grid_rounding: Vec<GridRounding>,
}

/// Effective Hamiltonian terms for `f` under the requested branch.
pub fn oracle_hamiltonian(
    f: &BooleanOracle,
    tau: f64,
    branch: Branch,
    shift: Option<&[i64]>,
) -> Result<(OperatorSum, Vec<i64>)> {
    let cu = f.controlled_unitary()?;
    let h = effective_hamiltonian(&cu, tau)?;
    let (h, shifts): (DiagonalHamiltonian, Vec<i64>) = match (shift, branch) {
        (Some(s), _) => (h.with_shifts(s)?, s.to_vec()),
        (None, Branch::Auto) => cancel_top_weight(&h)?,
        (None, Branch::Principal) => {
            let n = h.phases.len();
            (h, vec![0; n])
        }
    };
    Ok((decompose_diagonal(&h, f.n() + 1)?, shifts))
}

pub fn cmd_compile(cli: &Cli, a: &CompileArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    let sys = &cfg.system;
    let f = a.f.oracle(sys.spins() - 1)?;
    let grid = match (a.delta_us, a.grid) {
        (Some(d), _) if d.is_finite() && d > 0.0 => Some(d * 1e-6),
        (Some(d), _) => return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {d}"))),
        (None, true) => Some(cfg.grid_delta.ok_or_else(|| Error::Config("--grid needs [grid] delta_us".into()))?),
        (None, false) => None,
    };
    let (h, shifts) = oracle_hamiltonian(&f, a.tau, a.branch, a.shift.as_deref())?;
    let compiler = Compiler::new(sys).with_timing(cfg.timing).with_grid(grid);
    let compiled = compiler.compile_hamiltonian(&h, a.tau)?;
    let report = verify(&compiled.streamlined, &f.controlled_unitary()?)?;
    let program = compiled.streamlined.to_text(Some(sys));
    if let Some(path) = &a.out {
        std::fs::write(path, &program)?;
    }
    let summary = CompileReport {
        function: a.f.source(),
        table: f.to_bits(),
        branch: a.branch,
        shifts,
        tau_s: a.tau,
        hamiltonian: terms_out(&h),
        raw_events: compiled.raw.event_count(),
        events: compiled.streamlined.event_count(),
        total_duration_s: compiled.streamlined.total_duration(),
        reference_duration_s: REFERENCE_DURATION_S,
        grid_s: grid,
        verifier: report,
        grid_rounding: compiled.rounding.clone(),
    };
    if cli.machine_output {
        json(out, &summary)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {}", "function", summary.function);
        let _ = writeln!(s, "{:<12} {}", "table", summary.table);
        let _ = writeln!(s, "{:<12} (pi/4) {{{}}}", "H_eff tau", h.scale(a.tau * 4.0 / std::f64::consts::PI));
        let _ = writeln!(s, "{:<12} {} raw, {} streamlined", "events", summary.raw_events, summary.events);
        let _ = writeln!(
            s,
            "{:<12} {:.3} ms (reference {:.0} ms)",
            "duration",
            summary.total_duration_s * 1e3,
            REFERENCE_DURATION_S * 1e3
        );
        let verdict = if report.pass { "pass" } else { "FAIL" };
        let _ = writeln!(s, "{:<12} distance {:.3e} ({verdict})", "verifier", report.distance);
        if let Some(d) = grid {
            let _ = writeln!(s, "{:<12} delta {:.2} us, {} delays rounded", "grid", d * 1e6, compiled.rounding.len());
            for r in &compiled.rounding {
                let _ = writeln!(
                    s,
                    "  {}-{}  {:>10.3} us -> {:>10.3} us  error {:.3e}",
                    r.k,
                    r.l,
                    r.requested * 1e6,
                    r.rounded * 1e6,
                    r.unitary_error
                );
            }
        }
        write!(out, "{s}")?;
        if a.out.is_none() {
            write!(out, "\n{program}")?;
        }
    }
    Ok(if report.pass || grid.is_some() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn parse_pair(sys: &SpinSystem, s: &str) -> Result<(usize, usize)> {
    let mut parts = s.split(',');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(t), None) => Ok((sys.spin_index(c.trim())?, sys.spin_index(t.trim())?)),
        _ => Err(Error::InvalidArgument(format!("expected CONTROL,TARGET, got `{s}`"))),
    }
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    state: String,
    ratio: String,
    integrated_signal: f64,
    multiplet: &'a Multiplet,
}

/// State after the requested preparation steps: the literal (or `rho_1`),
/// then the oracle, the CNOTs and the readout pulses.
pub fn spectrum_state(cfg: &SpinSystemConfig, a: &SpectrumArgs) -> Result<OperatorSum> {
    let sys = &cfg.system;
    let m = sys.spins();
    let mut rho = match &a.operator {
        Some(src) => parse_operator_sum(src, m)?,
        None if a.f.given() => prepare_rho1(&prepare_rho0(sys, &cfg.thermal)?)?.traceless_part(),
        None => return Err(Error::InvalidArgument("give --operator and/or --function/--table".into())),
    };
    if a.f.given() {
        let f = a.f.oracle(m - 1)?;
        rho = apply_unitary(&f.controlled_unitary()?, &rho)?;
    }
    for pair in &a.cnot {
        let (c, t) = parse_pair(sys, pair)?;
        rho = apply_unitary(&cnot(c, t, m)?, &rho)?;
    }
    for r in &a.readout {
        rho = apply_unitary(&y90(m, sys.spin_index(r)?)?, &rho)?;
    }
    Ok(rho)
}

pub fn cmd_spectrum(cli: &Cli, a: &SpectrumArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    let sys = &cfg.system;
    let detect = sys.spin_index(&a.detect)?;
    let rho = spectrum_state(&cfg, a)?;
    let multiplet = multiplet_of(&rho, detect, sys)?;
    let samples = render_spectrum(&multiplet, a.linewidth, a.points)?;
    if let Some(path) = &a.plot {
        std::fs::write(path, plot_table(&samples))?;
    }
    let report = SpectrumReport {
        state: rho.to_string(),
        ratio: multiplet.ratio_string(),
        integrated_signal: integrated_signal(&rho, detect)?,
        multiplet: &multiplet,
    };
    if cli.machine_output {
        json(out, &report)?;
    } else {
        writeln!(out, "{:<12} {}", "state", report.state)?;
        writeln!(out, "{:<12} {} (partners {:?})", "detect", multiplet.detect_label, multiplet.partners)?;
        writeln!(out, "{:<12} {}", "ratio", report.ratio)?;
        writeln!(out, "{:<12} {}", "integral", format_real(report.integrated_signal))?;
        writeln!(out, "{:>12}  {:>12}  {:>12}  state", "offset_hz", "intensity", "dispersive")?;
        for l in &multiplet.lines {
            let bits: String = l.partner_state.iter().map(|&b| if b == 0 { 'a' } else { 'b' }).collect();
            writeln!(
                out,
                "{:>12.3}  {:>12}  {:>12}  {bits}",
                l.offset_hz,
                format_real(l.intensity),
                format_real(l.dispersive)
            )?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Default, Clone, Serialize, PartialEq)]
pub struct SweepSummary {
    pub n: usize,
    pub tables: usize,
    pub constant: usize,
    pub balanced: usize,
    pub neither: usize,
    /// Promise-satisfying tables whose decision disagrees with the class.
    pub misdecided: usize,
    pub max_closed_form_deviation: f64,
}

/// Runs every `n`-bit truth table through the dense algorithm.
pub fn sweep(n: usize, params: &ThermalParams) -> Result<SweepSummary> {
    if n > MAX_SWEEP_BITS || n == 0 {
        return Err(Error::SweepTooLarge { max: MAX_SWEEP_BITS, got: n });
    }
    let len = 1usize << n;
    let sys = SpinSystem::uncoupled(n + 1);
    let alpha1 = params.alpha1();
    let results: Vec<(FunctionClass, bool, f64)> = (0..1u64 << len)
        .into_par_iter()
        .map(|code| {
            let table = (0..len).map(|j| (code >> (len - 1 - j)) & 1 == 1).collect();
            let f = BooleanOracle::from_table(n, table)?;
            let o = run_dj(&sys, &f, params)?;
            let class = classify(&f);
            let ok = match class {
                FunctionClass::Constant0 => o.decision == DjDecision::Constant0,
                FunctionClass::Constant1 => o.decision == DjDecision::Constant1,
                FunctionClass::Balanced => o.decision == DjDecision::Balanced,
                FunctionClass::Neither => true,
            };
            Ok((class, ok, (o.expectation - closed_form_expectation(&f, alpha1)).abs()))
        })
        .collect::<Result<_>>()?;
    let mut s = SweepSummary { n, tables: results.len(), ..Default::default() };
    for (class, ok, dev) in results {
        match class {
            FunctionClass::Constant0 | FunctionClass::Constant1 => s.constant += 1,
            FunctionClass::Balanced => s.balanced += 1,
            FunctionClass::Neither => s.neither += 1,
        }
        s.misdecided += usize::from(!ok);
        s.max_closed_form_deviation = s.max_closed_form_deviation.max(dev);
    }
    Ok(s)
}

pub fn cmd_sweep(cli: &Cli, a: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    if a.n > MAX_SWEEP_BITS || a.n == 0 {
        return Err(Error::SweepTooLarge { max: MAX_SWEEP_BITS, got: a.n });
    }
    let params = match &cli.config {
        Some(_) => {
            let cfg = load_config(cli)?;
            if cfg.system.spins() == a.n + 1 {
                cfg.thermal
            } else {
                ThermalParams::new(vec![cfg.thermal.alpha1(); a.n + 1])?
            }
        }
        None => ThermalParams::unit(a.n + 1),
    };
    let s = sweep(a.n, &params)?;
    if cli.machine_output {
        json(out, &s)?;
    } else {
        writeln!(out, "{:<28} {}", "n", s.n)?;
        writeln!(out, "{:<28} {}", "tables", s.tables)?;
        writeln!(out, "{:<28} {}", "constant", s.constant)?;
        writeln!(out, "{:<28} {}", "balanced", s.balanced)?;
        writeln!(out, "{:<28} {}", "neither", s.neither)?;
        writeln!(out, "{:<28} {}", "misdecided", s.misdecided)?;
        writeln!(out, "{:<28} {:.3e}", "max |closed form - dense|", s.max_closed_form_deviation)?;
    }
    Ok(if s.misdecided == 0 { EXIT_OK } else { EXIT_ERROR })
}

/// Parses `args` and runs, mapping errors to exit code 1 on `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
