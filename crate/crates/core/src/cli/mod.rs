//! `bellpaths` command line.
//!
//! Every subcommand writes its artifact into the output directory and prints
//! a one-line summary. Exit status is 0 on success, 1 when a model rejects
//! its input and 2 on a usage error.

mod angle;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use angle::{AngleArg, AngleList};

use crate::bell::{self, CorrelationSource, QuantumSource, SamplerMcSource, SourceValue, TabulatedSource, ToySource};
use crate::interferometer::{self, NumericInterferometer, RtGeometry};
use crate::paths::{self, MirrorSetup, Point, Segment};
use crate::sampler::{self, BeamsplitterRule, PairSetup};
use crate::spin::{self, InitialState, Orientation, SgState, Spin};
use crate::toy::{self, ToySettings, CANONICAL_SETTINGS};
use crate::nonmeasurable;

#[derive(Debug, Parser)]
#[command(name = "bellpaths", version, about = "Sum-over-paths amplitudes, local hidden-phase models and Bell statistics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo trial count.
    #[arg(long = "n", global = true, default_value_t = 1_000_000)]
    pub n_trials: u64,
    /// Directory receiving the output artifacts.
    #[arg(long, global = true, env = "BELLPATHS_OUTPUT_DIR", default_value = ".")]
    pub output_dir: PathBuf,
    /// Encoding of tabular artifacts.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Monte Carlo worker threads; results are bit-reproducible per worker count.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Read bare numeric angles as degrees (`pi` forms stay radians).
    #[arg(long, global = true)]
    pub deg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical twin clock-pointer experiment: exact 1 − d/π curve against Monte Carlo.
    Toy(PairArgs),
    /// Cornu spiral of the mirror path sum, with the least-phase dominance ratio.
    Spiral(SpiralArgs),
    /// Two-particle interferometer: closed-form cos² law against mirror path sums.
    Rt(RtArgs),
    /// Per-trial local beamsplitter sampler next to the classical and quantum curves.
    Sample(SampleArgs),
    /// CHSH and three-setting statistics for the quantum, toy and sampler sources.
    Bell(BellArgs),
    /// Stern–Gerlach cascade simulation checked against spinor algebra.
    Sg(SgArgs),
    /// Disjoint r/4-ball packing of the x_n paths inside the r-ball.
    MeasureDemo(MeasureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Left setting; omit both settings to run the nine pairs of {0, 2pi/3, 4pi/3}.
    #[arg(long, allow_hyphen_values = true, requires = "beta")]
    pub alpha: Option<AngleArg>,
    /// Right setting.
    #[arg(long, allow_hyphen_values = true, requires = "alpha")]
    pub beta: Option<AngleArg>,
}

impl PairArgs {
    fn pairs(&self, deg: bool) -> Vec<(f64, f64)> {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => vec![(a.radians(deg), b.radians(deg))],
            _ => CANONICAL_SETTINGS
                .iter()
                .flat_map(|&a| CANONICAL_SETTINGS.iter().map(move |&b| (a, b)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpiralArgs {
    /// Number of mirror cells (one path each).
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub wavelength: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.05)]
    pub source_x: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.1)]
    pub source_y: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.05)]
    pub detector_x: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.1)]
    pub detector_y: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.25)]
    pub mirror_x0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.25)]
    pub mirror_x1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub mirror_y: f64,
    /// Share of paths, centred on the least-phase path, in the dominance ratio.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub central_fraction: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RtArgs {
    #[command(flatten)]
    pub settings: PairArgs,
    /// Paths per class.
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    /// Distance from the source to each beamsplitter.
    #[arg(long, default_value_t = 0.5)]
    pub arm: f64,
    /// Height of the ceiling mirror (the floor mirror sits at minus this).
    #[arg(long, default_value_t = 0.2)]
    pub height: f64,
    #[arg(long, default_value_t = 0.05)]
    pub mirror_inner: f64,
    #[arg(long, default_value_t = 0.45)]
    pub mirror_outer: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub wavelength: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub settings: PairArgs,
    /// Left beamsplitter rotation.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub gamma_a: AngleArg,
    /// Right beamsplitter rotation.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub gamma_b: AngleArg,
    /// Common path phase added on both sides.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub base_phase: AngleArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    Quantum,
    Toy,
    Sampler,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct BellArgs {
    #[arg(long, value_enum, default_value_t = SourceKind::All)]
    pub source: SourceKind,
    /// CHSH settings a,a',b,b'.
    #[arg(long, allow_hyphen_values = true, default_value = "0,pi/2,pi/4,3pi/4")]
    pub settings: AngleList,
    /// Step of the (alpha, beta) sweep grid.
    #[arg(long, default_value = "pi/12")]
    pub grid_step: AngleArg,
}

#[derive(Debug, Clone, Args)]
pub struct SgArgs {
    /// Devices, e.g. "z,x,z" or "z,Mx,z" (M = modified, numbers = degrees from z towards x).
    #[arg(long)]
    pub sequence: String,
    /// "unpolarized" or a sign and axis such as "+z", "-x", "+45".
    #[arg(long, allow_hyphen_values = true, default_value = "unpolarized")]
    pub initial: String,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    #[arg(long, default_value_t = 1.0)]
    pub r_sharp: f64,
}

#[derive(Debug)]
pub enum CliError {
    Model(crate::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Model(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

struct Writer<'a> {
    opts: &'a GlobalOpts,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.opts.output_dir).map_err(|e| io_err(&self.opts.output_dir, e))?;
        Ok(self.opts.output_dir.join(name))
    }

    /// Rows as CSV or a JSON array, per `--format`.
    fn table<T: Serialize>(&self, stem: &str, rows: &[T]) -> CliResult<PathBuf> {
        match self.opts.format {
            Format::Csv => self.csv(&format!("{stem}.csv"), rows),
            Format::Json => self.json(&format!("{stem}.json"), &rows),
        }
    }

    fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<PathBuf> {
        let path = self.path(name)?;
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let path = self.path(name)?;
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }
}

#[derive(Serialize)]
struct ToyRow {
    alpha: f64,
    beta: f64,
    exact_p_same: f64,
    mc_estimate: f64,
    ci: f64,
    n: u64,
    seed: u64,
}

#[derive(Serialize)]
struct SpiralRow {
    index: usize,
    mirror_x: f64,
    phase: f64,
    cum_re: f64,
    cum_im: f64,
}

#[derive(Serialize)]
struct RtRow {
    alpha: f64,
    beta: f64,
    p_same_closed: f64,
    p_same_numeric: f64,
    congruence_residual: f64,
}

#[derive(Serialize)]
struct SampleRow {
    alpha: f64,
    beta: f64,
    p_same_sampler: f64,
    ci: f64,
    p_same_toy_exact: f64,
    p_same_qm: f64,
    n: u64,
    seed: u64,
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    source: &'a str,
    alpha: f64,
    beta: f64,
    p_same: f64,
    ci: f64,
    classical_ref: f64,
    quantum_ref: f64,
}

#[derive(Serialize)]
struct BellOutput {
    settings: bell::ChshSettings,
    n: u64,
    seed: u64,
    chsh: Vec<bell::ChshReport>,
    mermin3: Vec<bell::MerminReport>,
}

#[derive(Serialize)]
struct SgOutput<'a> {
    sequence: &'a str,
    initial: &'a str,
    n: u64,
    seed: u64,
    recorded: usize,
    all_within_3sigma: bool,
    cells: Vec<spin::CellComparison>,
}

fn run_toy(opts: &GlobalOpts, args: &PairArgs) -> CliResult<String> {
    let mut rows = Vec::new();
    for (alpha, beta) in args.pairs(opts.deg) {
        let s = ToySettings::new(alpha, beta)?;
        let mc = toy::toy_p_same_mc_with_workers(s, opts.n_trials, opts.seed, opts.workers)?;
        rows.push(ToyRow {
            alpha: s.alpha(),
            beta: s.beta(),
            exact_p_same: toy::toy_p_same_exact(s),
            mc_estimate: mc.estimate,
            ci: mc.ci,
            n: opts.n_trials,
            seed: opts.seed,
        });
    }
    let path = Writer { opts }.table("toy", &rows)?;
    let first = &rows[0];
    Ok(format!(
        "toy: {} pair(s), exact_p_same = {} mc_estimate = {} (first pair) -> {}",
        rows.len(),
        first.exact_p_same,
        first.mc_estimate,
        path.display()
    ))
}

fn run_spiral(opts: &GlobalOpts, args: &SpiralArgs) -> CliResult<String> {
    let setup = MirrorSetup {
        source: Point::new(args.source_x, args.source_y),
        detector: Point::new(args.detector_x, args.detector_y),
        mirror: Segment::new(Point::new(args.mirror_x0, args.mirror_y), Point::new(args.mirror_x1, args.mirror_y)),
        wavelength: args.wavelength,
    };
    let family = setup.family(args.paths)?;
    let trace = paths::sum_over_paths(&family)?;
    let rows: Vec<SpiralRow> = family
        .paths()
        .iter()
        .zip(trace.phases.iter().zip(&trace.partial_sums))
        .enumerate()
        .map(|(index, (p, (&phase, cum)))| SpiralRow {
            index,
            mirror_x: p.vertices()[1].x,
            phase,
            cum_re: cum.re,
            cum_im: cum.im,
        })
        .collect();
    let path = Writer { opts }.table("spiral", &rows)?;
    let fraction = match paths::stationary_fraction(&family, args.central_fraction) {
        Ok(v) => v.to_string(),
        Err(crate::Error::Undefined(_)) => "undefined".to_string(),
        Err(e) => return Err(e.into()),
    };
    Ok(format!(
        "spiral: {} paths, |resultant| = {}, arg = {}, stationary_fraction = {} -> {}",
        args.paths,
        trace.resultant.norm(),
        trace.resultant.arg(),
        fraction,
        path.display()
    ))
}

fn run_rt(opts: &GlobalOpts, args: &RtArgs) -> CliResult<String> {
    let geometry = RtGeometry::symmetric(args.arm, args.height, args.mirror_inner, args.mirror_outer, args.wavelength)?;
    let rt = NumericInterferometer::build(&geometry, args.paths)?;
    let residual = rt.congruence_residual();
    let rows = args
        .settings
        .pairs(opts.deg)
        .into_iter()
        .map(|(alpha, beta)| {
            Ok(RtRow {
                alpha,
                beta,
                p_same_closed: interferometer::p_same(alpha, beta),
                p_same_numeric: rt.p_same(alpha, beta)?,
                congruence_residual: residual,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let path = Writer { opts }.table("rt", &rows)?;
    Ok(format!(
        "rt: p_same_closed = {} p_same_numeric = {} congruence_residual = {:e} -> {}",
        rows[0].p_same_closed,
        rows[0].p_same_numeric,
        residual,
        path.display()
    ))
}

fn run_sample(opts: &GlobalOpts, args: &SampleArgs) -> CliResult<String> {
    let rules = (
        BeamsplitterRule::new(args.gamma_a.radians(opts.deg))?,
        BeamsplitterRule::new(args.gamma_b.radians(opts.deg))?,
    );
    let base = args.base_phase.radians(opts.deg);
    let mut rows = Vec::new();
    for (alpha, beta) in args.settings.pairs(opts.deg) {
        let setup = PairSetup::new(alpha, beta, rules, base)?;
        let e = sampler::sampler_p_same_with(&setup, opts.n_trials, opts.seed, opts.workers)?;
        rows.push(SampleRow {
            alpha,
            beta,
            p_same_sampler: e.estimate,
            ci: e.ci,
            p_same_toy_exact: toy::toy_p_same_exact(ToySettings::new(alpha, beta)?),
            p_same_qm: interferometer::p_same(alpha, beta),
            n: opts.n_trials,
            seed: opts.seed,
        });
    }
    let path = Writer { opts }.table("sample", &rows)?;
    Ok(format!(
        "sample: {} pair(s), p_same_sampler = {} (first pair) -> {}",
        rows.len(),
        rows[0].p_same_sampler,
        path.display()
    ))
}

fn run_bell(opts: &GlobalOpts, args: &BellArgs) -> CliResult<String> {
    let settings: Vec<f64> = args.settings.0.iter().map(|a| a.radians(opts.deg)).collect();
    let settings: bell::ChshSettings = settings
        .try_into()
        .map_err(|_| CliError::Model(crate::Error::Domain("--settings takes exactly four angles".into())))?;
    let step = args.grid_step.radians(opts.deg);
    let mut sampler = SamplerMcSource::new(opts.n_trials, opts.seed);
    sampler.workers = opts.workers;
    let kinds: Vec<SourceKind> = match args.source {
        SourceKind::All => vec![SourceKind::Quantum, SourceKind::Toy, SourceKind::Sampler],
        k => vec![k],
    };
    let mut out = BellOutput {
        settings,
        n: opts.n_trials,
        seed: opts.seed,
        chsh: Vec::new(),
        mermin3: Vec::new(),
    };
    let mut sweep = Vec::new();
    for kind in kinds {
        let src: &dyn CorrelationSource = match kind {
            SourceKind::Quantum => &QuantumSource,
            SourceKind::Toy => &ToySource,
            _ => &sampler,
        };
        out.chsh.push(bell::chsh(src, settings)?);
        out.mermin3.push(bell::mermin3(src, CANONICAL_SETTINGS)?);
        let rows = if kind == SourceKind::Sampler {
            // one shared γ stream for the whole grid, identical to per-pair runs
            let angles = bell::grid_angles(step)?;
            let grid = sampler::sampler_grid(&angles, &angles, sampler.rules, sampler.base_phase, opts.n_trials, opts.seed)?;
            let table = TabulatedSource {
                name: "sampler".into(),
                alphas: angles.clone(),
                betas: angles,
                table: grid
                    .into_iter()
                    .map(|row| row.into_iter().map(SourceValue::from).collect())
                    .collect(),
            };
            bell::settings_sweep(&table, step)?
        } else {
            bell::settings_sweep(src, step)?
        };
        let name = src.name().to_string();
        sweep.extend(rows.into_iter().map(|r| (name.clone(), r)));
    }
    let writer = Writer { opts };
    let json_path = writer.json("bell.json", &out)?;
    let sweep_rows: Vec<SweepCsvRow> = sweep
        .iter()
        .map(|(source, r)| SweepCsvRow {
            source,
            alpha: r.alpha,
            beta: r.beta,
            p_same: r.p_same,
            ci: r.ci,
            classical_ref: r.classical_ref,
            quantum_ref: r.quantum_ref,
        })
        .collect();
    writer.table("bell_sweep", &sweep_rows)?;
    let summary: Vec<String> = out.chsh.iter().map(|r| format!("{} S = {}", r.source, r.s)).collect();
    Ok(format!("bell: {} -> {}", summary.join(", "), json_path.display()))
}

fn parse_initial(text: &str) -> CliResult<InitialState> {
    if text.eq_ignore_ascii_case("unpolarized") {
        return Ok(InitialState::Unpolarized);
    }
    let bad = || CliError::Model(crate::Error::Domain(format!("invalid initial state '{text}'")));
    let (sign, axis) = match text.chars().next() {
        Some('+') => (Spin::Plus, &text[1..]),
        Some('-') => (Spin::Minus, &text[1..]),
        _ => return Err(bad()),
    };
    let devices = spin::parse_sequence(axis).map_err(|_| bad())?;
    let orientation: Orientation = match devices.as_slice() {
        [d] if d.kind == spin::DeviceKind::Standard => d.orientation,
        _ => return Err(bad()),
    };
    Ok(InitialState::Polarized(SgState {
        last_orientation: orientation,
        class_sign: sign,
    }))
}

fn run_sg(opts: &GlobalOpts, args: &SgArgs) -> CliResult<String> {
    let devices = spin::parse_sequence(&args.sequence)?;
    let initial = parse_initial(&args.initial)?;
    let table = spin::run_sequence(&devices, initial, opts.n_trials, opts.seed)?;
    let oracle = spin::spinor_oracle(&devices, initial)?;
    let cells = spin::compare(&table, &oracle)?;
    let all = cells.iter().all(|c| c.within_3sigma);
    let out = SgOutput {
        sequence: &args.sequence,
        initial: &args.initial,
        n: opts.n_trials,
        seed: opts.seed,
        recorded: table.recorded,
        all_within_3sigma: all,
        cells,
    };
    let path = Writer { opts }.json("sg.json", &out)?;
    Ok(format!(
        "sg: {} with {} recorded outcome(s), all cells within 3 sigma = {} -> {}",
        args.sequence,
        table.recorded,
        all,
        path.display()
    ))
}

fn run_measure(opts: &GlobalOpts, args: &MeasureArgs) -> CliResult<String> {
    let report = nonmeasurable::verify_packing(args.n_max, args.r_sharp)?;
    let path = Writer { opts }.json("measure_demo.json", &report)?;
    report.ensure_pass()?;
    Ok(format!(
        "measure-demo: {} pairs, all_pass = {}, max |residual| = {:e} -> {}",
        report.pairs.len(),
        report.all_pass,
        report.max_abs_residual,
        path.display()
    ))
}

/// Runs a parsed command and returns its summary line.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let opts = &cli.global;
    match &cli.command {
        Command::Toy(a) => run_toy(opts, a),
        Command::Spiral(a) => run_spiral(opts, a),
        Command::Rt(a) => run_rt(opts, a),
        Command::Sample(a) => run_sample(opts, a),
        Command::Bell(a) => run_bell(opts, a),
        Command::Sg(a) => run_sg(opts, a),
        Command::MeasureDemo(a) => run_measure(opts, a),
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("bellpaths: {e}");
            1
        }
    }
}
