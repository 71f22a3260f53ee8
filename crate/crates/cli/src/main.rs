use clap::{Args, Parser, Subcommand, ValueEnum};
use gapscope::fixtures;
use gapscope::hamiltonian::{ProblemSpec, UnfoldingSpec};
use gapscope::io::{self, Format, GridConfig, ProblemFile, ProblemSource, Report, RunConfig};
use gapscope::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gapscope", version, about = "Spectral gap and critical-value-curve analysis of H0 cos θ + H1 sin θ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a problem file (endpoint matrices plus recipe)
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Output path
        #[arg(short, long, global = true, default_value = "problem.json")]
        out: PathBuf,
    },
    /// Sweep, build fronts, classify the gap and compute invariants
    Analyze(AnalyzeArgs),
    /// Compare the curve invariants of two reports (Legendrian isotopy by tb)
    Compare { a: PathBuf, b: PathBuf },
    /// Write the report and figure of a built-in reference front
    Export {
        #[arg(value_enum)]
        fixture: Fixture,
        /// Output directory
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// Samples along the front
        #[arg(long, default_value_t = fixtures::DEFAULT_SAMPLES)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Transverse field and Hamming weight plus a rectangular barrier
    HammingBarrier {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        u: usize,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Grover search: uniform superposition against one marked basis state
    Grover {
        #[arg(long)]
        dim: usize,
        /// Marked state; defaults to seed mod dim
        #[arg(long)]
        marked: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// 3×3 Schur-form unfolding family
    Unfolding {
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Commuting diagonal pair
    Diagonal {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Vec<f64>,
    },
    /// Random Hermitian pair
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Problem file written by `gen`
    problem: Option<PathBuf>,
    /// Run configuration (JSON); replaces the other options
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep only the forward path θ ∈ [0, π/2] instead of the full circle
    #[arg(long)]
    forward: bool,
    #[arg(long, default_value_t = 0.001)]
    step: f64,
    #[arg(long, default_value_t = 4)]
    bands: usize,
    /// Half-width of the classification window around θ*
    #[arg(long, default_value_t = gapscope::topology::DEFAULT_WINDOW)]
    window: f64,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [OutFormat::Csv, OutFormat::Json, OutFormat::Svg])]
    format: Vec<OutFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Svg,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
            OutFormat::Svg => Format::Svg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Circle,
    Ellipse,
    FigureEight,
    SyntheticBand,
    Quadrangle,
    Triangle,
    IdealQuadrangle,
}

fn spec_of(f: Family) -> ProblemSpec {
    match f {
        Family::HammingBarrier { n, l, u, h, eps, seed } => ProblemSpec::HammingBarrier { n, l, u, h, eps, seed },
        Family::Grover { dim, marked, seed } => {
            ProblemSpec::Grover { dim, marked: marked.unwrap_or((seed % dim.max(1) as u64) as usize) }
        }
        Family::Unfolding { eps } => ProblemSpec::Unfolding(UnfoldingSpec::with_eps(eps)),
        Family::Diagonal { a, b } => ProblemSpec::Diagonal { a, b },
        Family::Random { dim, seed } => ProblemSpec::Random { dim, seed },
    }
}

fn run_gen(family: Family, out: &Path) -> gapscope::Result<()> {
    let pair = spec_of(family).build()?;
    ProblemFile::from_pair(&pair).save(out)?;
    println!("wrote {} ({}, N = {})", out.display(), pair.family(), pair.dim());
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> gapscope::Result<()> {
    let (cfg, base) = match &args.config {
        Some(path) => (RunConfig::load(path)?, path.parent().map(Path::to_path_buf)),
        None => {
            let problem = args
                .problem
                .clone()
                .ok_or_else(|| Error::InvalidArgument("give a problem file or --config".into()))?;
            let grid = if args.forward { GridConfig::forward_path(args.step) } else { GridConfig::full_circle(args.step) };
            let mut cfg = RunConfig::new(ProblemSource::File(problem), grid);
            cfg.bands = args.bands;
            cfg.window = args.window;
            cfg.output_dir = args.out.clone();
            cfg.formats = args.format.iter().map(|&f| f.into()).collect();
            (cfg, None)
        }
    };
    let pair = cfg.pair(base.as_deref())?;
    let analysis = io::analyze(&pair, &cfg)?;
    let written = io::write_outputs(&analysis, &cfg.output_dir, &cfg.formats)?;
    let r = &analysis.report;
    if let (Some(t), Some(g), Some(m)) = (r.theta_star, r.min_gap, &r.morphology) {
        println!("min gap {g:.6e} at θ* = {t:.6} ({m})");
    }
    if let Some(t) = &r.tunneling {
        println!("tunneling: {} (ground max {:.6}, barrier top {})", t.flag, t.ground_max, t.barrier_top);
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    if r.partial {
        return Err(Error::NoConvergence);
    }
    Ok(())
}

fn run_compare(a: &Path, b: &Path) -> gapscope::Result<()> {
    let ra = Report::load(a)?;
    let rb = Report::load(b)?;
    let same = ra.isotopic(&rb)?;
    for (k, inv) in &ra.invariants {
        let other = rb.invariants.get(k).map(|x| x.tb.to_string()).unwrap_or_else(|| "-".into());
        println!("band {k}: tb {} vs {}", inv.tb, other);
    }
    println!("{}", if same { "isotopic" } else { "not isotopic" });
    Ok(())
}

fn run_export(fixture: Fixture, out: &Path, m: usize) -> gapscope::Result<()> {
    if m < 16 {
        return Err(Error::InvalidArgument("at least 16 samples are needed".into()));
    }
    let (name, front) = match fixture {
        Fixture::Circle => ("circle", fixtures::circle(1.0, [0.0, 0.0], m)),
        Fixture::Ellipse => ("ellipse", fixtures::ellipse(2.0, 1.0, m)),
        Fixture::FigureEight => ("figure-eight", fixtures::figure_eight(m)),
        Fixture::SyntheticBand => ("synthetic-band", fixtures::synthetic_band(m)),
        Fixture::Quadrangle => ("quadrangle", fixtures::swallow_tailed_quadrangle(m)),
        Fixture::Triangle => ("triangle", fixtures::swallow_tailed_triangle(m)),
        Fixture::IdealQuadrangle => ("ideal-quadrangle", fixtures::ideal_hyperbolic_quadrangle(m)),
    };
    std::fs::create_dir_all(out)?;
    let report = Report::for_fronts(name, std::slice::from_ref(&front))?;
    let rp = out.join("report.json");
    std::fs::write(&rp, io::report_json(&report)?)?;
    let sp = out.join("figure.svg");
    std::fs::write(&sp, io::render_fronts_svg(std::slice::from_ref(&front)))?;
    println!("wrote {}\nwrote {}", rp.display(), sp.display());
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("GAPSCOPE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| format!("GAPSCOPE_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            return Err("GAPSCOPE_THREADS must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Gen { family, out } => run_gen(family, &out),
        Command::Analyze(args) => run_analyze(args),
        Command::Compare { a, b } => run_compare(&a, &b),
        Command::Export { fixture, out, samples } => run_export(fixture, &out, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
