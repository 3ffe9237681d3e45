use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use preisach_core::bench::{run_bench, write_bench_csv, BenchConfig};
use preisach_core::efo::{compile_extagg, eval, parse_efo_typed, Band, Efo, EfoValue};
use preisach_core::error::{Error, Result};
use preisach_core::io::{format_f64, read_signal, write_corner_trace};
use preisach_core::memory::ReducedMemory;
use preisach_core::pal::{
    pal_eval_naive, pal_eval_staircase, read_measure_csv, write_measure_csv, HalfPlaneGrid,
    IncrementalPal, TriangularMeasure,
};
use preisach_core::pda::{
    autoregressive_run, check_against_reference, vpal_run, PdaSpec, SimConfig,
};
use preisach_core::rfim::{criticality_scan, preisach_equiv_check, rfim_sweep, RfimConfig};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)");

#[derive(Parser, Debug)]
#[command(name = "preisach", version = VERSION, about = "Hysteresis operators, extremum stacks and their simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stream a signal through the extremum stack and print the corners after every sample.
    StackTrace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a discretised Preisach layer on a signal.
    PalEval {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Mode::Fast)]
        mode: Mode,
        /// Cross-check every step against the naive evaluation.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a pushdown automaton through its signal-channel simulation.
    PdaRun {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        word: String,
        /// Compare every step with the list-stack interpreter.
        #[arg(long)]
        check_oracle: bool,
        /// Carry both stacks on one two-dimensional signal.
        #[arg(long)]
        vpal: bool,
        #[arg(long, default_value_t = 64)]
        d_max: usize,
        #[arg(long, default_value_t = 10_000)]
        step_limit: usize,
        /// Write the JSONL trace here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Parse and evaluate an extremal first-order formula, or compile an aggregate.
    Efo {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, required_unless_present = "compile")]
        input: Option<PathBuf>,
        /// Compile an `extagg` term to a bank of band heads on the grid.
        #[arg(long, requires = "output_dir")]
        compile: bool,
        #[command(flatten)]
        grid: OptGridArgs,
        /// Directory for `heads.csv` and one measure file per head.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Random-field Ising model experiments.
    Rfim {
        #[arg(value_enum)]
        mode: RfimMode,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time the incremental and naive evaluation paths.
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        n_max: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 100_000)]
        naive_max: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Grid side L.
    #[arg(long = "grid")]
    side: usize,
    /// Grid spacing.
    #[arg(long)]
    delta: f64,
    /// Nodes are `origin + i * delta` for `i = 1..=L`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    origin: f64,
}

#[derive(Args, Debug)]
struct OptGridArgs {
    #[arg(long = "grid", required_if_eq("compile", "true"))]
    side: Option<usize>,
    #[arg(long, required_if_eq("compile", "true"))]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    origin: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Sum over every cell at every step.
    Naive,
    /// Staircase sum over the stored corners.
    Fast,
    /// Update the cached value from the cells that can flip.
    Incremental,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RfimMode {
    /// Hysteresis loop over the configured field grid.
    Sweep,
    /// Max magnetisation jump against disorder strength.
    Scan,
    /// Spin system against the relay ensemble and its continuum limit.
    Equiv,
}

/// Configuration of `rfim scan`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanConfig {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "J")]
    j: f64,
    disorders: Vec<f64>,
    #[serde(default)]
    seed: u64,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn stack_trace(input: &Path, output: Option<&Path>) -> Result<()> {
    let u = read_signal(open(input)?)?;
    let mut rm = ReducedMemory::new();
    let snapshots: Vec<Vec<f64>> = u
        .iter()
        .map(|&x| {
            rm.update(x);
            rm.corners().to_vec()
        })
        .collect();
    write_corner_trace(sink(output)?, &snapshots)
}

fn pal_outputs(m: &TriangularMeasure<f64>, u: &[f64], mode: Mode) -> Vec<f64> {
    if mode == Mode::Incremental {
        let mut pal = IncrementalPal::new(m);
        return u.iter().map(|&x| *pal.push(x)).collect();
    }
    let mut rm = ReducedMemory::new();
    u.iter()
        .map(|&x| {
            rm.update(x);
            match mode {
                Mode::Naive => pal_eval_naive(m, &rm),
                _ => pal_eval_staircase(m, &rm),
            }
        })
        .collect()
}

fn pal_eval_cmd(
    measure: &Path,
    input: &Path,
    grid: &GridArgs,
    mode: Mode,
    check: bool,
    output: Option<&Path>,
) -> Result<()> {
    let grid = HalfPlaneGrid::new(grid.side, grid.delta, grid.origin)?;
    let m = read_measure_csv(open(measure)?, grid)?;
    let u = read_signal(open(input)?)?;
    let y = pal_outputs(&m, &u, mode);
    if check {
        let tol = 1e-9 * (1.0 + m.total_abs());
        let naive = pal_outputs(&m, &u, Mode::Naive);
        if let Some(step) = (0..y.len()).find(|&t| (y[t] - naive[t]).abs() > tol) {
            return Err(Error::Divergence {
                step,
                detail: format!("{:?} gives {}, naive gives {}", mode, y[step], naive[step]),
            });
        }
    }
    let mut w = sink(output)?;
    writeln!(w, "step,y")?;
    for (t, v) in y.iter().enumerate() {
        writeln!(w, "{t},{}", format_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn pda_run_cmd(
    spec: &Path,
    word: &str,
    check_oracle: bool,
    vpal: bool,
    d_max: usize,
    step_limit: usize,
    trace: Option<&Path>,
) -> Result<()> {
    let text = std::fs::read_to_string(spec)?;
    let pda = PdaSpec::from_json(&text)?.compile()?;
    let tokens = pda.tokenize(word)?;
    let cfg = SimConfig { d_max, step_limit };
    let run = autoregressive_run(&pda, &tokens, cfg)?;
    let run = if vpal {
        let v = vpal_run(&pda, &tokens, cfg)?;
        if !v.logically_equal(&run) {
            let step = run
                .records
                .iter()
                .zip(&v.records)
                .take_while(|(a, b)| a.logical() == b.logical())
                .count();
            return Err(Error::Divergence {
                step,
                detail: "two-dimensional run differs from the scalar run".into(),
            });
        }
        v
    } else {
        run
    };
    if check_oracle {
        check_against_reference(&pda, &tokens, &run, step_limit)?;
    }
    let mut out = sink(None)?;
    writeln!(out, "{}", if run.accepted { "accept" } else { "reject" })?;
    match trace {
        Some(p) => {
            out.flush()?;
            run.write_jsonl(sink(Some(p))?)
        }
        None => run.write_jsonl(out),
    }
}

fn efo_cmd(
    formula: &Path,
    input: Option<&Path>,
    compile: bool,
    grid: &OptGridArgs,
    output_dir: Option<&Path>,
) -> Result<()> {
    let src = std::fs::read_to_string(formula)?;
    let (e, _) = parse_efo_typed(&src)?;
    if compile {
        let (Some(side), Some(delta), Some(dir)) = (grid.side, grid.delta, output_dir) else {
            return Err(Error::InvalidConfig(
                "--compile needs --grid, --delta and --output-dir".into(),
            ));
        };
        return compile_cmd(&e, HalfPlaneGrid::new(side, delta, grid.origin)?, dir);
    }
    let input = input.ok_or_else(|| Error::InvalidConfig("--input is required".into()))?;
    let u = read_signal(open(input)?)?;
    let mut out = sink(None)?;
    match eval(&e, &u)? {
        EfoValue::Bool(b) => writeln!(out, "{b}")?,
        EfoValue::Real(r) => writeln!(out, "{}", format_f64(r))?,
    }
    out.flush()?;
    Ok(())
}

fn compile_cmd(e: &Efo, grid: HalfPlaneGrid<f64>, dir: &Path) -> Result<()> {
    let bank = compile_extagg(e, &grid)?;
    std::fs::create_dir_all(dir)?;
    let mut index = csv::Writer::from_writer(File::create(dir.join("heads.csv"))?);
    index.write_record([
        "head",
        "band",
        "node",
        "representative",
        "weight",
        "measure",
    ])?;
    for (k, h) in bank.heads.iter().enumerate() {
        let name = format!("head_{k}.csv");
        write_measure_csv(File::create(dir.join(&name))?, &h.measure)?;
        let band = if h.band == Band::Max { "max" } else { "min" };
        index.write_record([
            k.to_string(),
            band.to_string(),
            h.node.to_string(),
            format_f64(h.representative),
            format_f64(h.weight),
            name,
        ])?;
    }
    index.flush()?;
    Ok(())
}

fn rfim_cmd(mode: RfimMode, config: &Path, output: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(config)?;
    match mode {
        RfimMode::Sweep => rfim_sweep(&RfimConfig::from_json(&text)?)?.write_csv(sink(output)?),
        RfimMode::Equiv => {
            let r = preisach_equiv_check(&RfimConfig::from_json(&text)?)?;
            let mut w = sink(output)?;
            writeln!(w, "deviation,continuum_deviation")?;
            writeln!(
                w,
                "{},{}",
                format_f64(r.deviation),
                format_f64(r.continuum_deviation)
            )?;
            w.flush()?;
            Ok(())
        }
        RfimMode::Scan => {
            let cfg: ScanConfig = serde_json::from_str(&text)?;
            if cfg.n == 0
                || !(cfg.j >= 0.0 && cfg.j.is_finite())
                || cfg.disorders.iter().any(|d| !(*d >= 0.0 && d.is_finite()))
            {
                return Err(Error::InvalidConfig(
                    "scan needs N >= 1, finite J >= 0 and finite disorders >= 0".into(),
                ));
            }
            let scan = criticality_scan(cfg.j, &cfg.disorders, cfg.n, cfg.seed)?;
            let mut w = csv::Writer::from_writer(sink(output)?);
            for p in &scan {
                w.serialize(p)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn bench_sizes(n_max: usize) -> Vec<usize> {
    std::iter::successors(Some(1_000usize), |n| n.checked_mul(10))
        .take_while(|&n| n <= n_max)
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::StackTrace { input, output } => stack_trace(&input, output.as_deref()),
        Command::PalEval {
            measure,
            input,
            grid,
            mode,
            check,
            output,
        } => pal_eval_cmd(&measure, &input, &grid, mode, check, output.as_deref()),
        Command::PdaRun {
            spec,
            word,
            check_oracle,
            vpal,
            d_max,
            step_limit,
            trace,
        } => pda_run_cmd(
            &spec,
            &word,
            check_oracle,
            vpal,
            d_max,
            step_limit,
            trace.as_deref(),
        ),
        Command::Efo {
            formula,
            input,
            compile,
            grid,
            output_dir,
        } => efo_cmd(
            &formula,
            input.as_deref(),
            compile,
            &grid,
            output_dir.as_deref(),
        ),
        Command::Rfim {
            mode,
            config,
            output,
        } => rfim_cmd(mode, &config, output.as_deref()),
        Command::Bench {
            n_max,
            grid,
            naive_max,
            runs,
            seed,
            output,
        } => {
            let cfg = BenchConfig {
                sizes: bench_sizes(n_max),
                naive_max,
                grid_side: grid,
                runs,
                seed,
            };
            write_bench_csv(sink(output.as_deref())?, &run_bench(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
