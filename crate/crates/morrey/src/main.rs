//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use morrey::atomic::{
    cz_decompose, decomposition_from_json, decomposition_to_json, synthesize_decomposition,
    LevelSetOperator,
};
use morrey::calderon::{
    lp_partition_minimum, verify_adams, verify_convolution_bound, verify_lp_equivalence,
    verify_olsen, ConvolutionKernel,
};
use morrey::error::Error;
use morrey::experiment::{
    load_input, run_check_phi, run_hardy, run_maxop, run_norm, run_suite, ExperimentConfig,
    ReportLine,
};
use morrey::generate::GridSpec;
use morrey::grid::{Boundary, CubeMode, GridFunction};
use morrey::maxops::MaximalMode;
use morrey::shapes::{RadiusGrid, ShapeFunction};

#[derive(Parser)]
#[command(name = "morrey", about = "Generalized Morrey / Hardy-Morrey space toolkit")]
struct Cli {
    /// Optional config file ([section] key=value); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized batteries and generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GridArgs {
    /// Dimension (1 or 2).
    #[arg(long)]
    n: Option<usize>,
    /// Extent level: the box is [0, 2^L)^n.
    #[arg(long)]
    l: Option<u32>,
    /// Resolution level: finest cells have side 2^-K.
    #[arg(long)]
    k: Option<u32>,
    /// Boundary mode: zero or periodic.
    #[arg(long)]
    boundary: Option<String>,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Grid-function file (header + one value per line, or CSV values).
    #[arg(long)]
    input: Option<String>,
    /// Generator spec, e.g. random-step:amplitude=1 (needs grid geometry).
    #[arg(long)]
    gen: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Check shape admissibility conditions.
    CheckPhi {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        eta: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Which condition: gp, zygmund, integral, pth, vz, vzm, vzint, mizn.
        #[arg(long, default_value = "gp")]
        check: String,
        /// Inner exponent for the vzm variant.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Evaluate a norm of a grid function.
    Norm {
        /// morrey, weak, llogl or hardy-morrey.
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        phi: String,
        /// dyadic or windows.
        #[arg(long, default_value = "dyadic")]
        mode: String,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Apply a maximal operator; writes the output grid function.
    Maxop {
        /// hl, grand or peetre.
        #[arg(long)]
        op: String,
        /// windows or dyadic (for hl).
        #[arg(long, default_value = "windows")]
        mode: String,
        /// Declared spectral radius (peetre).
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        /// Peetre exponent r.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Weighted Hardy inequality: best constant, verification, sharpness.
    Hardy {
        #[arg(long)]
        v1: String,
        #[arg(long)]
        v2: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Decompose a function into atoms; writes the decomposition file.
    Decompose {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Moment order d.
        #[arg(long, default_value_t = 0)]
        d: usize,
        /// Level-set operator: grand or heat.
        #[arg(long, default_value = "grand")]
        operator: String,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Rebuild a function from a decomposition file.
    Synthesize {
        /// Decomposition JSON file.
        #[arg(long)]
        input: String,
        /// Add the residual back in (default true).
        #[arg(long, default_value_t = true)]
        with_residual: bool,
    },
    /// Fractional-integral smoothing ratio.
    Adams {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Bilinear fractional-integral ratio.
    Olsen {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        alpha: f64,
        /// Multiplier grid function file.
        #[arg(long)]
        g: String,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Convolution-operator boundedness ratio.
    Czop {
        /// Kernel grid-function file; omit for the identity kernel.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Littlewood-Paley square function diagnostics.
    Lp {
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        phi: String,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Run the deterministic built-in battery.
    Suite {
        /// Include elapsed_ms fields (breaks byte-level determinism).
        #[arg(long, default_value_t = false)]
        timings: bool,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn resolve<'a>(flag: Option<&'a str>, cfg: &'a Option<ExperimentConfig>, section: &str, key: &str) -> Option<&'a str> {
    flag.or_else(|| cfg.as_ref().and_then(|c| c.get(section, key)))
}

fn grid_spec(args: &GridArgs, cfg: &Option<ExperimentConfig>) -> Result<Option<GridSpec>, Error> {
    if let Some(c) = cfg {
        c.validate_keys("grid", &["n", "l", "k", "boundary"])?;
    }
    let parse_num = |s: &str, what: &str| {
        s.parse::<u64>()
            .map_err(|e| Error::Config(format!("bad {what}: {e}")))
    };
    let n = match resolve(args.n.map(|_| "").and(None), cfg, "grid", "n") {
        Some(s) => Some(parse_num(s, "n")? as usize),
        None => args.n,
    };
    let l = match resolve(None, cfg, "grid", "l") {
        Some(s) if args.l.is_none() => Some(parse_num(s, "l")? as u32),
        _ => args.l,
    };
    let k = match resolve(None, cfg, "grid", "k") {
        Some(s) if args.k.is_none() => Some(parse_num(s, "k")? as u32),
        _ => args.k,
    };
    let boundary = match (
        args.boundary.as_deref(),
        cfg.as_ref().and_then(|c| c.get("grid", "boundary")),
    ) {
        (Some(b), _) | (None, Some(b)) => Boundary::parse(b)?,
        (None, None) => Boundary::Zero,
    };
    Ok(match (n, l, k) {
        (Some(n), Some(l), Some(k)) => Some(GridSpec::new(n, l, k, boundary)),
        _ => None,
    })
}

fn load(input: &InputArgs, cfg: &Option<ExperimentConfig>, seed: u64) -> Result<GridFunction, Error> {
    if let Some(c) = cfg {
        c.validate_keys("input", &["file", "gen"])?;
    }
    let file = resolve(input.input.as_deref(), cfg, "input", "file");
    let gen = resolve(input.gen.as_deref(), cfg, "input", "gen");
    let spec = grid_spec(&input.grid, cfg)?;
    load_input(file, gen, spec, seed)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let cfg = match &cli.config {
        Some(path) => Some(ExperimentConfig::parse(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let seed = cli.seed.unwrap_or(42);
    let radius_grid = RadiusGrid::standard();
    let mut all_pass = true;
    match cli.command {
        Command::CheckPhi {
            phi,
            eta,
            p,
            n,
            check,
            r,
        } => {
            let phi = ShapeFunction::parse(&phi)?;
            let eta = eta.map(|e| ShapeFunction::parse(&e)).transpose()?;
            let out = run_check_phi(&check, &phi, eta.as_ref(), p, n, r, &radius_grid)?;
            emit(&cli.out, &serde_json::to_string(&out).unwrap())?;
        }
        Command::Norm {
            space,
            p,
            phi,
            mode,
            input,
        } => {
            let f = load(&input, &cfg, seed)?;
            let phi = ShapeFunction::parse(&phi)?;
            let mode = CubeMode::parse(&mode)?;
            let out = run_norm(&space, p, &phi, mode, &f)?;
            emit(&cli.out, &serde_json::to_string(&out).unwrap())?;
        }
        Command::Maxop {
            op,
            mode,
            d,
            r,
            input,
        } => {
            let f = load(&input, &cfg, seed)?;
            let mode = MaximalMode::parse(&mode)?;
            let (g, summary) = run_maxop(&op, mode, &f, d, r)?;
            if let Some(path) = &cli.out {
                std::fs::write(path, g.to_text())?;
            }
            println!("{}", serde_json::to_string(&summary).unwrap());
        }
        Command::Hardy { v1, v2, w, trials } => {
            let v1 = ShapeFunction::parse(&v1)?;
            let v2 = ShapeFunction::parse(&v2)?;
            let w = ShapeFunction::parse(&w)?;
            let out = run_hardy(&v1, &v2, &w, trials, seed)?;
            emit(&cli.out, &serde_json::to_string(&out).unwrap())?;
        }
        Command::Decompose {
            p,
            d,
            operator,
            input,
        } => {
            let f = load(&input, &cfg, seed)?;
            let op = match operator.as_str() {
                "grand" => LevelSetOperator::Grand,
                "heat" => LevelSetOperator::Heat,
                other => return Err(Error::Config(format!("unknown operator {other:?}"))),
            };
            let decomp = cz_decompose(&f, p, d, None, op)?;
            let json = decomposition_to_json(&decomp)?;
            let recon = decomp.reconstruct()?;
            let err = recon.sub(&f)?.sup_norm();
            match &cli.out {
                Some(path) => std::fs::write(path, &json)?,
                None => println!("{json}"),
            }
            eprintln!(
                "{{\"atoms\":{},\"c0\":{},\"roundtrip_sup_error\":{}}}",
                decomp.entries.len(),
                decomp.c0,
                err
            );
        }
        Command::Synthesize {
            input,
            with_residual,
        } => {
            let decomp = decomposition_from_json(&std::fs::read_to_string(&input)?)?;
            let mut g = synthesize_decomposition(&decomp)?;
            if with_residual {
                g = g.add(&decomp.residual)?;
            }
            emit(&cli.out, &g.to_text())?;
        }
        Command::Adams {
            p,
            q,
            lambda,
            alpha,
            input,
        } => {
            let f = load(&input, &cfg, seed)?;
            let rep = verify_adams(&f, p, q, lambda, alpha)?;
            let line = ReportLine::new(
                "adams",
                format!("p={p},q={q},lambda={lambda},alpha={alpha}"),
                rep.lhs,
                rep.rhs,
                rep.ratio,
                rep.ratio.is_finite(),
            );
            all_pass &= line.pass;
            emit(&cli.out, &line.to_json())?;
        }
        Command::Olsen {
            p,
            lambda,
            alpha,
            g,
            input,
        } => {
            let f = load(&input, &cfg, seed)?;
            let gf = GridFunction::from_text(&std::fs::read_to_string(&g)?)?;
            let rep = verify_olsen(&f, &gf, p, lambda, alpha)?;
            let line = ReportLine::new(
                "olsen",
                format!("p={p},lambda={lambda},alpha={alpha}"),
                rep.lhs,
                rep.rhs,
                rep.ratio,
                rep.ratio.is_finite(),
            );
            all_pass &= line.pass;
            emit(&cli.out, &line.to_json())?;
        }
        Command::Czop {
            kernel,
            p,
            phi,
            input,
        } => {
            let f = load(&input, &cfg, seed)?;
            let phi = ShapeFunction::parse(&phi)?;
            let kernel = match kernel {
                Some(path) => {
                    ConvolutionKernel::new(GridFunction::from_text(&std::fs::read_to_string(&path)?)?)?
                }
                None => ConvolutionKernel::delta(f.dim(), f.extent_l(), f.res_k())?,
            };
            let rep = verify_convolution_bound(&f, &kernel, p, &phi, &radius_grid)?;
            let line = ReportLine::new(
                "czop",
                format!("p={p},phi={}", phi.literal()),
                rep.lhs,
                rep.rhs,
                rep.ratio,
                rep.ratio.is_finite(),
            );
            all_pass &= line.pass;
            emit(&cli.out, &line.to_json())?;
        }
        Command::Lp { p, phi, input } => {
            let f = load(&input, &cfg, seed)?;
            let phi = ShapeFunction::parse(&phi)?;
            let c = lp_partition_minimum(&f);
            let rep = verify_lp_equivalence(&f, p, &phi, &radius_grid)?;
            let line = ReportLine::new(
                "lp",
                format!("p={p},phi={},partition_min={c}", phi.literal()),
                rep.lhs,
                rep.rhs,
                rep.ratio,
                c > 0.0 && rep.ratio.is_finite(),
            );
            all_pass &= line.pass;
            emit(&cli.out, &line.to_json())?;
        }
        Command::Suite { timings } => {
            let outcome = run_suite(seed, timings)?;
            let mut text = String::new();
            if cli.format == "csv" {
                text.push_str(ReportLine::csv_header());
                text.push('\n');
                for line in &outcome.lines {
                    text.push_str(&line.to_csv());
                    text.push('\n');
                }
            } else {
                for line in &outcome.lines {
                    text.push_str(&line.to_json());
                    text.push('\n');
                }
            }
            match &cli.out {
                Some(path) => std::fs::write(path, &text)?,
                None => print!("{text}"),
            }
            all_pass = outcome.failures == 0;
        }
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::HypothesisUnmet(_) | Error::AtomInadmissible { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
