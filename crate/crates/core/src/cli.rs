//! The `oscmax` command line.
//!
//! Exit codes: 0 on success, 1 when an experiment verdict fails, 2 on usage
//! or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::choquet::{choquet_integral, choquet_lp_norm, GridFunction, Region};
use crate::content::{content, CellSet, ContentParams};
use crate::corpus::{generate, CorpusSpec};
use crate::error::{Error, Result};
use crate::geometry::{Window, WindowFamily};
use crate::io::{self, Format};
use crate::maximal::{beta_maximal, fractional_maximal, local_global_split, MaximalParams};
use crate::oscillation::{blo_norm, bmo_norm, oscillation_modulus, OscillationParams};
use crate::verify::{run_suite, ExperimentConfig, Report, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Contained,
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Bmo,
    Blo,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "oscmax", version, about = "Dyadic content, Choquet integrals, maximal functions and capacitary oscillation norms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Content dimension β.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Second content dimension (β₂).
    #[arg(long, global = true)]
    pub beta2: Option<f64>,
    /// Fractional order α.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Oscillation / integrability exponent.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub family: Option<FamilyArg>,
    /// Largest centered radius `j` (cube side `2j + 1` cells).
    #[arg(long, global = true)]
    pub radius: Option<u64>,
    /// Local/global split threshold in cells.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Comma-separated λ values.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Grid file (JSON or CSV).
    #[arg(long, global = true)]
    pub grid: Option<PathBuf>,
    /// Corpus spec: inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    pub spec: Option<String>,
    /// Comma-separated resolutions.
    #[arg(long, global = true, value_delimiter = ',')]
    pub resolutions: Option<Vec<u32>>,
    /// Comma-separated resolutions for 2D corpus entries.
    #[arg(long = "resolutions-2d", global = true, value_delimiter = ',')]
    pub resolutions_2d: Option<Vec<u32>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suite name or `all`.
    #[arg(long, global = true)]
    pub suite: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Content of the set of cells where the grid is nonzero (or of a cell-set file).
    Content {
        /// Cell set file (JSON or 0/1 raster) instead of --grid.
        #[arg(long)]
        set: Option<PathBuf>,
    },
    /// Choquet integral (or L^p norm with --p) of a nonnegative grid.
    Choquet {
        /// Restrict to the window `a0,a1,...:side` in cells.
        #[arg(long)]
        window: Option<String>,
    },
    /// Fractional (--alpha) or β-dimensional (--beta) maximal function.
    Maximal,
    /// BMO / BLO norm with witness.
    Norm {
        #[arg(long, value_enum, default_value = "both")]
        norm: NormArg,
    },
    /// Oscillation modulus ω_β(f, r), r in real units.
    Modulus {
        #[arg(long)]
        r: f64,
    },
    /// Generate a corpus function.
    Gen,
    /// Run experiment suites.
    Verify {
        /// Record wall-clock runtime in the report.
        #[arg(long)]
        timing: bool,
    },
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parameter(format!("missing required flag --{flag}")))
}

fn family(cli: &Cli) -> WindowFamily {
    match cli.family {
        Some(FamilyArg::Centered) => WindowFamily::CenteredClipped { max_radius: cli.radius },
        _ => WindowFamily::Contained,
    }
}

fn load_grid(cli: &Cli) -> Result<GridFunction> {
    let path = cli.grid.as_ref().ok_or_else(|| Error::Parameter("missing required flag --grid".into()))?;
    io::read_grid(path)
}

fn parse_window(s: &str) -> Result<Window> {
    let (anchor, side) =
        s.split_once(':').ok_or_else(|| Error::Parameter(format!("window {s:?} is not of the form a0,a1:side")))?;
    let anchor = anchor
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parameter(format!("bad window anchor {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let side = side.trim().parse::<u64>().map_err(|_| Error::Parameter(format!("bad window side {side:?}")))?;
    Ok(Window::new(anchor, side))
}

fn parse_specs(s: &str) -> Result<Vec<CorpusSpec>> {
    let text = if Path::new(s).exists() { std::fs::read_to_string(s)? } else { s.to_string() };
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.is_array() {
        Ok(serde_json::from_value(value)?)
    } else {
        Ok(vec![serde_json::from_value(value)?])
    }
}

fn emit(cli: &Cli, out: &mut dyn Write, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn emit_grid(cli: &Cli, out: &mut dyn Write, f: &GridFunction) -> Result<()> {
    let format = match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => cli.out.as_deref().map_or(Format::Json, Format::from_path),
    };
    let text = match format {
        Format::Csv => io::grid_to_csv(f)?,
        Format::Json => io::grid_to_json(f)?,
    };
    emit(cli, out, &text)
}

fn verify_configs(cli: &Cli) -> Result<Vec<ExperimentConfig>> {
    let name = cli.suite.as_deref().ok_or_else(|| Error::Parameter("missing required flag --suite".into()))?;
    let suites: Vec<Suite> = if name == "all" { Suite::ALL.to_vec() } else { vec![name.parse()?] };
    let seed = cli.seed.unwrap_or(1);
    suites
        .into_iter()
        .map(|s| {
            let mut cfg = ExperimentConfig::default_for(s, seed);
            if let Some(b) = cli.beta {
                cfg.beta = b;
            }
            if cli.beta2.is_some() {
                cfg.beta2 = cli.beta2;
            }
            if let Some(a) = cli.alpha {
                cfg.alpha = a;
            }
            if let Some(p) = cli.p {
                cfg.p = p;
            }
            if let Some(l) = &cli.lambda {
                cfg.lambdas = l.clone();
            }
            if cli.kappa.is_some() {
                cfg.kappa = cli.kappa;
            }
            if let Some(r) = &cli.resolutions {
                cfg.resolutions = r.clone();
            }
            if let Some(r) = &cli.resolutions_2d {
                cfg.resolutions_2d = r.clone();
            }
            if cli.family.is_some() {
                cfg.family = family(cli);
            }
            if let Some(s) = &cli.spec {
                cfg.corpus = parse_specs(s)?;
            }
            Ok(cfg)
        })
        .collect()
}

/// Run one parsed command; returns the exit code for a successful run.
fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Content { set } => {
            let params = ContentParams::new(need(cli.beta, "beta")?)?;
            let e = match set {
                Some(path) => io::read_cellset(path)?,
                None => {
                    let f = load_grid(cli)?;
                    let mask: Vec<bool> = f.values.iter().map(|&v| v != 0.0).collect();
                    CellSet::from_mask(f.domain, &mask)?
                }
            };
            let r = content(&e, params)?;
            let text = match cli.format {
                Some(FormatArg::Csv) => format!("{:?}", r.value),
                _ => serde_json::to_string_pretty(&json!({ "content": r.value, "cover": r.cover }))?,
            };
            emit(cli, out, &text)?;
        }
        Command::Choquet { window } => {
            let params = ContentParams::new(need(cli.beta, "beta")?)?;
            let f = load_grid(cli)?;
            let region = match window {
                Some(w) => Region::Window(parse_window(w)?),
                None => Region::Root,
            };
            let v = match cli.p {
                Some(p) => choquet_lp_norm(&f, &region, p, params)?,
                None => choquet_integral(&f, &region, params)?,
            };
            emit(cli, out, &format!("{v:?}"))?;
        }
        Command::Maximal => {
            let f = load_grid(cli)?;
            let fam = family(cli);
            match (cli.alpha, cli.beta) {
                (Some(alpha), None) => {
                    let mut mp = MaximalParams::new(alpha);
                    mp.family = fam;
                    mp.split_scale = cli.kappa;
                    if cli.kappa.is_some() {
                        let (loc, glob) = local_global_split(&f, &mp)?;
                        let text = serde_json::to_string_pretty(&json!({
                            "local": loc.values,
                            "global": glob.values,
                        }))?;
                        emit(cli, out, &text)?;
                    } else {
                        emit_grid(cli, out, &fractional_maximal(&f, &mp)?.to_grid())?;
                    }
                }
                (None, Some(beta)) => {
                    emit_grid(cli, out, &beta_maximal(&f, ContentParams::new(beta)?, fam)?.to_grid())?;
                }
                _ => return Err(Error::Parameter("maximal needs exactly one of --alpha or --beta".into())),
            }
        }
        Command::Norm { norm } => {
            let f = load_grid(cli)?;
            let params = OscillationParams::new(need(cli.beta, "beta")?, cli.p.unwrap_or(1.0))?.with_family(family(cli));
            let mut obj = serde_json::Map::new();
            if matches!(norm, NormArg::Bmo | NormArg::Both) {
                obj.insert("bmo".into(), serde_json::to_value(bmo_norm(&f, &params)?)?);
            }
            if matches!(norm, NormArg::Blo | NormArg::Both) {
                obj.insert("blo".into(), serde_json::to_value(blo_norm(&f, &params)?)?);
            }
            emit(cli, out, &serde_json::to_string_pretty(&obj)?)?;
        }
        Command::Modulus { r } => {
            let f = load_grid(cli)?;
            let params = OscillationParams::new(need(cli.beta, "beta")?, cli.p.unwrap_or(1.0))?.with_family(family(cli));
            emit(cli, out, &format!("{:?}", oscillation_modulus(&f, *r, &params)?))?;
        }
        Command::Gen => {
            let spec_arg = cli.spec.as_deref().ok_or_else(|| Error::Parameter("missing required flag --spec".into()))?;
            let mut specs = parse_specs(spec_arg)?;
            if specs.len() != 1 {
                return Err(Error::Parameter("gen takes exactly one spec".into()));
            }
            let mut spec = specs.remove(0);
            if let Some(r) = &cli.resolutions {
                if r.len() != 1 {
                    return Err(Error::Parameter("gen takes a single resolution".into()));
                }
                spec.resolution = r[0];
            }
            emit_grid(cli, out, &generate(&spec)?)?;
        }
        Command::Verify { timing } => {
            let cfgs = verify_configs(cli)?;
            let reports: Vec<Report> = cfgs.iter().map(|c| run_suite(c, *timing)).collect::<Result<_>>()?;
            let text = match cli.format {
                Some(FormatArg::Csv) => reports.iter().map(|r| r.series_csv()).collect::<Vec<_>>().join(""),
                _ if reports.len() == 1 => reports[0].to_json()?,
                _ => serde_json::to_string_pretty(&reports)?,
            };
            emit(cli, out, &text)?;
            if !reports.iter().all(Report::passed) {
                return Ok(EXIT_VERDICT);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parse arguments and run; errors go to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::Parameter("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Parameter(e.to_string()))
            .and_then(|pool| {
                let mut buf = Vec::new();
                let r = pool.install(|| execute(&cli, &mut buf));
                out.write_all(&buf).map_err(Error::from)?;
                r
            }),
        None => execute(&cli, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
