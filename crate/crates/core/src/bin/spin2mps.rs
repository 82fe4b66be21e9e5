use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use spin2mps::measures::{evaluate_point, MeasureOptions, MeasureSet, Slice, DEFAULT_STRING_R};
use spin2mps::mpstate::{BIG_L_MAX, DEFAULT_L_MAX};
use spin2mps::oracle::{run_standard_grid, OracleOptions};
use spin2mps::report::{
    format_float, measure_value, parse_config, run_figures, run_sweep, write_sweep, ConfigMap, OutputFormat, RunError,
    SweepConfig, CSV_COLUMNS,
};

#[derive(Parser)]
#[command(name = "spin2mps", version, about = "Transfer-matrix observables of the spin-2 matrix-product family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every measure at one value of a
    Point(PointArgs),
    /// Evaluate measures on a grid of a values
    Sweep(SweepArgs),
    /// Write the four figure data sets and plots
    Figures(FigureArgs),
    /// Run the brute-force finite-chain checks
    OracleCheck(OracleArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Read `key = value` defaults from a file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fidelity offset
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Finite-difference step
    #[arg(long)]
    h: Option<f64>,
    /// String-operator angle (default pi/2)
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// String length r (the plateau is checked against 2r)
    #[arg(long)]
    string_r: Option<usize>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct SliceArgs {
    /// acritical: x = -3, gamma = -2; critical: x = 0, gamma = 1
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Comma-separated subset of entropy,dde,rf,rfs,fps,xi,string,fluct (or all)
    #[arg(long)]
    measures: Option<String>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[command(flatten)]
    slice: SliceArgs,
    #[command(flatten)]
    common: Common,
    /// Print JSON instead of aligned text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    a_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a_max: Option<f64>,
    #[arg(long)]
    a_steps: Option<usize>,
    #[command(flatten)]
    slice: SliceArgs,
    #[command(flatten)]
    common: Common,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Also write an SVG plot
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output file name without extension
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct OracleArgs {
    /// Largest chain length used by the convergence checks
    #[arg(long)]
    l_max: Option<usize>,
    /// Permit chain lengths above the default cap (memory heavy)
    #[arg(long)]
    allow_big: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Perturb the transfer matrices on the transfer-matrix side (test fixture)
    #[arg(long, hide = true)]
    inject_fault: Option<f64>,
}

/// Flag value, else config-file value, else nothing.
struct Resolver {
    file: ConfigMap,
}

impl Resolver {
    fn new(path: Option<&PathBuf>) -> Result<Self, RunError> {
        let file = match path {
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).map_err(|e| RunError::Usage(format!("config {}: {e}", p.display())))?;
                parse_config(&text).map_err(|e| RunError::Usage(format!("config {}: {e}", p.display())))?
            }
            None => ConfigMap::new(),
        };
        Ok(Self { file })
    }

    fn get<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>, RunError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| RunError::Usage(format!("config key '{key}' = '{s}': {e}"))),
            None => Ok(None),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, RunError> {
        Ok(flag || self.get::<bool>(&None, key)?.unwrap_or(false))
    }
}

fn resolve_slice(r: &Resolver, s: &SliceArgs) -> Result<(Slice, Option<String>), RunError> {
    let preset = r.get(&s.preset, "preset")?;
    let slice = match preset.as_deref() {
        Some("acritical") => Slice::ACRITICAL,
        Some("critical") => Slice::CRITICAL,
        Some(other) => return Err(RunError::Usage(format!("unknown preset '{other}'"))),
        None => {
            let x = r.get(&s.x, "x")?;
            let gamma = r.get(&s.gamma, "gamma")?;
            match (x, gamma) {
                (Some(x), Some(gamma)) => Slice { x, gamma },
                _ => return Err(RunError::Usage("give --preset or both --x and --gamma".into())),
            }
        }
    };
    Ok((slice, preset))
}

fn resolve_options(r: &Resolver, c: &Common, measures: Option<&Option<String>>) -> Result<MeasureOptions, RunError> {
    let d = MeasureOptions::default();
    let set = match measures {
        Some(m) => match r.get(m, "measures")? {
            Some(list) => MeasureSet::parse(&list).map_err(|e| RunError::Usage(e.to_string()))?,
            None => MeasureSet::ALL,
        },
        None => MeasureSet::ALL,
    };
    let opts = MeasureOptions {
        delta: r.get(&c.delta, "delta")?.unwrap_or(d.delta),
        h: r.get(&c.h, "h")?.unwrap_or(d.h),
        theta: r.get(&c.theta, "theta")?.unwrap_or(d.theta),
        string_r: r.get(&c.string_r, "string-r")?.unwrap_or(DEFAULT_STRING_R),
        measures: set,
    };
    if !(opts.delta.is_finite() && opts.delta != 0.0) {
        return Err(RunError::Usage(format!("delta must be non-zero, got {}", opts.delta)));
    }
    if !(opts.h.is_finite() && opts.h > 0.0) {
        return Err(RunError::Usage(format!("h must be positive, got {}", opts.h)));
    }
    if opts.string_r < 2 {
        return Err(RunError::Usage("string-r must be at least 2".into()));
    }
    Ok(opts)
}

fn point(args: PointArgs) -> Result<(), RunError> {
    let r = Resolver::new(args.common.config.as_ref())?;
    let (slice, _) = resolve_slice(&r, &args.slice)?;
    let a = r.get(&args.a, "a")?.ok_or_else(|| RunError::Usage("--a is required".into()))?;
    if !a.is_finite() {
        return Err(RunError::Usage(format!("a must be finite, got {a}")));
    }
    let opts = resolve_options(&r, &args.common, Some(&args.slice.measures))?;
    let p = evaluate_point(slice, a, &opts)
        .map_err(|e| RunError::Numerical { op: format!("evaluate_point(a = {a:e})"), source: e })?;
    if args.json {
        let v = serde_json::json!({ "x": slice.x, "gamma": slice.gamma, "point": p });
        println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
    } else {
        let width = CSV_COLUMNS.iter().map(|c| c.len()).max().unwrap_or(0);
        println!("{:<width$}: {}", "x", format_float(slice.x));
        println!("{:<width$}: {}", "gamma", format_float(slice.gamma));
        for col in CSV_COLUMNS {
            let text = match col {
                "limit_flag" => p.limit_flag.to_string(),
                _ => match measure_value(&p, col) {
                    Some(v) => format_float(v),
                    None => "-".into(),
                },
            };
            println!("{col:<width$}: {text}");
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), RunError> {
    let r = Resolver::new(args.common.config.as_ref())?;
    let (slice, preset) = resolve_slice(&r, &args.slice)?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| RunError::Usage(format!("--{name} is required")));
    let format = match r.get(&args.format, "format")?.as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return Err(RunError::Usage(format!("unknown format '{other}'"))),
    };
    let config = SweepConfig {
        slice,
        preset,
        a_min: need(r.get(&args.a_min, "a-min")?, "a-min")?,
        a_max: need(r.get(&args.a_max, "a-max")?, "a-max")?,
        a_steps: r.get(&args.a_steps, "a-steps")?.ok_or_else(|| RunError::Usage("--a-steps is required".into()))?,
        options: resolve_options(&r, &args.common, Some(&args.slice.measures))?,
        out_dir: r.get(&args.out_dir, "out-dir")?.unwrap_or_else(|| PathBuf::from(".")),
        stem: r.get(&args.stem, "stem")?.unwrap_or_else(|| "sweep".into()),
        format,
        svg: r.flag(args.svg, "svg")?,
        threads: r.get(&args.common.threads, "threads")?.unwrap_or(0),
    };
    let out = run_sweep(&config)?;
    for path in write_sweep(&config, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn figures(args: FigureArgs) -> Result<(), RunError> {
    let r = Resolver::new(args.common.config.as_ref())?;
    let opts = resolve_options(&r, &args.common, None)?;
    let out_dir = r.get(&args.out_dir, "out-dir")?.unwrap_or_else(|| PathBuf::from("figures"));
    let threads = r.get(&args.common.threads, "threads")?.unwrap_or(0);
    for path in run_figures(&out_dir, &opts, threads)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn oracle_check(args: OracleArgs) -> Result<bool, RunError> {
    let l_max = args.l_max.unwrap_or(DEFAULT_L_MAX);
    if l_max < 6 {
        return Err(RunError::Usage(format!("--l-max must be at least 6, got {l_max}")));
    }
    if l_max > DEFAULT_L_MAX && !args.allow_big {
        return Err(RunError::Usage(format!("--l-max {l_max} exceeds {DEFAULT_L_MAX}; pass --allow-big to permit it")));
    }
    if l_max > BIG_L_MAX {
        return Err(RunError::Usage(format!("--l-max is capped at {BIG_L_MAX}")));
    }
    if l_max > DEFAULT_L_MAX {
        let bytes = 5usize.pow(l_max as u32) * 16;
        eprintln!("warning: L = {l_max} holds {} MiB per state vector", bytes >> 20);
    }
    let opts = OracleOptions { l_max, inject_fault: args.inject_fault };
    let run = || run_standard_grid(&opts);
    let report = match args.threads.unwrap_or(0) {
        0 => run(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Io(format!("thread pool: {e}")))?
            .install(run),
    }
    .map_err(|e| RunError::Numerical { op: "oracle grid".into(), source: e })?;
    print!("{}", report.table());
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Point(a) => point(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Figures(a) => figures(a).map(|_| true),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
