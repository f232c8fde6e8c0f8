//! Command-line front end: fit, classify, simulate, benchmark, contour.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric or
//! degenerate error. All randomness flows from --seed; identical invocations
//! produce identical outputs. LPDEPTH_THREADS caps the worker count.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use lpdepth::classify::{
    ClassData, DensityRatioClassifier, MaxDepthClassifier, PriorMode, TrainOptions,
};
use lpdepth::error::ErrorClass;
use lpdepth::fit::{PGrid, TrimSpec};
use lpdepth::harness::{
    ingest_csv, run_benchmark, run_simulation_study, BenchmarkConfig, ClassifierKind,
    SimulationConfig, SplitSpec, TrainSize,
};
use lpdepth::model_io::{load_classifier, save_classifier, TrainedClassifier};
use lpdepth::synth::{density_contour_grid, depth_contour_grid, GridBounds, LpSymmetricSpec};

#[derive(Parser)]
#[command(name = "lpdepth", version, about = "Affine-invariant L_p depth classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a classifier from a labeled CSV and write a model file.
    Fit(FitArgs),
    /// Classify rows of a CSV with a saved model.
    Classify(ClassifyArgs),
    /// Run simulated two-class experiments from a config file.
    Simulate(SimulateArgs),
    /// Run a replicated-split benchmark on a labeled CSV.
    Benchmark(BenchmarkArgs),
    /// Emit a depth or density contour grid as CSV.
    Contour(ContourArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Training data CSV (header row required).
    #[arg(long)]
    train: PathBuf,
    /// Name of the label column.
    #[arg(long)]
    label_col: String,
    /// Comma-separated columns to drop before fitting.
    #[arg(long, value_delimiter = ',')]
    drop_cols: Vec<String>,
    /// Comma-separated exponent grid (default 2^((i-1)/2), i = 1..10).
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Trim levels lo,hi (default 0.02,0.98).
    #[arg(long)]
    trim: Option<String>,
    /// Seed for the subset search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prior mode: sample proportions or equal.
    #[arg(long, default_value = "sample")]
    priors: String,
    /// Fit the maximum-depth classifier (common exponent) instead of the
    /// generalized density-ratio classifier.
    #[arg(long)]
    max_depth: bool,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Data CSV; all columns are features unless excluded.
    #[arg(long)]
    data: PathBuf,
    /// Optional label column to ignore (kept in the output).
    #[arg(long)]
    label_col: Option<String>,
    /// Comma-separated columns to ignore (kept in the output).
    #[arg(long, value_delimiter = ',')]
    drop_cols: Vec<String>,
    /// Output CSV: input columns plus a `predicted` column.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Output report CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Labeled data CSV.
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column.
    #[arg(long)]
    label_col: String,
    /// Comma-separated columns to drop.
    #[arg(long, value_delimiter = ',')]
    drop_cols: Vec<String>,
    /// Train size: a fraction in (0,1) or an absolute row count.
    #[arg(long, default_value = "0.5")]
    train_size: String,
    /// Number of replicated splits.
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated exponent grid.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Trim levels lo,hi.
    #[arg(long)]
    trim: Option<String>,
    /// Prior mode: sample proportions or equal.
    #[arg(long, default_value = "sample")]
    priors: String,
    /// Use the maximum-depth classifier instead of the density-ratio one.
    #[arg(long)]
    max_depth: bool,
    /// Skip the l_2-frozen baseline pipeline.
    #[arg(long)]
    no_baseline: bool,
    /// Output report CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ContourArgs {
    /// Exponent p of the contour family.
    #[arg(long)]
    p: f64,
    /// Rotation of the contours, degrees ("135" or "135deg").
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    rot: String,
    /// Per-axis contour scales s1,s2 (transform diag(1/s1, 1/s2)).
    #[arg(long, default_value = "1,1")]
    scales: String,
    /// Scale parameter of the exponential-power density.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Center x,y.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    center: String,
    /// Field to emit: depth or density.
    #[arg(long, default_value = "depth")]
    field: String,
    /// Window xmin,xmax,ymin,ymax.
    #[arg(long, default_value = "-3,3,-3,3", allow_hyphen_values = true)]
    bounds: String,
    /// Grid points per axis (>= 16).
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Output grid CSV.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Contour(args) => cmd_contour(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        let code = match err.class() {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        };
        std::process::exit(code);
    }
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("LPDEPTH_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

type CliResult = Result<(), lpdepth::Error>;

fn config_err(msg: impl Into<String>) -> lpdepth::Error {
    lpdepth::Error::Config(msg.into())
}

fn parse_grid(values: &[f64]) -> Result<PGrid, lpdepth::Error> {
    if values.is_empty() {
        Ok(PGrid::default())
    } else {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        PGrid::new(sorted)
    }
}

fn parse_trim(trim: &Option<String>) -> Result<TrimSpec, lpdepth::Error> {
    match trim {
        None => Ok(TrimSpec::default()),
        Some(s) => {
            let (lo, hi) = parse_pair(s, "trim")?;
            TrimSpec::new(lo, hi)
        }
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), lpdepth::Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(config_err(format!("{what} wants two comma-separated values, got '{s}'")));
    }
    let a = parts[0]
        .parse()
        .map_err(|_| config_err(format!("{what}: cannot parse '{}'", parts[0])))?;
    let b = parts[1]
        .parse()
        .map_err(|_| config_err(format!("{what}: cannot parse '{}'", parts[1])))?;
    Ok((a, b))
}

fn parse_priors(s: &str) -> Result<PriorMode, lpdepth::Error> {
    match s {
        "sample" => Ok(PriorMode::SampleProportions),
        "equal" => Ok(PriorMode::Equal),
        other => Err(config_err(format!(
            "priors must be 'sample' or 'equal', got '{other}'"
        ))),
    }
}

fn cmd_fit(args: FitArgs) -> CliResult {
    let dataset = ingest_csv(&args.train, &args.label_col, &args.drop_cols)?;
    let options = TrainOptions {
        grid: parse_grid(&args.grid)?,
        trim: parse_trim(&args.trim)?,
        prior_mode: parse_priors(&args.priors)?,
        ..Default::default()
    };
    let classes: Vec<ClassData> = (0..dataset.classes().len())
        .map(|c| ClassData {
            label: dataset.classes()[c].clone(),
            rows: dataset.rows(&dataset.class_indices(c)),
        })
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let (classifier, diagnostics) = if args.max_depth {
        let (clf, diag) = MaxDepthClassifier::fit(&classes, &options, &mut rng)?;
        (TrainedClassifier::MaxDepth(clf), diag)
    } else {
        let (clf, diag) = DensityRatioClassifier::fit(&classes, &options, &mut rng)?;
        (TrainedClassifier::DensityRatio(clf), diag)
    };
    save_classifier(&args.out, &classifier)?;
    println!(
        "fitted {} classifier on {} ({} rows, {} features)",
        if args.max_depth { "max-depth" } else { "density-ratio" },
        dataset.name(),
        dataset.n(),
        dataset.dim()
    );
    for c in &diagnostics.classes {
        println!(
            "class {}: n={} prior={:.4} p_hat={:.4} tr_ratio={:.4} (tries {}) bandwidth={:.6}",
            c.label, c.n, c.prior, c.p_hat, c.tr_ratio, c.tr_tries, c.bandwidth
        );
    }
    for t in &diagnostics.thresholds {
        println!(
            "threshold {}|{}: k={:.6} cv_error={:.4}",
            t.labels.0, t.labels.1, t.k, t.cv_error
        );
    }
    println!("model written to {}", args.out.display());
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> CliResult {
    let classifier = load_classifier(&args.model)?;
    let display = args.data.display().to_string();
    let data_err = |message: String| lpdepth::Error::DataFormat {
        path: display.clone(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&args.data)
        .map_err(|e| data_err(e.to_string()))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| data_err(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut excluded: Vec<String> = args.drop_cols.clone();
    if let Some(label) = &args.label_col {
        if !headers.iter().any(|h| h == label) {
            return Err(config_err(format!("label column '{label}' not found")));
        }
        excluded.push(label.clone());
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| !excluded.contains(&headers[i]))
        .collect();
    if feature_cols.len() != classifier.dim() {
        return Err(lpdepth::Error::DimensionMismatch {
            expected: classifier.dim(),
            got: feature_cols.len(),
        });
    }

    let mut writer = csv::Writer::from_path(&args.out)
        .map_err(|e| data_err(format!("cannot write {}: {e}", args.out.display())))?;
    let mut out_header = headers.clone();
    out_header.push("predicted".to_string());
    writer
        .write_record(&out_header)
        .map_err(|e| data_err(e.to_string()))?;
    let class_labels: Vec<String> = classifier
        .classes()
        .iter()
        .map(|c| c.label().to_string())
        .collect();
    let mut x = DVector::zeros(feature_cols.len());
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data_err(format!("row {}: {e}", row_number + 1)))?;
        for (k, &col) in feature_cols.iter().enumerate() {
            let cell = record.get(col).unwrap_or("").trim();
            x[k] = cell.parse().map_err(|_| {
                data_err(format!(
                    "non-numeric value '{cell}' at row {}, column '{}'",
                    row_number + 1,
                    headers[col]
                ))
            })?;
        }
        let label = &class_labels[classifier.classify(&x)?];
        let mut out: Vec<String> = record.iter().map(|c| c.to_string()).collect();
        out.push(label.clone());
        writer
            .write_record(&out)
            .map_err(|e| data_err(e.to_string()))?;
    }
    writer.flush()?;
    println!("predictions written to {}", args.out.display());
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let text = fs::read_to_string(&args.config)?;
    let mut config: SimulationConfig = toml::from_str(&text)
        .map_err(|e| config_err(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    let result = run_simulation_study(&config)?;
    let report = result.report();
    fs::write(&args.out, report.to_csv_string())?;
    print!("{}", report.render_text());
    println!("report written to {}", args.out.display());
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> CliResult {
    let dataset = ingest_csv(&args.data, &args.label_col, &args.drop_cols)?;
    let train_size = if let Ok(count) = args.train_size.parse::<usize>() {
        TrainSize::Absolute(count)
    } else {
        let f: f64 = args
            .train_size
            .parse()
            .map_err(|_| config_err(format!("cannot parse train size '{}'", args.train_size)))?;
        TrainSize::Fraction(f)
    };
    let split = SplitSpec::new(train_size, args.reps, args.seed)?;
    let config = BenchmarkConfig {
        grid: parse_grid(&args.grid)?,
        trim: parse_trim(&args.trim)?,
        prior_mode: parse_priors(&args.priors)?,
        classifier: if args.max_depth {
            ClassifierKind::MaxDepth
        } else {
            ClassifierKind::DensityRatio
        },
        baseline: !args.no_baseline,
        ..BenchmarkConfig::new(split)
    };
    let result = run_benchmark(&dataset, &config)?;
    let report = result.report();
    fs::write(&args.out, report.to_csv_string())?;
    print!("{}", report.render_text());
    println!("report written to {}", args.out.display());
    Ok(())
}

fn cmd_contour(args: ContourArgs) -> CliResult {
    let rot_text = args.rot.trim().trim_end_matches("deg");
    let rot_deg: f64 = rot_text
        .parse()
        .map_err(|_| config_err(format!("cannot parse rotation '{}'", args.rot)))?;
    let (s1, s2) = parse_pair(&args.scales, "scales")?;
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(config_err("scales must be positive"));
    }
    let (cx, cy) = parse_pair(&args.center, "center")?;
    let bounds_parts: Vec<f64> = args
        .bounds
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config_err(format!("cannot parse bounds '{}'", args.bounds)))?;
    if bounds_parts.len() != 4 {
        return Err(config_err("bounds wants xmin,xmax,ymin,ymax"));
    }
    let bounds = GridBounds::new(
        bounds_parts[0],
        bounds_parts[1],
        bounds_parts[2],
        bounds_parts[3],
    )?;

    let theta = rot_deg.to_radians();
    let rot = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
    let transform = DMatrix::from_row_slice(2, 2, &[1.0 / s1, 0.0, 0.0, 1.0 / s2]) * rot.transpose();
    let center = DVector::from_column_slice(&[cx, cy]);
    let spec = LpSymmetricSpec::new(args.p, center, transform, args.sigma)?;
    let grid = match args.field.as_str() {
        "depth" => depth_contour_grid(&spec.to_model(), &bounds, args.resolution)?,
        "density" => density_contour_grid(&spec, &bounds, args.resolution)?,
        other => {
            return Err(config_err(format!(
                "field must be 'depth' or 'density', got '{other}'"
            )))
        }
    };
    let file = fs::File::create(&args.out)?;
    grid.write_csv(std::io::BufWriter::new(file))?;
    println!("contour grid written to {}", args.out.display());
    Ok(())
}
