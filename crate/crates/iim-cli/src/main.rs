//! Batch front end: `iim impute`, `iim learn` and `iim bench`.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.
//! Output files are written atomically (temp file + rename), so a failing
//! run never leaves a partial file behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use iim_core::evalbench::{impute_with_baseline, run_bench, AttributeChoice, MaskPlan, Method};
use iim_core::{
    impute_with_models, load_relation_str, read_model_sets, relation_to_csv, write_model_sets,
    EllMode, Error as CoreError, ImputeOptions, MissingMarkers, Relation, WeightMode,
};

const USAGE: &str = "\
usage: iim <command> [flags]

commands:
  impute   fill missing cells of a CSV and write the completed copy
  learn    learn per-tuple models and save them for later imputation
  bench    mask a complete CSV, run several imputers, report accuracy

common flags:
  --input PATH            input CSV (header row, numeric fields)
  --k N                   imputation neighbors (default 10)
  --ell adaptive|N        learning neighbors per tuple (default adaptive)
  --step N                adaptive grid stride (default 1, or n/200 above 1000 tuples)
  --alpha F               ridge regularization (default 1e-6)
  --weight-mode vote|uniform   candidate aggregation (default vote)
  --normalize             z-score attributes for neighbor distances
  --missing-markers A,B   extra missing-value tokens (default NA,?)
  --threads N             worker threads (default: all cores)

impute flags:
  --output PATH           where the completed CSV goes (required)
  --method NAME           iim, mean, knn, glr or loess (default iim)
  --models PATH           reuse a model file from `iim learn` (iim only)
  --explain-path PATH     per-cell candidates/weights dump (iim only)

learn flags:
  --output PATH           where the model file goes (required)

bench flags:
  --methods A,B,...       comparison set (default iim,mean,knn,glr,loess)
  --seed N                masking seed (default 0)
  --missing-rate F        fraction of tuples masked (default 0.05)
  --cluster-size N        masked tuples come in nearest-neighbor groups (default 1)
  --report-path PATH      write the report (.json for the structured form, CSV otherwise)
";

enum CliError {
    Usage(String),
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Core(CoreError::Numeric(_)) => 4,
        CliError::Core(CoreError::InvalidArgument(_)) => 2,
        CliError::Core(_) => 3,
    }
}

fn usage_err(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

/// Everything a run needs, defaults included.
struct RunConfig {
    command: String,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    models: Option<PathBuf>,
    method: Method,
    methods: Vec<Method>,
    k: usize,
    ell: EllMode,
    step: Option<usize>,
    alpha: f64,
    weight_mode: WeightMode,
    normalize: bool,
    markers: Vec<String>,
    seed: u64,
    missing_rate: f64,
    cluster_size: usize,
    report_path: Option<PathBuf>,
    explain_path: Option<PathBuf>,
    threads: Option<usize>,
}

impl RunConfig {
    fn options(&self) -> ImputeOptions {
        ImputeOptions {
            k: self.k,
            ell: self.ell,
            step_h: self.step,
            alpha: self.alpha,
            weight_mode: self.weight_mode,
            standardize: self.normalize,
        }
    }

    /// One line with every effective setting, defaults echoed.
    fn echo(&self) -> String {
        let mut line = format!("config: command={}", self.command);
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "-".into())
        };
        write!(line, " input={}", path(&self.input)).unwrap();
        match self.command.as_str() {
            "impute" => {
                write!(
                    line,
                    " output={} method={} models={} explain-path={}",
                    path(&self.output),
                    self.method,
                    path(&self.models),
                    path(&self.explain_path)
                )
                .unwrap();
            }
            "learn" => write!(line, " output={}", path(&self.output)).unwrap(),
            _ => {
                let methods: Vec<String> = self.methods.iter().map(|m| m.to_string()).collect();
                write!(
                    line,
                    " methods={} seed={} missing-rate={} cluster-size={} report-path={}",
                    methods.join(","),
                    self.seed,
                    self.missing_rate,
                    self.cluster_size,
                    path(&self.report_path)
                )
                .unwrap();
            }
        }
        write!(
            line,
            " k={} ell={} step={} alpha={} weight-mode={} normalize={} missing-markers={} threads={}",
            self.k,
            self.ell,
            self.step
                .map(|s| s.to_string())
                .unwrap_or_else(|| "auto".into()),
            self.alpha,
            self.weight_mode,
            self.normalize,
            self.markers.join(","),
            self.threads
                .map(|t| t.to_string())
                .unwrap_or_else(|| "all".into()),
        )
        .unwrap();
        line
    }
}

fn parse_args(args: &[String]) -> Result<RunConfig, CliError> {
    let command = args
        .first()
        .ok_or_else(|| usage_err("missing command"))?
        .clone();
    if !matches!(command.as_str(), "impute" | "learn" | "bench") {
        return Err(usage_err(format!("unknown command '{command}'")));
    }
    let mut cfg = RunConfig {
        command,
        input: None,
        output: None,
        models: None,
        method: Method::Iim,
        methods: Method::ALL.to_vec(),
        k: 10,
        ell: EllMode::Adaptive,
        step: None,
        alpha: 1e-6,
        weight_mode: WeightMode::Vote,
        normalize: false,
        markers: vec!["NA".into(), "?".into()],
        seed: 0,
        missing_rate: 0.05,
        cluster_size: 1,
        report_path: None,
        explain_path: None,
        threads: None,
    };

    let mut iter = args[1..].iter();
    while let Some(flag) = iter.next() {
        let mut value = |name: &str| -> Result<&String, CliError> {
            iter.next()
                .ok_or_else(|| usage_err(format!("flag {name} needs a value")))
        };
        match flag.as_str() {
            "--input" => cfg.input = Some(PathBuf::from(value("--input")?)),
            "--output" => cfg.output = Some(PathBuf::from(value("--output")?)),
            "--models" => cfg.models = Some(PathBuf::from(value("--models")?)),
            "--report-path" => cfg.report_path = Some(PathBuf::from(value("--report-path")?)),
            "--explain-path" => cfg.explain_path = Some(PathBuf::from(value("--explain-path")?)),
            "--method" => cfg.method = Method::from_str(value("--method")?)?,
            "--methods" => {
                let list = value("--methods")?;
                let mut methods = Vec::new();
                for name in list.split(',').filter(|s| !s.is_empty()) {
                    methods.push(Method::from_str(name)?);
                }
                if methods.is_empty() {
                    return Err(usage_err("--methods needs at least one method"));
                }
                cfg.methods = methods;
            }
            "--k" => cfg.k = parse_number(value("--k")?, "--k")?,
            "--ell" => {
                let v = value("--ell")?;
                cfg.ell = if v == "adaptive" {
                    EllMode::Adaptive
                } else {
                    EllMode::Fixed(parse_number(v, "--ell")?)
                };
            }
            "--step" => cfg.step = Some(parse_number(value("--step")?, "--step")?),
            "--alpha" => cfg.alpha = parse_number(value("--alpha")?, "--alpha")?,
            "--weight-mode" => cfg.weight_mode = WeightMode::from_str(value("--weight-mode")?)?,
            "--normalize" => cfg.normalize = true,
            "--missing-markers" => {
                cfg.markers = value("--missing-markers")?
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.to_string())
                    .collect();
            }
            "--seed" => cfg.seed = parse_number(value("--seed")?, "--seed")?,
            "--missing-rate" => {
                cfg.missing_rate = parse_number(value("--missing-rate")?, "--missing-rate")?
            }
            "--cluster-size" => {
                cfg.cluster_size = parse_number(value("--cluster-size")?, "--cluster-size")?
            }
            "--threads" => cfg.threads = Some(parse_number(value("--threads")?, "--threads")?),
            other => return Err(usage_err(format!("unknown flag '{other}'"))),
        }
    }

    if cfg.k < 1 {
        return Err(usage_err("--k must be at least 1"));
    }
    if let Some(step) = cfg.step {
        if step < 1 {
            return Err(usage_err("--step must be at least 1"));
        }
    }
    if let EllMode::Fixed(l) = cfg.ell {
        if l < 1 {
            return Err(usage_err("--ell must be at least 1"));
        }
    }
    if cfg.alpha < 0.0 {
        return Err(usage_err("--alpha must be non-negative"));
    }
    Ok(cfg)
}

fn parse_number<T: FromStr>(value: &str, flag: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| usage_err(format!("cannot parse '{value}' for {flag}")))
}

fn load_input(cfg: &RunConfig) -> Result<Relation, CliError> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| usage_err("--input is required"))?;
    let text = fs::read_to_string(path).map_err(CoreError::Io)?;
    let markers = MissingMarkers::new(cfg.markers.iter().cloned());
    Ok(load_relation_str(&text, &markers)?)
}

/// Write via a sibling temp file and rename, so failures leave no partial
/// output.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(CoreError::Io)?;
    fs::rename(&tmp, path).map_err(CoreError::Io)?;
    Ok(())
}

fn cmd_impute(cfg: &RunConfig) -> Result<(), CliError> {
    let output = cfg
        .output
        .as_ref()
        .ok_or_else(|| usage_err("--output is required for impute"))?;
    if cfg.method != Method::Iim {
        if cfg.models.is_some() {
            return Err(usage_err("--models only applies to the iim method"));
        }
        if cfg.explain_path.is_some() {
            return Err(usage_err("--explain-path only applies to the iim method"));
        }
    }
    let rel = load_input(cfg)?;
    let opts = cfg.options();

    let (filled, results) = if let Some(models_path) = &cfg.models {
        let text = fs::read_to_string(models_path).map_err(CoreError::Io)?;
        let sets = read_model_sets(&text, rel.names())?;
        let outcome = impute_with_models(&rel, &sets, &opts)?;
        (outcome.relation, Some(outcome.results))
    } else if cfg.method == Method::Iim {
        let outcome = iim_core::impute_relation(&rel, &opts)?;
        (outcome.relation, Some(outcome.results))
    } else {
        let (filled, _, _) = impute_with_baseline(&rel, cfg.method, &opts)?;
        (filled, None)
    };

    write_atomic(output, &relation_to_csv(&filled))?;
    if let (Some(explain), Some(results)) = (&cfg.explain_path, &results) {
        let mut buf = Vec::new();
        iim_core::impute::write_explain_csv(results, rel.names(), &mut buf)
            .map_err(CoreError::Io)?;
        write_atomic(
            explain,
            &String::from_utf8(buf).expect("explain dump is UTF-8"),
        )?;
    }
    println!(
        "imputed {} cells into {}",
        results
            .as_ref()
            .map(|r| r.len())
            .unwrap_or_else(|| rel.missing_cells()),
        output.display()
    );
    Ok(())
}

fn cmd_learn(cfg: &RunConfig) -> Result<(), CliError> {
    let output = cfg
        .output
        .as_ref()
        .ok_or_else(|| usage_err("--output is required for learn"))?;
    let rel = load_input(cfg)?;
    let sets = iim_core::learn_models(&rel, &cfg.options())?;
    let mut buf = Vec::new();
    write_model_sets(&sets, rel.names(), &mut buf).map_err(CoreError::Io)?;
    write_atomic(
        output,
        &String::from_utf8(buf).expect("model file is UTF-8"),
    )?;
    println!(
        "learned {} model set(s) over {} tuples into {}",
        sets.len(),
        sets.first().map(|s| s.models.len()).unwrap_or(0),
        output.display()
    );
    Ok(())
}

fn cmd_bench(cfg: &RunConfig) -> Result<(), CliError> {
    let rel = load_input(cfg)?;
    let plan = MaskPlan {
        seed: cfg.seed,
        tuple_fraction: cfg.missing_rate,
        attribute: AttributeChoice::RandomPerTuple,
        cluster_size: cfg.cluster_size,
    };
    let report = run_bench(&rel, &plan, &cfg.methods, &cfg.options())?;
    let fmt_r2 = |v: Option<f64>| {
        v.map(|x| format!("{x:.4}"))
            .unwrap_or_else(|| "undefined".into())
    };
    println!(
        "masked {} cells; r2-sparsity={} r2-heterogeneity={}",
        report.config.masked_cells,
        fmt_r2(report.r2_sparsity),
        fmt_r2(report.r2_heterogeneity)
    );
    for row in &report.methods {
        println!(
            "method={} rms={} learn-seconds={:.4} impute-seconds={:.4}",
            row.method, row.rms, row.learn_seconds, row.impute_seconds
        );
    }
    if let Some(path) = &cfg.report_path {
        let is_json = path.extension().map(|e| e == "json").unwrap_or(false);
        let body = if is_json {
            report.to_json()
        } else {
            report.to_csv()
        };
        write_atomic(path, &body)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{USAGE}");
        return if args.is_empty() {
            Err(usage_err("missing command"))
        } else {
            Ok(())
        };
    }
    let cfg = parse_args(&args)?;
    if let Some(threads) = cfg.threads {
        if threads < 1 {
            return Err(usage_err("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage_err(format!("cannot configure {threads} threads: {e}")))?;
    }
    println!("{}", cfg.echo());
    match cfg.command.as_str() {
        "impute" => cmd_impute(&cfg),
        "learn" => cmd_learn(&cfg),
        "bench" => cmd_bench(&cfg),
        _ => unreachable!("command validated in parse_args"),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Usage(msg) => eprintln!("error: {msg}\nrun 'iim help' for usage"),
                CliError::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
