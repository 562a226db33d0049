//! Command implementations.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tailclust::bench::{self, BenchReport, ReportFormat, SweepConfig};
use tailclust::hill::{aggregate_by_partition, hill_columns, HILL_CI_FORMULA};
use tailclust::ingest::{read_data_matrix, write_data_matrix, write_returns, PriceTable};
use tailclust::params::{default_beta, default_k, default_k_star};
use tailclust::{cluster as run_cluster, generate, hill_ci, ClusterParams, DataMatrix, Error, SimModel, SimModelSpec};

use crate::report::{
    ClusterOutput, ColumnEstimate, GroupSummary, HillOutput, HillRow, ParamsUsed, PartitionOut, Round,
    SimSidecar, Statistic, SCHEMA_VERSION,
};
use crate::{BenchArgs, ClusterArgs, HillArgs, ReturnsArgs, SimulateArgs, TableFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input files or configuration.
    Parse,
    /// Well-formed input with invalid values or parameters.
    Validation,
    /// Failures while running: I/O and errors raised by the procedures.
    Runtime,
}

impl ErrorKind {
    /// Process exit code. Command-line usage errors exit with 2 as well.
    pub fn code(self) -> u8 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Runtime => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    fn context(mut self, prefix: impl fmt::Display) -> Self {
        self.message = format!("{prefix}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Parse { .. } => ErrorKind::Parse,
            Error::InvalidData(_)
            | Error::InvalidParams(_)
            | Error::DimensionMismatch { .. }
            | Error::Domain(_) => ErrorKind::Validation,
            _ => ErrorKind::Runtime,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::new(ErrorKind::Runtime, e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::from(e).context(path.display()))
}

fn load_matrix(path: &Path) -> Result<DataMatrix> {
    read_data_matrix(open(path)?).map_err(|e| CliError::from(e).context(path.display()))
}

/// Runs `write` against `path`, or stdout when no path is given.
fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| CliError::from(e).context(p.display()))?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, w: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::new(ErrorKind::Runtime, e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::new(
            ErrorKind::Validation,
            format!("confidence level {level} must lie in (0, 1)"),
        ))
    }
}

/// Replaces the 1-based column index of a column error by its label.
fn label_error(e: Error, data: &DataMatrix) -> CliError {
    let column = match e {
        Error::NonpositiveOrderStat { column, .. } | Error::NonpositiveThreshold { column, .. } => column,
        _ => return e.into(),
    };
    CliError::from(e).context(format!("column {:?}", data.label(column - 1)))
}

pub fn returns(args: &ReturnsArgs) -> Result<()> {
    let table = PriceTable::read_csv(open(&args.input)?).map_err(|e| CliError::from(e).context(args.input.display()))?;
    let returns = table.returns()?;
    eprintln!(
        "{} complete price rows of {}, {} return rows",
        returns.complete_rows,
        table.dates().len(),
        returns.n()
    );
    with_output(args.output.as_deref(), |w| Ok(write_returns(&returns, w)?))
}

/// Clustering parameters from the flags, filling unset values from the
/// default formulas evaluated at `n0`.
fn resolve_params(args: &ClusterArgs, p: usize, n0: usize) -> Result<(ClusterParams, [bool; 3])> {
    let k = match args.k {
        Some(k) => k,
        None if p < 2 => {
            return Err(CliError::new(
                ErrorKind::Validation,
                "the default k needs at least 2 columns; pass --k",
            ))
        }
        None => default_k(p),
    };
    let k_star = args.k_star.unwrap_or_else(|| default_k_star(n0));
    let beta = args.beta.unwrap_or_else(|| default_beta(k, k_star, p));
    let mut params = ClusterParams::new(k, k_star, beta)?;
    if let Some(g) = args.known_g {
        params = params.with_known_g(g);
    }
    Ok((params, [args.k.is_none(), args.k_star.is_none(), args.beta.is_none()]))
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    check_level(args.ci)?;
    let data = load_matrix(&args.input)?;
    let n0 = data.min_positive_count();
    let (params, defaults) = resolve_params(args, data.p(), n0)?;
    params.validate(data.n(), data.p())?;
    let (partition, trace) = run_cluster(&data, &params).map_err(|e| label_error(e, &data))?;

    let k_hill = args.k_hill.unwrap_or(params.k);
    let estimates = hill_columns(&data, k_hill).map_err(|e| label_error(e, &data))?;
    let raw: Vec<f64> = estimates.iter().map(|h| h.gamma_hat).collect();
    let aggregated = aggregate_by_partition(&raw, &partition)?;
    let labels = data.labels_or_default();
    let group_of = partition.labels();

    let columns = estimates
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let band = hill_ci(h, args.ci)?;
            Ok(ColumnEstimate {
                label: labels[j].clone(),
                group: group_of[j],
                gamma_hat: h.gamma_hat,
                k_used: h.k_used,
                ci_low: band.ci_low.unwrap_or(f64::NAN),
                ci_high: band.ci_high.unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let named = partition.named_groups(&labels);
    let groups = named
        .iter()
        .zip(&aggregated.group_gammas)
        .enumerate()
        .map(|(l, (members, &gamma))| GroupSummary {
            group: l + 1,
            members: members.clone(),
            gamma,
        })
        .collect();
    let names = |idx: &[usize]| idx.iter().map(|&j| labels[j].clone()).collect::<Vec<_>>();
    let rounds = trace
        .iterations
        .iter()
        .enumerate()
        .map(|(r, rec)| Round {
            round: r + 1,
            active: names(&rec.active),
            threshold: rec.threshold,
            statistics: rec
                .active
                .iter()
                .zip(&rec.statistics)
                .map(|(&j, &value)| Statistic {
                    label: labels[j].clone(),
                    value,
                })
                .collect(),
            extracted: names(&rec.extracted),
        })
        .collect();

    let out = ClusterOutput {
        schema_version: SCHEMA_VERSION,
        input: args.input.display().to_string(),
        n: data.n(),
        p: data.p(),
        params: ParamsUsed {
            params,
            n0,
            k_default: defaults[0],
            k_star_default: defaults[1],
            beta_default: defaults[2],
            k_hill,
            ci_level: args.ci,
        },
        partition: PartitionOut {
            groups: partition.one_based(),
            labels: named,
        },
        columns,
        groups,
        trace: rounds,
    };
    with_output(args.output.as_deref(), |w| write_json(&out, w))
}

pub fn hill(args: &HillArgs) -> Result<()> {
    check_level(args.ci)?;
    let data = load_matrix(&args.input)?;
    let k = match args.k {
        Some(k) => k,
        None if data.p() < 2 => {
            return Err(CliError::new(
                ErrorKind::Validation,
                "the default k needs at least 2 columns; pass --k",
            ))
        }
        None => default_k(data.p()),
    };
    let estimates = hill_columns(&data, k).map_err(|e| label_error(e, &data))?;
    let columns = estimates
        .into_iter()
        .enumerate()
        .map(|(j, h)| {
            Ok(HillRow {
                label: data.label(j),
                estimate: hill_ci(h, args.ci)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match args.format {
        TableFormat::Json => {
            let out = HillOutput {
                schema_version: SCHEMA_VERSION,
                input: args.input.display().to_string(),
                n: data.n(),
                k,
                ci_level: args.ci,
                ci_formula: HILL_CI_FORMULA,
                columns,
            };
            with_output(args.output.as_deref(), |w| write_json(&out, w))
        }
        TableFormat::Csv => with_output(args.output.as_deref(), |w| {
            writeln!(w, "label,gamma_hat,ci_low,ci_high,k")?;
            for row in &columns {
                let e = row.estimate;
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    csv_field(&row.label),
                    e.gamma_hat,
                    e.ci_low.unwrap_or(f64::NAN),
                    e.ci_high.unwrap_or(f64::NAN),
                    e.k_used
                )?;
            }
            Ok(())
        }),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn parse_model(name: &str) -> Result<SimModel> {
    name.parse()
        .map_err(|e: Error| CliError::new(ErrorKind::Validation, e.to_string()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::from(e).context(dir.display()))
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = SimModelSpec {
        model: parse_model(&args.model)?,
        g: args.g,
        q: args.q,
        delta: args.delta,
        n: args.n,
        seed: args.seed,
    };
    spec.validate()?;
    let (data, truth) = generate(&spec)?;
    let stem = args.name.clone().unwrap_or_else(|| {
        format!(
            "sim_{}_g{}_q{}_d{}_n{}_s{}",
            spec.model.name(),
            spec.g,
            spec.q,
            spec.delta,
            spec.n,
            spec.seed
        )
    });
    create_dir(&args.out_dir)?;
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    let json_path = args.out_dir.join(format!("{stem}.json"));
    with_output(Some(&csv_path), |w| Ok(write_data_matrix(&data, w)?))?;
    let sidecar = SimSidecar {
        schema_version: SCHEMA_VERSION,
        data_file: format!("{stem}.csv"),
        spec,
        published_model: spec.model.is_published(),
        note: (!spec.model.is_published())
            .then(|| format!("{} is a consistency-check model outside the published designs", spec.model)),
        labels: data.labels_or_default(),
        truth,
    };
    with_output(Some(&json_path), |w| write_json(&sidecar, w))?;
    println!("{}", csv_path.display());
    println!("{}", json_path.display());
    Ok(())
}

fn load_config(path: &Path) -> Result<SweepConfig> {
    let bytes = fs::read(path).map_err(|e| CliError::from(e).context(path.display()))?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        CliError::new(ErrorKind::Parse, format!("{}: {at}: {}", path.display(), e.inner()))
    })
}

fn bench_config(args: &BenchArgs) -> Result<SweepConfig> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let model = parse_model(args.model.as_deref().unwrap_or("A"))?;
            bench::preset(name, model, args.reps.unwrap_or(100), args.seed.unwrap_or(1))?
        }
        (None, Some(path)) => load_config(path)?,
        (None, None) => unreachable!("clap requires --preset or --config"),
    };
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    if let Some(seed) = args.seed {
        config.template.seed = seed;
    }
    config
        .template
        .validate()
        .map_err(|e| CliError::from(e).context("template"))?;
    Ok(config)
}

fn print_summary(report: &BenchReport) {
    println!(
        "{:<12} {:>2} {:>3} {:>5} {:>5} {:>4} {:>6} {:>6}  {:<18} {:>8} {:>9} {:>10}",
        "model", "g", "q", "delta", "n", "k", "k_star", "beta", "method", "failures", "accuracy", "mse"
    );
    let fmt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |x| format!("{x:.prec$}"));
    for cell in &report.cells {
        let pt = &cell.point;
        for m in &cell.methods {
            println!(
                "{:<12} {:>2} {:>3} {:>5} {:>5} {:>4} {:>6} {:>6.3}  {:<18} {:>8} {:>9} {:>10}",
                pt.model.name(),
                pt.g,
                pt.q,
                pt.delta,
                pt.n,
                pt.k,
                pt.k_star,
                pt.beta,
                m.method.name(),
                m.failures,
                fmt(m.mean_accuracy, 4),
                fmt(m.mean_mse, 6)
            );
        }
    }
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let config = bench_config(args)?;
    let report = bench::run_sweep(&config)?;
    create_dir(&args.out_dir)?;
    let paths: Vec<PathBuf> = [("json", ReportFormat::Json), ("csv", ReportFormat::Csv)]
        .into_iter()
        .map(|(ext, format)| {
            let path = args.out_dir.join(format!("{}.{ext}", args.name));
            fs::write(&path, bench::emit_report(&report, format))
                .map_err(|e| CliError::from(e).context(path.display()))?;
            Ok(path)
        })
        .collect::<Result<_>>()?;
    print_summary(&report);
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(k: Option<usize>, k_star: Option<usize>, beta: Option<f64>) -> ClusterArgs {
        ClusterArgs {
            input: PathBuf::new(),
            known_g: None,
            auto_g: true,
            k,
            k_star,
            beta,
            k_hill: None,
            ci: 0.95,
            output: None,
        }
    }

    #[test]
    fn defaults_fill_unset_parameters() {
        let (p, flags) = resolve_params(&args(None, None, None), 21, 5014).unwrap();
        assert_eq!((p.k, p.k_star), (default_k(21), default_k_star(5014)));
        assert_eq!(p.beta, default_beta(p.k, p.k_star, 21));
        assert_eq!(flags, [true; 3]);

        let (p, flags) = resolve_params(&args(Some(4), None, Some(0.5)), 21, 5014).unwrap();
        assert_eq!((p.k, p.beta), (4, 0.5));
        assert_eq!(flags, [false, true, false]);
    }

    #[test]
    fn default_k_needs_two_columns() {
        let e = resolve_params(&args(None, Some(10), Some(0.5)), 1, 100).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Validation);
        assert!(resolve_params(&args(Some(3), Some(10), Some(0.5)), 1, 100).is_ok());
    }

    #[test]
    fn library_errors_map_to_exit_classes() {
        let parse = Error::Parse {
            row: 2,
            column: 1,
            message: "x".into(),
        };
        assert_eq!(CliError::from(parse).kind.code(), 2);
        assert_eq!(CliError::from(Error::InvalidParams("x".into())).kind.code(), 3);
        assert_eq!(CliError::from(Error::ActiveSetExhausted { group: 2 }).kind.code(), 4);
    }

    #[test]
    fn csv_fields_are_quoted_when_needed() {
        assert_eq!(csv_field("USD"), "USD");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
