//! The `bench` subcommand: sweep a grid of synthetic problems, run every
//! configured method on the same instances, and emit a CSV or JSON dataset
//! with per-sample rows and mean/std aggregates.
//!
//! Instances are seeded deterministically from the config seed, so the value
//! columns of two runs of the same config are byte-identical; only the
//! timing columns vary. Rows are emitted in grid order regardless of how the
//! worker pool schedules them.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use lip4::conv::{conv_power_iteration, exact_conv_spectrum, gram_conv, ConvKernel, Padding};
use lip4::dense::{gram_naive, gram_rescaled, power_iteration};
use lip4::linalg::svd;
use lip4::{batch, synth};

use crate::output::{emit, OutFormat};
use crate::CliError;

#[derive(Args)]
pub struct BenchArgs {
    /// JSON bench configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Output path (overrides the config)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (overrides the config) [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<OutFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfig {
    kind: BenchKind,
    grid: GridSpec,
    methods: Vec<MethodSpec>,
    /// Label (or bare method name) of the method whose value the signed
    /// differences are taken against; must be in `methods`.
    reference: String,
    #[serde(default = "one")]
    repetitions: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    out: Option<String>,
    #[serde(default)]
    format: Option<OutFormat>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BenchKind {
    Matrix,
    Conv,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GridSpec {
    rows: Vec<usize>,
    cols: Vec<usize>,
    c_in: Vec<usize>,
    c_out: Vec<usize>,
    n: Vec<usize>,
    k: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethodSpec {
    method: String,
    #[serde(default)]
    iters: Option<usize>,
    #[serde(default)]
    label: Option<String>,
}

/// One resolved method column.
#[derive(Debug, Clone)]
struct Method {
    name: String,
    iters: usize,
    label: String,
}

/// One grid point; `rows/cols` double as `(c_out*, c_in*)` never — matrix
/// and conv points are kept separate.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Point {
    Matrix { rows: usize, cols: usize },
    Conv { c_in: usize, c_out: usize, n: usize, k: usize },
}

#[derive(Debug, Serialize)]
struct SampleRow {
    #[serde(flatten)]
    point: PointFields,
    rep: usize,
    method: String,
    iters: usize,
    value: f64,
    diff: f64,
    err_ratio: f64,
    abs_err_ratio: f64,
    elapsed_s: f64,
}

#[derive(Debug, Serialize)]
struct AggregateRow {
    #[serde(flatten)]
    point: PointFields,
    method: String,
    iters: usize,
    statistic: String,
    value: f64,
    diff: f64,
    err_ratio: f64,
    abs_err_ratio: f64,
    elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
enum PointFields {
    Matrix { rows: usize, cols: usize },
    Conv { c_in: usize, c_out: usize, n: usize, k: usize },
}

impl From<Point> for PointFields {
    fn from(p: Point) -> Self {
        match p {
            Point::Matrix { rows, cols } => PointFields::Matrix { rows, cols },
            Point::Conv { c_in, c_out, n, k } => PointFields::Conv { c_in, c_out, n, k },
        }
    }
}

pub fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("cannot read {:?}: {e}", args.config)))?;
    let config: BenchConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("bad bench config: {e}")))?;

    let methods = resolve_methods(&config)?;
    let reference = methods
        .iter()
        .position(|m| m.label == config.reference || m.name == config.reference)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "reference method {:?} absent from the method set",
                config.reference
            ))
        })?;
    let points = resolve_grid(&config)?;
    if config.repetitions < 1 {
        return Err(CliError::Usage("repetitions must be >= 1".into()));
    }

    // One work item per (grid point, repetition); the instance seed derives
    // from the config seed and the flat instance index.
    let instances: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|gp| (0..config.repetitions).map(move |rep| (gp, rep)))
        .collect();

    let results: Vec<Result<Vec<(f64, f64)>, CliError>> = batch::map(&instances, |&(gp, rep)| {
        let iseed = synth::mix_seed(config.seed, (gp * config.repetitions + rep) as u64);
        run_instance(points[gp], &methods, iseed)
    });

    let mut samples = Vec::with_capacity(instances.len() * methods.len());
    for (&(gp, rep), result) in instances.iter().zip(results) {
        let per_method = result?;
        let ref_value = per_method[reference].0;
        for (m, &(value, elapsed)) in methods.iter().zip(&per_method) {
            let diff = value - ref_value;
            let err_ratio = if ref_value != 0.0 { value / ref_value - 1.0 } else { 0.0 };
            samples.push(SampleRow {
                point: points[gp].into(),
                rep,
                method: m.label.clone(),
                iters: m.iters,
                value,
                diff,
                err_ratio,
                abs_err_ratio: err_ratio.abs(),
                elapsed_s: elapsed,
            });
        }
    }

    let aggregates = aggregate(&points, &methods, &samples, config.repetitions);

    let out = args
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from));
    let format = args.format.or(config.format).unwrap_or(OutFormat::Csv);
    match format {
        OutFormat::Csv => emit(
            out.as_deref(),
            &render_csv(&config, &samples, &aggregates),
        ),
        OutFormat::Json => {
            #[derive(Serialize)]
            struct Payload<'a> {
                kind: &'a str,
                seed: u64,
                repetitions: usize,
                reference: &'a str,
                samples: &'a [SampleRow],
                aggregates: &'a [AggregateRow],
            }
            let payload = Payload {
                kind: match config.kind {
                    BenchKind::Matrix => "matrix",
                    BenchKind::Conv => "conv",
                },
                seed: config.seed,
                repetitions: config.repetitions,
                reference: &config.reference,
                samples: &samples,
                aggregates: &aggregates,
            };
            let text = serde_json::to_string_pretty(&payload)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            emit(out.as_deref(), &text)
        }
    }
}

fn resolve_methods(config: &BenchConfig) -> Result<Vec<Method>, CliError> {
    if config.methods.is_empty() {
        return Err(CliError::Usage("method set is empty".into()));
    }
    let valid: &[&str] = match config.kind {
        BenchKind::Matrix => &["gram", "gram-naive", "power", "svd"],
        BenchKind::Conv => &["gram", "exact", "power"],
    };
    let mut methods = Vec::with_capacity(config.methods.len());
    for spec in &config.methods {
        if !valid.contains(&spec.method.as_str()) {
            return Err(CliError::Usage(format!(
                "method {:?} is not valid for a {:?} bench (choose from {valid:?})",
                spec.method, config.kind
            )));
        }
        let iters = spec.iters.unwrap_or(match spec.method.as_str() {
            "power" => 100,
            "svd" | "exact" => 0,
            _ => 5,
        });
        if iters == 0 && !matches!(spec.method.as_str(), "svd" | "exact") {
            return Err(CliError::Usage(format!(
                "method {:?} needs iters >= 1",
                spec.method
            )));
        }
        let label = spec.label.clone().unwrap_or_else(|| {
            if spec.iters.is_some() {
                format!("{}@{}", spec.method, iters)
            } else {
                spec.method.clone()
            }
        });
        if methods.iter().any(|m: &Method| m.label == label) {
            return Err(CliError::Usage(format!("duplicate method label {label:?}")));
        }
        methods.push(Method {
            name: spec.method.clone(),
            iters,
            label,
        });
    }
    Ok(methods)
}

fn resolve_grid(config: &BenchConfig) -> Result<Vec<Point>, CliError> {
    let g = &config.grid;
    match config.kind {
        BenchKind::Matrix => {
            if g.rows.is_empty() || g.cols.is_empty() {
                return Err(CliError::Usage("matrix grid needs rows and cols".into()));
            }
            if !(g.c_in.is_empty() && g.c_out.is_empty() && g.n.is_empty() && g.k.is_empty()) {
                return Err(CliError::Usage(
                    "matrix grid must not set c_in/c_out/n/k".into(),
                ));
            }
            Ok(g.rows
                .iter()
                .flat_map(|&rows| g.cols.iter().map(move |&cols| Point::Matrix { rows, cols }))
                .collect())
        }
        BenchKind::Conv => {
            if g.c_in.is_empty() || g.c_out.is_empty() || g.n.is_empty() || g.k.is_empty() {
                return Err(CliError::Usage("conv grid needs c_in, c_out, n and k".into()));
            }
            if !(g.rows.is_empty() && g.cols.is_empty()) {
                return Err(CliError::Usage("conv grid must not set rows/cols".into()));
            }
            let mut points = Vec::new();
            for &c_in in &g.c_in {
                for &c_out in &g.c_out {
                    for &n in &g.n {
                        for &k in &g.k {
                            if k > n {
                                return Err(CliError::Usage(format!(
                                    "grid point has k={k} > n={n}"
                                )));
                            }
                            points.push(Point::Conv { c_in, c_out, n, k });
                        }
                    }
                }
            }
            Ok(points)
        }
    }
}

/// Runs every method on one seeded instance; returns (value, elapsed) per
/// method in order.
fn run_instance(point: Point, methods: &[Method], iseed: u64) -> Result<Vec<(f64, f64)>, CliError> {
    match point {
        Point::Matrix { rows, cols } => {
            let g = synth::gaussian_matrix(rows, cols, iseed);
            methods
                .iter()
                .enumerate()
                .map(|(mi, m)| -> Result<(f64, f64), CliError> {
                    match m.name.as_str() {
                        "gram" => {
                            let r = gram_rescaled(&g, m.iters);
                            Ok((r.value, r.elapsed_seconds))
                        }
                        "gram-naive" => {
                            let r = gram_naive(&g, m.iters)?;
                            Ok((r.value, r.elapsed_seconds))
                        }
                        "power" => {
                            let r =
                                power_iteration(&g, m.iters, synth::mix_seed(iseed, 1 + mi as u64))?;
                            Ok((r.value, r.elapsed_seconds))
                        }
                        "svd" => {
                            let start = Instant::now();
                            let value = svd(&g)?.spectral_norm();
                            Ok((value, start.elapsed().as_secs_f64()))
                        }
                        _ => unreachable!("validated in resolve_methods"),
                    }
                })
                .collect()
        }
        Point::Conv { c_in, c_out, n, k } => {
            let filter = synth::gaussian_kernel(c_out, c_in, k, iseed);
            methods
                .iter()
                .enumerate()
                .map(|(mi, m)| -> Result<(f64, f64), CliError> {
                    match m.name.as_str() {
                        "gram" => {
                            let kernel = ConvKernel::new(filter.clone(), n, Padding::Circular)?;
                            let r = gram_conv(&kernel, m.iters)?;
                            Ok((r.value, r.elapsed_seconds))
                        }
                        "exact" => {
                            let kernel = ConvKernel::new(filter.clone(), n, Padding::Circular)?;
                            let r = exact_conv_spectrum(&kernel)?;
                            Ok((r.value, r.elapsed_seconds))
                        }
                        "power" => {
                            // Zero-padding baseline on the same filter.
                            let kernel = ConvKernel::new(filter.clone(), n, Padding::Zero)?;
                            let r = conv_power_iteration(
                                &kernel,
                                m.iters,
                                synth::mix_seed(iseed, 1 + mi as u64),
                            )?;
                            Ok((r.value, r.elapsed_seconds))
                        }
                        _ => unreachable!("validated in resolve_methods"),
                    }
                })
                .collect()
        }
    }
}

fn aggregate(
    points: &[Point],
    methods: &[Method],
    samples: &[SampleRow],
    reps: usize,
) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for (gp, &point) in points.iter().enumerate() {
        for m in methods {
            let chunk: Vec<&SampleRow> = samples
                [gp * reps * methods.len()..(gp + 1) * reps * methods.len()]
                .iter()
                .filter(|s| s.method == m.label)
                .collect();
            let stats = |f: &dyn Fn(&SampleRow) -> f64| -> (f64, f64) {
                let xs: Vec<f64> = chunk.iter().map(|s| f(s)).collect();
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let std = if xs.len() > 1 {
                    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                        / (xs.len() - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                (mean, std)
            };
            let value = stats(&|s| s.value);
            let diff = stats(&|s| s.diff);
            let err_ratio = stats(&|s| s.err_ratio);
            let abs_err = stats(&|s| s.abs_err_ratio);
            let elapsed = stats(&|s| s.elapsed_s);
            for (idx, statistic) in ["mean", "std"].iter().enumerate() {
                let pick = |pair: (f64, f64)| if idx == 0 { pair.0 } else { pair.1 };
                rows.push(AggregateRow {
                    point: point.into(),
                    method: m.label.clone(),
                    iters: m.iters,
                    statistic: statistic.to_string(),
                    value: pick(value),
                    diff: pick(diff),
                    err_ratio: pick(err_ratio),
                    abs_err_ratio: pick(abs_err),
                    elapsed_s: pick(elapsed),
                });
            }
        }
    }
    rows
}

fn render_csv(config: &BenchConfig, samples: &[SampleRow], aggregates: &[AggregateRow]) -> String {
    let (kind, point_header) = match config.kind {
        BenchKind::Matrix => ("matrix", "rows,cols"),
        BenchKind::Conv => ("conv", "c_in,c_out,n,k"),
    };
    let mut csv = format!(
        "# lip4-bench-csv v1 kind={kind} seed={} repetitions={} reference={}\n",
        config.seed, config.repetitions, config.reference
    );
    csv.push_str(&format!(
        "row,{point_header},rep,method,iters,value,diff,err_ratio,abs_err_ratio,elapsed_s\n"
    ));
    let point_cells = |p: &PointFields| match *p {
        PointFields::Matrix { rows, cols } => format!("{rows},{cols}"),
        PointFields::Conv { c_in, c_out, n, k } => format!("{c_in},{c_out},{n},{k}"),
    };
    for s in samples {
        csv.push_str(&format!(
            "sample,{},{},{},{},{},{},{},{},{}\n",
            point_cells(&s.point),
            s.rep,
            s.method,
            s.iters,
            s.value,
            s.diff,
            s.err_ratio,
            s.abs_err_ratio,
            s.elapsed_s
        ));
    }
    for a in aggregates {
        csv.push_str(&format!(
            "{},{},,{},{},{},{},{},{},{}\n",
            a.statistic,
            point_cells(&a.point),
            a.method,
            a.iters,
            a.value,
            a.diff,
            a.err_ratio,
            a.abs_err_ratio,
            a.elapsed_s
        ));
    }
    csv
}
