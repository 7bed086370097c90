//! The matrix / conv / network / compare subcommands.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use lip4::conv::{
    self, conv_power_iteration, exact_conv_spectrum, gram_conv, gram_conv_subsampled,
    materialize_conv_operator, ConvBoundReport, ConvKernel, Padding,
};
use lip4::dense::{
    gram_eigen, gram_naive, gram_rescaled, power_iteration, DenseMethod, EstimateReport,
};
use lip4::linalg::{svd, ComplexMatrix};
use lip4::network::{load_network, network_bound, BoundMethod};
use lip4::{lipk, synth};

use crate::output::{emit, emit_json, OutFormat};
use crate::CliError;

// ---------------------------------------------------------------------------
// matrix

#[derive(Args)]
pub struct MatrixArgs {
    /// LIPK file holding the matrix (rows x cols x 1 x 1)
    #[arg(long, conflicts_with_all = ["rows", "cols"])]
    pub input: Option<PathBuf>,
    /// Synthetic seeded Gaussian matrix: row count
    #[arg(long, requires = "cols")]
    pub rows: Option<usize>,
    /// Synthetic seeded Gaussian matrix: column count
    #[arg(long, requires = "rows")]
    pub cols: Option<usize>,
    /// Draw complex Gaussian entries for the synthetic matrix
    #[arg(long)]
    pub complex: bool,
    /// Estimator: power | gram | gram-naive | svd | eigen
    #[arg(long, default_value = "gram")]
    pub method: String,
    /// Iteration count (defaults: gram/gram-naive/eigen 12, power 100)
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the per-iteration value and absolute error vs the SVD reference
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutFormat>,
}

#[derive(Serialize)]
struct MatrixOutput {
    method: DenseMethod,
    value: f64,
    iterations: usize,
    elapsed_seconds: f64,
    trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_error_trace: Option<Vec<f64>>,
}

pub fn run_matrix(args: MatrixArgs) -> Result<(), CliError> {
    ensure_positive_iters(args.iters)?;
    let matrix = load_matrix(&args)?;
    let report = run_dense_method(&matrix, &args.method, args.iters, args.seed)?;

    let reference = if args.trace {
        Some(svd(&matrix)?.spectral_norm())
    } else {
        None
    };
    let abs_errors = reference.map(|r| report.trace.iter().map(|v| (v - r).abs()).collect::<Vec<_>>());

    match args.format {
        Some(OutFormat::Json) => {
            let payload = MatrixOutput {
                method: report.method,
                value: report.value,
                iterations: report.iterations,
                elapsed_seconds: report.elapsed_seconds,
                trace: report.trace,
                reference,
                abs_error_trace: abs_errors,
            };
            emit_json(args.out.as_deref(), &payload)
        }
        Some(OutFormat::Csv) | None if args.trace => {
            let mut csv = String::from("# lip4-matrix-trace-csv v1\niter,value,abs_error\n");
            let abs_errors = abs_errors.expect("trace implies reference");
            for (i, (v, e)) in report.trace.iter().zip(&abs_errors).enumerate() {
                csv.push_str(&format!("{},{},{}\n", i + 1, v, e));
            }
            emit(args.out.as_deref(), &csv)
        }
        Some(OutFormat::Csv) => {
            let csv = format!(
                "# lip4-matrix-csv v1\nmethod,value,iterations,elapsed_s\n{},{},{},{}\n",
                report.method, report.value, report.iterations, report.elapsed_seconds
            );
            emit(args.out.as_deref(), &csv)
        }
        None => emit(
            args.out.as_deref(),
            &format!(
                "method={} value={} iterations={} elapsed_s={:.6}",
                report.method, report.value, report.iterations, report.elapsed_seconds
            ),
        ),
    }
}

fn load_matrix(args: &MatrixArgs) -> Result<ComplexMatrix, CliError> {
    if let Some(path) = &args.input {
        return Ok(lipk::read_matrix(path)?);
    }
    match (args.rows, args.cols) {
        (Some(rows), Some(cols)) if rows > 0 && cols > 0 => Ok(if args.complex {
            synth::gaussian_complex_matrix(rows, cols, args.seed)
        } else {
            synth::gaussian_matrix(rows, cols, args.seed)
        }),
        _ => Err(CliError::Usage(
            "provide either --input FILE or both --rows and --cols (positive)".into(),
        )),
    }
}

fn run_dense_method(
    matrix: &ComplexMatrix,
    method: &str,
    iters: Option<usize>,
    seed: u64,
) -> Result<EstimateReport, CliError> {
    match method {
        "power" => Ok(power_iteration(matrix, iters.unwrap_or(100), seed)?),
        "gram" => Ok(gram_rescaled(matrix, iters.unwrap_or(12))),
        "gram-naive" => Ok(gram_naive(matrix, iters.unwrap_or(12))?),
        "eigen" => Ok(gram_eigen(matrix, iters.unwrap_or(12))?),
        "svd" => {
            let start = Instant::now();
            let value = svd(matrix)?.spectral_norm();
            Ok(EstimateReport {
                method: DenseMethod::SvdExact,
                value,
                trace: vec![value],
                iterations: 1,
                elapsed_seconds: start.elapsed().as_secs_f64(),
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown matrix method {other:?}; expected power | gram | gram-naive | svd | eigen"
        ))),
    }
}

// ---------------------------------------------------------------------------
// conv

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PaddingArg {
    Circular,
    Zero,
}

impl From<PaddingArg> for Padding {
    fn from(p: PaddingArg) -> Self {
        match p {
            PaddingArg::Circular => Padding::Circular,
            PaddingArg::Zero => Padding::Zero,
        }
    }
}

#[derive(Args)]
pub struct ConvArgs {
    /// LIPK file holding the filter (c_out x c_in x k x k)
    #[arg(long)]
    pub kernel: PathBuf,
    /// Input spatial size
    #[arg(long)]
    pub n: usize,
    /// Estimator: gram | exact | power
    #[arg(long, default_value = "gram")]
    pub method: String,
    /// Iteration count (defaults: gram 5, power 100)
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sub-sampled spatial size for the gram method (k <= n0 <= n)
    #[arg(long)]
    pub n0: Option<usize>,
    /// Padding for the power method (gram/exact are circular by definition)
    #[arg(long, value_enum, default_value_t = PaddingArg::Zero)]
    pub padding: PaddingArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutFormat>,
}

pub fn run_conv(args: ConvArgs) -> Result<(), CliError> {
    ensure_positive_iters(args.iters)?;
    let tensor = lipk::read_tensor(&args.kernel)?;
    let report = match args.method.as_str() {
        "gram" => {
            let kernel = ConvKernel::new(tensor, args.n, Padding::Circular)?;
            match args.n0 {
                Some(n0) => gram_conv_subsampled(&kernel, n0, args.iters.unwrap_or(5))?,
                None => gram_conv(&kernel, args.iters.unwrap_or(5))?,
            }
        }
        "exact" => {
            if args.n0.is_some() {
                return Err(CliError::Usage("--n0 only applies to the gram method".into()));
            }
            let kernel = ConvKernel::new(tensor, args.n, Padding::Circular)?;
            exact_conv_spectrum(&kernel)?
        }
        "power" => {
            if args.n0.is_some() {
                return Err(CliError::Usage("--n0 only applies to the gram method".into()));
            }
            let kernel = ConvKernel::new(tensor, args.n, args.padding.into())?;
            conv_power_iteration(&kernel, args.iters.unwrap_or(100), args.seed)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown conv method {other:?}; expected gram | exact | power"
            )))
        }
    };
    emit_conv_report(&report, args.out.as_deref(), args.format)
}

fn emit_conv_report(
    report: &ConvBoundReport,
    out: Option<&std::path::Path>,
    format: Option<OutFormat>,
) -> Result<(), CliError> {
    match format {
        Some(OutFormat::Json) => emit_json(out, report),
        Some(OutFormat::Csv) => {
            let (u, v) = report
                .argmax_block
                .map(|(u, v)| (u.to_string(), v.to_string()))
                .unwrap_or_default();
            let csv = format!(
                "# lip4-conv-csv v1\nmethod,value,argmax_u,argmax_v,iterations,elapsed_s\n{},{},{},{},{},{}\n",
                report.method, report.value, u, v, report.iterations, report.elapsed_seconds
            );
            emit(out, &csv)
        }
        None => {
            let argmax = report
                .argmax_block
                .map(|(u, v)| format!(" argmax=({u},{v})"))
                .unwrap_or_default();
            emit(
                out,
                &format!(
                    "method={} value={}{} iterations={} elapsed_s={:.6}",
                    report.method, report.value, argmax, report.iterations, report.elapsed_seconds
                ),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// network

#[derive(Args)]
pub struct NetworkArgs {
    /// JSON network spec; conv/dense layers reference LIPK files
    #[arg(long)]
    pub spec: PathBuf,
    /// Estimator for conv/dense layers: gram | exact | power
    #[arg(long, default_value = "gram")]
    pub method: String,
    /// Iteration count for the iterative estimators
    #[arg(long, default_value_t = 7)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutFormat>,
}

pub fn run_network(args: NetworkArgs) -> Result<(), CliError> {
    ensure_positive_iters(Some(args.iters))?;
    let method = parse_bound_method(&args.method)?;
    let net = load_network(&args.spec)?;
    let report = network_bound(&net, method, args.iters, args.seed)?;

    match args.format {
        Some(OutFormat::Json) => emit_json(args.out.as_deref(), &report),
        Some(OutFormat::Csv) => {
            let mut csv = String::from("# lip4-network-csv v1\nindex,kind,shape,bound,elapsed_s\n");
            for layer in &report.per_layer {
                csv.push_str(&format!(
                    "{},{},\"{}\",{},{}\n",
                    layer.index, layer.kind, layer.shape, layer.bound, layer.elapsed_seconds
                ));
            }
            csv.push_str(&format!("total,,,{},\n", report.total));
            emit(args.out.as_deref(), &csv)
        }
        None => {
            let mut text = format!("network bound ({} method, {} iters)\n", report.method, args.iters);
            text.push_str(&format!(
                "{:<6} {:<16} {:<24} {:<24} {}\n",
                "layer", "kind", "shape", "bound", "time_s"
            ));
            for layer in &report.per_layer {
                text.push_str(&format!(
                    "{:<6} {:<16} {:<24} {:<24} {:.6}\n",
                    layer.index, layer.kind, layer.shape, layer.bound, layer.elapsed_seconds
                ));
            }
            text.push_str(&format!("total = {}", report.total));
            emit(args.out.as_deref(), &text)
        }
    }
}

fn ensure_positive_iters(iters: Option<usize>) -> Result<(), CliError> {
    if iters == Some(0) {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    Ok(())
}

fn parse_bound_method(name: &str) -> Result<BoundMethod, CliError> {
    match name {
        "gram" => Ok(BoundMethod::Gram),
        "exact" => Ok(BoundMethod::Exact),
        "power" => Ok(BoundMethod::Power),
        other => Err(CliError::Usage(format!(
            "unknown network method {other:?}; expected gram | exact | power"
        ))),
    }
}

// ---------------------------------------------------------------------------
// compare

#[derive(Args)]
pub struct CompareArgs {
    /// LIPK file holding the filter
    #[arg(long)]
    pub kernel: PathBuf,
    /// Input spatial size
    #[arg(long)]
    pub n: usize,
    /// Gram iterations for the circular bound
    #[arg(long, default_value_t = 12)]
    pub iters: usize,
    /// Power iterations for the zero-padding baseline
    #[arg(long, default_value_t = 2000)]
    pub power_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutFormat>,
}

#[derive(Serialize)]
struct CompareOutput {
    circular_gram: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    circular_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

pub fn run_compare(args: CompareArgs) -> Result<(), CliError> {
    ensure_positive_iters(Some(args.iters))?;
    ensure_positive_iters(Some(args.power_iters))?;
    let tensor = lipk::read_tensor(&args.kernel)?;
    let circular = ConvKernel::new(tensor.clone(), args.n, Padding::Circular)?;
    let gram = gram_conv(&circular, args.iters)?;

    // The zero-padding side is only reported when the materialization guard
    // admits its ground-truth oracle.
    let within_guard = circular.c_out() * args.n * args.n <= conv::MATERIALIZE_LIMIT
        && circular.c_in() * args.n * args.n <= conv::MATERIALIZE_LIMIT;

    let payload = if within_guard {
        let zero = ConvKernel::new(tensor, args.n, Padding::Zero)?;
        let pi = conv_power_iteration(&zero, args.power_iters, args.seed)?;
        let circ_exact = svd(&materialize_conv_operator(&circular)?)?.spectral_norm();
        let zero_exact = svd(&materialize_conv_operator(&zero)?)?.spectral_norm();
        CompareOutput {
            circular_gram: gram.value,
            zero_power: Some(pi.value),
            gap: Some(gram.value - pi.value),
            circular_exact: Some(circ_exact),
            zero_exact: Some(zero_exact),
            warning: None,
        }
    } else {
        let warning = format!(
            "operator exceeds the materialization guard ({} per side); zero-padding comparison skipped",
            conv::MATERIALIZE_LIMIT
        );
        eprintln!("warning: {warning}");
        CompareOutput {
            circular_gram: gram.value,
            zero_power: None,
            gap: None,
            circular_exact: None,
            zero_exact: None,
            warning: Some(warning),
        }
    };

    match args.format {
        Some(OutFormat::Json) => emit_json(args.out.as_deref(), &payload),
        Some(OutFormat::Csv) => {
            let field = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let csv = format!(
                "# lip4-compare-csv v1\ncircular_gram,zero_power,gap,circular_exact,zero_exact\n{},{},{},{},{}\n",
                payload.circular_gram,
                field(payload.zero_power),
                field(payload.gap),
                field(payload.circular_exact),
                field(payload.zero_exact)
            );
            emit(args.out.as_deref(), &csv)
        }
        None => {
            let mut text = format!("circular gram bound: {}\n", payload.circular_gram);
            if let (Some(pi), Some(gap)) = (payload.zero_power, payload.gap) {
                text.push_str(&format!("zero-padding power-iteration estimate: {pi}\n"));
                text.push_str(&format!("signed gap (circular - zero): {gap}\n"));
            }
            if let (Some(ce), Some(ze)) = (payload.circular_exact, payload.zero_exact) {
                text.push_str(&format!("circular exact sigma1 (materialized): {ce}\n"));
                text.push_str(&format!("zero exact sigma1 (materialized): {ze}\n"));
            }
            emit(args.out.as_deref(), text.trim_end())
        }
    }
}
