//! `wedge`: edge detection with Weibull-distribution convolution masks.
//!
//! Subcommands: `gen-mask`, `smooth`, `edges`, `compare`, `sweep`. All
//! output files are written atomically (temporary file + rename), so a
//! failing run never leaves a partial output behind.

mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wedge_core::io::{self, PgmVariant};
use wedge_core::{
    compare_edge_maps, detect_edges, magnitude_to_gray, normalize_gradient, normalize_smoothing,
    resolve_threshold, sample_mask, smooth, BorderPolicy, Detector, EdgeMap, EdgeOptions,
    GaussianSpec, GradientNorm, GrayImage, Kernel, MaskKind, SamplingGrid, ThresholdRule,
    WeibullParams,
};

/// The --center flag default on both axes, the beta=2 mode to 8 decimals.
#[allow(clippy::approx_constant)]
const DEFAULT_CENTER: f64 = 0.70710678;

/// Display for ValueEnum wrappers via their clap name.
macro_rules! fmt_value_enum {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let v = self.to_possible_value().expect("no skipped variants");
            f.write_str(v.get_name())
        }
    };
}

#[derive(Parser)]
#[command(
    name = "wedge",
    version,
    about = "Edge detection with convolution masks sampled from the 2D Weibull distribution",
    long_about = "Edge detection with convolution masks sampled from the 2D Weibull distribution.\n\
                  Defaults reproduce the reference 3x3 masks: alpha=1, beta=2, grid centered at\n\
                  2^(-1/2) with spacing 0.5."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build Weibull masks and print/write them in the kernel text format
    GenMask(GenMaskArgs),
    /// Apply a smoothing mask to a PGM image
    Smooth(SmoothArgs),
    /// Detect edges in a PGM image and write the edge map
    Edges(EdgesArgs),
    /// Compare two edge-map PGMs and print precision/recall metrics
    Compare(CompareArgs),
    /// Run the Weibull detector over a grid of (alpha, beta) values
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct MaskParams {
    /// Weibull scale parameter
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Weibull shape parameter
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Mask side length (odd, at least 3)
    #[arg(long, default_value_t = 3)]
    size: usize,
    /// Grid increment shared by both axes
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    /// Distinct y-axis increment (defaults to --spacing)
    #[arg(long)]
    spacing_y: Option<f64>,
    /// Grid center (two values; default is the beta=2 mode 2^(-1/2))
    #[arg(long, num_args = 2, value_names = ["X", "Y"],
          default_values_t = [DEFAULT_CENTER, DEFAULT_CENTER])]
    center: Vec<f64>,
}

impl MaskParams {
    fn params(&self) -> Result<WeibullParams> {
        Ok(WeibullParams::new(self.alpha, self.beta)?)
    }

    fn grid(&self) -> Result<SamplingGrid> {
        if self.size % 2 == 0 || self.size < 3 {
            bail!("size must be odd and at least 3, got {}", self.size);
        }
        let half_width = (self.size - 1) / 2;
        let spacing_y = self.spacing_y.unwrap_or(self.spacing);
        let grid = SamplingGrid::with_spacings(
            half_width,
            self.spacing,
            spacing_y,
            (self.center[0], self.center[1]),
        )?;
        if grid.has_nonpositive_coords() {
            eprintln!(
                "warning: grid extends into the nonpositive region; those samples are 0 \
                 (shrink --spacing or move --center)"
            );
        }
        Ok(grid)
    }
}

#[derive(Args, Clone)]
struct PipelineParams {
    /// Border policy for convolution
    #[arg(long, value_enum, default_value_t = BorderChoice::Replicate)]
    border: BorderChoice,
    /// Gradient magnitude norm
    #[arg(long, value_enum, default_value_t = NormChoice::L2)]
    norm: NormChoice,
    /// Threshold rule: pNN (percentile) or absolute:V
    #[arg(long, default_value = "p90", value_parser = parse_threshold)]
    threshold: ThresholdArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum BorderChoice {
    Replicate,
    Reflect,
    Zero,
}

impl From<BorderChoice> for BorderPolicy {
    fn from(c: BorderChoice) -> Self {
        match c {
            BorderChoice::Replicate => BorderPolicy::Replicate,
            BorderChoice::Reflect => BorderPolicy::Reflect,
            BorderChoice::Zero => BorderPolicy::Zero,
        }
    }
}

impl fmt::Display for BorderChoice {
    fmt_value_enum!();
}

#[derive(Clone, Copy, ValueEnum)]
enum NormChoice {
    L2,
    L1,
}

impl From<NormChoice> for GradientNorm {
    fn from(c: NormChoice) -> Self {
        match c {
            NormChoice::L2 => GradientNorm::L2,
            NormChoice::L1 => GradientNorm::L1,
        }
    }
}

impl fmt::Display for NormChoice {
    fmt_value_enum!();
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorChoice {
    Weibull,
    Sobel,
    Prewitt,
    Roberts,
    Gaussian,
}

impl fmt::Display for DetectorChoice {
    fmt_value_enum!();
}

/// Threshold flag value with its original spelling for reports.
#[derive(Clone, Debug)]
struct ThresholdArg {
    rule: ThresholdRule,
    spelled: String,
}

fn parse_threshold(s: &str) -> std::result::Result<ThresholdArg, String> {
    let rule = if let Some(v) = s.strip_prefix("absolute:") {
        let t: f64 = v
            .parse()
            .map_err(|_| format!("malformed absolute threshold {v:?}"))?;
        if !t.is_finite() || t < 0.0 {
            return Err(format!("absolute threshold must be nonnegative, got {t}"));
        }
        ThresholdRule::Absolute(t)
    } else if let Some(v) = s.strip_prefix('p') {
        let p: f64 = v.parse().map_err(|_| format!("malformed percentile {v:?}"))?;
        if !p.is_finite() || p <= 0.0 || p >= 100.0 {
            return Err(format!("percentile must lie in (0, 100), got {p}"));
        }
        ThresholdRule::Percentile(p)
    } else {
        return Err(format!(
            "threshold must look like p90 or absolute:40, got {s:?}"
        ));
    };
    Ok(ThresholdArg {
        rule,
        spelled: s.to_string(),
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum KindChoice {
    Smooth,
    Grad,
}

#[derive(Args)]
struct GenMaskArgs {
    #[command(flatten)]
    mask: MaskParams,
    /// smooth: one smoothing mask; grad: the (Mx, My) gradient pair
    #[arg(long, value_enum, default_value_t = KindChoice::Grad)]
    kind: KindChoice,
    /// Emit the raw (unnormalized) mask instead of the normalized one
    #[arg(long)]
    raw: bool,
    /// Output path; grad derives two files with _mx/_my suffixes
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SmoothArgs {
    /// Input PGM image
    input: PathBuf,
    #[command(flatten)]
    mask: MaskParams,
    /// Use a kernel file instead of building a Weibull smoothing mask
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BorderChoice::Replicate)]
    border: BorderChoice,
    /// Output PGM path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EdgesArgs {
    /// Input PGM image
    input: PathBuf,
    #[command(flatten)]
    mask: MaskParams,
    #[command(flatten)]
    pipeline: PipelineParams,
    /// Gradient operator
    #[arg(long, value_enum, default_value_t = DetectorChoice::Weibull)]
    detector: DetectorChoice,
    /// Gaussian sigma (with --detector gaussian)
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Smoothing kernel file applied before the gradient
    #[arg(long)]
    pre_smooth: Option<PathBuf>,
    /// Also write the rescaled gradient magnitude as a PGM
    #[arg(long)]
    save_magnitude: Option<PathBuf>,
    /// Output edge-map PGM path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Candidate edge-map PGM (nonzero pixels are edges)
    candidate: PathBuf,
    /// Reference edge-map PGM
    reference: PathBuf,
    /// Also write the metrics JSON to a file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Input PGM image
    input: PathBuf,
    /// Alpha values (comma separated)
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    alphas: Vec<f64>,
    /// Beta values (comma separated)
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    betas: Vec<f64>,
    /// Mask side length (odd, at least 3)
    #[arg(long, default_value_t = 3)]
    size: usize,
    /// Grid increment shared by both axes
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    /// Grid center (two values)
    #[arg(long, num_args = 2, value_names = ["X", "Y"],
          default_values_t = [DEFAULT_CENTER, DEFAULT_CENTER])]
    center: Vec<f64>,
    #[command(flatten)]
    pipeline: PipelineParams,
    /// Directory receiving edge maps and summary.json
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenMask(args) => run_gen_mask(args),
        Command::Smooth(args) => run_smooth(args),
        Command::Edges(args) => run_edges(args),
        Command::Compare(args) => run_compare(args),
        Command::Sweep(args) => run_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let (image, trailing) =
        io::read_pgm_full(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    if trailing > 0 {
        eprintln!(
            "warning: {} has {trailing} trailing bytes after the pixel data",
            path.display()
        );
    }
    Ok(image)
}

fn read_kernel(path: &Path) -> Result<Kernel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (kernel, _) =
        io::read_kernel_text(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(kernel)
}

fn print_matrix(title: &str, kernel: &Kernel) {
    output::print_stdout(&format!("{title}\n"));
    for row in kernel.coefficients().chunks(kernel.size()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.4}")).collect();
        output::print_stdout(&format!("  {}\n", cells.join(" ")));
    }
}

fn mask_metadata(mask: &MaskParams, kernel: &Kernel) -> Vec<String> {
    let mut lines = io::kernel_comments(kernel);
    lines.push(format!("# params: alpha={} beta={}", mask.alpha, mask.beta));
    lines.push(format!(
        "# grid: center={},{} spacing={},{} half_width={}",
        mask.center[0],
        mask.center[1],
        mask.spacing,
        mask.spacing_y.unwrap_or(mask.spacing),
        (mask.size - 1) / 2
    ));
    lines
}

/// Derive `<stem>_mx.<ext>` / `<stem>_my.<ext>` names for the gradient pair.
fn pair_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    base.with_file_name(name)
}

fn run_gen_mask(args: GenMaskArgs) -> Result<()> {
    let params = args.mask.params()?;
    let grid = args.mask.grid()?;
    let label = if args.raw { "raw" } else { "normalized" };
    let header = format!("alpha={} beta={}", args.mask.alpha, args.mask.beta);

    match args.kind {
        KindChoice::Grad => {
            let raw_mx = sample_mask(MaskKind::GradientX, params, &grid);
            let raw_my = sample_mask(MaskKind::GradientY, params, &grid);
            let (mx, my) = if args.raw {
                (raw_mx, raw_my)
            } else {
                (normalize_gradient(&raw_mx)?, normalize_gradient(&raw_my)?)
            };
            print_matrix(&format!("Mx ({label}, {header}):"), &mx);
            print_matrix(&format!("My ({label}, {header}):"), &my);
            if let Some(out) = &args.out {
                for (kernel, suffix) in [(&mx, "mx"), (&my, "my")] {
                    let path = pair_path(out, suffix);
                    let text =
                        io::write_kernel_text_with_comments(kernel, &mask_metadata(&args.mask, kernel));
                    output::write_atomic(&path, text.as_bytes())?;
                    output::print_stdout(&format!("wrote {}\n", path.display()));
                }
            }
        }
        KindChoice::Smooth => {
            let raw = sample_mask(MaskKind::Smoothing, params, &grid);
            let kernel = if args.raw { raw } else { normalize_smoothing(&raw)? };
            print_matrix(&format!("smoothing ({label}, {header}):"), &kernel);
            if let Some(out) = &args.out {
                let text =
                    io::write_kernel_text_with_comments(&kernel, &mask_metadata(&args.mask, &kernel));
                output::write_atomic(out, text.as_bytes())?;
                output::print_stdout(&format!("wrote {}\n", out.display()));
            }
        }
    }
    Ok(())
}

fn run_smooth(args: SmoothArgs) -> Result<()> {
    let kernel = match &args.kernel {
        Some(path) => read_kernel(path)?,
        None => {
            let params = args.mask.params()?;
            let grid = args.mask.grid()?;
            wedge_core::weibull_smoothing_mask(params, &grid)?
        }
    };
    let image = read_image(&args.input)?;
    let out = smooth(&image, &kernel, args.border.into())?;
    output::write_atomic(&args.out, &io::write_pgm(&out, PgmVariant::Binary))?;
    Ok(())
}

fn build_detector(args: &EdgesArgs) -> Result<Detector> {
    Ok(match args.detector {
        DetectorChoice::Weibull => Detector::Weibull {
            params: args.mask.params()?,
            grid: args.mask.grid()?,
        },
        DetectorChoice::Sobel => Detector::Sobel,
        DetectorChoice::Prewitt => Detector::Prewitt,
        DetectorChoice::Roberts => Detector::Roberts,
        DetectorChoice::Gaussian => {
            if args.mask.size % 2 == 0 || args.mask.size < 3 {
                bail!("size must be odd and at least 3, got {}", args.mask.size);
            }
            Detector::Gaussian(GaussianSpec::new(args.sigma, (args.mask.size - 1) / 2)?)
        }
    })
}

fn run_edges(args: EdgesArgs) -> Result<()> {
    // validate the whole configuration before touching any file
    let detector = build_detector(&args)?;
    let pre_smooth = match &args.pre_smooth {
        Some(path) => Some(read_kernel(path)?),
        None => None,
    };
    let options = EdgeOptions {
        pre_smooth,
        border: args.pipeline.border.into(),
        norm: args.pipeline.norm.into(),
        rule: args.pipeline.threshold.rule,
    };

    let image = read_image(&args.input)?;
    let (edges, field) = detect_edges(&image, &detector, &options)?;
    let resolved = resolve_threshold(&field.magnitude, options.rule)?;

    output::write_atomic(&args.out, &io::write_pgm(&edges.to_gray(), PgmVariant::Binary))?;
    if let Some(path) = &args.save_magnitude {
        let gray = magnitude_to_gray(&field.magnitude);
        output::write_atomic(path, &io::write_pgm(&gray, PgmVariant::Binary))?;
    }

    let mut report = json!({
        "detector": args.detector.to_string(),
        "border": args.pipeline.border.to_string(),
        "norm": args.pipeline.norm.to_string(),
        "threshold_rule": args.pipeline.threshold.spelled,
        "threshold_resolved": resolved,
        "edge_count": edges.edge_count(),
        "edge_density": edges.density(),
        "width": image.width(),
        "height": image.height(),
        "output": args.out.display().to_string(),
    });
    let obj = report.as_object_mut().expect("report is an object");
    match args.detector {
        DetectorChoice::Weibull => {
            obj.insert("alpha".into(), json!(args.mask.alpha));
            obj.insert("beta".into(), json!(args.mask.beta));
            obj.insert("size".into(), json!(args.mask.size));
        }
        DetectorChoice::Gaussian => {
            obj.insert("sigma".into(), json!(args.sigma));
            obj.insert("size".into(), json!(args.mask.size));
        }
        _ => {}
    }
    if let Some(path) = &args.save_magnitude {
        obj.insert("magnitude_output".into(), json!(path.display().to_string()));
    }
    output::print_stdout(&format!("{}\n", serde_json::to_string_pretty(&report)?));
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<()> {
    let candidate = EdgeMap::from_gray(&read_image(&args.candidate)?);
    let reference = EdgeMap::from_gray(&read_image(&args.reference)?);
    let metrics = compare_edge_maps(&candidate, &reference)?;
    let json = io::write_metrics_json(&metrics);
    if let Some(out) = &args.out {
        output::write_atomic(out, json.as_bytes())?;
    }
    output::print_stdout(&json);
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    if args.size % 2 == 0 || args.size < 3 {
        bail!("size must be odd and at least 3, got {}", args.size);
    }
    let half_width = (args.size - 1) / 2;
    let grid = SamplingGrid::new(half_width, args.spacing, (args.center[0], args.center[1]))?;
    if grid.has_nonpositive_coords() {
        eprintln!("warning: grid extends into the nonpositive region; those samples are 0");
    }
    let options = EdgeOptions {
        pre_smooth: None,
        border: args.pipeline.border.into(),
        norm: args.pipeline.norm.into(),
        rule: args.pipeline.threshold.rule,
    };

    let image = read_image(&args.input)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let mut cells = Vec::new();
    for &alpha in &args.alphas {
        for &beta in &args.betas {
            let cell = run_sweep_cell(&image, alpha, beta, &grid, &options, &args);
            cells.push(match cell {
                Ok(value) => value,
                Err(e) => json!({
                    "alpha": alpha,
                    "beta": beta,
                    "status": "error",
                    "error": format!("{e:#}"),
                }),
            });
        }
    }

    let summary = json!({
        "input": args.input.display().to_string(),
        "width": image.width(),
        "height": image.height(),
        "border": args.pipeline.border.to_string(),
        "norm": args.pipeline.norm.to_string(),
        "threshold_rule": args.pipeline.threshold.spelled,
        "cells": cells,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&summary)?);
    output::write_atomic(&args.out_dir.join("summary.json"), text.as_bytes())?;
    output::print_stdout(&text);
    Ok(())
}

fn run_sweep_cell(
    image: &GrayImage,
    alpha: f64,
    beta: f64,
    grid: &SamplingGrid,
    options: &EdgeOptions,
    args: &SweepArgs,
) -> Result<serde_json::Value> {
    let detector = Detector::Weibull {
        params: WeibullParams::new(alpha, beta)?,
        grid: *grid,
    };
    let (edges, field) = detect_edges(image, &detector, options)?;
    let resolved = resolve_threshold(&field.magnitude, options.rule)?;
    let name = format!("edges_a{alpha}_b{beta}.pgm");
    let path = args.out_dir.join(&name);
    output::write_atomic(&path, &io::write_pgm(&edges.to_gray(), PgmVariant::Binary))?;
    Ok(json!({
        "alpha": alpha,
        "beta": beta,
        "status": "ok",
        "file": name,
        "threshold_resolved": resolved,
        "edge_density": edges.density(),
    }))
}
