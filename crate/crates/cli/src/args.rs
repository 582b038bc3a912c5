use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cellscape", version, about = "Spatial and topological descriptors of cell layouts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-class enriched persistence diagrams, cross-K matrix and diagram features.
    Analyze(AnalyzeArgs),
    /// Metrics of a generated layout against a reference layout.
    Compare(CompareArgs),
    /// Optimize a new layout that matches a reference layout's descriptors.
    Synthesize(SynthesizeArgs),
    /// Log-histogram feature vectors of the per-class diagrams.
    Vectorize(VectorizeArgs),
    /// Draw a layout (and optionally its holes) as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for cellscape::io::LayoutFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => cellscape::io::LayoutFormat::Csv,
            FormatArg::Json => cellscape::io::LayoutFormat::Json,
        }
    }
}

/// Descriptor overrides shared by the analysis subcommands. Lengths are in
/// layout units.
#[derive(Debug, Clone, Default, Args)]
pub struct DescriptorArgs {
    /// Comma-separated K-function radii.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub radii: Option<Vec<f64>>,
    /// Comma-separated density bandwidths.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub sigmas: Option<Vec<f64>>,
    /// Distance-transform grid spacing.
    #[arg(long = "grid-h")]
    pub grid_h: Option<f64>,
    /// Layout file format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    pub layout: PathBuf,
    #[command(flatten)]
    pub descriptors: DescriptorArgs,
    /// Comma-separated persistence bucket edges, starting at 0.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub buckets: Option<Vec<f64>>,
    /// Also compute the diagram of all cells regardless of class.
    #[arg(long)]
    pub union_diagram: bool,
    /// Write the JSON report here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub generated: PathBuf,
    pub reference: PathBuf,
    #[command(flatten)]
    pub descriptors: DescriptorArgs,
    /// Write the JSON report to this file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print the JSON report instead of the text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthesizeArgs {
    pub reference: PathBuf,
    /// Synthesized layout; format from `--format` or the extension.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Trace CSV; defaults to `<output>.trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// JSON synthesis configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Optimization-time overrides (`--grid-h` is the synthesis grid).
    #[command(flatten)]
    pub descriptors: DescriptorArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long = "lambda-cc")]
    pub lambda_cc: Option<f64>,
    #[arg(long = "lambda-k")]
    pub lambda_k: Option<f64>,
    #[arg(long = "min-separation")]
    pub min_separation: Option<f64>,
    /// Also write the initial mesh layout to this file.
    #[arg(long = "emit-init")]
    pub emit_init: Option<PathBuf>,
    /// Write the JSON run summary to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VectorizeArgs {
    pub layout: PathBuf,
    #[command(flatten)]
    pub descriptors: DescriptorArgs,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub buckets: Option<Vec<f64>>,
    #[arg(long)]
    pub union_diagram: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    pub layout: PathBuf,
    /// Report from `analyze` whose holes are drawn over the layout.
    #[arg(long)]
    pub diagram: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}
