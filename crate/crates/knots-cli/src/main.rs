//! `knots`: measure, tighten, analyze, and generate polygonal knots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use knots_core::analysis::{
    distribution_stats, fit_scaling, histogram, pearson, quantization_sweep, residual_writhe,
    uniform_null_sd, FitModel, InvariantRecord,
};
use knots_core::geom::{ropelength, thickness, Link, PolygonalKnot};
use knots_core::invariants::{average_crossing_number, space_writhe};
use knots_core::io::{
    batch_run, fnv1a, make_hopf_chain, read_link_file, read_manifest, write_link_file,
    FileFormat, FourierKnotSpec, RecordTable,
};
use knots_core::tighten::{
    equilateralize, preprocess_link, read_checkpoint, tighten_link, PreprocessConfig,
    Termination, TighteningConfig, TighteningReport,
};
use knots_core::topology::{knot_determinant, project_knot, seeded_direction};

#[derive(Parser)]
#[command(
    name = "knots",
    version,
    about = "Geometric invariants, ropelength tightening, and statistics for polygonal knots"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for projection directions; recorded in tightening checkpoints.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the primary output to this path instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Tabular output style.
    #[arg(long, global = true, value_enum, default_value_t = TableStyle::Table)]
    format: TableStyle,
    /// Repeat for more progress detail on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableStyle {
    /// Aligned columns for reading.
    Table,
    /// Tab-separated with a header row, for piping.
    Delimited,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lengths, thickness, ropelength, writhe, and average crossing number
    /// of a coordinate file.
    Measure {
        file: PathBuf,
    },
    /// Shrink a knot or link toward minimal ropelength at unit thickness.
    Tighten {
        file: PathBuf,
        #[command(flatten)]
        opts: TightenOpts,
        /// Resample each component to this many equal chords first.
        #[arg(long, default_value_t = 0)]
        resample: usize,
        /// Run the repulsive preprocessor before tightening.
        #[arg(long)]
        preprocess: bool,
        #[command(flatten)]
        pre: PreprocessOpts,
        /// Restart from a checkpoint written by a previous run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Push strands apart and contract slack without tightening.
    Preprocess {
        file: PathBuf,
        #[command(flatten)]
        pre: PreprocessOpts,
    },
    /// Project a knot to a generic diagram: Gauss code, crossing count,
    /// diagram writhe, and the knot determinant.
    Diagram {
        file: PathBuf,
    },
    /// Group statistics, scaling fits, and correlations over a record
    /// table.
    Analyze {
        table: PathBuf,
        /// Also write plot-ready scatter and histogram files here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Search for the writhe quantum A and offset B minimizing the spread
    /// of writhes around the lattice {(k - B)·A}.
    Sweep {
        table: PathBuf,
        /// Column holding the writhe values.
        #[arg(long, default_value = "space_writhe")]
        column: String,
        #[arg(long, default_value_t = 0.3)]
        a_min: f64,
        #[arg(long, default_value_t = 2.0)]
        a_max: f64,
        #[arg(long, default_value_t = 0.0)]
        b_min: f64,
        #[arg(long, default_value_t = 1.0)]
        b_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        a_res: f64,
        #[arg(long, default_value_t = 1e-2)]
        b_res: f64,
        /// Sweep signed values instead of absolute ones.
        #[arg(long)]
        signed: bool,
        /// Keep only alternating (or only non-alternating) rows.
        #[arg(long, conflicts_with = "non_alternating_only")]
        alternating_only: bool,
        #[arg(long)]
        non_alternating_only: bool,
    },
    /// Build knots from Fourier coefficients or a Hopf-chain necklace.
    Generate {
        #[command(subcommand)]
        what: GenerateCmd,
    },
    /// Tighten every knot in a manifest, resumably, into a record table.
    Batch {
        manifest: PathBuf,
        /// Record table to append to and resume from.
        #[arg(long, default_value = "results.tsv")]
        out: PathBuf,
        #[command(flatten)]
        opts: TightenOpts,
        /// Resample each knot to this many equal chords first.
        #[arg(long, default_value_t = 0)]
        resample: usize,
        /// Run the repulsive preprocessor before tightening.
        #[arg(long)]
        preprocess: bool,
        #[command(flatten)]
        pre: PreprocessOpts,
    },
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Sample a closed curve from per-axis cosine/sine coefficients.
    Fourier {
        spec: PathBuf,
        /// Vertices to sample.
        #[arg(short, long, default_value_t = 512)]
        n: usize,
    },
    /// Circular necklace of interlocked rings.
    HopfChain {
        #[arg(long, default_value_t = 6)]
        rings: usize,
        #[arg(long, default_value_t = 20)]
        segments: usize,
    },
}

#[derive(Args, Clone)]
struct TightenOpts {
    #[arg(long, default_value_t = 25_000)]
    phase1_max_steps: usize,
    #[arg(long, default_value_t = 0.1)]
    phase1_residual_target: f64,
    #[arg(long, default_value_t = 12_000)]
    phase2_max_steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    phase2_residual_target: f64,
    #[arg(long, default_value_t = 1.0)]
    equilateralization_weight: f64,
    /// Step length per unit of projected direction, in mean-edge units.
    #[arg(long, default_value_t = 1e-3)]
    step_scale: f64,
    /// Constraints activate within this multiple of their bound.
    #[arg(long, default_value_t = 1.001)]
    contact_activation_distance: f64,
    /// Write a checkpoint every this many steps (0 = never).
    #[arg(long, default_value_t = 0)]
    checkpoint_every: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

impl TightenOpts {
    fn config(&self, seed: u64) -> TighteningConfig {
        TighteningConfig {
            phase1_max_steps: self.phase1_max_steps,
            phase1_residual_target: self.phase1_residual_target,
            phase2_max_steps: self.phase2_max_steps,
            phase2_residual_target: self.phase2_residual_target,
            equilateralization_weight: self.equilateralization_weight,
            step_scale: self.step_scale,
            contact_activation_distance: self.contact_activation_distance,
            random_seed: seed,
            checkpoint_every: self.checkpoint_every,
            checkpoint_path: self.checkpoint.clone(),
        }
    }

    /// Hash of everything that affects the result, for batch resumability.
    fn fingerprint(&self, resample: usize, preprocess: Option<&PreprocessConfig>) -> u64 {
        let mut s = format!(
            "{} {} {} {} {} {} {} resample {}",
            self.phase1_max_steps,
            self.phase1_residual_target,
            self.phase2_max_steps,
            self.phase2_residual_target,
            self.equilateralization_weight,
            self.step_scale,
            self.contact_activation_distance,
            resample,
        );
        if let Some(p) = preprocess {
            let _ = write!(
                s,
                " pre {} {} {} {}",
                p.coulomb_steps, p.coulomb_strength, p.tangential_strength, p.damping
            );
        }
        fnv1a(s.as_bytes())
    }
}

#[derive(Args, Clone)]
struct PreprocessOpts {
    #[arg(long, default_value_t = 50)]
    coulomb_steps: usize,
    #[arg(long, default_value_t = 1.0)]
    coulomb_strength: f64,
    #[arg(long, default_value_t = 1.0)]
    tangential_strength: f64,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
}

impl PreprocessOpts {
    fn config(&self) -> PreprocessConfig {
        PreprocessConfig {
            coulomb_steps: self.coulomb_steps,
            coulomb_strength: self.coulomb_strength,
            tangential_strength: self.tangential_strength,
            damping: self.damping,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 2 = parse error, 3 = infeasible geometry, 4 = convergence stall,
/// 1 = anything else.
fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<knots_core::Error>() {
        Some(knots_core::Error::Parse { .. }) => 2,
        Some(knots_core::Error::Infeasible(_)) => 3,
        Some(knots_core::Error::Stalled(_)) => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Measure { ref file } => measure(&cli, file),
        Cmd::Tighten {
            ref file,
            ref opts,
            resample,
            preprocess,
            ref pre,
            ref resume,
        } => tighten_cmd(&cli, file, opts, resample, preprocess, pre, resume.as_deref()),
        Cmd::Preprocess { ref file, ref pre } => {
            let link = read_link_file(file)?;
            let out = preprocess_link(&link, &pre.config())?;
            emit_link(&cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Diagram { ref file } => diagram(&cli, file),
        Cmd::Analyze { ref table, ref plot_dir } => analyze(&cli, table, plot_dir.as_deref()),
        Cmd::Sweep {
            ref table,
            ref column,
            a_min,
            a_max,
            b_min,
            b_max,
            a_res,
            b_res,
            signed,
            alternating_only,
            non_alternating_only,
        } => sweep(
            &cli,
            table,
            column,
            (a_min, a_max),
            (b_min, b_max),
            (a_res, b_res),
            signed,
            alternating_only,
            non_alternating_only,
        ),
        Cmd::Generate { ref what } => generate(&cli, what),
        Cmd::Batch {
            ref manifest,
            ref out,
            ref opts,
            resample,
            preprocess,
            ref pre,
        } => batch(&cli, manifest, out, opts, resample, preprocess, pre),
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn render_table(style: TableStyle, table: &RecordTable) -> String {
    match style {
        TableStyle::Delimited => table.to_tsv(),
        TableStyle::Table => {
            let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
            for row in &table.rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.len());
                }
            }
            let mut out = String::new();
            let emit = |out: &mut String, cells: &[String]| {
                let line: Vec<String> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{:<w$}", c, w = widths[i]))
                    .collect();
                out.push_str(line.join("  ").trim_end());
                out.push('\n');
            };
            emit(&mut out, &table.columns);
            for row in &table.rows {
                emit(&mut out, row);
            }
            out
        }
    }
}

fn emit_text(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Coordinates go to --output when given, else stdout.
fn emit_link(cli: &Cli, link: &Link) -> anyhow::Result<()> {
    match &cli.output {
        Some(path) => write_link_file(path, link, FileFormat::Plain)?,
        None => print!("{}", knots_core::io::format_link(link, FileFormat::Plain)),
    }
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn measure(cli: &Cli, file: &Path) -> anyhow::Result<ExitCode> {
    let link = read_link_file(file)?;
    let mut table = RecordTable::new(
        ["component", "vertices", "length", "space_writhe", "acn"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for (i, comp) in link.components.iter().enumerate() {
        table.rows.push(vec![
            comp.label.clone().unwrap_or_else(|| i.to_string()),
            comp.len().to_string(),
            num(comp.total_length()),
            num(space_writhe(comp)),
            num(average_crossing_number(comp)),
        ]);
    }
    let t = thickness(&link);
    let mut text = render_table(cli.format, &table);
    let _ = writeln!(text, "total_length {}", num(link.total_length()));
    let _ = writeln!(text, "thickness {}", num(t.thickness));
    let _ = writeln!(text, "min_turning_radius {}", num(t.min_rad));
    let _ = writeln!(text, "min_strut_half_distance {}", num(t.dcsd_half));
    let _ = writeln!(text, "ropelength {}", num(ropelength(&link)?));
    emit_text(cli, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn phase_table(report: &TighteningReport) -> RecordTable {
    let mut table = RecordTable::new(
        ["phase", "steps", "termination", "residual", "ropelength"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for (i, ph) in report.phases.iter().enumerate() {
        table.rows.push(vec![
            (i + 1).to_string(),
            ph.steps_taken.to_string(),
            ph.termination.to_string(),
            format!("{:.3e}", ph.residual),
            num(ph.ropelength),
        ]);
    }
    table
}

#[allow(clippy::too_many_arguments)]
fn tighten_cmd(
    cli: &Cli,
    file: &Path,
    opts: &TightenOpts,
    resample: usize,
    preprocess: bool,
    pre: &PreprocessOpts,
    resume: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let mut link = match resume {
        Some(ck) => {
            let ck = read_checkpoint(ck)?;
            if cli.verbose > 0 {
                eprintln!(
                    "resuming from phase {} step {} (ropelength {})",
                    ck.phase,
                    ck.step,
                    num(ck.ropelength)
                );
            }
            ck.link
        }
        None => read_link_file(file)?,
    };
    if resample > 0 {
        let comps = link
            .components
            .iter()
            .map(|c| equilateralize(c, resample))
            .collect::<knots_core::Result<Vec<_>>>()?;
        link = Link::new(comps)?;
    }
    if preprocess {
        link = preprocess_link(&link, &pre.config())?;
    }
    let cfg = opts.config(cli.seed);
    let (out, report) = tighten_link(&link, &cfg)?;
    emit_link(cli, &out)?;

    let mut text = render_table(cli.format, &phase_table(&report));
    let _ = writeln!(text, "final_ropelength {}", num(report.final_ropelength));
    let _ = writeln!(text, "final_residual {:.3e}", report.final_residual);
    // The knot itself claims stdout when there is no --output.
    if cli.output.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    let stalled = report
        .phases
        .last()
        .is_some_and(|p| p.termination == Termination::Stalled);
    Ok(if stalled { ExitCode::from(4) } else { ExitCode::SUCCESS })
}

fn single_knot(link: &Link) -> anyhow::Result<&PolygonalKnot> {
    match link.components.as_slice() {
        [k] => Ok(k),
        _ => bail!("expected a single-component file, found {}", link.components.len()),
    }
}

fn diagram(cli: &Cli, file: &Path) -> anyhow::Result<ExitCode> {
    let link = read_link_file(file)?;
    let knot = single_knot(&link)?;
    // First generic projection from the seeded direction sequence.
    let mut dia = None;
    for i in 0..64 {
        if let Ok(d) = project_knot(knot, seeded_direction(cli.seed, i)) {
            dia = Some(d);
            break;
        }
    }
    let dia = dia.ok_or_else(|| anyhow!("no generic projection direction found"))?;
    let det = knot_determinant(knot, cli.seed)?;
    let mut text = String::new();
    let d = dia.direction();
    let _ = writeln!(text, "direction {} {} {}", num(d.x), num(d.y), num(d.z));
    let _ = writeln!(text, "crossings {}", dia.crossing_number());
    let _ = writeln!(text, "diagram_writhe {}", dia.writhe());
    let _ = writeln!(text, "gauss_code {}", dia.gauss_code());
    let _ = writeln!(text, "determinant {det}");
    emit_text(cli, &text)?;
    Ok(ExitCode::SUCCESS)
}

/// Drop error rows from batch output before decoding records.
fn ok_rows(table: &RecordTable) -> RecordTable {
    let mut out = RecordTable::new(table.columns.clone());
    match table.column_index("status") {
        Some(si) => {
            out.rows = table
                .rows
                .iter()
                .filter(|r| r[si] == "ok")
                .cloned()
                .collect();
        }
        None => out.rows = table.rows.clone(),
    }
    out
}

fn analyze(cli: &Cli, table: &Path, plot_dir: Option<&Path>) -> anyhow::Result<ExitCode> {
    let raw = RecordTable::read_file(table)?;
    let records = InvariantRecord::from_table(&ok_rows(&raw))?;
    if records.is_empty() {
        bail!("no usable rows in {}", table.display());
    }

    let mut text = String::new();

    // Ropelength moments per (crossing number, alternating) group.
    let mut groups: std::collections::BTreeMap<(u32, bool), Vec<f64>> = Default::default();
    for r in &records {
        groups
            .entry((r.crossing_number, r.alternating))
            .or_default()
            .push(r.ropelength);
    }
    let mut gt = RecordTable::new(
        ["crossings", "class", "count", "mean", "sd", "sd_over_mean", "skewness", "kurtosis"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for ((c, alt), values) in &groups {
        let class = if *alt { "alternating" } else { "non-alternating" };
        let row = match distribution_stats(values) {
            Ok(s) => vec![
                c.to_string(),
                class.to_string(),
                values.len().to_string(),
                format!("{:.4}", s.mean),
                format!("{:.4}", s.sd),
                format!("{:.4}", s.sd_over_mean),
                format!("{:.4}", s.skewness),
                format!("{:.4}", s.kurtosis),
            ],
            Err(_) => vec![
                c.to_string(),
                class.to_string(),
                values.len().to_string(),
                format!("{:.4}", values.iter().sum::<f64>() / values.len() as f64),
                "-".into(),
                "-".into(),
                "-".into(),
                "-".into(),
            ],
        };
        gt.rows.push(row);
    }
    text.push_str(&render_table(cli.format, &gt));

    // Ropelength scaling across crossing numbers.
    for (model, name) in [(FitModel::Linear, "linear"), (FitModel::Power, "power")] {
        match fit_scaling(&records, model) {
            Ok(fit) => {
                let _ = match model {
                    FitModel::Linear => writeln!(
                        text,
                        "fit_{name} ropelength = ({:.4} ± {:.4}) + ({:.4} ± {:.4})·C  rss {:.4}",
                        fit.a.0, fit.a.1, fit.b.0, fit.b.1, fit.rss
                    ),
                    FitModel::Power => writeln!(
                        text,
                        "fit_{name} ropelength = ({:.4} ± {:.4})·C^({:.4} ± {:.4})  rss {:.4}",
                        fit.a.0, fit.a.1, fit.b.0, fit.b.1, fit.rss
                    ),
                };
            }
            Err(e) => {
                let _ = writeln!(text, "fit_{name} unavailable: {e}");
            }
        }
    }

    // Correlations between measured and supplied columns.
    let mut corr = |name: &str, pairs: Vec<(f64, f64)>| {
        if pairs.len() >= 2 {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson(&x, &y) {
                let _ = writeln!(text, "pearson_{name} {r:.4} (n={})", pairs.len());
            }
        }
    };
    corr(
        "ropelength_acn",
        records.iter().map(|r| (r.ropelength, r.acn)).collect(),
    );
    corr(
        "ropelength_hyperbolic_volume",
        records
            .iter()
            .filter_map(|r| r.hyperbolic_volume.map(|v| (r.ropelength, v)))
            .collect(),
    );
    corr(
        "abs_writhe_rasmussen_s",
        records
            .iter()
            .filter_map(|r| r.rasmussen_s.map(|s| (r.space_writhe.abs(), s.abs())))
            .collect(),
    );
    corr(
        "abs_writhe_tau",
        records
            .iter()
            .filter_map(|r| r.tau.map(|t| (r.space_writhe.abs(), t.abs())))
            .collect(),
    );

    // Residual writhe spread per class, against the uniform null.
    for (alt, class, quantum, half) in [
        (true, "alternating", 4.0 / 7.0, false),
        (false, "non_alternating", 4.0 / 3.0, true),
    ] {
        let residuals: Vec<f64> = records
            .iter()
            .filter(|r| r.alternating == alt)
            .map(|r| residual_writhe(r.space_writhe.abs(), quantum, half) / quantum)
            .collect();
        if residuals.len() >= 2 {
            if let Ok(s) = distribution_stats(&residuals) {
                let _ = writeln!(
                    text,
                    "residual_writhe_{class} mean {:.4} sd {:.4} (uniform null sd {:.4})",
                    s.mean,
                    s.sd,
                    uniform_null_sd()
                );
            }
        }
    }

    if let Some(dir) = plot_dir {
        write_plots(dir, &records)?;
        let _ = writeln!(text, "plots written to {}", dir.display());
    }
    emit_text(cli, &text)?;
    Ok(ExitCode::SUCCESS)
}

/// Two-column scatter (ropelength vs scaled writhe) and residual-writhe
/// histograms, one pair per class.
fn write_plots(dir: &Path, records: &[InvariantRecord]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (alt, class, quantum, half) in [
        (true, "alternating", 4.0 / 7.0, false),
        (false, "non_alternating", 4.0 / 3.0, true),
    ] {
        let class_records: Vec<&InvariantRecord> =
            records.iter().filter(|r| r.alternating == alt).collect();
        if class_records.is_empty() {
            continue;
        }
        let mut scatter = String::from("ropelength\twrithe_over_quantum\n");
        for r in &class_records {
            let _ = writeln!(
                scatter,
                "{:.6}\t{:.6}",
                r.ropelength,
                r.space_writhe.abs() / quantum
            );
        }
        std::fs::write(dir.join(format!("writhe_scatter_{class}.tsv")), scatter)?;

        let residuals: Vec<f64> = class_records
            .iter()
            .map(|r| residual_writhe(r.space_writhe.abs(), quantum, half) / quantum)
            .collect();
        let mut hist = String::from("bin_center\tcount\tdensity\n");
        for (center, count, density) in histogram(&residuals, 20, -0.5, 0.5)? {
            let _ = writeln!(hist, "{center:.4}\t{count}\t{density:.6}");
        }
        std::fs::write(dir.join(format!("residual_writhe_{class}.tsv")), hist)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    cli: &Cli,
    table: &Path,
    column: &str,
    a_range: (f64, f64),
    b_range: (f64, f64),
    resolution: (f64, f64),
    signed: bool,
    alternating_only: bool,
    non_alternating_only: bool,
) -> anyhow::Result<ExitCode> {
    let raw = ok_rows(&RecordTable::read_file(table)?);
    let filtered = if alternating_only || non_alternating_only {
        let records = InvariantRecord::from_table(&raw)?;
        records
            .iter()
            .filter(|r| r.alternating == alternating_only)
            .map(|r| r.space_writhe)
            .collect()
    } else {
        raw.column_f64(column)?
    };
    let writhes: Vec<f64> = if signed {
        filtered
    } else {
        filtered.iter().map(|w| w.abs()).collect()
    };
    let r = quantization_sweep(&writhes, a_range, b_range, resolution)?;
    let text = format!(
        "quantum {:.4}\noffset {:.4}\nvariance {:.6e}\nresolution {:.1e} {:.1e}\nsamples {}\n",
        r.a,
        r.b,
        r.variance,
        r.a_resolution,
        r.b_resolution,
        writhes.len()
    );
    emit_text(cli, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn generate(cli: &Cli, what: &GenerateCmd) -> anyhow::Result<ExitCode> {
    let link = match what {
        GenerateCmd::Fourier { spec, n } => {
            let text = std::fs::read_to_string(spec)
                .with_context(|| format!("reading {}", spec.display()))?;
            let spec = FourierKnotSpec::parse(&text)?;
            Link::single(spec.sample(*n)?)
        }
        GenerateCmd::HopfChain { rings, segments } => make_hopf_chain(*rings, *segments)?,
    };
    emit_link(cli, &link)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn batch(
    cli: &Cli,
    manifest: &Path,
    out: &Path,
    opts: &TightenOpts,
    resample: usize,
    preprocess: bool,
    pre: &PreprocessOpts,
) -> anyhow::Result<ExitCode> {
    let jobs = read_manifest(manifest)?;
    let pre_cfg = preprocess.then(|| pre.config());
    let cfg = opts.config(cli.seed);
    let hash = opts.fingerprint(resample, pre_cfg.as_ref());
    let manifest_dir = manifest.parent().unwrap_or(Path::new("."));
    let verbose = cli.verbose;

    let columns = [
        "crossing_number",
        "alternating",
        "vertex_count",
        "ropelength",
        "space_writhe",
        "acn",
        "residual",
        "termination",
        "determinant",
    ];
    let table = batch_run(&jobs, &columns, hash, out, |job| {
        let path = if job.input.is_absolute() {
            job.input.clone()
        } else {
            manifest_dir.join(&job.input)
        };
        let mut link = read_link_file(&path)?;
        if resample > 0 {
            let comps = link
                .components
                .iter()
                .map(|c| equilateralize(c, resample))
                .collect::<knots_core::Result<Vec<_>>>()?;
            link = Link::new(comps)?;
        }
        let det_before = match link.components.as_slice() {
            [k] => Some(knot_determinant(k, cfg.random_seed)?),
            _ => None,
        };
        if let Some(p) = &pre_cfg {
            link = preprocess_link(&link, p)?;
        }
        let (tight, report) = tighten_link(&link, &cfg)?;
        let det = match tight.components.as_slice() {
            [k] => {
                let d = knot_determinant(k, cfg.random_seed)?;
                if let Some(before) = det_before {
                    if d != before {
                        return Err(knots_core::Error::InvalidKnot(format!(
                            "topology changed: determinant {before} -> {d}"
                        )));
                    }
                }
                d.to_string()
            }
            _ => "-".to_string(),
        };
        let writhe: f64 = tight.components.iter().map(space_writhe).sum();
        let acn: f64 = tight.components.iter().map(average_crossing_number).sum();
        let termination = report
            .phases
            .last()
            .map(|p| p.termination.to_string())
            .unwrap_or_default();
        if verbose > 0 {
            eprintln!(
                "{}: ropelength {} residual {:.3e}",
                job.label,
                num(report.final_ropelength),
                report.final_residual
            );
        }
        Ok(vec![
            job.crossing_number.map(|c| c.to_string()).unwrap_or_else(|| "-".into()),
            job.alternating
                .map(|a| if a { "1" } else { "0" }.to_string())
                .unwrap_or_else(|| "-".into()),
            tight.vertex_count().to_string(),
            format!("{:.17e}", report.final_ropelength),
            format!("{:.17e}", writhe),
            format!("{:.17e}", acn),
            format!("{:.3e}", report.final_residual),
            termination,
            det,
        ])
    })?;
    emit_text(cli, &render_table(cli.format, &table))?;
    Ok(ExitCode::SUCCESS)
}
