//! Command-line driver: synthesize input trajectories, retarget them onto
//! the hand model, evaluate grasp metrics, and aggregate reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use handret_core::demo::{export_demos, DemoHeader};
use handret_core::eval::{evaluate_trajectory, read_records, write_records};
use handret_core::hand::HandModelSpec;
use handret_core::pipeline::{record_demo, run_retarget, InputTrajectory, RetargetMode, RunConfig};
use handret_core::report::{build_report, report_csv, MetricsFile, TrajectoryEntry};
use handret_core::scene::SceneState;
use handret_core::synth::{generate_trajectories, SynthParams};

#[derive(Parser)]
#[command(
    name = "handret",
    about = "Hand motion retargeting with task-objective swarm optimisation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic noisy grasp trajectories over a scene.
    Synth(SynthArgs),
    /// Retarget input trajectories onto the hand model and record frames.
    Retarget(RetargetArgs),
    /// Compute grasp metrics from recorded frames.
    Eval(EvalArgs),
    /// Aggregate metrics files into a report table.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of trajectories.
    #[arg(long, default_value_t = handret_core::synth::BENCHMARK_COUNT)]
    n: usize,
    /// Noise standard deviation in meters.
    #[arg(long, default_value_t = handret_core::synth::BENCHMARK_NOISE_STD)]
    sigma: f64,
    #[arg(long, default_value_t = handret_core::synth::BENCHMARK_SEED)]
    seed: u64,
    /// Scene JSON; omit for the built-in cube scene.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Hand spec JSON; omit for the built-in model.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory for the trajectory JSONL files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RetargetArgs {
    /// Run-config JSON; omit for built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured mode (ik, hybrid, hybrid+refine).
    #[arg(long)]
    mode: Option<String>,
    /// Input trajectory file or directory of .jsonl files.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for records files; falls back to the config's
    /// output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also export successful trajectories as a demonstration dataset.
    #[arg(long)]
    demos: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Records file or directory of .records.jsonl files.
    #[arg(long)]
    records: PathBuf,
    /// Metrics JSON output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Metrics JSON files.
    #[arg(long, num_args = 1.., required = true)]
    metrics: Vec<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    csv: PathBuf,
    /// Optional aggregate JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err
                .downcast_ref::<handret_core::Error>()
                .map(|e| e.kind())
                .unwrap_or("cli");
            let payload = serde_json::json!({
                "error": { "kind": kind, "message": format!("{err:#}") }
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(args) => synth(args),
        Command::Retarget(args) => retarget(args),
        Command::Eval(args) => eval(args),
        Command::Report(args) => report(args),
    }
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let spec = match &args.spec {
        Some(p) => HandModelSpec::load(p)?,
        None => HandModelSpec::default_spec(),
    };
    let scene = match &args.scene {
        Some(p) => SceneState::load(p)?,
        None => SceneState::default_scene(),
    };
    let params = SynthParams {
        count: args.n,
        noise_std: args.sigma,
        seed: args.seed,
        ..SynthParams::default()
    };
    let trajectories = generate_trajectories(&scene, &spec, &params)?;
    std::fs::create_dir_all(&args.out)?;
    for t in &trajectories {
        let path = args.out.join(format!("{}.jsonl", t.id));
        t.save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Collect input trajectory files: a single file, or every `.jsonl` in a
/// directory in name order.
fn collect_inputs(input: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    if !input.is_dir() {
        bail!("input {} is neither a file nor a directory", input.display());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(input)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .jsonl files under {}", input.display());
    }
    Ok(files)
}

fn retarget(args: RetargetArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = &args.mode {
        config.mode = RetargetMode::parse(mode)?;
    }
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    let config = config.validated()?;
    let spec = config.load_hand_spec()?;
    let scene = config.load_scene()?;
    let meta = config.run_meta(&spec);

    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .context("no output directory: pass --out or set output_dir in the config")?;
    std::fs::create_dir_all(&out_dir)?;
    let mut demos = Vec::new();
    for path in collect_inputs(&args.input)? {
        let trajectory = InputTrajectory::load(&path)
            .with_context(|| format!("loading {}", path.display()))?;
        let records = run_retarget(&config, &spec, &scene, &trajectory)?;
        let out_path = out_dir.join(format!("{}.records.jsonl", trajectory.id));
        write_records(&out_path, &meta, &records)?;
        let metrics = evaluate_trajectory(&records);
        println!(
            "{}: success={} lifting_ratio={:.3} -> {}",
            trajectory.id,
            metrics.success,
            metrics.lifting_ratio,
            out_path.display()
        );
        if args.demos.is_some() {
            let demo = record_demo(&trajectory.id, &records, &config)?;
            if demo.success {
                demos.push(demo);
            }
        }
    }

    if let Some(demo_path) = &args.demos {
        let header = DemoHeader {
            spec_hash: spec.spec_hash().to_string(),
            config: serde_json::to_value(&config)?,
        };
        export_demos(&demos, demo_path, &header)?;
        println!("wrote {} demonstrations to {}", demos.len(), demo_path.display());
    }
    Ok(())
}

fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let files = if args.records.is_file() {
        vec![args.records.clone()]
    } else {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&args.records)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.to_string_lossy().ends_with(".records.jsonl"))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no .records.jsonl files under {}", args.records.display());
        }
        files
    };

    let mut meta = None;
    let mut entries = Vec::new();
    for path in &files {
        let (file_meta, frames) = read_records(path)?;
        let id = path
            .file_name()
            .map(|s| s.to_string_lossy().trim_end_matches(".records.jsonl").to_string())
            .unwrap_or_default();
        entries.push(TrajectoryEntry { id, metrics: evaluate_trajectory(&frames) });
        match &meta {
            None => meta = Some(file_meta),
            Some(m) if *m != file_meta => {
                bail!("records under {} mix different run configs", args.records.display())
            }
            _ => {}
        }
    }
    let meta = meta.context("no records found")?;
    let metrics = MetricsFile::new(meta, entries);
    metrics.save(&args.out)?;
    println!(
        "evaluated {} trajectories: success_rate={:.3} mean_lifting_ratio={:.3}",
        metrics.aggregate.trajectory_count,
        metrics.aggregate.success_rate,
        metrics.aggregate.mean_lifting_ratio
    );
    Ok(())
}

fn report(args: ReportArgs) -> anyhow::Result<()> {
    let mut files = Vec::new();
    for path in &args.metrics {
        files.push(MetricsFile::load(path)?);
    }
    let report = build_report(&files)?;
    std::fs::write(&args.csv, report_csv(&report))?;
    println!("wrote {}", args.csv.display());
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
