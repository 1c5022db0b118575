use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use surfacegrid::config::{Config, IdRange, DEFAULT_SEED};
use surfacegrid::dataset::{
    build, function_path, job_counts, plan_dataset, BuildOptions, Counts, DatasetManifest, JobKind, ManifestRecord,
    RenderJob, TestSet, CONFIG_ECHO_FILE, MANIFEST_FILE,
};
use surfacegrid::gauss::{eval_function_with_volume, synth_function, write_function, DEFAULT_VOLUME};
use surfacegrid::geometry::render_depth;
use surfacegrid::imageio::{load_gray8, save_depth, save_surface};
use surfacegrid::metrics::{
    early_stop, evaluate, render_comparison_table, render_results_table, reports_from_jsonl,
    reports_to_jsonl, val_history_from_log, DEFAULT_PATIENCE,
};
use surfacegrid::raster::IMAGE_SIZE;
use surfacegrid::render::{binarize_real_plot, render_surface, GridSpec, Pattern, Threshold};

#[derive(Parser)]
#[command(name = "surfacegrid", version, about = "Synthetic grid-marked surface plots with ground-truth depth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random surface functions as text files.
    GenFunctions(GenFunctionsArgs),
    /// Generate a dataset (functions, depth maps, surface images, manifest).
    Build(BuildArgs),
    /// Render one function from one viewpoint.
    Render(RenderArgs),
    /// Score predicted depth maps against a built dataset's test sets.
    Eval(EvalArgs),
    /// Print comparison tables from saved evaluation reports.
    Table(TableArgs),
    /// Binarize and resample a real plot image for inference.
    Preprocess(PreprocessArgs),
    /// Summarize a dataset manifest.
    Inspect(InspectArgs),
    /// Apply the early-stop rule to a training log.
    EarlyStop(EarlyStopArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration; defaults to the full dataset recipe.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the small smoke-test configuration.
    #[arg(long, conflicts_with = "config")]
    tiny: bool,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the function id range, `START..END`.
    #[arg(long, value_parser = parse_range)]
    functions: Option<IdRange>,
}

impl ConfigArgs {
    fn resolve(&self) -> surfacegrid::Result<Config> {
        let mut c = match (&self.config, self.tiny) {
            (Some(p), _) => Config::load(p)?,
            (None, true) => Config::tiny(),
            (None, false) => Config::default(),
        };
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(r) = self.functions {
            c.functions = r;
            let fits = |s: &IdRange| s.start >= r.start && s.end <= r.end;
            if let Some(sp) = &c.subsets {
                if !(fits(&sp.train) && fits(&sp.val) && fits(&sp.test)) {
                    eprintln!("note: split ranges fall outside --functions; subsets disabled");
                    c.subsets = None;
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn parse_range(s: &str) -> Result<IdRange, String> {
    let (a, b) = s.split_once("..").ok_or("expected START..END")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("end: {e}"))?;
    if a >= b {
        return Err("empty range".into());
    }
    Ok(IdRange::new(a, b))
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Threshold::Auto);
    }
    s.parse::<u8>()
        .map(Threshold::Fixed)
        .map_err(|_| format!("`{s}` is neither `auto` nor a level in 0..=255"))
}

#[derive(Args)]
struct GenFunctionsArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Skip files whose checksum matches the existing manifest.
    #[arg(long)]
    resume: bool,
    /// Print the plan and job counts without writing anything.
    #[arg(long)]
    dry_run: bool,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    id: u64,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    azimuth: f64,
    #[arg(long, default_value_t = 30.0)]
    elevation: f64,
    #[arg(long, default_value = "grid")]
    pattern: Pattern,
    #[arg(long, default_value_t = 20.0)]
    spacing: f64,
    /// Spacing along v for anisotropic grids (defaults to `--spacing`).
    #[arg(long)]
    spacing_v: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    grid_angle: f64,
    /// 16-bit depth PNG output.
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Binary surface PNG output.
    #[arg(long)]
    surface: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Built dataset directory (holding the manifest).
    #[arg(long)]
    dataset: PathBuf,
    /// Directory of predictions, mirroring the dataset's surface paths.
    #[arg(long)]
    pred: PathBuf,
    /// Test sets to score (default: all).
    #[arg(long = "set", value_delimiter = ',')]
    sets: Vec<TestSet>,
    /// Training-variant label stored in the reports.
    #[arg(long)]
    variant: Option<String>,
    /// Write line-delimited JSON reports here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Report files written by `eval --json`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    input: PathBuf,
    output: PathBuf,
    /// `auto` (Otsu) or a fixed level 0..=255.
    #[arg(long, default_value = "auto", value_parser = parse_threshold)]
    threshold: Threshold,
}

#[derive(Args)]
struct InspectArgs {
    /// Dataset directory or manifest file.
    path: PathBuf,
    /// Print the statistics as one JSON object.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EarlyStopArgs {
    /// Training log, one JSON object per epoch.
    log: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PATIENCE)]
    patience: usize,
}

type CmdResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::GenFunctions(a) => gen_functions(a),
        Command::Build(a) => build_cmd(a),
        Command::Render(a) => render_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Table(a) => table_cmd(a),
        Command::Preprocess(a) => preprocess_cmd(a),
        Command::Inspect(a) => inspect_cmd(a),
        Command::EarlyStop(a) => early_stop_cmd(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Function files only, plus a headerless manifest fragment and config echo.
fn gen_functions(a: GenFunctionsArgs) -> CmdResult {
    let config = a.config.resolve()?;
    let range = config.functions;
    let mut fragment = String::new();
    for id in range.start..range.end {
        let f = synth_function(config.master_seed, id);
        let rel = function_path(id);
        let text = write_function(&f);
        let path = a.out.join(&rel);
        fs::create_dir_all(path.parent().expect("function path has a parent"))?;
        fs::write(&path, &text)?;
        let record = ManifestRecord {
            job: RenderJob {
                kind: JobKind::Function,
                path: rel,
                function_id: id,
                viewpoint: None,
                grid: None,
                depth_path: None,
                rule: None,
                tags: Vec::new(),
            },
            sha256: Some(hex_sha256(text.as_bytes())),
        };
        fragment.push_str(&serde_json::to_string(&record)?);
        fragment.push('\n');
    }
    fs::write(a.out.join(FUNCTIONS_FRAGMENT), fragment)?;
    fs::write(a.out.join(CONFIG_ECHO_FILE), config.to_toml())?;
    println!(
        "wrote {} functions to {}",
        range.end - range.start,
        a.out.join("functions").display()
    );
    Ok(ExitCode::SUCCESS)
}

const FUNCTIONS_FRAGMENT: &str = "functions.jsonl";

fn hex_sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

fn build_cmd(a: BuildArgs) -> CmdResult {
    let config = a.config.resolve()?;
    if a.print_config {
        print!("{}", config.to_toml());
        return Ok(ExitCode::SUCCESS);
    }
    let out = match (&a.out, a.dry_run) {
        (None, false) => return Err("--out is required unless --dry-run or --print-config".into()),
        (out, _) => out.clone(),
    };
    let jobs = plan_dataset(&config)?;
    let (f, d, s) = job_counts(&jobs);
    println!("config {}", config.content_hash());
    println!("plan: functions {f} depth {d} surfaces {s} total {}", jobs.len());
    let Some(out) = out.filter(|_| !a.dry_run) else {
        return Ok(ExitCode::SUCCESS);
    };
    let opts = BuildOptions {
        threads: a.threads,
        resume: a.resume,
    };
    let rep = build(&config, &out, &opts)?;
    let c = rep.manifest.header.counts;
    println!(
        "functions {} depth {} surfaces {}; executed {} reused {} failed {}",
        c.functions,
        c.depth,
        c.surfaces,
        rep.executed,
        rep.skipped,
        rep.failures.len()
    );
    println!("manifest {}", rep.manifest.content_hash());
    for f in &rep.failures {
        eprintln!("failed {} (function {}): {}", f.path, f.function_id, f.error);
    }
    Ok(if rep.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn render_cmd(a: RenderArgs) -> CmdResult {
    if a.depth.is_none() && a.surface.is_none() {
        return Err("nothing to do: pass --depth and/or --surface".into());
    }
    let v = surfacegrid::Viewpoint::new(a.azimuth, a.elevation)?;
    let g = GridSpec::lines(a.pattern, a.spacing)
        .with_spacings(a.spacing, a.spacing_v.unwrap_or(a.spacing))
        .with_angle(a.grid_angle);
    g.validate()?;
    let f = synth_function(a.seed, a.id);
    let field = eval_function_with_volume(&f, IMAGE_SIZE, IMAGE_SIZE, DEFAULT_VOLUME);
    if let Some(p) = &a.depth {
        save_depth(&render_depth(&field, &v), p)?;
    }
    if let Some(p) = &a.surface {
        save_surface(&render_surface(&field, &v, &g), p)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_cmd(a: EvalArgs) -> CmdResult {
    let manifest = DatasetManifest::load(a.dataset.join(MANIFEST_FILE))?;
    let sets = if a.sets.is_empty() {
        TestSet::ALL.to_vec()
    } else {
        a.sets
    };
    let ev = evaluate(&a.pred, &manifest, &a.dataset, &sets, a.variant.as_deref())?;
    print!("{}", render_results_table(&ev.reports));
    if let Some(p) = &a.json {
        fs::write(p, reports_to_jsonl(&ev.reports))?;
    }
    for m in &ev.missing {
        eprintln!("{}: {} predictions missing, skipped", m.subset, m.paths.len());
        for p in m.paths.iter().take(5) {
            eprintln!("  {}", p.display());
        }
    }
    Ok(if ev.missing.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn table_cmd(a: TableArgs) -> CmdResult {
    let mut all = Vec::new();
    for p in &a.reports {
        all.extend(reports_from_jsonl(&fs::read_to_string(p)?)?);
    }
    print!("{}", render_comparison_table(&all));
    Ok(ExitCode::SUCCESS)
}

fn preprocess_cmd(a: PreprocessArgs) -> CmdResult {
    let gray = load_gray8(&a.input)?;
    let img = binarize_real_plot(&gray, a.threshold)?;
    save_surface(&img, &a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}

#[derive(Serialize)]
struct ManifestStats<'a> {
    format: &'a str,
    master_seed: u64,
    config_hash: &'a str,
    counts: Counts,
    pending: usize,
    rules: BTreeMap<&'a str, usize>,
    tags: BTreeMap<String, usize>,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<String>,
}

fn inspect_cmd(a: InspectArgs) -> CmdResult {
    let m = DatasetManifest::load(manifest_path(&a.path))?;
    let h = &m.header;
    let mut rules: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tags: BTreeMap<String, usize> = BTreeMap::new();
    for r in &m.records {
        if r.job.kind == JobKind::Surface {
            *rules.entry(r.job.rule.as_deref().unwrap_or("-")).or_default() += 1;
        }
        for t in &r.job.tags {
            *tags.entry(t.to_string()).or_default() += 1;
        }
    }
    let problem = m.validate().err().map(|e| e.to_string());
    let stats = ManifestStats {
        format: &h.format,
        master_seed: h.master_seed,
        config_hash: &h.config_hash,
        counts: h.counts,
        pending: m.records.iter().filter(|r| r.sha256.is_none()).count(),
        rules,
        tags,
        valid: problem.is_none(),
        problem,
    };
    if a.json {
        println!("{}", serde_json::to_string(&stats)?);
    } else {
        println!("format {}", stats.format);
        println!("master_seed {}", stats.master_seed);
        println!("config_hash {}", stats.config_hash);
        let c = stats.counts;
        println!("functions {} depth {} surfaces {}", c.functions, c.depth, c.surfaces);
        println!("pending {}", stats.pending);
        for (k, n) in &stats.rules {
            println!("rule {k} {n}");
        }
        for (k, n) in &stats.tags {
            println!("tag {k} {n}");
        }
        match &stats.problem {
            None => println!("valid"),
            Some(p) => println!("invalid: {p}"),
        }
    }
    Ok(if stats.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn early_stop_cmd(a: EarlyStopArgs) -> CmdResult {
    let history = val_history_from_log(&fs::read_to_string(&a.log)?)?;
    let d = early_stop(&history, a.patience);
    println!("{}", serde_json::to_string(&d)?);
    Ok(ExitCode::SUCCESS)
}
