//! The `bboxaug` command line.
//!
//! Exit codes: 0 success, 1 runtime errors occurred, 2 usage or
//! configuration errors. All randomness comes from `--seed` (default 0).
//! Summaries are `key=value` lines unless `--pretty` is given.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bbox_only_ops::crop_bounds;
use crate::dataset::{load_dataset, write_augmented, OutputFormat, WriteOptions};
use crate::error::Error;
use crate::geom::{AnnotatedImage, BBox};
use crate::policy::{
    apply_sub_policy, builtin_coco_policy, parse_policy, scientific, search_space_cardinality, serialize_policy,
    AugmentConfig, BBoxOnlyGating, LevelConfig, Policy,
};
use crate::raster::{ImageBuffer, Rgb};
use crate::rng::{derive_seed, rng_from_seed};
use crate::search::{
    decode, evolution_search, ppo_search, random_search, write_history_jsonl, EvalOptions, EvolutionConfig,
    ExternalReward, PpoConfig, RewardFn, SearchOutcome, SearchSpace, TokenMatchReward,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const LOG_ENV: &str = "AUG_LOG_LEVEL";

#[derive(Debug, Parser)]
#[command(name = "bboxaug", version, about = "Bounding-box aware augmentation policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Augment a COCO-style dataset with a policy.
    Augment(AugmentArgs),
    /// Render a grid of sub-policy samples for one image.
    Preview(PreviewArgs),
    /// Search for a policy.
    Search(SearchArgs),
    /// Inspect policy files and the search space.
    #[command(subcommand)]
    Policy(PolicyCommand),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LevelArgs {
    /// Magnitude levels.
    #[arg(long = "L", default_value_t = 6)]
    pub magnitude_levels: usize,
    /// Probability levels.
    #[arg(long = "M", default_value_t = 6)]
    pub probability_levels: usize,
    /// Operations per sub-policy.
    #[arg(long = "N", default_value_t = 2)]
    pub ops_per_sub_policy: usize,
}

impl LevelArgs {
    fn config(&self) -> Result<LevelConfig, Failure> {
        let cfg = LevelConfig {
            magnitude_levels: self.magnitude_levels,
            probability_levels: self.probability_levels,
            ops_per_sub_policy: self.ops_per_sub_policy,
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct PolicySource {
    /// Policy JSON file.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Use the built-in COCO policy.
    #[arg(long)]
    pub builtin: bool,
}

impl PolicySource {
    fn load(&self, cfg: &LevelConfig) -> Result<Policy, Failure> {
        match &self.policy {
            Some(path) => read_policy(path, cfg),
            None => Ok(builtin_coco_policy()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Gating {
    PerBox,
    PerOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Png,
    Jpeg,
}

#[derive(Debug, Clone, Args)]
pub struct AugmentOptions {
    /// How bbox-only operations use their probability.
    #[arg(long, value_enum, default_value_t = Gating::PerBox)]
    pub gating: Gating,
    /// Drop boxes smaller than this after geometric operations.
    #[arg(long, default_value_t = 0.0)]
    pub min_box_area: f64,
    #[command(flatten)]
    pub levels: LevelArgs,
}

impl AugmentOptions {
    fn config(&self) -> Result<AugmentConfig, Failure> {
        if self.min_box_area.is_nan() || self.min_box_area < 0.0 {
            return Err(usage(format!("--min-box-area must be >= 0, got {}", self.min_box_area)));
        }
        Ok(AugmentConfig {
            levels: self.levels.config()?,
            min_box_area: self.min_box_area,
            bbox_only_gating: match self.gating {
                Gating::PerBox => BBoxOnlyGating::PerBox,
                Gating::PerOp => BBoxOnlyGating::PerOp,
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// COCO-style annotation JSON.
    pub annotations: PathBuf,
    /// Directory that image file names are relative to.
    pub image_root: PathBuf,
    /// Output directory; its parent must exist.
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub source: PolicySource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Augmented copies per image.
    #[arg(long, default_value_t = 1)]
    pub passes: usize,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Png)]
    pub format: Format,
    #[command(flatten)]
    pub options: AugmentOptions,
    /// Human-readable summary.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    pub image: PathBuf,
    pub out_png: PathBuf,
    #[command(flatten)]
    pub source: PolicySource,
    /// Columns: independent samples per sub-policy.
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Box as `x0,y0,x1,y1`; repeatable.
    #[arg(long = "box", value_parser = parse_box)]
    pub boxes: Vec<BBox>,
    #[command(flatten)]
    pub options: AugmentOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Optimizer {
    Random,
    Evolution,
    Ppo,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct RewardSource {
    /// Token-match reward against a target drawn from this seed.
    #[arg(long, value_name = "TARGET_SEED")]
    pub synthetic: Option<u64>,
    /// Shell command; `{policy}` is replaced by a policy file path and the
    /// last stdout line must be a reward in [0, 1].
    #[arg(long, value_name = "TEMPLATE")]
    pub command: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Where the best policy is written.
    pub out_policy: PathBuf,
    /// Line-JSON evaluation history.
    pub out_log: PathBuf,
    #[command(flatten)]
    pub reward: RewardSource,
    #[arg(long, value_enum, default_value_t = Optimizer::Ppo)]
    pub optimizer: Optimizer,
    /// Total reward evaluations. PPO runs `budget / batch` iterations.
    #[arg(long, default_value_t = 19_200)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub population: usize,
    /// Tournament size for evolution.
    #[arg(long, default_value_t = 16)]
    pub tournament: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.2)]
    pub clip_eps: f64,
    #[arg(long, default_value_t = 4)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.9)]
    pub ema_decay: f64,
    /// Evaluations averaged per candidate for a stochastic command.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Treat the reward command as deterministic.
    #[arg(long)]
    pub deterministic: bool,
    /// Record wall time per evaluation in the log.
    #[arg(long)]
    pub timing: bool,
    /// Sub-policies per candidate.
    #[arg(long = "K", default_value_t = 5)]
    pub sub_policies: usize,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Subcommand)]
pub enum PolicyCommand {
    /// Parse and check a policy file.
    Validate {
        #[command(flatten)]
        source: PolicySource,
        #[command(flatten)]
        levels: LevelArgs,
    },
    /// Print a policy in canonical form.
    Show {
        #[command(flatten)]
        source: PolicySource,
        #[command(flatten)]
        levels: LevelArgs,
    },
    /// Size of the search space, `(ops * L * M)^(N * K)`.
    Cardinality {
        #[arg(long, default_value_t = 22)]
        ops: u64,
        #[arg(long = "L", default_value_t = 6)]
        magnitude_levels: u64,
        #[arg(long = "M", default_value_t = 6)]
        probability_levels: u64,
        #[arg(long = "N", default_value_t = 2)]
        ops_per_sub_policy: u32,
        #[arg(long = "K", default_value_t = 5)]
        sub_policies: u32,
        /// Digits after the point in the approximation.
        #[arg(long, default_value_t = 2)]
        digits: usize,
        #[arg(long)]
        pretty: bool,
    },
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(e: impl Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

fn runtime(e: impl Display) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    }
}

fn parse_box(s: &str) -> Result<BBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("\"{p}\": {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x0, y0, x1, y1] if x0 <= x1 && y0 <= y1 => Ok(BBox::new(x0, y0, x1, y1, 0)),
        [_, _, _, _] => Err("need x0 <= x1 and y0 <= y1".into()),
        _ => Err(format!("expected x0,y0,x1,y1, got {} values", v.len())),
    }
}

fn read_policy(path: &Path, cfg: &LevelConfig) -> Result<Policy, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(Error::io(path, e)))?;
    parse_policy(&text, cfg).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Prints `key=value` lines, or an aligned table when `pretty`.
fn print_summary(rows: &[(&str, String)], pretty: bool) {
    if pretty {
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            println!("{:<width$}  {v}", k.replace('_', " "));
        }
    } else {
        for (k, v) in rows {
            println!("{k}={v}");
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Augment(a) => cmd_augment(a),
        Command::Preview(a) => cmd_preview(a),
        Command::Search(a) => cmd_search(a),
        Command::Policy(p) => cmd_policy(p),
    }
}

fn cmd_augment(a: AugmentArgs) -> Result<i32, Failure> {
    let cfg = a.options.config()?;
    if a.passes == 0 {
        return Err(usage("--passes must be >= 1"));
    }
    let parent = match a.out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !parent.is_dir() {
        return Err(usage(format!("output parent directory {} does not exist", parent.display())));
    }
    let policy = a.source.load(&cfg.levels)?;
    policy.validate(&cfg.levels).map_err(usage)?;
    let loaded = load_dataset(&a.annotations, &a.image_root).map_err(usage)?;
    let opts = WriteOptions {
        master_seed: a.seed,
        passes: a.passes,
        workers: a.workers,
        format: match a.format {
            Format::Png => OutputFormat::Png,
            Format::Jpeg => OutputFormat::Jpeg,
        },
        augment: cfg,
    };
    let report = write_augmented(&loaded, &policy, &a.out_dir, &opts).map_err(runtime)?;
    for e in &report.errors {
        eprintln!("image {} pass {}: {}", e.image_id, e.pass, e.message);
    }
    print_summary(
        &[
            ("images_in", loaded.dataset.images.len().to_string()),
            ("passes", a.passes.to_string()),
            ("images_written", report.images_written.to_string()),
            ("boxes_in", report.boxes_in.to_string()),
            ("boxes_out", report.boxes_out.to_string()),
            ("boxes_dropped", report.boxes_dropped().to_string()),
            ("boxes_clamped", loaded.clamped_boxes.to_string()),
            ("errors", report.errors.len().to_string()),
        ],
        a.pretty,
    );
    Ok(if report.errors.is_empty() { EXIT_OK } else { EXIT_RUNTIME })
}

pub const OUTLINE: Rgb = [255, 0, 0];
pub const OUTLINE_WIDTH: usize = 2;
pub const GRID_GAP: usize = 4;
const GRID_BACKGROUND: Rgb = [255, 255, 255];

/// Draws a `thickness`-pixel outline just inside the pixel cover of `b`.
pub fn draw_box(img: &mut ImageBuffer, b: &BBox, color: Rgb, thickness: usize) {
    let Some((x0, y0, x1, y1)) = crop_bounds(b, img.width(), img.height()) else {
        return;
    };
    let t = thickness;
    img.fill_rect(x0, y0, x1, (y0 + t).min(y1), color);
    img.fill_rect(x0, y1.saturating_sub(t).max(y0), x1, y1, color);
    img.fill_rect(x0, y0, (x0 + t).min(x1), y1, color);
    img.fill_rect(x1.saturating_sub(t).max(x0), y0, x1, y1, color);
}

/// One row per sub-policy, `samples` columns of independent applications,
/// with the resulting boxes outlined. Cell `(row, col)` uses the seed
/// `derive_seed(&[seed, row, col])`.
pub fn preview_grid(
    img: &AnnotatedImage,
    policy: &Policy,
    samples: usize,
    seed: u64,
    cfg: &AugmentConfig,
) -> crate::error::Result<ImageBuffer> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample per sub-policy"));
    }
    let (w, h) = (img.image.width(), img.image.height());
    let rows = policy.sub_policies.len();
    let mut grid = ImageBuffer::new(
        samples * w + (samples - 1) * GRID_GAP,
        rows * h + (rows.max(1) - 1) * GRID_GAP,
        GRID_BACKGROUND,
    )?;
    for (r, sp) in policy.sub_policies.iter().enumerate() {
        for c in 0..samples {
            let mut rng = rng_from_seed(derive_seed(&[seed, r as u64, c as u64]));
            let mut out = apply_sub_policy(sp, img, cfg, &mut rng)?;
            for b in &out.boxes {
                draw_box(&mut out.image, b, OUTLINE, OUTLINE_WIDTH);
            }
            grid.paste(&out.image, c * (w + GRID_GAP), r * (h + GRID_GAP));
        }
    }
    Ok(grid)
}

fn cmd_preview(a: PreviewArgs) -> Result<i32, Failure> {
    let cfg = a.options.config()?;
    let policy = a.source.load(&cfg.levels)?;
    policy.validate(&cfg.levels).map_err(usage)?;
    let image = ImageBuffer::open(&a.image).map_err(usage)?;
    let img = AnnotatedImage::new(image, a.boxes).map_err(usage)?;
    let grid = preview_grid(&img, &policy, a.samples, a.seed, &cfg).map_err(usage)?;
    grid.save_png(&a.out_png).map_err(runtime)?;
    print_summary(
        &[
            ("rows", policy.sub_policies.len().to_string()),
            ("cols", a.samples.to_string()),
            ("width", grid.width().to_string()),
            ("height", grid.height().to_string()),
        ],
        false,
    );
    Ok(EXIT_OK)
}

fn cmd_search(a: SearchArgs) -> Result<i32, Failure> {
    let space = SearchSpace {
        levels: a.levels.config()?,
        sub_policies: a.sub_policies,
    };
    if space.sub_policies == 0 {
        return Err(usage("--K must be >= 1"));
    }
    if a.budget == 0 {
        return Err(usage("--budget must be >= 1"));
    }
    let reward: Box<dyn RewardFn> = match (&a.reward.synthetic, &a.reward.command) {
        (Some(target_seed), _) => {
            let target = space.random_candidate(&mut rng_from_seed(*target_seed));
            Box::new(TokenMatchReward::new(target, &space).map_err(usage)?)
        }
        (None, Some(cmd)) => Box::new(
            ExternalReward::new(cmd.clone(), space)
                .map_err(usage)?
                .deterministic(a.deterministic),
        ),
        (None, None) => unreachable!("clap enforces one reward source"),
    };
    let opts = EvalOptions {
        repeats: a.repeats.max(1),
        record_timing: a.timing,
    };
    let mut rng = rng_from_seed(a.seed);
    let outcome: SearchOutcome = match a.optimizer {
        Optimizer::Random => random_search(&space, reward.as_ref(), a.budget, opts, &mut rng).map_err(usage)?,
        Optimizer::Evolution => {
            let cfg = EvolutionConfig {
                population: a.population,
                sample: a.tournament,
                budget: a.budget,
            };
            evolution_search(&space, reward.as_ref(), cfg, opts, &mut rng).map_err(usage)?
        }
        Optimizer::Ppo => {
            if a.budget < a.batch {
                return Err(usage(format!("--budget {} is smaller than one batch of {}", a.budget, a.batch)));
            }
            let cfg = PpoConfig {
                iterations: a.budget / a.batch,
                batch: a.batch,
                clip_eps: a.clip_eps,
                lr: a.lr,
                epochs: a.epochs,
                ema_decay: a.ema_decay,
            };
            match ppo_search(&space, reward.as_ref(), cfg, opts, &mut rng) {
                Ok(out) => out.search,
                Err(e @ Error::Numerical(_)) => return Err(runtime(e)),
                Err(e) => return Err(usage(e)),
            }
        }
    };

    let policy = decode(&outcome.best, &space).map_err(runtime)?;
    std::fs::write(&a.out_policy, serialize_policy(&policy, &space.levels))
        .map_err(|e| runtime(Error::io(&a.out_policy, e)))?;
    let log = File::create(&a.out_log).map_err(|e| runtime(Error::io(&a.out_log, e)))?;
    write_history_jsonl(&outcome.history, BufWriter::new(log)).map_err(runtime)?;

    let errors = outcome.history.iter().filter(|e| e.error.is_some()).count();
    print_summary(
        &[
            ("optimizer", format!("{:?}", a.optimizer).to_lowercase()),
            ("evaluations", outcome.history.len().to_string()),
            ("best_reward", outcome.best_reward.to_string()),
            ("errors", errors.to_string()),
        ],
        a.pretty,
    );
    Ok(if errors == 0 { EXIT_OK } else { EXIT_RUNTIME })
}

fn cmd_policy(cmd: PolicyCommand) -> Result<i32, Failure> {
    match cmd {
        PolicyCommand::Validate { source, levels } => {
            let cfg = levels.config()?;
            let policy = source.load(&cfg)?;
            policy.validate(&cfg).map_err(usage)?;
            print_summary(
                &[
                    ("valid", "true".into()),
                    ("sub_policies", policy.sub_policies.len().to_string()),
                ],
                false,
            );
        }
        PolicyCommand::Show { source, levels } => {
            let cfg = levels.config()?;
            let policy = source.load(&cfg)?;
            policy.validate(&cfg).map_err(usage)?;
            print!("{}", serialize_policy(&policy, &cfg));
        }
        PolicyCommand::Cardinality {
            ops,
            magnitude_levels,
            probability_levels,
            ops_per_sub_policy,
            sub_policies,
            digits,
            pretty,
        } => {
            let n = search_space_cardinality(
                ops,
                magnitude_levels,
                probability_levels,
                ops_per_sub_policy,
                sub_policies,
            )
            .map_err(usage)?;
            let approx = scientific(&n, digits);
            if pretty {
                println!(
                    "({ops} x {magnitude_levels} x {probability_levels})^({ops_per_sub_policy} x {sub_policies}) = {n} ≈ {approx}"
                );
            } else {
                print_summary(&[("cardinality", n.to_string()), ("approx", approx)], false);
            }
        }
    }
    Ok(EXIT_OK)
}
