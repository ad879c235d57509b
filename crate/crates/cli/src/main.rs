mod config;
mod plot;
mod spec;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use hrnvo::codebook::CodebookSet;
use hrnvo::eval::{evaluate, AngleMetric, CalibrationWindow, ErrorMode, Trajectory, DEFAULT_RATE};
use hrnvo::events::{load_dataset, load_ground_truth, preprocess, ImuSample, PreprocessConfig, RawEvent};
use hrnvo::frame::build_frame_transform;
use hrnvo::pipeline::{track_with, ImuFeed};
use hrnvo::resonator::Estimate;
use hrnvo::synth::{generate_dataset, write_dataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::RunConfig;
use spec::{SceneFile, SynthFile, TrajWithCapture};

#[derive(Parser)]
#[command(name = "hrn-vo", version, about = "Event-camera visual odometry with a hierarchical resonator network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a dataset and write the estimated trajectory.
    Run(RunArgs),
    /// Calibrate a trajectory against ground truth and report errors.
    Eval(EvalArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the dataset path of the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enable IMU fusion.
    #[arg(long)]
    fusion: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the decoded coefficient profiles.
    #[arg(long)]
    profiles: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Trajectory CSV written by `run`.
    #[arg(long)]
    traj: PathBuf,
    /// Ground-truth file (t x y z qx qy qz qw).
    #[arg(long)]
    gt: PathBuf,
    /// Run config whose [eval] table supplies mode and window.
    #[arg(long)]
    config: Option<PathBuf>,
    /// rot3 or planar [default: rot3].
    #[arg(long)]
    mode: Option<ErrorMode>,
    /// last-10s-of-train[@pct], split-70-30 or range:a:b [default: last-10s-of-train].
    #[arg(long)]
    window: Option<CalibrationWindow>,
    /// Norm of per-axis angle differences instead of the geodesic angle.
    #[arg(long)]
    per_axis: bool,
    /// Resampling rate in Hz.
    #[arg(long, default_value_t = DEFAULT_RATE)]
    rate: f64,
    #[arg(long, default_value = "eval")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Complete spec, e.g. a manifest of an earlier dataset.
    #[arg(long, conflicts_with_all = ["scene", "traj"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Trajectory, optionally with seed, window, event_noise and [imu].
    #[arg(long)]
    traj: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Data(String),
    Eval(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Output(_) => 1,
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Eval(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Data(m) | Failure::Eval(m) | Failure::Output(m) => m,
        }
    }
}

fn config_err(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn data_err(e: impl ToString) -> Failure {
    Failure::Data(e.to_string())
}

fn output_err(e: impl ToString) -> Failure {
    Failure::Output(e.to_string())
}

/// Files written into an output directory; removed again unless committed.
struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self, Failure> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| output_err(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), created_dir, files: Vec::new(), committed: false })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, Failure> {
        let path = self.reserve(name);
        fs::write(&path, contents).map_err(|e| output_err(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn reserve(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        path
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

struct Loaded {
    events: Vec<RawEvent>,
    imu: Vec<ImuSample>,
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(&args.config).map_err(Failure::Config)?;
    if let Some(d) = args.dataset {
        cfg.dataset.path = Some(d);
    }
    if let Some(o) = args.out {
        cfg.output.dir = o;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.fusion.enabled |= args.fusion;
    cfg.output.profiles |= args.profiles;
    let r = cfg.resolve().map_err(Failure::Config)?;

    let data = match (&cfg.dataset.path, &cfg.dataset.synth) {
        (Some(dir), _) => {
            let d = load_dataset(dir, r.format, r.sensor).map_err(data_err)?;
            Loaded { events: d.events, imu: d.imu }
        }
        (None, Some(s)) => {
            let spec = s.build().map_err(config_err)?;
            let d = generate_dataset(&spec).map_err(data_err)?;
            Loaded { events: d.events, imu: d.imu }
        }
        (None, None) => unreachable!("resolve requires a dataset"),
    };
    let pre = PreprocessConfig {
        sensor: r.sensor,
        grid: r.cart,
        package_size: cfg.preprocess.package_size,
        binarize_threshold: cfg.preprocess.binarize_threshold,
    };
    let frames = preprocess(&data.events, &pre).map_err(config_err)?;
    if frames.is_empty() {
        return Err(data_err(format!(
            "{} events do not fill one package of {}",
            data.events.len(),
            pre.package_size
        )));
    }
    if cfg.fusion.enabled && data.imu.is_empty() {
        return Err(data_err("fusion needs IMU samples"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let codebooks = CodebookSet::build(r.cart, r.polar, r.kind, r.cart_dim, r.polar_dim, &mut rng).map_err(config_err)?;
    let transform = build_frame_transform(&codebooks.cart, &codebooks.polar).map_err(config_err)?;
    let imu = cfg.fusion.enabled.then(|| ImuFeed {
        samples: &data.imu,
        pan_scale: cfg.fusion.pan_scale,
        tilt_scale: cfg.fusion.tilt_scale,
    });

    let mut out = Outputs::create(&cfg.output.dir)?;
    let mut estimates: Vec<Estimate> = Vec::with_capacity(frames.len());
    let mut profiles = [String::new(), String::new(), String::new()];
    let profiles_on = cfg.output.profiles;
    track_with(Arc::new(codebooks), Arc::new(transform), &frames, r.resonator, imu, &mut rng, |e| {
        if profiles_on {
            for (buf, c) in profiles.iter_mut().zip([&e.h_profile, &e.v_profile, &e.r_profile]) {
                let _ = write!(buf, "{:.6}", e.t_mid);
                for x in &c.0 {
                    let _ = write!(buf, ",{x:.6}");
                }
                buf.push('\n');
            }
        }
        if estimates.last().is_none_or(|p| e.t_mid > p.t_mid) {
            estimates.push(e);
        }
        Ok(())
    })
    .map_err(data_err)?;

    let traj = Trajectory::from_estimates(&estimates).map_err(data_err)?;
    out.write("trajectory.csv", traj.to_csv())?;
    if profiles_on {
        for (axis, buf) in ["h", "v", "r"].iter().zip(&profiles) {
            out.write(&format!("profile_{axis}.csv"), buf)?;
        }
    }
    let mut echo = cfg.clone();
    if let Some(p) = &echo.dataset.path {
        echo.dataset.path = Some(fs::canonicalize(p).map_err(data_err)?);
    }
    let manifest = format!(
        "# hrn-vo {}\n# events = {}\n# packages = {}\n# estimates = {}\n{}",
        env!("CARGO_PKG_VERSION"),
        data.events.len(),
        frames.len(),
        estimates.len(),
        toml::to_string(&echo).map_err(output_err)?
    );
    out.write("manifest.toml", manifest)?;
    out.commit();
    println!("{}", cfg.output.dir.join("trajectory.csv").display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let section = match &args.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Config)?.eval,
        None => Default::default(),
    };
    let mode = match args.mode {
        Some(m) => m,
        None => section.mode.parse().map_err(config_err)?,
    };
    let window = match args.window {
        Some(w) => w,
        None => section.window.parse().map_err(config_err)?,
    };
    let net = Trajectory::read_csv(&args.traj).map_err(data_err)?;
    let (gt, _) = load_ground_truth(&args.gt).map_err(data_err)?;
    let gt = Trajectory::from_ground_truth(&gt, mode).map_err(data_err)?;
    let metric = if args.per_axis { AngleMetric::PerAxis } else { AngleMetric::Geodesic };
    let report = evaluate(&net, &gt, mode, window, metric, args.rate).map_err(|e| Failure::Eval(e.to_string()))?;
    let calibration = report.calibration.as_ref().expect("evaluate always calibrates");
    let calibrated = calibration.apply(&net);

    let mut out = Outputs::create(&args.out)?;
    let mut text = report.to_text();
    let _ = writeln!(text, "window: {window}");
    out.write("report.txt", &text)?;
    out.write("errors.csv", report.series_csv())?;
    out.write("calibrated.csv", calibrated.to_csv())?;
    let axes = match mode {
        ErrorMode::Rotational => ["pan [deg]", "tilt [deg]", "roll [deg]"],
        ErrorMode::Planar => ["x", "y", "roll [deg]"],
    };
    let path = out.reserve("trajectory.svg");
    plot::trajectory_overlay(&path, &calibrated, &gt, axes).map_err(output_err)?;
    let path = out.reserve("errors.svg");
    plot::error_over_time(&path, &report).map_err(output_err)?;
    out.commit();
    print!("{text}");
    Ok(())
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let mut file = match &args.spec {
        Some(p) => read_toml::<SynthFile>(p)?,
        None => {
            let scene = match &args.scene {
                Some(p) => read_toml::<SceneFile>(p)?,
                None => SceneFile::default(),
            };
            let traj = match &args.traj {
                Some(p) => read_toml::<TrajWithCapture>(p)?,
                None => TrajWithCapture::default(),
            };
            SynthFile { capture: traj.capture, trajectory: traj.trajectory, scene }
        }
    };
    if let Some(s) = args.seed {
        file.capture.seed = s;
    }
    let spec = file.build().map_err(config_err)?;
    let data = generate_dataset(&spec).map_err(config_err)?;
    let existed = args.out.exists();
    match write_dataset(&args.out, &spec, &data) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            Ok(())
        }
        Err(e) => {
            if !existed {
                let _ = fs::remove_dir_all(&args.out);
            }
            Err(output_err(e))
        }
    }
}
