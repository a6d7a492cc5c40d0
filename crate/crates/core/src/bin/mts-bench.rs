use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mts_core::datagen::{bounding_box, diameter, downsample, load_ply};
use mts_core::harness::{
    bound_plot_script, format_summary, run_bound_experiment, run_sweep, summarize, sweep_plot_script, write_bound_csv,
    write_csv, HarnessError, SweepSpec,
};
use mts_core::solvers::Point3;

/// Outlier-rejection benchmarks: ADAPT, RANSAC, greedy trimming and the
/// exhaustive MTS oracle on synthetic registration and linear problems.
#[derive(Parser)]
#[command(name = "mts-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point-cloud registration sweep over outlier fractions.
    Register {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        reg: RegistrationFlags,
    },
    /// Linear regression sweep over outlier fractions.
    Linear {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lin: LinearFlags,
    },
    /// Compare each method's certificate with the exhaustive optimum on small
    /// linear instances.
    BoundExperiment {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        lin: LinearFlags,
        /// Comma-separated planted outlier counts.
        #[arg(long)]
        planted: Option<String>,
    },
    /// Summarize an ASCII PLY point cloud.
    PlyInfo {
        path: PathBuf,
        /// Also report the cloud after subsampling to this many points.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// Key-value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated outlier fractions in [0, 1).
    #[arg(long)]
    outliers: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Base seed; trial j uses seed + j.
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated subset of adapt, greedy, oracle, ransac.
    #[arg(long)]
    methods: Option<String>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a matplotlib script for the CSV (requires --out).
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long = "t-conv")]
    t_conv: Option<String>,
    #[arg(long = "g-step")]
    g_step: Option<String>,
    #[arg(long = "max-solver-calls")]
    max_solver_calls: Option<String>,
    #[arg(long = "ransac-iterations")]
    ransac_iterations: Option<String>,
    /// consensus or sample.
    #[arg(long = "ransac-refit")]
    ransac_refit: Option<String>,
    /// Chi-square probability behind RANSAC's threshold and the oracle budget.
    #[arg(long = "threshold-probability")]
    threshold_probability: Option<String>,
}

#[derive(Args)]
struct RegistrationFlags {
    #[arg(long)]
    points: Option<String>,
    /// Noise standard deviation as a fraction of the cloud diameter.
    #[arg(long = "noise-frac")]
    noise_frac: Option<String>,
    /// Translation bound as a fraction of the cloud diameter.
    #[arg(long = "translation-frac")]
    translation_frac: Option<String>,
    /// ASCII PLY cloud to subsample instead of the unit cube.
    #[arg(long)]
    cloud: Option<String>,
}

#[derive(Args)]
struct LinearFlags {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long = "noise-sigma")]
    noise_sigma: Option<String>,
    #[arg(long = "outlier-min")]
    outlier_min: Option<String>,
    #[arg(long = "outlier-max")]
    outlier_max: Option<String>,
}

fn apply(spec: &mut SweepSpec, settings: &[(&str, &Option<String>)]) -> Result<(), HarnessError> {
    for (key, value) in settings {
        if let Some(v) = value {
            spec.set(key, v)?;
        }
    }
    Ok(())
}

impl Common {
    fn apply(&self, spec: &mut SweepSpec) -> Result<(), HarnessError> {
        if let Some(path) = &self.config {
            spec.load_config(path)?;
        }
        if let Some(out) = &self.out {
            spec.output = Some(out.clone());
        }
        apply(
            spec,
            &[
                ("outliers", &self.outliers),
                ("trials", &self.trials),
                ("seed", &self.seed),
                ("methods", &self.methods),
                ("gamma", &self.gamma),
                ("delta", &self.delta),
                ("t_conv", &self.t_conv),
                ("g_step", &self.g_step),
                ("max_solver_calls", &self.max_solver_calls),
                ("ransac_iterations", &self.ransac_iterations),
                ("ransac_refit", &self.ransac_refit),
                ("threshold_probability", &self.threshold_probability),
            ],
        )
    }
}

impl LinearFlags {
    fn apply(&self, spec: &mut SweepSpec) -> Result<(), HarnessError> {
        apply(
            spec,
            &[
                ("linear_n", &self.n),
                ("linear_m", &self.m),
                ("noise_sigma", &self.noise_sigma),
                ("outlier_min", &self.outlier_min),
                ("outlier_max", &self.outlier_max),
            ],
        )
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

/// Writes the CSV to the spec's output (or stdout) and the optional plotting
/// script. Returns whether the CSV went to stdout.
fn emit(
    spec: &SweepSpec,
    plot: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> Result<(), HarnessError>,
    script: fn(&str) -> String,
) -> Result<bool, HarnessError> {
    if plot.is_some() && spec.output.is_none() {
        return Err(HarnessError::config(
            "plot",
            "--plot needs --out so the script can find the CSV",
        ));
    }
    match &spec.output {
        Some(path) => {
            let mut w = create(path)?;
            write(&mut w)?;
            w.flush().map_err(|e| HarnessError::io(path, e))?;
            if let Some(plot) = plot {
                std::fs::write(plot, script(&path.to_string_lossy())).map_err(|e| HarnessError::io(plot, e))?;
            }
            Ok(false)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            Ok(true)
        }
    }
}

fn sweep(spec: SweepSpec, common: &Common) -> Result<(), HarnessError> {
    let records = run_sweep(&spec)?;
    let to_stdout = emit(
        &spec,
        common.plot.as_deref(),
        |w| write_csv(&records, w),
        sweep_plot_script,
    )?;
    let table = format_summary(&summarize(&records));
    if to_stdout {
        eprint!("{table}");
    } else {
        print!("{table}");
    }
    Ok(())
}

fn ply_info(path: &Path, points: Option<usize>, seed: u64) -> Result<(), HarnessError> {
    let cloud = load_ply(path)?;
    let describe = |label: &str, pts: &[Point3]| {
        let (lo, hi) = bounding_box(pts);
        println!("{label}: {} points", pts.len());
        println!("  bounding box min: [{}, {}, {}]", lo.x, lo.y, lo.z);
        println!("  bounding box max: [{}, {}, {}]", hi.x, hi.y, hi.z);
        println!("  diameter: {}", diameter(pts));
    };
    describe(&path.display().to_string(), &cloud);
    if let Some(n) = points {
        let sub = downsample(&cloud, n, seed)?;
        describe(&format!("subsampled (seed {seed})"), &sub);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Register { common, reg } => {
            let mut spec = SweepSpec::registration();
            common.apply(&mut spec)?;
            apply(
                &mut spec,
                &[
                    ("points", &reg.points),
                    ("noise_frac", &reg.noise_frac),
                    ("translation_frac", &reg.translation_frac),
                    ("cloud", &reg.cloud),
                ],
            )?;
            sweep(spec, &common)
        }
        Command::Linear { common, lin } => {
            let mut spec = SweepSpec::linear();
            common.apply(&mut spec)?;
            lin.apply(&mut spec)?;
            sweep(spec, &common)
        }
        Command::BoundExperiment { common, lin, planted } => {
            let mut spec = SweepSpec::bound_experiment();
            common.apply(&mut spec)?;
            lin.apply(&mut spec)?;
            apply(&mut spec, &[("planted", &planted)])?;
            let rows = run_bound_experiment(&spec)?;
            emit(
                &spec,
                common.plot.as_deref(),
                |w| write_bound_csv(&rows, w),
                bound_plot_script,
            )?;
            let certified = rows.iter().filter(|r| r.chi.dominates(r.ratio_k)).count();
            eprintln!("{certified}/{} rows satisfy ratio <= chi", rows.len());
            Ok(())
        }
        Command::PlyInfo { path, points, seed } => ply_info(&path, points, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mts-bench: {}", e.to_string().replace('\n', " "));
            ExitCode::from(match e {
                HarnessError::Config { .. } => 2,
                _ => 1,
            })
        }
    }
}
