use std::path::PathBuf;
use std::process::ExitCode;

use bulbar_core::commands::{run_evaluate, run_features, run_stats, run_synth, run_validate};
use bulbar_core::config::{GridPreset, RunConfig};
use bulbar_core::dataset::Modality;
use bulbar_core::regress::ModelFamily;
use bulbar_core::synth::{SynthParams, MANIFEST_FILE};
use bulbar_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Speech impairment scoring from audio and facial landmarks.
#[derive(Parser)]
#[command(name = "bulbar", version)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract feature tables and the exclusion log.
    Features(RunArgs),
    /// Nested leave-one-subject-out evaluation of the requested models.
    Evaluate(RunArgs),
    /// Friedman test over the per-condition reports in the output directory.
    Stats {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic cohort with known targets.
    Synth(SynthArgs),
    /// Check a manifest and every file it references.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModalityArg {
    Audio,
    Video,
    Multimodal,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Svr,
    Mlp,
    #[value(alias = "xgb")]
    Gbt,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Full,
    Smoke,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_enum)]
    modality: Option<ModalityArg>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Master seed (unsigned 64-bit).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Clamp predictions to the 5–25 score range.
    #[arg(long)]
    clamp_predictions: bool,
    /// Hyperparameter grid preset; explicit grids in the config still apply.
    #[arg(long, value_enum)]
    grid: Option<GridArg>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = SynthParams::default().n_subjects)]
    subjects: usize,
    #[arg(long, default_value_t = SynthParams::default().reps_per_subject)]
    reps: usize,
    #[arg(long, default_value_t = SynthParams::default().als_fraction)]
    als_fraction: f64,
    #[arg(long, default_value_t = SynthParams::default().seed)]
    seed: u64,
}

fn base_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = base_config(self.config.as_ref())?;
        if let Some(m) = &self.manifest {
            cfg.manifest = Some(m.clone());
        }
        if let Some(m) = self.modality {
            cfg.modalities = match m {
                ModalityArg::Audio => vec![Modality::Audio],
                ModalityArg::Video => vec![Modality::Video],
                ModalityArg::Multimodal => vec![Modality::Multimodal],
                ModalityArg::All => Modality::ALL.to_vec(),
            };
        }
        if let Some(m) = self.model {
            cfg.models = match m {
                ModelArg::Svr => vec![ModelFamily::Svr],
                ModelArg::Mlp => vec![ModelFamily::Mlp],
                ModelArg::Gbt => vec![ModelFamily::Gbt],
                ModelArg::All => ModelFamily::ALL.to_vec(),
            };
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if self.clamp_predictions {
            cfg.clamp_predictions = true;
        }
        if let Some(g) = self.grid {
            cfg.grid.preset = match g {
                GridArg::Full => GridPreset::Full,
                GridArg::Smoke => GridPreset::Smoke,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Features(args) => {
            let out = run_features(&args.config()?)?;
            for (m, r) in &out.reconciled {
                println!("{m}: {} instances, {} excluded", r.instances.len(), r.exclusions.len());
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Evaluate(args) => {
            let out = run_evaluate(&args.config()?)?;
            println!("modality\tmodel\tmrmse\tmrmse_als\tmrmse_hc\tcv_als\tcv_hc");
            for r in &out.reports {
                println!(
                    "{}\t{}\t{:.4}\t{}\t{}\t{}\t{}",
                    r.modality,
                    r.family,
                    r.mrmse,
                    opt(r.mrmse_als),
                    opt(r.mrmse_hc),
                    opt(r.cv_als),
                    opt(r.cv_hc)
                );
            }
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
        }
        Command::Stats { out, config } => {
            let cfg = base_config(config.as_ref())?;
            let dir = out.unwrap_or(cfg.out);
            let s = run_stats(&dir)?;
            println!(
                "chi2 = {:.4}, df = {}, p = {:.4} ({} subjects, {} conditions)",
                s.result.chi2,
                s.result.df,
                s.result.p,
                s.subjects.len(),
                s.conditions.len()
            );
            println!("wrote {}", s.file.display());
        }
        Command::Synth(a) => {
            let params = SynthParams {
                n_subjects: a.subjects,
                reps_per_subject: a.reps,
                als_fraction: a.als_fraction,
                seed: a.seed,
                ..SynthParams::default()
            };
            let cohort = run_synth(&params, &a.out)?;
            println!("{} subjects written", cohort.truth.len());
            println!("wrote {}", a.out.join(MANIFEST_FILE).display());
        }
        Command::Validate { manifest } => {
            let s = run_validate(&manifest)?;
            println!("ok: {} subjects, {} recordings, {} repetitions", s.subjects, s.recordings, s.repetitions);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
