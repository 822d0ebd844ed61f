use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discsde::harness::{self, ExperimentConfig};
use discsde::{models, Error};

/// Default output directory when neither `--out` nor the config sets one.
const OUT_ENV: &str = "DISCSDE_OUT";

#[derive(Parser)]
#[command(
    name = "discsde",
    version,
    about = "Euler-Maruyama and transformed schemes for SDEs with discontinuous drift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Strong-convergence study over dyadic step sizes.
    Convergence(Common),
    /// Sequential EM/GM timing at 512 steps and 1024 paths.
    Benchmark(Common),
    /// Time spent near the discontinuity as a function of the tube width.
    Occupation(Common),
    /// Sampled check of the model assumptions.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Model name (step, circle, dividend, prescribed, ...).
    #[arg(long)]
    model: Option<String>,
    /// em, gm or both.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// k_min:k_max.
    #[arg(long)]
    levels: Option<String>,
    /// Experiment file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let usage = |e: Error| Failure::Usage(e.to_string());
        let mut cfg = ExperimentConfig::default();
        if let Some(dir) = std::env::var_os(OUT_ENV) {
            cfg.out = PathBuf::from(dir);
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply(&text).map_err(usage)?;
        }
        if let Some(m) = &self.model {
            cfg.model = m.clone();
        }
        if let Some(s) = &self.scheme {
            cfg.set("scheme", s).map_err(usage)?;
        }
        if let Some(p) = self.paths {
            cfg.n_paths = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(l) = &self.levels {
            cfg.set("levels", l).map_err(usage)?;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        if let Err(e @ Error::UnknownModel(_)) = models::by_name(&cfg.model, &cfg.params) {
            return Err(Failure::Usage(format!("{e}; known models: {}", models::MODEL_NAMES.join(", "))));
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let fail = |e: Error| Failure::Run(e.to_string());
    match command {
        Command::Convergence(common) => {
            let cfg = common.resolve()?;
            let reports = harness::run_convergence(&cfg).map_err(|e| match e {
                Error::InsufficientLevels { .. } => Failure::Usage(e.to_string()),
                other => fail(other),
            })?;
            for r in &reports {
                let slope = r.slope.map_or("undefined".to_string(), |s| format!("{s:.4}"));
                println!("{} {}: slope {slope}", r.model, r.scheme);
                for l in &r.levels {
                    println!("  k={:<2} delta={:<12} err={:.6e}", l.k, l.delta, l.error);
                }
                if r.degenerate() {
                    println!("  warning: raw errors vanish; normalization undefined");
                }
            }
            for p in harness::write_convergence(&cfg.out, &reports, cfg.dump_paths).map_err(fail)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Benchmark(common) => {
            let mut cfg = common.resolve()?;
            if cfg.threads > 1 {
                return Err(Failure::Usage(format!("benchmark is sequential; {} threads requested", cfg.threads)));
            }
            cfg.threads = 1;
            let rows = harness::run_benchmark(&cfg).map_err(fail)?;
            for r in &rows {
                println!("{} {}: {:.3} s, error {:.4e}", r.model, r.scheme, r.seconds, r.error);
            }
            println!("wrote {}", harness::write_benchmark(&cfg.out, &rows).map_err(fail)?.display());
        }
        Command::Occupation(common) => {
            let cfg = common.resolve()?;
            let report = harness::run_occupation(&cfg).map_err(|e| match e {
                Error::DegenerateFit(_) => Failure::Usage(e.to_string()),
                other => fail(other),
            })?;
            let s = &report.stats;
            for k in 0..s.eps_grid.len() {
                println!("eps={:<8} occupation={:.6e} (se {:.2e})", s.eps_grid[k], s.occupation[k], s.std_error[k]);
            }
            match s.fitted_exponent {
                Some(e) => println!("fitted exponent {e:.4}"),
                None => println!("fitted exponent undefined"),
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", harness::write_occupation(&cfg.out, &report).map_err(fail)?.display());
        }
        Command::Check(common) => {
            let cfg = common.resolve()?;
            let report = harness::run_check(&cfg).map_err(fail)?;
            println!("{report}");
            harness::write_check(&cfg.out, &report).map_err(fail)?;
            if !report.all_passed() {
                return Err(Failure::Run("assumption check failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
