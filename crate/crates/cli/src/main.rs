use clap::{Parser, Subcommand};
use pncg_cli::ablation::{ablation, write_ablation};
use pncg_cli::audit::{audit_dir, parse_plane};
use pncg_cli::run::{run, Overrides, RunOptions};
use pncg_cli::{exit, CliError};
use pncg_core::contact::HalfSpace;
use pncg_core::solver::BetaVariant;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pncg", version, about = "Barrier-based elastodynamics with a preconditioned nonlinear CG solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scene, writing OBJ frames, convergence.csv and report.json.
    Run {
        scene: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Audit every frame with the all-pairs search.
        #[arg(long)]
        exact_audit: bool,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Compare β formulas over the first time steps of a scene.
    Ablation {
        scene: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "dk,fr,prp")]
        variants: Vec<BetaVariant>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Minimum surface distance of every OBJ frame in a directory.
    Audit {
        frames_dir: PathBuf,
        /// Initial hash search radius.
        #[arg(long)]
        d_hat: f64,
        /// All-pairs search instead of the spatial hash.
        #[arg(long)]
        exact: bool,
        /// Half-space `px,py,pz,nx,ny,nz`; repeatable.
        #[arg(long, value_parser = parse_plane)]
        plane: Vec<HalfSpace>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run {
            scene,
            overrides,
            exact_audit,
            quiet,
        } => {
            let report = run(&scene, &RunOptions { overrides, exact_audit, quiet })?;
            let s = &report.summary;
            println!(
                "{} frames, avg iters {:.2}, contacts avg {:.1} max {}, min distance {:e}, {:.2} s",
                s.frames, s.avg_iters, s.avg_contacts, s.max_contacts, s.min_distance, s.wall_time_s
            );
            Ok(exit::OK)
        }
        Command::Ablation {
            scene,
            variants,
            steps,
            overrides,
        } => {
            let out = overrides.out.clone().unwrap_or_else(|| PathBuf::from("out/ablation"));
            let report = ablation(&scene, &variants, steps, &overrides)?;
            write_ablation(&report, &out)?;
            print!("{}", report.table());
            Ok(exit::OK)
        }
        Command::Audit {
            frames_dir,
            d_hat,
            exact,
            plane,
        } => {
            let audits = audit_dir(&frames_dir, d_hat, &plane, exact)?;
            let mut failed = 0;
            for a in &audits {
                let name = a.path.file_name().unwrap_or_default().to_string_lossy();
                println!(
                    "{name} min_dist={:e} min_ground={:e} intersections={} {}",
                    a.report.min_distance,
                    a.report.min_ground_distance,
                    a.report.intersections,
                    if a.ok() { "ok" } else { "FAIL" }
                );
                failed += usize::from(!a.ok());
            }
            if failed > 0 {
                eprintln!("{failed} of {} frames penetrate", audits.len());
                Ok(exit::PENETRATION)
            } else {
                Ok(exit::OK)
            }
        }
    }
}
