//! `pncg run`: step a scene, write frames, logs and a report.

use crate::obj::write_surface_obj;
use crate::report::{FrameReport, RunReport, RunStatus, RunSummary, SettingsReport};
use crate::CliError;
use pncg_core::sim::{Precision, Scene, Simulation};
use pncg_core::solver::{BetaVariant, ConvergenceRecord, Splitting};
use pncg_core::Real;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CONVERGENCE_HEADER: &str = "frame,iter,dE,alpha,grad_inf,n_constraints,capped,max_step";

/// Command-line overrides of scene settings.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Time step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Barrier activation distance.
    #[arg(long)]
    pub d_hat: Option<f64>,
    /// Barrier stiffness.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Relative energy-decrease tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub iter_max: Option<usize>,
    /// dk, fr or prp.
    #[arg(long)]
    pub beta: Option<BetaVariant>,
    /// off, per-object or collision-partition.
    #[arg(long)]
    pub splitting: Option<Splitting>,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// f32 or f64.
    #[arg(long)]
    pub precision: Option<Precision>,
    /// Fixed-order reductions; repeated runs give identical logs.
    #[arg(long)]
    pub deterministic: bool,
    /// Worker threads for data-parallel loops (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, scene: &mut Scene) {
        let s = &mut scene.solver;
        if let Some(h) = self.h {
            s.h = h;
        }
        if let Some(d) = self.d_hat {
            s.d_hat = Some(d);
        }
        if let Some(k) = self.kappa {
            s.kappa = k;
        }
        if let Some(e) = self.epsilon {
            s.epsilon = e;
        }
        if let Some(n) = self.iter_max {
            s.iter_max = n;
        }
        if let Some(b) = self.beta {
            s.beta_variant = b;
        }
        if let Some(sp) = self.splitting {
            s.splitting = sp;
        }
        if let Some(p) = self.precision {
            s.precision = p;
        }
        if self.deterministic {
            s.deterministic = true;
        }
        if let Some(f) = self.frames {
            scene.frames = f;
        }
        if let Some(o) = &self.out {
            scene.output.directory = o.clone();
        }
    }
}

/// Runs `f` inside a pool of `threads` workers, or the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub overrides: Overrides,
    /// Brute-force audit instead of the hash-accelerated one.
    pub exact_audit: bool,
    /// Suppress per-frame lines on stdout.
    pub quiet: bool,
}

/// Loads `scene_path`, applies overrides and runs every frame. Artifacts are
/// written as the run progresses; the report is written even on failure.
pub fn run(scene_path: &Path, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut scene = Scene::load(scene_path)?;
    opts.overrides.apply(&mut scene);
    scene.validate()?;
    with_threads(opts.overrides.threads, || match scene.solver.precision {
        Precision::F64 => run_scene::<f64>(scene, opts),
        Precision::F32 => run_scene::<f32>(scene, opts),
    })?
}

fn run_scene<T: Real>(scene: Scene, opts: &RunOptions) -> Result<RunReport, CliError> {
    let out = scene.output.directory.clone();
    let frames_dir = out.join("frames");
    fs::create_dir_all(&frames_dir)?;
    if scene.output.obj {
        // Stale frames from an earlier, longer run would confuse the audit.
        for entry in fs::read_dir(&frames_dir)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "obj") {
                fs::remove_file(p)?;
            }
        }
    }

    let mut sim = Simulation::<T>::new(scene)?;
    let config = sim.config.clone();
    let mut csv = BufWriter::new(File::create(out.join("convergence.csv"))?);
    writeln!(csv, "{CONVERGENCE_HEADER}")?;

    let mut report = RunReport {
        scene: sim.scene.name.clone(),
        status: RunStatus::Ok,
        error: None,
        num_vertices: sim.mesh.num_vertices(),
        num_tets: sim.mesh.num_tets(),
        settings: SettingsReport {
            h: config.h,
            d_hat: config.d_hat,
            kappa: config.kappa,
            epsilon: config.epsilon,
            iter_max: config.iter_max,
            beta_variant: config.beta_variant.to_string(),
            splitting: config.splitting.to_string(),
            precision: sim.scene.solver.precision.to_string(),
            deterministic: config.deterministic,
        },
        summary: RunSummary::default(),
        frames: Vec::new(),
    };

    let total = sim.scene.frames;
    let every = sim.scene.output.every.max(1);
    let mut failure = None;
    for _ in 0..total {
        let started = Instant::now();
        let record = match sim.step() {
            Ok(r) => r,
            Err(e) => {
                report.status = RunStatus::SolverAbort;
                failure = Some(CliError::Solver(e.to_string()));
                break;
            }
        };
        let wall = started.elapsed().as_secs_f64();
        let frame = sim.state.frame;
        write_rows(&mut csv, frame, &record)?;

        let audit = sim.audit(opts.exact_audit);
        let mut fr = FrameReport::new(frame, sim.state.t, &record, wall);
        fr.min_distance = audit.min_distance;
        fr.min_ground_distance = audit.min_ground_distance;
        let ok = audit.penetration_free();
        if !opts.quiet {
            println!(
                "frame {frame:04} t={:.4} iters={} term={:?} contacts={} min_dist={:.6e} intersections={} audit={}",
                sim.state.t,
                fr.iterations,
                fr.termination,
                fr.max_constraints,
                fr.min_distance,
                audit.intersections,
                if ok { "ok" } else { "FAIL" }
            );
        }
        report.frames.push(fr);

        if sim.scene.output.obj && (frame % every == 0 || frame == total || !ok) {
            let path = frames_dir.join(format!("frame_{frame:04}.obj"));
            let w = BufWriter::new(File::create(path)?);
            write_surface_obj(w, &sim.mesh, &sim.state.x, &format!("frame {frame} t={}", sim.state.t))?;
        }
        if !ok {
            report.status = RunStatus::Penetration;
            failure = Some(CliError::Penetration(format!(
                "frame {frame}: min distance {:e}, {} intersecting edge-triangle pairs",
                audit.min_distance, audit.intersections
            )));
            break;
        }
    }
    csv.flush()?;
    report.summary = RunSummary::of(&report.frames);
    report.error = failure.as_ref().map(|e| e.to_string());
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.into()))?;
    fs::write(out.join("report.json"), json + "\n")?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

fn write_rows<W: Write>(w: &mut W, frame: usize, record: &ConvergenceRecord) -> std::io::Result<()> {
    for r in &record.rows {
        writeln!(w, "{frame},{},{:e}", r.csv_fields(), r.max_step)?;
    }
    Ok(())
}

/// Parses a `convergence.csv` written by [`run`].
pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRow>, CliError> {
    let src = fs::read_to_string(path)?;
    let mut lines = src.lines();
    match lines.next() {
        Some(h) if h == CONVERGENCE_HEADER => {}
        other => return Err(CliError::Config(format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, l)| ConvergenceRow::parse(l).ok_or_else(|| CliError::Config(format!("bad row {}: {l}", i + 2))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub frame: usize,
    pub iter: usize,
    pub de: f64,
    pub alpha: f64,
    pub grad_inf: f64,
    pub n_constraints: usize,
    pub capped: bool,
    pub max_step: f64,
}

impl ConvergenceRow {
    pub fn parse(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return None;
        }
        Some(ConvergenceRow {
            frame: f[0].parse().ok()?,
            iter: f[1].parse().ok()?,
            de: f[2].parse().ok()?,
            alpha: f[3].parse().ok()?,
            grad_inf: f[4].parse().ok()?,
            n_constraints: f[5].parse().ok()?,
            capped: f[6].parse().ok()?,
            max_step: f[7].parse().ok()?,
        })
    }
}
