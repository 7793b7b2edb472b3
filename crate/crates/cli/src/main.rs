//! Command-line front end: bijection verification, coupled-path experiments,
//! exponent estimation, the fast selfcheck, and manifest-driven batch runs.
//!
//! Exit codes: 0 = pass, 1 = invariant violation, 2 = usage error.

use clap::{Args, Parser, Subcommand};
use mot_core::orchestrator::{run, selfcheck, Artifact, ExperimentManifest, RunOutcome};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mot", version, about = "Mating-of-trees bijections and distance-exponent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonSeeds {
    /// Number of seeds (the master seed comes from --master-seed or MOT_SEED).
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// Master seed; the run uses master..master+seeds.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Directory to write artifacts into (default: print to stdout).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Spanning-tree model: round trips and the triangle-graph oracle.
    Mullin {
        #[command(subcommand)]
        action: VerifyAction,
    },
    /// Site-percolated triangulation model.
    Uipt {
        #[command(subcommand)]
        action: UiptAction,
    },
    /// Bipolar-oriented model (and Schnyder woods).
    Bipolar {
        #[command(subcommand)]
        action: BipolarAction,
    },
    /// Coupled-path construction between the walk graph and the mated-CRT
    /// graph.
    Couple {
        #[command(subcommand)]
        action: CoupleAction,
    },
    /// Exponent estimation pipelines.
    Exponent {
        #[command(subcommand)]
        action: ExponentAction,
    },
    /// Fast invariant suite (< 60 s).
    Selfcheck,
    /// Execute a JSON manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Subcommand)]
enum VerifyAction {
    Verify {
        #[arg(long, default_value_t = 100)]
        n: i64,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
}

#[derive(Subcommand)]
enum UiptAction {
    Verify {
        #[arg(long, default_value_t = 100)]
        n: i64,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
    Ball {
        #[arg(long, default_value_t = 32)]
        r: u32,
        #[arg(long, default_value_t = 200_000)]
        n: i64,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
}

#[derive(Subcommand)]
enum BipolarAction {
    Verify {
        #[arg(long, default_value_t = 100)]
        n: i64,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
    /// Recover Schnyder woods on rejection-sampled finite maps and round-trip
    /// them through the coloring algorithm.
    Schnyder {
        #[arg(long, default_value_t = 24)]
        len: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        master_seed: Option<u64>,
    },
    Ball {
        #[arg(long, default_value_t = 24)]
        r: u32,
        #[arg(long, default_value_t = 200_000)]
        n: i64,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
}

#[derive(Subcommand)]
enum CoupleAction {
    Run {
        #[arg(long, default_value = "mullin")]
        model: String,
        #[arg(long, default_value_t = 1000)]
        n: i64,
        #[arg(long, default_value_t = 64)]
        mesh: u32,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
}

#[derive(Subcommand)]
enum ExponentAction {
    Ball {
        #[arg(long)]
        model: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 200_000)]
        n: i64,
        #[arg(long, default_value_t = 32)]
        r: u32,
        /// Which artifacts to print when no out-dir is given: csv or json.
        #[arg(long, default_value = "json")]
        out: String,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
    Diam {
        #[arg(long)]
        model: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        /// Comma-separated window sizes.
        #[arg(long, default_value = "256,512,1024,2048")]
        n_grid: String,
        #[arg(long, default_value = "json")]
        out: String,
        #[command(flatten)]
        seeds: CommonSeeds,
    },
}

fn master_seed(cli_value: Option<u64>) -> u64 {
    cli_value
        .or_else(|| std::env::var("MOT_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn blank_manifest(task: &str) -> ExperimentManifest {
    ExperimentManifest {
        task: task.into(),
        model: None,
        rho: None,
        gamma: None,
        n: None,
        n_grid: None,
        radii: None,
        mesh: None,
        seeds: None,
        master_seed: None,
        seed_count: None,
        band_margin: None,
        out_dir: None,
    }
}

fn manifest_for_verify(model: &str, n: i64, seeds: &CommonSeeds) -> ExperimentManifest {
    let mut m = blank_manifest("verify");
    m.model = Some(model.into());
    m.n = Some(n);
    m.master_seed = Some(master_seed(seeds.master_seed));
    m.seed_count = Some(seeds.seeds);
    m.out_dir = seeds.out_dir.clone();
    m
}

fn manifest_for_ball(
    model: &str,
    rho: Option<f64>,
    gamma: Option<f64>,
    n: i64,
    r: u32,
    seeds: &CommonSeeds,
) -> ExperimentManifest {
    let mut m = blank_manifest("exponent-ball");
    m.model = Some(model.into());
    m.rho = rho;
    m.gamma = gamma;
    m.n = Some(n);
    m.radii = Some((8..=r.max(10)).step_by(4).collect());
    m.mesh = Some(8);
    m.master_seed = Some(master_seed(seeds.master_seed));
    m.seed_count = Some(seeds.seeds);
    m.band_margin = Some(0.5);
    m.out_dir = seeds.out_dir.clone();
    m
}

fn finish(outcome: RunOutcome, out_dir: Option<PathBuf>, format: &str) -> ExitCode {
    if let Some(dir) = out_dir {
        if let Err(e) = outcome.write_to(&dir) {
            eprintln!("write failed: {e}");
            return ExitCode::from(1);
        }
        println!("wrote {} artifacts to {}", outcome.artifacts.len(), dir.display());
    } else {
        for line in &outcome.log {
            eprintln!("{line}");
        }
        for a in &outcome.artifacts {
            let want = if format == "csv" { ".csv" } else { ".json" };
            if a.name.ends_with(want) {
                println!("{}", String::from_utf8_lossy(&a.content));
            }
        }
    }
    if outcome.pass {
        println!("PASS");
        ExitCode::SUCCESS
    } else {
        println!("FAIL");
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MOT_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mullin { action } => {
            let VerifyAction::Verify { n, seeds } = action;
            run(&manifest_for_verify("mullin", n, &seeds)).map(|o| (o, seeds.out_dir, "json".to_string()))
        }
        Command::Uipt { action } => match action {
            UiptAction::Verify { n, seeds } => {
                run(&manifest_for_verify("uipt", n, &seeds)).map(|o| (o, seeds.out_dir, "json".to_string()))
            }
            UiptAction::Ball { r, n, seeds } => run(&manifest_for_ball("uipt", None, None, n, r, &seeds))
                .map(|o| (o, seeds.out_dir, "json".to_string())),
        },
        Command::Bipolar { action } => match action {
            BipolarAction::Verify { n, seeds } => {
                run(&manifest_for_verify("bipolar", n, &seeds)).map(|o| (o, seeds.out_dir, "json".to_string()))
            }
            BipolarAction::Ball { r, n, seeds } => run(&manifest_for_ball("bipolar", None, None, n, r, &seeds))
                .map(|o| (o, seeds.out_dir, "json".to_string())),
            BipolarAction::Schnyder { len, count, master_seed: ms } => {
                schnyder_demo(len, count, master_seed(ms)).map(|o| (o, None, "json".to_string()))
            }
        },
        Command::Couple { action } => {
            let CoupleAction::Run { model, n, mesh, seeds } = action;
            let mut m = blank_manifest("couple");
            m.model = Some(model);
            m.n = Some(n);
            m.mesh = Some(mesh);
            m.master_seed = Some(master_seed(seeds.master_seed));
            m.seed_count = Some(seeds.seeds);
            m.out_dir = seeds.out_dir.clone();
            run(&m).map(|o| (o, seeds.out_dir, "csv".to_string()))
        }
        Command::Exponent { action } => match action {
            ExponentAction::Ball { model, gamma, rho, n, r, out, seeds } => {
                run(&manifest_for_ball(&model, rho, gamma, n, r, &seeds)).map(|o| (o, seeds.out_dir, out))
            }
            ExponentAction::Diam { model, gamma, rho, n_grid, out, seeds } => {
                let grid: Vec<i64> = n_grid.split(',').filter_map(|s| s.trim().parse().ok()).collect();
                let mut m = blank_manifest("exponent-diam");
                m.model = Some(model);
                m.rho = rho;
                m.gamma = gamma;
                m.n_grid = Some(grid);
                m.master_seed = Some(master_seed(seeds.master_seed));
                m.seed_count = Some(seeds.seeds);
                m.out_dir = seeds.out_dir.clone();
                run(&m).map(|o| (o, seeds.out_dir, out))
            }
        },
        Command::Selfcheck => {
            let report = selfcheck();
            for c in &report.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return if report.all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
        Command::Run { manifest } => (|| {
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| mot_core::Error::domain(format!("cannot read manifest: {e}")))?;
            let m = ExperimentManifest::from_json(&text)?;
            let dir = m.out_dir.clone();
            run(&m).map(|o| (o, dir, "json".to_string()))
        })(),
    };
    match result {
        Ok((outcome, dir, format)) => finish(outcome, dir, &format),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Sample wooded maps, recover the Schnyder coloring, and round-trip them.
fn schnyder_demo(len: usize, count: usize, seed: u64) -> mot_core::Result<RunOutcome> {
    use mot_core::bipolar::{
        sample_wooded_walk, satisfies_wood_shape, schnyder_from_bipolar, sew_bipolar_finite,
        wooded_round_trip,
    };
    use mot_core::rng::StreamRng;
    use mot_core::walk::{make_distribution, Model};
    let d = make_distribution(Model::BipolarTriangulation, None)?;
    let mut rng = StreamRng::new(seed);
    let mut done = 0usize;
    let mut pass = 0usize;
    let mut attempts = 0usize;
    while done < count && attempts < count.saturating_mul(10_000) {
        attempts += 1;
        if let Some(w) = sample_wooded_walk(&d, len, &mut rng) {
            let st = sew_bipolar_finite(&w)?;
            if !satisfies_wood_shape(&st) {
                continue;
            }
            let wood = schnyder_from_bipolar(&st)?;
            if wooded_round_trip(&st, &wood) {
                pass += 1;
            }
            done += 1;
        }
    }
    let doc = serde_json::json!({"count": done, "pass": pass});
    let content = serde_json::to_vec_pretty(&doc).unwrap();
    Ok(RunOutcome {
        manifest_hash: 0,
        pass: done > 0 && pass == done,
        log: vec![format!("schnyder round trips: {pass}/{done} (attempts {attempts})")],
        artifacts: vec![Artifact {
            name: "schnyder.json".into(),
            fnv: mot_core::io::fnv1a(&content),
            content,
        }],
    })
}
