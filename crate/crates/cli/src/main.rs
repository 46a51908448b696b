use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anacap::basis::Schedule;
use anacap::config::{
    quadrature_settings, DiscreteConfig, SceneConfig, ScheduleConfig, SweepConfig,
};
use anacap::discrete::discrete_report;
use anacap::exact::{nome_from_geometry, square_capacity, two_disk_capacity};
use anacap::geometry::validate_scene;
use anacap::lab::{
    disjointness_limit, gap_report, monotonicity_verdict, radius_grid, scene_ratio, split_scene,
    sweep, write_csv, SweepRecord, Trend,
};
use anacap::solver::{gamma_bounds, largest_usable, BoundsResult};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "anacap",
    version,
    about = "Certified bounds for analytic capacity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Absolute tolerance of the adaptive quadrature.
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Maximum bisection depth of the adaptive quadrature.
    #[arg(long, global = true)]
    quad_max_depth: Option<u32>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report wall times as 0 so repeated runs give identical output.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Upper and lower bounds for the capacity of a scene.
    Gamma {
        #[arg(long)]
        config: PathBuf,
        /// Bracket γ(E∪F)/(γ(E) + γ(F)) for the E/F labels instead.
        #[arg(long)]
        ratio: bool,
    },
    /// Closed-form reference values.
    #[command(subcommand)]
    Exact(Exact),
    /// Discrete capacity and related quantities of an equal-radius disk family.
    Discrete {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Ratio brackets over a grid of radii, as CSV, with a verdict summary on stderr.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum Exact {
    /// Two disks of radius r centered at ±c.
    TwoDisks {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r: f64,
    },
    /// Square of side s.
    Square {
        #[arg(long)]
        s: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<anacap::Error> for Failure {
    fn from(e: anacap::Error) -> Self {
        Failure {
            code: if e.is_input_error() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

fn input(message: String) -> Failure {
    Failure { code: 2, message }
}

type Outcome = Result<(), Failure>;

/// JSON text with every float written to 17 significant digits.
fn json17(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            format!("{x:.16e}")
        }
        Value::Array(items) => format!(
            "[{}]",
            items.iter().map(json17).collect::<Vec<_>>().join(",")
        ),
        Value::Object(map) => format!(
            "{{{}}}",
            map.iter()
                .map(|(k, v)| format!("{}:{}", Value::String(k.clone()), json17(v)))
                .collect::<Vec<_>>()
                .join(",")
        ),
        other => other.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn print(v: &Value) -> Outcome {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", json17(v)).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })
}

fn bounds_json(b: &BoundsResult, timing: bool) -> Value {
    let mut v = serde_json::to_value(b).expect("bounds serialize");
    if !timing {
        v["wall_time_s"] = json!(0.0);
    }
    v
}

fn schedule_json(s: &Schedule) -> Value {
    let overrides: serde_json::Map<String, Value> = s
        .overrides
        .iter()
        .map(|(k, &m)| {
            (
                k.to_string(),
                serde_json::to_value(ScheduleConfig::from(m)).expect("schedule serialize"),
            )
        })
        .collect();
    json!({ "schedule": ScheduleConfig::from(s.default), "overrides": overrides })
}

fn cmd_gamma(path: &Path, ratio: bool, common: &Common) -> Outcome {
    let cfg = SceneConfig::from_json(&read(path)?)?;
    let scene = cfg.scene()?;
    let schedule = cfg.schedule()?;
    let settings = quadrature_settings(cfg.quadrature, common.quad_tol, common.quad_max_depth)?;
    if ratio {
        let rec = scene_ratio(&scene, f64::NAN, &schedule, &settings)?;
        let timing = !common.no_timing;
        return print(&json!({
            "ratio_low": rec.ratio_low,
            "ratio_high": rec.ratio_high,
            "subadditive": rec.certified_subadditive(),
            "ef_bounds": bounds_json(&rec.ef_bounds, timing),
            "e_bounds": bounds_json(&rec.e_bounds, timing),
            "f_bounds": bounds_json(&rec.f_bounds, timing),
        }));
    }
    match gamma_bounds(&scene, &schedule, &settings) {
        Ok(b) => print(&bounds_json(&b, !common.no_timing)),
        Err(e @ (anacap::Error::SingularGram { .. } | anacap::Error::BracketInverted { .. })) => {
            if let Some((usable, b)) = largest_usable(&scene, &schedule, &settings) {
                let mut report = schedule_json(&usable);
                report["bounds"] = bounds_json(&b, !common.no_timing);
                eprintln!("largest usable schedule: {}", json17(&report));
            }
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_exact(which: &Exact) -> Outcome {
    let v = match *which {
        Exact::TwoDisks { c, r } => {
            let value = two_disk_capacity(c, r)?;
            json!({ "value": value, "formula": "two_disks", "c": c, "r": r, "q": nome_from_geometry(c, r)? })
        }
        Exact::Square { s } => json!({ "value": square_capacity(s)?, "formula": "square", "s": s }),
    };
    print(&v)
}

fn cmd_discrete(path: &Path, m: Option<usize>) -> Outcome {
    let cfg = DiscreteConfig::from_json(&read(path)?)?;
    let report = discrete_report(&cfg.centers()?, cfg.r, m.or(cfg.m))?;
    print(&serde_json::to_value(report).expect("report serialize"))
}

struct SweepArgs<'a> {
    config: &'a Path,
    m: Option<usize>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    steps: Option<usize>,
    out: Option<&'a Path>,
    seed: Option<u64>,
}

fn cmd_sweep(a: SweepArgs, common: &Common) -> Outcome {
    let cfg = SweepConfig::from_json(&read(a.config)?)?;
    let centers = cfg.centers(a.seed)?;
    let m = a.m.unwrap_or(cfg.m);
    let schedule = cfg.schedule()?;
    let settings = quadrature_settings(cfg.quadrature, common.quad_tol, common.quad_max_depth)?;
    let limit = disjointness_limit(&centers);
    let r_max = match a.r_max.or(cfg.r_max) {
        Some(r) if r >= limit => {
            return Err(input(format!(
                "r_max={r} makes disks touch or overlap (limit {limit})"
            )));
        }
        Some(r) => r,
        None => 0.999 * limit,
    };
    let grid = radius_grid(
        a.r_min.or(cfg.r_min),
        r_max,
        a.steps.or(cfg.steps).unwrap_or(50),
    )?;
    validate_scene(&split_scene(&centers, m, r_max)?)?;

    let rows = sweep(&centers, m, &grid, &schedule, &settings);
    let mut csv = Vec::new();
    write_csv(&mut csv, &rows, !common.no_timing).expect("write to memory");
    match a.out {
        Some(p) => {
            fs::write(p, &csv).map_err(|e| input(format!("cannot write {}: {e}", p.display())))?
        }
        None => io::stdout().lock().write_all(&csv).map_err(|e| Failure {
            code: 3,
            message: e.to_string(),
        })?,
    }

    let records: Vec<SweepRecord> = rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().copied())
        .collect();
    for (r, row) in &rows {
        if let Err(e) = row {
            eprintln!("r={r:.16e}: {e}");
        }
    }
    let verdict = monotonicity_verdict(&records);
    let summary = json!({
        "seed": cfg.seed(a.seed),
        "records": records.len(),
        "errors": rows.len() - records.len(),
        "certified_decrease": verdict.decreases,
        "certified_increase": verdict.increases,
        "undecided": verdict.undecided,
        "all_subadditive": verdict.subadditive.iter().all(|&b| b),
        "max_gap": gap_report(&records),
    });
    eprintln!("{}", json17(&summary));
    if verdict.violated() {
        for (i, w) in records.windows(2).enumerate() {
            if verdict.pairs[i] == Trend::CertifiedIncrease {
                eprintln!("CERTIFIED_INCREASE between records:");
                for rec in w {
                    eprintln!(
                        "{}",
                        json17(&serde_json::to_value(rec).expect("record serialize"))
                    );
                }
            }
        }
        return Err(Failure {
            code: 4,
            message: "certified increase of the ratio".into(),
        });
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input(format!("cannot set up {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Gamma { config, ratio } => cmd_gamma(config, *ratio, &cli.common),
        Command::Exact(which) => cmd_exact(which),
        Command::Discrete { config, m } => cmd_discrete(config, *m),
        Command::Sweep {
            config,
            m,
            r_min,
            r_max,
            steps,
            out,
            seed,
        } => cmd_sweep(
            SweepArgs {
                config,
                m: *m,
                r_min: *r_min,
                r_max: *r_max,
                steps: *steps,
                out: out.as_deref(),
                seed: *seed,
            },
            &cli.common,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
