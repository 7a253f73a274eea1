use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dacgsa::runner::{build_layout, build_samples, samples_csv};
use dacgsa::{analyze, emit_plot_data, run_experiment, ExperimentConfig, PipelineError, Qoi};
use dacgsa_core::daccs::ScenarioId;
use dacgsa_core::gsa::Solver;

#[derive(Parser)]
#[command(name = "dacgsa", version, about = "DACCS deployment simulation and OT-based sensitivity analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON); built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<ScenarioId>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; falls back to DACGSA_OUT, then the config.
    #[arg(long, env = "DACGSA_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_solver)]
    solver: Option<Solver>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the LHS input sample and write samples.csv.
    Sample(Common),
    /// Build the balanced cluster layout and write layout.json.
    Layout(Common),
    /// Simulate every run (resumable).
    Run(Common),
    /// Sensitivity report, quantile summaries and gigaton statistics.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// emissions, gains_gdp, gains_consumption, total_subsidies or all.
        #[arg(long, default_value = "emissions")]
        qoi: String,
    },
    /// Tidy CSVs for density, partial-dependence and separation plots.
    Plotdata {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bins: Option<usize>,
    },
}

fn parse_scenario(s: &str) -> Result<ScenarioId, String> {
    s.parse().map_err(|e: dacgsa_core::daccs::DaccsError| e.to_string())
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse()
}

fn config(c: &Common) -> Result<ExperimentConfig, PipelineError> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.scenario {
        cfg.scenario = s;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(s) = c.solver {
        cfg.solver = s;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn write(path: PathBuf, text: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| PipelineError::Data(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, text).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<i32, PipelineError> {
    match cli.command {
        Command::Sample(c) => {
            let cfg = config(&c)?;
            let inputs = cfg.resolve()?;
            let s = build_samples(&cfg, &inputs)?;
            write(cfg.out_dir.join("samples.csv"), &samples_csv(&s))?;
            println!("wrote {} samples of {} inputs", s.n_rows(), s.n_cols());
            Ok(0)
        }
        Command::Layout(c) => {
            let cfg = config(&c)?;
            let inputs = cfg.resolve()?;
            let layout = build_layout(&cfg, &build_samples(&cfg, &inputs)?)?;
            write(cfg.out_dir.join("layout.json"), &layout.to_json())?;
            println!("wrote {} clusters of {}", layout.clusters.len(), cfg.n_runs / cfg.n_clusters);
            Ok(0)
        }
        Command::Run(c) => {
            let cfg = config(&c)?;
            let s = run_experiment(&cfg, c.jobs)?;
            println!(
                "{} runs: {} simulated, {} already present, {} failed",
                s.total, s.new_runs, s.skipped, s.failed
            );
            Ok(if s.failed > 0 { 3 } else { 0 })
        }
        Command::Analyze { common, qoi } => {
            let cfg = config(&common)?;
            let qois: Vec<Qoi> = if qoi == "all" {
                Qoi::ALL.to_vec()
            } else {
                vec![qoi.parse().map_err(|e: String| PipelineError::Config(vec![e]))?]
            };
            for q in qois {
                let s = analyze(&cfg.out_dir, q, common.solver)?;
                println!("{} ({} ok, {} failed runs)", q.as_str(), s.n_ok, s.n_failed);
                for r in s.ranking.iter().take(10) {
                    println!("  {:>2}. {:<28} {:.3}{}", r.rank, r.label, r.index, if r.irrelevant { "  (irrelevant)" } else { "" });
                }
                println!("  P(E2050 >= 1 Gt) = {:.4}", s.exceedance.probability);
                match s.gigaton_subsidy.p5 {
                    Some(p) => println!("  min subsidy for gigaton (p5) = {p:.1} USD/t"),
                    None => println!("  min subsidy for gigaton: undefined (no gigaton runs)"),
                }
            }
            Ok(0)
        }
        Command::Plotdata { common, bins } => {
            let cfg = config(&common)?;
            for f in emit_plot_data(&cfg.out_dir, bins)? {
                println!("wrote plots/{f}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
