use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use temo::harness::{self, RunConfig, ScaleKind};
use temo::Error;

#[derive(Parser)]
#[command(name = "temo", version, about = "Array-parallel evolutionary multiobjective optimization runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration for `--repeats` seeds and write per-generation records.
    Run(RunArgs),
    /// Sweep population size or decision dimension by doubling.
    Scale(ScaleArgs),
}

/// Flags shared by both subcommands. Each overrides the config file.
#[derive(Args)]
struct Common {
    /// key=value or JSON config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    objectives: Option<String>,
    #[arg(long)]
    pop_size: Option<String>,
    #[arg(long)]
    generations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    neighborhood: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    eta_c: Option<String>,
    #[arg(long)]
    eta_m: Option<String>,
    #[arg(long)]
    pm: Option<String>,
    #[arg(long)]
    divisions: Option<String>,
    /// Swap SBX child genes with probability 0.5.
    #[arg(long)]
    swap_genes: bool,
    #[arg(long)]
    hv_samples: Option<String>,
    /// `auto` or comma-separated coordinates.
    #[arg(long)]
    hv_ref: Option<String>,
    /// igd, hv, eu; repeat the flag or separate with commas.
    #[arg(long = "indicator")]
    indicator: Vec<String>,
    #[arg(long)]
    indicator_every: Option<String>,
    #[arg(long)]
    ref_front_size: Option<String>,
    #[arg(long)]
    time_selection_only: bool,
    /// Loop-based baseline (nsga3 and moead only).
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    pbi_literal: bool,
    #[arg(long)]
    eu_literal: bool,
    /// Wall-clock limit per run, seconds.
    #[arg(long)]
    timeout: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    repeats: Option<String>,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    common: Common,
    /// population or dimension
    #[arg(long)]
    kind: String,
    #[arg(long)]
    from: usize,
    #[arg(long, default_value_t = 6)]
    steps: usize,
}

impl Common {
    fn config(&self) -> temo::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = [
            ("algorithm", &self.algorithm),
            ("problem", &self.problem),
            ("dim", &self.dim),
            ("objectives", &self.objectives),
            ("pop_size", &self.pop_size),
            ("generations", &self.generations),
            ("seed", &self.seed),
            ("theta", &self.theta),
            ("neighborhood", &self.neighborhood),
            ("alpha", &self.alpha),
            ("eta_c", &self.eta_c),
            ("eta_m", &self.eta_m),
            ("pm", &self.pm),
            ("divisions", &self.divisions),
            ("hv_samples", &self.hv_samples),
            ("hv_ref", &self.hv_ref),
            ("indicator_every", &self.indicator_every),
            ("ref_front_size", &self.ref_front_size),
            ("timeout_s", &self.timeout),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg = cfg.set(key, v)?;
            }
        }
        if !self.indicator.is_empty() {
            cfg = cfg.set("indicators", &self.indicator.join(","))?;
        }
        for (key, on) in [
            ("time_selection_only", self.time_selection_only),
            ("sequential", self.sequential),
            ("swap_genes", self.swap_genes),
            ("pbi_literal", self.pbi_literal),
            ("eu_literal", self.eu_literal),
        ] {
            if on {
                cfg = cfg.set(key, "true")?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn run(args: RunArgs) -> temo::Result<bool> {
    let mut cfg = args.common.config()?;
    if let Some(r) = &args.repeats {
        cfg = cfg.set("repeats", r)?;
    }
    cfg.validate()?;
    let records = harness::run(&cfg)?;
    for r in &records {
        println!(
            "repeat {} generations {} igd {} hv {} mean_gen_s {:.6}{}",
            r.metadata.repeat,
            r.summary.generations_completed,
            fmt_opt(r.summary.final_igd),
            fmt_opt(r.summary.final_hv),
            r.summary.mean_generation_s,
            if r.summary.timed_out { " (timed out)" } else { "" }
        );
    }
    if let Some(dir) = &cfg.out {
        let paths = harness::write_records(&records, dir)?;
        eprintln!("wrote {} files to {}", paths.len(), dir.display());
    }
    Ok(records.iter().any(|r| r.summary.timed_out))
}

fn scale(args: ScaleArgs) -> temo::Result<bool> {
    let cfg = args.common.config()?;
    let kind: ScaleKind = args.kind.parse()?;
    let table = harness::scaling_experiment(kind, &cfg, args.from, args.steps)?;
    print!("{}", table.to_csv_string());
    if let Some(dir) = &cfg.out {
        table.write(dir)?;
    }
    Ok(table.any_timed_out())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Scale(a) => scale(a),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
