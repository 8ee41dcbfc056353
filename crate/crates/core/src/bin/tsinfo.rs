use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tsinfo::generators::symmetric_bandit;
use tsinfo::harness::{
    emit_report, format_number, run_experiment, run_verify, CertificateAggregate, ExperimentConfig,
    Summary, TrajectoryRecord, VerifySettings,
};
use tsinfo::{Error, PolicyKind, StructureKind};

#[derive(Parser)]
#[command(
    name = "tsinfo",
    version,
    about = "Information-ratio experiments for Thompson sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of periods per episode (overrides the config).
    #[arg(long, global = true)]
    horizon: Option<usize>,

    /// Number of replications (overrides the config).
    #[arg(long, global = true)]
    reps: Option<usize>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check every bound on random instances of each structure.
    Verify {
        #[arg(long, value_enum)]
        structure: Option<StructureArg>,
    },
    /// Thompson sampling on the symmetric two-arm example.
    Demo,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Bandit,
    Full,
    Linear,
    Semibandit,
}

impl From<StructureArg> for StructureKind {
    fn from(s: StructureArg) -> Self {
        match s {
            StructureArg::Bandit => StructureKind::Bandit,
            StructureArg::Full => StructureKind::FullInformation,
            StructureArg::Linear => StructureKind::Linear,
            StructureArg::Semibandit => StructureKind::SemiBandit,
        }
    }
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Io { .. }
            | Error::InvalidFamily(_)
            | Error::InstanceTooLarge { .. } => Failure::Usage(e.to_string()),
            other => Failure::Violation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("FAILED: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { ref config } => {
            let mut cfg = ExperimentConfig::from_path(config)?;
            apply_overrides(&mut cfg, &cli);
            run(&cfg, false)
        }
        Command::Demo => {
            let spec = symmetric_bandit().spec().clone();
            let mut cfg = ExperimentConfig::new(spec, PolicyKind::ThompsonExact, 10, 1, 0);
            cfg.output_path = PathBuf::from("tsinfo-demo");
            apply_overrides(&mut cfg, &cli);
            run(&cfg, true)
        }
        Command::Verify { structure } => {
            let mut settings = VerifySettings {
                seed: cli.seed.unwrap_or(0),
                ..VerifySettings::default()
            };
            if let Some(s) = structure {
                settings.structures = vec![s.into()];
            }
            if let Some(h) = cli.horizon {
                settings.steps = h;
            }
            if let Some(r) = cli.reps {
                settings.instances_per_structure = r;
            }
            let report = run_verify(&settings)?;
            for s in &report.structures {
                println!(
                    "{}: {} instances, {} posteriors checked",
                    s.structure.label(),
                    s.instances,
                    s.posteriors_checked
                );
                print_certificates(&s.certificates);
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.clone(),
                    source,
                })?;
                let path = dir.join("verify.json");
                std::fs::write(&path, report.to_json()?)
                    .map_err(|source| Error::Io { path, source })?;
            }
            if report.passed() {
                println!("all certificates hold");
                Ok(())
            } else {
                Err(Failure::Violation(format!(
                    "{} certificate violations",
                    report.total_violations
                )))
            }
        }
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(h) = cli.horizon {
        cfg.horizon = h;
    }
    if let Some(r) = cli.reps {
        cfg.replications = r;
    }
    if let Some(o) = &cli.out {
        cfg.output_path = o.clone();
    }
}

fn run(cfg: &ExperimentConfig, per_step: bool) -> Result<(), Failure> {
    let outcome = run_experiment(cfg)?;
    let paths = emit_report(&outcome.summary, &outcome.trajectories, &cfg.output_path)?;
    if per_step {
        if let Some(traj) = outcome.trajectories.first() {
            print_steps(traj);
        }
    }
    print_summary(&outcome.summary);
    println!("wrote {}", paths.trajectories_csv.display());
    println!("wrote {}", paths.summary_json.display());
    if let Some(v) = outcome.summary.violations.first() {
        return Err(Failure::Violation(format!(
            "{} bound violations; first at replication {} step {}: {} (lhs {}, rhs {})",
            outcome.summary.bound_violation_count,
            v.replication,
            v.t,
            v.certificate.bound_name,
            format_number(v.certificate.lhs),
            format_number(v.certificate.rhs)
        )));
    }
    Ok(())
}

fn print_steps(traj: &TrajectoryRecord) {
    println!(
        "true model {}, optimal action {}",
        traj.true_model, traj.optimal_action
    );
    println!(
        "{:>4} {:>6} {:>7} {:>18} {:>18} {:>18} {:>18}",
        "t", "action", "outcome", "regret", "gain", "gamma", "entropy"
    );
    for row in &traj.rows {
        let (regret, gain, gamma, h) = match &row.report {
            Some(r) => (
                format_number(r.expected_instant_regret),
                format_number(r.info_gain),
                r.ratio.map(format_number).unwrap_or_else(|| "-".into()),
                format_number(r.optimum_entropy),
            ),
            None => ("-".into(), "-".into(), "-".into(), "-".into()),
        };
        println!(
            "{:>4} {:>6} {:>7} {:>18} {:>18} {:>18} {:>18}",
            row.t, row.action, row.outcome, regret, gain, gamma, h
        );
    }
}

fn print_summary(s: &Summary) {
    let t = s.mean_cumulative_regret.len();
    println!(
        "{} replications, horizon {}, H(alpha_1) = {}, structural bound {}",
        s.replications,
        t,
        format_number(s.prior_optimum_entropy),
        format_number(s.structural_bound)
    );
    if t > 0 {
        println!(
            "final mean cumulative regret {} (se {}), bound {}",
            format_number(s.mean_cumulative_regret[t - 1]),
            format_number(s.standard_error[t - 1]),
            format_number(s.regret_bound_curve[t - 1])
        );
    }
    if let Some(g) = s.max_gamma {
        println!("max gamma {}", format_number(g));
    }
    print_certificates(&s.certificates);
}

fn print_certificates(certs: &[CertificateAggregate]) {
    println!(
        "  {:<32} {:>9} {:>6} {:>14}",
        "bound", "checks", "fail", "min slack"
    );
    for c in certs {
        println!(
            "  {:<32} {:>9} {:>6} {:>14}",
            c.bound_name,
            c.count,
            c.violations,
            format_number(c.worst.slack)
        );
    }
}
