use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arat::agent::UpdateRule;
use arat::runner::{emit_report, render_table, run, RunConfig};
use arat::testbed;

#[derive(Parser)]
#[command(name = "arat", version, about = "Adaptive REST API testing engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore a running service and report coverage and unique faults
    Run(RunArgs),
    /// Serve a built-in testbed fixture until interrupted (for local trials)
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct RunArgs {
    /// OpenAPI 2.0/3.x document, JSON or YAML
    #[arg(long)]
    spec: PathBuf,
    /// Where the system under test listens, e.g. http://127.0.0.1:8080
    #[arg(long = "base-url")]
    base_url: String,
    /// Testing time budget in seconds
    #[arg(long = "time-budget", default_value_t = 3600.0)]
    time_budget: f64,
    /// Stop after this many requests, regardless of remaining budget
    #[arg(long = "max-requests")]
    max_requests: Option<u64>,
    /// Seed for the engine's random stream (falls back to $ARAT_SEED, then
    /// to a random seed echoed in the report)
    #[arg(long)]
    seed: Option<u64>,
    /// Learning rate α
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Discount factor γ
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    /// Initial exploration rate ε
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long = "epsilon-max", default_value_t = 1.0)]
    epsilon_max: f64,
    #[arg(long = "epsilon-adapt", default_value_t = 1.1)]
    epsilon_adapt: f64,
    /// Response pairs kept per response
    #[arg(long = "sample-size", default_value_t = 10)]
    sample_size: usize,
    /// Per-request timeout
    #[arg(long = "timeout-ms", default_value_t = 10_000)]
    timeout_ms: u64,
    /// Q-value update rule variant
    #[arg(long = "update-rule", value_enum, default_value_t = UpdateRule::Alg3)]
    update_rule: UpdateRule,
    /// Ablation: uniform random operation/parameter/source selection
    #[arg(long = "no-prioritization")]
    no_prioritization: bool,
    /// Ablation: harvest nothing from requests or responses
    #[arg(long = "no-feedback")]
    no_feedback: bool,
    /// Ablation: store every response pair instead of a sample
    #[arg(long = "no-sampling")]
    no_sampling: bool,
    /// Extra header sent with every request, as NAME:VALUE (repeatable)
    #[arg(long = "header", value_name = "NAME:VALUE")]
    header: Vec<String>,
    /// Write the JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    /// features | unguessable | faults | plain-text
    name: String,
    /// Write the fixture's OpenAPI document here
    #[arg(long = "spec-out")]
    spec_out: Option<PathBuf>,
    /// Seed for the fixture's resource-id generator
    #[arg(long = "fixture-seed", default_value_t = 0)]
    fixture_seed: u64,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run_command(args),
        Command::Fixture(args) => fixture_command(args),
    }
}

fn run_command(args: RunArgs) -> ExitCode {
    let seed = match args.seed {
        Some(seed) => seed,
        None => match std::env::var("ARAT_SEED").ok().map(|s| s.parse::<u64>()) {
            Some(Ok(seed)) => seed,
            Some(Err(_)) => {
                eprintln!("error: ARAT_SEED is not a valid u64");
                return ExitCode::from(2);
            }
            None => rand::random(),
        },
    };

    let mut headers = Vec::new();
    for raw in &args.header {
        match raw.split_once(':') {
            Some((name, value)) => {
                headers.push((name.trim().to_string(), value.trim().to_string()))
            }
            None => {
                eprintln!("error: header `{raw}` is not NAME:VALUE");
                return ExitCode::from(2);
            }
        }
    }

    let config = RunConfig {
        spec_path: args.spec,
        base_url: args.base_url,
        time_budget_s: args.time_budget,
        max_requests: args.max_requests,
        seed,
        alpha: args.alpha,
        gamma: args.gamma,
        epsilon: args.epsilon,
        epsilon_max: args.epsilon_max,
        epsilon_adapt: args.epsilon_adapt,
        sample_size: args.sample_size,
        timeout_ms: args.timeout_ms,
        update_rule: args.update_rule,
        no_prioritization: args.no_prioritization,
        no_feedback: args.no_feedback,
        no_sampling: args.no_sampling,
        headers,
        report_path: args.report.clone(),
    };

    let report = match run(&config) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    print!("{}", render_table(&report));
    if let Some(path) = &args.report {
        if let Err(e) = emit_report(&report, path) {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(2);
        }
        println!("report written to {}", path.display());
    }
    ExitCode::SUCCESS
}

fn fixture_command(args: FixtureArgs) -> ExitCode {
    let fixture = match args.name.as_str() {
        "features" => testbed::features_service(),
        "unguessable" => testbed::unguessable_features_service(args.fixture_seed),
        "faults" => testbed::fault_service(),
        "plain-text" => testbed::plain_text_service(),
        other => {
            eprintln!(
                "error: unknown fixture `{other}` (expected features, unguessable, faults, plain-text)"
            );
            return ExitCode::from(2);
        }
    };

    let document = fixture.openapi_document();
    let handle = match testbed::start_fixture(fixture) {
        Ok(handle) => handle,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Some(path) = &args.spec_out {
        let mut bytes = serde_json::to_vec_pretty(&document).expect("document serializes");
        bytes.push(b'\n');
        if let Err(e) = std::fs::write(path, bytes) {
            eprintln!("error: writing spec: {e}");
            return ExitCode::from(2);
        }
        println!("spec written to {}", path.display());
    }
    println!("serving {} — press Ctrl-C to stop", handle.base_url());
    loop {
        std::thread::sleep(std::time::Duration::from_secs(3600));
    }
}
