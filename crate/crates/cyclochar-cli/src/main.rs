//! Scenario-driven batch frontend: reads a declarative scenario file,
//! builds the model, runs its task list, and writes a report to standard
//! output (text) and optionally to a structured-output path (JSON). The
//! text rendering is generated from the same serialized values as the
//! JSON, so the numbers in both are identical.

mod scenario;
mod tasks;

use clap::{Parser, Subcommand};
use scenario::{Kernel, Options, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cyclochar", about = "cyclic-character scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario name)
    Run {
        /// path to a scenario file, or a bundled name: fredholm_rank_one, gv_circle
        scenario: String,
        /// scalar kernel override
        #[arg(long, value_enum)]
        kernel: Option<Kernel>,
        /// tolerance override for every task
        #[arg(long)]
        tol: Option<f64>,
        /// sampling budget (exhaustive enumeration is capped here)
        #[arg(long)]
        budget: Option<usize>,
        /// parallelism width (recorded; execution is sequential)
        #[arg(long)]
        threads: Option<usize>,
        /// seed for every sampled evaluation
        #[arg(long)]
        seed: Option<u64>,
        /// write the structured report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bundled acceptance suite and print the convention record
    Selftest {
        /// reduced budgets for a fast smoke run
        #[arg(long)]
        quick: bool,
        /// negative control: flip the boundary sign in the cobordism
        /// identity; the corresponding task must then fail
        #[arg(long, hide = true)]
        inject_sign_error: bool,
        /// write the structured report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const BUNDLED: &[(&str, &str)] = &[
    ("fredholm_rank_one", include_str!("../scenarios/fredholm_rank_one.json")),
    ("gv_circle", include_str!("../scenarios/gv_circle.json")),
];

fn load_scenario(name_or_path: &str) -> Result<Scenario, String> {
    let text = if let Some((_, body)) = BUNDLED.iter().find(|(n, _)| *n == name_or_path) {
        (*body).to_string()
    } else {
        std::fs::read_to_string(name_or_path)
            .map_err(|e| format!("cannot read {name_or_path}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| {
        format!("schema violation in {name_or_path} at line {}, column {}: {e}", e.line(), e.column())
    })
}

fn fmt_num(v: f64) -> String {
    // format through the JSON serializer so text and JSON digits agree
    serde_json::to_string(&serde_json::json!(v)).unwrap()
}

fn print_report(rep: &tasks::Report) {
    println!("scenario version {} | seed {} | threads {} | budget {}", rep.scenario_version, rep.seed, rep.threads, rep.budget);
    println!("normalization constant S = {}", rep.normalization_constant);
    for (name, tol) in &rep.default_tolerances {
        println!("default tolerance [{name}] = {}", fmt_num(*tol));
    }
    println!("conventions:");
    for [k, v] in &rep.conventions {
        println!("  {k}: {v}");
    }
    if rep.tasks.is_empty() {
        println!("no tasks requested; empty report");
    }
    for t in &rep.tasks {
        println!(
            "[{}] {:<22} residual {} (tol {}, kernel {}, {}s) {}",
            if t.passed { "PASS" } else { "FAIL" },
            t.task,
            fmt_num(t.residual),
            fmt_num(t.tolerance),
            t.kernel,
            fmt_num(t.seconds),
            t.note
        );
        for (k, v) in &t.values {
            println!("    {k} = {}", serde_json::to_string(v).unwrap());
        }
    }
    println!("overall: {}", if rep.all_passed { "PASS" } else { "FAIL" });
}

fn write_out(out: &Option<PathBuf>, rep: &tasks::Report) -> Result<(), String> {
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(rep).map_err(|e| e.to_string())?;
        std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn cmd_run(
    scenario: &str,
    kernel: Option<Kernel>,
    tol: Option<f64>,
    budget: Option<usize>,
    threads: Option<usize>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<bool, String> {
    let doc = load_scenario(scenario)?;
    let mut opts = doc.options.clone();
    if let Some(k) = kernel {
        opts.kernel = Some(k);
    }
    if tol.is_some() {
        opts.tol = tol;
    }
    if let Some(b) = budget {
        opts.budget = b;
    }
    if let Some(t) = threads {
        opts.threads = t;
    }
    if let Some(s) = seed {
        opts.seed = s;
    }
    let rep = tasks::run_scenario(&doc, &opts)?;
    print_report(&rep);
    write_out(out, &rep)?;
    Ok(rep.all_passed)
}

fn cmd_selftest(quick: bool, inject: bool, out: &Option<PathBuf>) -> Result<bool, String> {
    let mut task_reports: Vec<tasks::TaskReport> = Vec::new();
    if inject {
        // negative control: the cobordism identity with the boundary sign
        // flipped must be rejected
        let doc = load_scenario("fredholm_rank_one")?;
        let opts = Options::default();
        let built = tasks::build_model(&doc.model, Kernel::Float)?;
        let rep = tasks::run_negative_control(&built, &opts);
        task_reports.push(rep);
    } else {
        for c in cyclochar::suite::run_all(quick) {
            task_reports.push(tasks::TaskReport {
                task: format!("criterion-{}: {}", c.id, c.name),
                passed: c.passed,
                residual: c.residual,
                tolerance: c.tolerance,
                seconds: c.seconds,
                kernel: "mixed".into(),
                note: c.detail,
                values: Default::default(),
            });
        }
    }
    let all_passed = task_reports.iter().all(|t| t.passed);
    let rep = tasks::Report {
        report_version: 1,
        scenario_version: 0,
        seed: 0,
        threads: 1,
        budget: if quick { 10_000 } else { 1_000_000 },
        normalization_constant: "1".into(),
        default_tolerances: tasks::default_tolerances(),
        conventions: tasks::conventions_json(),
        tasks: task_reports,
        all_passed,
    };
    print_report(&rep);
    write_out(out, &rep)?;
    Ok(rep.all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { scenario, kernel, tol, budget, threads, seed, out } => {
            cmd_run(scenario, *kernel, *tol, *budget, *threads, *seed, out)
        }
        Command::Selftest { quick, inject_sign_error, out } => {
            cmd_selftest(*quick, *inject_sign_error, out)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
