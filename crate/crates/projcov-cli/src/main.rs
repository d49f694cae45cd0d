//! `projcov`: measure projection coverage of scenario data sets and generate
//! the points that complete it.
//!
//! Exit codes: 0 on success (including full coverage), 2 when a generation
//! budget ran out before full coverage, 1 for usage, parse, or semantic
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use projcov::{
    achieve_full_coverage, full_coverage, k_coverage, one_projection_trace, parse_dataset,
    parse_model, report_json, satisfiable_under, trace_json, write_points, write_report,
    write_tables, write_trace, CategorizationModel, CategorizationPoint, DataSet, DatasetParse,
    GenerationTrace, OnViolation, PartialAssignment, StopReason, DEFAULT_ENUM_LIMIT,
};

const EXIT_BUDGET_EXHAUSTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "projcov",
    version,
    about = "Projection coverage over categorized scenario spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model file and report its shape and satisfiability.
    Validate(ValidateArgs),
    /// Compute coverage of a data set.
    Coverage(CoverageArgs),
    /// Generate points until full coverage or budget exhaustion.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ViolationPolicy {
    /// Fail on the first data row violating the constraint set.
    Reject,
    /// Warn and skip violating rows.
    Drop,
}

impl From<ViolationPolicy> for OnViolation {
    fn from(policy: ViolationPolicy) -> Self {
        match policy {
            ViolationPolicy::Reject => OnViolation::Reject,
            ViolationPolicy::Drop => OnViolation::Drop,
        }
    }
}

#[derive(Args)]
struct CoverageArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    /// Data set file; omit for an empty data set.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Projection size.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Compute whole-space coverage instead of k-projection coverage.
    #[arg(long)]
    full: bool,
    /// Also render every projection plane as a table.
    #[arg(long)]
    tables: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Handling of constraint-violating data rows.
    #[arg(long, value_enum, default_value = "reject")]
    on_violation: ViolationPolicy,
    /// Cap on exact enumeration work.
    #[arg(long, default_value_t = DEFAULT_ENUM_LIMIT)]
    enum_limit: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    /// Seed data set file; omit to start from nothing.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Projection size to complete.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Maximum number of points to generate (default: unlimited).
    #[arg(long)]
    budget: Option<u64>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Handling of constraint-violating data rows.
    #[arg(long, value_enum, default_value = "reject")]
    on_violation: ViolationPolicy,
    /// Cap on exact enumeration work.
    #[arg(long, default_value_t = DEFAULT_ENUM_LIMIT)]
    enum_limit: u64,
    /// Write generated points here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the generation trace table here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // usage errors exit 1; code 2 is reserved for exhausted budgets
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let failed = err.use_stderr();
            let _ = err.print();
            return ExitCode::from(if failed { 1 } else { 0 });
        }
    };
    let run = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Coverage(args) => cmd_coverage(&args),
        Command::Generate(args) => cmd_generate(&args),
    };
    match run {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_model(path: &Path) -> Result<CategorizationModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read model file {}", path.display()))?;
    parse_model(&text).with_context(|| format!("in model file {}", path.display()))
}

fn load_dataset(
    path: Option<&PathBuf>,
    model: &CategorizationModel,
    policy: OnViolation,
) -> Result<DatasetParse> {
    let Some(path) = path else {
        return Ok(DatasetParse {
            dataset: DataSet::new(),
            rows: Vec::new(),
            accepted: 0,
            dropped: Vec::new(),
        });
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read data file {}", path.display()))?;
    let parsed = parse_dataset(&text, model, policy)
        .with_context(|| format!("in data file {}", path.display()))?;
    for dropped in &parsed.dropped {
        eprintln!(
            "warning: {}: line {} dropped: {}",
            path.display(),
            dropped.line,
            dropped.reason
        );
    }
    Ok(parsed)
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<ExitCode> {
    let model: CategorizationModel = load_model(&args.model)?;
    println!("model ok");
    println!("categories: {}", model.len());
    for cat in model.categories() {
        println!("  {}: {} values", cat.name, cat.len());
    }
    println!("clauses: {}", model.constraints().len());
    let satisfiable = satisfiable_under(&model, &PartialAssignment::empty());
    println!(
        "constraints satisfiable: {}",
        if satisfiable { "yes" } else { "no" }
    );
    if !satisfiable {
        println!("warning: constraint set unsatisfiable; all coverage vacuous");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_coverage(args: &CoverageArgs) -> Result<ExitCode> {
    let model = load_model(&args.model)?;
    let parsed = load_dataset(args.data.as_ref(), &model, args.on_violation.into())?;
    let result = if args.full {
        full_coverage(&model, &parsed.dataset, args.enum_limit)?
    } else {
        k_coverage(&model, &parsed.dataset, args.k, args.enum_limit)?
    };

    let mut content = if args.json {
        let mut value = report_json(&model, &result);
        value["data_points"] = serde_json::json!(parsed.dataset.len().to_string());
        if args.tables && !args.full {
            value["tables"] =
                serde_json::json!(write_tables(&model, &parsed.rows, args.k, args.enum_limit)?);
        }
        format!("{:#}\n", value)
    } else {
        let mut text = write_report(&model, &result);
        if args.tables && !args.full {
            text.push('\n');
            text.push_str(&write_tables(
                &model,
                &parsed.rows,
                args.k,
                args.enum_limit,
            )?);
        }
        text
    };
    if !content.ends_with('\n') {
        content.push('\n');
    }
    emit(args.out.as_ref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode> {
    let model = load_model(&args.model)?;
    let parsed = load_dataset(args.data.as_ref(), &model, args.on_violation.into())?;
    let budget = args.budget.unwrap_or(u64::MAX);

    // k = 1 over an unconstrained model has a direct minimum completion
    let trace: GenerationTrace = if args.k == 1 && model.constraints().is_empty() {
        one_projection_trace(&model, &parsed.dataset, budget, args.enum_limit)?
    } else {
        achieve_full_coverage(&model, &parsed.dataset, args.k, budget, args.enum_limit)?
    };

    let points: Vec<CategorizationPoint> = trace.points().cloned().collect();
    if args.json {
        let mut value = trace_json(&model, &trace);
        value["points_document"] = serde_json::json!(write_points(&model, &points));
        emit(args.out.as_ref(), &format!("{:#}\n", value))?;
    } else {
        emit(args.out.as_ref(), &write_points(&model, &points))?;
    }
    if let Some(trace_out) = &args.trace_out {
        let rendered = if args.json {
            format!("{:#}\n", trace_json(&model, &trace))
        } else {
            write_trace(&model, &trace)
        };
        fs::write(trace_out, rendered)
            .with_context(|| format!("cannot write {}", trace_out.display()))?;
    }
    eprintln!(
        "generated {} points; coverage {}/{} ({})",
        trace.steps.len(),
        trace.final_numerator(),
        trace.denominator,
        projcov::report::stop_reason_str(trace.reason),
    );
    Ok(match trace.reason {
        StopReason::FullCoverage => ExitCode::SUCCESS,
        StopReason::BudgetExhausted => ExitCode::from(EXIT_BUDGET_EXHAUSTED),
    })
}
