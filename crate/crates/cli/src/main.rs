use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wsquad::convergence::{
    compare_full_vs_truncated, parse_budgets, run_sweep, FamilyKind, RuleFamily, SweepOptions,
    TestFunction,
};
use wsquad::fooling::{lower_bound_witness, BumpSpec, NodeSet};
use wsquad::io::{fmt_f64, parse_nodes_csv, rule_csv, write_atomic};
use wsquad::quad1d::{CenterPolicy, DyadicFamily, DEFAULT_THETA};
use wsquad::sparse::{build_sparse_rule, select_xi_for_budget, SparseRule};
use wsquad::{Error, WeightSpec};

/// Weighted quadrature for Freud and Markov–Sonin weights on R^d.
#[derive(Debug, Parser)]
#[command(name = "wsquad", version)]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Univariate truncated (or full) Gauss rule as CSV.
    Rule1d(Rule1dArgs),
    /// Smolyak sparse rule as CSV, optionally with an SVG scatter (d = 2).
    Sparse(SparseArgs),
    /// Integrate a built-in test function with a sparse rule.
    Integrate(IntegrateArgs),
    /// Convergence sweep over node budgets, written as JSON.
    Converge(ConvergeArgs),
    /// Fooling function vanishing on a node set, written as JSON.
    Fool(FoolArgs),
    /// Run the invariant suite and print a pass/fail table.
    Selftest(SelftestArgs),
}

/// Weight `exp(-a|x|^λ + b)`, or `|x|^β exp(-a x² + b)` when `--beta` is set.
#[derive(Debug, Args)]
struct WeightArgs {
    /// Weight spec JSON, e.g. {"family":"freud","lambda":2,"a":1,"b":0}.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["lambda", "a", "b", "beta"])]
    spec: Option<PathBuf>,
    /// Freud exponent λ > 1.
    #[arg(long)]
    lambda: Option<f64>,
    /// Scale a > 0.
    #[arg(long)]
    a: Option<f64>,
    /// Log-offset b.
    #[arg(long)]
    b: Option<f64>,
    /// Markov–Sonin exponent β > -1 (selects that family).
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
}

impl WeightArgs {
    fn resolve(&self) -> Result<WeightSpec, Error> {
        if let Some(path) = &self.spec {
            return WeightSpec::from_json(&std::fs::read_to_string(path)?);
        }
        let a = self.a.unwrap_or(1.0);
        let b = self.b.unwrap_or(0.0);
        match self.beta {
            Some(beta) => {
                if self.lambda.is_some_and(|l| l != 2.0) {
                    return Err(Error::InvalidParameter(
                        "Markov–Sonin weights have lambda = 2".into(),
                    ));
                }
                WeightSpec::markov_sonin(beta, a, b, 1)
            }
            None => WeightSpec::freud(self.lambda.unwrap_or(2.0), a, b, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CenterArg {
    /// Keep the center unless the weight calls for dropping it.
    Auto,
    Include,
    Exclude,
}

/// Options shared by every command that builds truncated rules.
#[derive(Debug, Args)]
struct RuleArgs {
    /// Truncation fraction θ in (0, 1).
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Handling of the zero node of odd-degree rules.
    #[arg(long, value_enum, default_value_t = CenterArg::Auto)]
    center: CenterArg,
}

impl RuleArgs {
    fn family(&self, spec: &WeightSpec, r: usize) -> Result<DyadicFamily, Error> {
        let center = match self.center {
            CenterArg::Auto => CenterPolicy::for_weight(spec, r),
            CenterArg::Include => CenterPolicy::Include,
            CenterArg::Exclude => CenterPolicy::Exclude,
        };
        DyadicFamily::new(spec, self.theta, center)
    }
}

#[derive(Debug, Args)]
struct Rule1dArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[command(flatten)]
    rule: RuleArgs,
    /// Gauss degree m.
    #[arg(long, required_unless_present = "budget", conflicts_with = "budget")]
    m: Option<usize>,
    /// Largest truncated rule with at most N nodes.
    #[arg(long, value_name = "N")]
    budget: Option<usize>,
    /// Full Gauss rule instead of the truncated one.
    #[arg(long, conflicts_with = "budget")]
    full: bool,
    /// Smoothness used by `--center auto`.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Output CSV (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SparseArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    dim: usize,
    /// Level ξ ≥ 0.
    #[arg(long, required_unless_present = "budget", conflicts_with = "budget")]
    xi: Option<f64>,
    /// Largest level with at most N nodes.
    #[arg(long, value_name = "N")]
    budget: Option<usize>,
    /// Smoothness used by `--center auto`.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Output CSV (default: stdout unless --svg is given).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// SVG scatter of the nodes, colored by coefficient sign (d = 2).
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    dim: usize,
    #[arg(long, required_unless_present = "budget", conflicts_with = "budget")]
    xi: Option<f64>,
    #[arg(long, value_name = "N")]
    budget: Option<usize>,
    /// Built-in integrand: one, poly2, gausspoly, rational, bumps, tail
    /// (the `builtin:` prefix is optional).
    #[arg(long = "fn", value_name = "NAME")]
    function: String,
    /// Smoothness of the bump families.
    #[arg(long, default_value_t = 2)]
    r: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Truncated,
    Full,
    Sparse,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Test function family.
    #[arg(long, default_value = "bumps")]
    family: String,
    /// Budgets as lo:hi:xK, lo:hi:+K, or a comma list.
    #[arg(long, default_value = "16:2048:x2")]
    budgets: String,
    /// Rule family (default: truncated for d = 1, sparse otherwise).
    #[arg(long = "rule-family", value_enum)]
    rule_family: Option<RuleArg>,
    /// Also build the lower-bound witness against each rule.
    #[arg(long)]
    witness: bool,
    /// Run truncated and full Gauss side by side (d = 1).
    #[arg(long, conflicts_with_all = ["rule_family", "witness"])]
    compare_full: bool,
    /// Output JSON (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FoolArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// CSV whose first `dim` numeric columns are node coordinates.
    #[arg(long, value_name = "PATH")]
    against: PathBuf,
    /// Budget n for the construction (default: the number of nodes).
    #[arg(long)]
    n: Option<usize>,
    /// Output JSON (default: stdout).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Also write the results as JSON.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

/// Failure categories mapped to exit codes.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::UnsupportedWeight(_)
            | Error::BudgetTooSmall { .. }
            | Error::SvgDimension(_)
            | Error::Parse(_)
            | Error::Json(_)
            | Error::Io(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn rule1d(args: &Rule1dArgs) -> Outcome {
    let spec = args.weight.resolve()?;
    let family = args.rule.family(&spec, args.r)?;
    let rule = match (args.m, args.budget) {
        (Some(m), _) if args.full => family.full_rule(m)?,
        (Some(m), _) => family.truncated_rule(m)?,
        (None, Some(n)) => family.rule_for_budget(n)?,
        (None, None) => unreachable!("clap requires --m or --budget"),
    };
    let mut comments = vec![
        format!("spec {}", spec.to_json()),
        format!("kind {:?}", rule.kind()),
        format!("m {}", rule.m()),
    ];
    if let Some(theta) = rule.theta() {
        comments.push(format!("theta {}", fmt_f64(theta)));
        comments.push(format!("center_included {}", rule.center_included()));
    }
    comments.push(format!("nodes {}", rule.len()));
    emit(args.out.as_deref(), &rule_csv(&rule, &comments))?;
    Ok(())
}

fn build_sparse(
    family: &DyadicFamily,
    dim: usize,
    xi: Option<f64>,
    budget: Option<usize>,
) -> Result<(f64, SparseRule), Error> {
    match (xi, budget) {
        (Some(xi), _) => Ok((xi, build_sparse_rule(family, dim, xi)?)),
        (None, Some(n)) => {
            select_xi_for_budget(family, dim, n).map(|(xi, rule)| (f64::from(xi), rule))
        }
        (None, None) => unreachable!("clap requires --xi or --budget"),
    }
}

fn sparse(args: &SparseArgs) -> Outcome {
    let spec = args.weight.resolve()?;
    let family = args.rule.family(&spec, args.r)?;
    let (xi, rule) = build_sparse(&family, args.dim, args.xi, args.budget)?;
    if let Some(svg) = &args.svg {
        write_atomic(svg, rule.to_svg()?.as_bytes()).map_err(Failure::from)?;
    }
    let comments = [
        format!("spec {}", spec.to_json()),
        format!("dim {}", args.dim),
        format!("xi {}", fmt_f64(xi)),
        format!("theta {}", fmt_f64(family.theta())),
        format!("nodes {}", rule.len()),
    ];
    if args.out.is_some() || args.svg.is_none() {
        emit(args.out.as_deref(), &rule.to_csv(&comments))?;
    }
    if args.out.is_some() || args.svg.is_some() {
        println!("nodes {} xi {}", rule.len(), fmt_f64(xi));
    }
    Ok(())
}

fn integrate(args: &IntegrateArgs) -> Outcome {
    let spec = args.weight.resolve()?;
    let kind: FamilyKind = args.function.parse()?;
    let family = args.rule.family(&spec, args.r)?;
    let (xi, rule) = build_sparse(&family, args.dim, args.xi, args.budget)?;
    let reach = 1usize << (xi.floor() as u32).min(20);
    let f = TestFunction::build(kind, &family, args.dim, args.r, reach.max(16))?;
    let value = f.integrate_sparse(&rule)?;
    let exact = f.exact_integral();
    println!("value {}", fmt_f64(value));
    println!("exact {}", fmt_f64(exact));
    println!("error {}", fmt_f64((value - exact).abs()));
    println!("nodes {}", rule.len());
    Ok(())
}

fn converge(args: &ConvergeArgs) -> Outcome {
    let spec = args.weight.resolve()?;
    let kind: FamilyKind = args.family.parse()?;
    let budgets = parse_budgets(&args.budgets)?;
    let family = args.rule.family(&spec, args.r)?;
    let max = *budgets.last().expect("parse_budgets rejects empty lists");
    let f = match kind {
        FamilyKind::Tail => TestFunction::tail_mass(&spec.with_dim(args.dim)?, args.r, &budgets)?,
        _ => TestFunction::build(kind, &family, args.dim, args.r, max)?,
    };
    let json = if args.compare_full {
        let cmp = compare_full_vs_truncated(&family, &f, &budgets)?;
        serde_json::to_string_pretty(&cmp).map_err(Error::from)? + "\n"
    } else {
        let rule = match args.rule_family {
            Some(RuleArg::Truncated) => RuleFamily::TruncatedGauss,
            Some(RuleArg::Full) => RuleFamily::FullGauss,
            Some(RuleArg::Sparse) => RuleFamily::Sparse,
            None if args.dim == 1 => RuleFamily::TruncatedGauss,
            None => RuleFamily::Sparse,
        };
        let options = SweepOptions {
            witness: args.witness,
        };
        run_sweep(&family, rule, &f, &budgets, options)?.to_json()?
    };
    emit(args.out.as_deref(), &json)?;
    Ok(())
}

fn fool(args: &FoolArgs) -> Outcome {
    let spec = args.weight.resolve()?.with_dim(args.dim)?;
    let text = std::fs::read_to_string(&args.against).map_err(Error::from)?;
    let points = parse_nodes_csv(&text, args.dim)?;
    let nodes = NodeSet::new(args.dim, &points)?;
    let n = args.n.unwrap_or(nodes.len());
    if n < nodes.len() {
        return Err(Failure::Usage(format!(
            "--n {n} is smaller than the {} nodes given",
            nodes.len()
        )));
    }
    let bump = BumpSpec::new(args.r, spec.lambda())?;
    let h = lower_bound_witness(&nodes, n, &bump, &spec)?;
    let json = serde_json::to_string_pretty(&h.report()).map_err(Error::from)? + "\n";
    emit(args.report.as_deref(), &json)?;
    Ok(())
}

fn selftest(args: &SelftestArgs) -> Outcome {
    let report = wsquad::selftest::run();
    print!("{}", report.to_table());
    if let Some(path) = &args.json {
        write_atomic(path, report.to_json()?.as_bytes())?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Numerical("selftest failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Rule1d(a) => rule1d(a),
        Command::Sparse(a) => sparse(a),
        Command::Integrate(a) => integrate(a),
        Command::Converge(a) => converge(a),
        Command::Fool(a) => fool(a),
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `wsquad --help` for the command grammar");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
