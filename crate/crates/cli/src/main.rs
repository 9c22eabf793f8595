//! `gstest`: plan, simulate and cross-check one-shot graph-state tests.
//!
//! Exit codes: 0 success, 2 invalid input or parameters outside their
//! domain, 3 no feasible test plan on the given graph, 1 failed self-check.

mod config;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use gstest::graph::{self, Boundary, Graph, GraphFormat, RhgSpec};
use gstest::noise;
use gstest::oracle;
use gstest::protocol::{self, InequalityCheck, ProtocolError};
use gstest::sweep;
use serde_json::json;

use crate::config::{GraphSource, SweepConfig, SweepConfigFile};

#[derive(Parser)]
#[command(
    name = "gstest",
    version,
    about = "One-shot testing of graph states under depolarizing noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive N_test and p_goal from (delta, p_th, D) and check them.
    Params {
        #[arg(long, default_value_t = config::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long = "p-th", default_value_t = config::DEFAULT_P_TH)]
        p_th: f64,
        #[arg(long, default_value_t = config::DEFAULT_DEGREE)]
        degree: usize,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Per-weight commuting/anticommuting error counts as CSV.
    Counts {
        #[arg(long, default_value_t = config::DEFAULT_DEGREE)]
        degree: usize,
    },
    /// Monte Carlo acceptance rates over a grid of error rates (CSV).
    Simulate(SimulateArgs),
    /// Generate an RHG lattice.
    Lattice {
        #[arg(long, num_args = 3, value_names = ["LX", "LY", "LZ"], default_values_t = [2usize, 2, 2])]
        cells: Vec<usize>,
        #[arg(long, default_value = "periodic")]
        boundary: Boundary,
        #[arg(long, default_value = "json")]
        format: GraphFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Choose test vertices and emit the measurement plan as JSON.
    Plan {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = config::DEFAULT_DEGREE)]
        degree: usize,
        /// Defaults to the value derived from --delta and --p-th.
        #[arg(long = "n-test")]
        n_test: Option<usize>,
        #[arg(long, default_value_t = config::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long = "p-th", default_value_t = config::DEFAULT_P_TH)]
        p_th: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Statevector cross-check of the parity semantics.
    #[command(name = "oracle-check", hide = true)]
    OracleCheck {
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.2])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Graph in the JSON edge-list format.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// RHG cells per axis.
    #[arg(long, num_args = 3, value_names = ["LX", "LY", "LZ"])]
    cells: Option<Vec<usize>>,
    #[arg(long)]
    boundary: Option<Boundary>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file with sweep settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "p-th")]
    p_th: Option<f64>,
    #[arg(long = "n-test")]
    n_test: Option<usize>,
    /// Error rates, comma separated. Defaults to 20 log-spaced points over
    /// [p_goal/4, 4 p_th].
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// A failure together with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<ProtocolError>() {
            Some(ProtocolError::InsufficientVertices { .. }) => 3,
            _ => 2,
        };
        Failure { code, error }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Params {
            delta,
            p_th,
            degree,
            json,
        } => cmd_params(delta, p_th, degree, json),
        Command::Counts { degree } => cmd_counts(degree),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Lattice {
            cells,
            boundary,
            format,
            output,
        } => cmd_lattice(cells, boundary, format, output),
        Command::Plan {
            graph,
            degree,
            n_test,
            delta,
            p_th,
            output,
        } => cmd_plan(graph, degree, n_test, delta, p_th, output),
        Command::OracleCheck { p, trials, seed } => cmd_oracle_check(&p, trials, seed),
    }
}

fn write_output(output: Option<&PathBuf>, bytes: &[u8]) -> CliResult {
    match output {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).context("writing to stdout")?;
        }
    }
    Ok(())
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

fn verdict(pass: bool) -> String {
    let word = if pass { "PASS" } else { "FAIL" };
    if use_color() {
        let code = if pass { 32 } else { 31 };
        format!("\x1b[{code}m{word}\x1b[0m")
    } else {
        word.to_string()
    }
}

fn cmd_params(delta: f64, p_th: f64, degree: usize, as_json: bool) -> CliResult {
    let params = protocol::compute_params(delta, p_th, degree)?;
    let report = protocol::verify_params(&params)?;
    let out = if as_json {
        let value = json!({
            "params": params,
            "conservative_p_goal": params.conservative_p_goal(),
            "checks": report,
            "pass": report.passes(),
        });
        format!(
            "{}\n",
            serde_json::to_string_pretty(&value).map_err(anyhow::Error::from)?
        )
    } else {
        let line = |name: &str, c: &InequalityCheck| {
            format!(
                "{name:<24} {}  lhs={:.6} rhs={:.6} slack={:+.6}\n",
                verdict(c.pass),
                c.lhs,
                c.rhs,
                c.slack
            )
        };
        let mut s = String::new();
        s += &format!("delta                    {}\n", params.delta);
        s += &format!("p_th                     {}\n", params.p_th);
        s += &format!("D                        {}\n", params.degree);
        s += &format!("N_test                   {}\n", params.n_test);
        s += &format!("p_goal                   {:.6e}\n", params.p_goal);
        s += &format!("conservative_p_goal      {:.6e}\n", params.conservative_p_goal());
        s += &format!("measured_qubits          {}\n", params.measured_qubits);
        s += &line("reject_above_threshold", &report.reject_above_threshold);
        s += &line("accept_below_goal", &report.accept_below_goal);
        s += &line("accept_linearized", &report.accept_linearized);
        s
    };
    write_output(None, out.as_bytes())
}

fn counts_csv(degree: usize) -> CliResult<String> {
    let stats = noise::flip_counts(degree).map_err(anyhow::Error::from)?;
    let mut csv = String::from("weight,commuting,anticommuting\n");
    for w in 0..=stats.support_size() {
        csv += &format!("{w},{},{}\n", stats.commuting[w], stats.anticommuting[w]);
    }
    Ok(csv)
}

fn cmd_counts(degree: usize) -> CliResult {
    let csv = counts_csv(degree)?;
    write_output(None, csv.as_bytes())
}

fn load_source(source: &GraphSource) -> CliResult<Graph> {
    let graph = match source {
        GraphSource::Rhg(spec) => graph::build_rhg(spec).map_err(anyhow::Error::from)?,
        GraphSource::File(path) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            graph::load_graph(&bytes).with_context(|| format!("loading {}", path.display()))?
        }
    };
    Ok(graph)
}

fn cmd_lattice(cells: Vec<usize>, boundary: Boundary, format: GraphFormat, output: Option<PathBuf>) -> CliResult {
    let cells: [usize; 3] = cells
        .try_into()
        .map_err(|_| anyhow!("--cells takes exactly three values"))?;
    let g = graph::build_rhg(&RhgSpec { cells, boundary }).map_err(anyhow::Error::from)?;
    write_output(output.as_ref(), &graph::export_graph(&g, format))
}

fn cmd_plan(
    graph: GraphArgs,
    degree: usize,
    n_test: Option<usize>,
    delta: f64,
    p_th: f64,
    output: Option<PathBuf>,
) -> CliResult {
    let source = config::graph_source(graph.graph, graph.cells, graph.boundary)?.unwrap_or_default();
    let n_test = match n_test {
        Some(0) => return Err(anyhow!("N_test must be at least 1").into()),
        Some(n) => n,
        None => protocol::required_tests(delta, p_th, degree)?,
    };
    let g = load_source(&source)?;
    let plan = protocol::select_test_vertices(&g, degree, n_test)?;
    let mut bytes = serde_json::to_vec(&plan).map_err(anyhow::Error::from)?;
    bytes.push(b'\n');
    write_output(output.as_ref(), &bytes)
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let base = match &args.config {
        Some(path) => SweepConfigFile::load(path)?,
        None => SweepConfigFile::default(),
    };
    let flags = SweepConfigFile {
        degree: args.degree,
        delta: args.delta,
        p_th: args.p_th,
        n_test: args.n_test,
        p_values: args.p,
        trials: args.trials,
        master_seed: args.seed,
        graph: config::graph_source(args.graph.graph, args.graph.cells, args.graph.boundary)?,
    };
    let config = SweepConfig::resolve(base.overridden_by(flags))?;

    let (n_test, mut p_values) = match (config.n_test, config.p_values.is_empty()) {
        (Some(n), false) => (n, config.p_values.clone()),
        (n_test, _) => {
            let params = protocol::compute_params(config.delta, config.p_th, config.degree)?;
            let grid = if config.p_values.is_empty() {
                sweep::default_grid(params.p_goal, params.p_th)
            } else {
                config.p_values.clone()
            };
            (n_test.unwrap_or(params.n_test), grid)
        }
    };
    p_values.sort_by(f64::total_cmp);

    let g = load_source(&config.graph)?;
    let plan = protocol::select_test_vertices(&g, config.degree, n_test)?;
    let rows = sweep::run_sweep(g.vertex_count(), &plan, &p_values, config.trials, config.master_seed)?;
    write_output(args.output.as_ref(), sweep::to_csv(&rows).as_bytes())
}

fn cmd_oracle_check(p_values: &[f64], trials: u64, seed: u64) -> CliResult {
    let cell = graph::build_rhg(&RhgSpec::open(1)).map_err(anyhow::Error::from)?;
    let face = (0..cell.vertex_count())
        .find(|&v| cell.degree(v).is_ok_and(|d| d == 4))
        .ok_or_else(|| anyhow!("unit cell has no degree-4 vertex"))?;
    let graphs = [
        ("star5", oracle::star_graph(4)),
        (
            "rhg_cell_patch",
            oracle::stabilizer_patch(&cell, face, 2).map_err(anyhow::Error::from)?,
        ),
    ];
    let mut ok = true;
    let mut out = String::from("graph,p,trials,comparisons,mismatches,nondeterministic,max_abs_deviation,max_z\n");
    for (name, g) in &graphs {
        for &p in p_values {
            let r = oracle::cross_validate(g, p, trials, seed).map_err(anyhow::Error::from)?;
            ok &= r.mismatches == 0 && r.nondeterministic == 0;
            out += &format!(
                "{name},{p},{},{},{},{},{},{}\n",
                r.trials,
                r.comparisons,
                r.mismatches,
                r.nondeterministic,
                r.max_abs_deviation,
                r.max_z_score()
            );
        }
    }
    write_output(None, out.as_bytes())?;
    if ok {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            error: anyhow!("parity semantics disagree with the statevector"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_table() {
        let csv = counts_csv(4).ok().unwrap();
        assert_eq!(
            csv,
            "weight,commuting,anticommuting\n0,1,0\n1,5,10\n2,50,40\n3,130,140\n4,205,200\n5,121,122\n"
        );
        assert!(counts_csv(12).is_err());
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        let infeasible: Failure = ProtocolError::InsufficientVertices {
            found: 0,
            required: 1,
            degree: 4,
        }
        .into();
        assert_eq!(infeasible.code, 3);
        let domain: Failure = ProtocolError::Domain("x".into()).into();
        assert_eq!(domain.code, 2);
        let wrapped: Failure = anyhow::Error::from(ProtocolError::InsufficientVertices {
            found: 2,
            required: 5,
            degree: 4,
        })
        .context("planning")
        .into();
        assert_eq!(wrapped.code, 3);
    }
}
