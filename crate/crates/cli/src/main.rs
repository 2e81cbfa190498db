//! Batch CLI for community-aware centrality computation, SIR spreading
//! evaluation, and network dismantling reports.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (parse/validation),
//! 3 computation error (undefined measure or statistic). Diagnostics go to
//! stderr; data outputs never contain log lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use commspread_core::centrality::{
    compute_measure, CommUndefined, Measure, MeasureConfig, ScoreVector,
};
use commspread_core::error::{Error, ErrorKind};
use commspread_core::graph::{load_edge_list_path, mean_degree_moments, Graph, LoadOptions};
use commspread_core::louvain::louvain_partition;
use commspread_core::partition::{
    load_partition_path, mixing_parameter, modularity, strength_category, Partition,
    StrengthThresholds,
};
use commspread_core::pipeline::{lcc_dismantling, parse_measures, run_experiment, ExperimentSpec};
use commspread_core::report::{format_value, write_csv};
use commspread_core::sir::{epidemic_threshold, run_sir, select_seed_set, SirConfig};
use commspread_core::stats::ols_regression;

#[derive(Parser)]
#[command(
    name = "commspread",
    version,
    about = "Community-aware centrality measures with SIR-based spreading evaluation"
)]
struct Cli {
    /// Master seed: drives Louvain node order and SIR run streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 forces fully sequential execution.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log filter (error|warn|info|debug|trace); COMMSPREAD_LOG is the
    /// fallback, default "warn".
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a graph (and optionally a partition) and print summary stats.
    LoadCheck(LoadCheckArgs),
    /// Compute centrality scores and rankings into a CSV.
    Centrality(CentralityArgs),
    /// Run SIR outbreaks seeded from stored ranking prefixes.
    Sir(SirArgs),
    /// Run a full experiment described by a TOML config file.
    Evaluate(EvaluateArgs),
    /// Emit LCC dismantling curves for ranked node removal.
    Dismantle(DismantleArgs),
    /// Ordinary least squares over two CSV columns.
    Regress(RegressArgs),
}

#[derive(Args)]
struct GraphOpts {
    /// Edge list file; '#'/'%' comment lines, two labels per data line.
    #[arg(long)]
    graph: PathBuf,
    /// Keep only the largest connected component after loading.
    #[arg(long)]
    lcc_only: bool,
    /// Field delimiter (default: any whitespace).
    #[arg(long)]
    delimiter: Option<char>,
}

impl GraphOpts {
    fn load(&self) -> Result<commspread_core::graph::EdgeListLoad, Error> {
        let options = LoadOptions { lcc_only: self.lcc_only, delimiter: self.delimiter };
        let loaded = load_edge_list_path(&self.graph, &options)?;
        if loaded.duplicate_edges > 0 || loaded.self_loops > 0 {
            log::info!(
                "{}: dropped {} duplicate edges and {} self-loops",
                self.graph.display(),
                loaded.duplicate_edges,
                loaded.self_loops
            );
        }
        Ok(loaded)
    }
}

#[derive(Args)]
struct PartitionOpts {
    /// Partition file with "node_label community_label" lines.
    #[arg(long, conflicts_with = "louvain")]
    partition: Option<PathBuf>,
    /// Detect communities with seeded greedy modularity optimization.
    #[arg(long)]
    louvain: bool,
}

impl PartitionOpts {
    fn load(&self, g: &Graph, seed: u64) -> Result<Option<Partition>, Error> {
        match (&self.partition, self.louvain) {
            (Some(path), _) => Ok(Some(load_partition_path(path, g)?)),
            (None, true) => {
                let outcome = louvain_partition(g, seed);
                if let Some(q) = outcome.modularity {
                    log::info!(
                        "louvain(seed={seed}) found {} communities, Q = {q:.6}",
                        outcome.partition.community_count()
                    );
                }
                Ok(Some(outcome.partition))
            }
            (None, false) => Ok(None),
        }
    }

    fn require(&self, g: &Graph, seed: u64) -> Result<Partition, Error> {
        self.load(g, seed)?
            .ok_or_else(|| Error::InvalidConfig("supply --partition <file> or --louvain".into()))
    }
}

#[derive(Args)]
struct LoadCheckArgs {
    #[command(flatten)]
    graph: GraphOpts,
    #[command(flatten)]
    partition: PartitionOpts,
}

#[derive(Copy, Clone, ValueEnum)]
enum CommUndefinedArg {
    Skip,
    ZeroTerm,
}

impl From<CommUndefinedArg> for CommUndefined {
    fn from(value: CommUndefinedArg) -> Self {
        match value {
            CommUndefinedArg::Skip => CommUndefined::Skip,
            CommUndefinedArg::ZeroTerm => CommUndefined::ZeroTerm,
        }
    }
}

#[derive(Args)]
struct MeasureOpts {
    /// "all" or a comma-separated list of measure ids
    /// (degree,chb,pc,cbm,comm,mv_plus,mv_minus,cbc,ksc).
    #[arg(long, default_value = "all", value_delimiter = ',')]
    measures: Vec<String>,
    /// Comm Centrality standardization constant R.
    #[arg(long, default_value_t = 1.0)]
    comm_r: f64,
    /// Intra/inter blend for K-shell with Community.
    #[arg(long, default_value_t = 0.5)]
    ks_delta: f64,
    /// Policy when Comm Centrality is undefined on a network.
    #[arg(long, value_enum, default_value_t = CommUndefinedArg::Skip)]
    comm_undefined: CommUndefinedArg,
}

impl MeasureOpts {
    fn measures(&self) -> Result<Vec<Measure>, Error> {
        if self.measures.len() == 1 && self.measures[0] == "all" {
            Ok(Measure::DEFAULT_REPORT.to_vec())
        } else {
            parse_measures(&self.measures)
        }
    }

    fn config(&self) -> MeasureConfig {
        MeasureConfig {
            comm_r: self.comm_r,
            ks_delta: self.ks_delta,
            comm_undefined: self.comm_undefined.into(),
        }
    }
}

#[derive(Args)]
struct CentralityArgs {
    #[command(flatten)]
    graph: GraphOpts,
    #[command(flatten)]
    partition: PartitionOpts,
    #[command(flatten)]
    measures: MeasureOpts,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SirArgs {
    #[command(flatten)]
    graph: GraphOpts,
    /// Ranking CSV produced by `centrality` (rank_<measure> columns).
    #[arg(long)]
    seeds_from: PathBuf,
    /// Seed fractions of top-ranked nodes.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1,0.25,0.5")]
    fo: Vec<f64>,
    /// Independent runs per (measure, fraction).
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Fixed infection probability; default is the epidemic threshold.
    #[arg(long, conflicts_with = "lambda_multiplier")]
    lambda: Option<f64>,
    /// Infection probability as a multiple of the epidemic threshold.
    #[arg(long, default_value_t = 1.0)]
    lambda_multiplier: f64,
    /// Per-step recovery probability.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DismantleArgs {
    #[command(flatten)]
    graph: GraphOpts,
    #[command(flatten)]
    partition: PartitionOpts,
    #[command(flatten)]
    measures: MeasureOpts,
    /// Removal fractions.
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    /// CSV with at least two columns.
    #[arg(long)]
    points: PathBuf,
    /// Predictor column name (default: first column).
    #[arg(long)]
    x_col: Option<String>,
    /// Response column name (default: second column).
    #[arg(long)]
    y_col: Option<String>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as ClapKind;
            let code = match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    let filter = cli
        .log_level
        .clone()
        .or_else(|| std::env::var("COMMSPREAD_LOG").ok())
        .unwrap_or_else(|| "warn".to_string());
    env_logger::Builder::new().parse_filters(&filter).init();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }

    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Computation => 3,
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::LoadCheck(args) => load_check(args, seed),
        Command::Centrality(args) => centrality(args, seed),
        Command::Sir(args) => sir(args, seed),
        Command::Evaluate(args) => evaluate(args, cli.seed),
        Command::Dismantle(args) => dismantle(args, seed),
        Command::Regress(args) => regress(args),
    }
}

fn load_check(args: LoadCheckArgs, seed: u64) -> Result<(), Error> {
    let loaded = args.graph.load()?;
    let g = &loaded.graph;
    let (k1, k2) = mean_degree_moments(g);
    let lambda_th = epidemic_threshold(g).ok();
    if lambda_th.is_none() {
        log::warn!("epidemic threshold undefined: <k^2> <= <k>");
    }

    let mut header = vec![
        "nodes".to_string(),
        "edges".to_string(),
        "mean_degree".to_string(),
        "mean_degree_squared".to_string(),
        "lambda_th".to_string(),
        "duplicate_edges_dropped".to_string(),
        "self_loops_dropped".to_string(),
    ];
    let mut row = vec![
        g.node_count().to_string(),
        g.edge_count().to_string(),
        format_value(k1),
        format_value(k2),
        lambda_th.map(format_value).unwrap_or_default(),
        loaded.duplicate_edges.to_string(),
        loaded.self_loops.to_string(),
    ];

    if let Some(partition) = args.partition.load(g, seed)? {
        let mu = mixing_parameter(g, &partition)?;
        let q = modularity(g, &partition)?;
        let strength = strength_category(mu, &StrengthThresholds::default());
        header.extend([
            "communities".into(),
            "mixing_parameter".into(),
            "modularity".into(),
            "strength".into(),
        ]);
        row.extend([
            partition.community_count().to_string(),
            format_value(mu),
            format_value(q),
            strength.as_str().to_string(),
        ]);
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{}", header.join(","))?;
    writeln!(out, "{}", row.join(","))?;
    Ok(())
}

fn centrality(args: CentralityArgs, seed: u64) -> Result<(), Error> {
    let loaded = args.graph.load()?;
    let g = &loaded.graph;
    let partition = args.partition.require(g, seed)?;
    let measures = args.measures.measures()?;
    let cfg = args.measures.config();
    cfg.validate()?;

    let mut computed: Vec<ScoreVector> = Vec::new();
    let mut last_error: Option<Error> = None;
    for &measure in &measures {
        match compute_measure(measure, g, &partition, &cfg) {
            Ok(sv) => computed.push(sv),
            Err(e) => {
                log::warn!("skipping {}: {e}", measure.id());
                last_error = Some(e);
            }
        }
    }
    if computed.is_empty() {
        return Err(
            last_error.unwrap_or_else(|| Error::InvalidConfig("no measures requested".into()))
        );
    }

    let mut header = vec!["node_label".to_string()];
    header.extend(computed.iter().map(|sv| sv.measure.id().to_string()));
    header.extend(computed.iter().map(|sv| format!("rank_{}", sv.measure.id())));
    let ranks: Vec<Vec<usize>> = computed.iter().map(|sv| sv.ranks()).collect();
    let rows: Vec<Vec<String>> = (0..g.node_count())
        .map(|i| {
            let mut row = vec![g.label(i)];
            row.extend(computed.iter().map(|sv| format_value(sv.scores[i])));
            row.extend(ranks.iter().map(|r| r[i].to_string()));
            row
        })
        .collect();
    write_csv(&args.out, &header, &rows)?;
    Ok(())
}

fn sir(args: SirArgs, seed: u64) -> Result<(), Error> {
    let loaded = args.graph.load()?;
    let g = &loaded.graph;
    let rankings = read_rankings(&args.seeds_from, g)?;
    let lambda = match args.lambda {
        Some(lambda) => lambda,
        None => {
            let th = epidemic_threshold(g)?;
            (th * args.lambda_multiplier).min(1.0)
        }
    };
    let cfg = SirConfig {
        lambda,
        gamma: args.gamma,
        runs: args.runs,
        master_seed: seed,
        max_steps: 1_000_000,
    };
    cfg.validate()?;

    let header: Vec<String> =
        ["measure", "fo", "lambda", "seed_count", "runs", "mean_recovered", "std_recovered"]
            .map(String::from)
            .to_vec();
    let mut rows = Vec::new();
    for ranking in &rankings {
        for &f_o in &args.fo {
            let seeds = select_seed_set(ranking, f_o, g)?;
            let outcome = run_sir(g, &seeds, &cfg)?;
            rows.push(vec![
                ranking.measure.id().to_string(),
                format_value(f_o),
                format_value(lambda),
                outcome.seed_set_size.to_string(),
                cfg.runs.to_string(),
                format_value(outcome.mean_recovered()),
                format_value(outcome.std_recovered()),
            ]);
        }
    }
    emit(args.out.as_deref(), &header, &rows)
}

fn evaluate(args: EvaluateArgs, seed: Option<u64>) -> Result<(), Error> {
    let text = fs::read_to_string(&args.config)?;
    let base = args.config.parent().unwrap_or_else(|| Path::new("."));
    let mut spec = ExperimentSpec::from_toml_str(&text, base)?;
    if let Some(seed) = seed {
        spec.master_seed = seed;
    }
    if let Some(out) = args.out {
        spec.output_dir = out;
    }
    let manifest = run_experiment(&spec)?;
    log::info!(
        "evaluated {} networks, {} outputs under {}",
        manifest.networks.len(),
        manifest.outputs.len(),
        spec.output_dir.display()
    );
    Ok(())
}

fn dismantle(args: DismantleArgs, seed: u64) -> Result<(), Error> {
    let loaded = args.graph.load()?;
    let g = &loaded.graph;
    let partition = args.partition.require(g, seed)?;
    let measures = args.measures.measures()?;
    let cfg = args.measures.config();
    let fractions =
        args.fractions.unwrap_or_else(commspread_core::pipeline::default_fo_grid);
    if fractions.is_empty() || fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::InvalidConfig("fractions must lie in [0, 1]".into()));
    }

    let mut computed: Vec<ScoreVector> = Vec::new();
    for &measure in &measures {
        match compute_measure(measure, g, &partition, &cfg) {
            Ok(sv) => computed.push(sv),
            Err(e) => log::warn!("skipping {}: {e}", measure.id()),
        }
    }
    if computed.is_empty() {
        return Err(Error::InvalidConfig("no measures could be computed".into()));
    }
    let refs: Vec<&ScoreVector> = computed.iter().collect();
    let curves = lcc_dismantling("cli", g, &refs, &fractions);

    let mut header = vec!["fraction".to_string()];
    header.extend(curves.iter().map(|c| format!("lcc_{}", c.measure.id())));
    let rows: Vec<Vec<String>> = fractions
        .iter()
        .enumerate()
        .map(|(row, &f)| {
            let mut out = vec![format_value(f)];
            out.extend(curves.iter().map(|c| c.points[row].1.to_string()));
            out
        })
        .collect();
    emit(args.out.as_deref(), &header, &rows)
}

fn regress(args: RegressArgs) -> Result<(), Error> {
    let text = fs::read_to_string(&args.points)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty points file".into() })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 {
        return Err(Error::Parse { line: 1, message: "need at least two columns".into() });
    }
    let find = |name: &Option<String>, default: usize, axis: &str| -> Result<usize, Error> {
        match name {
            None => Ok(default),
            Some(n) => columns.iter().position(|c| c == n).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("{axis} column '{n}' not found in header"),
            }),
        }
    };
    let x_col = find(&args.x_col, 0, "x")?;
    let y_col = find(&args.y_col, 1, "y")?;

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |col: usize| -> Result<f64, Error> {
            fields.get(col).and_then(|f| f.parse::<f64>().ok()).ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("cannot parse column {col} as a number"),
            })
        };
        x.push(parse(x_col)?);
        y.push(parse(y_col)?);
    }

    let fit = ols_regression(&x, &y)?;
    let header: Vec<String> =
        ["slope", "intercept", "p_value", "r_squared", "n"].map(String::from).to_vec();
    let row = vec![
        format_value(fit.slope),
        format_value(fit.intercept),
        format_value(fit.p_value),
        format_value(fit.r_squared),
        fit.n.to_string(),
    ];
    emit(None, &header, &[row])
}

/// Parse rank_<measure> columns from a centrality CSV back into rankings.
fn read_rankings(path: &Path, g: &Graph) -> Result<Vec<ScoreVector>, Error> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty ranking file".into() })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col =
        columns.iter().position(|c| *c == "node_label").ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing node_label column".into(),
        })?;
    let rank_columns: Vec<(usize, Measure)> = columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.strip_prefix("rank_").and_then(Measure::parse).map(|m| (i, m)))
        .collect();
    if rank_columns.is_empty() {
        return Err(Error::Parse { line: 1, message: "no rank_<measure> columns found".into() });
    }

    let n = g.node_count();
    let mut rankings: Vec<Vec<usize>> = vec![vec![usize::MAX; n]; rank_columns.len()];
    let mut rows = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let label = fields.get(label_col).copied().unwrap_or_default();
        let node = g.index_of_label(label).ok_or_else(|| Error::UnknownNodeLabel {
            label: label.to_string(),
            line: lineno + 2,
        })?;
        for (slot, &(col, _)) in rank_columns.iter().enumerate() {
            let rank: usize = fields
                .get(col)
                .and_then(|f| f.parse().ok())
                .filter(|&r| r >= 1 && r <= n)
                .ok_or_else(|| Error::Parse {
                    line: lineno + 2,
                    message: format!("invalid rank in column {}", columns[col]),
                })?;
            if rankings[slot][rank - 1] != usize::MAX {
                return Err(Error::Parse {
                    line: lineno + 2,
                    message: format!("duplicate rank {rank} in column {}", columns[col]),
                });
            }
            rankings[slot][rank - 1] = node;
        }
    }
    if rows != n {
        return Err(Error::InvalidConfig(format!(
            "ranking file covers {rows} nodes but the graph has {n}"
        )));
    }
    Ok(rank_columns
        .into_iter()
        .zip(rankings)
        .map(|((_, measure), ranking)| ScoreVector::from_ranking(measure, ranking))
        .collect())
}

fn emit(path: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> Result<(), Error> {
    match path {
        Some(path) => write_csv(path, header, rows),
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "{}", header.join(","))?;
            for row in rows {
                writeln!(out, "{}", row.join(","))?;
            }
            Ok(())
        }
    }
}
