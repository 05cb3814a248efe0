use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dirclosure::closure::KMode;
use dirclosure::io::{
    emit_edge_csv, micro_celebrities, parse_edge_csv, parse_list_file, HandleMap,
};
use dirclosure::models::{generate, ModelKind, ModelParams};
use dirclosure::report::{
    run_experiment, write_table, Analysis, ExperimentConfig, ReportBundle, Source,
};
use dirclosure::NodeId;

#[derive(Parser)]
#[command(name = "dirclosure", version, about = "Directed closure analysis for temporal follow graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow a synthetic graph and write it as an edge CSV.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Read follower lists or an edge CSV, write the normalized edge CSV,
    /// handle map and micro-celebrity list.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Lower in-degree bound for micro-celebrities.
        #[arg(long, default_value_t = 10_000)]
        min_followers: usize,
        /// Upper in-degree bound for micro-celebrities.
        #[arg(long, default_value_t = 50_000)]
        max_followers: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Closure trajectories, per-node profiles and correlations.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        slices: SliceArgs,
        /// Also compute same-community follower sums.
        #[arg(long)]
        community: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Compare observed f_k against the random-ordering baseline.
    Randtest {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        rand: RandArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Compare measured closure ratios with the closed-form estimate.
    Approx {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        #[arg(long, default_value_t = 100)]
        corr_top: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run every analysis that applies to the source.
    Report {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        slices: SliceArgs,
        #[command(flatten)]
        rand: RandArgs,
        #[command(flatten)]
        heuristic: HeuristicArgs,
        /// Include same-community sums (implied for the communities model).
        #[arg(long)]
        community: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Seed for generation and the randomization baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = parse_model, default_value = "pa")]
    model: ModelKind,
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// Same-community probability (communities model).
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    /// Edges per arriving node.
    #[arg(long, default_value_t = 10)]
    d: usize,
    /// Number of communities (communities model).
    #[arg(long, default_value_t = 250)]
    c: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    /// Temporal edge CSV.
    Edges,
    /// Follower-list text.
    Lists,
}

#[derive(Args)]
struct InputArgs {
    /// Input file; `.csv` is read as an edge CSV, anything else as lists.
    #[arg(long)]
    input: PathBuf,
    /// Override the format guessed from the extension.
    #[arg(long, value_enum)]
    input_format: Option<InputFormat>,
}

#[derive(Args)]
struct SourceArgs {
    /// Analyze this file instead of generating a graph.
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, requires = "input")]
    input_format: Option<InputFormat>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct SliceArgs {
    /// Nodes of highest in-degree whose trajectories are written.
    #[arg(long, default_value_t = 10)]
    top_m: usize,
    /// Size of the top-by-in-degree slice for correlations.
    #[arg(long, default_value_t = 100)]
    corr_top: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum KModeArg {
    EndOfData,
    AtArrival,
}

#[derive(Args)]
struct RandArgs {
    /// Node ids to test; defaults to the highest in-degree node.
    #[arg(long = "node")]
    nodes: Vec<NodeId>,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, value_enum, default_value_t = KModeArg::EndOfData)]
    k_mode: KModeArg,
    /// Leave edges whose closure cannot be decided out of f_k.
    #[arg(long)]
    exclude_undetermined: bool,
}

#[derive(Args)]
struct HeuristicArgs {
    /// Uniform-choice probability; taken from the model when generating.
    #[arg(long)]
    uniform_prob: Option<f64>,
    /// Edges per node; taken from the model when generating.
    #[arg(long)]
    edges_per_node: Option<usize>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: dirclosure::Error| e.to_string())
}

fn input_kind(path: &Path, forced: Option<InputFormat>) -> InputFormat {
    forced.unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => InputFormat::Edges,
            _ => InputFormat::Lists,
        }
    })
}

impl ModelArgs {
    fn params(&self, seed: u64) -> ModelParams {
        match self.model {
            ModelKind::Pa => ModelParams::pa(self.n, self.alpha, self.d, seed),
            ModelKind::PaFitness => ModelParams::fitness(self.n, self.alpha, self.d, seed),
            ModelKind::PaCommunities => {
                ModelParams::communities(self.n, self.alpha, self.beta, self.c, self.d, seed)
            }
        }
    }
}

impl SourceArgs {
    fn source(&self, seed: u64) -> Source {
        match &self.input {
            Some(path) => match input_kind(path, self.input_format) {
                InputFormat::Edges => Source::EdgeCsv(path.clone()),
                InputFormat::Lists => Source::ListFile(path.clone()),
            },
            None => Source::Model(self.model.params(seed)),
        }
    }

    fn is_communities_model(&self) -> bool {
        self.input.is_none() && self.model.model == ModelKind::PaCommunities
    }
}

fn config(source: &SourceArgs, common: &Common, analyses: Vec<Analysis>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(source.source(common.seed), &common.out_dir);
    c.analyses = analyses;
    c.seed = common.seed;
    c
}

fn apply_rand(c: &mut ExperimentConfig, r: &RandArgs) {
    c.randtest_nodes = r.nodes.clone();
    c.runs = r.runs;
    c.k_mode = match r.k_mode {
        KModeArg::EndOfData => KMode::EndOfData,
        KModeArg::AtArrival => KMode::AtArrival,
    };
    c.exclude_undetermined = r.exclude_undetermined;
}

fn apply_heuristic(c: &mut ExperimentConfig, h: &HeuristicArgs) {
    c.uniform_prob = h.uniform_prob;
    c.edges_per_node = h.edges_per_node;
}

fn print_bundle(b: &ReportBundle) {
    for f in &b.files {
        println!("wrote\t{}", f.display());
    }
    for (k, v) in &b.summary {
        println!("{k}\t{v}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { model, common } => {
            let Format::Csv = common.format;
            let params = model.params(common.seed);
            let trace = generate(&params)?;
            fs::create_dir_all(&common.out_dir)
                .with_context(|| format!("creating {}", common.out_dir.display()))?;
            let path = common.out_dir.join("edges.csv");
            let cfg = ExperimentConfig::new(Source::Model(params), &common.out_dir);
            let comments: Vec<String> = cfg
                .header_lines()
                .into_iter()
                .filter(|l| !l.starts_with("analyses=") && !l.starts_with("heuristic_"))
                .take_while(|l| !l.starts_with("seed="))
                .collect();
            emit_edge_csv(&trace.graph, &path, &comments)?;
            println!("wrote\t{}", path.display());
            println!("nodes\t{}", trace.graph.node_count());
            println!("edges\t{}", trace.graph.edge_count());
        }
        Command::Ingest {
            input,
            min_followers,
            max_followers,
            common,
        } => {
            let Format::Csv = common.format;
            if min_followers > max_followers {
                bail!("--min-followers {min_followers} exceeds --max-followers {max_followers}");
            }
            let (g, handles) = match input_kind(&input.input, input.input_format) {
                InputFormat::Edges => {
                    let g = parse_edge_csv(&input.input)?;
                    let h = HandleMap::numeric(g.node_count());
                    (g, h)
                }
                InputFormat::Lists => parse_list_file(&input.input)?,
            };
            fs::create_dir_all(&common.out_dir)
                .with_context(|| format!("creating {}", common.out_dir.display()))?;
            let source = format!("source={}", input.input.display());
            let edges = common.out_dir.join("edges.csv");
            let mut comments = vec![source.clone()];
            if g.has_synthetic_seq() {
                comments.push("seq=synthetic order consistent with the follower lists".into());
            }
            emit_edge_csv(&g, &edges, &comments)?;
            let map = common.out_dir.join("handles.csv");
            handles.write_csv(&map)?;
            let celebs = common.out_dir.join("micro_celebrities.csv");
            let header = vec![
                source,
                format!("min_followers={min_followers}"),
                format!("max_followers={max_followers}"),
            ];
            let rows = micro_celebrities(&g, min_followers, max_followers)
                .into_iter()
                .map(|v| {
                    vec![
                        v.to_string(),
                        handles.handle(v).to_string(),
                        g.in_degree(v).to_string(),
                    ]
                });
            write_table(&celebs, &header, &["node", "handle", "in_degree"], rows)?;
            for p in [&edges, &map, &celebs] {
                println!("wrote\t{}", p.display());
            }
            println!("nodes\t{}", g.node_count());
            println!("edges\t{}", g.edge_count());
        }
        Command::Analyze {
            source,
            slices,
            community,
            common,
        } => {
            let Format::Csv = common.format;
            let mut analyses = vec![Analysis::Trajectories, Analysis::Profiles, Analysis::Correlation];
            if community || source.is_communities_model() {
                analyses.push(Analysis::Community);
            }
            let mut c = config(&source, &common, analyses);
            c.top_m = slices.top_m;
            c.corr_top = slices.corr_top;
            print_bundle(&run_experiment(&c)?);
        }
        Command::Randtest { source, rand, common } => {
            let Format::Csv = common.format;
            let mut c = config(&source, &common, vec![Analysis::RandTest]);
            apply_rand(&mut c, &rand);
            print_bundle(&run_experiment(&c)?);
        }
        Command::Approx {
            source,
            heuristic,
            corr_top,
            common,
        } => {
            let Format::Csv = common.format;
            let mut c = config(&source, &common, vec![Analysis::Approx]);
            apply_heuristic(&mut c, &heuristic);
            c.corr_top = corr_top;
            print_bundle(&run_experiment(&c)?);
        }
        Command::Report {
            source,
            slices,
            rand,
            heuristic,
            community,
            common,
        } => {
            let Format::Csv = common.format;
            let mut analyses = vec![
                Analysis::Trajectories,
                Analysis::Profiles,
                Analysis::RandTest,
                Analysis::Correlation,
            ];
            let has_heuristic_inputs = source.input.is_none()
                || (heuristic.uniform_prob.is_some() && heuristic.edges_per_node.is_some());
            let lists = source.input.as_deref().is_some_and(|p| {
                matches!(input_kind(p, source.input_format), InputFormat::Lists)
            });
            if has_heuristic_inputs && !lists {
                analyses.insert(3, Analysis::Approx);
            }
            if community || source.is_communities_model() {
                analyses.push(Analysis::Community);
            }
            let mut c = config(&source, &common, analyses);
            c.top_m = slices.top_m;
            c.corr_top = slices.corr_top;
            apply_rand(&mut c, &rand);
            apply_heuristic(&mut c, &heuristic);
            print_bundle(&run_experiment(&c)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace(['\n', '\r'], " ");
            eprintln!("error\t{msg}");
            ExitCode::FAILURE
        }
    }
}
