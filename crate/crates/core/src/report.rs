//! Experiment runner: builds or loads a graph, runs the requested analyses
//! and writes plot-ready CSV files.
//!
//! Every file starts with the run configuration as `# key=value` lines.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baseline::{rand_test, RandTestOptions, RandTestReport};
use crate::closure::{
    all_profiles, closure_profile, detect_closure_stream, list_closure_flags, top_by_in_degree,
    ClosureFlags, ClosureProfile, KMode,
};
use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalDigraph};
use crate::heuristic::approx_final_ratios;
use crate::io::{parse_edge_csv, parse_list_file};
use crate::models::{generate, ModelKind, ModelParams};
use crate::rng;
use crate::stats::{mean_abs_error, median, pearson, spearman};

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Model(ModelParams),
    EdgeCsv(PathBuf),
    ListFile(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Analysis {
    /// Running closure ratio of the top-M nodes.
    Trajectories,
    /// Per-node closure profile table.
    Profiles,
    /// Randomization test against the random-ordering baseline.
    RandTest,
    /// Heuristic estimate against measured ratios.
    Approx,
    /// Correlation of closure ratio with degree-based quantities.
    Correlation,
    /// Adds same-community follower sums; needs community labels.
    Community,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::Trajectories,
        Analysis::Profiles,
        Analysis::RandTest,
        Analysis::Approx,
        Analysis::Correlation,
        Analysis::Community,
    ];
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Analysis::Trajectories => "trajectories",
            Analysis::Profiles => "profiles",
            Analysis::RandTest => "randtest",
            Analysis::Approx => "approx",
            Analysis::Correlation => "correlation",
            Analysis::Community => "community",
        })
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown analysis '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: Source,
    pub analyses: Vec<Analysis>,
    pub out_dir: PathBuf,
    /// Seed for the randomization test.
    pub seed: u64,
    /// Nodes whose trajectories are written.
    pub top_m: usize,
    /// Size of the top-by-in-degree slice used for correlations and the
    /// heuristic error summary.
    pub corr_top: usize,
    pub runs: usize,
    pub k_mode: KMode,
    pub exclude_undetermined: bool,
    /// Nodes to run the randomization test on; the top in-degree node if empty.
    pub randtest_nodes: Vec<NodeId>,
    /// Overrides for the heuristic; taken from the model when generating.
    pub uniform_prob: Option<f64>,
    pub edges_per_node: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(source: Source, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source,
            analyses: vec![
                Analysis::Trajectories,
                Analysis::Profiles,
                Analysis::RandTest,
                Analysis::Correlation,
            ],
            out_dir: out_dir.into(),
            seed: 0,
            top_m: 10,
            corr_top: 100,
            runs: 100,
            k_mode: KMode::EndOfData,
            exclude_undetermined: false,
            randtest_nodes: Vec::new(),
            uniform_prob: None,
            edges_per_node: None,
        }
    }

    fn wants(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }

    fn heuristic_inputs(&self) -> Option<(f64, usize)> {
        let model = match &self.source {
            Source::Model(p) => Some(p),
            _ => None,
        };
        let u = self.uniform_prob.or(model.map(ModelParams::uniform_probability))?;
        let d = self.edges_per_node.or(model.map(|p| p.d))?;
        Some((u, d))
    }

    /// Rejects configurations that cannot run, before any work is done.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.analyses.is_empty() {
            return bad("no analyses requested".into());
        }
        if self.top_m == 0 {
            return bad("top_m must be at least 1".into());
        }
        if self.corr_top < 3 {
            return bad("correlation slice needs at least 3 nodes".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if let Source::Model(p) = &self.source {
            p.validate()?;
            if self.wants(Analysis::Community) && p.kind != ModelKind::PaCommunities {
                return bad(format!(
                    "community analysis needs community labels, but model '{}' has none",
                    p.kind
                ));
            }
        }
        if self.wants(Analysis::Approx) {
            if matches!(self.source, Source::ListFile(_)) {
                return bad("heuristic estimate needs an arrival-ordered graph, not list data".into());
            }
            let Some((u, _)) = self.heuristic_inputs() else {
                return bad("heuristic estimate needs the uniform-choice probability and D".into());
            };
            if !(0.0..=1.0).contains(&u) {
                return bad(format!("uniform-choice probability {u} is outside [0, 1]"));
            }
        }
        if let Some(0) = self.edges_per_node {
            return bad("D must be at least 1".into());
        }
        Ok(())
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut h = Vec::new();
        match &self.source {
            Source::Model(p) => {
                h.push(format!("model={}", p.kind));
                h.push(format!("n={}", p.n));
                h.push(format!("alpha={}", p.alpha));
                if p.kind == ModelKind::PaCommunities {
                    h.push(format!("beta={}", p.beta));
                    h.push(format!("communities={}", p.communities));
                }
                h.push(format!("d={}", p.d));
                h.push(format!("model_seed={}", p.seed));
                if p.kind == ModelKind::PaCommunities {
                    h.push(
                        "note=alpha is the preferential-choice probability in the communities model"
                            .into(),
                    );
                }
            }
            Source::EdgeCsv(path) => h.push(format!("input_edges={}", path.display())),
            Source::ListFile(path) => h.push(format!("input_lists={}", path.display())),
        }
        let names: Vec<String> = self.analyses.iter().map(Analysis::to_string).collect();
        h.push(format!("analyses={}", names.join(";")));
        h.push(format!("seed={}", self.seed));
        h.push(format!("top_m={}", self.top_m));
        h.push(format!("corr_top={}", self.corr_top));
        h.push(format!("runs={}", self.runs));
        h.push(format!(
            "k_mode={}",
            match self.k_mode {
                KMode::EndOfData => "end-of-data",
                KMode::AtArrival => "at-arrival",
            }
        ));
        h.push(format!("exclude_undetermined={}", self.exclude_undetermined));
        if !self.randtest_nodes.is_empty() {
            let ids: Vec<String> = self.randtest_nodes.iter().map(u32::to_string).collect();
            h.push(format!("randtest_nodes={}", ids.join(";")));
        }
        if let Some((u, d)) = self.heuristic_inputs() {
            h.push(format!("heuristic_uniform_prob={u}"));
            h.push(format!("heuristic_d={d}"));
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationPair {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

impl CorrelationPair {
    pub fn of(xs: &[f64], ys: &[f64]) -> Self {
        Self {
            pearson: pearson(xs, ys).ok(),
            spearman: spearman(xs, ys).ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub node: NodeId,
    pub in_degree: usize,
    pub final_ratio: f64,
    pub follower_indegree_sum: u64,
    pub same_community_sum: Option<u64>,
}

/// Correlations of final closure ratio over a top-by-in-degree slice.
/// Coefficients are `None` where undefined (constant input).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
    pub vs_in_degree: CorrelationPair,
    pub vs_follower_sum: CorrelationPair,
    pub vs_same_community_sum: Option<CorrelationPair>,
}

impl CorrelationReport {
    pub fn from_rows(rows: Vec<CorrelationRow>) -> Self {
        let ratio: Vec<f64> = rows.iter().map(|r| r.final_ratio).collect();
        let indeg: Vec<f64> = rows.iter().map(|r| r.in_degree as f64).collect();
        let fsum: Vec<f64> = rows.iter().map(|r| r.follower_indegree_sum as f64).collect();
        let same: Option<Vec<f64>> = rows
            .iter()
            .map(|r| r.same_community_sum.map(|s| s as f64))
            .collect();
        Self {
            vs_in_degree: CorrelationPair::of(&ratio, &indeg),
            vs_follower_sum: CorrelationPair::of(&ratio, &fsum),
            vs_same_community_sum: same
                .filter(|s| !s.is_empty())
                .map(|s| CorrelationPair::of(&ratio, &s)),
            rows,
        }
    }
}

/// Builds the correlation table for the `top_n` nodes of highest in-degree.
/// `profiles` must be indexed by node id.
pub fn correlation_report(
    g: &TemporalDigraph,
    profiles: &[ClosureProfile],
    top_n: usize,
) -> CorrelationReport {
    let rows = top_by_in_degree(g, top_n)
        .into_iter()
        .map(|v| {
            let p = &profiles[v as usize];
            CorrelationRow {
                node: v,
                in_degree: p.in_degree,
                final_ratio: p.final_ratio,
                follower_indegree_sum: p.follower_indegree_sum,
                same_community_sum: p.same_community_follower_indegree_sum,
            }
        })
        .collect();
    CorrelationReport::from_rows(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicComparison {
    pub uniform_prob: f64,
    pub d: usize,
    /// Estimated final ratio of every node.
    pub approx: Vec<f64>,
    pub top_n: usize,
    pub mae_top: Option<f64>,
    pub mae_all: Option<f64>,
}

/// Everything a run computed, plus the files it wrote.
#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub graph_fingerprint: u64,
    pub node_count: usize,
    pub edge_count: usize,
    pub flags: ClosureFlags,
    /// Indexed by node id; no trajectories.
    pub profiles: Vec<ClosureProfile>,
    /// Top-M nodes with trajectories.
    pub top_profiles: Vec<ClosureProfile>,
    pub rand_tests: Vec<RandTestReport>,
    pub heuristic: Option<HeuristicComparison>,
    pub correlation: Option<CorrelationReport>,
    pub summary: Vec<(String, f64)>,
    pub files: Vec<PathBuf>,
}

impl ReportBundle {
    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

/// Loads or generates the configured graph.
pub fn load_source(source: &Source) -> Result<TemporalDigraph> {
    Ok(match source {
        Source::Model(p) => generate(p)?.graph,
        Source::EdgeCsv(path) => parse_edge_csv(path)?,
        Source::ListFile(path) => parse_list_file(path)?.0,
    })
}

/// Closure flags by the rule that fits how the graph's order is known.
pub fn closure_flags_for(g: &TemporalDigraph) -> ClosureFlags {
    if g.has_synthetic_seq() {
        list_closure_flags(g)
    } else {
        detect_closure_stream(g)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportBundle> {
    config.validate()?;
    let g = load_source(&config.source)?;
    run_on_graph(config, &g)
}

/// Runs the configured analyses on an already loaded graph. The graph's
/// source in `config` is only used for the header and heuristic inputs.
pub fn run_on_graph(config: &ExperimentConfig, g: &TemporalDigraph) -> Result<ReportBundle> {
    config.validate()?;
    let community = config.wants(Analysis::Community);
    if community && g.communities().is_none() {
        return Err(Error::Config(
            "community analysis needs community labels, but the input has none".into(),
        ));
    }
    for &v in &config.randtest_nodes {
        if v as usize >= g.node_count() {
            return Err(Error::UnknownNode(v, g.node_count()));
        }
    }
    fs::create_dir_all(&config.out_dir)?;
    let header = config.header_lines();
    let mut files = Vec::new();
    let mut summary: Vec<(String, f64)> = Vec::new();

    let flags = closure_flags_for(g);
    let profiles = all_profiles(g, &flags, community)?;
    let ratios: Vec<f64> = profiles.iter().map(|p| p.final_ratio).collect();

    summary.push(("nodes".into(), g.node_count() as f64));
    summary.push(("edges".into(), g.edge_count() as f64));
    summary.push(("closed_edges".into(), flags.closed_count() as f64));
    summary.push(("undetermined_edges".into(), flags.unknown_count() as f64));
    summary.push(("median_final_ratio".into(), median(&ratios).unwrap_or(f64::NAN)));
    let above = ratios.iter().filter(|&&r| r > 0.1).count();
    summary.push((
        "fraction_ratio_above_0.1".into(),
        if ratios.is_empty() {
            f64::NAN
        } else {
            above as f64 / ratios.len() as f64
        },
    ));

    let top = top_by_in_degree(g, config.top_m);
    let top_profiles = top
        .iter()
        .map(|&v| closure_profile(g, &flags, v, true, community))
        .collect::<Result<Vec<_>>>()?;

    if config.wants(Analysis::Trajectories) {
        let path = config.out_dir.join("trajectories.csv");
        let mut rows = Vec::new();
        for (rank, p) in top_profiles.iter().enumerate() {
            for (i, r) in p.trajectory.iter().enumerate() {
                rows.push(vec![
                    p.node.to_string(),
                    (rank + 1).to_string(),
                    p.in_degree.to_string(),
                    (i + 1).to_string(),
                    r.to_string(),
                ]);
            }
        }
        write_table(&path, &header, &["node", "rank", "in_degree", "arrival", "ratio"], rows)?;
        files.push(path);
    }

    if config.wants(Analysis::Profiles) {
        let path = config.out_dir.join("profiles.csv");
        let mut cols = vec!["node", "in_degree", "closed", "final_ratio", "follower_indegree_sum"];
        if community {
            cols.push("same_community_sum");
        }
        let rows = profiles.iter().map(|p| {
            let mut r = vec![
                p.node.to_string(),
                p.in_degree.to_string(),
                p.closed.to_string(),
                p.final_ratio.to_string(),
                p.follower_indegree_sum.to_string(),
            ];
            if let Some(s) = p.same_community_follower_indegree_sum {
                r.push(s.to_string());
            }
            r
        });
        write_table(&path, &header, &cols, rows)?;
        files.push(path);
    }

    let mut rand_tests = Vec::new();
    if config.wants(Analysis::RandTest) {
        let targets = if config.randtest_nodes.is_empty() {
            top_by_in_degree(g, 1)
        } else {
            config.randtest_nodes.clone()
        };
        for &c in &targets {
            let opts = RandTestOptions {
                runs: config.runs,
                seed: rng::derive_seed(config.seed, u64::from(c)),
                k_mode: config.k_mode,
                exclude_undetermined: config.exclude_undetermined,
                ..Default::default()
            };
            rand_tests.push(rand_test(g, &flags, c, &opts)?);
        }
        let path = config.out_dir.join("randtest.csv");
        let cols = [
            "celebrity",
            "k",
            "class_size",
            "observed",
            "baseline_mean",
            "baseline_min",
            "baseline_max",
            "runs",
            "above_max",
            "crossover_k",
        ];
        let mut rows = Vec::new();
        for rep in &rand_tests {
            let cross = rep.crossover_k.map_or_else(|| "inf".to_string(), |k| k.to_string());
            for row in &rep.rows {
                rows.push(vec![
                    rep.celebrity.to_string(),
                    row.k.to_string(),
                    row.class_size.to_string(),
                    row.observed.to_string(),
                    row.baseline.mean.to_string(),
                    row.baseline.min.to_string(),
                    row.baseline.max.to_string(),
                    row.baseline.runs.to_string(),
                    row.above_max().to_string(),
                    cross.clone(),
                ]);
            }
        }
        write_table(&path, &header, &cols, rows)?;
        files.push(path);
    }

    let mut heuristic = None;
    if config.wants(Analysis::Approx) {
        let (u, d) = config
            .heuristic_inputs()
            .expect("validated heuristic inputs");
        let approx = approx_final_ratios(g, u, d);
        let top_n = top_by_in_degree(g, config.corr_top);
        let pick = |v: &[NodeId], xs: &[f64]| v.iter().map(|&i| xs[i as usize]).collect::<Vec<_>>();
        let mae_top = mean_abs_error(&pick(&top_n, &ratios), &pick(&top_n, &approx));
        let mae_all = mean_abs_error(&ratios, &approx);
        summary.push(("heuristic_mae_top".into(), mae_top.unwrap_or(f64::NAN)));
        summary.push(("heuristic_mae_all".into(), mae_all.unwrap_or(f64::NAN)));

        let path = config.out_dir.join("heuristic.csv");
        let rows = profiles.iter().map(|p| {
            let a = approx[p.node as usize];
            vec![
                p.node.to_string(),
                p.in_degree.to_string(),
                p.final_ratio.to_string(),
                a.to_string(),
                (p.final_ratio - a).abs().to_string(),
            ]
        });
        write_table(&path, &header, &["node", "in_degree", "actual", "approx", "abs_error"], rows)?;
        files.push(path);
        heuristic = Some(HeuristicComparison {
            uniform_prob: u,
            d,
            approx,
            top_n: config.corr_top,
            mae_top,
            mae_all,
        });
    }

    let mut correlation = None;
    if config.wants(Analysis::Correlation) {
        let rep = correlation_report(g, &profiles, config.corr_top);
        let path = config.out_dir.join("correlation.csv");
        let mut cols = vec!["node", "in_degree", "final_ratio", "follower_indegree_sum"];
        if community {
            cols.push("same_community_sum");
        }
        let rows = rep.rows.iter().map(|r| {
            let mut row = vec![
                r.node.to_string(),
                r.in_degree.to_string(),
                r.final_ratio.to_string(),
                r.follower_indegree_sum.to_string(),
            ];
            if let Some(s) = r.same_community_sum {
                row.push(s.to_string());
            }
            row
        });
        write_table(&path, &header, &cols, rows)?;
        files.push(path);

        let mut push_pair = |name: &str, pair: &CorrelationPair| {
            summary.push((format!("pearson_ratio_vs_{name}"), pair.pearson.unwrap_or(f64::NAN)));
            summary.push((format!("spearman_ratio_vs_{name}"), pair.spearman.unwrap_or(f64::NAN)));
        };
        push_pair("in_degree", &rep.vs_in_degree);
        push_pair("follower_sum", &rep.vs_follower_sum);
        if let Some(p) = &rep.vs_same_community_sum {
            push_pair("same_community_sum", p);
        }
        correlation = Some(rep);
    }

    let path = config.out_dir.join("summary.csv");
    write_table(
        &path,
        &header,
        &["metric", "value"],
        summary.iter().map(|(k, v)| vec![k.clone(), v.to_string()]),
    )?;
    files.push(path);

    Ok(ReportBundle {
        graph_fingerprint: g.fingerprint(),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        flags,
        profiles,
        top_profiles,
        rand_tests,
        heuristic,
        correlation,
        summary,
        files,
    })
}

/// Writes `# `-prefixed header lines followed by a CSV table.
pub fn write_table<I>(path: &Path, header: &[String], columns: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    for h in header {
        writeln!(file, "# {h}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analysis_names_round_trip() {
        for a in Analysis::ALL {
            assert_eq!(a.to_string().parse::<Analysis>().unwrap(), a);
        }
        assert!("plot".parse::<Analysis>().is_err());
    }

    #[test]
    fn community_analysis_on_pa_is_rejected() {
        let mut cfg = ExperimentConfig::new(
            Source::Model(ModelParams::pa(100, 0.3, 3, 1)),
            "/nonexistent/should-not-be-created",
        );
        cfg.analyses.push(Analysis::Community);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(run_experiment(&cfg).is_err());
        assert!(!cfg.out_dir.exists());
    }

    #[test]
    fn approx_on_lists_is_rejected() {
        let mut cfg = ExperimentConfig::new(Source::ListFile("x.lists".into()), "/tmp/unused");
        cfg.analyses = vec![Analysis::Approx];
        cfg.uniform_prob = Some(0.3);
        cfg.edges_per_node = Some(10);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.source = Source::EdgeCsv("x.csv".into());
        cfg.uniform_prob = None;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn correlation_pairs_undefined_on_constant_ratios() {
        let rows = (0..5)
            .map(|i| CorrelationRow {
                node: i,
                in_degree: i as usize,
                final_ratio: 0.0,
                follower_indegree_sum: 2 * i as u64,
                same_community_sum: None,
            })
            .collect();
        let rep = CorrelationReport::from_rows(rows);
        assert_eq!(rep.vs_in_degree.pearson, None);
        assert!(rep.vs_same_community_sum.is_none());
    }
}
