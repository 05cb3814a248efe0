//! Growth models: preferential attachment, preferential attachment with
//! fitness, and preferential attachment with communities.
//!
//! Nodes arrive in label order and each arriving node `j` emits up to `D`
//! edges to earlier nodes. A target already chosen by `j` is rejected and the
//! whole per-edge draw is repeated; after `100 * D` draws for one node the
//! remaining targets come uniformly without replacement from the still
//! unused reachable candidates.
//!
//! The meaning of `alpha` differs between models. In plain and fitness PA it
//! is the probability of the uniform choice; in the communities model it is
//! the probability of the preferential choice.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalDigraph};
use crate::rng;
use crate::sampler::WeightTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Pa,
    PaFitness,
    PaCommunities,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Pa => "pa",
            ModelKind::PaFitness => "fitness",
            ModelKind::PaCommunities => "communities",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pa" => Ok(ModelKind::Pa),
            "fitness" | "pa-fitness" | "pa_fitness" => Ok(ModelKind::PaFitness),
            "communities" | "pa-communities" | "pa_communities" => Ok(ModelKind::PaCommunities),
            other => Err(Error::InvalidParams(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub alpha: f64,
    /// Same-community probability; communities model only.
    pub beta: f64,
    /// Edges per arriving node.
    pub d: usize,
    /// Final node count.
    pub n: usize,
    /// Number of communities; communities model only.
    pub communities: usize,
    pub seed: u64,
}

impl ModelParams {
    pub fn pa(n: usize, alpha: f64, d: usize, seed: u64) -> Self {
        Self {
            kind: ModelKind::Pa,
            alpha,
            beta: 1.0,
            d,
            n,
            communities: 1,
            seed,
        }
    }

    pub fn fitness(n: usize, alpha: f64, d: usize, seed: u64) -> Self {
        Self {
            kind: ModelKind::PaFitness,
            ..Self::pa(n, alpha, d, seed)
        }
    }

    pub fn communities(n: usize, alpha: f64, beta: f64, c: usize, d: usize, seed: u64) -> Self {
        Self {
            kind: ModelKind::PaCommunities,
            alpha,
            beta,
            d,
            n,
            communities: c,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha = {} is outside [0, 1]", self.alpha));
        }
        if self.d == 0 {
            return bad("D must be at least 1".into());
        }
        if self.n > NodeId::MAX as usize {
            return bad(format!("N = {} exceeds the node id range", self.n));
        }
        match self.kind {
            ModelKind::Pa | ModelKind::PaFitness => {
                if self.n < 2 {
                    return bad(format!("N = {} must be at least 2", self.n));
                }
            }
            ModelKind::PaCommunities => {
                if !(0.5..=1.0).contains(&self.beta) {
                    return bad(format!("beta = {} is outside [0.5, 1]", self.beta));
                }
                if self.communities == 0 {
                    return bad("C must be at least 1".into());
                }
                if self.n < 2 * self.communities {
                    return bad(format!(
                        "N = {} must be at least 2C = {}",
                        self.n,
                        2 * self.communities
                    ));
                }
            }
        }
        Ok(())
    }

    /// Probability that a single edge picks its endpoint uniformly rather
    /// than by in-degree.
    pub fn uniform_probability(&self) -> f64 {
        match self.kind {
            ModelKind::Pa | ModelKind::PaFitness => self.alpha,
            ModelKind::PaCommunities => 1.0 - self.alpha,
        }
    }
}

/// A generated graph together with the parameters that produced it.
/// Fitness values and community labels live on the graph itself.
#[derive(Clone, Debug)]
pub struct GrowthTrace {
    pub graph: TemporalDigraph,
    pub params: ModelParams,
}

/// Generates the model selected by `params.kind`, seeded from `params.seed`.
pub fn generate(params: &ModelParams) -> Result<GrowthTrace> {
    let mut rng = rng::seeded(params.seed);
    match params.kind {
        ModelKind::Pa => generate_pa(params, &mut rng),
        ModelKind::PaFitness => generate_pa_fitness(params, &mut rng),
        ModelKind::PaCommunities => generate_pa_communities(params, &mut rng),
    }
}

pub fn generate_pa<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<GrowthTrace> {
    expect_kind(params, ModelKind::Pa)?;
    grow_preferential(params, rng, None)
}

pub fn generate_pa_fitness<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<GrowthTrace> {
    generate_pa_fitness_with(params, FitnessSource::Uniform, rng)
}

/// Where node fitness values come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitnessSource {
    /// Uniform in (0, 1), drawn as each node is created.
    Uniform,
    /// Every node gets this value; consumes no randomness.
    Constant(f64),
}

pub fn generate_pa_fitness_with<R: Rng + ?Sized>(
    params: &ModelParams,
    source: FitnessSource,
    rng: &mut R,
) -> Result<GrowthTrace> {
    expect_kind(params, ModelKind::PaFitness)?;
    if let FitnessSource::Constant(f) = source {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::InvalidParams(format!("fitness {f} must be positive")));
        }
    }
    grow_preferential(params, rng, Some(source))
}

fn expect_kind(params: &ModelParams, kind: ModelKind) -> Result<()> {
    params.validate()?;
    if params.kind != kind {
        return Err(Error::InvalidParams(format!(
            "expected {kind} parameters, got {}",
            params.kind
        )));
    }
    Ok(())
}

fn draw_fitness<R: Rng + ?Sized>(source: FitnessSource, rng: &mut R) -> f64 {
    if let FitnessSource::Constant(f) = source {
        return f;
    }
    loop {
        let f: f64 = rng.random();
        if f > 0.0 {
            return f;
        }
    }
}

/// Draws distinct targets for one arriving node. `draw` performs a full
/// per-edge draw; `fallback` lists every reachable candidate.
fn pick_targets<R, D, F>(
    rng: &mut R,
    d: usize,
    reachable: usize,
    mut draw: D,
    fallback: F,
) -> Vec<NodeId>
where
    R: Rng + ?Sized,
    D: FnMut(&mut R) -> NodeId,
    F: FnOnce() -> Vec<NodeId>,
{
    let want = d.min(reachable);
    let mut used: Vec<NodeId> = Vec::with_capacity(want);
    let cap = 100 * d;
    let mut attempts = 0;
    while used.len() < want && attempts < cap {
        attempts += 1;
        let t = draw(rng);
        if !used.contains(&t) {
            used.push(t);
        }
    }
    if used.len() < want {
        let pool: Vec<NodeId> = fallback()
            .into_iter()
            .filter(|t| !used.contains(t))
            .collect();
        let need = (want - used.len()).min(pool.len());
        for i in index::sample(rng, pool.len(), need) {
            used.push(pool[i]);
        }
    }
    used
}

fn grow_preferential<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
    fitness_source: Option<FitnessSource>,
) -> Result<GrowthTrace> {
    let with_fitness = fitness_source.is_some();
    let n = params.n;
    let alpha = params.alpha;
    let mut g = TemporalDigraph::with_capacity(n, n * params.d);
    let mut fitness = Vec::with_capacity(if with_fitness { n } else { 0 });
    let mut tree = WeightTree::with_capacity(n);
    let mut positive = 0usize;

    let unit = |fitness: &[f64], v: usize| if with_fitness { fitness[v] } else { 1.0 };

    for _ in 0..2 {
        if let Some(src) = fitness_source {
            fitness.push(draw_fitness(src, rng));
        }
        tree.push(0.0);
    }
    g.append_edge(1, 0)?;
    tree.add(0, unit(&fitness, 0));
    positive += 1;

    for j in 2..n {
        if let Some(src) = fitness_source {
            fitness.push(draw_fitness(src, rng));
        }
        let reachable = if alpha == 0.0 {
            positive
        } else if alpha == 1.0 {
            j - 1
        } else {
            // {1..j-1} plus node 0, which always has positive weight.
            j
        };
        let tree_ref = &tree;
        let targets = pick_targets(
            rng,
            params.d,
            reachable,
            |rng| {
                if rng.random_bool(alpha) {
                    rng.random_range(1..j) as NodeId
                } else {
                    tree_ref
                        .sample(rng)
                        .expect("node 0 always carries weight") as NodeId
                }
            },
            || {
                (0..j as NodeId)
                    .filter(|&v| {
                        (alpha > 0.0 && v >= 1) || (alpha < 1.0 && tree_ref.weight(v as usize) > 0.0)
                    })
                    .collect()
            },
        );
        for t in targets {
            g.append_edge(j as NodeId, t)?;
            if tree.weight(t as usize) == 0.0 {
                positive += 1;
            }
            tree.add(t as usize, unit(&fitness, t as usize));
        }
        tree.push(0.0);
    }

    if with_fitness {
        g.set_fitness(fitness)?;
    }
    Ok(GrowthTrace {
        graph: g,
        params: params.clone(),
    })
}

struct Community {
    members: Vec<NodeId>,
    tree: WeightTree,
    positive: usize,
}

pub fn generate_pa_communities<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<GrowthTrace> {
    expect_kind(params, ModelKind::PaCommunities)?;
    let n = params.n;
    let c = params.communities;
    let (alpha, beta) = (params.alpha, params.beta);

    let mut g = TemporalDigraph::with_capacity(n, n * params.d);
    let mut labels: Vec<u32> = Vec::with_capacity(n);
    let mut local: Vec<usize> = Vec::with_capacity(n);
    let mut global = WeightTree::with_capacity(n);
    let mut global_positive = 0usize;
    let mut comms: Vec<Community> = (0..c)
        .map(|_| Community {
            members: Vec::new(),
            tree: WeightTree::default(),
            positive: 0,
        })
        .collect();

    let join = |v: NodeId,
                    label: usize,
                    labels: &mut Vec<u32>,
                    local: &mut Vec<usize>,
                    global: &mut WeightTree,
                    comms: &mut Vec<Community>| {
        labels.push(label as u32);
        local.push(comms[label].members.len());
        comms[label].members.push(v);
        comms[label].tree.push(0.0);
        global.push(0.0);
    };

    // Seed: community i holds nodes 2i and 2i+1, with 2i+1 -> 2i.
    for i in 0..c {
        join(2 * i as NodeId, i, &mut labels, &mut local, &mut global, &mut comms);
        join(2 * i as NodeId + 1, i, &mut labels, &mut local, &mut global, &mut comms);
    }
    let credit = |t: NodeId,
                  labels: &[u32],
                  local: &[usize],
                  global: &mut WeightTree,
                  global_positive: &mut usize,
                  comms: &mut [Community]| {
        let cm = &mut comms[labels[t as usize] as usize];
        if global.weight(t as usize) == 0.0 {
            *global_positive += 1;
            cm.positive += 1;
        }
        global.add(t as usize, 1.0);
        cm.tree.add(local[t as usize], 1.0);
    };
    for i in 0..c {
        let (s, t) = (2 * i as NodeId + 1, 2 * i as NodeId);
        g.append_edge(s, t)?;
        credit(t, &labels, &local, &mut global, &mut global_positive, &mut comms);
    }

    for j in 2 * c..n {
        let label = rng.random_range(0..c);
        let own = &comms[label];
        let m = own.members.len();
        let reachable = if alpha < 1.0 {
            if beta < 1.0 {
                j
            } else {
                m
            }
        } else {
            let own_reach = if own.positive > 0 { own.positive } else { m };
            if beta == 1.0 {
                own_reach
            } else if global_positive == 0 {
                j
            } else if own.positive > 0 {
                global_positive
            } else {
                global_positive + m
            }
        };

        let global_ref = &global;
        let targets = pick_targets(
            rng,
            params.d,
            reachable,
            |rng| {
                let same = rng.random_bool(beta);
                let preferential = rng.random_bool(alpha);
                if same {
                    let pick = if preferential {
                        own.tree.sample(rng)
                    } else {
                        None
                    };
                    let idx = pick.unwrap_or_else(|| rng.random_range(0..m));
                    own.members[idx]
                } else {
                    let pick = if preferential {
                        global_ref.sample(rng)
                    } else {
                        None
                    };
                    pick.unwrap_or_else(|| rng.random_range(0..j)) as NodeId
                }
            },
            || {
                let mut out: Vec<NodeId> = Vec::new();
                let own_zero = own.tree.total() <= 0.0;
                for &v in &own.members {
                    if alpha < 1.0 || own_zero || own.tree.weight(local[v as usize]) > 0.0 {
                        out.push(v);
                    }
                }
                if beta < 1.0 {
                    let global_zero = global_ref.total() <= 0.0;
                    for v in 0..j as NodeId {
                        if labels[v as usize] as usize == label {
                            continue;
                        }
                        if alpha < 1.0 || global_zero || global_ref.weight(v as usize) > 0.0 {
                            out.push(v);
                        }
                    }
                }
                out
            },
        );

        for t in targets {
            g.append_edge(j as NodeId, t)?;
            credit(t, &labels, &local, &mut global, &mut global_positive, &mut comms);
        }
        join(j as NodeId, label, &mut labels, &mut local, &mut global, &mut comms);
    }

    g.set_communities(labels)?;
    Ok(GrowthTrace {
        graph: g,
        params: params.clone(),
    })
}
