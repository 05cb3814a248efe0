//! Random-ordering baseline for k-linked followers.
//!
//! A k-linked follower `A` of `C` sits in a star: `A -> C`, `A -> B_i` and
//! `B_i -> C` for `i = 1..=k`. Under a uniformly random order of those
//! `2k + 1` edges, `A -> C` exhibits closure when both edges of at least one
//! `B_i` path precede it. Observed `f_k` is compared against this baseline.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::closure::{k_linked_partition, ClosureFlags, KMode};
use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalDigraph};
use crate::rng;

pub type Fraction = Ratio<i128>;

/// Largest `k` accepted by [`exact_baseline`].
pub const EXACT_MAX_K: usize = 6;
/// Largest `k` for which every one of the `(2k+1)!` orderings is visited.
pub const PERMUTATION_MAX_K: usize = 4;

/// Edge ids in a star: 0 is `A -> C`, `1..=k` are `A -> B_i`, `k+1..=2k` are
/// `B_i -> C`.
fn star_closes(order: &[usize], k: usize, seen: &mut [bool]) -> bool {
    seen.iter_mut().for_each(|s| *s = false);
    for &e in order {
        if e == 0 {
            return false;
        }
        seen[e] = true;
        let partner = if e <= k { e + k } else { e - k };
        if seen[partner] {
            // Both edges of one path are in place; A -> C is still to come.
            return true;
        }
    }
    unreachable!("edge 0 is always in the ordering")
}

struct StarBuffer {
    order: Vec<usize>,
    seen: Vec<bool>,
}

impl StarBuffer {
    fn new(k: usize) -> Self {
        Self {
            order: (0..=2 * k).collect(),
            seen: vec![false; 2 * k + 1],
        }
    }

    fn trial<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> bool {
        self.order.shuffle(rng);
        star_closes(&self.order, k, &mut self.seen)
    }
}

/// One uniformly random ordering of the k-star; true if `A -> C` closes.
pub fn star_trial<R: Rng + ?Sized>(k: usize, rng: &mut R) -> bool {
    StarBuffer::new(k).trial(k, rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineEstimate {
    pub k: usize,
    pub sample_size: usize,
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Monte Carlo baseline: `runs` independent runs of `sample_size` star
/// trials each; mean, min and max of the per-run closure fractions.
///
/// Run `r` draws from sub-stream `r` of `seed`, so the result does not
/// depend on how runs are scheduled across threads.
pub fn baseline_fk(k: usize, sample_size: usize, runs: usize, seed: u64) -> Result<BaselineEstimate> {
    if sample_size == 0 || runs == 0 {
        return Err(Error::InvalidParams(
            "baseline needs sample_size >= 1 and runs >= 1".into(),
        ));
    }
    let fractions: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|run| {
            if k == 0 {
                return 0.0;
            }
            let mut rng = rng::stream(seed, run as u64);
            let mut buf = StarBuffer::new(k);
            let hits = (0..sample_size).filter(|_| buf.trial(k, &mut rng)).count();
            hits as f64 / sample_size as f64
        })
        .collect();
    let mean = fractions.iter().sum::<f64>() / runs as f64;
    let min = fractions.iter().copied().fold(f64::INFINITY, f64::min);
    let max = fractions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BaselineEstimate {
        k,
        sample_size,
        runs,
        // Summation rounding can push the mean a hair outside [min, max].
        mean: mean.clamp(min, max),
        min,
        max,
    })
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product()
}

fn binomial(n: usize, r: usize) -> i128 {
    (0..r as i128).fold(1, |acc, i| acc * (n as i128 - i) / (i + 1))
}

/// Closed form `sum_{j=1..k} (-1)^{j+1} C(k,j) / (2j+1)`.
pub fn inclusion_exclusion(k: usize) -> Fraction {
    (1..=k).fold(Fraction::from_integer(0), |acc, j| {
        let term = Fraction::new(binomial(k, j), 2 * j as i128 + 1);
        if j % 2 == 1 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// Visits all `(2k+1)!` orderings (Heap's algorithm).
fn enumerate_orderings(k: usize) -> Fraction {
    let n = 2 * k + 1;
    let mut order: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; n];
    let mut hits: i128 = i128::from(star_closes(&order, k, &mut seen));
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            hits += i128::from(star_closes(&order, k, &mut seen));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Fraction::new(hits, factorial(n))
}

/// Groups orderings by the set of edges preceding `A -> C`; a set of size
/// `s` accounts for `s! (2k - s)!` orderings.
fn enumerate_predecessor_sets(k: usize) -> Fraction {
    let others = 2 * k;
    let mut hits: i128 = 0;
    for mask in 0u32..(1u32 << others) {
        let closes = (0..k).any(|i| mask & (1 << i) != 0 && mask & (1 << (i + k)) != 0);
        if closes {
            let s = mask.count_ones() as usize;
            hits += factorial(s) * factorial(others - s);
        }
    }
    Fraction::new(hits, factorial(others + 1))
}

/// Exact probability that `A -> C` exhibits closure in a uniformly random
/// ordering of the k-star.
pub fn exact_baseline(k: usize) -> Result<Fraction> {
    if k > EXACT_MAX_K {
        return Err(Error::EnumerationTooLarge {
            k,
            max: EXACT_MAX_K,
        });
    }
    let enumerated = if k <= PERMUTATION_MAX_K {
        enumerate_orderings(k)
    } else {
        enumerate_predecessor_sets(k)
    };
    assert_eq!(
        enumerated,
        inclusion_exclusion(k),
        "enumeration disagrees with inclusion-exclusion at k = {k}"
    );
    Ok(enumerated)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandTestRow {
    pub k: usize,
    /// `|S_k|`
    pub class_size: usize,
    pub observed: f64,
    pub baseline: BaselineEstimate,
}

impl RandTestRow {
    pub fn above_max(&self) -> bool {
        self.observed > self.baseline.max
    }

    pub fn within_bars(&self) -> bool {
        self.baseline.min <= self.observed && self.observed <= self.baseline.max
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandTestReport {
    pub celebrity: NodeId,
    pub rows: Vec<RandTestRow>,
    /// First `k >= 1` whose observed `f_k` falls inside the baseline's
    /// `[min, max]`; `None` if that never happens. `k = 0` is skipped since
    /// both sides are identically zero there.
    pub crossover_k: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RandTestOptions {
    pub runs: usize,
    pub seed: u64,
    pub k_mode: KMode,
    pub exclude_undetermined: bool,
    /// Rows are emitted for classes with strictly more members than this.
    pub min_class_size: usize,
}

impl Default for RandTestOptions {
    fn default() -> Self {
        Self {
            runs: 100,
            seed: 0,
            k_mode: KMode::EndOfData,
            exclude_undetermined: false,
            min_class_size: 10,
        }
    }
}

/// Compares the observed `f_k` of `c`'s followers against the random-ordering
/// baseline for every sufficiently large k-class.
pub fn rand_test(
    g: &TemporalDigraph,
    flags: &ClosureFlags,
    c: NodeId,
    opts: &RandTestOptions,
) -> Result<RandTestReport> {
    let classes = k_linked_partition(g, flags, c, opts.k_mode, opts.exclude_undetermined);
    let mut rows = Vec::new();
    for class in classes {
        if class.members.len() <= opts.min_class_size {
            continue;
        }
        let Some(observed) = class.f_k() else {
            continue;
        };
        let seed = rng::derive_seed(opts.seed, class.k as u64);
        let baseline = baseline_fk(class.k, class.evaluated, opts.runs, seed)?;
        rows.push(RandTestRow {
            k: class.k,
            class_size: class.members.len(),
            observed,
            baseline,
        });
    }
    let crossover_k = rows.iter().find(|r| r.k >= 1 && r.within_bars()).map(|r| r.k);
    Ok(RandTestReport {
        celebrity: c,
        rows,
        crossover_k,
    })
}
