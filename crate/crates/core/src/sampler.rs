//! Growable prefix-sum tree for weighted sampling with incremental updates.

use rand::Rng;

/// Fenwick tree over non-negative `f64` weights. Draws, point updates and
/// appends are all `O(log n)`.
#[derive(Clone, Debug, Default)]
pub struct WeightTree {
    // 1-based Fenwick array; tree[0] unused.
    tree: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl WeightTree {
    pub fn with_capacity(n: usize) -> Self {
        let mut tree = Vec::with_capacity(n + 1);
        tree.push(0.0);
        Self {
            tree,
            weights: Vec::with_capacity(n),
            total: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn push(&mut self, w: f64) {
        debug_assert!(w >= 0.0);
        if self.tree.is_empty() {
            self.tree.push(0.0);
        }
        self.weights.push(w);
        let i = self.weights.len();
        let mut node = w;
        let mut j = i - 1;
        let stop = i - lowbit(i);
        while j > stop {
            node += self.tree[j];
            j -= lowbit(j);
        }
        self.tree.push(node);
        self.total += w;
    }

    pub fn add(&mut self, i: usize, delta: f64) {
        self.weights[i] += delta;
        debug_assert!(self.weights[i] >= 0.0);
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += lowbit(j);
        }
        self.total += delta;
    }

    pub fn prefix(&self, end: usize) -> f64 {
        let mut s = 0.0;
        let mut j = end;
        while j > 0 {
            s += self.tree[j];
            j -= lowbit(j);
        }
        s
    }

    /// Index `i` drawn with probability `weight(i) / total()`. `None` when the
    /// total weight is zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let n = self.weights.len();
        if n == 0 || self.total <= 0.0 {
            return None;
        }
        let top = 1usize << (usize::BITS - 1 - n.leading_zeros());
        loop {
            let mut rem = rng.random::<f64>() * self.total;
            let mut pos = 0usize;
            let mut step = top;
            while step > 0 {
                let next = pos + step;
                if next <= n && self.tree[next] <= rem {
                    pos = next;
                    rem -= self.tree[next];
                }
                step >>= 1;
            }
            // Rounding drift can land past the end or on a zero weight.
            if pos < n && self.weights[pos] > 0.0 {
                return Some(pos);
            }
        }
    }
}
