use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;

/// One agglomeration step. Leaves are clusters `0..n`; the cluster created by
/// merge `i` is `n + i`. `a` holds the smaller leaf index of the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.leaf_labels.len()
    }

    /// Flat cluster ids per leaf after stopping with `k` clusters. Ids are
    /// numbered by each cluster's smallest leaf, starting at 0.
    pub fn cut(&self, k: usize) -> Vec<usize> {
        let n = self.leaf_count();
        let k = k.clamp(1, n.max(1));
        let mut parent: Vec<usize> = (0..n + self.merges.len()).collect();
        for (i, m) in self.merges.iter().take(n - k).enumerate() {
            parent[m.a] = n + i;
            parent[m.b] = n + i;
        }
        let root = |mut c: usize| {
            while parent[c] != c {
                c = parent[c];
            }
            c
        };
        let roots: Vec<usize> = (0..n).map(root).collect();
        let mut ids: Vec<usize> = Vec::new();
        roots
            .iter()
            .map(|r| match ids.iter().position(|x| x == r) {
                Some(p) => p,
                None => {
                    ids.push(*r);
                    ids.len() - 1
                }
            })
            .collect()
    }

    /// Leaves in left-to-right drawing order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.leaf_count();
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(c) = stack.pop() {
            if c < n {
                out.push(c);
            } else {
                let m = self.merges[c - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        out
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Agglomerative clustering, Euclidean distance, complete linkage.
///
/// Among equally close cluster pairs the one with the smallest
/// `(min leaf of a, min leaf of b)` merges first.
pub fn hier_cluster(vectors: &[Vec<f64>], labels: &[String]) -> Result<Dendrogram, AnalysisError> {
    let n = vectors.len();
    if n < 2 {
        return Err(AnalysisError::TooFew { needed: 2, found: n });
    }
    if labels.len() != n {
        return Err(AnalysisError::LengthMismatch(labels.len(), n));
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(AnalysisError::LengthMismatch(dim, v.len()));
    }

    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = euclidean(&vectors[i], &vectors[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    // Active clusters, kept sorted by smallest leaf. Slot `s` is indexed by
    // that smallest leaf so `dist` can be updated in place.
    struct Active {
        slot: usize,
        id: usize,
        size: usize,
    }
    let mut active: Vec<Active> = (0..n).map(|i| Active { slot: i, id: i, size: 1 }).collect();
    let mut merges = Vec::with_capacity(n - 1);

    while active.len() > 1 {
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for x in 0..active.len() {
            for y in x + 1..active.len() {
                let d = dist[active[x].slot][active[y].slot];
                if d < best.0 {
                    best = (d, x, y);
                }
            }
        }
        let (height, x, y) = best;
        let (sx, sy) = (active[x].slot, active[y].slot);
        for other in &active {
            let s = other.slot;
            if s != sx && s != sy {
                let d = dist[sx][s].max(dist[sy][s]);
                dist[sx][s] = d;
                dist[s][sx] = d;
            }
        }
        let size = active[x].size + active[y].size;
        merges.push(Merge {
            a: active[x].id,
            b: active[y].id,
            height,
            size,
        });
        active[x].id = n + merges.len() - 1;
        active[x].size = size;
        active.remove(y);
    }

    Ok(Dendrogram {
        leaf_labels: labels.to_vec(),
        merges,
    })
}
