//! Average-linkage agglomerative clustering on squared Euclidean distances.

use nalgebra::DVector;
use rand::Rng;

use crate::core_math::{DataMatrix, GmmParams};
use crate::error::Result;

use super::gonzalez::subsample_indices;
use super::means::sq_dist;
use super::means2gmm::means2gmm;

/// Dense cluster dissimilarities updated with the Lance-Williams rule for
/// average linkage.
#[derive(Clone, Debug)]
pub struct LinkageMatrix {
    n: usize,
    dist: Vec<f64>,
    size: Vec<usize>,
    active: Vec<bool>,
}

impl LinkageMatrix {
    pub fn from_points(points: &DataMatrix) -> Self {
        let n = points.n();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = sq_dist(points.row(i), points.row(j));
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        LinkageMatrix {
            n,
            dist,
            size: vec![1; n],
            active: vec![true; n],
        }
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    pub fn size(&self, a: usize) -> usize {
        self.size[a]
    }

    pub fn is_active(&self, a: usize) -> bool {
        self.active[a]
    }

    /// Merges cluster `b` into slot `a`.
    pub fn merge(&mut self, a: usize, b: usize) {
        let (na, nb) = (self.size[a] as f64, self.size[b] as f64);
        for k in 0..self.n {
            if !self.active[k] || k == a || k == b {
                continue;
            }
            let d = (na * self.distance(a, k) + nb * self.distance(b, k)) / (na + nb);
            self.dist[a * self.n + k] = d;
            self.dist[k * self.n + a] = d;
        }
        self.size[a] += self.size[b];
        self.active[b] = false;
    }

    fn nearest(&self, a: usize, prefer: Option<usize>) -> usize {
        let mut best = prefer;
        let mut best_d = prefer.map_or(f64::INFINITY, |p| self.distance(a, p));
        for k in 0..self.n {
            if k != a && self.active[k] && self.distance(a, k) < best_d {
                best_d = self.distance(a, k);
                best = Some(k);
            }
        }
        best.expect("at least two active clusters")
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Clusters `points` into `k` groups. Each group lists row indices in
/// ascending order; groups are ordered by their smallest member.
pub fn average_linkage(points: &DataMatrix, k: usize) -> Vec<Vec<usize>> {
    let n = points.n();
    let k = k.clamp(1, n);
    let mut merges: Vec<(f64, usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut m = LinkageMatrix::from_points(points);

    // nearest-neighbour chain; valid because average linkage is reducible
    let mut chain: Vec<usize> = Vec::new();
    let mut remaining = n;
    while remaining > 1 {
        if chain.is_empty() {
            chain.push((0..n).find(|&i| m.is_active(i)).expect("active cluster"));
        }
        loop {
            let a = *chain.last().expect("non-empty chain");
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let b = m.nearest(a, prev);
            if Some(b) == prev {
                break;
            }
            chain.push(b);
        }
        let a = chain.pop().expect("chain end");
        let b = chain.pop().expect("chain predecessor");
        let (keep, drop) = (a.min(b), a.max(b));
        merges.push((m.distance(keep, drop), keep, drop));
        m.merge(keep, drop);
        remaining -= 1;
    }

    merges.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut parent: Vec<usize> = (0..n).collect();
    for &(_, a, b) in merges.iter().take(n - k) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Average-linkage HAC on a uniform subsample of size `⌈s·N⌉`, then
/// Means2GMM on the full data with the cluster centroids.
pub fn hac_init<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<GmmParams> {
    let sample = data.select(&subsample_indices(data, k, fraction, rng)?);
    let centroids: Vec<DVector<f64>> = average_linkage(&sample, k)
        .iter()
        .map(|group| {
            let mut c = DVector::<f64>::zeros(data.d());
            for &i in group {
                for (v, x) in c.iter_mut().zip(sample.row(i)) {
                    *v += x;
                }
            }
            c / group.len() as f64
        })
        .collect();
    means2gmm(data, &centroids)
}
