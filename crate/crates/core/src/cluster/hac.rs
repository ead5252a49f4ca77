//! Ward-linkage agglomerative clustering cut at a distance threshold.
//!
//! Up to [`MATRIX_LIMIT`] points the full squared-distance matrix is kept
//! and updated with the Lance–Williams recurrence
//!
//! ```text
//! d²(k, i∪j) = ((nᵢ+nₖ)·d²(k,i) + (nⱼ+nₖ)·d²(k,j) − nₖ·d²(i,j)) / (nᵢ+nⱼ+nₖ)
//! ```
//!
//! merging the closest pair while its distance `sqrt(d²)` stays at or below
//! the threshold. Equal distances merge the lexicographically smallest slot
//! pair `(i, j)`, and the merged cluster takes slot `i`. Nearest neighbours
//! are cached per row, so a typical run costs O(n²).
//!
//! Larger inputs use the nearest-neighbour chain algorithm on centroids,
//! with Ward distance `sqrt(2ab/(a+b))·‖cₐ − c_b‖`, which needs only O(n·d)
//! memory. It yields the same partition whenever no two candidate merges
//! tie.

use super::ClusterError;

pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 1.5;

/// Inputs above this size switch to the memory-light chain algorithm.
pub const MATRIX_LIMIT: usize = 4096;

pub(crate) fn check_dims(vectors: &[Vec<f64>]) -> Result<usize, ClusterError> {
    let dim = vectors.first().map_or(0, Vec::len);
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(ClusterError::DimensionMismatch { index: i, expected: dim, found: v.len() });
        }
    }
    Ok(dim)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster label per input vector; labels are contiguous from 0 in order of
/// first appearance.
pub fn hac_cluster(vectors: &[Vec<f64>], threshold: f64) -> Result<Vec<usize>, ClusterError> {
    check_dims(vectors)?;
    let owners = if vectors.len() <= MATRIX_LIMIT { matrix_ward(vectors, threshold) } else { chain_ward(vectors, threshold) };
    Ok(relabel(&owners))
}

pub(crate) fn relabel(owners: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    owners
        .iter()
        .map(|o| {
            let next = map.len();
            *map.entry(*o).or_insert(next)
        })
        .collect()
}

/// Condensed upper-triangular storage.
struct Condensed {
    n: usize,
    data: Vec<f64>,
}

impl Condensed {
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.data[self.idx(a, b)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let k = self.idx(a, b);
        self.data[k] = v;
    }
}

fn matrix_ward(vectors: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let n = vectors.len();
    let mut d = Condensed { n, data: Vec::with_capacity(n * n.saturating_sub(1) / 2) };
    for i in 0..n {
        for j in i + 1..n {
            d.data.push(sq_dist(&vectors[i], &vectors[j]));
        }
    }
    let mut size = vec![1.0f64; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let scan = |d: &Condensed, active: &[bool], i: usize| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for j in i + 1..n {
            if active[j] {
                let v = d.get(i, j);
                if v < best.1 {
                    best = (j, v);
                }
            }
        }
        best
    };
    for i in 0..n {
        (nn[i], nn_d[i]) = scan(&d, &active, i);
    }

    loop {
        let mut best = (usize::MAX, f64::INFINITY);
        for i in 0..n {
            if active[i] && nn_d[i] < best.1 {
                best = (i, nn_d[i]);
            }
        }
        let (i, dij) = best;
        if i == usize::MAX || dij.max(0.0).sqrt() > threshold {
            break;
        }
        let j = nn[i];
        let (ni, nj) = (size[i], size[j]);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k];
            let v = ((ni + nk) * d.get(k, i) + (nj + nk) * d.get(k, j) - nk * dij) / (ni + nj + nk);
            d.set(k, i, v);
        }
        active[j] = false;
        size[i] = ni + nj;
        for o in owner.iter_mut() {
            if *o == j {
                *o = i;
            }
        }
        (nn[i], nn_d[i]) = scan(&d, &active, i);
        for k in 0..i {
            if !active[k] {
                continue;
            }
            if nn[k] == i || nn[k] == j {
                (nn[k], nn_d[k]) = scan(&d, &active, k);
            } else {
                let v = d.get(k, i);
                if v < nn_d[k] || (v == nn_d[k] && i < nn[k]) {
                    nn[k] = i;
                    nn_d[k] = v;
                }
            }
        }
        for k in i + 1..j {
            if active[k] && nn[k] == j {
                (nn[k], nn_d[k]) = scan(&d, &active, k);
            }
        }
    }
    owner
}

fn ward_sq(ca: &[f64], a: f64, cb: &[f64], b: f64) -> f64 {
    2.0 * a * b / (a + b) * sq_dist(ca, cb)
}

fn chain_ward(vectors: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let n = vectors.len();
    let mut centroid: Vec<Vec<f64>> = vectors.to_vec();
    let mut size = vec![1.0f64; n];
    let mut active = vec![true; n];
    let mut remaining = n;
    // Merges at or below the threshold, as (slot a, slot b).
    let mut merges: Vec<(usize, usize)> = Vec::new();
    let mut chain: Vec<usize> = Vec::new();

    while remaining > 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active cluster"));
        }
        let top = *chain.last().expect("non-empty chain");
        let prev = chain.len().checked_sub(2).map(|p| chain[p]);
        let mut best = (usize::MAX, f64::INFINITY);
        for k in 0..n {
            if active[k] && k != top {
                let v = ward_sq(&centroid[top], size[top], &centroid[k], size[k]);
                // Prefer the previous chain element on ties to guarantee termination.
                if v < best.1 || (v == best.1 && Some(k) == prev) {
                    best = (k, v);
                }
            }
        }
        if Some(best.0) == prev {
            let (a, b) = (top.min(best.0), top.max(best.0));
            chain.truncate(chain.len() - 2);
            if best.1.max(0.0).sqrt() <= threshold {
                merges.push((a, b));
            }
            let (na, nb) = (size[a], size[b]);
            let cb = std::mem::take(&mut centroid[b]);
            for (x, y) in centroid[a].iter_mut().zip(&cb) {
                *x = (na * *x + nb * y) / (na + nb);
            }
            size[a] = na + nb;
            active[b] = false;
            remaining -= 1;
        } else {
            chain.push(best.0);
        }
    }

    // Ward heights are monotone, so merges below the cut form whole subtrees.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in merges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}
