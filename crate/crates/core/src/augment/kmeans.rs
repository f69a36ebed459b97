use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AugmentError;
use crate::retrieval::Embedder;

pub const MAX_ITERATIONS: usize = 100;

/// Result of clustering: the representative member of each cluster and
/// the cluster index of every point.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub representatives: Vec<usize>,
    pub assignment: Vec<usize>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

/// Lloyd's k-means with seeded farthest-first initialisation.
///
/// The first center is a seeded random point; each further center is the
/// point farthest from all chosen centers (lowest index on ties). The
/// representative of a cluster is the member nearest its mean.
pub fn kmeans(points: &[Vec<f64>], n_clusters: usize, seed: u64) -> Result<Clustering, AugmentError> {
    if n_clusters == 0 || n_clusters > points.len() {
        return Err(AugmentError::TooManyClusters { requested: n_clusters, available: points.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < n_clusters {
        let mut far = (usize::MAX, f64::NEG_INFINITY);
        for (i, &d) in min_d.iter().enumerate() {
            if !chosen.contains(&i) && d > far.1 {
                far = (i, d);
            }
        }
        chosen.push(far.0);
        for (i, p) in points.iter().enumerate() {
            min_d[i] = min_d[i].min(sq_dist(p, &points[far.0]));
        }
    }

    let mut centers: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..MAX_ITERATIONS {
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; n_clusters];
        let mut counts = vec![0usize; n_clusters];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..n_clusters {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }

    let mut representatives = Vec::with_capacity(n_clusters);
    for (c, center) in centers.iter().enumerate() {
        let members = (0..points.len()).filter(|&i| assignment[i] == c);
        let pool: Vec<usize> = {
            let m: Vec<usize> = members.collect();
            if m.is_empty() {
                (0..points.len()).filter(|i| !representatives.contains(i)).collect()
            } else {
                m
            }
        };
        let mut best = (pool[0], f64::INFINITY);
        for &i in &pool {
            let d = sq_dist(&points[i], center);
            if d < best.1 {
                best = (i, d);
            }
        }
        representatives.push(best.0);
    }
    Ok(Clustering { representatives, assignment })
}

/// Cluster `texts` by embedding and return one representative text per
/// cluster.
pub fn cluster_centroids(
    texts: &[String],
    embedder: &dyn Embedder,
    n_clusters: usize,
    seed: u64,
) -> Result<Vec<String>, AugmentError> {
    if n_clusters > texts.len() || n_clusters == 0 {
        return Err(AugmentError::TooManyClusters { requested: n_clusters, available: texts.len() });
    }
    let points: Vec<Vec<f64>> = embedder
        .embed_batch(texts)?
        .into_iter()
        .map(|v| v.into_iter().map(f64::from).collect())
        .collect();
    let clustering = kmeans(&points, n_clusters, seed)?;
    Ok(clustering.representatives.into_iter().map(|i| texts[i].clone()).collect())
}
