use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{rgb_to_hex, ColorCluster, ColorError, Pixel};

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dr = a[0] - b[0];
    let dg = a[1] - b[1];
    let db = a[2] - b[2];
    dr * dr + dg * dg + db * db
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(point: &[f64; 3], centroids: &[[f64; 3]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(point, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// k-means++ seeding. Stops early once every point coincides with a chosen
/// centroid, so fewer than `k` distinct colors yield fewer centroids.
fn seed_centroids(points: &[[f64; 3]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            chosen = Some(i);
            if acc > target {
                break;
            }
        }
        let Some(chosen) = chosen else { break };
        let c = points[chosen];
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Cluster pixels in RGB space.
///
/// Seeding is k-means++ driven by a ChaCha8 generator seeded with `seed`;
/// Lloyd iterations stop once no centroid moves by `tol` or more (Euclidean,
/// channel units) or after `max_iter` rounds. An emptied cluster takes over
/// the point lying farthest from its own centroid. Clusters that stay empty
/// are dropped, so the result has at most `k` entries, sorted by descending
/// proportion.
pub fn kmeans_palette(
    pixels: &[Pixel],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<ColorCluster>, ColorError> {
    if pixels.is_empty() {
        return Err(ColorError::EmptyInput);
    }
    if k == 0 {
        return Err(ColorError::ZeroClusters);
    }
    if max_iter == 0 || tol.is_nan() || tol <= 0.0 {
        return Err(ColorError::InvalidParams("max_iter and tol must be positive".into()));
    }

    let points: Vec<[f64; 3]> = pixels.iter().map(|p| p.to_f64()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(&points, k, &mut rng);
    let kk = centroids.len();

    let mut assignment = vec![0usize; points.len()];
    let mut counts = vec![0usize; kk];
    for _ in 0..max_iter {
        for (a, p) in assignment.iter_mut().zip(&points) {
            *a = nearest(p, &centroids);
        }
        counts.iter_mut().for_each(|c| *c = 0);
        for &a in &assignment {
            counts[a] += 1;
        }

        for empty in 0..kk {
            if counts[empty] > 0 {
                continue;
            }
            let donor = assignment
                .iter()
                .enumerate()
                .filter(|&(_, &a)| counts[a] > 1)
                .map(|(i, &a)| (i, dist2(&points[i], &centroids[a])))
                .filter(|&(_, d)| d > 0.0)
                .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            if let Some((i, _)) = donor {
                counts[assignment[i]] -= 1;
                assignment[i] = empty;
                counts[empty] = 1;
            }
        }

        let mut sums = vec![[0.0f64; 3]; kk];
        for (a, p) in assignment.iter().zip(&points) {
            for ch in 0..3 {
                sums[*a][ch] += p[ch];
            }
        }
        let mut movement = 0.0f64;
        for j in 0..kk {
            if counts[j] == 0 {
                continue;
            }
            let n = counts[j] as f64;
            let updated = [sums[j][0] / n, sums[j][1] / n, sums[j][2] / n];
            movement = movement.max(dist2(&updated, &centroids[j]).sqrt());
            centroids[j] = updated;
        }
        if movement < tol {
            break;
        }
    }

    let total = points.len() as f64;
    let mut clusters: Vec<ColorCluster> = centroids
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(c, &n)| ColorCluster { centroid: *c, proportion: n as f64 / total })
        .collect();
    // Stable sort keeps seeding order among exact ties.
    clusters.sort_by(|a, b| b.proportion.total_cmp(&a.proportion).then_with(|| hex_key(a).cmp(&hex_key(b))));
    Ok(clusters)
}

pub(super) fn hex_key(c: &ColorCluster) -> String {
    rgb_to_hex(c.centroid).unwrap_or_default()
}
