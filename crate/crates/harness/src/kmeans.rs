//! Lloyd's k-means with seeded random-point initialization.

use crate::keypoints::Point;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MAX_ITERATIONS: usize = 100;

fn dist2(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn nearest(p: &Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        if dist2(p, centroid) < dist2(p, &centroids[best]) {
            best = c;
        }
    }
    best
}

/// One label in `0..k` per point. Stops at a label fixpoint or after
/// [`MAX_ITERATIONS`]; an emptied cluster is re-seeded at the point farthest
/// from its centroid.
pub fn kmeans(points: &[Point], k: usize, seed: u64) -> Result<Vec<usize>, String> {
    if k == 0 || k > points.len() {
        return Err(format!("cannot form {k} clusters from {} points", points.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Point> = sample(&mut rng, points.len(), k)
        .into_iter()
        .map(|i| points[i])
        .collect();
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![[0.0, 0.0]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&labels) {
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            }
        }
        while let Some(empty) = (0..k).find(|&c| counts[c] == 0) {
            let far = (0..points.len())
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| {
                    let da = dist2(&points[a], &centroids[labels[a]]);
                    let db = dist2(&points[b], &centroids[labels[b]]);
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .expect("k <= number of points");
            counts[labels[far]] -= 1;
            counts[empty] = 1;
            labels[far] = empty;
            centroids[empty] = points[far];
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(repair_empty(points, labels, k))
}

/// Makes sure every label is used once the loop has settled.
fn repair_empty(points: &[Point], mut labels: Vec<usize>, k: usize) -> Vec<usize> {
    loop {
        let mut counts = vec![0usize; k];
        for &c in &labels {
            counts[c] += 1;
        }
        let Some(empty) = (0..k).find(|&c| counts[c] == 0) else {
            return labels;
        };
        let donor = (0..points.len())
            .find(|&i| counts[labels[i]] > 1)
            .expect("k <= number of points");
        labels[donor] = empty;
    }
}
