use crate::error::{Error, Result};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_of(points: &[&[f64]], members: impl Iterator<Item = usize>) -> Vec<f64> {
    let mut acc = vec![0.0; points[0].len()];
    let mut n = 0usize;
    for i in members {
        for (a, v) in acc.iter_mut().zip(points[i]) {
            *a += v;
        }
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// Index of the first maximum (or minimum with `pick_min`) of `key` over `0..n`.
fn first_extreme(n: usize, pick_min: bool, key: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_key = key(0);
    for i in 1..n {
        let k = key(i);
        if (pick_min && k < best_key) || (!pick_min && k > best_key) {
            best = i;
            best_key = k;
        }
    }
    best
}

/// Lloyd's algorithm with `k = 2`.
///
/// Seeding is deterministic: the first center is the point nearest the mean,
/// the second the point farthest from the first. Assignment ties go to
/// cluster 0. If a cluster empties, the point farthest from its center is
/// moved into it, so neither returned cluster is ever empty.
pub fn two_means(points: &[&[f64]], max_iters: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Empty(format!(
            "2-means needs at least 2 points, got {n}"
        )));
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.len(),
        });
    }

    let mean = mean_of(points, 0..n);
    let first = first_extreme(n, true, |i| sq_dist(points[i], &mean));
    let second = first_extreme(n, false, |i| sq_dist(points[i], points[first]));
    let mut centers = [points[first].to_vec(), points[second].to_vec()];
    let mut assign: Vec<usize> = vec![usize::MAX; n];

    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c = usize::from(sq_dist(p, &centers[1]) < sq_dist(p, &centers[0]));
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
        }
        repair_empty(points, &centers, &mut assign);
        for (k, center) in centers.iter_mut().enumerate() {
            *center = mean_of(points, (0..n).filter(|&i| assign[i] == k));
        }
        if !changed {
            break;
        }
    }

    let a = (0..n).filter(|&i| assign[i] == 0).collect();
    let b = (0..n).filter(|&i| assign[i] == 1).collect();
    Ok((a, b))
}

fn repair_empty(points: &[&[f64]], centers: &[Vec<f64>; 2], assign: &mut [usize]) {
    for empty in 0..2 {
        if assign.iter().all(|&a| a != empty) {
            let full = 1 - empty;
            let far = first_extreme(assign.len(), false, |i| sq_dist(points[i], &centers[full]));
            assign[far] = empty;
        }
    }
}
