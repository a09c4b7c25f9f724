//! Partitioning Around Medoids: greedy BUILD initialization followed by
//! best-improvement SWAP refinement over a precomputed distance matrix.
//!
//! Each SWAP pass scores every (medoid, non-medoid) exchange in O(n) using
//! the cached nearest and second-nearest medoid distance of every point, for
//! O(k·(n−k)·n) work per pass. Candidates are scored in parallel; the winner
//! is picked by a total order on (delta, medoid position, candidate), so the
//! result does not depend on the thread count.

use std::time::Instant;

use rayon::prelude::*;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::result::{assign_nearest, ClusteringResult};

/// Greedy BUILD: the first medoid minimizes the summed distance to all
/// points; every further medoid is the point whose addition minimizes the
/// total nearest-medoid cost. Ties go to the lower index.
pub fn pam_build(matrix: &DistanceMatrix, k: usize) -> Result<Vec<usize>> {
    let n = matrix.size();
    check_k(n, k)?;

    let mut nearest = vec![f64::INFINITY; n];
    let mut is_medoid = vec![false; n];
    let mut medoids = Vec::with_capacity(k);

    for _ in 0..k {
        let best = (0..n)
            .into_par_iter()
            .filter(|&c| !is_medoid[c])
            .map(|c| {
                let row = matrix.row(c);
                let cost: f64 = (0..n).map(|j| nearest[j].min(row.get(j))).sum();
                (cost, c)
            })
            .reduce_with(min_by_cost)
            .expect("k <= n leaves a candidate");
        let c = best.1;
        medoids.push(c);
        is_medoid[c] = true;
        let row = matrix.row(c);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(row.get(j));
        }
    }
    Ok(medoids)
}

fn min_by_cost(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Best-improvement SWAP from the given medoids until no exchange lowers the
/// total cost.
pub fn pam_swap(matrix: &DistanceMatrix, medoids: &[usize]) -> Result<ClusteringResult> {
    pam_swap_traced(matrix, medoids).map(|(r, _)| r)
}

/// As [`pam_swap`], also returning the total cost before the first and after
/// every accepted swap.
pub fn pam_swap_traced(
    matrix: &DistanceMatrix,
    medoids: &[usize],
) -> Result<(ClusteringResult, Vec<f64>)> {
    let start = Instant::now();
    let n = matrix.size();
    check_k(n, medoids.len())?;
    check_distinct(n, medoids)?;

    let mut medoids = medoids.to_vec();
    let mut cache = NearestCache::new(matrix, &medoids);
    let mut costs = vec![cache.cost()];
    let mut swaps = 0;

    loop {
        let mut is_medoid = vec![false; n];
        for &m in &medoids {
            is_medoid[m] = true;
        }
        let best = (0..n)
            .into_par_iter()
            .filter(|&h| !is_medoid[h])
            .flat_map_iter(|h| {
                let cache = &cache;
                (0..medoids.len()).map(move |i| (cache.swap_delta(matrix, i, h), i, h))
            })
            .reduce_with(|a, b| if candidate_order(&b, &a) { b } else { a });

        let Some((delta, pos, h)) = best else { break };
        let current = *costs.last().unwrap();
        if delta >= -SWAP_TOLERANCE * current.abs().max(1.0) {
            break;
        }
        let old = medoids[pos];
        medoids[pos] = h;
        let next = NearestCache::new(matrix, &medoids);
        if next.cost() >= current {
            medoids[pos] = old;
            break;
        }
        cache = next;
        costs.push(cache.cost());
        swaps += 1;
    }

    let assignment = assign_nearest(matrix, &medoids);
    let result = ClusteringResult {
        total_cost: assignment.cost,
        medoids,
        assignment: assignment.labels,
        iterations: swaps,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((result, costs))
}

/// Relative improvement below which a swap is treated as float noise.
const SWAP_TOLERANCE: f64 = 1e-12;

/// True when candidate `a` beats `b`.
fn candidate_order(a: &(f64, usize, usize), b: &(f64, usize, usize)) -> bool {
    (a.0, a.1, a.2) < (b.0, b.1, b.2)
}

/// BUILD followed by SWAP. `wall_time_seconds` covers both phases.
pub fn pam(matrix: &DistanceMatrix, k: usize) -> Result<ClusteringResult> {
    let start = Instant::now();
    let initial = pam_build(matrix, k)?;
    let mut result = pam_swap(matrix, &initial)?;
    result.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Distance of every point to its nearest and second-nearest medoid.
struct NearestCache {
    nearest_pos: Vec<usize>,
    nearest: Vec<f64>,
    second: Vec<f64>,
}

impl NearestCache {
    fn new(matrix: &DistanceMatrix, medoids: &[usize]) -> Self {
        let n = matrix.size();
        let mut nearest_pos = vec![0; n];
        let mut nearest = vec![f64::INFINITY; n];
        let mut second = vec![f64::INFINITY; n];
        for (c, &m) in medoids.iter().enumerate() {
            let row = matrix.row(m);
            for j in 0..n {
                let d = row.get(j);
                if d < nearest[j] {
                    second[j] = nearest[j];
                    nearest[j] = d;
                    nearest_pos[j] = c;
                } else if d < second[j] {
                    second[j] = d;
                }
            }
        }
        Self {
            nearest_pos,
            nearest,
            second,
        }
    }

    fn cost(&self) -> f64 {
        self.nearest.iter().sum()
    }

    /// Cost change from replacing the medoid at position `pos` with point `h`.
    fn swap_delta(&self, matrix: &DistanceMatrix, pos: usize, h: usize) -> f64 {
        let row = matrix.row(h);
        let mut delta = 0.0;
        for j in 0..self.nearest.len() {
            let d = row.get(j);
            let current = self.nearest[j];
            let replaced = if self.nearest_pos[j] == pos {
                d.min(self.second[j])
            } else {
                d.min(current)
            };
            delta += replaced - current;
        }
        delta
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k must be in 1..={n}, got {k}")));
    }
    Ok(())
}

fn check_distinct(n: usize, medoids: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &m in medoids {
        if m >= n {
            return Err(Error::Parameter(format!("medoid {m} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::Parameter(format!("medoid {m} listed twice")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    #[test]
    fn build_picks_the_central_point() {
        // Totals: 11, 10, 19.
        let m = line(&[0.0, 1.0, 10.0]);
        assert_eq!(pam_build(&m, 1).unwrap(), vec![1]);
    }

    #[test]
    fn k_equal_n_takes_everything() {
        let m = line(&[0.0, 1.0, 10.0, 4.0]);
        let mut meds = pam_build(&m, 4).unwrap();
        meds.sort();
        assert_eq!(meds, vec![0, 1, 2, 3]);
        assert_eq!(pam(&m, 4).unwrap().total_cost, 0.0);
    }

    #[test]
    fn k_out_of_range() {
        let m = line(&[0.0, 1.0]);
        assert!(matches!(pam_build(&m, 3), Err(Error::Parameter(_))));
        assert!(matches!(pam_build(&m, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn swap_moves_to_group_centres() {
        let m = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let r = pam_swap(&m, &[0, 3]).unwrap();
        let mut meds = r.medoids.clone();
        meds.sort();
        assert_eq!(meds, vec![1, 4]);
        assert_eq!(r.total_cost, 4.0);
        assert_eq!(r.assignment[0], r.assignment[2]);
        assert_ne!(r.assignment[0], r.assignment[5]);
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let m = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let (r, costs) = pam_swap_traced(&m, &[1, 4]).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(costs, vec![4.0]);
        assert_eq!(r.medoids, vec![1, 4]);
    }

    #[test]
    fn swap_rejects_bad_medoids() {
        let m = line(&[0.0, 1.0, 2.0]);
        assert!(pam_swap(&m, &[0, 0]).is_err());
        assert!(pam_swap(&m, &[0, 7]).is_err());
    }

    #[test]
    fn duplicated_points_do_not_loop() {
        let m = line(&[1.0, 1.0, 1.0, 5.0, 5.0, 5.0]);
        let r = pam(&m, 2).unwrap();
        assert_eq!(r.total_cost, 0.0);
        assert_eq!(r.assignment, vec![0, 0, 0, 1, 1, 1]);
    }
}
