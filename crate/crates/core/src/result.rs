use crate::distance::DistanceMatrix;

/// Final output of a k-medoids run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Point index of each cluster's medoid; cluster `c` is `medoids[c]`.
    pub medoids: Vec<usize>,
    /// Cluster of every point, in `0..k`.
    pub assignment: Vec<usize>,
    /// Sum over points of the distance to their medoid.
    pub total_cost: f64,
    /// Accepted swaps (PAM) or iterations (WOA).
    pub iterations: usize,
    /// Clustering time only; distance-matrix construction is excluded.
    pub wall_time_seconds: f64,
}

/// Nearest-medoid assignment of every point with per-cluster sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    pub cost: f64,
}

/// Assign every point to its nearest medoid.
///
/// Ties go to the lowest position in `medoids`, except that a medoid is
/// always assigned to its own cluster (duplicate points may sit at distance
/// zero from several medoids).
pub fn assign_nearest(matrix: &DistanceMatrix, medoids: &[usize]) -> Assignment {
    let n = matrix.size();
    let mut best = vec![f64::INFINITY; n];
    let mut labels = vec![0usize; n];
    // Medoid rows are contiguous; streaming them keeps this cache friendly.
    for (c, &m) in medoids.iter().enumerate() {
        let row = matrix.row(m);
        for p in 0..n {
            let d = row.get(p);
            if d < best[p] {
                best[p] = d;
                labels[p] = c;
            }
        }
    }
    for (c, &m) in medoids.iter().enumerate() {
        labels[m] = c;
        best[m] = 0.0;
    }
    let mut sizes = vec![0usize; medoids.len()];
    for &l in &labels {
        sizes[l] += 1;
    }
    Assignment {
        labels,
        sizes,
        cost: best.iter().sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(points.len(), |i, j| (points[i] - points[j]).powi(2))
    }

    #[test]
    fn ties_go_to_first_medoid() {
        // point 1 is equidistant from medoids 0 and 2
        let m = line(&[0.0, 1.0, 2.0]);
        let a = assign_nearest(&m, &[2, 0]);
        assert_eq!(a.labels, vec![1, 0, 0]);
        assert_eq!(a.sizes, vec![2, 1]);
        assert_eq!(a.cost, 1.0);
    }

    #[test]
    fn duplicate_medoids_keep_their_own_cluster() {
        let m = line(&[5.0, 5.0, 5.0]);
        let a = assign_nearest(&m, &[0, 1, 2]);
        assert_eq!(a.labels, vec![0, 1, 2]);
        assert_eq!(a.cost, 0.0);
    }
}
