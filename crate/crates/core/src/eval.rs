//! Clustering quality and efficiency metrics.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Pair counts behind a Rand Index.
///
/// * `a`: same cluster in both labelings
/// * `b`: different clusters in both
/// * `c`: same predicted cluster, different true class
/// * `d`: different predicted cluster, same true class
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandBreakdown {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub ri: f64,
}

impl RandBreakdown {
    fn from_counts(a: u64, b: u64, c: u64, d: u64) -> Self {
        let total = a + b + c + d;
        Self {
            a,
            b,
            c,
            d,
            ri: (a + b) as f64 / total as f64,
        }
    }

    pub fn pairs(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// Above this many points the contingency-table route is used.
pub const PAIRWISE_LIMIT: usize = 2000;

/// Rand Index of `predicted` against `truth`.
pub fn rand_index(predicted: &[usize], truth: &[usize]) -> Result<RandBreakdown> {
    check_lengths(predicted, truth)?;
    if predicted.len() <= PAIRWISE_LIMIT {
        Ok(pairwise(predicted, truth))
    } else {
        Ok(contingency(predicted, truth))
    }
}

/// Rand Index by enumerating all n(n−1)/2 pairs.
pub fn rand_index_pairwise(predicted: &[usize], truth: &[usize]) -> Result<RandBreakdown> {
    check_lengths(predicted, truth)?;
    Ok(pairwise(predicted, truth))
}

/// Rand Index from the contingency table, O(n + C²).
pub fn rand_index_contingency(predicted: &[usize], truth: &[usize]) -> Result<RandBreakdown> {
    check_lengths(predicted, truth)?;
    Ok(contingency(predicted, truth))
}

fn check_lengths(predicted: &[usize], truth: &[usize]) -> Result<()> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predicted labels vs {} true labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.len() < 2 {
        return Err(Error::Shape("rand index needs at least 2 points".into()));
    }
    Ok(())
}

fn pairwise(predicted: &[usize], truth: &[usize]) -> RandBreakdown {
    let (mut a, mut b, mut c, mut d) = (0u64, 0u64, 0u64, 0u64);
    let n = predicted.len();
    for i in 0..n {
        for j in i + 1..n {
            match (predicted[i] == predicted[j], truth[i] == truth[j]) {
                (true, true) => a += 1,
                (false, false) => b += 1,
                (true, false) => c += 1,
                (false, true) => d += 1,
            }
        }
    }
    RandBreakdown::from_counts(a, b, c, d)
}

fn pairs_in(count: u64) -> u64 {
    count * count.saturating_sub(1) / 2
}

fn contingency(predicted: &[usize], truth: &[usize]) -> RandBreakdown {
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        *cells.entry((p, t)).or_default() += 1;
        *rows.entry(p).or_default() += 1;
        *cols.entry(t).or_default() += 1;
    }
    let a: u64 = cells.values().map(|&v| pairs_in(v)).sum();
    let same_predicted: u64 = rows.values().map(|&v| pairs_in(v)).sum();
    let same_truth: u64 = cols.values().map(|&v| pairs_in(v)).sum();
    let total = pairs_in(predicted.len() as u64);
    let c = same_predicted - a;
    let d = same_truth - a;
    RandBreakdown::from_counts(a, total - a - c - d, c, d)
}

/// Number of distinct points used as a medoid by any set.
pub fn unique_medoids<'a>(sets: impl IntoIterator<Item = &'a [usize]>) -> usize {
    let mut seen: Vec<usize> = sets.into_iter().flatten().copied().collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// `baseline / candidate`: how many times faster the candidate ran.
pub fn speedup(baseline_seconds: f64, candidate_seconds: f64) -> Result<f64> {
    if !(baseline_seconds > 0.0 && candidate_seconds > 0.0) {
        return Err(Error::Parameter(format!(
            "times must be positive, got {baseline_seconds} and {candidate_seconds}"
        )));
    }
    Ok(baseline_seconds / candidate_seconds)
}

/// First iteration whose improvement over the start reaches `fraction` of
/// the total improvement. Returns 0 for a flat trace.
pub fn improvement_iteration(trace: &[f64], fraction: f64) -> Option<usize> {
    let (&first, &last) = (trace.first()?, trace.last()?);
    let total = first - last;
    if total <= 0.0 {
        return Some(0);
    }
    trace.iter().position(|&f| first - f >= fraction * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions() {
        let r = rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.ri, 1.0);
        assert_eq!((r.a, r.b, r.c, r.d), (2, 4, 0, 0));
        // relabeled
        assert_eq!(rand_index(&[5, 5, 2, 2], &[0, 0, 1, 1]).unwrap().ri, 1.0);
    }

    #[test]
    fn three_point_example() {
        // pairs (0,1): d, (0,2): b, (1,2): c
        let r = rand_index(&[0, 1, 1], &[0, 0, 1]).unwrap();
        assert_eq!((r.a, r.b, r.c, r.d), (0, 1, 1, 1));
        assert_eq!(r.ri, 1.0 / 3.0);
        assert_eq!(rand_index_contingency(&[0, 1, 1], &[0, 0, 1]).unwrap(), r);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(rand_index(&[0, 1], &[0]), Err(Error::Shape(_))));
        assert!(matches!(rand_index(&[0], &[0]), Err(Error::Shape(_))));
    }

    #[test]
    fn large_inputs_use_contingency() {
        let n = PAIRWISE_LIMIT + 50;
        let p: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let t: Vec<usize> = (0..n).map(|i| (i / 7) % 4).collect();
        let fast = rand_index(&p, &t).unwrap();
        assert_eq!(fast, rand_index_pairwise(&p, &t).unwrap());
        assert_eq!(fast.pairs(), (n * (n - 1) / 2) as u64);
    }

    #[test]
    fn diversity_counts() {
        let same = vec![vec![1, 2, 3]; 4];
        assert_eq!(unique_medoids(same.iter().map(Vec::as_slice)), 3);
        let disjoint: Vec<Vec<usize>> = (0..4).map(|w| vec![2 * w, 2 * w + 1]).collect();
        assert_eq!(unique_medoids(disjoint.iter().map(Vec::as_slice)), 8);
        let sets = [vec![1, 2], vec![2, 3], vec![3, 4]];
        assert_eq!(unique_medoids(sets.iter().map(Vec::as_slice)), 4);
    }

    #[test]
    fn speedups() {
        assert_eq!(speedup(10.0, 10.0).unwrap(), 1.0);
        assert_eq!(speedup(2.29, 1.0).unwrap(), 2.29);
        assert_eq!(speedup(3.0, 1.5).unwrap(), 2.0);
        assert!(speedup(0.0, 1.0).is_err());
        assert!(speedup(1.0, -1.0).is_err());
    }

    #[test]
    fn ninety_percent_iteration() {
        let trace = [100.0, 50.0, 20.0, 12.0, 10.0, 10.0];
        assert_eq!(improvement_iteration(&trace, 0.9), Some(3));
        assert_eq!(improvement_iteration(&[5.0, 5.0], 0.9), Some(0));
        assert_eq!(improvement_iteration(&[], 0.9), None);
    }
}
