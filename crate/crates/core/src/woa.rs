//! Whale optimization over medoid index space (WOA-kMedoids).
//!
//! Each whale is a k-vector of point indices. Every iteration the population
//! is scored by total nearest-medoid distance, the best feasible whale
//! becomes the prey, and every whale moves by one of three rules:
//!
//! * `p >= 0.5`: logarithmic spiral around the prey,
//!   `X' = |X* − X|·e^{bl}·cos(2πl) + X*`;
//! * `p < 0.5, |A| <= 1`: encircle the prey, `X' = X* − A·|C·X* − X|`;
//! * `p < 0.5, |A| > 1`: search relative to a random whale,
//!   `X' = X_r − A·|C·X_r − X|`;
//!
//! with `A = 2a·r − a`, `C = 2r`, and `a` falling linearly from 2 to 0. The
//! `|A|` test is made per dimension. The result is clamped to `[0, n−1]`,
//! rounded to the nearest integer, and colliding indices are redrawn
//! uniformly from the unused ones.
//!
//! Randomness comes from ChaCha8 substreams keyed by (seed, iteration,
//! whale), so a run is reproducible regardless of how the population
//! updates are scheduled across threads.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distance::{DistanceMatrix, Row};
use crate::error::{Error, Result};
use crate::eval::unique_medoids;
use crate::result::{assign_nearest, ClusteringResult};

/// Resampling attempts when an initial population has no feasible whale.
pub const MAX_INIT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct WoaParams {
    /// Number of whales, L.
    pub population: usize,
    /// Iterations, t_max.
    pub max_iterations: usize,
    pub k: usize,
    /// Smallest admissible cluster, counting the medoid itself.
    pub min_cluster_size: usize,
    /// Logarithmic spiral shape constant b.
    pub spiral_shape: f64,
    pub seed: u64,
}

impl WoaParams {
    /// Defaults: L = 50, t_max = 200, min cluster size 2, b = 1, seed 0.
    pub fn new(k: usize) -> Self {
        Self {
            population: 50,
            max_iterations: 200,
            k,
            min_cluster_size: 2,
            spiral_shape: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.population == 0 {
            return bad("population must be at least 1".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.k == 0 || self.k > n {
            return bad(format!("k must be in 1..={n}, got {}", self.k));
        }
        if self.min_cluster_size == 0 {
            return bad("min_cluster_size must be at least 1".into());
        }
        if self.k.saturating_mul(self.min_cluster_size) > n {
            return bad(format!(
                "k * min_cluster_size = {} exceeds the {n} points",
                self.k * self.min_cluster_size
            ));
        }
        if !(self.spiral_shape.is_finite() && self.spiral_shape > 0.0) {
            return bad(format!(
                "spiral shape must be > 0, got {}",
                self.spiral_shape
            ));
        }
        Ok(())
    }
}

/// Objective value of a medoid set. Infeasible sorts after every feasible value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fitness {
    Feasible(f64),
    /// Some cluster is smaller than the minimum size.
    Infeasible,
}

impl Fitness {
    pub fn value(&self) -> Option<f64> {
        match self {
            Fitness::Feasible(v) => Some(*v),
            Fitness::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Fitness::Feasible(_))
    }

    /// Strictly better than `other`.
    pub fn beats(&self, other: &Fitness) -> bool {
        match (self, other) {
            (Fitness::Feasible(a), Fitness::Feasible(b)) => a < b,
            (Fitness::Feasible(_), Fitness::Infeasible) => true,
            (Fitness::Infeasible, _) => false,
        }
    }
}

/// One whale: its position and the medoid set it encodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WhalePosition {
    /// Position in index space. After every move these are whole numbers
    /// equal to `medoids`.
    pub coords: Vec<f64>,
    pub medoids: Vec<usize>,
    pub fitness: Fitness,
}

impl WhalePosition {
    fn at(matrix: &DistanceMatrix, medoids: Vec<usize>, min_cluster_size: usize) -> Self {
        let fitness = evaluate(matrix, &medoids, min_cluster_size);
        Self {
            coords: medoids.iter().map(|&m| m as f64).collect(),
            medoids,
            fitness,
        }
    }
}

/// Per-iteration trace of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTelemetry {
    /// Best fitness found so far, as each iteration's update begins.
    pub best_fitness_per_iteration: Vec<f64>,
    /// Distinct points used as a medoid by any whale at that iteration.
    pub unique_medoids_per_iteration: Vec<usize>,
    pub global_best: WhalePosition,
    pub rng_seed: u64,
}

/// Total nearest-medoid distance of `medoids`, or infeasible when a cluster
/// has fewer than `min_cluster_size` members.
pub fn fitness(
    matrix: &DistanceMatrix,
    medoids: &[usize],
    min_cluster_size: usize,
) -> Result<Fitness> {
    let n = matrix.size();
    if medoids.is_empty() {
        return Err(Error::Contract("empty medoid set".into()));
    }
    let mut seen = vec![false; n];
    for &m in medoids {
        if m >= n {
            return Err(Error::Contract(format!("medoid {m} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::Contract(format!("duplicate medoid {m}")));
        }
    }
    Ok(evaluate(matrix, medoids, min_cluster_size))
}

fn evaluate(matrix: &DistanceMatrix, medoids: &[usize], min_cluster_size: usize) -> Fitness {
    let (cost, sizes) = match matrix.row(medoids[0]) {
        Row::F64(_) => {
            let rows: Vec<&[f64]> = medoids
                .iter()
                .map(|&m| match matrix.row(m) {
                    Row::F64(r) => r,
                    Row::F32(_) => unreachable!(),
                })
                .collect();
            scan_nearest(&rows, medoids)
        }
        Row::F32(_) => {
            let rows: Vec<&[f32]> = medoids
                .iter()
                .map(|&m| match matrix.row(m) {
                    Row::F32(r) => r,
                    Row::F64(_) => unreachable!(),
                })
                .collect();
            scan_nearest(&rows, medoids)
        }
    };
    if sizes.iter().any(|&s| s < min_cluster_size) {
        Fitness::Infeasible
    } else {
        Fitness::Feasible(cost)
    }
}

/// Θ(k·n): cost and cluster sizes under the nearest-medoid rule, ties to
/// the lowest position, medoids pinned to their own cluster.
fn scan_nearest<T: Copy + Into<f64>>(rows: &[&[T]], medoids: &[usize]) -> (f64, Vec<usize>) {
    let n = rows[0].len();
    let mut sizes = vec![0usize; rows.len()];
    let mut cost = 0.0;
    let nearest = |p: usize| {
        let mut best: f64 = rows[0][p].into();
        let mut at = 0;
        for (c, row) in rows.iter().enumerate().skip(1) {
            let d: f64 = row[p].into();
            if d < best {
                best = d;
                at = c;
            }
        }
        (best, at)
    };
    for p in 0..n {
        let (d, c) = nearest(p);
        cost += d;
        sizes[c] += 1;
    }
    for (c, &m) in medoids.iter().enumerate() {
        let (_, at) = nearest(m);
        if at != c {
            sizes[at] -= 1;
            sizes[c] += 1;
        }
    }
    (cost, sizes)
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const INIT_STREAM: u64 = 1 << 63;

fn update_stream(iteration: usize, whale: usize) -> u64 {
    ((iteration as u64 + 1) << 32) | whale as u64
}

fn init_stream(attempt: usize, whale: usize) -> u64 {
    INIT_STREAM | ((attempt as u64) << 32) | whale as u64
}

/// L whales, each at k distinct uniformly drawn points.
pub fn init_population(matrix: &DistanceMatrix, params: &WoaParams) -> Result<Vec<WhalePosition>> {
    params.validate(matrix.size())?;
    Ok(init_attempt(matrix, params, 0))
}

fn init_attempt(matrix: &DistanceMatrix, params: &WoaParams, attempt: usize) -> Vec<WhalePosition> {
    let n = matrix.size();
    (0..params.population)
        .into_par_iter()
        .map(|w| {
            let mut rng = substream(params.seed, init_stream(attempt, w));
            let medoids = rand::seq::index::sample(&mut rng, n, params.k).into_vec();
            WhalePosition::at(matrix, medoids, params.min_cluster_size)
        })
        .collect()
}

/// The random quantities consumed by one whale move.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveDraws {
    /// Chooses spiral (`>= 0.5`) or encircle/search.
    pub p: f64,
    /// Spiral parameter in [−1, 1].
    pub l: f64,
    /// Per-dimension coefficient source in [0, 1).
    pub r: Vec<f64>,
}

impl MoveDraws {
    pub fn sample(rng: &mut impl Rng, k: usize) -> Self {
        let p = rng.random::<f64>();
        let l = rng.random_range(-1.0..=1.0);
        let r = (0..k).map(|_| rng.random::<f64>()).collect();
        Self { p, l, r }
    }
}

/// Raw (continuous, unclamped) next position of a whale at `current`.
pub fn propose(
    current: &[f64],
    prey: &[f64],
    random_whale: &[f64],
    a: f64,
    spiral_shape: f64,
    draws: &MoveDraws,
) -> Vec<f64> {
    if draws.p >= 0.5 {
        let l = draws.l;
        let scale = (spiral_shape * l).exp() * (2.0 * std::f64::consts::PI * l).cos();
        return current
            .iter()
            .zip(prey)
            .map(|(x, star)| (star - x).abs() * scale + star)
            .collect();
    }
    current
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let r = draws.r[j];
            let coef_a = 2.0 * a * r - a;
            let coef_c = 2.0 * r;
            let anchor = if coef_a.abs() <= 1.0 {
                prey[j]
            } else {
                random_whale[j]
            };
            anchor - coef_a * (coef_c * anchor - x).abs()
        })
        .collect()
}

/// Clamp to `[0, n−1]`, round, and redraw duplicates from unused indices.
pub fn settle(raw: &[f64], n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let top = (n - 1) as f64;
    let mut used = vec![false; n];
    let mut medoids = Vec::with_capacity(raw.len());
    for (taken, &x) in raw.iter().enumerate() {
        // NaN cannot arise from finite inputs, but keep it in range anyway.
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, top) };
        let mut idx = x.round() as usize;
        if used[idx] {
            idx = draw_unused(&used, n - taken, rng);
        }
        used[idx] = true;
        medoids.push(idx);
    }
    medoids
}

fn draw_unused(used: &[bool], free: usize, rng: &mut impl Rng) -> usize {
    let n = used.len();
    if 2 * free >= n {
        loop {
            let c = rng.random_range(0..n);
            if !used[c] {
                return c;
            }
        }
    }
    let pick = rng.random_range(0..free);
    used.iter()
        .enumerate()
        .filter(|(_, u)| !**u)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("free count matches")
}

/// Move `whale` relative to `prey` (or `random_whale` when exploring), then
/// round, repair and score the new position.
pub fn update_whale(
    matrix: &DistanceMatrix,
    whale: &WhalePosition,
    prey: &WhalePosition,
    random_whale: &WhalePosition,
    a: f64,
    rng: &mut impl Rng,
    params: &WoaParams,
) -> WhalePosition {
    let draws = MoveDraws::sample(rng, whale.coords.len());
    let raw = propose(
        &whale.coords,
        &prey.coords,
        &random_whale.coords,
        a,
        params.spiral_shape,
        &draws,
    );
    let medoids = settle(&raw, matrix.size(), rng);
    WhalePosition::at(matrix, medoids, params.min_cluster_size)
}

/// Run WOA-kMedoids for `params.max_iterations` iterations.
pub fn run(
    matrix: &DistanceMatrix,
    params: &WoaParams,
) -> Result<(ClusteringResult, RunTelemetry)> {
    run_observed(matrix, params, |_, _| {})
}

/// As [`run`], calling `observer(t, population)` with the population scored
/// at each iteration `t`, and once more with the final population
/// (`t = max_iterations`).
pub fn run_observed(
    matrix: &DistanceMatrix,
    params: &WoaParams,
    mut observer: impl FnMut(usize, &[WhalePosition]),
) -> Result<(ClusteringResult, RunTelemetry)> {
    let start = Instant::now();
    params.validate(matrix.size())?;

    let mut population = (0..MAX_INIT_ATTEMPTS)
        .map(|attempt| init_attempt(matrix, params, attempt))
        .find(|pop| pop.iter().any(|w| w.fitness.is_feasible()))
        .ok_or(Error::Infeasible {
            attempts: MAX_INIT_ATTEMPTS,
            min_cluster_size: params.min_cluster_size,
        })?;

    let mut best = population[best_whale(&population).expect("feasible whale exists")].clone();
    let t_max = params.max_iterations;
    let mut best_trace = Vec::with_capacity(t_max);
    let mut diversity = Vec::with_capacity(t_max);

    for t in 0..t_max {
        let prey = match best_whale(&population) {
            Some(i) => {
                if population[i].fitness.beats(&best.fitness) {
                    best = population[i].clone();
                }
                population[i].clone()
            }
            None => best.clone(),
        };
        best_trace.push(best.fitness.value().expect("global best is feasible"));
        diversity.push(unique_medoids(
            population.iter().map(|w| w.medoids.as_slice()),
        ));
        observer(t, &population);

        let a = 2.0 - 2.0 * t as f64 / t_max as f64;
        let current = &population;
        population = (0..current.len())
            .into_par_iter()
            .map(|w| {
                let mut rng = substream(params.seed, update_stream(t, w));
                let partner = rng.random_range(0..current.len());
                update_whale(
                    matrix,
                    &current[w],
                    &prey,
                    &current[partner],
                    a,
                    &mut rng,
                    params,
                )
            })
            .collect();
    }
    observer(t_max, &population);
    if let Some(i) = best_whale(&population) {
        if population[i].fitness.beats(&best.fitness) {
            best = population[i].clone();
        }
    }

    let assignment = assign_nearest(matrix, &best.medoids);
    let result = ClusteringResult {
        medoids: best.medoids.clone(),
        assignment: assignment.labels,
        total_cost: assignment.cost,
        iterations: t_max,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let telemetry = RunTelemetry {
        best_fitness_per_iteration: best_trace,
        unique_medoids_per_iteration: diversity,
        global_best: best,
        rng_seed: params.seed,
    };
    Ok((result, telemetry))
}

/// Index of the best feasible whale, ties to the lowest index.
fn best_whale(population: &[WhalePosition]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, w) in population.iter().enumerate() {
        if !w.fitness.is_feasible() {
            continue;
        }
        match best {
            Some(b) if !w.fitness.beats(&population[b].fitness) => {}
            _ => best = Some(i),
        }
    }
    best
}
