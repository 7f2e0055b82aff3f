//! Truncated breadth-first exploration of the origin's open cluster and the
//! Monte Carlo estimators built on it.

use std::collections::VecDeque;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::lattice::{BoxLimits, Direction, Params, Vertex};
use crate::par::Exec;
use crate::randomness::{EdgeOracle, EdgeStates, Seed};
use crate::stats::binomial_std_error;

/// Outcome of one truncated exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterResult {
    /// Vertices found before the exploration stopped.
    pub size: usize,
    /// A truncation limit was hit (finite-volume proxy for an infinite cluster).
    pub survived: bool,
    /// The whole cluster was explored.
    pub frontier_exhausted: bool,
    pub edges_examined: u64,
}

/// Breadth-first exploration of the origin's cluster under `states`.
///
/// Vertices are dequeued FIFO and their edges scanned in canonical direction
/// order. An edge is only queried when its far endpoint is unvisited; since a
/// vertex is dequeued once and its near endpoint is already visited, no edge
/// is ever queried twice. Stops when the frontier empties, when the cluster
/// reaches `max_vertices`, or when a vertex at sup-norm `>= radius` is
/// dequeued.
pub fn explore_with<E: EdgeStates>(states: &E, limits: BoxLimits) -> ClusterResult {
    let d = states.dim();
    let origin = Vertex::origin(d);
    let mut visited: FxHashSet<Vertex> = FxHashSet::default();
    visited.insert(origin.clone());
    let mut queue = VecDeque::from([origin]);
    let mut examined = 0u64;

    let truncated = |size: usize, examined: u64| ClusterResult {
        size,
        survived: true,
        frontier_exhausted: false,
        edges_examined: examined,
    };

    if visited.len() >= limits.max_vertices {
        return truncated(1, 0);
    }
    while let Some(v) = queue.pop_front() {
        if v.sup_norm() >= limits.radius {
            return truncated(visited.len(), examined);
        }
        for dir in Direction::all(d) {
            let w = v.step(dir);
            if visited.contains(&w) {
                continue;
            }
            examined += 1;
            if states.open_at(&v, dir) {
                visited.insert(w.clone());
                queue.push_back(w);
                if visited.len() >= limits.max_vertices {
                    return truncated(visited.len(), examined);
                }
            }
        }
    }
    ClusterResult {
        size: visited.len(),
        survived: false,
        frontier_exhausted: true,
        edges_examined: examined,
    }
}

pub fn explore_cluster(params: &Params, seed: Seed, limits: BoxLimits) -> ClusterResult {
    explore_with(&EdgeOracle::new(params.clone(), seed), limits)
}

/// `P(|C_0| = 1) = prod_i (1 - p_i)^2`: all `2d` incident edges closed.
pub fn exact_singleton_probability(params: &Params) -> f64 {
    params.p().iter().map(|p| (1.0 - p) * (1.0 - p)).product()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEstimate {
    pub point_estimate: f64,
    pub survived: u64,
    pub trials: u64,
    pub std_error: f64,
    pub limits: BoxLimits,
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Fraction of explorations (seeds `(master, 0..trials)`) that hit a limit.
pub fn estimate_theta(
    params: &Params,
    trials: u64,
    limits: BoxLimits,
    seed_master: u64,
) -> Result<ThetaEstimate> {
    estimate_theta_with(Exec::default(), params, trials, limits, seed_master)
}

pub fn estimate_theta_with(
    exec: Exec,
    params: &Params,
    trials: u64,
    limits: BoxLimits,
    seed_master: u64,
) -> Result<ThetaEstimate> {
    require_trials(trials)?;
    let survived = exec.count_trials(trials, |t| {
        explore_cluster(params, Seed::new(seed_master, t), limits).survived
    });
    let point_estimate = survived as f64 / trials as f64;
    Ok(ThetaEstimate {
        point_estimate,
        survived,
        trials,
        std_error: binomial_std_error(point_estimate, trials),
        limits,
    })
}

/// Empirical law of `min(|C_0|, cutoff + 1)`; the last bucket is overflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizePmf {
    cutoff: usize,
    counts: Vec<u64>,
}

impl SizePmf {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        Ok(SizePmf { cutoff, counts: vec![0; cutoff + 1] })
    }

    /// Records one cluster size; anything above the cutoff lands in overflow.
    pub fn record(&mut self, size: usize) {
        debug_assert!(size >= 1);
        let bin = size.min(self.cutoff + 1) - 1;
        self.counts[bin] += 1;
    }

    pub fn merge(mut self, other: SizePmf) -> SizePmf {
        assert_eq!(self.cutoff, other.cutoff);
        self.counts.iter_mut().zip(other.counts).for_each(|(a, b)| *a += b);
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn trials(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts for sizes `1..=cutoff` followed by the overflow count.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, size: usize) -> u64 {
        self.counts[size - 1]
    }

    pub fn overflow(&self) -> u64 {
        self.counts[self.cutoff]
    }

    pub fn mass(&self, size: usize) -> f64 {
        self.count(size) as f64 / self.trials() as f64
    }

    pub fn overflow_mass(&self) -> f64 {
        self.overflow() as f64 / self.trials() as f64
    }

    pub fn masses(&self) -> Vec<f64> {
        let n = self.trials() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Limits under which exploration decides `min(|C_0|, cutoff + 1)` exactly.
pub fn pmf_limits(cutoff: usize) -> BoxLimits {
    // A cluster of at most cutoff + 1 vertices cannot reach sup-norm cutoff + 1.
    BoxLimits { max_vertices: cutoff + 1, radius: cutoff as i64 + 1 }
}

pub fn cluster_size_pmf(
    params: &Params,
    trials: u64,
    cutoff: usize,
    seed_master: u64,
) -> Result<SizePmf> {
    cluster_size_pmf_with(Exec::default(), params, trials, cutoff, seed_master)
}

pub fn cluster_size_pmf_with(
    exec: Exec,
    params: &Params,
    trials: u64,
    cutoff: usize,
    seed_master: u64,
) -> Result<SizePmf> {
    require_trials(trials)?;
    let empty = SizePmf::new(cutoff)?;
    let limits = pmf_limits(cutoff);
    Ok(exec.fold_trials(
        trials,
        || empty.clone(),
        |mut pmf, t| {
            pmf.record(explore_cluster(params, Seed::new(seed_master, t), limits).size);
            pmf
        },
        SizePmf::merge,
    ))
}

/// Whether the box `[0, L]^2` has an open left-right crossing (along axis 1)
/// in the configuration of `oracle`.
pub fn has_left_right_crossing(oracle: &EdgeOracle, l: usize) -> bool {
    let side = l + 1;
    let idx = |x: usize, y: usize| x * side + y;
    let mut seen = vec![false; side * side];
    let mut stack: Vec<(usize, usize)> = (0..side).map(|y| (0, y)).collect();
    for y in 0..side {
        seen[idx(0, y)] = true;
    }
    let mut base = [0i64; 2];
    while let Some((x, y)) = stack.pop() {
        if x == l {
            return true;
        }
        // (neighbour, axis, base of the canonical edge)
        let mut try_edge = |nx: usize, ny: usize, axis: usize, bx: usize, by: usize| {
            if seen[idx(nx, ny)] {
                return;
            }
            base[0] = bx as i64;
            base[1] = by as i64;
            if oracle.uniform_base(axis, &base) < oracle.params().axis_p(axis) {
                seen[idx(nx, ny)] = true;
                stack.push((nx, ny));
            }
        };
        if x < l {
            try_edge(x + 1, y, 0, x, y);
        }
        if x > 0 {
            try_edge(x - 1, y, 0, x - 1, y);
        }
        if y < l {
            try_edge(x, y + 1, 1, x, y);
        }
        if y > 0 {
            try_edge(x, y - 1, 1, x, y - 1);
        }
    }
    false
}

/// Fraction of trials with an open left-right crossing of `[0, L]^2`.
pub fn crossing_probability(params: &Params, l: usize, trials: u64, seed_master: u64) -> Result<f64> {
    crossing_probability_with(Exec::default(), params, l, trials, seed_master)
}

pub fn crossing_probability_with(
    exec: Exec,
    params: &Params,
    l: usize,
    trials: u64,
    seed_master: u64,
) -> Result<f64> {
    if params.d() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: params.d() });
    }
    if l < 2 {
        return Err(Error::InvalidArgument(format!("box size must be at least 2, got {l}")));
    }
    require_trials(trials)?;
    let hits = exec.count_trials(trials, |t| {
        has_left_right_crossing(&EdgeOracle::new(params.clone(), Seed::new(seed_master, t)), l)
    });
    Ok(hits as f64 / trials as f64)
}

/// Result of a bisection for the homogeneous critical point.
#[derive(Debug, Clone, PartialEq)]
pub struct PcEstimate {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    /// `(p, survival frequency)` at every evaluated midpoint, in order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Level of the survival frequency that the bisection locates.
pub const PC_LEVEL: f64 = 0.5;

/// Bisects `p` on `[0, 1)` for the point where the frequency of reaching
/// sup-norm radius `L` crosses [`PC_LEVEL`]. Every evaluation reuses the same
/// seeds, so the observable is exactly monotone in `p`.
pub fn estimate_pc_bisection(
    d: usize,
    l: i64,
    trials_per_point: u64,
    tolerance: f64,
    seed_master: u64,
) -> Result<PcEstimate> {
    estimate_pc_bisection_with(Exec::default(), d, l, trials_per_point, tolerance, seed_master)
}

pub fn estimate_pc_bisection_with(
    exec: Exec,
    d: usize,
    l: i64,
    trials_per_point: u64,
    tolerance: f64,
    seed_master: u64,
) -> Result<PcEstimate> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: d });
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let limits = BoxLimits::radius_only(l)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut evaluations = Vec::new();
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let params = Params::homogeneous(d, mid)?;
        let freq = estimate_theta_with(exec, &params, trials_per_point, limits, seed_master)?
            .point_estimate;
        evaluations.push((mid, freq));
        if freq > PC_LEVEL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(PcEstimate { estimate: 0.5 * (lo + hi), lo, hi, evaluations })
}
