//! Susceptible-infected coupling between `Z^d` and `Z^{d+1}`.
//!
//! An infection grows on `Z^d` from the origin. Every infected vertex `v`
//! carries an image `x(v)` in `Z^{d+1}`, and whether `v` infects a neighbour
//! `v + u` is decided by edges of a percolation configuration on `Z^{d+1}`
//! leaving `x(v)`:
//!
//! * `u = ±e_i`, `i < d`: the edge `<x(v), x(v) ± e_i>`.
//! * `u = ±e_d`: first `<x(v), x(v) ± e_d>`; if closed, a second chance on
//!   `<x(v), x(v) ± e_{d+1}>` with the same sign.
//!
//! The infected set then has the law of the origin's cluster on `Z^d` with
//! the last two probabilities merged, `1 - (1 - p_d)(1 - p_{d+1})`, while
//! `x` maps it injectively into the origin's open cluster on `Z^{d+1}`.
//!
//! Available edges are taken FIFO by infection time of their infected
//! endpoint, then by direction (axis ascending, `+` before `-`), which makes
//! the infection a breadth-first search like [`crate::explore`].

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{self, Write};

use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::explore::{pmf_limits, SizePmf};
use crate::lattice::{canonical_edge, BoxLimits, Direction, EdgeId, Params, Vertex};
use crate::par::Exec;
use crate::partition::Partition;
use crate::randomness::{EdgeOracle, EdgeStates, Seed};

/// `1 - (1 - p_a)(1 - p_b)`: one edge standing in for two parallel chances.
pub fn merged_param(p_a: f64, p_b: f64) -> Result<f64> {
    for (index, value) in [(1, p_a), (2, p_b)] {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange { index, value });
        }
    }
    // (1-a)(1-b) = 1 - a - b + ab, written to keep precision for small inputs
    Ok(p_a + p_b - p_a * p_b)
}

/// Merges each block of `partition` into one direction:
/// `p~_j = 1 - prod_{i in D_j} (1 - p_i)`.
pub fn reduce_params(params: &Params, partition: &Partition) -> Result<Params> {
    if partition.d() != params.d() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} directions, params have {}",
            partition.d(),
            params.d()
        )));
    }
    let p = params.p();
    let reduced = partition
        .blocks()
        .iter()
        .map(|block| {
            let closed: f64 = block.iter().map(|&i| 1.0 - p[i]).product();
            1.0 - closed
        })
        .collect();
    Params::new(reduced)
}

/// `(p_1, .., p_{d-1}, merged_param(p_d, p_{d+1}))`.
pub fn merge_last_two(params_high: &Params) -> Result<Params> {
    let p = params_high.p();
    let n = p.len();
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: n });
    }
    let mut out = p[..n - 2].to_vec();
    out.push(merged_param(p[n - 2], p[n - 1])?);
    Params::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    FrontierEmpty,
    Truncation,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::FrontierEmpty => "frontier_empty",
            Termination::Truncation => "truncation",
        }
    }
}

/// One examined edge of `Z^{d+1}` and its recorded state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub edge: EdgeId,
    pub open: bool,
}

/// One exploration step: the edge `<v, v + dir>` of `Z^d` with `v` the
/// `source`-th infected vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub source: usize,
    pub dir: Direction,
    pub queries: SmallVec<[Query; 2]>,
    pub infected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTrace {
    /// Dimension of the infected lattice; images live in `d + 1`.
    pub d: usize,
    /// Infected vertices in infection order; `infected[0]` is the origin.
    pub infected: Vec<Vertex>,
    /// `images[k] = x(infected[k])`.
    pub images: Vec<Vertex>,
    pub steps: Vec<StepRecord>,
    pub terminated_by: Termination,
}

impl CouplingTrace {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn xmap(&self) -> impl Iterator<Item = (&Vertex, &Vertex)> {
        self.infected.iter().zip(self.images.iter())
    }

    /// Edges of `Z^d` explored, in exploration order.
    pub fn explored(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.steps.iter().map(|s| canonical_edge(&self.infected[s.source], s.dir))
    }

    pub fn queried(&self) -> impl Iterator<Item = &Query> {
        self.steps.iter().flat_map(|s| s.queries.iter())
    }

    /// `(expected, actual)` number of `Z^{d+1}` queries: one per explored
    /// edge plus one per closed first chance along axis `d`.
    pub fn query_accounting(&self) -> (usize, usize) {
        let last = self.d - 1;
        let second_chances = self
            .steps
            .iter()
            .filter(|s| s.dir.axis == last && s.queries.first().is_some_and(|q| !q.open))
            .count();
        (self.steps.len() + second_chances, self.queried().count())
    }
}

/// Runs the coupling for `params_high = (p_1, .., p_{d+1})` on the
/// configuration with seed `seed`, truncating the infected set by `limits`.
pub fn run_coupled_exploration(
    params_high: &Params,
    seed: Seed,
    limits: BoxLimits,
) -> Result<CouplingTrace> {
    let high = params_high.d();
    if high < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: high });
    }
    let oracle = EdgeOracle::new(params_high.clone(), seed);
    Ok(run_coupled_with(&oracle, limits))
}

/// As [`run_coupled_exploration`] over arbitrary edge states of dimension `>= 2`.
pub fn run_coupled_with<E: EdgeStates>(states: &E, limits: BoxLimits) -> CouplingTrace {
    let d = states.dim() - 1;
    let last = d - 1;
    let mut trace = CouplingTrace {
        d,
        infected: vec![Vertex::origin(d)],
        images: vec![Vertex::origin(d + 1)],
        steps: Vec::new(),
        terminated_by: Termination::FrontierEmpty,
    };
    let mut index: FxHashMap<Vertex, usize> = FxHashMap::default();
    index.insert(Vertex::origin(d), 0);
    let mut queue = VecDeque::from([0usize]);

    if trace.infected.len() >= limits.max_vertices {
        trace.terminated_by = Termination::Truncation;
        return trace;
    }
    'grow: while let Some(src) = queue.pop_front() {
        let v = trace.infected[src].clone();
        if v.sup_norm() >= limits.radius {
            trace.terminated_by = Termination::Truncation;
            break;
        }
        for dir in Direction::all(d) {
            let w = v.step(dir);
            if index.contains_key(&w) {
                continue;
            }
            let x = &trace.images[src];
            let mut queries = SmallVec::new();
            let first = dir; // the same unit vector embedded in Z^{d+1}
            let mut target = None;
            let open = states.open_at(x, first);
            queries.push(Query { edge: canonical_edge(x, first), open });
            if open {
                target = Some(x.step(first));
            } else if dir.axis == last {
                let second = Direction { axis: d, sign: dir.sign };
                let open = states.open_at(x, second);
                queries.push(Query { edge: canonical_edge(x, second), open });
                if open {
                    target = Some(x.step(second));
                }
            }
            trace.steps.push(StepRecord { source: src, dir, queries, infected: target.is_some() });
            if let Some(image) = target {
                let k = trace.infected.len();
                index.insert(w.clone(), k);
                trace.infected.push(w);
                trace.images.push(image);
                queue.push_back(k);
                if trace.infected.len() >= limits.max_vertices {
                    trace.terminated_by = Termination::Truncation;
                    break 'grow;
                }
            }
        }
    }
    trace
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub injective: bool,
    pub coords_match: bool,
    pub image_open: bool,
    pub no_requery: bool,
    pub infected_count: usize,
    /// Vertices of `Z^{d+1}` connected to the origin through recorded-open edges.
    pub certified_cluster: usize,
    pub violations: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.injective && self.coords_match && self.image_open && self.no_requery
    }

    /// `|infected| = |image(x)|` and every image certified in the open cluster.
    pub fn dominated(&self) -> bool {
        self.injective && self.image_open && self.infected_count <= self.certified_cluster
    }
}

/// Re-checks a trace against the configuration it claims to come from.
pub fn verify_trace(trace: &CouplingTrace, params_high: &Params, seed: Seed) -> VerificationReport {
    let d = trace.d;
    let mut violations = Vec::new();

    let mut coords_match = trace.infected.len() == trace.images.len()
        && trace.infected.first().is_some_and(Vertex::is_origin)
        && trace.images.first().is_some_and(Vertex::is_origin);
    if !coords_match {
        violations.push("origin is not infected first or is not mapped to the origin".into());
    }
    if params_high.d() != d + 1 {
        coords_match = false;
        violations.push(format!(
            "trace has d = {d} but parameters have {} directions",
            params_high.d()
        ));
    }
    for (w, x) in trace.xmap() {
        let ok = w.dim() == d && x.dim() == d + 1 && {
            let (wc, xc) = (w.coords(), x.coords());
            wc[..d - 1] == xc[..d - 1] && xc[d - 1] + xc[d] == wc[d - 1]
        };
        if !ok {
            coords_match = false;
            violations.push(format!("x({w}) = {x} breaks the coordinate identities"));
        }
    }

    let mut injective = true;
    let mut seen: FxHashMap<&Vertex, &Vertex> = FxHashMap::default();
    for (w, x) in trace.xmap() {
        if let Some(prev) = seen.insert(x, w) {
            injective = false;
            violations.push(format!("x({prev}) = x({w}) = {x}"));
        }
    }

    let mut no_requery = true;
    let mut queried: FxHashSet<&EdgeId> = FxHashSet::default();
    for q in trace.queried() {
        if !queried.insert(&q.edge) {
            no_requery = false;
            violations.push(format!("edge {} of Z^{} queried twice", q.edge, d + 1));
        }
    }

    // open edges certified twice: recorded open and open in the configuration
    let mut image_open = true;
    let mut certified: FxHashSet<EdgeId> = FxHashSet::default();
    if params_high.d() == d + 1 {
        let oracle = EdgeOracle::new(params_high.clone(), seed);
        for q in trace.queried() {
            let actual = q.edge.base.dim() == d + 1 && q.edge.axis <= d && oracle.is_open(&q.edge);
            if actual != q.open {
                image_open = false;
                violations.push(format!(
                    "edge {} recorded {} but is {} in the configuration",
                    q.edge,
                    if q.open { "open" } else { "closed" },
                    if actual { "open" } else { "closed" }
                ));
            }
            if q.open && actual {
                certified.insert(q.edge.clone());
            }
        }
    }
    let origin = Vertex::origin(d + 1);
    let mut reached: FxHashSet<Vertex> = FxHashSet::default();
    reached.insert(origin.clone());
    let mut stack = vec![origin];
    while let Some(y) = stack.pop() {
        for dir in Direction::all(d + 1) {
            if certified.contains(&canonical_edge(&y, dir)) {
                let z = y.step(dir);
                if reached.insert(z.clone()) {
                    stack.push(z);
                }
            }
        }
    }
    for (w, x) in trace.xmap() {
        if !reached.contains(x) {
            image_open = false;
            violations.push(format!(
                "x({w}) = {x} is not connected to the origin through open edges"
            ));
        }
    }

    VerificationReport {
        injective,
        coords_match,
        image_open,
        no_requery,
        infected_count: trace.infected.len(),
        certified_cluster: reached.len(),
        violations,
    }
}

/// Empirical law of `min(|infected|, cutoff + 1)` over seeds `(master, 0..trials)`.
pub fn coupled_size_pmf(
    params_high: &Params,
    trials: u64,
    cutoff: usize,
    seed_master: u64,
) -> Result<SizePmf> {
    coupled_size_pmf_with(Exec::default(), params_high, trials, cutoff, seed_master)
}

pub fn coupled_size_pmf_with(
    exec: Exec,
    params_high: &Params,
    trials: u64,
    cutoff: usize,
    seed_master: u64,
) -> Result<SizePmf> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if params_high.d() < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: params_high.d() });
    }
    let empty = SizePmf::new(cutoff)?;
    let limits = pmf_limits(cutoff);
    Ok(exec.fold_trials(
        trials,
        || empty.clone(),
        |mut pmf, t| {
            let oracle = EdgeOracle::new(params_high.clone(), Seed::new(seed_master, t));
            pmf.record(run_coupled_with(&oracle, limits).infected.len());
            pmf
        },
        SizePmf::merge,
    ))
}

/// Writes a trace in the line-oriented dump format:
///
/// ```text
/// # percaniso coupling trace v1
/// # params = p_1,..,p_{d+1}
/// # seed = <master>:<trial>
/// # limits = <max_vertices>:<radius>
/// # step  explored  queries  result  assignment
/// 0	(0,0)+e1	(0,0,0)+e1:open	infected	(1,0)->(1,0,0)
/// ...
/// # end steps=<n> infected=<k> terminated_by=<frontier_empty|truncation>
/// ```
///
/// Fields are tab-separated. `explored` is the infected endpoint followed by
/// the direction taken; each query is a canonical `Z^{d+1}` edge
/// `base+e_k` with its state, `;`-separated.
pub fn write_trace<W: Write>(
    out: &mut W,
    trace: &CouplingTrace,
    params_high: &Params,
    seed: Seed,
    limits: BoxLimits,
) -> io::Result<()> {
    writeln!(out, "# percaniso coupling trace v1")?;
    writeln!(out, "# params = {params_high}")?;
    writeln!(out, "# seed = {}:{}", seed.master, seed.trial)?;
    writeln!(out, "# limits = {}:{}", limits.max_vertices, limits.radius)?;
    writeln!(out, "# step\texplored\tqueries\tresult\tassignment")?;
    let mut next_infected = 1;
    let mut line = String::new();
    for (n, s) in trace.steps.iter().enumerate() {
        line.clear();
        let v = &trace.infected[s.source];
        let _ = write!(line, "{n}\t{v}{}\t", s.dir);
        for (k, q) in s.queries.iter().enumerate() {
            if k > 0 {
                line.push(';');
            }
            let _ = write!(line, "{}:{}", q.edge, if q.open { "open" } else { "closed" });
        }
        if s.infected {
            let k = next_infected;
            next_infected += 1;
            let _ = write!(line, "\tinfected\t{}->{}", trace.infected[k], trace.images[k]);
        } else {
            line.push_str("\tclosed\t-");
        }
        writeln!(out, "{line}")?;
    }
    writeln!(
        out,
        "# end steps={} infected={} terminated_by={}",
        trace.steps.len(),
        trace.infected.len(),
        trace.terminated_by.as_str()
    )
}

/// Replay information recovered from a dump header.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub params_high: Params,
    pub seed: Seed,
    pub limits: BoxLimits,
}

/// Parses the first trace header in `text`.
pub fn parse_trace_header(text: &str) -> Result<TraceHeader> {
    let bad = |what: &str| Error::InvalidArgument(format!("trace header: {what}"));
    let mut params = None;
    let mut seed = None;
    let mut limits = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let Some((key, value)) = line.trim_start_matches('#').split_once('=') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "params" => {
                let p = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| bad("bad probability")))
                    .collect::<Result<Vec<_>>>()?;
                params = Some(Params::new(p)?);
            }
            "seed" => {
                let (m, t) = value.split_once(':').ok_or_else(|| bad("bad seed"))?;
                seed = Some(Seed::new(
                    m.parse().map_err(|_| bad("bad master seed"))?,
                    t.parse().map_err(|_| bad("bad trial"))?,
                ));
            }
            "limits" => {
                let (m, r) = value.split_once(':').ok_or_else(|| bad("bad limits"))?;
                limits = Some(BoxLimits::new(
                    m.parse().map_err(|_| bad("bad max_vertices"))?,
                    r.parse().map_err(|_| bad("bad radius"))?,
                )?);
            }
            _ => {}
        }
    }
    Ok(TraceHeader {
        params_high: params.ok_or_else(|| bad("missing params"))?,
        seed: seed.ok_or_else(|| bad("missing seed"))?,
        limits: limits.ok_or_else(|| bad("missing limits"))?,
    })
}
