//! Vertices, directions and canonical edge identities on `Z^d`.
//!
//! The lattice is never materialized: vertices are coordinate vectors
//! addressed lazily, and an edge is identified by its lower endpoint along
//! its axis. Axes are 0-based (`axis = 0` is `e_1`).

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline capacity for coordinates; higher dimensions spill to the heap.
const INLINE_DIM: usize = 6;

pub type Coords = SmallVec<[i64; INLINE_DIM]>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(Coords);

impl Vertex {
    pub fn origin(d: usize) -> Self {
        Vertex(SmallVec::from_elem(0, d))
    }

    pub fn new(coords: &[i64]) -> Self {
        Vertex(SmallVec::from_slice(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// The vertex `self + dir`.
    pub fn step(&self, dir: Direction) -> Vertex {
        let mut out = self.clone();
        out.0[dir.axis] += dir.sign.delta();
        out
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_distance(&self, other: &Vertex) -> i64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Embeds `Z^d` into `Z^{d+1}` by appending a zero coordinate.
    pub fn embed(&self) -> Vertex {
        let mut out = self.clone();
        out.0.push(0);
        out
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn delta(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A unit vector `±e_{axis+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub axis: usize,
    pub sign: Sign,
}

impl Direction {
    pub const fn plus(axis: usize) -> Self {
        Direction { axis, sign: Sign::Plus }
    }

    pub const fn minus(axis: usize) -> Self {
        Direction { axis, sign: Sign::Minus }
    }

    pub fn reverse(self) -> Self {
        Direction { axis: self.axis, sign: self.sign.flip() }
    }

    /// All `2d` directions in canonical order: axis ascending, `+` before `-`.
    pub fn all(d: usize) -> impl Iterator<Item = Direction> + Clone {
        (0..d).flat_map(|axis| [Direction::plus(axis), Direction::minus(axis)])
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "{s}e{}", self.axis + 1)
    }
}

/// Canonical identity of the edge `<base, base + e_{axis+1}>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub base: Vertex,
    pub axis: usize,
}

impl EdgeId {
    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.base.clone(), self.base.step(Direction::plus(self.axis)))
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+e{}", self.base, self.axis + 1)
    }
}

/// The edge leaving `v` in direction `dir`, canonicalized so both traversal
/// orders give the same id.
pub fn canonical_edge(v: &Vertex, dir: Direction) -> EdgeId {
    debug_assert!(dir.axis < v.dim());
    let base = match dir.sign {
        Sign::Plus => v.clone(),
        Sign::Minus => v.step(dir),
    };
    EdgeId { base, axis: dir.axis }
}

/// The `2d` neighbours of `v`, in canonical direction order.
pub fn neighbors(v: &Vertex, d: usize) -> Result<Vec<(Direction, Vertex)>> {
    if v.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
    }
    Ok(Direction::all(d).map(|dir| (dir, v.step(dir))).collect())
}

/// Per-axis edge probabilities `p_1..p_d`, each in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    p: Vec<f64>,
}

impl Params {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        validate_params(p.len(), &p)?;
        Ok(Params { p })
    }

    pub fn homogeneous(d: usize, p: f64) -> Result<Self> {
        Params::new(vec![p; d])
    }

    pub fn d(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn axis_p(&self, axis: usize) -> f64 {
        self.p[axis]
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.p.iter().copied().fold(0.0, f64::max)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.p.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Checks `d >= 1`, `p.len() == d` and every `p_i` in `[0, 1)`.
pub fn validate_params(d: usize, p: &[f64]) -> Result<()> {
    if d < 1 {
        return Err(Error::DimensionTooSmall { min: 1, got: d });
    }
    if p.len() != d {
        return Err(Error::LengthMismatch { expected: d, got: p.len() });
    }
    for (i, &value) in p.iter().enumerate() {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange { index: i + 1, value });
        }
    }
    Ok(())
}

/// Finite truncation of an exploration on the infinite lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxLimits {
    pub max_vertices: usize,
    pub radius: i64,
}

impl BoxLimits {
    pub fn new(max_vertices: usize, radius: i64) -> Result<Self> {
        if max_vertices == 0 || radius <= 0 {
            return Err(Error::InvalidArgument(format!(
                "box limits must be positive (max_vertices = {max_vertices}, radius = {radius})"
            )));
        }
        Ok(BoxLimits { max_vertices, radius })
    }

    /// Truncate on radius only.
    pub fn radius_only(radius: i64) -> Result<Self> {
        BoxLimits::new(usize::MAX, radius)
    }
}
