//! Scenario encoding: genes, chromosomes, solutions and populations.
//!
//! A [`Gene`] is a timed waypoint, a [`Chromosome`] is one participant's
//! trajectory, and a [`Solution`] is a full scenario. Identity is a content
//! hash over the canonical JSON encoding, so lineage metadata never affects
//! it.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::sut::WorldConfig;

/// Slack allowed when checking reachability, absorbing float rounding.
pub const REACH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2-D cross product; positive when `other` is to the left.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// One timed waypoint. `speed` applies to the leg leaving this waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gene {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
}

impl Gene {
    pub const fn new(x: f64, y: f64, speed: f64) -> Self {
        Self { x, y, speed }
    }

    pub fn at(p: Point, speed: f64) -> Self {
        Self::new(p.x, p.y, speed)
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticipantKind {
    #[default]
    Vehicle,
    Pedestrian,
}

impl ParticipantKind {
    fn as_str(self) -> &'static str {
        match self {
            ParticipantKind::Vehicle => "vehicle",
            ParticipantKind::Pedestrian => "pedestrian",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    #[serde(default)]
    kind: ParticipantKind,
    genes: Vec<Gene>,
}

impl Chromosome {
    pub fn new(kind: ParticipantKind, genes: Vec<Gene>) -> Self {
        Self { kind, genes }
    }

    pub fn kind(&self) -> ParticipantKind {
        self.kind
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn into_genes(self) -> Vec<Gene> {
        self.genes
    }
}

/// How a solution came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    SeedInitial,
    SeedDifferential,
    Crossover,
    Mutation,
    /// Uniform-random initialization (no provider involved).
    Random,
}

/// Content hash of a solution's chromosomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SolutionId(pub u64);

impl fmt::Display for SolutionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for SolutionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SolutionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16)
            .map(SolutionId)
            .map_err(serde::de::Error::custom)
    }
}

/// A complete scenario. Immutable once built; the id is computed eagerly.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    id: SolutionId,
    chromosomes: Vec<Chromosome>,
    origin: Origin,
    generation_born: usize,
}

impl Solution {
    pub fn new(chromosomes: Vec<Chromosome>, origin: Origin, generation_born: usize) -> Self {
        let id = solution_id(&chromosomes);
        Self {
            id,
            chromosomes,
            origin,
            generation_born,
        }
    }

    pub fn id(&self) -> SolutionId {
        self.id
    }

    pub fn chromosomes(&self) -> &[Chromosome] {
        &self.chromosomes
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn generation_born(&self) -> usize {
        self.generation_born
    }

    /// Same content under a new lineage.
    pub fn relabel(&self, origin: Origin, generation_born: usize) -> Solution {
        Solution {
            id: self.id,
            chromosomes: self.chromosomes.clone(),
            origin,
            generation_born,
        }
    }

    /// Replaces chromosome `index`, keeping lineage.
    pub fn with_chromosome(&self, index: usize, chromosome: Chromosome) -> Solution {
        let mut chromosomes = self.chromosomes.clone();
        chromosomes[index] = chromosome;
        Solution::new(chromosomes, self.origin, self.generation_born)
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(&self.chromosomes)
    }
}

/// Formats a coordinate as a fixed three-decimal literal.
fn fixed3(v: f64) -> String {
    let milli = (v * 1000.0).round() as i64;
    let sign = if milli < 0 { "-" } else { "" };
    let abs = milli.unsigned_abs();
    format!("{sign}{}.{:03}", abs / 1000, abs % 1000)
}

/// Canonical exchange encoding:
/// `{"chromosomes":[{"kind":"vehicle","genes":[{"x":..,"y":..,"speed":..}]}]}`.
pub fn canonical_json(chromosomes: &[Chromosome]) -> String {
    let mut out = String::from("{\"chromosomes\":[");
    for (ci, c) in chromosomes.iter().enumerate() {
        if ci > 0 {
            out.push(',');
        }
        out.push_str("{\"kind\":\"");
        out.push_str(c.kind.as_str());
        out.push_str("\",\"genes\":[");
        for (gi, g) in c.genes.iter().enumerate() {
            if gi > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"x\":{},\"y\":{},\"speed\":{}}}",
                fixed3(g.x),
                fixed3(g.y),
                fixed3(g.speed)
            ));
        }
        out.push_str("]}");
    }
    out.push_str("]}");
    out
}

/// Canonical JSON array of several solutions.
pub fn canonical_json_array<'a, I>(solutions: I) -> String
where
    I: IntoIterator<Item = &'a Solution>,
{
    let body: Vec<String> = solutions.into_iter().map(Solution::to_canonical_json).collect();
    format!("[{}]", body.join(","))
}

/// Deterministic content id: first 8 bytes of SHA-256 over the canonical encoding.
pub fn solution_id(chromosomes: &[Chromosome]) -> SolutionId {
    let digest = Sha256::digest(canonical_json(chromosomes).as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    SolutionId(u64::from_be_bytes(head))
}

/// Wire shape of a solution, as produced by a provider.
#[derive(Debug, Clone, Deserialize)]
pub struct SolutionDraft {
    pub chromosomes: Vec<Chromosome>,
}

impl SolutionDraft {
    pub fn into_solution(self, origin: Origin, generation_born: usize) -> Solution {
        Solution::new(self.chromosomes, origin, generation_born)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NoChromosomes,
    TooManyChromosomes { count: usize, max: usize },
    TooFewGenes { chromosome: usize, count: usize },
    TooManyGenes { chromosome: usize, count: usize, max: usize },
    NonFinite { chromosome: usize, gene: usize },
    OutOfBounds { chromosome: usize, gene: usize, axis: char, value: f64 },
    SpeedOutOfRange { chromosome: usize, gene: usize, speed: f64 },
    Unreachable { chromosome: usize, gene: usize, distance: f64, reach: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            NoChromosomes => write!(f, "solution has no chromosomes"),
            TooManyChromosomes { count, max } => write!(f, "{count} chromosomes exceed max {max}"),
            TooFewGenes { chromosome, count } => {
                write!(f, "chromosome {chromosome} has {count} genes, need at least 2")
            }
            TooManyGenes { chromosome, count, max } => {
                write!(f, "chromosome {chromosome} has {count} genes, max {max}")
            }
            NonFinite { chromosome, gene } => {
                write!(f, "gene {chromosome}.{gene} has a non-finite field")
            }
            OutOfBounds { chromosome, gene, axis, value } => {
                write!(f, "gene {chromosome}.{gene}: {axis}={value} out of bounds")
            }
            SpeedOutOfRange { chromosome, gene, speed } => {
                write!(f, "gene {chromosome}.{gene}: speed {speed} out of range")
            }
            Unreachable { chromosome, gene, distance, reach } => write!(
                f,
                "gene {chromosome}.{gene}: next waypoint {distance} away, reach {reach}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Lists every broken invariant of `solution` under `world`.
pub fn validate(solution: &Solution, world: &WorldConfig) -> ValidationReport {
    validate_chromosomes(solution.chromosomes(), world)
}

pub fn validate_chromosomes(chromosomes: &[Chromosome], world: &WorldConfig) -> ValidationReport {
    let mut issues = Vec::new();
    if chromosomes.is_empty() {
        issues.push(ValidationIssue::NoChromosomes);
    }
    if chromosomes.len() > world.chromosomes_max {
        issues.push(ValidationIssue::TooManyChromosomes {
            count: chromosomes.len(),
            max: world.chromosomes_max,
        });
    }
    let ticks = f64::from(world.ticks_per_gene);
    for (ci, c) in chromosomes.iter().enumerate() {
        if c.len() < 2 {
            issues.push(ValidationIssue::TooFewGenes { chromosome: ci, count: c.len() });
        }
        if c.len() > world.genes_max {
            issues.push(ValidationIssue::TooManyGenes {
                chromosome: ci,
                count: c.len(),
                max: world.genes_max,
            });
        }
        for (gi, g) in c.genes.iter().enumerate() {
            if !(g.x.is_finite() && g.y.is_finite() && g.speed.is_finite()) {
                issues.push(ValidationIssue::NonFinite { chromosome: ci, gene: gi });
                continue;
            }
            for (axis, value, [lo, hi]) in [('x', g.x, world.x_bounds), ('y', g.y, world.y_bounds)] {
                if value < lo || value > hi {
                    issues.push(ValidationIssue::OutOfBounds { chromosome: ci, gene: gi, axis, value });
                }
            }
            if g.speed < 0.0 || g.speed > world.speed_max {
                issues.push(ValidationIssue::SpeedOutOfRange { chromosome: ci, gene: gi, speed: g.speed });
            }
        }
        for (gi, pair) in c.genes.windows(2).enumerate() {
            let distance = pair[0].position().distance(pair[1].position());
            let reach = pair[0].speed * ticks;
            if distance > reach + REACH_TOLERANCE {
                issues.push(ValidationIssue::Unreachable { chromosome: ci, gene: gi, distance, reach });
            }
        }
    }
    ValidationReport { issues }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepairError {
    #[error("solution has no chromosomes")]
    NoChromosomes,
    #[error("chromosome {0} has no genes")]
    EmptyChromosome(usize),
    #[error("chromosome {chromosome} gene {gene} has a non-finite field")]
    NonFinite { chromosome: usize, gene: usize },
}

/// Returns the nearest valid solution.
///
/// Coordinates and speeds are clamped, surplus chromosomes and genes are
/// truncated, and a lone gene is duplicated in place. An unreachable leg
/// first raises the departing speed to `distance / ticks_per_gene`; if that
/// would exceed `speed_max`, the speed is capped and the next waypoint is
/// pulled back along the leg to the farthest reachable point.
pub fn repair(solution: &Solution, world: &WorldConfig) -> Result<Solution, RepairError> {
    if validate(solution, world).is_valid() {
        return Ok(solution.clone());
    }
    let chromosomes = repair_chromosomes(solution.chromosomes(), world)?;
    Ok(Solution::new(chromosomes, solution.origin(), solution.generation_born()))
}

pub fn repair_chromosomes(
    chromosomes: &[Chromosome],
    world: &WorldConfig,
) -> Result<Vec<Chromosome>, RepairError> {
    if chromosomes.is_empty() {
        return Err(RepairError::NoChromosomes);
    }
    let ticks = f64::from(world.ticks_per_gene);
    let max_reach = world.max_reach();
    let mut out = Vec::with_capacity(chromosomes.len().min(world.chromosomes_max));
    for (ci, c) in chromosomes.iter().take(world.chromosomes_max).enumerate() {
        if c.is_empty() {
            return Err(RepairError::EmptyChromosome(ci));
        }
        let mut genes: Vec<Gene> = Vec::with_capacity(c.len().min(world.genes_max));
        for (gi, g) in c.genes.iter().take(world.genes_max).enumerate() {
            if !(g.x.is_finite() && g.y.is_finite() && g.speed.is_finite()) {
                return Err(RepairError::NonFinite { chromosome: ci, gene: gi });
            }
            let p = world.clamp(g.position());
            genes.push(Gene::at(p, g.speed.clamp(0.0, world.speed_max)));
        }
        if genes.len() == 1 {
            genes.push(Gene::at(genes[0].position(), 0.0));
        }
        for k in 0..genes.len() - 1 {
            let from = genes[k].position();
            let to = genes[k + 1].position();
            let distance = from.distance(to);
            if distance <= genes[k].speed * ticks + REACH_TOLERANCE {
                continue;
            }
            if distance <= max_reach {
                genes[k].speed = distance / ticks;
            } else {
                genes[k].speed = world.speed_max;
                let pulled = from + (to - from) * (max_reach / distance);
                genes[k + 1].x = pulled.x;
                genes[k + 1].y = pulled.y;
            }
        }
        out.push(Chromosome::new(c.kind, genes));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopulationError {
    #[error("duplicate solution id {0} in population")]
    DuplicateId(SolutionId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Solution>,
    generation_index: usize,
}

impl Population {
    pub fn new(members: Vec<Solution>, generation_index: usize) -> Result<Self, PopulationError> {
        let mut seen = HashSet::with_capacity(members.len());
        for m in &members {
            if !seen.insert(m.id()) {
                return Err(PopulationError::DuplicateId(m.id()));
            }
        }
        Ok(Self { members, generation_index })
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn generation_index(&self) -> usize {
        self.generation_index
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<Solution> {
        self.members
    }
}
