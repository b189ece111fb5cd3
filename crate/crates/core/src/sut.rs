//! Surrogate system under test.
//!
//! A scenario is replayed tick by tick against a fixed ego route. The
//! per-tick violation distance is the gap between the ego and the closest
//! participant, minus the safety radius. Violations are typed geometrically
//! by the ego route segment they occur on and the side the offending
//! participant approaches from.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::{Chromosome, Point, Solution, SolutionId};

/// Static description of the simulated world and the limits every scenario
/// must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub x_bounds: [f64; 2],
    pub y_bounds: [f64; 2],
    /// One ego waypoint per tick.
    pub ego_path: Vec<Point>,
    pub safety_radius: f64,
    /// A tick is a violation iff its violation distance is below this.
    pub collision_threshold: f64,
    pub ticks_per_gene: u32,
    pub speed_max: f64,
    pub genes_max: usize,
    pub chromosomes_max: usize,
    /// Number of equal-length ego route partitions used for violation typing.
    pub segment_count: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            x_bounds: [0.0, 300.0],
            y_bounds: [0.0, 300.0],
            ego_path: default_ego_path(),
            safety_radius: 1.0,
            collision_threshold: 0.5,
            ticks_per_gene: 5,
            speed_max: 3.0,
            genes_max: 12,
            chromosomes_max: 3,
            segment_count: 6,
        }
    }
}

/// 60 ticks: a straight eastbound run followed by a left-hand quarter arc.
fn default_ego_path() -> Vec<Point> {
    let mut path: Vec<Point> = (0..=30)
        .map(|t| Point::new(110.0 + 1.5 * f64::from(t), 130.0))
        .collect();
    let (cx, cy, r) = (155.0, 160.0, 30.0);
    for t in 31..60 {
        let theta = -FRAC_PI_2 + f64::from(t - 30) * FRAC_PI_2 / 29.0;
        path.push(Point::new(cx + r * theta.cos(), cy + r * theta.sin()));
    }
    path
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldConfigError {
    #[error("bounds on {axis} axis are empty or non-finite: [{min}, {max}]")]
    Bounds { axis: char, min: f64, max: f64 },
    #[error("ego path needs at least 2 waypoints, got {0}")]
    EgoPathTooShort(usize),
    #[error("ego waypoint {0} lies outside the world bounds")]
    EgoOutOfBounds(usize),
    #[error("{field} must be {requirement}")]
    Field { field: &'static str, requirement: &'static str },
    #[error("segment_count {segments} exceeds ego path length {ticks}")]
    TooManySegments { segments: usize, ticks: usize },
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldConfigError> {
        for (axis, [min, max]) in [('x', self.x_bounds), ('y', self.y_bounds)] {
            if !(min.is_finite() && max.is_finite() && min < max) {
                return Err(WorldConfigError::Bounds { axis, min, max });
            }
        }
        if self.ego_path.len() < 2 {
            return Err(WorldConfigError::EgoPathTooShort(self.ego_path.len()));
        }
        if let Some(i) = self.ego_path.iter().position(|p| !self.contains(*p)) {
            return Err(WorldConfigError::EgoOutOfBounds(i));
        }
        let field = |ok: bool, field, requirement| {
            if ok {
                Ok(())
            } else {
                Err(WorldConfigError::Field { field, requirement })
            }
        };
        field(
            self.safety_radius.is_finite() && self.safety_radius >= 0.0,
            "safety_radius",
            "finite and >= 0",
        )?;
        field(
            self.collision_threshold.is_finite() && self.collision_threshold >= 0.0,
            "collision_threshold",
            "finite and >= 0",
        )?;
        field(self.ticks_per_gene >= 1, "ticks_per_gene", ">= 1")?;
        field(
            self.speed_max.is_finite() && self.speed_max > 0.0,
            "speed_max",
            "finite and > 0",
        )?;
        field(self.genes_max >= 2, "genes_max", ">= 2")?;
        field(self.chromosomes_max >= 1, "chromosomes_max", ">= 1")?;
        field(self.segment_count >= 1, "segment_count", ">= 1")?;
        if self.segment_count > self.ego_path.len() {
            return Err(WorldConfigError::TooManySegments {
                segments: self.segment_count,
                ticks: self.ego_path.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        (self.x_bounds[0]..=self.x_bounds[1]).contains(&p.x)
            && (self.y_bounds[0]..=self.y_bounds[1]).contains(&p.y)
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x.clamp(self.x_bounds[0], self.x_bounds[1]),
            p.y.clamp(self.y_bounds[0], self.y_bounds[1]),
        )
    }

    pub fn ticks(&self) -> usize {
        self.ego_path.len()
    }

    /// Farthest a participant can travel within one gene at top speed.
    pub fn max_reach(&self) -> f64 {
        self.speed_max * f64::from(self.ticks_per_gene)
    }

    /// Ego route partition containing `tick`.
    pub fn segment_of(&self, tick: usize) -> usize {
        (tick * self.segment_count / self.ticks()).min(self.segment_count - 1)
    }

    /// Unit-free ego heading at `tick` (forward difference, backward at the end).
    pub fn ego_heading(&self, tick: usize) -> Point {
        let path = &self.ego_path;
        let (a, b) = if tick + 1 < path.len() {
            (path[tick], path[tick + 1])
        } else {
            (path[tick - 1], path[tick])
        };
        b - a
    }

    /// Upper bound on distinct violation types.
    pub fn violation_type_capacity(&self) -> usize {
        self.segment_count * Quadrant::ALL.len()
    }
}

/// Replay of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionTrace {
    pub solution_id: SolutionId,
    /// Ego position per tick.
    pub ego: Vec<Point>,
    /// Participant positions, indexed `[participant][tick]`.
    pub npcs: Vec<Vec<Point>>,
    /// Violation distance per tick.
    pub sv: Vec<f64>,
}

impl ExecutionTrace {
    pub fn tick_count(&self) -> usize {
        self.ego.len()
    }

    /// Participant closest to the ego at `tick`, lowest index on ties.
    pub fn closest_npc(&self, tick: usize) -> usize {
        let ego = self.ego[tick];
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, track) in self.npcs.iter().enumerate() {
            let d = ego.distance(track[tick]);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Position of a participant at `tick`.
///
/// Gene `k` owns ticks `[k*T, (k+1)*T)`: the participant leaves waypoint `k`
/// at its speed and stops on waypoint `k + 1` if it arrives early. After the
/// last waypoint it holds position.
pub fn position_at(chromosome: &Chromosome, ticks_per_gene: u32, tick: usize) -> Point {
    let genes = chromosome.genes();
    let per = ticks_per_gene as usize;
    let k = tick / per;
    if k + 1 >= genes.len() {
        return genes[genes.len() - 1].position();
    }
    let (a, b) = (genes[k].position(), genes[k + 1].position());
    let dist = a.distance(b);
    if dist == 0.0 {
        return a;
    }
    let elapsed = (tick - k * per) as f64;
    let travelled = (genes[k].speed * elapsed).min(dist);
    a + (b - a) * (travelled / dist)
}

/// Replays `solution` against the ego route.
pub fn execute(solution: &Solution, world: &WorldConfig) -> ExecutionTrace {
    let ticks = world.ticks();
    let npcs: Vec<Vec<Point>> = solution
        .chromosomes()
        .iter()
        .map(|c| {
            (0..ticks)
                .map(|t| position_at(c, world.ticks_per_gene, t))
                .collect()
        })
        .collect();
    let sv = (0..ticks)
        .map(|t| {
            let ego = world.ego_path[t];
            npcs.iter()
                .map(|track| ego.distance(track[t]))
                .fold(f64::INFINITY, f64::min)
                - world.safety_radius
        })
        .collect();
    ExecutionTrace {
        solution_id: solution.id(),
        ego: world.ego_path.clone(),
        npcs,
        sv,
    }
}

/// Side of the ego, in its heading frame, that a participant occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrant {
    Front,
    Rear,
    Left,
    Right,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Front, Quadrant::Rear, Quadrant::Left, Quadrant::Right];

    /// Classifies `offset` (participant minus ego) against `heading`.
    /// Diagonals resolve to front/rear; a zero offset is front.
    pub fn classify(heading: Point, offset: Point) -> Quadrant {
        let norm = heading.norm();
        if norm == 0.0 || offset.norm() == 0.0 {
            return Quadrant::Front;
        }
        let forward = heading.dot(offset) / norm;
        let lateral = heading.cross(offset) / norm;
        if forward.abs() >= lateral.abs() {
            if forward >= 0.0 {
                Quadrant::Front
            } else {
                Quadrant::Rear
            }
        } else if lateral > 0.0 {
            Quadrant::Left
        } else {
            Quadrant::Right
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrant::Front => "front",
            Quadrant::Rear => "rear",
            Quadrant::Left => "left",
            Quadrant::Right => "right",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ViolationType {
    pub segment: usize,
    pub quadrant: Quadrant,
}

impl fmt::Display for ViolationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seg{}/{}", self.segment, self.quadrant)
    }
}

/// Earliest violating tick of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub violation_type: ViolationType,
    pub tick: usize,
    pub sv_at_tick: f64,
    /// Participant responsible (closest at that tick).
    pub npc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub solution_id: SolutionId,
    #[serde(flatten)]
    pub violation: Violation,
    pub generation: usize,
    /// Milliseconds since run start; absent unless wall-clock recording is on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

impl ViolationRecord {
    pub fn violation_type(&self) -> ViolationType {
        self.violation.violation_type
    }
}

pub fn detect_violation(trace: &ExecutionTrace, world: &WorldConfig) -> Option<Violation> {
    let tick = trace
        .sv
        .iter()
        .position(|&sv| sv < world.collision_threshold)?;
    let npc = trace.closest_npc(tick);
    let offset = trace.npcs[npc][tick] - trace.ego[tick];
    let quadrant = Quadrant::classify(world.ego_heading(tick), offset);
    Some(Violation {
        violation_type: ViolationType {
            segment: world.segment_of(tick),
            quadrant,
        },
        tick,
        sv_at_tick: trace.sv[tick],
        npc,
    })
}

pub fn violation_type_count<'a, I>(records: I) -> usize
where
    I: IntoIterator<Item = &'a ViolationRecord>,
{
    records
        .into_iter()
        .map(ViolationRecord::violation_type)
        .collect::<BTreeSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{Gene, Origin, ParticipantKind};

    fn straight_world(ticks: usize) -> WorldConfig {
        WorldConfig {
            ego_path: (0..ticks).map(|t| Point::new(t as f64, 50.0)).collect(),
            segment_count: 2,
            collision_threshold: 2.0,
            ..WorldConfig::default()
        }
    }

    fn single(genes: Vec<Gene>) -> Solution {
        Solution::new(
            vec![Chromosome::new(ParticipantKind::Vehicle, genes)],
            Origin::SeedInitial,
            0,
        )
    }

    #[test]
    fn default_world_is_valid() {
        let w = WorldConfig::default();
        w.validate().unwrap();
        assert_eq!(w.ticks(), 60);
        assert_eq!(w.violation_type_capacity(), 24);
        for pair in w.ego_path.windows(2) {
            let step = pair[0].distance(pair[1]);
            assert!(step > 1.4 && step < 1.7, "step {step}");
        }
    }

    #[test]
    fn interpolates_linearly_then_holds() {
        let s = single(vec![Gene::new(0.0, 0.0, 1.0), Gene::new(5.0, 0.0, 0.0)]);
        let w = straight_world(8);
        let trace = execute(&s, &w);
        let xs: Vec<f64> = trace.npcs[0].iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 5.0, 5.0]);
    }

    #[test]
    fn early_arrival_waits_for_next_slot() {
        let s = single(vec![
            Gene::new(0.0, 0.0, 2.0),
            Gene::new(4.0, 0.0, 1.0),
            Gene::new(4.0, 5.0, 0.0),
        ]);
        let w = straight_world(12);
        let trace = execute(&s, &w);
        let p = &trace.npcs[0];
        assert_eq!(p[2], Point::new(4.0, 0.0));
        assert_eq!(p[4], Point::new(4.0, 0.0));
        assert_eq!(p[5], Point::new(4.0, 0.0));
        assert_eq!(p[6], Point::new(4.0, 1.0));
        assert_eq!(p[10], Point::new(4.0, 5.0));
    }

    #[test]
    fn degenerate_trajectory_is_constant() {
        let g = Gene::new(7.0, 3.0, 2.0);
        let s = single(vec![g, g, g]);
        let trace = execute(&s, &WorldConfig::default());
        assert!(trace.npcs[0].iter().all(|&p| p == Point::new(7.0, 3.0)));
    }

    #[test]
    fn static_npc_sv_is_distance_minus_radius() {
        let w = straight_world(20);
        let s = single(vec![Gene::new(12.0, 57.0, 0.0), Gene::new(12.0, 57.0, 0.0)]);
        let trace = execute(&s, &w);
        let min = trace.sv.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - (7.0 - w.safety_radius)).abs() < 1e-12);
        assert_eq!(trace.sv.iter().position(|&v| v == min), Some(12));
    }

    #[test]
    fn earliest_qualifying_tick_wins() {
        let w = WorldConfig {
            collision_threshold: 1.0,
            ..straight_world(3)
        };
        let mut trace = execute(
            &single(vec![Gene::new(0.0, 0.0, 0.0), Gene::new(0.0, 0.0, 0.0)]),
            &w,
        );
        trace.sv = vec![3.0, 0.5, 0.2];
        let v = detect_violation(&trace, &w).unwrap();
        assert_eq!(v.tick, 1);
        assert_eq!(v.sv_at_tick, 0.5);

        trace.sv = vec![3.0, 1.0, 1.5];
        assert!(detect_violation(&trace, &w).is_none());
    }

    #[test]
    fn npc_dead_ahead_is_front() {
        let w = straight_world(20);
        // Ego heads +x along y = 50; parked NPC ahead on the route.
        let s = single(vec![Gene::new(10.0, 50.0, 0.0), Gene::new(10.0, 50.0, 0.0)]);
        let v = detect_violation(&execute(&s, &w), &w).unwrap();
        assert_eq!(v.tick, 8);
        assert_eq!(v.violation_type.quadrant, Quadrant::Front);
        assert_eq!(v.violation_type.segment, 0);
    }

    #[test]
    fn quadrant_classification_in_heading_frame() {
        let east = Point::new(1.0, 0.0);
        assert_eq!(Quadrant::classify(east, Point::new(2.0, 0.5)), Quadrant::Front);
        assert_eq!(Quadrant::classify(east, Point::new(-2.0, 0.5)), Quadrant::Rear);
        assert_eq!(Quadrant::classify(east, Point::new(0.1, 2.0)), Quadrant::Left);
        assert_eq!(Quadrant::classify(east, Point::new(0.1, -2.0)), Quadrant::Right);
        let north = Point::new(0.0, 3.0);
        assert_eq!(Quadrant::classify(north, Point::new(-2.0, 0.1)), Quadrant::Left);
        assert_eq!(Quadrant::classify(north, Point::new(0.0, 0.0)), Quadrant::Front);
    }

    #[test]
    fn type_count_uses_set_semantics() {
        let rec = |segment, quadrant| ViolationRecord {
            solution_id: SolutionId(0),
            violation: Violation {
                violation_type: ViolationType { segment, quadrant },
                tick: 0,
                sv_at_tick: 0.0,
                npc: 0,
            },
            generation: 0,
            wall_clock_ms: None,
        };
        assert_eq!(violation_type_count(&[]), 0);
        assert_eq!(
            violation_type_count(&[rec(1, Quadrant::Left), rec(1, Quadrant::Left)]),
            1
        );
        let mut six = Vec::new();
        for s in 0..3 {
            for q in [Quadrant::Front, Quadrant::Right] {
                six.push(rec(s, q));
            }
        }
        assert_eq!(violation_type_count(&six), 6);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut w = WorldConfig::default();
        w.ego_path.truncate(1);
        assert_eq!(w.validate(), Err(WorldConfigError::EgoPathTooShort(1)));
        let w = WorldConfig {
            segment_count: 100,
            ..WorldConfig::default()
        };
        assert!(matches!(w.validate(), Err(WorldConfigError::TooManySegments { .. })));
        let w = WorldConfig {
            x_bounds: [5.0, 5.0],
            ..WorldConfig::default()
        };
        assert!(matches!(w.validate(), Err(WorldConfigError::Bounds { axis: 'x', .. })));
    }
}
