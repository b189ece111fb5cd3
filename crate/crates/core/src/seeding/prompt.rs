//! Prompt rendering for initial, feedback and regeneration requests.
//!
//! Every feedback prompt is the starting prompt followed by a rule block, so
//! the provider always sees the solution form and parameter ranges.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::genome::{canonical_json_array, Point, Solution};
use crate::sut::WorldConfig;

/// Marker for the machine-readable parameter line inside every prompt.
pub const WORLD_MARKER: &str = "World parameters (JSON): ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Starting,
    TaskUnderstanding,
    FeedbackRule1,
    FeedbackRule2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptSpec {
    pub kind: PromptKind,
    pub rendered_text: String,
    /// Canonical serializations of every embedded solution, in prompt order.
    pub embedded_examples: Vec<String>,
    pub requested_count: usize,
}

impl PromptSpec {
    /// Hex SHA-256 of the rendered text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.rendered_text.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt of {len} chars exceeds the provider limit of {limit}")]
    TooManyExamples { len: usize, limit: usize },
    #[error("requested {requested} solutions but the provider batch limit is {limit}")]
    BatchLimit { requested: usize, limit: usize },
    #[error("requested count must be at least 1")]
    ZeroRequested,
    #[error("feedback needs at least one violating solution")]
    NoViolatingExamples,
    #[error("regeneration needs at least one rejected solution")]
    NoRejectedExamples,
}

/// World description embedded in prompts, in a form a provider can parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptWorld {
    pub x_bounds: [f64; 2],
    pub y_bounds: [f64; 2],
    pub speed_max: f64,
    pub ticks_per_gene: u32,
    pub genes_max: usize,
    pub chromosomes_max: usize,
    pub safety_radius: f64,
    pub collision_threshold: f64,
    /// Ego waypoints, one per tick, rounded to 2 decimals.
    pub ego_route: Vec<[f64; 2]>,
}

impl PromptWorld {
    pub fn from_world(world: &WorldConfig) -> Self {
        let r2 = |v: f64| (v * 100.0).round() / 100.0;
        Self {
            x_bounds: world.x_bounds,
            y_bounds: world.y_bounds,
            speed_max: world.speed_max,
            ticks_per_gene: world.ticks_per_gene,
            genes_max: world.genes_max,
            chromosomes_max: world.chromosomes_max,
            safety_radius: world.safety_radius,
            collision_threshold: world.collision_threshold,
            ego_route: world.ego_path.iter().map(|p| [r2(p.x), r2(p.y)]).collect(),
        }
    }

    pub fn to_world(&self) -> WorldConfig {
        WorldConfig {
            x_bounds: self.x_bounds,
            y_bounds: self.y_bounds,
            ego_path: self.ego_route.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            safety_radius: self.safety_radius,
            collision_threshold: self.collision_threshold,
            ticks_per_gene: self.ticks_per_gene,
            speed_max: self.speed_max,
            genes_max: self.genes_max,
            chromosomes_max: self.chromosomes_max,
            ..WorldConfig::default()
        }
    }

    /// Recovers the world line from a rendered prompt.
    pub fn parse_from(prompt_text: &str) -> Option<PromptWorld> {
        prompt_text
            .lines()
            .find_map(|l| l.strip_prefix(WORLD_MARKER))
            .and_then(|json| serde_json::from_str(json).ok())
    }
}

pub const DEFAULT_OBJECTIVES: &str = "The trajectories of NPC vehicles and pedestrians are required to \
disturb the ego vehicle's driving path. They need to be different from each other, and their \
waypoints need to cover different parts of the ego route.";

/// Renders prompts for one world. All methods are pure.
#[derive(Debug, Clone)]
pub struct PromptBuilder {
    system_name: String,
    objectives_text: String,
    world: PromptWorld,
    char_limit: usize,
    batch_limit: usize,
}

impl PromptBuilder {
    pub fn new(world: &WorldConfig, objectives_text: impl Into<String>) -> Self {
        Self {
            system_name: "an autonomous driving system".to_string(),
            objectives_text: objectives_text.into(),
            world: PromptWorld::from_world(world),
            char_limit: 16_000,
            batch_limit: 20,
        }
    }

    pub fn with_limits(mut self, char_limit: usize, batch_limit: usize) -> Self {
        self.char_limit = char_limit;
        self.batch_limit = batch_limit;
        self
    }

    pub fn with_system_name(mut self, name: impl Into<String>) -> Self {
        self.system_name = name.into();
        self
    }

    pub fn char_limit(&self) -> usize {
        self.char_limit
    }

    pub fn batch_limit(&self) -> usize {
        self.batch_limit
    }

    fn check_count(&self, n: usize) -> Result<(), PromptError> {
        if n == 0 {
            return Err(PromptError::ZeroRequested);
        }
        if n > self.batch_limit {
            return Err(PromptError::BatchLimit {
                requested: n,
                limit: self.batch_limit,
            });
        }
        Ok(())
    }

    fn finish(
        &self,
        kind: PromptKind,
        rendered_text: String,
        embedded: &[&Solution],
        n: usize,
    ) -> Result<PromptSpec, PromptError> {
        let len = rendered_text.chars().count();
        if len > self.char_limit {
            return Err(PromptError::TooManyExamples {
                len,
                limit: self.char_limit,
            });
        }
        Ok(PromptSpec {
            kind,
            rendered_text,
            embedded_examples: embedded.iter().map(|s| s.to_canonical_json()).collect(),
            requested_count: n,
        })
    }

    /// Starting block, solution form, parameters and elitism description.
    fn preamble(&self, n: usize) -> String {
        let w = &self.world;
        let world_json = serde_json::to_string(w).expect("prompt world serializes");
        format!(
            "You are an expert of {system}.\n\
             We want you to generate {n} solutions for the system.\n\
             \n\
             # Form of the solution\n\
             A solution is a JSON object {{\"chromosomes\":[{{\"kind\":\"vehicle\",\"genes\":[{{\"x\":0.0,\"y\":0.0,\"speed\":0.0}}]}}]}}.\n\
             Each chromosome is the trajectory of one NPC (kind \"vehicle\" or \"pedestrian\"). \
             Each gene is a waypoint the NPC leaves at tick k*{tpg}, moving toward the next waypoint at the given speed.\n\
             \n\
             # Parameters of the solution\n\
             - chromosomes per solution: 1 to {cmax}\n\
             - genes per chromosome: 2 to {gmax}\n\
             - x in [{x0}, {x1}], y in [{y0}, {y1}] (distance units)\n\
             - speed in [0, {smax}] distance units per tick; consecutive waypoints must be at most speed*{tpg} apart\n\
             - the ego vehicle follows ego_route, one waypoint per tick; a safety violation occurs when an NPC \
             comes closer than {gap} units to the ego\n\
             {marker}{world_json}\n\
             \n\
             # Elitism of the solution\n\
             {objectives}\n",
            system = self.system_name,
            tpg = w.ticks_per_gene,
            cmax = w.chromosomes_max,
            gmax = w.genes_max,
            x0 = w.x_bounds[0],
            x1 = w.x_bounds[1],
            y0 = w.y_bounds[0],
            y1 = w.y_bounds[1],
            smax = w.speed_max,
            gap = w.safety_radius + w.collision_threshold,
            marker = WORLD_MARKER,
            objectives = self.objectives_text,
        )
    }

    fn reply_instruction(n: usize) -> String {
        format!("\nReply with a JSON array of {n} solution objects and nothing else.\n")
    }

    pub fn initial(&self, examples: &[&Solution], n: usize) -> Result<PromptSpec, PromptError> {
        self.check_count(n)?;
        let mut text = self.preamble(n);
        if !examples.is_empty() {
            text.push_str("\n# Examples of feasible solutions\n");
            text.push_str(&canonical_json_array(examples.iter().copied()));
            text.push('\n');
        }
        text.push_str(&Self::reply_instruction(n));
        self.finish(PromptKind::Starting, text, examples, n)
    }

    /// Feedback: show violating (`se`) and non-violating (`sn`) solutions and
    /// ask for new violating ones that differ from `se`.
    pub fn feedback(&self, se: &[&Solution], sn: &[&Solution], n: usize) -> Result<PromptSpec, PromptError> {
        if se.is_empty() {
            return Err(PromptError::NoViolatingExamples);
        }
        self.check_count(n)?;
        let mut text = self.preamble(n);
        text.push_str(&format!(
            "\n# Feedback\n\
             Each solution in <SE> exposed a safety violation of {system}. So they are what we want.\n\
             No safety violation occurred in <SN>, which are not required by us. \
             We want you to generate {n} solutions that can expose safety violations and differentiate from <SE>.\n\
             <SE> = {se}\n\
             <SN> = {sn}\n",
            system = self.system_name,
            se = canonical_json_array(se.iter().copied()),
            sn = canonical_json_array(sn.iter().copied()),
        ));
        text.push_str(&Self::reply_instruction(n));
        let embedded: Vec<&Solution> = se.iter().chain(sn).copied().collect();
        self.finish(PromptKind::FeedbackRule1, text, &embedded, n)
    }

    /// Regeneration: the solutions in `rejected` were too close to `se`.
    pub fn regeneration(
        &self,
        rejected: &[&Solution],
        se: &[&Solution],
        n: usize,
    ) -> Result<PromptSpec, PromptError> {
        if rejected.is_empty() {
            return Err(PromptError::NoRejectedExamples);
        }
        self.check_count(n)?;
        let mut text = self.preamble(n);
        text.push_str(&format!(
            "\n# Feedback\n\
             The solutions in <R> are not different enough from <SE>. Please re-generate to create {n} new \
             solutions that have high potential to expose safety violations of {system}.\n\
             <R> = {r}\n\
             <SE> = {se}\n",
            system = self.system_name,
            r = canonical_json_array(rejected.iter().copied()),
            se = canonical_json_array(se.iter().copied()),
        ));
        text.push_str(&Self::reply_instruction(n));
        let embedded: Vec<&Solution> = rejected.iter().chain(se).copied().collect();
        self.finish(PromptKind::FeedbackRule2, text, &embedded, n)
    }

    /// [`Self::initial`], dropping the oldest examples until the prompt fits.
    pub fn initial_fitting(&self, examples: &[&Solution], n: usize) -> Result<PromptSpec, PromptError> {
        let mut start = 0;
        loop {
            match self.initial(&examples[start..], n) {
                Err(PromptError::TooManyExamples { .. }) if start < examples.len() => start += 1,
                other => return other,
            }
        }
    }

    /// [`Self::feedback`] with oldest-first eviction: `sn` empties first,
    /// then `se` down to its newest entry.
    pub fn feedback_fitting(&self, se: &[&Solution], sn: &[&Solution], n: usize) -> Result<PromptSpec, PromptError> {
        let (mut se_start, mut sn_start) = (0, 0);
        loop {
            match self.feedback(&se[se_start..], &sn[sn_start..], n) {
                Err(PromptError::TooManyExamples { .. }) if sn_start < sn.len() => sn_start += 1,
                Err(PromptError::TooManyExamples { .. }) if se_start + 1 < se.len() => se_start += 1,
                other => return other,
            }
        }
    }

    /// [`Self::regeneration`] with oldest-first eviction over `se`, then `rejected`.
    pub fn regeneration_fitting(
        &self,
        rejected: &[&Solution],
        se: &[&Solution],
        n: usize,
    ) -> Result<PromptSpec, PromptError> {
        let (mut r_start, mut se_start) = (0, 0);
        loop {
            match self.regeneration(&rejected[r_start..], &se[se_start..], n) {
                Err(PromptError::TooManyExamples { .. }) if se_start < se.len() => se_start += 1,
                Err(PromptError::TooManyExamples { .. }) if r_start + 1 < rejected.len() => r_start += 1,
                other => return other,
            }
        }
    }
}
