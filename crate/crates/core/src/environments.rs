//! Analytic constraint functions and the shipped planning problems.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundles::{check_admissible, BundleError, BundleSequence, ProjectionSpec};
use crate::spaces::{Component, SpaceError, State, StateSpace};

/// Samples drawn per bundle when a problem is assembled.
pub const CONSTRUCTION_ADMISSIBILITY_SAMPLES: usize = 1_000;
const CONSTRUCTION_SEED: u64 = 0x5eed_ad31;

/// State validity predicate. `true` means the state is feasible.
pub trait Constraint: Send + Sync {
    fn is_valid(&self, x: &State) -> bool;
}

/// Wraps a closure as a [`Constraint`].
pub struct FnConstraint<F>(F);

impl<F> FnConstraint<F>
where
    F: Fn(&State) -> bool + Send + Sync,
{
    pub fn new(f: F) -> Self {
        FnConstraint(f)
    }
}

impl<F> Constraint for FnConstraint<F>
where
    F: Fn(&State) -> bool + Send + Sync,
{
    fn is_valid(&self, x: &State) -> bool {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysValid;

impl Constraint for AlwaysValid {
    fn is_valid(&self, _: &State) -> bool {
        true
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("{0}")]
    Argument(String),
    #[error("start state is infeasible")]
    InfeasibleStart,
    #[error("goal center is infeasible")]
    InfeasibleGoal,
    #[error("{constraints} constraints for {levels} levels")]
    ConstraintCount { constraints: usize, levels: usize },
    #[error("projection onto level {level} is not admissible ({violations} violations)")]
    Inadmissible { level: usize, violations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: State,
    pub radius: f64,
}

impl GoalRegion {
    pub fn new(center: State, radius: f64) -> Self {
        assert!(radius >= 0.0, "goal radius must be nonnegative");
        GoalRegion { center, radius }
    }

    pub fn contains(&self, space: &StateSpace, x: &State) -> bool {
        space.distance(&self.center, x) <= self.radius + 1e-9
    }
}

/// Start, goal region, bundle sequence and one constraint per level.
#[derive(Clone)]
pub struct PlanningProblem {
    name: String,
    sequence: BundleSequence,
    constraints: Vec<Arc<dyn Constraint>>,
    start: State,
    goal: GoalRegion,
}

impl fmt::Debug for PlanningProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanningProblem")
            .field("name", &self.name)
            .field("levels", &self.sequence.len())
            .field("start", &self.start)
            .field("goal", &self.goal)
            .finish()
    }
}

impl PlanningProblem {
    /// Assembles a problem. Rejects infeasible start/goal and any bundle that
    /// fails a Monte-Carlo admissibility check.
    pub fn new(
        name: impl Into<String>,
        sequence: BundleSequence,
        constraints: Vec<Arc<dyn Constraint>>,
        start: State,
        goal: GoalRegion,
    ) -> Result<Self, ProblemError> {
        if constraints.len() != sequence.len() {
            return Err(ProblemError::ConstraintCount {
                constraints: constraints.len(),
                levels: sequence.len(),
            });
        }
        let top = sequence.top();
        top.check(&start)?;
        top.check(&goal.center)?;
        if !constraints.last().unwrap().is_valid(&start) {
            return Err(ProblemError::InfeasibleStart);
        }
        if !constraints.last().unwrap().is_valid(&goal.center) {
            return Err(ProblemError::InfeasibleGoal);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(CONSTRUCTION_SEED);
        for level in 1..sequence.len() {
            let bundle = sequence.bundle(level).unwrap();
            let violations = check_admissible(
                bundle,
                constraints[level].as_ref(),
                constraints[level - 1].as_ref(),
                CONSTRUCTION_ADMISSIBILITY_SAMPLES,
                &mut rng,
            );
            if violations > 0 {
                return Err(ProblemError::Inadmissible { level, violations });
            }
        }
        Ok(PlanningProblem {
            name: name.into(),
            sequence,
            constraints,
            start,
            goal,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sequence(&self) -> &BundleSequence {
        &self.sequence
    }

    pub fn levels(&self) -> usize {
        self.sequence.len()
    }

    pub fn constraint(&self, level: usize) -> &Arc<dyn Constraint> {
        &self.constraints[level]
    }

    pub fn start(&self) -> &State {
        &self.start
    }

    pub fn goal(&self) -> &GoalRegion {
        &self.goal
    }

    pub fn projected_start(&self, level: usize) -> State {
        self.sequence.project_to(&self.start, level)
    }

    pub fn projected_goal(&self, level: usize) -> GoalRegion {
        GoalRegion {
            center: self.sequence.project_to(&self.goal.center, level),
            radius: self.goal.radius,
        }
    }

    /// Same problem without any abstraction levels.
    pub fn single_level(&self) -> PlanningProblem {
        PlanningProblem {
            name: self.name.clone(),
            sequence: BundleSequence::trivial(self.sequence.top().clone()),
            constraints: vec![self.constraints.last().unwrap().clone()],
            start: self.start.clone(),
            goal: self.goal.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// hypercube

pub const HYPERCUBE_CORRIDOR: f64 = 0.1;

/// Corridor rule: at most one coordinate lies strictly inside `(eps, 1 - eps)`.
pub fn hypercube_valid(x: &[f64], eps: f64) -> bool {
    let mut mid = 0;
    for v in x {
        if v.min(1.0 - v) > eps {
            mid += 1;
            if mid > 1 {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy)]
pub struct HypercubeCorridors {
    pub eps: f64,
}

impl Constraint for HypercubeCorridors {
    fn is_valid(&self, x: &State) -> bool {
        hypercube_valid(x.values(), self.eps)
    }
}

/// `[0,1]^n -> [0,1]^(n-1) -> ... -> [0,1]^2`, from the origin to `(1, ..., 1)`.
pub fn hypercube_problem(n: usize) -> Result<PlanningProblem, ProblemError> {
    if n < 2 {
        return Err(ProblemError::Argument(format!(
            "hypercube needs n >= 2, got {n}"
        )));
    }
    let projections: Vec<Vec<ProjectionSpec>> = (2..n)
        .rev()
        .map(|m| vec![ProjectionSpec::RnPrefix(m)])
        .collect();
    EnvironmentSpec::Hypercube { n }.build_with(Some(&projections))
}

// ---------------------------------------------------------------------------
// disk robots in a crossroad

pub const DISK_RADIUS: f64 = 0.4;
pub const CROSSING_HALF_EXTENT: f64 = 5.0;
/// Half width of each lane of the crossroad.
pub const CROSSING_LANE_HALF_WIDTH: f64 = 1.1;

/// Axis-aligned rectangle `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        let dx = (self.min[0] - p[0]).max(0.0).max(p[0] - self.max[0]);
        let dy = (self.min[1] - p[1]).max(0.0).max(p[1] - self.max[1]);
        (dx * dx + dy * dy).sqrt()
    }

    /// Minimum distance between the segment `a -> b` and the rectangle.
    pub fn segment_distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        // the distance to a convex set is convex along the segment
        let f = |t: f64| self.distance_to([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
    }
}

pub fn crossing_blocks() -> [Rect; 4] {
    let (l, e) = (CROSSING_LANE_HALF_WIDTH, CROSSING_HALF_EXTENT);
    [
        Rect { min: [-e, -e], max: [-l, -l] },
        Rect { min: [l, -e], max: [e, -l] },
        Rect { min: [-e, l], max: [-l, e] },
        Rect { min: [l, l], max: [e, e] },
    ]
}

/// Pairwise disk separation plus disk-block clearance for however many robots
/// the state holds (two coordinates each).
#[derive(Debug, Clone)]
pub struct DiskCrossing {
    pub radius: f64,
    pub blocks: Vec<Rect>,
}

impl Constraint for DiskCrossing {
    fn is_valid(&self, x: &State) -> bool {
        let v = x.values();
        let robots = v.len() / 2;
        let min_sep_sq = 4.0 * self.radius * self.radius;
        for i in 0..robots {
            let p = [v[2 * i], v[2 * i + 1]];
            if self.blocks.iter().any(|b| b.distance_to(p) < self.radius) {
                return false;
            }
            for j in (i + 1)..robots {
                let dx = p[0] - v[2 * j];
                let dy = p[1] - v[2 * j + 1];
                if dx * dx + dy * dy < min_sep_sq {
                    return false;
                }
            }
        }
        true
    }
}

/// Start and goal of robot `i` on arm `i mod 4` (west, south, east, north).
/// The goal lies on the opposite arm; both keep to the right-hand side of the
/// direction of travel. East and north robots start closer to the centre, and
/// the second group of four starts further in.
fn crossing_endpoints(i: usize) -> ([f64; 2], [f64; 2]) {
    const DIRS: [[f64; 2]; 4] = [[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    const RADIAL: [[f64; 4]; 2] = [[4.2, 4.2, 3.2, 3.2], [2.2, 2.2, 1.3, 1.3]];
    const LATERAL: f64 = 0.6;
    let arm = i % 4;
    let d = DIRS[arm];
    // travel direction is -d; its right-hand side is (-d.y, d.x)
    let right = [-d[1], d[0]];
    let radial = RADIAL[i / 4][arm];
    let at = |r: f64| [r * d[0] + LATERAL * right[0], r * d[1] + LATERAL * right[1]];
    (at(radial), at(-radial))
}

/// `m` disk robots crossing to the opposite arm of a crossroad.
pub fn disk_crossing_problem(m: usize) -> Result<PlanningProblem, ProblemError> {
    if !(2..=8).contains(&m) {
        return Err(ProblemError::Argument(format!(
            "disk crossing supports 2..=8 robots, got {m}"
        )));
    }
    let base_robots = m - m.div_ceil(2);
    let mut specs = vec![ProjectionSpec::Identity; base_robots];
    specs.extend(std::iter::repeat_n(ProjectionSpec::Drop, m - base_robots));
    EnvironmentSpec::DiskCrossing { robots: m }.build_with(Some(&[specs]))
}

// ---------------------------------------------------------------------------
// wall with a gap

pub const WALL_ROBOT_RADIUS: f64 = 0.5;
pub const WALL_X: f64 = 5.0;
pub const WALL_HALF_THICKNESS: f64 = 0.1;
pub const WALL_GAP_CENTER: f64 = 5.0;
pub const WALL_START: [f64; 2] = [1.0, 4.0];
pub const WALL_GOAL: [f64; 2] = [9.0, 6.0];

pub fn wall_rects(gap_width: f64) -> [Rect; 2] {
    let half = 0.5 * gap_width;
    [
        Rect {
            min: [WALL_X - WALL_HALF_THICKNESS, 0.0],
            max: [WALL_X + WALL_HALF_THICKNESS, WALL_GAP_CENTER - half],
        },
        Rect {
            min: [WALL_X - WALL_HALF_THICKNESS, WALL_GAP_CENTER + half],
            max: [WALL_X + WALL_HALF_THICKNESS, 10.0],
        },
    ]
}

#[derive(Debug, Clone)]
pub struct WallWithGap {
    pub radius: f64,
    pub walls: [Rect; 2],
}

impl Constraint for WallWithGap {
    fn is_valid(&self, x: &State) -> bool {
        let p = [x[0], x[1]];
        self.walls.iter().all(|w| w.distance_to(p) >= self.radius)
    }
}

/// Length of the straight start-goal segment if it clears the wall, which
/// then is the optimal path cost.
pub fn wall_gap_optimal_cost(gap_width: f64) -> Option<f64> {
    let clear = wall_rects(gap_width)
        .iter()
        .all(|w| w.segment_distance(WALL_START, WALL_GOAL) >= WALL_ROBOT_RADIUS);
    clear.then(|| {
        let dx = WALL_GOAL[0] - WALL_START[0];
        let dy = WALL_GOAL[1] - WALL_START[1];
        (dx * dx + dy * dy).sqrt()
    })
}

/// One disk in `[0,10]^2` crossing a wall through a single gap. The base drops
/// the vertical coordinate and ignores the wall.
pub fn wall_gap_problem(gap_width: f64) -> Result<PlanningProblem, ProblemError> {
    if !(gap_width >= 0.0) {
        return Err(ProblemError::Argument(format!(
            "gap width must be nonnegative, got {gap_width}"
        )));
    }
    EnvironmentSpec::WallGap { gap_width }.build_with(Some(&[vec![ProjectionSpec::RnPrefix(1)]]))
}

// ---------------------------------------------------------------------------
// named environments

/// A shipped environment addressed by name and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "environment", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Hypercube { n: usize },
    DiskCrossing { robots: usize },
    WallGap { gap_width: f64 },
}

impl EnvironmentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentSpec::Hypercube { .. } => "hypercube",
            EnvironmentSpec::DiskCrossing { .. } => "disk_crossing",
            EnvironmentSpec::WallGap { .. } => "wall_gap",
        }
    }

    /// Short label such as `hypercube(100)`.
    pub fn label(&self) -> String {
        match self {
            EnvironmentSpec::Hypercube { n } => format!("hypercube({n})"),
            EnvironmentSpec::DiskCrossing { robots } => format!("disk_crossing({robots})"),
            EnvironmentSpec::WallGap { gap_width } => format!("wall_gap({gap_width})"),
        }
    }

    /// Builds the problem with its default bundle sequence.
    pub fn build(&self) -> Result<PlanningProblem, ProblemError> {
        match *self {
            EnvironmentSpec::Hypercube { n } => hypercube_problem(n),
            EnvironmentSpec::DiskCrossing { robots } => disk_crossing_problem(robots),
            EnvironmentSpec::WallGap { gap_width } => wall_gap_problem(gap_width),
        }
    }

    fn top_space(&self) -> Result<StateSpace, ProblemError> {
        Ok(match *self {
            EnvironmentSpec::Hypercube { n } => StateSpace::cube(n, 0.0, 1.0)?,
            EnvironmentSpec::DiskCrossing { robots } => StateSpace::new(
                (0..robots)
                    .map(|_| Component::cube(2, -CROSSING_HALF_EXTENT, CROSSING_HALF_EXTENT))
                    .collect(),
            )?,
            EnvironmentSpec::WallGap { .. } => StateSpace::cube(2, 0.0, 10.0)?,
        })
    }

    /// Constraint for a level that keeps the listed full-space coordinates.
    fn level_constraint(&self, coords: &[usize]) -> Result<Arc<dyn Constraint>, ProblemError> {
        Ok(match *self {
            EnvironmentSpec::Hypercube { .. } => Arc::new(HypercubeCorridors {
                eps: HYPERCUBE_CORRIDOR,
            }),
            EnvironmentSpec::DiskCrossing { .. } => {
                let whole_robots = coords.chunks(2).all(|c| c.len() == 2 && c[0] % 2 == 0 && c[1] == c[0] + 1);
                if !whole_robots {
                    return Err(ProblemError::Argument(
                        "disk crossing levels must keep whole robots".into(),
                    ));
                }
                Arc::new(DiskCrossing {
                    radius: DISK_RADIUS,
                    blocks: crossing_blocks().to_vec(),
                })
            }
            EnvironmentSpec::WallGap { gap_width } => {
                if coords == [0, 1] {
                    Arc::new(WallWithGap {
                        radius: WALL_ROBOT_RADIUS,
                        walls: wall_rects(gap_width),
                    })
                } else {
                    Arc::new(AlwaysValid)
                }
            }
        })
    }

    fn endpoints(&self) -> (State, GoalRegion) {
        match *self {
            EnvironmentSpec::Hypercube { n } => (
                State::new(vec![0.0; n]),
                GoalRegion::new(State::new(vec![1.0; n]), 0.0),
            ),
            EnvironmentSpec::DiskCrossing { robots } => {
                let mut start = Vec::with_capacity(2 * robots);
                let mut goal = Vec::with_capacity(2 * robots);
                for i in 0..robots {
                    let (s, g) = crossing_endpoints(i);
                    start.extend(s);
                    goal.extend(g);
                }
                (State::new(start), GoalRegion::new(State::new(goal), 0.0))
            }
            EnvironmentSpec::WallGap { .. } => (
                State::new(WALL_START.to_vec()),
                GoalRegion::new(State::new(WALL_GOAL.to_vec()), 0.0),
            ),
        }
    }

    /// Builds the problem with an explicit projection list (top-down). `None`
    /// uses the default sequence.
    pub fn build_with(
        &self,
        projections: Option<&[Vec<ProjectionSpec>]>,
    ) -> Result<PlanningProblem, ProblemError> {
        let Some(projections) = projections else {
            return self.build();
        };
        match *self {
            EnvironmentSpec::Hypercube { n } if n < 2 => {
                return Err(ProblemError::Argument(format!("hypercube needs n >= 2, got {n}")))
            }
            EnvironmentSpec::DiskCrossing { robots } if !(2..=8).contains(&robots) => {
                return Err(ProblemError::Argument(format!(
                    "disk crossing supports 2..=8 robots, got {robots}"
                )))
            }
            EnvironmentSpec::WallGap { gap_width } if !(gap_width >= 0.0) => {
                return Err(ProblemError::Argument(format!(
                    "gap width must be nonnegative, got {gap_width}"
                )))
            }
            _ => {}
        }
        let sequence = BundleSequence::from_projections(self.top_space()?, projections)?;
        let constraints = (0..sequence.len())
            .map(|k| self.level_constraint(sequence.coord_map(k)))
            .collect::<Result<Vec<_>, _>>()?;
        let (start, goal) = self.endpoints();
        PlanningProblem::new(self.label(), sequence, constraints, start, goal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::check_admissible;

    #[test]
    fn corridor_rule() {
        assert!(hypercube_valid(&[0.0, 0.0, 0.0], 0.1));
        assert!(hypercube_valid(&[1.0, 0.5, 0.0], 0.1));
        assert!(!hypercube_valid(&[0.5, 0.5, 0.0], 0.1));
        assert!(hypercube_valid(&[0.1, 0.9, 0.5], 0.1));
    }

    #[test]
    fn hypercube_levels() {
        let p = hypercube_problem(100).unwrap();
        assert_eq!(p.levels(), 99);
        assert_eq!(p.sequence().bundles().len(), 98);
        assert_eq!(p.sequence().space(0).dim(), 2);
        assert_eq!(p.sequence().top().dim(), 100);
        assert!(matches!(hypercube_problem(1), Err(ProblemError::Argument(_))));
    }

    #[test]
    fn hypercube_axis_walk_is_feasible() {
        let n = 6;
        let p = hypercube_problem(n).unwrap();
        let space = p.sequence().top();
        let c = p.constraint(n - 2);
        let mut corner = vec![0.0; n];
        for i in 0..n {
            let from = State::new(corner.clone());
            corner[i] = 1.0;
            let to = State::new(corner.clone());
            for step in 0..=1000 {
                let x = space.interpolate(&from, &to, step as f64 / 1000.0).unwrap();
                assert!(c.is_valid(&x));
            }
        }
    }

    #[test]
    fn shipped_bundles_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for p in [
            hypercube_problem(3).unwrap(),
            hypercube_problem(12).unwrap(),
            disk_crossing_problem(4).unwrap(),
            wall_gap_problem(1.2).unwrap(),
            wall_gap_problem(0.8).unwrap(),
        ] {
            for k in 1..p.levels() {
                let v = check_admissible(
                    p.sequence().bundle(k).unwrap(),
                    p.constraint(k).as_ref(),
                    p.constraint(k - 1).as_ref(),
                    10_000,
                    &mut rng,
                );
                assert_eq!(v, 0, "{} level {k}", p.name());
            }
        }
    }

    #[test]
    fn disk_rules() {
        let c = DiskCrossing {
            radius: DISK_RADIUS,
            blocks: crossing_blocks().to_vec(),
        };
        assert!(!c.is_valid(&State::new(vec![-3.0, -0.4, -3.0, 0.39])));
        assert!(c.is_valid(&State::new(vec![-3.0, -0.4, -3.0, 0.41])));
        assert!(c.is_valid(&State::new(vec![0.0, 0.0])));
        assert!(c.is_valid(&State::new(vec![-4.0, 0.0])));
        assert!(!c.is_valid(&State::new(vec![-4.0, 1.2])));
    }

    #[test]
    fn disk_problems_build() {
        for m in 2..=8 {
            let p = disk_crossing_problem(m).unwrap();
            assert_eq!(p.levels(), 2);
            assert_eq!(p.sequence().space(0).dim(), 2 * (m - m.div_ceil(2)));
        }
        assert!(disk_crossing_problem(1).is_err());
        assert!(disk_crossing_problem(9).is_err());
    }

    #[test]
    fn wall_gap_geometry() {
        let open = wall_gap_problem(1.2).unwrap();
        assert!(open.constraint(1).is_valid(open.start()));
        let expected = (64.0f64 + 4.0).sqrt();
        assert!((wall_gap_optimal_cost(1.2).unwrap() - expected).abs() < 1e-12);
        assert!(wall_gap_optimal_cost(0.8).is_none());

        let closed = wall_gap_problem(0.8).unwrap();
        let c = closed.constraint(1);
        for i in 0..=10_000 {
            let y = 10.0 * i as f64 / 10_000.0;
            assert!(!c.is_valid(&State::new(vec![WALL_X, y])));
        }
        // the base ignores the wall
        assert!(closed.constraint(0).is_valid(&State::new(vec![WALL_X])));
    }

    #[test]
    fn inadmissible_fixture_rejected() {
        let top = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let seq =
            BundleSequence::from_projections(top, &[vec![ProjectionSpec::RnPrefix(1)]]).unwrap();
        let base: Arc<dyn Constraint> = Arc::new(FnConstraint::new(|x: &State| x[0] < 0.4));
        let total: Arc<dyn Constraint> = Arc::new(FnConstraint::new(|x: &State| x[0] < 0.6));
        let err = PlanningProblem::new(
            "fixture",
            seq,
            vec![base, total],
            State::new(vec![0.0, 0.0]),
            GoalRegion::new(State::new(vec![0.1, 1.0]), 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, ProblemError::Inadmissible { level: 1, .. }));
    }

    #[test]
    fn override_must_keep_whole_robots() {
        let spec = EnvironmentSpec::DiskCrossing { robots: 2 };
        let top = spec.top_space().unwrap();
        assert!(top.dim() == 4);
        assert!(spec
            .build_with(Some(&[vec![ProjectionSpec::Identity, ProjectionSpec::Drop]]))
            .is_ok());
        assert!(spec
            .build_with(Some(&[vec![ProjectionSpec::RnPrefix(1), ProjectionSpec::Identity]]))
            .is_err());
    }
}
