//! Fiber bundles over composite state spaces.
//!
//! A [`Bundle`] splits the flat coordinates of its total space into base
//! coordinates and fiber coordinates according to a per-component
//! [`ProjectionSpec`]. Lifting scatters base and fiber coordinates back into a
//! total-space state, so `project(lift(b, f)) == b` holds exactly.
//!
//! The Möbius strip is the one nontrivial bundle. It lives in the chart
//! `[-pi, pi) x [0, 1]` and identifies `(seam, u)` with `(seam, 1 - u)`;
//! [`interpolate_total_mobius`] follows that identification when a geodesic
//! crosses the seam.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environments::Constraint;
use crate::spaces::{Component, SpaceError, State, StateSpace};

/// Endpoint projection tolerance for sections.
pub const SECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("projection has {specs} entries but the total space has {components} components")]
    SpecCount { specs: usize, components: usize },
    #[error("component {index}: projection {spec:?} does not apply to {component}")]
    IncompatibleSpec {
        index: usize,
        spec: ProjectionSpec,
        component: &'static str,
    },
    #[error("projection keeps every coordinate; nothing to reduce")]
    IdentityProjection,
    #[error("projection removes every coordinate; base would be empty")]
    EmptyBase,
    #[error("level {level}: base space does not match the total space of the level below")]
    BrokenChain { level: usize },
    #[error("section endpoint does not project onto the base path (off by {0:e})")]
    EndpointMismatch(f64),
    #[error("base path has no waypoints")]
    EmptyPath,
}

/// How one component of the total space maps to base and fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionSpec {
    /// Component kept in the base.
    Identity,
    /// Component moved to the fiber.
    Drop,
    /// SE(2): position kept, heading moved to the fiber.
    #[serde(rename = "se2_to_r2")]
    SE2ToR2,
    /// Real vector: first `m` coordinates kept, the rest moved to the fiber.
    RnPrefix(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Twist {
    Trivial,
    Mobius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    total: StateSpace,
    base: StateSpace,
    fiber: StateSpace,
    specs: Vec<ProjectionSpec>,
    twist: Twist,
    base_coords: Vec<usize>,
    fiber_coords: Vec<usize>,
}

impl Bundle {
    pub fn new(total: StateSpace, specs: Vec<ProjectionSpec>) -> Result<Self, BundleError> {
        if specs.len() != total.components().len() {
            return Err(BundleError::SpecCount {
                specs: specs.len(),
                components: total.components().len(),
            });
        }
        let mut base_components = Vec::new();
        let mut base_weights = Vec::new();
        let mut fiber_components = Vec::new();
        let mut fiber_weights = Vec::new();
        let mut base_coords = Vec::new();
        let mut fiber_coords = Vec::new();

        for (index, ((component, spec), &w)) in total
            .components()
            .iter()
            .zip(&specs)
            .zip(total.weights())
            .enumerate()
        {
            let offset = total.component_offset(index);
            let dim = component.dim();
            match (spec, component) {
                (ProjectionSpec::Identity, _) => {
                    base_components.push(component.clone());
                    base_weights.push(w);
                    base_coords.extend(offset..offset + dim);
                }
                (ProjectionSpec::Drop, _) => {
                    fiber_components.push(component.clone());
                    fiber_weights.push(w);
                    fiber_coords.extend(offset..offset + dim);
                }
                (ProjectionSpec::SE2ToR2, Component::SE2 { lower, upper }) => {
                    base_components.push(Component::real_box(lower.to_vec(), upper.to_vec()));
                    base_weights.push(w);
                    base_coords.extend([offset, offset + 1]);
                    fiber_components.push(Component::SO2);
                    fiber_weights.push(w);
                    fiber_coords.push(offset + 2);
                }
                (ProjectionSpec::RnPrefix(m), Component::RealVector { lower, upper })
                    if *m <= lower.len() =>
                {
                    if *m > 0 {
                        base_components
                            .push(Component::real_box(lower[..*m].to_vec(), upper[..*m].to_vec()));
                        base_weights.push(w);
                        base_coords.extend(offset..offset + m);
                    }
                    if *m < lower.len() {
                        fiber_components
                            .push(Component::real_box(lower[*m..].to_vec(), upper[*m..].to_vec()));
                        fiber_weights.push(w);
                        fiber_coords.extend(offset + m..offset + dim);
                    }
                }
                (spec, component) => {
                    return Err(BundleError::IncompatibleSpec {
                        index,
                        spec: *spec,
                        component: match component {
                            Component::RealVector { .. } => "real vector",
                            Component::SO2 => "SO2",
                            Component::SE2 { .. } => "SE2",
                        },
                    })
                }
            }
        }
        if fiber_components.is_empty() {
            return Err(BundleError::IdentityProjection);
        }
        if base_components.is_empty() {
            return Err(BundleError::EmptyBase);
        }
        let base = StateSpace::with_weights(base_components, base_weights)?;
        let fiber = StateSpace::with_weights(fiber_components, fiber_weights)?;
        Ok(Bundle {
            total,
            base,
            fiber,
            specs,
            twist: Twist::Trivial,
            base_coords,
            fiber_coords,
        })
    }

    /// The Möbius strip over the circle with fiber `[0, 1]`.
    pub fn mobius() -> Self {
        let total = StateSpace::new(vec![Component::SO2, Component::cube(1, 0.0, 1.0)])
            .expect("static space");
        let mut b = Bundle::new(total, vec![ProjectionSpec::Identity, ProjectionSpec::Drop])
            .expect("static bundle");
        b.twist = Twist::Mobius;
        b
    }

    pub fn total(&self) -> &StateSpace {
        &self.total
    }

    pub fn base(&self) -> &StateSpace {
        &self.base
    }

    pub fn fiber(&self) -> &StateSpace {
        &self.fiber
    }

    pub fn specs(&self) -> &[ProjectionSpec] {
        &self.specs
    }

    pub fn twist(&self) -> Twist {
        self.twist
    }

    /// Indices of total-space coordinates that survive in the base.
    pub fn base_coords(&self) -> &[usize] {
        &self.base_coords
    }

    pub fn project(&self, x: &State) -> State {
        State::new(self.base_coords.iter().map(|&i| x[i]).collect())
    }

    pub fn project_fiber(&self, x: &State) -> State {
        State::new(self.fiber_coords.iter().map(|&i| x[i]).collect())
    }

    pub fn lift(&self, b: &State, f: &State) -> State {
        let mut values = vec![0.0; self.total.dim()];
        for (&i, v) in self.base_coords.iter().zip(b.values()) {
            values[i] = *v;
        }
        for (&i, v) in self.fiber_coords.iter().zip(f.values()) {
            values[i] = *v;
        }
        State::new(values)
    }
}

/// Geodesic on the Möbius total space, following the seam identification.
///
/// The base angle moves along its shortest arc. If that arc crosses the chart
/// seam, the target fiber coordinate is reflected before the fiber is
/// interpolated linearly, and points past the seam are re-expressed in the
/// chart (angle shifted by `2 pi`, fiber reflected).
pub fn interpolate_total_mobius(x: &State, y: &State, t: f64) -> State {
    use crate::spaces::{angle_difference, normalize_angle};
    use std::f64::consts::PI;

    if t <= 0.0 {
        return x.clone();
    }
    if t >= 1.0 {
        return y.clone();
    }
    let (theta_x, u_x) = (x[0], x[1]);
    let (theta_y, u_y) = (y[0], y[1]);
    let delta = angle_difference(theta_x, theta_y);
    let unwrapped_end = theta_x + delta;
    let crosses = !(-PI..PI).contains(&unwrapped_end);
    let target_u = if crosses { 1.0 - u_y } else { u_y };

    let theta = theta_x + t * delta;
    let u = (1.0 - t) * u_x + t * target_u;
    if (-PI..PI).contains(&theta) {
        State::new(vec![theta, u.clamp(0.0, 1.0)])
    } else {
        State::new(vec![normalize_angle(theta), (1.0 - u).clamp(0.0, 1.0)])
    }
}

/// Counts total-space samples `x` with `phi_base(pi(x)) > phi(x)`, i.e. states
/// that are feasible in the total space but infeasible after projection.
pub fn check_admissible<R: Rng + ?Sized>(
    bundle: &Bundle,
    total_constraint: &dyn Constraint,
    base_constraint: &dyn Constraint,
    samples: usize,
    rng: &mut R,
) -> usize {
    (0..samples)
        .filter(|_| {
            let x = bundle.total.sample_uniform(rng);
            total_constraint.is_valid(&x) && !base_constraint.is_valid(&bundle.project(&x))
        })
        .count()
}

/// Chain `X_K -> X_{K-1} -> ... -> X_1` of bundles.
///
/// Levels are indexed from 0 (the coarsest space `X_1`) to `K - 1` (the full
/// space). `bundle(k)` maps level `k` onto level `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSequence {
    spaces: Vec<StateSpace>,
    bundles: Vec<Bundle>,
    coord_maps: Vec<Vec<usize>>,
}

impl BundleSequence {
    /// Single-level sequence.
    pub fn trivial(space: StateSpace) -> Self {
        let dims = (0..space.dim()).collect();
        BundleSequence {
            spaces: vec![space],
            bundles: Vec::new(),
            coord_maps: vec![dims],
        }
    }

    /// Builds the chain from the full space downwards; `projections[0]` applies
    /// to the full space, `projections[1]` to its base, and so on.
    pub fn from_projections(
        top: StateSpace,
        projections: &[Vec<ProjectionSpec>],
    ) -> Result<Self, BundleError> {
        let mut bundles_top_down = Vec::with_capacity(projections.len());
        let mut current = top.clone();
        for specs in projections {
            let b = Bundle::new(current, specs.clone())?;
            current = b.base.clone();
            bundles_top_down.push(b);
        }
        bundles_top_down.reverse();
        Self::from_bundles(top, bundles_top_down)
    }

    /// `bundles` ordered bottom-up: `bundles[0]` has base `X_1`.
    pub fn from_bundles(top: StateSpace, bundles: Vec<Bundle>) -> Result<Self, BundleError> {
        let mut spaces = Vec::with_capacity(bundles.len() + 1);
        match bundles.first() {
            Some(b) => spaces.push(b.base.clone()),
            None => return Ok(Self::trivial(top)),
        }
        for (i, b) in bundles.iter().enumerate() {
            if b.base != spaces[i] {
                return Err(BundleError::BrokenChain { level: i + 1 });
            }
            spaces.push(b.total.clone());
        }
        if *spaces.last().unwrap() != top {
            return Err(BundleError::BrokenChain {
                level: bundles.len(),
            });
        }
        let mut coord_maps = vec![(0..top.dim()).collect::<Vec<_>>()];
        for b in bundles.iter().rev() {
            let above = coord_maps.last().unwrap();
            coord_maps.push(b.base_coords.iter().map(|&i| above[i]).collect());
        }
        coord_maps.reverse();
        Ok(BundleSequence {
            spaces,
            bundles,
            coord_maps,
        })
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn space(&self, level: usize) -> &StateSpace {
        &self.spaces[level]
    }

    pub fn top(&self) -> &StateSpace {
        self.spaces.last().unwrap()
    }

    /// Bundle whose total space is `level` (absent for level 0).
    pub fn bundle(&self, level: usize) -> Option<&Bundle> {
        level.checked_sub(1).map(|i| &self.bundles[i])
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    /// Which full-space coordinates survive at `level`.
    pub fn coord_map(&self, level: usize) -> &[usize] {
        &self.coord_maps[level]
    }

    /// Projects a full-space state down to `level`.
    pub fn project_to(&self, x: &State, level: usize) -> State {
        State::new(self.coord_maps[level].iter().map(|&i| x[i]).collect())
    }
}

/// Piecewise-geodesic path on one space, parameterized by arc-length fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePath {
    waypoints: Vec<State>,
}

impl StatePath {
    pub fn new(waypoints: Vec<State>) -> Result<Self, BundleError> {
        if waypoints.is_empty() {
            return Err(BundleError::EmptyPath);
        }
        Ok(StatePath { waypoints })
    }

    pub fn waypoints(&self) -> &[State] {
        &self.waypoints
    }

    pub fn into_waypoints(self) -> Vec<State> {
        self.waypoints
    }

    pub fn first(&self) -> &State {
        &self.waypoints[0]
    }

    pub fn last(&self) -> &State {
        self.waypoints.last().unwrap()
    }

    /// Cumulative arc length at each waypoint.
    pub fn cumulative_lengths(&self, space: &StateSpace) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.waypoints.len());
        out.push(0.0);
        for w in self.waypoints.windows(2) {
            acc += space.distance(&w[0], &w[1]);
            out.push(acc);
        }
        out
    }

    pub fn length(&self, space: &StateSpace) -> f64 {
        *self.cumulative_lengths(space).last().unwrap()
    }

    /// Arc-length fraction of every waypoint (all zero for a degenerate path).
    pub fn waypoint_params(&self, space: &StateSpace) -> Vec<f64> {
        let cum = self.cumulative_lengths(space);
        let total = *cum.last().unwrap();
        if total <= 0.0 {
            return vec![0.0; cum.len()];
        }
        let mut params: Vec<f64> = cum.iter().map(|c| c / total).collect();
        *params.last_mut().unwrap() = 1.0;
        params
    }

    /// Point at arc-length fraction `t`, clamped to `[0, 1]`.
    pub fn point_at(&self, space: &StateSpace, t: f64) -> State {
        let cum = self.cumulative_lengths(space);
        self.point_at_with(space, &cum, t)
    }

    pub(crate) fn point_at_with(&self, space: &StateSpace, cum: &[f64], t: f64) -> State {
        let total = *cum.last().unwrap();
        if total <= 0.0 || t <= 0.0 {
            return self.waypoints[0].clone();
        }
        if t >= 1.0 {
            return self.last().clone();
        }
        let target = t * total;
        // first waypoint strictly beyond the target
        let j = cum.partition_point(|c| *c <= target).clamp(1, cum.len() - 1);
        let seg = cum[j] - cum[j - 1];
        let local = if seg > 0.0 {
            ((target - cum[j - 1]) / seg).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut out = State::new(Vec::new());
        space.interpolate_into(&self.waypoints[j - 1], &self.waypoints[j], local, &mut out);
        out
    }

    /// Distance from `x` to the closest point on the polyline, together with
    /// the segment index and local parameter of that point. Ties go to the
    /// later segment.
    pub fn closest_point(&self, space: &StateSpace, x: &State) -> (f64, usize, f64) {
        if self.waypoints.len() == 1 {
            return (space.distance(x, &self.waypoints[0]), 0, 0.0);
        }
        let mut best = (f64::INFINITY, 0, 0.0);
        let mut probe = State::new(Vec::new());
        for (i, w) in self.waypoints.windows(2).enumerate() {
            let (d, s) = closest_on_segment(space, &w[0], &w[1], x, &mut probe);
            if d <= best.0 {
                best = (d, i, s);
            }
        }
        best
    }

    /// Suffix of the path starting at `x`, which should lie on the path.
    pub fn suffix_from(&self, space: &StateSpace, x: &State) -> StatePath {
        let (_, seg, _) = self.closest_point(space, x);
        let mut waypoints = vec![x.clone()];
        let rest = if self.waypoints.len() == 1 { 1 } else { seg + 1 };
        for w in &self.waypoints[rest.min(self.waypoints.len())..] {
            if space.distance(waypoints.last().unwrap(), w) > 0.0 {
                waypoints.push(w.clone());
            }
        }
        StatePath { waypoints }
    }
}

/// Closest point on the geodesic segment `a -> b` to `x`. Uses a golden-section
/// search over the segment parameter seeded with a coarse scan; exact for
/// Euclidean segments up to the search tolerance.
fn closest_on_segment(
    space: &StateSpace,
    a: &State,
    b: &State,
    x: &State,
    probe: &mut State,
) -> (f64, f64) {
    let mut eval = |t: f64| {
        space.interpolate_into(a, b, t, probe);
        space.distance(probe, x)
    };
    const SCAN: usize = 16;
    let mut best_t = 0.0;
    let mut best_d = f64::INFINITY;
    for i in 0..=SCAN {
        let t = i as f64 / SCAN as f64;
        let d = eval(t);
        if d <= best_d {
            best_d = d;
            best_t = t;
        }
    }
    let step = 1.0 / SCAN as f64;
    let (mut lo, mut hi) = ((best_t - step).max(0.0), (best_t + step).min(1.0));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if eval(m1) <= eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let d = eval(t);
    if d < best_d {
        (d, t)
    } else {
        (best_d, best_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    L2,
    /// L1 section moving along the fiber first, then along the base.
    FiberFirst,
    /// L1 section moving along the base first, then along the fiber.
    FiberLast,
}

/// A path section over a base path between two total-space endpoints.
#[derive(Debug, Clone)]
pub struct PathSection<'a> {
    bundle: &'a Bundle,
    base_path: &'a StatePath,
    base_cum: Vec<f64>,
    start: State,
    end: State,
    f1: State,
    f2: State,
    kind: SectionKind,
}

impl<'a> PathSection<'a> {
    pub fn new(
        bundle: &'a Bundle,
        base_path: &'a StatePath,
        x1: &State,
        x2: &State,
        kind: SectionKind,
    ) -> Result<Self, BundleError> {
        let base = &bundle.base;
        let e1 = base.distance(&bundle.project(x1), base_path.first());
        let e2 = base.distance(&bundle.project(x2), base_path.last());
        let err = e1.max(e2);
        if err > SECTION_TOLERANCE {
            return Err(BundleError::EndpointMismatch(err));
        }
        Ok(PathSection {
            bundle,
            base_path,
            base_cum: base_path.cumulative_lengths(base),
            start: x1.clone(),
            end: x2.clone(),
            f1: bundle.project_fiber(x1),
            f2: bundle.project_fiber(x2),
            kind,
        })
    }

    fn base_at(&self, t: f64) -> State {
        self.base_path.point_at_with(&self.bundle.base, &self.base_cum, t)
    }

    fn fiber_at(&self, t: f64) -> State {
        let mut out = State::new(Vec::new());
        self.bundle
            .fiber
            .interpolate_into(&self.f1, &self.f2, t.clamp(0.0, 1.0), &mut out);
        out
    }

    /// Evaluates the section at parameter `t` in `[0, 1]`.
    pub fn point_at(&self, t: f64) -> State {
        let t = t.clamp(0.0, 1.0);
        if t == 0.0 {
            return self.start.clone();
        }
        if t == 1.0 {
            return self.end.clone();
        }
        let lift = |b: State, f: State| self.bundle.lift(&b, &f);
        match self.kind {
            SectionKind::L2 => lift(self.base_at(t), self.fiber_at(t)),
            SectionKind::FiberFirst => {
                if t < 0.5 {
                    lift(self.base_at(0.0), self.fiber_at(2.0 * t))
                } else {
                    lift(self.base_at(2.0 * (t - 0.5)), self.f2.clone())
                }
            }
            SectionKind::FiberLast => {
                if t < 0.5 {
                    lift(self.base_at(2.0 * t), self.f1.clone())
                } else {
                    lift(self.base_at(1.0), self.fiber_at(2.0 * (t - 0.5)))
                }
            }
        }
    }

    /// Waypoint form of the section; consecutive duplicates are dropped.
    pub fn to_path(&self) -> StatePath {
        let b = self.bundle;
        let bases = self.base_path.waypoints();
        let mut pts: Vec<State> = Vec::with_capacity(bases.len() + 2);
        pts.push(self.start.clone());
        match self.kind {
            SectionKind::L2 => {
                let params = self.base_path.waypoint_params(&b.base);
                for (w, t) in bases.iter().zip(params).skip(1) {
                    pts.push(b.lift(w, &self.fiber_at(t)));
                }
            }
            SectionKind::FiberFirst => {
                pts.push(b.lift(&bases[0], &self.f2));
                for w in &bases[1..] {
                    pts.push(b.lift(w, &self.f2));
                }
            }
            SectionKind::FiberLast => {
                for w in &bases[1..] {
                    pts.push(b.lift(w, &self.f1));
                }
            }
        }
        let total = &b.total;
        let mut waypoints: Vec<State> = Vec::with_capacity(pts.len() + 1);
        for p in pts {
            match waypoints.last() {
                Some(last) if total.distance(last, &p) <= SECTION_TOLERANCE => {}
                _ => waypoints.push(p),
            }
        }
        let last = waypoints.last().unwrap();
        if total.distance(last, &self.end) > SECTION_TOLERANCE || waypoints.len() == 1 {
            if *last != self.end {
                waypoints.push(self.end.clone());
            }
        } else {
            *waypoints.last_mut().unwrap() = self.end.clone();
        }
        StatePath { waypoints }
    }
}

pub fn section_l2(
    bundle: &Bundle,
    base_path: &StatePath,
    x1: &State,
    x2: &State,
) -> Result<StatePath, BundleError> {
    Ok(PathSection::new(bundle, base_path, x1, x2, SectionKind::L2)?.to_path())
}

pub fn section_l1(
    bundle: &Bundle,
    base_path: &StatePath,
    x1: &State,
    x2: &State,
    fiber_first: bool,
) -> Result<StatePath, BundleError> {
    let kind = if fiber_first {
        SectionKind::FiberFirst
    } else {
        SectionKind::FiberLast
    };
    Ok(PathSection::new(bundle, base_path, x1, x2, kind)?.to_path())
}
