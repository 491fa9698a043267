//! Composite state spaces: real-vector boxes, SO(2), SE(2) and products.
//!
//! A [`State`] is stored as a flat coordinate vector. The owning [`StateSpace`]
//! knows the layout: `RealVector(n)` occupies `n` coordinates, `SO2` one angle,
//! and `SE2` three coordinates `(x, y, theta)`.
//!
//! The compound metric is the weighted L2 combination of the component
//! geodesics. Because every component geodesic is itself an L2 norm over its
//! coordinates (with shortest-arc differences for angles), the squared distance
//! is a sum of per-coordinate terms `(w * delta)^2`. The nearest-neighbour index
//! relies on that separability.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("state has {got} coordinates, space expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component {index}: lower bound {lower} is not below upper bound {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },
    #[error("component {index}: weight {weight} must be positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("component {index}: real vector bounds have mismatched lengths")]
    BoundsLength { index: usize },
    #[error("interpolation parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("space has no components")]
    Empty,
    #[error("{0} components but {1} weights")]
    WeightCount(usize, usize),
}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = (theta + PI).rem_euclid(TWO_PI) - PI;
    if wrapped >= PI {
        -PI
    } else {
        wrapped
    }
}

/// Signed shortest-arc difference `to - from`, in `[-pi, pi)`.
pub fn angle_difference(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    RealVector { lower: Vec<f64>, upper: Vec<f64> },
    SO2,
    SE2 { lower: [f64; 2], upper: [f64; 2] },
}

impl Component {
    pub fn real_box(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Component::RealVector { lower, upper }
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Component::RealVector {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Component::RealVector { lower, .. } => lower.len(),
            Component::SO2 => 1,
            Component::SE2 { .. } => 3,
        }
    }

    /// Geodesic diameter of the component (unweighted).
    pub fn extent(&self) -> f64 {
        match self {
            Component::RealVector { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum::<f64>()
                .sqrt(),
            Component::SO2 => PI,
            Component::SE2 { lower, upper } => {
                let dx = upper[0] - lower[0];
                let dy = upper[1] - lower[1];
                (dx * dx + dy * dy + PI * PI).sqrt()
            }
        }
    }

    fn validate(&self, index: usize) -> Result<(), SpaceError> {
        let check = |lower: &[f64], upper: &[f64]| -> Result<(), SpaceError> {
            if lower.len() != upper.len() {
                return Err(SpaceError::BoundsLength { index });
            }
            for (l, u) in lower.iter().zip(upper) {
                if !(l < u) || !l.is_finite() || !u.is_finite() {
                    return Err(SpaceError::InvalidBounds {
                        index,
                        lower: *l,
                        upper: *u,
                    });
                }
            }
            Ok(())
        };
        match self {
            Component::RealVector { lower, upper } => check(lower, upper),
            Component::SO2 => Ok(()),
            Component::SE2 { lower, upper } => check(lower, upper),
        }
    }
}

/// Per-coordinate layout entry derived from the components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum CoordKind {
    Real { lower: f64, upper: f64 },
    Angle,
}

/// A point in a [`StateSpace`], stored as flat coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State {
    values: Vec<f64>,
}

impl State {
    pub fn new(values: Vec<f64>) -> Self {
        State { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for State {
    fn from(values: Vec<f64>) -> Self {
        State { values }
    }
}

impl std::ops::Index<usize> for State {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Ordered product of components with per-component metric weights.
#[derive(Debug, Clone)]
pub struct StateSpace {
    components: Vec<Component>,
    weights: Vec<f64>,
    coords: Vec<CoordKind>,
    scales: Vec<f64>,
    offsets: Vec<usize>,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components && self.weights == other.weights
    }
}

impl StateSpace {
    /// Unit-weight product space.
    pub fn new(components: Vec<Component>) -> Result<Self, SpaceError> {
        let weights = vec![1.0; components.len()];
        Self::with_weights(components, weights)
    }

    pub fn with_weights(components: Vec<Component>, weights: Vec<f64>) -> Result<Self, SpaceError> {
        if components.is_empty() {
            return Err(SpaceError::Empty);
        }
        if components.len() != weights.len() {
            return Err(SpaceError::WeightCount(components.len(), weights.len()));
        }
        let mut coords = Vec::new();
        let mut scales = Vec::new();
        let mut offsets = Vec::with_capacity(components.len());
        for (i, (c, &w)) in components.iter().zip(&weights).enumerate() {
            c.validate(i)?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(SpaceError::NonPositiveWeight { index: i, weight: w });
            }
            offsets.push(coords.len());
            match c {
                Component::RealVector { lower, upper } => {
                    for (l, u) in lower.iter().zip(upper) {
                        coords.push(CoordKind::Real {
                            lower: *l,
                            upper: *u,
                        });
                    }
                }
                Component::SO2 => coords.push(CoordKind::Angle),
                Component::SE2 { lower, upper } => {
                    coords.push(CoordKind::Real {
                        lower: lower[0],
                        upper: upper[0],
                    });
                    coords.push(CoordKind::Real {
                        lower: lower[1],
                        upper: upper[1],
                    });
                    coords.push(CoordKind::Angle);
                }
            }
            scales.extend(std::iter::repeat_n(w, c.dim()));
        }
        Ok(StateSpace {
            components,
            weights,
            coords,
            scales,
            offsets,
        })
    }

    /// `[0, 1]^dim` style box.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, SpaceError> {
        Self::new(vec![Component::cube(dim, lo, hi)])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Offset of component `i` in the flat coordinate vector.
    pub fn component_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn coord_kinds(&self) -> &[CoordKind] {
        &self.coords
    }

    /// Metric weight applied to each flat coordinate.
    pub(crate) fn coord_scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn check(&self, x: &State) -> Result<(), SpaceError> {
        if x.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Builds a state from raw coordinates, normalizing angles and clamping to bounds.
    pub fn state(&self, values: Vec<f64>) -> Result<State, SpaceError> {
        let mut s = State::new(values);
        self.check(&s)?;
        self.enforce_bounds(&mut s);
        Ok(s)
    }

    pub fn enforce_bounds(&self, x: &mut State) {
        for (v, kind) in x.values.iter_mut().zip(&self.coords) {
            *v = match *kind {
                CoordKind::Real { lower, upper } => v.clamp(lower, upper),
                CoordKind::Angle => normalize_angle(*v),
            };
        }
    }

    pub fn satisfies_bounds(&self, x: &State) -> bool {
        x.len() == self.dim()
            && x.values.iter().zip(&self.coords).all(|(v, kind)| match *kind {
                CoordKind::Real { lower, upper } => *v >= lower && *v <= upper,
                CoordKind::Angle => (-PI..PI).contains(v),
            })
    }

    #[inline]
    pub(crate) fn coord_delta(kind: CoordKind, a: f64, b: f64) -> f64 {
        match kind {
            CoordKind::Real { .. } => b - a,
            CoordKind::Angle => angle_difference(a, b),
        }
    }

    /// Squared compound distance. Panics in debug builds on a size mismatch.
    #[inline]
    pub fn distance_sq(&self, x: &State, y: &State) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        let mut acc = 0.0;
        for ((kind, w), (a, b)) in self
            .coords
            .iter()
            .zip(&self.scales)
            .zip(x.values.iter().zip(&y.values))
        {
            let d = w * Self::coord_delta(*kind, *a, *b);
            acc += d * d;
        }
        acc
    }

    /// Compound geodesic distance `sqrt(sum_i w_i^2 d_i^2)`.
    #[inline]
    pub fn distance(&self, x: &State, y: &State) -> f64 {
        self.distance_sq(x, y).sqrt()
    }

    pub fn checked_distance(&self, x: &State, y: &State) -> Result<f64, SpaceError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.distance(x, y))
    }

    /// Geodesic interpolation written into `out` (no range checks).
    pub fn interpolate_into(&self, x: &State, y: &State, t: f64, out: &mut State) {
        out.values.resize(self.dim(), 0.0);
        if t <= 0.0 {
            out.values.copy_from_slice(&x.values);
            return;
        }
        if t >= 1.0 {
            out.values.copy_from_slice(&y.values);
            return;
        }
        for (i, kind) in self.coords.iter().enumerate() {
            let (a, b) = (x.values[i], y.values[i]);
            out.values[i] = match *kind {
                CoordKind::Real { lower, upper } => ((1.0 - t) * a + t * b).clamp(lower, upper),
                CoordKind::Angle => normalize_angle(a + t * angle_difference(a, b)),
            };
        }
    }

    pub fn interpolate(&self, x: &State, y: &State, t: f64) -> Result<State, SpaceError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(SpaceError::ParameterOutOfRange(t));
        }
        self.check(x)?;
        self.check(y)?;
        let mut out = State::new(Vec::with_capacity(self.dim()));
        self.interpolate_into(x, y, t, &mut out);
        Ok(out)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let values = self
            .coords
            .iter()
            .map(|kind| match *kind {
                CoordKind::Real { lower, upper } => rng.random_range(lower..upper),
                CoordKind::Angle => rng.random_range(-PI..PI),
            })
            .collect();
        State::new(values)
    }

    /// Supremum of [`distance`](Self::distance) over the space.
    pub fn max_extent(&self) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                let e = w * c.extent();
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Translates every coordinate by `offset` (angles wrap, reals clamp).
    pub(crate) fn displace(&self, x: &State, offset: &[f64]) -> State {
        let mut out = x.clone();
        for (v, d) in out.values.iter_mut().zip(offset) {
            *v += d;
        }
        self.enforce_bounds(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn se2_space() -> StateSpace {
        StateSpace::new(vec![Component::SE2 {
            lower: [-10.0, -10.0],
            upper: [10.0, 10.0],
        }])
        .unwrap()
    }

    #[test]
    fn euclidean_distance() {
        let s = StateSpace::cube(2, -10.0, 10.0).unwrap();
        let d = s.distance(&State::new(vec![0.0, 0.0]), &State::new(vec![3.0, 4.0]));
        assert_eq!(d, 5.0);
    }

    #[test]
    fn so2_wraps() {
        let s = StateSpace::new(vec![Component::SO2]).unwrap();
        let a = s.state(vec![0.1]).unwrap();
        let b = s.state(vec![TWO_PI - 0.1]).unwrap();
        assert!((s.distance(&a, &b) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn se2_compound_distance() {
        let s = StateSpace::with_weights(
            vec![Component::SE2 {
                lower: [-10.0, -10.0],
                upper: [10.0, 10.0],
            }],
            vec![1.0],
        )
        .unwrap();
        let a = s.state(vec![0.0, 0.0, 0.0]).unwrap();
        let b = s.state(vec![1.0, 0.0, PI]).unwrap();
        let expected = (1.0 + PI * PI).sqrt();
        assert!((s.distance(&a, &b) - expected).abs() < 1e-12);
        assert!((expected - 3.2969).abs() < 1e-4);
    }

    #[test]
    fn distance_rejects_mismatch() {
        let s = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let err = s
            .checked_distance(&State::new(vec![0.0]), &State::new(vec![0.0, 1.0]))
            .unwrap_err();
        assert_eq!(err, SpaceError::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn interpolation_endpoints_and_linearity() {
        let s = StateSpace::cube(1, 0.0, 10.0).unwrap();
        let x = State::new(vec![0.0]);
        let y = State::new(vec![4.0]);
        assert_eq!(s.interpolate(&x, &y, 0.0).unwrap(), x);
        assert_eq!(s.interpolate(&x, &y, 1.0).unwrap(), y);
        assert_eq!(s.interpolate(&x, &y, 0.25).unwrap().values(), &[1.0]);
        assert_eq!(
            s.interpolate(&x, &y, 1.5).unwrap_err(),
            SpaceError::ParameterOutOfRange(1.5)
        );
    }

    #[test]
    fn so2_interpolation_goes_through_seam() {
        let s = StateSpace::new(vec![Component::SO2]).unwrap();
        let x = State::new(vec![-3.0]);
        let y = State::new(vec![3.0]);
        let mid = s.interpolate(&x, &y, 0.5).unwrap();
        assert!((mid[0] + PI).abs() < 1e-12, "got {}", mid[0]);
        // additivity of distances confirms the short arc was taken
        let total = s.distance(&x, &y);
        assert!((s.distance(&x, &mid) + s.distance(&mid, &y) - total).abs() < 1e-12);
        assert!(total < 0.3);
    }

    #[test]
    fn max_extents() {
        assert!((StateSpace::cube(2, 0.0, 1.0).unwrap().max_extent() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(StateSpace::new(vec![Component::SO2]).unwrap().max_extent(), PI);
        assert!((StateSpace::cube(100, 0.0, 1.0).unwrap().max_extent() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_sampling_mean_and_bounds() {
        let s = StateSpace::cube(1, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = s.sample_uniform(&mut rng);
            assert!(s.satisfies_bounds(&x));
            sum += x[0];
        }
        let mean = sum / n as f64;
        assert!((0.49..=0.51).contains(&mean), "mean {mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = se2_space();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            assert_eq!(s.sample_uniform(&mut a), s.sample_uniform(&mut b));
        }
    }

    #[test]
    fn invalid_construction() {
        assert!(matches!(
            StateSpace::new(vec![Component::real_box(vec![1.0], vec![1.0])]),
            Err(SpaceError::InvalidBounds { .. })
        ));
        assert!(matches!(
            StateSpace::with_weights(vec![Component::SO2], vec![0.0]),
            Err(SpaceError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn angle_normalization_edge() {
        assert_eq!(normalize_angle(PI), -PI);
        assert_eq!(normalize_angle(-PI), -PI);
        let tiny = normalize_angle(-1e-18);
        assert!((-PI..PI).contains(&tiny));
    }
}
