//! Restriction sampling: drawing total-space states over a base-space graph.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundles::{Bundle, StatePath};
use crate::graph::LevelGraph;
use crate::spaces::{State, StateSpace};

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("cannot sample an empty graph")]
    EmptyGraph,
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// `kappa(t) = (kappa0 - kappa1) exp(-lambda t) + kappa1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySchedule {
    pub kappa0: f64,
    pub kappa1: f64,
    pub lambda: f64,
}

impl DecaySchedule {
    pub fn new(kappa0: f64, kappa1: f64, lambda: f64) -> Self {
        assert!(lambda >= 0.0, "decay rate must be nonnegative");
        DecaySchedule {
            kappa0,
            kappa1,
            lambda,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let w = (-self.lambda * t).exp();
        self.kappa0 * w + self.kappa1 * (1.0 - w)
    }
}

pub fn decay(sched: &DecaySchedule, t: f64) -> f64 {
    sched.value(t)
}

/// How a base state is drawn from the base graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSampling {
    /// Uniform vertex.
    #[serde(rename = "rv")]
    RandomVertex,
    /// Uniform edge, then a uniform point on it.
    #[serde(rename = "re")]
    RandomEdge,
    /// Vertex with probability proportional to `1 / (deg + 1)`.
    #[serde(rename = "rdv")]
    RandomDegreeVertex,
    /// Random-edge draw perturbed inside a growing ball.
    #[serde(rename = "nbh")]
    Neighborhood,
}

impl GraphSampling {
    pub const ALL: [GraphSampling; 4] = [
        GraphSampling::RandomVertex,
        GraphSampling::RandomEdge,
        GraphSampling::RandomDegreeVertex,
        GraphSampling::Neighborhood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphSampling::RandomVertex => "rv",
            GraphSampling::RandomEdge => "re",
            GraphSampling::RandomDegreeVertex => "rdv",
            GraphSampling::Neighborhood => "nbh",
        }
    }
}

/// Bias towards the best base path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PathBias {
    Off,
    Fixed { beta: f64 },
    /// Starts at probability one and decays towards `beta`.
    Decay { beta: f64, lambda: f64 },
}

impl PathBias {
    /// Probability of a path-restriction draw at iteration `t`.
    pub fn probability(&self, t: f64) -> f64 {
        match *self {
            PathBias::Off => 0.0,
            PathBias::Fixed { beta } => beta,
            PathBias::Decay { beta, lambda } => DecaySchedule::new(1.0, beta, lambda).value(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub strategy: GraphSampling,
    pub path_bias: PathBias,
    /// Final neighbourhood radius as a fraction of the base max extent.
    pub nbh_epsilon: f64,
    pub nbh_lambda: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            strategy: GraphSampling::RandomEdge,
            path_bias: PathBias::Decay {
                beta: 0.1,
                lambda: 1e-3,
            },
            nbh_epsilon: 0.1,
            nbh_lambda: 1e-3,
        }
    }
}

fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<(), SamplerError> {
    if ok {
        Ok(())
    } else {
        Err(SamplerError::OutOfRange { name, value, range })
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        match self.path_bias {
            PathBias::Off => {}
            PathBias::Fixed { beta } => {
                check_range("beta", beta, (0.0..=1.0).contains(&beta), "[0, 1]")?
            }
            PathBias::Decay { beta, lambda } => {
                check_range("beta", beta, (0.0..=1.0).contains(&beta), "[0, 1]")?;
                check_range("lambda", lambda, lambda >= 0.0, "[0, inf)")?;
            }
        }
        check_range(
            "nbh_epsilon",
            self.nbh_epsilon,
            self.nbh_epsilon >= 0.0,
            "[0, inf)",
        )?;
        check_range(
            "nbh_lambda",
            self.nbh_lambda,
            self.nbh_lambda >= 0.0,
            "[0, inf)",
        )
    }

    /// Neighbourhood radius at iteration `t` for a base of the given extent.
    pub fn nbh_radius(&self, base_extent: f64, t: f64) -> f64 {
        DecaySchedule::new(0.0, self.nbh_epsilon * base_extent, self.nbh_lambda).value(t)
    }
}

/// Draws a point exactly on `graph`. The neighbourhood strategy draws like
/// random-edge here; its perturbation happens in [`sample_base`].
pub fn sample_graph<R: Rng + ?Sized>(
    strategy: GraphSampling,
    graph: &LevelGraph,
    rng: &mut R,
) -> Result<State, SamplerError> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(SamplerError::EmptyGraph);
    }
    Ok(match strategy {
        GraphSampling::RandomVertex => graph.state(rng.random_range(0..n)).clone(),
        GraphSampling::RandomEdge | GraphSampling::Neighborhood => {
            if graph.edge_count() == 0 {
                return sample_graph(GraphSampling::RandomVertex, graph, rng);
            }
            let (u, v) = graph.edge(rng.random_range(0..graph.edge_count()));
            let t: f64 = rng.random();
            let mut out = State::new(Vec::new());
            graph
                .space()
                .interpolate_into(graph.state(u), graph.state(v), t, &mut out);
            out
        }
        GraphSampling::RandomDegreeVertex => {
            let weights = graph.degree_weights();
            let u = rng.random::<f64>() * weights.total();
            graph.state(weights.find(u)).clone()
        }
    })
}

/// Uniform arc-length point on `path`.
pub fn sample_path_restriction<R: Rng + ?Sized>(
    space: &StateSpace,
    path: &StatePath,
    rng: &mut R,
) -> State {
    if path.waypoints().len() == 1 {
        return path.first().clone();
    }
    path.point_at(space, rng.random())
}

/// Which branch produced a base sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseDraw {
    PathRestriction,
    Graph,
}

/// Uniform point in the metric ball of radius `r` around `x`.
fn perturb<R: Rng + ?Sized>(space: &StateSpace, x: &State, r: f64, rng: &mut R) -> State {
    let d = space.dim();
    if r <= 0.0 || d == 0 {
        return x.clone();
    }
    let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return x.clone();
    }
    let radius = r * rng.random::<f64>().powf(1.0 / d as f64);
    let offset: Vec<f64> = dir
        .iter()
        .zip(space.coord_scales())
        .map(|(v, w)| v / norm * radius / w)
        .collect();
    space.displace(x, &offset)
}

/// Samples the base space: the best path with the configured bias when one
/// exists, the graph otherwise. `t` is the sampling level's iteration count.
pub fn sample_base<R: Rng + ?Sized>(
    graph: &LevelGraph,
    best_path: Option<&StatePath>,
    config: &SamplerConfig,
    t: u64,
    rng: &mut R,
) -> Result<(State, BaseDraw), SamplerError> {
    let t = t as f64;
    if let Some(path) = best_path {
        let p = config.path_bias.probability(t);
        if p > 0.0 && rng.random::<f64>() < p {
            return Ok((
                sample_path_restriction(graph.space(), path, rng),
                BaseDraw::PathRestriction,
            ));
        }
    }
    let x = sample_graph(config.strategy, graph, rng)?;
    if config.strategy == GraphSampling::Neighborhood {
        let r = config.nbh_radius(graph.space().max_extent(), t);
        return Ok((perturb(graph.space(), &x, r, rng), BaseDraw::Graph));
    }
    Ok((x, BaseDraw::Graph))
}

/// Base-side inputs of restriction sampling.
pub struct BaseContext<'a> {
    pub bundle: &'a Bundle,
    pub graph: &'a LevelGraph,
    pub best_path: Option<&'a StatePath>,
    pub config: &'a SamplerConfig,
    pub t: u64,
}

/// Samples `space` (a level's total space). Without a base this is a plain
/// uniform draw; otherwise a base draw lifted with a uniform fiber element.
pub fn restriction_sample<R: Rng + ?Sized>(
    space: &StateSpace,
    base: Option<BaseContext<'_>>,
    rng: &mut R,
) -> Result<State, SamplerError> {
    let Some(ctx) = base else {
        return Ok(space.sample_uniform(rng));
    };
    let (b, _) = sample_base(ctx.graph, ctx.best_path, ctx.config, ctx.t, rng)?;
    let f = ctx.bundle.fiber().sample_uniform(rng);
    Ok(ctx.bundle.lift(&b, &f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::ProjectionSpec;
    use crate::graph::GraphMode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[f64]) -> State {
        State::new(v.to_vec())
    }

    #[test]
    fn decay_values() {
        let d = DecaySchedule::new(1.0, 0.1, 1e-3);
        assert_eq!(d.value(0.0), 1.0);
        assert!((d.value(1000.0) - (0.1 + 0.9 * (-1.0f64).exp())).abs() < 1e-12);
        assert!((d.value(1000.0) - 0.43110).abs() < 1e-5);
        assert!((d.value(1e7) - 0.1).abs() < 1e-6);
    }

    #[test]
    fn graph_strategies_on_tiny_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let space = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let mut g = LevelGraph::new(space, GraphMode::Roadmap, s(&[0.2, 0.7]));
        for strategy in GraphSampling::ALL {
            assert_eq!(sample_graph(strategy, &g, &mut rng).unwrap(), s(&[0.2, 0.7]));
        }
        let v = g.add_vertex(s(&[0.2, 0.7]));
        g.connect(0, v, 0.0);
        let mut g2 = LevelGraph::new(
            StateSpace::cube(2, 0.0, 1.0).unwrap(),
            GraphMode::Tree,
            s(&[0.0, 0.0]),
        );
        g2.add_child(0, s(&[1.0, 0.0]), 1.0);
        for _ in 0..1000 {
            let x = sample_graph(GraphSampling::RandomEdge, &g2, &mut rng).unwrap();
            assert_eq!(x[1], 0.0);
            assert!((0.0..=1.0).contains(&x[0]));
        }
    }

    #[test]
    fn degree_bias_ratio() {
        // star: centre has degree 3, leaves degree 1; compare one leaf to centre
        let space = StateSpace::cube(1, 0.0, 10.0).unwrap();
        let mut g = LevelGraph::new(space, GraphMode::Tree, s(&[0.0]));
        for i in 1..=3 {
            g.add_child(0, s(&[i as f64]), i as f64);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            let x = sample_graph(GraphSampling::RandomDegreeVertex, &g, &mut rng).unwrap();
            counts[x[0] as usize] += 1;
        }
        let ratio = counts[1] as f64 / counts[0] as f64;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn path_restriction_uniform() {
        let space = StateSpace::cube(1, 0.0, 1.0).unwrap();
        let path = StatePath::new(vec![s(&[0.0]), s(&[0.25]), s(&[1.0])]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_path_restriction(&space, &path, &mut rng)[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
        let single = StatePath::new(vec![s(&[0.3])]).unwrap();
        assert_eq!(sample_path_restriction(&space, &single, &mut rng), s(&[0.3]));
    }

    #[test]
    fn decay_bias_starts_on_path() {
        let space = StateSpace::cube(1, 0.0, 1.0).unwrap();
        let g = LevelGraph::new(space, GraphMode::Tree, s(&[0.9]));
        let path = StatePath::new(vec![s(&[0.0]), s(&[0.1])]).unwrap();
        let cfg = SamplerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (x, which) = sample_base(&g, Some(&path), &cfg, 0, &mut rng).unwrap();
            assert_eq!(which, BaseDraw::PathRestriction);
            assert!(x[0] <= 0.1);
        }
        let (x, which) = sample_base(&g, None, &cfg, 0, &mut rng).unwrap();
        assert_eq!((x, which), (s(&[0.9]), BaseDraw::Graph));
    }

    #[test]
    fn neighborhood_radius_schedule() {
        let space = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let g = LevelGraph::new(space, GraphMode::Tree, s(&[0.5, 0.5]));
        let cfg = SamplerConfig {
            strategy: GraphSampling::Neighborhood,
            path_bias: PathBias::Off,
            ..SamplerConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (x, _) = sample_base(&g, None, &cfg, 0, &mut rng).unwrap();
        assert_eq!(x, s(&[0.5, 0.5]));
        let r = cfg.nbh_radius(2f64.sqrt(), 1e9);
        assert!((r - 0.1 * 2f64.sqrt()).abs() < 1e-12);
        for _ in 0..1000 {
            let (y, _) = sample_base(&g, None, &cfg, 1_000_000_000, &mut rng).unwrap();
            let d = g.space().distance(&y, &s(&[0.5, 0.5]));
            assert!(d <= r + 1e-12);
        }
    }

    #[test]
    fn restriction_over_point_graph() {
        let top = StateSpace::cube(2, 0.0, 1.0).unwrap();
        let bundle = Bundle::new(top.clone(), vec![ProjectionSpec::RnPrefix(1)]).unwrap();
        let g = LevelGraph::new(bundle.base().clone(), GraphMode::Tree, s(&[0.3]));
        let cfg = SamplerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in 0..500 {
            let ctx = BaseContext {
                bundle: &bundle,
                graph: &g,
                best_path: None,
                config: &cfg,
                t,
            };
            let x = restriction_sample(&top, Some(ctx), &mut rng).unwrap();
            assert_eq!(x[0], 0.3);
        }
    }

    #[test]
    fn no_base_matches_uniform_stream() {
        let space = StateSpace::cube(3, -1.0, 2.0).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(21);
        let mut b = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            assert_eq!(
                restriction_sample(&space, None, &mut a).unwrap(),
                space.sample_uniform(&mut b)
            );
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SamplerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.path_bias = PathBias::Fixed { beta: 1.5 };
        assert!(matches!(
            cfg.validate(),
            Err(SamplerError::OutOfRange { name: "beta", .. })
        ));
    }
}
