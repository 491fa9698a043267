//! JSON problem and suite documents.

use std::fmt;

use fiberplan::bench::BenchSuite;
use fiberplan::bundles::ProjectionSpec;
use fiberplan::environments::{EnvironmentSpec, PlanningProblem, ProblemError};
use fiberplan::planners::PlannerConfig;
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

/// Keys that describe the environment rather than the planner.
const ENVIRONMENT_KEYS: [&str; 4] = ["environment", "n", "robots", "gap_width"];

/// Diagnostic pointing at a field path or a source position.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A single planning run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub environment: EnvironmentSpec,
    /// Top-down projection lists replacing the default bundle sequence.
    pub projections: Option<Vec<Vec<ProjectionSpec>>>,
    pub planner: PlannerConfig,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Problem(ProblemConfig),
    Suite(BenchSuite),
}

fn parse_value(text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|e| {
        ConfigError::new(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let location = match (prefix.is_empty(), path == ".") {
            (true, _) => path,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{path}"),
        };
        ConfigError::new(location, e.into_inner().to_string())
    })
}

/// Parses either a problem document or a suite (an object with `experiments`).
pub fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let value = parse_value(text)?;
    if value.get("experiments").is_some() {
        return parse_suite_value(value).map(Document::Suite);
    }
    parse_problem_value(value).map(Document::Problem)
}

#[cfg(test)]
pub fn parse_problem(text: &str) -> Result<ProblemConfig, ConfigError> {
    parse_problem_value(parse_value(text)?)
}

#[cfg(test)]
pub fn parse_suite(text: &str) -> Result<BenchSuite, ConfigError> {
    parse_suite_value(parse_value(text)?)
}

fn parse_suite_value(value: Value) -> Result<BenchSuite, ConfigError> {
    let suite: BenchSuite = typed(value, "")?;
    suite
        .validate()
        .map_err(|e| ConfigError::new("suite", e.to_string()))?;
    Ok(suite)
}

fn parse_problem_value(value: Value) -> Result<ProblemConfig, ConfigError> {
    let Value::Object(map) = value else {
        return Err(ConfigError::new(".", "expected a JSON object"));
    };
    let mut env = Map::new();
    let mut planner = Map::new();
    let mut projections = None;
    let mut output = None;
    for (k, v) in map {
        if ENVIRONMENT_KEYS.contains(&k.as_str()) {
            env.insert(k, v);
        } else if k == "projections" {
            projections = Some(v);
        } else if k == "output" {
            output = Some(v);
        } else {
            planner.insert(k, v);
        }
    }
    let planner: PlannerConfig = typed(Value::Object(planner), "")?;
    planner
        .validate()
        .map_err(|e| ConfigError::new(range_field(&e.to_string()), e.to_string()))?;
    if !env.contains_key("environment") {
        return Err(ConfigError::new("environment", "missing field `environment`"));
    }
    let environment: EnvironmentSpec = typed(Value::Object(env), "")?;
    let projections = projections
        .map(|v| typed(v, "projections"))
        .transpose()?;
    let output = output.map(|v| typed(v, "output")).transpose()?;
    Ok(ProblemConfig {
        environment,
        projections,
        planner,
        output,
    })
}

/// Field path for a range error such as `beta = 1.5 is outside [0, 1]`.
fn range_field(message: &str) -> String {
    let name = message.split(" = ").next().unwrap_or(message);
    match name {
        "beta" | "lambda" => "sampler.path_bias.".to_string() + name,
        "nbh_epsilon" | "nbh_lambda" => "sampler.".to_string() + name,
        n if n.starts_with("importance") => "importance".into(),
        n => n.into(),
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<PlanningProblem, ProblemError> {
        self.environment.build_with(self.projections.as_deref())
    }

    /// Flat JSON form accepted by [`parse_problem`].
    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        let env = serde_json::to_value(&self.environment).expect("environment serializes");
        let planner = serde_json::to_value(&self.planner).expect("planner serializes");
        for part in [env, planner] {
            if let Value::Object(m) = part {
                map.extend(m);
            }
        }
        if let Some(p) = &self.projections {
            map.insert("projections".into(), serde_json::to_value(p).unwrap());
        }
        if let Some(o) = &self.output {
            map.insert("output".into(), Value::String(o.clone()));
        }
        Value::Object(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fiberplan::planners::PlannerName;

    #[test]
    fn minimal_hypercube_config() {
        let c = parse_problem(r#"{"environment":"hypercube","n":100,"planner":"qrrt","seed":7}"#)
            .unwrap();
        assert_eq!(c.environment, EnvironmentSpec::Hypercube { n: 100 });
        assert_eq!(c.planner.planner, PlannerName::Qrrt);
        assert_eq!(c.planner.seed, 7);
        assert_eq!(c.planner.goal_bias, 0.05);
        assert_eq!(c.planner.range_factor, 0.2);
    }

    #[test]
    fn unknown_planner_names_field() {
        let e = parse_problem(r#"{"planner":"xyz"}"#).unwrap_err();
        assert_eq!(e.location, "planner");
        assert!(e.message.contains("xyz"));
    }

    #[test]
    fn beta_out_of_range() {
        let e = parse_problem(
            r#"{"environment":"wall_gap","gap_width":1.2,
                "sampler":{"path_bias":{"mode":"fixed","beta":1.5}}}"#,
        )
        .unwrap_err();
        assert_eq!(e.location, "sampler.path_bias.beta");
        assert!(e.message.contains("1.5"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_problem(r#"{"environment":"hypercube","n":5,"colour":1}"#).unwrap_err();
        assert!(e.message.contains("colour"), "{e}");
        let e = parse_problem(r#"{"environment":"hypercube","n":5,"sampler":{"x":1}}"#)
            .unwrap_err();
        assert_eq!(e.location, "sampler.x");
        let e = parse_problem(r#"{"environment":"moon","n":5}"#).unwrap_err();
        assert!(e.message.contains("moon"));
    }

    #[test]
    fn malformed_json_has_position() {
        let e = parse_problem("{\n \"planner\": }").unwrap_err();
        assert!(e.location.starts_with("line 2"), "{e}");
    }

    #[test]
    fn round_trip() {
        let text = r#"{"environment":"disk_crossing","robots":4,"planner":"qmp_star",
            "projections":[["identity","identity","drop","drop"]],"output":"x.json",
            "importance":{"kind":"uniform"},"anytime":true}"#;
        let a = parse_problem(text).unwrap();
        let b = parse_problem(&a.to_value().to_string()).unwrap();
        assert_eq!(a, b);
        assert!(a.build().is_ok());
    }

    #[test]
    fn documents_dispatch_on_experiments() {
        let d = parse_document(
            r#"{"experiments":[{"problem":{"environment":"hypercube","n":3},
                "planners":[{"planner":"rrt"}],"runs":2,"time_limit":1.0}]}"#,
        )
        .unwrap();
        assert!(matches!(d, Document::Suite(_)));
        let e = parse_suite(r#"{"experiments":[],"extra":1}"#).unwrap_err();
        assert!(e.message.contains("extra"));
        let e = parse_suite(
            r#"{"experiments":[{"problem":{"environment":"hypercube","n":3},
                "planners":[],"runs":0}]}"#,
        )
        .unwrap_err();
        assert!(e.message.contains("runs"));
    }
}
