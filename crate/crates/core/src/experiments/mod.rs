//! Scenario files, seeded scenario generation, batch runs over all solvers
//! and report rendering.

mod render;
mod run;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::environment::{
    rectangle, sample_count, Covariance, Density, Environment, FineGrid, Gaussian, Point, DEFAULT_FINE_FACTOR,
};
use crate::error::{Error, Result};
use crate::graph::GraphDocument;
use crate::sensing::SensingFunction;

pub use render::{render_report, report_csv, report_json, scenario_svg, Format, CSV_COLUMNS};
pub use run::{resolve_scenario, run_experiment, run_scenario, Report, ResolvedScenario, ScenarioReport, SolverRow, SolverSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Distributed protocol at the scenario's radius factor.
    Distributed,
    #[serde(rename = "distributed-4")]
    Distributed4,
    #[serde(rename = "distributed-2")]
    Distributed2,
    DescentOwn,
    DescentNeighbor,
    #[serde(rename = "centralized-1")]
    Centralized1,
    #[serde(rename = "centralized-2")]
    Centralized2,
    BruteForce,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Distributed => "distributed",
            SolverKind::Distributed4 => "distributed-4",
            SolverKind::Distributed2 => "distributed-2",
            SolverKind::DescentOwn => "descent-own",
            SolverKind::DescentNeighbor => "descent-neighbor",
            SolverKind::Centralized1 => "centralized-1",
            SolverKind::Centralized2 => "centralized-2",
            SolverKind::BruteForce => "brute-force",
        }
    }
}

fn default_solvers() -> Vec<SolverKind> {
    vec![
        SolverKind::Distributed4,
        SolverKind::Distributed2,
        SolverKind::DescentOwn,
        SolverKind::DescentNeighbor,
        SolverKind::Centralized1,
    ]
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// The `m` samples nearest the bottom-left corner (graph instances:
    /// the `m` vertices nearest vertex 0).
    #[default]
    Corner,
    Random(u64),
    Explicit(Vec<usize>),
}

/// `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Epsilon0 {
    #[default]
    Auto,
    Value(f64),
}

impl Serialize for Epsilon0 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Epsilon0::Auto => s.serialize_str("auto"),
            Epsilon0::Value(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for Epsilon0 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) if s == "auto" => Ok(Epsilon0::Auto),
            Value::Number(n) => n
                .as_f64()
                .map(Epsilon0::Value)
                .ok_or_else(|| serde::de::Error::custom("epsilon0 out of range")),
            other => Err(serde::de::Error::custom(format!(
                "field `epsilon0` must be \"auto\" or a number, got {other}"
            ))),
        }
    }
}

impl std::str::FromStr for Epsilon0 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Epsilon0::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Epsilon0::Value(v)),
            _ => Err(Error::InvalidArgument(format!(
                "epsilon0 must be \"auto\" or a positive number, got {s:?}"
            ))),
        }
    }
}

fn default_cell() -> f64 {
    50.0
}

fn default_factor() -> u32 {
    4
}

fn default_epsilon() -> f64 {
    crate::solvers::DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<Environment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDocument>,
    /// Sample cell size for environment instances.
    #[serde(default = "default_cell")]
    pub h: f64,
    pub m: usize,
    #[serde(default)]
    pub init: InitPolicy,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub epsilon0: Epsilon0,
    #[serde(default = "default_factor")]
    pub radius_factor: u32,
    #[serde(default)]
    pub sensing: SensingFunction,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        match (&self.environment, &self.graph) {
            (Some(env), None) => {
                env.validate().map_err(|e| Error::scenario("environment", e.to_string()))?;
                if !(self.h > 0.0 && self.h.is_finite()) {
                    return Err(Error::scenario("h", format!("cell size must be positive, got {}", self.h)));
                }
            }
            (None, Some(_)) => {}
            _ => {
                return Err(Error::scenario(
                    "environment",
                    "exactly one of `environment` and `graph` must be given",
                ))
            }
        }
        if self.m == 0 {
            return Err(Error::scenario("m", "robot count must be at least 1"));
        }
        if let InitPolicy::Explicit(list) = &self.init {
            if list.len() != self.m {
                return Err(Error::scenario(
                    "init",
                    format!("explicit init lists {} vertices for m = {}", list.len(), self.m),
                ));
            }
        }
        if self.radius_factor != 2 && self.radius_factor != 4 {
            return Err(Error::scenario("radius_factor", format!("must be 2 or 4, got {}", self.radius_factor)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::scenario("epsilon", "must be positive"));
        }
        if let Epsilon0::Value(v) = self.epsilon0 {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::scenario("epsilon0", format!("must be positive, got {v}")));
            }
        }
        if self.solvers.is_empty() {
            return Err(Error::scenario("solvers", "at least one solver is required"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

const REQUIRED: [&str; 2] = ["id", "m"];

/// Parses and validates a scenario document, filling defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::scenario("document", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::scenario("document", "scenario must be a JSON object"))?;
    for field in REQUIRED {
        if !obj.contains_key(field) {
            return Err(Error::scenario(field, "missing required field"));
        }
    }
    let scenario: Scenario = serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("document")
            .to_string();
        Error::Scenario { field, msg }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Ranges for seeded scenario generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTemplate {
    pub id_prefix: String,
    pub bounds: [f64; 2],
    pub h: f64,
    pub m: usize,
    /// Number of random axis-aligned rectangular obstacles.
    pub obstacles: usize,
    /// Obstacle side lengths as fractions of the bounds, `[min, max]`.
    pub obstacle_width: [f64; 2],
    pub obstacle_height: [f64; 2],
    /// Isotropic covariance scale drawn uniformly from this interval.
    pub sigma: [f64; 2],
    /// Fixed Gaussian mean; a free point is drawn when absent.
    pub mean: Option<Point>,
    pub solvers: Vec<SolverKind>,
    pub radius_factor: u32,
    pub epsilon: f64,
    pub max_attempts: usize,
}

impl ScenarioTemplate {
    /// Desk-scale analog of the large-environment experiments: 1500 x 850
    /// at cell size 50 (30 x 17 samples), two rectangular obstacles,
    /// σ ∈ [5e4, 1e5] and random Gaussian means.
    pub fn desk(m: usize) -> Self {
        ScenarioTemplate {
            id_prefix: "desk".into(),
            bounds: [1500.0, 850.0],
            h: 50.0,
            m,
            obstacles: 2,
            obstacle_width: [0.1, 0.25],
            obstacle_height: [0.2, 0.45],
            sigma: [5e4, 1e5],
            mean: None,
            solvers: default_solvers(),
            radius_factor: 4,
            epsilon: crate::solvers::DEFAULT_EPSILON,
            max_attempts: 100,
        }
    }

    /// Obstacle-free variant with the Gaussian centred at `[1400, 800]`.
    pub fn convex(m: usize) -> Self {
        ScenarioTemplate {
            id_prefix: "convex".into(),
            obstacles: 0,
            mean: Some([1400.0, 800.0]),
            ..ScenarioTemplate::desk(m)
        }
    }
}

/// Draws a scenario from `template`; identical seeds give identical
/// scenarios. Obstacle layouts whose free space the fine grid splits, or
/// which leave fewer than `m` samples, are redrawn.
pub fn generate_random_scenario(template: &ScenarioTemplate, seed: u64) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [w, h] = template.bounds;
    let [s_lo, s_hi] = template.sigma;
    if !(s_lo > 0.0 && s_lo <= s_hi) {
        return Err(Error::scenario("sigma", format!("bad interval {:?}", template.sigma)));
    }
    let sigma = if s_lo == s_hi { s_lo } else { rng.gen_range(s_lo..s_hi) };
    let mut last_problem = String::new();
    for _ in 0..template.max_attempts.max(1) {
        let mut obstacles = Vec::with_capacity(template.obstacles);
        for _ in 0..template.obstacles {
            let ow = w * draw(&mut rng, template.obstacle_width);
            let oh = h * draw(&mut rng, template.obstacle_height);
            let x0 = rng.gen_range(0.0..(w - ow).max(f64::MIN_POSITIVE));
            let y0 = rng.gen_range(0.0..(h - oh).max(f64::MIN_POSITIVE));
            obstacles.push(rectangle(x0, y0, x0 + ow, y0 + oh));
        }
        let probe = Environment::new(template.bounds, obstacles.clone(), Density::Uniform)?;
        let mean = match template.mean {
            Some(p) => p,
            None => loop {
                let p = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
                if probe.is_free(p) {
                    break p;
                }
            },
        };
        let nx = ((w / template.h).round() as usize).max(1) * DEFAULT_FINE_FACTOR;
        let ny = ((h / template.h).round() as usize).max(1) * DEFAULT_FINE_FACTOR;
        let components = FineGrid::new(&probe, nx, ny).free_components();
        if components != 1 {
            last_problem = format!("free space splits into {components} components");
            continue;
        }
        let samples = sample_count(&probe, template.h);
        if samples < template.m {
            last_problem = format!("only {samples} free samples for {} robots", template.m);
            continue;
        }
        let density = Density::TruncatedGaussian(Gaussian {
            mean,
            cov: Covariance::Isotropic(sigma),
        });
        let scenario = Scenario {
            id: format!("{}-{seed}", template.id_prefix),
            environment: Some(Environment::new(template.bounds, obstacles, density)?),
            graph: None,
            h: template.h,
            m: template.m,
            init: InitPolicy::Corner,
            solvers: template.solvers.clone(),
            epsilon: template.epsilon,
            epsilon0: Epsilon0::Auto,
            radius_factor: template.radius_factor,
            sensing: SensingFunction::Identity,
            seed,
        };
        scenario.validate()?;
        return Ok(scenario);
    }
    Err(Error::scenario(
        "obstacles",
        format!(
            "no valid layout after {} attempts (last: {last_problem})",
            template.max_attempts
        ),
    ))
}

fn draw(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// `m` distinct vertices drawn with a seeded generator, in draw order.
pub(crate) fn random_init(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::scenario("m", format!("{m} robots but only {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(&mut rng, n, m).into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRAPH_MIN: &str = r#"{
        "id": "tiny",
        "graph": {"vertices": [{"id": 0, "weight": 1}, {"id": 1, "weight": 1}, {"id": 2, "weight": 1}],
                  "edges": [{"u": 0, "v": 1, "cost": 1}, {"u": 1, "v": 2, "cost": 1}],
                  "metric": "closure"},
        "m": 1,
        "init": {"explicit": [0]}
    }"#;

    #[test]
    fn minimal_graph_scenario_gets_defaults() {
        let s = parse_scenario(GRAPH_MIN).unwrap();
        assert_eq!(s.radius_factor, 4);
        assert_eq!(s.epsilon0, Epsilon0::Auto);
        assert_eq!(s.epsilon, 0.01);
        assert_eq!(s.init, InitPolicy::Explicit(vec![0]));
        assert!(s.solvers.contains(&SolverKind::Centralized1));
        let back = parse_scenario(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn environment_scenario_parses() {
        let text = r#"{
            "id": "desk-like",
            "environment": {"bounds": [1500, 850],
                "density": {"kind": "truncated_gaussian", "params": {"mean": [1400, 800], "cov": 50000}}},
            "h": 50, "m": 10, "epsilon0": 0.001, "radius_factor": 2
        }"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.epsilon0, Epsilon0::Value(0.001));
        assert_eq!(s.radius_factor, 2);
        assert_eq!(s.init, InitPolicy::Corner);
    }

    #[test]
    fn missing_m_names_the_field() {
        let text = GRAPH_MIN.replace("\"m\": 1,", "");
        match parse_scenario(&text) {
            Err(Error::Scenario { field, .. }) => assert_eq!(field, "m"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_name_fields() {
        let bad_factor = GRAPH_MIN.replace("\"m\": 1,", "\"m\": 1, \"radius_factor\": 3,");
        assert!(matches!(parse_scenario(&bad_factor), Err(Error::Scenario { field, .. }) if field == "radius_factor"));
        let unknown = GRAPH_MIN.replace("\"m\": 1,", "\"m\": 1, \"robots\": 2,");
        assert!(matches!(parse_scenario(&unknown), Err(Error::Scenario { field, .. }) if field == "robots"));
        let bad_eps = GRAPH_MIN.replace("\"m\": 1,", "\"m\": 1, \"epsilon0\": \"soon\",");
        assert!(parse_scenario(&bad_eps).is_err());
        let short = GRAPH_MIN.replace("[0]", "[0, 1]");
        assert!(matches!(parse_scenario(&short), Err(Error::Scenario { field, .. }) if field == "init"));
    }

    #[test]
    fn epsilon0_from_str() {
        assert_eq!("auto".parse::<Epsilon0>().unwrap(), Epsilon0::Auto);
        assert_eq!("0.5".parse::<Epsilon0>().unwrap(), Epsilon0::Value(0.5));
        assert!("-1".parse::<Epsilon0>().is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let t = ScenarioTemplate::desk(5);
        let a = generate_random_scenario(&t, 11).unwrap();
        let b = generate_random_scenario(&t, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_random_scenario(&t, 12).unwrap());
        assert_eq!(a.environment.as_ref().unwrap().obstacles.len(), 2);
    }

    #[test]
    fn sigma_draws_stay_in_interval() {
        let t = ScenarioTemplate {
            obstacles: 0,
            ..ScenarioTemplate::convex(3)
        };
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..100 {
            let s = generate_random_scenario(&t, seed).unwrap();
            let Some(Density::TruncatedGaussian(g)) = s.environment.map(|e| e.density) else {
                panic!("expected a gaussian");
            };
            let Covariance::Isotropic(sigma) = g.cov else { panic!() };
            assert!((5e4..=1e5).contains(&sigma));
            assert_eq!(g.mean, [1400.0, 800.0]);
            seen.insert(sigma.to_bits());
        }
        assert_eq!(seen.len(), 100);
    }

    #[test]
    fn impossible_layout_is_diagnosed() {
        let t = ScenarioTemplate {
            obstacles: 0,
            max_attempts: 5,
            ..ScenarioTemplate::desk(600)
        };
        match generate_random_scenario(&t, 0) {
            Err(Error::Scenario { field, msg }) => {
                assert_eq!(field, "obstacles");
                assert!(msg.contains("5 attempts"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
