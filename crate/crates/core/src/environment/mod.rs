//! Continuous obstacle environments and their discretization into
//! coverage graphs.

mod discretize;
mod grid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use discretize::{
    build_coverage_graph, continuous_cost, geodesic_distance, grid_sample, grid_sample_with, sample_count,
    vertex_weights, Discretization, DiscretizationSidecar, DEFAULT_FINE_FACTOR,
};
pub use grid::FineGrid;

pub type Point = [f64; 2];

/// Height of the degenerate rectangle used to model a 1-D segment.
pub const SEGMENT_HEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Covariance {
    /// `sigma * I`
    Isotropic(f64),
    Matrix([[f64; 2]; 2]),
}

impl Covariance {
    fn matrix(&self) -> [[f64; 2]; 2] {
        match *self {
            Covariance::Isotropic(s) => [[s, 0.0], [0.0, s]],
            Covariance::Matrix(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: Point,
    pub cov: Covariance,
}

impl Gaussian {
    fn validate(&self) -> Result<()> {
        let [[a, b], [c, d]] = self.cov.matrix();
        let det = a * d - b * c;
        if !(a > 0.0 && d > 0.0 && det > 0.0 && b == c && det.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "covariance {:?} is not symmetric positive definite",
                self.cov
            )));
        }
        if !(self.mean[0].is_finite() && self.mean[1].is_finite()) {
            return Err(Error::InvalidArgument("gaussian mean must be finite".into()));
        }
        Ok(())
    }

    /// Log of the (untruncated) normal density at `p`.
    fn log_density(&self, p: Point) -> f64 {
        let [[a, b], [_, d]] = self.cov.matrix();
        let det = a * d - b * b;
        let (x, y) = (p[0] - self.mean[0], p[1] - self.mean[1]);
        // Inverse of [[a, b], [b, d]] is [[d, -b], [-b, a]] / det.
        let quad = (d * x * x - 2.0 * b * x * y + a * y * y) / det;
        -0.5 * quad - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Point,
    pub cov: Covariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub components: Vec<MixtureComponent>,
}

/// Event density. Gaussians are truncated to the free space and
/// renormalized there.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Density {
    #[default]
    Uniform,
    TruncatedGaussian(Gaussian),
    Mixture(MixtureParams),
}

impl Density {
    fn validate(&self) -> Result<()> {
        match self {
            Density::Uniform => Ok(()),
            Density::TruncatedGaussian(g) => g.validate(),
            Density::Mixture(mix) => {
                if mix.components.is_empty() {
                    return Err(Error::InvalidArgument("mixture has no components".into()));
                }
                for c in &mix.components {
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "mixture weight {} must be positive",
                            c.weight
                        )));
                    }
                    Gaussian {
                        mean: c.mean,
                        cov: c.cov.clone(),
                    }
                    .validate()?;
                }
                Ok(())
            }
        }
    }

    /// Unnormalized log density; only differences matter.
    pub(crate) fn log_density(&self, p: Point) -> f64 {
        match self {
            Density::Uniform => 0.0,
            Density::TruncatedGaussian(g) => g.log_density(p),
            Density::Mixture(mix) => {
                let logs: Vec<f64> = mix
                    .components
                    .iter()
                    .map(|c| {
                        c.weight.ln()
                            + Gaussian {
                                mean: c.mean,
                                cov: c.cov.clone(),
                            }
                            .log_density(p)
                    })
                    .collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
            }
        }
    }
}

/// Axis-aligned rectangle `[0, w] x [0, h]` minus polygonal obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bounds: [f64; 2],
    #[serde(default)]
    pub obstacles: Vec<Vec<Point>>,
    #[serde(default)]
    pub density: Density,
}

impl Environment {
    pub fn new(bounds: [f64; 2], obstacles: Vec<Vec<Point>>, density: Density) -> Result<Self> {
        let env = Environment {
            bounds,
            obstacles,
            density,
        };
        env.validate()?;
        Ok(env)
    }

    /// The unit-length segment `[0, length]` as a degenerate rectangle.
    pub fn segment(length: f64, density: Density) -> Result<Self> {
        Environment::new([length, SEGMENT_HEIGHT], Vec::new(), density)
    }

    pub fn validate(&self) -> Result<()> {
        let [w, h] = self.bounds;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad bounds {:?}", self.bounds)));
        }
        for (k, poly) in self.obstacles.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::InvalidArgument(format!("obstacle {k} has fewer than 3 vertices")));
            }
            for p in poly {
                if !(p[0] >= 0.0 && p[0] <= w && p[1] >= 0.0 && p[1] <= h) {
                    return Err(Error::InvalidArgument(format!(
                        "obstacle {k} vertex {p:?} lies outside the bounds"
                    )));
                }
            }
        }
        self.density.validate()
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        p[0] >= 0.0 && p[0] <= self.bounds[0] && p[1] >= 0.0 && p[1] <= self.bounds[1]
    }

    pub fn is_free(&self, p: Point) -> bool {
        self.in_bounds(p) && !self.obstacles.iter().any(|poly| point_in_polygon(p, poly))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Environment = serde_json::from_str(text)?;
        env.validate()?;
        Ok(env)
    }
}

/// Even-odd crossing test.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > p[1]) != (yj > p[1]) {
            let x_cross = xj + (p[1] - yj) * (xi - xj) / (yi - yj);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Axis-aligned rectangle as a polygon ring.
pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
}
