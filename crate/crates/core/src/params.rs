use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::time_model::DepthDeltas;

/// Model and training parameters. Defaults are the reference configuration
/// used for a one-year news corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    /// Concentration of the document-level process.
    pub alpha: f64,
    /// Concentration of the corpus-level process.
    pub beta: f64,
    /// Time multiplier per depth; entries above 1 disable time.
    pub delta: DepthDeltas,
    /// Tendency to descend into sub-topics.
    pub theta: f64,
    /// Strength of the stop/descend Bernoulli prior.
    pub theta_strength: f64,
    /// Minimum size of a valid topic, as a fraction of the corpus tokens.
    #[serde(alias = "cm")]
    pub critical_mass: f64,
    /// Minimum size of a topic allowed to create sub-topics.
    #[serde(alias = "sm")]
    pub splitting_mass: f64,
    /// Full passes an invalid topic survives.
    pub ttl: u32,
    /// Topic-word prior.
    pub phi: f64,
    /// Topic prior in the corpus and document base distributions.
    pub epsilon: f64,
    /// Number of batches to run.
    pub iterations: u64,
    /// Iteration from which no new topic is created.
    #[serde(alias = "stop_growth_iteration")]
    pub sgi: u64,
    pub batch_size: usize,
    /// Optional hard cap on tree depth.
    pub max_depth: Option<usize>,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            alpha: 5e-5,
            beta: 2e-4,
            delta: DepthDeltas::default(),
            theta: 0.25,
            theta_strength: 1.0,
            critical_mass: 5e-4,
            splitting_mass: 5e-3,
            ttl: 2,
            phi: 0.1,
            epsilon: 1.0,
            iterations: 4500,
            sgi: 2000,
            batch_size: 500,
            max_depth: None,
        }
    }
}

impl HyperParams {
    /// Bernoulli prior weights `(theta1, theta2)` for stopping and descending.
    pub fn bernoulli_prior(&self) -> (f64, f64) {
        (
            self.theta * self.theta_strength,
            (1.0 - self.theta) * self.theta_strength,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Params(m.to_string()));
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail("theta must lie in (0, 1)");
        }
        if !(self.theta_strength > 0.0) {
            return fail("theta_strength must be positive");
        }
        if !(self.critical_mass > 0.0 && self.critical_mass <= self.splitting_mass) {
            return fail("need 0 < critical_mass <= splitting_mass");
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("phi", self.phi),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Params(format!("{name} must be positive")));
            }
        }
        if self.delta.0.is_empty() || self.delta.0.iter().any(|d| !(*d > 0.0)) {
            return fail("delta needs at least one positive entry");
        }
        if self.ttl == 0 {
            return fail("ttl must be at least 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive");
        }
        if self.max_depth == Some(0) {
            return fail("max_depth must be at least 1");
        }
        Ok(())
    }

    /// Parses a flat TOML document; missing keys take their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let params: HyperParams = toml::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_defaults() {
        let p = HyperParams::default();
        assert_eq!(p.alpha, 0.00005);
        assert_eq!(p.beta, 0.0002);
        assert_eq!(p.delta.0, vec![2.0, 2.0, 0.2, 0.2]);
        assert_eq!(p.theta, 0.25);
        assert_eq!(p.theta_strength, 1.0);
        assert_eq!(p.critical_mass, 0.0005);
        assert_eq!(p.splitting_mass, 0.005);
        assert_eq!(p.ttl, 2);
        assert_eq!(p.phi, 0.1);
        assert_eq!(p.epsilon, 1.0);
        assert_eq!(p.iterations, 4500);
        assert_eq!(p.sgi, 2000);
        assert_eq!(p.batch_size, 500);
        p.validate().unwrap();
    }

    #[test]
    fn bernoulli_prior_split() {
        assert_eq!(HyperParams::default().bernoulli_prior(), (0.25, 0.75));
    }

    #[test]
    fn partial_toml() {
        let p = HyperParams::from_toml("alpha = 0.1\ndelta = [2.0, 0.5]\ncm = 0.001\n").unwrap();
        assert_eq!(p.alpha, 0.1);
        assert_eq!(p.delta.at(5), 0.5);
        assert_eq!(p.critical_mass, 0.001);
        assert_eq!(p.beta, 0.0002);
        assert!(HyperParams::from_toml("gamma = 1").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        for text in ["theta = 1.0", "theta_strength = 0.0", "critical_mass = 0.1", "alpha = 0.0", "ttl = 0"] {
            assert!(HyperParams::from_toml(text).is_err(), "{text}");
        }
    }
}
