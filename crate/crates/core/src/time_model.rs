//! Per-topic temporality.
//!
//! Each topic carries a Beta distribution fitted by the method of moments to
//! the timestamps of the tokens assigned to it. At sampling time the fitted
//! parameters are tempered by a per-depth multiplier `delta`: a multiplier
//! above one switches time off at that depth, a multiplier at or below one
//! sharpens the curve and lifts it by a constant floor so that no topic is
//! ever locked out of a time range.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Lower bound applied to the empirical variance before fitting.
pub const VARIANCE_FLOOR: f64 = 1e-4;

/// Value both parameters are clamped to when the moment factor is not positive.
pub const RHO_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub rho1: f64,
    pub rho2: f64,
}

impl BetaParams {
    /// Location of the peak of the tempered density, which does not depend
    /// on the multiplier: `rho1 / (rho1 + rho2)`.
    pub fn mode(&self) -> f64 {
        let sum = self.rho1 + self.rho2;
        if sum > 0.0 {
            self.rho1 / sum
        } else {
            0.5
        }
    }
}

/// Method-of-moments fit of a Beta distribution.
pub fn estimate_beta(mean: f64, variance: f64) -> BetaParams {
    debug_assert!((0.0..=1.0).contains(&mean), "mean {mean} outside [0, 1]");
    let variance = variance.max(VARIANCE_FLOOR);
    let factor = mean * (1.0 - mean) / variance - 1.0;
    if factor <= 0.0 {
        return BetaParams {
            rho1: RHO_FLOOR,
            rho2: RHO_FLOOR,
        };
    }
    BetaParams {
        rho1: (mean * factor).max(RHO_FLOOR),
        rho2: ((1.0 - mean) * factor).max(RHO_FLOOR),
    }
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Density of `Beta(a, b)` at `t`, evaluated in log space.
pub fn beta_pdf(a: f64, b: f64, t: f64) -> f64 {
    BetaKernel::new(a, b).eval(t)
}

/// A Beta density with its normalizer precomputed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaKernel {
    am1: f64,
    bm1: f64,
    ln_norm: f64,
}

impl BetaKernel {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            am1: a - 1.0,
            bm1: b - 1.0,
            ln_norm: ln_beta(a, b),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        // 0 * ln(0) is taken as 0 so that Beta(1, b) is finite at the boundary.
        let left = if self.am1 == 0.0 { 0.0 } else { self.am1 * t.ln() };
        let right = if self.bm1 == 0.0 {
            0.0
        } else {
            self.bm1 * (1.0 - t).ln()
        };
        (left + right - self.ln_norm).exp()
    }
}

/// The tempered, floored Beta density for one topic at one depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModBeta {
    /// Time disabled (`delta > 1`, or an invalid node): density 1 everywhere.
    Flat,
    Tempered(BetaKernel),
}

impl ModBeta {
    pub fn new(params: BetaParams, delta: f64) -> Self {
        if delta > 1.0 {
            return ModBeta::Flat;
        }
        ModBeta::Tempered(BetaKernel::new(
            1.0 + params.rho1 / delta,
            1.0 + params.rho2 / delta,
        ))
    }

    /// Evaluates without a domain check; `t` must lie in `[0, 1]`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ModBeta::Flat => 1.0,
            ModBeta::Tempered(kernel) => (0.5 + kernel.eval(t)) / 1.5,
        }
    }
}

pub fn mod_beta_pdf(params: BetaParams, delta: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TimeDomain(t));
    }
    Ok(ModBeta::new(params, delta).eval(t))
}

/// Per-depth time multipliers. Depth 1 uses the first entry; depths past the
/// end of the list reuse the last one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DepthDeltas(pub Vec<f64>);

impl DepthDeltas {
    /// A multiplier that turns time off at every depth.
    pub fn disabled() -> Self {
        DepthDeltas(vec![2.0])
    }

    pub fn at(&self, depth: usize) -> f64 {
        let last = self.0.len().saturating_sub(1);
        self.0
            .get(depth.saturating_sub(1).min(last))
            .copied()
            .unwrap_or(2.0)
    }

    pub fn time_enabled(&self, depth: usize) -> bool {
        self.at(depth) <= 1.0
    }
}

impl Default for DepthDeltas {
    fn default() -> Self {
        DepthDeltas(vec![2.0, 2.0, 0.2, 0.2])
    }
}

/// Time density of a node given its validity: invalid nodes are uniform.
pub fn node_time_density(valid: bool, params: BetaParams, delta: f64, t: f64) -> f64 {
    if !valid {
        return 1.0;
    }
    ModBeta::new(params, delta).eval(t)
}
