use serde::{Deserialize, Serialize};

use super::TopicStats;
use crate::error::{Error, Result};

/// Pearson correlation (population moments). `None` when either column has
/// zero variance or the lengths differ or are zero.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub size_coherence: Option<f64>,
    pub coherence_time_variance: Option<f64>,
    pub size_time_variance: Option<f64>,
}

pub fn topic_correlations(stats: &[TopicStats]) -> Result<Correlations> {
    if stats.len() < 3 {
        return Err(Error::Params(format!(
            "correlations need at least 3 topics, got {}",
            stats.len()
        )));
    }
    let size: Vec<f64> = stats.iter().map(|s| s.size as f64).collect();
    let coh: Vec<f64> = stats.iter().map(|s| s.coherence).collect();
    let tv: Vec<f64> = stats.iter().map(|s| s.time_variance).collect();
    Ok(Correlations {
        size_coherence: pearson(&size, &coh),
        coherence_time_variance: pearson(&coh, &tv),
        size_time_variance: pearson(&size, &tv),
    })
}
