//! Evolution cost: mean absolute error plus `1 - pearson`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub mae: f64,
    pub pcc: f64,
    pub total: f64,
}

fn check_pair(u: &[f64], u_hat: &[f64]) -> Result<()> {
    check_len("signal lengths", u.len(), u_hat.len())?;
    if u.is_empty() {
        return Err(Error::Empty("cannot score empty signals"));
    }
    Ok(())
}

pub fn mae(u: &[f64], u_hat: &[f64]) -> Result<f64> {
    check_pair(u, u_hat)?;
    let sum: f64 = u.iter().zip(u_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / u.len() as f64)
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// Sample Pearson correlation. Defined as 0 when either signal is constant,
/// so a silent network gets a finite, neutral score.
pub fn pearson(u: &[f64], u_hat: &[f64]) -> Result<f64> {
    check_pair(u, u_hat)?;
    if is_constant(u) || is_constant(u_hat) {
        return Ok(0.0);
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = u_hat.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in u.iter().zip(u_hat) {
        let (da, db) = (a - mu, b - mv);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let denom = (sxx * syy).sqrt();
    if !(denom > 0.0) || !denom.is_finite() {
        return Ok(0.0);
    }
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

pub fn cost(u: &[f64], u_hat: &[f64]) -> Result<CostBreakdown> {
    let mae = mae(u, u_hat)?;
    let pcc = pearson(u, u_hat)?;
    Ok(CostBreakdown {
        mae,
        pcc,
        total: mae + (1.0 - pcc),
    })
}
