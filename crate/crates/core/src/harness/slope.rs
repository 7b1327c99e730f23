use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Least-squares slope of `log(regret)` against `log(T)`.
///
/// Non-positive regrets are dropped with a warning. Needs three usable
/// points whose horizons span at least two decades.
pub fn fit_slope(points: &[(usize, f64)]) -> Result<SlopeFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(t, r)| {
            let keep = t > 0 && r > 0.0 && r.is_finite();
            if !keep {
                log::warn!("fit_slope: dropping point T={t}, regret={r}");
            }
            keep
        })
        .map(|&(t, r)| ((t as f64).ln(), r.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::Precondition(format!(
            "slope fit needs at least 3 points with positive regret, got {}",
            usable.len()
        )));
    }
    let (lo, hi) = usable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    if hi - lo < 2.0 * std::f64::consts::LN_10 - 1e-12 {
        return Err(Error::Precondition("horizons must span at least two decades".into()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(SlopeFit {
        exponent,
        r_squared,
        points_used: usable.len(),
    })
}
