use crate::agents::ValueDistribution;
use crate::error::{Error, Result};
use crate::money::Money;

/// Certainty-equivalent bid under exponential utility `u(x) = 1 − e^(−a·x)`.
///
/// Solves `E[u(V − b)] = u(0)`, i.e. `b = −ln E[e^(−a·V)] / a`. Zero risk
/// aversion gives the mean. Normal values use `μ − a·σ²/2`; uniform values
/// integrate the moment generating function numerically. A negative
/// certainty equivalent bids zero.
pub fn certainty_equivalent_bid(dist: &ValueDistribution, a: f64) -> Result<Money> {
    dist.validate()?;
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::param(
            "risk_coefficient",
            format!("{a} must be finite and >= 0"),
        ));
    }
    let ce = certainty_equivalent(dist, a)?;
    Ok(Money::from_f64_clamped(ce))
}

pub(crate) fn certainty_equivalent(dist: &ValueDistribution, a: f64) -> Result<f64> {
    if a == 0.0 || dist.is_degenerate() {
        return Ok(dist.mean());
    }
    let ce = match *dist {
        ValueDistribution::Point { value } => value,
        ValueDistribution::Normal { mean, sd } => mean - 0.5 * a * sd * sd,
        ValueDistribution::Uniform { lo, hi } => {
            // E[e^(−a(V−lo))] on [0, 1] after shifting keeps the integrand ≤ 1.
            let width = hi - lo;
            let mgf = simpson(|v| (-a * (v - lo)).exp(), lo, hi, intervals(a * width)) / width;
            lo - mgf.ln() / a
        }
    };
    if !ce.is_finite() {
        return Err(Error::param(
            "distribution",
            "moment generating integral is not finite",
        ));
    }
    Ok(ce)
}

fn intervals(decay: f64) -> usize {
    let n = (decay * 64.0).ceil().clamp(1024.0, 4_000_000.0) as usize;
    n + n % 2
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + h * i as f64);
    }
    acc * h / 3.0
}
