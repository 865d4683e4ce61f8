use statrs::function::erf::erf;

use super::OracleError;

fn transcendental(lambda: f64) -> f64 {
    lambda * (lambda * lambda).exp() * erf(lambda)
}

/// Root of `λ·e^{λ²}·erf(λ) = St/√π`, bracketed on `[1e-6, 5]` and bisected to machine width.
pub fn neumann_lambda(stefan: f64) -> Result<f64, OracleError> {
    if !(stefan > 0.0 && stefan.is_finite()) {
        return Err(OracleError::Config(format!("Stefan number must be positive, got {stefan}")));
    }
    let target = stefan / std::f64::consts::PI.sqrt();
    let (mut lo, mut hi) = (1e-6, 5.0);
    if transcendental(lo) >= target {
        return Ok(lo);
    }
    if transcendental(hi) <= target {
        return Err(OracleError::Config(format!("Stefan number {stefan} is outside the bracketed range")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if transcendental(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = ((transcendental(lo) - target).abs(), (transcendental(hi) - target).abs());
    Ok(if rl <= rh { lo } else { hi })
}

/// Residual of the transcendental equation at `lambda`.
pub fn neumann_residual(stefan: f64, lambda: f64) -> f64 {
    transcendental(lambda) - stefan / std::f64::consts::PI.sqrt()
}

/// One-phase front position `X(t) = 2λ√(αt)`.
pub fn neumann_analytic(stefan: f64, alpha: f64, t: f64) -> Result<f64, OracleError> {
    if !(alpha > 0.0) || !(t >= 0.0) {
        return Err(OracleError::Config(format!("need α > 0 and t ≥ 0, got α = {alpha}, t = {t}")));
    }
    Ok(2.0 * neumann_lambda(stefan)? * (alpha * t).sqrt())
}
