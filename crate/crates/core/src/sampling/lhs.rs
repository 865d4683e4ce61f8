use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SamplingError;

/// Latin hypercube design: `n` points, one per equal-width stratum in every dimension.
pub fn lhs_generate(n: usize, bounds: &[(f64, f64)], seed: u64) -> Result<Vec<Vec<f64>>, SamplingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lhs_with(n, bounds, &mut rng)
}

pub(crate) fn lhs_with<R: Rng>(n: usize, bounds: &[(f64, f64)], rng: &mut R) -> Result<Vec<Vec<f64>>, SamplingError> {
    if n == 0 {
        return Err(SamplingError::Config("latin hypercube needs at least one point".into()));
    }
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(SamplingError::Config(format!("dimension {d}: invalid bounds [{lo}, {hi}]")));
        }
    }
    let mut pts = vec![vec![0.0; bounds.len()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        strata.shuffle(rng);
        for (i, &k) in strata.iter().enumerate() {
            let u: f64 = rng.gen();
            pts[i][d] = lo + (hi - lo) * (k as f64 + u) / n as f64;
        }
    }
    Ok(pts)
}
