use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::families::{Family, Group, LossBreakdown};

pub const DEFAULT_TAU: f64 = 0.8;
pub const RATIO_MIN: f64 = 0.1;
pub const RATIO_MAX: f64 = 10.0;
pub const EPS_DIV: f64 = 1e-12;

/// Granularity of the adaptive weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// One weight per group `pde`, `ic`, `bc`, `int`.
    #[default]
    Group,
    /// One weight per residual family.
    Family,
}

/// Moving-average loss weights `w_k ← τ·w_k + (1 − τ)·L_k / L_k^prev`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightState {
    pub tau: f64,
    pub mode: WeightMode,
    pub invert_exponent: bool,
    pub weights: BTreeMap<String, f64>,
    pub previous: Option<BTreeMap<String, f64>>,
}

impl WeightState {
    pub fn new(tau: f64, mode: WeightMode) -> Self {
        assert!(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1), got {tau}");
        WeightState { tau, mode, invert_exponent: false, weights: BTreeMap::new(), previous: None }
    }

    pub fn with_inverted_exponent(mut self, on: bool) -> Self {
        self.invert_exponent = on;
        self
    }

    pub fn keys(&self) -> Vec<&'static str> {
        match self.mode {
            WeightMode::Group => Group::ALL.iter().map(|g| g.name()).collect(),
            WeightMode::Family => Family::ALL.iter().map(|f| f.name()).collect(),
        }
    }

    /// Component losses keyed the same way as the weights.
    pub fn components(&self, breakdown: &LossBreakdown) -> BTreeMap<String, f64> {
        match self.mode {
            WeightMode::Group => breakdown.group_map(),
            WeightMode::Family => breakdown.family_map(),
        }
    }

    /// Weight of a component; components never seen so far weigh 1.
    pub fn weight(&self, key: &str) -> f64 {
        self.weights.get(key).copied().unwrap_or(1.0)
    }

    /// Factor applied to the component loss in the total: `e^{−w}`, or `e^{+w}` when inverted.
    pub fn multiplier(&self, key: &str) -> f64 {
        let w = self.weight(key);
        if self.invert_exponent {
            w.exp()
        } else {
            (-w).exp()
        }
    }

    /// Multiplier applied to each family, indexed by [`Family::index`].
    pub fn family_multipliers(&self) -> [f64; Family::COUNT] {
        Family::ALL.map(|f| match self.mode {
            WeightMode::Group => self.multiplier(f.group().name()),
            WeightMode::Family => self.multiplier(f.name()),
        })
    }

    /// Advance the recurrence with the current component losses. The first call only sets
    /// every weight to 1 and records the losses.
    pub fn observe(&mut self, current: &BTreeMap<String, f64>) {
        match &self.previous {
            None => {
                self.weights = current.keys().map(|k| (k.clone(), 1.0)).collect();
            }
            Some(prev) => {
                for (k, &l) in current {
                    let ratio = match prev.get(k) {
                        Some(&p) => (l / p.max(EPS_DIV)).clamp(RATIO_MIN, RATIO_MAX),
                        None => 1.0,
                    };
                    let w = self.weights.entry(k.clone()).or_insert(1.0);
                    *w = self.tau * *w + (1.0 - self.tau) * ratio;
                }
            }
        }
        self.previous = Some(current.clone());
    }
}

/// Functional form of [`WeightState::observe`].
pub fn update_weights(state: &WeightState, current: &LossBreakdown) -> WeightState {
    let mut next = state.clone();
    let components = next.components(current);
    next.observe(&components);
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: &[f64]) -> Vec<f64> {
        let mut s = WeightState::new(0.8, WeightMode::Group);
        values
            .iter()
            .map(|&l| {
                s.observe(&BTreeMap::from([("pde".to_string(), l)]));
                s.weight("pde")
            })
            .collect()
    }

    #[test]
    fn hand_computed_trace() {
        let w = trace(&[1.0, 0.5, 0.5]);
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 0.9).abs() < 1e-12);
        assert!((w[2] - 0.92).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_and_zero_start() {
        let mut s = WeightState::new(0.8, WeightMode::Group);
        s.previous = Some(BTreeMap::from([("ic".to_string(), 2.0)]));
        s.weights.insert("ic".into(), 1.0);
        s.observe(&BTreeMap::from([("ic".to_string(), 2.0)]));
        assert_eq!(s.weight("ic"), 1.0);

        s.weights.insert("ic".into(), 0.0);
        s.observe(&BTreeMap::from([("ic".to_string(), 2.0)]));
        assert!((s.weight("ic") - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ratio_is_clamped_and_guarded() {
        let w = trace(&[1.0, 1e6]);
        assert!((w[1] - (0.8 + 0.2 * RATIO_MAX)).abs() < 1e-12);
        let w = trace(&[1.0, 0.0]);
        assert!((w[1] - (0.8 + 0.2 * RATIO_MIN)).abs() < 1e-12);
        let w = trace(&[0.0, 0.0]);
        assert!((w[1] - (0.8 + 0.2 * RATIO_MIN)).abs() < 1e-12);
        assert!(w.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn multiplier_sign() {
        let mut s = WeightState::new(0.8, WeightMode::Group);
        s.weights.insert("pde".into(), 2f64.ln());
        assert!((s.multiplier("pde") - 0.5).abs() < 1e-15);
        let s = s.with_inverted_exponent(true);
        assert!((s.multiplier("pde") - 2.0).abs() < 1e-15);
        assert_eq!(s.multiplier("unseen"), (-1f64).exp().recip());
    }

    #[test]
    fn family_mode_keys() {
        let s = WeightState::new(0.8, WeightMode::Family);
        let b = LossBreakdown::default();
        assert_eq!(s.components(&b).len(), Family::COUNT);
        let s = WeightState::new(0.8, WeightMode::Group);
        assert_eq!(s.components(&b).len(), 4);
    }

    #[test]
    #[should_panic]
    fn tau_out_of_range() {
        WeightState::new(1.5, WeightMode::Group);
    }
}
