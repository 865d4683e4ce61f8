use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub c1: f64,
    pub c2: f64,
    pub max_iter: usize,
    /// Stop when `|ΔL|` between consecutive iterations drops below this.
    pub tol_change: f64,
    /// Stop when the infinity norm of the gradient drops to this.
    pub tol_grad: f64,
    pub max_line_evals: usize,
    /// Curvature pairs with `sᵀy` at or below this are discarded.
    pub curvature_eps: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            memory: 20,
            c1: 1e-4,
            c2: 0.9,
            max_iter: 500,
            tol_change: 1e-8,
            tol_grad: 0.0,
            max_line_evals: 25,
            curvature_eps: 1e-10,
        }
    }
}

/// Limited-memory history of `(s, y)` pairs, oldest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbfgsState {
    pub memory: usize,
    pub c1: f64,
    pub c2: f64,
    pub s: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl LbfgsState {
    pub fn new(cfg: &LbfgsConfig) -> Self {
        LbfgsState { memory: cfg.memory.max(1), c1: cfg.c1, c2: cfg.c2, s: Vec::new(), y: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    /// Store a pair if `sᵀy > eps`; the oldest pair is dropped once the memory is full.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>, eps: f64) -> bool {
        if dot(&s, &y) <= eps {
            return false;
        }
        if self.s.len() == self.memory {
            self.s.remove(0);
            self.y.remove(0);
        }
        self.s.push(s);
        self.y.push(y);
        true
    }

    /// Two-loop recursion: `−H·g` with `H₀ = (sᵀy / yᵀy)·I` from the newest pair.
    pub fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q = grad.to_vec();
        let k = self.s.len();
        let mut alpha = vec![0.0; k];
        let rho: Vec<f64> = (0..k).map(|i| 1.0 / dot(&self.s[i], &self.y[i])).collect();
        for i in (0..k).rev() {
            alpha[i] = rho[i] * dot(&self.s[i], &q);
            axpy(-alpha[i], &self.y[i], &mut q);
        }
        if k > 0 {
            let gamma = dot(&self.s[k - 1], &self.y[k - 1]) / dot(&self.y[k - 1], &self.y[k - 1]);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let beta = rho[i] * dot(&self.y[i], &q);
            axpy(alpha[i] - beta, &self.s[i], &mut q);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    GradientTolerance,
    LossChange,
    LineSearchFailed,
    NonFinite,
}

/// One accepted step along `d` from `x`: `φ(α) = f(x + α d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub alpha: f64,
    pub f_before: f64,
    pub f_after: f64,
    pub slope_before: f64,
    pub slope_after: f64,
    pub fallback: bool,
}

impl StepRecord {
    pub fn satisfies_wolfe(&self, c1: f64, c2: f64) -> bool {
        self.f_after <= self.f_before + c1 * self.alpha * self.slope_before
            && self.slope_after.abs() <= c2 * self.slope_before.abs()
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOutcome {
    pub iterations: usize,
    pub evaluations: usize,
    pub losses: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub stop: StopReason,
    pub final_loss: f64,
    pub grad_inf_norm: f64,
}

struct Trial {
    alpha: f64,
    f: f64,
    slope: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

struct Probe<'a, F> {
    f: &'a mut F,
    x0: &'a [f64],
    d: &'a [f64],
    evals: usize,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Probe<'_, F> {
    fn at(&mut self, alpha: f64) -> Trial {
        let x: Vec<f64> = self.x0.iter().zip(self.d).map(|(a, b)| a + alpha * b).collect();
        let mut g = vec![0.0; x.len()];
        let f = (self.f)(&x, &mut g);
        self.evals += 1;
        Trial { alpha, f, slope: dot(&g, self.d), x, g }
    }
}

/// Minimizer of the cubic through `(a, fa, ga)` and `(b, fb, gb)`, if it lies inside the
/// bracket away from its ends.
fn cubic_min(a: &Trial, b: &Trial) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    let (lo, hi) = if a.alpha < b.alpha { (a.alpha, b.alpha) } else { (b.alpha, a.alpha) };
    let margin = 1e-3 * (hi - lo);
    (t.is_finite() && t > lo + margin && t < hi - margin).then_some(t)
}

fn strong_wolfe<F: FnMut(&[f64], &mut [f64]) -> f64>(
    probe: &mut Probe<'_, F>,
    f0: f64,
    slope0: f64,
    alpha0: f64,
    c1: f64,
    c2: f64,
    max_evals: usize,
) -> Option<Trial> {
    let origin = Trial { alpha: 0.0, f: f0, slope: slope0, x: Vec::new(), g: Vec::new() };
    let mut prev = origin;
    let mut alpha = alpha0;
    let start = probe.evals;
    let armijo = |t: &Trial| t.f <= f0 + c1 * t.alpha * slope0;
    let curvature = |t: &Trial| t.slope.abs() <= -c2 * slope0;

    let (mut lo, mut hi) = loop {
        if probe.evals - start >= max_evals {
            return None;
        }
        let cur = probe.at(alpha);
        if !cur.f.is_finite() {
            // Shrink back toward the last good point.
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if !armijo(&cur) || (prev.alpha > 0.0 && cur.f >= prev.f) {
            break (prev, cur);
        }
        if curvature(&cur) {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            break (cur, prev);
        }
        alpha = 2.0 * cur.alpha;
        prev = cur;
    };

    while probe.evals - start < max_evals {
        let a = cubic_min(&lo, &hi).unwrap_or(0.5 * (lo.alpha + hi.alpha));
        let cur = probe.at(a);
        if !cur.f.is_finite() || !armijo(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
        if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
    }
    None
}

fn backtrack<F: FnMut(&[f64], &mut [f64]) -> f64>(probe: &mut Probe<'_, F>, f0: f64, slope0: f64, alpha0: f64, c1: f64) -> Option<Trial> {
    let mut alpha = alpha0;
    for _ in 0..60 {
        let t = probe.at(alpha);
        if t.f.is_finite() && t.f <= f0 + c1 * alpha * slope0 {
            return Some(t);
        }
        alpha *= 0.5;
    }
    None
}

/// Minimize `f` from `x` (updated in place). `f(x, g)` returns the objective and writes the
/// gradient into `g`. The history in `state` is reused and extended.
pub fn minimize<F>(x: &mut [f64], state: &mut LbfgsState, cfg: &LbfgsConfig, mut f: F) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = f(x, &mut g);
    let mut evaluations = 1;
    let mut losses = Vec::new();
    let mut steps = Vec::new();
    let inf_norm = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    if !fx.is_finite() {
        stop = StopReason::NonFinite;
    } else {
        for _ in 0..cfg.max_iter {
            if inf_norm(&g) <= cfg.tol_grad {
                stop = StopReason::GradientTolerance;
                break;
            }
            let mut d = state.direction(&g);
            let mut slope = dot(&g, &d);
            if !(slope < 0.0) {
                state.clear();
                d = g.iter().map(|v| -v).collect();
                slope = dot(&g, &d);
            }
            let gnorm = dot(&g, &g).sqrt();
            let alpha0 = if state.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

            let mut probe = Probe { f: &mut f, x0: x, d: &d, evals: 0 };
            let found = strong_wolfe(&mut probe, fx, slope, alpha0, cfg.c1, cfg.c2, cfg.max_line_evals);
            evaluations += probe.evals;
            let (trial, fallback, step_dir) = match found {
                Some(t) => (Some(t), false, d),
                None => {
                    let sd: Vec<f64> = g.iter().map(|v| -v).collect();
                    let mut probe = Probe { f: &mut f, x0: x, d: &sd, evals: 0 };
                    let t = backtrack(&mut probe, fx, -gnorm * gnorm, (1.0 / gnorm).min(1.0), cfg.c1);
                    evaluations += probe.evals;
                    (t, true, sd)
                }
            };
            let Some(t) = trial else {
                stop = StopReason::LineSearchFailed;
                break;
            };
            iterations += 1;
            steps.push(StepRecord {
                alpha: t.alpha,
                f_before: fx,
                f_after: t.f,
                slope_before: dot(&g, &step_dir),
                slope_after: dot(&t.g, &step_dir),
                fallback,
            });
            if fallback {
                state.clear();
            }
            let s: Vec<f64> = t.x.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = t.g.iter().zip(&g).map(|(a, b)| a - b).collect();
            state.push(s, y, cfg.curvature_eps);
            let delta = t.f - fx;
            x.copy_from_slice(&t.x);
            g = t.g;
            fx = t.f;
            losses.push(fx);
            if delta.abs() < cfg.tol_change {
                stop = StopReason::LossChange;
                break;
            }
        }
    }
    LbfgsOutcome { iterations, evaluations, losses, steps, stop, final_loss: fx, grad_inf_norm: inf_norm(&g) }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}
