use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::families::{Group, LossBreakdown};
use super::lbfgs::{minimize, LbfgsConfig, LbfgsState, StopReason};
use super::loss::{LossFlags, LossProblem};
use super::weights::{WeightMode, WeightState, DEFAULT_TAU};
use super::TrainingError;
use crate::autodiff::{Bindings, Graph, Matrix};
use crate::networks::NetworkTriplet;
use crate::physics::DimensionlessGroups;
use crate::sampling::{CloudFactory, Domain, PointCloud};

/// Optimization schedule settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub n_pre: usize,
    pub pretrain_lr: f64,
    pub pretrain_points: usize,
    pub n_adam: usize,
    pub adam_lr: f64,
    /// Adam epochs between cloud refreshes.
    pub refresh_every: usize,
    pub n_cycles: usize,
    pub n_lbfgs: usize,
    pub lbfgs_memory: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub tol_change: f64,
    pub curvature_eps: f64,
    pub max_line_evals: usize,
    pub tau: f64,
    pub weight_mode: WeightMode,
    pub invert_weight_exponent: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            n_pre: 2000,
            pretrain_lr: 5e-4,
            pretrain_points: 2048,
            n_adam: 20_000,
            adam_lr: 1e-3,
            refresh_every: 500,
            n_cycles: 10,
            n_lbfgs: 500,
            lbfgs_memory: 20,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            tol_change: 1e-8,
            curvature_eps: 1e-10,
            max_line_evals: 25,
            tau: DEFAULT_TAU,
            weight_mode: WeightMode::Group,
            invert_weight_exponent: false,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainingError> {
        let bad = |m: String| Err(TrainingError::Config(m));
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        for (name, lr) in [("pretrain_lr", self.pretrain_lr), ("adam_lr", self.adam_lr)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(format!("{name} must be positive, got {lr}"));
            }
        }
        if self.refresh_every == 0 {
            return bad("refresh_every must be at least 1".into());
        }
        if self.lbfgs_memory == 0 {
            return bad("lbfgs_memory must be at least 1".into());
        }
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return bad(format!("Wolfe constants need 0 < c1 < c2 < 1, got {} and {}", self.wolfe_c1, self.wolfe_c2));
        }
        if !(self.tol_change >= 0.0) || !(self.curvature_eps >= 0.0) {
            return bad("tol_change and curvature_eps must be non-negative".into());
        }
        if self.max_line_evals == 0 {
            return bad("max_line_evals must be at least 1".into());
        }
        Ok(())
    }

    pub fn lbfgs(&self, max_iter: usize) -> LbfgsConfig {
        LbfgsConfig {
            memory: self.lbfgs_memory,
            c1: self.wolfe_c1,
            c2: self.wolfe_c2,
            max_iter,
            tol_change: self.tol_change,
            tol_grad: 0.0,
            max_line_evals: self.max_line_evals,
            curvature_eps: self.curvature_eps,
        }
    }

    pub fn initial_weights(&self) -> WeightState {
        WeightState::new(self.tau, self.weight_mode).with_inverted_exponent(self.invert_weight_exponent)
    }
}

/// One supervised sample for pre-training: interface height and fin temperature at `(x*, t*, P*)`,
/// the latter read at height `y*` inside the fin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainTarget {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub p_star: f64,
    pub s: f64,
    pub tf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pretrain,
    Adam,
    Lbfgs,
    Final,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Pretrain => "pretrain",
            Phase::Adam => "adam",
            Phase::Lbfgs => "lbfgs",
            Phase::Final => "final",
        }
    }
}

/// Group losses, weighted total and weights at one optimizer step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub phase: Phase,
    pub step: usize,
    pub groups: BTreeMap<String, f64>,
    pub weighted_total: f64,
    pub weights: BTreeMap<String, f64>,
}

/// Point counts of a freshly built cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefreshRecord {
    pub phase: Phase,
    pub step: usize,
    pub index: u64,
    pub counts: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub phase: Phase,
    pub cycle: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    pub start_loss: f64,
    pub final_loss: f64,
    pub losses: Vec<f64>,
    pub families: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Pre-training loss before each epoch, then once more after the last.
    pub pretrain: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
    pub refreshes: Vec<RefreshRecord>,
    pub cycles: Vec<CycleRecord>,
}

/// Problem definition shared by every phase.
#[derive(Clone, Debug)]
pub struct TrainContext {
    pub factory: CloudFactory,
    pub groups: DimensionlessGroups,
    pub domain: Domain,
    pub flags: LossFlags,
    pub config: TrainingConfig,
}

fn non_finite(phase: Phase, step: usize, b: &LossBreakdown) -> TrainingError {
    let family = b.first_non_finite().map_or("weighted total".to_string(), |f| f.name().to_string());
    TrainingError::NonFinite { phase: phase.name().to_string(), step, family, values: b.family_map() }
}

/// Fit the interface and fin networks to supervised targets with Adam. The solid network is
/// not part of the objective and keeps its parameters. Returns the loss before every epoch and
/// after the last one.
pub fn pretrain(
    triplet: &mut NetworkTriplet,
    targets: &[PretrainTarget],
    n_pre: usize,
    lr: f64,
) -> Result<Vec<f64>, TrainingError> {
    if targets.is_empty() {
        return Err(TrainingError::Config("pre-training needs at least one target".into()));
    }
    let n = targets.len();
    let mut g = Graph::new();
    let mut b = Bindings::new();
    let leaves = triplet.register(&mut g);
    let mut col = |g: &mut Graph, name: &str, f: fn(&PretrainTarget) -> f64| {
        let id = g.input(name, n, 1);
        b.set(id, Matrix::column(&targets.iter().map(f).collect::<Vec<_>>()));
        id
    };
    let x = col(&mut g, "x", |p| p.x);
    let y = col(&mut g, "y", |p| p.y);
    let t = col(&mut g, "t", |p| p.t);
    let p = col(&mut g, "p", |p| p.p_star);
    let s_target = col(&mut g, "s_target", |p| p.s);
    let tf_target = col(&mut g, "tf_target", |p| p.tf);
    let s = triplet.forward_interface(&mut g, &leaves, x, t, p);
    let fin = triplet.forward_fin(&mut g, &leaves, x, y, t, p);
    let ds = g.sub(s, s_target);
    let dt = g.sub(fin.temperature, tf_target);
    let ls = g.mean_square(ds);
    let lt = g.mean_square(dt);
    let loss = g.add(ls, lt);

    let wrt = leaves.all();
    let mut params = triplet.params().to_vec();
    let mut adam = AdamState::new(params.len(), lr);
    let mut grad = vec![0.0; params.len()];
    let mut losses = Vec::with_capacity(n_pre + 1);
    let mut ws = crate::autodiff::GradWorkspace::default();
    let mut eval = crate::autodiff::Evaluation::default();
    for epoch in 0..=n_pre {
        triplet.bind_values(&params, &leaves, &mut b);
        g.evaluate_into(&b, &mut eval)?;
        let l = eval.scalar(loss);
        if !l.is_finite() {
            return Err(TrainingError::NonFinite {
                phase: Phase::Pretrain.name().into(),
                step: epoch,
                family: "pretrain".into(),
                values: BTreeMap::from([("pretrain".to_string(), l)]),
            });
        }
        losses.push(l);
        if epoch == n_pre {
            break;
        }
        let gs = g.grad_with(&eval, loss, &wrt, &mut ws)?;
        let mut k = 0;
        for m in &gs {
            let v = m.as_slice();
            grad[k..k + v.len()].copy_from_slice(v);
            k += v.len();
        }
        adam.update(&mut params, &grad);
    }
    triplet.set_params(&params);
    Ok(losses)
}

/// Mutable training state threaded through the phases.
pub struct Trainer {
    pub ctx: TrainContext,
    pub triplet: NetworkTriplet,
    pub weights: WeightState,
    pub adam: AdamState,
    pub lbfgs: LbfgsState,
    pub history: TrainingHistory,
    refresh: u64,
    cloud: Option<PointCloud>,
}

impl Trainer {
    pub fn new(triplet: NetworkTriplet, ctx: TrainContext) -> Result<Self, TrainingError> {
        ctx.config.validate()?;
        let n = triplet.layout().total();
        let adam = AdamState::new(n, ctx.config.adam_lr);
        let lbfgs = LbfgsState::new(&ctx.config.lbfgs(ctx.config.n_lbfgs));
        let weights = ctx.config.initial_weights();
        Ok(Trainer { ctx, triplet, weights, adam, lbfgs, history: TrainingHistory::default(), refresh: 0, cloud: None })
    }

    /// The cloud of the most recent refresh.
    pub fn cloud(&self) -> Option<&PointCloud> {
        self.cloud.as_ref()
    }

    pub fn pretrain(&mut self, targets: &[PretrainTarget]) -> Result<(), TrainingError> {
        let cfg = &self.ctx.config;
        self.history.pretrain = pretrain(&mut self.triplet, targets, cfg.n_pre, cfg.pretrain_lr)?;
        Ok(())
    }

    fn rebuild(&mut self, phase: Phase, step: usize) -> Result<LossProblem, TrainingError> {
        let cloud = self.ctx.factory.build(&self.triplet, self.refresh)?;
        self.history.refreshes.push(RefreshRecord { phase, step, index: self.refresh, counts: cloud.counts() });
        self.refresh += 1;
        let problem = LossProblem::new(&self.triplet, &cloud, &self.ctx.groups, &self.ctx.domain, self.ctx.flags)?;
        self.cloud = Some(cloud);
        Ok(problem)
    }

    fn record(&mut self, phase: Phase, step: usize, b: &LossBreakdown, weighted_total: f64) {
        let groups = Group::ALL.iter().map(|g| (g.name().to_string(), b.group(*g))).collect();
        let weights = self.weights.keys().into_iter().map(|k| (k.to_string(), self.weights.weight(k))).collect();
        self.history.epochs.push(EpochRecord { phase, step, groups, weighted_total, weights });
    }

    /// `n_adam` Adam epochs on the weighted total, refreshing the cloud every `refresh_every`
    /// epochs and advancing the loss weights every epoch.
    pub fn adam_phase(&mut self) -> Result<(), TrainingError> {
        let n_adam = self.ctx.config.n_adam;
        let every = self.ctx.config.refresh_every;
        let mut params = self.triplet.params().to_vec();
        let mut grad = vec![0.0; params.len()];
        let mut problem: Option<LossProblem> = None;
        for epoch in 0..n_adam {
            if epoch % every == 0 {
                self.triplet.set_params(&params);
                problem = Some(self.rebuild(Phase::Adam, epoch)?);
            }
            let p = problem.as_mut().expect("built at epoch 0");
            let (b, _) = p.evaluate(&params)?;
            if !b.is_finite() {
                self.triplet.set_params(&params);
                return Err(non_finite(Phase::Adam, epoch, &b));
            }
            let components = self.weights.components(&b);
            self.weights.observe(&components);
            let total = p.reweight(&self.weights.family_multipliers())?;
            p.gradient(&mut grad)?;
            if !total.is_finite() || grad.iter().any(|v| !v.is_finite()) {
                self.triplet.set_params(&params);
                return Err(non_finite(Phase::Adam, epoch, &b));
            }
            self.adam.update(&mut params, &grad);
            self.record(Phase::Adam, epoch, &b, total);
        }
        self.triplet.set_params(&params);
        Ok(())
    }

    fn lbfgs_cycle(&mut self, phase: Phase, cycle: usize) -> Result<(), TrainingError> {
        let mut problem = self.rebuild(phase, cycle)?;
        problem.set_weights(&self.weights);
        let cfg = self.ctx.config.lbfgs(self.ctx.config.n_lbfgs);
        // The objective changes with every refresh, so curvature pairs do not carry over.
        self.lbfgs.clear();
        let mut params = self.triplet.params().to_vec();
        let (_, start_loss) = problem.evaluate(&params)?;
        let mut failure: Option<TrainingError> = None;
        let outcome = minimize(&mut params, &mut self.lbfgs, &cfg, |x, g| match problem.evaluate_with_grad(x, g) {
            Ok((_, total)) => total,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        self.triplet.set_params(&params);
        let (b, total) = problem.evaluate(&params)?;
        if outcome.stop == StopReason::NonFinite || !b.is_finite() {
            return Err(non_finite(phase, cycle, &b));
        }
        let first = self.history.epochs.iter().filter(|e| e.phase == phase).count();
        for (i, &l) in outcome.losses.iter().enumerate() {
            let step = first + i;
            let mut rec = EpochRecord {
                phase,
                step,
                groups: BTreeMap::new(),
                weighted_total: l,
                weights: self.weights.keys().into_iter().map(|k| (k.to_string(), self.weights.weight(k))).collect(),
            };
            if i + 1 == outcome.losses.len() {
                rec.groups = Group::ALL.iter().map(|g| (g.name().to_string(), b.group(*g))).collect();
            }
            self.history.epochs.push(rec);
        }
        self.history.cycles.push(CycleRecord {
            phase,
            cycle,
            iterations: outcome.iterations,
            evaluations: outcome.evaluations,
            stop: outcome.stop,
            start_loss,
            final_loss: total,
            losses: outcome.losses,
            families: b.family_map(),
        });
        Ok(())
    }

    /// `n_cycles` rounds of: refresh the cloud once, then up to `n_lbfgs` L-BFGS iterations on
    /// that fixed cloud with the weights held at their current values.
    pub fn lbfgs_phase(&mut self) -> Result<(), TrainingError> {
        for cycle in 0..self.ctx.config.n_cycles {
            self.lbfgs_cycle(Phase::Lbfgs, cycle)?;
        }
        Ok(())
    }

    /// One more refresh followed by an L-BFGS run.
    pub fn final_refinement(&mut self) -> Result<(), TrainingError> {
        self.lbfgs_cycle(Phase::Final, 0)
    }

    /// Family losses of the current networks on the most recent cloud.
    pub fn current_breakdown(&self) -> Result<LossBreakdown, TrainingError> {
        let cloud = match &self.cloud {
            Some(c) => c.clone(),
            None => self.ctx.factory.build(&self.triplet, self.refresh)?,
        };
        let mut p = LossProblem::new(&self.triplet, &cloud, &self.ctx.groups, &self.ctx.domain, self.ctx.flags)?;
        Ok(p.evaluate(self.triplet.params())?.0)
    }
}

/// Result of a complete training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub triplet: NetworkTriplet,
    pub weights: WeightState,
    pub lbfgs: LbfgsState,
    pub history: TrainingHistory,
    pub final_breakdown: LossBreakdown,
}

/// Pre-training (when targets are given), Adam phase, L-BFGS cycles and final refinement.
pub fn train_full(
    triplet: NetworkTriplet,
    ctx: TrainContext,
    targets: Option<&[PretrainTarget]>,
) -> Result<TrainOutcome, TrainingError> {
    let mut tr = Trainer::new(triplet, ctx)?;
    if let Some(t) = targets {
        tr.pretrain(t)?;
    }
    tr.adam_phase()?;
    tr.lbfgs_phase()?;
    tr.final_refinement()?;
    let final_breakdown = tr.current_breakdown()?;
    Ok(TrainOutcome { triplet: tr.triplet, weights: tr.weights, lbfgs: tr.lbfgs, history: tr.history, final_breakdown })
}
