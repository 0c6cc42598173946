//! Training trials, learning-rate sweeps and the linear vs power-law
//! comparison.
//!
//! Every trial draws from its own ChaCha stream whose seed is a pure function
//! of `(master_seed, rule, lr_hidden, trial_index)`, so results do not depend
//! on how many worker threads execute the trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::actor::{ActorConfig, ActorNetwork, UpdateRule};
use crate::critic::{CriticConfig, CriticNetwork};
use crate::env::{reward, Presentation, XorEnv};
use crate::error::{Error, Result};
use crate::num::Float;
use crate::stats::{mean, sample_std, welch_t_test, WelchResult};

/// Hidden-layer learning rates `from, from + step, ..., to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSweep<T = f64> {
    pub from: T,
    pub to: T,
    pub step: T,
}

impl<T: Float> Default for LrSweep<T> {
    fn default() -> Self {
        Self { from: T::lit(0.4), to: T::lit(1.25), step: T::lit(0.05) }
    }
}

impl<T: Float> LrSweep<T> {
    /// Grid values, each rounded to 1e-9 so that e.g. the 15th point of the
    /// default grid is exactly `1.1`.
    pub fn values(&self) -> Vec<T> {
        if !(self.step > T::ZERO) || self.to < self.from {
            return Vec::new();
        }
        let span = ((self.to - self.from) / self.step).as_f64();
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| {
                let v = self.from.as_f64() + k as f64 * self.step.as_f64();
                T::lit((v * 1e9).round() / 1e9)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T = f64> {
    pub actor: ActorConfig<T>,
    pub critic: CriticConfig<T>,
    pub presentation: Presentation,
    pub n_trials: usize,
    pub max_epochs: usize,
    pub goal: T,
    pub filter_keep: T,
    pub filter_gain: T,
    pub filter_init: T,
    pub lr_sweep: LrSweep<T>,
    /// Hidden learning rate used for the linear arm of a comparison.
    pub lr_linear: T,
    /// Hidden learning rate used for the power-law arm of a comparison.
    pub lr_powerlaw: T,
    pub master_seed: u64,
}

impl<T: Float> Default for ExperimentConfig<T> {
    fn default() -> Self {
        Self {
            actor: ActorConfig::default(),
            critic: CriticConfig::default(),
            presentation: Presentation::Uniform,
            n_trials: 50,
            max_epochs: 10_000,
            goal: T::lit(0.975),
            filter_keep: T::lit(0.999),
            filter_gain: T::lit(0.001),
            filter_init: T::HALF,
            lr_sweep: LrSweep::default(),
            lr_linear: T::lit(0.75),
            lr_powerlaw: T::lit(1.1),
            master_seed: 2019,
        }
    }
}

impl<T: Float> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.actor.validate()?;
        self.critic.validate()?;
        let bad = |m: String| Err(Error::InvalidParams(format!("harness: {m}")));
        if self.actor.n_in != 2 || self.critic.n_in != 2 {
            return bad("the XOR task needs n_in = 2 for actor and critic".into());
        }
        if self.actor.n_out != 1 {
            return bad("the XOR task needs a single actor output".into());
        }
        if self.n_trials == 0 || self.max_epochs == 0 {
            return bad("n_trials and max_epochs must be >= 1".into());
        }
        if !(self.goal > T::ZERO && self.goal < T::ONE) {
            return bad(format!("goal must lie in (0, 1), got {}", self.goal));
        }
        let sum = self.filter_keep + self.filter_gain;
        if !(self.filter_keep >= T::ZERO && self.filter_gain > T::ZERO && (sum - T::ONE).abs() <= T::lit(1e-9)) {
            return bad(format!("filter_keep + filter_gain must equal 1, got {sum}"));
        }
        if !(self.filter_init >= T::ZERO && self.filter_init <= T::ONE) {
            return bad("filter_init must lie in [0, 1]".into());
        }
        let s = self.lr_sweep;
        if !(s.from > T::ZERO && s.step > T::ZERO && s.to >= s.from) {
            return bad("lr sweep needs 0 < from <= to and step > 0".into());
        }
        for (name, lr) in [("lr_linear", self.lr_linear), ("lr_powerlaw", self.lr_powerlaw)] {
            if !(lr > T::ZERO && lr.is_finite()) {
                return bad(format!("{name} must be > 0"));
            }
        }
        Ok(())
    }

    /// Configured comparison learning rate for `rule`.
    pub fn lr_for(&self, rule: UpdateRule) -> T {
        match rule {
            UpdateRule::Linear => self.lr_linear,
            UpdateRule::PowerLaw => self.lr_powerlaw,
        }
    }

    pub fn filter(&self) -> RewardFilter<T> {
        RewardFilter { keep: self.filter_keep, gain: self.filter_gain }
    }
}

/// Online exponential filter `f ← keep·f + gain·R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardFilter<T = f64> {
    pub keep: T,
    pub gain: T,
}

impl<T: Float> RewardFilter<T> {
    #[inline]
    pub fn step(&self, prev: T, reward: T) -> T {
        filter_reward(prev, reward, self.keep, self.gain)
    }
}

#[inline]
pub fn filter_reward<T: Float>(prev: T, reward: T, keep: T, gain: T) -> T {
    keep * prev + gain * reward
}

/// Smallest 1-indexed epoch whose end-of-epoch filtered reward reaches `goal`.
pub fn epochs_to_goal<T: Float>(filtered_curve: &[T], goal: T) -> Option<usize> {
    filtered_curve.iter().position(|&v| v >= goal).map(|i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochOutcome<T = f64> {
    pub mean_reward: T,
    pub filter_state: T,
}

/// One batch of presentations followed by one actor update.
///
/// Per presentation: sample input, critic prediction (clamped to [0, 1]),
/// actor action, reward, actor accumulation, critic update, filter step.
pub fn run_epoch<T: Float, R: Rng + ?Sized>(
    actor: &mut ActorNetwork<T>,
    critic: &mut CriticNetwork<T>,
    env: &mut XorEnv,
    rng: &mut R,
    filter: RewardFilter<T>,
    mut filter_state: T,
) -> EpochOutcome<T> {
    let batch = actor.config.batch_size;
    let mut total = T::ZERO;
    for _ in 0..batch {
        let sample = env.next_sample(rng);
        let x = sample.x();
        let fwd = critic.forward(&x);
        let r_bar = fwd.output.max(T::ZERO).min(T::ONE);
        let (y, trace) = actor.forward(&x, r_bar, rng);
        let r = if reward(y, sample.target()) == 1 { T::ONE } else { T::ZERO };
        actor.accumulate_update(&trace, r, r_bar);
        critic.update(&x, &fwd, r);
        filter_state = filter.step(filter_state, r);
        total = total + r;
    }
    actor.apply_batch_update();
    EpochOutcome { mean_reward: total / T::from_usize(batch).unwrap(), filter_state }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult<T = f64> {
    pub trial: usize,
    pub seed: u64,
    pub rule: UpdateRule,
    pub lr_hidden: T,
    pub raw_curve: Vec<T>,
    pub filtered_curve: Vec<T>,
    pub epochs_to_goal: Option<usize>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial's RNG stream.
pub fn trial_seed(master_seed: u64, rule: UpdateRule, lr_hidden: f64, trial_index: usize) -> u64 {
    let rule_tag = match rule {
        UpdateRule::Linear => 0x4c49_4e45u64,
        UpdateRule::PowerLaw => 0x504f_5752u64,
    };
    [rule_tag, lr_hidden.to_bits(), trial_index as u64]
        .iter()
        .fold(splitmix64(master_seed), |h, &w| splitmix64(h ^ w))
}

/// Trains a fresh actor/critic pair until the filtered reward reaches the
/// goal or `max_epochs` have run.
pub fn run_trial<T: Float>(config: &ExperimentConfig<T>, rule: UpdateRule, lr_hidden: T, seed: u64) -> Result<TrialResult<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actor_cfg = ActorConfig { update_rule: rule, ..config.actor }.with_learning_rate(lr_hidden);
    let mut actor = ActorNetwork::init(actor_cfg, &mut rng)?;
    let mut critic = CriticNetwork::init(config.critic, &mut rng)?;
    let mut env = XorEnv::new(config.presentation);
    let filter = config.filter();
    let mut state = config.filter_init;
    let mut raw_curve = Vec::new();
    let mut filtered_curve = Vec::new();
    let mut reached = None;
    for epoch in 1..=config.max_epochs {
        let out = run_epoch(&mut actor, &mut critic, &mut env, &mut rng, filter, state);
        state = out.filter_state;
        raw_curve.push(out.mean_reward);
        filtered_curve.push(state);
        if state >= config.goal {
            reached = Some(epoch);
            break;
        }
    }
    Ok(TrialResult { trial: 0, seed, rule, lr_hidden, raw_curve, filtered_curve, epochs_to_goal: reached })
}

fn with_pool<R: Send>(parallelism: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match parallelism {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs `config.n_trials` independent trials. `parallelism = None` uses the
/// global rayon pool.
pub fn run_trials<T: Float>(
    config: &ExperimentConfig<T>,
    rule: UpdateRule,
    lr_hidden: T,
    parallelism: Option<usize>,
) -> Result<Vec<TrialResult<T>>> {
    config.validate()?;
    let lr_bits = lr_hidden.as_f64();
    let results: Vec<Result<TrialResult<T>>> = with_pool(parallelism, || {
        (0..config.n_trials)
            .into_par_iter()
            .map(|i| {
                let seed = trial_seed(config.master_seed, rule, lr_bits, i);
                run_trial(config, rule, lr_hidden, seed).map(|r| TrialResult { trial: i, ..r })
            })
            .collect()
    })?;
    results.into_iter().collect()
}

/// Epochs-to-goal summary for one rule at one learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary<T = f64> {
    pub rule: UpdateRule,
    pub lr_hidden: T,
    pub epochs: Vec<Option<usize>>,
    /// Mean over converged trials.
    pub mean: T,
    /// Sample standard deviation over converged trials.
    pub std: T,
    pub n_converged: usize,
}

impl<T: Float> ArmSummary<T> {
    pub fn from_trials(rule: UpdateRule, lr_hidden: T, trials: &[TrialResult<T>]) -> Self {
        let epochs: Vec<Option<usize>> = trials.iter().map(|t| t.epochs_to_goal).collect();
        let conv = converged(&epochs);
        let (mean, std) = if conv.is_empty() { (T::nan(), T::nan()) } else { (mean(&conv), sample_std(&conv)) };
        Self { rule, lr_hidden, mean, std, n_converged: conv.len(), epochs }
    }

    pub fn n_trials(&self) -> usize {
        self.epochs.len()
    }

    pub fn n_not_converged(&self) -> usize {
        self.n_trials() - self.n_converged
    }

    pub fn converged_epochs(&self) -> Vec<T> {
        converged(&self.epochs)
    }

    /// Mean with non-converged trials counted as `max_epochs`.
    pub fn penalized_mean(&self, max_epochs: usize) -> T {
        let v: Vec<T> = self.epochs.iter().map(|e| T::from_usize(e.unwrap_or(max_epochs)).unwrap()).collect();
        mean(&v)
    }

    /// Trials slower than `threshold` epochs or not converged at all.
    pub fn long_tail_count(&self, threshold: T) -> usize {
        self.epochs
            .iter()
            .filter(|e| match e {
                Some(n) => T::from_usize(*n).unwrap() > threshold,
                None => true,
            })
            .count()
    }
}

fn converged<T: Float>(epochs: &[Option<usize>]) -> Vec<T> {
    epochs.iter().flatten().map(|&n| T::from_usize(n).unwrap()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T = f64> {
    pub rule: UpdateRule,
    pub points: Vec<ArmSummary<T>>,
    pub best_lr: T,
}

/// Runs `n_trials` at every grid learning rate and picks the one with the
/// lowest mean epochs-to-goal, counting non-converged trials as
/// `max_epochs` and breaking ties toward the smaller rate.
pub fn lr_sweep<T: Float>(config: &ExperimentConfig<T>, rule: UpdateRule, parallelism: Option<usize>) -> Result<SweepResult<T>> {
    let grid = config.lr_sweep.values();
    if grid.is_empty() {
        return Err(Error::InvalidParams("empty learning-rate sweep".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for lr in grid {
        let trials = run_trials(config, rule, lr, parallelism)?;
        points.push(ArmSummary::from_trials(rule, lr, &trials));
    }
    let best = points
        .iter()
        .map(|p| (p.penalized_mean(config.max_epochs), p.lr_hidden))
        .fold(None::<(T, T)>, |acc, cur| match acc {
            Some(a) if a.0 <= cur.0 => Some(a),
            _ => Some(cur),
        })
        .expect("non-empty grid");
    Ok(SweepResult { rule, points, best_lr: best.1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T = f64> {
    /// Arm `a` then arm `b`.
    pub arms: [ArmSummary<T>; 2],
    /// Test of `a` against `b`; `p_one_sided` is the evidence that `a` is faster.
    pub welch: WelchResult<T>,
    pub trials: [Vec<TrialResult<T>>; 2],
}

/// Compares two `(rule, lr_hidden)` arms with fresh trials.
pub fn compare_arms<T: Float>(
    config: &ExperimentConfig<T>,
    a: (UpdateRule, T),
    b: (UpdateRule, T),
    parallelism: Option<usize>,
) -> Result<ComparisonReport<T>> {
    let ta = run_trials(config, a.0, a.1, parallelism)?;
    let tb = run_trials(config, b.0, b.1, parallelism)?;
    let sa = ArmSummary::from_trials(a.0, a.1, &ta);
    let sb = ArmSummary::from_trials(b.0, b.1, &tb);
    if sa.n_converged < 2 || sb.n_converged < 2 {
        return Err(Error::StatisticsUnavailable(format!(
            "need >= 2 converged trials per arm, got {} ({}) and {} ({})",
            sa.n_converged, sa.rule, sb.n_converged, sb.rule
        )));
    }
    let welch = welch_t_test(&sa.converged_epochs(), &sb.converged_epochs())?;
    Ok(ComparisonReport { arms: [sa, sb], welch, trials: [ta, tb] })
}

/// Power-law arm against linear arm at the configured learning rates.
pub fn compare_rules<T: Float>(config: &ExperimentConfig<T>, parallelism: Option<usize>) -> Result<ComparisonReport<T>> {
    compare_arms(
        config,
        (UpdateRule::PowerLaw, config.lr_powerlaw),
        (UpdateRule::Linear, config.lr_linear),
        parallelism,
    )
}
