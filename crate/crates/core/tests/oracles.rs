use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinsyn::actor::{ActorConfig, ActorNetwork, UpdateRule};
use spinsyn::critic::{CriticConfig, CriticNetwork};
use spinsyn::env::{Presentation, Sample, XorEnv};
use spinsyn::harness::{
    compare_arms, run_epoch, run_trial, run_trials, ArmSummary, ExperimentConfig, RewardFilter,
};
use spinsyn::stats::{regularized_incomplete_beta, student_t_cdf, welch_t_test};
use statrs::distribution::{ContinuousCDF, StudentsT};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hidden unit 0 is OR, unit 1 is AND, the rest are silenced; the output
/// fires for OR and not AND.
fn xor_actor() -> ActorNetwork<f64> {
    let cfg = ActorConfig { alpha_flip: 0.0, ..ActorConfig::default() };
    let mut hw = vec![0.0; 20];
    let mut hb = vec![-40.0; 10];
    hw[0] = 40.0;
    hw[1] = 40.0;
    hb[0] = -20.0;
    hw[2] = 40.0;
    hw[3] = 40.0;
    hb[1] = -60.0;
    let mut ow = vec![0.0; 10];
    ow[0] = 40.0;
    ow[1] = -80.0;
    ActorNetwork::from_parameters(cfg, hw, hb, ow, vec![-20.0]).unwrap()
}

#[test]
fn hand_built_actor_solves_xor() {
    let actor = xor_actor();
    for s in Sample::all() {
        let p = actor.output_probability(&s.x(), 1.0);
        let want = if s.target() { 1.0 } else { 0.0 };
        assert!((p - want).abs() < 1e-6, "{:?}: {p}", s.x());
    }
}

#[test]
fn hand_built_actor_earns_full_reward() {
    let mut actor = xor_actor();
    // freeze it: learning rates zero
    actor.config.lr_hidden = 0.0;
    actor.config.lr_out = 0.0;
    let mut critic = CriticNetwork::init(CriticConfig::default(), &mut rng(1)).unwrap();
    let mut env = XorEnv::new(Presentation::Uniform);
    let mut r = rng(2);
    let filter = RewardFilter { keep: 0.999, gain: 0.001 };
    let mut state = 1.0;
    for _ in 0..50 {
        let out = run_epoch(&mut actor, &mut critic, &mut env, &mut r, filter, state);
        assert_eq!(out.mean_reward, 1.0);
        assert_eq!(out.filter_state, 1.0);
        state = out.filter_state;
    }
}

#[test]
fn epoch_is_one_batch_and_one_update() {
    let cfg = ActorConfig::<f64>::default();
    let mut actor = ActorNetwork::init(cfg, &mut rng(3)).unwrap();
    let mut critic = CriticNetwork::init(CriticConfig::default(), &mut rng(4)).unwrap();
    let mut env = XorEnv::new(Presentation::Cyclic);
    let filter = RewardFilter { keep: 0.999, gain: 0.001 };
    let mut r = rng(5);
    let mut state = 0.5;
    for _ in 0..20 {
        let out = run_epoch(&mut actor, &mut critic, &mut env, &mut r, filter, state);
        assert!(actor.accumulators_zero());
        // mean of 10 binary rewards is a multiple of 0.1
        let tenths = out.mean_reward * 10.0;
        assert!((tenths - tenths.round()).abs() < 1e-12);
        state = out.filter_state;
    }
    // cyclic env advanced by exactly 20 * 10 presentations: next is pattern 0
    assert_eq!(env.next_sample(&mut r), Sample::all()[0]);
}

#[test]
fn linear_update_replays_accumulation() {
    // Compare a batch applied by the network with the sum of traced increments.
    let cfg = ActorConfig { update_rule: UpdateRule::Linear, ..ActorConfig::default() };
    let mut actor = ActorNetwork::init(cfg, &mut rng(8)).unwrap();
    let before = actor.clone();
    let mut r = rng(9);
    let mut expect_out_bias = before.out.biases[0];
    for k in 0..10 {
        let x = Sample::all()[k % 4].x();
        let (_, tr) = actor.forward(&x, 0.3, &mut r);
        let reward = if k % 3 == 0 { 1.0 } else { 0.0 };
        actor.accumulate_update(&tr, reward, 0.3);
        let y = if tr.out.output[0] { 1.0 } else { 0.0 };
        expect_out_bias += cfg.lr_out * (reward - 0.3) * (y - tr.out.p[0]);
    }
    actor.apply_batch_update();
    assert_relative_eq!(actor.out.biases[0], expect_out_bias, max_relative = 1e-12);
}

#[test]
fn actor_init_is_centered() {
    let cfg = ActorConfig::<f64> { n_hidden: 1000, ..ActorConfig::default() };
    let mut r = rng(10);
    let mut all = Vec::new();
    for _ in 0..50 {
        all.extend(ActorNetwork::init(cfg, &mut r).unwrap().hidden.weights);
    }
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let bound = 1.0 / 2f64.sqrt();
    let se = bound / 3f64.sqrt() / n.sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean} se {se}");
    assert!(all.iter().all(|w| w.abs() <= bound));
}

#[test]
fn incomplete_beta_matches_statrs() {
    for &a in &[0.5, 1.0, 2.5, 7.0, 30.0] {
        for &b in &[0.5, 1.5, 4.0, 12.0] {
            for k in 0..=20 {
                let x = k as f64 / 20.0;
                let ours = regularized_incomplete_beta(x, a, b);
                let theirs = statrs::function::beta::beta_reg(a, b, x);
                assert!((ours - theirs).abs() < 1e-10, "I_{x}({a},{b}): {ours} vs {theirs}");
            }
        }
    }
}

#[test]
fn student_t_matches_statrs() {
    for &nu in &[1.0, 2.9411764705882353, 5.0, 48.3, 200.0] {
        let d = StudentsT::new(0.0, 1.0, nu).unwrap();
        for k in -40..=40 {
            let t = k as f64 * 0.2;
            assert!((student_t_cdf(t, nu) - d.cdf(t)).abs() < 1e-9, "t={t} nu={nu}");
        }
    }
}

#[test]
fn welch_zero_variance_rejected() {
    assert!(welch_t_test(&[1.0, 1.0], &[2.0, 2.0]).is_err());
    assert!(welch_t_test(&[1.0], &[2.0, 3.0]).is_err());
    let same = welch_t_test(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
    assert_eq!(same.t, 0.0);
    assert_eq!(same.p_two_sided, 1.0);
}

fn small_config() -> ExperimentConfig<f64> {
    ExperimentConfig { n_trials: 6, max_epochs: 400, ..ExperimentConfig::default() }
}

#[test]
fn trials_are_reproducible() {
    let cfg = small_config();
    let a = run_trial(&cfg, UpdateRule::PowerLaw, 1.1, 77).unwrap();
    let b = run_trial(&cfg, UpdateRule::PowerLaw, 1.1, 77).unwrap();
    assert_eq!(a, b);
    let c = run_trial(&cfg, UpdateRule::PowerLaw, 1.1, 78).unwrap();
    assert_ne!(a.raw_curve, c.raw_curve);
}

#[test]
fn trials_independent_of_worker_count() {
    let cfg = small_config();
    let one = run_trials(&cfg, UpdateRule::Linear, 0.75, Some(1)).unwrap();
    let many = run_trials(&cfg, UpdateRule::Linear, 0.75, Some(4)).unwrap();
    assert_eq!(one, many);
    assert_eq!(one.iter().map(|t| t.trial).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
}

#[test]
fn curves_respect_filter_floor() {
    let cfg = small_config();
    for t in run_trials(&cfg, UpdateRule::Linear, 0.75, None).unwrap() {
        if let Some(n) = t.epochs_to_goal {
            assert!(n >= 300);
            assert_eq!(t.filtered_curve.len(), n);
        } else {
            assert_eq!(t.filtered_curve.len(), cfg.max_epochs);
        }
        assert!(t.filtered_curve.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn identical_arms_give_zero_t() {
    let cfg = ExperimentConfig { n_trials: 8, max_epochs: 3000, ..ExperimentConfig::default() };
    let rep = compare_arms(&cfg, (UpdateRule::Linear, 0.75), (UpdateRule::Linear, 0.75), Some(2)).unwrap();
    assert_eq!(rep.welch.t, 0.0);
    assert_eq!(rep.arms[0], rep.arms[1]);
}

#[test]
fn arm_std_matches_two_pass() {
    let cfg = small_config();
    let trials = run_trials(&cfg, UpdateRule::Linear, 0.75, None).unwrap();
    let mut fake = trials.clone();
    let epochs = [310usize, 420, 515, 333, 999, 450];
    for (t, e) in fake.iter_mut().zip(epochs) {
        t.epochs_to_goal = Some(e);
    }
    fake[4].epochs_to_goal = None;
    let s = ArmSummary::from_trials(UpdateRule::Linear, 0.75, &fake);
    let v: Vec<f64> = [310.0, 420.0, 515.0, 333.0, 450.0].to_vec();
    let m = v.iter().sum::<f64>() / 5.0;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 4.0;
    assert_relative_eq!(s.mean, m, max_relative = 1e-14);
    assert_relative_eq!(s.std, var.sqrt(), max_relative = 1e-14);
    assert_eq!(s.n_converged, 5);
    assert_eq!(s.n_not_converged(), 1);
    assert_eq!(s.long_tail_count(2.0 * m), 1);
}
