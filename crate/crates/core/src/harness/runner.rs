use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ScheduleKind, Task};
use super::optimum::{offline_optimum_weighted, Optimum};
use super::{parse_libsvm, parse_returns_csv, synthetic, write_trace, Dataset, HarnessError};
use crate::geometry::{FeasibleSet, Point};
use crate::learners::{full_information_beta, Algorithm, Feedback, FeedbackKind, Ogd, Ogdeg, OnlineLearner, Ons, Onseg, Schedule};
use crate::losses::{estimate_bounds, LossBounds, LossFamily, LossSample};

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub t: u64,
    /// Loss of the played point (the internal, minimized loss).
    pub loss: f64,
    /// Per-round quantity the running metric averages: the loss for
    /// regression and quadratics, a 0/1 mistake for classification, the
    /// raw return for portfolios.
    pub outcome: f64,
    pub metric: f64,
    pub regret: Option<f64>,
}

/// Everything a trial needs besides the seed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub data: Dataset,
    pub family: LossFamily,
    pub set: FeasibleSet,
    pub bounds: LossBounds,
    pub horizon: u64,
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub records: Vec<IterationRecord>,
    pub optimum: Option<Optimum>,
}

pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    let data = match (&config.data_path, config.task) {
        (Some(path), Task::Portfolio) => parse_returns_csv(path)?,
        (Some(path), _) => parse_libsvm(path)?,
        (None, Task::SyntheticQuadratic) => synthetic::quadratic_stream(synthetic::default_quadratic_target(config.dim)),
        (None, task) => return Err(HarnessError::Config(format!("task {task} needs a data path"))),
    };
    let family = config.task.loss_family();
    for (i, s) in data.samples().iter().enumerate() {
        family.validate(s).map_err(|e| {
            HarnessError::Data(super::DataError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })?;
    }
    Ok(data)
}

impl Prepared {
    pub fn new(config: &ExperimentConfig, data: Dataset) -> Result<Self, HarnessError> {
        config.validate()?;
        let family = config.task.loss_family();
        let set = config.set_config().build(data.dim())?;
        let bounds = estimate_bounds(family, data.samples(), &set)?;
        let horizon = config.horizon.resolve(data.len())?;
        Ok(Self {
            config: config.clone(),
            data,
            family,
            set,
            bounds,
            horizon,
        })
    }

    pub fn load(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        Self::new(config, load_dataset(config)?)
    }

    pub fn loss_bound(&self) -> f64 {
        self.config.loss_bound.unwrap_or(self.bounds.loss_bound)
    }

    pub fn grad_bound(&self) -> f64 {
        self.config.grad_bound.unwrap_or(self.bounds.grad_bound)
    }

    pub fn lipschitz(&self) -> f64 {
        self.config.lipschitz.unwrap_or(self.bounds.lipschitz)
    }

    /// The bandit schedule for this configuration, overrides applied.
    pub fn schedule(&self) -> Result<Schedule, HarnessError> {
        let c = &self.config;
        let (d, f, diam, r) = (
            self.set.intrinsic_dim(),
            self.loss_bound(),
            self.set.diameter(),
            self.set.inner_radius(),
        );
        let base = match c.schedule {
            ScheduleKind::Bounded => Schedule::for_bounded_losses(d, f, diam, c.sigma, r, self.horizon),
            ScheduleKind::Lipschitz => Schedule::for_lipschitz_losses(d, f, diam, r, self.lipschitz(), self.horizon, c.sigma),
        }
        .map_err(config_error)?;
        base.with_overrides(&c.overrides())
            .and_then(|s| s.with_grad_bound(self.grad_bound()))
            .map_err(config_error)
    }

    pub fn learner(&self, algo: Algorithm) -> Result<Box<dyn OnlineLearner>, HarnessError> {
        let learner: Box<dyn OnlineLearner> = match algo {
            Algorithm::Onseg => Box::new(Onseg::new(&self.set, self.schedule()?).map_err(config_error)?),
            Algorithm::Ogdeg => Box::new(Ogdeg::new(&self.set, self.schedule()?).map_err(config_error)?),
            Algorithm::Ons => {
                let beta = match self.config.beta {
                    Some(b) => b,
                    None => full_information_beta(self.grad_bound(), self.set.diameter(), self.config.sigma).map_err(config_error)?,
                };
                Box::new(Ons::new(&self.set, beta).map_err(config_error)?)
            }
            Algorithm::Ogd => Box::new(Ogd::new(&self.set, self.grad_bound()).map_err(config_error)?),
        };
        Ok(learner)
    }

    /// Sample order for one trial: dataset order, or a seeded permutation.
    pub fn order(&self, seed: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        if self.config.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            order.shuffle(&mut rng);
        }
        order
    }

    /// Visit counts per sample over the horizon under `order`.
    pub fn visit_weights(&self, order: &[usize]) -> Vec<f64> {
        let n = order.len() as u64;
        let mut w = vec![(self.horizon / n) as f64; order.len()];
        for &j in order.iter().take((self.horizon % n) as usize) {
            w[j] += 1.0;
        }
        w
    }

    pub fn outcome(&self, x: &Point, s: &LossSample, loss: f64) -> f64 {
        match self.config.task {
            Task::Regression | Task::SyntheticQuadratic => loss,
            Task::Classification => {
                let predicted = if x.dot(&s.z) >= 0.0 { 1.0 } else { -1.0 };
                f64::from(predicted != s.label)
            }
            Task::Portfolio => -loss,
        }
    }

    /// Replays the stream for `algo` with trial index `trial`, seeding the
    /// trial with `seed + trial`.
    pub fn run_trial_with(&self, algo: Algorithm, trial: usize) -> Result<TrialResult, HarnessError> {
        let seed = self.config.seed.wrapping_add(trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = self.order(seed);
        let mut learner = self.learner(algo)?;
        let mut records = Vec::with_capacity(self.horizon as usize);
        let n = order.len() as u64;
        for t in 1..=self.horizon {
            let s = self.data.sample(order[((t - 1) % n) as usize]);
            let x = learner.predict(&mut rng)?;
            let loss = self.family.value(&x, s)?;
            match algo.feedback_kind() {
                FeedbackKind::Bandit => learner.update(Feedback::Value(loss))?,
                FeedbackKind::FullInformation => {
                    let g = self.family.gradient(&x, s)?;
                    learner.update(Feedback::Gradient(&g))?
                }
            }
            records.push(IterationRecord {
                t,
                loss,
                outcome: self.outcome(&x, s, loss),
                metric: 0.0,
                regret: None,
            });
        }
        running_metrics(&mut records);
        let optimum = if self.config.regret {
            let opt = offline_optimum_weighted(&self.data, self.family, &self.set, &self.visit_weights(&order))?;
            fill_regret(&mut records, |t| {
                let s = self.data.sample(order[((t - 1) % n) as usize]);
                self.family.value(&opt.x, s)
            })?;
            Some(opt)
        } else {
            None
        };
        Ok(TrialResult {
            trial,
            seed,
            records,
            optimum,
        })
    }

    pub fn run_trial(&self, trial: usize) -> Result<TrialResult, HarnessError> {
        self.run_trial_with(self.config.algo, trial)
    }

    /// All configured trials, in parallel, ordered by trial index.
    pub fn run_trials(&self) -> Result<Vec<TrialResult>, HarnessError> {
        (0..self.config.trials).into_par_iter().map(|i| self.run_trial(i)).collect()
    }
}

fn config_error(e: crate::learners::LearnerError) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// Fills `metric` with the prefix mean of `outcome`.
pub fn running_metrics(records: &mut [IterationRecord]) {
    let mut total = 0.0;
    for (i, r) in records.iter_mut().enumerate() {
        total += r.outcome;
        r.metric = total / (i + 1) as f64;
    }
}

/// Fills `regret` with `Σ_{i≤t} loss_i − Σ_{i≤t} f_i(x*)`, where
/// `comparator_loss(t)` evaluates round `t`'s loss at the fixed comparator.
pub fn fill_regret<F>(records: &mut [IterationRecord], mut comparator_loss: F) -> Result<(), HarnessError>
where
    F: FnMut(u64) -> Result<f64, crate::losses::LossError>,
{
    let (mut learner_total, mut comparator_total) = (0.0, 0.0);
    for r in records.iter_mut() {
        learner_total += r.loss;
        comparator_total += comparator_loss(r.t)?;
        r.regret = Some(learner_total - comparator_total);
    }
    Ok(())
}

/// Formats a raw fractional return as a percentage, e.g. `0.0288` → `2.88%`.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.2}%", fraction * 100.0)
}

/// Loads data, runs every trial and writes one trace per trial.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialResult>, HarnessError> {
    let prepared = Prepared::load(config)?;
    let results = prepared.run_trials()?;
    for r in &results {
        let path = config.trace_path(r.trial);
        write_trace(&r.records, &path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Horizon;

    fn quad_config(algo: Algorithm, horizon: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Task::SyntheticQuadratic, algo);
        c.horizon = Horizon::Rounds(horizon);
        c.set = Some(crate::harness::SetConfig::Ball {
            diameter: 2.0,
            inner_radius: 1.0,
        });
        c
    }

    #[test]
    fn single_round_metric_equals_loss() {
        for algo in [Algorithm::Ons, Algorithm::Ogd] {
            let p = Prepared::load(&quad_config(algo, 1)).unwrap();
            let r = p.run_trial(0).unwrap();
            assert_eq!(r.records.len(), 1);
            assert_eq!(r.records[0].metric, r.records[0].loss);
        }
        // The bandit schedules need log T > 0.
        for algo in [Algorithm::Onseg, Algorithm::Ogdeg] {
            let p = Prepared::load(&quad_config(algo, 1)).unwrap();
            assert!(matches!(p.run_trial(0), Err(HarnessError::Config(_))));
            let r = Prepared::load(&quad_config(algo, 2)).unwrap().run_trial(0).unwrap();
            assert_eq!(r.records[0].metric, r.records[0].loss);
        }
    }

    #[test]
    fn prefix_means() {
        let mut records: Vec<IterationRecord> = [2.0, 4.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| IterationRecord {
                t: i as u64 + 1,
                loss: v,
                outcome: v,
                metric: 0.0,
                regret: None,
            })
            .collect();
        running_metrics(&mut records);
        assert_eq!(records[0].metric, 2.0);
        assert_eq!(records[1].metric, 3.0);
    }

    #[test]
    fn percent_format() {
        assert_eq!(format_percent(0.0288), "2.88%");
    }

    #[test]
    fn same_seed_same_records() {
        let p = Prepared::load(&quad_config(Algorithm::Onseg, 300)).unwrap();
        assert_eq!(p.run_trial(0).unwrap().records, p.run_trial(0).unwrap().records);
        assert_ne!(p.run_trial(0).unwrap().records, p.run_trial(1).unwrap().records);
    }

    #[test]
    fn visit_weights_follow_order() {
        let data = synthetic::regression_stream(3, 2, 1.0, 0.1, 0);
        let mut c = ExperimentConfig::new(Task::Regression, Algorithm::Ogd);
        c.horizon = Horizon::Rounds(4);
        let p = Prepared::new(&c, data).unwrap();
        assert_eq!(p.visit_weights(&[2, 0, 1]), vec![1.0, 1.0, 2.0]);
    }
}
