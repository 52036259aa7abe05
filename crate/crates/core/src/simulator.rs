//! Random-walk learners that consume teaching sequences and are then tested
//! without feedback.
//!
//! A simulated learner holds one hypothesis per class and predicts the class
//! whose hypothesis scores highest (ties to the smallest class index). On a
//! teaching example every class posterior is updated, and each class whose
//! current hypothesis disagrees with the one-vs-all label resamples it from
//! the normalized posterior of the prefix shown so far.
//!
//! Explanation and density discounts are the same for every hypothesis and
//! cancel under normalization, so displaying explanations does not change the
//! dynamics here; `RAND_IM` and `RAND_EXP` simulate identically.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::learner::confidence;
use crate::model::{binary_label, sgn, Dataset, HypothesisSpace, LearnerParams, Strategy};
use crate::teacher::{greedy_select, TeachingProblem};

const DYNAMICS_STREAM: u64 = 0;
const TEACH_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Index of the highest score, ties to the smallest index.
fn argmax(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, s) in scores.enumerate() {
        if s > best.1 {
            best = (i, s);
        }
    }
    best.0
}

/// Draws an index proportionally to `weights`; `None` if they sum to zero.
fn sample_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return Some(i);
        }
    }
    weights.iter().rposition(|w| *w > 0.0)
}

#[derive(Debug, Clone)]
pub struct SimulatedLearner<'a> {
    hs: &'a HypothesisSpace,
    alpha: f64,
    current: Vec<usize>,
    weights: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl<'a> SimulatedLearner<'a> {
    /// Starts each class at a hypothesis drawn from the uniform prior.
    pub fn new(hs: &'a HypothesisSpace, num_classes: usize, alpha: f64, seed: u64) -> Self {
        let mut rng = rng_for(seed, DYNAMICS_STREAM);
        let current = (0..num_classes)
            .map(|_| rng.random_range(0..hs.len()))
            .collect();
        Self::with_state(hs, alpha, current, rng)
    }

    /// Starts from explicit per-class hypotheses.
    pub fn with_hypotheses(
        hs: &'a HypothesisSpace,
        alpha: f64,
        current: Vec<usize>,
        seed: u64,
    ) -> Self {
        Self::with_state(hs, alpha, current, rng_for(seed, DYNAMICS_STREAM))
    }

    fn with_state(
        hs: &'a HypothesisSpace,
        alpha: f64,
        current: Vec<usize>,
        rng: ChaCha8Rng,
    ) -> Self {
        let prior = hs.uniform_prior();
        SimulatedLearner {
            hs,
            alpha,
            weights: vec![prior; current.len()],
            current,
            rng,
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.current
    }

    /// Normalized posterior for `class_index` over the examples seen so far.
    pub fn belief(&self, class_index: usize) -> Vec<f64> {
        let w = &self.weights[class_index];
        let z: f64 = w.iter().sum();
        w.iter().map(|v| v / z).collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(
            self.current
                .iter()
                .map(|&h| self.hs.hypotheses()[h].score(x)),
        )
    }

    /// Shows one labelled example. Returns whether the learner's prediction,
    /// made before the label was revealed, was correct.
    pub fn observe(&mut self, x: &[f64], class_index: usize) -> bool {
        let correct = self.predict(x) == class_index;
        let scores: Vec<f64> = self.hs.hypotheses().iter().map(|h| h.score(x)).collect();
        for c in 0..self.current.len() {
            let y = binary_label(class_index, c);
            for (w, &s) in self.weights[c].iter_mut().zip(&scores) {
                *w *= confidence(s, y, self.alpha);
            }
            if sgn(scores[self.current[c]]) != y {
                if let Some(h) = sample_weighted(&self.weights[c], &mut self.rng) {
                    self.current[c] = h;
                }
            }
        }
        correct
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerOutcome {
    pub accuracy: f64,
    /// `confusion[truth][prediction]` over the test sequence.
    pub confusion: Vec<Vec<u64>>,
    /// Whether each teaching item was answered correctly before feedback.
    pub teaching_correct: Vec<bool>,
}

/// Runs one learner through `teach` then `test` (dataset indices).
pub fn simulate_learner(
    ds: &Dataset,
    hs: &HypothesisSpace,
    teach: &[usize],
    test: &[usize],
    alpha: f64,
    seed: u64,
) -> Result<LearnerOutcome> {
    if let Some(&dup) = teach.iter().find(|i| test.contains(i)) {
        return Err(Error::Overlap(ds.item(dup).id.clone()));
    }
    let mut learner = SimulatedLearner::new(hs, ds.num_classes(), alpha, seed);
    Ok(run_learner(ds, &mut learner, teach, test))
}

fn run_learner(
    ds: &Dataset,
    learner: &mut SimulatedLearner<'_>,
    teach: &[usize],
    test: &[usize],
) -> LearnerOutcome {
    let teaching_correct = teach
        .iter()
        .map(|&i| {
            let item = ds.item(i);
            learner.observe(&item.features, item.class_index)
        })
        .collect();
    let c = ds.num_classes();
    let mut confusion = vec![vec![0u64; c]; c];
    let mut right = 0usize;
    for &i in test {
        let item = ds.item(i);
        let pred = learner.predict(&item.features);
        confusion[item.class_index][pred] += 1;
        right += usize::from(pred == item.class_index);
    }
    LearnerOutcome {
        accuracy: if test.is_empty() {
            0.0
        } else {
            right as f64 / test.len() as f64
        },
        confusion,
        teaching_correct,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub strategy: Strategy,
    /// Strategies with identical simulated dynamics reported in this row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<Strategy>,
    pub learners: usize,
    pub mean_accuracy: Option<f64>,
    pub std_accuracy: Option<f64>,
    /// `confusion[truth][prediction]` summed over learners.
    pub confusion: Vec<Vec<u64>>,
    /// Mean accuracy on each teaching item before its label was shown.
    pub teaching_curve: Vec<f64>,
}

impl SimulationReport {
    /// Standard error of the mean accuracy.
    pub fn standard_error(&self) -> Option<f64> {
        self.std_accuracy
            .map(|s| s / (self.learners.max(1) as f64).sqrt())
    }

    fn aggregate(strategy: Strategy, outcomes: &[LearnerOutcome], c: usize, budget: usize) -> Self {
        let n = outcomes.len();
        let mut confusion = vec![vec![0u64; c]; c];
        let mut curve = vec![0.0; budget];
        for o in outcomes {
            for (row, orow) in confusion.iter_mut().zip(&o.confusion) {
                for (v, ov) in row.iter_mut().zip(orow) {
                    *v += ov;
                }
            }
            for (acc, &ok) in curve.iter_mut().zip(&o.teaching_correct) {
                *acc += f64::from(u8::from(ok));
            }
        }
        let (mean, std) = if n == 0 {
            (None, None)
        } else {
            let mean = outcomes.iter().map(|o| o.accuracy).sum::<f64>() / n as f64;
            let var = if n > 1 {
                outcomes
                    .iter()
                    .map(|o| (o.accuracy - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1) as f64
            } else {
                0.0
            };
            curve.iter_mut().for_each(|v| *v /= n as f64);
            (Some(mean), Some(var.sqrt()))
        };
        if n == 0 {
            curve.clear();
        }
        SimulationReport {
            strategy,
            aliases: Vec::new(),
            learners: n,
            mean_accuracy: mean,
            std_accuracy: std,
            confusion,
            teaching_curve: curve,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub budget: usize,
    pub params: LearnerParams,
    pub learners_per_strategy: usize,
    /// Test items per learner; `None` uses the whole test split.
    pub test_len: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub reports: Vec<SimulationReport>,
}

/// Simulates `learners_per_strategy` learners for each strategy.
///
/// Greedy strategies share one teaching sequence; random strategies draw a
/// fresh sequence per learner. Learner `i` uses seed `seed + i` for its
/// dynamics, random teaching draw and test shuffle, so strategies are
/// compared on common random numbers.
pub fn run_experiment(
    strategies: &[Strategy],
    problem: &TeachingProblem<'_>,
    test_ids: &[String],
    cfg: &ExperimentConfig,
    exec: Exec,
) -> Result<ExperimentReport> {
    cfg.params.validate()?;
    let ds = problem.dataset();
    let hs = problem.space();
    let test = ds.positions(test_ids)?;
    if test.is_empty() {
        return Err(Error::Empty("test split".into()));
    }
    if let Some(&dup) = problem.pool().iter().find(|i| test.contains(i)) {
        return Err(Error::Overlap(ds.item(dup).id.clone()));
    }
    let test_len = cfg.test_len.unwrap_or(test.len()).min(test.len());

    let mut reports: Vec<SimulationReport> = Vec::new();
    for &strategy in strategies {
        if strategy.is_random() {
            if let Some(row) = reports.iter_mut().find(|r| r.strategy.is_random()) {
                if row.strategy != strategy && !row.aliases.contains(&strategy) {
                    row.aliases.push(strategy);
                }
                continue;
            }
        } else if reports.iter().any(|r| r.strategy == strategy) {
            continue;
        }

        let fixed: Option<Vec<usize>> = if strategy.is_random() {
            None
        } else {
            let ts = greedy_select(strategy, cfg.budget, problem, &cfg.params, cfg.seed, exec)?;
            Some(ds.positions(&ts.item_ids)?)
        };
        let pool = problem.pool();
        if pool.len() < cfg.budget {
            return Err(Error::PoolTooSmall {
                pool: pool.len(),
                budget: cfg.budget,
            });
        }
        let outcomes = exec.map(cfg.learners_per_strategy, |i| {
            let seed = cfg.seed.wrapping_add(i as u64);
            let teach: Vec<usize> = match &fixed {
                Some(seq) => seq.clone(),
                None => sample(&mut rng_for(seed, TEACH_STREAM), pool.len(), cfg.budget)
                    .into_iter()
                    .map(|x| pool[x])
                    .collect(),
            };
            let mut order = test.clone();
            order.shuffle(&mut rng_for(seed, TEST_STREAM));
            order.truncate(test_len);
            let mut learner = SimulatedLearner::new(hs, ds.num_classes(), cfg.params.alpha, seed);
            run_learner(ds, &mut learner, &teach, &order)
        });
        reports.push(SimulationReport::aggregate(
            strategy,
            &outcomes,
            ds.num_classes(),
            cfg.budget,
        ));
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Hypothesis, Item};

    fn line(w: f64, b: f64) -> Hypothesis {
        Hypothesis {
            weights: vec![w],
            bias: b,
            tag: String::new(),
        }
    }

    fn dataset(xs: &[(f64, usize)]) -> Dataset {
        let items = xs
            .iter()
            .enumerate()
            .map(|(i, &(x, c))| Item::new(format!("i{i}"), c, vec![x]))
            .collect();
        Dataset::new(vec!["a".into(), "b".into()], 1, items).unwrap()
    }

    #[test]
    fn halving_disagreement_gives_two_thirds() {
        // Item x = 0 of class 1, so y = -1 for class 0. h0 scores -1 and
        // agrees; h1 scores 0, predicts +1 and has likelihood exactly 0.5.
        let hs =
            HypothesisSpace::new(1, vec![line(-1.0, -1.0), line(1.0, 0.0)], vec![0, 1]).unwrap();
        let mut learner = SimulatedLearner::with_hypotheses(&hs, 0.7, vec![1, 1], 3);
        learner.observe(&[0.0], 1);
        let b = learner.belief(0);
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((b[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_learner_never_switches() {
        let ds = dataset(&[
            (1.0, 0),
            (2.0, 0),
            (-1.0, 1),
            (-2.5, 1),
            (0.5, 0),
            (-0.2, 1),
        ]);
        let hs = HypothesisSpace::new(
            1,
            vec![line(1.0, 0.0), line(-1.0, -0.01), line(0.2, 3.0)],
            vec![0, 1],
        )
        .unwrap();
        let teach = [0, 2, 1, 3];
        let test = [4, 5];
        for t in 0..=teach.len() {
            let mut learner = SimulatedLearner::with_hypotheses(&hs, 0.5, vec![0, 1], 9);
            let out = run_learner(&ds, &mut learner, &teach[..t], &test);
            assert_eq!(learner.current(), &[0, 1]);
            assert_eq!(out.accuracy, 1.0);
        }
    }

    #[test]
    fn overlap_is_rejected() {
        let ds = dataset(&[(1.0, 0), (-1.0, 1)]);
        let hs =
            HypothesisSpace::new(1, vec![line(1.0, 0.0), line(-1.0, 0.0)], vec![0, 1]).unwrap();
        assert!(matches!(
            simulate_learner(&ds, &hs, &[0], &[0, 1], 0.5, 1),
            Err(Error::Overlap(_))
        ));
    }

    #[test]
    fn empty_teaching_matches_prior_mixture() {
        let ds = dataset(&[
            (1.0, 0),
            (2.0, 0),
            (-1.0, 1),
            (-2.0, 1),
            (0.3, 1),
            (-0.4, 0),
        ]);
        let hs = HypothesisSpace::new(
            1,
            vec![line(1.0, 0.0), line(-1.0, 0.0), line(0.5, -1.0)],
            vec![0, 1],
        )
        .unwrap();
        let test: Vec<usize> = (0..ds.len()).collect();

        // Analytic oracle: every (h_0, h_1) pair is equally likely.
        let n = hs.len();
        let mut expected = 0.0;
        for h0 in 0..n {
            for h1 in 0..n {
                let learner = SimulatedLearner::with_hypotheses(&hs, 0.5, vec![h0, h1], 0);
                let ok = test
                    .iter()
                    .filter(|&&i| learner.predict(&ds.item(i).features) == ds.item(i).class_index)
                    .count();
                expected += ok as f64 / test.len() as f64;
            }
        }
        expected /= (n * n) as f64;

        let runs = 10_000;
        let accs: Vec<f64> = (0..runs)
            .map(|s| {
                simulate_learner(&ds, &hs, &[], &test, 0.5, s)
                    .unwrap()
                    .accuracy
            })
            .collect();
        let mean = accs.iter().sum::<f64>() / runs as f64;
        let sd = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
        let se = sd / (runs as f64).sqrt();
        assert!(
            (mean - expected).abs() < 2.0 * se,
            "{mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn weighted_sampling_edge_cases() {
        let mut rng = rng_for(1, 0);
        assert_eq!(sample_weighted(&[0.0, 0.0], &mut rng), None);
        assert_eq!(sample_weighted(&[0.0, 2.0], &mut rng), Some(1));
        assert_eq!(argmax([1.0, 3.0, 3.0].into_iter()), 1);
    }
}
