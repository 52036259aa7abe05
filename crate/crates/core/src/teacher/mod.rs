//! Teaching-set selection: per-class errors, the expected-error-reduction
//! objective, greedy selection through the incremental engine, and the
//! direct reference implementation of the same greedy rule.

mod engine;

pub use engine::{FastEngine, StepOutcome};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::learner::{example_discount, naive_posterior, pool_distances, Shown};
use crate::model::{
    binary_label, Dataset, Hypothesis, HypothesisSpace, LearnerParams, StepDiagnostic, Strategy,
    TeachingSet,
};

/// Scores within this distance of the best are treated as ties and resolved
/// toward the smallest candidate index.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Best `(index, score)` pair: the smallest index whose score is within
/// [`TIE_TOLERANCE`] of the maximum.
pub fn pick_best(scores: impl Iterator<Item = (usize, f64)> + Clone) -> Option<usize> {
    let max = scores
        .clone()
        .map(|(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    scores
        .filter(|(_, s)| *s >= max - TIE_TOLERANCE)
        .map(|(i, _)| i)
        .min()
}

/// Fraction of `eligible` items where `sgn(h(x))` disagrees with the
/// one-vs-all label for `class_index`.
pub fn class_error(
    h: &Hypothesis,
    ds: &Dataset,
    eligible: &[usize],
    class_index: usize,
) -> Result<f64> {
    if eligible.is_empty() {
        return Err(Error::Empty("eligible item set".into()));
    }
    let wrong = eligible
        .iter()
        .filter(|&&i| {
            let item = ds.item(i);
            h.predict(&item.features) != binary_label(item.class_index, class_index)
        })
        .count();
    Ok(wrong as f64 / eligible.len() as f64)
}

/// `sum_h P(h | T) err(h)` over the (unnormalized) posterior.
pub fn expected_error(posterior: &[f64], errors: &[f64]) -> Result<f64> {
    if posterior.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: errors.len(),
            found: posterior.len(),
        });
    }
    Ok(posterior.iter().zip(errors).map(|(p, e)| p * e).sum())
}

/// Everything the teacher needs that does not depend on the learner
/// parameters: the candidate pool, per-class error vectors, the prior and
/// representativeness distances.
#[derive(Debug, Clone)]
pub struct TeachingProblem<'a> {
    ds: &'a Dataset,
    hs: &'a HypothesisSpace,
    pool: Vec<usize>,
    errors: Vec<Vec<f64>>,
    prior: Vec<f64>,
    distances: Vec<f64>,
}

impl<'a> TeachingProblem<'a> {
    /// `pool_ids` are the candidate items, usually the filtered train split.
    /// Errors and distances are measured over this pool.
    pub fn new<S: AsRef<str>>(
        ds: &'a Dataset,
        hs: &'a HypothesisSpace,
        pool_ids: &[S],
    ) -> Result<Self> {
        hs.check_compatible(ds)?;
        let pool = ds.positions(pool_ids)?;
        if pool.is_empty() {
            return Err(Error::Empty("candidate pool".into()));
        }
        let errors = (0..ds.num_classes())
            .map(|c| {
                hs.hypotheses()
                    .iter()
                    .map(|h| class_error(h, ds, &pool, c))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let distances = pool_distances(ds, &pool);
        Ok(TeachingProblem {
            ds,
            hs,
            pool,
            errors,
            prior: hs.uniform_prior(),
            distances,
        })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn space(&self) -> &'a HypothesisSpace {
        self.hs
    }

    /// Dataset indices of the candidates.
    pub fn pool(&self) -> &[usize] {
        &self.pool
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn errors(&self, class_index: usize) -> &[f64] {
        &self.errors[class_index]
    }

    /// Representativeness distance per pool position.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// `E(e_x) D(x)` per pool position under `params`.
    pub fn discounts(&self, params: &LearnerParams) -> Result<Vec<f64>> {
        self.pool
            .iter()
            .zip(&self.distances)
            .map(|(&i, &d)| example_discount(self.ds.item(i), d, params))
            .collect()
    }

    fn shown(&self, selected: &[usize], params: &LearnerParams) -> Result<Vec<Shown<'a>>> {
        let ds = self.ds;
        selected
            .iter()
            .map(|&x| {
                let item = ds.item(self.pool[x]);
                Ok(Shown {
                    features: &item.features,
                    class_index: item.class_index,
                    discount: example_discount(item, self.distances[x], params)?,
                })
            })
            .collect()
    }

    /// Per-class unnormalized posteriors after showing `selected` (pool
    /// positions), computed by the direct product.
    pub fn naive_posteriors(
        &self,
        selected: &[usize],
        params: &LearnerParams,
    ) -> Result<Vec<Vec<f64>>> {
        let shown = self.shown(selected, params)?;
        (0..self.ds.num_classes())
            .map(|c| {
                naive_posterior(&self.prior, &shown, self.hs, params.alpha, c).map(|p| p.weights)
            })
            .collect()
    }

    /// `R(T) = (1/C) sum_c sum_h (P_c(h) - P_c(h | T)) err_c(h)`.
    pub fn objective(&self, selected: &[usize], params: &LearnerParams) -> Result<f64> {
        let posts = self.naive_posteriors(selected, params)?;
        let c = self.ds.num_classes() as f64;
        let mut total = 0.0;
        for (k, post) in posts.iter().enumerate() {
            total += expected_error(&self.prior, &self.errors[k])?
                - expected_error(post, &self.errors[k])?;
        }
        Ok(total / c)
    }
}

/// Greedy argmax of [`TeachingProblem::objective`] recomputed from scratch
/// for every candidate at every step. Returns pool positions.
pub fn reference_greedy(
    problem: &TeachingProblem<'_>,
    params: &LearnerParams,
    budget: usize,
) -> Result<Vec<usize>> {
    let n = problem.pool().len();
    if n < budget {
        return Err(Error::PoolTooSmall { pool: n, budget });
    }
    let mut selected: Vec<usize> = Vec::with_capacity(budget);
    for _ in 0..budget {
        let mut candidate = selected.clone();
        candidate.push(0);
        let mut scored = Vec::with_capacity(n);
        for x in (0..n).filter(|x| !selected.contains(x)) {
            *candidate.last_mut().unwrap() = x;
            scored.push((x, problem.objective(&candidate, params)?));
        }
        let best = pick_best(scored.iter().copied()).expect("budget within pool");
        selected.push(best);
    }
    Ok(selected)
}

/// Parameters a strategy's learner model runs with: label-only strategies
/// switch both discounts off.
pub fn strategy_params(strategy: Strategy, params: &LearnerParams) -> LearnerParams {
    match strategy {
        Strategy::RandIm | Strategy::Strict => LearnerParams::strict(params.alpha),
        Strategy::RandExp | Strategy::Explain => *params,
    }
}

/// Selects a teaching set of `budget` items.
///
/// STRICT and EXPLAIN run the greedy engine (STRICT with infinite `beta`
/// and `gamma`); the random strategies draw a seeded sample without
/// replacement. Diagnostics are computed for every strategy.
pub fn greedy_select(
    strategy: Strategy,
    budget: usize,
    problem: &TeachingProblem<'_>,
    params: &LearnerParams,
    seed: u64,
    exec: Exec,
) -> Result<TeachingSet> {
    if budget == 0 {
        return Err(Error::InvalidParam("budget must be positive".into()));
    }
    let n = problem.pool().len();
    if n < budget {
        return Err(Error::PoolTooSmall { pool: n, budget });
    }
    let effective = strategy_params(strategy, params);
    let mut engine = FastEngine::new(problem, &effective, exec)?;
    let forced: Option<Vec<usize>> = strategy.is_random().then(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, n, budget).into_vec()
    });

    let mut per_step = Vec::with_capacity(budget);
    for t in 0..budget {
        let outcome = match &forced {
            Some(order) => engine.apply(order[t]),
            None => engine.step()?,
        };
        per_step.push(StepDiagnostic {
            item_id: problem
                .dataset()
                .item(problem.pool()[outcome.pool_position])
                .id
                .clone(),
            objective: outcome.objective,
            class_mass: outcome.class_mass,
        });
    }
    Ok(TeachingSet {
        strategy,
        budget,
        params: effective,
        item_ids: per_step.iter().map(|s| s.item_id.clone()).collect(),
        per_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Item;

    fn line(w: f64, b: f64) -> Hypothesis {
        Hypothesis {
            weights: vec![w],
            bias: b,
            tag: String::new(),
        }
    }

    fn two_class(xs: &[(f64, usize)]) -> Dataset {
        let items = xs
            .iter()
            .enumerate()
            .map(|(i, &(x, c))| Item::new(format!("i{i}"), c, vec![x]))
            .collect();
        Dataset::new(vec!["a".into(), "b".into()], 1, items).unwrap()
    }

    #[test]
    fn class_error_examples() {
        let ds = two_class(&[(1.0, 0), (2.0, 1), (-1.0, 1), (-2.0, 0)]);
        let h = line(1.0, 0.0);
        let all = [0, 1, 2, 3];
        assert_eq!(class_error(&h, &ds, &all, 0).unwrap(), 0.5);
        // all-zero scores predict +1, every label for class 0 is -1
        let ds_neg = two_class(&[(1.0, 1), (2.0, 1)]);
        let flat = line(0.0, 0.0);
        assert_eq!(class_error(&flat, &ds_neg, &[0, 1], 0).unwrap(), 1.0);
        assert!(class_error(&h, &ds, &[], 0).is_err());
    }

    #[test]
    fn expected_error_examples() {
        assert_eq!(expected_error(&[0.0, 0.7], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((expected_error(&[0.5, 0.3], &[0.0, 0.5]).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(expected_error(&[0.5, 0.5], &[0.0, 1.0]).unwrap(), 0.5);
        assert!(expected_error(&[0.5], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn single_class_reduction_scenario() {
        // err = {0, 0.5}, prior {0.5, 0.5}, post {0.5, 0.3}: R = 0.1, score -0.15
        let prior = [0.5, 0.5];
        let err = [0.0, 0.5];
        let post = [0.5, 0.3];
        let r = expected_error(&prior, &err).unwrap() - expected_error(&post, &err).unwrap();
        assert!((r - 0.1).abs() < 1e-15);
        let col = [1.0, 0.6];
        let score: f64 = -(0..2).map(|h| err[h] * prior[h] * col[h]).sum::<f64>();
        assert!((score + 0.15).abs() < 1e-15);
        let constant: f64 = (0..2).map(|h| err[h] * prior[h]).sum();
        assert!((constant + score - r).abs() < 1e-15);
    }

    fn small_problem_space() -> (Dataset, HypothesisSpace) {
        let ds = two_class(&[(2.0, 0), (0.5, 0), (-0.4, 1), (-3.0, 1), (1.2, 0)]);
        let hs = HypothesisSpace::new(
            1,
            vec![
                line(1.0, 0.0),
                line(-1.0, -0.01),
                line(1.0, 1.0),
                line(-0.5, 0.8),
            ],
            vec![0, 1],
        )
        .unwrap();
        (ds, hs)
    }

    #[test]
    fn empty_set_has_zero_objective() {
        let (ds, hs) = small_problem_space();
        let ids: Vec<String> = ds.items().iter().map(|i| i.id.clone()).collect();
        let p = TeachingProblem::new(&ds, &hs, &ids).unwrap();
        assert_eq!(p.objective(&[], &LearnerParams::strict(0.5)).unwrap(), 0.0);
        assert_eq!(p.errors(0)[0], 0.0);
        assert_eq!(p.errors(1)[1], 0.0);
    }

    #[test]
    fn engine_matches_reference_on_small_problem() {
        let (ds, hs) = small_problem_space();
        let ids: Vec<String> = ds.items().iter().map(|i| i.id.clone()).collect();
        let p = TeachingProblem::new(&ds, &hs, &ids).unwrap();
        let params = LearnerParams::new(0.5, f64::INFINITY, 1.0).unwrap();
        let reference = reference_greedy(&p, &params, 4).unwrap();
        let ts = greedy_select(Strategy::Explain, 4, &p, &params, 0, Exec::Sequential).unwrap();
        assert_eq!(
            ds.ids_of(&reference.iter().map(|&x| p.pool()[x]).collect::<Vec<_>>()),
            ts.item_ids
        );
        for (t, step) in ts.per_step.iter().enumerate() {
            let r = p.objective(&reference[..=t], &params).unwrap();
            assert!((r - step.objective).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_columns_tie_to_first() {
        let ds = two_class(&[(1.0, 0), (1.0, 0), (1.0, 0), (-1.0, 1)]);
        let hs = HypothesisSpace::new(
            1,
            vec![line(1.0, 0.0), line(-1.0, -0.01), line(1.0, -2.0)],
            vec![0, 1],
        )
        .unwrap();
        let p = TeachingProblem::new(&ds, &hs, &["i0", "i1", "i2"]).unwrap();
        let mut engine =
            FastEngine::new(&p, &LearnerParams::strict(1.0), Exec::Sequential).unwrap();
        let s = engine.scores();
        assert!(s.iter().all(|v| *v == s[0]));
        assert_eq!(engine.step().unwrap().pool_position, 0);
        assert_eq!(engine.step().unwrap().pool_position, 1);
    }

    #[test]
    fn budget_larger_than_pool() {
        let (ds, hs) = small_problem_space();
        let p = TeachingProblem::new(&ds, &hs, &["i0", "i1"]).unwrap();
        let params = LearnerParams::strict(0.5);
        assert!(matches!(
            greedy_select(Strategy::Strict, 3, &p, &params, 0, Exec::Sequential),
            Err(Error::PoolTooSmall { pool: 2, budget: 3 })
        ));
        assert!(reference_greedy(&p, &params, 3).is_err());
    }

    #[test]
    fn random_strategies_are_seeded() {
        let (ds, hs) = small_problem_space();
        let ids: Vec<String> = ds.items().iter().map(|i| i.id.clone()).collect();
        let p = TeachingProblem::new(&ds, &hs, &ids).unwrap();
        let params = LearnerParams::strict(0.5);
        let a = greedy_select(Strategy::RandIm, 3, &p, &params, 7, Exec::Sequential).unwrap();
        let b = greedy_select(Strategy::RandIm, 3, &p, &params, 7, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        let mut uniq = a.item_ids.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 3);
    }
}
