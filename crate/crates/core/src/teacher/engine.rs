use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::learner::confidence;
use crate::model::{binary_label, LearnerParams};

use super::{pick_best, TeachingProblem};

/// Result of one greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Position of the chosen item in the candidate pool.
    pub pool_position: usize,
    /// Objective value `R(T ∪ {x})` implied by the winning score.
    pub objective: f64,
    /// Total unnormalized posterior mass per class after the update.
    pub class_mass: Vec<f64>,
}

/// Incremental greedy engine. For every class it keeps the error vector, the
/// confidence matrix `L` (1 where a hypothesis agrees with the one-vs-all
/// label, the label likelihood otherwise), `L` with each column scaled by
/// the example's discount, and the running unnormalized posterior.
///
/// Matrices are stored column-major: column `x` occupies
/// `[x * n_h, (x + 1) * n_h)`.
#[derive(Debug, Clone)]
pub struct FastEngine {
    n_h: usize,
    n_x: usize,
    errors: Vec<Vec<f64>>,
    confidence: Vec<Vec<f64>>,
    discounted: Vec<Vec<f64>>,
    posterior: Vec<Vec<f64>>,
    remaining: Vec<bool>,
    prior_term: f64,
    selected: Vec<usize>,
    exec: Exec,
}

impl FastEngine {
    pub fn new(problem: &TeachingProblem<'_>, params: &LearnerParams, exec: Exec) -> Result<Self> {
        params.validate()?;
        let ds = problem.dataset();
        let hs = problem.space();
        let pool = problem.pool();
        let (n_h, n_x, n_c) = (hs.len(), pool.len(), ds.num_classes());
        let discounts = problem.discounts(params)?;

        let mut scores = vec![0.0; n_x * n_h];
        exec.fill(&mut scores, |k, s| {
            let (x, h) = (k / n_h, k % n_h);
            *s = hs.hypotheses()[h].score(&ds.item(pool[x]).features);
        });

        let alpha = params.alpha;
        let mut confidence_mats = Vec::with_capacity(n_c);
        let mut discounted = Vec::with_capacity(n_c);
        for c in 0..n_c {
            let mut l = vec![0.0; n_x * n_h];
            exec.fill(&mut l, |k, v| {
                let y = binary_label(ds.item(pool[k / n_h]).class_index, c);
                *v = confidence(scores[k], y, alpha);
            });
            let lp: Vec<f64> = l
                .iter()
                .enumerate()
                .map(|(k, v)| v * discounts[k / n_h])
                .collect();
            confidence_mats.push(l);
            discounted.push(lp);
        }

        let prior = problem.prior();
        let errors: Vec<Vec<f64>> = (0..n_c).map(|c| problem.errors(c).to_vec()).collect();
        let prior_term = errors
            .iter()
            .map(|e| e.iter().zip(prior).map(|(a, b)| a * b).sum::<f64>())
            .sum::<f64>()
            / n_c as f64;

        Ok(FastEngine {
            n_h,
            n_x,
            errors,
            confidence: confidence_mats,
            discounted,
            posterior: vec![prior.to_vec(); n_c],
            remaining: vec![true; n_x],
            prior_term,
            selected: Vec::new(),
            exec,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.posterior.len()
    }

    pub fn posterior(&self, class_index: usize) -> &[f64] {
        &self.posterior[class_index]
    }

    pub fn confidence_column(&self, class_index: usize, x: usize) -> &[f64] {
        &self.confidence[class_index][x * self.n_h..(x + 1) * self.n_h]
    }

    pub fn discounted_column(&self, class_index: usize, x: usize) -> &[f64] {
        &self.discounted[class_index][x * self.n_h..(x + 1) * self.n_h]
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn remaining(&self) -> usize {
        self.remaining.iter().filter(|r| **r).count()
    }

    pub fn is_remaining(&self, x: usize) -> bool {
        self.remaining.get(x).copied().unwrap_or(false)
    }

    /// Current objective `R(T)` for the selected prefix.
    pub fn objective(&self) -> f64 {
        let c = self.num_classes() as f64;
        self.prior_term
            - self
                .errors
                .iter()
                .zip(&self.posterior)
                .map(|(e, p)| e.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
                .sum::<f64>()
                / c
    }

    /// Score `-(1/C) sum_c (e^c ∘ p^c) Lp^c[:, x]` for every pool position;
    /// already-selected positions score `-inf`. `R(T ∪ {x})` equals the
    /// score plus a constant shared by all candidates.
    pub fn scores(&self) -> Vec<f64> {
        let weighted: Vec<Vec<f64>> = self
            .errors
            .iter()
            .zip(&self.posterior)
            .map(|(e, p)| e.iter().zip(p).map(|(a, b)| a * b).collect())
            .collect();
        let n_h = self.n_h;
        let inv_c = 1.0 / self.num_classes() as f64;
        self.exec.map(self.n_x, |x| {
            if !self.remaining[x] {
                return f64::NEG_INFINITY;
            }
            let total: f64 = weighted
                .iter()
                .zip(&self.discounted)
                .map(|(ep, lp)| {
                    ep.iter()
                        .zip(&lp[x * n_h..(x + 1) * n_h])
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                })
                .sum();
            -total * inv_c
        })
    }

    /// `R(T ∪ {x})` implied by a score from [`FastEngine::scores`].
    pub fn implied_objective(&self, score: f64) -> f64 {
        self.prior_term + score
    }

    /// Selects the best remaining candidate and updates the posteriors.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let scores = self.scores();
        let best = pick_best(
            scores
                .iter()
                .copied()
                .enumerate()
                .filter(|(x, _)| self.remaining[*x]),
        )
        .ok_or_else(|| Error::Empty("no remaining candidates".into()))?;
        Ok(self.apply(best))
    }

    /// Adds pool position `x` to the teaching set regardless of its score.
    pub fn apply(&mut self, x: usize) -> StepOutcome {
        assert!(self.remaining[x], "pool position {x} already selected");
        let n_h = self.n_h;
        for (p, lp) in self.posterior.iter_mut().zip(&self.discounted) {
            for (pv, l) in p.iter_mut().zip(&lp[x * n_h..(x + 1) * n_h]) {
                *pv *= l;
            }
        }
        self.remaining[x] = false;
        self.selected.push(x);
        StepOutcome {
            pool_position: x,
            objective: self.objective(),
            class_mass: self.posterior.iter().map(|p| p.iter().sum()).collect(),
        }
    }
}
