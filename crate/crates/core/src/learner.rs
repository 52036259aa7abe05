//! The probabilistic learner: label likelihoods, explanation and density
//! discounts, and the reference (direct product) posterior per class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{binary_label, sgn, Dataset, HypothesisSpace, Item, LearnerParams};

#[inline]
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `P(y | h, x) = 1 / (1 + exp(-alpha h(x) y))`.
pub fn likelihood(score: f64, y: f64, alpha: f64) -> f64 {
    logistic(alpha * score * y)
}

/// Confidence of a hypothesis in the true label: 1 when its prediction agrees
/// with `y`, the label likelihood otherwise.
pub fn confidence(score: f64, y: f64, alpha: f64) -> f64 {
    if sgn(score) == y {
        1.0
    } else {
        likelihood(score, y, alpha)
    }
}

fn discount(value: f64, scale: f64, what: &str) -> Result<f64> {
    if !(value >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "{what} must be non-negative, got {value}"
        )));
    }
    if scale.is_infinite() {
        return Ok(1.0);
    }
    Ok(logistic(scale * value))
}

/// `E(e) = logistic(beta diff(e))`; exactly 1 when `beta` is infinite.
pub fn explanation_discount(diff: f64, beta: f64) -> Result<f64> {
    discount(diff, beta, "explanation difficulty")
}

/// `D(x) = logistic(gamma dist(x))`; exactly 1 when `gamma` is infinite.
pub fn density_discount(dist: f64, gamma: f64) -> Result<f64> {
    discount(dist, gamma, "representativeness distance")
}

/// Mean squared Euclidean distance from `x` to every member of its class,
/// the self term included.
pub fn representativeness_distance(x: &[f64], class_members: &[&[f64]]) -> Result<f64> {
    if class_members.is_empty() {
        return Err(Error::Empty("class has no members".into()));
    }
    let total: f64 = class_members
        .iter()
        .map(|m| m.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    Ok(total / class_members.len() as f64)
}

/// `representativeness_distance` for each index in `pool`, measured against
/// the members of the same class inside `pool`.
pub fn pool_distances(ds: &Dataset, pool: &[usize]) -> Vec<f64> {
    pool.iter()
        .map(|&i| {
            let c = ds.item(i).class_index;
            let members: Vec<&[f64]> = pool
                .iter()
                .filter(|&&j| ds.item(j).class_index == c)
                .map(|&j| ds.item(j).features.as_slice())
                .collect();
            // members contains i itself, so it is never empty
            representativeness_distance(&ds.item(i).features, &members).unwrap_or(0.0)
        })
        .collect()
}

/// Hypothesis-independent factor `E(e) D(x)` for one shown item.
pub fn example_discount(item: &Item, dist: f64, params: &LearnerParams) -> Result<f64> {
    let e = if params.explanations_enabled() {
        let diff = item
            .effective_difficulty()
            .ok_or_else(|| Error::MissingExplanation {
                id: item.id.clone(),
            })?;
        explanation_discount(diff, params.beta)?
    } else {
        1.0
    };
    Ok(e * density_discount(dist, params.gamma)?)
}

/// One teaching example as the learner sees it.
#[derive(Debug, Clone, Copy)]
pub struct Shown<'a> {
    pub features: &'a [f64],
    pub class_index: usize,
    /// `E(e) D(x)`, or 1 when discounting is off.
    pub discount: f64,
}

/// Unnormalized posterior mass over the hypotheses for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPosterior {
    pub class_index: usize,
    pub weights: Vec<f64>,
}

impl ClassPosterior {
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Normalized copy; `None` when all mass has underflowed.
    pub fn normalized(&self) -> Option<Vec<f64>> {
        let z = self.mass();
        (z > 0.0).then(|| self.weights.iter().map(|w| w / z).collect())
    }
}

/// Prior times, for every shown example, the likelihood factor where the
/// hypothesis disagrees with the one-vs-all label and the example's discount.
/// No normalization.
pub fn naive_posterior(
    prior: &[f64],
    shown: &[Shown<'_>],
    hs: &HypothesisSpace,
    alpha: f64,
    class_index: usize,
) -> Result<ClassPosterior> {
    if prior.len() != hs.len() {
        return Err(Error::DimensionMismatch {
            expected: hs.len(),
            found: prior.len(),
        });
    }
    let weights = hs
        .hypotheses()
        .iter()
        .zip(prior)
        .map(|(h, &p)| {
            shown.iter().fold(p, |acc, ex| {
                let y = binary_label(ex.class_index, class_index);
                let score = h.score(ex.features);
                let lik = if sgn(score) != y {
                    likelihood(score, y, alpha)
                } else {
                    1.0
                };
                acc * lik * ex.discount
            })
        })
        .collect();
    Ok(ClassPosterior {
        class_index,
        weights,
    })
}

/// Same product, from explicit per-example columns of confidence values.
pub fn posterior_from_columns(prior: &[f64], columns: &[(Vec<f64>, f64)]) -> Vec<f64> {
    prior
        .iter()
        .enumerate()
        .map(|(h, &p)| {
            columns
                .iter()
                .fold(p, |acc, (col, disc)| acc * col[h] * disc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Hypothesis;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-6
    }

    #[test]
    fn likelihood_examples() {
        assert_eq!(likelihood(0.0, 1.0, 3.0), 0.5);
        assert_eq!(likelihood(0.0, -1.0, 0.1), 0.5);
        assert!(close(likelihood(2.0, 1.0, 0.5), 0.731059));
        assert!(close(likelihood(-2.0, 1.0, 0.5), 0.268941));
        assert!(close(likelihood(2.0, -1.0, 0.5), 0.268941));
    }

    #[test]
    fn discount_examples() {
        assert_eq!(explanation_discount(0.0, 1.0).unwrap(), 0.5);
        assert!(close(explanation_discount(1.0, 1.0).unwrap(), 0.731059));
        assert_eq!(explanation_discount(0.3, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(explanation_discount(0.0, f64::INFINITY).unwrap(), 1.0);
        assert!(explanation_discount(-0.1, 1.0).is_err());

        assert_eq!(density_discount(0.0, 1.0).unwrap(), 0.5);
        assert!(close(density_discount(5.0 / 3.0, 1.0).unwrap(), 0.841131));
        assert_eq!(density_discount(5.0, f64::INFINITY).unwrap(), 1.0);
        assert!(density_discount(-1.0, 1.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let class = [[0.0], [1.0], [2.0]];
        let refs: Vec<&[f64]> = class.iter().map(|v| v.as_slice()).collect();
        assert!(close(
            representativeness_distance(&[0.0], &refs).unwrap(),
            1.666667
        ));
        assert!(close(
            representativeness_distance(&[1.0], &refs).unwrap(),
            0.666667
        ));
        assert!(representativeness_distance(&[4.0], &refs[..0]).is_err());
        let single: [&[f64]; 1] = [&[7.0, 1.0]];
        assert_eq!(
            representativeness_distance(&[7.0, 1.0], &single).unwrap(),
            0.0
        );
    }

    #[test]
    fn column_product_examples() {
        let prior = [0.5, 0.5];
        assert_eq!(posterior_from_columns(&prior, &[]), prior.to_vec());
        let col = vec![1.0, 0.6];
        let p = posterior_from_columns(&prior, &[(col.clone(), 1.0)]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
        let p = posterior_from_columns(&prior, &[(col, 0.36)]);
        assert!((p[0] - 0.18).abs() < 1e-15 && (p[1] - 0.108).abs() < 1e-15);
    }

    fn space() -> HypothesisSpace {
        let h = |w: f64, b: f64| Hypothesis {
            weights: vec![w],
            bias: b,
            tag: String::new(),
        };
        HypothesisSpace::new(1, vec![h(1.0, 0.0), h(-1.0, 0.5), h(0.3, -1.0)], vec![0, 1]).unwrap()
    }

    #[test]
    fn naive_posterior_matches_confidence_product() {
        let hs = space();
        let prior = hs.uniform_prior();
        let xs = [[1.5], [-0.7]];
        let shown = [
            Shown {
                features: &xs[0],
                class_index: 0,
                discount: 0.8,
            },
            Shown {
                features: &xs[1],
                class_index: 1,
                discount: 0.6,
            },
        ];
        let post = naive_posterior(&prior, &shown, &hs, 0.5, 0).unwrap();
        let columns: Vec<(Vec<f64>, f64)> = shown
            .iter()
            .map(|s| {
                let y = binary_label(s.class_index, 0);
                let col = hs
                    .hypotheses()
                    .iter()
                    .map(|h| confidence(h.score(s.features), y, 0.5))
                    .collect();
                (col, s.discount)
            })
            .collect();
        let expected = posterior_from_columns(&prior, &columns);
        for (a, b) in post.weights.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(
            naive_posterior(&prior, &[], &hs, 0.5, 1).unwrap().weights,
            prior
        );
    }

    #[test]
    fn missing_explanation_with_beta_enabled() {
        let item = Item::new("a", 0, vec![0.0]);
        assert!(matches!(
            example_discount(&item, 1.0, &LearnerParams::default()),
            Err(Error::MissingExplanation { .. })
        ));
        assert_eq!(
            example_discount(&item, 1.0, &LearnerParams::strict(0.5)).unwrap(),
            1.0
        );
    }

    #[test]
    fn perfect_learner_limit() {
        assert!(likelihood(-0.1, 1.0, 1e6) < 1e-40);
    }

    proptest! {
        #[test]
        fn likelihood_is_symmetric(score in -50.0f64..50.0, alpha in 0.01f64..5.0) {
            let s = likelihood(score, 1.0, alpha) + likelihood(score, -1.0, alpha);
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn discounts_cancel_under_normalization(
            xs in proptest::collection::vec((-3.0f64..3.0, 0usize..2, 0.5f64..1.0), 0..8),
            alpha in 0.1f64..2.0,
        ) {
            let hs = space();
            let prior = hs.uniform_prior();
            let on: Vec<Shown> = xs.iter().map(|(x, c, d)| Shown {
                features: std::slice::from_ref(x), class_index: *c, discount: *d,
            }).collect();
            let off: Vec<Shown> = on.iter().map(|s| Shown { discount: 1.0, ..*s }).collect();
            for c in 0..2 {
                let a = naive_posterior(&prior, &on, &hs, alpha, c).unwrap();
                let b = naive_posterior(&prior, &off, &hs, alpha, c).unwrap();
                let (na, nb) = (a.normalized().unwrap(), b.normalized().unwrap());
                for (u, v) in na.iter().zip(&nb) {
                    prop_assert!((u - v).abs() < 1e-9);
                }
                // mass never grows as examples are appended
                for t in 0..on.len() {
                    let shorter = naive_posterior(&prior, &on[..t], &hs, alpha, c).unwrap();
                    let longer = naive_posterior(&prior, &on[..t + 1], &hs, alpha, c).unwrap();
                    for (s, l) in shorter.weights.iter().zip(&longer.weights) {
                        prop_assert!(l <= s);
                    }
                }
            }
        }
    }
}
