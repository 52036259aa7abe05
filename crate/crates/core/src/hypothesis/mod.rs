//! Candidate hypothesis generation: subcluster, one-vs-rest and pair-vs-rest
//! linear SVMs plus random unit-norm classifiers, and the teachability
//! filter that drops items the per-class optima cannot classify.

mod kmeans;
mod svm;

pub use kmeans::two_means;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{binary_label, Dataset, Hypothesis, HypothesisSpace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisGenConfig {
    pub target_count: usize,
    pub seed: u64,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub kmeans_max_iters: usize,
}

impl HypothesisGenConfig {
    pub fn with_seed(seed: u64) -> Self {
        HypothesisGenConfig {
            seed,
            ..Default::default()
        }
    }
}

impl Default for HypothesisGenConfig {
    fn default() -> Self {
        HypothesisGenConfig {
            target_count: 100,
            seed: 0,
            svm_lambda: 1e-3,
            svm_epochs: 200,
            kmeans_max_iters: 100,
        }
    }
}

/// Number of SVM-trained hypotheses for `c` classes: two subclusters and one
/// optimum per class, plus one per class pair when `c >= 3`.
pub fn trained_count(c: usize) -> usize {
    let pairs = if c >= 3 { c * (c - 1) / 2 } else { 0 };
    3 * c + pairs
}

pub fn train_linear_svm(
    pos: &[&[f64]],
    neg: &[&[f64]],
    cfg: &HypothesisGenConfig,
) -> Result<Hypothesis> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (weights, bias) = svm::pegasos(pos, neg, cfg.svm_lambda, cfg.svm_epochs, &mut rng)?;
    Ok(Hypothesis {
        weights,
        bias,
        tag: "svm".into(),
    })
}

/// Builds the hypothesis space from the training items, in the order
/// subcluster-vs-rest, one-vs-rest (recorded as `h_star`), pair-vs-rest,
/// random fill.
pub fn build_hypothesis_space<S: AsRef<str>>(
    ds: &Dataset,
    train_ids: &[S],
    cfg: &HypothesisGenConfig,
) -> Result<HypothesisSpace> {
    let c = ds.num_classes();
    let required = trained_count(c);
    if cfg.target_count < required {
        return Err(Error::TargetBelowTrained {
            target: cfg.target_count,
            required,
        });
    }
    let train = ds.positions(train_ids)?;
    let by_class: Vec<Vec<usize>> = (0..c)
        .map(|k| {
            train
                .iter()
                .copied()
                .filter(|&i| ds.item(i).class_index == k)
                .collect()
        })
        .collect();
    if let Some(k) = by_class.iter().position(|m| m.is_empty()) {
        return Err(Error::Empty(format!("class {k} has no training items")));
    }

    let features = |i: usize| ds.item(i).features.as_slice();
    let mut stream = 0u64;
    let mut fit = |pos: &[usize], tag: String| -> Result<Hypothesis> {
        let pos_x: Vec<&[f64]> = pos.iter().map(|&i| features(i)).collect();
        let neg_x: Vec<&[f64]> = train
            .iter()
            .copied()
            .filter(|i| !pos.contains(i))
            .map(features)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        stream += 1;
        let (weights, bias) =
            svm::pegasos(&pos_x, &neg_x, cfg.svm_lambda, cfg.svm_epochs, &mut rng)?;
        Ok(Hypothesis { weights, bias, tag })
    };

    let mut hypotheses = Vec::with_capacity(cfg.target_count);
    for (k, members) in by_class.iter().enumerate() {
        let pts: Vec<&[f64]> = members.iter().map(|&i| features(i)).collect();
        let (a, b) = two_means(&pts, cfg.kmeans_max_iters)?;
        for (j, cluster) in [a, b].into_iter().enumerate() {
            let pos: Vec<usize> = cluster.iter().map(|&p| members[p]).collect();
            hypotheses.push(fit(&pos, format!("class{k}/cluster{j}"))?);
        }
    }
    let mut h_star = Vec::with_capacity(c);
    for (k, members) in by_class.iter().enumerate() {
        h_star.push(hypotheses.len());
        hypotheses.push(fit(members, format!("class{k}/one-vs-rest"))?);
    }
    if c >= 3 {
        for a in 0..c {
            for b in a + 1..c {
                let pos: Vec<usize> = train
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let k = ds.item(i).class_index;
                        k == a || k == b
                    })
                    .collect();
                hypotheses.push(fit(&pos, format!("pair{a}-{b}/vs-rest"))?);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let mut r = 0;
    while hypotheses.len() < cfg.target_count {
        let w: Vec<f64> = (0..ds.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        hypotheses.push(Hypothesis {
            weights: w.iter().map(|v| v / norm).collect(),
            bias: 0.0,
            tag: format!("random{r}"),
        });
        r += 1;
    }
    HypothesisSpace::new(ds.dim(), hypotheses, h_star)
}

/// True when every per-class optimum labels the item correctly under its
/// one-vs-all binarization.
pub fn is_teachable(ds: &Dataset, hs: &HypothesisSpace, index: usize) -> bool {
    let item = ds.item(index);
    (0..ds.num_classes())
        .all(|c| hs.optimal(c).predict(&item.features) == binary_label(item.class_index, c))
}

/// Keeps the training items that all `h*` classify correctly, in order.
pub fn teachability_filter<S: AsRef<str>>(
    ds: &Dataset,
    train_ids: &[S],
    hs: &HypothesisSpace,
) -> Result<Vec<String>> {
    hs.check_compatible(ds)?;
    let train = ds.positions(train_ids)?;
    let kept: Vec<usize> = train
        .into_iter()
        .filter(|&i| is_teachable(ds, hs, i))
        .collect();
    if kept.is_empty() {
        return Err(Error::NothingTeachable);
    }
    Ok(ds.ids_of(&kept))
}
