use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Linear SVM trained with Pegasos: hinge loss, L2 penalty `lambda`, step
/// `1 / (lambda t)`, projection onto the `1/sqrt(lambda)` ball, one seeded
/// shuffle per epoch. The bias rides along as a constant feature and is
/// regularized with the weights.
///
/// Returns `(weights, bias)`.
pub(crate) fn pegasos<R: Rng>(
    pos: &[&[f64]],
    neg: &[&[f64]],
    lambda: f64,
    epochs: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Empty("SVM training needs both classes".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "svm lambda must be positive, got {lambda}"
        )));
    }
    let d = pos[0].len();
    if let Some(x) = pos.iter().chain(neg).find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }

    let samples: Vec<(&[f64], f64)> = pos
        .iter()
        .map(|x| (*x, 1.0))
        .chain(neg.iter().map(|x| (*x, -1.0)))
        .collect();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    // w[d] is the bias weight on the constant feature 1
    let mut w = vec![0.0; d + 1];
    let radius = 1.0 / lambda.sqrt();
    let mut t = 0u64;

    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let (x, y) = samples[i];
            let margin = y * (w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]);
            let decay = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= decay);
            if margin < 1.0 {
                for (v, xi) in w[..d].iter_mut().zip(x) {
                    *v += eta * y * xi;
                }
                w[d] += eta * y;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
        }
    }
    let bias = w.pop().unwrap_or(0.0);
    Ok((w, bias))
}
