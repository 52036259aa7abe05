//! Seeded synthetic datasets: Gaussian class blobs, planted outliers and
//! blob-shaped explanation maps. Used by the benches and acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};

use crate::error::Result;
use crate::explanations::{center_difficulties, explanation_from_raw};
use crate::model::{Dataset, Hypothesis, HypothesisSpace, Item, LearnerParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Distance of each class mean from the origin.
    pub radius: f64,
    pub sigma: f64,
    /// Fraction of items per class replaced by outliers.
    pub outlier_fraction: f64,
    /// Outlier distance from the class mean, in units of `sigma`.
    pub outlier_sigmas: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec {
            classes: 3,
            per_class: 100,
            dim: 2,
            radius: 2.5,
            sigma: 1.0,
            outlier_fraction: 0.0,
            outlier_sigmas: 10.0,
        }
    }
}

fn class_mean(spec: &BlobSpec, k: usize) -> Vec<f64> {
    let mut m = vec![0.0; spec.dim];
    if spec.dim == 1 {
        m[0] = if k.is_multiple_of(2) {
            spec.radius
        } else {
            -spec.radius
        } * (1 + k / 2) as f64;
        return m;
    }
    let angle = k as f64 * std::f64::consts::TAU / spec.classes as f64;
    m[0] = spec.radius * angle.cos();
    m[1] = spec.radius * angle.sin();
    m
}

/// Isotropic Gaussian blobs with class means evenly spaced on a circle in the
/// first two coordinates. Outliers sit `outlier_sigmas * sigma` from their
/// class mean in a random direction. Outlier ids end in `-out`.
pub fn gaussian_blobs(spec: &BlobSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.sigma).expect("sigma must be positive");
    let n_out = (spec.outlier_fraction * spec.per_class as f64).round() as usize;
    let mut items = Vec::with_capacity(spec.classes * spec.per_class);
    for k in 0..spec.classes {
        let mean = class_mean(spec, k);
        for i in 0..spec.per_class {
            let outlier = i < n_out;
            let features: Vec<f64> = if outlier {
                let dir: Vec<f64> = (0..spec.dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dir
                    .iter()
                    .map(|v: &f64| v * v)
                    .sum::<f64>()
                    .sqrt()
                    .max(1e-12);
                mean.iter()
                    .zip(&dir)
                    .map(|(m, d)| m + spec.outlier_sigmas * spec.sigma * d / norm)
                    .collect()
            } else {
                mean.iter().map(|m| m + rng.sample(noise)).collect()
            };
            let id = if outlier {
                format!("c{k}-{i:04}-out")
            } else {
                format!("c{k}-{i:04}")
            };
            items.push(Item::new(id, k, features));
        }
    }
    let classes = (0..spec.classes).map(|k| format!("class{k}")).collect();
    Dataset::new(classes, spec.dim, items).expect("synthetic dataset is valid")
}

/// Gives every item a `width x height` heatmap made of one Gaussian bump of
/// random position and width over a low noise floor, then computes and
/// centers entropy difficulties.
pub fn with_blob_explanations(
    ds: &Dataset,
    width: usize,
    height: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = ds.items().to_vec();
    for item in items.iter_mut() {
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let s = rng.random_range(0.5..(width.max(height) as f64));
        let raw: Vec<f64> = (0..width * height)
            .map(|j| {
                let (x, y) = ((j % width) as f64, (j / width) as f64);
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                (-r2 / (2.0 * s * s)).exp() + 0.05 * rng.random::<f64>()
            })
            .collect();
        item.explanation = Some(explanation_from_raw(&raw, width, height)?);
    }
    center_difficulties(&ds.with_items(items)?)
}

/// Z-scores every feature over the whole dataset. A constant feature is
/// only centered.
pub fn standardize(ds: &Dataset) -> Dataset {
    let (d, n) = (ds.dim(), ds.len() as f64);
    let mut mean = vec![0.0; d];
    let mut var = vec![0.0; d];
    for it in ds.items() {
        for (m, x) in mean.iter_mut().zip(&it.features) {
            *m += x / n;
        }
    }
    for it in ds.items() {
        for ((v, m), x) in var.iter_mut().zip(&mean).zip(&it.features) {
            *v += (x - m).powi(2) / n;
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 })
        .collect();
    let items = ds
        .items()
        .iter()
        .map(|it| {
            let mut it = it.clone();
            for ((x, m), s) in it.features.iter_mut().zip(&mean).zip(&scale) {
                *x = (*x - m) / s;
            }
            it
        })
        .collect();
    ds.with_items(items).expect("same shape")
}

/// A small random teaching problem for cross-checking implementations.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub dataset: Dataset,
    pub space: HypothesisSpace,
    pub params: LearnerParams,
}

/// Draws C in {2, 3, 4}, up to 50 items in two or three dimensions, up to 20
/// random linear hypotheses, alpha in [0.1, 2] and each of beta, gamma from
/// {1, inf}. Every item carries an explanation map.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = rng.random_range(2..=4usize);
    let dim = rng.random_range(2..=3usize);
    let n = rng.random_range(2 * classes..=50);
    let n_h = rng.random_range(classes.max(2)..=20);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    let items: Vec<Item> = (0..n)
        .map(|i| {
            // the first items cover every class once
            let k = if i < classes {
                i
            } else {
                rng.random_range(0..classes)
            };
            let x = centers[k]
                .iter()
                .map(|m| m + rng.sample::<f64, _>(StandardNormal))
                .collect();
            Item::new(format!("x{i:02}"), k, x)
        })
        .collect();
    let hypotheses: Vec<Hypothesis> = (0..n_h)
        .map(|j| Hypothesis {
            weights: (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
            bias: rng.random_range(-2.0..2.0),
            tag: format!("h{j}"),
        })
        .collect();
    let h_star = (0..classes).map(|k| k % n_h).collect();
    let space = HypothesisSpace::new(dim, hypotheses, h_star).expect("valid random space");
    let pick = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.5) {
            1.0
        } else {
            f64::INFINITY
        }
    };
    let alpha = rng.random_range(0.1..=2.0);
    let (beta, gamma) = (pick(&mut rng), pick(&mut rng));
    let params = LearnerParams::new(alpha, beta, gamma).expect("valid random params");
    let ds = Dataset::new((0..classes).map(|k| format!("k{k}")).collect(), dim, items)
        .expect("valid random dataset");
    let dataset = with_blob_explanations(&ds, 4, 4, seed ^ 0x5eed).expect("explanations");
    RandomInstance {
        dataset,
        space,
        params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_shape_and_outliers() {
        let spec = BlobSpec {
            classes: 2,
            per_class: 40,
            outlier_fraction: 0.05,
            ..Default::default()
        };
        let ds = gaussian_blobs(&spec, 1);
        assert_eq!(ds.len(), 80);
        assert_eq!(
            ds.items().iter().filter(|i| i.id.ends_with("-out")).count(),
            4
        );
        assert_eq!(gaussian_blobs(&spec, 1), ds);
    }

    #[test]
    fn standardized_moments() {
        let ds = standardize(&gaussian_blobs(&BlobSpec::default(), 5));
        let n = ds.len() as f64;
        for k in 0..ds.dim() {
            let mean = ds.items().iter().map(|i| i.features[k]).sum::<f64>() / n;
            let var = ds
                .items()
                .iter()
                .map(|i| (i.features[k] - mean).powi(2))
                .sum::<f64>()
                / n;
            assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12);
        }
        let flat = Dataset::new(
            vec!["a".into(), "b".into()],
            1,
            vec![Item::new("p", 0, vec![3.0]), Item::new("q", 1, vec![3.0])],
        )
        .unwrap();
        assert_eq!(standardize(&flat).item(0).features, vec![0.0]);
    }

    #[test]
    fn random_instances_respect_bounds() {
        for seed in 0..50 {
            let r = random_instance(seed);
            let c = r.dataset.num_classes();
            assert!((2..=4).contains(&c));
            assert!(r.dataset.len() <= 50 && r.space.len() <= 20);
            assert!((0.1..=2.0).contains(&r.params.alpha));
            for k in 0..c {
                assert!(r.dataset.items().iter().any(|i| i.class_index == k));
            }
        }
        assert_eq!(random_instance(9).dataset, random_instance(9).dataset);
    }

    #[test]
    fn explanations_are_positive_difficulty() {
        let ds = gaussian_blobs(&BlobSpec::default(), 2);
        let ex = with_blob_explanations(&ds, 6, 6, 3).unwrap();
        assert!(ex
            .items()
            .iter()
            .all(|i| i.effective_difficulty().unwrap() > 0.0));
    }
}
