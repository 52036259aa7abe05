//! Explanation heatmaps: class-weighted composition of convolutional feature
//! maps, min-max normalization, entropy difficulty and per-class centering.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{read_json, Dataset, ExplanationMap};

/// Offset that keeps centered difficulties strictly positive.
pub const DIFFICULTY_EPSILON: f64 = 1e-6;

/// Precomputed feature maps of one item, `maps[k]` is channel `k` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapStack {
    pub item_id: String,
    pub width: usize,
    pub height: usize,
    pub maps: Vec<Vec<f64>>,
}

impl FeatureMapStack {
    pub fn channels(&self) -> usize {
        self.maps.len()
    }

    fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::InvalidItem {
                id: self.item_id.clone(),
                reason: "feature map stack has no channels".into(),
            });
        }
        let cells = self.width * self.height;
        if cells == 0 {
            return Err(Error::InvalidItem {
                id: self.item_id.clone(),
                reason: "feature map has a zero dimension".into(),
            });
        }
        if let Some(m) = self.maps.iter().find(|m| m.len() != cells) {
            return Err(Error::InvalidItem {
                id: self.item_id.clone(),
                reason: format!("feature map has {} cells, expected {cells}", m.len()),
            });
        }
        Ok(())
    }
}

/// Final-layer weights `w_c` (length K) and biases `b_c`, one per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Raw class activation map: `e(j) = sum_k w_c[k] * f_k(j) + b_c`.
pub fn compose_explanation(
    fm: &FeatureMapStack,
    cw: &ClassWeights,
    class_index: usize,
) -> Result<Vec<f64>> {
    let (w, b) = match (cw.weights.get(class_index), cw.biases.get(class_index)) {
        (Some(w), Some(&b)) => (w, b),
        _ => {
            return Err(Error::InvalidParam(format!(
                "no class weights for class {class_index}"
            )))
        }
    };
    if w.len() != fm.channels() {
        return Err(Error::DimensionMismatch {
            expected: fm.channels(),
            found: w.len(),
        });
    }
    fm.validate()?;
    let mut out = vec![b; fm.width * fm.height];
    for (wk, map) in w.iter().zip(&fm.maps) {
        for (o, f) in out.iter_mut().zip(map) {
            *o += wk * f;
        }
    }
    Ok(out)
}

/// Min-max scales `raw` into `[0, 1]`. A constant grid maps to all zeros.
pub fn normalize_map(raw: &[f64]) -> Vec<f64> {
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![0.0; raw.len()];
    }
    raw.iter()
        .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
        .collect()
}

/// Mean per-pixel entropy term `-(1/J) sum e ln e`, with `0 ln 0 = 0`.
pub fn entropy_difficulty(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("explanation grid".into()));
    }
    let mut acc = 0.0;
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange {
                value: v,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if v > 0.0 {
            acc -= v * v.ln();
        }
    }
    Ok(acc / values.len() as f64)
}

/// Builds a normalized explanation map with its raw entropy difficulty.
pub fn explanation_from_raw(raw: &[f64], width: usize, height: usize) -> Result<ExplanationMap> {
    if raw.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: raw.len(),
        });
    }
    let values = normalize_map(raw);
    let difficulty = entropy_difficulty(&values)?;
    Ok(ExplanationMap {
        width,
        height,
        values,
        difficulty,
    })
}

/// Removes each class's mean difficulty and shifts the class so its minimum
/// sits at [`DIFFICULTY_EPSILON`]. Items with a manual override keep it (an
/// override of exactly zero becomes epsilon) and take no part in the mean.
pub fn center_difficulties(ds: &Dataset) -> Result<Dataset> {
    let mut items = ds.items().to_vec();
    for item in &items {
        if item.difficulty_override.is_none() && item.explanation.is_none() {
            return Err(Error::MissingDifficulty {
                id: item.id.clone(),
            });
        }
    }
    for c in 0..ds.num_classes() {
        let members: Vec<usize> = (0..items.len())
            .filter(|&i| items[i].class_index == c)
            .collect();
        if members.is_empty() {
            return Err(Error::InvalidDataset(format!(
                "class {c} has no explained items"
            )));
        }
        let centered: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| items[i].difficulty_override.is_none())
            .collect();
        if !centered.is_empty() {
            let raw: Vec<f64> = centered
                .iter()
                .map(|&i| items[i].explanation.as_ref().map_or(0.0, |e| e.difficulty))
                .collect();
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            let min_dev = raw.iter().map(|r| r - mean).fold(f64::INFINITY, f64::min);
            let shift = (-min_dev).max(0.0) + DIFFICULTY_EPSILON;
            for (&i, r) in centered.iter().zip(&raw) {
                let adjusted = r - mean + shift;
                if let Some(e) = items[i].explanation.as_mut() {
                    e.difficulty = adjusted;
                }
            }
        }
        for &i in &members {
            if let Some(o) = items[i].difficulty_override.as_mut() {
                if *o == 0.0 {
                    *o = DIFFICULTY_EPSILON;
                }
            }
        }
    }
    ds.with_items(items)
}

/// Sidecar file with per-item feature maps and the classifier's final layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapFile {
    #[serde(rename = "K")]
    pub k: usize,
    pub width: usize,
    pub height: usize,
    pub class_weights: Vec<Vec<f64>>,
    pub class_biases: Vec<f64>,
    pub items: Vec<FeatureMapEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapEntry {
    pub id: String,
    pub maps: Vec<Vec<f64>>,
}

impl FeatureMapFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f: FeatureMapFile = read_json(path)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParam(
                "feature-map file declares K = 0".into(),
            ));
        }
        if self.class_weights.len() != self.class_biases.len() {
            return Err(Error::InvalidParam(format!(
                "{} class weight vectors but {} biases",
                self.class_weights.len(),
                self.class_biases.len()
            )));
        }
        if let Some(w) = self.class_weights.iter().find(|w| w.len() != self.k) {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: w.len(),
            });
        }
        for entry in &self.items {
            if entry.maps.len() != self.k {
                return Err(Error::InvalidItem {
                    id: entry.id.clone(),
                    reason: format!("{} channels, expected K = {}", entry.maps.len(), self.k),
                });
            }
            self.stack(entry).validate()?;
        }
        Ok(())
    }

    pub fn class_weights(&self) -> ClassWeights {
        ClassWeights {
            weights: self.class_weights.clone(),
            biases: self.class_biases.clone(),
        }
    }

    fn stack(&self, entry: &FeatureMapEntry) -> FeatureMapStack {
        FeatureMapStack {
            item_id: entry.id.clone(),
            width: self.width,
            height: self.height,
            maps: entry.maps.clone(),
        }
    }
}

/// Composes explanations for every item listed in `fm` using its ground-truth
/// class, recomputes raw difficulties of items that already carry a map, then
/// centers difficulties per class.
pub fn attach_explanations(ds: &Dataset, fm: Option<&FeatureMapFile>) -> Result<Dataset> {
    let mut items = ds.items().to_vec();
    if let Some(fm) = fm {
        if fm.class_weights.len() != ds.num_classes() {
            return Err(Error::InvalidParam(format!(
                "feature-map file has weights for {} classes, dataset has {}",
                fm.class_weights.len(),
                ds.num_classes()
            )));
        }
        let cw = fm.class_weights();
        for entry in &fm.items {
            let pos = ds
                .position(&entry.id)
                .ok_or_else(|| Error::UnknownId(entry.id.clone()))?;
            let raw = compose_explanation(&fm.stack(entry), &cw, items[pos].class_index)?;
            items[pos].explanation = Some(explanation_from_raw(&raw, fm.width, fm.height)?);
        }
    }
    for item in items.iter_mut() {
        if let Some(e) = item.explanation.as_mut() {
            e.difficulty = entropy_difficulty(&e.values)?;
        }
    }
    center_difficulties(&ds.with_items(items)?)
}
