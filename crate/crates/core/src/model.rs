//! Domain types shared by every stage of the pipeline, plus the JSON file
//! formats for datasets, hypothesis spaces and teaching sets.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sign with the tie rule `sgn(0) = +1`.
#[inline]
pub fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One-vs-all label of `class_index` for the task of `target` class.
#[inline]
pub fn binary_label(class_index: usize, target: usize) -> f64 {
    if class_index == target {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationMap {
    pub width: usize,
    pub height: usize,
    /// Row-major grid, `width * height` values in `[0, 1]`.
    pub values: Vec<f64>,
    pub difficulty: f64,
}

impl ExplanationMap {
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    fn validate(&self, id: &str) -> Result<()> {
        let bad = |reason: String| Error::InvalidItem {
            id: id.to_string(),
            reason,
        };
        if self.width == 0 || self.height == 0 {
            return Err(bad("explanation has a zero dimension".into()));
        }
        if self.values.len() != self.pixel_count() {
            return Err(bad(format!(
                "explanation has {} values, expected {}x{}",
                self.values.len(),
                self.width,
                self.height
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(bad(format!("explanation value {v} outside [0, 1]")));
        }
        if !(self.difficulty >= 0.0) {
            return Err(bad(format!(
                "explanation difficulty {} is negative",
                self.difficulty
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    #[serde(rename = "class")]
    pub class_index: usize,
    pub features: Vec<f64>,
    #[serde(default)]
    pub image_uri: Option<String>,
    #[serde(default)]
    pub explanation: Option<ExplanationMap>,
    #[serde(default)]
    pub difficulty_override: Option<f64>,
}

impl Item {
    pub fn new(id: impl Into<String>, class_index: usize, features: Vec<f64>) -> Self {
        Item {
            id: id.into(),
            class_index,
            features,
            image_uri: None,
            explanation: None,
            difficulty_override: None,
        }
    }

    /// Difficulty used by the explanation discount: the manual override when
    /// present, otherwise the explanation's (centered) difficulty.
    pub fn effective_difficulty(&self) -> Option<f64> {
        self.difficulty_override
            .or_else(|| self.explanation.as_ref().map(|e| e.difficulty))
    }
}

#[derive(Debug, Deserialize)]
struct RawDataset {
    classes: Vec<String>,
    d: usize,
    items: Vec<Item>,
}

impl TryFrom<RawDataset> for Dataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        Dataset::new(raw.classes, raw.d, raw.items)
    }
}

/// A validated, immutable collection of labelled items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset")]
pub struct Dataset {
    classes: Vec<String>,
    d: usize,
    items: Vec<Item>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(classes: Vec<String>, d: usize, items: Vec<Item>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, found {}",
                classes.len()
            )));
        }
        if d == 0 {
            return Err(Error::InvalidDataset(
                "feature dimension d must be positive".into(),
            ));
        }
        let mut index = HashMap::with_capacity(items.len());
        let mut dims: Option<(usize, usize)> = None;
        for (i, item) in items.iter().enumerate() {
            let bad = |reason: String| Error::InvalidItem {
                id: item.id.clone(),
                reason,
            };
            if index.insert(item.id.clone(), i).is_some() {
                return Err(bad("duplicate item id".into()));
            }
            if item.features.len() != d {
                return Err(bad(format!(
                    "features length {} does not match d = {d}",
                    item.features.len()
                )));
            }
            if item.features.iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite feature value".into()));
            }
            if item.class_index >= classes.len() {
                return Err(bad(format!(
                    "class index {} out of range for {} classes",
                    item.class_index,
                    classes.len()
                )));
            }
            if let Some(o) = item.difficulty_override {
                if !(o >= 0.0) {
                    return Err(bad(format!("difficulty override {o} is negative")));
                }
            }
            if let Some(e) = &item.explanation {
                e.validate(&item.id)?;
                match dims {
                    None => dims = Some((e.width, e.height)),
                    Some((w, h)) if (w, h) != (e.width, e.height) => {
                        return Err(Error::MixedExplanationDims {
                            id: item.id.clone(),
                            expected_w: w,
                            expected_h: h,
                            found_w: e.width,
                            found_h: e.height,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Dataset {
            classes,
            d,
            items,
            index,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, index: usize) -> &Item {
        &self.items[index]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Maps ids to item indices, failing on the first unknown id.
    pub fn positions<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                self.position(id.as_ref())
                    .ok_or_else(|| Error::UnknownId(id.as_ref().to_string()))
            })
            .collect()
    }

    pub fn ids_of(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&i| self.items[i].id.clone()).collect()
    }

    /// Rebuilds the dataset with modified items, re-running validation.
    pub fn with_items(&self, items: Vec<Item>) -> Result<Dataset> {
        Dataset::new(self.classes.clone(), self.d, items)
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    read_json(path)
}

pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_json(ds, path)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Linear scoring function `h(x) = w . x + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub tag: String,
}

impl Hypothesis {
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        sgn(self.score(x))
    }
}

#[derive(Debug, Deserialize)]
struct RawSpace {
    d: usize,
    hypotheses: Vec<Hypothesis>,
    h_star: Vec<usize>,
}

impl TryFrom<RawSpace> for HypothesisSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        HypothesisSpace::new(raw.d, raw.hypotheses, raw.h_star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct HypothesisSpace {
    d: usize,
    hypotheses: Vec<Hypothesis>,
    h_star: Vec<usize>,
}

impl HypothesisSpace {
    pub fn new(d: usize, hypotheses: Vec<Hypothesis>, h_star: Vec<usize>) -> Result<Self> {
        for (index, h) in hypotheses.iter().enumerate() {
            let bad = |reason: String| Error::InvalidHypothesis { index, reason };
            if h.weights.len() != d {
                return Err(bad(format!(
                    "weights length {} does not match d = {d}",
                    h.weights.len()
                )));
            }
            if h.weights.iter().any(|w| !w.is_finite()) || !h.bias.is_finite() {
                return Err(bad("non-finite parameter".into()));
            }
            if h.bias == 0.0 && h.weights.iter().all(|&w| w == 0.0) {
                return Err(bad("zero hypothesis".into()));
            }
        }
        if h_star.len() < 2 {
            return Err(Error::InvalidSpace(format!(
                "h_star must name one hypothesis per class (at least 2), found {}",
                h_star.len()
            )));
        }
        if hypotheses.len() < h_star.len() {
            return Err(Error::InvalidSpace(format!(
                "{} hypotheses cannot cover {} classes",
                hypotheses.len(),
                h_star.len()
            )));
        }
        for (c, &h) in h_star.iter().enumerate() {
            if h >= hypotheses.len() {
                return Err(Error::InvalidSpace(format!(
                    "h_star[{c}] = {h} out of range"
                )));
            }
            if h_star[..c].contains(&h) {
                return Err(Error::InvalidSpace(format!(
                    "h_star[{c}] = {h} repeats another class's optimum"
                )));
            }
        }
        Ok(HypothesisSpace {
            d,
            hypotheses,
            h_star,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn h_star(&self) -> &[usize] {
        &self.h_star
    }

    pub fn optimal(&self, class_index: usize) -> &Hypothesis {
        &self.hypotheses[self.h_star[class_index]]
    }

    /// Checks that this space can be used with `ds`.
    pub fn check_compatible(&self, ds: &Dataset) -> Result<()> {
        if self.d != ds.dim() {
            return Err(Error::DimensionMismatch {
                expected: ds.dim(),
                found: self.d,
            });
        }
        if self.h_star.len() != ds.num_classes() {
            return Err(Error::InvalidSpace(format!(
                "h_star has {} entries but the dataset has {} classes",
                self.h_star.len(),
                ds.num_classes()
            )));
        }
        Ok(())
    }

    /// Uniform prior `1 / |H|`.
    pub fn uniform_prior(&self) -> Vec<f64> {
        vec![1.0 / self.len() as f64; self.len()]
    }
}

pub fn load_hypotheses(path: impl AsRef<Path>) -> Result<HypothesisSpace> {
    read_json(path)
}

pub fn write_hypotheses(hs: &HypothesisSpace, path: impl AsRef<Path>) -> Result<()> {
    write_json(hs, path)
}

/// Serializes `f64::INFINITY` as the string `"inf"`.
mod finite_or_inf {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tok(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Tok(t) => parse_positive_or_inf(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses a positive real or the literal `inf`.
pub fn parse_positive_or_inf(token: &str) -> std::result::Result<f64, String> {
    let t = token.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    match t.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(v),
        Ok(v) => Err(format!("{v} is not positive")),
        Err(_) => Err(format!("'{token}' is neither a number nor 'inf'")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub alpha: f64,
    #[serde(with = "finite_or_inf")]
    pub beta: f64,
    #[serde(with = "finite_or_inf")]
    pub gamma: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            alpha: 0.5,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

impl LearnerParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = LearnerParams { alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Label-only learner: both discounts disabled.
    pub fn strict(alpha: f64) -> Self {
        LearnerParams {
            alpha,
            beta: f64::INFINITY,
            gamma: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParam(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive or inf, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn explanations_enabled(&self) -> bool {
        self.beta.is_finite()
    }

    pub fn density_enabled(&self) -> bool {
        self.gamma.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "RAND_IM")]
    RandIm,
    #[serde(rename = "RAND_EXP")]
    RandExp,
    #[serde(rename = "STRICT")]
    Strict,
    #[serde(rename = "EXPLAIN")]
    Explain,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::RandIm,
        Strategy::RandExp,
        Strategy::Strict,
        Strategy::Explain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::RandIm => "RAND_IM",
            Strategy::RandExp => "RAND_EXP",
            Strategy::Strict => "STRICT",
            Strategy::Explain => "EXPLAIN",
        }
    }

    /// Whether feedback for this strategy carries the explanation map.
    pub fn shows_explanation(self) -> bool {
        matches!(self, Strategy::RandExp | Strategy::Explain)
    }

    pub fn is_random(self) -> bool {
        matches!(self, Strategy::RandIm | Strategy::RandExp)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == norm)
            .ok_or_else(|| Error::InvalidParam(format!("unknown strategy '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostic {
    pub item_id: String,
    /// Objective value after adding this item.
    pub objective: f64,
    /// Per-class total unnormalized posterior mass after the update.
    pub class_mass: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeachingSet {
    pub strategy: Strategy,
    pub budget: usize,
    pub params: LearnerParams,
    pub item_ids: Vec<String>,
    pub per_step: Vec<StepDiagnostic>,
}

pub fn load_teaching_set(path: impl AsRef<Path>) -> Result<TeachingSet> {
    let ts: TeachingSet = read_json(path)?;
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = ts.item_ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(Error::InvalidParam(format!(
            "teaching set repeats item '{dup}'"
        )));
    }
    if ts.item_ids.len() > ts.budget {
        return Err(Error::InvalidParam(format!(
            "teaching set has {} items but budget {}",
            ts.item_ids.len(),
            ts.budget
        )));
    }
    Ok(ts)
}

pub fn write_teaching_set(ts: &TeachingSet, path: impl AsRef<Path>) -> Result<()> {
    write_json(ts, path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Stratified train/test split: each class is shuffled independently and cut
/// at `round(fraction * n_c)`, clamped so both sides keep at least one item.
/// Ids come back in dataset order.
pub fn split_dataset(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_train = vec![false; ds.len()];
    for c in 0..ds.num_classes() {
        let mut members: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.item(i).class_index == c)
            .collect();
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: c,
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
        for &i in &members[..n_train] {
            is_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (item, t) in ds.items().iter().zip(is_train) {
        if t {
            train.push(item.id.clone());
        } else {
            test.push(item.id.clone());
        }
    }
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(n_per_class: usize) -> Dataset {
        let items = (0..2 * n_per_class)
            .map(|i| Item::new(format!("i{i}"), i % 2, vec![i as f64, 1.0]))
            .collect();
        Dataset::new(vec!["a".into(), "b".into()], 2, items).unwrap()
    }

    #[test]
    fn minimal_file_loads() {
        let json = r#"{"classes":["x","y"],"d":2,"items":[
            {"id":"a","class":0,"features":[0,1],"image_uri":null,"explanation":null,"difficulty_override":null},
            {"id":"b","class":1,"features":[1,0],"image_uri":"b.png","explanation":null,"difficulty_override":null},
            {"id":"c","class":1,"features":[1,1]}]}"#;
        let ds: Dataset = serde_json::from_str(json).unwrap();
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.position("c"), Some(2));
    }

    #[test]
    fn wrong_feature_length_names_item() {
        let json = r#"{"classes":["x","y"],"d":2,"items":[
            {"id":"a","class":0,"features":[0,1,2]}]}"#;
        let err = serde_json::from_str::<Dataset>(json).unwrap_err();
        assert!(err.to_string().contains("'a'"), "{err}");
    }

    #[test]
    fn mixed_explanation_dims_rejected() {
        let map = |w: usize| ExplanationMap {
            width: w,
            height: w,
            values: vec![0.5; w * w],
            difficulty: 0.1,
        };
        let mut a = Item::new("a", 0, vec![0.0]);
        a.explanation = Some(map(4));
        let mut b = Item::new("b", 1, vec![1.0]);
        b.explanation = Some(map(8));
        let err = Dataset::new(vec!["x".into(), "y".into()], 1, vec![a, b]).unwrap_err();
        assert!(matches!(err, Error::MixedExplanationDims { .. }), "{err}");
    }

    #[test]
    fn other_item_invariants() {
        let classes = vec!["x".to_string(), "y".to_string()];
        let bad_class = Item::new("a", 2, vec![0.0]);
        assert!(Dataset::new(classes.clone(), 1, vec![bad_class]).is_err());
        let dup = vec![Item::new("a", 0, vec![0.0]), Item::new("a", 1, vec![0.0])];
        assert!(Dataset::new(classes.clone(), 1, dup).is_err());
        let mut neg = Item::new("a", 0, vec![0.0]);
        neg.difficulty_override = Some(-1.0);
        assert!(Dataset::new(classes, 1, vec![neg]).is_err());
        assert!(Dataset::new(vec!["only".into()], 1, vec![]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let mut ds_items = tiny(3).items().to_vec();
        ds_items[0].explanation = Some(ExplanationMap {
            width: 2,
            height: 1,
            values: vec![0.0, 1.0],
            difficulty: 0.25,
        });
        ds_items[1].difficulty_override = Some(1000.0);
        let ds = tiny(3).with_items(ds_items).unwrap();
        write_dataset(&ds, &path).unwrap();
        assert_eq!(load_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn split_counts_per_class() {
        let ds = tiny(5);
        let s = split_dataset(&ds, 0.8, 7).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        for c in 0..2 {
            let count = |ids: &[String]| {
                ids.iter()
                    .filter(|id| ds.item(ds.position(id).unwrap()).class_index == c)
                    .count()
            };
            assert_eq!(count(&s.train), 4);
            assert_eq!(count(&s.test), 1);
        }
    }

    #[test]
    fn split_symmetric_half() {
        let ds = tiny(2);
        let s = split_dataset(&ds, 0.5, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (2, 2));
    }

    #[test]
    fn split_is_deterministic_partition() {
        let ds = tiny(9);
        let a = split_dataset(&ds, 0.7, 42).unwrap();
        let b = split_dataset(&ds, 0.7, 42).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<_> = a.train.iter().chain(&a.test).cloned().collect();
        all.sort();
        let mut expected: Vec<_> = ds.items().iter().map(|i| i.id.clone()).collect();
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn split_rejects_tiny_class() {
        let items = vec![
            Item::new("a", 0, vec![0.0]),
            Item::new("b", 1, vec![0.0]),
            Item::new("c", 1, vec![0.0]),
        ];
        let ds = Dataset::new(vec!["x".into(), "y".into()], 1, items).unwrap();
        assert!(matches!(
            split_dataset(&ds, 0.8, 0),
            Err(Error::ClassTooSmall { class: 0, count: 1 })
        ));
        assert!(split_dataset(&tiny(3), 1.0, 0).is_err());
    }

    #[test]
    fn zero_hypothesis_rejected() {
        let zero = Hypothesis {
            weights: vec![0.0, 0.0],
            bias: 0.0,
            tag: "z".into(),
        };
        let ok = Hypothesis {
            weights: vec![1.0, 0.0],
            bias: 0.0,
            tag: "a".into(),
        };
        assert!(HypothesisSpace::new(2, vec![ok.clone(), zero], vec![0, 1]).is_err());
        assert!(HypothesisSpace::new(2, vec![ok.clone(), ok.clone()], vec![0, 0]).is_err());
        assert!(HypothesisSpace::new(2, vec![ok.clone(), ok], vec![0, 1]).is_ok());
    }

    #[test]
    fn params_inf_round_trip() {
        let p = LearnerParams::strict(0.5);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"alpha":0.5,"beta":"inf","gamma":"inf"}"#);
        assert_eq!(serde_json::from_str::<LearnerParams>(&text).unwrap(), p);
        assert!(LearnerParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sign_tie_rule() {
        assert_eq!(sgn(0.0), 1.0);
        assert_eq!(sgn(-0.0), 1.0);
        assert_eq!(sgn(-1e-300), -1.0);
    }

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.name().to_lowercase().parse::<Strategy>().unwrap(), s);
        }
        assert!("greedy".parse::<Strategy>().is_err());
    }
}
