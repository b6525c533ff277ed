//! Precision-recall curves, AUC, accuracy after reranking, ablation and
//! threshold-transfer tables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::coverage::CoverageParams;
use crate::dataset::{build_extended, grouped_split, label_records, PoseRecord, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{select_features, FeatureSet, FeatureVector, RecordFeatures};
use crate::model::{train, ConfidenceModel, TrainConfig};
use crate::pose::{is_correct, ErrorThreshold};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLabel {
    pub score: f64,
    pub label: bool,
    pub query_id: String,
    pub candidate_rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// `(recall, precision)`, recall non-decreasing.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// PR curve over scored items. Items are swept by descending score; tied
/// scores form a single operating point. The curve starts at
/// `(0, precision of the first group)` and the AUC is the trapezoidal
/// integral over recall.
pub fn pr_curve(items: &[ScoredLabel]) -> Result<PrCurve> {
    let scores: Vec<f64> = items.iter().map(|i| i.score).collect();
    let labels: Vec<bool> = items.iter().map(|i| i.label).collect();
    pr_curve_from(&scores, &labels)
}

pub fn pr_curve_from(scores: &[f64], labels: &[bool]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), got: labels.len() });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParams("scores must be finite".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::with_capacity(scores.len() + 1);
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += labels[order[i]] as usize;
            seen += 1;
            i += 1;
        }
        points.push((tp as f64 / positives as f64, tp as f64 / seen as f64));
    }
    points.insert(0, (0.0, points[0].1));
    let auc = auc(&points)?;
    Ok(PrCurve { points, auc })
}

/// Trapezoidal area under `(recall, precision)` points.
pub fn auc(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateCurve);
    }
    Ok(points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum())
}

/// AUC, or the reason it is undefined for this labelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AucOutcome {
    Ok { auc: f64 },
    Degenerate { reason: String },
}

impl AucOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            AucOutcome::Ok { auc } => Some(*auc),
            AucOutcome::Degenerate { .. } => None,
        }
    }
}

/// Only all-positive and all-negative labellings are degenerate; with both
/// classes present the curve is always defined.
pub fn auc_outcome(scores: &[f64], labels: &[bool]) -> Result<AucOutcome> {
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Ok(AucOutcome::Degenerate { reason: "no positive labels".into() });
    }
    if positives == labels.len() {
        return Ok(AucOutcome::Degenerate { reason: "all labels positive".into() });
    }
    Ok(AucOutcome::Ok { auc: pr_curve_from(scores, labels)?.auc })
}

/// Records together with their precomputed features.
#[derive(Debug, Clone, Default)]
pub struct EvalSet {
    pub records: Vec<PoseRecord>,
    pub features: Vec<RecordFeatures>,
}

impl EvalSet {
    pub fn new(records: Vec<PoseRecord>, params: &CoverageParams) -> Self {
        let features = records.iter().map(|r| RecordFeatures::compute(r, params)).collect();
        Self { records, features }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            features: indices.iter().map(|&i| self.features[i]).collect(),
        }
    }

    pub fn vectors(&self, set: &FeatureSet) -> Result<Vec<FeatureVector>> {
        self.records.iter().zip(&self.features).map(|(r, f)| select_features(r, f, set)).collect()
    }

    pub fn labels(&self, threshold: &ErrorThreshold) -> Result<Vec<bool>> {
        label_records(&self.records, threshold)
    }

    /// Model confidence per record.
    pub fn confidences(&self, model: &ConfidenceModel) -> Result<Vec<f64>> {
        self.vectors(&model.feature_set)?.iter().map(|v| model.predict(v)).collect()
    }

    pub fn inlier_scores(&self) -> Vec<f64> {
        self.features.iter().map(|f| f.inlier_count).collect()
    }

    /// Record indices grouped by query, in order of first appearance.
    pub fn query_groups(&self) -> Vec<Vec<usize>> {
        let mut slot: HashMap<&str, usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let g = *slot.entry(r.query_id.as_str()).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
        groups
    }

    /// Per query, the candidate with the highest score (ties: more inliers,
    /// then lower candidate rank).
    pub fn select_by(&self, scores: &[f64]) -> Vec<usize> {
        self.query_groups()
            .iter()
            .map(|g| {
                let key = |&i: &usize| (scores[i], self.records[i].inlier_count(), self.records[i].candidate_rank);
                let keys: Vec<_> = g.iter().map(key).collect();
                g[pick_best(&keys)]
            })
            .collect()
    }

    /// Per query, the candidate with the most inliers.
    pub fn select_max_inliers(&self) -> Vec<usize> {
        self.select_by(&self.inlier_scores())
    }

    /// The top candidate of each query under inlier-count ranking, the
    /// candidate a count-ranked localization pipeline would return.
    pub fn best_candidates(&self) -> Self {
        self.subset(&self.select_max_inliers())
    }
}

/// Index of the best `(score, inliers, rank)` key: highest score, then
/// most inliers, then lowest rank.
fn pick_best(keys: &[(f64, usize, u32)]) -> usize {
    let better =
        |a: &(f64, usize, u32), b: &(f64, usize, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(b.2.cmp(&a.2));
    (0..keys.len()).max_by(|&i, &j| better(&keys[i], &keys[j])).unwrap_or(0)
}

/// Index of the candidate with the highest confidence.
pub fn rerank(candidates: &[PoseRecord], model: &ConfidenceModel, params: &CoverageParams) -> Result<usize> {
    let first = candidates.first().ok_or(Error::EmptyCandidates)?;
    if candidates.iter().any(|c| c.query_id != first.query_id) {
        return Err(Error::InvalidParams("candidates belong to different queries".into()));
    }
    let set = EvalSet::new(candidates.to_vec(), params);
    let scores = set.confidences(model)?;
    Ok(set.select_by(&scores)[0])
}

/// Fraction of the selected candidates whose pose is correct.
pub fn accuracy_at(selected: &[&PoseRecord], threshold: &ErrorThreshold) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut correct = 0usize;
    for r in selected {
        correct += is_correct(&r.pose_error()?, threshold) as usize;
    }
    Ok(correct as f64 / selected.len() as f64)
}

pub fn train_on(
    set: &EvalSet,
    labels: &[bool],
    features: &FeatureSet,
    config: &TrainConfig,
) -> Result<ConfidenceModel> {
    let data: Vec<(FeatureVector, bool)> = set.vectors(features)?.into_iter().zip(labels.iter().copied()).collect();
    train(&data, features, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub features: FeatureSet,
    #[serde(flatten)]
    pub auc: AucOutcome,
}

/// The full set, the inlier-count baseline, then every leave-one-out subset.
pub fn standard_ablation_subsets(full: &FeatureSet) -> Vec<FeatureSet> {
    let mut out = vec![full.clone()];
    for s in std::iter::once(FeatureSet::inliers_only()).chain(full.leave_one_out()) {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Trains one model per subset on the same training data and reports its
/// test AUC. Rows follow the order of `subsets`.
pub fn ablation(
    train_set: &EvalSet,
    train_labels: &[bool],
    test_set: &EvalSet,
    test_labels: &[bool],
    subsets: &[FeatureSet],
    config: &TrainConfig,
) -> Result<Vec<AblationRow>> {
    subsets
        .iter()
        .map(|features| {
            let model = train_on(train_set, train_labels, features, config)?;
            let scores = test_set.confidences(&model)?;
            Ok(AblationRow { features: features.clone(), auc: auc_outcome(&scores, test_labels)? })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: ErrorThreshold,
    pub positives: usize,
    pub total: usize,
    pub model: AucOutcome,
    pub inliers: AucOutcome,
}

/// Relabels `test` at each threshold and recomputes both AUCs with the
/// model as trained.
pub fn threshold_sweep(
    test: &EvalSet,
    model: &ConfidenceModel,
    thresholds: &[ErrorThreshold],
) -> Result<Vec<SweepRow>> {
    let confidences = test.confidences(model)?;
    let inliers = test.inlier_scores();
    thresholds
        .iter()
        .map(|t| {
            let labels = test.labels(t)?;
            Ok(SweepRow {
                threshold: *t,
                positives: labels.iter().filter(|&&l| l).count(),
                total: labels.len(),
                model: auc_outcome(&confidences, &labels)?,
                inliers: auc_outcome(&inliers, &labels)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub threshold: ErrorThreshold,
    pub model: f64,
    pub inliers: f64,
}

/// Per-threshold accuracy of the model's and the max-inlier selections.
pub fn accuracy_table(
    set: &EvalSet,
    model_pick: &[usize],
    inlier_pick: &[usize],
    thresholds: &[ErrorThreshold],
) -> Result<Vec<AccuracyRow>> {
    let pick = |idx: &[usize]| idx.iter().map(|&i| &set.records[i]).collect::<Vec<_>>();
    let (ours, base) = (pick(model_pick), pick(inlier_pick));
    thresholds
        .iter()
        .map(|t| Ok(AccuracyRow { threshold: *t, model: accuracy_at(&ours, t)?, inliers: accuracy_at(&base, t)? }))
        .collect()
}

/// Extended, labelled and query-split data.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: EvalSet,
    pub test: EvalSet,
    pub train_labels: Vec<bool>,
    pub test_labels: Vec<bool>,
}

/// Drops failed estimations, checks every record has ground truth, splits
/// by query and labels both sides at `threshold`.
pub fn prepare(
    records: Vec<PoseRecord>,
    threshold: &ErrorThreshold,
    split: &SplitSpec,
    params: &CoverageParams,
) -> Result<Prepared> {
    let records = build_extended(records);
    if let Some(r) = records.iter().find(|r| r.ground_truth_pose.is_none()) {
        return Err(r.missing_ground_truth());
    }
    let (train, test) = grouped_split(records, split)?;
    let (train, test) = (EvalSet::new(train, params), EvalSet::new(test, params));
    let train_labels = train.labels(threshold)?;
    let test_labels = test.labels(threshold)?;
    Ok(Prepared { train, test, train_labels, test_labels })
}
