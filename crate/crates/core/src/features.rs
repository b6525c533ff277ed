//! Per-record feature vectors and their standardization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coverage::{coverage_map, coverage_score, CoverageParams, InlierSet};
use crate::dataset::PoseRecord;
use crate::error::{Error, Result};

/// Floor applied to fitted standard deviations.
pub const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    InlierCount,
    QueryCoverage,
    DbCoverage,
    PvScore,
}

impl Feature {
    pub const ALL: [Feature; 4] = [Feature::InlierCount, Feature::QueryCoverage, Feature::DbCoverage, Feature::PvScore];

    pub fn name(self) -> &'static str {
        match self {
            Feature::InlierCount => "inlier_count",
            Feature::QueryCoverage => "query_coverage",
            Feature::DbCoverage => "db_coverage",
            Feature::PvScore => "pv_score",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Feature::InlierCount => "inliers",
            Feature::QueryCoverage => "qcov",
            Feature::DbCoverage => "dbcov",
            Feature::PvScore => "pv",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s || f.short_name() == s)
            .ok_or_else(|| Error::InvalidFeatureSet(format!("unknown feature `{s}`")))
    }
}

/// Non-empty, duplicate-free feature list, kept in canonical order
/// (inlier count, query coverage, db coverage, pv score).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Feature>", into = "Vec<Feature>")]
pub struct FeatureSet(Vec<Feature>);

impl FeatureSet {
    pub fn new(mut features: Vec<Feature>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidFeatureSet("feature set is empty".into()));
        }
        features.sort();
        if features.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFeatureSet("duplicate feature".into()));
        }
        Ok(Self(features))
    }

    /// Inlier count with both coverage scores.
    pub fn standard() -> Self {
        Self(vec![Feature::InlierCount, Feature::QueryCoverage, Feature::DbCoverage])
    }

    pub fn inliers_only() -> Self {
        Self(vec![Feature::InlierCount])
    }

    /// Parses a comma-separated list such as `inliers,qcov,dbcov`.
    pub fn parse_list(s: &str) -> Result<Self> {
        Self::new(s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_>>()?)
    }

    pub fn features(&self) -> &[Feature] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.0.contains(&f)
    }

    /// Every subset with exactly one feature removed, in canonical order.
    pub fn leave_one_out(&self) -> Vec<FeatureSet> {
        if self.0.len() < 2 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|skip| {
                let rest = self.0.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, f)| *f);
                FeatureSet(rest.collect())
            })
            .collect()
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|f| f.short_name()).collect::<Vec<_>>().join("+")
    }
}

impl TryFrom<Vec<Feature>> for FeatureSet {
    type Error = Error;

    fn try_from(v: Vec<Feature>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FeatureSet> for Vec<Feature> {
    fn from(s: FeatureSet) -> Self {
        s.0
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn coverage_of(inliers: &InlierSet, params: &CoverageParams) -> f64 {
    coverage_score(&coverage_map(inliers, params))
}

/// All features of one record, computed once so that several feature sets
/// can be assembled without recomputing the coverage maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordFeatures {
    pub inlier_count: f64,
    pub query_coverage: f64,
    pub db_coverage: f64,
    pub pv_score: Option<f64>,
}

impl RecordFeatures {
    pub fn compute(record: &PoseRecord, params: &CoverageParams) -> Self {
        Self {
            inlier_count: record.inlier_count() as f64,
            query_coverage: coverage_of(&record.query_inliers, params),
            db_coverage: coverage_of(&record.db_inliers, params),
            pv_score: record.pv_score,
        }
    }

    pub fn get(&self, f: Feature) -> Option<f64> {
        match f {
            Feature::InlierCount => Some(self.inlier_count),
            Feature::QueryCoverage => Some(self.query_coverage),
            Feature::DbCoverage => Some(self.db_coverage),
            Feature::PvScore => self.pv_score,
        }
    }

    /// Values in set order; `None` when the set needs a missing pv score.
    pub fn select(&self, set: &FeatureSet) -> Option<FeatureVector> {
        set.features().iter().map(|&f| self.get(f)).collect::<Option<Vec<_>>>().map(FeatureVector)
    }
}

fn missing_pv(record: &PoseRecord) -> Error {
    Error::MissingFeature {
        query_id: record.query_id.clone(),
        rank: record.candidate_rank,
        feature: Feature::PvScore.name(),
    }
}

/// Computes only the features the set asks for; each coverage score uses
/// its own image's dimensions.
pub fn assemble(record: &PoseRecord, set: &FeatureSet, params: &CoverageParams) -> Result<FeatureVector> {
    set.features()
        .iter()
        .map(|f| match f {
            Feature::InlierCount => Ok(record.inlier_count() as f64),
            Feature::QueryCoverage => Ok(coverage_of(&record.query_inliers, params)),
            Feature::DbCoverage => Ok(coverage_of(&record.db_inliers, params)),
            Feature::PvScore => record.pv_score.ok_or_else(|| missing_pv(record)),
        })
        .collect::<Result<Vec<_>>>()
        .map(FeatureVector)
}

/// Like [`assemble`], over precomputed features.
pub fn select_features(record: &PoseRecord, features: &RecordFeatures, set: &FeatureSet) -> Result<FeatureVector> {
    features.select(set).ok_or_else(|| missing_pv(record))
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn identity(len: usize) -> Self {
        Self { means: vec![0.0; len], stds: vec![1.0; len] }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

pub fn fit_standardizer(vectors: &[FeatureVector]) -> Result<Standardizer> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: vectors.len() });
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
    }
    let n = vectors.len() as f64;
    let mut means = vec![0.0; dim];
    for v in vectors {
        for (m, x) in means.iter_mut().zip(v.values()) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut vars = vec![0.0; dim];
    for v in vectors {
        for ((s, x), m) in vars.iter_mut().zip(v.values()).zip(&means) {
            *s += (x - m) * (x - m);
        }
    }
    let stds = vars.into_iter().map(|s| (s / n).sqrt().max(STD_FLOOR)).collect();
    Ok(Standardizer { means, stds })
}

pub fn apply_standardizer(s: &Standardizer, v: &FeatureVector) -> Result<FeatureVector> {
    if v.len() != s.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), got: v.len() });
    }
    Ok(FeatureVector(v.values().iter().zip(&s.means).zip(&s.stds).map(|((x, m), sd)| (x - m) / sd).collect()))
}
