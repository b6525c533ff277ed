//! Pose records, the JSON Lines record format, the extended-dataset filter,
//! the query-grouped train/test split and correctness labelling.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverage::{ImageDims, InlierSet};
use crate::error::{Error, Result};
use crate::pose::{is_correct, ErrorThreshold, Pose, PoseError};

/// Records with fewer correspondences than this are failed estimations.
pub const MIN_CORRESPONDENCES: u32 = 3;

/// One (query image, candidate database image) pair and its estimated pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub query_id: String,
    /// 1-based retrieval rank of the database image.
    pub candidate_rank: u32,
    pub query_inliers: InlierSet,
    pub db_inliers: InlierSet,
    pub num_correspondences: u32,
    pub estimated_pose: Pose,
    pub ground_truth_pose: Option<Pose>,
    pub pv_score: Option<f64>,
}

impl PoseRecord {
    /// Checks the cross-field invariants not already enforced by the field types.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.candidate_rank < 1 {
            return Err("candidate_rank must be >= 1".into());
        }
        if self.query_inliers.len() != self.db_inliers.len() {
            return Err(format!(
                "query_inliers ({}) and db_inliers ({}) must pair up",
                self.query_inliers.len(),
                self.db_inliers.len()
            ));
        }
        if self.query_inliers.len() > self.num_correspondences as usize {
            return Err(format!(
                "{} inliers exceed num_correspondences {}",
                self.query_inliers.len(),
                self.num_correspondences
            ));
        }
        if let Some(pv) = self.pv_score {
            if !pv.is_finite() {
                return Err("pv_score must be finite".into());
            }
        }
        Ok(())
    }

    pub fn inlier_count(&self) -> usize {
        self.query_inliers.len()
    }

    pub fn pose_error(&self) -> Result<PoseError> {
        match &self.ground_truth_pose {
            Some(gt) => Ok(PoseError::between(&self.estimated_pose, gt)),
            None => Err(self.missing_ground_truth()),
        }
    }

    pub fn missing_ground_truth(&self) -> Error {
        Error::MissingGroundTruth { query_id: self.query_id.clone(), rank: self.candidate_rank }
    }
}

#[derive(Deserialize)]
struct RecordIn {
    query_id: String,
    candidate_rank: u32,
    query_width: u32,
    query_height: u32,
    db_width: u32,
    db_height: u32,
    query_inliers: Vec<[f64; 2]>,
    db_inliers: Vec<[f64; 2]>,
    num_correspondences: u32,
    rotation: [f64; 9],
    translation: [f64; 3],
    #[serde(default)]
    gt_rotation: Option<[f64; 9]>,
    #[serde(default)]
    gt_translation: Option<[f64; 3]>,
    #[serde(default)]
    pv_score: Option<f64>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    query_id: &'a str,
    candidate_rank: u32,
    query_width: u32,
    query_height: u32,
    db_width: u32,
    db_height: u32,
    query_inliers: Vec<[u32; 2]>,
    db_inliers: Vec<[u32; 2]>,
    num_correspondences: u32,
    rotation: [f64; 9],
    translation: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    gt_rotation: Option<[f64; 9]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gt_translation: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pv_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
}

impl<'a> RecordOut<'a> {
    fn new(r: &'a PoseRecord, confidence: Option<f64>) -> Self {
        let pairs = |s: &InlierSet| s.points().iter().map(|&(x, y)| [x, y]).collect();
        let (qd, dd) = (r.query_inliers.dims(), r.db_inliers.dims());
        Self {
            query_id: &r.query_id,
            candidate_rank: r.candidate_rank,
            query_width: qd.width,
            query_height: qd.height,
            db_width: dd.width,
            db_height: dd.height,
            query_inliers: pairs(&r.query_inliers),
            db_inliers: pairs(&r.db_inliers),
            num_correspondences: r.num_correspondences,
            rotation: r.estimated_pose.rotation_row_major(),
            translation: r.estimated_pose.translation_array(),
            gt_rotation: r.ground_truth_pose.map(|p| p.rotation_row_major()),
            gt_translation: r.ground_truth_pose.map(|p| p.translation_array()),
            pv_score: r.pv_score,
            confidence,
        }
    }
}

fn inlier_set(line: usize, field: &str, dims: ImageDims, raw: &[[f64; 2]]) -> Result<InlierSet> {
    let mut points = Vec::with_capacity(raw.len());
    for &[x, y] in raw {
        // sub-pixel positions are floored to the containing pixel
        let (fx, fy) = (x.floor(), y.floor());
        if !(fx >= 0.0 && fy >= 0.0 && fx < dims.width as f64 && fy < dims.height as f64) {
            return Err(Error::InvariantViolation {
                line,
                description: format!("{field}: inlier ({x}, {y}) outside {}x{} image", dims.width, dims.height),
            });
        }
        points.push((fx as u32, fy as u32));
    }
    Ok(InlierSet::new(dims, points).expect("bounds checked above"))
}

fn parse_line(line: usize, text: &str) -> Result<PoseRecord> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RecordIn = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        let field = if path == "." {
            // missing-field errors carry the name only in the message
            message.split('`').nth(1).unwrap_or("<record>").to_string()
        } else {
            path
        };
        Error::Schema { line, field, message }
    })?;
    let violation = |description: String| Error::InvariantViolation { line, description };

    let qdims = ImageDims::new(raw.query_width, raw.query_height).map_err(|e| violation(format!("query dims: {e}")))?;
    let ddims = ImageDims::new(raw.db_width, raw.db_height).map_err(|e| violation(format!("db dims: {e}")))?;
    let estimated_pose =
        Pose::from_row_major(raw.rotation, raw.translation).map_err(|e| violation(format!("estimated pose: {e}")))?;
    let ground_truth_pose = match (raw.gt_rotation, raw.gt_translation) {
        (Some(r), Some(t)) => {
            Some(Pose::from_row_major(r, t).map_err(|e| violation(format!("ground-truth pose: {e}")))?)
        }
        (None, None) => None,
        _ => return Err(violation("gt_rotation and gt_translation must appear together".into())),
    };
    let record = PoseRecord {
        query_id: raw.query_id,
        candidate_rank: raw.candidate_rank,
        query_inliers: inlier_set(line, "query_inliers", qdims, &raw.query_inliers)?,
        db_inliers: inlier_set(line, "db_inliers", ddims, &raw.db_inliers)?,
        num_correspondences: raw.num_correspondences,
        estimated_pose,
        ground_truth_pose,
        pv_score: raw.pv_score,
    };
    record.validate().map_err(violation)?;
    Ok(record)
}

/// Reads newline-delimited JSON records. Blank lines are skipped; line
/// numbers in errors are 1-based.
pub fn parse_records<R: BufRead>(reader: R) -> Result<Vec<PoseRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_line(i + 1, &line)?);
    }
    Ok(records)
}

pub fn parse_records_str(text: &str) -> Result<Vec<PoseRecord>> {
    parse_records(text.as_bytes())
}

/// Single-line JSON for a record, optionally carrying a `confidence` field.
pub fn record_to_json(record: &PoseRecord, confidence: Option<f64>) -> String {
    serde_json::to_string(&RecordOut::new(record, confidence)).expect("record serializes")
}

pub fn write_records<W: Write>(mut out: W, records: &[PoseRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", record_to_json(r, None))?;
    }
    Ok(())
}

/// Drops records with fewer than three correspondences, keeping order.
pub fn build_extended(records: Vec<PoseRecord>) -> Vec<PoseRecord> {
    records.into_iter().filter(|r| r.num_correspondences >= MIN_CORRESPONDENCES).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!("train fraction must lie in (0, 1), got {train_fraction}")));
        }
        Ok(Self { train_fraction, seed })
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.75, seed: 0 }
    }
}

/// Distinct query ids in order of first appearance.
pub fn query_ids(records: &[PoseRecord]) -> Vec<&str> {
    let mut seen = HashSet::new();
    records.iter().map(|r| r.query_id.as_str()).filter(|q| seen.insert(*q)).collect()
}

/// Fisher-Yates over ChaCha8 seeded with `seed_from_u64`; index `j` for
/// position `i` is `(next_u64 * (i + 1)) >> 64`.
pub fn seeded_shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = ((rng.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
        items.swap(i, j);
    }
}

/// Splits by query: every record of a query lands on the same side.
///
/// Shuffled queries go to the training side until it holds at least
/// `train_fraction` of all records; at least one query always remains for
/// testing. Each side keeps the input record order.
pub fn grouped_split(records: Vec<PoseRecord>, spec: &SplitSpec) -> Result<(Vec<PoseRecord>, Vec<PoseRecord>)> {
    let mut queries: Vec<String> = query_ids(&records).into_iter().map(String::from).collect();
    if queries.len() < 2 {
        return Err(Error::TooFewQueries(queries.len()));
    }
    let mut sizes: HashMap<&str, usize> = HashMap::new();
    for r in &records {
        *sizes.entry(r.query_id.as_str()).or_default() += 1;
    }
    seeded_shuffle(&mut queries, spec.seed);

    let target = spec.train_fraction * records.len() as f64;
    let mut train_queries = HashSet::new();
    let mut held = 0usize;
    for q in &queries[..queries.len() - 1] {
        if held as f64 >= target {
            break;
        }
        held += sizes[q.as_str()];
        train_queries.insert(q.clone());
    }
    Ok(records.into_iter().partition(|r| train_queries.contains(&r.query_id)))
}

/// Correctness labels aligned with `records`.
pub fn label_records(records: &[PoseRecord], threshold: &ErrorThreshold) -> Result<Vec<bool>> {
    records.iter().map(|r| r.pose_error().map(|e| is_correct(&e, threshold))).collect()
}
