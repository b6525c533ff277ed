//! C ABI for pose-confidence.
//!
//! Every fallible function returns a [`PcStatus`]; on failure a message is
//! available from [`pc_last_error_message`] on the same thread. Handles
//! returned through out-pointers are owned by the caller and released with
//! the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pose_confidence::coverage::{coverage_map, coverage_score, CoverageParams, ImageDims, InlierSet};
use pose_confidence::dataset::{parse_records, parse_records_str, PoseRecord};
use pose_confidence::evaluation::{pr_curve_from, EvalSet};
use pose_confidence::features::FeatureVector;
use pose_confidence::model::ConfidenceModel;
use pose_confidence::pose::{Pose, PoseError};
use pose_confidence::Error;

/// Result codes. `PC_STATUS_OK` is zero; every other value names an error
/// class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    InvalidPose = 10,
    InvalidThreshold = 11,
    InvalidDims = 12,
    OutOfBounds = 13,
    InvalidParams = 14,
    InvalidFeatureSet = 15,
    MissingFeature = 16,
    DimensionMismatch = 17,
    InsufficientData = 18,
    EmptyDataset = 19,
    SingleClassData = 20,
    NoPositives = 21,
    DegenerateCurve = 22,
    MissingGroundTruth = 23,
    EmptyCandidates = 24,
    TooFewQueries = 25,
    SchemaError = 26,
    InvariantViolation = 27,
    InvalidConfig = 28,
    ModelFormat = 29,
    Io = 30,
}

impl PcStatus {
    fn from_kind(kind: &str) -> Self {
        match kind {
            "InvalidPose" => Self::InvalidPose,
            "InvalidThreshold" => Self::InvalidThreshold,
            "InvalidDims" => Self::InvalidDims,
            "OutOfBounds" => Self::OutOfBounds,
            "InvalidParams" => Self::InvalidParams,
            "InvalidFeatureSet" => Self::InvalidFeatureSet,
            "MissingFeature" => Self::MissingFeature,
            "DimensionMismatch" => Self::DimensionMismatch,
            "InsufficientData" => Self::InsufficientData,
            "EmptyDataset" => Self::EmptyDataset,
            "SingleClassData" => Self::SingleClassData,
            "NoPositives" => Self::NoPositives,
            "DegenerateCurve" => Self::DegenerateCurve,
            "MissingGroundTruth" => Self::MissingGroundTruth,
            "EmptyCandidates" => Self::EmptyCandidates,
            "TooFewQueries" => Self::TooFewQueries,
            "SchemaError" => Self::SchemaError,
            "InvariantViolation" => Self::InvariantViolation,
            "InvalidConfig" => Self::InvalidConfig,
            "ModelFormat" => Self::ModelFormat,
            "Io" => Self::Io,
            _ => Self::Panic,
        }
    }
}

/// A loaded confidence model.
pub struct PcModel(ConfidenceModel);

/// A parsed set of pose records.
pub struct PcRecords(Vec<PoseRecord>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(PcStatus::from_kind(e.kind()), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(PcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, records any failure for `pc_last_error_message` and turns
/// panics into `PC_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside pose-confidence".into());
            PcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(PcStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Translation error (meters, between camera centers) and rotation error
/// (degrees) of an estimated pose. Rotations are 9 row-major values,
/// translations 3 values, both world-to-camera.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths; outputs must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pc_pose_error(
    est_rotation: *const f64,
    est_translation: *const f64,
    gt_rotation: *const f64,
    gt_translation: *const f64,
    out_translation_error: *mut f64,
    out_rotation_error: *mut f64,
) -> PcStatus {
    guard(|| {
        let pose = |r: *const f64, t: *const f64, what: &str| -> FfiResult<Pose> {
            let r: [f64; 9] = slice_arg(r, 9, what)?.try_into().expect("length 9");
            let t: [f64; 3] = slice_arg(t, 3, what)?.try_into().expect("length 3");
            Ok(Pose::from_row_major(r, t)?)
        };
        let est = pose(est_rotation, est_translation, "estimated pose")?;
        let gt = pose(gt_rotation, gt_translation, "ground-truth pose")?;
        let e = PoseError::between(&est, &gt);
        *out_arg(out_translation_error, "out_translation_error")? = e.translation_error;
        *out_arg(out_rotation_error, "out_rotation_error")? = e.rotation_error;
        Ok(())
    })
}

/// Coverage score of `count` inliers given as interleaved `x, y` pixel
/// coordinates in a `width` x `height` image, with the default
/// neighborhood.
///
/// # Safety
/// `points` must hold `2 * count` values; `out_score` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_coverage_score(
    width: u32,
    height: u32,
    points: *const u32,
    count: usize,
    out_score: *mut f64,
) -> PcStatus {
    guard(|| {
        let len = count.checked_mul(2).ok_or_else(|| Failure(PcStatus::InvalidParams, "count overflows".into()))?;
        let raw = slice_arg(points, len, "points")?;
        let dims = ImageDims::new(width, height)?;
        let set = InlierSet::new(dims, raw.chunks_exact(2).map(|p| (p[0], p[1])).collect())?;
        *out_arg(out_score, "out_score")? = coverage_score(&coverage_map(&set, &CoverageParams::default()));
        Ok(())
    })
}

/// Area under the precision-recall curve of `scores` against `labels`.
///
/// # Safety
/// `scores` and `labels` must each hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn pc_pr_auc(
    scores: *const f64,
    labels: *const bool,
    count: usize,
    out_auc: *mut f64,
) -> PcStatus {
    guard(|| {
        let scores = slice_arg(scores, count, "scores")?;
        let labels = slice_arg(labels, count, "labels")?;
        *out_arg(out_auc, "out_auc")? = pr_curve_from(scores, labels)?.auc;
        Ok(())
    })
}

fn boxed<T>(value: T, out: *mut *mut T) -> FfiResult<()> {
    let slot = unsafe { out_arg(out, "out")? };
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

fn read_path(path: &str) -> FfiResult<String> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| Failure(PcStatus::Io, format!("{path}: {e}")))
}

/// Parses a model from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_model_from_json(json: *const c_char, out: *mut *mut PcModel) -> PcStatus {
    guard(|| boxed(PcModel(ConfidenceModel::from_json(str_arg(json, "json")?)?), out))
}

/// Loads a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_model_load(path: *const c_char, out: *mut *mut PcModel) -> PcStatus {
    guard(|| {
        let text = read_path(str_arg(path, "path")?)?;
        boxed(PcModel(ConfidenceModel::from_json(&text)?), out)
    })
}

/// Number of raw features the model expects, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_model_feature_count(model: *const PcModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.feature_set.len())
}

/// Confidence for one raw (unstandardized) feature vector, in the model's
/// feature order.
///
/// # Safety
/// `model` must be a live handle and `features` must hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn pc_model_predict(
    model: *const PcModel,
    features: *const f64,
    count: usize,
    out_confidence: *mut f64,
) -> PcStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let x = FeatureVector(slice_arg(features, count, "features")?.to_vec());
        *out_arg(out_confidence, "out_confidence")? = model.0.predict(&x)?;
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_model_free(model: *mut PcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parses newline-delimited JSON records.
///
/// # Safety
/// `jsonl` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_records_parse(jsonl: *const c_char, out: *mut *mut PcRecords) -> PcStatus {
    guard(|| boxed(PcRecords(parse_records_str(str_arg(jsonl, "jsonl")?)?), out))
}

/// Loads a record file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_records_load(path: *const c_char, out: *mut *mut PcRecords) -> PcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| Failure(PcStatus::Io, format!("{path}: {e}")))?;
        boxed(PcRecords(parse_records(std::io::BufReader::new(file))?), out)
    })
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `records` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_records_len(records: *const PcRecords) -> usize {
    records.as_ref().map_or(0, |r| r.0.len())
}

/// Confidence of every record, written to `out_confidences`, which must
/// have room for exactly `pc_records_len(records)` values.
///
/// # Safety
/// Handles must be live; `out_confidences` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn pc_records_score(
    records: *const PcRecords,
    model: *const PcModel,
    out_confidences: *mut f64,
    capacity: usize,
) -> PcStatus {
    guard(|| {
        let records = ref_arg(records, "records")?;
        let model = ref_arg(model, "model")?;
        if capacity != records.0.len() {
            return Err(Error::DimensionMismatch { expected: records.0.len(), got: capacity }.into());
        }
        let set = EvalSet::new(records.0.clone(), &CoverageParams::default());
        let scores = set.confidences(&model.0)?;
        if !scores.is_empty() {
            std::slice::from_raw_parts_mut(out_arg(out_confidences, "out_confidences")?, capacity)
                .copy_from_slice(&scores);
        }
        Ok(())
    })
}

/// Per query (in order of first appearance), the index of the record with
/// the highest confidence. Writes at most `capacity` indices and the number
/// of queries to `out_count`.
///
/// # Safety
/// Handles must be live; `out_indices` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn pc_records_rerank(
    records: *const PcRecords,
    model: *const PcModel,
    out_indices: *mut usize,
    capacity: usize,
    out_count: *mut usize,
) -> PcStatus {
    guard(|| {
        let records = ref_arg(records, "records")?;
        let model = ref_arg(model, "model")?;
        let set = EvalSet::new(records.0.clone(), &CoverageParams::default());
        let picks = set.select_by(&set.confidences(&model.0)?);
        *out_arg(out_count, "out_count")? = picks.len();
        let n = picks.len().min(capacity);
        if n > 0 {
            std::slice::from_raw_parts_mut(out_arg(out_indices, "out_indices")?, n).copy_from_slice(&picks[..n]);
        }
        Ok(())
    })
}

/// Releases a record set. Null is ignored.
///
/// # Safety
/// `records` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_records_free(records: *mut PcRecords) {
    if !records.is_null() {
        drop(Box::from_raw(records));
    }
}
