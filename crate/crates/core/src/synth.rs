//! Seeded synthetic pose records.
//!
//! Each query gets a ground-truth pose and `candidates` estimated poses.
//! A candidate falls in one of four regimes:
//!
//! - failed: fewer than three correspondences, dropped by the extended filter;
//! - correct: pose error below the standard threshold, many inliers spread
//!   over both images, more inliers for more accurate poses;
//! - incorrect: large pose error, fewer inliers, moderately spread;
//! - decoy: large pose error but a high inlier count packed into a few tight
//!   clusters, the repeated-texture failure where the count alone misleads.

use nalgebra::{Matrix3, Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::coverage::{ImageDims, InlierSet};
use crate::dataset::PoseRecord;
use crate::error::{Error, Result};
use crate::pose::Pose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub queries: usize,
    pub candidates: u32,
    pub width: u32,
    pub height: u32,
    /// Share of candidates with fewer than three correspondences.
    pub failed_fraction: f64,
    /// Per-query probability range of a candidate being correct.
    pub correct_prob: (f64, f64),
    /// Share of incorrect candidates generated as high-count decoys.
    pub adversarial_fraction: f64,
    /// Emit a pose-verification score correlated with correctness.
    pub with_pv: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            queries: 200,
            candidates: 10,
            width: 640,
            height: 480,
            failed_fraction: 0.15,
            correct_prob: (0.0, 0.5),
            adversarial_fraction: 0.15,
            with_pv: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if self.candidates == 0 {
            return Err(Error::InvalidConfig("candidates must be >= 1".into()));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidConfig("images must be at least 16x16".into()));
        }
        if !unit(self.failed_fraction) || !unit(self.adversarial_fraction) {
            return Err(Error::InvalidConfig("fractions must lie in [0, 1]".into()));
        }
        let (lo, hi) = self.correct_prob;
        if !(unit(lo) && unit(hi) && lo <= hi) {
            return Err(Error::InvalidConfig("correct_prob must be an ordered range in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Failed,
    Correct,
    Incorrect,
    Decoy,
}

/// How inliers are scattered: `clusters` Gaussian blobs with standard
/// deviation `spread` (fraction of image width).
struct Layout {
    clusters: usize,
    spread: f64,
}

impl Layout {
    /// `quality` in [0, 1] widens the spread of correct poses.
    fn draw(regime: Regime, quality: f64, rng: &mut ChaCha8Rng) -> Self {
        match regime {
            Regime::Correct => {
                Self { clusters: rng.gen_range(2..=12), spread: rng.gen_range(0.03..0.10) + 0.06 * quality }
            }
            Regime::Incorrect | Regime::Failed => {
                Self { clusters: rng.gen_range(1..=8), spread: rng.gen_range(0.02..0.14) }
            }
            Regime::Decoy => Self { clusters: rng.gen_range(1..=3), spread: rng.gen_range(0.01..0.03) },
        }
    }

    fn scatter(&self, n: usize, dims: ImageDims, rng: &mut ChaCha8Rng) -> InlierSet {
        let (w, h) = (dims.width as f64, dims.height as f64);
        let centers: Vec<(f64, f64)> =
            (0..self.clusters).map(|_| (rng.gen_range(0.1 * w..0.9 * w), rng.gen_range(0.1 * h..0.9 * h))).collect();
        let noise = Normal::new(0.0, self.spread * w).expect("positive spread");
        let points = (0..n)
            .map(|_| {
                let (cx, cy) = centers[rng.gen_range(0..centers.len())];
                let x = (cx + noise.sample(rng)).clamp(0.0, w - 1.0);
                let y = (cy + noise.sample(rng)).clamp(0.0, h - 1.0);
                (x as u32, y as u32)
            })
            .collect();
        InlierSet::new(dims, points).expect("points clamped into the image")
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let u: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let (a, b) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
    let (t1, t2) = (std::f64::consts::TAU * u[1], std::f64::consts::TAU * u[2]);
    let q = Quaternion::new(b * t2.cos(), a * t1.sin(), a * t1.cos(), b * t2.sin());
    *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    Vector3::new(x, y, z)
}

/// Estimated pose whose camera center is `offset` meters from the ground
/// truth and whose rotation differs by `angle_deg`.
fn perturb(
    gt_rotation: &Matrix3<f64>,
    gt_center: &Vector3<f64>,
    offset: f64,
    angle_deg: f64,
    rng: &mut ChaCha8Rng,
) -> Pose {
    let axis = Unit::new_normalize(random_direction(rng));
    let delta = Rotation3::from_axis_angle(&axis, angle_deg.to_radians());
    let rotation = delta.matrix() * gt_rotation;
    let center = gt_center + random_direction(rng) * offset;
    Pose::new(rotation, -(rotation * center)).expect("product of rotations")
}

/// Generates `queries × candidates` records, deterministic in `seed`.
pub fn synth_generate(config: &SynthConfig, seed: u64) -> Result<Vec<PoseRecord>> {
    config.validate()?;
    let dims = ImageDims::new(config.width, config.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let far = Exp::new(1.0 / 6.0).expect("positive rate");
    let pv_noise = Normal::new(0.0, 0.12).expect("positive sigma");

    let mut records = Vec::with_capacity(config.queries * config.candidates as usize);
    for q in 0..config.queries {
        let gt_rotation = random_rotation(&mut rng);
        let gt_center = Vector3::new(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0), rng.gen_range(-3.0..3.0));
        let gt = Pose::new(gt_rotation, -(gt_rotation * gt_center)).expect("valid rotation");
        let p_correct = rng.gen_range(config.correct_prob.0..=config.correct_prob.1);

        for rank in 1..=config.candidates {
            let regime = if rng.gen_bool(config.failed_fraction) {
                Regime::Failed
            } else if rng.gen_bool(p_correct) {
                Regime::Correct
            } else if rng.gen_bool(config.adversarial_fraction) {
                Regime::Decoy
            } else {
                Regime::Incorrect
            };

            let (offset, angle) = match regime {
                Regime::Correct => (0.95 * rng.gen::<f64>().powf(1.5), rng.gen_range(0.0..9.5)),
                // a fifth of the wrong poses fail on rotation alone
                _ if rng.gen_bool(0.2) => (rng.gen_range(0.0..0.9), rng.gen_range(10.5..180.0)),
                _ => (1.05 + far.sample(&mut rng), rng.gen_range(0.0..60.0)),
            };
            let estimated = perturb(&gt_rotation, &gt_center, offset, angle, &mut rng);

            let quality = if regime == Regime::Correct { 1.0 - offset / 0.95 } else { 0.0 };
            let inliers = match regime {
                Regime::Failed => rng.gen_range(0..=2),
                Regime::Correct => 60 + (rng.gen::<f64>().powf(1.3) * (300.0 + 700.0 * quality)) as usize,
                Regime::Incorrect => 3 + (rng.gen::<f64>().powf(2.5) * 250.0) as usize,
                Regime::Decoy => rng.gen_range(100..=450),
            };
            let num_correspondences = match regime {
                Regime::Failed => inliers as u32 + rng.gen_range(0..=(2 - inliers as u32)),
                _ => (inliers as f64 * rng.gen_range(1.2..3.0)).round() as u32,
            };
            let query_inliers = Layout::draw(regime, quality, &mut rng).scatter(inliers, dims, &mut rng);
            let db_inliers = Layout::draw(regime, quality, &mut rng).scatter(inliers, dims, &mut rng);
            let pv_score = config.with_pv.then(|| {
                let base = if regime == Regime::Correct { 0.65 } else { 0.45 };
                let noise: f64 = pv_noise.sample(&mut rng);
                (base + noise).clamp(0.0, 1.0)
            });

            records.push(PoseRecord {
                query_id: format!("query_{q:05}"),
                candidate_rank: rank,
                query_inliers,
                db_inliers,
                num_correspondences,
                estimated_pose: estimated,
                ground_truth_pose: Some(gt),
                pv_score,
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_extended, label_records, parse_records_str, write_records};
    use crate::pose::ErrorThreshold;

    fn small() -> SynthConfig {
        SynthConfig { queries: 30, width: 160, height: 120, ..SynthConfig::default() }
    }

    #[test]
    fn zero_queries() {
        let cfg = SynthConfig { queries: 0, ..SynthConfig::default() };
        assert!(synth_generate(&cfg, 42).unwrap().is_empty());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = synth_generate(&small(), 42).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a, synth_generate(&small(), 42).unwrap());
        assert_ne!(a, synth_generate(&small(), 43).unwrap());
    }

    #[test]
    fn output_passes_parse_time_checks() {
        let cfg = SynthConfig { with_pv: true, ..small() };
        let records = synth_generate(&cfg, 7).unwrap();
        assert!(records.iter().all(|r| r.validate().is_ok() && r.pv_score.is_some()));
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let back = parse_records_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, records);
    }

    #[test]
    fn regimes_produce_both_labels_and_failures() {
        let records = synth_generate(&small(), 1).unwrap();
        let failed = records.iter().filter(|r| r.num_correspondences < 3).count();
        let share = failed as f64 / records.len() as f64;
        assert!((0.05..0.3).contains(&share), "{share}");
        let kept = build_extended(records);
        let labels = label_records(&kept, &ErrorThreshold::standard()).unwrap();
        let pos = labels.iter().filter(|l| **l).count();
        assert!(pos > 20 && pos < labels.len() - 20);
    }

    #[test]
    fn perturbation_sets_the_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_rotation(&mut rng);
        let c = Vector3::new(1.0, 2.0, 3.0);
        let gt = Pose::new(r, -(r * c)).unwrap();
        let est = perturb(&r, &c, 2.5, 30.0, &mut rng);
        let e = crate::pose::PoseError::between(&est, &gt);
        assert!((e.translation_error - 2.5).abs() < 1e-9);
        assert!((e.rotation_error - 30.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = [
            SynthConfig { candidates: 0, ..small() },
            SynthConfig { adversarial_fraction: 1.5, ..small() },
            SynthConfig { correct_prob: (0.6, 0.2), ..small() },
            SynthConfig { width: 4, ..small() },
        ];
        for cfg in bad {
            assert!(matches!(synth_generate(&cfg, 0), Err(Error::InvalidConfig(_))));
        }
    }
}
