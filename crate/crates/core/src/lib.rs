//! Confidence scoring for visually estimated camera poses.
//!
//! A pose estimated from a (query, database) image pair is scored from its
//! RANSAC inlier count and from how much of each image the inliers cover.
//! The three quantities are combined by a logistic model trained on poses
//! labelled correct or incorrect at a translation/rotation error bound.
//!
//! - [`pose`]: pose errors and correctness labels
//! - [`coverage`]: coverage maps and coverage scores
//! - [`features`]: feature assembly and standardization
//! - [`model`]: the logistic confidence model and its training
//! - [`dataset`]: record format, filtering, splitting, labelling
//! - [`synth`]: seeded synthetic records
//! - [`evaluation`]: precision-recall curves, AUC, reranking, ablation
//! - [`report`]: CSV and SVG output
//! - [`cli`]: the `pose-confidence` command line

pub mod cli;
pub mod coverage;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod model;
pub mod pose;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
