//! Ground-truth generation for document layout analysis.
//!
//! The pipeline aligns the text of a structured article-XML representation
//! with the geometric elements extracted from the corresponding PDF pages,
//! producing labeled bounding boxes and segmentations for five layout
//! categories (text, title, list, table, figure). Downstream stages filter
//! pages by annotation quality, partition the corpus at journal level, and
//! export COCO-style detection files; an evaluator scores predictions
//! against the generated ground truth.

pub mod annotation;
pub mod coco;
pub mod elements;
pub mod error;
pub mod eval;
pub mod fuzzy;
pub mod geom;
pub mod jats;
pub mod matcher;
pub mod partition;
pub mod pipeline;
pub mod quality;
pub mod textnorm;

pub use error::{Error, Result};
