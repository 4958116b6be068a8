//! Recovering the template image underlying an image macro, and embedding the
//! macro with template and overlay decoupled.
//!
//! The pipeline, end to end:
//!
//! 1. [`image`] — load PGM/PPM/IGRD images, convert to grayscale, downsample
//!    to a fixed working resolution, and subtract a global working-set mean.
//! 2. [`sparse`] — express a target as a sparse nonnegative-free linear
//!    combination of dictionary columns by solving the l1-penalized
//!    least-squares problem with coordinate descent.
//! 3. [`matcher`] — vote the sparse coefficients into a template class,
//!    accept or reject on reconstruction residual, and split the target into
//!    template plus overlay.
//! 4. [`template_set`] — when no template set is supplied, discover one from
//!    the targets alone by incremental sparse matching and pixel-wise median
//!    blending.
//! 5. [`embed`] — concatenate features of the matched template and of the
//!    overlay, attach externally supplied text features, and impute missing
//!    text per template.
//! 6. [`analysis`] — k-means, silhouette, Davies-Bouldin, nearest-neighbor
//!    retrieval, pairwise distances, and average-linkage trees over the
//!    embeddings.
//! 7. [`synth`] — deterministic synthetic macro corpora for tests and
//!    benchmarks.
//!
//! File formats (manifests, embedding tables) live in [`manifest`] and
//! [`embed::table`].

pub mod analysis;
pub mod embed;
mod error;
pub mod image;
pub mod manifest;
pub mod matcher;
pub mod sparse;
pub mod synth;
pub mod template_set;

pub use error::{Error, Result};
pub use image::{ImageGrid, PixelVector, Preprocessor};
pub use matcher::{MatchConfig, MatchResult, TemplateDictionary};
pub use sparse::{Dictionary, SparseCode};
pub use template_set::TemplateLibrary;
