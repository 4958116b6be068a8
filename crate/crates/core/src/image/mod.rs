//! Fixed-size pixel grids and the preprocessing shared by the whole pipeline:
//! grayscale conversion, box downsampling, global mean subtraction, and
//! flattening into vectors. Grids are immutable after creation and safe to
//! share across workers.

mod grid;
mod io;
mod pipeline;

pub use grid::{downsample, normalize_contrast, reshape, vectorize, ImageGrid, PixelVector};
pub use io::{load_image, save_igrd, save_pgm, save_ppm};
pub use pipeline::Preprocessor;

/// Working resolution all matching happens at.
pub const WORK_SIZE: usize = 48;
