use super::{downsample, normalize_contrast, vectorize, ImageGrid, PixelVector};
use crate::{Error, Result};

/// The shared preprocessing: grayscale, downsample to the working
/// resolution, subtract the global working-set mean.
///
/// The mean must be fitted over the whole working set (targets and
/// templates together) so that dictionary columns and targets live in the
/// same space.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    work_w: usize,
    work_h: usize,
    global_mean: f64,
}

impl Preprocessor {
    /// Fit the global mean over grayscaled, downsampled copies of `images`.
    pub fn fit<'a, I>(images: I, work_w: usize, work_h: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ImageGrid>,
    {
        let mut sum = 0.0;
        let mut count = 0usize;
        for img in images {
            let work = downsample(&img.to_grayscale(), work_w, work_h)?;
            sum += work.data().iter().sum::<f64>();
            count += work.data().len();
        }
        if count == 0 {
            return Err(Error::EmptyInput("no images to fit the global mean on"));
        }
        Ok(Self {
            work_w,
            work_h,
            global_mean: sum / count as f64,
        })
    }

    /// A preprocessor with an explicit mean, e.g. one recorded in a manifest.
    pub fn with_mean(work_w: usize, work_h: usize, global_mean: f64) -> Self {
        Self {
            work_w,
            work_h,
            global_mean,
        }
    }

    pub fn work_width(&self) -> usize {
        self.work_w
    }

    pub fn work_height(&self) -> usize {
        self.work_h
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    /// Grayscale + downsample, without mean subtraction.
    pub fn shrink(&self, img: &ImageGrid) -> Result<ImageGrid> {
        downsample(&img.to_grayscale(), self.work_w, self.work_h)
    }

    /// The full pipeline: grayscale, downsample, subtract the global mean.
    pub fn apply(&self, img: &ImageGrid) -> Result<ImageGrid> {
        normalize_contrast(&self.shrink(img)?, &[self.global_mean])
    }

    /// `apply` then flatten.
    pub fn apply_vector(&self, img: &ImageGrid) -> Result<PixelVector> {
        Ok(vectorize(&self.apply(img)?))
    }
}
