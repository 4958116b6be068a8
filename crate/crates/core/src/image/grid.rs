use crate::{Error, Result};

/// A fixed-size pixel grid, row-major and channel-interleaved.
///
/// Values are stored as reals. Freshly loaded grids hold values in
/// `[0, 255]`; once a global mean has been subtracted the `normalized` flag
/// is set and values may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    channels: usize,
    normalized: bool,
    data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        if width == 0 || height == 0 {
            return Err(Error::MalformedImage("zero-sized image".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "{}x{}x{} grid needs {} values, got {}",
                width,
                height,
                channels,
                width * height * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data"));
        }
        Ok(Self {
            width,
            height,
            channels,
            normalized: false,
            data,
        })
    }

    /// Grayscale grid from raw values.
    pub fn gray(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(width, height, 1, data)
    }

    /// Constant-valued grayscale grid.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::gray(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    pub(crate) fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    /// Luma conversion (0.299 R + 0.587 G + 0.114 B); grayscale input is
    /// returned unchanged.
    pub fn to_grayscale(&self) -> ImageGrid {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|px| 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2])
            .collect();
        ImageGrid {
            width: self.width,
            height: self.height,
            channels: 1,
            normalized: self.normalized,
            data,
        }
    }

    /// Mirror around the vertical axis.
    pub fn hflip(&self) -> ImageGrid {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                for c in 0..self.channels {
                    data.push(self.pixel(x, y, c));
                }
            }
        }
        ImageGrid {
            width: self.width,
            height: self.height,
            channels: self.channels,
            normalized: self.normalized,
            data,
        }
    }

    /// Axis-aligned sub-rectangle; `x0 + w <= width`, `y0 + h <= height`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<ImageGrid> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {}x{}+{}+{} out of bounds for {}x{}",
                w, h, x0, y0, self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let row = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[row..row + w * self.channels]);
        }
        Ok(ImageGrid {
            width: w,
            height: h,
            channels: self.channels,
            normalized: self.normalized,
            data,
        })
    }

    /// Per-channel mean over the whole grid.
    pub fn channel_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.channels];
        for px in self.data.chunks_exact(self.channels) {
            for (s, v) in sums.iter_mut().zip(px) {
                *s += v;
            }
        }
        let count = (self.width * self.height) as f64;
        sums.iter().map(|s| s / count).collect()
    }
}

/// Flattened pixel data of one grid; `dim = width * height * channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelVector {
    values: Vec<f64>,
}

impl PixelVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rescaled copy with unit l2 norm; errors on a zero vector.
    pub fn unit(&self) -> Result<PixelVector> {
        let norm = self.norm_l2();
        if norm == 0.0 {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(PixelVector::new(
            self.values.iter().map(|v| v / norm).collect(),
        ))
    }
}

/// Row-major, channel-interleaved flattening; [`reshape`] is its inverse.
pub fn vectorize(img: &ImageGrid) -> PixelVector {
    PixelVector::new(img.data().to_vec())
}

/// Rebuild a grid from a flattened vector.
pub fn reshape(
    vector: &PixelVector,
    width: usize,
    height: usize,
    channels: usize,
    normalized: bool,
) -> Result<ImageGrid> {
    Ok(ImageGrid::new(width, height, channels, vector.values().to_vec())?
        .with_normalized(normalized))
}

/// Subtract one global mean per channel; marks the result as normalized.
pub fn normalize_contrast(img: &ImageGrid, global_mean: &[f64]) -> Result<ImageGrid> {
    if global_mean.len() != img.channels() {
        return Err(Error::DimensionMismatch(format!(
            "{} channel means for a {}-channel image",
            global_mean.len(),
            img.channels()
        )));
    }
    let channels = img.channels();
    let data = img
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| v - global_mean[i % channels])
        .collect();
    Ok(ImageGrid::new(img.width(), img.height(), channels, data)?.with_normalized(true))
}

/// Area-average (box filter) resampling to `out_w` x `out_h`.
///
/// Each output pixel averages the input region it covers, with fractional
/// pixels weighted by overlap, so constant inputs stay constant and the
/// overall mean is preserved. Works for both down- and upsampling.
pub fn downsample(img: &ImageGrid, out_w: usize, out_h: usize) -> Result<ImageGrid> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::InvalidParameter("zero-sized output".into()));
    }
    if img.width() == out_w && img.height() == out_h {
        return Ok(img.clone());
    }
    let (in_w, in_h, channels) = (img.width(), img.height(), img.channels());
    let sx = in_w as f64 / out_w as f64;
    let sy = in_h as f64 / out_h as f64;
    let mut data = vec![0.0; out_w * out_h * channels];
    for oy in 0..out_h {
        let y_lo = oy as f64 * sy;
        let y_hi = (oy + 1) as f64 * sy;
        for ox in 0..out_w {
            let x_lo = ox as f64 * sx;
            let x_hi = (ox + 1) as f64 * sx;
            let mut acc = vec![0.0; channels];
            let mut weight = 0.0;
            let y_first = y_lo.floor() as usize;
            let y_last = (y_hi.ceil() as usize).min(in_h);
            for iy in y_first..y_last {
                let wy = overlap(iy as f64, (iy + 1) as f64, y_lo, y_hi);
                if wy <= 0.0 {
                    continue;
                }
                let x_first = x_lo.floor() as usize;
                let x_last = (x_hi.ceil() as usize).min(in_w);
                for ix in x_first..x_last {
                    let wx = overlap(ix as f64, (ix + 1) as f64, x_lo, x_hi);
                    if wx <= 0.0 {
                        continue;
                    }
                    let w = wx * wy;
                    weight += w;
                    for c in 0..channels {
                        acc[c] += w * img.pixel(ix, iy, c);
                    }
                }
            }
            let base = (oy * out_w + ox) * channels;
            for c in 0..channels {
                data[base + c] = acc[c] / weight;
            }
        }
    }
    Ok(ImageGrid::new(out_w, out_h, channels, data)?.with_normalized(img.is_normalized()))
}

fn overlap(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> f64 {
    (a_hi.min(b_hi) - a_lo.max(b_lo)).max(0.0)
}
