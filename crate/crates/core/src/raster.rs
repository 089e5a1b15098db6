//! 8-bit RGB raster, affine warping and the pixel helpers shared by every
//! operation.

use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Fill color for vacated pixels and cutout patches.
pub const GRAY: Rgb = [128, 128, 128];

/// Row-major RGB image. Pixel `(x, y)` lives at index `y * width + x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Result<Self> {
        check_dims(width, height)?;
        Ok(ImageBuffer {
            width,
            height,
            pixels: vec![fill; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            pixels,
        })
    }

    /// Interleaved `RGBRGB...` bytes.
    pub fn from_raw_rgb(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "expected {} bytes for {width}x{height} RGB, got {}",
                width * height * 3,
                bytes.len()
            )));
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::from_pixels(width, height, pixels)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(ImageBuffer {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: Rgb) {
        self.pixels[y * self.width + x] = px;
    }

    pub fn to_raw_rgb(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }

    /// Copies the rectangle `[x0, x1) x [y0, y1)`. Bounds must be inside the
    /// image and non-empty.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<ImageBuffer> {
        if x0 >= x1 || y0 >= y1 || x1 > self.width || y1 > self.height {
            return Err(Error::invalid(format!(
                "crop [{x0},{x1})x[{y0},{y1}) outside {}x{}",
                self.width, self.height
            )));
        }
        let w = x1 - x0;
        let mut pixels = Vec::with_capacity(w * (y1 - y0));
        for y in y0..y1 {
            let row = y * self.width;
            pixels.extend_from_slice(&self.pixels[row + x0..row + x1]);
        }
        Ok(ImageBuffer {
            width: w,
            height: y1 - y0,
            pixels,
        })
    }

    /// Writes `patch` with its top-left corner at `(x0, y0)`; parts falling
    /// outside this image are ignored.
    pub fn paste(&mut self, patch: &ImageBuffer, x0: usize, y0: usize) {
        let x_end = (x0 + patch.width).min(self.width);
        let y_end = (y0 + patch.height).min(self.height);
        if x0 >= x_end {
            return;
        }
        for y in y0..y_end {
            let src = (y - y0) * patch.width;
            let dst = y * self.width;
            self.pixels[dst + x0..dst + x_end]
                .copy_from_slice(&patch.pixels[src..src + (x_end - x0)]);
        }
    }

    pub fn fill_rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, color: Rgb) {
        let x1 = x1.min(self.width);
        let y1 = y1.min(self.height);
        for y in y0.min(y1)..y1 {
            let row = y * self.width;
            self.pixels[row + x0.min(x1)..row + x1].fill(color);
        }
    }

    pub fn flip_horizontal(&self) -> ImageBuffer {
        let mut out = self.clone();
        for row in out.pixels.chunks_exact_mut(self.width) {
            row.reverse();
        }
        out
    }

    /// Applies a per-channel lookup table.
    pub fn map_lut(&self, luts: &[[u8; 256]; 3]) -> ImageBuffer {
        let pixels = self
            .pixels
            .iter()
            .map(|p| [luts[0][p[0] as usize], luts[1][p[1] as usize], luts[2][p[2] as usize]])
            .collect();
        ImageBuffer {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    pub fn map_values(&self, f: impl Fn(u8) -> u8) -> ImageBuffer {
        let mut lut = [0u8; 256];
        for (v, slot) in lut.iter_mut().enumerate() {
            *slot = f(v as u8);
        }
        self.map_lut(&[lut, lut, lut])
    }

    pub fn decode(bytes: &[u8]) -> Result<ImageBuffer> {
        let img = image::load_from_memory(bytes)?.to_rgb8();
        Self::from_rgb_image(img)
    }

    /// Reads PNG or JPEG. Alpha is dropped and grayscale is replicated.
    pub fn open(path: impl AsRef<Path>) -> Result<ImageBuffer> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    fn from_rgb_image(img: RgbImage) -> Result<ImageBuffer> {
        let (w, h) = img.dimensions();
        Self::from_raw_rgb(w as usize, h as usize, img.as_raw())
    }

    fn to_rgb_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width as u32, self.height as u32, self.to_raw_rgb())
            .expect("buffer length matches dimensions")
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        self.encode(ImageFormat::Png)
    }

    pub fn encode_jpeg(&self) -> Result<Vec<u8>> {
        self.encode(ImageFormat::Jpeg)
    }

    fn encode(&self, format: ImageFormat) -> Result<Vec<u8>> {
        let mut out = std::io::Cursor::new(Vec::new());
        self.to_rgb_image().write_to(&mut out, format)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("image dimensions must be >= 1, got {width}x{height}")));
    }
    Ok(())
}

/// The map `(x, y) -> (a x + b y + c, d x + e y + f)` from source to
/// destination coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl AffineMatrix {
    pub const IDENTITY: AffineMatrix = AffineMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 1.0,
        f: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        AffineMatrix { a, b, c, d, e, f }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        AffineMatrix::new(1.0, 0.0, tx, 0.0, 1.0, ty)
    }

    /// `(x, y) -> (x + rate * y, y)`.
    pub fn shear_x(rate: f64) -> Self {
        AffineMatrix::new(1.0, rate, 0.0, 0.0, 1.0, 0.0)
    }

    /// `(x, y) -> (x, y + rate * x)`.
    pub fn shear_y(rate: f64) -> Self {
        AffineMatrix::new(1.0, 0.0, 0.0, rate, 1.0, 0.0)
    }

    /// Rotation by `degrees` about `(cx, cy)`. With y pointing down a positive
    /// angle turns clockwise on screen. Quarter turns use exact sines and
    /// cosines so 90 degree rotations of integer boxes stay integral.
    pub fn rotation_about(degrees: f64, cx: f64, cy: f64) -> Self {
        let (sin, cos) = exact_sin_cos(degrees);
        AffineMatrix::new(
            cos,
            -sin,
            cx - cos * cx + sin * cy,
            sin,
            cos,
            cy - sin * cx - cos * cy,
        )
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.e - self.b * self.d
    }

    pub fn is_invertible(&self) -> bool {
        let det = self.determinant();
        det != 0.0 && det.is_finite()
    }

    pub fn inverse(&self) -> Result<AffineMatrix> {
        if !self.is_invertible() {
            return Err(Error::invalid(format!("affine matrix is singular: {self:?}")));
        }
        let det = self.determinant();
        Ok(AffineMatrix::new(
            self.e / det,
            -self.b / det,
            (self.b * self.f - self.c * self.e) / det,
            -self.d / det,
            self.a / det,
            (self.c * self.d - self.a * self.f) / det,
        ))
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.b * y + self.c,
            self.d * x + self.e * y + self.f,
        )
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &AffineMatrix) -> AffineMatrix {
        AffineMatrix::new(
            self.a * first.a + self.b * first.d,
            self.a * first.b + self.b * first.e,
            self.a * first.c + self.b * first.f + self.c,
            self.d * first.a + self.e * first.d,
            self.d * first.b + self.e * first.e,
            self.d * first.c + self.e * first.f + self.f,
        )
    }
}

fn exact_sin_cos(degrees: f64) -> (f64, f64) {
    let turns = degrees / 90.0;
    if turns == turns.round() {
        match (turns as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        degrees.to_radians().sin_cos()
    }
}

/// Nearest source index for a mapped pixel-center coordinate: round half
/// down of `coord - 0.5`.
#[inline]
fn nearest_index(coord: f64) -> i64 {
    (coord - 1.0).ceil() as i64
}

/// Inverse-mapped warp with nearest-neighbor sampling. Output pixel centers
/// `(x + 0.5, y + 0.5)` are pulled back through `m^-1`; samples falling
/// outside the source take `fill`.
pub fn affine_warp(src: &ImageBuffer, m: &AffineMatrix, fill: Rgb) -> Result<ImageBuffer> {
    let inv = m.inverse()?;
    let (w, h) = (src.width as i64, src.height as i64);
    let mut pixels = Vec::with_capacity(src.pixels.len());
    for y in 0..src.height {
        let qy = y as f64 + 0.5;
        for x in 0..src.width {
            let (px, py) = inv.apply(x as f64 + 0.5, qy);
            let sx = nearest_index(px);
            let sy = nearest_index(py);
            if sx >= 0 && sx < w && sy >= 0 && sy < h {
                pixels.push(src.pixels[(sy * w + sx) as usize]);
            } else {
                pixels.push(fill);
            }
        }
    }
    Ok(ImageBuffer {
        width: src.width,
        height: src.height,
        pixels,
    })
}

pub fn histogram(src: &ImageBuffer, channel: usize) -> Result<[u32; 256]> {
    if channel > 2 {
        return Err(Error::invalid(format!("channel must be 0..=2, got {channel}")));
    }
    let mut counts = [0u32; 256];
    for p in &src.pixels {
        counts[p[channel] as usize] += 1;
    }
    Ok(counts)
}

/// Linear interpolation (or extrapolation) from `degenerate` towards
/// `original`: `factor == 1` reproduces `original`, `factor == 0` gives
/// `degenerate`.
pub fn blend(degenerate: &ImageBuffer, original: &ImageBuffer, factor: f64) -> Result<ImageBuffer> {
    if degenerate.width != original.width || degenerate.height != original.height {
        return Err(Error::invalid(format!(
            "blend dimension mismatch: {}x{} vs {}x{}",
            degenerate.width, degenerate.height, original.width, original.height
        )));
    }
    if !factor.is_finite() {
        return Err(Error::invalid(format!("blend factor must be finite, got {factor}")));
    }
    let pixels = degenerate
        .pixels
        .iter()
        .zip(&original.pixels)
        .map(|(d, o)| {
            let mut out = [0u8; 3];
            for c in 0..3 {
                let dv = d[c] as f64;
                let v = dv + factor * (o[c] as f64 - dv);
                out[c] = v.round().clamp(0.0, 255.0) as u8;
            }
            out
        })
        .collect();
    Ok(ImageBuffer {
        width: original.width,
        height: original.height,
        pixels,
    })
}
