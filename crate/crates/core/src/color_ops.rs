//! Whole-image operations that leave bounding boxes where they are.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::AnnotatedImage;
use crate::policy::MagnitudeRange;
use crate::raster::{blend, histogram, ImageBuffer, GRAY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColorOpKind {
    Equalize,
    Solarize,
    SolarizeAdd,
    Contrast,
    Color,
    Brightness,
    Sharpness,
    Cutout,
}

impl ColorOpKind {
    pub const ALL: [ColorOpKind; 8] = [
        ColorOpKind::Equalize,
        ColorOpKind::Solarize,
        ColorOpKind::SolarizeAdd,
        ColorOpKind::Contrast,
        ColorOpKind::Color,
        ColorOpKind::Brightness,
        ColorOpKind::Sharpness,
        ColorOpKind::Cutout,
    ];

    pub fn magnitude_range(self) -> Option<MagnitudeRange> {
        use ColorOpKind::*;
        match self {
            Equalize => None,
            // Higher magnitude lowers the threshold, i.e. inverts more.
            Solarize => Some(MagnitudeRange::Inverted { lo: 0.0, hi: 256.0 }),
            SolarizeAdd => Some(MagnitudeRange::Linear { lo: 0.0, hi: 110.0 }),
            Contrast | Color | Brightness | Sharpness => Some(MagnitudeRange::Linear { lo: 0.1, hi: 1.9 }),
            Cutout => Some(MagnitudeRange::Linear { lo: 0.0, hi: 60.0 }),
        }
    }
}

fn equalize_lut(hist: &[u32; 256]) -> Option<[u8; 256]> {
    let mut occupied = (0..256).filter(|&i| hist[i] > 0);
    occupied.next()?;
    let last = occupied.next_back()?;
    let total: u64 = hist.iter().map(|&c| c as u64).sum();
    let step = (total - hist[last] as u64) / 255;
    if step == 0 {
        return None;
    }
    let mut lut = [0u8; 256];
    let mut n = step / 2;
    for (i, slot) in lut.iter_mut().enumerate() {
        *slot = (n / step).min(255) as u8;
        n += hist[i] as u64;
    }
    Some(lut)
}

/// Per-channel histogram equalization with the integer cumulative-count
/// lookup table. Channels with a single occupied bin, or too few pixels
/// outside the brightest bin, are left unchanged.
pub fn equalize(src: &ImageBuffer) -> ImageBuffer {
    let mut luts = [[0u8; 256]; 3];
    for (c, lut) in luts.iter_mut().enumerate() {
        let hist = histogram(src, c).expect("channel in range");
        *lut = equalize_lut(&hist).unwrap_or_else(identity_lut);
    }
    src.map_lut(&luts)
}

fn identity_lut() -> [u8; 256] {
    let mut lut = [0u8; 256];
    for (i, v) in lut.iter_mut().enumerate() {
        *v = i as u8;
    }
    lut
}

/// Inverts every channel value `>= threshold`.
pub fn solarize(src: &ImageBuffer, threshold: f64) -> Result<ImageBuffer> {
    if !(0.0..=256.0).contains(&threshold) {
        return Err(Error::invalid(format!("solarize threshold {threshold} outside [0, 256]")));
    }
    Ok(src.map_values(|v| if v as f64 >= threshold { 255 - v } else { v }))
}

/// Adds `addition` to channel values below 128, saturating at 255.
pub fn solarize_add(src: &ImageBuffer, addition: f64) -> Result<ImageBuffer> {
    if !(0.0..=110.0).contains(&addition) {
        return Err(Error::invalid(format!("solarize_add amount {addition} outside [0, 110]")));
    }
    let add = addition.round() as u32;
    Ok(src.map_values(|v| if v < 128 { (v as u32 + add).min(255) as u8 } else { v }))
}

#[inline]
fn luminance(p: [u8; 3]) -> u8 {
    (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

fn degenerate(src: &ImageBuffer, kind: ColorOpKind) -> Result<ImageBuffer> {
    let (w, h) = (src.width(), src.height());
    match kind {
        ColorOpKind::Contrast => {
            let sum: u64 = src.pixels().iter().map(|&p| luminance(p) as u64).sum();
            let mean = (sum as f64 / (w * h) as f64).round() as u8;
            ImageBuffer::new(w, h, [mean; 3])
        }
        ColorOpKind::Color => {
            let pixels = src.pixels().iter().map(|&p| [luminance(p); 3]).collect();
            ImageBuffer::from_pixels(w, h, pixels)
        }
        ColorOpKind::Brightness => ImageBuffer::new(w, h, [0, 0, 0]),
        ColorOpKind::Sharpness => Ok(smooth(src)),
        other => Err(Error::invalid(format!("{other:?} is not an enhance operation"))),
    }
}

/// 3x3 smoothing with weights `[[1,1,1],[1,5,1],[1,1,1]] / 13` on interior
/// pixels; the one-pixel border is copied.
fn smooth(src: &ImageBuffer) -> ImageBuffer {
    let (w, h) = (src.width(), src.height());
    let mut out = src.clone();
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut acc = [0u32; 3];
            for dy in 0..3 {
                for dx in 0..3 {
                    let p = src.get(x + dx - 1, y + dy - 1);
                    let wgt = if dx == 1 && dy == 1 { 5 } else { 1 };
                    for c in 0..3 {
                        acc[c] += wgt * p[c] as u32;
                    }
                }
            }
            out.set(x, y, acc.map(|v| (v as f64 / 13.0).round() as u8));
        }
    }
    out
}

/// Contrast, Color, Brightness and Sharpness: blend from a degenerate image
/// towards the source by `factor`. Any other kind is rejected.
pub fn enhance(src: &ImageBuffer, kind: ColorOpKind, factor: f64) -> Result<ImageBuffer> {
    let base = degenerate(src, kind)?;
    blend(&base, src, factor)
}

/// Grays out a `size x size` square centered on a uniformly drawn pixel,
/// clipped to the image.
pub fn cutout<R: Rng + ?Sized>(src: &ImageBuffer, size: usize, rng: &mut R) -> ImageBuffer {
    let cx = rng.gen_range(0..src.width()) as i64;
    let cy = rng.gen_range(0..src.height()) as i64;
    let mut out = src.clone();
    if size == 0 {
        return out;
    }
    let half = (size / 2) as i64;
    let clampx = |v: i64| v.clamp(0, src.width() as i64) as usize;
    let clampy = |v: i64| v.clamp(0, src.height() as i64) as usize;
    let (x0, y0) = (cx - half, cy - half);
    out.fill_rect(
        clampx(x0),
        clampy(y0),
        clampx(x0 + size as i64),
        clampy(y0 + size as i64),
        GRAY,
    );
    out
}

/// Applies a color operation with an already resolved magnitude to the
/// pixels only. `value` is ignored for Equalize.
pub fn apply_color_image<R: Rng + ?Sized>(
    src: &ImageBuffer,
    kind: ColorOpKind,
    value: f64,
    rng: &mut R,
) -> Result<ImageBuffer> {
    if let Some(range) = kind.magnitude_range() {
        range.check(value, &format!("{kind:?}"))?;
    }
    match kind {
        ColorOpKind::Equalize => Ok(equalize(src)),
        ColorOpKind::Solarize => solarize(src, value),
        ColorOpKind::SolarizeAdd => solarize_add(src, value),
        ColorOpKind::Contrast | ColorOpKind::Color | ColorOpKind::Brightness | ColorOpKind::Sharpness => {
            enhance(src, kind, value)
        }
        ColorOpKind::Cutout => Ok(cutout(src, value.round() as usize, rng)),
    }
}

/// Same as [`apply_color_image`] on an annotated image; boxes pass through.
pub fn apply_color<R: Rng + ?Sized>(
    img: &AnnotatedImage,
    kind: ColorOpKind,
    value: f64,
    rng: &mut R,
) -> Result<AnnotatedImage> {
    let image = apply_color_image(&img.image, kind, value, rng)?;
    Ok(AnnotatedImage {
        image,
        boxes: img.boxes.clone(),
    })
}
