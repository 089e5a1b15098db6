//! Bounding boxes and how they follow geometric image distortions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{AffineMatrix, ImageBuffer};

/// Axis-aligned box in continuous pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub category_id: i64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, category_id: i64) -> Self {
        BBox {
            x_min,
            y_min,
            x_max,
            y_max,
            category_id,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_min, self.y_max),
            (self.x_max, self.y_max),
        ]
    }

    /// Whether the box satisfies `0 <= min <= max <= extent` on both axes.
    pub fn is_valid_in(&self, width: f64, height: f64) -> bool {
        let ok = |lo: f64, hi: f64, ext: f64| lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= ext;
        ok(self.x_min, self.x_max, width) && ok(self.y_min, self.y_max, height)
    }

    /// Intersection with `[0, width] x [0, height]`; `None` when nothing of
    /// positive width and height remains.
    pub fn clip(&self, width: f64, height: f64) -> Option<BBox> {
        let clipped = BBox {
            x_min: self.x_min.clamp(0.0, width),
            y_min: self.y_min.clamp(0.0, height),
            x_max: self.x_max.clamp(0.0, width),
            y_max: self.y_max.clamp(0.0, height),
            category_id: self.category_id,
        };
        (clipped.width() > 0.0 && clipped.height() > 0.0).then_some(clipped)
    }

    /// Mirror about the vertical center line of an image `width` wide.
    pub fn flip_horizontal(&self, width: f64) -> BBox {
        BBox {
            x_min: width - self.x_max,
            x_max: width - self.x_min,
            ..*self
        }
    }
}

/// An image together with its box annotations.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedImage {
    pub image: ImageBuffer,
    pub boxes: Vec<BBox>,
}

impl AnnotatedImage {
    pub fn new(image: ImageBuffer, boxes: Vec<BBox>) -> Result<Self> {
        let (w, h) = (image.width() as f64, image.height() as f64);
        if let Some(b) = boxes.iter().find(|b| !b.is_valid_in(w, h)) {
            return Err(Error::invalid(format!("box {b:?} outside {w}x{h} image")));
        }
        Ok(AnnotatedImage { image, boxes })
    }

    pub fn without_boxes(image: ImageBuffer) -> Self {
        AnnotatedImage {
            image,
            boxes: Vec::new(),
        }
    }
}

/// Axis-aligned envelope of the four mapped corners, without clipping.
pub fn envelope(b: &BBox, m: &AffineMatrix) -> BBox {
    let mut out = BBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, b.category_id);
    for (x, y) in b.corners() {
        let (u, v) = m.apply(x, y);
        out.x_min = out.x_min.min(u);
        out.y_min = out.y_min.min(v);
        out.x_max = out.x_max.max(u);
        out.y_max = out.y_max.max(v);
    }
    out
}

/// Maps a box through `m` and clips the envelope to the `w x h` frame.
/// Returns `None` when the clipped box is empty.
pub fn transform_bbox(b: &BBox, m: &AffineMatrix, w: f64, h: f64) -> Option<BBox> {
    envelope(b, m).clip(w, h)
}

/// Area of the unclipped envelope over the area of the input box.
pub fn envelope_area_ratio(b: &BBox, m: &AffineMatrix) -> Result<f64> {
    let area = b.area();
    if area.is_nan() || area <= 0.0 {
        return Err(Error::invalid(format!("box {b:?} has zero area")));
    }
    Ok(envelope(b, m).area() / area)
}
