//! Whole-image shears, translations and rotation. Pixels and boxes go
//! through the same matrix.

use crate::error::Result;
use crate::geom::{transform_bbox, AnnotatedImage};
use crate::policy::MagnitudeRange;
use crate::raster::{affine_warp, AffineMatrix, ImageBuffer, GRAY};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeoOpKind {
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    Rotate,
}

impl GeoOpKind {
    pub const ALL: [GeoOpKind; 5] = [
        GeoOpKind::ShearX,
        GeoOpKind::ShearY,
        GeoOpKind::TranslateX,
        GeoOpKind::TranslateY,
        GeoOpKind::Rotate,
    ];

    pub fn magnitude_range(self) -> MagnitudeRange {
        match self {
            GeoOpKind::ShearX | GeoOpKind::ShearY => MagnitudeRange::Symmetric { max: 0.3 },
            GeoOpKind::TranslateX | GeoOpKind::TranslateY => MagnitudeRange::Symmetric { max: 150.0 },
            GeoOpKind::Rotate => MagnitudeRange::Symmetric { max: 30.0 },
        }
    }

    /// The source-to-destination map for an image of the given size. Shears
    /// are anchored at the top-left corner, rotation at the image center.
    pub fn matrix(self, value: f64, width: usize, height: usize) -> AffineMatrix {
        match self {
            GeoOpKind::ShearX => AffineMatrix::shear_x(value),
            GeoOpKind::ShearY => AffineMatrix::shear_y(value),
            GeoOpKind::TranslateX => AffineMatrix::translation(value, 0.0),
            GeoOpKind::TranslateY => AffineMatrix::translation(0.0, value),
            GeoOpKind::Rotate => AffineMatrix::rotation_about(value, width as f64 / 2.0, height as f64 / 2.0),
        }
    }
}

/// Warps pixels only, vacated area gray.
pub fn apply_geometric_image(src: &ImageBuffer, kind: GeoOpKind, value: f64) -> Result<ImageBuffer> {
    kind.magnitude_range().check(value, &format!("{kind:?}"))?;
    affine_warp(src, &kind.matrix(value, src.width(), src.height()), GRAY)
}

pub fn apply_geometric(img: &AnnotatedImage, kind: GeoOpKind, value: f64) -> Result<AnnotatedImage> {
    apply_geometric_with(img, kind, value, 0.0)
}

/// Warps the image and maps every box through the same matrix. Boxes that
/// clip to nothing, or to less than `min_box_area`, are dropped.
pub fn apply_geometric_with(
    img: &AnnotatedImage,
    kind: GeoOpKind,
    value: f64,
    min_box_area: f64,
) -> Result<AnnotatedImage> {
    kind.magnitude_range().check(value, &format!("{kind:?}"))?;
    let (w, h) = (img.image.width(), img.image.height());
    let m = kind.matrix(value, w, h);
    let image = affine_warp(&img.image, &m, GRAY)?;
    let boxes = img
        .boxes
        .iter()
        .filter_map(|b| transform_bbox(b, &m, w as f64, h as f64))
        .filter(|b| b.area() >= min_box_area)
        .collect();
    Ok(AnnotatedImage { image, boxes })
}
