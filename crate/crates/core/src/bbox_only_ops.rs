//! Operations that distort only the pixels inside each bounding box.
//!
//! Each box is cropped on the integer grid `[floor(x_min), ceil(x_max)) x
//! [floor(y_min), ceil(y_max))`, the base operation runs on the crop as if it
//! were a standalone image, and the result is pasted back. Box records never
//! change. Boxes are visited in annotation order, so overlapping boxes see
//! the output of earlier ones.

use rand::Rng;

use crate::color_ops::{apply_color_image, ColorOpKind};
use crate::error::{Error, Result};
use crate::geom::{AnnotatedImage, BBox};
use crate::geometric_ops::{apply_geometric_image, GeoOpKind};
use crate::policy::MagnitudeRange;
use crate::raster::ImageBuffer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BBoxOnlyOpKind {
    Equalize,
    Solarize,
    Rotate,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    FlipLR,
    Cutout,
}

/// What a bbox-only kind does to each crop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseOp {
    Color(ColorOpKind),
    Geometric(GeoOpKind),
    FlipLR,
}

impl BBoxOnlyOpKind {
    pub const ALL: [BBoxOnlyOpKind; 9] = [
        BBoxOnlyOpKind::Equalize,
        BBoxOnlyOpKind::Solarize,
        BBoxOnlyOpKind::Rotate,
        BBoxOnlyOpKind::ShearX,
        BBoxOnlyOpKind::ShearY,
        BBoxOnlyOpKind::TranslateX,
        BBoxOnlyOpKind::TranslateY,
        BBoxOnlyOpKind::FlipLR,
        BBoxOnlyOpKind::Cutout,
    ];

    pub fn base(self) -> BaseOp {
        match self {
            BBoxOnlyOpKind::Equalize => BaseOp::Color(ColorOpKind::Equalize),
            BBoxOnlyOpKind::Solarize => BaseOp::Color(ColorOpKind::Solarize),
            BBoxOnlyOpKind::Cutout => BaseOp::Color(ColorOpKind::Cutout),
            BBoxOnlyOpKind::Rotate => BaseOp::Geometric(GeoOpKind::Rotate),
            BBoxOnlyOpKind::ShearX => BaseOp::Geometric(GeoOpKind::ShearX),
            BBoxOnlyOpKind::ShearY => BaseOp::Geometric(GeoOpKind::ShearY),
            BBoxOnlyOpKind::TranslateX => BaseOp::Geometric(GeoOpKind::TranslateX),
            BBoxOnlyOpKind::TranslateY => BaseOp::Geometric(GeoOpKind::TranslateY),
            BBoxOnlyOpKind::FlipLR => BaseOp::FlipLR,
        }
    }

    pub fn magnitude_range(self) -> Option<MagnitudeRange> {
        match self.base() {
            BaseOp::Color(k) => k.magnitude_range(),
            BaseOp::Geometric(k) => Some(k.magnitude_range()),
            BaseOp::FlipLR => None,
        }
    }
}

/// Fair coin used for the direction of symmetric magnitudes.
pub fn bbox_translate_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Integer pixel rectangle covering `b`, clamped to the image. `None` when
/// the box covers no pixel.
pub fn crop_bounds(b: &BBox, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
    let x0 = (b.x_min.floor().max(0.0) as usize).min(width);
    let y0 = (b.y_min.floor().max(0.0) as usize).min(height);
    let x1 = (b.x_max.ceil().max(0.0) as usize).min(width);
    let y1 = (b.y_max.ceil().max(0.0) as usize).min(height);
    (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
}

fn apply_to_crop<R: Rng + ?Sized>(crop: &ImageBuffer, base: BaseOp, value: f64, rng: &mut R) -> Result<ImageBuffer> {
    match base {
        BaseOp::Color(kind) => apply_color_image(crop, kind, value, rng),
        BaseOp::Geometric(kind) => apply_geometric_image(crop, kind, value),
        BaseOp::FlipLR => Ok(crop.flip_horizontal()),
    }
}

/// For each box, with probability `prob` drawn independently, applies the
/// base operation to the box content. Probability 0 consumes no randomness.
pub fn apply_bbox_only<R: Rng + ?Sized>(
    img: &AnnotatedImage,
    kind: BBoxOnlyOpKind,
    value: f64,
    prob: f64,
    rng: &mut R,
) -> Result<AnnotatedImage> {
    if let Some(range) = kind.magnitude_range() {
        range.check(value, &format!("BBox_Only_{kind:?}"))?;
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::invalid(format!("probability {prob} outside [0, 1]")));
    }
    let mut out = img.clone();
    if prob == 0.0 {
        return Ok(out);
    }
    let (w, h) = (img.image.width(), img.image.height());
    for b in &img.boxes {
        if prob < 1.0 && rng.gen::<f64>() >= prob {
            continue;
        }
        let Some((x0, y0, x1, y1)) = crop_bounds(b, w, h) else {
            continue;
        };
        let crop = out.image.crop(x0, y0, x1, y1)?;
        let patch = apply_to_crop(&crop, kind.base(), value, rng)?;
        out.image.paste(&patch, x0, y0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GRAY;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImageBuffer::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
    }

    fn sample_value(kind: BBoxOnlyOpKind, rng: &mut impl Rng) -> f64 {
        match kind.magnitude_range() {
            Some(r) => r.value_at_scale(rng.gen_range(0.0..=10.0), bbox_translate_sign(rng)),
            None => 0.0,
        }
    }

    #[test]
    fn prob_zero_is_identity() {
        let img = AnnotatedImage::new(random_image(30, 20, 1), vec![BBox::new(2.0, 3.0, 20.0, 15.0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in BBoxOnlyOpKind::ALL {
            let v = sample_value(kind, &mut rng);
            let before = rng.clone();
            assert_eq!(apply_bbox_only(&img, kind, v, 0.0, &mut rng).unwrap(), img);
            assert_eq!(rng, before, "prob 0 must not consume randomness");
        }
    }

    #[test]
    fn flip_of_full_frame_box_mirrors_image() {
        let image = random_image(17, 11, 2);
        let img = AnnotatedImage::new(image.clone(), vec![BBox::new(0.0, 0.0, 17.0, 11.0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_bbox_only(&img, BBoxOnlyOpKind::FlipLR, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(out.image, image.flip_horizontal());
        assert_eq!(out.boxes, img.boxes);
    }

    #[test]
    fn translate_y_moves_stripe_inside_box_only() {
        // black canvas, box [10,30)x[5,25), one white row at y=8 spanning the whole width
        let image = ImageBuffer::from_fn(40, 30, |_, y| if y == 8 { [255; 3] } else { [0; 3] }).unwrap();
        let img = AnnotatedImage::new(image.clone(), vec![BBox::new(10.0, 5.0, 30.0, 25.0, 0)]).unwrap();
        let k = 6usize;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_bbox_only(&img, BBoxOnlyOpKind::TranslateY, k as f64, 1.0, &mut rng).unwrap();
        for y in 0..30 {
            for x in 0..40 {
                let inside = (10..30).contains(&x) && (5..25).contains(&y);
                let expect = if !inside {
                    image.get(x, y)
                } else if y < 5 + k {
                    GRAY
                } else if y == 8 + k {
                    [255; 3]
                } else {
                    [0; 3]
                };
                assert_eq!(out.image.get(x, y), expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn geometric_kinds_at_zero_are_identity() {
        let img = AnnotatedImage::new(
            random_image(25, 25, 3),
            vec![BBox::new(1.2, 1.7, 12.5, 20.0, 0), BBox::new(8.0, 4.0, 24.9, 24.1, 1)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [
            BBoxOnlyOpKind::Rotate,
            BBoxOnlyOpKind::ShearX,
            BBoxOnlyOpKind::ShearY,
            BBoxOnlyOpKind::TranslateX,
            BBoxOnlyOpKind::TranslateY,
        ] {
            assert_eq!(apply_bbox_only(&img, kind, 0.0, 1.0, &mut rng).unwrap(), img);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let img = AnnotatedImage::without_boxes(random_image(5, 5, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(apply_bbox_only(&img, BBoxOnlyOpKind::Rotate, 45.0, 1.0, &mut rng).is_err());
        assert!(apply_bbox_only(&img, BBoxOnlyOpKind::Cutout, 61.0, 1.0, &mut rng).is_err());
        assert!(apply_bbox_only(&img, BBoxOnlyOpKind::FlipLR, 0.0, 1.5, &mut rng).is_err());
    }

    #[test]
    fn crop_bounds_cover_fractional_box() {
        assert_eq!(crop_bounds(&BBox::new(1.2, 2.5, 3.1, 4.0, 0), 10, 10), Some((1, 2, 4, 4)));
        assert_eq!(crop_bounds(&BBox::new(9.5, 0.0, 10.0, 1.0, 0), 10, 10), Some((9, 0, 10, 1)));
        assert_eq!(crop_bounds(&BBox::new(3.0, 3.0, 3.0, 5.0, 0), 10, 10), None);
    }

    #[test]
    fn sign_is_fair_and_replayable() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let plus = (0..n).filter(|_| bbox_translate_sign(&mut rng) > 0.0).count();
        let frac = plus as f64 / n as f64;
        assert!((0.47..=0.53).contains(&frac), "{frac}");

        let a: Vec<f64> = (0..50).map({
            let mut r = ChaCha8Rng::seed_from_u64(9);
            move |_| bbox_translate_sign(&mut r)
        }).collect();
        let b: Vec<f64> = (0..50).map({
            let mut r = ChaCha8Rng::seed_from_u64(9);
            move |_| bbox_translate_sign(&mut r)
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn split_streams_are_uncorrelated() {
        let mut a = crate::rng::rng_from_seed(crate::rng::derive_seed(&[1, 0]));
        let mut b = crate::rng::rng_from_seed(crate::rng::derive_seed(&[1, 1]));
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| bbox_translate_sign(&mut a)).collect();
        let ys: Vec<f64> = (0..n).map(|_| bbox_translate_sign(&mut b)).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&xs), mean(&ys));
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n as f64;
        let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n as f64).sqrt();
        let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((cov / (sx * sy)).abs() < 0.05);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn pixels_outside_boxes_untouched(seed in any::<u64>(), kind_idx in 0usize..9, prob in 0.0f64..=1.0) {
                let kind = BBoxOnlyOpKind::ALL[kind_idx];
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (w, h) = (rng.gen_range(4..40), rng.gen_range(4..40));
                let image = random_image(w, h, seed ^ 0xABCD);
                let boxes: Vec<BBox> = (0..rng.gen_range(0..4)).map(|i| {
                    let x0 = rng.gen_range(0.0..w as f64 - 1.0);
                    let y0 = rng.gen_range(0.0..h as f64 - 1.0);
                    BBox::new(x0, y0, rng.gen_range(x0..=w as f64), rng.gen_range(y0..=h as f64), i)
                }).collect();
                let img = AnnotatedImage::new(image, boxes.clone()).unwrap();
                let v = sample_value(kind, &mut rng);
                let out = apply_bbox_only(&img, kind, v, prob, &mut rng).unwrap();
                prop_assert_eq!(&out.boxes, &boxes);
                let crops: Vec<_> = boxes.iter().filter_map(|b| crop_bounds(b, w, h)).collect();
                for y in 0..h {
                    for x in 0..w {
                        let covered = crops.iter().any(|&(x0, y0, x1, y1)| x0 <= x && x < x1 && y0 <= y && y < y1);
                        if !covered {
                            prop_assert_eq!(out.image.get(x, y), img.image.get(x, y));
                        }
                    }
                }
            }
        }
    }
}
