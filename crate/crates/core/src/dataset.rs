//! COCO-style detection datasets: load, subset, baseline augmentation and
//! the parallel augmented-dataset writer.
//!
//! Only the `images`, `annotations` and `categories` sections are read;
//! other keys are ignored. Boxes are `[x, y, w, h]` in pixels.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use log::{info, warn};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{AnnotatedImage, BBox};
use crate::policy::{apply_policy, AugmentConfig, Policy};
use crate::raster::{ImageBuffer, GRAY};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: i64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: i64,
    pub image_id: i64,
    pub category_id: i64,
    /// `[x, y, w, h]`
    pub bbox: [f64; 4],
}

impl Annotation {
    pub fn to_bbox(&self) -> BBox {
        let [x, y, w, h] = self.bbox;
        BBox::new(x, y, x + w, y + h, self.category_id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub id: i64,
    pub name: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub images: Vec<ImageRecord>,
    pub annotations: Vec<Annotation>,
    #[serde(default)]
    pub categories: Vec<Category>,
}

impl Dataset {
    pub fn annotations_for(&self, image_id: i64) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter().filter(move |a| a.image_id == image_id)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks that every annotation refers to a known image and has
    /// non-negative extent inside its image.
    pub fn validate(&self) -> Result<()> {
        let dims: HashMap<i64, (u32, u32)> = self.images.iter().map(|i| (i.id, (i.width, i.height))).collect();
        for a in &self.annotations {
            let &(w, h) = dims
                .get(&a.image_id)
                .ok_or_else(|| Error::Dataset(format!("annotation {} refers to missing image_id {}", a.id, a.image_id)))?;
            if !a.to_bbox().is_valid_in(w as f64, h as f64) {
                return Err(Error::Dataset(format!("annotation {} box {:?} outside {w}x{h}", a.id, a.bbox)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub image_root: PathBuf,
    /// Boxes that had to be clamped into their image.
    pub clamped_boxes: usize,
}

/// Reads and validates an annotation file. Boxes poking outside their image
/// are clamped and counted; dangling image references are errors.
pub fn load_dataset(annotation_path: impl AsRef<Path>, image_root: impl AsRef<Path>) -> Result<LoadedDataset> {
    let path = annotation_path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dataset: Dataset = serde_json::from_str(&text)
        .map_err(|e| Error::Dataset(format!("{}: malformed annotation JSON: {e}", path.display())))?;

    let mut dims = HashMap::new();
    for img in &dataset.images {
        if img.width == 0 || img.height == 0 {
            return Err(Error::Dataset(format!("image {} has zero size", img.id)));
        }
        if dims.insert(img.id, (img.width as f64, img.height as f64)).is_some() {
            return Err(Error::Dataset(format!("duplicate image id {}", img.id)));
        }
    }
    let mut clamped = 0;
    for a in &mut dataset.annotations {
        let &(w, h) = dims
            .get(&a.image_id)
            .ok_or_else(|| Error::Dataset(format!("annotation {} refers to missing image_id {}", a.id, a.image_id)))?;
        let [x, y, bw, bh] = a.bbox;
        if !(bw >= 0.0 && bh >= 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Dataset(format!("annotation {} has invalid bbox {:?}", a.id, a.bbox)));
        }
        let (x0, y0) = (x.clamp(0.0, w), y.clamp(0.0, h));
        let (x1, y1) = ((x + bw).clamp(0.0, w), (y + bh).clamp(0.0, h));
        let fixed = [x0, y0, x1 - x0, y1 - y0];
        if fixed != a.bbox {
            warn!("annotation {}: bbox {:?} clamped to {w}x{h} image", a.id, a.bbox);
            a.bbox = fixed;
            clamped += 1;
        }
    }
    Ok(LoadedDataset {
        dataset,
        image_root: image_root.as_ref().to_path_buf(),
        clamped_boxes: clamped,
    })
}

/// `n` images drawn uniformly without replacement, kept in input order,
/// with exactly their annotations.
pub fn subset(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || n > ds.images.len() {
        return Err(Error::invalid(format!("subset size {n} outside 1..={}", ds.images.len())));
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = index::sample(&mut rng, ds.images.len(), n).into_vec();
    picked.sort_unstable();
    let images: Vec<ImageRecord> = picked.iter().map(|&i| ds.images[i].clone()).collect();
    let ids: std::collections::HashSet<i64> = images.iter().map(|i| i.id).collect();
    Ok(Dataset {
        images,
        annotations: ds.annotations.iter().filter(|a| ids.contains(&a.image_id)).cloned().collect(),
        categories: ds.categories.clone(),
    })
}

/// Output side length of the baseline crop.
pub const BASELINE_SIZE: usize = 640;
pub const BASELINE_SHORT_SIDE: (u32, u32) = (512, 786);

/// The random choices of one baseline augmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaselineParams {
    pub flip: bool,
    /// Target length of the shorter side after resizing.
    pub short_side: u32,
    /// Top-left corner of the 640x640 window in the resized image. Zero on an
    /// axis that is shorter than 640 (that axis is padded instead).
    pub crop_x: usize,
    pub crop_y: usize,
}

fn resized_dims(w: usize, h: usize, short_side: u32) -> (usize, usize) {
    let scale = short_side as f64 / w.min(h) as f64;
    (
        ((w as f64 * scale).round() as usize).max(1),
        ((h as f64 * scale).round() as usize).max(1),
    )
}

impl BaselineParams {
    pub fn sample<R: Rng + ?Sized>(width: usize, height: usize, rng: &mut R) -> Self {
        let flip = rng.gen_bool(0.5);
        let short_side = rng.gen_range(BASELINE_SHORT_SIDE.0..=BASELINE_SHORT_SIDE.1);
        let (rw, rh) = resized_dims(width, height, short_side);
        let crop_x = rng.gen_range(0..=rw.saturating_sub(BASELINE_SIZE));
        let crop_y = rng.gen_range(0..=rh.saturating_sub(BASELINE_SIZE));
        BaselineParams {
            flip,
            short_side,
            crop_x,
            crop_y,
        }
    }
}

fn resize_nearest(src: &ImageBuffer, w: usize, h: usize) -> ImageBuffer {
    if (w, h) == (src.width(), src.height()) {
        return src.clone();
    }
    let sx = src.width() as f64 / w as f64;
    let sy = src.height() as f64 / h as f64;
    ImageBuffer::from_fn(w, h, |x, y| {
        let ix = (((x as f64 + 0.5) * sx) as usize).min(src.width() - 1);
        let iy = (((y as f64 + 0.5) * sy) as usize).min(src.height() - 1);
        src.get(ix, iy)
    })
    .expect("non-zero size")
}

/// Flip, resize so the short side is `short_side`, then crop or gray-pad to
/// 640x640. Boxes follow and are clipped; empty ones are dropped.
pub fn apply_baseline(img: &AnnotatedImage, p: &BaselineParams) -> AnnotatedImage {
    let (w, h) = (img.image.width(), img.image.height());
    let (mut image, mut boxes) = if p.flip {
        (
            img.image.flip_horizontal(),
            img.boxes.iter().map(|b| b.flip_horizontal(w as f64)).collect(),
        )
    } else {
        (img.image.clone(), img.boxes.clone())
    };

    let (rw, rh) = resized_dims(w, h, p.short_side);
    image = resize_nearest(&image, rw, rh);
    let (fx, fy) = (rw as f64 / w as f64, rh as f64 / h as f64);

    let out_w = BASELINE_SIZE;
    let out_h = BASELINE_SIZE;
    let crop_x = p.crop_x.min(rw.saturating_sub(out_w));
    let crop_y = p.crop_y.min(rh.saturating_sub(out_h));
    let mut canvas = ImageBuffer::new(out_w, out_h, GRAY).expect("non-zero size");
    let window = image
        .crop(crop_x, crop_y, (crop_x + out_w).min(rw), (crop_y + out_h).min(rh))
        .expect("window inside resized image");
    canvas.paste(&window, 0, 0);

    boxes = boxes
        .iter()
        .filter_map(|b| {
            BBox::new(
                b.x_min * fx - crop_x as f64,
                b.y_min * fy - crop_y as f64,
                b.x_max * fx - crop_x as f64,
                b.y_max * fy - crop_y as f64,
                b.category_id,
            )
            .clip(window.width() as f64, window.height() as f64)
        })
        .collect();
    AnnotatedImage { image: canvas, boxes }
}

/// Horizontal flip with p = 0.5 and multi-scale jitter to 640x640.
pub fn baseline_augment<R: Rng + ?Sized>(img: &AnnotatedImage, rng: &mut R) -> AnnotatedImage {
    let params = BaselineParams::sample(img.image.width(), img.image.height(), rng);
    apply_baseline(img, &params)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Png,
    Jpeg,
}

#[derive(Clone, Debug)]
pub struct WriteOptions {
    pub master_seed: u64,
    pub passes: usize,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    pub format: OutputFormat,
    pub augment: AugmentConfig,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            master_seed: 0,
            passes: 1,
            workers: 0,
            format: OutputFormat::Png,
            augment: AugmentConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageError {
    pub image_id: i64,
    pub pass: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct WriteReport {
    pub dataset: Dataset,
    pub images_written: usize,
    pub boxes_in: usize,
    pub boxes_out: usize,
    pub errors: Vec<ImageError>,
}

impl WriteReport {
    pub fn boxes_dropped(&self) -> usize {
        self.boxes_in - self.boxes_out
    }
}

const PROGRESS_EVERY: usize = 100;

pub const ANNOTATION_FILE: &str = "annotations.json";
pub const IMAGE_DIR: &str = "images";

/// Seed of one (image, pass) job; independent of scheduling.
pub fn job_seed(master_seed: u64, image_id: i64, pass: usize) -> u64 {
    derive_seed(&[master_seed, image_id as u64, pass as u64])
}

struct JobOutput {
    file_name: String,
    width: u32,
    height: u32,
    boxes: Vec<BBox>,
}

fn output_name(file_name: &str, pass: usize, format: OutputFormat) -> String {
    let stem = Path::new(file_name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| file_name.to_string());
    let ext = match format {
        OutputFormat::Png => "png",
        OutputFormat::Jpeg => "jpg",
    };
    format!("{stem}_p{pass}.{ext}")
}

fn run_job(
    rec: &ImageRecord,
    boxes: Vec<BBox>,
    pass: usize,
    policy: &Policy,
    image_root: &Path,
    image_dir: &Path,
    opts: &WriteOptions,
) -> Result<JobOutput> {
    let image = ImageBuffer::open(image_root.join(&rec.file_name))?;
    if (image.width(), image.height()) != (rec.width as usize, rec.height as usize) {
        return Err(Error::Dataset(format!(
            "decoded size {}x{} differs from annotated {}x{}",
            image.width(),
            image.height(),
            rec.width,
            rec.height
        )));
    }
    let input = AnnotatedImage::new(image, boxes)?;
    let mut rng = rng_from_seed(job_seed(opts.master_seed, rec.id, pass));
    let out = apply_policy(policy, &input, &opts.augment, &mut rng)?;
    let bytes = match opts.format {
        OutputFormat::Png => out.image.encode_png()?,
        OutputFormat::Jpeg => out.image.encode_jpeg()?,
    };
    let file_name = output_name(&rec.file_name, pass, opts.format);
    let dest = image_dir.join(&file_name);
    std::fs::write(&dest, bytes).map_err(|e| Error::io(&dest, e))?;
    Ok(JobOutput {
        file_name: format!("{IMAGE_DIR}/{file_name}"),
        width: out.image.width() as u32,
        height: out.image.height() as u32,
        boxes: out.boxes,
    })
}

/// Applies `policy` `passes` times to every image and writes the images plus
/// a new annotation file under `out_dir`. Jobs run in parallel; their seeds
/// and the output ordering (by image id, then pass) do not depend on the
/// worker count. Per-image failures are collected and the run continues.
pub fn write_augmented(
    loaded: &LoadedDataset,
    policy: &Policy,
    out_dir: impl AsRef<Path>,
    opts: &WriteOptions,
) -> Result<WriteReport> {
    let out_dir = out_dir.as_ref();
    let image_dir = out_dir.join(IMAGE_DIR);
    std::fs::create_dir_all(&image_dir).map_err(|e| Error::io(&image_dir, e))?;
    if opts.passes == 0 {
        return Err(Error::invalid("passes must be >= 1"));
    }

    let ds = &loaded.dataset;
    let mut by_image: BTreeMap<i64, Vec<BBox>> = BTreeMap::new();
    for a in &ds.annotations {
        by_image.entry(a.image_id).or_default().push(a.to_bbox());
    }
    let mut records: Vec<&ImageRecord> = ds.images.iter().collect();
    records.sort_by_key(|r| r.id);
    let jobs: Vec<(&ImageRecord, usize)> = records
        .iter()
        .flat_map(|r| (0..opts.passes).map(move |p| (*r, p)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let done = AtomicUsize::new(0);
    let results: Vec<Result<JobOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(rec, pass)| {
                let boxes = by_image.get(&rec.id).cloned().unwrap_or_default();
                let res = run_job(rec, boxes, pass, policy, &loaded.image_root, &image_dir, opts);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n.is_multiple_of(PROGRESS_EVERY) {
                    info!("{n}/{} images augmented", jobs.len());
                }
                res
            })
            .collect()
    });

    let mut out = Dataset {
        images: Vec::new(),
        annotations: Vec::new(),
        categories: ds.categories.clone(),
    };
    let mut errors = Vec::new();
    let mut boxes_in = 0;
    for ((rec, pass), res) in jobs.iter().zip(results) {
        match res {
            Ok(job) => {
                boxes_in += by_image.get(&rec.id).map_or(0, Vec::len);
                let id = out.images.len() as i64 + 1;
                out.images.push(ImageRecord {
                    id,
                    file_name: job.file_name,
                    width: job.width,
                    height: job.height,
                });
                for b in job.boxes {
                    out.annotations.push(Annotation {
                        id: out.annotations.len() as i64 + 1,
                        image_id: id,
                        category_id: b.category_id,
                        bbox: [b.x_min, b.y_min, b.width(), b.height()],
                    });
                }
            }
            Err(e) => {
                warn!("image {} pass {pass}: {e}", rec.id);
                errors.push(ImageError {
                    image_id: rec.id,
                    pass: *pass,
                    message: e.to_string(),
                });
            }
        }
    }
    let json_path = out_dir.join(ANNOTATION_FILE);
    std::fs::write(&json_path, out.to_json_pretty()?).map_err(|e| Error::io(&json_path, e))?;
    info!("wrote {} images to {}", out.images.len(), out_dir.display());
    Ok(WriteReport {
        images_written: out.images.len(),
        boxes_out: out.annotations.len(),
        boxes_in,
        dataset: out,
        errors,
    })
}
