#![allow(dead_code)]

use std::path::{Path, PathBuf};

use bboxaug::dataset::{Annotation, Category, Dataset, ImageRecord};
use bboxaug::ImageBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ANNOTATIONS: &str = "annotations.json";
pub const IMAGES: &str = "images";

/// Gradient background with a few solid rectangles and some noise, so that
/// every operation has something to change.
pub fn synthetic_image(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rects: Vec<(usize, usize, usize, usize, [u8; 3])> = (0..3)
        .map(|_| {
            let x0 = rng.gen_range(0..width - 1);
            let y0 = rng.gen_range(0..height - 1);
            let x1 = rng.gen_range(x0 + 1..=width);
            let y1 = rng.gen_range(y0 + 1..=height);
            (x0, y0, x1, y1, [rng.gen(), rng.gen(), rng.gen()])
        })
        .collect();
    ImageBuffer::from_fn(width, height, |x, y| {
        for &(x0, y0, x1, y1, c) in &rects {
            if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
                return c;
            }
        }
        let n: u8 = rng.gen_range(0..16);
        [
            (x * 255 / width) as u8 ^ n,
            (y * 255 / height) as u8,
            ((x + y) * 127 / (width + height)) as u8 + n,
        ]
    })
    .unwrap()
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub dataset: Dataset,
}

impl Fixture {
    pub fn annotations(&self) -> PathBuf {
        self.dir.path().join(ANNOTATIONS)
    }

    pub fn image_root(&self) -> PathBuf {
        self.dir.path().to_path_buf()
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn box_count(&self) -> usize {
        self.dataset.annotations.len()
    }
}

/// `n` PNG images of `width`x`height` with 1 to 3 boxes each, written with
/// their annotation file into a fresh temporary directory.
pub fn write_fixture(n: usize, width: usize, height: usize, seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join(IMAGES)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset {
        images: vec![],
        annotations: vec![],
        categories: vec![
            Category { id: 1, name: "thing".into() },
            Category { id: 2, name: "stuff".into() },
        ],
    };
    for i in 0..n {
        let id = 100 + i as i64 * 7;
        let file_name = format!("{IMAGES}/img_{i:03}.png");
        synthetic_image(width, height, seed ^ (i as u64 + 1))
            .save_png(dir.path().join(&file_name))
            .unwrap();
        ds.images.push(ImageRecord {
            id,
            file_name,
            width: width as u32,
            height: height as u32,
        });
        for _ in 0..rng.gen_range(1..=3) {
            let w = rng.gen_range(4..=width / 2) as f64;
            let h = rng.gen_range(4..=height / 2) as f64;
            let x = rng.gen_range(0.0..width as f64 - w);
            let y = rng.gen_range(0.0..height as f64 - h);
            ds.annotations.push(Annotation {
                id: ds.annotations.len() as i64 + 1,
                image_id: id,
                category_id: rng.gen_range(1..=2),
                bbox: [x.round(), y.round(), w, h],
            });
        }
    }
    std::fs::write(dir.path().join(ANNOTATIONS), ds.to_json_pretty().unwrap()).unwrap();
    Fixture { dir, dataset: ds }
}

/// Every file under `root` with its bytes, sorted by relative path.
pub fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
