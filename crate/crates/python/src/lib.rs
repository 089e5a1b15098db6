//! Python bindings: images, policies, augmentation and policy search.
//!
//! Boxes cross the boundary as `(x_min, y_min, x_max, y_max, category_id)`
//! tuples and affine matrices as `(a, b, c, d, e, f)` tuples for the map
//! `x' = a x + b y + c`, `y' = d x + e y + f`.

use std::path::PathBuf;

use bboxaug::search::{
    decode, evolution_search, ppo_search, random_search, EvalOptions, EvolutionConfig, PpoConfig, SearchSpace,
    TokenMatchReward,
};
use bboxaug::{AffineMatrix, AnnotatedImage, AugmentConfig, BBox, Error, LevelConfig};
use num_bigint::BigUint;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

type PyBox = (f64, f64, f64, f64, i64);

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Numerical(_) | Error::Reward(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_box(b: PyBox) -> BBox {
    BBox::new(b.0, b.1, b.2, b.3, b.4)
}

fn from_box(b: &BBox) -> PyBox {
    (b.x_min, b.y_min, b.x_max, b.y_max, b.category_id)
}

fn to_matrix(m: (f64, f64, f64, f64, f64, f64)) -> AffineMatrix {
    AffineMatrix::new(m.0, m.1, m.2, m.3, m.4, m.5)
}

fn levels(magnitude_levels: usize, probability_levels: usize, ops_per_sub_policy: usize) -> PyResult<LevelConfig> {
    let cfg = LevelConfig {
        magnitude_levels,
        probability_levels,
        ops_per_sub_policy,
    };
    cfg.validate().map_err(to_py_err)?;
    Ok(cfg)
}

/// An RGB8 raster.
#[pyclass(name = "Image", module = "pybboxaug", skip_from_py_object)]
#[derive(Clone)]
struct PyImage {
    inner: bboxaug::ImageBuffer,
}

#[pymethods]
impl PyImage {
    /// From row-major RGB bytes.
    #[new]
    fn new(width: usize, height: usize, data: &[u8]) -> PyResult<Self> {
        Ok(PyImage {
            inner: bboxaug::ImageBuffer::from_raw_rgb(width, height, data).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, rgb: (u8, u8, u8)) -> PyResult<Self> {
        Ok(PyImage {
            inner: bboxaug::ImageBuffer::new(width, height, [rgb.0, rgb.1, rgb.2]).map_err(to_py_err)?,
        })
    }

    /// Decode a PNG or JPEG file.
    #[staticmethod]
    fn open(path: PathBuf) -> PyResult<Self> {
        Ok(PyImage {
            inner: bboxaug::ImageBuffer::open(path).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<(u8, u8, u8)> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err(format!("pixel ({x}, {y}) outside image")));
        }
        let p = self.inner.get(x, y);
        Ok((p[0], p[1], p[2]))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_raw_rgb())
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save_png(path).map_err(to_py_err)
    }

    fn __eq__(&self, other: PyRef<'_, PyImage>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.inner.width(), self.inner.height())
    }
}

/// A set of sub-policies on a level grid.
#[pyclass(name = "Policy", module = "pybboxaug", skip_from_py_object)]
#[derive(Clone)]
struct PyPolicy {
    inner: bboxaug::Policy,
    levels: LevelConfig,
}

#[pymethods]
impl PyPolicy {
    /// The learned COCO policy.
    #[staticmethod]
    fn builtin() -> Self {
        PyPolicy {
            inner: bboxaug::builtin_coco_policy(),
            levels: LevelConfig::default(),
        }
    }

    /// Parse policy JSON.
    #[staticmethod]
    #[pyo3(signature = (text, magnitude_levels = 6, probability_levels = 6, ops_per_sub_policy = 2))]
    fn parse(text: &str, magnitude_levels: usize, probability_levels: usize, ops_per_sub_policy: usize) -> PyResult<Self> {
        let levels = levels(magnitude_levels, probability_levels, ops_per_sub_policy)?;
        Ok(PyPolicy {
            inner: bboxaug::parse_policy(text, &levels).map_err(to_py_err)?,
            levels,
        })
    }

    /// Canonical JSON.
    fn to_json(&self) -> String {
        bboxaug::serialize_policy(&self.inner, &self.levels)
    }

    fn __len__(&self) -> usize {
        self.inner.sub_policies.len()
    }

    /// `[[(op, probability, magnitude_scale), ...], ...]`
    fn sub_policies(&self) -> Vec<Vec<(String, f64, f64)>> {
        self.inner
            .sub_policies
            .iter()
            .map(|sp| {
                sp.ops
                    .iter()
                    .map(|op| {
                        let p = op.prob_level as f64 / (self.levels.probability_levels - 1) as f64;
                        (op.kind.name().to_string(), p, self.levels.magnitude_scale(op.mag_level))
                    })
                    .collect()
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Policy({} sub-policies)", self.inner.sub_policies.len())
    }
}

fn annotated(image: &PyImage, boxes: Vec<PyBox>) -> PyResult<AnnotatedImage> {
    AnnotatedImage::new(image.inner.clone(), boxes.into_iter().map(to_box).collect()).map_err(to_py_err)
}

fn unpack(out: AnnotatedImage) -> (PyImage, Vec<PyBox>) {
    let boxes = out.boxes.iter().map(from_box).collect();
    (PyImage { inner: out.image }, boxes)
}

/// Apply a uniformly chosen sub-policy. Same seed, same result.
#[pyfunction]
#[pyo3(signature = (policy, image, boxes, seed = 0))]
fn apply_policy(
    policy: PyRef<'_, PyPolicy>,
    image: PyRef<'_, PyImage>,
    boxes: Vec<PyBox>,
    seed: u64,
) -> PyResult<(PyImage, Vec<PyBox>)> {
    let img = annotated(&image, boxes)?;
    let cfg = AugmentConfig {
        levels: policy.levels,
        ..Default::default()
    };
    let out = bboxaug::apply_policy(&policy.inner, &img, &cfg, &mut bboxaug::rng_from_seed(seed)).map_err(to_py_err)?;
    Ok(unpack(out))
}

/// Apply sub-policy `index` of `policy`.
#[pyfunction]
#[pyo3(signature = (policy, index, image, boxes, seed = 0))]
fn apply_sub_policy(
    policy: PyRef<'_, PyPolicy>,
    index: usize,
    image: PyRef<'_, PyImage>,
    boxes: Vec<PyBox>,
    seed: u64,
) -> PyResult<(PyImage, Vec<PyBox>)> {
    let sp = policy
        .inner
        .sub_policies
        .get(index)
        .ok_or_else(|| PyValueError::new_err(format!("sub-policy {index} out of range")))?;
    let img = annotated(&image, boxes)?;
    let cfg = AugmentConfig {
        levels: policy.levels,
        ..Default::default()
    };
    let out = bboxaug::apply_sub_policy(sp, &img, &cfg, &mut bboxaug::rng_from_seed(seed)).map_err(to_py_err)?;
    Ok(unpack(out))
}

/// Nearest-neighbor warp through `matrix`; uncovered pixels gray.
#[pyfunction]
fn affine_warp(image: PyRef<'_, PyImage>, matrix: (f64, f64, f64, f64, f64, f64)) -> PyResult<PyImage> {
    Ok(PyImage {
        inner: bboxaug::affine_warp(&image.inner, &to_matrix(matrix), bboxaug::GRAY).map_err(to_py_err)?,
    })
}

/// Envelope of the mapped box clipped to the frame, or `None`.
#[pyfunction]
fn transform_bbox(
    bbox: PyBox,
    matrix: (f64, f64, f64, f64, f64, f64),
    width: f64,
    height: f64,
) -> Option<PyBox> {
    bboxaug::transform_bbox(&to_box(bbox), &to_matrix(matrix), width, height).map(|b| from_box(&b))
}

/// `(ops * L * M) ** (N * K)` as an exact integer.
#[pyfunction]
#[pyo3(signature = (ops = 22, magnitude_levels = 6, probability_levels = 6, ops_per_sub_policy = 2, sub_policies = 5))]
fn search_space_cardinality(
    ops: u64,
    magnitude_levels: u64,
    probability_levels: u64,
    ops_per_sub_policy: u32,
    sub_policies: u32,
) -> PyResult<BigUint> {
    bboxaug::search_space_cardinality(ops, magnitude_levels, probability_levels, ops_per_sub_policy, sub_policies)
        .map_err(to_py_err)
}

/// Search on the synthetic token-match reward. Returns
/// `(best_reward, best_tokens, best_policy)`.
#[pyfunction]
#[pyo3(signature = (optimizer, target_seed, budget, seed = 0))]
fn search_synthetic(
    py: Python<'_>,
    optimizer: &str,
    target_seed: u64,
    budget: usize,
    seed: u64,
) -> PyResult<(f64, Vec<usize>, PyPolicy)> {
    let space = SearchSpace::default();
    let target = space.random_candidate(&mut bboxaug::rng_from_seed(target_seed));
    let reward = TokenMatchReward::new(target, &space).map_err(to_py_err)?;
    let opts = EvalOptions::default();
    let outcome = py
        .detach(|| {
            let mut rng = bboxaug::rng_from_seed(seed);
            match optimizer {
                "random" => random_search(&space, &reward, budget, opts, &mut rng),
                "evolution" => {
                    let cfg = EvolutionConfig {
                        budget,
                        ..Default::default()
                    };
                    evolution_search(&space, &reward, cfg, opts, &mut rng)
                }
                "ppo" => {
                    let batch = PpoConfig::default().batch;
                    let cfg = PpoConfig {
                        iterations: (budget / batch).max(1),
                        ..Default::default()
                    };
                    ppo_search(&space, &reward, cfg, opts, &mut rng).map(|o| o.search)
                }
                other => Err(Error::InvalidArgument(format!(
                    "unknown optimizer \"{other}\"; expected random, evolution or ppo"
                ))),
            }
        })
        .map_err(to_py_err)?;
    let policy = decode(&outcome.best, &space).map_err(to_py_err)?;
    Ok((
        outcome.best_reward,
        outcome.best.tokens,
        PyPolicy {
            inner: policy,
            levels: space.levels,
        },
    ))
}

#[pymodule]
fn pybboxaug(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PyPolicy>()?;
    m.add_function(wrap_pyfunction!(apply_policy, m)?)?;
    m.add_function(wrap_pyfunction!(apply_sub_policy, m)?)?;
    m.add_function(wrap_pyfunction!(affine_warp, m)?)?;
    m.add_function(wrap_pyfunction!(transform_bbox, m)?)?;
    m.add_function(wrap_pyfunction!(search_space_cardinality, m)?)?;
    m.add_function(wrap_pyfunction!(search_synthetic, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
