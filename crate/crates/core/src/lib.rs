//! Bounding-box aware augmentation policies for object detection.
//!
//! Images are plain RGB8 rasters ([`ImageBuffer`]) paired with pixel-space
//! boxes ([`BBox`]). Operations come in three families: color ops that leave
//! boxes alone, geometric ops that move pixels and boxes together, and
//! bbox-only ops that run a base op inside each box. A [`Policy`] is a set
//! of sub-policies; each application picks one uniformly and runs its ops
//! with their discretized probabilities and magnitudes. The [`search`]
//! module finds policies by optimizing over the token encoding.

pub mod bbox_only_ops;
pub mod cli;
pub mod color_ops;
pub mod dataset;
pub mod error;
pub mod geom;
pub mod geometric_ops;
pub mod policy;
pub mod raster;
pub mod rng;
pub mod search;

pub use bbox_only_ops::{apply_bbox_only, BBoxOnlyOpKind};
pub use color_ops::{apply_color, ColorOpKind};
pub use error::{Error, Result};
pub use geom::{transform_bbox, AnnotatedImage, BBox};
pub use geometric_ops::{apply_geometric, GeoOpKind};
pub use policy::{
    apply_policy, apply_sub_policy, builtin_coco_policy, parse_policy, search_space_cardinality, serialize_policy,
    AugmentConfig, BBoxOnlyGating, LevelConfig, OpKind, OpSpec, Policy, SubPolicy,
};
pub use raster::{affine_warp, AffineMatrix, ImageBuffer, Rgb, GRAY};
pub use rng::{derive_seed, rng_from_seed, AugRng};
