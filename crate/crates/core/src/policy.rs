//! Discretized augmentation policies: operation vocabulary, probability and
//! magnitude levels, sub-policy execution, the policy file format and the
//! built-in COCO policy.
//!
//! Magnitudes are stored as a level `0..L` which maps linearly onto a
//! `0..=10` scale and from there onto each operation's native range.
//! Probabilities are stored as a level `0..M` on a uniform grid over `[0, 1]`.

use std::fmt;

use num_bigint::BigUint;
use rand::Rng;
use serde_json::Value;

use crate::bbox_only_ops::{apply_bbox_only, bbox_translate_sign, BBoxOnlyOpKind};
use crate::color_ops::{apply_color, ColorOpKind};
use crate::error::{Error, Result};
use crate::geom::AnnotatedImage;
use crate::geometric_ops::{apply_geometric_with, GeoOpKind};

const RANGE_SLACK: f64 = 1e-9;

/// Native value range of an operation's magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MagnitudeRange {
    /// Scale 0 maps to `lo`, scale 10 to `hi`.
    Linear { lo: f64, hi: f64 },
    /// Scale 0 maps to `hi`, scale 10 to `lo` (Solarize: a lower threshold
    /// is a stronger distortion).
    Inverted { lo: f64, hi: f64 },
    /// `[-max, max]`; the scale sets the absolute value and the sign is
    /// drawn at application time.
    Symmetric { max: f64 },
}

impl MagnitudeRange {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            MagnitudeRange::Linear { lo, hi } | MagnitudeRange::Inverted { lo, hi } => (lo, hi),
            MagnitudeRange::Symmetric { max } => (-max, max),
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        let (lo, hi) = self.bounds();
        value.is_finite() && value >= lo - RANGE_SLACK && value <= hi + RANGE_SLACK
    }

    pub(crate) fn check(&self, value: f64, what: &str) -> Result<()> {
        if self.contains(value) {
            Ok(())
        } else {
            let (lo, hi) = self.bounds();
            Err(Error::invalid(format!("{what} magnitude {value} outside [{lo}, {hi}]")))
        }
    }

    /// Native value for a scale in `[0, 10]`. `sign` only matters for
    /// symmetric ranges.
    pub fn value_at_scale(&self, scale: f64, sign: f64) -> f64 {
        let t = scale / 10.0;
        match *self {
            MagnitudeRange::Linear { lo, hi } => lo + t * (hi - lo),
            MagnitudeRange::Inverted { lo, hi } => hi - t * (hi - lo),
            MagnitudeRange::Symmetric { max } => sign * t * max,
        }
    }
}

/// The 22 searchable operations plus `NoOp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Equalize,
    Solarize,
    SolarizeAdd,
    Contrast,
    Color,
    Brightness,
    Sharpness,
    Cutout,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    Rotate,
    BBoxOnlyEqualize,
    BBoxOnlySolarize,
    BBoxOnlyRotate,
    BBoxOnlyShearX,
    BBoxOnlyShearY,
    BBoxOnlyTranslateX,
    BBoxOnlyTranslateY,
    BBoxOnlyFlipLR,
    BBoxOnlyCutout,
    NoOp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpCategory {
    Color(ColorOpKind),
    Geometric(GeoOpKind),
    BBoxOnly(BBoxOnlyOpKind),
    NoOp,
}

impl OpKind {
    /// Search vocabulary, in token order.
    pub const SEARCHABLE: [OpKind; 22] = [
        OpKind::Equalize,
        OpKind::Solarize,
        OpKind::SolarizeAdd,
        OpKind::Contrast,
        OpKind::Color,
        OpKind::Brightness,
        OpKind::Sharpness,
        OpKind::Cutout,
        OpKind::ShearX,
        OpKind::ShearY,
        OpKind::TranslateX,
        OpKind::TranslateY,
        OpKind::Rotate,
        OpKind::BBoxOnlyEqualize,
        OpKind::BBoxOnlySolarize,
        OpKind::BBoxOnlyRotate,
        OpKind::BBoxOnlyShearX,
        OpKind::BBoxOnlyShearY,
        OpKind::BBoxOnlyTranslateX,
        OpKind::BBoxOnlyTranslateY,
        OpKind::BBoxOnlyFlipLR,
        OpKind::BBoxOnlyCutout,
    ];

    pub fn category(self) -> OpCategory {
        use OpKind::*;
        match self {
            Equalize => OpCategory::Color(ColorOpKind::Equalize),
            Solarize => OpCategory::Color(ColorOpKind::Solarize),
            SolarizeAdd => OpCategory::Color(ColorOpKind::SolarizeAdd),
            Contrast => OpCategory::Color(ColorOpKind::Contrast),
            Color => OpCategory::Color(ColorOpKind::Color),
            Brightness => OpCategory::Color(ColorOpKind::Brightness),
            Sharpness => OpCategory::Color(ColorOpKind::Sharpness),
            Cutout => OpCategory::Color(ColorOpKind::Cutout),
            ShearX => OpCategory::Geometric(GeoOpKind::ShearX),
            ShearY => OpCategory::Geometric(GeoOpKind::ShearY),
            TranslateX => OpCategory::Geometric(GeoOpKind::TranslateX),
            TranslateY => OpCategory::Geometric(GeoOpKind::TranslateY),
            Rotate => OpCategory::Geometric(GeoOpKind::Rotate),
            BBoxOnlyEqualize => OpCategory::BBoxOnly(BBoxOnlyOpKind::Equalize),
            BBoxOnlySolarize => OpCategory::BBoxOnly(BBoxOnlyOpKind::Solarize),
            BBoxOnlyRotate => OpCategory::BBoxOnly(BBoxOnlyOpKind::Rotate),
            BBoxOnlyShearX => OpCategory::BBoxOnly(BBoxOnlyOpKind::ShearX),
            BBoxOnlyShearY => OpCategory::BBoxOnly(BBoxOnlyOpKind::ShearY),
            BBoxOnlyTranslateX => OpCategory::BBoxOnly(BBoxOnlyOpKind::TranslateX),
            BBoxOnlyTranslateY => OpCategory::BBoxOnly(BBoxOnlyOpKind::TranslateY),
            BBoxOnlyFlipLR => OpCategory::BBoxOnly(BBoxOnlyOpKind::FlipLR),
            BBoxOnlyCutout => OpCategory::BBoxOnly(BBoxOnlyOpKind::Cutout),
            NoOp => OpCategory::NoOp,
        }
    }

    pub fn name(self) -> &'static str {
        use OpKind::*;
        match self {
            Equalize => "Equalize",
            Solarize => "Solarize",
            SolarizeAdd => "SolarizeAdd",
            Contrast => "Contrast",
            Color => "Color",
            Brightness => "Brightness",
            Sharpness => "Sharpness",
            Cutout => "Cutout",
            ShearX => "ShearX",
            ShearY => "ShearY",
            TranslateX => "TranslateX",
            TranslateY => "TranslateY",
            Rotate => "Rotate",
            BBoxOnlyEqualize => "BBox_Only_Equalize",
            BBoxOnlySolarize => "BBox_Only_Solarize",
            BBoxOnlyRotate => "BBox_Only_Rotate",
            BBoxOnlyShearX => "BBox_Only_ShearX",
            BBoxOnlyShearY => "BBox_Only_ShearY",
            BBoxOnlyTranslateX => "BBox_Only_TranslateX",
            BBoxOnlyTranslateY => "BBox_Only_TranslateY",
            BBoxOnlyFlipLR => "BBox_Only_FlipLR",
            BBoxOnlyCutout => "BBox_Only_Cutout",
            NoOp => "NoOp",
        }
    }

    /// Accepts the canonical names plus "No operation" for `NoOp`.
    pub fn from_name(name: &str) -> Option<OpKind> {
        if name == "No operation" {
            return Some(OpKind::NoOp);
        }
        OpKind::SEARCHABLE
            .iter()
            .chain(std::iter::once(&OpKind::NoOp))
            .copied()
            .find(|k| k.name() == name)
    }

    pub fn magnitude_range(self) -> Option<MagnitudeRange> {
        match self.category() {
            OpCategory::Color(k) => k.magnitude_range(),
            OpCategory::Geometric(k) => Some(k.magnitude_range()),
            OpCategory::BBoxOnly(k) => k.magnitude_range(),
            OpCategory::NoOp => None,
        }
    }

    pub fn has_magnitude(self) -> bool {
        self.magnitude_range().is_some()
    }

    /// Position in [`OpKind::SEARCHABLE`]; `None` for `NoOp`.
    pub fn token(self) -> Option<usize> {
        OpKind::SEARCHABLE.iter().position(|&k| k == self)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OpSpec {
    pub kind: OpKind,
    pub prob_level: usize,
    pub mag_level: usize,
}

impl OpSpec {
    pub fn new(kind: OpKind, prob_level: usize, mag_level: usize) -> Self {
        OpSpec {
            kind,
            prob_level,
            mag_level,
        }
    }

    pub fn noop() -> Self {
        OpSpec::new(OpKind::NoOp, 0, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubPolicy {
    pub ops: Vec<OpSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Policy {
    pub sub_policies: Vec<SubPolicy>,
}

impl Policy {
    pub fn new(sub_policies: Vec<SubPolicy>) -> Result<Self> {
        if sub_policies.is_empty() {
            return Err(Error::invalid("a policy needs at least one sub-policy"));
        }
        Ok(Policy { sub_policies })
    }

    /// Concatenates several policies into one larger set.
    pub fn merge(policies: &[Policy]) -> Result<Policy> {
        Policy::new(policies.iter().flat_map(|p| p.sub_policies.iter().cloned()).collect())
    }

    pub fn validate(&self, cfg: &LevelConfig) -> Result<()> {
        cfg.validate()?;
        if self.sub_policies.is_empty() {
            return Err(Error::invalid("a policy needs at least one sub-policy"));
        }
        for (i, sp) in self.sub_policies.iter().enumerate() {
            if sp.ops.len() != cfg.ops_per_sub_policy {
                return Err(Error::invalid(format!(
                    "sub-policy {i} has {} operations, expected {}",
                    sp.ops.len(),
                    cfg.ops_per_sub_policy
                )));
            }
            for op in &sp.ops {
                if op.prob_level >= cfg.probability_levels || op.mag_level >= cfg.magnitude_levels {
                    return Err(Error::invalid(format!("sub-policy {i}: levels of {op:?} out of range")));
                }
            }
        }
        Ok(())
    }
}

/// Discretization of the search space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelConfig {
    /// L
    pub magnitude_levels: usize,
    /// M
    pub probability_levels: usize,
    /// N
    pub ops_per_sub_policy: usize,
}

impl Default for LevelConfig {
    fn default() -> Self {
        LevelConfig {
            magnitude_levels: 6,
            probability_levels: 6,
            ops_per_sub_policy: 2,
        }
    }
}

impl LevelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.magnitude_levels < 2 || self.probability_levels < 2 {
            return Err(Error::invalid("magnitude and probability levels must be >= 2"));
        }
        if self.ops_per_sub_policy == 0 {
            return Err(Error::invalid("sub-policies need at least one operation"));
        }
        Ok(())
    }

    /// Magnitude level to the 0..=10 scale.
    pub fn magnitude_scale(&self, level: usize) -> f64 {
        10.0 * level as f64 / (self.magnitude_levels - 1) as f64
    }

    fn level_of(value: f64, steps: usize, span: f64) -> Option<usize> {
        let raw = value / span * steps as f64;
        let level = raw.round();
        ((raw - level).abs() < 1e-6 && level >= 0.0 && level <= steps as f64).then_some(level as usize)
    }

    /// Inverse of [`LevelConfig::magnitude_scale`] for on-grid values.
    pub fn magnitude_level(&self, scale: f64) -> Option<usize> {
        Self::level_of(scale, self.magnitude_levels - 1, 10.0)
    }

    pub fn probability_level(&self, prob: f64) -> Option<usize> {
        Self::level_of(prob, self.probability_levels - 1, 1.0)
    }
}

/// How the probability of a bbox-only operation is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BBoxOnlyGating {
    /// Every box gets its own coin flip.
    #[default]
    PerBox,
    /// One coin for the whole operation; when it lands, every box is hit.
    PerOp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentConfig {
    pub levels: LevelConfig,
    /// Boxes smaller than this after a geometric op are dropped.
    pub min_box_area: f64,
    pub bbox_only_gating: BBoxOnlyGating,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            levels: LevelConfig::default(),
            min_box_area: 0.0,
            bbox_only_gating: BBoxOnlyGating::PerBox,
        }
    }
}

pub fn probability_value(level: usize, cfg: &LevelConfig) -> Result<f64> {
    if level >= cfg.probability_levels {
        return Err(Error::invalid(format!(
            "probability level {level} >= {}",
            cfg.probability_levels
        )));
    }
    Ok(level as f64 / (cfg.probability_levels - 1) as f64)
}

/// Native magnitude for `kind` at `level`. Symmetric ranges draw a fair
/// random sign on every call, even at scale 0.
pub fn magnitude_value<R: Rng + ?Sized>(kind: OpKind, level: usize, cfg: &LevelConfig, rng: &mut R) -> Result<f64> {
    let range = kind
        .magnitude_range()
        .ok_or_else(|| Error::invalid(format!("{kind} takes no magnitude")))?;
    if level >= cfg.magnitude_levels {
        return Err(Error::invalid(format!("magnitude level {level} >= {}", cfg.magnitude_levels)));
    }
    let sign = match range {
        MagnitudeRange::Symmetric { .. } => bbox_translate_sign(rng),
        _ => 1.0,
    };
    Ok(range.value_at_scale(cfg.magnitude_scale(level), sign))
}

/// Runs the operations of one sub-policy in order. Color and geometric ops
/// flip one coin each; bbox-only ops gate per `cfg.bbox_only_gating`.
/// Operations with probability 0 and `NoOp` consume no randomness.
pub fn apply_sub_policy<R: Rng + ?Sized>(
    sp: &SubPolicy,
    img: &AnnotatedImage,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<AnnotatedImage> {
    let mut cur = img.clone();
    for op in &sp.ops {
        if op.kind == OpKind::NoOp {
            continue;
        }
        let p = probability_value(op.prob_level, &cfg.levels)?;
        if p == 0.0 {
            continue;
        }
        let category = op.kind.category();
        let per_box = matches!(category, OpCategory::BBoxOnly(_)) && cfg.bbox_only_gating == BBoxOnlyGating::PerBox;
        if !per_box && p < 1.0 && !rng.gen_bool(p) {
            continue;
        }
        let value = if op.kind.has_magnitude() {
            magnitude_value(op.kind, op.mag_level, &cfg.levels, rng)?
        } else {
            0.0
        };
        cur = match category {
            OpCategory::Color(k) => apply_color(&cur, k, value, rng)?,
            OpCategory::Geometric(k) => apply_geometric_with(&cur, k, value, cfg.min_box_area)?,
            OpCategory::BBoxOnly(k) => apply_bbox_only(&cur, k, value, if per_box { p } else { 1.0 }, rng)?,
            OpCategory::NoOp => unreachable!(),
        };
    }
    Ok(cur)
}

/// Picks one sub-policy uniformly and applies it.
pub fn apply_policy<R: Rng + ?Sized>(
    p: &Policy,
    img: &AnnotatedImage,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<AnnotatedImage> {
    if p.sub_policies.is_empty() {
        return Err(Error::invalid("cannot apply an empty policy"));
    }
    let idx = rng.gen_range(0..p.sub_policies.len());
    apply_sub_policy(&p.sub_policies[idx], img, cfg, rng)
}

/// The learned COCO policy, on the default 6x6 grid.
pub fn builtin_coco_policy() -> Policy {
    let cfg = LevelConfig::default();
    let op = |kind, prob: f64, mag: f64| {
        OpSpec::new(
            kind,
            cfg.probability_level(prob).expect("on grid"),
            cfg.magnitude_level(mag).expect("on grid"),
        )
    };
    let sp = |a, b| SubPolicy { ops: vec![a, b] };
    Policy {
        sub_policies: vec![
            sp(op(OpKind::TranslateX, 0.6, 4.0), op(OpKind::Equalize, 0.8, 10.0)),
            sp(op(OpKind::BBoxOnlyTranslateY, 0.2, 2.0), op(OpKind::Cutout, 0.8, 8.0)),
            sp(op(OpKind::ShearY, 1.0, 2.0), op(OpKind::BBoxOnlyTranslateY, 0.6, 6.0)),
            sp(op(OpKind::Rotate, 0.6, 10.0), op(OpKind::Color, 1.0, 6.0)),
            sp(OpSpec::noop(), OpSpec::noop()),
        ],
    }
}

fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

fn op_json(op: &OpSpec, cfg: &LevelConfig) -> String {
    let prob = op.prob_level as f64 / (cfg.probability_levels - 1) as f64;
    format!(
        "{{\"op\": {}, \"prob\": {}, \"magnitude\": {}}}",
        Value::from(op.kind.name()),
        Value::from(prob),
        number(cfg.magnitude_scale(op.mag_level))
    )
}

/// Canonical policy document: fixed key order, one sub-policy per line.
pub fn serialize_policy(p: &Policy, cfg: &LevelConfig) -> String {
    let rows: Vec<String> = p
        .sub_policies
        .iter()
        .map(|sp| {
            let ops: Vec<String> = sp.ops.iter().map(|op| op_json(op, cfg)).collect();
            format!("    [{}]", ops.join(", "))
        })
        .collect();
    format!("{{\n  \"version\": 1,\n  \"sub_policies\": [\n{}\n  ]\n}}\n", rows.join(",\n"))
}

fn parse_err(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        context: context.into(),
        message: message.into(),
    }
}

fn parse_op(v: &Value, ctx: &str, cfg: &LevelConfig) -> Result<OpSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err(ctx, "expected an object {\"op\", \"prob\", \"magnitude\"}"))?;
    if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "op" | "prob" | "magnitude")) {
        return Err(parse_err(format!("{ctx}.{extra}"), "unknown field"));
    }
    let name = obj
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err(format!("{ctx}.op"), "missing or not a string"))?;
    let kind = OpKind::from_name(name).ok_or_else(|| parse_err(format!("{ctx}.op"), format!("unknown operation \"{name}\"")))?;

    let field = |key: &str| -> Result<Option<f64>> {
        match obj.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| parse_err(format!("{ctx}.{key}"), "not a number")),
        }
    };
    let (prob, magnitude) = match (field("prob")?, field("magnitude")?, kind) {
        (p, m, OpKind::NoOp) => (p.unwrap_or(0.0), m.unwrap_or(0.0)),
        (Some(p), Some(m), _) => (p, m),
        (None, _, _) => return Err(parse_err(format!("{ctx}.prob"), "missing")),
        (_, None, _) => return Err(parse_err(format!("{ctx}.magnitude"), "missing")),
    };
    if !(0.0..=1.0).contains(&prob) {
        return Err(parse_err(format!("{ctx}.prob"), format!("probability {prob} outside [0, 1]")));
    }
    if !(0.0..=10.0).contains(&magnitude) {
        return Err(parse_err(format!("{ctx}.magnitude"), format!("magnitude {magnitude} outside [0, 10]")));
    }
    let prob_level = cfg.probability_level(prob).ok_or_else(|| {
        parse_err(
            format!("{ctx}.prob"),
            format!("probability {prob} is not a multiple of 1/{}", cfg.probability_levels - 1),
        )
    })?;
    let mag_level = cfg.magnitude_level(magnitude).ok_or_else(|| {
        parse_err(
            format!("{ctx}.magnitude"),
            format!("magnitude {magnitude} is not a multiple of 10/{}", cfg.magnitude_levels - 1),
        )
    })?;
    Ok(OpSpec::new(kind, prob_level, mag_level))
}

pub fn parse_policy(text: &str, cfg: &LevelConfig) -> Result<Policy> {
    cfg.validate()?;
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let root = doc.as_object().ok_or_else(|| parse_err("$", "expected a JSON object"))?;
    if let Some(extra) = root.keys().find(|k| !matches!(k.as_str(), "version" | "sub_policies")) {
        return Err(parse_err(format!("$.{extra}"), "unknown field"));
    }
    match root.get("version").and_then(Value::as_u64) {
        Some(1) => {}
        Some(v) => return Err(parse_err("$.version", format!("unsupported version {v}"))),
        None => return Err(parse_err("$.version", "missing or not an integer")),
    }
    let subs = root
        .get("sub_policies")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("$.sub_policies", "missing or not an array"))?;
    if subs.is_empty() {
        return Err(parse_err("$.sub_policies", "at least one sub-policy is required"));
    }
    let mut sub_policies = Vec::with_capacity(subs.len());
    for (i, sp) in subs.iter().enumerate() {
        let ctx = format!("$.sub_policies[{i}]");
        let ops = sp.as_array().ok_or_else(|| parse_err(&ctx, "expected an array of operations"))?;
        if ops.len() != cfg.ops_per_sub_policy {
            return Err(parse_err(
                &ctx,
                format!("expected {} operations, found {}", cfg.ops_per_sub_policy, ops.len()),
            ));
        }
        let ops = ops
            .iter()
            .enumerate()
            .map(|(j, op)| parse_op(op, &format!("{ctx}[{j}]"), cfg))
            .collect::<Result<Vec<_>>>()?;
        sub_policies.push(SubPolicy { ops });
    }
    Ok(Policy { sub_policies })
}

/// `(num_ops * L * M)^(N * K)`, exactly.
pub fn search_space_cardinality(num_ops: u64, l: u64, m: u64, n: u32, k: u32) -> Result<BigUint> {
    if num_ops == 0 || l == 0 || m == 0 || n == 0 || k == 0 {
        return Err(Error::invalid("all search-space sizes must be >= 1"));
    }
    let base = BigUint::from(num_ops) * BigUint::from(l) * BigUint::from(m);
    Ok(base.pow(n * k))
}

/// Scientific notation `d.dd...e<exp>` with `digits` digits after the point,
/// rounded half up on the decimal expansion.
pub fn scientific(value: &BigUint, digits: usize) -> String {
    let s = value.to_str_radix(10);
    let exp = s.len() - 1;
    if s.len() <= digits + 1 {
        let padded = format!("{s:0<width$}", width = digits + 1);
        return format_mantissa(&padded, digits, exp);
    }
    let head: BigUint = s[..digits + 1].parse().expect("decimal digits");
    let round_up = s.as_bytes()[digits + 1] >= b'5';
    let head = if round_up { head + 1u32 } else { head };
    let hs = head.to_str_radix(10);
    if hs.len() > digits + 1 {
        // 9.99.. rounded up to 10.0..
        format_mantissa(&hs[..digits + 1], digits, exp + 1)
    } else {
        format_mantissa(&hs, digits, exp)
    }
}

fn format_mantissa(digits_str: &str, digits: usize, exp: usize) -> String {
    if digits == 0 {
        format!("{}e{exp}", &digits_str[..1])
    } else {
        format!("{}.{}e{exp}", &digits_str[..1], &digits_str[1..digits + 1])
    }
}
