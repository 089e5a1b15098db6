//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use bboxaug::bbox_only_ops::{apply_bbox_only, BBoxOnlyOpKind};
use bboxaug::color_ops::{cutout, enhance, solarize, ColorOpKind};
use bboxaug::dataset::BaselineParams;
use bboxaug::geom::envelope;
use bboxaug::geometric_ops::{apply_geometric, GeoOpKind};
use bboxaug::policy::{magnitude_value, probability_value, scientific};
use bboxaug::search::{
    evolution_search, ppo_search, surrogate, surrogate_gradient, Candidate, EvalOptions, EvolutionConfig, PpoConfig,
    SearchSpace, TokenMatchReward,
};
use bboxaug::{
    affine_warp, apply_policy, apply_sub_policy, builtin_coco_policy, derive_seed, parse_policy, rng_from_seed,
    search_space_cardinality, serialize_policy, transform_bbox, AffineMatrix, AnnotatedImage, AugmentConfig, BBox,
    ImageBuffer, LevelConfig, OpKind, OpSpec, Policy, SubPolicy, GRAY,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_image<R: Rng>(w: usize, h: usize, r: &mut R) -> ImageBuffer {
    ImageBuffer::from_fn(w, h, |_, _| [r.gen(), r.gen(), r.gen()]).unwrap()
}

fn random_boxes<R: Rng>(w: usize, h: usize, n: usize, r: &mut R) -> Vec<BBox> {
    (0..n)
        .map(|i| {
            let x0 = r.gen_range(0.0..w as f64 - 1.0);
            let y0 = r.gen_range(0.0..h as f64 - 1.0);
            let x1 = r.gen_range(x0 + 0.5..=w as f64);
            let y1 = r.gen_range(y0 + 0.5..=h as f64);
            BBox::new(x0, y0, x1, y1, i as i64)
        })
        .collect()
}

// 1. Cardinality -----------------------------------------------------------

/// Schoolbook decimal arithmetic, little-endian digits.
fn decimal_pow(base: u32, exp: u32) -> String {
    let mut digits = vec![1u32];
    for _ in 0..exp {
        let mut carry = 0u32;
        for d in digits.iter_mut() {
            let v = *d * base + carry;
            *d = v % 10;
            carry = v / 10;
        }
        while carry > 0 {
            digits.push(carry % 10);
            carry /= 10;
        }
    }
    digits.iter().rev().map(|d| char::from(b'0' + *d as u8)).collect()
}

fn cardinality() -> Verdict {
    let start = Instant::now();
    let exact = search_space_cardinality(22, 6, 6, 2, 5).unwrap();
    let oracle = decimal_pow(22 * 6 * 6, 2 * 5);
    let digits_ok = exact.to_string() == oracle;
    let approx = scientific(&exact, 1);
    let elapsed = start.elapsed();
    verdict(
        digits_ok && approx == "9.6e28" && elapsed < Duration::from_secs(1),
        format!(
            "exact {exact} (decimal oracle {}); scientific {approx}, paper states 9.6e28",
            if digits_ok { "agrees" } else { "DISAGREES" }
        ),
    )
}

// 2. Built-in policy fidelity ----------------------------------------------

/// The learned policy table as printed: operation, probability, magnitude.
const POLICY_TABLE: &str = "
TranslateX 0.6 4 Equalize 0.8 10
BBox_Only_TranslateY 0.2 2 Cutout 0.8 8
ShearY 1.0 2 BBox_Only_TranslateY 0.6 6
Rotate 0.6 10 Color 1.0 6
NoOp - - NoOp - -
";

fn builtin_fidelity() -> Verdict {
    let cfg = LevelConfig::default();
    let p = builtin_coco_policy();
    let rows: Vec<Vec<&str>> = POLICY_TABLE.trim().lines().map(|l| l.split_whitespace().collect()).collect();
    let mut mismatches = Vec::new();
    if p.sub_policies.len() != rows.len() {
        mismatches.push(format!("{} sub-policies, table has {}", p.sub_policies.len(), rows.len()));
    }
    for (i, (sp, row)) in p.sub_policies.iter().zip(&rows).enumerate() {
        if sp.ops.len() != 2 {
            mismatches.push(format!("sub-policy {i} has {} ops", sp.ops.len()));
            continue;
        }
        for (j, (op, cell)) in sp.ops.iter().zip(row.chunks(3)).enumerate() {
            let name_ok = op.kind.name() == cell[0];
            let values_ok = if cell[1] == "-" {
                op.kind == OpKind::NoOp
            } else {
                let prob: f64 = cell[1].parse().unwrap();
                let mag: f64 = cell[2].parse().unwrap();
                (probability_value(op.prob_level, &cfg).unwrap() - prob).abs() < 1e-12
                    && (cfg.magnitude_scale(op.mag_level) - mag).abs() < 1e-12
            };
            if !(name_ok && values_ok) {
                mismatches.push(format!("sub-policy {i} op {j}: {op:?} vs {cell:?}"));
            }
        }
    }
    let text = serialize_policy(&p, &cfg);
    let round_trip = parse_policy(&text, &cfg).map(|q| q == p).unwrap_or(false);
    verdict(
        mismatches.is_empty() && round_trip,
        format!(
            "{} field mismatches against the table; serialize/parse round trip {}",
            mismatches.len(),
            if round_trip { "is identity" } else { "FAILS" }
        ),
    )
}

// 3. Warp oracle ------------------------------------------------------------

/// Brute-force inverse map: solve the 2x2 system per pixel by Cramer's rule
/// and take the nearest source pixel center, ties to the lower index.
fn warp_oracle(src: &ImageBuffer, m: &AffineMatrix) -> ImageBuffer {
    let det = m.a * m.e - m.b * m.d;
    let nearest = |p: f64| {
        let q = p - 0.5;
        let f = q.floor();
        if q - f > 0.5 {
            f + 1.0
        } else {
            f
        }
    };
    ImageBuffer::from_fn(src.width(), src.height(), |x, y| {
        let (qx, qy) = (x as f64 + 0.5 - m.c, y as f64 + 0.5 - m.f);
        let px = (qx * m.e - m.b * qy) / det;
        let py = (m.a * qy - m.d * qx) / det;
        let (sx, sy) = (nearest(px), nearest(py));
        if sx >= 0.0 && sy >= 0.0 && sx < src.width() as f64 && sy < src.height() as f64 {
            src.get(sx as usize, sy as usize)
        } else {
            GRAY
        }
    })
    .unwrap()
}

fn warp_equivalence() -> Verdict {
    let start = Instant::now();
    let mut r = rng(3);
    let mut equal = 0;
    let trials = 200;
    for _ in 0..trials {
        let (w, h) = (r.gen_range(1..=32), r.gen_range(1..=32));
        let src = random_image(w, h, &mut r);
        let m = loop {
            let m = AffineMatrix::new(
                r.gen_range(-1.5..1.5),
                r.gen_range(-1.5..1.5),
                r.gen_range(-20.0..20.0),
                r.gen_range(-1.5..1.5),
                r.gen_range(-1.5..1.5),
                r.gen_range(-20.0..20.0),
            );
            if m.determinant().abs() > 0.2 {
                break m;
            }
        };
        if affine_warp(&src, &m, GRAY).unwrap() == warp_oracle(&src, &m) {
            equal += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        equal == trials && elapsed < Duration::from_secs(10),
        format!("{equal}/{trials} random warps byte-identical to the brute-force oracle"),
    )
}

// 4. Box/image consistency --------------------------------------------------

/// Each kind's point map written out from its definition.
fn reference_map(kind: GeoOpKind, v: f64, w: f64, h: f64, x: f64, y: f64) -> (f64, f64) {
    match kind {
        GeoOpKind::ShearX => (x + v * y, y),
        GeoOpKind::ShearY => (x, y + v * x),
        GeoOpKind::TranslateX => (x + v, y),
        GeoOpKind::TranslateY => (x, y + v),
        GeoOpKind::Rotate => {
            let (s, c) = v.to_radians().sin_cos();
            let (cx, cy) = (w / 2.0, h / 2.0);
            (cx + c * (x - cx) - s * (y - cy), cy + s * (x - cx) + c * (y - cy))
        }
    }
}

fn corner_envelope_oracle(b: &BBox, m: &AffineMatrix, w: f64, h: f64) -> Option<BBox> {
    let pts = b.corners().map(|(x, y)| m.apply(x, y));
    let x_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).max(0.0).min(w);
    let x_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).max(0.0).min(w);
    let y_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).max(0.0).min(h);
    let y_max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).max(0.0).min(h);
    (x_max > x_min && y_max > y_min).then(|| BBox::new(x_min, y_min, x_max, y_max, b.category_id))
}

fn box_consistency() -> Verdict {
    let start = Instant::now();
    let mut r = rng(4);
    let trials = 200;
    let mut exact = 0;
    let mut map_ok = true;
    for t in 0..trials {
        let kind = GeoOpKind::ALL[t % GeoOpKind::ALL.len()];
        let (w, h) = (r.gen_range(8..=64), r.gen_range(8..=64));
        let max = kind.magnitude_range().bounds().1;
        let v = r.gen_range(-max..=max);
        let boxes = random_boxes(w, h, r.gen_range(1..=4), &mut r);
        let img = AnnotatedImage::new(random_image(w, h, &mut r), boxes.clone()).unwrap();
        let out = apply_geometric(&img, kind, v).unwrap();
        let m = kind.matrix(v, w, h);
        let (wf, hf) = (w as f64, h as f64);
        for b in &boxes {
            for (x, y) in b.corners() {
                let (u, vv) = m.apply(x, y);
                let (ru, rv) = reference_map(kind, v, wf, hf, x, y);
                map_ok &= (u - ru).abs() < 1e-9 && (vv - rv).abs() < 1e-9;
            }
        }
        let expected: Vec<BBox> = boxes.iter().filter_map(|b| corner_envelope_oracle(b, &m, wf, hf)).collect();
        if out.boxes == expected {
            exact += 1;
        }
    }
    let quarter = AffineMatrix::rotation_about(90.0, 50.0, 50.0);
    let turned = transform_bbox(&BBox::new(40.0, 40.0, 60.0, 70.0, 0), &quarter, 100.0, 100.0);
    let quarter_ok = turned == Some(BBox::new(30.0, 40.0, 60.0, 60.0, 0))
        && envelope(&BBox::new(40.0, 40.0, 60.0, 70.0, 0), &quarter) == BBox::new(30.0, 40.0, 60.0, 60.0, 0);
    let elapsed = start.elapsed();
    verdict(
        exact == trials && map_ok && quarter_ok && elapsed < Duration::from_secs(10),
        format!(
            "{exact}/{trials} box sets equal the corner-envelope oracle; matrices {} the reference maps; 90 degree case {}",
            if map_ok { "match" } else { "DO NOT match" },
            if quarter_ok { "(40,40)-(60,70) -> (30,40)-(60,60)" } else { "FAILS" }
        ),
    )
}

// 5. Identity suite ---------------------------------------------------------

fn identity_suite() -> Verdict {
    let trials = 1000u64;
    let cfg = AugmentConfig::default();
    let mut failures: Vec<String> = Vec::new();
    let mut count = |name: &str, ok: usize| {
        if ok != trials as usize {
            failures.push(format!("{name} {ok}/{trials}"));
        }
    };
    let sample = |seed: u64| {
        let mut r = rng(seed);
        let (w, h) = (r.gen_range(2..=24), r.gen_range(2..=24));
        let boxes = random_boxes(w, h, r.gen_range(0..=3), &mut r);
        (AnnotatedImage::new(random_image(w, h, &mut r), boxes).unwrap(), r)
    };

    let ok = (0..trials)
        .filter(|&s| {
            let (img, mut r) = sample(s);
            let ops = (0..2)
                .map(|_| OpSpec::new(OpKind::SEARCHABLE[r.gen_range(0..22)], 0, r.gen_range(0..6)))
                .collect();
            let before = r.clone();
            let out = apply_sub_policy(&SubPolicy { ops }, &img, &cfg, &mut r).unwrap();
            out == img && r == before
        })
        .count();
    count("probability level 0", ok);

    let ok = (0..trials)
        .filter(|&s| {
            let (img, mut r) = sample(1_000_000 + s);
            let kind = GeoOpKind::ALL[(s % 5) as usize];
            let op = [OpKind::ShearX, OpKind::ShearY, OpKind::TranslateX, OpKind::TranslateY, OpKind::Rotate][(s % 5) as usize];
            let v = magnitude_value(op, 0, &cfg.levels, &mut r).unwrap();
            apply_geometric(&img, kind, v).unwrap() == img
        })
        .count();
    count("geometric scale 0", ok);

    let enhancers = [ColorOpKind::Contrast, ColorOpKind::Color, ColorOpKind::Brightness, ColorOpKind::Sharpness];
    let ok = (0..trials)
        .filter(|&s| {
            let (img, _) = sample(2_000_000 + s);
            enhance(&img.image, enhancers[(s % 4) as usize], 1.0).unwrap() == img.image
        })
        .count();
    count("enhance factor 1.0", ok);

    let ok = (0..trials)
        .filter(|&s| {
            let (img, _) = sample(3_000_000 + s);
            solarize(&img.image, 256.0).unwrap() == img.image
        })
        .count();
    count("solarize threshold 256", ok);

    let ok = (0..trials)
        .filter(|&s| {
            let (img, mut r) = sample(4_000_000 + s);
            cutout(&img.image, 0, &mut r) == img.image
        })
        .count();
    count("cutout size 0", ok);

    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("5 identity classes x {trials} seeded trials, all byte-identical")
        } else {
            format!("failing classes: {}", failures.join(", "))
        },
    )
}

// 6. Bbox-only locality -----------------------------------------------------

fn bbox_only_locality() -> Verdict {
    let trials = 1000;
    let mut bad = Vec::new();
    for kind in BBoxOnlyOpKind::ALL {
        let mut r = rng(6 ^ kind as u64);
        let mut ok = 0;
        for _ in 0..trials {
            let (w, h) = (r.gen_range(4..=40), r.gen_range(4..=40));
            let boxes = random_boxes(w, h, r.gen_range(0..=4), &mut r);
            let img = AnnotatedImage::new(random_image(w, h, &mut r), boxes.clone()).unwrap();
            let v = match kind.magnitude_range() {
                Some(range) => {
                    let (lo, hi) = range.bounds();
                    r.gen_range(lo..=hi)
                }
                None => 0.0,
            };
            let prob = [0.0, 0.2, 0.6, 1.0][r.gen_range(0..4)];
            let out = apply_bbox_only(&img, kind, v, prob, &mut r).unwrap();
            let outside_same = (0..h).all(|y| {
                (0..w).all(|x| {
                    let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
                    let touched = boxes.iter().any(|b| {
                        (b.x_min.floor()..b.x_max.ceil()).contains(&(cx - 0.5))
                            && (b.y_min.floor()..b.y_max.ceil()).contains(&(cy - 0.5))
                    });
                    touched || out.image.get(x, y) == img.image.get(x, y)
                })
            });
            if outside_same && out.boxes == boxes {
                ok += 1;
            }
        }
        if ok != trials {
            bad.push(format!("{kind:?} {ok}/{trials}"));
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("9 kinds x {trials} trials: outside pixels and boxes bit-identical")
        } else {
            format!("violations: {}", bad.join(", "))
        },
    )
}

// 7. Sampling statistics ----------------------------------------------------

fn sampling_statistics() -> Verdict {
    let cfg = AugmentConfig::default();
    // Five Brightness levels make the chosen sub-policy visible in a 1x1 output.
    let policy = Policy::new(
        (0..5)
            .map(|level| SubPolicy {
                ops: vec![OpSpec::new(OpKind::Brightness, 5, level), OpSpec::noop()],
            })
            .collect(),
    )
    .unwrap();
    let img = AnnotatedImage::without_boxes(ImageBuffer::new(1, 1, [200, 200, 200]).unwrap());
    let marks: Vec<u8> = policy
        .sub_policies
        .iter()
        .map(|sp| apply_sub_policy(sp, &img, &cfg, &mut rng(0)).unwrap().image.get(0, 0)[0])
        .collect();
    let draws = 50_000;
    let mut counts = [0u64; 5];
    let mut r = rng(7);
    for _ in 0..draws {
        let v = apply_policy(&policy, &img, &cfg, &mut r).unwrap().image.get(0, 0)[0];
        counts[marks.iter().position(|&m| m == v).unwrap()] += 1;
    }
    let e = draws as f64 / 5.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let critical = ChiSquared::new(4.0).unwrap().inverse_cdf(0.99);

    let n = 10_000;
    let mut r = rng(8);
    let positive = (0..n)
        .filter(|_| magnitude_value(OpKind::BBoxOnlyTranslateY, 5, &cfg.levels, &mut r).unwrap() > 0.0)
        .count() as f64
        / n as f64;
    let mut r = rng(9);
    let flipped = (0..n).filter(|_| BaselineParams::sample(640, 480, &mut r).flip).count() as f64 / n as f64;
    let band = 0.47..=0.53;
    verdict(
        chi2 < critical && band.contains(&positive) && band.contains(&flipped),
        format!(
            "chi-square {chi2:.2} < {critical:.3} (df 4, 99%); translate sign + {positive:.4}; baseline flip {flipped:.4}"
        ),
    )
}

// 8. Search efficacy --------------------------------------------------------

fn search_efficacy() -> Verdict {
    let start = Instant::now();
    let space = SearchSpace::default();
    let opts = EvalOptions::default();
    let reward = |seed: u64| {
        let target = space.random_candidate(&mut rng_from_seed(derive_seed(&[seed, 0])));
        TokenMatchReward::new(target, &space).unwrap()
    };
    let ppo_hits = (0..100u64)
        .filter(|&s| {
            let out =
                ppo_search(&space, &reward(s), PpoConfig::default(), opts, &mut rng_from_seed(derive_seed(&[s, 1])))
                    .unwrap();
            *out.mean_rewards.last().unwrap() >= 0.95
        })
        .count();
    let evo_hits = (0..100u64)
        .filter(|&s| {
            evolution_search(&space, &reward(s), EvolutionConfig::default(), opts, &mut rng_from_seed(derive_seed(&[s, 2])))
                .unwrap()
                .best_reward
                >= 0.9
        })
        .count();
    let elapsed = start.elapsed();
    verdict(
        ppo_hits >= 90 && evo_hits >= 95 && elapsed < Duration::from_secs(300),
        format!(
            "PPO final mean >= 0.95 in {ppo_hits}/100 seeds (need 90); evolution best >= 0.9 in {evo_hits}/100 (need 95)"
        ),
    )
}

// 9. PPO gradient check ------------------------------------------------------

fn softmax(l: &[f64]) -> Vec<f64> {
    let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = l.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn gradient_check() -> Verdict {
    let start = Instant::now();
    let mut r = rng(10);
    let eps = 0.2;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut configs = 0;
    while configs < 50 {
        let steps = r.gen_range(1..=8);
        let logits: Vec<Vec<f64>> = (0..steps)
            .map(|_| (0..r.gen_range(2..=8)).map(|_| r.gen_range(-2.0..2.0)).collect())
            .collect();
        let old: Vec<Vec<f64>> = logits
            .iter()
            .map(|l| softmax(&l.iter().map(|v| v + r.gen_range(-0.3..0.3)).collect::<Vec<_>>()))
            .collect();
        let batch = r.gen_range(2..=16);
        let actions: Vec<Candidate> = (0..batch)
            .map(|_| Candidate {
                tokens: logits.iter().map(|l| r.gen_range(0..l.len())).collect(),
            })
            .collect();
        let adv: Vec<f64> = (0..batch).map(|_| r.gen_range(-1.0..1.0)).collect();

        // Keep clear of the clip kinks, where the surrogate is not differentiable.
        let probs: Vec<Vec<f64>> = logits.iter().map(|l| softmax(l)).collect();
        let near_kink = actions.iter().any(|c| {
            c.tokens.iter().enumerate().any(|(s, &a)| {
                let rho = probs[s][a] / old[s][a];
                (rho - 1.0 - eps).abs() < 1e-3 || (rho - 1.0 + eps).abs() < 1e-3
            })
        });
        if near_kink {
            continue;
        }
        let g = surrogate_gradient(&logits, &old, &actions, &adv, eps);
        let mut diff2 = 0.0;
        let mut norm2 = 0.0;
        for s in 0..logits.len() {
            for j in 0..logits[s].len() {
                let mut plus = logits.clone();
                plus[s][j] += h;
                let mut minus = logits.clone();
                minus[s][j] -= h;
                let fd = (surrogate(&plus, &old, &actions, &adv, eps) - surrogate(&minus, &old, &actions, &adv, eps))
                    / (2.0 * h);
                diff2 += (g[s][j] - fd).powi(2);
                norm2 += g[s][j].powi(2).max(fd.powi(2));
            }
        }
        if norm2 < 1e-12 {
            continue;
        }
        worst = worst.max((diff2 / norm2).sqrt());
        configs += 1;
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-4 && elapsed < Duration::from_secs(30),
        format!("worst relative error {worst:.2e} over {configs} configurations (need < 1e-4)"),
    )
}

// 10. Determinism -------------------------------------------------------------

fn determinism() -> Verdict {
    let start = Instant::now();
    let fx = common::write_fixture(20, 96, 72, 10);
    let run = |workers: &str| {
        let out = fx.path().join(format!("out_{workers}"));
        let status = Command::new(env!("CARGO_BIN_EXE_bboxaug"))
            .args(["augment"])
            .arg(fx.annotations())
            .arg(fx.image_root())
            .arg(&out)
            .args(["--builtin", "--seed", "10", "--passes", "2", "--workers", workers])
            .env("AUG_LOG_LEVEL", "error")
            .output()
            .unwrap();
        (status.status.code(), common::read_tree(&out))
    };
    let (code1, one) = run("1");
    let (code8, eight) = run("8");
    let elapsed = start.elapsed();
    let same = one == eight;
    verdict(
        code1 == Some(0) && code8 == Some(0) && same && one.len() == 41 && elapsed < Duration::from_secs(30),
        format!(
            "{} files, workers 1 vs 8 {}",
            one.len(),
            if same { "byte-identical" } else { "DIFFER" }
        ),
    )
}

// 11. Throughput --------------------------------------------------------------

fn throughput() -> Verdict {
    let mut r = rng(11);
    let image = random_image(640, 640, &mut r);
    let img = AnnotatedImage::new(image, random_boxes(640, 640, 4, &mut r)).unwrap();
    let policy = builtin_coco_policy();
    let cfg = AugmentConfig::default();
    let n = 200;
    // Single thread, so the rate is per core.
    let start = Instant::now();
    for i in 0..n {
        let out = apply_policy(&policy, &img, &cfg, &mut rng(i)).unwrap();
        std::hint::black_box(out);
    }
    let rate = n as f64 / start.elapsed().as_secs_f64();
    verdict(rate >= 50.0, format!("{rate:.0} images/s on one core at 640x640 (need 50)"))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("cardinality", cardinality),
        ("built-in policy fidelity", builtin_fidelity),
        ("warp oracle equivalence", warp_equivalence),
        ("box/image consistency", box_consistency),
        ("identity suite", identity_suite),
        ("bbox-only locality", bbox_only_locality),
        ("sampling statistics", sampling_statistics),
        ("search efficacy", search_efficacy),
        ("PPO gradient check", gradient_check),
        ("determinism", determinism),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let secs = start.elapsed().as_secs_f64();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {} [{secs:.2} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
