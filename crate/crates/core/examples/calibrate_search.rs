//! Monte-Carlo calibration of the search optimizers on the token-match
//! reward. Prints, per optimizer, how many of 100 seeds clear the threshold
//! and the sorted final scores.
//!
//! cargo run --release -p bboxaug --example calibrate_search [seeds]

use bboxaug::rng::{derive_seed, rng_from_seed};
use bboxaug::search::{
    evolution_search, ppo_search, random_search, EvalOptions, EvolutionConfig, PpoConfig, SearchSpace,
    TokenMatchReward,
};

fn report(name: &str, threshold: f64, mut scores: Vec<f64>) {
    let hits = scores.iter().filter(|&&s| s >= threshold).count();
    scores.sort_by(f64::total_cmp);
    let q = |p: f64| scores[((scores.len() - 1) as f64 * p) as usize];
    println!(
        "{name}: {hits}/{} >= {threshold}; min {:.4} p05 {:.4} p10 {:.4} median {:.4}",
        scores.len(),
        scores[0],
        q(0.05),
        q(0.10),
        q(0.5)
    );
}

fn main() {
    let seeds: u64 = std::env::args().nth(1).map_or(100, |s| s.parse().expect("seed count"));
    let space = SearchSpace::default();
    let opts = EvalOptions::default();
    let reward = |seed: u64| {
        let target = space.random_candidate(&mut rng_from_seed(derive_seed(&[seed, 0])));
        TokenMatchReward::new(target, &space).unwrap()
    };

    let ppo: Vec<f64> = (0..seeds)
        .map(|s| {
            let out = ppo_search(&space, &reward(s), PpoConfig::default(), opts, &mut rng_from_seed(derive_seed(&[s, 1])))
                .unwrap();
            *out.mean_rewards.last().unwrap()
        })
        .collect();
    report("ppo final batch mean", 0.95, ppo);

    let evo: Vec<f64> = (0..seeds)
        .map(|s| {
            evolution_search(&space, &reward(s), EvolutionConfig::default(), opts, &mut rng_from_seed(derive_seed(&[s, 2])))
                .unwrap()
                .best_reward
        })
        .collect();
    report("evolution best", 0.9, evo);

    let rnd: Vec<f64> = (0..seeds)
        .map(|s| {
            random_search(&space, &reward(s), 5000, opts, &mut rng_from_seed(derive_seed(&[s, 3])))
                .unwrap()
                .best_reward
        })
        .collect();
    report("random best", 0.3, rnd);
}
