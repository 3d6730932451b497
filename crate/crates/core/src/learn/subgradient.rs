use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dot, Trainer, TrainConfig, TrainingProblem};

/// Full-batch subgradient descent from zero weights, `epochs` steps with a
/// `learning_rate / sqrt(t + 1)` schedule.
///
/// Cheap and simple, but it only approaches the optimum; comparisons that need
/// exact equality between models should use `dual-cd`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Subgradient;

impl Trainer for Subgradient {
    fn name(&self) -> &'static str {
        "subgradient"
    }

    fn description(&self) -> &'static str {
        "full-batch subgradient descent with a fixed epoch budget"
    }

    fn fit(&self, problem: &TrainingProblem, cfg: &TrainConfig) -> Vec<f64> {
        // the seed fixes the summation order
        let mut order: Vec<usize> = (0..problem.deltas.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));

        let mut w = vec![0.0; problem.dim];
        let mut grad = vec![0.0; problem.dim];
        for t in 0..cfg.epochs {
            for (g, &wi) in grad.iter_mut().zip(&w) {
                *g = 2.0 * cfg.regularization * wi;
            }
            for &j in &order {
                let d = &problem.deltas[j];
                if dot(&w, d) < cfg.margin {
                    let scale = 2.0 * problem.multiplicity[j] as f64;
                    for (g, &di) in grad.iter_mut().zip(d) {
                        *g -= scale * di as f64;
                    }
                }
            }
            let step = cfg.learning_rate / ((t + 1) as f64).sqrt();
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= step * g;
            }
        }
        w
    }
}
