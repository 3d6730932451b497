use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dot, Trainer, TrainConfig, TrainingProblem};

/// Dual coordinate descent for the L1-loss linear SVM.
///
/// Dividing the objective by `2·regularization` gives the usual
/// `½‖w‖² + C Σ hinge` form with `C = 1/regularization` per pair; the mirrored
/// copy of each pair doubles the hinge, which folds into the box bound
/// `0 ≤ α_j ≤ multiplicity_j / regularization`. `w = Σ α_j d_j` is kept in
/// sync with the duals. Coordinates are visited in a seeded random order each
/// epoch; the loop stops once the largest projected gradient drops below
/// `tolerance`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DualCoordinateDescent;

impl Trainer for DualCoordinateDescent {
    fn name(&self) -> &'static str {
        "dual-cd"
    }

    fn description(&self) -> &'static str {
        "dual coordinate descent, converges to the exact optimum"
    }

    fn fit(&self, problem: &TrainingProblem, cfg: &TrainConfig) -> Vec<f64> {
        let n = problem.deltas.len();
        let mut w = vec![0.0; problem.dim];
        let mut alpha = vec![0.0; n];
        let sq_norm: Vec<f64> = problem
            .deltas
            .iter()
            .map(|d| d.iter().map(|&x| (x * x) as f64).sum())
            .collect();
        let upper: Vec<f64> = problem
            .multiplicity
            .iter()
            .map(|&m| m as f64 / cfg.regularization)
            .collect();

        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut max_pg: f64 = 0.0;
            for &j in &order {
                let d = &problem.deltas[j];
                let g = dot(&w, d) - cfg.margin;
                let pg = if alpha[j] <= 0.0 {
                    g.min(0.0)
                } else if alpha[j] >= upper[j] {
                    g.max(0.0)
                } else {
                    g
                };
                max_pg = max_pg.max(pg.abs());
                if pg == 0.0 {
                    continue;
                }
                let next = (alpha[j] - g / sq_norm[j]).clamp(0.0, upper[j]);
                let step = next - alpha[j];
                if step != 0.0 {
                    for (wi, &di) in w.iter_mut().zip(d) {
                        *wi += step * di as f64;
                    }
                }
                alpha[j] = next;
            }
            if max_pg <= cfg.tolerance {
                break;
            }
        }
        w
    }
}
