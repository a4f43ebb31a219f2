use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::targets::TargetState;

use super::initial::random_weight;
use super::objective::{weights_of, Objective};
use super::{Observer, OptimizerSettings, ProgressEvent, Task};

/// Sufficient-decrease constant of the Armijo condition.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub graph: ColoredGraph,
    pub loss: f64,
    /// The best restart met the loss or gradient tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// Final loss of each restart, in restart order.
    pub restart_losses: Vec<f64>,
}

struct Descent {
    weights: Vec<Complex64>,
    loss: f64,
    iterations: usize,
    converged: bool,
}

/// Gradient descent on the real parts of the weights with backtracking line search.
fn descend(
    objective: &Objective,
    mut weights: Vec<Complex64>,
    settings: &OptimizerSettings,
    observer: &dyn Observer,
) -> Result<Descent> {
    let mut step = settings.initial_step;
    let (mut loss, mut grad) = objective.loss_and_gradient(&weights);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iterations {
        if observer.is_cancelled() {
            return Err(Error::Cancelled);
        }
        let grad_sqr: f64 = grad.iter().map(|g| g.re * g.re).sum();
        if loss < settings.loss_tol || grad_sqr.sqrt() < settings.gradient_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut trial = weights.clone();
        let accepted = loop {
            for ((t, w), g) in trial.iter_mut().zip(&weights).zip(&grad) {
                t.re = w.re - step * g.re;
            }
            let trial_loss = objective.loss(&trial);
            if trial_loss <= loss - ARMIJO * step * grad_sqr {
                break Some(trial_loss);
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some(new_loss) = accepted else {
            // No descent possible along the gradient: numerically stationary.
            converged = true;
            break;
        };
        weights = trial;
        (loss, grad) = objective.loss_and_gradient(&weights);
        debug_assert!((loss - new_loss).abs() < 1e-12);
        step = (step * 2.0).min(1e6);
    }
    if !converged {
        let grad_norm = grad.iter().map(|g| g.re * g.re).sum::<f64>().sqrt();
        converged = loss < settings.loss_tol || grad_norm < settings.gradient_tol;
    }
    Ok(Descent { weights, loss, iterations, converged })
}

/// Rescales so the largest `|weight|` is 1; the loss is invariant under this.
fn rescale(weights: &mut [Complex64]) {
    let max = weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if max > 0.0 && max.is_finite() {
        for w in weights {
            *w /= max;
        }
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Optimizes the weights of a fixed topology.
///
/// Restart 0 starts from the weights already on `g`; every further restart
/// draws fresh real weights from `[-1, 1]`. The best restart wins, ties going
/// to the lower index, so the result never has a higher loss than `g`.
pub fn optimize_weights(
    g: &ColoredGraph,
    target: &TargetState,
    task: Task,
    settings: &OptimizerSettings,
    seed: u64,
    observer: &dyn Observer,
) -> Result<OptimizeOutcome> {
    let objective = Objective::new(g, target, task)?;
    let initial = weights_of(g);
    let restarts = settings.restarts.max(1);
    let runs: Vec<Result<Descent>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                initial.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(seed, r));
                (0..initial.len()).map(|_| random_weight(&mut rng)).collect()
            };
            descend(&objective, start, settings, observer)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let restart_losses: Vec<f64> = runs.iter().map(|d| d.loss).collect();
    for (restart, &loss) in restart_losses.iter().enumerate() {
        observer.on_event(&ProgressEvent::RestartBest { restart, loss });
    }
    let iterations = runs.iter().map(|d| d.iterations).sum();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.loss.total_cmp(&b.loss).then(i.cmp(j)))
        .map(|(_, d)| d)
        .expect("at least one restart");

    let mut weights = best.weights;
    rescale(&mut weights);
    let mut graph = g.clone();
    for (e, w) in graph.edges.iter_mut().zip(weights) {
        e.weight = w;
    }
    let loss = objective.loss(&weights_of(&graph));
    Ok(OptimizeOutcome { graph, loss, converged: best.converged, iterations, restart_losses })
}
