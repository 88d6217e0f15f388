//! Gaussian-process regression over action/return pairs with a squared
//! exponential kernel, used to denoise Q-value profiles, read off the
//! optimal action and estimate the Lipschitz constant of the profile.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::pomdp::ActionSpace;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("gp regression needs at least one training point")]
    NoPoints,
    #[error("training inputs must be distinct")]
    DuplicateInputs,
    #[error("kernel matrix stayed singular at jitter {0}")]
    SingularKernel(f64),
}

/// Log-spaced hyperparameter grid searched by [`gp_fit`]: 20 length
/// scales over [0.05, 2] m/s^2 and 20 noise levels over [1e-2, 1e4];
/// the signal variance is pinned to the target variance.
#[derive(Debug, Clone)]
pub struct HyperSearch {
    pub length_scales: Vec<f64>,
    pub noise_levels: Vec<f64>,
}

impl Default for HyperSearch {
    fn default() -> Self {
        Self {
            length_scales: log_grid(0.05, 2.0, 20),
            noise_levels: log_grid(1e-2, 1e4, 20),
        }
    }
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let ln_lo = lo.ln();
    let ln_hi = hi.ln();
    (0..count)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// A fitted posterior, evaluable in closed form at arbitrary actions.
#[derive(Debug, Clone)]
pub struct GpFit {
    xs: Vec<f64>,
    y_mean: f64,
    signal_variance: f64,
    length_scale: f64,
    noise: f64,
    /// Extra diagonal jitter that was needed for a stable factorization.
    jitter: f64,
    alpha: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    log_marginal: f64,
}

impl GpFit {
    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal
    }

    fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        self.signal_variance * (-d * d / (2.0 * self.length_scale * self.length_scale)).exp()
    }

    pub fn posterior_mean(&self, x: f64) -> f64 {
        let k_star: DVector<f64> =
            DVector::from_iterator(self.xs.len(), self.xs.iter().map(|&xi| self.kernel(x, xi)));
        self.y_mean + k_star.dot(&self.alpha)
    }

    pub fn posterior_variance(&self, x: f64) -> f64 {
        let k_star: DVector<f64> =
            DVector::from_iterator(self.xs.len(), self.xs.iter().map(|&xi| self.kernel(x, xi)));
        let solved = self.chol.solve(&k_star);
        (self.kernel(x, x) - k_star.dot(&solved)).max(0.0)
    }
}

fn try_fit(
    xs: &[f64],
    centered: &DVector<f64>,
    y_mean: f64,
    signal_variance: f64,
    length_scale: f64,
    noise: f64,
) -> Option<GpFit> {
    let n = xs.len();
    let mut jitter = 0.0;
    let base_jitter = 1e-10 * signal_variance.max(1.0);
    for attempt in 0..8 {
        if attempt > 0 {
            jitter = base_jitter * 10f64.powi(attempt - 1);
        }
        let k = DMatrix::from_fn(n, n, |i, j| {
            let d = xs[i] - xs[j];
            let rbf =
                signal_variance * (-d * d / (2.0 * length_scale * length_scale)).exp();
            if i == j {
                rbf + noise + jitter
            } else {
                rbf
            }
        });
        if let Some(chol) = Cholesky::new(k) {
            let alpha = chol.solve(centered);
            let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
            let log_marginal = -0.5 * centered.dot(&alpha)
                - 0.5 * log_det
                - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            return Some(GpFit {
                xs: xs.to_vec(),
                y_mean,
                signal_variance,
                length_scale,
                noise,
                jitter,
                alpha,
                chol,
                log_marginal,
            });
        }
    }
    None
}

fn check_inputs(xs: &[f64], ys: &[f64]) -> Result<(), GpError> {
    assert_eq!(xs.len(), ys.len());
    if xs.is_empty() {
        return Err(GpError::NoPoints);
    }
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            if (a - b).abs() < 1e-12 {
                return Err(GpError::DuplicateInputs);
            }
        }
    }
    Ok(())
}

/// Fits with explicit hyperparameters (no search). Targets are
/// centered; the posterior mean adds the offset back.
pub fn gp_fit_with_hypers(
    xs: &[f64],
    ys: &[f64],
    signal_variance: f64,
    length_scale: f64,
    noise: f64,
) -> Result<GpFit, GpError> {
    check_inputs(xs, ys)?;
    let y_mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let centered = DVector::from_iterator(ys.len(), ys.iter().map(|y| y - y_mean));
    try_fit(xs, &centered, y_mean, signal_variance, length_scale, noise)
        .ok_or(GpError::SingularKernel(noise))
}

/// Squared-exponential GP fit with hyperparameters chosen by maximizing
/// the log marginal likelihood over the search grid. The signal
/// variance is set to the variance of the targets.
pub fn gp_fit(xs: &[f64], ys: &[f64], search: &HyperSearch) -> Result<GpFit, GpError> {
    check_inputs(xs, ys)?;
    let y_mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let variance =
        ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum::<f64>() / ys.len() as f64;
    let signal_variance = variance.max(1e-12);
    let centered = DVector::from_iterator(ys.len(), ys.iter().map(|y| y - y_mean));

    let mut best: Option<GpFit> = None;
    for &ell in &search.length_scales {
        for &noise in &search.noise_levels {
            if let Some(fit) = try_fit(xs, &centered, y_mean, signal_variance, ell, noise) {
                if best
                    .as_ref()
                    .map_or(true, |b| fit.log_marginal > b.log_marginal)
                {
                    best = Some(fit);
                }
            }
        }
    }
    best.ok_or(GpError::SingularKernel(f64::NAN))
}

/// Optimal action: argmax of the posterior mean over the available
/// actions, ties to the lowest action.
pub fn optimal_action(fit: &GpFit, available: &ActionSpace) -> f64 {
    let mut best = available.value(0);
    let mut best_mean = fit.posterior_mean(best);
    for &a in &available.values()[1..] {
        let mean = fit.posterior_mean(a);
        if mean > best_mean {
            best = a;
            best_mean = mean;
        }
    }
    best
}

/// Lipschitz-constant estimate: the maximum absolute slope of the
/// posterior mean between adjacent points of the dense grid.
pub fn estimate_lipschitz(fit: &GpFit, dense_grid: &ActionSpace) -> f64 {
    assert!(dense_grid.len() >= 2, "dense grid needs at least 2 points");
    let means: Vec<f64> = dense_grid
        .values()
        .iter()
        .map(|&a| fit.posterior_mean(a))
        .collect();
    dense_grid
        .values()
        .windows(2)
        .zip(means.windows(2))
        .map(|(xs, ms)| ((ms[1] - ms[0]) / (xs[1] - xs[0])).abs())
        .fold(0.0, f64::max)
}
