//! (mu/mu_w, lambda) CMA-ES with cumulative step-size adaptation and
//! rank-one plus rank-mu covariance updates.
//!
//! Parameter defaults follow Hansen's tutorial formulation. The strategy is
//! minimization only and fully deterministic for a given seed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmaEsConfig {
    pub max_evals: usize,
    /// Stop when the best values of recent generations and the current
    /// generation's spread are both below this.
    pub tol_fun: f64,
    /// Stop when every coordinate's step is below this.
    pub tol_x: f64,
    /// Stop as soon as a value at or below this is seen.
    pub f_target: Option<f64>,
    /// Population size; defaults to `4 + floor(3 ln n)`.
    pub lambda: Option<usize>,
    pub seed: u64,
}

impl Default for CmaEsConfig {
    fn default() -> Self {
        Self {
            max_evals: 10_000,
            tol_fun: 1e-15,
            tol_x: 1e-13,
            f_target: None,
            lambda: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxEvals,
    TolFun,
    TolX,
    FTarget,
    ConditionNumber,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmaEsResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub evaluations: usize,
    pub generations: usize,
    pub stop: StopReason,
}

pub fn default_lambda(n: usize) -> usize {
    4 + (3.0 * (n as f64).ln()).floor() as usize
}

struct Strategy {
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Strategy {
    fn new(n: usize, lambda: usize) -> Self {
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self {
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

/// Minimizes `objective` starting from `x0` with initial step size `sigma0`.
///
/// Non-finite objective values during the search rank last; a non-finite
/// value at `x0` is an error.
pub fn cma_es_minimize<F>(mut objective: F, x0: &[f64], sigma0: f64, cfg: &CmaEsConfig) -> Result<CmaEsResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::validation("x0", "dimension must be at least 1"));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::validation("sigma0", format!("{sigma0} must be positive")));
    }
    let f0 = objective(x0);
    if !f0.is_finite() {
        return Err(Error::validation("objective", format!("non-finite value {f0} at x0")));
    }

    let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(n)).max(2);
    let s = Strategy::new(n, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut mean = DVector::from_column_slice(x0);
    let mut sigma = sigma0;
    let mut cov = DMatrix::<f64>::identity(n, n);
    let mut basis = DMatrix::<f64>::identity(n, n);
    let mut scales = DVector::<f64>::from_element(n, 1.0);
    let mut p_sigma = DVector::<f64>::zeros(n);
    let mut p_c = DVector::<f64>::zeros(n);

    let mut x_best = x0.to_vec();
    let mut f_best = f0;
    let mut evaluations = 1;
    let mut generation = 0usize;
    let history_len = 10 + (30.0 * n as f64 / lambda as f64).ceil() as usize;
    let mut best_history: Vec<f64> = Vec::new();

    let stop = loop {
        if cfg.f_target.is_some_and(|t| f_best <= t) {
            break StopReason::FTarget;
        }
        if evaluations + lambda > cfg.max_evals {
            break StopReason::MaxEvals;
        }

        // Sample and evaluate.
        let mut offspring: Vec<(f64, DVector<f64>)> = (0..lambda)
            .map(|_| {
                let z = DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
                let y = &basis * scales.component_mul(&z);
                let x = &mean + sigma * &y;
                let f = objective(x.as_slice());
                (if f.is_finite() { f } else { f64::INFINITY }, y)
            })
            .collect();
        evaluations += lambda;
        offspring.sort_by(|a, b| a.0.total_cmp(&b.0));
        generation += 1;

        if offspring[0].0 < f_best {
            f_best = offspring[0].0;
            x_best = (&mean + sigma * &offspring[0].1).as_slice().to_vec();
        }

        // Recombination.
        let mut y_w = DVector::<f64>::zeros(n);
        for (w, (_, y)) in s.weights.iter().zip(&offspring) {
            y_w.axpy(*w, y, 1.0);
        }
        mean += sigma * &y_w;

        // Step-size path uses C^{-1/2} y_w = B D^{-1} B^T y_w.
        let inv_sqrt_y = &basis * (basis.transpose() * &y_w).component_div(&scales);
        p_sigma = (1.0 - s.c_sigma) * &p_sigma + (s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff).sqrt() * inv_sqrt_y;
        let ps_norm = p_sigma.norm();
        let decay = 1.0 - (1.0 - s.c_sigma).powi(2 * generation as i32);
        let h_sigma = ps_norm / decay.sqrt() < (1.4 + 2.0 / (n as f64 + 1.0)) * s.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        p_c = (1.0 - s.c_c) * &p_c + h * (s.c_c * (2.0 - s.c_c) * s.mu_eff).sqrt() * &y_w;

        // Covariance update.
        let mut rank_mu = DMatrix::<f64>::zeros(n, n);
        for (w, (_, y)) in s.weights.iter().zip(&offspring) {
            rank_mu.ger(*w, y, y, 1.0);
        }
        let keep = 1.0 - s.c_1 - s.c_mu + (1.0 - h) * s.c_1 * s.c_c * (2.0 - s.c_c);
        cov = keep * &cov + s.c_1 * &p_c * p_c.transpose() + s.c_mu * rank_mu;
        cov = 0.5 * (&cov + cov.transpose());

        sigma *= ((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0)).exp();

        let eig = SymmetricEigen::new(cov.clone());
        let max_ev = eig.eigenvalues.max();
        let min_ev = eig.eigenvalues.min();
        if min_ev <= 0.0 || max_ev / min_ev > 1e14 {
            break StopReason::ConditionNumber;
        }
        basis = eig.eigenvectors;
        scales = eig.eigenvalues.map(f64::sqrt);

        // Termination.
        best_history.push(offspring[0].0);
        if best_history.len() > history_len {
            best_history.remove(0);
        }
        let spread = |v: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f), hi.max(f)));
            hi - lo
        };
        let gen_spread = spread(&mut offspring.iter().map(|o| o.0));
        let hist_spread = spread(&mut best_history.iter().copied());
        if best_history.len() == history_len && gen_spread.max(hist_spread) < cfg.tol_fun {
            break StopReason::TolFun;
        }
        let max_step = (0..n).map(|i| cov[(i, i)].sqrt()).fold(0.0, f64::max) * sigma;
        if max_step < cfg.tol_x && sigma * p_c.amax() < cfg.tol_x {
            break StopReason::TolX;
        }
    };

    Ok(CmaEsResult {
        x_best,
        f_best,
        evaluations,
        generations: generation,
        stop,
    })
}
