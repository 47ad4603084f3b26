//! Independent reference computations used to cross-check the optimizers.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use reconfig_core::kalman::update_mse_scalar;
use reconfig_core::matrix::{diag, frobenius_norm_sq, hermitianize, identity, pd_inverse, trace_re, CMat};
use reconfig_core::scalar::{minmax_scalar_bisection, minsum_scalar, DEFAULT_BISECTION_EPS};
use reconfig_core::tracking::complex_normal;
use reconfig_core::vector::{mse_for_gram, minsum_sdp};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Minimum of `Σ (1/m_i + p_i/σ²)^{-1}` over `p ≥ 0`, `Σ p_i = P`.
///
/// The KKT conditions give `p_i = σ²(w − 1/m_i)_+` for a common water level
/// `w`, found by bisection on the spent power.
pub fn water_filling(m: &[f64], sigma_v_sq: f64, p: f64) -> f64 {
    let spend = |w: f64| m.iter().map(|&mi| sigma_v_sq * (w - 1.0 / mi).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while spend(hi) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spend(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    m.iter()
        .map(|&mi| {
            let pi = sigma_v_sq * (w - 1.0 / mi).max(0.0);
            1.0 / (1.0 / mi + pi / sigma_v_sq)
        })
        .sum()
}

fn scalar_sum_mse(m_pred: &CMat, c: &CMat, sigma_v_sq: f64) -> f64 {
    trace_re(&update_mse_scalar(m_pred, c, sigma_v_sq).expect("prior is positive definite"))
}

/// Exhaustive search over observation vectors `c = √P (cos θ, sin θ e^{iφ})`
/// for a 2-state scalar problem with `G = I₂`.
pub fn scalar_grid_2d(m_pred: &CMat, sigma_v_sq: f64, p: f64, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        for j in 0..steps {
            let phi = std::f64::consts::TAU * j as f64 / steps as f64;
            let mut c = CMat::zeros(2, 1);
            c[(0, 0)] = num_complex::Complex64::new(theta.cos() * p.sqrt(), 0.0);
            c[(1, 0)] = num_complex::Complex64::from_polar(theta.sin() * p.sqrt(), phi);
            best = best.min(scalar_sum_mse(m_pred, &c, sigma_v_sq));
        }
    }
    best
}

/// Multi-start projected gradient for scalar min-sum over the sphere
/// `‖G a‖² = P`, run in orthonormal coordinates of the range of `G`.
pub fn projected_gradient(m_pred: &CMat, g: &CMat, sigma_v_sq: f64, p: f64, starts: usize, seed: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let q = g.clone().qr().q();
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut y = complex_normal(&mut rng, q.ncols(), 1);
        y = y.scale((p / frobenius_norm_sq(&y)).sqrt());
        let mut value = scalar_sum_mse(m_pred, &(&q * &y), sigma_v_sq);
        let mut step = 0.5;
        for _ in 0..4000 {
            let c = &q * &y;
            let mc = m_pred * &c;
            let den = sigma_v_sq + (c.adjoint() * &mc)[(0, 0)].re;
            let num = frobenius_norm_sq(&mc);
            let grad_c = -(m_pred * &mc).unscale(den) + mc.scale(num / (den * den));
            let grad = q.adjoint() * grad_c;
            let cand = &y - grad.scale(step);
            let cand = cand.scale((p / frobenius_norm_sq(&cand)).sqrt());
            let v = scalar_sum_mse(m_pred, &(&q * &cand), sigma_v_sq);
            if v < value {
                y = cand;
                value = v;
                step *= 1.2;
            } else {
                step *= 0.5;
                if step < 1e-16 {
                    break;
                }
            }
        }
        best = best.min(value);
    }
    best
}

/// Relaxed scalar min-max level for one state: `m σ² / (σ² + m P)`.
pub fn one_dimensional_t_star(m: f64, sigma_v_sq: f64, p: f64) -> f64 {
    m * sigma_v_sq / (sigma_v_sq + m * p)
}

/// Smallest `tr((M^{-1} + C̃/σ²)^{-1}) − tr D*` over random feasible `C̃`;
/// nonnegative up to solver accuracy.
pub fn dominance_margin(m_pred: &CMat, sigma_v_sq: f64, p: f64, draws: usize, rng: &mut impl Rng) -> Result<f64> {
    let stage = minsum_sdp(m_pred, sigma_v_sq, p)?;
    let m_inv = pd_inverse(m_pred)?;
    let m = m_pred.nrows();
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let rank = rng.random_range(1..=m);
        let x = complex_normal(rng, m, rank);
        let ct = hermitianize(&(&x * x.adjoint()));
        let ct = ct.scale(p * rng.random_range(0.0..=1.0) / trace_re(&ct));
        let value = trace_re(&mse_for_gram(&m_inv, &ct, sigma_v_sq)?);
        worst = worst.min(value - stage.trace_lower);
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} cases={:<4} max_dev={:.3e} tol={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_deviation,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(OracleCheck::passed)
    }
}

fn random_prior(rng: &mut impl Rng, m: usize) -> CMat {
    let x = complex_normal(rng, m, m);
    hermitianize(&(&x * x.adjoint() + identity(m).scale(0.3)))
}

/// Runs all cross-checks at the configured sizes (capped at `M = 4`, `N = 3`).
pub fn run_oracles(cfg: &ExperimentConfig) -> Result<OracleReport> {
    cfg.validate()?;
    let m = cfg.m.min(4);
    let n = cfg.n.min(3);
    let sigma = cfg.sigma_v_sq;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut report = OracleReport::default();

    let mut dev: f64 = 0.0;
    let cases = 50;
    for _ in 0..cases {
        let d: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..3.0)).collect();
        let p = rng.random_range(0.1..8.0);
        let sdp = minsum_sdp(&diag(&d), sigma, p)?.trace_lower;
        dev = dev.max((sdp - water_filling(&d, sigma, p)).abs());
    }
    report.checks.push(OracleCheck { name: "min-sum SDP / water-filling", cases, max_deviation: dev, tolerance: 1e-4 });

    let m2 = diag(&[2.0, 1.0]);
    let sol = minsum_scalar(&m2, &identity(2), 1.0, 1.0)?;
    let grid = scalar_grid_2d(&m2, 1.0, 1.0, 400);
    let dev = (sol.achieved_sum_mse - 5.0 / 3.0).abs().max(sol.achieved_sum_mse - grid);
    report.checks.push(OracleCheck { name: "scalar min-sum / 2-D grid", cases: 1, max_deviation: dev, tolerance: 1e-6 });

    let mut dev: f64 = 0.0;
    let cases = 5;
    for k in 0..cases {
        let prior = random_prior(&mut rng, m);
        let g = complex_normal(&mut rng, m, n);
        let p = rng.random_range(0.5..8.0);
        let sol = minsum_scalar(&prior, &g, sigma, p)?;
        let oracle = projected_gradient(&prior, &g, sigma, p, 10, cfg.seed.wrapping_add(k as u64));
        dev = dev.max((sol.achieved_sum_mse - oracle).abs() / oracle);
    }
    report.checks.push(OracleCheck { name: "scalar min-sum / proj. gradient", cases, max_deviation: dev, tolerance: 1e-3 });

    let mut dev: f64 = 0.0;
    let cases = 3;
    for _ in 0..cases {
        let mm = rng.random_range(0.5..3.0);
        let p = rng.random_range(0.2..4.0);
        let g = identity(1).scale(rng.random_range(0.5..2.0));
        let rep = minmax_scalar_bisection(&identity(1).scale(mm), &g, sigma, p, DEFAULT_BISECTION_EPS)?;
        dev = dev.max((rep.t_star - one_dimensional_t_star(mm, sigma, p)).abs());
    }
    report.checks.push(OracleCheck {
        name: "scalar min-max / 1-D form",
        cases,
        max_deviation: dev,
        tolerance: DEFAULT_BISECTION_EPS,
    });

    let mut worst: f64 = 0.0;
    let cases = 5;
    for _ in 0..cases {
        let prior = random_prior(&mut rng, m);
        let p = rng.random_range(0.5..8.0);
        worst = worst.max(-dominance_margin(&prior, sigma, p, 100, &mut rng)?);
    }
    report.checks.push(OracleCheck { name: "random-feasible dominance", cases: cases * 100, max_deviation: worst.max(0.0), tolerance: 1e-6 });
    Ok(report)
}
