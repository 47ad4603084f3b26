//! Steady-state MSE sweeps over the power budget.

use std::time::{Duration, Instant};

use reconfig_core::matrix::CMat;
use reconfig_core::tracking::{run_to_steady_state, SteadyState, SteadyStateOptions};
use reconfig_core::vector::{minmax_sdp, minsum_sdp};

use crate::config::{ExperimentConfig, PolicyName};
use crate::error::Result;
use crate::system::{generate_systems, Systems};

/// Scalar min-max relaxation details from the last filter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSummary {
    pub t_star: f64,
    pub achieved_max_mse: f64,
    pub rank_one: bool,
    pub bisection_iters: usize,
    /// `ceil(log2(range / eps))` for the bracket that was used.
    pub expected_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub policy: PolicyName,
    pub seed: u64,
    /// Steady-state `tr M_{n|n}`.
    pub sum_mse: f64,
    /// Steady-state largest diagonal entry of `M_{n|n}`.
    pub max_mse: f64,
    /// `tr D*` of the min-sum SDP at the row's steady-state prediction MSE.
    pub lower_sum: f64,
    /// `t*` of the min-max SDP at the row's steady-state prediction MSE.
    pub lower_max: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time: Duration,
    /// `|a^H G^H G a − P| / P` for the last parameters, when there are any.
    pub power_residual: Option<f64>,
    pub relaxation: Option<RelaxationSummary>,
}

/// SDP bounds `(tr D*, t*)` at a prediction MSE.
pub fn sdp_bounds(m_pred: &CMat, sigma_v_sq: f64, p: f64) -> Result<(f64, f64)> {
    let sum = minsum_sdp(m_pred, sigma_v_sq, p)?.trace_lower;
    let max = minmax_sdp(m_pred, sigma_v_sq, p)?.t_star;
    Ok((sum, max))
}

/// One steady-state run.
pub fn run_point(
    cfg: &ExperimentConfig,
    systems: &Systems,
    policy: PolicyName,
    p: f64,
) -> Result<(SweepRow, SteadyState)> {
    let start = Instant::now();
    let rp = policy.policy();
    let model = systems.for_mode(rp.mode().expect("named policies have a mode"));
    let opts = SteadyStateOptions { tol: cfg.steady_tol, max_iters: cfg.max_iters };
    let ss = run_to_steady_state(model, &rp, p, &opts)?;
    let (lower_sum, lower_max) = sdp_bounds(&ss.belief.m_pred, model.sigma_v_sq, p)?;

    let power_residual = ss.result.a_star.as_ref().filter(|_| p > 0.0).map(|a| (model.power(a) - p).abs() / p);
    let relaxation = ss.result.relaxation.as_ref().map(|r| {
        let range = reconfig_core::matrix::max_diag(&ss.belief.m_pred);
        RelaxationSummary {
            t_star: r.t_star,
            achieved_max_mse: r.achieved_max_mse,
            rank_one: r.rank_one,
            bisection_iters: r.bisection_iters,
            expected_iters: (range / reconfig_core::scalar::DEFAULT_BISECTION_EPS).log2().ceil().max(0.0) as usize,
        }
    });
    let row = SweepRow {
        p,
        policy,
        seed: systems.seed,
        sum_mse: ss.sum_mse(),
        max_mse: ss.max_mse(),
        lower_sum,
        lower_max,
        converged: ss.converged,
        iterations: ss.iterations,
        wall_time: start.elapsed(),
        power_residual,
        relaxation,
    };
    Ok((row, ss))
}

/// Runs every (seed, P, policy) combination in that nesting order, calling
/// `on_row` as rows complete.
pub fn run_sweep_with(cfg: &ExperimentConfig, mut on_row: impl FnMut(&SweepRow)) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.num_seeds * cfg.p_grid.len() * cfg.policies.len());
    for seed in cfg.seeds() {
        let systems = generate_systems(cfg, seed)?;
        for &p in &cfg.p_grid {
            for &policy in &cfg.policies {
                let (row, _) = run_point(cfg, &systems, policy, p)?;
                on_row(&row);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with(cfg, |_| {})
}

/// Median of a nonempty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

/// Rows for one policy at one budget, in seed order.
pub fn select(rows: &[SweepRow], policy: PolicyName, p: f64) -> Vec<&SweepRow> {
    rows.iter().filter(|r| r.policy == policy && r.p == p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
