//! Filter iteration with per-step reconfiguration: steady-state MSE and
//! simulated state tracking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kalman::{kalman_gain, predict_mse, update_mse, BeliefState, ObservationMode, SystemModel};
use crate::matrix::{frobenius_norm, frobenius_norm_sq, hermitianize, identity, psd_sqrt, trace_re, CMat};
use crate::scalar::reconfigure_scalar;
use crate::vector::{lower_bound_step, reconfigure, Objective, ReconfigResult};

#[derive(Debug, Clone)]
pub enum ReconfigPolicy {
    VecMinSum,
    VecMinMax,
    ScalarMinSum,
    ScalarMinMax,
    /// Structure-free min-sum `C*` applied directly.
    LowerBound,
    /// A constant observation matrix.
    Fixed(CMat),
}

impl ReconfigPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ReconfigPolicy::VecMinSum => "vec-minsum",
            ReconfigPolicy::VecMinMax => "vec-minmax",
            ReconfigPolicy::ScalarMinSum => "scalar-minsum",
            ReconfigPolicy::ScalarMinMax => "scalar-minmax",
            ReconfigPolicy::LowerBound => "lower-bound",
            ReconfigPolicy::Fixed(_) => "fixed",
        }
    }

    /// Parses the names produced by [`ReconfigPolicy::name`], except `fixed`.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "vec-minsum" => ReconfigPolicy::VecMinSum,
            "vec-minmax" => ReconfigPolicy::VecMinMax,
            "scalar-minsum" => ReconfigPolicy::ScalarMinSum,
            "scalar-minmax" => ReconfigPolicy::ScalarMinMax,
            "unconstrained-lower-bound" | "lower-bound" => ReconfigPolicy::LowerBound,
            other => return Err(Error::Config(format!("unknown policy '{other}'"))),
        })
    }

    pub fn mode(&self) -> Option<ObservationMode> {
        match self {
            ReconfigPolicy::VecMinSum | ReconfigPolicy::VecMinMax | ReconfigPolicy::LowerBound => {
                Some(ObservationMode::Vector)
            }
            ReconfigPolicy::ScalarMinSum | ReconfigPolicy::ScalarMinMax => Some(ObservationMode::Scalar),
            ReconfigPolicy::Fixed(_) => None,
        }
    }

    /// Chooses the observation for a step from the prediction MSE.
    pub fn step(&self, m_pred: &CMat, model: &SystemModel, p: f64) -> Result<ReconfigResult> {
        match self {
            ReconfigPolicy::VecMinSum => reconfigure(m_pred, model, p, Objective::Sum),
            ReconfigPolicy::VecMinMax => reconfigure(m_pred, model, p, Objective::Max),
            ReconfigPolicy::ScalarMinSum => reconfigure_scalar(m_pred, model, p, Objective::Sum),
            ReconfigPolicy::ScalarMinMax => reconfigure_scalar(m_pred, model, p, Objective::Max),
            ReconfigPolicy::LowerBound => lower_bound_step(m_pred, model, p),
            ReconfigPolicy::Fixed(c) => {
                let m_achieved = update_mse(m_pred, c, model.sigma_v_sq)?;
                Ok(ReconfigResult {
                    objective: Objective::Sum,
                    a_star: None,
                    gamma: 0.0,
                    c_star: None,
                    c_realized: c.clone(),
                    m_lower_bound: None,
                    objective_lower: trace_re(&m_achieved),
                    objective_achieved: trace_re(&m_achieved),
                    m_achieved,
                    pseudo_inverse: false,
                    relaxation: None,
                })
            }
        }
    }
}

/// Relative distance at which two posterior MSE matrices count as the same
/// point of a periodic orbit.
pub const CYCLE_TOL: f64 = 1e-12;
/// Longest orbit period that is looked for.
pub const MAX_CYCLE: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct SteadyStateOptions {
    /// Relative change of `tr M_{n|n}` that counts as converged.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub belief: BeliefState,
    pub result: ReconfigResult,
    pub converged: bool,
    pub iterations: usize,
    /// Period of the exact cycle the iteration fell into, if it did.
    pub cycle: Option<usize>,
}

impl SteadyState {
    pub fn sum_mse(&self) -> f64 {
        trace_re(&self.belief.m_post)
    }

    pub fn max_mse(&self) -> f64 {
        crate::matrix::max_diag(&self.belief.m_post)
    }
}

/// Iterates predict, reconfigure, update from `M_{0|0} = I` until the trace
/// of `M_{n|n}` settles.
///
/// Some policies settle into a periodic orbit instead of a fixed point. Once
/// `M_{n|n}` comes back to within [`CYCLE_TOL`] (relative, Frobenius) of a
/// state at most [`MAX_CYCLE`] steps earlier, and much closer than the last
/// step moved it, the run is reported as
/// unconverged with the state the orbit is in at step `max_iters`, without
/// iterating that far.
pub fn run_to_steady_state(
    model: &SystemModel,
    policy: &ReconfigPolicy,
    p: f64,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.max_iters == 0 {
        return Err(Error::Domain("max_iters must be at least 1".into()));
    }
    let mut m_post = identity(model.dims.m);
    // history[k] holds M_{k|k}; steps[k - 1] the belief and result of step k
    let mut history = vec![m_post.clone()];
    let mut steps: Vec<(BeliefState, ReconfigResult)> = Vec::new();
    for k in 1..=opts.max_iters {
        let m_pred = predict_mse(&m_post, model);
        let result = policy.step(&m_pred, model, p)?;
        let next = hermitianize(&result.m_achieved);
        let (prev_tr, tr) = (trace_re(&m_post), trace_re(&next));
        m_post = next;
        let belief = BeliefState { m_pred, m_post: m_post.clone(), step: k };
        if (tr - prev_tr).abs() <= opts.tol * tr {
            return Ok(SteadyState { belief, result, converged: true, iterations: k, cycle: None });
        }
        // a slowly contracting sequence also comes close to its recent past,
        // but never much closer than one step moves it
        let last_step = frobenius_norm(&(&m_post - &history[k - 1]));
        let limit = (CYCLE_TOL * frobenius_norm(&m_post)).min(1e-3 * last_step);
        let window = history.len().saturating_sub(MAX_CYCLE);
        let repeat = history[window..].iter().rposition(|h| frobenius_norm(&(h - &m_post)) <= limit);
        if let Some(j) = repeat.map(|i| i + window) {
            let period = k - j;
            let idx = j + 1 + (opts.max_iters - j - 1) % period;
            let (mut belief, result) = if idx == k { (belief, result) } else { steps.swap_remove(idx - 1) };
            belief.step = opts.max_iters;
            return Ok(SteadyState { belief, result, converged: false, iterations: opts.max_iters, cycle: Some(period) });
        }
        history.push(m_post.clone());
        steps.push((belief, result));
    }
    let (belief, result) = steps.pop().expect("at least one iteration");
    Ok(SteadyState { belief, result, converged: false, iterations: opts.max_iters, cycle: None })
}

/// One realization of the tracked system.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub seed: u64,
    pub states: Vec<CMat>,
    pub observations: Vec<CMat>,
    pub process_noise: Vec<CMat>,
    pub observation_noise: Vec<CMat>,
    pub estimates: Vec<CMat>,
    /// `tr M_{n|n}` after each step.
    pub mse_trace: Vec<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Mean of `‖θ_n − θ̂_n‖²` over steps from `skip` on.
    pub fn empirical_mse(&self, skip: usize) -> f64 {
        let errs: Vec<f64> = self
            .states
            .iter()
            .zip(&self.estimates)
            .skip(skip)
            .map(|(x, e)| frobenius_norm_sq(&(x - e)))
            .collect();
        if errs.is_empty() {
            return f64::NAN;
        }
        errs.iter().sum::<f64>() / errs.len() as f64
    }
}

/// `rows×cols` matrix of independent `CN(0, 1)` entries.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        num_complex::Complex64::new(re * s, im * s)
    })
}

/// Runs the filter on simulated data with `θ_0 ~ CN(0, I)` and a zero
/// initial estimate.
pub fn simulate_trace(model: &SystemModel, policy: &ReconfigPolicy, p: f64, horizon: usize, seed: u64) -> Result<SimTrace> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let m = model.dims.m;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let q_root = psd_sqrt(&model.q)?;
    let v_scale = model.sigma_v_sq.sqrt();

    let mut theta = complex_normal(&mut rng, m, 1);
    let mut estimate = CMat::zeros(m, 1);
    let mut m_post = identity(m);
    let mut trace = SimTrace {
        seed,
        states: Vec::with_capacity(horizon),
        observations: Vec::with_capacity(horizon),
        process_noise: Vec::with_capacity(horizon),
        observation_noise: Vec::with_capacity(horizon),
        estimates: Vec::with_capacity(horizon),
        mse_trace: Vec::with_capacity(horizon),
    };
    for _ in 0..horizon {
        let u = &q_root * complex_normal(&mut rng, m, 1);
        theta = &model.f * &theta + &u;
        let m_pred = predict_mse(&m_post, model);
        let predicted = &model.f * &estimate;

        let result = policy.step(&m_pred, model, p)?;
        let c = &result.c_realized;
        let v = complex_normal(&mut rng, c.nrows(), 1).scale(v_scale);
        let y = c * &theta + &v;
        let gain = kalman_gain(&m_pred, c, model.sigma_v_sq)?;
        estimate = &predicted + gain * (&y - c * &predicted);
        m_post = hermitianize(&result.m_achieved);

        trace.states.push(theta.clone());
        trace.observations.push(y);
        trace.process_noise.push(u);
        trace.observation_noise.push(v);
        trace.estimates.push(estimate.clone());
        trace.mse_trace.push(trace_re(&m_post));
    }
    Ok(trace)
}
