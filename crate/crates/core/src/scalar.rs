//! Reconfiguration for a scalar observation `y = c^H θ + v`, `c = G a`.
//!
//! Min-sum has a closed form through a Rayleigh quotient. Min-max is solved
//! on the rank-relaxed lifting `A ⪰ 0` of `a a^H` by bisecting on the MSE
//! level `t`, each probe being an SDP feasibility test, followed by a
//! rank-one reconstruction of `a`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::kalman::{update_mse_scalar, ObservationMode, SystemModel};
use crate::matrix::{
    frobenius_norm_sq, hermitian_eig, hermitianize, max_diag, psd_inv_sqrt, psd_sqrt, trace_re, CMat,
};
use crate::sdp::{self, Field, SdpProblem, SdpStatus, Sense, Term, DEFAULT_FEASIBILITY_TOL};
use crate::vector::{Objective, ReconfigResult};

/// Default bisection width on `t`.
pub const DEFAULT_BISECTION_EPS: f64 = 1e-6;
/// `A*` counts as rank one when `λ₂/λ₁` is at or below this.
pub const RANK_ONE_RATIO: f64 = 1e-6;
/// Gaussian randomizations tried when `A*` is not rank one.
pub const RANDOMIZATIONS: usize = 100;
const RANDOMIZATION_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone)]
pub struct RayleighSolution {
    pub a_star: CMat,
    /// `(σ²/P) G^H G + G^H M G`.
    pub b_matrix: CMat,
    pub top_eigvec: CMat,
    pub m_achieved: CMat,
    pub achieved_sum_mse: f64,
}

#[derive(Debug, Clone)]
pub struct ScalarMinMaxReport {
    /// Midpoint of the final bisection bracket; lower bound on the
    /// achievable maximum MSE up to the bracket width.
    pub t_star: f64,
    pub a_star: CMat,
    pub m_achieved: CMat,
    pub achieved_max_mse: f64,
    /// Relaxed solution `A*`.
    pub a_matrix: CMat,
    pub rank_one: bool,
    pub bisection_iters: usize,
    /// Every probed level with its verdict, in probe order.
    pub probes: Vec<(f64, bool)>,
}

fn rescale_to_power(d: &CMat, g: &CMat, p: f64) -> Result<CMat> {
    let power = frobenius_norm_sq(&(g * d));
    if power <= 0.0 {
        return Err(Error::DegenerateSolution);
    }
    Ok(d.scale((p / power).sqrt()))
}

/// Orthonormal basis `V` of the row space of a column-rank-deficient `G`.
/// The scalar problems only see `a` through `G a`, so they are posed in `b`
/// with `a = V b`; otherwise the relaxed `A` is unbounded along the null
/// space of `G`. `None` when `G` has full column rank.
fn row_space_basis(g: &CMat) -> Result<Option<CMat>> {
    if crate::kalman::full_column_rank(g) {
        return Ok(None);
    }
    let eig = hermitian_eig(&hermitianize(&(g.adjoint() * g)))?;
    let cutoff = 1e-12 * eig.max();
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > cutoff).collect();
    if keep.is_empty() {
        return Err(Error::Domain("G is zero; no observation can be formed".into()));
    }
    Ok(Some(eig.vectors.select_columns(&keep)))
}

/// Closed-form min-sum parameters.
///
/// The Rayleigh quotient fixes the direction `B^{-1/2} u`; its length is
/// then set so that `a^H G^H G a = P`, since the sum MSE only improves with
/// more power.
pub fn minsum_scalar(m_pred: &CMat, g: &CMat, sigma_v_sq: f64, p: f64) -> Result<RayleighSolution> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("scalar min-sum needs a positive budget, got {p}")));
    }
    if let Some(v) = row_space_basis(g)? {
        let mut sol = minsum_scalar(m_pred, &(g * &v), sigma_v_sq, p)?;
        sol.a_star = &v * &sol.a_star;
        return Ok(sol);
    }
    let gram = hermitianize(&(g.adjoint() * g));
    let b_matrix = hermitianize(&(gram.scale(sigma_v_sq / p) + g.adjoint() * m_pred * g));
    let b_inv_sqrt = psd_inv_sqrt(&b_matrix)?;
    let m_sq = m_pred * m_pred;
    let numerator = hermitianize(&(&b_inv_sqrt * g.adjoint() * m_sq * g * &b_inv_sqrt));
    let eig = hermitian_eig(&numerator)?;
    let top_eigvec = eig.vectors.columns(eig.values.len() - 1, 1).into_owned();
    let direction = &b_inv_sqrt * &top_eigvec;
    let a_star = rescale_to_power(&direction, g, p)?;
    let m_achieved = update_mse_scalar(m_pred, &(g * &a_star), sigma_v_sq)?;
    Ok(RayleighSolution {
        achieved_sum_mse: trace_re(&m_achieved),
        a_star,
        b_matrix,
        top_eigvec,
        m_achieved,
    })
}

/// `E_i(t) = G^H (M e_i e_i^T M − ([M]_ii − t) M) G`.
pub fn build_e_i(m_pred: &CMat, g: &CMat, i: usize, t: f64) -> Result<CMat> {
    let m = m_pred.nrows();
    if i >= m {
        return Err(Error::Dimension(format!("diagonal index {i} out of range for size {m}")));
    }
    let col = m_pred.columns(i, 1).into_owned();
    let inner = &col * col.adjoint() - m_pred.scale(m_pred[(i, i)].re - t);
    Ok(hermitianize(&(g.adjoint() * inner * g)))
}

fn level_constraints(prob: &mut SdpProblem, a: sdp::BlockId, m_pred: &CMat, g: &CMat, sigma_v_sq: f64, t: f64) -> Result<()> {
    for i in 0..m_pred.nrows() {
        let e_i = build_e_i(m_pred, g, i, t)?;
        let rhs = (m_pred[(i, i)].re - t) * sigma_v_sq;
        prob.add_constraint(vec![Term::new(a, e_i)], Sense::Ge, rhs);
    }
    Ok(())
}

/// Feasibility problem at level `t` (its objective is empty).
pub fn feasibility_problem(m_pred: &CMat, g: &CMat, sigma_v_sq: f64, p: f64, t: f64) -> Result<SdpProblem> {
    let n = g.ncols();
    let mut prob = SdpProblem::new();
    let a = prob.add_block("a", n, Field::Complex);
    level_constraints(&mut prob, a, m_pred, g, sigma_v_sq, t)?;
    prob.add_constraint(vec![Term::new(a, hermitianize(&(g.adjoint() * g)))], Sense::Le, p);
    Ok(prob)
}

/// Does some `A ⪰ 0` with `tr(A G^H G) ≤ P` reach level `t` on every
/// diagonal entry?
pub fn minmax_feasible(m_pred: &CMat, g: &CMat, sigma_v_sq: f64, p: f64, t: f64) -> Result<(bool, Option<CMat>)> {
    let basis = row_space_basis(g)?;
    let g_eff = basis.as_ref().map_or_else(|| g.clone(), |v| g * v);
    let prob = feasibility_problem(m_pred, &g_eff, sigma_v_sq, p, t)?;
    let f = sdp::check_feasibility(&prob, DEFAULT_FEASIBILITY_TOL)?;
    let witness = f.witness.map(|mut w| {
        let b = w.swap_remove(0);
        match &basis {
            Some(v) => v * b * v.adjoint(),
            None => b,
        }
    });
    Ok((f.feasible, witness))
}

/// Least-power relaxed solution at level `t`.
fn least_power_solution(m_pred: &CMat, g: &CMat, sigma_v_sq: f64, t: f64) -> Result<CMat> {
    let n = g.ncols();
    let mut prob = SdpProblem::new();
    let a = prob.add_block("a", n, Field::Complex);
    level_constraints(&mut prob, a, m_pred, g, sigma_v_sq, t)?;
    prob.set_objective(vec![Term::new(a, hermitianize(&(g.adjoint() * g)))]);
    let sol = sdp::solve(&prob)?;
    match sol.status {
        SdpStatus::Optimal => Ok(hermitianize(&sol.blocks[0])),
        // the level set is very thin near t*; a feasible iterate still serves
        SdpStatus::MaxIterations if sol.max_violation <= DEFAULT_FEASIBILITY_TOL => Ok(hermitianize(&sol.blocks[0])),
        status => Err(Error::Solver(format!("least-power problem at t = {t}: {status:?}"))),
    }
}

/// Bisection on the relaxed min-max level.
pub fn minmax_scalar_bisection(m_pred: &CMat, g: &CMat, sigma_v_sq: f64, p: f64, eps: f64) -> Result<ScalarMinMaxReport> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("bisection width must be positive, got {eps}")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("scalar min-max needs a positive budget, got {p}")));
    }
    if let Some(v) = row_space_basis(g)? {
        let mut rep = minmax_scalar_bisection(m_pred, &(g * &v), sigma_v_sq, p, eps)?;
        rep.a_star = &v * &rep.a_star;
        rep.a_matrix = hermitianize(&(&v * &rep.a_matrix * v.adjoint()));
        return Ok(rep);
    }
    // t = max_i [M]_ii is met by A = 0; t = 0 never is, since E_i(0) ⪯ 0.
    let mut hi = max_diag(m_pred);
    let mut lo = 0.0;
    let (top_ok, _) = minmax_feasible(m_pred, g, sigma_v_sq, p, hi)?;
    if !top_ok {
        return Err(Error::Internal(format!("bisection bracket inverted: t = {hi} reported infeasible")));
    }
    let mut probes = Vec::new();
    let mut iters = 0;
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        let (ok, _) = minmax_feasible(m_pred, g, sigma_v_sq, p, mid)?;
        probes.push((mid, ok));
        iters += 1;
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    for &(t_ok, ok) in &probes {
        if ok && probes.iter().any(|&(t, f)| !f && t > t_ok) {
            return Err(Error::Internal(format!("feasibility verdicts not monotone around t = {t_ok}")));
        }
    }
    let t_star = 0.5 * (lo + hi);
    let a_matrix = least_power_solution(m_pred, g, sigma_v_sq, hi)?;
    let (a_star, achieved_max_mse, rank_one) = rank_one_reconstruct(&a_matrix, g, p, m_pred, sigma_v_sq)?;
    let m_achieved = update_mse_scalar(m_pred, &(g * &a_star), sigma_v_sq)?;
    Ok(ScalarMinMaxReport {
        t_star,
        a_star,
        m_achieved,
        achieved_max_mse,
        a_matrix,
        rank_one,
        bisection_iters: iters,
        probes,
    })
}

/// Recovers `a` from the relaxed `A*`: its principal direction when `A*` is
/// numerically rank one, otherwise the best of the principal direction and
/// [`RANDOMIZATIONS`] draws from `CN(0, A*)`. Every candidate is rescaled to
/// the power budget.
pub fn rank_one_reconstruct(
    a_matrix: &CMat,
    g: &CMat,
    p: f64,
    m_pred: &CMat,
    sigma_v_sq: f64,
) -> Result<(CMat, f64, bool)> {
    let eig = hermitian_eig(a_matrix)?;
    let n = eig.values.len();
    let top = eig.max();
    if top <= 1e-14 * (1.0 + trace_re(a_matrix).abs()) && p > 0.0 {
        return Err(Error::DegenerateSolution);
    }
    let principal = eig.vectors.columns(n - 1, 1).into_owned();
    let score = |a: &CMat| -> Result<f64> {
        Ok(max_diag(&update_mse_scalar(m_pred, &(g * a), sigma_v_sq)?))
    };
    let second = if n >= 2 { eig.values[n - 2].max(0.0) } else { 0.0 };
    let mut best = rescale_to_power(&principal, g, p)?;
    let mut best_score = score(&best)?;
    if second / top <= RANK_ONE_RATIO {
        return Ok((best, best_score, true));
    }

    let root = psd_sqrt(a_matrix)?;
    let mut rng = ChaCha20Rng::seed_from_u64(RANDOMIZATION_SEED);
    for _ in 0..RANDOMIZATIONS {
        let w = crate::tracking::complex_normal(&mut rng, n, 1);
        let candidate = &root * w;
        if frobenius_norm_sq(&(g * &candidate)) <= 0.0 {
            continue;
        }
        let candidate = rescale_to_power(&candidate, g, p)?;
        let s = score(&candidate)?;
        if s < best_score {
            best = candidate;
            best_score = s;
        }
    }
    Ok((best, best_score, false))
}

/// One scalar-mode reconfiguration step.
pub fn reconfigure_scalar(m_pred: &CMat, model: &SystemModel, p: f64, objective: Objective) -> Result<ReconfigResult> {
    if model.mode != ObservationMode::Scalar {
        return Err(Error::Config("scalar reconfiguration needs a scalar-mode model".into()));
    }
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("power budget must be nonnegative, got {p}")));
    }
    let m = model.dims.m;
    if p == 0.0 {
        let value = objective.eval(m_pred);
        return Ok(ReconfigResult {
            objective,
            a_star: Some(CMat::zeros(model.dims.n, 1)),
            gamma: 0.0,
            c_star: None,
            c_realized: CMat::zeros(1, m),
            m_lower_bound: None,
            m_achieved: m_pred.clone(),
            objective_lower: value,
            objective_achieved: value,
            pseudo_inverse: false,
            relaxation: None,
        });
    }
    let sigma = model.sigma_v_sq;
    match objective {
        Objective::Sum => {
            let sol = minsum_scalar(m_pred, &model.g, sigma, p)?;
            let c = &model.g * &sol.a_star;
            Ok(ReconfigResult {
                objective,
                gamma: 1.0,
                c_star: None,
                c_realized: c.adjoint(),
                m_lower_bound: None,
                objective_lower: sol.achieved_sum_mse,
                objective_achieved: sol.achieved_sum_mse,
                m_achieved: sol.m_achieved,
                a_star: Some(sol.a_star),
                pseudo_inverse: false,
                relaxation: None,
            })
        }
        Objective::Max => {
            let report = minmax_scalar_bisection(m_pred, &model.g, sigma, p, DEFAULT_BISECTION_EPS)?;
            let c = &model.g * &report.a_star;
            Ok(ReconfigResult {
                objective,
                gamma: 1.0,
                c_star: None,
                c_realized: c.adjoint(),
                m_lower_bound: None,
                objective_lower: report.t_star,
                objective_achieved: report.achieved_max_mse,
                m_achieved: report.m_achieved.clone(),
                a_star: Some(report.a_star.clone()),
                pseudo_inverse: false,
                relaxation: Some(report),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{random_cmat, random_pd, rng};
    use crate::matrix::{diag, identity, min_eigenvalue};
    use num_complex::Complex64;
    use rand::Rng;

    fn sum_mse(m_pred: &CMat, g: &CMat, a: &CMat, sigma: f64) -> f64 {
        trace_re(&update_mse_scalar(m_pred, &(g * a), sigma).unwrap())
    }

    fn power(g: &CMat, a: &CMat) -> f64 {
        frobenius_norm_sq(&(g * a))
    }

    /// Multi-start projected gradient on the sphere `‖G a‖² = P`, in the
    /// coordinates `x = G a` restricted to the range of `G`.
    fn projected_gradient(m_pred: &CMat, g: &CMat, sigma: f64, p: f64, seed: u64) -> f64 {
        let mut r = rng(seed);
        let q = g.clone().qr().q();
        let mut best = f64::INFINITY;
        for _ in 0..20 {
            let mut y = random_cmat(&mut r, q.ncols(), 1);
            y = y.scale((p / frobenius_norm_sq(&y)).sqrt());
            let mut step = 0.5;
            let mut value = trace_re(&update_mse_scalar(m_pred, &(&q * &y), sigma).unwrap());
            for _ in 0..3000 {
                // gradient of -|M c|²/(σ² + c^H M c) with respect to conj(c)
                let c = &q * &y;
                let mc = m_pred * &c;
                let den = sigma + (c.adjoint() * &mc)[(0, 0)].re;
                let num = frobenius_norm_sq(&mc);
                let grad_c = -(m_pred * &mc).unscale(den) + mc.scale(num / (den * den));
                let grad = q.adjoint() * grad_c;
                let mut cand = &y - grad.scale(step);
                cand = cand.scale((p / frobenius_norm_sq(&cand)).sqrt());
                let v = trace_re(&update_mse_scalar(m_pred, &(&q * &cand), sigma).unwrap());
                if v < value {
                    y = cand;
                    value = v;
                    step *= 1.2;
                } else {
                    step *= 0.5;
                }
            }
            best = best.min(value);
        }
        best
    }

    #[test]
    fn rayleigh_two_axis_example() {
        let sol = minsum_scalar(&diag(&[2.0, 1.0]), &identity(2), 1.0, 1.0).unwrap();
        assert!((sol.achieved_sum_mse - 5.0 / 3.0).abs() < 1e-10, "{}", sol.achieved_sum_mse);
        assert!(sol.a_star[(1, 0)].norm() < 1e-8);
        assert!((power(&identity(2), &sol.a_star) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_isotropic_closed_form() {
        let mut r = rng(2);
        let g = random_cmat(&mut r, 4, 3);
        let (alpha, sigma, p) = (1.7, 0.5, 2.0);
        let sol = minsum_scalar(&identity(4).scale(alpha), &g, sigma, p).unwrap();
        let closed = 4.0 * alpha - alpha * alpha * p / (sigma + alpha * p);
        assert!((sol.achieved_sum_mse - closed).abs() < 1e-10);
    }

    #[test]
    fn rayleigh_matches_projected_gradient() {
        let mut r = rng(4);
        for seed in 0..3 {
            let m_pred = random_pd(&mut r, 4, 0.2);
            let g = random_cmat(&mut r, 4, 3);
            let sol = minsum_scalar(&m_pred, &g, 0.5, 2.0).unwrap();
            let oracle = projected_gradient(&m_pred, &g, 0.5, 2.0, seed);
            assert!(sol.achieved_sum_mse <= oracle * (1.0 + 1e-3), "{} vs {oracle}", sol.achieved_sum_mse);
            assert!((sol.achieved_sum_mse - oracle).abs() <= 1e-3 * oracle);
        }
    }

    #[test]
    fn rayleigh_beats_random_directions_and_ignores_phase() {
        let mut r = rng(6);
        let m_pred = random_pd(&mut r, 4, 0.2);
        let g = random_cmat(&mut r, 4, 3);
        let (sigma, p) = (0.5, 1.5);
        let sol = minsum_scalar(&m_pred, &g, sigma, p).unwrap();
        assert!((power(&g, &sol.a_star) - p).abs() < 1e-8 * p);
        for _ in 0..10_000 {
            let d = random_cmat(&mut r, 3, 1);
            let d = d.scale((p / power(&g, &d)).sqrt());
            assert!(sum_mse(&m_pred, &g, &d, sigma) >= sol.achieved_sum_mse - 1e-9);
        }
        let rotated = sol.a_star.map(|z| z * Complex64::from_polar(1.0, 0.7));
        assert!((sum_mse(&m_pred, &g, &rotated, sigma) - sol.achieved_sum_mse).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_rejects_zero_budget() {
        assert!(matches!(minsum_scalar(&identity(2), &identity(2), 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn e_i_examples() {
        let mut r = rng(7);
        let m_pred = random_pd(&mut r, 4, 0.3);
        let g = random_cmat(&mut r, 4, 3);
        let e = build_e_i(&m_pred, &g, 2, m_pred[(2, 2)].re).unwrap();
        assert!(min_eigenvalue(&e).unwrap() > -1e-10);
        let ev = hermitian_eig(&e).unwrap();
        assert!(ev.values[1].abs() < 1e-10 * ev.max());

        let t = 0.3;
        let e = build_e_i(&identity(3), &identity(3), 1, t).unwrap();
        let mut expect = identity(3).scale(-(1.0 - t));
        expect[(1, 1)] += Complex64::ONE;
        assert!(crate::matrix::frobenius_norm(&(e - expect)) < 1e-14);

        let (t1, t2) = (0.2, 0.9);
        let diff = build_e_i(&m_pred, &g, 0, t2).unwrap() - build_e_i(&m_pred, &g, 0, t1).unwrap();
        let expect = (g.adjoint() * &m_pred * &g).scale(t2 - t1);
        assert!(crate::matrix::frobenius_norm(&(&diff - expect)) < 1e-10);
        assert!(min_eigenvalue(&diff).unwrap() > -1e-10);
        assert!(matches!(build_e_i(&m_pred, &g, 4, 0.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn feasibility_one_dimensional() {
        let (m, g2, sigma, p): (f64, f64, f64, f64) = (1.3, 0.8, 0.6, 1.1);
        let g = identity(1).scale(g2.sqrt());
        // the budget bounds ‖g a‖², so the gain of g cancels
        let threshold = m - m * m * p / (sigma + m * p);
        let m_pred = identity(1).scale(m);
        assert!(minmax_feasible(&m_pred, &g, sigma, p, threshold + 1e-4).unwrap().0);
        assert!(!minmax_feasible(&m_pred, &g, sigma, p, threshold - 1e-4).unwrap().0);
        let (ok, witness) = minmax_feasible(&m_pred, &g, sigma, p, m).unwrap();
        assert!(ok && witness.is_some());
    }

    #[test]
    fn feasibility_below_vector_bound() {
        let mut r = rng(12);
        let m_pred = random_pd(&mut r, 3, 0.3);
        let g = random_cmat(&mut r, 3, 3);
        let bound = crate::vector::minmax_sdp(&m_pred, 0.5, 1.0).unwrap().t_star;
        assert!(!minmax_feasible(&m_pred, &g, 0.5, 1.0, bound - 1e-3).unwrap().0);
    }

    #[test]
    fn bisection_one_dimensional() {
        let rep = minmax_scalar_bisection(&identity(1), &identity(1), 1.0, 1.0, 1e-6).unwrap();
        assert!((rep.t_star - 0.5).abs() <= 1e-6, "{}", rep.t_star);
        assert!(rep.rank_one);
        assert!((rep.achieved_max_mse - rep.t_star).abs() < 1e-5);
        assert_eq!(rep.bisection_iters, (1.0f64 / 1e-6).log2().ceil() as usize);
    }

    #[test]
    fn bisection_isotropic_relaxation() {
        // The relaxed constraints [A]_ii ≥ (1 − t)(1 + tr A) summed over i give
        // t ≥ 1 − P/(M(1 + P)), attained by A = (P/M) I.
        let (m, p) = (3usize, 2.0);
        let rep = minmax_scalar_bisection(&identity(m), &identity(m), 1.0, p, 1e-6).unwrap();
        let closed = 1.0 - p / (m as f64 * (1.0 + p));
        assert!((rep.t_star - closed).abs() <= 2e-6, "{} vs {closed}", rep.t_star);
        assert!(rep.achieved_max_mse >= rep.t_star - 1e-6);
        assert!(rep.achieved_max_mse <= 1.0);
        assert!((power(&identity(m), &rep.a_star) - p).abs() < 1e-8 * p);
    }

    #[test]
    fn bisection_report_invariants() {
        let mut r = rng(13);
        for _ in 0..2 {
            let m_pred = random_pd(&mut r, 4, 0.3);
            let g = random_cmat(&mut r, 4, 3);
            let p = r.random_range(0.5..4.0);
            let rep = minmax_scalar_bisection(&m_pred, &g, 0.5, p, 1e-6).unwrap();
            let range = max_diag(&m_pred);
            assert_eq!(rep.bisection_iters, (range / 1e-6).log2().ceil() as usize);
            assert_eq!(rep.probes.len(), rep.bisection_iters);
            assert!(rep.achieved_max_mse >= rep.t_star - 1e-6);
            assert!(rep.achieved_max_mse <= range + 1e-12);
            assert!((power(&g, &rep.a_star) - p).abs() < 1e-8 * p);
            let eig = hermitian_eig(&rep.a_matrix).unwrap();
            let n = eig.values.len();
            assert_eq!(rep.rank_one, eig.values[n - 2].max(0.0) / eig.max() <= RANK_ONE_RATIO);
            if rep.rank_one {
                assert!(rep.achieved_max_mse - rep.t_star <= 1e-5);
            }
        }
    }

    #[test]
    fn reconstruct_rank_one_matrix() {
        let mut r = rng(14);
        let m_pred = random_pd(&mut r, 3, 0.3);
        let g = random_cmat(&mut r, 3, 2);
        let x = random_cmat(&mut r, 2, 1);
        let (a, _, rank_one) = rank_one_reconstruct(&(&x * x.adjoint()), &g, 2.0, &m_pred, 0.5).unwrap();
        assert!(rank_one);
        let cosine = (x.adjoint() * &a)[(0, 0)].norm()
            / (frobenius_norm_sq(&x).sqrt() * frobenius_norm_sq(&a).sqrt());
        assert!((cosine - 1.0).abs() < 1e-10);
        assert!((power(&g, &a) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn reconstruct_full_rank_is_deterministic() {
        let mut r = rng(15);
        let m_pred = random_pd(&mut r, 3, 0.3);
        let g = random_cmat(&mut r, 3, 3);
        let a_mat = random_pd(&mut r, 3, 0.5);
        let first = rank_one_reconstruct(&a_mat, &g, 1.5, &m_pred, 0.5).unwrap();
        let second = rank_one_reconstruct(&a_mat, &g, 1.5, &m_pred, 0.5).unwrap();
        assert!(!first.2);
        assert_eq!(first.0, second.0);
        assert!(first.1 <= max_diag(&m_pred));
        assert!(matches!(
            rank_one_reconstruct(&CMat::zeros(3, 3), &g, 1.5, &m_pred, 0.5),
            Err(Error::DegenerateSolution)
        ));
    }

    #[test]
    fn reconfigure_scalar_both_objectives() {
        let mut r = rng(16);
        let g = random_cmat(&mut r, 3, 2);
        let model = SystemModel::new(identity(3).scale(0.5), identity(3), 0.5, g, 1, ObservationMode::Scalar).unwrap();
        let m_pred = random_pd(&mut r, 3, 0.3);
        let sum = reconfigure_scalar(&m_pred, &model, 1.0, Objective::Sum).unwrap();
        assert_eq!(sum.c_realized.nrows(), 1);
        assert!((model.power(sum.a_star.as_ref().unwrap()) - 1.0).abs() < 1e-8);
        let max = reconfigure_scalar(&m_pred, &model, 1.0, Objective::Max).unwrap();
        assert!(max.objective_achieved >= max.objective_lower - 1e-6);
        assert!(max.relaxation.is_some());
        let zero = reconfigure_scalar(&m_pred, &model, 0.0, Objective::Max).unwrap();
        assert_eq!(zero.m_achieved, m_pred);
    }
}
