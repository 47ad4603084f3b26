//! Two-stage reconfiguration for vector observations.
//!
//! Stage one drops the `vec(C) = G a` structure and optimizes the Gram
//! matrix `C̃ = C^H C` with an SDP. Stage two factors `C̃* = U Σ U^H` into
//! `C* = Σ^{1/2} U^H` and projects `vec(C*)` onto the range of `G` with the
//! power budget met with equality.

use crate::error::{Error, Result};
use crate::kalman::{update_mse, ObservationMode, SystemModel};
use crate::matrix::{
    frobenius_norm, hermitian_eig, hermitianize, identity, max_diag, pd_inverse, trace_re, vec, CMat,
};
use crate::scalar::ScalarMinMaxReport;
use crate::sdp::{self, Field, Placement, SdpProblem, SdpSolution, SdpStatus, Sense, Term};

/// Largest accepted `‖D* − (M^{-1} + C̃*/σ²)^{-1}‖_F` at the SDP optimum.
pub const SCHUR_EQUALITY_TOL: f64 = 1e-6;

/// Projections with `‖G x‖²` at or below this are rejected.
pub const MIN_PROJECTION_ENERGY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Sum of the diagonal of `M_{n|n}`.
    Sum,
    /// Largest diagonal entry of `M_{n|n}`.
    Max,
}

impl Objective {
    pub fn eval(self, m: &CMat) -> f64 {
        match self {
            Objective::Sum => trace_re(m),
            Objective::Max => max_diag(m),
        }
    }
}

/// Outcome of one reconfiguration step.
#[derive(Debug, Clone)]
pub struct ReconfigResult {
    pub objective: Objective,
    /// `None` when the observation matrix is used without a parameter
    /// projection (lower-bound and fixed policies).
    pub a_star: Option<CMat>,
    pub gamma: f64,
    /// Structure-free observation matrix from the SDP stage.
    pub c_star: Option<CMat>,
    /// Observation matrix actually applied.
    pub c_realized: CMat,
    /// MSE reached with `c_star`.
    pub m_lower_bound: Option<CMat>,
    pub m_achieved: CMat,
    /// Relaxation value: `tr D*`, `t*`, or the exact optimum for scalar
    /// min-sum.
    pub objective_lower: f64,
    pub objective_achieved: f64,
    /// Projection fell back to the pseudo-inverse of a rank-deficient `G`.
    pub pseudo_inverse: bool,
    pub relaxation: Option<ScalarMinMaxReport>,
}

#[derive(Debug, Clone)]
pub struct MinSumStage {
    pub c_tilde: CMat,
    pub d: CMat,
    pub trace_lower: f64,
}

#[derive(Debug, Clone)]
pub struct MinMaxStage {
    pub c_tilde: CMat,
    pub t_star: f64,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub a_star: CMat,
    pub gamma: f64,
    pub pseudo_inverse: bool,
}

fn check_budget(p: f64) -> Result<()> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("power budget must be nonnegative, got {p}")));
    }
    Ok(())
}

fn expect_optimal(sol: &SdpSolution, what: &str) -> Result<()> {
    match sol.status {
        SdpStatus::Optimal => Ok(()),
        SdpStatus::Infeasible => Err(Error::Solver(format!("{what}: reported infeasible"))),
        SdpStatus::MaxIterations => Err(Error::Solver(format!(
            "{what}: iteration cap reached with gap {:.3e}",
            sol.gap
        ))),
    }
}

/// `(M^{-1} + C̃/σ²)^{-1}`.
pub fn mse_for_gram(m_inv: &CMat, c_tilde: &CMat, sigma_v_sq: f64) -> Result<CMat> {
    pd_inverse(&hermitianize(&(m_inv + c_tilde.unscale(sigma_v_sq))))
}

/// Min-sum SDP: `min tr D` subject to `[[M^{-1} + C̃/σ², I], [I, D]] ⪰ 0`,
/// `tr C̃ ≤ P`, `C̃ ⪰ 0`.
pub fn minsum_problem(m_pred: &CMat, sigma_v_sq: f64, p: f64) -> Result<(SdpProblem, Vec<CMat>)> {
    let m = m_pred.nrows();
    let m_inv = pd_inverse(m_pred)?;
    let mut prob = SdpProblem::new();
    let ct = prob.add_block("c_tilde", m, Field::Complex);
    let d = prob.add_block("d", m, Field::Complex);
    prob.set_objective(vec![Term::new(d, identity(m))]);
    prob.add_constraint(vec![Term::new(ct, identity(m))], Sense::Le, p);

    let mut constant = CMat::zeros(2 * m, 2 * m);
    constant.view_mut((0, 0), (m, m)).copy_from(&m_inv);
    for i in 0..m {
        constant[(i, m + i)] = num_complex::Complex64::ONE;
        constant[(m + i, i)] = num_complex::Complex64::ONE;
    }
    prob.add_lmi(
        "schur",
        Field::Complex,
        constant,
        vec![
            Placement { block: ct, offset: 0, scale: 1.0 / sigma_v_sq },
            Placement { block: d, offset: m, scale: 1.0 },
        ],
    );

    // interior start: half the budget spread evenly, D above the inverse
    let ct0 = identity(m).scale(p / (2.0 * m as f64));
    let d0 = mse_for_gram(&m_inv, &ct0, sigma_v_sq)? + identity(m).scale(0.1);
    Ok((prob, vec![ct0, d0]))
}

pub fn minsum_sdp(m_pred: &CMat, sigma_v_sq: f64, p: f64) -> Result<MinSumStage> {
    check_budget(p)?;
    let m = m_pred.nrows();
    if p == 0.0 {
        return Ok(MinSumStage { c_tilde: CMat::zeros(m, m), d: m_pred.clone(), trace_lower: trace_re(m_pred) });
    }
    let (prob, start) = minsum_problem(m_pred, sigma_v_sq, p)?;
    let sol = sdp::solve_from(&prob, &start)?;
    expect_optimal(&sol, "min-sum SDP")?;
    let c_tilde = hermitianize(&sol.blocks[0]);
    let d = hermitianize(&sol.blocks[1]);

    let exact = mse_for_gram(&pd_inverse(m_pred)?, &c_tilde, sigma_v_sq)?;
    let deviation = frobenius_norm(&(&d - &exact));
    if deviation > SCHUR_EQUALITY_TOL {
        return Err(Error::Internal(format!(
            "Schur constraint not tight at the min-sum optimum (deviation {deviation:.3e})"
        )));
    }
    let trace_lower = trace_re(&d);
    Ok(MinSumStage { c_tilde, d, trace_lower })
}

/// Min-max SDP: `min t` subject to `[[t, e_i^T], [e_i, M^{-1} + C̃/σ²]] ⪰ 0`
/// for every diagonal index `i`, `tr C̃ ≤ P`, `C̃ ⪰ 0`.
pub fn minmax_problem(m_pred: &CMat, sigma_v_sq: f64, p: f64) -> Result<(SdpProblem, Vec<CMat>)> {
    let m = m_pred.nrows();
    let m_inv = pd_inverse(m_pred)?;
    let mut prob = SdpProblem::new();
    let ct = prob.add_block("c_tilde", m, Field::Complex);
    let t = prob.add_block("t", 1, Field::Real);
    prob.set_objective(vec![Term::new(t, identity(1))]);
    prob.add_constraint(vec![Term::new(ct, identity(m))], Sense::Le, p);
    for i in 0..m {
        let mut constant = CMat::zeros(m + 1, m + 1);
        constant.view_mut((1, 1), (m, m)).copy_from(&m_inv);
        constant[(0, i + 1)] = num_complex::Complex64::ONE;
        constant[(i + 1, 0)] = num_complex::Complex64::ONE;
        prob.add_lmi(
            format!("diag{i}"),
            Field::Complex,
            constant,
            vec![
                Placement { block: t, offset: 0, scale: 1.0 },
                Placement { block: ct, offset: 1, scale: 1.0 / sigma_v_sq },
            ],
        );
    }
    let ct0 = identity(m).scale(p / (2.0 * m as f64));
    let t0 = max_diag(&mse_for_gram(&m_inv, &ct0, sigma_v_sq)?) + 0.1;
    Ok((prob, vec![ct0, identity(1).scale(t0)]))
}

pub fn minmax_sdp(m_pred: &CMat, sigma_v_sq: f64, p: f64) -> Result<MinMaxStage> {
    check_budget(p)?;
    let m = m_pred.nrows();
    if p == 0.0 {
        return Ok(MinMaxStage { c_tilde: CMat::zeros(m, m), t_star: max_diag(m_pred) });
    }
    let (prob, start) = minmax_problem(m_pred, sigma_v_sq, p)?;
    let sol = sdp::solve_from(&prob, &start)?;
    expect_optimal(&sol, "min-max SDP")?;
    let c_tilde = hermitianize(&sol.blocks[0]);
    let t_star = sol.blocks[1][(0, 0)].re;
    let exact = max_diag(&mse_for_gram(&pd_inverse(m_pred)?, &c_tilde, sigma_v_sq)?);
    if (exact - t_star).abs() > SCHUR_EQUALITY_TOL {
        return Err(Error::Internal(format!(
            "min-max level {t_star} does not match the largest diagonal MSE {exact}"
        )));
    }
    Ok(MinMaxStage { c_tilde, t_star })
}

/// `C* = Σ^{1/2} U^H` with singular values in descending order; rows past
/// `M` are zero.
pub fn factor_ctilde(c_tilde: &CMat, l: usize) -> Result<CMat> {
    let m = c_tilde.nrows();
    if l < m {
        return Err(Error::Config(format!(
            "observation dimension L = {l} cannot reproduce an arbitrary rank-{m} Gram matrix"
        )));
    }
    let eig = hermitian_eig(c_tilde)?;
    let mut c = CMat::zeros(l, m);
    for (row, k) in (0..m).rev().enumerate() {
        let s = eig.values[k].max(0.0).sqrt();
        let u = eig.vectors.column(k);
        for j in 0..m {
            c[(row, j)] = u[j].conj() * s;
        }
    }
    Ok(c)
}

/// Least-squares fit of `vec(C*)` by `G a` rescaled to `a^H G^H G a = P`.
pub fn project_to_parameters(c_star: &CMat, g: &CMat, p: f64) -> Result<Projection> {
    check_budget(p)?;
    let v = vec(c_star);
    if g.nrows() != v.nrows() {
        return Err(Error::Dimension(format!(
            "G has {} rows but vec(C*) has length {}",
            g.nrows(),
            v.nrows()
        )));
    }
    let gram = hermitianize(&(g.adjoint() * g));
    let rhs = g.adjoint() * &v;
    let full_rank = crate::kalman::full_column_rank(g);
    let x = if full_rank {
        gram.cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or_else(|| Error::Internal("G^H G is not positive definite".into()))?
    } else {
        g.clone()
            .svd(true, true)
            .solve(&v, 1e-12 * frobenius_norm(g))
            .map_err(|e| Error::Internal(format!("pseudo-inverse failed: {e}")))?
    };
    let energy = crate::matrix::frobenius_norm_sq(&(g * &x));
    if energy <= MIN_PROJECTION_ENERGY {
        return Err(Error::DegenerateProjection { energy });
    }
    let gamma = (p / energy).sqrt();
    Ok(Projection { a_star: x.scale(gamma), gamma, pseudo_inverse: !full_rank })
}

fn require_vector(model: &SystemModel) -> Result<()> {
    if model.mode != ObservationMode::Vector {
        return Err(Error::Config("vector reconfiguration needs a vector-mode model".into()));
    }
    Ok(())
}

/// SDP stage for `objective`, returning `C̃*` and the relaxation value.
pub fn sdp_stage(m_pred: &CMat, sigma_v_sq: f64, p: f64, objective: Objective) -> Result<(CMat, f64)> {
    Ok(match objective {
        Objective::Sum => {
            let s = minsum_sdp(m_pred, sigma_v_sq, p)?;
            (s.c_tilde, s.trace_lower)
        }
        Objective::Max => {
            let s = minmax_sdp(m_pred, sigma_v_sq, p)?;
            (s.c_tilde, s.t_star)
        }
    })
}

/// SDP stage, factorization and projection for one step.
pub fn reconfigure(m_pred: &CMat, model: &SystemModel, p: f64, objective: Objective) -> Result<ReconfigResult> {
    require_vector(model)?;
    check_budget(p)?;
    let crate::kalman::Dims { m, l, n } = model.dims;
    if p == 0.0 {
        return Ok(ReconfigResult {
            objective,
            a_star: Some(CMat::zeros(n, 1)),
            gamma: 0.0,
            c_star: Some(CMat::zeros(l, m)),
            c_realized: CMat::zeros(l, m),
            m_lower_bound: Some(m_pred.clone()),
            m_achieved: m_pred.clone(),
            objective_lower: objective.eval(m_pred),
            objective_achieved: objective.eval(m_pred),
            pseudo_inverse: !model.g_full_rank,
            relaxation: None,
        });
    }
    let (c_tilde, objective_lower) = sdp_stage(m_pred, model.sigma_v_sq, p, objective)?;
    let c_star = factor_ctilde(&c_tilde, l)?;
    let m_lower_bound = update_mse(m_pred, &c_star, model.sigma_v_sq)?;
    let proj = project_to_parameters(&c_star, &model.g, p)?;
    let c_realized = model.observation_matrix(&proj.a_star)?;
    let m_achieved = update_mse(m_pred, &c_realized, model.sigma_v_sq)?;
    Ok(ReconfigResult {
        objective,
        objective_achieved: objective.eval(&m_achieved),
        a_star: Some(proj.a_star),
        gamma: proj.gamma,
        c_star: Some(c_star),
        c_realized,
        m_lower_bound: Some(m_lower_bound),
        m_achieved,
        objective_lower,
        pseudo_inverse: proj.pseudo_inverse,
        relaxation: None,
    })
}

/// Uses the min-sum `C*` directly, without the parameter projection.
pub fn lower_bound_step(m_pred: &CMat, model: &SystemModel, p: f64) -> Result<ReconfigResult> {
    check_budget(p)?;
    let m = m_pred.nrows();
    let l = match model.mode {
        ObservationMode::Vector => model.dims.l.max(m),
        ObservationMode::Scalar => m,
    };
    let stage = minsum_sdp(m_pred, model.sigma_v_sq, p)?;
    let c_star = factor_ctilde(&stage.c_tilde, l)?;
    let m_achieved = update_mse(m_pred, &c_star, model.sigma_v_sq)?;
    Ok(ReconfigResult {
        objective: Objective::Sum,
        a_star: None,
        gamma: 0.0,
        c_star: Some(c_star.clone()),
        c_realized: c_star,
        m_lower_bound: Some(m_achieved.clone()),
        objective_achieved: trace_re(&m_achieved),
        m_achieved,
        objective_lower: stage.trace_lower,
        pseudo_inverse: false,
        relaxation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{random_cmat, random_pd, rng};
    use crate::matrix::{diag, min_eigenvalue};
    use rand::Rng;

    /// Optimal per-axis powers for a diagonal prior: `p_i = σ²(w − 1/m_i)_+`
    /// with the water level `w` found by bisection.
    fn water_filling(m: &[f64], sigma_v_sq: f64, p: f64) -> f64 {
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

    fn vector_model(g: CMat, l: usize, m: usize) -> SystemModel {
        SystemModel::new(
            identity(m).scale(0.5),
            identity(m),
            0.5,
            g,
            l,
            ObservationMode::Vector,
        )
        .unwrap()
    }

    #[test]
    fn minsum_zero_budget() {
        let m = diag(&[2.0, 1.0, 3.0]);
        let s = minsum_sdp(&m, 0.5, 0.0).unwrap();
        assert_eq!(frobenius_norm(&s.c_tilde), 0.0);
        assert_eq!(s.trace_lower, 6.0);
    }

    #[test]
    fn minsum_negative_budget_rejected() {
        assert!(matches!(minsum_sdp(&identity(2), 0.5, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn minsum_isotropic() {
        let s = minsum_sdp(&identity(4), 0.5, 2.0).unwrap();
        assert!((s.trace_lower - 2.0).abs() < 1e-5, "{}", s.trace_lower);
        assert!(frobenius_norm(&(&s.c_tilde - identity(4).scale(0.5))) < 1e-4);
    }

    #[test]
    fn minsum_matches_water_filling() {
        let mut r = rng(11);
        for _ in 0..5 {
            let m: Vec<f64> = (0..4).map(|_| r.random_range(0.2..3.0)).collect();
            let p = r.random_range(0.1..5.0);
            let s = minsum_sdp(&diag(&m), 0.5, p).unwrap();
            let oracle = water_filling(&m, 0.5, p);
            assert!((s.trace_lower - oracle).abs() < 1e-4, "sdp {} oracle {oracle}", s.trace_lower);
        }
    }

    #[test]
    fn factor_round_trip_and_padding() {
        let mut r = rng(3);
        let ct = random_pd(&mut r, 4, 0.0);
        let c = factor_ctilde(&ct, 4).unwrap();
        assert!(frobenius_norm(&(c.adjoint() * &c - &ct)) < 1e-9);

        let c6 = factor_ctilde(&ct, 6).unwrap();
        assert!(frobenius_norm(&(c6.adjoint() * &c6 - &ct)) < 1e-9);
        assert_eq!(frobenius_norm(&c6.rows(4, 2).into_owned()), 0.0);

        assert!(matches!(factor_ctilde(&ct, 3), Err(Error::Config(_))));
        assert_eq!(frobenius_norm(&factor_ctilde(&CMat::zeros(3, 3), 3).unwrap()), 0.0);
        let id = factor_ctilde(&identity(2), 2).unwrap();
        assert!(frobenius_norm(&(id.adjoint() * &id - identity(2))) < 1e-12);
    }

    #[test]
    fn projection_identity_and_orthonormal() {
        let mut r = rng(5);
        let c = random_cmat(&mut r, 2, 2);
        let proj = project_to_parameters(&c, &identity(4), 3.0).unwrap();
        let expect = vec(&c).scale((3.0 / crate::matrix::frobenius_norm_sq(&c)).sqrt());
        assert!(frobenius_norm(&(&proj.a_star - expect)) < 1e-12);
        assert!(!proj.pseudo_inverse);

        let q = random_cmat(&mut r, 4, 2).qr().q();
        let proj = project_to_parameters(&c, &q, 3.0).unwrap();
        let x = q.adjoint() * vec(&c);
        let expect = x.scale((3.0 / crate::matrix::frobenius_norm_sq(&x)).sqrt());
        assert!(frobenius_norm(&(&proj.a_star - expect)) < 1e-10);
        let power = crate::matrix::frobenius_norm_sq(&(&q * &proj.a_star));
        assert!((power - 3.0).abs() < 1e-10 * 3.0);
    }

    #[test]
    fn projection_degenerate_and_rank_deficient() {
        let c = identity(2);
        // range of G is orthogonal to vec(I)
        let mut g = CMat::zeros(4, 1);
        g[(1, 0)] = num_complex::Complex64::ONE;
        assert!(matches!(project_to_parameters(&c, &g, 1.0), Err(Error::DegenerateProjection { .. })));

        let mut g = CMat::zeros(4, 2);
        g[(0, 0)] = num_complex::Complex64::ONE;
        g[(0, 1)] = num_complex::Complex64::ONE;
        let proj = project_to_parameters(&c, &g, 2.0).unwrap();
        assert!(proj.pseudo_inverse);
        let power = crate::matrix::frobenius_norm_sq(&(&g * &proj.a_star));
        assert!((power - 2.0).abs() < 1e-10);
    }

    #[test]
    fn minmax_isotropic_and_zero_budget() {
        let s = minmax_sdp(&identity(4), 0.5, 2.0).unwrap();
        assert!((s.t_star - 0.5).abs() < 1e-5, "{}", s.t_star);
        assert!(frobenius_norm(&(&s.c_tilde - identity(4).scale(0.5))) < 1e-4);
        let s = minmax_sdp(&diag(&[2.0, 1.0]), 0.5, 0.0).unwrap();
        assert_eq!(s.t_star, 2.0);
    }

    #[test]
    fn minmax_equalizes_two_axes() {
        let (m1, m2, sigma, p) = (2.0, 1.0, 0.5, 3.0);
        let mut best = f64::INFINITY;
        let steps = 200_000;
        for k in 0..=steps {
            let p1 = p * k as f64 / steps as f64;
            let v = (1.0 / (1.0 / m1 + p1 / sigma)).max(1.0 / (1.0 / m2 + (p - p1) / sigma));
            best = best.min(v);
        }
        let s = minmax_sdp(&diag(&[m1, m2]), sigma, p).unwrap();
        assert!((s.t_star - best).abs() < 1e-4, "sdp {} grid {best}", s.t_star);
        let mse = mse_for_gram(&diag(&[1.0 / m1, 1.0 / m2]), &s.c_tilde, sigma).unwrap();
        assert!((mse[(0, 0)].re - mse[(1, 1)].re).abs() < 1e-4);
    }

    #[test]
    fn sdp_stage_properties() {
        let mut r = rng(21);
        for _ in 0..4 {
            let m_pred = random_pd(&mut r, 3, 0.3);
            let m_inv = pd_inverse(&m_pred).unwrap();
            let (sigma, p) = (r.random_range(0.2..2.0), r.random_range(0.5..4.0));
            let sum = minsum_sdp(&m_pred, sigma, p).unwrap();
            let max = minmax_sdp(&m_pred, sigma, p).unwrap();
            assert!(min_eigenvalue(&sum.c_tilde).unwrap() > -1e-8);
            assert!(trace_re(&sum.c_tilde) <= p + 1e-6);

            let mse_of_max = mse_for_gram(&m_inv, &max.c_tilde, sigma).unwrap();
            assert!(sum.trace_lower <= trace_re(&mse_of_max) + 1e-6);
            assert!(max.t_star <= max_diag(&sum.d) + 1e-6);

            let scaled = minsum_sdp(&m_pred, 2.0 * sigma, 2.0 * p).unwrap();
            assert!(frobenius_norm(&(&scaled.d - &sum.d)) < 1e-5);
            let ratio = scaled.c_tilde.unscale(2.0 * sigma) - sum.c_tilde.unscale(sigma);
            assert!(frobenius_norm(&ratio) < 1e-4);

            for _ in 0..100 {
                let x = random_cmat(&mut r, 3, 3);
                let ct = &x * x.adjoint();
                let ct = ct.scale(p * r.random_range(0.0..1.0) / trace_re(&ct));
                let tr = trace_re(&mse_for_gram(&m_inv, &ct, sigma).unwrap());
                assert!(tr >= sum.trace_lower - 1e-6);
            }
        }
    }

    #[test]
    fn full_parameterization_is_lossless() {
        let mut r = rng(8);
        let g = random_cmat(&mut r, 9, 9);
        let model = vector_model(g, 3, 3);
        let m_pred = random_pd(&mut r, 3, 0.5);
        for objective in [Objective::Sum, Objective::Max] {
            let res = reconfigure(&m_pred, &model, 2.0, objective).unwrap();
            assert!((res.objective_achieved - res.objective_lower).abs() < 1e-6, "{objective:?}");
            let power = model.power(res.a_star.as_ref().unwrap());
            assert!((power - 2.0).abs() < 1e-8 * 2.0);
        }
    }

    #[test]
    fn reconfigure_lower_bound_ordering() {
        let mut r = rng(9);
        let g = random_cmat(&mut r, 16, 3);
        let model = vector_model(g, 4, 4);
        for _ in 0..3 {
            let m_pred = random_pd(&mut r, 4, 0.5);
            let p = r.random_range(0.3..6.0);
            let sum = reconfigure(&m_pred, &model, p, Objective::Sum).unwrap();
            assert!(sum.objective_achieved >= sum.objective_lower - 1e-6);
            let max = reconfigure(&m_pred, &model, p, Objective::Max).unwrap();
            assert!(max.objective_achieved >= max.objective_lower - 1e-6);
            for res in [&sum, &max] {
                let power = model.power(res.a_star.as_ref().unwrap());
                assert!((power - p).abs() < 1e-8 * p);
                let diff = &res.c_realized - model.observation_matrix(res.a_star.as_ref().unwrap()).unwrap();
                assert!(frobenius_norm(&diff) < 1e-12);
            }
        }
    }

    #[test]
    fn reconfigure_zero_budget() {
        let mut r = rng(10);
        let model = vector_model(random_cmat(&mut r, 16, 3), 4, 4);
        let m_pred = random_pd(&mut r, 4, 0.5);
        let res = reconfigure(&m_pred, &model, 0.0, Objective::Sum).unwrap();
        assert_eq!(frobenius_norm(res.a_star.as_ref().unwrap()), 0.0);
        assert_eq!(res.m_achieved, m_pred);
    }

    #[test]
    fn reconfigure_rejects_scalar_model() {
        let model = SystemModel::new(identity(2), identity(2), 1.0, identity(2), 1, ObservationMode::Scalar).unwrap();
        assert!(matches!(reconfigure(&identity(2), &model, 1.0, Objective::Sum), Err(Error::Config(_))));
    }
}
