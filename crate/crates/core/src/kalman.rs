//! MSE recursions of the linear Kalman filter.
//!
//! Only the error-covariance side of the filter matters for choosing the
//! observation parameters; state estimates are produced by
//! [`crate::tracking::simulate_trace`].

use crate::error::{Error, Result};
use crate::matrix::{
    check_hermitian, check_psd, frobenius_norm, hermitianize, identity, pd_inverse, unvec, CMat,
};

/// Relative tolerance for agreement of the two algebraic forms of the MSE update.
pub const FORM_AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// `y = C θ + v` with `vec(C) = G a`, `C` of size `L×M`.
    Vector,
    /// `y = c^H θ + v` with `c = G a`.
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    /// State dimension.
    pub m: usize,
    /// Observation rows (1 in scalar mode).
    pub l: usize,
    /// Number of reconfiguration parameters.
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct SystemModel {
    pub f: CMat,
    pub q: CMat,
    pub sigma_v_sq: f64,
    pub g: CMat,
    pub dims: Dims,
    pub mode: ObservationMode,
    /// `G` has full column rank; otherwise projections fall back to the
    /// pseudo-inverse and flag their results.
    pub g_full_rank: bool,
}

impl SystemModel {
    /// `l` is ignored in scalar mode.
    pub fn new(f: CMat, q: CMat, sigma_v_sq: f64, g: CMat, l: usize, mode: ObservationMode) -> Result<Self> {
        let m = f.nrows();
        if !f.is_square() || m == 0 {
            return Err(Error::Dimension(format!("F must be square and nonempty, got {}x{}", f.nrows(), f.ncols())));
        }
        if q.nrows() != m || q.ncols() != m {
            return Err(Error::Dimension(format!("Q must be {m}x{m}")));
        }
        check_psd(&q)?;
        if !(sigma_v_sq > 0.0 && sigma_v_sq.is_finite()) {
            return Err(Error::Domain(format!("observation noise variance must be positive, got {sigma_v_sq}")));
        }
        let l = match mode {
            ObservationMode::Vector => l,
            ObservationMode::Scalar => 1,
        };
        if l == 0 {
            return Err(Error::Dimension("observation dimension L must be at least 1".into()));
        }
        let rows = match mode {
            ObservationMode::Vector => l * m,
            ObservationMode::Scalar => m,
        };
        if g.nrows() != rows || g.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "G must be {rows}xN with N ≥ 1, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        let n = g.ncols();
        let g_full_rank = full_column_rank(&g);
        Ok(Self { f, q, sigma_v_sq, g, dims: Dims { m, l, n }, mode, g_full_rank })
    }

    /// Observation matrix realized by parameters `a` (`L×M`, or `1×M` in
    /// scalar mode).
    pub fn observation_matrix(&self, a: &CMat) -> Result<CMat> {
        if a.nrows() != self.dims.n || a.ncols() != 1 {
            return Err(Error::Dimension(format!("a must be {}x1", self.dims.n)));
        }
        let ga = &self.g * a;
        match self.mode {
            ObservationMode::Vector => unvec(&ga, self.dims.l, self.dims.m),
            ObservationMode::Scalar => Ok(ga.adjoint()),
        }
    }

    /// `a^H G^H G a`, which equals `‖C(a)‖_F²` in both modes.
    pub fn power(&self, a: &CMat) -> f64 {
        crate::matrix::frobenius_norm_sq(&(&self.g * a))
    }
}

pub(crate) fn full_column_rank(g: &CMat) -> bool {
    let gram = hermitianize(&(g.adjoint() * g));
    match crate::matrix::hermitian_eig(&gram) {
        Ok(eig) => eig.min() > 1e-12 * eig.max().max(f64::MIN_POSITIVE),
        Err(_) => false,
    }
}

#[derive(Debug, Clone)]
pub struct BeliefState {
    /// `M_{n|n-1}`.
    pub m_pred: CMat,
    /// `M_{n|n}`.
    pub m_post: CMat,
    pub step: usize,
}

/// `F M F^H + Q`.
pub fn predict_mse(m_post_prev: &CMat, model: &SystemModel) -> CMat {
    hermitianize(&(&model.f * m_post_prev * model.f.adjoint() + &model.q))
}

/// `M C^H (σ² I + C M C^H)^{-1}`.
pub fn kalman_gain(m_pred: &CMat, c: &CMat, sigma_v_sq: f64) -> Result<CMat> {
    check_dims(m_pred, c)?;
    let l = c.nrows();
    let mc_h = m_pred * c.adjoint();
    let innovation = hermitianize(&(identity(l).scale(sigma_v_sq) + c * &mc_h));
    let chol = innovation
        .cholesky()
        .ok_or_else(|| Error::Internal("innovation covariance is not positive definite".into()))?;
    // K = M C^H S^{-1}  <=>  S K^H = C M
    let k_h = chol.solve(&mc_h.adjoint());
    Ok(k_h.adjoint())
}

fn check_dims(m_pred: &CMat, c: &CMat) -> Result<()> {
    if !m_pred.is_square() || c.ncols() != m_pred.nrows() {
        return Err(Error::Dimension(format!(
            "observation matrix is {}x{} but MSE matrix is {}x{}",
            c.nrows(),
            c.ncols(),
            m_pred.nrows(),
            m_pred.ncols()
        )));
    }
    Ok(())
}

/// Filtered MSE. Both `(I − K C) M` and `(M^{-1} + C^H C / σ²)^{-1}` are
/// evaluated; they must agree to [`FORM_AGREEMENT_TOL`] relative to `‖M‖_F`.
/// The information form is returned.
pub fn update_mse(m_pred: &CMat, c: &CMat, sigma_v_sq: f64) -> Result<CMat> {
    check_dims(m_pred, c)?;
    check_hermitian(m_pred)?;
    let m = m_pred.nrows();
    let k = kalman_gain(m_pred, c, sigma_v_sq)?;
    let covariance_form = hermitianize(&((identity(m) - &k * c) * m_pred));
    let info = pd_inverse(m_pred)? + (c.adjoint() * c).unscale(sigma_v_sq);
    let information_form = pd_inverse(&hermitianize(&info))?;
    let deviation = frobenius_norm(&(&covariance_form - &information_form));
    if deviation > FORM_AGREEMENT_TOL * frobenius_norm(m_pred) {
        return Err(Error::FormMismatch { deviation });
    }
    Ok(information_form)
}

/// Rank-one downdate for a scalar observation `y = c^H θ + v`:
/// `M − M c c^H M / (σ² + c^H M c)`.
pub fn update_mse_scalar(m_pred: &CMat, c: &CMat, sigma_v_sq: f64) -> Result<CMat> {
    if c.ncols() != 1 || c.nrows() != m_pred.nrows() {
        return Err(Error::Dimension(format!("c must be {}x1", m_pred.nrows())));
    }
    let mc = m_pred * c;
    let denom = sigma_v_sq + (c.adjoint() * &mc)[(0, 0)].re;
    Ok(hermitianize(&(m_pred - (&mc * mc.adjoint()).unscale(denom))))
}
