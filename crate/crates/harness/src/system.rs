//! Random test systems.
//!
//! For a given seed the generator draws, in this order, `F` (`M×M`), the
//! vector-mode `G` (`LM×N`) and the scalar-mode `G` (`M×N`), all with
//! i.i.d. `CN(0, 1)` entries. `F` is then rescaled to the target spectral
//! radius and `Q = I`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use reconfig_core::kalman::{ObservationMode, SystemModel};
use reconfig_core::matrix::{identity, spectral_radius};
use reconfig_core::tracking::complex_normal;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// The two models sharing one draw of `F` and `Q`.
#[derive(Debug, Clone)]
pub struct Systems {
    pub seed: u64,
    pub vector: SystemModel,
    pub scalar: SystemModel,
}

impl Systems {
    pub fn for_mode(&self, mode: ObservationMode) -> &SystemModel {
        match mode {
            ObservationMode::Vector => &self.vector,
            ObservationMode::Scalar => &self.scalar,
        }
    }
}

pub fn generate_systems(cfg: &ExperimentConfig, seed: u64) -> Result<Systems> {
    cfg.validate()?;
    let (m, l, n) = (cfg.m, cfg.l, cfg.n);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let f_raw = complex_normal(&mut rng, m, m);
    let g_vector = complex_normal(&mut rng, l * m, n);
    let g_scalar = complex_normal(&mut rng, m, n);

    let rho = spectral_radius(&f_raw)?;
    if !(rho > 0.0) {
        return Err(HarnessError::Config(format!("seed {seed} drew a nilpotent F")));
    }
    let f = f_raw.scale(cfg.spectral_radius_target / rho);
    let q = identity(m);
    let vector = SystemModel::new(f.clone(), q.clone(), cfg.sigma_v_sq, g_vector, l, ObservationMode::Vector)?;
    let scalar = SystemModel::new(f, q, cfg.sigma_v_sq, g_scalar, 1, ObservationMode::Scalar)?;
    Ok(Systems { seed, vector, scalar })
}

/// Vector-mode model for `cfg.seed`.
pub fn generate_system(cfg: &ExperimentConfig) -> Result<SystemModel> {
    Ok(generate_systems(cfg, cfg.seed)?.vector)
}

