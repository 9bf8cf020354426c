use std::path::Path;

use precond_core::{Error, IterateConfig, LanczosConfig, PricingNorm, Result, SipConfig};
use serde::{Deserialize, Serialize};

/// Solver settings shared by every command, loadable from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub eps: f64,
    pub max_rounds: usize,
    pub n_init_cuts: usize,
    pub lanczos_rel_tol: f64,
    pub lanczos_max_iter: Option<usize>,
    pub early_exit: bool,
    pub pricing_norm: PricingNorm,
    pub iterations: usize,
    pub seed: u64,
    pub ruiz_sweeps: usize,
    pub ruiz_tol: f64,
    pub pcg_tol: f64,
    pub pcg_max_iter: usize,
    /// Wall-clock budget per cutting-plane solve, in seconds.
    pub time_limit_s: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_rounds: 100,
            n_init_cuts: 20,
            lanczos_rel_tol: 1e-14,
            lanczos_max_iter: None,
            early_exit: false,
            pricing_norm: PricingNorm::L2,
            iterations: 5,
            seed: 0,
            ruiz_sweeps: 10,
            ruiz_tol: 1e-6,
            pcg_tol: 1e-10,
            pcg_max_iter: 100_000,
            time_limit_s: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("bad config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps", self.eps),
            ("lanczos_rel_tol", self.lanczos_rel_tol),
            ("ruiz_tol", self.ruiz_tol),
            ("pcg_tol", self.pcg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_rounds == 0 || self.iterations == 0 {
            return Err(Error::InvalidArgument("max_rounds and iterations must be at least 1".into()));
        }
        if self.lanczos_max_iter == Some(0) {
            return Err(Error::InvalidArgument("lanczos_max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn lanczos(&self) -> LanczosConfig {
        LanczosConfig {
            rel_tol: self.lanczos_rel_tol,
            max_iter: self.lanczos_max_iter,
            seed: self.seed,
            ..LanczosConfig::default()
        }
    }

    pub fn sip(&self) -> SipConfig {
        SipConfig {
            eps: self.eps,
            max_rounds: self.max_rounds,
            n_init_cuts: self.n_init_cuts,
            lanczos: self.lanczos(),
            early_exit: self.early_exit,
            seed: self.seed,
            time_limit_s: self.time_limit_s,
            ..SipConfig::default()
        }
    }

    pub fn iterate(&self) -> IterateConfig {
        IterateConfig {
            sip: self.sip(),
            pricing: self.pricing_norm,
            iterations: self.iterations,
            ..IterateConfig::default()
        }
    }
}
