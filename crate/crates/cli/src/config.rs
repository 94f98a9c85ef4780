//! Run configuration: one TOML file with a section per subcommand.

use std::path::{Path, PathBuf};

use hs_vanish::construct::BumpShape;
use hs_vanish::experiments::{ScheduleFamily, SweepSpec};
use hs_vanish::flow::DEFAULT_TOL;
use serde::{Deserialize, Serialize};

use crate::checks::CheckName;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
    /// Seed for randomly drawn test arguments.
    pub seed: u64,
    /// Single-chart constant multiplying reported lengths.
    pub chart_c1: f64,
    pub verify: VerifyConfig,
    pub sweep: SweepSpec,
    pub divergence: DivergenceConfig,
    pub flow: FlowConfig,
    pub norm: NormConfig,
    pub ft_check: FtCheckConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            workers: 0,
            seed: 7,
            chart_c1: 1.0,
            verify: VerifyConfig::default(),
            sweep: SweepSpec::default(),
            divergence: DivergenceConfig::default(),
            flow: FlowConfig::default(),
            norm: NormConfig::default(),
            ft_check: FtCheckConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub checks: Vec<CheckName>,
    pub orders: Vec<f64>,
    pub intervals: Vec<[f64; 2]>,
    /// Random `(nu, z)` samples for the Bessel antiderivative identity.
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            checks: CheckName::DEFAULT.to_vec(),
            orders: vec![0.0, 0.1, 0.25, 0.4],
            intervals: vec![[1.0, 2.0], [1.0, 1.1]],
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DivergenceConfig {
    pub enabled: bool,
    pub dim: usize,
    pub interval: [f64; 2],
    pub orders: Vec<f64>,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        Self { enabled: true, dim: 1, interval: [1.0, 2.0], orders: vec![0.4, 0.45, 0.49, 0.499, 0.4999] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    /// Dimension of the product-form check; endpoint maps are always 1D.
    pub dim: usize,
    pub horizon: f64,
    pub family: ScheduleFamily,
    pub delta: f64,
    pub mollifier: BumpShape,
    /// Largest mollifier scale; the ladder halves it.
    pub eps: f64,
    pub ladder: usize,
    pub seeds: usize,
    pub tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            horizon: 1.0,
            family: ScheduleFamily::Sweep { start: 1.2, end: 1.8, speed: 2.0 },
            delta: 0.05,
            mollifier: BumpShape::Exponential,
            eps: 0.1,
            ladder: 8,
            seeds: 41,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub dim: usize,
    pub interval: [f64; 2],
    pub s: f64,
    /// Grid points per axis for the optional grid estimate; 0 skips it.
    pub grid_points: usize,
    /// Grid half-width as a multiple of the outer radius.
    pub pad: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self { dim: 1, interval: [1.0, 2.0], s: 0.25, grid_points: 0, pad: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FtCheckConfig {
    pub dim: usize,
    pub interval: [f64; 2],
    pub frequencies: Vec<f64>,
    pub tol: f64,
}

impl Default for FtCheckConfig {
    fn default() -> Self {
        Self { dim: 2, interval: [1.0, 2.0], frequencies: vec![0.05, 0.3, 1.7, 6.2, 25.0], tol: 1e-7 }
    }
}

fn bad(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), msg: msg.into() }
}

fn check_dim(field: &str, n: usize) -> Result<(), CliError> {
    if !(1..=3).contains(&n) {
        return Err(bad(field, format!("dimension must be 1, 2 or 3, got {n}")));
    }
    Ok(())
}

fn check_interval(field: &str, iv: [f64; 2]) -> Result<(), CliError> {
    if !(iv[0] > 0.0 && iv[1] >= iv[0] && iv[1].is_finite()) {
        return Err(bad(field, format!("need 0 < f <= g, got [{}, {}]", iv[0], iv[1])));
    }
    Ok(())
}

fn check_order(field: &str, s: f64) -> Result<(), CliError> {
    if !(0.0..0.5).contains(&s) {
        return Err(bad(field, format!("s = {s} violates the closed-form precondition 0 <= s < 1/2")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| bad("config", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate_common(&self) -> Result<(), CliError> {
        if !(self.chart_c1 > 0.0) || !self.chart_c1.is_finite() {
            return Err(bad("chart_c1", format!("must be positive, got {}", self.chart_c1)));
        }
        Ok(())
    }

    pub fn validate_verify(&self) -> Result<(), CliError> {
        let v = &self.verify;
        for &s in &v.orders {
            check_order("verify.orders", s)?;
        }
        for &iv in &v.intervals {
            check_interval("verify.intervals", iv)?;
            if iv[1] == iv[0] {
                return Err(bad("verify.intervals", "oracle comparisons need f < g"));
            }
        }
        if v.samples == 0 && v.checks.contains(&CheckName::BesselAntiderivative) {
            return Err(bad("verify.samples", "must be positive"));
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<(), CliError> {
        self.sweep.validate().map_err(|e| bad("sweep", e.to_string()))?;
        let d = &self.divergence;
        if d.enabled {
            check_dim("divergence.dim", d.dim)?;
            check_interval("divergence.interval", d.interval)?;
            if d.interval[0] == d.interval[1] {
                return Err(bad("divergence.interval", "needs f < g"));
            }
            for &s in &d.orders {
                if !(0.4..=0.4999).contains(&s) {
                    return Err(bad("divergence.orders", format!("s = {s} outside [0.4, 0.4999]")));
                }
            }
        }
        Ok(())
    }

    pub fn validate_flow(&self) -> Result<(), CliError> {
        let f = &self.flow;
        check_dim("flow.dim", f.dim)?;
        if !(f.horizon > 0.0) {
            return Err(bad("flow.horizon", "must be positive"));
        }
        if !(f.delta >= 0.0) {
            return Err(bad("flow.delta", "must be nonnegative"));
        }
        if !(f.eps > 0.0) {
            return Err(bad("flow.eps", "must be positive"));
        }
        if f.seeds < 2 {
            return Err(bad("flow.seeds", "need at least two seeds"));
        }
        if !(f.tol > 0.0) {
            return Err(bad("flow.tol", "must be positive"));
        }
        Ok(())
    }

    pub fn validate_norm(&self) -> Result<(), CliError> {
        let n = &self.norm;
        check_dim("norm.dim", n.dim)?;
        check_interval("norm.interval", n.interval)?;
        check_order("norm.s", n.s)?;
        if n.grid_points > 0 && !(n.pad > 1.0) {
            return Err(bad("norm.pad", "must exceed 1"));
        }
        Ok(())
    }

    pub fn validate_ft_check(&self) -> Result<(), CliError> {
        let c = &self.ft_check;
        check_dim("ft_check.dim", c.dim)?;
        check_interval("ft_check.interval", c.interval)?;
        if c.frequencies.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(bad("ft_check.frequencies", "must be finite and positive"));
        }
        if !(c.tol > 0.0) {
            return Err(bad("ft_check.tol", "must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::parse("seed = 3\n[sweep]\norders = [0.1]\n[sweep.family]\nkind = \"sweep\"\nstart = 1.2\nend = 1.8\nspeed = 2.0\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.sweep.orders, vec![0.1]);
        assert!(matches!(cfg.sweep.family, ScheduleFamily::Sweep { .. }));
        assert_eq!(cfg.flow, FlowConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse("sed = 3\n").is_err());
    }

    #[test]
    fn validation_names_fields() {
        let mut cfg = RunConfig::default();
        cfg.verify.orders = vec![0.6];
        let err = cfg.validate_verify().unwrap_err().to_string();
        assert!(err.contains("verify.orders") && err.contains("s < 1/2"), "{err}");
        cfg.norm.interval = [2.0, 1.0];
        assert!(cfg.validate_norm().unwrap_err().to_string().contains("norm.interval"));
        cfg.chart_c1 = 0.0;
        assert!(cfg.validate_common().is_err());
    }
}
