use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ah_metric::AHFamily;
use crate::embed_h3::Branch;
use crate::error::{Error, Result};
use crate::lorentz::SpinorParameter;
use crate::quadrature::QuadratureGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub eps0: f64,
    pub q: f64,
    pub n: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            eps0: 0.2,
            q: std::f64::consts::FRAC_1_SQRT_2,
            n: 8,
        }
    }
}

impl Schedule {
    pub fn epsilons(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.eps0 * self.q.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_phi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted `|Ẽ - E| + |G̃ - G|` of an embedding.
    pub isometry: f64,
    /// Largest accepted `|<<X, X>> + 1|`.
    pub hyperboloid: f64,
    /// Largest accepted Minkowski-identity residual relative to `max F`.
    pub minkowski_identity: f64,
    /// Fitted `|∫ Δ F/(H+2)|` limit relative to its first value, with an
    /// absolute floor.
    pub funclim_ratio: f64,
    pub funclim_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            isometry: 1e-6,
            hyperboloid: 1e-9,
            minkowski_identity: 1e-7,
            funclim_ratio: 1e-3,
            funclim_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_prefix() -> String {
    "sweep".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchConfig {
    Plus,
    Minus,
}

impl From<BranchConfig> for Branch {
    fn from(b: BranchConfig) -> Self {
        match b {
            BranchConfig::Plus => Branch::Plus,
            BranchConfig::Minus => Branch::Minus,
        }
    }
}

/// How the `α` of the α-mass is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaConfig {
    Fixed(f64),
    /// `"from_radii"`: from the enclosing geodesic spheres of each surface.
    Named(AlphaRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    FromRadii,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: AHFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
    #[serde(default = "default_branch")]
    pub branch: BranchConfig,
    #[serde(default = "default_eta_samples")]
    pub eta_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaConfig>,
    /// `(Re z1, Im z1, Re z2, Im z2)` of the spinor used by the identity
    /// checks.
    #[serde(default = "default_spinor")]
    pub spinor: [f64; 4],
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_branch() -> BranchConfig {
    BranchConfig::Plus
}

fn default_eta_samples() -> usize {
    1024
}

fn default_spinor() -> [f64; 4] {
    [0.6, 0.2, 0.3, -0.5]
}

fn default_seed() -> u64 {
    20_240_917
}

impl SweepConfig {
    /// A config with the default schedule and tolerances.
    pub fn new(family: AHFamily, dir: impl Into<PathBuf>) -> Self {
        Self {
            family,
            epsilons: None,
            schedule: Some(Schedule::default()),
            grid: GridConfig { n_theta: 64, n_phi: 4 },
            tolerances: Tolerances::default(),
            output: OutputConfig {
                dir: dir.into(),
                prefix: default_prefix(),
            },
            branch: default_branch(),
            eta_samples: default_eta_samples(),
            alpha: None,
            spinor: default_spinor(),
            seed: default_seed(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn epsilons(&self) -> Vec<f64> {
        match (&self.epsilons, &self.schedule) {
            (Some(list), _) => list.clone(),
            (None, Some(s)) => s.epsilons(),
            (None, None) => Schedule::default().epsilons(),
        }
    }

    pub fn grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::new(self.grid.n_theta, self.grid.n_phi).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn spinor(&self) -> SpinorParameter {
        let [a, b, c, d] = self.spinor;
        SpinorParameter::from_reals(a, b, c, d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.family.validate().map_err(|e| Error::Config(e.to_string()))?;
        match (&self.epsilons, &self.schedule) {
            (Some(_), Some(_)) => return bad("give either `epsilons` or `schedule`, not both".into()),
            (None, None) => return bad("one of `epsilons` or `schedule` is required".into()),
            (None, Some(s)) => {
                if !(s.q > 0.0 && s.q < 1.0) {
                    return bad(format!("schedule ratio q = {} must lie in (0, 1)", s.q));
                }
                if s.n == 0 {
                    return bad("schedule needs n >= 1".into());
                }
            }
            (Some(_), None) => {}
        }
        let eps = self.epsilons();
        if eps.is_empty() {
            return bad("empty ε list".into());
        }
        let rho_max = self.family.rho_max();
        for e in &eps {
            if !(*e > 0.0 && *e <= rho_max) {
                return bad(format!("ε = {e} outside (0, {rho_max}]"));
            }
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("ε values must be strictly decreasing".into());
        }
        if self.grid.n_theta < 4 || self.grid.n_phi < 1 {
            return bad("grid needs n_theta >= 4 and n_phi >= 1".into());
        }
        if self.eta_samples == 0 {
            return bad("eta_samples must be positive".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("isometry", t.isometry),
            ("hyperboloid", t.hyperboloid),
            ("minkowski_identity", t.minkowski_identity),
            ("funclim_ratio", t.funclim_ratio),
            ("funclim_floor", t.funclim_floor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerances.{name} must be positive"));
            }
        }
        if let Some(AlphaConfig::Fixed(a)) = self.alpha {
            if !(a >= 1.0) {
                return bad(format!("alpha = {a} must be >= 1"));
            }
        }
        if self.spinor.iter().all(|v| *v == 0.0) || self.spinor.iter().any(|v| !v.is_finite()) {
            return bad("spinor parameter must be finite and nonzero".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "family": {"type": "ads_schwarzschild", "m": 1.0},
        "schedule": {"eps0": 0.2, "q": 0.5, "n": 4},
        "grid": {"n_theta": 32, "n_phi": 4},
        "tolerances": {"isometry": 1e-6, "hyperboloid": 1e-9, "minkowski_identity": 1e-7,
                       "funclim_ratio": 1e-3, "funclim_floor": 1e-8},
        "output": {"dir": "out"}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = SweepConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.epsilons(), vec![0.2, 0.1, 0.05, 0.025]);
        assert_eq!(cfg.eta_samples, 1024);
        assert_eq!(cfg.branch, BranchConfig::Plus);
        assert_eq!(cfg.output.prefix, "sweep");
    }

    #[test]
    fn default_schedule() {
        let e = Schedule::default().epsilons();
        assert_eq!(e.len(), 8);
        assert!((e[7] - 0.2 * 0.5f64.powf(3.5)).abs() < 1e-15);
    }

    #[test]
    fn alpha_forms() {
        let with = |a: &str| MINIMAL.replace(r#""output""#, &format!(r#""alpha": {a}, "output""#));
        let cfg = SweepConfig::from_json(&with("1.5")).unwrap();
        assert_eq!(cfg.alpha, Some(AlphaConfig::Fixed(1.5)));
        let cfg = SweepConfig::from_json(&with(r#""from_radii""#)).unwrap();
        assert_eq!(cfg.alpha, Some(AlphaConfig::Named(AlphaRule::FromRadii)));
        assert!(SweepConfig::from_json(&with("0.5")).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            MINIMAL.replace(r#""q": 0.5"#, r#""q": 1.5"#),
            MINIMAL.replace(r#""schedule": {"eps0": 0.2, "q": 0.5, "n": 4}"#, r#""epsilons": [0.1, 0.2]"#),
            MINIMAL.replace(r#""schedule": {"eps0": 0.2, "q": 0.5, "n": 4}"#, r#""epsilons": [0.9, 0.2]"#),
            MINIMAL.replace(r#""output": {"dir": "out"}"#, r#""extra": 1, "output": {"dir": "out"}"#),
            MINIMAL.replace(r#""isometry": 1e-6, "#, ""),
            MINIMAL.replace(r#""m": 1.0"#, r#""m": -1.0"#),
            MINIMAL.replace(r#""n_theta": 32"#, r#""n_theta": 2"#),
        ];
        for c in cases {
            assert!(matches!(SweepConfig::from_json(&c), Err(Error::Config(_))), "{c}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = SweepConfig::new(AHFamily::Hyperbolic, "x");
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SweepConfig::from_json(&text).unwrap(), cfg);
    }
}
