//! Run configuration: plain `key = value` lines grouped in sections.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cigar_core::minimizer::{FlowConfig, DEFAULT_C_GN};
use cigar_core::GridParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub mass: f64,
    pub omega: f64,
    /// Omega values of a sweep.
    pub omegas: Vec<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            mass: 8.0 * PI,
            omega: 1024.0,
            omegas: vec![64.0, 128.0, 256.0, 512.0, 1024.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub modes: usize,
    /// 0 selects the default rule for `modes`.
    pub quad_size: usize,
    pub axial_points: usize,
    pub half_length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            modes: 12,
            quad_size: 0,
            axial_points: 256,
            half_length: 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub tau: f64,
    pub tol_increment: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        let f = FlowConfig::default();
        FlowSection {
            tau: f.tau,
            tol_increment: f.tol_increment,
            tol_residual: f.tol_residual,
            max_iter: f.max_iter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub dt: f64,
    pub t_final: f64,
    /// Size of the perturbation added before `evolve`; 0 disables it.
    pub epsilon: f64,
    pub save_every: usize,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            dt: 1e-3,
            t_final: 1.0,
            epsilon: 0.0,
            save_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub c_gn: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            c_gn: DEFAULT_C_GN,
            seed: cigar_core::inequality::CORPUS_SEED,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub flow: FlowSection,
    pub dynamics: DynamicsSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// SHA-256 of the canonical text form. The output directory does not
    /// change results and is left out.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.run.out_dir = RunSection::default().out_dir;
        hex::encode(Sha256::digest(canonical.to_text().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("problem.mass", self.problem.mass),
            ("problem.omega", self.problem.omega),
            ("grid.half_length", self.grid.half_length),
            ("flow.tau", self.flow.tau),
            ("flow.tol_increment", self.flow.tol_increment),
            ("flow.tol_residual", self.flow.tol_residual),
            ("dynamics.dt", self.dynamics.dt),
            ("dynamics.t_final", self.dynamics.t_final),
            ("run.c_gn", self.run.c_gn),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.dynamics.epsilon >= 0.0 && self.dynamics.epsilon.is_finite()) {
            return Err(ConfigError::Invalid("dynamics.epsilon must be non-negative".into()));
        }
        if self.problem.omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(ConfigError::Invalid("problem.omegas must be positive".into()));
        }
        let counts = [
            ("grid.modes", self.grid.modes),
            ("grid.axial_points", self.grid.axial_points),
            ("flow.max_iter", self.flow.max_iter),
            ("dynamics.save_every", self.dynamics.save_every),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(ConfigError::Invalid(format!("{name} must be at least 1")));
            }
        }
        if !self.grid.axial_points.is_multiple_of(2) {
            return Err(ConfigError::Invalid("grid.axial_points must be even".into()));
        }
        Ok(())
    }

    pub fn grid_params(&self) -> GridParams {
        let mut p = GridParams::new(self.grid.modes, self.grid.half_length, self.grid.axial_points);
        if self.grid.quad_size > 0 {
            p.quad_size = self.grid.quad_size;
        }
        p
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            tau: self.flow.tau,
            tol_increment: self.flow.tol_increment,
            tol_residual: self.flow.tol_residual,
            max_iter: self.flow.max_iter,
            enforce_even: true,
            c_gn: self.run.c_gn,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::parse("[problem]\nomega = 256.0\n\n[run]\nseed = 3\n").unwrap();
        assert_eq!(cfg.problem.omega, 256.0);
        assert_eq!(cfg.run.seed, 3);
        assert_eq!(cfg.grid, GridSection::default());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(RunConfig::parse("[problem]\nmass = -1.0\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::parse("[grid]\naxial_points = 255\n"), Err(ConfigError::Invalid(_))));
        assert!(matches!(RunConfig::parse("[grid]\nbogus = 1\n"), Err(ConfigError::Parse(_))));
        assert!(matches!(RunConfig::parse("not toml at all ="), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.problem.omega = 512.0;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.run.out_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), c.hash());
    }
}
