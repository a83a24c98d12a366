use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cheeger::{ClusterSweepOptions, MAX_EXACT_VERTICES};
use crate::error::{Error, Result};
use crate::manifold::generators::{revolution_segments, MAX_ICOSPHERE_LEVEL};
use crate::spectral::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Riccati,
    CheegerBound,
    Spectral,
    Lemma31,
    Buser,
    Tube,
    Prop25,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::Riccati,
        ExperimentId::CheegerBound,
        ExperimentId::Spectral,
        ExperimentId::Lemma31,
        ExperimentId::Buser,
        ExperimentId::Tube,
        ExperimentId::Prop25,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Riccati => "riccati",
            ExperimentId::CheegerBound => "cheeger-bound",
            ExperimentId::Spectral => "spectral",
            ExperimentId::Lemma31 => "lemma31",
            ExperimentId::Buser => "buser",
            ExperimentId::Tube => "tube",
            ExperimentId::Prop25 => "prop25",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Config(format!("unknown report format {s:?}"))),
        }
    }
}

/// Where and how results are written. Not part of the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: ReportFormat,
    pub svg: bool,
    /// Write the generated meshes as OFF files next to the report.
    pub export_meshes: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("cheeger-lab-out"),
            format: ReportFormat::Json,
            svg: false,
            export_meshes: false,
        }
    }
}

/// Eigensolver settings; the seed comes from [`ExperimentConfig::seed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub dense_threshold: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub cluster_tolerance: f64,
    /// Largest eigenvalue cluster handed to the sweep.
    pub cluster_max: usize,
    pub sweep_samples: usize,
    pub sweep_refine_starts: usize,
    pub sweep_refine_budget: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let s = SolverConfig::default();
        let c = ClusterSweepOptions::default();
        Self {
            dense_threshold: s.dense_threshold,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            cluster_tolerance: s.cluster_tolerance,
            cluster_max: 4,
            sweep_samples: c.samples,
            sweep_refine_starts: c.refine_starts,
            sweep_refine_budget: c.refine_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiccatiConfig {
    pub cases: usize,
    pub samples: usize,
    pub step: f64,
    /// Sample times stay this far below the existence time.
    pub inset: f64,
    /// Sampling window when the solution exists for all time.
    pub horizon: f64,
    pub n_max: usize,
    pub k_max: f64,
    pub h_max: f64,
    pub tolerance: f64,
    pub constant_cases: usize,
    pub constant_tolerance: f64,
}

impl Default for RiccatiConfig {
    fn default() -> Self {
        Self {
            cases: 1000,
            samples: 100,
            step: 1e-5,
            inset: 1e-3,
            horizon: 10.0,
            n_max: 6,
            k_max: 4.0,
            h_max: 5.0,
            tolerance: 1e-8,
            constant_cases: 100,
            constant_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheegerBoundConfig {
    pub graphs: usize,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub slack: f64,
}

impl Default for CheegerBoundConfig {
    fn default() -> Self {
        Self {
            graphs: 200,
            min_vertices: 4,
            max_vertices: 12,
            slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub icosphere_level: usize,
    pub torus_grid: usize,
    /// Extra OFF meshes; measured, not checked.
    pub meshes: Vec<PathBuf>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            icosphere_level: 4,
            torus_grid: 64,
            meshes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma31Config {
    /// Samples per manifold and seed.
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub icosphere_level: usize,
    pub torus_grid: usize,
    pub dumbbell_neck: f64,
    pub dumbbell_level: usize,
    pub dumbbell_k: f64,
    /// Allowed ratio between the per-seed minima.
    pub stability_factor: f64,
    pub include_sqrt_k: bool,
}

impl Default for Lemma31Config {
    fn default() -> Self {
        Self {
            samples: 100,
            r_min: 0.05,
            r_max: PI / 6.0,
            icosphere_level: 3,
            torus_grid: 32,
            dumbbell_neck: 0.3,
            dumbbell_level: 2,
            dumbbell_k: 1.0,
            stability_factor: 2.0,
            include_sqrt_k: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuserConfig {
    pub necks: Vec<f64>,
    pub dumbbell_level: usize,
    /// Curvature bound used for the dumbbell, whose Ricci curvature is
    /// negative along the neck.
    pub k: f64,
    pub epsilons: Vec<f64>,
    /// ε used for the family spread check.
    pub epsilon: f64,
    pub max_spread: f64,
    /// Icosphere level of the equator reference run; 0 skips it.
    pub sphere_level: usize,
    pub sphere_epsilon: f64,
}

impl Default for BuserConfig {
    fn default() -> Self {
        Self {
            necks: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            dumbbell_level: 3,
            k: 1.0,
            epsilons: vec![0.05, 0.1, 0.2],
            epsilon: 0.1,
            max_spread: 5.0,
            sphere_level: 4,
            sphere_epsilon: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub icosphere_level: usize,
    pub torus_grid: usize,
    pub bins: usize,
    /// Bins for the monotonicity scan of `f`; wider than two mesh edges.
    pub monotone_bins: usize,
    pub band_t: f64,
}

impl Default for TubeConfig {
    fn default() -> Self {
        Self {
            icosphere_level: 4,
            torus_grid: 64,
            bins: 32,
            monotone_bins: 8,
            band_t: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Prop25Config {
    pub disk_rings: usize,
    pub cap_rings: usize,
    pub cap_segments: usize,
    pub k: f64,
    /// Relative tolerance on `C₀`, against `max(|analytic|, 1)`.
    pub tolerance: f64,
    /// Disk ring counts for the refinement scan.
    pub refinement: Vec<usize>,
}

impl Default for Prop25Config {
    fn default() -> Self {
        Self {
            disk_rings: 32,
            cap_rings: 64,
            cap_segments: 64,
            k: 0.0,
            tolerance: 0.1,
            refinement: vec![8, 16, 32],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub experiments: Vec<ExperimentId>,
    pub solver: SolverSettings,
    pub riccati: RiccatiConfig,
    pub cheeger_bound: CheegerBoundConfig,
    pub spectral: SpectralConfig,
    pub lemma31: Lemma31Config,
    pub buser: BuserConfig,
    pub tube: TubeConfig,
    pub prop25: Prop25Config,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            experiments: ExperimentId::ALL.to_vec(),
            solver: SolverSettings::default(),
            riccati: RiccatiConfig::default(),
            cheeger_bound: CheegerBoundConfig::default(),
            spectral: SpectralConfig::default(),
            lemma31: Lemma31Config::default(),
            buser: BuserConfig::default(),
            tube: TubeConfig::default(),
            prop25: Prop25Config::default(),
            output: OutputConfig::default(),
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    ensure(x > 0.0 && x.is_finite(), || {
        format!("{name} = {x} must be positive and finite")
    })
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    ensure(x >= 0.0 && x.is_finite(), || {
        format!("{name} = {x} must be >= 0 and finite")
    })
}

fn icosphere_level(name: &str, level: usize) -> Result<()> {
    ensure(level <= MAX_ICOSPHERE_LEVEL, || {
        format!("{name} = {level} exceeds the icosphere limit {MAX_ICOSPHERE_LEVEL}")
    })
}

fn torus_grid(name: &str, n: usize) -> Result<()> {
    ensure((3..=1024).contains(&n), || format!("{name} = {n} must lie in 3..=1024"))
}

fn dumbbell(name: &str, neck: f64, level: usize) -> Result<()> {
    ensure(level <= 5, || format!("{name}: dumbbell level {level} exceeds 5"))?;
    ensure(neck > 0.0 && neck <= 1.0, || {
        format!("{name}: neck_scale {neck} must lie in (0, 1]")
    })?;
    let resolution = 2.0 * PI / revolution_segments(level) as f64;
    ensure(neck >= 0.5 * resolution, || {
        format!("{name}: neck_scale {neck} is thinner than the level-{level} resolution {resolution:.4}")
    })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dense_threshold: self.solver.dense_threshold,
            seed: self.seed,
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            cluster_tolerance: self.solver.cluster_tolerance,
        }
    }

    pub fn sweep_options(&self) -> ClusterSweepOptions {
        ClusterSweepOptions {
            samples: self.solver.sweep_samples,
            refine_starts: self.solver.sweep_refine_starts,
            refine_budget: self.solver.sweep_refine_budget,
            seed: self.seed,
        }
    }

    /// SHA-256 of the canonical JSON form, without the output section.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let bytes = serde_json::to_vec(&value).expect("value serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Checks every parameter before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for id in &self.experiments {
            ensure(!seen.contains(id), || format!("experiment {id} listed twice"))?;
            seen.push(*id);
        }

        let s = &self.solver;
        ensure(s.dense_threshold >= 2, || "solver.dense_threshold must be >= 2".into())?;
        positive("solver.tolerance", s.tolerance)?;
        ensure(s.max_iterations >= 1, || "solver.max_iterations must be >= 1".into())?;
        positive("solver.cluster_tolerance", s.cluster_tolerance)?;
        ensure(s.cluster_max >= 1, || "solver.cluster_max must be >= 1".into())?;

        let r = &self.riccati;
        ensure(r.cases >= 1 && r.samples >= 1, || {
            "riccati.cases and riccati.samples must be >= 1".into()
        })?;
        positive("riccati.step", r.step)?;
        positive("riccati.inset", r.inset)?;
        positive("riccati.horizon", r.horizon)?;
        ensure(r.horizon / r.step <= 1e8, || {
            "riccati.horizon / riccati.step exceeds 1e8 steps".into()
        })?;
        ensure(r.n_max >= 2, || "riccati.n_max must be >= 2".into())?;
        nonnegative("riccati.k_max", r.k_max)?;
        nonnegative("riccati.h_max", r.h_max)?;
        positive("riccati.tolerance", r.tolerance)?;
        positive("riccati.constant_tolerance", r.constant_tolerance)?;

        let c = &self.cheeger_bound;
        ensure(c.graphs >= 1, || "cheeger_bound.graphs must be >= 1".into())?;
        ensure(
            2 <= c.min_vertices && c.min_vertices <= c.max_vertices && c.max_vertices <= MAX_EXACT_VERTICES,
            || format!("cheeger_bound vertex range must satisfy 2 <= min <= max <= {MAX_EXACT_VERTICES}"),
        )?;
        nonnegative("cheeger_bound.slack", c.slack)?;

        icosphere_level("spectral.icosphere_level", self.spectral.icosphere_level)?;
        torus_grid("spectral.torus_grid", self.spectral.torus_grid)?;
        for p in &self.spectral.meshes {
            ensure(p.is_file(), || {
                format!("spectral.meshes: {} is not a file", p.display())
            })?;
        }

        let l = &self.lemma31;
        ensure(l.samples >= 1, || "lemma31.samples must be >= 1".into())?;
        positive("lemma31.r_min", l.r_min)?;
        positive("lemma31.r_max", l.r_max)?;
        ensure(l.r_min <= l.r_max, || {
            "lemma31.r_min must not exceed lemma31.r_max".into()
        })?;
        icosphere_level("lemma31.icosphere_level", l.icosphere_level)?;
        torus_grid("lemma31.torus_grid", l.torus_grid)?;
        dumbbell("lemma31", l.dumbbell_neck, l.dumbbell_level)?;
        nonnegative("lemma31.dumbbell_k", l.dumbbell_k)?;
        ensure(l.stability_factor >= 1.0, || {
            "lemma31.stability_factor must be >= 1".into()
        })?;

        let b = &self.buser;
        ensure(!b.necks.is_empty(), || "buser.necks must not be empty".into())?;
        for &neck in &b.necks {
            dumbbell("buser", neck, b.dumbbell_level)?;
        }
        nonnegative("buser.k", b.k)?;
        for &e in &b.epsilons {
            positive("buser.epsilons", e)?;
        }
        positive("buser.epsilon", b.epsilon)?;
        ensure(b.max_spread >= 1.0, || "buser.max_spread must be >= 1".into())?;
        icosphere_level("buser.sphere_level", b.sphere_level)?;
        positive("buser.sphere_epsilon", b.sphere_epsilon)?;

        let t = &self.tube;
        icosphere_level("tube.icosphere_level", t.icosphere_level)?;
        torus_grid("tube.torus_grid", t.torus_grid)?;
        ensure(t.bins >= 4, || format!("tube.bins = {} must be >= 4", t.bins))?;
        ensure(t.monotone_bins >= 4, || {
            format!("tube.monotone_bins = {} must be >= 4", t.monotone_bins)
        })?;
        positive("tube.band_t", t.band_t)?;

        let p = &self.prop25;
        for (name, rings) in [("prop25.disk_rings", p.disk_rings), ("prop25.cap_rings", p.cap_rings)] {
            ensure((1..=512).contains(&rings), || {
                format!("{name} = {rings} must lie in 1..=512")
            })?;
        }
        ensure((3..=4096).contains(&p.cap_segments), || {
            "prop25.cap_segments must lie in 3..=4096".into()
        })?;
        for &rings in &p.refinement {
            ensure((1..=512).contains(&rings), || {
                format!("prop25.refinement entry {rings} must lie in 1..=512")
            })?;
        }
        nonnegative("prop25.k", p.k)?;
        positive("prop25.tolerance", p.tolerance)?;
        Ok(())
    }
}
