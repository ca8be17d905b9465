use serde::{Deserialize, Serialize};

use dissipair::lattice::{LatticeGeometry, SshConvention};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipator: Option<DissipatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    PlusFirst,
    MinusFirst,
}

impl From<Convention> for SshConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::PlusFirst => SshConvention::PlusFirst,
            Convention::MinusFirst => SshConvention::MinusFirst,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Ssh {
        n: usize,
        alpha: f64,
        #[serde(default = "one")]
        j: f64,
        #[serde(default)]
        convention: Convention,
        #[serde(default)]
        sigma: f64,
    },
    Hofstadter {
        nx: usize,
        ny: usize,
        #[serde(default)]
        cylinder: bool,
    },
    ThreeMode {
        j1: f64,
        j2: f64,
    },
    Dimer {
        j: f64,
        #[serde(default)]
        delta: f64,
    },
}

/// A site as a flat index or as lattice coordinates `[m, n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Site {
    Index(usize),
    Coords([usize; 2]),
}

impl Site {
    pub fn resolve(self, geometry: &LatticeGeometry) -> Result<usize, String> {
        let i = match self {
            Site::Index(i) => i,
            Site::Coords([m, n]) => {
                if m >= geometry.nx || n >= geometry.ny {
                    return Err(format!("site [{m}, {n}] lies outside the {}x{} lattice", geometry.nx, geometry.ny));
                }
                geometry.index(m, n)
            }
        };
        if i >= geometry.n_sites() {
            return Err(format!("site {i} lies outside a lattice of {} sites", geometry.n_sites()));
        }
        Ok(i)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorConfig {
    pub site0: Site,
    pub site1: Site,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// `η / η_c`, with `η_c` computed for the configured lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_ratio: Option<f64>,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default)]
    pub mirrored: bool,
    #[serde(default)]
    pub comparator: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default)]
    pub spiral: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        if self.points == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(format!("invalid range {self:?}"));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.start + step * i as f64).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityTask {
    /// `J1/J2` axis; `J̄ = √(J1² + J2²)` is fixed by `j_bar`.
    pub ratio: Range,
    pub eta: Range,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub j_bar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SteadyTask {
    #[serde(default)]
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Bogoliubov,
    Lyapunov,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntanglementTask {
    /// Number of cut angles in `[0, π)`.
    pub angles: usize,
    /// Square sizes for the entropy-vs-size series.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    /// Placement for the size series: `[dm, n]` with `m = N/2 + dm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub site0: [i64; 2],
    pub site1: [i64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderTask {
    pub alphas: Vec<f64>,
    pub sigmas: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

fn default_realizations() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumTask {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    #[serde(default)]
    pub waveguide_site: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<OmegaGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_sweep: Option<Range>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGrid {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapTask {
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpTask {
    pub sets: Vec<EpSet>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    400
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationKind {
    Correlated,
    Uncorrelated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpSet {
    pub kappa: f64,
    pub j1: f64,
    #[serde(default)]
    pub j2: f64,
    #[serde(default)]
    pub delta: f64,
    pub dissipation: DissipationKind,
    #[serde(default)]
    pub eta_min: f64,
    #[serde(default = "default_eta_max")]
    pub eta_max: f64,
}

fn default_eta_max() -> f64 {
    0.99
}
