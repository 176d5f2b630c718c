//! Run configuration: a sectioned key-value file (TOML) with fail-fast
//! parsing. Unknown keys are errors so that a config file always means what
//! it says.

use crate::coefficient::PExponent;
use crate::error::{Error, Result};
use crate::geometry::{InclusionShape, Point2};
use crate::grid_solver::{SolverSettings, Stencil};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// `p` values admit a number or the string "inf".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Num(f64),
    Sym(String),
}

impl PValue {
    pub fn to_exponent(&self) -> Result<PExponent> {
        match self {
            PValue::Num(v) => Ok(PExponent::Finite(*v)),
            PValue::Sym(s) if s == "inf" => Ok(PExponent::Infinite),
            PValue::Sym(s) => Err(Error::Config(format!(
                "p must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    #[serde(default = "default_shape_kind")]
    pub shape: String,
    #[serde(default = "default_center")]
    pub center: [f64; 2],
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub half_side: Option<f64>,
    #[serde(default)]
    pub vertices: Option<Vec<[f64; 2]>>,
}

fn default_shape_kind() -> String {
    "disk".into()
}

fn default_center() -> [f64; 2] {
    [0.5, 0.5]
}

impl Default for ShapeSection {
    fn default() -> Self {
        ShapeSection {
            shape: default_shape_kind(),
            center: default_center(),
            radius: None,
            half_side: None,
            vertices: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_p")]
    pub p: PValue,
    #[serde(default)]
    pub p_list: Option<Vec<PValue>>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub epsilon_list: Option<Vec<f64>>,
}

fn default_beta() -> f64 {
    2.0
}

fn default_p() -> PValue {
    PValue::Sym("inf".into())
}

fn default_epsilon() -> f64 {
    1.0
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            beta: default_beta(),
            p: default_p(),
            p_list: None,
            epsilon: default_epsilon(),
            epsilon_list: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_nodes_per_cell")]
    pub nodes_per_cell: u32,
    #[serde(default = "default_stencil")]
    pub stencil: String,
    #[serde(default = "default_padding")]
    pub padding_cells: f64,
}

fn default_nodes_per_cell() -> u32 {
    64
}

fn default_stencil() -> String {
    "n16".into()
}

fn default_padding() -> f64 {
    1.0
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            nodes_per_cell: default_nodes_per_cell(),
            stencil: default_stencil(),
            padding_cells: default_padding(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Inclusive [k_min, k_max] sequence index range.
    #[serde(default = "default_k_range")]
    pub k_range: [u32; 2],
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_r_list", rename = "R_list")]
    pub r_list: Vec<f64>,
}

fn default_k_range() -> [u32; 2] {
    [1, 12]
}

fn default_n_pairs() -> usize {
    100
}

fn default_directions() -> usize {
    8
}

fn default_r_list() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            k_range: default_k_range(),
            n_pairs: default_n_pairs(),
            directions: default_directions(),
            r_list: default_r_list(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub emit_svg: bool,
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            out_dir: default_out_dir(),
            emit_svg: false,
        }
    }
}

/// The full run configuration with defaults applied.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shape: ShapeSection,
    #[serde(default)]
    pub metric: MetricSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn shape(&self) -> Result<InclusionShape> {
        let center = Point2::new(self.shape.center[0], self.shape.center[1]);
        match self.shape.shape.as_str() {
            "disk" => InclusionShape::disk(center, self.shape.radius.unwrap_or(0.25)),
            "square" => {
                let h = self.shape.half_side.unwrap_or(0.2);
                InclusionShape::square(center, h)
            }
            "polygon" => {
                let verts = self
                    .shape
                    .vertices
                    .as_ref()
                    .ok_or_else(|| Error::Config("polygon needs `vertices`".into()))?;
                InclusionShape::convex_polygon(
                    verts.iter().map(|v| Point2::new(v[0], v[1])).collect(),
                )
            }
            other => Err(Error::Config(format!(
                "unknown shape \"{other}\" (expected disk, square or polygon)"
            ))),
        }
    }

    pub fn stencil(&self) -> Result<Stencil> {
        match self.solver.stencil.as_str() {
            "n8" => Ok(Stencil::N8),
            "n16" => Ok(Stencil::N16),
            other => Err(Error::Config(format!(
                "unknown stencil \"{other}\" (expected n8 or n16)"
            ))),
        }
    }

    pub fn solver_settings(&self) -> Result<SolverSettings> {
        Ok(SolverSettings {
            nodes_per_cell: self.solver.nodes_per_cell,
            stencil: self.stencil()?,
            padding_cells: self.solver.padding_cells,
        })
    }

    pub fn p_exponent(&self) -> Result<PExponent> {
        self.metric.p.to_exponent()
    }

    pub fn p_list(&self) -> Result<Vec<PExponent>> {
        match &self.metric.p_list {
            Some(list) => list.iter().map(|v| v.to_exponent()).collect(),
            None => Ok(vec![
                PExponent::Finite(0.5),
                PExponent::Finite(1.0),
                PExponent::Finite(2.0),
                PExponent::Infinite,
            ]),
        }
    }

    pub fn epsilon_list(&self) -> Vec<f64> {
        self.metric.epsilon_list.clone().unwrap_or_else(|| {
            vec![1.0 / 3.0, 1.0 / 5.0, 1.0 / 9.0, 1.0 / 17.0, 1.0 / 33.0]
        })
    }

    /// Stable hash of the effective configuration, recorded in output
    /// headers for reproducibility. The output section is excluded: it names
    /// the destination, not the computation.
    pub fn hash(&self) -> u64 {
        let mut view = self.clone();
        view.output = OutputSection::default();
        let canonical = toml::to_string(&view).unwrap_or_default();
        fnv1a64(canonical.as_bytes())
    }
}

/// FNV-1a, stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
