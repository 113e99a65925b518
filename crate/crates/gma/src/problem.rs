//! Problem files: JSON with the polytope, the density and the vertex values.
//!
//! ```json
//! { "dimension": 2,
//!   "facets": [{"normal": [1, 0], "offset": 0}, {"normal": [0, 1], "offset": 0},
//!              {"normal": [-1, -1], "offset": -1}],
//!   "names": ["x1", "x2", "diag"],
//!   "density": {"kind": "constant", "value": 1},
//!   "vertex_values": "guillemin" }
//! ```
//!
//! A facet is `l(x) = normal·x − offset ≥ 0`.

use std::fs;
use std::path::Path;

use gma_core::guillemin::{guillemin_value, DensitySpec};
use gma_core::{build_polytope, AffineFunctional, Density, Polytope};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Global solves are limited to this dimension.
pub const MAX_DIMENSION: usize = 4;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FacetSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub powers: Vec<u32>,
    pub coef: f64,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityFile {
    Constant {
        value: f64,
    },
    Polynomial {
        terms: Vec<Term>,
    },
    #[default]
    Guillemin,
    /// `h_G·(1 + c∏lᵢ)`.
    Perturbed {
        c: f64,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum VertexValues {
    /// `"guillemin"` takes `u_G` at the vertices, `"zero"` takes 0.
    Rule(String),
    Values(Vec<f64>),
}

impl Default for VertexValues {
    fn default() -> Self {
        VertexValues::Rule("guillemin".into())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub facets: Vec<FacetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(default)]
    pub density: DensityFile,
    #[serde(default)]
    pub vertex_values: VertexValues,
    /// Geometric tolerance for vertex enumeration; derived from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// A validated problem, ready for the numerics.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub polytope: Polytope,
    pub density: Density,
    pub vertex_values: Vec<f64>,
}

fn schema(msg: String) -> CliError {
    CliError::Parse(format!("schema: {msg}"))
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("problem file: {e}")))?;
        file.check_schema()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Shape checks that need no geometry.
    pub fn check_schema(&self) -> Result<(), CliError> {
        let n = self.dimension;
        if n == 0 || n > MAX_DIMENSION {
            return Err(schema(format!("dimension must be in 1..={MAX_DIMENSION}, got {n}")));
        }
        if self.facets.len() < n + 1 {
            return Err(schema(format!("need at least {} facets in dimension {n}, got {}", n + 1, self.facets.len())));
        }
        for (i, f) in self.facets.iter().enumerate() {
            if f.normal.len() != n {
                return Err(schema(format!("facet {i}: normal has {} entries, expected {n}", f.normal.len())));
            }
            if !f.offset.is_finite() || f.normal.iter().any(|v| !v.is_finite()) {
                return Err(schema(format!("facet {i}: non-finite coefficient")));
            }
        }
        if let Some(names) = &self.names {
            if names.len() != self.facets.len() {
                return Err(schema(format!("{} names for {} facets", names.len(), self.facets.len())));
            }
        }
        match &self.density {
            DensityFile::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                return Err(schema(format!("constant density must be positive, got {value}")));
            }
            DensityFile::Polynomial { terms } => {
                if terms.is_empty() {
                    return Err(schema("polynomial density has no terms".into()));
                }
                for (j, t) in terms.iter().enumerate() {
                    if t.powers.len() != n || !t.coef.is_finite() {
                        return Err(schema(format!("polynomial term {j}: needs {n} powers and a finite coefficient")));
                    }
                }
            }
            DensityFile::Perturbed { c } if !c.is_finite() => return Err(schema("perturbation c is not finite".into())),
            _ => {}
        }
        match &self.vertex_values {
            VertexValues::Rule(r) if r != "guillemin" && r != "zero" => {
                Err(schema(format!("vertex_values must be \"guillemin\", \"zero\" or an array, got \"{r}\"")))
            }
            VertexValues::Values(v) if v.iter().any(|x| !x.is_finite()) => Err(schema("non-finite vertex value".into())),
            _ => Ok(()),
        }
    }

    pub fn density_spec(&self) -> DensitySpec {
        match &self.density {
            DensityFile::Constant { value } => DensitySpec::Constant(*value),
            DensityFile::Polynomial { terms } => DensitySpec::Polynomial(terms.iter().map(|t| (t.powers.clone(), t.coef)).collect()),
            DensityFile::Guillemin => DensitySpec::Guillemin,
            DensityFile::Perturbed { c } => DensitySpec::Perturbed { c: *c },
        }
    }

    /// Builds the polytope and density. Simplicity and compatibility are checked separately.
    pub fn build(self) -> Result<Problem, CliError> {
        let facets = self.facets.iter().map(|f| AffineFunctional::new(f.normal.clone(), f.offset)).collect();
        let polytope = build_polytope(facets, self.tau).map_err(|e| CliError::Validation(format!("polytope: {e}")))?;
        let density = self.density_spec().build(&polytope);
        let nv = polytope.vertices().len();
        let vertex_values = match &self.vertex_values {
            VertexValues::Rule(r) if r == "zero" => vec![0.0; nv],
            VertexValues::Rule(_) => polytope.vertices().iter().map(|v| guillemin_value(polytope.facets(), &v.point)).collect(),
            VertexValues::Values(v) if v.len() == nv => v.clone(),
            VertexValues::Values(v) => {
                return Err(CliError::Validation(format!("{} vertex values given, the polytope has {nv} vertices", v.len())))
            }
        };
        Ok(Problem { file: self, polytope, density, vertex_values })
    }
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        ProblemFile::load(path)?.build()
    }

    pub fn facet_name(&self, i: usize) -> String {
        self.file.names.as_ref().map(|n| n[i].clone()).unwrap_or_else(|| format!("l{i}"))
    }
}
