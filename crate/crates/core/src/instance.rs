//! JSON problem specifications.
//!
//! Complex numbers are `[re, im]`; matrices are arrays of rows.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::linrel::LinearRelation;
use crate::resolvent::{build_c1, GridSpec, RegionParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub type JsonMatrix = Vec<Vec<Complex64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    /// `data` is the `2n x k` graph basis
    Graph,
    /// `data` is the `n x n` matrix
    Matrix,
    /// `data` is `[B, L]`, the relation `{(Bx, Lx)}`
    Pencil,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub n: usize,
    pub kind: RelationKind,
    pub data: serde_json::Value,
}

/// Numeric defaults shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Defaults {
    /// threshold for purely algebraic identities
    pub tol_alg: f64,
    /// threshold for identities built on quadrature
    pub tol_quad: f64,
    /// threshold for identities involving finite differences
    pub tol_fd: f64,
    /// threshold for the `t -> 0` limit
    pub tol_limit: f64,
    pub samples: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub cert_bound: f64,
    pub gamma: f64,
    pub times: Vec<f64>,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            tol_alg: 1e-8,
            tol_quad: 1e-6,
            tol_fd: 1e-4,
            tol_limit: 1e-3,
            samples: 6,
            seed: 0,
            grid: GridSpec::default(),
            cert_bound: 10.0,
            gamma: 0.25,
            times: vec![0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub relation: RelationSpec,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<JsonMatrix>,
    pub region: RegionParams,
    #[serde(default)]
    pub defaults: Defaults,
}

pub fn matrix_from_json(rows: &JsonMatrix, what: &str) -> Result<CMat> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse(format!("{what}: ragged rows")));
    }
    Ok(CMat::from_fn(nr, nc, |i, j| rows[i][j]))
}

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn parse_matrix(v: &serde_json::Value, what: &str) -> Result<CMat> {
    let rows: JsonMatrix = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("{what}: {e}")))?;
    matrix_from_json(&rows, what)
}

fn check_shape(m: &CMat, r: usize, c: usize, what: &str) -> Result<()> {
    if m.nrows() != r || m.ncols() != c {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {r}x{c}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

impl RelationSpec {
    pub fn build(&self) -> Result<LinearRelation> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidParams("relation dimension must be positive".into()));
        }
        match self.kind {
            RelationKind::Matrix => {
                let m = parse_matrix(&self.data, "relation.data")?;
                check_shape(&m, n, n, "relation matrix")?;
                LinearRelation::from_matrix(&m)
            }
            RelationKind::Graph => {
                let g = parse_matrix(&self.data, "relation.data")?;
                if g.nrows() == 0 {
                    return Ok(LinearRelation::zero_relation(n));
                }
                if g.nrows() != 2 * n {
                    return Err(Error::DimensionMismatch(format!("graph has {} rows, expected {}", g.nrows(), 2 * n)));
                }
                LinearRelation::from_graph(&g)
            }
            RelationKind::Pencil => {
                let parts = self
                    .data
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::Parse("pencil data must be [B, L]".into()))?;
                let b = parse_matrix(&parts[0], "pencil B")?;
                let l = parse_matrix(&parts[1], "pencil L")?;
                check_shape(&b, n, n, "pencil B")?;
                check_shape(&l, n, n, "pencil L")?;
                LinearRelation::from_pencil(&b, &l)
            }
        }
    }
}

/// A loaded problem: relation, regularizer, `C1` and region.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: ProblemSpec,
    pub a: LinearRelation,
    pub c: CMat,
    pub c1: CMat,
    pub region: RegionParams,
}

impl Instance {
    pub fn from_spec(spec: ProblemSpec) -> Result<Self> {
        let a = spec.relation.build()?;
        let n = a.dim();
        let c = match &spec.c {
            Some(rows) => {
                let m = matrix_from_json(rows, "C")?;
                check_shape(&m, n, n, "C")?;
                m
            }
            None => CMat::identity(n, n),
        };
        spec.region.validate()?;
        Self::assemble(spec, a, c)
    }

    /// Build from in-memory parts.
    pub fn new(a: LinearRelation, c: CMat, region: RegionParams, defaults: Defaults) -> Result<Self> {
        check_shape(&c, a.dim(), a.dim(), "C")?;
        region.validate()?;
        let spec = ProblemSpec {
            relation: RelationSpec {
                n: a.dim(),
                kind: RelationKind::Graph,
                data: serde_json::to_value(matrix_to_json(a.graph()))?,
            },
            c: Some(matrix_to_json(&c)),
            region,
            defaults,
        };
        Self::assemble(spec, a, c)
    }

    fn assemble(spec: ProblemSpec, a: LinearRelation, c: CMat) -> Result<Self> {
        let region = spec.region;
        let c1 = build_c1(&a, &c, &region)?;
        Ok(Instance { spec, a, c, c1, region })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(text)?)
    }

    pub fn defaults(&self) -> &Defaults {
        &self.spec.defaults
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `A + eps I` with `C1` rebuilt for the shifted relation.
    pub fn perturbed(&self, eps: f64) -> Result<Self> {
        let a = self.a.scalar_shift_mul(Complex64::new(1.0, 0.0), Complex64::new(eps, 0.0));
        let c1 = build_c1(&a, &self.c, &self.region)?;
        Ok(Instance {
            spec: self.spec.clone(),
            a,
            c: self.c.clone(),
            c1,
            region: self.region,
        })
    }
}

/// Defaults block read from a `--config` file.
pub fn load_defaults(path: &Path) -> Result<Defaults> {
    Ok(serde_json::from_value(read_defaults_block(path)?)?)
}

fn read_defaults_block(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    Ok(v.get("defaults").cloned().unwrap_or(v))
}

/// `base` with every key present in `patch` replaced.
pub fn overlay_defaults(base: &Defaults, patch: &serde_json::Value) -> Result<Defaults> {
    let mut v = serde_json::to_value(base)?;
    let (Some(dst), Some(src)) = (v.as_object_mut(), patch.as_object()) else {
        return Err(Error::Parse("defaults block must be an object".into()));
    };
    for (k, val) in src {
        dst.insert(k.clone(), val.clone());
    }
    Ok(serde_json::from_value(v)?)
}

impl Instance {
    /// Apply a `--config` file on top of the instance defaults.
    pub fn apply_config(&mut self, path: &Path) -> Result<()> {
        let patch = read_defaults_block(path)?;
        self.spec.defaults = overlay_defaults(&self.spec.defaults, &patch)?;
        Ok(())
    }
}
