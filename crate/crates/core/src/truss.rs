//! Small-deformation planar trusses.
//!
//! Each member `i` carries a constant compatibility vector `b_i` over the
//! free degrees of freedom so that its axial strain is `ε_i = b_iᵀu`, and
//! its volume `v_i` weights the internal force `Σ v_i σ_i b_i` balanced
//! against the applied load.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::surrogate::{Constitutive, DomainError};

#[derive(Debug, Error)]
pub enum TrussError {
    #[error("cannot read truss config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid truss config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate member id `{0}`")]
    DuplicateMember(String),
    #[error("member `{member}` references unknown node `{node}`")]
    UnknownNode { member: String, node: String },
    #[error("load references unknown node `{0}`")]
    UnknownLoadNode(String),
    #[error("member `{0}` has zero length")]
    ZeroLength(String),
    #[error("member `{member}` has invalid area {area}")]
    InvalidArea { member: String, area: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("model has no free degrees of freedom")]
    NoFreeDofs,
    #[error("model has no members")]
    NoMembers,
    #[error("model is a mechanism: stiffness rank {rank} < {n_free} free dofs")]
    Mechanism { rank: usize, n_free: usize },
    #[error("invalid ten-bar parameter: {0}")]
    InvalidParameter(String),
    #[error("displacement vector has {got} entries, model has {expected} free dofs")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("member `{member}` strain {strain} outside surrogate domain [{lo}, {hi}]")]
    StrainOutOfDomain {
        member: String,
        strain: f64,
        lo: f64,
        hi: f64,
    },
}

impl TrussError {
    fn domain(member: &Member, e: DomainError) -> Self {
        TrussError::StrainOutOfDomain {
            member: member.id.clone(),
            strain: e.strain,
            lo: e.lo,
            hi: e.hi,
        }
    }
}

/// Node or member identifier; JSON accepts either a string or an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Id(pub String);

impl<'de> Deserialize<'de> for Id {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Int(i) => Id(i.to_string()),
            Raw::Text(s) => Id(s),
        })
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! id_from {
    ($($t:ty),*) => {
        $(impl From<$t> for Id {
            fn from(v: $t) -> Self {
                Id(v.to_string())
            }
        })*
    };
}

id_from!(i32, u32, usize, i64, &str, String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: Id,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub fixed_x: bool,
    #[serde(default)]
    pub fixed_y: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub id: Id,
    pub from: Id,
    pub to: Id,
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub node: Id,
    #[serde(default)]
    pub fx: f64,
    #[serde(default)]
    pub fy: f64,
}

/// JSON truss description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrussConfig {
    pub nodes: Vec<NodeSpec>,
    pub members: Vec<MemberSpec>,
    #[serde(default)]
    pub loads: Vec<LoadSpec>,
}

impl TrussConfig {
    pub fn from_json_str(text: &str) -> Result<Self, TrussError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrussError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| TrussError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Global free-dof index per axis, `None` when fixed.
    pub dofs: [Option<usize>; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub id: String,
    /// Node indices (start, end).
    pub ends: (usize, usize),
    pub area: f64,
    pub length: f64,
    pub volume: f64,
    /// Nonzero entries of `b_i` as (free dof, value), units 1/m.
    pub b: Vec<(usize, f64)>,
}

impl Member {
    /// `b_iᵀu`.
    pub fn strain(&self, u: &DVector<f64>) -> f64 {
        self.b.iter().map(|&(k, v)| v * u[k]).sum()
    }

    /// Dense copy of `b_i`.
    pub fn b_dense(&self, n_free: usize) -> DVector<f64> {
        let mut out = DVector::zeros(n_free);
        for &(k, v) in &self.b {
            out[k] += v;
        }
        out
    }
}

/// Assembled truss: free dofs, members with `b_i` and `v_i`, reference load.
#[derive(Clone, Debug, PartialEq)]
pub struct TrussModel {
    nodes: Vec<Node>,
    members: Vec<Member>,
    n_free: usize,
    p_ref: DVector<f64>,
}

impl TrussModel {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn p_ref(&self) -> &DVector<f64> {
        &self.p_ref
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    fn check_dim(&self, u: &DVector<f64>) -> Result<(), TrussError> {
        if u.len() != self.n_free {
            return Err(TrussError::DimensionMismatch {
                expected: self.n_free,
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Member strains `ε_i = b_iᵀu`.
    pub fn strains(&self, u: &DVector<f64>) -> Vec<f64> {
        self.members.iter().map(|m| m.strain(u)).collect()
    }

    /// Internal force `Σ v_i s(ε_i) b_i`.
    pub fn internal_force<S: Constitutive + ?Sized>(
        &self,
        surrogate: &S,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>, TrussError> {
        self.check_dim(u)?;
        let mut f = DVector::zeros(self.n_free);
        for m in &self.members {
            let stress = surrogate.stress(m.strain(u)).map_err(|e| TrussError::domain(m, e))?;
            let q = m.volume * stress;
            for &(k, v) in &m.b {
                f[k] += q * v;
            }
        }
        Ok(f)
    }

    /// Equilibrium residual `r(u) = Σ v_i s(b_iᵀu) b_i − λ p_ref`.
    pub fn residual<S: Constitutive + ?Sized>(
        &self,
        surrogate: &S,
        u: &DVector<f64>,
        lambda: f64,
    ) -> Result<DVector<f64>, TrussError> {
        let mut r = self.internal_force(surrogate, u)?;
        r.axpy(-lambda, &self.p_ref, 1.0);
        Ok(r)
    }

    /// Tangent stiffness `K(u) = Σ v_i s'(b_iᵀu) b_i b_iᵀ`, exactly symmetric.
    pub fn tangent<S: Constitutive + ?Sized>(
        &self,
        surrogate: &S,
        u: &DVector<f64>,
    ) -> Result<DMatrix<f64>, TrussError> {
        self.check_dim(u)?;
        let mut k = DMatrix::zeros(self.n_free, self.n_free);
        for m in &self.members {
            let strain = m.strain(u);
            let modulus = surrogate
                .tangent_modulus(strain)
                .map_err(|e| TrussError::domain(m, e))?;
            let c = m.volume * modulus;
            for &(i, bi) in &m.b {
                for &(j, bj) in &m.b {
                    k[(i, j)] += c * (bi * bj);
                }
            }
        }
        Ok(k)
    }

    /// Displacements per node as (ux, uy), zero on fixed axes.
    pub fn node_displacements(&self, u: &DVector<f64>) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .map(|n| {
                let get = |d: Option<usize>| d.map_or(0.0, |k| u[k]);
                (get(n.dofs[0]), get(n.dofs[1]))
            })
            .collect()
    }
}

/// Assembles a [`TrussModel`] from its description.
pub fn build_truss(config: &TrussConfig) -> Result<TrussModel, TrussError> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut nodes = Vec::with_capacity(config.nodes.len());
    let mut n_free = 0;
    for (i, spec) in config.nodes.iter().enumerate() {
        if index.insert(spec.id.0.as_str(), i).is_some() {
            return Err(TrussError::DuplicateNode(spec.id.0.clone()));
        }
        if !(spec.x.is_finite() && spec.y.is_finite()) {
            return Err(TrussError::NonFinite(format!("coordinates of node `{}`", spec.id)));
        }
        let mut next = |fixed: bool| {
            (!fixed).then(|| {
                n_free += 1;
                n_free - 1
            })
        };
        let dofs = [next(spec.fixed_x), next(spec.fixed_y)];
        nodes.push(Node {
            id: spec.id.0.clone(),
            x: spec.x,
            y: spec.y,
            dofs,
        });
    }
    if n_free == 0 {
        return Err(TrussError::NoFreeDofs);
    }
    if config.members.is_empty() {
        return Err(TrussError::NoMembers);
    }

    let mut member_ids = HashMap::new();
    let mut members = Vec::with_capacity(config.members.len());
    for spec in &config.members {
        if member_ids.insert(spec.id.0.as_str(), ()).is_some() {
            return Err(TrussError::DuplicateMember(spec.id.0.clone()));
        }
        let lookup = |id: &Id| {
            index
                .get(id.0.as_str())
                .copied()
                .ok_or_else(|| TrussError::UnknownNode {
                    member: spec.id.0.clone(),
                    node: id.0.clone(),
                })
        };
        let (a, b) = (lookup(&spec.from)?, lookup(&spec.to)?);
        if !(spec.area.is_finite() && spec.area > 0.0) {
            return Err(TrussError::InvalidArea {
                member: spec.id.0.clone(),
                area: spec.area,
            });
        }
        let (dx, dy) = (nodes[b].x - nodes[a].x, nodes[b].y - nodes[a].y);
        let length = dx.hypot(dy);
        if a == b || length == 0.0 {
            return Err(TrussError::ZeroLength(spec.id.0.clone()));
        }
        let dir = [dx / length, dy / length];
        let mut bvec = Vec::with_capacity(4);
        for (node, sign) in [(a, -1.0), (b, 1.0)] {
            for (dof, d) in nodes[node].dofs.iter().zip(dir) {
                if let Some(k) = *dof {
                    let v = sign * d / length;
                    if v != 0.0 {
                        bvec.push((k, v));
                    }
                }
            }
        }
        members.push(Member {
            id: spec.id.0.clone(),
            ends: (a, b),
            area: spec.area,
            length,
            volume: spec.area * length,
            b: bvec,
        });
    }

    let mut p_ref = DVector::zeros(n_free);
    for load in &config.loads {
        let i = *index
            .get(load.node.0.as_str())
            .ok_or_else(|| TrussError::UnknownLoadNode(load.node.0.clone()))?;
        if !(load.fx.is_finite() && load.fy.is_finite()) {
            return Err(TrussError::NonFinite(format!("load on node `{}`", load.node)));
        }
        // components on fixed axes go straight into the support reaction
        for (axis, f) in [load.fx, load.fy].into_iter().enumerate() {
            if let Some(k) = nodes[i].dofs[axis] {
                p_ref[k] += f;
            }
        }
    }

    let model = TrussModel {
        nodes,
        members,
        n_free,
        p_ref,
    };
    let rank = compatibility_rank(&model);
    if rank < n_free {
        return Err(TrussError::Mechanism { rank, n_free });
    }
    Ok(model)
}

/// Numerical rank of the matrix with rows `√v_i b_iᵀ`.
pub fn compatibility_rank(model: &TrussModel) -> usize {
    let n = model.n_free;
    let m = model.members.len();
    let mut a = DMatrix::<f64>::zeros(m.max(n), n);
    for (i, mem) in model.members.iter().enumerate() {
        let w = mem.volume.sqrt();
        for &(k, v) in &mem.b {
            a[(i, k)] += w * v;
        }
    }
    let sv = a.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > max * 1e-10).count()
}

/// Description of the canonical 10-bar cantilever: two bays of width `l`,
/// height `l`, supports at the left end, downward `load` at both free bottom
/// nodes.
pub fn ten_bar_config(l: f64, area: f64, load: f64) -> Result<TrussConfig, TrussError> {
    for (name, v) in [("L", l), ("area", area), ("load", load)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(TrussError::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let node = |id: u32, x: f64, y: f64, fixed: bool| NodeSpec {
        id: id.into(),
        x,
        y,
        fixed_x: fixed,
        fixed_y: fixed,
    };
    let nodes = vec![
        node(1, 0.0, 0.0, true),
        node(2, l, 0.0, false),
        node(3, 2.0 * l, 0.0, false),
        node(4, 0.0, l, true),
        node(5, l, l, false),
        node(6, 2.0 * l, l, false),
    ];
    let pairs = [
        (1, 2),
        (2, 3),
        (4, 5),
        (5, 6),
        (2, 5),
        (3, 6),
        (4, 2),
        (5, 3),
        (1, 5),
        (2, 6),
    ];
    let members = pairs
        .iter()
        .enumerate()
        .map(|(i, &(from, to))| MemberSpec {
            id: (i + 1).into(),
            from: from.into(),
            to: to.into(),
            area,
        })
        .collect();
    let loads = [2, 3]
        .iter()
        .map(|&n| LoadSpec {
            node: n.into(),
            fx: 0.0,
            fy: -load,
        })
        .collect();
    Ok(TrussConfig { nodes, members, loads })
}

pub fn ten_bar_truss(l: f64, area: f64, load: f64) -> Result<TrussModel, TrussError> {
    build_truss(&ten_bar_config(l, area, load)?)
}
