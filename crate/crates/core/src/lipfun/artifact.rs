//! JSON documents for [`LipFun`] values.
//!
//! A function is stored as a node table in children-first order; each node
//! refers to its children by table index, so a subtree shared by many
//! parents is written once. Numerals are strings that round-trip exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Kind, LipFun, Patch};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::space::{LinearMap, NormKind, Vector};

pub const FUN_SCHEMA: &str = "lipforge-fun/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum Record {
    Const { in_dim: usize, value: Vector },
    Linear { map: LinearMap },
    Affine { base: Vector, map: LinearMap, anchor: Vector },
    NormOf { dim: usize, sign: i8, norm: NormKind },
    Sum { left: usize, right: usize },
    Scale { factor: Real, of: usize },
    AddConst { of: usize, offset: Vector },
    RadialBlend { a: Real, b: Real, inner: usize, outer: usize, norm: NormKind },
    Patched { outer: usize, norm: NormKind, patches: Vec<PatchRecord> },
    Precompose { outer: usize, map: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchRecord {
    center: Vector,
    radius: Real,
    inner: usize,
}

/// Shared node table; several functions can be stored in one table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeTable {
    records: Vec<Record>,
}

/// Appends functions to a [`NodeTable`], reusing nodes already written.
#[derive(Default)]
pub struct TableWriter {
    table: NodeTable,
    index: HashMap<usize, usize>,
    // keeps written nodes alive so their addresses stay unique
    held: Vec<LipFun>,
}

impl TableWriter {
    pub fn new() -> Self {
        TableWriter::default()
    }

    /// Writes `f` (and any unwritten descendants); returns its table index.
    pub fn add(&mut self, f: &LipFun) -> usize {
        if let Some(&i) = self.index.get(&f.ptr_id()) {
            return i;
        }
        for node in f.nodes_postorder() {
            if self.index.contains_key(&node.ptr_id()) {
                continue;
            }
            let id = |c: &LipFun| self.index[&c.ptr_id()];
            let rec = match node.kind() {
                Kind::Const { value } => Record::Const { in_dim: node.in_dim(), value: value.clone() },
                Kind::Linear { map } => Record::Linear { map: map.clone() },
                Kind::Affine { base, map, anchor } => {
                    Record::Affine { base: base.clone(), map: map.clone(), anchor: anchor.clone() }
                }
                Kind::NormOf { sign, norm } => Record::NormOf { dim: node.in_dim(), sign: *sign, norm: *norm },
                Kind::Sum { left, right } => Record::Sum { left: id(left), right: id(right) },
                Kind::Scale { factor, of } => Record::Scale { factor: factor.clone(), of: id(of) },
                Kind::AddConst { of, offset } => Record::AddConst { of: id(of), offset: offset.clone() },
                Kind::RadialBlend { a, b, inner, outer, norm } => Record::RadialBlend {
                    a: a.clone(),
                    b: b.clone(),
                    inner: id(inner),
                    outer: id(outer),
                    norm: *norm,
                },
                Kind::Patched { outer, patches, norm, .. } => Record::Patched {
                    outer: id(outer),
                    norm: *norm,
                    patches: patches
                        .iter()
                        .map(|p| PatchRecord { center: p.center.clone(), radius: p.radius.clone(), inner: id(&p.inner) })
                        .collect(),
                },
                Kind::Precompose { outer, map } => Record::Precompose { outer: id(outer), map: id(map) },
            };
            self.index.insert(node.ptr_id(), self.table.records.len());
            self.table.records.push(rec);
            self.held.push(node);
        }
        self.index[&f.ptr_id()]
    }

    pub fn finish(self) -> NodeTable {
        self.table
    }
}

fn linear_map(m: &LinearMap) -> Result<LinearMap> {
    LinearMap::new(m.rows(), m.cols(), m.entries().to_vec(), m.in_norm(), m.out_norm())
        .map_err(|e| Error::MalformedArtifact(e.to_string()))
}

impl NodeTable {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Rebuilds every node of the table. Structure is validated (indices,
    /// dimensions, radii, patch disjointness); patch continuity is not, see
    /// [`super::check_patch_continuity`].
    pub fn load(&self) -> Result<Vec<LipFun>> {
        let mut built: Vec<LipFun> = Vec::with_capacity(self.records.len());
        let bad = |e: Error| match e {
            e @ Error::MalformedArtifact(_) => e,
            e => Error::MalformedArtifact(e.to_string()),
        };
        for (pos, rec) in self.records.iter().enumerate() {
            let get = |i: usize| -> Result<LipFun> {
                if i >= pos {
                    return Err(Error::MalformedArtifact(format!("node {pos} refers forward to node {i}")));
                }
                Ok(built[i].clone())
            };
            let f = match rec {
                Record::Const { in_dim, value } => {
                    if *in_dim == 0 || !value.is_finite() {
                        return Err(Error::MalformedArtifact(format!("node {pos}: bad constant")));
                    }
                    LipFun::constant(*in_dim, value.clone())
                }
                Record::Linear { map } => LipFun::linear(linear_map(map)?),
                Record::Affine { base, map, anchor } => {
                    LipFun::affine(base.clone(), linear_map(map)?, anchor.clone()).map_err(bad)?
                }
                Record::NormOf { dim, sign, norm } => {
                    if *dim == 0 || sign.abs() != 1 {
                        return Err(Error::MalformedArtifact(format!("node {pos}: bad norm node")));
                    }
                    LipFun::norm_of(*dim, *sign, *norm)
                }
                Record::Sum { left, right } => LipFun::sum(&get(*left)?, &get(*right)?).map_err(bad)?,
                Record::Scale { factor, of } => {
                    if !factor.is_finite() {
                        return Err(Error::MalformedArtifact(format!("node {pos}: non-finite factor")));
                    }
                    LipFun::scale(factor.clone(), &get(*of)?)
                }
                Record::AddConst { of, offset } => LipFun::add_const(&get(*of)?, offset.clone()).map_err(bad)?,
                Record::RadialBlend { a, b, inner, outer, norm } => {
                    LipFun::radial_blend(a.clone(), b.clone(), &get(*inner)?, &get(*outer)?, *norm).map_err(bad)?
                }
                Record::Patched { outer, norm, patches } => {
                    let patches = patches
                        .iter()
                        .map(|p| {
                            Ok(Patch { center: p.center.clone(), radius: p.radius.clone(), inner: get(p.inner)? })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    LipFun::patch_unchecked(&get(*outer)?, patches, *norm).map_err(bad)?
                }
                Record::Precompose { outer, map } => LipFun::precompose(&get(*outer)?, &get(*map)?).map_err(bad)?,
            };
            built.push(f);
        }
        Ok(built)
    }

    pub fn get(&self, built: &[LipFun], index: usize) -> Result<LipFun> {
        built
            .get(index)
            .cloned()
            .ok_or_else(|| Error::MalformedArtifact(format!("node index {index} out of range")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunDocument {
    schema: String,
    root: usize,
    nodes: NodeTable,
}

/// Checks the `schema` field of a JSON document before decoding the rest.
pub fn check_schema(bytes: &[u8], expected: &str) -> Result<serde_json::Value> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| Error::MalformedArtifact(e.to_string()))?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(s) if s == expected => Ok(value),
        Some(s) => Err(Error::UnknownSchema(s.to_string())),
        None => Err(Error::MalformedArtifact("missing schema field".into())),
    }
}

pub fn serialize(f: &LipFun) -> Vec<u8> {
    let mut w = TableWriter::new();
    let root = w.add(f);
    let doc = FunDocument { schema: FUN_SCHEMA.to_string(), root, nodes: w.finish() };
    let mut out = serde_json::to_vec(&doc).expect("function documents always serialize");
    out.push(b'\n');
    out
}

pub fn deserialize(bytes: &[u8]) -> Result<LipFun> {
    let value = check_schema(bytes, FUN_SCHEMA)?;
    let doc: FunDocument = serde_json::from_value(value).map_err(|e| Error::MalformedArtifact(e.to_string()))?;
    let built = doc.nodes.load()?;
    doc.nodes.get(&built, doc.root)
}
