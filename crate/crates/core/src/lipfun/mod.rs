//! Lipschitz mappings as immutable expression trees.
//!
//! Every constructor computes a certified upper bound for the Lipschitz
//! constant bottom-up, so [`LipFun::lip_cert`] is free. Subtrees are shared
//! through `Arc`: the perturbation step embeds the previous function once per
//! patch, and the artifact format keeps that sharing (see [`artifact`]).

pub mod artifact;
mod metric;

pub use metric::{check_patch_continuity, max_difference_quotient, sup_dist, ContinuityReport};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::{bits_for_scale, with_min_precision, Real};
use crate::space::{distance, halton, norm, within, Domain, LinearMap, NormKind, SpatialGrid, Vector};

/// Slack allowed when checking that a certificate is at most one. The node
/// calculus multiplies and divides rounded factors (`(s - b)/s` against
/// `s/(s - b)`), so an exact 1 may come out a few ulps above.
pub const LIP_TOL: f64 = 1e-12;

/// Absolute tolerance for the sampled continuity contract of patches.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Clone)]
pub struct LipFun(Arc<Node>);

struct Node {
    kind: Kind,
    in_dim: usize,
    out_dim: usize,
    lip: f64,
}

impl Drop for Node {
    // Unlinks uniquely owned descendants onto a heap stack so that dropping a
    // long chain does not recurse once per level.
    fn drop(&mut self) {
        let mut stack = take_children(&mut self.kind);
        while let Some(f) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(f.0) {
                stack.extend(take_children(&mut node.kind));
            }
        }
    }
}

fn take_children(kind: &mut Kind) -> Vec<LipFun> {
    let leaf = Kind::Const { value: Vector::zeros(0) };
    match std::mem::replace(kind, leaf) {
        Kind::Sum { left, right } => vec![left, right],
        Kind::Scale { of, .. } | Kind::AddConst { of, .. } => vec![of],
        Kind::RadialBlend { inner, outer, .. } => vec![inner, outer],
        Kind::Patched { outer, patches, .. } => {
            let mut v = vec![outer];
            v.extend(patches.into_iter().map(|p| p.inner));
            v
        }
        Kind::Precompose { outer, map } => vec![outer, map],
        _ => vec![],
    }
}

/// One replacement region of a [`Kind::Patched`] node: inside the open ball
/// `B(center, radius)` the patched function equals `inner`.
#[derive(Clone)]
pub struct Patch {
    pub center: Vector,
    pub radius: Real,
    pub inner: LipFun,
}

/// Node variants.
#[derive(Clone)]
pub enum Kind {
    Const { value: Vector },
    Linear { map: LinearMap },
    /// `z -> base + map (z - anchor)`
    Affine { base: Vector, map: LinearMap, anchor: Vector },
    /// `z -> sign * ||z||`
    NormOf { sign: i8, norm: NormKind },
    Sum { left: LipFun, right: LipFun },
    Scale { factor: Real, of: LipFun },
    AddConst { of: LipFun, offset: Vector },
    /// Equal to `inner` on the closed ball of radius `a`, to `outer` off the
    /// open ball of radius `b`, radially interpolated in between.
    RadialBlend { a: Real, b: Real, inner: LipFun, outer: LipFun, norm: NormKind },
    Patched { outer: LipFun, patches: Vec<Patch>, norm: NormKind, index: SpatialGrid },
    /// `z -> outer(map(z))`
    Precompose { outer: LipFun, map: LipFun },
}

impl std::fmt::Debug for LipFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LipFun({} : R^{} -> R^{}, lip <= {})",
            self.kind_name(),
            self.in_dim(),
            self.out_dim(),
            self.lip_cert()
        )
    }
}

impl LipFun {
    fn from_node(kind: Kind, in_dim: usize, out_dim: usize, lip: f64) -> LipFun {
        LipFun(Arc::new(Node { kind, in_dim, out_dim, lip }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind() {
            Kind::Const { .. } => "const",
            Kind::Linear { .. } => "linear",
            Kind::Affine { .. } => "affine",
            Kind::NormOf { .. } => "norm_of",
            Kind::Sum { .. } => "sum",
            Kind::Scale { .. } => "scale",
            Kind::AddConst { .. } => "add_const",
            Kind::RadialBlend { .. } => "radial_blend",
            Kind::Patched { .. } => "patched",
            Kind::Precompose { .. } => "precompose",
        }
    }

    pub fn in_dim(&self) -> usize {
        self.0.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.0.out_dim
    }

    /// Certified upper bound for the Lipschitz constant.
    pub fn lip_cert(&self) -> f64 {
        self.0.lip
    }

    /// Whether the certificate shows the map is 1-Lipschitz, up to [`LIP_TOL`].
    pub fn is_one_lipschitz(&self) -> bool {
        self.0.lip <= 1.0 + LIP_TOL
    }

    /// Identity of the shared node, for DAG traversals.
    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &LipFun) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn constant(in_dim: usize, value: Vector) -> LipFun {
        let out = value.dim();
        LipFun::from_node(Kind::Const { value }, in_dim, out, 0.0)
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> LipFun {
        LipFun::constant(in_dim, Vector::zeros(out_dim))
    }

    pub fn linear(map: LinearMap) -> LipFun {
        let lip = map.op_norm().unwrap_or(f64::INFINITY);
        let (i, o) = (map.cols(), map.rows());
        LipFun::from_node(Kind::Linear { map }, i, o, lip)
    }

    pub fn identity(d: usize, norm: NormKind) -> LipFun {
        LipFun::linear(LinearMap::identity(d, norm))
    }

    pub fn affine(base: Vector, map: LinearMap, anchor: Vector) -> Result<LipFun> {
        if base.dim() != map.rows() {
            return Err(Error::DimensionMismatch { expected: map.rows(), found: base.dim() });
        }
        if anchor.dim() != map.cols() {
            return Err(Error::DimensionMismatch { expected: map.cols(), found: anchor.dim() });
        }
        let lip = map.op_norm().unwrap_or(f64::INFINITY);
        let (i, o) = (map.cols(), map.rows());
        Ok(LipFun::from_node(Kind::Affine { base, map, anchor }, i, o, lip))
    }

    /// `z -> sign * ||z||`; `sign` is clamped to +-1.
    pub fn norm_of(dim: usize, sign: i8, norm: NormKind) -> LipFun {
        let sign = if sign < 0 { -1 } else { 1 };
        LipFun::from_node(Kind::NormOf { sign, norm }, dim, 1, 1.0)
    }

    pub fn sum(left: &LipFun, right: &LipFun) -> Result<LipFun> {
        same_dims(left, right)?;
        let lip = left.lip_cert() + right.lip_cert();
        Ok(LipFun::from_node(
            Kind::Sum { left: left.clone(), right: right.clone() },
            left.in_dim(),
            left.out_dim(),
            lip,
        ))
    }

    pub fn scale(factor: Real, of: &LipFun) -> LipFun {
        let lip = factor.abs().to_f64() * of.lip_cert();
        LipFun::from_node(Kind::Scale { factor, of: of.clone() }, of.in_dim(), of.out_dim(), lip)
    }

    pub fn add_const(of: &LipFun, offset: Vector) -> Result<LipFun> {
        if offset.dim() != of.out_dim() {
            return Err(Error::DimensionMismatch { expected: of.out_dim(), found: offset.dim() });
        }
        Ok(LipFun::from_node(Kind::AddConst { of: of.clone(), offset }, of.in_dim(), of.out_dim(), of.lip_cert()))
    }

    /// `z -> outer(map(z))`.
    pub fn precompose(outer: &LipFun, map: &LipFun) -> Result<LipFun> {
        if map.out_dim() != outer.in_dim() {
            return Err(Error::DimensionMismatch { expected: outer.in_dim(), found: map.out_dim() });
        }
        let lip = outer.lip_cert() * map.lip_cert();
        Ok(LipFun::from_node(
            Kind::Precompose { outer: outer.clone(), map: map.clone() },
            map.in_dim(),
            outer.out_dim(),
            lip,
        ))
    }

    /// The radial blend `Phi(a, b, f1, f2)`.
    ///
    /// Requires `0 < a < b` and `f1(0) = f2(0) = 0`. The certificate is
    /// `(Lip f1 + Lip f2)(1 + a/(b - a))`, which reduces to the bound
    /// `1 + a/(b - a)` when the two constants sum to at most one.
    pub fn radial_blend(a: Real, b: Real, f1: &LipFun, f2: &LipFun, norm: NormKind) -> Result<LipFun> {
        same_dims(f1, f2)?;
        if !(a > Real::zero() && a < b && b.is_finite()) {
            return Err(Error::BlendRadii { a: a.to_numeral(), b: b.to_numeral() });
        }
        let origin = Vector::zeros(f1.in_dim());
        for f in [f1, f2] {
            let v = f.eval_unchecked(&origin);
            if !v.coords().iter().all(Real::is_zero) {
                return Err(Error::BlendNonzeroAtOrigin);
            }
        }
        Ok(LipFun::radial_blend_unchecked(a, b, f1, f2, norm))
    }

    pub(crate) fn radial_blend_unchecked(a: Real, b: Real, f1: &LipFun, f2: &LipFun, norm: NormKind) -> LipFun {
        let stretch = (&a / (&b - &a)).to_f64();
        let lip = (f1.lip_cert() + f2.lip_cert()) * (1.0 + stretch);
        LipFun::from_node(
            Kind::RadialBlend { a, b, inner: f1.clone(), outer: f2.clone(), norm },
            f1.in_dim(),
            f1.out_dim(),
            lip,
        )
    }

    /// Replaces `outer` by `inner_i` on each open ball `B(center_i, radius_i)`.
    ///
    /// Checks that the closed balls are pairwise disjoint and lie in the
    /// interior of `domain`, and samples `64 d` points on every patch sphere
    /// to confirm `inner_i = outer` there within [`CONTINUITY_TOL`].
    pub fn patch(outer: &LipFun, patches: Vec<Patch>, domain: &Domain) -> Result<LipFun> {
        LipFun::patch_with(outer, patches, domain, 64 * outer.in_dim())
    }

    /// [`LipFun::patch`] with a custom number of continuity samples per
    /// sphere (at least the `2d` axis points are always used).
    pub fn patch_with(outer: &LipFun, patches: Vec<Patch>, domain: &Domain, sphere_samples: usize) -> Result<LipFun> {
        let f = LipFun::patch_unchecked(outer, patches, domain.norm())?;
        let Kind::Patched { patches, .. } = f.kind() else { unreachable!() };
        for (i, p) in patches.iter().enumerate() {
            let margin = domain.dist_to_boundary(&p.center).map_err(|_| Error::PatchEscapesDomain(i))?;
            if margin <= p.radius {
                return Err(Error::PatchEscapesDomain(i));
            }
        }
        let report = metric::node_continuity(&f, sphere_samples, 0)?;
        if let Some((index, gap)) = report.worst {
            if gap > CONTINUITY_TOL {
                return Err(Error::PatchMismatch { index, gap: format!("{gap:e}") });
            }
        }
        Ok(f)
    }

    /// Builds a patched node checking only dimensions, radii and pairwise
    /// disjointness. Continuity is left to [`check_patch_continuity`].
    pub fn patch_unchecked(outer: &LipFun, patches: Vec<Patch>, norm: NormKind) -> Result<LipFun> {
        let d = outer.in_dim();
        let mut max_r = 0.0f64;
        let mut magnitude = 1.0f64;
        for p in &patches {
            if p.center.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.center.dim() });
            }
            same_dims(outer, &p.inner)?;
            if !(p.radius > Real::zero() && p.radius.is_finite()) {
                return Err(Error::NonPositiveRadius);
            }
            max_r = max_r.max(p.radius.to_f64());
            for x in p.center.to_f64() {
                magnitude = magnitude.max(x.abs());
            }
        }
        // cells must dominate both the patch diameters and the f64 rounding of
        // query points
        let cell = (2.0 * max_r).max(1e-9 * magnitude);
        let mut index = SpatialGrid::new(d, cell);
        for (i, p) in patches.iter().enumerate() {
            index.insert(i, &p.center.to_f64());
        }
        for (i, p) in patches.iter().enumerate() {
            for j in index.candidates(&p.center.to_f64()) {
                if j <= i {
                    continue;
                }
                let q = &patches[j];
                if distance(&p.center, &q.center, norm) <= &p.radius + &q.radius {
                    return Err(Error::PatchOverlap(i, j));
                }
            }
        }
        let lip = patches.iter().fold(outer.lip_cert(), |m, p| m.max(p.inner.lip_cert()));
        Ok(LipFun::from_node(
            Kind::Patched { outer: outer.clone(), patches, norm, index },
            d,
            outer.out_dim(),
            lip,
        ))
    }

    pub fn eval(&self, z: &Vector) -> Result<Vector> {
        if z.dim() != self.in_dim() {
            return Err(Error::DimensionMismatch { expected: self.in_dim(), found: z.dim() });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &Vector) -> Vector {
        match self.kind() {
            Kind::Const { value } => value.clone(),
            Kind::Linear { map } => map.apply_unchecked(z),
            Kind::Affine { base, map, anchor } => base.add(&map.apply_unchecked(&z.sub(anchor))),
            Kind::NormOf { sign, norm: k } => {
                let n = norm(z, *k);
                Vector::new(vec![if *sign < 0 { -n } else { n }])
            }
            Kind::Sum { left, right } => left.eval_unchecked(z).add(&right.eval_unchecked(z)),
            Kind::Scale { factor, of } => of.eval_unchecked(z).scale(factor),
            Kind::AddConst { of, offset } => of.eval_unchecked(z).add(offset),
            Kind::RadialBlend { a, b, inner, outer, norm: k } => {
                let n = norm(z, *k);
                if n <= *a {
                    inner.eval_unchecked(z)
                } else if n < *b {
                    let width = b - a;
                    let w1 = (b - &n) / &width;
                    let w2 = b * (&n - a) / (&n * &width);
                    inner.eval_unchecked(z).scale(&w1).add(&outer.eval_unchecked(z).scale(&w2))
                } else {
                    outer.eval_unchecked(z)
                }
            }
            Kind::Patched { outer, patches, norm: k, index } => {
                match patch_at(patches, index, *k, z) {
                    Some(i) => patches[i].inner.eval_unchecked(z),
                    None => outer.eval_unchecked(z),
                }
            }
            Kind::Precompose { outer, map } => outer.eval_unchecked(&map.eval_unchecked(z)),
        }
    }

    /// Index of the patch of a patched node whose open ball contains `z`,
    /// found through the spatial index.
    pub fn patch_index_at(&self, z: &Vector) -> Option<usize> {
        match self.kind() {
            Kind::Patched { patches, norm, index, .. } => patch_at(patches, index, *norm, z),
            _ => None,
        }
    }

    /// Same as [`LipFun::patch_index_at`] by scanning every patch.
    pub fn patch_index_at_naive(&self, z: &Vector) -> Option<usize> {
        match self.kind() {
            Kind::Patched { patches, norm, .. } => {
                patches.iter().position(|p| within(z, &p.center, &p.radius, *norm))
            }
            _ => None,
        }
    }

    /// Children in a fixed order, used by traversals and the artifact writer.
    pub fn children(&self) -> Vec<&LipFun> {
        match self.kind() {
            Kind::Const { .. } | Kind::Linear { .. } | Kind::Affine { .. } | Kind::NormOf { .. } => vec![],
            Kind::Sum { left, right } => vec![left, right],
            Kind::Scale { of, .. } | Kind::AddConst { of, .. } => vec![of],
            Kind::RadialBlend { inner, outer, .. } => vec![inner, outer],
            Kind::Patched { outer, patches, .. } => {
                let mut v = vec![outer];
                v.extend(patches.iter().map(|p| &p.inner));
                v
            }
            Kind::Precompose { outer, map } => vec![outer, map],
        }
    }

    /// Distinct nodes reachable from `self` (shared subtrees counted once),
    /// children before parents.
    pub fn nodes_postorder(&self) -> Vec<LipFun> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut stack: Vec<(LipFun, bool)> = vec![(self.clone(), false)];
        while let Some((f, expanded)) = stack.pop() {
            if expanded {
                out.push(f);
                continue;
            }
            if !seen.insert(f.ptr_id()) {
                continue;
            }
            stack.push((f.clone(), true));
            for c in f.children().into_iter().rev() {
                if !seen.contains(&c.ptr_id()) {
                    stack.push((c.clone(), false));
                }
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.nodes_postorder().len()
    }

    /// Evaluates on `points` with the working precision raised to resolve
    /// offsets of size `scale`.
    pub fn eval_at_scale(&self, points: &[Vector], scale: &Real) -> Result<Vec<Vector>> {
        let mag = points
            .iter()
            .flat_map(|p| p.coords().iter())
            .fold(Real::one(), |m, x| m.max(&x.abs()));
        with_min_precision(bits_for_scale(scale, &mag), || points.iter().map(|p| self.eval(p)).collect())
    }
}

fn same_dims(f: &LipFun, g: &LipFun) -> Result<()> {
    if f.in_dim() != g.in_dim() {
        return Err(Error::DimensionMismatch { expected: f.in_dim(), found: g.in_dim() });
    }
    if f.out_dim() != g.out_dim() {
        return Err(Error::DimensionMismatch { expected: f.out_dim(), found: g.out_dim() });
    }
    Ok(())
}

fn patch_at(patches: &[Patch], index: &SpatialGrid, k: NormKind, z: &Vector) -> Option<usize> {
    if patches.is_empty() {
        return None;
    }
    index
        .candidates(&z.to_f64())
        .into_iter()
        .find(|&i| within(z, &patches[i].center, &patches[i].radius, k))
}

/// Deterministic points on the sphere `||u|| = r` around `center`: the `2d`
/// axis points followed by Halton directions.
pub(crate) fn sphere_points(center: &Vector, r: &Real, k: NormKind, count: usize, seed: u64) -> Vec<Vector> {
    let d = center.dim();
    let mut out = Vec::with_capacity(count.max(2 * d));
    for i in 0..d {
        let e = Vector::basis(d, i).scale(r);
        out.push(center.add(&e));
        out.push(center.sub(&e));
    }
    if count > 2 * d {
        for h in halton(d, 2 * count, seed) {
            if out.len() >= count {
                break;
            }
            let dir = Vector::from_f64(&h.iter().map(|x| 2.0 * x - 1.0).collect::<Vec<_>>());
            let n = norm(&dir, k);
            if n.to_f64() < 1e-3 {
                continue;
            }
            out.push(center.add(&dir.scale(&(r / n))));
        }
    }
    out
}
