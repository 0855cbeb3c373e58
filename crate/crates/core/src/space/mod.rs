//! Finite-dimensional normed spaces: vectors, the three supported norms,
//! matrices with operator norms, domains, and deterministic ball sampling.

mod grid;
mod sampling;

pub use grid::SpatialGrid;
pub use sampling::{halton, sample_ball, sample_domain};

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Euclidean,
    Sup,
    One,
}

impl NormKind {
    /// The norm whose unit ball is polar to this one.
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::Euclidean => NormKind::Euclidean,
            NormKind::Sup => NormKind::One,
            NormKind::One => NormKind::Sup,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::Euclidean => "euclidean",
            NormKind::Sup => "sup",
            NormKind::One => "one",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "euclidean" | "l2" => Ok(NormKind::Euclidean),
            "sup" | "max" | "linf" => Ok(NormKind::Sup),
            "one" | "l1" => Ok(NormKind::One),
            other => Err(Error::InvalidArgument(format!("unknown norm {other:?}"))),
        }
    }
}

/// A point or displacement in `R^d`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<Real>);

impl Vector {
    pub fn new(coords: Vec<Real>) -> Self {
        Vector(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Vector(vec![Real::zero(); d])
    }

    pub fn from_f64(coords: &[f64]) -> Self {
        Vector(coords.iter().map(|&x| Real::from_f64(x)).collect())
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = Vector::zeros(d);
        v.0[i] = Real::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Real] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Real::to_f64).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Real::is_finite)
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Real) -> Vector {
        Vector(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }

    pub fn norm(&self, kind: NormKind) -> Real {
        norm(self, kind)
    }

    /// Lexicographic comparison of coordinates.
    pub fn lex_cmp(&self, other: &Vector) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl Index<usize> for Vector {
    type Output = Real;
    fn index(&self, i: usize) -> &Real {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

pub fn norm(v: &Vector, kind: NormKind) -> Real {
    match kind {
        NormKind::Euclidean => v.0.iter().map(|x| x * x).sum::<Real>().sqrt(),
        NormKind::Sup => v.0.iter().fold(Real::zero(), |m, x| m.max(&x.abs())),
        NormKind::One => v.0.iter().map(Real::abs).sum(),
    }
}

pub fn distance(a: &Vector, b: &Vector, kind: NormKind) -> Real {
    norm(&a.sub(b), kind)
}

/// `||a - b|| < r`, avoiding the square root for the euclidean norm.
pub fn within(a: &Vector, b: &Vector, r: &Real, kind: NormKind) -> bool {
    match kind {
        NormKind::Euclidean => {
            let d2: Real = a.0.iter().zip(&b.0).map(|(x, y)| {
                let t = x - y;
                &t * &t
            }).sum();
            d2 < r * r
        }
        _ => distance(a, b, kind) < *r,
    }
}

/// An `l x d` real matrix acting from `(R^d, in_norm)` to `(R^l, out_norm)`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    /// Row-major entries.
    entries: Vec<Real>,
    in_norm: NormKind,
    out_norm: NormKind,
}

impl LinearMap {
    pub fn new(rows: usize, cols: usize, entries: Vec<Real>, in_norm: NormKind, out_norm: NormKind) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("linear map with an empty dimension".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        if !entries.iter().all(Real::is_finite) {
            return Err(Error::NonFinite("linear map entries"));
        }
        Ok(LinearMap { rows, cols, entries, in_norm, out_norm })
    }

    /// Builds a matrix from `f64` rows; all rows must have equal length.
    pub fn from_rows(rows: &[&[f64]], in_norm: NormKind, out_norm: NormKind) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            entries.extend(r.iter().map(|&x| Real::from_f64(x)));
        }
        LinearMap::new(rows.len(), cols, entries, in_norm, out_norm)
    }

    pub fn identity(d: usize, norm: NormKind) -> Self {
        let mut entries = vec![Real::zero(); d * d];
        for i in 0..d {
            entries[i * d + i] = Real::one();
        }
        LinearMap { rows: d, cols: d, entries, in_norm: norm, out_norm: norm }
    }

    pub fn zero(rows: usize, cols: usize, in_norm: NormKind, out_norm: NormKind) -> Self {
        LinearMap { rows, cols, entries: vec![Real::zero(); rows * cols], in_norm, out_norm }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn in_norm(&self) -> NormKind {
        self.in_norm
    }

    pub fn out_norm(&self) -> NormKind {
        self.out_norm
    }

    pub fn entry(&self, i: usize, j: usize) -> &Real {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Real] {
        &self.entries
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.dim() });
        }
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &Vector) -> Vector {
        let out = (0..self.rows)
            .map(|i| {
                let row = &self.entries[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v.coords()).map(|(a, x)| a * x).sum()
            })
            .collect();
        Vector(out)
    }

    pub fn scale(&self, c: &Real) -> LinearMap {
        LinearMap { entries: self.entries.iter().map(|a| a * c).collect(), ..self.clone() }
    }

    pub fn neg(&self) -> LinearMap {
        LinearMap { entries: self.entries.iter().map(|a| -a).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(LinearMap { entries, ..self.clone() })
    }

    pub fn with_norms(&self, in_norm: NormKind, out_norm: NormKind) -> LinearMap {
        LinearMap { in_norm, out_norm, ..self.clone() }
    }

    fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j).to_f64()).collect())
            .collect()
    }

    /// Operator norm for the map's norm pair.
    pub fn op_norm(&self) -> Result<f64> {
        op_norm(self)
    }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearMap{:?}", self.to_f64_rows())
    }
}

/// Largest dimension for which the vertex enumeration in [`op_norm`] runs.
const MAX_ENUMERATED_DIM: usize = 20;

fn norm_f64(v: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormKind::Sup => v.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
        NormKind::One => v.iter().map(|x| x.abs()).sum(),
    }
}

fn sign_vectors(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (0u64..(1u64 << n)).map(move |mask| {
        (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()
    })
}

/// Operator norm of `a` from `(R^d, in_norm)` to `(R^l, out_norm)`.
///
/// Closed forms cover every pair except `sup -> one`, `sup -> euclidean` and
/// `euclidean -> one`, where the maximum of a convex function over a
/// polytope is found by enumerating its vertices; `euclidean -> euclidean`
/// is the largest singular value.
pub fn op_norm(a: &LinearMap) -> Result<f64> {
    let m = a.to_f64_rows();
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("operator"));
    }
    let col = |j: usize| m.iter().map(|r| r[j]).collect::<Vec<_>>();
    let apply = |x: &[f64]| m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).collect::<Vec<_>>();
    let value = match (a.in_norm, a.out_norm) {
        // extreme points of the l1 ball are +-e_j
        (NormKind::One, out) => (0..a.cols).map(|j| norm_f64(&col(j), out)).fold(0.0, f64::max),
        // sup of the output is a max over rows of dual norms
        (inn, NormKind::Sup) => m.iter().map(|r| norm_f64(r, inn.dual())).fold(0.0, f64::max),
        (NormKind::Euclidean, NormKind::Euclidean) => {
            if a.rows == 1 {
                norm_f64(&m[0], NormKind::Euclidean)
            } else if a.cols == 1 {
                norm_f64(&col(0), NormKind::Euclidean)
            } else {
                let mat = nalgebra::DMatrix::from_fn(a.rows, a.cols, |i, j| m[i][j]);
                mat.singular_values().max()
            }
        }
        (NormKind::Sup, out) => {
            if a.cols > MAX_ENUMERATED_DIM {
                return Err(Error::TooManyVertices(format!("sup -> {}", out.name())));
            }
            sign_vectors(a.cols).map(|s| norm_f64(&apply(&s), out)).fold(0.0, f64::max)
        }
        (NormKind::Euclidean, NormKind::One) => {
            // ||A||_{2->1} = max over sign vectors t of ||A^T t||_2
            if a.rows > MAX_ENUMERATED_DIM {
                return Err(Error::TooManyVertices("euclidean -> one".into()));
            }
            sign_vectors(a.rows)
                .map(|t| {
                    let v: Vec<f64> = (0..a.cols).map(|j| m.iter().zip(&t).map(|(r, s)| r[j] * s).sum()).collect();
                    norm_f64(&v, NormKind::Euclidean)
                })
                .fold(0.0, f64::max)
        }
    };
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Box { lo: Vector, hi: Vector },
    Ball { center: Vector, radius: Real },
}

/// A closed bounded subset of `R^d` with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    #[serde(flatten)]
    shape: Shape,
    norm: NormKind,
}

impl Domain {
    pub fn new_box(lo: Vector, hi: Vector, norm: NormKind) -> Result<Self> {
        Domain::new(Shape::Box { lo, hi }, norm)
    }

    pub fn new_ball(center: Vector, radius: Real, norm: NormKind) -> Result<Self> {
        Domain::new(Shape::Ball { center, radius }, norm)
    }

    pub fn unit_box(d: usize, norm: NormKind) -> Self {
        Domain { shape: Shape::Box { lo: Vector::zeros(d), hi: Vector::from_f64(&vec![1.0; d]) }, norm }
    }

    pub fn new(shape: Shape, norm: NormKind) -> Result<Self> {
        match &shape {
            Shape::Box { lo, hi } => {
                if lo.dim() == 0 || lo.dim() != hi.dim() {
                    return Err(Error::InvalidDomain("box corners must share a positive dimension".into()));
                }
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::NonFinite("box corners"));
                }
                if lo.coords().iter().zip(hi.coords()).any(|(a, b)| a >= b) {
                    return Err(Error::InvalidDomain("box needs lo < hi in every coordinate".into()));
                }
            }
            Shape::Ball { center, radius } => {
                if center.dim() == 0 || !center.is_finite() || !radius.is_finite() {
                    return Err(Error::InvalidDomain("ball needs a finite center and radius".into()));
                }
                if *radius <= Real::zero() {
                    return Err(Error::InvalidDomain("ball radius must be positive".into()));
                }
            }
        }
        Ok(Domain { shape, norm })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn norm(&self) -> NormKind {
        self.norm
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Box { lo, .. } => lo.dim(),
            Shape::Ball { center, .. } => center.dim(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Box { lo, hi } => x
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .all(|(v, (a, b))| a <= v && v <= b),
            Shape::Ball { center, radius } => distance(x, center, self.norm) <= *radius,
        }
    }

    /// Distance from a point of the domain to its boundary.
    ///
    /// For boxes this is the smallest face gap, which is the exact distance
    /// under all three norms because each dominates every coordinate.
    pub fn dist_to_boundary(&self, x: &Vector) -> Result<Real> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.dim() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain);
        }
        Ok(match &self.shape {
            Shape::Box { lo, hi } => x
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .map(|(v, (a, b))| (v - a).min(&(b - v)))
                .fold(Real::infinity(), |m, g| m.min(&g)),
            Shape::Ball { center, radius } => radius - distance(x, center, self.norm),
        })
    }

    pub fn diam(&self) -> Real {
        match &self.shape {
            Shape::Box { lo, hi } => norm(&hi.sub(lo), self.norm),
            Shape::Ball { radius, .. } => radius * Real::from_i64(2),
        }
    }

    /// Smallest axis-aligned box containing the domain.
    pub fn bounding_box(&self) -> (Vector, Vector) {
        match &self.shape {
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Ball { center, radius } => {
                // every norm here dominates each coordinate
                let r = Vector::new(vec![radius.clone(); center.dim()]);
                (center.sub(&r), center.add(&r))
            }
        }
    }

    /// Largest coordinate magnitude of the domain, used to size precision.
    pub fn magnitude(&self) -> Real {
        let (lo, hi) = self.bounding_box();
        lo.coords().iter().chain(hi.coords()).fold(Real::one(), |m, x| m.max(&x.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_f64(x)
    }

    #[test]
    fn norms_of_small_vectors() {
        assert_eq!(norm(&v(&[3.0, 4.0]), NormKind::Euclidean).to_f64(), 5.0);
        assert_eq!(norm(&v(&[3.0, 4.0]), NormKind::Sup).to_f64(), 4.0);
        assert!(norm(&v(&[0.0, 0.0]), NormKind::One).is_zero());
        assert_eq!(norm(&v(&[3.0, -4.0]), NormKind::One).to_f64(), 7.0);
    }

    #[test]
    fn operator_norm_examples() {
        let row = LinearMap::from_rows(&[&[0.5, 0.0]], NormKind::Euclidean, NormKind::Euclidean).unwrap();
        assert_eq!(op_norm(&row).unwrap(), 0.5);
        let id = LinearMap::identity(2, NormKind::Euclidean);
        assert!((op_norm(&id).unwrap() - 1.0).abs() < 1e-12);
    }

    /// Largest singular value of a 2x2 matrix by sweeping the unit circle.
    fn angle_sweep(m: [[f64; 2]; 2]) -> f64 {
        let n = 200_000;
        (0..n)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / n as f64;
                let (s, c) = t.sin_cos();
                let y0 = m[0][0] * c + m[0][1] * s;
                let y1 = m[1][0] * c + m[1][1] * s;
                (y0 * y0 + y1 * y1).sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn euclidean_operator_norm_matches_angle_sweep() {
        let oracle = angle_sweep([[3.0, 0.0], [0.0, 4.0]]);
        assert!((oracle - 4.0).abs() < 1e-9);
        let a = LinearMap::from_rows(&[&[3.0, 0.0], &[0.0, 4.0]], NormKind::Euclidean, NormKind::Euclidean).unwrap();
        assert!((op_norm(&a).unwrap() - oracle).abs() < 1e-9);

        // a start vector orthogonal to the top singular direction
        let b = [[1.0, -1.0], [1.0, -1.0]];
        let oracle = angle_sweep(b);
        let a = LinearMap::from_rows(&[&b[0], &b[1]], NormKind::Euclidean, NormKind::Euclidean).unwrap();
        assert!((op_norm(&a).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn mixed_norm_pairs_use_closed_forms() {
        let rows: [&[f64]; 2] = [&[1.0, -2.0], &[3.0, 0.5]];
        let n = |i, o| op_norm(&LinearMap::from_rows(&rows, i, o).unwrap()).unwrap();
        use NormKind::*;
        assert_eq!(n(Sup, Sup), 3.5);
        assert_eq!(n(One, One), 4.0);
        assert_eq!(n(One, Sup), 3.0);
        assert_eq!(n(Euclidean, Sup), (9.25f64).sqrt());
        assert_eq!(n(One, Euclidean), 10f64.sqrt());
        assert_eq!(n(Sup, One), 5.5);
    }

    #[test]
    fn non_finite_operator_is_rejected() {
        let e = LinearMap::new(1, 1, vec![Real::infinity()], NormKind::Sup, NormKind::Sup);
        assert!(matches!(e, Err(Error::NonFinite(_))));
    }

    #[test]
    fn boundary_distance_examples() {
        let unit = Domain::unit_box(2, NormKind::Euclidean);
        assert_eq!(unit.dist_to_boundary(&v(&[0.5, 0.5])).unwrap().to_f64(), 0.5);
        assert_eq!(unit.dist_to_boundary(&v(&[0.1, 0.5])).unwrap().to_f64(), 0.1);
        let ball = Domain::new_ball(v(&[0.0, 0.0]), Real::one(), NormKind::Euclidean).unwrap();
        assert_eq!(ball.dist_to_boundary(&v(&[0.25, 0.0])).unwrap().to_f64(), 0.75);
        assert_eq!(unit.dist_to_boundary(&v(&[1.5, 0.5])), Err(Error::OutsideDomain));
    }

    #[test]
    fn diameters() {
        let e = Domain::unit_box(2, NormKind::Euclidean).diam().to_f64();
        assert!((e - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Domain::unit_box(2, NormKind::Sup).diam().to_f64(), 1.0);
        let ball = Domain::new_ball(v(&[0.0, 0.0]), Real::one(), NormKind::Sup).unwrap();
        assert_eq!(ball.diam().to_f64(), 2.0);
    }

    #[test]
    fn degenerate_domains_are_rejected() {
        assert!(Domain::new_box(v(&[0.0, 1.0]), v(&[1.0, 1.0]), NormKind::Sup).is_err());
        assert!(Domain::new_ball(v(&[0.0]), Real::zero(), NormKind::Sup).is_err());
    }

    #[test]
    fn boundary_points_have_zero_distance() {
        let unit = Domain::unit_box(3, NormKind::Euclidean);
        let ball = Domain::new_ball(v(&[0.0, 0.0]), Real::one(), NormKind::Sup).unwrap();
        for i in 0..100 {
            let t = i as f64 / 100.0;
            let p = v(&[t, 1.0 - t * t, if i % 2 == 0 { 0.0 } else { 1.0 }]);
            assert!(unit.dist_to_boundary(&p).unwrap().is_zero());
            // sup-norm sphere: one coordinate at +-1
            let q = v(&[2.0 * t - 1.0, if i % 2 == 0 { 1.0 } else { -1.0 }]);
            assert!(ball.dist_to_boundary(&q).unwrap().is_zero());
        }
    }

    fn kind() -> impl Strategy<Value = NormKind> {
        prop_oneof![Just(NormKind::Euclidean), Just(NormKind::Sup), Just(NormKind::One)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn norm_axioms(k in kind(), a in prop::collection::vec(-10.0f64..10.0, 3),
                       b in prop::collection::vec(-10.0f64..10.0, 3), c in -5.0f64..5.0) {
            let (va, vb) = (v(&a), v(&b));
            let lhs = norm(&va.add(&vb), k).to_f64();
            let rhs = norm(&va, k).to_f64() + norm(&vb, k).to_f64();
            prop_assert!(lhs <= rhs + 1e-12);
            let hom = norm(&va.scale(&Real::from_f64(c)), k).to_f64();
            prop_assert!((hom - c.abs() * norm(&va, k).to_f64()).abs() <= 1e-12);
        }

        #[test]
        fn operator_norm_dominates_sampled_quotients(inn in kind(), out in kind(),
                entries in prop::collection::vec(-3.0f64..3.0, 6)) {
            let a = LinearMap::from_rows(&[&entries[0..3], &entries[3..6]], inn, out).unwrap();
            let bound = op_norm(&a).unwrap();
            let pts = halton(3, 1000, 11);
            for p in pts {
                let u: Vec<f64> = p.iter().map(|x| 2.0 * x - 1.0).collect();
                let nu = norm_f64(&u, inn);
                if nu == 0.0 { continue; }
                let au = a.apply(&v(&u)).unwrap();
                prop_assert!(norm(&au, out).to_f64() / nu <= bound + 1e-9);
            }
        }
    }
}
