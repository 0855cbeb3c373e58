//! Nested separated nets `Gamma_1 ⊆ Gamma_2 ⊆ ...` inside a target set.
//!
//! Level `k` is a maximal `2^-k`-separated subset of the target points lying
//! at least `2^-k` away from the domain boundary, grown greedily from the
//! previous level.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::space::{distance, sample_domain, within, Domain, NormKind, SpatialGrid, Vector};

/// A finite or sampled stand-in for a target set `G` in the interior of the
/// domain.
#[derive(Clone)]
pub enum TargetSet {
    Points(Vec<Vector>),
    /// Low-discrepancy sample of the domain, thinned by a predicate.
    Sampled { count: usize, seed: u64, keep: Option<Arc<dyn Fn(&Vector) -> bool + Send + Sync>> },
}

impl fmt::Debug for TargetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSet::Points(p) => write!(f, "TargetSet::Points({} points)", p.len()),
            TargetSet::Sampled { count, seed, keep } => write!(
                f,
                "TargetSet::Sampled {{ count: {count}, seed: {seed}, filtered: {} }}",
                keep.is_some()
            ),
        }
    }
}

impl TargetSet {
    /// Points `lo + i h` of a box domain lying strictly inside it, in
    /// lexicographic order.
    pub fn grid(domain: &Domain, step: &Real) -> Result<TargetSet> {
        if *step <= Real::zero() {
            return Err(Error::InvalidArgument("grid step must be positive".into()));
        }
        let (lo, hi) = domain.bounding_box();
        let d = domain.dim();
        let axes: Vec<Vec<Real>> = (0..d)
            .map(|i| {
                let (a, b) = (&lo.coords()[i], &hi.coords()[i]);
                let mut out = Vec::new();
                let mut n = 1i64;
                loop {
                    let x = a + step * Real::from_i64(n);
                    if x >= *b {
                        break;
                    }
                    out.push(x);
                    n += 1;
                }
                out
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for p in &points {
                for x in axis {
                    let mut q: Vec<Real> = p.clone();
                    q.push(x.clone());
                    next.push(q);
                }
            }
            points = next;
        }
        let interior = |p: &Vector| match domain.dist_to_boundary(p) {
            Ok(m) => m > Real::zero(),
            Err(_) => false,
        };
        let pts = points.into_iter().map(Vector::new).filter(|p| interior(p)).collect();
        Ok(TargetSet::Points(pts))
    }

    /// The points standing for `G`, restricted to the domain interior.
    pub fn points(&self, domain: &Domain) -> Vec<Vector> {
        let raw = match self {
            TargetSet::Points(p) => p.clone(),
            TargetSet::Sampled { count, seed, keep } => {
                let pts = sample_domain(domain, *count, *seed);
                match keep {
                    Some(k) => pts.into_iter().filter(|p| k(p)).collect(),
                    None => pts,
                }
            }
        };
        raw.into_iter()
            .filter(|p| domain.dist_to_boundary(p).map_or(false, |m| m > Real::zero()))
            .collect()
    }
}

/// Representation points with boundary distance at least `2^-k`.
pub fn restrict(g: &TargetSet, domain: &Domain, k: u32) -> Vec<Vector> {
    restrict_points(&g.points(domain), domain, k)
}

fn restrict_points(points: &[Vector], domain: &Domain, k: u32) -> Vec<Vector> {
    let margin = Real::pow2(-(k as i32));
    points
        .iter()
        .filter(|p| domain.dist_to_boundary(p).map_or(false, |m| m >= margin))
        .cloned()
        .collect()
}

/// f64 copy of a point. Distance comparisons are settled on shadows unless
/// they are within rounding of a tie, which falls back to exact arithmetic.
struct Shadow {
    c: Vec<f64>,
    mag: f64,
}

impl Shadow {
    fn of(p: &Vector) -> Shadow {
        let c = p.to_f64();
        let mag = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Shadow { c, mag }
    }

    fn dist(&self, o: &Shadow, norm: NormKind) -> f64 {
        let diffs = self.c.iter().zip(&o.c).map(|(a, b)| (a - b).abs());
        match norm {
            NormKind::Euclidean => diffs.map(|t| t * t).sum::<f64>().sqrt(),
            NormKind::Sup => diffs.fold(0.0, f64::max),
            NormKind::One => diffs.sum(),
        }
    }

    /// Bound on the error of `dist` relative to the exact distance.
    fn slack(&self, o: &Shadow) -> f64 {
        1e-12 * (1.0 + self.mag.max(o.mag))
    }
}

/// Exact `distance(p, q) < delta`.
fn closer(p: &Vector, sp: &Shadow, q: &Vector, sq: &Shadow, delta: &Real, delta64: f64, norm: NormKind) -> bool {
    let (d, t) = (sp.dist(sq, norm), sp.slack(sq));
    if d + t < delta64 {
        true
    } else if d - t > delta64 {
        false
    } else {
        within(p, q, delta, norm)
    }
}

/// Smallest pairwise distance; `+inf` for fewer than two points.
pub fn separation(points: &[Vector], norm: NormKind) -> Real {
    let sh: Vec<Shadow> = points.iter().map(Shadow::of).collect();
    let mut m64 = f64::INFINITY;
    for (i, a) in sh.iter().enumerate() {
        for b in &sh[i + 1..] {
            m64 = m64.min(a.dist(b, norm));
        }
    }
    let mut best = Real::infinity();
    for (i, a) in sh.iter().enumerate() {
        for (j, b) in sh.iter().enumerate().skip(i + 1) {
            if a.dist(b, norm) <= m64 + 2.0 * a.slack(b) {
                best = best.min(&distance(&points[i], &points[j], norm));
            }
        }
    }
    best
}

/// Extends `seed` greedily, in input order, to a `delta`-separated subset of
/// `seed ∪ points` that is maximal among the input points.
pub fn greedy_net(points: &[Vector], delta: &Real, seed: &[Vector], norm: NormKind) -> Result<Vec<Vector>> {
    if *delta <= Real::zero() {
        return Err(Error::InvalidArgument("net separation must be positive".into()));
    }
    if separation(seed, norm) < *delta {
        return Err(Error::SeedNotSeparated { delta: delta.display_short() });
    }
    let Some(first) = seed.first().or(points.first()) else {
        return Ok(Vec::new());
    };
    let mut grid = SpatialGrid::new(first.dim(), delta.to_f64().max(1e-300));
    let delta64 = delta.to_f64();
    let mut chosen: Vec<(Vector, Shadow)> = Vec::new();
    let add = |p: &Vector, sp: Shadow, chosen: &mut Vec<(Vector, Shadow)>, grid: &mut SpatialGrid| {
        grid.insert(chosen.len(), &sp.c);
        chosen.push((p.clone(), sp));
    };
    for p in seed {
        add(p, Shadow::of(p), &mut chosen, &mut grid);
    }
    for p in points {
        let sp = Shadow::of(p);
        let near = grid.candidates(&sp.c).into_iter().any(|i| {
            let (q, sq) = &chosen[i];
            closer(p, &sp, q, sq, delta, delta64, norm)
        });
        if !near {
            add(p, sp, &mut chosen, &mut grid);
        }
    }
    Ok(chosen.into_iter().map(|(p, _)| p).collect())
}

/// Levels `Gamma_1 .. Gamma_kmax` with their certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetFamily {
    pub levels: Vec<Vec<Vector>>,
    /// Measured separation of each level (`+inf` below two points).
    pub separations: Vec<Real>,
    /// Smallest boundary distance of each level (`+inf` when empty).
    pub margins: Vec<Real>,
}

pub fn nested_nets(g: &TargetSet, domain: &Domain, k_max: u32) -> Result<NetFamily> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let points = g.points(domain);
    let norm = domain.norm();
    let mut levels: Vec<Vec<Vector>> = Vec::new();
    for k in 1..=k_max {
        let admissible = restrict_points(&points, domain, k);
        let prev = levels.last().cloned().unwrap_or_default();
        levels.push(greedy_net(&admissible, &Real::pow2(-(k as i32)), &prev, norm)?);
    }
    let separations = levels.iter().map(|l| separation(l, norm)).collect();
    let margins = levels
        .iter()
        .map(|l| {
            l.iter()
                .map(|p| domain.dist_to_boundary(p).unwrap_or_else(|_| Real::zero()))
                .fold(Real::infinity(), |m, x| m.min(&x))
        })
        .collect();
    Ok(NetFamily { levels, separations, margins })
}

impl NetFamily {
    pub fn k_max(&self) -> usize {
        self.levels.len()
    }

    /// `Gamma_k` for `k ≥ 1`; empty beyond the last level.
    pub fn level(&self, k: usize) -> &[Vector] {
        match k.checked_sub(1).and_then(|i| self.levels.get(i)) {
            Some(l) => l,
            None => &[],
        }
    }

    /// Checks nesting, separation, margins and membership; returns the first
    /// violated invariant.
    pub fn check(&self, g: &TargetSet, domain: &Domain) -> std::result::Result<(), String> {
        let points = g.points(domain);
        let norm = domain.norm();
        for (i, level) in self.levels.iter().enumerate() {
            let k = i + 1;
            let bound = Real::pow2(-(k as i32));
            if i > 0 && !self.levels[i - 1].iter().all(|p| level.contains(p)) {
                return Err(format!("level {} is not contained in level {k}", k - 1));
            }
            if separation(level, norm) < bound {
                return Err(format!("level {k} is not 2^-{k}-separated"));
            }
            for p in level {
                match domain.dist_to_boundary(p) {
                    Ok(m) if m >= bound => {}
                    _ => return Err(format!("level {k} has a point closer than 2^-{k} to the boundary")),
                }
                if !points.contains(p) {
                    return Err(format!("level {k} has a point outside the target set"));
                }
            }
        }
        Ok(())
    }

    /// Admissible points of level `k` that could still be added; empty when
    /// the level is maximal. Brute force over all pairs.
    pub fn addable(&self, g: &TargetSet, domain: &Domain, k: usize) -> Vec<Vector> {
        let bound = Real::pow2(-(k as i32));
        let (bound64, norm) = (bound.to_f64(), domain.norm());
        let level: Vec<(&Vector, Shadow)> = self.level(k).iter().map(|q| (q, Shadow::of(q))).collect();
        restrict(g, domain, k as u32)
            .into_iter()
            .filter(|p| {
                let sp = Shadow::of(p);
                level.iter().all(|(q, sq)| !closer(p, &sp, q, sq, &bound, bound64, norm))
            })
            .collect()
    }

    /// CSV with columns `k, x1 .. xd`, one row per point and level.
    pub fn to_csv(&self) -> String {
        let d = self.levels.iter().flatten().next().map_or(0, Vector::dim);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["k".to_string()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        w.write_record(&header).expect("in-memory csv");
        for (i, level) in self.levels.iter().enumerate() {
            for p in level {
                let mut row = vec![(i + 1).to_string()];
                row.extend(p.coords().iter().map(Real::display_short));
                w.write_record(&row).expect("in-memory csv");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests;
