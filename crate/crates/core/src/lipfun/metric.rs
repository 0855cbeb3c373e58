use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sphere_points, Kind, LipFun, Patch};
use crate::error::{Error, Result};
use crate::real::{bits_for_scale, with_min_precision, Real};
use crate::space::{distance, norm, sample_domain, Domain, NormKind, Vector};

/// Outcome of sampling the continuity contract of patched nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContinuityReport {
    pub nodes: usize,
    pub patches: usize,
    pub points: usize,
    /// Patch index (within its node) and size of the largest gap seen.
    pub worst: Option<(usize, f64)>,
}

/// Samples `inner = outer` on the sphere of every patch of every patched
/// node reachable from `f`.
pub fn check_patch_continuity(f: &LipFun, samples: usize, seed: u64) -> Result<ContinuityReport> {
    let mut total = ContinuityReport::default();
    for node in f.nodes_postorder() {
        if let Kind::Patched { .. } = node.kind() {
            let r = node_continuity(&node, samples, seed)?;
            total.nodes += 1;
            total.patches += r.patches;
            total.points += r.points;
            if let Some((i, gap)) = r.worst {
                if total.worst.map_or(true, |(_, g)| gap > g) {
                    total.worst = Some((i, gap));
                }
            }
        }
    }
    Ok(total)
}

/// Continuity of the patches of a single patched node.
pub(crate) fn node_continuity(f: &LipFun, samples: usize, seed: u64) -> Result<ContinuityReport> {
    let Kind::Patched { outer, patches, norm: k, .. } = f.kind() else {
        return Ok(ContinuityReport::default());
    };
    let mut report = ContinuityReport { nodes: 1, patches: patches.len(), ..Default::default() };
    for (i, p) in patches.iter().enumerate() {
        let mag = p.center.coords().iter().fold(Real::one(), |m, x| m.max(&x.abs()));
        let gap = with_min_precision(bits_for_scale(&p.radius, &mag), || -> Result<f64> {
            let mut worst = 0.0f64;
            for z in sphere_points(&p.center, &p.radius, *k, samples, seed) {
                let a = p.inner.eval(&z)?;
                let b = outer.eval(&z)?;
                worst = worst.max(norm(&a.sub(&b), NormKind::Sup).to_f64());
            }
            Ok(worst)
        })?;
        report.points += samples.max(2 * p.center.dim());
        if report.worst.map_or(true, |(_, g)| gap > g) {
            report.worst = Some((i, gap));
        }
    }
    Ok(report)
}

/// Radii of radial blends near the top of a patch's inner function, where
/// the construction's deviations concentrate.
fn blend_radii(f: &LipFun, depth: usize, out: &mut Vec<Real>) {
    if depth == 0 {
        return;
    }
    match f.kind() {
        Kind::RadialBlend { a, b, inner, outer, .. } => {
            out.push(a.clone());
            out.push(b.clone());
            blend_radii(inner, depth - 1, out);
            blend_radii(outer, depth - 1, out);
        }
        Kind::Patched { .. } => {}
        _ => {
            for c in f.children() {
                blend_radii(c, depth - 1, out);
            }
        }
    }
}

fn patched_nodes(f: &LipFun) -> (HashSet<usize>, Vec<LipFun>) {
    let nodes = f.nodes_postorder();
    let ids = nodes.iter().map(LipFun::ptr_id).collect();
    let patched = nodes.into_iter().filter(|n| matches!(n.kind(), Kind::Patched { .. })).collect();
    (ids, patched)
}

/// Points where `f` and `g` are likely to differ most: centers of the
/// patches present in only one of them, and rings at the patch and blend
/// radii around those centers. Each point carries the smallest scale it must
/// resolve.
fn feature_points(f: &LipFun, g: &LipFun, domain: &Domain, seed: u64) -> Vec<(Vector, Real)> {
    let (f_ids, f_patched) = patched_nodes(f);
    let (g_ids, g_patched) = patched_nodes(g);
    let mut own: Vec<&LipFun> = f_patched.iter().filter(|n| !g_ids.contains(&n.ptr_id())).collect();
    own.extend(g_patched.iter().filter(|n| !f_ids.contains(&n.ptr_id())));
    let mut out = Vec::new();
    for node in own {
        let Kind::Patched { patches, norm: k, .. } = node.kind() else { continue };
        for Patch { center, radius, inner } in patches {
            let mut radii = vec![radius.clone()];
            blend_radii(inner, 6, &mut radii);
            radii.retain(|r| r.is_finite() && *r > Real::zero());
            radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
            radii.dedup();
            let smallest = radii.first().cloned().unwrap_or_else(|| radius.clone());
            out.push((center.clone(), smallest.clone()));
            let two = Real::from_i64(2);
            let mut rings = radii.clone();
            rings.extend(radii.iter().map(|r| r / &two));
            let d = center.dim();
            for r in rings {
                let mag = center.coords().iter().fold(Real::one(), |m, x| m.max(&x.abs()));
                let pts = with_min_precision(bits_for_scale(&r, &mag), || sphere_points(center, &r, *k, 2 * d + 2, seed));
                out.extend(pts.into_iter().filter(|p| domain.contains(p)).map(|p| (p, r.clone())));
            }
        }
    }
    out
}

/// Sampled lower estimate of `sup_z ||f(z) - g(z)||` over `domain`.
///
/// The sample is `budget` Halton points of the domain plus the patch-aware
/// feature points of [`feature_points`]. Symmetric in `f` and `g`.
pub fn sup_dist(f: &LipFun, g: &LipFun, domain: &Domain, out_norm: NormKind, budget: usize, seed: u64) -> Result<Real> {
    if f.in_dim() != g.in_dim() || f.out_dim() != g.out_dim() {
        return Err(Error::DimensionMismatch { expected: f.out_dim(), found: g.out_dim() });
    }
    if f.in_dim() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), found: f.in_dim() });
    }
    if f.ptr_eq(g) {
        return Ok(Real::zero());
    }
    let mut best = Real::zero();
    for z in sample_domain(domain, budget, seed) {
        best = best.max(&distance(&f.eval(&z)?, &g.eval(&z)?, out_norm));
    }
    let mag = domain.magnitude();
    for (z, scale) in feature_points(f, g, domain, seed) {
        let d = with_min_precision(bits_for_scale(&scale, &mag), || -> Result<Real> {
            Ok(distance(&f.eval(&z)?, &g.eval(&z)?, out_norm))
        })?;
        best = best.max(&d);
    }
    Ok(best)
}

/// Largest sampled difference quotient `||f(x) - f(y)|| / ||x - y||`.
///
/// Pairs mix far points of the domain with near pairs at scales down to
/// `1e-6 diam`, plus near pairs around each `(center, scale)` in `focus`.
pub fn max_difference_quotient(
    f: &LipFun,
    domain: &Domain,
    out_norm: NormKind,
    pairs: usize,
    focus: &[(Vector, Real)],
    seed: u64,
) -> Result<f64> {
    let d = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = sample_domain(domain, pairs.max(2), seed);
    let diam = domain.diam().to_f64();
    let mut best = 0.0f64;
    let mut quotient = |x: &Vector, y: &Vector| -> Result<()> {
        let dx = distance(x, y, domain.norm());
        if dx.is_zero() {
            return Ok(());
        }
        let dy = distance(&f.eval(x)?, &f.eval(y)?, out_norm);
        best = best.max((dy / dx).to_f64());
        Ok(())
    };
    let focus_share = if focus.is_empty() { 0 } else { pairs / 2 };
    for i in 0..pairs - focus_share {
        let x = &base[i % base.len()];
        let y = if i % 2 == 0 {
            base[(i * 7 + 1) % base.len()].clone()
        } else {
            let scale = diam * 10f64.powi(-(rng.gen_range(1..=6)));
            let off: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
            x.add(&Vector::from_f64(&off))
        };
        if domain.contains(&y) {
            quotient(x, &y)?;
        }
    }
    let mag = domain.magnitude();
    for i in 0..focus_share {
        let (c, scale) = &focus[i % focus.len()];
        with_min_precision(bits_for_scale(scale, &mag), || -> Result<()> {
            // points in B(c, 2 scale) at a random fraction of the scale
            let pick = |rng: &mut ChaCha8Rng| {
                let off: Vec<Real> =
                    (0..d).map(|_| scale * Real::from_f64(rng.gen_range(-2.0..2.0))).collect();
                c.add(&Vector::new(off))
            };
            let x = pick(&mut rng);
            let y = pick(&mut rng);
            if domain.contains(&x) && domain.contains(&y) {
                quotient(&x, &y)?;
            }
            Ok(())
        })?;
    }
    Ok(best)
}
