//! Numerical probes of local linear behaviour.
//!
//! Every quantity here is a finite surrogate: suprema over balls become
//! maxima over deterministic samples, and limits as the scale shrinks become
//! minima over an explicit [`ScaleLadder`]. Reports always carry the ladder.

use crate::error::{Error, Result};
use crate::lipfun::LipFun;
use crate::real::{bits_for_scale, with_min_precision, Real};
use crate::space::{norm, sample_ball, Domain, LinearMap, Vector};

/// Decreasing probe radii with a per-scale sampling budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleLadder {
    radii: Vec<Real>,
    pub budget: usize,
    pub seed: u64,
}

impl ScaleLadder {
    /// Radii sorted decreasingly with duplicates dropped; all must be positive.
    pub fn new(mut radii: Vec<Real>, budget: usize, seed: u64) -> Result<Self> {
        if radii.iter().any(|r| !(*r > Real::zero() && r.is_finite())) {
            return Err(Error::NonPositiveRadius);
        }
        radii.sort_by(|a, b| b.partial_cmp(a).expect("finite radii"));
        radii.dedup();
        Ok(ScaleLadder { radii, budget, seed })
    }

    /// `r0, r0 q, ..., r0 q^(count-1)`.
    pub fn geometric(r0: &Real, ratio: &Real, count: usize, budget: usize, seed: u64) -> Result<Self> {
        if !(*ratio > Real::zero() && *ratio < Real::one()) {
            return Err(Error::InvalidArgument("ladder ratio must lie in (0, 1)".into()));
        }
        let mut radii = Vec::with_capacity(count);
        let mut r = r0.clone();
        for _ in 0..count {
            radii.push(r.clone());
            r = &r * ratio;
        }
        ScaleLadder::new(radii, budget, seed)
    }

    /// Ratio 1/2 from half the boundary margin of `x`, 20 steps.
    pub fn default_at(domain: &Domain, x: &Vector, budget: usize, seed: u64) -> Result<Self> {
        let margin = domain.dist_to_boundary(x)?;
        if margin.is_zero() {
            return Err(Error::ZeroMargin);
        }
        ScaleLadder::geometric(&(margin / Real::from_i64(2)), &Real::ratio(1, 2), 20, budget, seed)
    }

    /// Adds extra radii, such as the exact scales where a construction is
    /// affine.
    pub fn with_injected(&self, extra: &[Real]) -> Result<Self> {
        let mut radii = self.radii.clone();
        radii.extend_from_slice(extra);
        ScaleLadder::new(radii, self.budget, self.seed)
    }

    pub fn radii(&self) -> &[Real] {
        &self.radii
    }
}

/// Extra precision for evaluating at sampled points.
pub const EXACT_GUARD_BITS: usize = 128;

fn magnitude(x: &Vector) -> Real {
    x.coords().iter().fold(Real::one(), |m, c| m.max(&c.abs()))
}

/// `max_u ||f(x+u) - f(x) - L u|| / r` over a sample of the closed ball of
/// radius `r`, computed at a precision that resolves `r` next to `x`.
pub fn dq_error(
    f: &LipFun,
    domain: &Domain,
    x: &Vector,
    l: &LinearMap,
    r: &Real,
    budget: usize,
    seed: u64,
) -> Result<Real> {
    if l.cols() != f.in_dim() || l.rows() != f.out_dim() {
        return Err(Error::DimensionMismatch { expected: f.out_dim(), found: l.rows() });
    }
    if *r <= Real::zero() {
        return Err(Error::NonPositiveRadius);
    }
    if domain.dist_to_boundary(x)? < *r {
        return Err(Error::BallEscapesDomain { radius: r.display_short() });
    }
    let bits = bits_for_scale(r, &magnitude(x));
    let points = with_min_precision(bits, || sample_ball(x, r, domain.norm(), budget, seed))?;
    // guard bits above the sampling precision make affine arithmetic on the
    // sample exact, so exactly linear maps give exactly zero
    with_min_precision(bits + EXACT_GUARD_BITS, || {
        let fx = f.eval(x)?;
        let mut worst = Real::zero();
        for z in &points {
            let u = z.sub(x);
            let e = f.eval(z)?.sub(&fx).sub(&l.apply(&u)?);
            worst = worst.max(&norm(&e, l.out_norm()));
        }
        Ok(worst / r)
    })
}

/// Per-scale errors and their minimum, the membership score.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub values: Vec<(Real, Real)>,
    pub score: Real,
}

pub fn dq_profile(f: &LipFun, domain: &Domain, x: &Vector, l: &LinearMap, ladder: &ScaleLadder) -> Result<Profile> {
    let mut values = Vec::with_capacity(ladder.radii.len());
    let mut score = Real::infinity();
    for r in &ladder.radii {
        let e = dq_error(f, domain, x, l, r, ladder.budget, ladder.seed)?;
        score = score.min(&e);
        values.push((r.clone(), e));
    }
    Ok(Profile { values, score })
}

/// Forward quotients `(f(x + t v) - f(x)) / t` over the ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct DiniReport {
    pub values: Vec<(Real, Real)>,
    /// Smallest quotient: the ladder surrogate for the lower Dini derivative.
    pub lower: Real,
}

pub fn dini_lower(f: &LipFun, domain: &Domain, x: &Vector, v: &Vector, ladder: &ScaleLadder) -> Result<DiniReport> {
    if f.out_dim() != 1 {
        return Err(Error::NotScalar(f.out_dim()));
    }
    if v.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: v.dim() });
    }
    let vn = norm(v, domain.norm());
    let mut values = Vec::with_capacity(ladder.radii.len());
    let mut lower = Real::infinity();
    for t in &ladder.radii {
        let bits = bits_for_scale(&(t * &vn), &magnitude(x));
        let y = with_min_precision(bits, || x.add(&v.scale(t)));
        if !domain.contains(&y) {
            return Err(Error::OutsideDomain);
        }
        let q = with_min_precision(bits + EXACT_GUARD_BITS, || -> Result<Real> {
            let d = f.eval(&y)?.sub(&f.eval(x)?);
            Ok(&d.coords()[0] / t)
        })?;
        lower = lower.min(&q);
        values.push((t.clone(), q));
    }
    Ok(DiniReport { values, lower })
}

pub const DINI_TOL: f64 = 1e-6;

/// Both one-sided lower derivatives along `v` and `-v`; the certificate fires
/// when both are below `-tol`, which rules out any Dini subgradient at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiniCertificate {
    pub fires: bool,
    pub forward: DiniReport,
    pub backward: DiniReport,
}

pub fn dini_empty_certificate(
    f: &LipFun,
    domain: &Domain,
    x: &Vector,
    v: &Vector,
    ladder: &ScaleLadder,
    tol: f64,
) -> Result<DiniCertificate> {
    let forward = dini_lower(f, domain, x, v, ladder)?;
    let backward = dini_lower(f, domain, x, &v.neg(), ladder)?;
    let t = Real::from_f64(-tol);
    let fires = forward.lower < t && backward.lower < t;
    Ok(DiniCertificate { fires, forward, backward })
}

/// Candidate with the smallest [`dq_error`] at scale `q`; ties go to the
/// earliest candidate. Returns its index and error.
pub fn best_local_linear(
    f: &LipFun,
    domain: &Domain,
    x: &Vector,
    q: &Real,
    candidates: &[LinearMap],
    budget: usize,
    seed: u64,
) -> Result<(usize, Real)> {
    let mut best: Option<(usize, Real)> = None;
    for (i, l) in candidates.iter().enumerate() {
        let e = dq_error(f, domain, x, l, q, budget, seed)?;
        if best.as_ref().map_or(true, |(_, b)| e < *b) {
            best = Some((i, e));
        }
    }
    best.ok_or(Error::EmptyCandidates)
}

/// One row of a probe report.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub x: Vector,
    pub op: String,
    pub scale: Real,
    pub value: Real,
}

/// CSV with columns `x1..xd, op, scale, dq`. Summary lines go to the caller.
pub fn report_csv(rows: &[ProbeRow]) -> String {
    let d = rows.first().map_or(0, |r| r.x.dim());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.extend(["op".into(), "scale".into(), "dq".into()]);
    w.write_record(&header).expect("in-memory csv");
    for r in rows {
        let mut rec: Vec<String> = r.x.coords().iter().map(Real::display_short).collect();
        rec.push(r.op.clone());
        rec.push(r.scale.display_short());
        rec.push(r.value.display_short());
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests;
