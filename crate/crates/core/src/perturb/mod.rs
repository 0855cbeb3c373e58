//! Local linearization of a 1-Lipschitz map around a separated point set.
//!
//! Given `f`, a finite set `Gamma`, an operator `L` with `||L|| ≤ 1 - r` and a
//! radius `r`, builds a 1-Lipschitz `g` with `||g - f|| < r` that is exactly
//! `z -> g(x) + L(z - x)` on `B(x, alpha)` for every `x` in `Gamma`.

use crate::error::{Error, Result};
use crate::lipfun::{LipFun, Patch};
use crate::nets::separation;
use crate::real::Real;
use crate::space::{Domain, LinearMap, Vector};

/// Radii and factors of one perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbParams {
    pub r: Real,
    pub s: Real,
    pub beta: Real,
    pub alpha: Real,
    /// `s / (s - beta)`, the factor applied to `L` before the final shrink.
    pub blow_up: Real,
    pub diam: Real,
}

/// Patch radius: `min(0.99, sep(Gamma)/4, margin(Gamma)/4)`, so that `Gamma`
/// is `4s`-separated and `4s` away from the boundary.
pub fn choose_s(gamma: &[Vector], domain: &Domain) -> Result<Real> {
    if gamma.is_empty() {
        return Err(Error::EmptySet);
    }
    let sep = separation(gamma, domain.norm());
    if sep.is_zero() {
        return Err(Error::ZeroSeparation);
    }
    let mut margin = Real::infinity();
    for x in gamma {
        margin = margin.min(&domain.dist_to_boundary(x)?);
    }
    if margin.is_zero() {
        return Err(Error::ZeroMargin);
    }
    let four = Real::from_i64(4);
    Ok(Real::from_f64(0.99).min(&(sep / &four)).min(&(margin / &four)))
}

/// `beta = r s / (4 (1 + diam))` and `alpha = r^2 s / (16 (1 + diam)^2)`.
pub fn blend_params(r: &Real, s: &Real, diam: &Real) -> Result<PerturbParams> {
    let (zero, one) = (Real::zero(), Real::one());
    if !(*r > zero && *r < one) {
        return Err(Error::InvalidArgument(format!("r must lie in (0, 1), got {r}")));
    }
    if !(*s > zero && *s < one) {
        return Err(Error::InvalidArgument(format!("s must lie in (0, 1), got {s}")));
    }
    if !(*diam > zero && diam.is_finite()) {
        return Err(Error::InvalidArgument(format!("diameter must be positive, got {diam}")));
    }
    let q = Real::one() + diam;
    let beta = r * s / (Real::from_i64(4) * &q);
    let alpha = r * r * s / (Real::from_i64(16) * &q * &q);
    let blow_up = s / (s - &beta);
    let two = Real::from_i64(2);
    // alpha = beta^2 / s in exact arithmetic; allow for the last bit
    let slack = Real::one() + Real::pow2(16 - crate::real::working_precision() as i32);
    let ok = beta > zero
        && beta < s / &two
        && alpha > zero
        && alpha <= &beta * &beta / s * &slack
        && alpha < *r
        && beta <= r * s / (Real::from_i64(4) * &q) * &slack;
    if !ok {
        return Err(Error::InvalidArgument("perturbation radii out of order".into()));
    }
    Ok(PerturbParams { r: r.clone(), s: s.clone(), beta, alpha, blow_up, diam: diam.clone() })
}

#[derive(Debug, Clone)]
pub struct PerturbOptions {
    /// Continuity samples per patch sphere while patching. Continuity holds
    /// by construction here, so a light check suffices; `verify` runs the
    /// full one.
    pub sphere_samples: usize,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        PerturbOptions { sphere_samples: 8 }
    }
}

/// Result of [`linearize_near`].
#[derive(Debug, Clone)]
pub struct Linearization {
    pub g: LipFun,
    pub alpha: Real,
    pub params: PerturbParams,
    /// `f(x0)` for the lexicographically smallest `x0` in `Gamma`.
    pub shift: Vector,
    /// Certified `||g - f||_inf ≤ beta (2 + diam / s)`, which is below `r`.
    pub bound: Real,
}

pub fn linearize_near(f: &LipFun, gamma: &[Vector], l: &LinearMap, r: &Real, domain: &Domain) -> Result<Linearization> {
    linearize_near_with(f, gamma, l, r, domain, &PerturbOptions::default())
}

pub fn linearize_near_with(
    f: &LipFun,
    gamma: &[Vector],
    l: &LinearMap,
    r: &Real,
    domain: &Domain,
    opts: &PerturbOptions,
) -> Result<Linearization> {
    let d = domain.dim();
    if f.in_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: f.in_dim() });
    }
    if l.cols() != d || l.rows() != f.out_dim() {
        return Err(Error::DimensionMismatch { expected: f.out_dim(), found: l.rows() });
    }
    if !f.is_one_lipschitz() {
        return Err(Error::NotOneLipschitz(f.lip_cert()));
    }
    let op = l.op_norm()?;
    let limit = Real::one() - r;
    if op > limit.to_f64() {
        return Err(Error::OperatorTooLarge { norm: op, limit: limit.display_short() });
    }
    let s = choose_s(gamma, domain)?;
    let diam = domain.diam();
    let params = blend_params(r, &s, &diam)?;
    let PerturbParams { beta, alpha, blow_up, .. } = &params;
    let norm = domain.norm();

    let x0 = gamma.iter().min_by(|a, b| a.lex_cmp(b)).expect("gamma is nonempty");
    let shift = f.eval(x0)?;
    let f0 = LipFun::add_const(f, shift.neg())?;

    let id = LipFun::identity(d, norm);
    let zero_d = LipFun::zero(d, d);
    let to_local = |x: &Vector| {
        LipFun::affine(Vector::zeros(d), LinearMap::identity(d, norm), x.clone()).expect("dimensions agree")
    };
    // z -> x + m(z - x)
    let recenter = |m: &LipFun, x: &Vector| -> Result<LipFun> {
        LipFun::add_const(&LipFun::precompose(m, &to_local(x))?, x.clone())
    };

    // g0: constant f0(x) on B(x, beta), blended back to f0 at radius s
    let squash = LipFun::radial_blend(beta.clone(), s.clone(), &zero_d, &id, norm)?;
    let mut outer_patches = Vec::with_capacity(gamma.len());
    for x in gamma {
        let inner = LipFun::precompose(&f0, &recenter(&squash, x)?)?;
        outer_patches.push(Patch { center: x.clone(), radius: s.clone(), inner });
    }
    let g0 = LipFun::patch_with(&f0, outer_patches, domain, opts.sphere_samples)?;

    // g1: the affine piece h_x(z) = g0(x) + T(z - x) seen through
    // Psi = Phi(alpha, beta, id, 0) on B(x, beta)
    let t = l.scale(blow_up);
    let psi = LipFun::radial_blend(alpha.clone(), beta.clone(), &id, &zero_d, norm)?;
    let mut inner_patches = Vec::with_capacity(gamma.len());
    for x in gamma {
        let h = LipFun::affine(f0.eval(x)?, t.clone(), x.clone())?;
        let inner = LipFun::precompose(&h, &recenter(&psi, x)?)?;
        inner_patches.push(Patch { center: x.clone(), radius: beta.clone(), inner });
    }
    let g1 = LipFun::patch_with(&g0, inner_patches, domain, opts.sphere_samples)?;

    let g2 = LipFun::scale((&s - beta) / &s, &g1);
    let g = LipFun::add_const(&g2, shift.clone())?;
    let bound = beta * (Real::from_i64(2) + &diam / &s);
    Ok(Linearization { g, alpha: alpha.clone(), params, shift, bound })
}
