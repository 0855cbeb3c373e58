use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{norm, Domain, NormKind, Vector};
use crate::error::{Error, Result};
use crate::real::{working_precision, Real};

const PRIMES: [u32; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

/// `n` points of a Halton sequence in `[0,1)^d`, rotated modulo one by a
/// shift drawn from `seed`.
pub fn halton(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(d <= PRIMES.len(), "halton sequence supports at most {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let x = radical_inverse(i, PRIMES[j]) + shift[j];
                    if x >= 1.0 { x - 1.0 } else { x }
                })
                .collect()
        })
        .collect()
}

/// Deterministic sample of the closed ball `B(c, r)` under `kind`.
///
/// The first `2d + 1` points are the center and the axis extremes
/// `c +- r e_i`; the rest alternate between points on the sphere and points
/// inside it, with directions from a Halton sequence. Offsets are computed at
/// the working precision, so the caller must raise it for tiny `r`.
pub fn sample_ball(c: &Vector, r: &Real, kind: NormKind, budget: usize, seed: u64) -> Result<Vec<Vector>> {
    let d = c.dim();
    let needed = 2 * d + 1;
    if budget < needed {
        return Err(Error::BudgetTooSmall { needed, got: budget });
    }
    if *r <= Real::zero() {
        return Err(Error::NonPositiveRadius);
    }
    let mut out = Vec::with_capacity(budget);
    out.push(c.clone());
    for i in 0..d {
        let e = Vector::basis(d, i).scale(r);
        out.push(c.add(&e));
        out.push(c.sub(&e));
    }
    let extra = budget - needed;
    if extra == 0 {
        return Ok(out);
    }
    // one spare coordinate drives the radial fraction of interior points
    let shrink = Real::one() - Real::pow2(8 - working_precision() as i32);
    let mut seq = halton(d + 1, 4 * extra + 8, seed).into_iter();
    let mut k = 0usize;
    while out.len() < budget {
        let Some(h) = seq.next() else { break };
        let dir = Vector::from_f64(&h[..d].iter().map(|x| 2.0 * x - 1.0).collect::<Vec<_>>());
        let len = norm(&dir, kind);
        if len.to_f64() < 1e-3 {
            continue;
        }
        let frac = if k % 2 == 0 { 1.0 } else { h[d].max(1e-3).powf(1.0 / d as f64) };
        k += 1;
        let mut u = dir.scale(&(r * Real::from_f64(frac) / len));
        while norm(&u, kind) > *r {
            u = u.scale(&shrink);
        }
        out.push(c.add(&u));
    }
    Ok(out)
}

/// Deterministic low-discrepancy sample of a domain: Halton points of its
/// bounding box that fall inside it, up to `n` of them.
pub fn sample_domain(domain: &Domain, n: usize, seed: u64) -> Vec<Vector> {
    let (lo, hi) = domain.bounding_box();
    let (lo, hi) = (lo.to_f64(), hi.to_f64());
    let mut out = Vec::with_capacity(n);
    // a ball fills at least 1/d! of its box under every supported norm
    let cap = 8 * n * (1..=domain.dim()).product::<usize>().max(1) + 16;
    for h in halton(domain.dim(), cap, seed) {
        if out.len() >= n {
            break;
        }
        let p = Vector::from_f64(&h.iter().zip(lo.iter().zip(&hi)).map(|(t, (a, b))| a + t * (b - a)).collect::<Vec<_>>());
        if domain.contains(&p) {
            out.push(p);
        }
    }
    out
}
