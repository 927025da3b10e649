//! Seeded random systems and GBDT parameters for property runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::{CanonicalSystem, HamiltonianSpec, Sampled};
use crate::closed_form::Example51;
use crate::error::{Error, Result};
use crate::gbdt::{spectrum_distance, GbdtParams};
use crate::matrix::{c, from_rows, identity, inverse, norm2, re, CMatrix, C64, I};

/// Minimal distance of `sigma(B)` from the interval in generated cases.
pub const MIN_SPECTRUM_DISTANCE: f64 = 0.25;
/// Bound on `||(B - x)^{-1}||` over the interval in generated cases.
pub const MAX_RESOLVENT: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct SampleCase {
    pub seed: u64,
    pub system: CanonicalSystem,
    pub params: GbdtParams,
}

fn unit(rng: &mut impl Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

fn complex(rng: &mut impl Rng) -> C64 {
    c(unit(rng), unit(rng))
}

fn random_matrix(rng: &mut impl Rng, r: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(r, k, |_, _| complex(rng))
}

/// `beta(x) = u(x) [1, i r(x)]` (so `beta J beta* = 0` for the
/// off-diagonal `J`) with smooth random `u` and real `r`, sampled on
/// `points` nodes of `[a, b]`; base point `a`.
pub fn random_degenerate_system(rng: &mut impl Rng, interval: (f64, f64), points: usize) -> Result<CanonicalSystem> {
    let (a, b) = interval;
    let (u0, u1, u2) = (complex(rng), complex(rng), complex(rng));
    let (r0, r1, r2) = (unit(rng), unit(rng), unit(rng));
    let freq = 1.0 + 2.0 * rng.random::<f64>();
    let x: Vec<f64> = (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect();
    let beta = Sampled::from_fn(x, |t| {
        let s = (t - a) / (b - a);
        let u = u0 + u1 * s + u2 * (freq * s).sin() + re(0.5);
        let r = r0 + r1 * s + r2 * s * s;
        from_rows(&[[u, I * u * r]])
    })?;
    CanonicalSystem::new(Example51::j(), interval, a, HamiltonianSpec::Factored(beta))
}

/// Draws valid parameters of order `n`: `S0 = L L* + I/2 > 0`, random
/// `Pi0`, and `A(xi) = M S0^{-1}` with `M = i Pi0 J Pi0* / 2 + Y`, `Y`
/// Hermitian, so that the identity holds by construction. Redraws until
/// `sigma(B)` keeps [`MIN_SPECTRUM_DISTANCE`] from the interval and the
/// resolvent stays below [`MAX_RESOLVENT`].
pub fn random_params(rng: &mut impl Rng, sys: &CanonicalSystem, n: usize) -> Result<GbdtParams> {
    let (a, b) = sys.interval();
    let xi = sys.xi();
    let j = sys.j();
    for _ in 0..1000 {
        let l = random_matrix(rng, n, n);
        let s0 = &l * l.adjoint() + identity(n) * re(0.5);
        let pi0 = random_matrix(rng, n, sys.m());
        let y = random_matrix(rng, n, n);
        let y = (&y + y.adjoint()) * re(0.5);
        let mm = &pi0 * j * pi0.adjoint() * (I * 0.5) + y;
        let Ok(a0) = inverse(&s0).map(|s0_inv| mm * s0_inv) else { continue };
        let Ok(a0_inv) = inverse(&a0) else { continue };
        let bmat = a0_inv + identity(n) * re(xi);
        let p = GbdtParams { b: bmat, s0, pi0, xi };
        if spectrum_distance(&p, a, b)? < MIN_SPECTRUM_DISTANCE || norm2(&p.b) > 50.0 {
            continue;
        }
        let resolvent_ok = (0..=16).all(|i| {
            let x = a + (b - a) * i as f64 / 16.0;
            p.a_at(x).map(|ax| norm2(&ax) <= MAX_RESOLVENT).unwrap_or(false)
        });
        if resolvent_ok {
            return Ok(p);
        }
    }
    Err(Error::Invalid("could not draw valid parameters in 1000 attempts".into()))
}

/// Seeded case on `[0, 1]`: a random degenerate system (65 nodes) and
/// parameters of order `1 + seed % 4`.
pub fn random_case(seed: u64) -> Result<SampleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let system = random_degenerate_system(&mut rng, (0.0, 1.0), 65)?;
    let n = 1 + (seed % 4) as usize;
    let params = random_params(&mut rng, &system, n)?;
    Ok(SampleCase { seed, system, params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{kernel_bound, validate_system, ValidationOptions};
    use crate::gbdt::{validate_params, ParamOptions};

    #[test]
    fn cases_are_valid_and_reproducible() {
        for seed in 0..20 {
            let case = random_case(seed).unwrap();
            assert!(validate_system(&case.system, &ValidationOptions::default()).is_empty());
            let v = validate_params(&case.params, &case.system, &ParamOptions::default());
            assert!(v.is_empty(), "seed {seed}: {v:?}");
            assert!(kernel_bound(&case.system).unwrap().is_finite());
            assert_eq!(random_case(seed).unwrap().params, case.params);
        }
    }
}
