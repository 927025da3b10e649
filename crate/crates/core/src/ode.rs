//! Adaptive Dormand–Prince 5(4) integrator with PI step control for
//! complex state vectors.
//!
//! Steps always land exactly on requested output points and on
//! breakpoints, so piecewise-smooth right-hand sides (linearly
//! interpolated Hamiltonians) keep their full order.

use crate::error::{Error, Result};
use crate::matrix::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

#[derive(Debug, Clone, Copy)]
pub struct Rk45 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Rk45 {
    pub fn new(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 2_000_000 }
    }
}

/// Step statistics of one sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of the absolute (max-norm) local error estimates of accepted steps.
    pub err_sum: f64,
}

impl Rk45 {
    /// Integrates `y' = f(x, y)` from `x0` through every point of
    /// `targets` (monotone, all on one side of `x0`), calling `visit` with
    /// the target index and state each time one is reached. `breakpoints`
    /// are additional points the integrator must step onto.
    pub fn integrate<F, V>(
        &self,
        mut f: F,
        x0: f64,
        y0: &[C64],
        targets: &[f64],
        breakpoints: &[f64],
        mut visit: V,
    ) -> Result<OdeStats>
    where
        F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
        V: FnMut(usize, &[C64]),
    {
        let mut stats = OdeStats::default();
        let Some(&last) = targets.last() else {
            return Ok(stats);
        };
        let dir = if last >= x0 { 1.0 } else { -1.0 };
        if targets.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) || (targets[0] - x0) * dir < 0.0 {
            return Err(Error::Invalid("integration targets must be monotone away from x0".into()));
        }

        // merged stop list: (x, Some(target index)) or (x, None) for breakpoints
        let mut stops: Vec<(f64, Option<usize>)> = targets.iter().enumerate().map(|(i, &t)| (t, Some(i))).collect();
        for &bp in breakpoints {
            if (bp - x0) * dir > 0.0 && (last - bp) * dir > 0.0 {
                stops.push((bp, None));
            }
        }
        stops.sort_by(|p, q| ((p.0 - x0) * dir).total_cmp(&((q.0 - x0) * dir)).then(p.1.is_none().cmp(&q.1.is_none())));

        let n = y0.len();
        let mut y = y0.to_vec();
        let mut x = x0;
        let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]);
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        let mut y_new = vec![C64::new(0.0, 0.0); n];

        f(x, &y, &mut k[0])?;
        let span = (last - x0).abs();
        let mut h = self.initial_step(&y, &k[0], span) * dir;
        let mut err_old = 1e-4_f64;

        for &(stop, target) in &stops {
            while (stop - x) * dir > 0.0 {
                let remaining = stop - x;
                let h_prop = h;
                let mut last_step = false;
                if (h - remaining) * dir >= 0.0 || (remaining - h).abs() <= 1e-12 * remaining.abs() {
                    h = remaining;
                    last_step = true;
                }
                if h.abs() < 1e-14 * x.abs().max(1.0) {
                    return Err(Error::StepUnderflow { x, h: h.abs() });
                }
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::TooManySteps { steps: self.max_steps, x: stop });
                }

                // stages
                let hc = |v: f64| C64::new(v * h, 0.0);
                for i in 0..n {
                    tmp[i] = y[i] + hc(A21) * k[0][i];
                }
                f(x + C2 * h, &tmp, &mut k[1])?;
                for i in 0..n {
                    tmp[i] = y[i] + hc(A31) * k[0][i] + hc(A32) * k[1][i];
                }
                f(x + C3 * h, &tmp, &mut k[2])?;
                for i in 0..n {
                    tmp[i] = y[i] + hc(A41) * k[0][i] + hc(A42) * k[1][i] + hc(A43) * k[2][i];
                }
                f(x + C4 * h, &tmp, &mut k[3])?;
                for i in 0..n {
                    tmp[i] = y[i] + hc(A51) * k[0][i] + hc(A52) * k[1][i] + hc(A53) * k[2][i] + hc(A54) * k[3][i];
                }
                f(x + C5 * h, &tmp, &mut k[4])?;
                for i in 0..n {
                    tmp[i] = y[i]
                        + hc(A61) * k[0][i]
                        + hc(A62) * k[1][i]
                        + hc(A63) * k[2][i]
                        + hc(A64) * k[3][i]
                        + hc(A65) * k[4][i];
                }
                let x_end = if last_step { stop } else { x + h };
                f(x_end, &tmp, &mut k[5])?;
                for i in 0..n {
                    y_new[i] = y[i]
                        + hc(A71) * k[0][i]
                        + hc(A73) * k[2][i]
                        + hc(A74) * k[3][i]
                        + hc(A75) * k[4][i]
                        + hc(A76) * k[5][i];
                }
                f(x_end, &y_new, &mut k[6])?;

                let mut err_sq = 0.0;
                let mut err_abs = 0.0_f64;
                for i in 0..n {
                    let e = hc(E1) * k[0][i]
                        + hc(E3) * k[2][i]
                        + hc(E4) * k[3][i]
                        + hc(E5) * k[4][i]
                        + hc(E6) * k[5][i]
                        + hc(E7) * k[6][i];
                    let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                    let r = e.norm() / sc;
                    err_sq += r * r;
                    err_abs = err_abs.max(e.norm());
                }
                let err = (err_sq / n.max(1) as f64).sqrt();
                if !err.is_finite() {
                    stats.rejected += 1;
                    h *= FAC_MIN;
                    continue;
                }

                if err <= 1.0 {
                    stats.accepted += 1;
                    stats.err_sum += err_abs;
                    let fac = (SAFETY * err.max(1e-10).powf(-PI_ALPHA) * err_old.powf(PI_BETA)).clamp(FAC_MIN, FAC_MAX);
                    err_old = err.max(1e-4);
                    x = x_end;
                    std::mem::swap(&mut y, &mut y_new);
                    // FSAL, unless a breakpoint invalidates the last stage
                    if last_step {
                        f(x, &y, &mut k[0])?;
                    } else {
                        let (first, rest) = k.split_at_mut(1);
                        first[0].copy_from_slice(&rest[5]);
                    }
                    // a step clamped onto a stop does not shrink the proposal
                    h = if last_step { h_prop * fac.min(1.0) } else { h * fac };
                } else {
                    stats.rejected += 1;
                    let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
                    h *= fac;
                }
            }
            if let Some(i) = target {
                visit(i, &y);
            }
        }
        Ok(stats)
    }

    fn initial_step(&self, y: &[C64], dy: &[C64], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (yi, fi) in y.iter().zip(dy) {
            let sc = self.atol + self.rtol * yi.norm();
            d0 += (yi.norm() / sc).powi(2);
            d1 += (fi.norm() / sc).powi(2);
        }
        let n = y.len().max(1) as f64;
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-3) } else { 0.01 * d0 / d1 };
        // a modest cap keeps the first step from overshooting wildly
        h.min(0.05 * span.max(1e-12)).max(1e-12 * span.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_hits_targets() {
        let rk = Rk45::new(1e-11);
        let lambda = C64::new(-0.5, 2.0);
        let targets = [0.25, 0.5, 1.0, 2.0];
        let mut got = vec![C64::new(0.0, 0.0); 4];
        rk.integrate(
            |_, y, dy| {
                dy[0] = lambda * y[0];
                Ok(())
            },
            0.0,
            &[C64::new(1.0, 0.0)],
            &targets,
            &[0.7],
            |i, y| got[i] = y[0],
        )
        .unwrap();
        for (t, g) in targets.iter().zip(&got) {
            assert!((g - (lambda * t).exp()).norm() < 1e-9, "{t}: {g}");
        }
    }

    #[test]
    fn backward_integration() {
        let rk = Rk45::new(1e-11);
        let mut got = C64::new(0.0, 0.0);
        rk.integrate(
            |x, _, dy| {
                dy[0] = C64::new(x.cos(), 0.0);
                Ok(())
            },
            1.0,
            &[C64::new(0.0, 0.0)],
            &[-1.0],
            &[],
            |_, y| got = y[0],
        )
        .unwrap();
        assert!((got.re - ((-1.0f64).sin() - 1.0f64.sin())).abs() < 1e-10);
    }

    #[test]
    fn target_at_start_is_visited() {
        let rk = Rk45::new(1e-9);
        let mut seen = Vec::new();
        rk.integrate(
            |_, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[C64::new(1.0, 0.0)],
            &[0.0, 0.5],
            &[],
            |i, y| seen.push((i, y[0])),
        )
        .unwrap();
        assert_eq!(seen.len(), 2);
        assert_eq!(seen[0].1, C64::new(1.0, 0.0));
    }

    #[test]
    fn non_monotone_targets_rejected() {
        let rk = Rk45::new(1e-9);
        let r = rk.integrate(|_, _, _| Ok(()), 0.0, &[C64::new(1.0, 0.0)], &[0.5, 0.2], &[], |_, _| {});
        assert!(matches!(r, Err(Error::Invalid(_))));
    }
}
