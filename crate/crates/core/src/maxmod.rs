use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::LOG_SATURATION;

/// Circle samples before golden-section refinement.
const CIRCLE_SAMPLES: usize = 1024;

/// Golden-section bracket shrink factor `(sqrt 5 - 1)/2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Iterated maximum-modulus levels `log M^{n+1}(R)` starting from base `R`.
///
/// Levels strictly increase while representable; `saturated_at` marks the
/// first index whose level exceeds the log-representable range (~700), after
/// which no further level can be computed.
#[derive(Debug, Clone)]
pub struct MaxModLadder {
    pub base_log: f64,
    pub levels: Vec<f64>,
    pub saturated_at: Option<usize>,
}

fn log_mod_on_circle(params: &FamilyParams, r: f64, theta: f64) -> f64 {
    params
        .evaluate(Complex64::from_polar(r, theta))
        .log_modulus()
}

/// `log M(r) = log max_{|z|=r} |f(z)|`.
///
/// The circle is reduced to one period `[0, 2*pi/p)` of the rotational
/// symmetry `f(wz) = f(z)`, sampled densely, and the best bracket is refined
/// by golden section. The returned value is the maximum over every point
/// evaluated, so a grid point that is itself the maximizer is never lost to
/// refinement noise.
pub fn max_modulus(params: &FamilyParams, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("max_modulus requires r > 0, got {r}")));
    }
    let period = TAU / params.p() as f64;
    let step = period / CIRCLE_SAMPLES as f64;

    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0usize;
    for i in 0..CIRCLE_SAMPLES {
        let v = log_mod_on_circle(params, r, i as f64 * step);
        if v > best {
            best = v;
            best_i = i;
        }
    }

    // Bracket around the best sample, wrapping across the period.
    let mut a = (best_i as f64 - 1.0) * step;
    let mut b = (best_i as f64 + 1.0) * step;
    let tol = 1e-10 * period;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = log_mod_on_circle(params, r, c);
    let mut fd = log_mod_on_circle(params, r, d);
    best = best.max(fc).max(fd);
    let mut iter = 0;
    while (b - a) > tol && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = log_mod_on_circle(params, r, c);
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = log_mod_on_circle(params, r, d);
            best = best.max(fd);
        }
        iter += 1;
    }
    Ok(best)
}

/// Builds the ladder `levels[n] = log M^{n+1}(R)` by feeding `exp(level)`
/// back into `max_modulus` while the level stays representable.
pub fn maxmod_ladder(params: &FamilyParams, escape_radius: f64, n_max: usize) -> Result<MaxModLadder> {
    if n_max == 0 {
        return Err(Error::Domain("ladder needs n_max >= 1".into()));
    }
    let base_log = escape_radius.ln();
    let first = max_modulus(params, escape_radius)?;
    if first <= base_log {
        return Err(Error::LadderBase(escape_radius));
    }
    let mut levels = vec![first];
    let mut saturated_at = None;
    loop {
        let last = *levels.last().unwrap();
        if last > LOG_SATURATION {
            saturated_at = Some(levels.len() - 1);
            break;
        }
        if levels.len() == n_max {
            break;
        }
        let next = max_modulus(params, last.exp())?;
        if next <= last {
            return Err(Error::LadderBase(last.exp()));
        }
        levels.push(next);
    }
    Ok(MaxModLadder {
        base_log,
        levels,
        saturated_at,
    })
}

/// Smallest dyadic `R in {1, 2, 4, ...}` such that `M(r) > r` holds at 64
/// log-spaced samples of `[R, 8R]`. A sampled heuristic, not a proof.
pub fn find_escape_radius(params: &FamilyParams) -> Result<f64> {
    'candidates: for e in 0..=20u32 {
        let base = (1u64 << e) as f64;
        for i in 0..64 {
            let r = base * (8f64.ln() * i as f64 / 63.0).exp();
            if max_modulus(params, r)? <= r.ln() {
                continue 'candidates;
            }
        }
        return Ok(base);
    }
    Err(Error::EscapeRadiusNotFound)
}
