//! Orbit classification against the iterated maximum-modulus ladder, real
//! fixed points with multipliers, and the growth computations behind the
//! escape arguments.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::maxmod::MaxModLadder;
use crate::scaled::ScaledComplex;
use crate::{LOG_ESCAPE, LOG_SATURATION};

/// Largest witness level probed when matching an orbit against the ladder.
pub const MAX_FAST_LEVEL: usize = 3;

/// Relative slack for ladder comparisons; absorbs the exp/ln round-trip
/// between a level and the radius fed back into the maximum modulus.
const LADDER_SLACK: f64 = 1e-9;

/// Convergence threshold for attracted real orbits.
const ATTRACTION_TOL: f64 = 1e-12;

/// Verdict tags for classified orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitClass {
    FastEscaping,
    Escaping,
    BoundedWithinBudget,
    AttractedReal,
    Undetermined,
}

/// One classified orbit: the stored trajectory in scaled form, the first
/// index past the escape threshold, the smallest witness level passing the
/// ladder test, and the verdict.
///
/// The verdict is `FastEscaping` only for witness level 0 (the orbit clears
/// the ladder with no head start); levels `1..=3` are still recorded in
/// `fast_level` but classify as `Escaping`.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub seed: Complex64,
    pub points: Vec<ScaledComplex>,
    pub escape_entry: Option<usize>,
    pub fast_level: Option<usize>,
    pub verdict: OrbitClass,
    /// Set when iteration stopped because a point left the representable
    /// range (its successors exceed any storable level).
    pub saturated: bool,
}

/// Classifies the orbit of `z` within `budget` iterations against the ladder
/// built from `escape_radius`.
pub fn classify_orbit(
    params: &FamilyParams,
    z: Complex64,
    budget: usize,
    escape_radius: f64,
    ladder: &MaxModLadder,
) -> OrbitRecord {
    debug_assert!(budget >= 3);
    let real_seed = z.im == 0.0;
    let mut points = vec![ScaledComplex::from_complex(z)];
    let mut saturated = false;
    let mut attracted = false;

    let mut cur = z;
    for _ in 0..budget {
        let next = if real_seed {
            // Reflection symmetry keeps real orbits real; drop the noise.
            let (s, m) = params.evaluate_parts(Complex64::new(cur.re, 0.0));
            ScaledComplex::new(Complex64::new(s.re, 0.0), m)
        } else {
            params.evaluate(cur)
        };
        points.push(next);
        if next.log_modulus() > LOG_SATURATION {
            saturated = true;
            break;
        }
        let next_c = next.to_complex();
        if real_seed && (next_c.re - cur.re).abs() <= ATTRACTION_TOL * (1.0 + cur.re.abs()) {
            attracted = true;
            break;
        }
        cur = next_c;
    }

    let threshold = LOG_ESCAPE.max(escape_radius.ln());
    let escape_entry = points.iter().position(|p| p.log_modulus() >= threshold);

    let fast_level = if attracted {
        None
    } else {
        find_fast_level(&points, saturated, ladder)
    };
    let fast_level = match (fast_level, escape_entry) {
        (Some(l), Some(_)) => Some(l),
        _ => None,
    };

    let logs: Vec<f64> = points.iter().map(|p| p.log_modulus()).collect();
    let n = logs.len();
    let tail_increasing = n >= 3 && logs[n - 1] > logs[n - 2] && logs[n - 2] > logs[n - 3];
    let max_log = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let verdict = if attracted {
        OrbitClass::AttractedReal
    } else if fast_level == Some(0) {
        OrbitClass::FastEscaping
    } else if escape_entry.is_some() && tail_increasing {
        OrbitClass::Escaping
    } else if !saturated && max_log < LOG_ESCAPE {
        OrbitClass::BoundedWithinBudget
    } else {
        OrbitClass::Undetermined
    };

    OrbitRecord {
        seed: z,
        points,
        escape_entry,
        fast_level,
        verdict,
        saturated,
    }
}

/// Smallest `L <= MAX_FAST_LEVEL` with `log|f^(n+L)(z)| >= levels[n-1]` for
/// every stored level. Points past a saturation stop count as passing: the
/// orbit provably left the representable range, and one more application of
/// `f` exceeds any storable level.
fn find_fast_level(points: &[ScaledComplex], saturated: bool, ladder: &MaxModLadder) -> Option<usize> {
    'levels: for level in 0..=MAX_FAST_LEVEL {
        for (n_minus_1, &required) in ladder.levels.iter().enumerate() {
            let idx = n_minus_1 + 1 + level;
            if idx < points.len() {
                let lm = points[idx].log_modulus();
                if lm < required - LADDER_SLACK * (1.0 + required.abs()) {
                    continue 'levels;
                }
            } else if !saturated {
                continue 'levels; // ran out of budget without evidence
            }
        }
        return Some(level);
    }
    None
}

/// Kind of a real fixed point, from the multiplier modulus against 1 with
/// tolerance `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    Attracting,
    Repelling,
    Neutral,
}

/// A real fixed point `f(x*) = x*` with its multiplier `f'(x*)`.
#[derive(Debug, Clone, Copy)]
pub struct RealFixedPoint {
    pub x_star: f64,
    pub multiplier: f64,
    pub kind: FixedPointKind,
}

/// Brackets sign changes of `f(x) - x` over `[a, b]` at 10^4 uniform samples
/// and refines each by bisection to width `1e-12`.
pub fn real_fixed_points(params: &FamilyParams, a: f64, b: f64) -> Vec<RealFixedPoint> {
    assert!(a < b);
    const SAMPLES: usize = 10_000;
    let g = |x: f64| params.evaluate_real(x) - x;
    let mut out = Vec::new();
    let step = (b - a) / (SAMPLES - 1) as f64;
    let mut x = a;
    let mut gx = g(x);
    for i in 1..SAMPLES {
        let x2 = a + step * i as f64;
        let gx2 = g(x2);
        if gx == 0.0 || gx * gx2 < 0.0 {
            let root = if gx == 0.0 {
                x
            } else {
                let (mut lo, mut hi, mut glo) = (x, x2, gx);
                for _ in 0..200 {
                    if hi - lo <= 1e-12 {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let gm = g(mid);
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if glo * gm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        glo = gm;
                    }
                }
                0.5 * (lo + hi)
            };
            let multiplier = params.derivative(Complex64::new(root, 0.0)).to_complex().re;
            let kind = if multiplier.abs() < 1.0 - 1e-9 {
                FixedPointKind::Attracting
            } else if multiplier.abs() > 1.0 + 1e-9 {
                FixedPointKind::Repelling
            } else {
                FixedPointKind::Neutral
            };
            out.push(RealFixedPoint {
                x_star: root,
                multiplier,
                kind,
            });
        }
        x = x2;
        gx = gx2;
    }
    out
}

/// Minimum of `f(x) - |x|` over `n_samples` points of `[-x_max, x_max]`.
/// For even `p` the scan covers `[0, x_max]` only (f is even).
pub fn growth_margin(params: &FamilyParams, x_max: f64, n_samples: usize) -> f64 {
    assert!(x_max > 0.0 && n_samples >= 2);
    let even = params.p() % 2 == 0;
    let (lo, hi) = if even { (0.0, x_max) } else { (-x_max, x_max) };
    let mut margin = f64::INFINITY;
    for i in 0..n_samples {
        let x = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
        margin = margin.min(params.evaluate_real(x) - x.abs());
    }
    margin
}

/// Closed-form minimum over `(0, inf)` of `g(x) = (p/x)(1 + x^p / p!)`, the
/// lower bound controlling `f(x)/x` for the unit-coefficient member. The
/// minimizer satisfies `x^p = p (p-2)!`; the value is
/// `p / (p (p-2)!)^(1/p) * (1 + 1/(p-1))`. A golden-section minimization
/// must agree to `1e-9` relative or this panics.
pub fn growth_bound_minimum(p: u32) -> f64 {
    assert!(p >= 3);
    let pf = p as f64;
    let fact_pm2: f64 = (2..=(p as u64 - 2).max(1)).map(|i| i as f64).product();
    let xp = pf * fact_pm2;
    let x_star = xp.powf(1.0 / pf);
    let closed = pf / x_star * (1.0 + 1.0 / (pf - 1.0));

    let fact_p: f64 = (2..=p as u64).map(|i| i as f64).product();
    let g = |x: f64| pf / x * (1.0 + x.powi(p as i32) / fact_p);
    let numeric = golden_min(&g, x_star / 8.0, x_star * 8.0);
    assert!(
        (numeric - closed).abs() <= 1e-9 * closed.abs(),
        "closed form {closed} vs golden-section {numeric} for p = {p}"
    );
    closed
}

fn golden_min<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..200 {
        if (b - a) <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    g(0.5 * (a + b))
}

/// Convenience: ladder fed by `find_escape_radius`.
pub fn default_ladder(params: &FamilyParams, escape_radius: f64) -> Result<MaxModLadder> {
    crate::maxmod::maxmod_ladder(params, escape_radius, 32).map_err(|e| match e {
        Error::LadderBase(r) => Error::LadderBase(r),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxmod::maxmod_ladder;

    fn quad(lambda: f64) -> FamilyParams {
        FamilyParams::new(4, lambda).unwrap()
    }

    #[test]
    fn real_point_beyond_base_is_fast() {
        // |f(10)| = M(10) (the circle maximum sits on the real axis), so the
        // orbit clears the ladder with no head start.
        let f = quad(1.0);
        let ladder = maxmod_ladder(&f, 10.0, 16).unwrap();
        let rec = classify_orbit(&f, Complex64::new(10.0, 0.0), 24, 10.0, &ladder);
        assert_eq!(rec.verdict, OrbitClass::FastEscaping);
        assert_eq!(rec.fast_level, Some(0));
        assert!(rec.escape_entry.is_some());
    }

    #[test]
    fn attracted_real_seed() {
        let f = quad(0.25);
        let ladder = maxmod_ladder(&f, 4.0, 16).unwrap();
        let rec = classify_orbit(&f, Complex64::new(1.0, 0.0), 64, 4.0, &ladder);
        assert_eq!(rec.verdict, OrbitClass::AttractedReal);
        let last = rec.points.last().unwrap().to_complex().re;
        assert!((last - 1.0508464962516403).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_is_never_escaping() {
        let f = quad(0.25);
        let ladder = maxmod_ladder(&f, 4.0, 16).unwrap();
        let fps = real_fixed_points(&f, 0.0, std::f64::consts::FRAC_PI_2);
        let rec = classify_orbit(&f, Complex64::new(fps[0].x_star, 0.0), 48, 4.0, &ladder);
        assert!(matches!(
            rec.verdict,
            OrbitClass::AttractedReal | OrbitClass::BoundedWithinBudget
        ));
    }

    #[test]
    fn unique_attracting_fixed_point_for_quarter_member() {
        let f = quad(0.25);
        let fps = real_fixed_points(&f, 0.0, std::f64::consts::FRAC_PI_2);
        assert_eq!(fps.len(), 1);
        let fp = fps[0];
        assert!((fp.x_star - 1.0508464962516403).abs() < 1e-9);
        assert!((fp.multiplier - 0.19368531652586006).abs() < 1e-9);
        assert_eq!(fp.kind, FixedPointKind::Attracting);
        let residual = (f.evaluate_real(fp.x_star) - fp.x_star).abs();
        assert!(residual <= 1e-10 * (1.0 + fp.x_star.abs()));
    }

    #[test]
    fn no_fixed_points_for_unit_member() {
        // f(x) > x everywhere on the real line for lambda = 1.
        let f = quad(1.0);
        assert!(real_fixed_points(&f, 0.0, 10.0).is_empty());
        assert!(f.evaluate_real(0.0) > 0.0);
    }

    #[test]
    fn growth_margin_examples() {
        let unit = quad(1.0);
        assert!(growth_margin(&unit, 50.0, 10_000) > 0.0);
        // Margin at x = 0 equals lambda * p.
        let m0 = growth_margin(&unit, 1e-9, 2);
        assert!((m0 - 4.0).abs() < 1e-6);

        let quarter = quad(0.25);
        // f(1.2) = 1.0865 < 1.2, so the margin dips negative.
        assert!(growth_margin(&quarter, 2.0, 10_000) < 0.0);
    }

    #[test]
    fn growth_bound_examples() {
        // p = 4: 4/8^(1/4) * 4/3 = 3.1712189733405895; minimizer 8^(1/4).
        let v4 = growth_bound_minimum(4);
        assert!((v4 - 3.1712189733405895).abs() < 1e-12);
        assert!(256.0 > 8.0); // p^p > p(p-2)! at p = 4
        for p in [4u32, 6, 8, 10, 20] {
            assert!(growth_bound_minimum(p) > 1.0, "p = {p}");
        }
    }

    #[test]
    fn lambda_sign_symmetry_for_even_p() {
        // f_{-lambda}(z) = -f_lambda(z) and evenness give equal log-moduli
        // orbits for even p.
        let pos = quad(1.0);
        let neg = quad(-1.0);
        let ladder_p = maxmod_ladder(&pos, 1.0, 16).unwrap();
        let ladder_n = maxmod_ladder(&neg, 1.0, 16).unwrap();
        for z in [
            Complex64::new(2.0, 1.0),
            Complex64::new(-0.5, 3.0),
            Complex64::new(4.0, -2.5),
        ] {
            let a = classify_orbit(&pos, z, 16, 1.0, &ladder_p);
            let b = classify_orbit(&neg, z, 16, 1.0, &ladder_n);
            assert_eq!(a.verdict, b.verdict);
            for (x, y) in a.points.iter().zip(&b.points) {
                let (lx, ly) = (x.log_modulus(), y.log_modulus());
                if lx.is_finite() || ly.is_finite() {
                    assert!((lx - ly).abs() <= 1e-11 * (1.0 + lx.abs()));
                }
            }
        }
    }
}
