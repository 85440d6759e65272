//! Zeros and critical points on the symmetry rays, the (real) critical
//! values, and the forward orbit of the critical values under the real
//! restriction of `f`.
//!
//! For `z = t * exp(i*pi/p)` on the index-0 ray, reflection and rotation
//! symmetry force `f(z)` real and `f'(z)` a real multiple of
//! `exp(-i*pi/p)`, so both reduce to one-dimensional sign scans. Rotational
//! symmetry makes the index-0 data carry every ray.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{ray_angle, FamilyParams};
use crate::LOG_SATURATION;

/// Scale-relative tolerance for the realness of `f` on the ray.
const RAY_IM_TOL: f64 = 1e-9;

/// Scale-relative tolerance for the carrier direction of `f'` on the ray and
/// for critical-value realness.
const CARRIER_IM_TOL: f64 = 1e-8;

/// Zeros and critical points on the index-0 ray, parametrized by
/// `z = t * exp(i*pi/p)`, with the critical values attained there.
///
/// `crit_t` always starts with `t = 0`: the origin is a critical point of
/// every member (the roots of unity sum to zero) and its critical value
/// `lambda * p` seeds the forward orbit.
#[derive(Debug, Clone)]
pub struct SingularData {
    pub zeros_t: Vec<f64>,
    pub crit_t: Vec<f64>,
    pub crit_values: Vec<f64>,
    pub t_max: f64,
    /// Largest scale-relative imaginary residual seen while realizing
    /// critical values.
    pub max_im_residual: f64,
}

/// Signed real number in log form: `sign * exp(log_abs)`; zero is
/// `sign = 0, log_abs = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealScaled {
    pub sign: f64,
    pub log_abs: f64,
}

impl RealScaled {
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self { sign: 0.0, log_abs: 0.0 }
        } else {
            Self { sign: x.signum(), log_abs: x.abs().ln() }
        }
    }

    /// Saturates to +/- infinity beyond the native range.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// Verdict for one critical-value orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitVerdict {
    Escapes,
    BoundedWithinBudget,
}

/// Forward orbits of the critical values under the real restriction of `f`.
#[derive(Debug, Clone)]
pub struct PostsingularOrbit {
    pub seeds: Vec<f64>,
    pub trajectories: Vec<Vec<RealScaled>>,
    pub verdicts: Vec<OrbitVerdict>,
    /// Largest scale-relative imaginary residual of the complex evaluation
    /// along all orbits (realness evidence).
    pub max_im_residual: f64,
}

fn ray_dir(p: u32) -> Complex64 {
    Complex64::from_polar(1.0, ray_angle(p))
}

/// `f` restricted to the ray: `(re_sum, m, residual)` with the value equal
/// to `re_sum * exp(m)` and `residual` the scale-relative imaginary part.
fn ray_value_parts(params: &FamilyParams, t: f64) -> (f64, f64, f64) {
    let z = ray_dir(params.p()) * t;
    let (s, m) = params.evaluate_parts(z);
    let su = s / params.lambda();
    let residual = su.im.abs() / (params.p() as f64 * su.norm().max(1.0));
    (s.re, m, residual)
}

/// `f` on the index-0 ray as a real number.
///
/// The underlying complex evaluation must be real to within `1e-9` of the
/// evaluation scale or a consistency error is raised.
pub fn eval_on_ray(params: &FamilyParams, t: f64) -> Result<f64> {
    debug_assert!(t >= 0.0);
    let (re, m, residual) = ray_value_parts(params, t);
    if residual > RAY_IM_TOL {
        return Err(Error::Consistency(format!(
            "f not real on the ray at t = {t}: residual {residual:.3e}"
        )));
    }
    Ok(re * m.exp())
}

/// `f'` projected onto its real carrier on the ray: `(re, residual)` where
/// the sign of `re` tracks sign changes of the projected derivative.
fn ray_derivative_parts(params: &FamilyParams, t: f64) -> (f64, f64) {
    let p = params.p();
    let z = ray_dir(p) * t;
    let (d, _m) = params.derivative_parts(z);
    // Rotate the carrier exp(-i*pi/p) onto the real axis.
    let rotated = d * ray_dir(p) / params.lambda();
    let residual = rotated.im.abs() / (p as f64 * rotated.norm().max(1.0));
    (rotated.re, residual)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        if (b - a) <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

fn scan_sign_changes<F: Fn(f64) -> f64>(f: &F, t_lo: f64, t_max: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = t_lo;
    let mut ft = f(t);
    while t < t_max {
        let t2 = (t + step).min(t_max);
        let ft2 = f(t2);
        if ft == 0.0 {
            out.push(t);
        } else if ft * ft2 < 0.0 {
            out.push(bisect(f, t, t2, ft));
        }
        t = t2;
        ft = ft2;
    }
    out
}

/// All zeros of `f` on the index-0 ray with `t < t_max`, by sign scanning
/// with step `pi/(8p)` and bisection refinement. Independent of `lambda`.
pub fn zeros_on_ray(params: &FamilyParams, t_max: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0) {
        return Err(Error::Domain("t_max > 0 required".into()));
    }
    let f = |t: f64| ray_value_parts(params, t).0;
    let step = PI / (8.0 * params.p() as f64);
    let zeros = scan_sign_changes(&f, 1e-9, t_max, step);
    // Realness audit at the located zeros.
    for &t in &zeros {
        eval_on_ray(params, t)?;
    }
    Ok(zeros)
}

/// Smallest `t` below which the projected derivative is noise-dominated:
/// `f'` has a root of multiplicity `p-1` at the origin, so the signal decays
/// like `t^(p-1)` while the sum carries ~1e-16 of absolute noise.
fn derivative_noise_radius(p: u32) -> f64 {
    let mut log_fact = 0.0;
    for i in 2..p as u64 {
        log_fact += (i as f64).ln();
    }
    let radius = ((1e-15f64).ln() + log_fact) / (p as f64 - 1.0);
    4.0 * radius.exp()
}

/// Critical points of `f` on the index-0 ray with `t < t_max`, always
/// including `t = 0`. Positive entries are sign changes of the projected
/// derivative, refined by bisection.
pub fn critical_points_on_ray(params: &FamilyParams, t_max: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0) {
        return Err(Error::Domain("t_max > 0 required".into()));
    }
    let g = |t: f64| ray_derivative_parts(params, t).0;
    let step = PI / (8.0 * params.p() as f64);
    let t_lo = derivative_noise_radius(params.p()).max(1e-9);
    let positive = scan_sign_changes(&g, t_lo, t_max, step);
    // Carrier audit at the located points and at a spread of samples.
    let mut audit = positive.clone();
    for i in 1..=16 {
        audit.push(t_max * i as f64 / 16.0);
    }
    for &t in &audit {
        let (_re, residual) = ray_derivative_parts(params, t);
        if residual > CARRIER_IM_TOL {
            return Err(Error::Consistency(format!(
                "f' not carried by exp(-i*pi/p) on the ray at t = {t}: residual {residual:.3e}"
            )));
        }
    }
    let mut out = Vec::with_capacity(positive.len() + 1);
    out.push(0.0);
    out.extend(positive);
    Ok(out)
}

/// Critical values of `f` realized on the index-0 ray (every critical value,
/// by rotational symmetry). Values must be real to within `1e-8` of the
/// evaluation scale.
pub fn critical_values(params: &FamilyParams, t_max: f64) -> Result<Vec<f64>> {
    Ok(compute_singular_data(params, t_max)?.crit_values)
}

/// Full ray data: zeros, critical points, critical values, with the
/// interlacing invariant (exactly one zero between consecutive positive
/// critical parameters) enforced.
pub fn compute_singular_data(params: &FamilyParams, t_max: f64) -> Result<SingularData> {
    let zeros_t = zeros_on_ray(params, t_max)?;
    let crit_t = critical_points_on_ray(params, t_max)?;

    let mut crit_values = Vec::with_capacity(crit_t.len());
    let mut max_im_residual = 0.0f64;
    for &t in &crit_t {
        let (re, m, residual) = ray_value_parts(params, t);
        if residual > CARRIER_IM_TOL {
            return Err(Error::Consistency(format!(
                "critical value not real at t = {t}: residual {residual:.3e}"
            )));
        }
        max_im_residual = max_im_residual.max(residual);
        crit_values.push(re * m.exp());
    }

    // Interlacing between consecutive positive critical parameters.
    for w in crit_t[1..].windows(2) {
        let n = zeros_t.iter().filter(|&&z| w[0] < z && z < w[1]).count();
        if n != 1 {
            return Err(Error::Consistency(format!(
                "interlacing violated on ({}, {}): {n} zeros",
                w[0], w[1]
            )));
        }
    }

    Ok(SingularData {
        zeros_t,
        crit_t,
        crit_values,
        t_max,
        max_im_residual,
    })
}

/// Iterates each critical value under the real restriction of `f` for up to
/// `budget` steps, switching to log form and stopping once a value exceeds
/// the representable range.
pub fn postsingular_orbit(
    params: &FamilyParams,
    budget: usize,
    t_max: f64,
) -> Result<PostsingularOrbit> {
    if budget < 3 {
        return Err(Error::Domain("orbit budget >= 3 required".into()));
    }
    let seeds = critical_values(params, t_max)?;
    let results: Vec<(Vec<RealScaled>, OrbitVerdict, f64)> = seeds
        .par_iter()
        .map(|&seed| run_real_orbit(params, seed, budget))
        .collect();

    let mut trajectories = Vec::with_capacity(results.len());
    let mut verdicts = Vec::with_capacity(results.len());
    let mut max_im_residual = 0.0f64;
    for (traj, verdict, residual) in results {
        trajectories.push(traj);
        verdicts.push(verdict);
        max_im_residual = max_im_residual.max(residual);
    }
    Ok(PostsingularOrbit {
        seeds,
        trajectories,
        verdicts,
        max_im_residual,
    })
}

fn run_real_orbit(
    params: &FamilyParams,
    seed: f64,
    budget: usize,
) -> (Vec<RealScaled>, OrbitVerdict, f64) {
    let mut traj = vec![RealScaled::from_f64(seed)];
    let mut max_residual = 0.0f64;
    for _ in 0..budget {
        let cur = traj.last().unwrap();
        if cur.sign != 0.0 && cur.log_abs > LOG_SATURATION {
            break;
        }
        let x = cur.to_f64();
        let (s, m) = params.evaluate_parts(Complex64::new(x, 0.0));
        let su = s / params.lambda();
        max_residual = max_residual.max(su.im.abs() / (params.p() as f64 * su.norm().max(1.0)));
        let next = if s.re == 0.0 {
            RealScaled { sign: 0.0, log_abs: 0.0 }
        } else {
            RealScaled {
                sign: s.re.signum(),
                log_abs: s.re.abs().ln() + m,
            }
        };
        traj.push(next);
    }
    let verdict = escape_verdict(&traj);
    (traj, verdict, max_residual)
}

/// Escape requires the last three stored log-moduli strictly increasing and
/// the final one at least `log 10^6`. Orbits that leave the representable
/// range before three steps are judged on what was stored (a value beyond
/// `exp(700)` cannot be anything but escape).
fn escape_verdict(traj: &[RealScaled]) -> OrbitVerdict {
    if traj.len() < 2 {
        return OrbitVerdict::BoundedWithinBudget;
    }
    let log = |v: &RealScaled| if v.sign == 0.0 { f64::NEG_INFINITY } else { v.log_abs };
    let n = traj.len();
    let window = n.min(3);
    let increasing = (n - window + 1..n).all(|i| log(&traj[i]) > log(&traj[i - 1]));
    let strong_enough = log(&traj[n - 1]) >= crate::LOG_ESCAPE
        && (n >= 3 || log(&traj[n - 1]) > LOG_SATURATION);
    if increasing && strong_enough {
        OrbitVerdict::Escapes
    } else {
        OrbitVerdict::BoundedWithinBudget
    }
}

/// Local minima of the normalized residual `|sum| / |lambda|` over a square
/// grid, polished by Newton steps: an independent two-dimensional zero
/// search used to audit the ray-restricted scan.
pub fn find_zeros_plane(params: &FamilyParams, radius: f64, grid_n: usize) -> Vec<Complex64> {
    assert!(grid_n >= 8 && radius > 0.0);
    let step = 2.0 * radius / (grid_n - 1) as f64;
    let coord = |i: usize| -radius + step * i as f64;

    // Normalized log-residual field; cancellation drives it far negative.
    let field: Vec<Vec<f64>> = (0..grid_n)
        .into_par_iter()
        .map(|j| {
            (0..grid_n)
                .map(|i| {
                    let z = Complex64::new(coord(i), coord(j));
                    let (s, _m) = params.evaluate_parts(z);
                    (s.norm() / params.lambda().abs()).ln()
                })
                .collect()
        })
        .collect();

    let mut candidates = Vec::new();
    for j in 1..grid_n - 1 {
        for i in 1..grid_n - 1 {
            let v = field[j][i];
            let mut is_min = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if field[(j as i64 + dj) as usize][(i as i64 + di) as usize] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min && v < 0.5 {
                candidates.push(Complex64::new(coord(i), coord(j)));
            }
        }
    }

    let mut zeros: Vec<Complex64> = candidates
        .par_iter()
        .filter_map(|&start| newton_polish(params, start, radius))
        .collect();
    zeros.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    zeros.dedup_by(|a, b| (*a - *b).norm() < 1e-3);
    zeros.retain(|z| z.norm() <= radius);
    zeros
}

fn newton_polish(params: &FamilyParams, start: Complex64, radius: f64) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..60 {
        let fv = params.evaluate(z);
        let dv = params.derivative(z);
        if dv.is_zero() {
            return None;
        }
        let step = if fv.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            fv.ratio_to(&dv)
        };
        z -= step;
        if z.norm() > radius + 2.0 || !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        if step.norm() <= 1e-13 * (1.0 + z.norm()) {
            // Converged; accept only genuine cancellation of the unit sum.
            let (s, _m) = params.evaluate_parts(z);
            let normalized = (s.norm() / params.lambda().abs()).ln();
            return if normalized < -25.0 { Some(z) } else { None };
        }
    }
    None
}

// ---------------------------------------------------------------------------
// CSV serialization and on-disk cache, keyed by (p, lambda, t_max).

fn fmt_f64(x: f64) -> String {
    // Display prints the shortest representation that round-trips.
    format!("{x}")
}

/// CSV rows `kind,t,z_re,z_im,f_value` (kind `zero` or `crit`), preceded by
/// `# key = value` header comments.
pub fn singular_to_csv(data: &SingularData, params: &FamilyParams) -> String {
    let dir = ray_dir(params.p());
    let mut out = String::new();
    let _ = writeln!(out, "# p = {}", params.p());
    let _ = writeln!(out, "# lambda = {}", fmt_f64(params.lambda()));
    let _ = writeln!(out, "# t_max = {}", fmt_f64(data.t_max));
    let _ = writeln!(out, "# max_im_residual = {}", fmt_f64(data.max_im_residual));
    out.push_str("kind,t,z_re,z_im,f_value\n");
    for &t in &data.zeros_t {
        let z = dir * t;
        let _ = writeln!(out, "zero,{},{},{},0", fmt_f64(t), fmt_f64(z.re), fmt_f64(z.im));
    }
    for (&t, &v) in data.crit_t.iter().zip(&data.crit_values) {
        let z = dir * t;
        let _ = writeln!(
            out,
            "crit,{},{},{},{}",
            fmt_f64(t),
            fmt_f64(z.re),
            fmt_f64(z.im),
            fmt_f64(v)
        );
    }
    out
}

/// Parses the CSV produced by [`singular_to_csv`].
pub fn singular_from_csv(text: &str) -> Result<SingularData> {
    let mut t_max = None;
    let mut max_im_residual = 0.0f64;
    let mut zeros_t = Vec::new();
    let mut crit_t = Vec::new();
    let mut crit_values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                match k.trim() {
                    "t_max" => t_max = Some(parse_field(v.trim(), idx)?),
                    "max_im_residual" => max_im_residual = parse_field(v.trim(), idx)?,
                    _ => {}
                }
            }
            continue;
        }
        if line.starts_with("kind,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Malformed(format!(
                "line {}: expected 5 columns",
                idx + 1
            )));
        }
        let t: f64 = parse_field(cols[1], idx)?;
        match cols[0] {
            "zero" => zeros_t.push(t),
            "crit" => {
                crit_t.push(t);
                crit_values.push(parse_field(cols[4], idx)?);
            }
            other => {
                return Err(Error::Malformed(format!(
                    "line {}: unknown kind '{other}'",
                    idx + 1
                )))
            }
        }
    }
    let t_max = t_max.ok_or_else(|| Error::Malformed("missing t_max header".into()))?;
    Ok(SingularData {
        zeros_t,
        crit_t,
        crit_values,
        t_max,
        max_im_residual,
    })
}

fn parse_field(s: &str, line_idx: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Malformed(format!("line {}: bad number '{s}'", line_idx + 1)))
}

/// Cache file name for `(p, lambda, t_max)`.
pub fn cache_file_name(params: &FamilyParams, t_max: f64) -> String {
    format!(
        "singular-p{}-lambda{}-tmax{}.csv",
        params.p(),
        fmt_f64(params.lambda()),
        fmt_f64(t_max)
    )
}

/// Loads the ray data from `cache_dir` or computes and stores it. Returns
/// the data and whether it came from the cache. Unreadable cache entries are
/// recomputed and overwritten.
pub fn load_or_compute_singular(
    params: &FamilyParams,
    t_max: f64,
    cache_dir: &Path,
) -> Result<(SingularData, bool)> {
    let path = cache_dir.join(cache_file_name(params, t_max));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(data) = singular_from_csv(&text) {
            if data.t_max == t_max {
                return Ok((data, true));
            }
        }
    }
    let data = compute_singular_data(params, t_max)?;
    std::fs::create_dir_all(cache_dir)?;
    std::fs::write(&path, singular_to_csv(&data, params))?;
    Ok((data, false))
}
