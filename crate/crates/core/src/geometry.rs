use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::maxmod::max_modulus;

/// Absolute tolerance for boundary classification.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Partition of the plane into a central regular `p`-gon of scale `nu`,
/// `p` rotated half-strips of half-width `q` covering the polygon's vertex
/// directions, and the `p` remaining unbounded sectors.
#[derive(Debug, Clone)]
pub struct PartitionConfig {
    p: u32,
    nu: f64,
    q: f64,
    /// Outward normals of the polygon edges, `exp(2*pi*i*k/p)`.
    edge_dirs: Vec<Complex64>,
    /// Rotations taking strip `k` to canonical coordinates,
    /// `exp(i*(2k-1)*pi/p)`.
    strip_rots: Vec<Complex64>,
}

/// Lower bound `log(32 p) / (2 sin(pi/p))` that the strip half-width must
/// satisfy; also the default when no explicit `q` is configured.
pub fn strip_half_width_lower_bound(p: u32) -> f64 {
    (32.0 * p as f64).ln() / (2.0 * (PI / p as f64).sin())
}

impl PartitionConfig {
    pub fn new(p: u32, nu: f64, q: f64) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParams(format!("p >= 3 required, got {p}")));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParams(format!("nu > 0 required, got {nu}")));
        }
        let q_min = strip_half_width_lower_bound(p);
        if q < q_min - 1e-12 || !q.is_finite() {
            return Err(Error::InvalidParams(format!(
                "q >= log(32p)/(2 sin(pi/p)) = {q_min} required, got {q}"
            )));
        }
        let pf = p as f64;
        let edge_dirs = (0..p)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / pf))
            .collect();
        let strip_rots = (0..p)
            .map(|k| Complex64::from_polar(1.0, (2.0 * k as f64 - 1.0) * PI / pf))
            .collect();
        Ok(Self {
            p,
            nu,
            q,
            edge_dirs,
            strip_rots,
        })
    }

    /// Uses the lower-bound strip half-width.
    pub fn with_default_q(p: u32, nu: f64) -> Result<Self> {
        Self::new(p, nu, strip_half_width_lower_bound(p))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Support function of the polygon: `max_k Re(z * conj(edge_dir_k))`.
    /// Interior points satisfy `support < nu`.
    pub fn polygon_support(&self, z: Complex64) -> f64 {
        let mut s = f64::NEG_INFINITY;
        for d in &self.edge_dirs {
            let v = z.re * d.re + z.im * d.im;
            if v > s {
                s = v;
            }
        }
        s
    }
}

/// Classification of a point against the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Polygon,
    Strip(u32),
    Sector(u32),
    Boundary,
}

/// Vertices of the central polygon, `(nu / cos(pi/p)) * exp(i(2k+1)pi/p)` in
/// order `k = 0..p-1`.
pub fn polygon_vertices(config: &PartitionConfig) -> Vec<Complex64> {
    let p = config.p() as f64;
    let radius = config.nu() / (PI / p).cos();
    (0..config.p())
        .map(|k| Complex64::from_polar(radius, (2.0 * k as f64 + 1.0) * PI / p))
        .collect()
}

fn wrap_index(raw: f64, p: u32) -> u32 {
    (raw.round() as i64).rem_euclid(p as i64) as u32
}

/// Index of the strip whose central ray is angularly nearest to `z`.
///
/// Strip membership is radially monotone in the angular offset, so if `z`
/// lies in any strip it lies in this one.
fn nearest_strip_index(p: u32, theta: f64) -> u32 {
    let pf = p as f64;
    wrap_index((PI / pf - theta) * pf / TAU, p)
}

fn sector_index(p: u32, theta: f64) -> u32 {
    wrap_index(-theta * p as f64 / TAU, p)
}

/// Assigns `z` to the polygon interior, a strip, a sector, or the boundary
/// band (within `1e-12` of a region edge). The polygon wins over the strips
/// where they overlap near its vertices; strips win over sectors.
pub fn classify_point(config: &PartitionConfig, z: Complex64) -> Region {
    let s = config.polygon_support(z);
    if (s - config.nu()).abs() <= BOUNDARY_TOL {
        return Region::Boundary;
    }
    if s < config.nu() {
        return Region::Polygon;
    }
    let theta = z.arg();
    let k = nearest_strip_index(config.p(), theta);
    let u = z * config.strip_rots[k as usize];
    let (x, y) = (u.re, u.im.abs());
    if x > BOUNDARY_TOL && y < config.q() - BOUNDARY_TOL {
        return Region::Strip(k);
    }
    if x >= -BOUNDARY_TOL && y <= config.q() + BOUNDARY_TOL {
        return Region::Boundary;
    }
    Region::Sector(sector_index(config.p(), theta))
}

/// Membership in the pair of half-strips `|Re z| >= r`, `|Im z| <= pi/(2p)`
/// along the real axis.
pub fn in_real_strip(p: u32, r: f64, z: Complex64) -> bool {
    debug_assert!(r > 0.0);
    z.re.abs() >= r && z.im.abs() <= PI / (2.0 * p as f64)
}

/// Strict membership in the horizontal band `(2k-1)pi < Im z < (2k+1)pi`.
pub fn in_horizontal_band(k: i64, z: Complex64) -> bool {
    let c = k as f64;
    (2.0 * c - 1.0) * PI < z.im && z.im < (2.0 * c + 1.0) * PI
}

/// Euclidean distance from `z` to the closure of the union of rays at angles
/// `pi/p - 2*pi*k/p` (the half-lines carrying the zeros and critical points).
pub fn dist_to_rays(p: u32, z: Complex64) -> f64 {
    let pf = p as f64;
    let mut best = f64::INFINITY;
    for k in 0..p {
        let ang = PI / pf - TAU * k as f64 / pf;
        let dir = Complex64::from_polar(1.0, ang);
        let t = (z.re * dir.re + z.im * dir.im).max(0.0);
        let d = (z - dir * t).norm();
        if d < best {
            best = d;
        }
    }
    best
}

/// Constants estimated for the sector expansion inequality
/// `|f(z)| > max(exp(eps0 * nu'), M(eps0 * |z|))` on sampled sector points.
#[derive(Debug, Clone, Copy)]
pub struct EstimatedConstants {
    pub nu_prime: f64,
    pub eps0: f64,
    pub samples_checked: usize,
    /// Minimum observed slack of the inequality, in log units.
    pub margin: f64,
}

/// Piecewise-linear interpolation of `log M` against `log r`. `log M` is
/// convex in `log r`, so chords overestimate between nodes and the lookup is
/// a safe upper bound when used on the subtracted side of a margin.
struct MaxModTable {
    log_r: Vec<f64>,
    level: Vec<f64>,
}

impl MaxModTable {
    fn build(params: &FamilyParams, r_lo: f64, r_hi: f64, nodes: usize) -> Result<Self> {
        let (a, b) = (r_lo.ln(), r_hi.ln());
        let mut log_r = Vec::with_capacity(nodes);
        let mut level = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let lr = a + (b - a) * i as f64 / (nodes - 1) as f64;
            log_r.push(lr);
            level.push(max_modulus(params, lr.exp())?);
        }
        Ok(Self { log_r, level })
    }

    fn upper_bound(&self, r: f64) -> f64 {
        let lr = r.ln();
        if lr <= self.log_r[0] {
            // M is increasing in r.
            return self.level[0];
        }
        let last = self.log_r.len() - 1;
        debug_assert!(lr <= self.log_r[last] + 1e-9);
        if lr >= self.log_r[last] {
            return self.level[last];
        }
        let i = self.log_r.partition_point(|&v| v < lr) - 1;
        let t = (lr - self.log_r[i]) / (self.log_r[i + 1] - self.log_r[i]);
        self.level[i] * (1.0 - t) + self.level[i + 1] * t
    }
}

/// Low-discrepancy points in the unit square (additive recurrence on the
/// plastic-number vector); deterministic.
fn quasi_point(n: usize) -> (f64, f64) {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_2;
    let u = (0.5 + A1 * (n as f64 + 1.0)).fract();
    let v = (0.5 + A2 * (n as f64 + 1.0)).fract();
    (u, v)
}

/// Searches the grids for the smallest `nu'` (then largest `eps0`) such that
/// the expansion inequality holds with positive margin at `sample_budget`
/// quasi-random sector points with `|z| <= 10 nu'`. A numerical estimate,
/// not a proof; fails with `ConstantsNotFound` when no pair passes.
pub fn estimate_constants(
    params: &FamilyParams,
    nu_grid: &[f64],
    eps_grid: &[f64],
    sample_budget: usize,
) -> Result<EstimatedConstants> {
    assert!(!nu_grid.is_empty() && !eps_grid.is_empty(), "grids must be nonempty");
    assert!(sample_budget >= 1000, "sample budget below 10^3");
    assert!(
        eps_grid.iter().all(|&e| e > 0.0 && e < 1.0),
        "eps grid entries must lie in (0,1)"
    );

    let mut nus: Vec<f64> = nu_grid.to_vec();
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut epss: Vec<f64> = eps_grid.to_vec();
    epss.sort_by(|a, b| b.partial_cmp(a).unwrap());

    for &nu in &nus {
        let config = PartitionConfig::with_default_q(params.p(), nu)?;
        // Collect sector samples once per nu; they do not depend on eps.
        let mut samples: Vec<(f64, f64)> = Vec::with_capacity(sample_budget); // (|z|, log|f(z)|)
        let max_tries = sample_budget.saturating_mul(400);
        let mut n = 0usize;
        while samples.len() < sample_budget && n < max_tries {
            let (u, v) = quasi_point(n);
            n += 1;
            let radius = nu * (1.0 + 9.0 * u);
            let z = Complex64::from_polar(radius, TAU * v);
            if !matches!(classify_point(&config, z), Region::Sector(_)) {
                continue;
            }
            samples.push((radius, params.evaluate(z).log_modulus()));
        }
        if samples.len() < sample_budget {
            continue; // sector too thin within |z| <= 10 nu at this scale
        }
        let (min_z, max_z) = samples
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(r, _)| {
                (lo.min(r), hi.max(r))
            });

        for &eps in &epss {
            let table = MaxModTable::build(params, eps * min_z * 0.999, eps * max_z * 1.001, 192)?;
            let floor = eps * nu;
            let margin = samples
                .par_iter()
                .map(|&(r, log_f)| log_f - floor.max(table.upper_bound(eps * r)))
                .reduce(|| f64::INFINITY, f64::min);
            if margin > 0.0 {
                return Ok(EstimatedConstants {
                    nu_prime: nu,
                    eps0: eps,
                    samples_checked: samples.len(),
                    margin,
                });
            }
        }
    }
    Err(Error::ConstantsNotFound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg4() -> PartitionConfig {
        PartitionConfig::with_default_q(4, 1.0).unwrap()
    }

    #[test]
    fn vertices_p4_unit_scale() {
        let vs = polygon_vertices(&cfg4());
        let expect = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
        for (v, (x, y)) in vs.iter().zip(expect) {
            assert!((v - Complex64::new(x, y)).norm() < 1e-14);
        }
        let radius = 1.0 / (PI / 4.0).cos();
        for v in &vs {
            assert!((v.norm() - radius).abs() < 1e-14);
        }
        for w in vs.windows(2) {
            let angle = (w[1] / w[0]).arg();
            assert!((angle - TAU / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_q() {
        let q_min = strip_half_width_lower_bound(4);
        assert!(PartitionConfig::new(4, 1.0, q_min * 0.9).is_err());
        assert!(PartitionConfig::new(4, 1.0, q_min).is_ok());
    }

    #[test]
    fn classify_examples() {
        let cfg = cfg4();
        assert_eq!(classify_point(&cfg, Complex64::new(0.0, 0.0)), Region::Polygon);
        assert_eq!(
            classify_point(&cfg, Complex64::new(1e6, 0.0)),
            Region::Sector(0)
        );
        let on_ray = Complex64::from_polar(1e6, PI / 4.0);
        assert_eq!(classify_point(&cfg, on_ray), Region::Strip(0));
    }

    #[test]
    fn classify_boundary_band() {
        let cfg = cfg4();
        // On the polygon edge x = nu with |y| < nu.
        assert_eq!(
            classify_point(&cfg, Complex64::new(1.0, 0.3)),
            Region::Boundary
        );
        // On a strip edge far out: distance to ray exactly q.
        let q = cfg.q();
        let base = Complex64::from_polar(40.0, PI / 4.0);
        let normal = Complex64::from_polar(1.0, PI / 4.0 - PI / 2.0);
        assert_eq!(classify_point(&cfg, base + normal * q), Region::Boundary);
        assert_eq!(
            classify_point(&cfg, base + normal * (q + 1e-6)),
            Region::Sector(0)
        );
        assert_eq!(
            classify_point(&cfg, base + normal * (q - 1e-6)),
            Region::Strip(0)
        );
    }

    #[test]
    fn strip_indices_rotate_clockwise() {
        let cfg = cfg4();
        for k in 0..4u32 {
            let ang = PI / 4.0 - TAU * k as f64 / 4.0;
            let z = Complex64::from_polar(50.0, ang);
            assert_eq!(classify_point(&cfg, z), Region::Strip(k), "k={k}");
        }
        for j in 0..4u32 {
            let ang = -TAU * j as f64 / 4.0;
            let z = Complex64::from_polar(50.0, ang);
            assert_eq!(classify_point(&cfg, z), Region::Sector(j), "j={j}");
        }
    }

    #[test]
    fn real_strip_examples() {
        assert!(in_real_strip(4, 5.0, Complex64::new(6.0, 0.0)));
        assert!(!in_real_strip(4, 5.0, Complex64::new(6.0, 1.0)));
        assert!(in_real_strip(4, 5.0, Complex64::new(-6.0, 0.0)));
    }

    #[test]
    fn horizontal_band_examples() {
        assert!(in_horizontal_band(0, Complex64::new(0.0, 0.0)));
        assert!(in_horizontal_band(1, Complex64::new(3.0, TAU)));
        assert!(!in_horizontal_band(1, Complex64::new(0.0, PI)));
    }

    #[test]
    fn ray_distance_examples() {
        for p in [3u32, 4, 6] {
            let on = Complex64::from_polar(3.0, PI / p as f64);
            assert!(dist_to_rays(p, on) < 1e-14);
        }
        assert!(dist_to_rays(5, Complex64::new(0.0, 0.0)) < 1e-300);
        let d = dist_to_rays(4, Complex64::new(1.0, 0.0));
        assert!((d - (PI / 4.0).sin()).abs() < 1e-14);
    }

    #[test]
    fn estimates_constants_for_quad_family() {
        let f = FamilyParams::new(4, 1.0).unwrap();
        let est = estimate_constants(&f, &[1.0, 2.0, 4.0], &[0.9, 0.75, 0.5, 0.3], 2000).unwrap();
        assert!(est.margin > 0.0);
        assert!(est.eps0 > 0.0 && est.eps0 < 1.0);
        assert!(est.nu_prime > 0.0);
        assert_eq!(est.samples_checked, 2000);
    }

    #[test]
    fn real_axis_samples_pass_for_any_eps() {
        // For large real x, |f(x)| ~ e^x while M(eps x) ~ e^(eps x).
        let f = FamilyParams::new(4, 1.0).unwrap();
        for x in [6.0, 8.0, 10.0] {
            let log_f = f.evaluate(Complex64::new(x, 0.0)).log_modulus();
            for eps in [0.3, 0.6, 0.9] {
                let rhs = (eps * 1.0_f64).max(max_modulus(&f, eps * x).unwrap());
                assert!(log_f > rhs, "x={x} eps={eps}");
            }
        }
    }
}
