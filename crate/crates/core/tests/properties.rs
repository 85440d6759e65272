//! Cross-module invariants: symmetries of the evaluation core, series and
//! derivative cross-checks, ladder monotonicity, partition coverage and
//! equivariance, and the strip-to-sector mapping of the iteration.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use esdl_core::family::FamilyParams;
use esdl_core::geometry::{classify_point, dist_to_rays, PartitionConfig, Region};
use esdl_core::maxmod::{find_escape_radius, maxmod_ladder};
use esdl_core::orbit::classify_orbit;
use esdl_core::scaled::ScaledComplex;
use esdl_core::singular::find_zeros_plane;
use esdl_core::LOG_ESCAPE;

/// Relative distance between two scaled values, measured against the first.
fn rel_diff(a: &ScaledComplex, b: &ScaledComplex) -> f64 {
    if a.is_zero() && b.is_zero() {
        return 0.0;
    }
    let shift = (b.log_scale() - a.log_scale()).exp();
    (a.unit() - b.unit() * shift).norm() / a.unit().norm()
}

fn complex_in_disk(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rotational_symmetry(p in 3u32..=8, z in complex_in_disk(500.0)) {
        let f = FamilyParams::new(p, 1.0).unwrap();
        let a = f.evaluate(z);
        let b = f.evaluate(f.omega() * z);
        prop_assert!(rel_diff(&a, &b) <= 1e-11, "rel {}", rel_diff(&a, &b));
    }

    #[test]
    fn even_symmetry(k in 2u32..=4, z in complex_in_disk(500.0), lam in 0.1f64..4.0) {
        let f = FamilyParams::new(2 * k, lam).unwrap();
        let a = f.evaluate(z);
        let b = f.evaluate(-z);
        prop_assert!(rel_diff(&a, &b) <= 1e-11);
    }

    #[test]
    fn schwarz_reflection(p in 3u32..=8, z in complex_in_disk(300.0), lam in 0.25f64..2.0) {
        let f = FamilyParams::new(p, lam).unwrap();
        let a = f.evaluate(z.conj());
        let b = f.evaluate(z);
        let b_conj = ScaledComplex::new(b.unit().conj(), b.log_scale());
        prop_assert!(rel_diff(&a, &b_conj) <= 1e-11);
    }

    #[test]
    fn series_agrees_inside_disk(p in 3u32..=8, z in complex_in_disk(10.0), lam in 0.25f64..2.0) {
        let f = FamilyParams::new(p, lam).unwrap();
        let series = f.evaluate_series(z, esdl_core::family::SERIES_TERMS).unwrap();
        let direct = f.evaluate(z).to_complex();
        let denom = direct.norm().max(series.norm()).max(1e-300);
        prop_assert!((series - direct).norm() / denom <= 1e-10);
    }

    #[test]
    fn derivative_matches_finite_difference(p in 3u32..=8, z in complex_in_disk(20.0)) {
        let f = FamilyParams::new(p, 1.0).unwrap();
        let d = f.derivative(z).to_complex();
        let h = 1e-6 * (1.0 + z.norm());
        let fp = f.evaluate(z + h).to_complex();
        let fm = f.evaluate(z - h).to_complex();
        let fd = (fp - fm) / (2.0 * h);
        // Near zeros of f' the difference quotient bottoms out at the
        // cancellation floor eps*|f|/h; the tolerance must carry that term.
        let noise = 1e-16 * (fp.norm() + fm.norm()) / (2.0 * h);
        let denom = d.norm().max(fd.norm());
        prop_assert!((d - fd).norm() <= 1e-5 * denom + 20.0 * noise);
    }

    #[test]
    fn classification_covers_plane(z in complex_in_disk(100.0)) {
        let cfg = PartitionConfig::with_default_q(5, 1.5).unwrap();
        match classify_point(&cfg, z) {
            Region::Strip(k) => prop_assert!(k < 5),
            Region::Sector(j) => prop_assert!(j < 5),
            Region::Polygon | Region::Boundary => {}
        }
    }
}

#[test]
fn ladder_strictly_increases_for_random_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51AB);
    for _ in 0..64 {
        let p = rng.gen_range(3u32..=8);
        let lam = if rng.gen_bool(0.5) { 1.0 } else { -1.0 } * rng.gen_range(0.25..4.0);
        let f = FamilyParams::new(p, lam).unwrap();
        let r = find_escape_radius(&f).unwrap();
        let ladder = maxmod_ladder(&f, r, 8).unwrap();
        assert!(ladder.levels[0] > ladder.base_log);
        for w in ladder.levels.windows(2) {
            assert!(w[1] > w[0], "p={p} lam={lam}");
        }
    }
}

#[test]
fn rotation_equivariance_of_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE0_17);
    for p in [4u32, 5, 6] {
        let cfg = PartitionConfig::with_default_q(p, 1.0).unwrap();
        let clockwise = Complex64::from_polar(1.0, -TAU / p as f64);
        let mut checked = 0;
        while checked < 3000 {
            let z = Complex64::from_polar(rng.gen_range(0.1..60.0), rng.gen_range(0.0..TAU));
            // Stay clear of region edges so both sides classify identically.
            if near_region_boundary(&cfg, z, 1e-6) {
                continue;
            }
            let a = classify_point(&cfg, z);
            let b = classify_point(&cfg, z * clockwise);
            match (a, b) {
                (Region::Sector(j), Region::Sector(j2)) => assert_eq!((j + 1) % p, j2),
                (Region::Strip(k), Region::Strip(k2)) => assert_eq!((k + 1) % p, k2),
                (Region::Polygon, Region::Polygon) => {}
                other => panic!("mismatched pair {other:?} at {z}"),
            }
            checked += 1;
        }
    }
}

fn near_region_boundary(cfg: &PartitionConfig, z: Complex64, tol: f64) -> bool {
    if (cfg.polygon_support(z) - cfg.nu()).abs() <= tol {
        return true;
    }
    let p = cfg.p();
    for k in 0..p {
        let ang = (2.0 * k as f64 - 1.0) * PI / p as f64;
        let u = z * Complex64::from_polar(1.0, ang);
        if u.re.abs() <= tol && u.im.abs() <= cfg.q() + tol {
            return true;
        }
        if u.re >= -tol && (u.im.abs() - cfg.q()).abs() <= tol {
            return true;
        }
    }
    // The wedge bisectors decide ties between overlapping strips; rotated
    // floating-point samples can cross them, so keep a margin there too.
    let theta = z.arg();
    for k in 0..p {
        let bisector = -TAU * k as f64 / p as f64;
        let mut d = (theta - bisector).rem_euclid(TAU);
        if d > PI {
            d = TAU - d;
        }
        if d * z.norm() <= tol {
            return true;
        }
    }
    false
}

#[test]
fn strip_maps_into_first_sector() {
    // Points of the axis strips with |Re| in [5, 600] map into the sector
    // containing the positive real axis, with |f(z)| > |z|.
    let f = FamilyParams::new(4, 1.0).unwrap();
    let cfg = PartitionConfig::with_default_q(4, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5_70);
    let y_max = PI / 8.0;
    for _ in 0..10_000 {
        let x = (rng.gen_range(5f64.ln()..600f64.ln())).exp()
            * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let z = Complex64::new(x, rng.gen_range(-y_max..y_max));
        let fz = f.evaluate(z);
        assert!(fz.log_modulus() > z.norm().ln(), "|f| <= |z| at {z}");
        let fz_c = fz.to_complex();
        assert_eq!(classify_point(&cfg, fz_c), Region::Sector(0), "z = {z}");
    }
}

#[test]
fn escaped_sector_orbits_keep_growing() {
    // Once an orbit point in the first sector passes the escape threshold,
    // the recorded log-moduli keep increasing until the trajectory leaves
    // the representable range.
    let f = FamilyParams::new(4, 1.0).unwrap();
    let ladder = maxmod_ladder(&f, 1.0, 16).unwrap();
    let cfg = PartitionConfig::with_default_q(4, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE5C);
    let mut checked = 0;
    while checked < 500 {
        let z = Complex64::new(rng.gen_range(7.4..150.0), rng.gen_range(-0.3..0.3));
        if classify_point(&cfg, z) != Region::Sector(0) {
            continue;
        }
        let rec = classify_orbit(&f, z, 24, 1.0, &ladder);
        let logs: Vec<f64> = rec.points.iter().map(|p| p.log_modulus()).collect();
        if let Some(first) = logs.iter().position(|&l| l >= LOG_ESCAPE) {
            for w in logs[first..].windows(2) {
                assert!(w[1] > w[0], "plateau after escape at {z}: {logs:?}");
            }
        }
        checked += 1;
    }
}

#[test]
fn plane_zeros_land_on_rays_for_p6() {
    let f = FamilyParams::new(6, 1.0).unwrap();
    let zeros = find_zeros_plane(&f, 10.0, 181);
    assert!(!zeros.is_empty());
    for z in &zeros {
        assert!(dist_to_rays(6, *z) < 1e-6, "zero {z} off the rays");
    }
}

#[test]
fn no_real_zeros_for_positive_lambda() {
    for (p, lam) in [(4u32, 1.0), (6, 0.25)] {
        let f = FamilyParams::new(p, lam).unwrap();
        let mut prev = f.evaluate_real(-100.0);
        let mut x = -100.0;
        while x <= 100.0 {
            x += 0.05;
            let v = f.evaluate_real(x);
            assert!(prev * v > 0.0, "sign change near x = {x} for p={p}");
            prev = v;
        }
    }
}
