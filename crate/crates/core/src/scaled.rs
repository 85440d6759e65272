use num_complex::Complex64;

/// Complex value stored as `unit * exp(log_scale)`.
///
/// Exponential sums blow past the native floating-point range as soon as
/// `|Re(w^k z)|` exceeds ~700, so magnitudes are carried separately in log
/// space. The `unit` factor is normalized to `|unit| in [1, e)`; the exact
/// value zero is encoded as `unit = 0, log_scale = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    unit: Complex64,
    log_scale: f64,
}

impl ScaledComplex {
    /// Builds the value `v * exp(log_shift)`, renormalizing so that the unit
    /// factor has modulus in `[1, e)`.
    pub fn new(v: Complex64, log_shift: f64) -> Self {
        let n = v.norm();
        if n == 0.0 {
            return Self::zero();
        }
        debug_assert!(n.is_finite() && log_shift.is_finite());
        let total = n.ln() + log_shift;
        let floor = total.floor();
        let unit = v * ((total - floor).exp() / n);
        Self {
            unit,
            log_scale: floor,
        }
    }

    pub fn zero() -> Self {
        Self {
            unit: Complex64::new(0.0, 0.0),
            log_scale: 0.0,
        }
    }

    pub fn from_complex(v: Complex64) -> Self {
        Self::new(v, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.unit.norm_sqr() == 0.0
    }

    pub fn unit(&self) -> Complex64 {
        self.unit
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `ln` of the modulus; `-inf` for the zero value.
    pub fn log_modulus(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.unit.norm().ln() + self.log_scale
        }
    }

    pub fn arg(&self) -> f64 {
        self.unit.arg()
    }

    /// Collapses to a native complex value, saturating to infinities when the
    /// scale exceeds the representable range.
    pub fn to_complex(&self) -> Complex64 {
        self.unit * self.log_scale.exp()
    }

    /// `self / denom` as a native complex value. Saturates like `to_complex`
    /// when the scales are far apart.
    pub fn ratio_to(&self, denom: &ScaledComplex) -> Complex64 {
        (self.unit / denom.unit) * (self.log_scale - denom.log_scale).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_unit_into_band() {
        for &(re, im, shift) in &[
            (3.25, -1.5, 0.0),
            (1e-12, 2e-13, 500.0),
            (-7.0, 0.125, -321.5),
            (0.5, 0.5, 1234.0),
        ] {
            let s = ScaledComplex::new(Complex64::new(re, im), shift);
            let n = s.unit().norm();
            assert!((1.0..std::f64::consts::E).contains(&n), "|unit| = {n}");
            let expect = f64::hypot(re, im).ln() + shift;
            assert!((s.log_modulus() - expect).abs() < 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn zero_encoding() {
        let z = ScaledComplex::from_complex(Complex64::new(0.0, 0.0));
        assert!(z.is_zero());
        assert_eq!(z.log_scale(), 0.0);
        assert_eq!(z.log_modulus(), f64::NEG_INFINITY);
        assert_eq!(z.to_complex(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn roundtrip_within_native_range() {
        let v = Complex64::new(-123.456, 78.9);
        let s = ScaledComplex::from_complex(v);
        let back = s.to_complex();
        assert!((back - v).norm() <= 1e-13 * v.norm());
    }

    #[test]
    fn huge_scale_log_modulus() {
        let s = ScaledComplex::new(Complex64::new(2.0, 0.0), 1000.0);
        assert!((s.log_modulus() - (1000.0 + 2f64.ln())).abs() < 1e-12 * 1000.0);
        assert!(s.to_complex().re.is_infinite());
    }

    #[test]
    fn ratio_collapses_scales() {
        let a = ScaledComplex::new(Complex64::new(3.0, 0.0), 800.0);
        let b = ScaledComplex::new(Complex64::new(1.5, 0.0), 800.0);
        let r = a.ratio_to(&b);
        // ln/exp round-trips at scale 800 cost ~scale*ulp of relative error.
        assert!((r - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
