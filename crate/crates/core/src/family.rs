use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;

/// Truncation order of the power-series route.
pub const SERIES_TERMS: usize = 40;

/// Radius guard for the power-series route; 40 terms are exact to machine
/// precision inside this disk.
pub const SERIES_RADIUS: f64 = 50.0;

/// One member of the family `f(z) = lambda * sum_{k=0}^{p-1} exp(w^k z)` with
/// `w = exp(2*pi*i/p)`.
///
/// The unit roots `w^k` are precomputed; evaluation factors out
/// `m = max_k Re(w^k z)` so no intermediate ever overflows.
#[derive(Debug, Clone)]
pub struct FamilyParams {
    p: u32,
    lambda: f64,
    roots: Vec<Complex64>,
}

impl FamilyParams {
    pub fn new(p: u32, lambda: f64) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParams(format!("p >= 3 required, got {p}")));
        }
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and nonzero, got {lambda}"
            )));
        }
        let roots: Vec<Complex64> = (0..p)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / p as f64))
            .collect();
        // w^p must return to 1; guards against degenerate p.
        let wp = roots[1].powu(p);
        if (wp - Complex64::new(1.0, 0.0)).norm() > 1e-14 {
            return Err(Error::InvalidParams(format!(
                "exp(2*pi*i/{p})^{p} deviates from 1 beyond 1e-14"
            )));
        }
        Ok(Self { p, lambda, roots })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `exp(2*pi*i/p)`.
    pub fn omega(&self) -> Complex64 {
        self.roots[1]
    }

    /// `exp(2*pi*i*k/p)` for `k` reduced mod `p`.
    pub fn omega_pow(&self, k: u32) -> Complex64 {
        self.roots[(k % self.p) as usize]
    }

    /// Factored evaluation: returns `(s, m)` with `f(z) = s * exp(m)` where
    /// `m = max_k Re(w^k z)` and `|s| <= p * |lambda|`. Every intermediate
    /// stays in native range for any finite `z`.
    pub(crate) fn evaluate_parts(&self, z: Complex64) -> (Complex64, f64) {
        let mut m = f64::NEG_INFINITY;
        for w in &self.roots {
            let re = w.re * z.re - w.im * z.im;
            if re > m {
                m = re;
            }
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for w in &self.roots {
            let e = w * z;
            sum += Complex64::from_polar((e.re - m).exp(), e.im);
        }
        (sum * self.lambda, m)
    }

    /// Same factoring for `f'(z) = lambda * sum_k w^k exp(w^k z)`.
    pub(crate) fn derivative_parts(&self, z: Complex64) -> (Complex64, f64) {
        let mut m = f64::NEG_INFINITY;
        for w in &self.roots {
            let re = w.re * z.re - w.im * z.im;
            if re > m {
                m = re;
            }
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for w in &self.roots {
            let e = w * z;
            sum += w * Complex64::from_polar((e.re - m).exp(), e.im);
        }
        (sum * self.lambda, m)
    }

    /// Evaluates `f(z)` in scaled form. Total on finite inputs.
    pub fn evaluate(&self, z: Complex64) -> ScaledComplex {
        let (s, m) = self.evaluate_parts(z);
        ScaledComplex::new(s, m)
    }

    /// Evaluates `f'(z)` in scaled form.
    pub fn derivative(&self, z: Complex64) -> ScaledComplex {
        let (s, m) = self.derivative_parts(z);
        ScaledComplex::new(s, m)
    }

    /// Power-series route `lambda * p * sum_j z^(j*p) / (j*p)!`, accumulated
    /// in increasing `j`. Restricted to `|z| <= 50` where the default 40
    /// terms deliver full precision.
    pub fn evaluate_series(&self, z: Complex64, n_terms: usize) -> Result<Complex64> {
        if z.norm() > SERIES_RADIUS {
            return Err(Error::Domain(format!(
                "series evaluation restricted to |z| <= {SERIES_RADIUS}, got |z| = {}",
                z.norm()
            )));
        }
        let p = self.p as u64;
        let zp = z.powu(self.p);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 1..n_terms as u64 {
            term *= zp;
            for i in ((j - 1) * p + 1)..=(j * p) {
                term /= i as f64;
            }
            sum += term;
        }
        Ok(sum * (self.lambda * self.p as f64))
    }

    /// Real evaluation `f(x)` for real `x`; exact realness by construction.
    pub fn evaluate_real(&self, x: f64) -> f64 {
        let (s, m) = self.evaluate_parts(Complex64::new(x, 0.0));
        s.re * m.exp()
    }
}

/// Angle of the ray carrying the zeros and critical points with index 0,
/// `pi/p`; the remaining rays are its clockwise `2*pi*k/p` rotations.
pub fn ray_angle(p: u32) -> f64 {
    PI / p as f64
}
