//! Real harmonic functions `h = Re F + β ln|z|` on planar domains, their
//! Wirtinger derivative `h_z = F'/2 + β/(2z)`, and conjugate-harmonic
//! periods on annuli.
//!
//! The Wirtinger operators carry the 1/2 factor throughout the crate:
//! `∂_z = ½(∂_x − i∂_y)`, `∂_z̄ = ½(∂_x + i∂_y)`, so `∂_z` of a holomorphic
//! function is its complex derivative.

use crate::cexpr::{
    add, constant, mul, pow, var, CExpr, EvalError, HoloFn, Route, Singularities,
};
use crate::quad::{integrate_path_fn, QuadError};
use num_complex::Complex64;
use thiserror::Error;

/// Default spacing for first-derivative stencils.
pub const FD_STEP_FIRST: f64 = 1e-4;
/// Default spacing for the Laplacian stencil.
pub const FD_STEP_LAPLACIAN: f64 = 1e-3;

/// Width of the sampling window used for half-planes, which are otherwise
/// unbounded: `x ∈ (c, c + 2]`, `y ∈ [-1, 1]`.
pub const HALF_PLANE_WINDOW: f64 = 2.0;

/// A connected open set in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: Complex64, radius: f64 },
    /// Round annulus about the origin, `r1 < |z| < r2`.
    Annulus { r1: f64, r2: f64 },
    /// Half-plane `Re z > c`.
    HalfPlane { c: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    #[error("empty interior: {0}")]
    EmptyInterior(String),
    #[error("annulus radii must satisfy 0 < r1 < r2, got r1={r1}, r2={r2}")]
    BadAnnulus { r1: f64, r2: f64 },
}

impl Domain {
    pub fn validate(&self) -> Result<(), DomainError> {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => {
                if !(x0 < x1 && y0 < y1) {
                    return Err(DomainError::EmptyInterior(format!(
                        "rectangle [{x0},{x1}]x[{y0},{y1}]"
                    )));
                }
            }
            Domain::Disk { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(DomainError::EmptyInterior(format!("disk radius {radius}")));
                }
            }
            Domain::Annulus { r1, r2 } => {
                if !(0.0 < r1 && r1 < r2) {
                    return Err(DomainError::BadAnnulus { r1, r2 });
                }
            }
            Domain::HalfPlane { c } => {
                if !c.is_finite() {
                    return Err(DomainError::EmptyInterior(format!("half-plane c={c}")));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => {
                z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1
            }
            Domain::Disk { center, radius } => (z - center).norm() <= radius,
            Domain::Annulus { r1, r2 } => {
                let r = z.norm();
                r >= r1 && r <= r2
            }
            Domain::HalfPlane { c } => z.re > c,
        }
    }

    pub fn contains_origin(&self) -> bool {
        self.contains(Complex64::ZERO)
    }

    /// True for the one multiply-connected kind.
    pub fn is_multiply_connected(&self) -> bool {
        matches!(self, Domain::Annulus { .. })
    }

    /// Path routing for integrals inside the domain.
    pub fn route(&self) -> Route {
        if self.is_multiply_connected() {
            Route::Annular
        } else {
            Route::Straight
        }
    }

    /// A core loop around the hole of an annulus (counterclockwise 64-gon at
    /// the geometric-mean radius); `None` for simply connected domains.
    pub fn core_loop(&self) -> Option<Vec<Complex64>> {
        match *self {
            Domain::Annulus { r1, r2 } => Some(crate::quad::polygon_loop(
                Complex64::ZERO,
                (r1 * r2).sqrt(),
                64,
            )),
            _ => None,
        }
    }
}

/// `h(z) = Re F(z) + β ln|z|` with `F` holomorphic.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    holo: HoloFn,
    log_coeff: f64,
}

impl HarmonicField {
    pub fn new(holo: HoloFn, log_coeff: f64) -> Self {
        HarmonicField { holo, log_coeff }
    }

    pub fn zero() -> Self {
        HarmonicField::new(HoloFn::zero(), 0.0)
    }

    pub fn holo(&self) -> &HoloFn {
        &self.holo
    }

    pub fn log_coeff(&self) -> f64 {
        self.log_coeff
    }

    pub fn eval(&self, z: Complex64) -> Result<f64, EvalError> {
        let mut value = self.holo.eval(z)?.re;
        if self.log_coeff != 0.0 {
            if z == Complex64::ZERO {
                return Err(EvalError::LogOfZero { at: z });
            }
            value += self.log_coeff * z.norm().ln();
        }
        Ok(value)
    }

    /// The Wirtinger derivative `h_z = F'/2 + β/(2z)` as a holomorphic
    /// function.
    pub fn wirtinger(&self) -> HoloFn {
        let mut f = HoloFn::from_expr(self.wirtinger_expr());
        if self.log_coeff != 0.0 {
            f = f.with_singularities(Singularities {
                points: Vec::new(),
                origin_pole: true,
            });
        }
        f
    }

    pub(crate) fn wirtinger_expr(&self) -> CExpr {
        let fp = self.holo.derivative_expr();
        let mut expr = mul(constant(Complex64::new(0.5, 0.0)), fp);
        if self.log_coeff != 0.0 {
            expr = add(
                expr,
                mul(
                    constant(Complex64::new(self.log_coeff / 2.0, 0.0)),
                    pow(var(), -1),
                ),
            );
        }
        expr
    }

    /// Increase of the conjugate harmonic function `h*` around a closed
    /// loop: `Im ∮ 2 h_z dz`.
    pub fn conjugate_period(&self, loop_path: &[Complex64], tol: f64) -> Result<f64, QuadError> {
        let hz = self.wirtinger_expr();
        let v = integrate_path_fn(|z| hz.eval(z).map(|w| 2.0 * w), loop_path, tol)?;
        Ok(v.im)
    }

    /// `|h_xx + h_yy|` by a 5-point central stencil of spacing `step`.
    pub fn laplacian_residual(&self, z: Complex64, step: f64) -> Result<f64, EvalError> {
        laplacian_fd(|w| self.eval(w), z, step)
    }
}

/// Five-point finite-difference Laplacian residual of a real-valued field.
pub fn laplacian_fd<F>(f: F, z: Complex64, step: f64) -> Result<f64, EvalError>
where
    F: Fn(Complex64) -> Result<f64, EvalError>,
{
    let ex = Complex64::new(step, 0.0);
    let ey = Complex64::new(0.0, step);
    let lap =
        (f(z + ex)? + f(z - ex)? + f(z + ey)? + f(z - ey)? - 4.0 * f(z)?) / (step * step);
    Ok(lap.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::polygon_loop;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn log_field(beta: f64) -> HarmonicField {
        HarmonicField::new(HoloFn::zero(), beta)
    }

    #[test]
    fn eval_log_modulus() {
        let h = log_field(1.0);
        assert_eq!(h.eval(c(1.0, 0.0)).unwrap(), 0.0);
        assert!((h.eval(c(std::f64::consts::E, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_re_holomorphic() {
        // Re(iz) = -y
        let h = HarmonicField::new(HoloFn::parse("i*z").unwrap(), 0.0);
        assert!((h.eval(c(1.0, 2.0)).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn wirtinger_of_log_modulus() {
        // h_z = 1/(2z) under the half-factor convention
        let h = log_field(1.0);
        let hz = h.wirtinger();
        assert!((hz.eval(c(1.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        // cross-check by finite differences of h itself
        let z = c(0.7, -0.4);
        let s = FD_STEP_FIRST;
        let hx = (h.eval(z + s).unwrap() - h.eval(z - s).unwrap()) / (2.0 * s);
        let hy = (h.eval(z + c(0.0, s)).unwrap() - h.eval(z - c(0.0, s)).unwrap()) / (2.0 * s);
        let fd = 0.5 * Complex64::new(hx, -hy);
        assert!((hz.eval(z).unwrap() - fd).norm() < 1e-6);
    }

    #[test]
    fn wirtinger_of_square() {
        // h = Re z^2 has h_z = z
        let h = HarmonicField::new(HoloFn::parse("z^2").unwrap(), 0.0);
        let hz = h.wirtinger();
        assert!((hz.eval(c(0.0, 1.0)).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn wirtinger_of_height_field() {
        // h = Re(iz) has h_z = i/2, the height datum of the half helicoid
        let h = HarmonicField::new(HoloFn::parse("i*z").unwrap(), 0.0);
        let hz = h.wirtinger();
        assert!((hz.eval(c(0.3, 0.4)).unwrap() - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn conjugate_period_of_log_modulus() {
        let h = log_field(1.0);
        let circle = polygon_loop(Complex64::ZERO, 1.0, 64);
        let p = h.conjugate_period(&circle, 1e-10).unwrap();
        assert!((p - std::f64::consts::TAU).abs() < 1e-8, "{p}");
    }

    #[test]
    fn conjugate_period_scales_with_log_coefficient() {
        let h = log_field(3.0);
        let circle = polygon_loop(Complex64::ZERO, 1.0, 64);
        let p = h.conjugate_period(&circle, 1e-10).unwrap();
        assert!((p - 3.0 * std::f64::consts::TAU).abs() < 1e-8);
    }

    #[test]
    fn conjugate_period_vanishes_for_single_valued_conjugates() {
        let h = HarmonicField::new(HoloFn::parse("z").unwrap(), 0.0);
        let circle = polygon_loop(Complex64::ZERO, 1.0, 64);
        assert!(h.conjugate_period(&circle, 1e-10).unwrap().abs() < 1e-8);
    }

    #[test]
    fn conjugate_period_is_loop_shape_independent() {
        let h = log_field(1.0);
        let circle = polygon_loop(Complex64::ZERO, 1.3, 64);
        let square = [c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)];
        let a = h.conjugate_period(&circle, 1e-10).unwrap();
        let b = h.conjugate_period(&square, 1e-10).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn laplacian_residual_of_harmonic_fields() {
        let h = log_field(1.0);
        assert!(h.laplacian_residual(c(2.0, 0.0), FD_STEP_LAPLACIAN).unwrap() < 1e-6);
        let g = HarmonicField::new(HoloFn::parse("z^2").unwrap(), 0.0);
        assert!(g.laplacian_residual(c(1.0, 1.0), FD_STEP_LAPLACIAN).unwrap() < 1e-6);
    }

    #[test]
    fn laplacian_stencil_detects_nonharmonic_fields() {
        // x^2 + y^2 has Laplacian 4; validates the stencil itself
        let f = |z: Complex64| Ok(z.norm_sqr());
        let r = laplacian_fd(f, c(0.3, -0.2), FD_STEP_LAPLACIAN).unwrap();
        assert!((r - 4.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::Annulus { r1: 1.0, r2: 0.5 }.validate().is_err());
        assert!(Domain::Annulus { r1: 0.2, r2: 5.0 }.validate().is_ok());
        assert!(Domain::Rectangle { x0: 0.0, x1: 0.0, y0: 0.0, y1: 1.0 }
            .validate()
            .is_err());
        assert!(!Domain::Annulus { r1: 0.2, r2: 5.0 }.contains_origin());
        assert!(Domain::Disk { center: Complex64::ZERO, radius: 1.0 }.contains_origin());
    }

    #[test]
    fn harmonicity_spot_check_at_random_interior_points() {
        // step 1e-4: the truncation term (s^2/12)|∂⁴h| of the 5-point stencil
        // needs it to stay below 1e-6 with the log term present
        let h = HarmonicField::new(HoloFn::parse("exp(z)").unwrap(), 0.5);
        for k in 0..100 {
            let z = Complex64::from_polar(0.8 + 0.008 * (k as f64), 0.37 * k as f64);
            assert!(h.laplacian_residual(z, 1e-4).unwrap() < 1e-6);
        }
    }
}
