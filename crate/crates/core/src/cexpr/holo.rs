//! Holomorphic functions: an expression body, or an antiderivative defined
//! by a path integral when no closed form exists.

use super::antideriv::{antiderivative, has_origin_pole};
use super::{
    add, constant, func, holomorphy_residual, mul, pow, sub, var, CExpr, EvalError, FuncKind,
};
use crate::quad::integrate_path_fn;
use num_complex::Complex64;

/// Tolerance used when a value must be produced by quadrature.
const INTEGRAL_TOL: f64 = 1e-11;
/// Maximum angular step of the arc leg of an annular route.
const ARC_STEP: f64 = std::f64::consts::PI / 32.0;

/// How to route a path integral from the base point to an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Straight segment; for convex domains.
    #[default]
    Straight,
    /// Radial leg then a circular arc swept directly between principal
    /// arguments. Never encircles the origin and never crosses the negative
    /// real axis more often than the endpoints require, so integrating
    /// `1/z` along it reproduces the principal branch of log.
    Annular,
}

/// Builds the polyline from `from` to `to` for the given route.
pub(crate) fn route_path(route: Route, from: Complex64, to: Complex64) -> Vec<Complex64> {
    match route {
        Route::Straight => vec![from, to],
        Route::Annular => {
            let r0 = from.norm();
            let r1 = to.norm();
            if r0 == 0.0 || r1 == 0.0 {
                return vec![from, to];
            }
            let theta0 = from.arg();
            let theta1 = to.arg();
            let mut pts = vec![from];
            let corner = Complex64::from_polar(r1, theta0);
            if (corner - from).norm() > 0.0 {
                pts.push(corner);
            }
            let sweep = theta1 - theta0;
            if sweep != 0.0 {
                let steps = (sweep.abs() / ARC_STEP).ceil().max(1.0) as usize;
                for k in 1..=steps {
                    let theta = theta0 + sweep * (k as f64) / (steps as f64);
                    pts.push(Complex64::from_polar(r1, theta));
                }
            }
            if *pts.last().unwrap() != to {
                pts.push(to);
            }
            pts
        }
    }
}

/// Declared singular set of a holomorphic function.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Singularities {
    /// Isolated singular points.
    pub points: Vec<Complex64>,
    /// Pole (or branch point) at the origin.
    pub origin_pole: bool,
}

impl Singularities {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        let mut d = f64::INFINITY;
        if self.origin_pole {
            d = d.min(z.norm());
        }
        for &p in &self.points {
            d = d.min((z - p).norm());
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Expr(CExpr),
    /// value(z) = offset + ∫ integrand over the route from base_point to z
    Antideriv {
        integrand: CExpr,
        base_point: Complex64,
        offset: Complex64,
        route: Route,
    },
}

/// A holomorphic function of one complex variable.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFn {
    body: Body,
    singularities: Singularities,
}

impl HoloFn {
    /// Wraps an expression; a pole at the origin is detected from the
    /// Laurent form when the expression has one.
    pub fn from_expr(expr: CExpr) -> Self {
        let origin_pole = has_origin_pole(&expr);
        HoloFn {
            body: Body::Expr(expr),
            singularities: Singularities {
                points: Vec::new(),
                origin_pole,
            },
        }
    }

    /// Parses the expression grammar.
    pub fn parse(text: &str) -> Result<Self, super::ParseError> {
        Ok(Self::from_expr(super::parse(text)?))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_expr(CExpr::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::ZERO)
    }

    /// Adds declared singular points.
    pub fn with_singularities(mut self, sing: Singularities) -> Self {
        self.singularities.origin_pole |= sing.origin_pole;
        self.singularities.points.extend(sing.points);
        self
    }

    /// Antiderivative of `deriv` with `value(base_point) = value_at_base`,
    /// preferring a closed form and falling back to path integration.
    pub fn antiderivative_of(
        deriv: CExpr,
        base_point: Complex64,
        value_at_base: Complex64,
        route: Route,
    ) -> Result<Self, EvalError> {
        let sing = Singularities {
            points: Vec::new(),
            origin_pole: has_origin_pole(&deriv),
        };
        match antiderivative(&deriv) {
            Ok(primitive) => {
                let at_base = primitive.eval(base_point)?;
                let shifted = super::add(primitive, CExpr::Const(value_at_base - at_base));
                Ok(HoloFn {
                    body: Body::Expr(shifted),
                    singularities: sing,
                })
            }
            Err(_) => Ok(HoloFn {
                body: Body::Antideriv {
                    integrand: deriv,
                    base_point,
                    offset: value_at_base,
                    route,
                },
                singularities: sing,
            }),
        }
    }

    /// Antiderivative of an integrand that may carry a residue at the
    /// origin. The residue contributes a principal-branch `ρ·log z` term
    /// (single-valued on the annulus slit along the negative real axis);
    /// the remainder integrates in closed form when possible and along the
    /// route by quadrature otherwise. The annular route follows principal
    /// arguments, so both representations agree on the slit annulus.
    pub(crate) fn antiderivative_with_residue(
        deriv: &CExpr,
        residue: Complex64,
        base_point: Complex64,
        value_at_base: Complex64,
        route: Route,
    ) -> Result<Self, EvalError> {
        if residue == Complex64::ZERO {
            return Self::antiderivative_of(deriv.clone(), base_point, value_at_base, route);
        }
        let sing = Singularities {
            points: Vec::new(),
            origin_pole: true,
        };
        let rest = sub(
            deriv.clone(),
            mul(constant(residue), pow(var(), -1)),
        );
        match antiderivative(&rest) {
            Ok(primitive) => {
                let log_term = mul(constant(residue), func(FuncKind::Log, var()));
                let at_base = primitive.eval(base_point)? + residue * base_point.ln();
                let expr = add(
                    add(primitive, log_term),
                    CExpr::Const(value_at_base - at_base),
                );
                Ok(HoloFn {
                    body: Body::Expr(expr),
                    singularities: sing,
                })
            }
            Err(_) => Ok(HoloFn {
                body: Body::Antideriv {
                    integrand: deriv.clone(),
                    base_point,
                    offset: value_at_base,
                    route,
                },
                singularities: sing,
            }),
        }
    }

    pub fn singularities(&self) -> &Singularities {
        &self.singularities
    }

    /// The expression body, when the function is expression-backed.
    pub fn as_expr(&self) -> Option<&CExpr> {
        match &self.body {
            Body::Expr(e) => Some(e),
            Body::Antideriv { .. } => None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        match &self.body {
            Body::Expr(e) => e.eval(z),
            Body::Antideriv {
                integrand,
                base_point,
                offset,
                route,
            } => {
                let path = route_path(*route, *base_point, z);
                let value = integrate_path_fn(|w| integrand.eval(w), &path, INTEGRAL_TOL)
                    .map_err(|e| EvalError::Integration {
                        detail: e.to_string(),
                    })?;
                Ok(offset + value)
            }
        }
    }

    /// Exact derivative: symbolic for expression bodies, the stored
    /// integrand for antiderivative bodies.
    pub fn derivative_expr(&self) -> CExpr {
        match &self.body {
            Body::Expr(e) => e.differentiate(),
            Body::Antideriv { integrand, .. } => integrand.clone(),
        }
    }

    pub fn derivative(&self) -> HoloFn {
        HoloFn {
            body: Body::Expr(self.derivative_expr()),
            singularities: self.singularities.clone(),
        }
    }

    /// Max finite-difference residual of `∂_z̄` over `samples`. An
    /// antiderivative body is certified through its integrand, which defines
    /// the same analytic germ without quadrature noise.
    pub fn holomorphy_residual(
        &self,
        samples: &[Complex64],
        step: f64,
    ) -> Result<f64, EvalError> {
        match &self.body {
            Body::Expr(e) => holomorphy_residual(e, samples, step),
            Body::Antideriv { integrand, .. } => holomorphy_residual(integrand, samples, step),
        }
    }
}

impl std::fmt::Display for HoloFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.body {
            Body::Expr(e) => write!(f, "{e}"),
            Body::Antideriv {
                integrand,
                base_point,
                ..
            } => write!(f, "<antiderivative of {integrand} from {base_point}>"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cexpr::parse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_pole_is_detected() {
        let f = HoloFn::parse("1/(2*z)").unwrap();
        assert!(f.singularities().origin_pole);
        let g = HoloFn::parse("z^2").unwrap();
        assert!(!g.singularities().origin_pole);
    }

    #[test]
    fn closed_form_antiderivative_is_used_when_available() {
        let f = HoloFn::antiderivative_of(
            parse("z").unwrap(),
            Complex64::ZERO,
            Complex64::ZERO,
            Route::Straight,
        )
        .unwrap();
        assert!(f.as_expr().is_some());
        assert!((f.eval(c(2.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn quadrature_fallback_matches_log_on_the_slit_annulus() {
        // ∫ dz/z from 1 has no closed form in the class; the annular route
        // reproduces the principal log.
        let f = HoloFn::antiderivative_of(
            parse("1/z").unwrap(),
            c(1.0, 0.0),
            Complex64::ZERO,
            Route::Annular,
        )
        .unwrap();
        assert!(f.as_expr().is_none());
        for &z in &[c(2.0, 0.0), c(0.0, 1.5), c(-0.7, 0.4), c(-0.7, -0.4), c(0.3, -0.9)] {
            let got = f.eval(z).unwrap();
            assert!((got - z.ln()).norm() < 1e-9, "z={z} got={got}");
        }
    }

    #[test]
    fn derivative_of_antiderivative_is_the_integrand() {
        let f = HoloFn::antiderivative_of(
            parse("1/z").unwrap(),
            c(1.0, 0.0),
            Complex64::ZERO,
            Route::Annular,
        )
        .unwrap();
        let d = f.derivative();
        assert!((d.eval(c(2.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn holomorphy_residual_small_for_expression_bodies() {
        let f = HoloFn::parse("exp(z)+z^3").unwrap();
        let samples: Vec<Complex64> = (0..8)
            .map(|k| Complex64::from_polar(0.8, 0.7 * k as f64))
            .collect();
        assert!(f.holomorphy_residual(&samples, 1e-4).unwrap() < 1e-6);
    }
}
