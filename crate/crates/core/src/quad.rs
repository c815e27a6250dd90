//! Deterministic adaptive quadrature of complex integrands along polylines.
//!
//! Each segment is handled by adaptive Simpson bisection with a hard budget
//! of 2^16 subdivisions, so results are reproducible bit-for-bit for fixed
//! inputs.

use crate::cexpr::{CExpr, EvalError};
use num_complex::Complex64;
use thiserror::Error;

/// Total subdivision budget per polyline segment.
const SUBDIVISION_BUDGET: u32 = 1 << 16;
const MAX_DEPTH: u32 = 48;
const MIN_TOL: f64 = 5e-15;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("integrand evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("tolerance {requested:e} not reached within the subdivision budget (error estimate {achieved:e}); integrand may be near a singularity")]
    ToleranceNotReached { requested: f64, achieved: f64 },
    #[error("a path needs at least two points")]
    DegeneratePath,
}

struct Budget {
    remaining: u32,
}

fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
    (fa + 4.0 * fm + fb) * (h / 6.0)
}

/// Adaptive Simpson on g over [t0, t1] (real parameter), g already includes
/// the d z/d t factor.
#[allow(clippy::too_many_arguments)]
fn adapt<G>(
    g: &G,
    t0: f64,
    t1: f64,
    f0: Complex64,
    fm: Complex64,
    f1: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
    budget: &mut Budget,
) -> Result<Complex64, QuadError>
where
    G: Fn(f64) -> Result<Complex64, EvalError>,
{
    let tm = 0.5 * (t0 + t1);
    let tl = 0.5 * (t0 + tm);
    let tr = 0.5 * (tm + t1);
    let fl = g(tl)?;
    let fr = g(tr)?;
    let h = tm - t0;
    let left = simpson(f0, fl, fm, h);
    let right = simpson(fm, fr, f1, h);
    let refined = left + right;
    let err = (refined - whole).norm();
    if err <= 15.0 * tol || depth >= MAX_DEPTH {
        if depth >= MAX_DEPTH && err > 15.0 * tol {
            return Err(QuadError::ToleranceNotReached {
                requested: tol,
                achieved: err / 15.0,
            });
        }
        return Ok(refined + (refined - whole) / 15.0);
    }
    if budget.remaining < 2 {
        return Err(QuadError::ToleranceNotReached {
            requested: tol,
            achieved: err / 15.0,
        });
    }
    budget.remaining -= 2;
    let half_tol = 0.5 * tol;
    let a = adapt(g, t0, tm, f0, fl, fm, left, half_tol, depth + 1, budget)?;
    let b = adapt(g, tm, t1, fm, fr, f1, right, half_tol, depth + 1, budget)?;
    Ok(a + b)
}

/// Integrates `f` along one straight segment from `a` to `b`.
fn integrate_segment<F>(f: &F, a: Complex64, b: Complex64, tol: f64) -> Result<Complex64, QuadError>
where
    F: Fn(Complex64) -> Result<Complex64, EvalError>,
{
    let dz = b - a;
    if dz == Complex64::ZERO {
        return Ok(Complex64::ZERO);
    }
    let g = move |t: f64| f(a + t * dz).map(|v| v * dz);
    let f0 = g(0.0)?;
    let fm = g(0.5)?;
    let f1 = g(1.0)?;
    let whole = simpson(f0, fm, f1, 1.0);
    let mut budget = Budget {
        remaining: SUBDIVISION_BUDGET,
    };
    adapt(&g, 0.0, 1.0, f0, fm, f1, whole, tol.max(MIN_TOL), 0, &mut budget)
}

/// Integrates an evaluator along the polyline `path` with absolute error
/// budget `tol` split across segments by arc length.
pub fn integrate_path_fn<F>(f: F, path: &[Complex64], tol: f64) -> Result<Complex64, QuadError>
where
    F: Fn(Complex64) -> Result<Complex64, EvalError>,
{
    if path.len() < 2 {
        return Err(QuadError::DegeneratePath);
    }
    let total_len: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if total_len == 0.0 {
        return Ok(Complex64::ZERO);
    }
    let tol = tol.max(MIN_TOL);
    let mut sum = Complex64::ZERO;
    for w in path.windows(2) {
        let seg_len = (w[1] - w[0]).norm();
        if seg_len == 0.0 {
            continue;
        }
        let seg_tol = tol * seg_len / total_len;
        sum += integrate_segment(&f, w[0], w[1], seg_tol)?;
    }
    Ok(sum)
}

/// Integrates an expression along the polyline `path`.
pub fn integrate_path(e: &CExpr, path: &[Complex64], tol: f64) -> Result<Complex64, QuadError> {
    integrate_path_fn(|z| e.eval(z), path, tol)
}

/// Residue of `e` at the origin: read off the Laurent form when the
/// expression has one (exact), otherwise `∮ e dz / 2πi` over the given
/// core loop.
pub(crate) fn residue_at_origin(
    e: &CExpr,
    core_loop: &[Complex64],
) -> Result<Complex64, QuadError> {
    if let Some(m) = crate::cexpr::laurent(e) {
        return Ok(m.get(&-1).copied().unwrap_or(Complex64::ZERO));
    }
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    Ok(integrate_path(e, core_loop, 1e-12)? / two_pi_i)
}

/// Closed regular n-gon inscribed in the circle of radius `r` about `center`,
/// traversed counterclockwise; first and last points coincide.
pub fn polygon_loop(center: Complex64, r: f64, n: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let theta = std::f64::consts::TAU * (k as f64) / (n as f64);
        pts.push(center + Complex64::from_polar(r, theta));
    }
    // exact closure regardless of rounding in from_polar
    let first = pts[0];
    *pts.last_mut().unwrap() = first;
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cexpr::parse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_over_segment() {
        let e = parse("1").unwrap();
        let v = integrate_path(&e, &[Complex64::ZERO, c(1.0, 1.0)], 1e-12).unwrap();
        assert!((v - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn reciprocal_around_unit_polygon() {
        // ∮ dz/z over a closed 64-gon encircling the origin is exactly 2πi.
        let e = parse("1/z").unwrap();
        let path = polygon_loop(Complex64::ZERO, 1.0, 64);
        let v = integrate_path(&e, &path, 1e-10).unwrap();
        assert!((v - c(0.0, std::f64::consts::TAU)).norm() < 1e-9, "{v}");
    }

    #[test]
    fn path_independence_for_entire_integrands() {
        let e = parse("z").unwrap();
        let tol = 1e-11;
        let direct = integrate_path(&e, &[Complex64::ZERO, c(1.0, 1.0)], tol).unwrap();
        let dogleg =
            integrate_path(&e, &[Complex64::ZERO, c(1.0, 0.0), c(1.0, 1.0)], tol).unwrap();
        assert!((direct - dogleg).norm() < 2.0 * tol);
    }

    #[test]
    fn closed_loop_of_entire_function_vanishes() {
        let e = parse("exp(z)*z^2").unwrap();
        let path = polygon_loop(c(0.3, -0.2), 1.7, 48);
        let v = integrate_path(&e, &path, 1e-11).unwrap();
        assert!(v.norm() < 1e-9, "{v}");
    }

    #[test]
    fn singular_point_on_path_is_an_error() {
        let e = parse("1/z").unwrap();
        let res = integrate_path(&e, &[c(-1.0, 0.0), c(1.0, 0.0)], 1e-10);
        assert!(res.is_err());
    }

    #[test]
    fn short_paths_are_rejected() {
        let e = parse("1").unwrap();
        assert!(matches!(
            integrate_path(&e, &[Complex64::ZERO], 1e-10),
            Err(QuadError::DegeneratePath)
        ));
    }
}
