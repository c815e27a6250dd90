//! Rotational surfaces in the family and the two-coaxial-circle existence
//! problem.
//!
//! Every rotation-invariant surface of the representation is
//! `X(r e^{iθ}) = ((a r + b/r) e^{iθ} / c, ln(r)/c)` for complex `a, b` and
//! real `c > 0`. Passing such a surface with `a = b ∈ ℝ` through the two
//! circles `x² + y² = r²`, `t = ±l` reduces to counting roots of
//! `g(c) = (a/c)(e^{cl} + e^{-cl}) = r`. `g` falls and then rises with one
//! minimum at `c·l = x*`, the fixed point of `coth(x) = x`, so the answer
//! is 2, 1 or 0 according to `l/r` against `x*/(2a cosh x*)`.

use crate::cexpr::{constant, mul, pow, var, HoloFn};
use crate::enneper::{DataError, EnneperData};
use crate::hfield::{Domain, HarmonicField};
use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance classifying a tangency (count 1).
const TANGENCY_REL_TOL: f64 = 1e-9;
/// Residual target for returned roots, relative to `max(1, r)`.
const ROOT_RESIDUAL_TOL: f64 = 1e-12;
/// Newton steps fall back to bisection below this derivative magnitude.
const MIN_DERIVATIVE: f64 = 1e-14;

/// Parameters `(a, b, c)` of a rotational surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationalSurface {
    pub a: Complex64,
    pub b: Complex64,
    pub c: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RotationalError {
    #[error("c must be positive, got {0}")]
    NonPositiveC(f64),
    #[error("(a, b) = (0, 0) degenerates to a vertical line")]
    ZeroCoefficients,
    #[error("surface degenerates on the circle |z| = {radius} inside the annulus")]
    DegenerateCircle { radius: f64 },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Surface data `L = (a/c) z`, `P = (conj(b)/c)/z`, `h = ln|z| / c` on the
/// annulus `r1 < |z| < r2`, so that
/// `X(r e^{iθ}) = ((a r + b/r) e^{iθ}/c, ln(r)/c)`.
pub fn make_rotational(
    s: &RotationalSurface,
    r1: f64,
    r2: f64,
) -> Result<EnneperData, RotationalError> {
    if !(s.c > 0.0) {
        return Err(RotationalError::NonPositiveC(s.c));
    }
    if s.a == Complex64::ZERO && s.b == Complex64::ZERO {
        return Err(RotationalError::ZeroCoefficients);
    }
    // the sharp margin vanishes on |z|^2 = |b/a| exactly when a*conj(b) is
    // a nonpositive real; reject when that circle lies in the annulus
    let ab = s.a * s.b.conj();
    if s.a != Complex64::ZERO
        && s.b != Complex64::ZERO
        && ab.re <= 0.0
        && ab.im.abs() <= 1e-12 * ab.norm()
    {
        let radius = (s.b.norm() / s.a.norm()).sqrt();
        if radius >= r1 && radius <= r2 {
            return Err(RotationalError::DegenerateCircle { radius });
        }
    }
    let c_inv = 1.0 / s.c;
    let l = HoloFn::from_expr(mul(constant(s.a * c_inv), var()));
    let p = HoloFn::from_expr(mul(constant(s.b.conj() * c_inv), pow(var(), -1)));
    let h = HarmonicField::new(HoloFn::zero(), c_inv);
    let domain = Domain::Annulus { r1, r2 };
    let base_point = Complex64::new((r1 * r2).sqrt(), 0.0);
    Ok(EnneperData::new(l, p, h, domain, base_point)?)
}

/// Profile curve value at height parameter `R`:
/// `(a e^{cR} + b e^{-cR}) / c`, the planar radius where `ln r = cR`.
pub fn profile(s: &RotationalSurface, r_param: f64) -> Complex64 {
    let e = (s.c * r_param).exp();
    (s.a * e + s.b / e) / s.c
}

/// The unique positive fixed point of `coth(x) = x`, by bisection on
/// `[1, 2]` followed by Newton polish; the residual is below 1e-12.
pub fn coth_star() -> f64 {
    let f = |x: f64| x.cosh() / x.sinh() - x;
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let s = x.sinh();
        let deriv = -1.0 / (s * s) - 1.0;
        x -= f(x) / deriv;
    }
    x
}

/// Critical ratio `c₁ = x* / (2 a cosh x*)`: rotational surfaces through
/// both circles exist iff `l/r <= c₁(a)`.
pub fn critical_ratio(a: f64) -> Result<f64, SolveError> {
    if !(a > 0.0) {
        return Err(SolveError::NonPositive("a", a));
    }
    let x = coth_star();
    Ok(x / (2.0 * a * x.cosh()))
}

/// Two coaxial circles of radius `radius` at heights `±half_separation`,
/// to be joined by rotational surfaces with profile coefficient `a > 0`
/// (the `a = b ∈ ℝ` case that the circle problem reduces to).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleProblem {
    a: f64,
    radius: f64,
    half_separation: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
}

impl CircleProblem {
    pub fn new(a: f64, radius: f64, half_separation: f64) -> Result<Self, SolveError> {
        for (name, v) in [("a", a), ("radius", radius), ("half-separation", half_separation)] {
            if !(v > 0.0) {
                return Err(SolveError::NonPositive(name, v));
            }
        }
        Ok(CircleProblem {
            a,
            radius,
            half_separation,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    /// `g(c) = (a/c)(e^{cl} + e^{-cl})`: the planar radius the surface with
    /// parameter `c` attains at heights `±l`.
    pub fn g(&self, c: f64) -> f64 {
        2.0 * self.a * (c * self.half_separation).cosh() / c
    }

    /// `g'(c) = 2a (cl sinh(cl) - cosh(cl)) / c²`.
    pub fn g_prime(&self, c: f64) -> f64 {
        let u = c * self.half_separation;
        2.0 * self.a * (u * u.sinh() - u.cosh()) / (c * c)
    }
}

/// A solution value `c` with its equation residual `|g(c) - r|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleRoot {
    pub c: f64,
    pub residual: f64,
}

/// Root count and the roots themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSolution {
    pub roots: Vec<CircleRoot>,
}

impl CircleSolution {
    pub fn count(&self) -> usize {
        self.roots.len()
    }
}

/// Counts and computes the rotational surfaces through both circles.
///
/// `g` is strictly decreasing left of its minimum `c = x*/l` and strictly
/// increasing right of it, so the count is decided by comparing
/// `g_min = 2 a l cosh(x*) / x*` with the target radius: two roots below,
/// one at tangency (relative tolerance 1e-9), none above.
pub fn solve_two_circles(p: &CircleProblem) -> CircleSolution {
    let l = p.half_separation;
    let r = p.radius;
    let x_star = coth_star();
    let c_min = x_star / l;
    let g_min = p.g(c_min);

    if g_min > r * (1.0 + TANGENCY_REL_TOL) {
        return CircleSolution { roots: Vec::new() };
    }
    if (g_min - r).abs() <= TANGENCY_REL_TOL * r {
        return CircleSolution {
            roots: vec![CircleRoot {
                c: c_min,
                residual: (g_min - r).abs(),
            }],
        };
    }

    // left branch: g decreasing on (0, c_min]; halve until above target
    let mut c_lo = 0.5 * c_min;
    for _ in 0..600 {
        if p.g(c_lo) > r {
            break;
        }
        c_lo *= 0.5;
    }
    let left = refine_root(p, c_lo, c_min, r);

    // right branch: g increasing on [c_min, ∞); double until above target
    let mut c_hi = 2.0 * c_min;
    for _ in 0..600 {
        if p.g(c_hi) > r {
            break;
        }
        c_hi *= 2.0;
    }
    let right = refine_root(p, c_min, c_hi, r);

    CircleSolution {
        roots: vec![left, right],
    }
}

/// Bisection with Newton acceleration on `g(c) - r` over a sign-changing
/// bracket. Newton steps that leave the bracket, or meet a vanishing
/// derivative, fall back to plain bisection.
fn refine_root(p: &CircleProblem, mut lo: f64, mut hi: f64, r: f64) -> CircleRoot {
    let target = ROOT_RESIDUAL_TOL * r.max(1.0);
    let f_lo = p.g(lo) - r;
    let mut x = 0.5 * (lo + hi);
    let mut best = CircleRoot {
        c: x,
        residual: (p.g(x) - r).abs(),
    };
    for _ in 0..200 {
        let fx = p.g(x) - r;
        if fx.abs() < best.residual {
            best = CircleRoot {
                c: x,
                residual: fx.abs(),
            };
        }
        if fx.abs() <= target {
            break;
        }
        // keep the sign change inside [lo, hi]
        if (fx > 0.0) == (f_lo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let deriv = p.g_prime(x);
        let newton = x - fx / deriv;
        x = if deriv.abs() >= MIN_DERIVATIVE && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    let fx = p.g(x) - r;
    if fx.abs() < best.residual {
        best = CircleRoot {
            c: x,
            residual: fx.abs(),
        };
    }
    best
}

/// Maps [`solve_two_circles`] over separations; deterministic.
pub fn count_table(a: f64, radius: f64, l_values: &[f64]) -> Result<Vec<(f64, usize)>, SolveError> {
    let mut out = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let p = CircleProblem::new(a, radius, l)?;
        out.push((l, solve_two_circles(&p).count()));
    }
    Ok(out)
}
