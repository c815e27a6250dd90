//! Rule-based antidifferentiation.
//!
//! The closed-form class: Laurent polynomials in `z` without a `z^-1` term,
//! the elementary functions exp/sin/cos/sinh/cosh of affine arguments, and
//! polynomial multiples of those (reduced by repeated integration by parts).
//! `1/z` deliberately falls outside the class and reports [`NoClosedForm`];
//! callers integrate it along explicit paths instead.

use super::{add, constant, mul, neg, pow, var, CExpr, FuncKind};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// No antiderivative in the supported closed-form class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no closed-form antiderivative in the supported class")]
pub struct NoClosedForm;

const MAX_DEGREE: i32 = 64;

/// Laurent polynomial: exponent -> coefficient, zero coefficients dropped.
pub(crate) type Laurent = BTreeMap<i32, Complex64>;

fn laurent_insert(map: &mut Laurent, k: i32, c: Complex64) {
    if c == Complex64::ZERO {
        return;
    }
    let entry = map.entry(k).or_insert(Complex64::ZERO);
    *entry += c;
    if *entry == Complex64::ZERO {
        map.remove(&k);
    }
}

fn laurent_mul(a: &Laurent, b: &Laurent) -> Option<Laurent> {
    let mut out = Laurent::new();
    for (&ka, &ca) in a {
        for (&kb, &cb) in b {
            let k = ka.checked_add(kb)?;
            if k.abs() > MAX_DEGREE {
                return None;
            }
            laurent_insert(&mut out, k, ca * cb);
        }
    }
    Some(out)
}

/// Interprets `e` as a Laurent polynomial in `z` when its structure allows it.
pub(crate) fn laurent(e: &CExpr) -> Option<Laurent> {
    match e {
        CExpr::Const(c) => {
            let mut m = Laurent::new();
            laurent_insert(&mut m, 0, *c);
            Some(m)
        }
        CExpr::Var => {
            let mut m = Laurent::new();
            laurent_insert(&mut m, 1, Complex64::ONE);
            Some(m)
        }
        CExpr::Neg(inner) => {
            let mut m = laurent(inner)?;
            for c in m.values_mut() {
                *c = -*c;
            }
            Some(m)
        }
        CExpr::Add(a, b) | CExpr::Sub(a, b) => {
            let ma = laurent(a)?;
            let mb = laurent(b)?;
            let mut out = ma;
            let flip = matches!(e, CExpr::Sub(..));
            for (k, c) in mb {
                laurent_insert(&mut out, k, if flip { -c } else { c });
            }
            Some(out)
        }
        CExpr::Mul(a, b) => laurent_mul(&laurent(a)?, &laurent(b)?),
        CExpr::Div(a, b) => {
            let ma = laurent(a)?;
            let mb = laurent(b)?;
            // only division by a monomial stays in the class
            if mb.len() != 1 {
                return None;
            }
            let (&k, &c) = mb.iter().next()?;
            if c == Complex64::ZERO {
                return None;
            }
            let mut out = Laurent::new();
            for (&ka, &ca) in &ma {
                let shifted = ka.checked_sub(k)?;
                if shifted.abs() > MAX_DEGREE {
                    return None;
                }
                laurent_insert(&mut out, shifted, ca / c);
            }
            Some(out)
        }
        CExpr::Pow(base, n) => {
            let mb = laurent(base)?;
            if *n >= 0 {
                if *n > 16 {
                    return None;
                }
                let mut out = Laurent::new();
                laurent_insert(&mut out, 0, Complex64::ONE);
                for _ in 0..*n {
                    out = laurent_mul(&out, &mb)?;
                }
                Some(out)
            } else {
                if mb.len() != 1 {
                    return None;
                }
                let (&k, &c) = mb.iter().next()?;
                if c == Complex64::ZERO {
                    return None;
                }
                let kk = k.checked_mul(*n)?;
                if kk.abs() > MAX_DEGREE {
                    return None;
                }
                let mut out = Laurent::new();
                laurent_insert(&mut out, kk, c.powi(*n));
                Some(out)
            }
        }
        CExpr::Func(..) => None,
    }
}

/// True iff the Laurent form exists and has a negative-exponent term.
pub(crate) fn has_origin_pole(e: &CExpr) -> bool {
    laurent(e)
        .map(|m| m.keys().next().is_some_and(|k| *k < 0))
        .unwrap_or(false)
}

fn laurent_to_expr(m: &Laurent) -> CExpr {
    let mut out = constant(Complex64::ZERO);
    for (&k, &c) in m {
        let term = match k {
            0 => constant(c),
            1 => mul(constant(c), var()),
            _ => mul(constant(c), pow(var(), k)),
        };
        out = add(out, term);
    }
    out
}

/// Affine argument `alpha*z + gamma` when the expression has that shape.
fn affine(e: &CExpr) -> Option<(Complex64, Complex64)> {
    let m = laurent(e)?;
    if m.keys().any(|&k| k != 0 && k != 1) {
        return None;
    }
    let gamma = m.get(&0).copied().unwrap_or(Complex64::ZERO);
    let alpha = m.get(&1).copied().unwrap_or(Complex64::ZERO);
    Some((alpha, gamma))
}

/// One multiplicative factor of a product form.
enum Factor {
    Poly(Laurent),
    Elem { kind: FuncKind, arg: CExpr, alpha: Complex64 },
}

fn collect_factors(e: &CExpr, sign: &mut Complex64, out: &mut Vec<Factor>) -> Result<(), NoClosedForm> {
    if let Some(m) = laurent(e) {
        out.push(Factor::Poly(m));
        return Ok(());
    }
    match e {
        CExpr::Neg(inner) => {
            *sign = -*sign;
            collect_factors(inner, sign, out)
        }
        CExpr::Mul(a, b) => {
            collect_factors(a, sign, out)?;
            collect_factors(b, sign, out)
        }
        CExpr::Div(a, b) => {
            // divisor must be a constant for the product table
            let mb = laurent(b).ok_or(NoClosedForm)?;
            if mb.len() == 1 {
                if let Some(&c) = mb.get(&0) {
                    if c != Complex64::ZERO {
                        *sign /= c;
                        return collect_factors(a, sign, out);
                    }
                }
            }
            Err(NoClosedForm)
        }
        CExpr::Func(kind, arg) if *kind != FuncKind::Log => {
            let (alpha, _) = affine(arg).ok_or(NoClosedForm)?;
            if alpha == Complex64::ZERO {
                // constant argument would have folded into the Laurent branch
                return Err(NoClosedForm);
            }
            out.push(Factor::Elem {
                kind: *kind,
                arg: (**arg).clone(),
                alpha,
            });
            Ok(())
        }
        _ => Err(NoClosedForm),
    }
}

/// Primitive of `m * kind(arg)` with respect to z where arg' = alpha:
/// returns the next (kind, multiplier).
fn primitive_step(kind: FuncKind, m: Complex64, alpha: Complex64) -> (FuncKind, Complex64) {
    match kind {
        FuncKind::Exp => (FuncKind::Exp, m / alpha),
        FuncKind::Sin => (FuncKind::Cos, -m / alpha),
        FuncKind::Cos => (FuncKind::Sin, m / alpha),
        FuncKind::Sinh => (FuncKind::Cosh, m / alpha),
        FuncKind::Cosh => (FuncKind::Sinh, m / alpha),
        FuncKind::Log => unreachable!("log is not in the product table"),
    }
}

fn laurent_derivative(m: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (&k, &c) in m {
        if k != 0 {
            laurent_insert(&mut out, k - 1, c * f64::from(k));
        }
    }
    out
}

fn integrate_laurent(m: &Laurent) -> Result<CExpr, NoClosedForm> {
    if m.contains_key(&-1) {
        return Err(NoClosedForm);
    }
    let mut out = Laurent::new();
    for (&k, &c) in m {
        laurent_insert(&mut out, k + 1, c / f64::from(k + 1));
    }
    Ok(laurent_to_expr(&out))
}

/// `∫ P(z) F(alpha z + gamma) dz` by repeated integration by parts;
/// P must be a plain polynomial (no negative exponents).
fn integrate_poly_times_elem(
    poly: &Laurent,
    kind: FuncKind,
    arg: &CExpr,
    alpha: Complex64,
) -> Result<CExpr, NoClosedForm> {
    if poly.keys().next().is_some_and(|k| *k < 0) {
        return Err(NoClosedForm);
    }
    let mut total = constant(Complex64::ZERO);
    let mut p = poly.clone();
    let mut f_kind = kind;
    let mut f_mult = Complex64::ONE;
    let mut sign = Complex64::ONE;
    // ∫PF = P·G1 - P'·G2 + P''·G3 - ... with G_{k+1} the primitive of G_k
    for _ in 0..=MAX_DEGREE {
        let (g_kind, g_mult) = primitive_step(f_kind, f_mult, alpha);
        let term = mul(
            mul(constant(sign * g_mult), laurent_to_expr(&p)),
            CExpr::Func(g_kind, Box::new(arg.clone())),
        );
        total = add(total, term);
        p = laurent_derivative(&p);
        if p.is_empty() {
            return Ok(total);
        }
        f_kind = g_kind;
        f_mult = g_mult;
        sign = -sign;
    }
    Err(NoClosedForm)
}

fn antiderivative_inner(e: &CExpr) -> Result<CExpr, NoClosedForm> {
    if let Some(m) = laurent(e) {
        return integrate_laurent(&m);
    }
    match e {
        CExpr::Neg(inner) => Ok(neg(antiderivative_inner(inner)?)),
        CExpr::Add(a, b) => Ok(add(antiderivative_inner(a)?, antiderivative_inner(b)?)),
        CExpr::Sub(a, b) => Ok(super::sub(antiderivative_inner(a)?, antiderivative_inner(b)?)),
        _ => {
            let mut sign = Complex64::ONE;
            let mut factors = Vec::new();
            collect_factors(e, &mut sign, &mut factors)?;
            let mut poly = Laurent::new();
            laurent_insert(&mut poly, 0, sign);
            let mut elem: Option<(FuncKind, CExpr, Complex64)> = None;
            for factor in factors {
                match factor {
                    Factor::Poly(m) => {
                        poly = laurent_mul(&poly, &m).ok_or(NoClosedForm)?;
                    }
                    Factor::Elem { kind, arg, alpha } => {
                        if elem.is_some() {
                            return Err(NoClosedForm);
                        }
                        elem = Some((kind, arg, alpha));
                    }
                }
            }
            match elem {
                Some((kind, arg, alpha)) => integrate_poly_times_elem(&poly, kind, &arg, alpha),
                None => integrate_laurent(&poly),
            }
        }
    }
}

/// Deterministic sample ring away from the origin and the log cut.
fn verification_samples() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(32);
    for k in 0..32 {
        let r = 0.6 + 0.9 * ((k * 7 % 32) as f64) / 31.0;
        let theta = -2.7 + 5.4 * (k as f64) / 31.0;
        out.push(Complex64::from_polar(r, theta));
    }
    out
}

/// Antiderivative of `e` in the supported closed-form class.
///
/// The result is verified against the symbolic derivative at 32 sample
/// points before it is returned; a candidate that fails verification is
/// treated as out of class.
pub fn antiderivative(e: &CExpr) -> Result<CExpr, NoClosedForm> {
    let primitive = antiderivative_inner(e)?;
    let check = primitive.differentiate();
    for z in verification_samples() {
        let (Ok(expected), Ok(actual)) = (e.eval(z), check.eval(z)) else {
            continue;
        };
        if (expected - actual).norm() > 1e-9 * expected.norm().max(1.0) {
            return Err(NoClosedForm);
        }
    }
    Ok(primitive)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::quad::integrate_path;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn integral_of_z_is_half_square() {
        let f = antiderivative(&parse("z").unwrap()).unwrap();
        let d = f.differentiate();
        assert!((d.eval(c(2.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn integral_of_exp_is_exp() {
        let f = antiderivative(&parse("exp(z)").unwrap()).unwrap();
        let z = c(0.3, -0.8);
        assert!((f.differentiate().eval(z).unwrap() - z.exp()).norm() < 1e-12);
    }

    #[test]
    fn one_over_z_has_no_closed_form() {
        assert_eq!(antiderivative(&parse("1/z").unwrap()), Err(NoClosedForm));
        // the path-integral fallback still recovers ln 2 on a radial segment
        let e = parse("1/z").unwrap();
        let v = integrate_path(&e, &[c(1.0, 0.0), c(2.0, 0.0)], 1e-12).unwrap();
        assert!((v - c(std::f64::consts::LN_2, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn laurent_terms_integrate_termwise() {
        // ∫ (3z^2 - 1/(2 z^2)) dz = z^3 + 1/(2 z)
        let f = antiderivative(&parse("3*z^2 - 1/(2*z^2)").unwrap()).unwrap();
        let z = c(0.7, 0.4);
        let expected = z * z * z + 0.5 / z;
        let base = f.eval(c(1.0, 0.0)).unwrap() - (c(1.0, 0.0) + 0.5);
        assert!((f.eval(z).unwrap() - base - expected).norm() < 1e-12);
    }

    #[test]
    fn product_rule_table_handles_poly_times_exp() {
        let e = parse("z*exp(z)").unwrap();
        let f = antiderivative(&e).unwrap();
        let z = c(0.4, 1.1);
        // ∫ z e^z = (z-1) e^z
        let expected = (z - 1.0) * z.exp();
        let offset = f.eval(Complex64::ZERO).unwrap() - (-Complex64::ONE);
        assert!((f.eval(z).unwrap() - offset - expected).norm() < 1e-12);
    }

    #[test]
    fn product_rule_table_handles_poly_times_trig() {
        let e = parse("z^2*cos(2*z)").unwrap();
        let f = antiderivative(&e).unwrap();
        assert!((f.differentiate().eval(c(0.3, 0.2)).unwrap()
            - e.eval(c(0.3, 0.2)).unwrap())
        .norm()
            < 1e-12);
    }

    #[test]
    fn affine_arguments_are_supported() {
        let e = parse("sinh(2*z+1)").unwrap();
        let f = antiderivative(&e).unwrap();
        let z = c(0.25, -0.5);
        assert!((f.differentiate().eval(z).unwrap() - e.eval(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn nonaffine_and_double_elementary_products_are_rejected() {
        assert_eq!(antiderivative(&parse("exp(z^2)").unwrap()), Err(NoClosedForm));
        assert_eq!(
            antiderivative(&parse("exp(z)*sin(z)").unwrap()),
            Err(NoClosedForm)
        );
        assert_eq!(antiderivative(&parse("log(z)").unwrap()), Err(NoClosedForm));
    }

    #[test]
    fn antiderivative_of_derivative_is_identity_up_to_constant() {
        for src in ["z^3+2*z", "exp(2*z)", "z*sinh(z)", "cos(z)-z^2"] {
            let e = parse(src).unwrap();
            let restored = antiderivative(&e.differentiate()).unwrap();
            let z1 = c(0.6, 0.2);
            let z2 = c(-0.3, 0.9);
            let lhs = restored.eval(z1).unwrap() - restored.eval(z2).unwrap();
            let rhs = e.eval(z1).unwrap() - e.eval(z2).unwrap();
            assert!((lhs - rhs).norm() < 1e-9, "{src}");
        }
    }
}
