//! A small expression language for holomorphic functions of one complex
//! variable `z`: parsing, evaluation, exact symbolic differentiation,
//! rule-based antidifferentiation and a finite-difference holomorphy oracle.

mod antideriv;
mod diff;
mod holo;
mod parser;

pub use antideriv::{antiderivative, NoClosedForm};
pub use holo::{HoloFn, Route, Singularities};
pub use parser::{parse, ParseError};

pub(crate) use antideriv::laurent;
pub(crate) use holo::route_path;

use num_complex::Complex64;
use thiserror::Error;

/// Built-in function names accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuncKind {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl FuncKind {
    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Exp => "exp",
            FuncKind::Log => "log",
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Sinh => "sinh",
            FuncKind::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => FuncKind::Exp,
            "log" => FuncKind::Log,
            "sin" => FuncKind::Sin,
            "cos" => FuncKind::Cos,
            "sinh" => FuncKind::Sinh,
            "cosh" => FuncKind::Cosh,
            _ => return None,
        })
    }

    fn apply(self, w: Complex64) -> Complex64 {
        match self {
            FuncKind::Exp => w.exp(),
            FuncKind::Log => w.ln(),
            FuncKind::Sin => w.sin(),
            FuncKind::Cos => w.cos(),
            FuncKind::Sinh => w.sinh(),
            FuncKind::Cosh => w.cosh(),
        }
    }
}

/// Expression tree over the single variable `z`.
///
/// Power exponents are integers (possibly negative); `log` uses the principal
/// branch with the cut on the non-positive real axis.
#[derive(Debug, Clone, PartialEq)]
pub enum CExpr {
    Const(Complex64),
    Var,
    Neg(Box<CExpr>),
    Add(Box<CExpr>, Box<CExpr>),
    Sub(Box<CExpr>, Box<CExpr>),
    Mul(Box<CExpr>, Box<CExpr>),
    Div(Box<CExpr>, Box<CExpr>),
    Pow(Box<CExpr>, i32),
    Func(FuncKind, Box<CExpr>),
}

/// Evaluation failure at a concrete point.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero at z = {at}")]
    DivisionByZero { at: Complex64 },
    #[error("log evaluated at 0 (z = {at})")]
    LogOfZero { at: Complex64 },
    #[error("quadrature-backed evaluation failed: {detail}")]
    Integration { detail: String },
}

impl CExpr {
    /// Evaluates the expression at `z`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        match self {
            CExpr::Const(c) => Ok(*c),
            CExpr::Var => Ok(z),
            CExpr::Neg(e) => Ok(-e.eval(z)?),
            CExpr::Add(a, b) => Ok(a.eval(z)? + b.eval(z)?),
            CExpr::Sub(a, b) => Ok(a.eval(z)? - b.eval(z)?),
            CExpr::Mul(a, b) => Ok(a.eval(z)? * b.eval(z)?),
            CExpr::Div(a, b) => {
                let den = b.eval(z)?;
                if den == Complex64::ZERO {
                    return Err(EvalError::DivisionByZero { at: z });
                }
                Ok(a.eval(z)? / den)
            }
            CExpr::Pow(e, n) => {
                let base = e.eval(z)?;
                if *n < 0 && base == Complex64::ZERO {
                    return Err(EvalError::DivisionByZero { at: z });
                }
                Ok(base.powi(*n))
            }
            CExpr::Func(kind, e) => {
                let w = e.eval(z)?;
                if *kind == FuncKind::Log && w == Complex64::ZERO {
                    return Err(EvalError::LogOfZero { at: z });
                }
                Ok(kind.apply(w))
            }
        }
    }

    /// Symbolic derivative d/dz, simplified by constant folding only.
    pub fn differentiate(&self) -> CExpr {
        diff::differentiate(self)
    }

    /// True when the expression contains no `z`.
    pub fn is_constant(&self) -> bool {
        match self {
            CExpr::Const(_) => true,
            CExpr::Var => false,
            CExpr::Neg(e) | CExpr::Pow(e, _) | CExpr::Func(_, e) => e.is_constant(),
            CExpr::Add(a, b) | CExpr::Sub(a, b) | CExpr::Mul(a, b) | CExpr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            CExpr::Add(..) | CExpr::Sub(..) => 1,
            CExpr::Mul(..) | CExpr::Div(..) => 2,
            CExpr::Neg(_) => 3,
            CExpr::Pow(..) => 4,
            // non-atomic constants print inside their own parentheses
            CExpr::Const(_) | CExpr::Var | CExpr::Func(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut std::fmt::Formatter<'_>, min: u8) -> std::fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            CExpr::Const(c) => fmt_const(f, *c)?,
            CExpr::Var => write!(f, "z")?,
            CExpr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3)?;
            }
            CExpr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "+")?;
                b.fmt_prec(f, 2)?;
            }
            CExpr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, "-")?;
                b.fmt_prec(f, 2)?;
            }
            CExpr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            CExpr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            CExpr::Pow(e, n) => {
                e.fmt_prec(f, 5)?;
                write!(f, "^{n}")?;
            }
            CExpr::Func(kind, e) => {
                write!(f, "{}(", kind.name())?;
                e.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn fmt_const(f: &mut std::fmt::Formatter<'_>, c: Complex64) -> std::fmt::Result {
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    if im == 0.0 {
        if re >= 0.0 {
            write!(f, "{re}")
        } else {
            write!(f, "({re})")
        }
    } else if re == 0.0 {
        if im == 1.0 {
            write!(f, "i")
        } else if im == -1.0 {
            write!(f, "(-i)")
        } else if im > 0.0 {
            write!(f, "({im}*i)")
        } else {
            write!(f, "(-{}*i)", -im)
        }
    } else if im > 0.0 {
        write!(f, "({re}+{im}*i)")
    } else {
        write!(f, "({re}-{}*i)", -im)
    }
}

/// Prints a canonical form that re-parses to a structurally identical tree.
impl std::fmt::Display for CExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// ---- smart constructors -------------------------------------------------
//
// Used by the symbolic passes so derivative/antiderivative trees stay small.
// They fold constants and eliminate 0/1 identities, nothing deeper.

pub(crate) fn constant(c: Complex64) -> CExpr {
    CExpr::Const(c)
}

pub(crate) fn real(x: f64) -> CExpr {
    CExpr::Const(Complex64::new(x, 0.0))
}

pub(crate) fn var() -> CExpr {
    CExpr::Var
}

fn as_const(e: &CExpr) -> Option<Complex64> {
    match e {
        CExpr::Const(c) => Some(*c),
        _ => None,
    }
}

fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

pub(crate) fn neg(e: CExpr) -> CExpr {
    match e {
        CExpr::Const(c) => CExpr::Const(-c),
        CExpr::Neg(inner) => *inner,
        other => CExpr::Neg(Box::new(other)),
    }
}

pub(crate) fn add(a: CExpr, b: CExpr) -> CExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if finite(x + y) => return CExpr::Const(x + y),
        (Some(x), _) if x == Complex64::ZERO => return b,
        (_, Some(y)) if y == Complex64::ZERO => return a,
        _ => {}
    }
    CExpr::Add(Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: CExpr, b: CExpr) -> CExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if finite(x - y) => return CExpr::Const(x - y),
        (_, Some(y)) if y == Complex64::ZERO => return a,
        (Some(x), _) if x == Complex64::ZERO => return neg(b),
        _ => {}
    }
    CExpr::Sub(Box::new(a), Box::new(b))
}

pub(crate) fn mul(a: CExpr, b: CExpr) -> CExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if finite(x * y) => return CExpr::Const(x * y),
        (Some(x), _) if x == Complex64::ZERO => return CExpr::Const(Complex64::ZERO),
        (_, Some(y)) if y == Complex64::ZERO => return CExpr::Const(Complex64::ZERO),
        (Some(x), _) if x == Complex64::ONE => return b,
        (_, Some(y)) if y == Complex64::ONE => return a,
        _ => {}
    }
    CExpr::Mul(Box::new(a), Box::new(b))
}

pub(crate) fn div(a: CExpr, b: CExpr) -> CExpr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if y != Complex64::ZERO && finite(x / y) => {
            return CExpr::Const(x / y)
        }
        (Some(x), _) if x == Complex64::ZERO => return CExpr::Const(Complex64::ZERO),
        (_, Some(y)) if y == Complex64::ONE => return a,
        _ => {}
    }
    CExpr::Div(Box::new(a), Box::new(b))
}

pub(crate) fn pow(e: CExpr, n: i32) -> CExpr {
    match n {
        0 => return CExpr::Const(Complex64::ONE),
        1 => return e,
        _ => {}
    }
    if let Some(c) = as_const(&e) {
        if n > 0 || c != Complex64::ZERO {
            let v = c.powi(n);
            if finite(v) {
                return CExpr::Const(v);
            }
        }
    }
    CExpr::Pow(Box::new(e), n)
}

pub(crate) fn func(kind: FuncKind, e: CExpr) -> CExpr {
    if let Some(c) = as_const(&e) {
        if !(kind == FuncKind::Log && c == Complex64::ZERO) {
            let v = kind.apply(c);
            if finite(v) {
                return CExpr::Const(v);
            }
        }
    }
    CExpr::Func(kind, Box::new(e))
}

/// Finite-difference estimate of the anti-holomorphic derivative,
/// `∂/∂z̄ = ½(∂_x + i ∂_y)`, evaluated with central differences of spacing
/// `step`. Near zero at every sample certifies holomorphy.
pub fn holomorphy_residual_fn<F>(f: F, samples: &[Complex64], step: f64) -> Result<f64, EvalError>
where
    F: Fn(Complex64) -> Result<Complex64, EvalError>,
{
    let mut worst = 0.0f64;
    for &z in samples {
        let dx = (f(z + step)? - f(z - step)?) / (2.0 * step);
        let dy = (f(z + Complex64::new(0.0, step))? - f(z - Complex64::new(0.0, step))?)
            / (2.0 * step);
        let dbar = 0.5 * (dx + Complex64::new(0.0, 1.0) * dy);
        worst = worst.max(dbar.norm());
    }
    Ok(worst)
}

/// `holomorphy_residual_fn` specialised to an expression.
pub fn holomorphy_residual(e: &CExpr, samples: &[Complex64], step: f64) -> Result<f64, EvalError> {
    holomorphy_residual_fn(|z| e.eval(z), samples, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_polynomial_and_exp() {
        let e = parse("z^2 + exp(z)").unwrap();
        assert_eq!(e.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn eval_reciprocal() {
        let e = parse("1/(2*z)").unwrap();
        assert_eq!(e.eval(c(1.0, 0.0)).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn eval_sinh_at_half_pi_i() {
        // sinh(ix) = i sin(x), so sinh(iπ/2) = i
        let e = parse("sinh(z)").unwrap();
        let v = e.eval(c(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eval_division_by_zero() {
        let e = parse("1/z").unwrap();
        assert!(matches!(
            e.eval(Complex64::ZERO),
            Err(EvalError::DivisionByZero { .. })
        ));
    }

    #[test]
    fn eval_log_of_zero() {
        let e = parse("log(z)").unwrap();
        assert!(matches!(
            e.eval(Complex64::ZERO),
            Err(EvalError::LogOfZero { .. })
        ));
    }

    #[test]
    fn log_uses_principal_branch() {
        let e = parse("log(z)").unwrap();
        let v = e.eval(c(0.0, 1.0)).unwrap();
        assert!((v - c(0.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-15);
    }

    #[test]
    fn holomorphy_residual_of_entire_functions() {
        let samples: Vec<Complex64> = (0..10)
            .map(|k| Complex64::from_polar(0.3 + 0.05 * k as f64, 0.7 * k as f64))
            .collect();
        let e = parse("exp(z)").unwrap();
        assert!(holomorphy_residual(&e, &samples, 1e-4).unwrap() < 1e-6);
        let p = parse("z^2").unwrap();
        assert!(holomorphy_residual(&p, &samples, 1e-4).unwrap() < 1e-6);
    }

    #[test]
    fn holomorphy_residual_detects_log_modulus() {
        // ∂_z̄ ln|z| = 1/(2 z̄), which is 0.5 at z = 1.
        let f = |z: Complex64| Ok(Complex64::new(z.norm().ln(), 0.0));
        let r = holomorphy_residual_fn(f, &[c(1.0, 0.0)], 1e-5).unwrap();
        assert!((r - 0.5).abs() < 1e-6, "residual {r}");
    }

    #[test]
    fn display_roundtrips_structurally() {
        for src in [
            "z",
            "z^2+exp(z)",
            "1/(2*z)",
            "-z^2",
            "z*-z",
            "1--z",
            "(z+1)^-3",
            "sin(cos(z))",
            "2.5*z/(1+z)",
            "i*z",
        ] {
            let ast = parse(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap();
            assert_eq!(ast, reparsed, "{src} -> {printed}");
        }
    }
}
