//! Exact symbolic differentiation d/dz.

use super::{add, div, func, mul, neg, pow, real, sub, CExpr, FuncKind};
use num_complex::Complex64;

pub(crate) fn differentiate(e: &CExpr) -> CExpr {
    match e {
        CExpr::Const(_) => CExpr::Const(Complex64::ZERO),
        CExpr::Var => CExpr::Const(Complex64::ONE),
        CExpr::Neg(inner) => neg(differentiate(inner)),
        CExpr::Add(a, b) => add(differentiate(a), differentiate(b)),
        CExpr::Sub(a, b) => sub(differentiate(a), differentiate(b)),
        CExpr::Mul(a, b) => add(
            mul(differentiate(a), (**b).clone()),
            mul((**a).clone(), differentiate(b)),
        ),
        CExpr::Div(a, b) => {
            // (a'b - ab') / b^2
            let num = sub(
                mul(differentiate(a), (**b).clone()),
                mul((**a).clone(), differentiate(b)),
            );
            div(num, pow((**b).clone(), 2))
        }
        CExpr::Pow(base, n) => {
            // n * base^(n-1) * base'
            mul(
                mul(real(f64::from(*n)), pow((**base).clone(), n - 1)),
                differentiate(base),
            )
        }
        CExpr::Func(kind, arg) => {
            let outer = match kind {
                FuncKind::Exp => func(FuncKind::Exp, (**arg).clone()),
                FuncKind::Log => {
                    return div(differentiate(arg), (**arg).clone());
                }
                FuncKind::Sin => func(FuncKind::Cos, (**arg).clone()),
                FuncKind::Cos => neg(func(FuncKind::Sin, (**arg).clone())),
                FuncKind::Sinh => func(FuncKind::Cosh, (**arg).clone()),
                FuncKind::Cosh => func(FuncKind::Sinh, (**arg).clone()),
            };
            mul(outer, differentiate(arg))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fd(e: &super::CExpr, z: Complex64, step: f64) -> Complex64 {
        (e.eval(z + step).unwrap() - e.eval(z - step).unwrap()) / (2.0 * step)
    }

    #[test]
    fn derivative_of_square() {
        let d = parse("z^2").unwrap().differentiate();
        assert_eq!(d.eval(c(3.0, 0.0)).unwrap(), c(6.0, 0.0));
    }

    #[test]
    fn product_rule_matches_finite_differences() {
        let e = parse("z*exp(z)").unwrap();
        let d = e.differentiate();
        let at = Complex64::ZERO;
        assert!((d.eval(at).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((d.eval(at).unwrap() - fd(&e, at, 1e-5)).norm() < 1e-8);
    }

    #[test]
    fn quotient_rule() {
        let d = parse("1/(2*z)").unwrap().differentiate();
        assert_eq!(d.eval(c(1.0, 0.0)).unwrap(), c(-0.5, 0.0));
    }

    #[test]
    fn chain_rule_through_functions() {
        let e = parse("sin(z^2)").unwrap();
        let d = e.differentiate();
        let z = c(0.4, 0.3);
        let expected = 2.0 * z * (z * z).cos();
        assert!((d.eval(z).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn log_derivative() {
        let d = parse("log(z)").unwrap().differentiate();
        let z = c(2.0, 1.0);
        assert!((d.eval(z).unwrap() - 1.0 / z).norm() < 1e-15);
    }

    #[test]
    fn negative_power_rule() {
        let d = parse("z^-3").unwrap().differentiate();
        let z = c(2.0, 0.0);
        assert!((d.eval(z).unwrap() - c(-3.0 / 16.0, 0.0)).norm() < 1e-15);
    }
}
