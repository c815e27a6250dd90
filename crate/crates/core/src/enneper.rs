//! The Enneper-type representation: surfaces `X = (L + conj(P), h)` built
//! from two holomorphic functions and a harmonic height field, their Hopf
//! differential `L' P' + (h_z)^2`, scaling of the defining data by a
//! holomorphic factor, and conjugate surfaces (the factor `i`).

use crate::cexpr::{
    add, constant, mul, pow, sub, var, CExpr, EvalError, HoloFn, Singularities,
};
use crate::geometry::{self, ValidationReport, DEGENERACY_REL_TOL};
use crate::hfield::{Domain, DomainError, HarmonicField};
use crate::mesh;
use crate::quad::{residue_at_origin, QuadError};
use crate::weierstrass::WeierstrassData;
use num_complex::Complex64;
use thiserror::Error;

/// Residues below this are treated as zero.
const RESIDUE_TOL: f64 = 1e-10;
/// A loop period above this is an obstruction.
pub const PERIOD_TOL: f64 = 1e-9;
/// A scaling factor with modulus below this counts as vanishing.
const FACTOR_VANISH_TOL: f64 = 1e-12;
/// Threshold for flagging sample points where `|L'| = |P'|`.
const EQUAL_MODULUS_BAND: f64 = 1e-9;

/// Defining data of an Enneper-type surface: holomorphic `L`, `P`, harmonic
/// height `h`, the domain and a base point. Derivatives `(L', P', h_z)` are
/// cached on construction.
#[derive(Debug, Clone)]
pub struct EnneperData {
    l: HoloFn,
    p: HoloFn,
    h: HarmonicField,
    domain: Domain,
    base_point: Complex64,
    base_value: (Complex64, f64),
    l_z: CExpr,
    p_z: CExpr,
    h_z: CExpr,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DataError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("base point {0} lies outside the domain")]
    BasePointOutsideDomain(Complex64),
    #[error("data is singular at the origin but the domain contains it")]
    SingularAtOrigin,
    #[error("declared singular point {0} lies inside the domain")]
    SingularPointInDomain(Complex64),
    #[error("data cannot be evaluated at the base point: {0}")]
    BasePointEvaluation(EvalError),
}

impl EnneperData {
    pub fn new(
        l: HoloFn,
        p: HoloFn,
        h: HarmonicField,
        domain: Domain,
        base_point: Complex64,
    ) -> Result<Self, DataError> {
        domain.validate()?;
        if !domain.contains(base_point) {
            return Err(DataError::BasePointOutsideDomain(base_point));
        }
        let origin_pole = l.singularities().origin_pole
            || p.singularities().origin_pole
            || h.holo().singularities().origin_pole
            || h.log_coeff() != 0.0;
        if origin_pole && domain.contains_origin() {
            return Err(DataError::SingularAtOrigin);
        }
        for fun in [&l, &p, h.holo()] {
            for &pt in &fun.singularities().points {
                if domain.contains(pt) {
                    return Err(DataError::SingularPointInDomain(pt));
                }
            }
        }
        let l_z = l.derivative_expr();
        let p_z = p.derivative_expr();
        let h_z = h.wirtinger_expr();
        let planar = l
            .eval(base_point)
            .and_then(|lv| p.eval(base_point).map(|pv| lv + pv.conj()))
            .map_err(DataError::BasePointEvaluation)?;
        let height = h.eval(base_point).map_err(DataError::BasePointEvaluation)?;
        Ok(EnneperData {
            l,
            p,
            h,
            domain,
            base_point,
            base_value: (planar, height),
            l_z,
            p_z,
            h_z,
        })
    }

    pub fn l(&self) -> &HoloFn {
        &self.l
    }

    pub fn p(&self) -> &HoloFn {
        &self.p
    }

    pub fn h(&self) -> &HarmonicField {
        &self.h
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    /// `X(z₀) = (L(z₀) + conj(P(z₀)), h(z₀))`.
    pub fn base_value(&self) -> (Complex64, f64) {
        self.base_value
    }

    pub fn l_deriv(&self) -> &CExpr {
        &self.l_z
    }

    pub fn p_deriv(&self) -> &CExpr {
        &self.p_z
    }

    /// The Wirtinger derivative of the height, `h_z`.
    pub fn h_wirtinger(&self) -> &CExpr {
        &self.h_z
    }

    /// `X(z) = (L(z) + conj(P(z)), h(z))`.
    pub fn eval_point(&self, z: Complex64) -> Result<(Complex64, f64), EvalError> {
        let planar = self.l.eval(z)? + self.p.eval(z)?.conj();
        let height = self.h.eval(z)?;
        Ok((planar, height))
    }

    /// `X(z)` as a 3-vector.
    pub fn eval_xyz(&self, z: Complex64) -> Result<[f64; 3], EvalError> {
        let (planar, height) = self.eval_point(z)?;
        Ok([planar.re, planar.im, height])
    }

    /// Hopf differential `L' P' + (h_z)^2` as an expression.
    pub fn hopf_expr(&self) -> CExpr {
        add(
            mul(self.l_z.clone(), self.p_z.clone()),
            pow(self.h_z.clone(), 2),
        )
    }

    /// Hopf differential as a holomorphic function.
    pub fn hopf(&self) -> HoloFn {
        let mut f = HoloFn::from_expr(self.hopf_expr());
        let origin_pole = self.l.singularities().origin_pole
            || self.p.singularities().origin_pole
            || self.h.log_coeff() != 0.0;
        if origin_pole {
            f = f.with_singularities(Singularities {
                points: Vec::new(),
                origin_pole: true,
            });
        }
        f
    }

    /// The Weierstrass triple `φ₁ = (L'+P')/2`, `φ₂ = i(P'-L')/2`,
    /// `φ₃ = h_z`, with the same domain and base data.
    pub fn to_weierstrass(&self) -> WeierstrassData {
        let half = constant(Complex64::new(0.5, 0.0));
        let half_i = constant(Complex64::new(0.0, 0.5));
        let phi1 = mul(half, add(self.l_z.clone(), self.p_z.clone()));
        let phi2 = mul(half_i, sub(self.p_z.clone(), self.l_z.clone()));
        let phi3 = self.h_z.clone();
        let sing = Singularities {
            points: Vec::new(),
            origin_pole: self.l.singularities().origin_pole
                || self.p.singularities().origin_pole
                || self.h.log_coeff() != 0.0,
        };
        let phi = [
            HoloFn::from_expr(phi1).with_singularities(sing.clone()),
            HoloFn::from_expr(phi2).with_singularities(sing.clone()),
            HoloFn::from_expr(phi3).with_singularities(sing),
        ];
        let (planar, height) = self.base_value;
        WeierstrassData::new_unchecked(
            phi,
            self.domain,
            self.base_point,
            [planar.re, planar.im, height],
        )
    }

    /// Scales the defining derivatives by the holomorphic factor `f`:
    /// the new surface has data `(f L', f P', f h_z)` integrated from the
    /// base point, with the stated height there.
    ///
    /// On an annulus the residues of the scaled derivatives are measured on
    /// the core loop. A nonzero planar period is an obstruction (the planar
    /// part would be multivalued); a height period is reported and the
    /// height keeps a principal-branch log term, valid on the slit annulus.
    pub fn scale(&self, factor: &HoloFn, height_at_base: f64) -> Result<ScaleOutcome, ScaleError> {
        let f_expr = factor
            .as_expr()
            .ok_or(ScaleError::UnsupportedFactor)?
            .clone();
        // nonvanishing check over a coarse deterministic grid
        let probe = mesh::sample_grid(&self.domain, 16, 16).map_err(|_| ScaleError::BadDomain)?;
        for &z in &probe {
            if let Ok(v) = f_expr.eval(z) {
                if v.norm() < FACTOR_VANISH_TOL {
                    return Err(ScaleError::FactorVanishes { at: z });
                }
            }
        }

        let l1_deriv = mul(f_expr.clone(), self.l_z.clone());
        let p1_deriv = mul(f_expr.clone(), self.p_z.clone());
        let psi = mul(f_expr, self.h_z.clone());

        let (rho_l, rho_p, rho_psi) = match self.domain.core_loop() {
            Some(loop_path) => {
                let rl = residue_at_origin(&l1_deriv, &loop_path)?;
                let rp = residue_at_origin(&p1_deriv, &loop_path)?;
                let rpsi = residue_at_origin(&psi, &loop_path)?;
                (snap(rl), snap(rp), snap(rpsi))
            }
            None => (Complex64::ZERO, Complex64::ZERO, Complex64::ZERO),
        };

        let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
        let planar_period = two_pi_i * (rho_l - rho_p.conj());
        if planar_period.norm() > PERIOD_TOL {
            return Err(ScaleError::PlanarPeriodObstruction {
                period: planar_period,
            });
        }
        // height increment around the loop: 2 Re ∮ ψ = -4π Im ρ_ψ
        let height_period = -2.0 * std::f64::consts::TAU * rho_psi.im;
        let slit_domain = height_period.abs() > PERIOD_TOL;

        let route = self.domain.route();
        let z0 = self.base_point;
        let l1 = HoloFn::antiderivative_with_residue(&l1_deriv, rho_l, z0, Complex64::ZERO, route)?;
        let p1 = HoloFn::antiderivative_with_residue(&p1_deriv, rho_p, z0, Complex64::ZERO, route)?;

        // height: h₁ = Re F₁ + β₁ ln|z| with β₁ = 2 Re ρ_ψ and
        // F₁' = 2ψ - β₁/z carrying the imaginary residue into a log term
        let beta1 = 2.0 * rho_psi.re;
        let mut f1_deriv = mul(constant(Complex64::new(2.0, 0.0)), psi);
        if beta1 != 0.0 {
            f1_deriv = sub(
                f1_deriv,
                mul(constant(Complex64::new(beta1, 0.0)), pow(var(), -1)),
            );
        }
        let f1_residue = Complex64::new(0.0, 2.0 * rho_psi.im);
        let f1_base = Complex64::new(
            height_at_base
                - if beta1 != 0.0 {
                    beta1 * z0.norm().ln()
                } else {
                    0.0
                },
            0.0,
        );
        let f1 = HoloFn::antiderivative_with_residue(&f1_deriv, f1_residue, z0, f1_base, route)?;
        let h1 = HarmonicField::new(f1, beta1);

        let data = EnneperData::new(l1, p1, h1, self.domain, z0)?;
        Ok(ScaleOutcome {
            data,
            periods: PeriodReport {
                planar_period,
                height_period,
                slit_domain,
            },
        })
    }

    /// The conjugate surface: data scaled by the constant `i`, keeping the
    /// height value at the base point.
    pub fn conjugate(&self) -> Result<ScaleOutcome, ScaleError> {
        let height_at_base = self.base_value.1;
        self.scale(
            &HoloFn::constant(Complex64::new(0.0, 1.0)),
            height_at_base,
        )
    }
}

fn snap(rho: Complex64) -> Complex64 {
    Complex64::new(
        if rho.re.abs() < RESIDUE_TOL { 0.0 } else { rho.re },
        if rho.im.abs() < RESIDUE_TOL { 0.0 } else { rho.im },
    )
}

/// Result of scaling Enneper data.
#[derive(Debug, Clone)]
pub struct ScaleOutcome {
    pub data: EnneperData,
    pub periods: PeriodReport,
}

/// Loop periods observed while scaling data on an annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodReport {
    /// Increment of the planar part around the core loop (an obstruction
    /// when nonzero; reported as an error instead).
    pub planar_period: Complex64,
    /// Increment of the height around the core loop.
    pub height_period: f64,
    /// True when the height keeps a principal-branch log term and the data
    /// is valid on the annulus slit along the negative real axis.
    pub slit_domain: bool,
}

impl PeriodReport {
    pub fn clean() -> Self {
        PeriodReport {
            planar_period: Complex64::ZERO,
            height_period: 0.0,
            slit_domain: false,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum ScaleError {
    #[error("scaling factor must be expression-backed")]
    UnsupportedFactor,
    #[error("scaling factor vanishes at {at}")]
    FactorVanishes { at: Complex64 },
    #[error("planar period obstruction: the scaled planar part would change by {period} around the annulus")]
    PlanarPeriodObstruction { period: Complex64 },
    #[error("period integral failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("antiderivative evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid domain")]
    BadDomain,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// A validated harmonic immersion with its cached Weierstrass triple and
/// validation report.
#[derive(Debug, Clone)]
pub struct HarmonicImmersion {
    data: EnneperData,
    weierstrass: WeierstrassData,
    report: ValidationReport,
}

#[derive(Debug, Clone, Error)]
pub enum BuildError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{which} fails the holomorphy check: residual {residual:e} at {at}")]
    NotHolomorphic {
        which: &'static str,
        residual: f64,
        at: Complex64,
    },
    #[error("surface degenerates at z = {0}: the immersion margin is not positive there")]
    DegenerateAt(Complex64),
    #[error("evaluation failed at {count} sample points (first at {first})")]
    EvaluationFailed { count: usize, first: Complex64 },
    #[error("invalid sample counts")]
    BadSampling,
}

/// Validates data on a `nu x nv` sample grid and wraps it as an immersion.
///
/// The sharp criterion `|hopf| < ‖Φ‖²` decides degeneracy. Sample points
/// where `|L'| = |P'|` are recorded in the report but do not reject the
/// surface: the modulus gap is sufficient, not necessary, and rotational
/// surfaces routinely cross it while staying immersed.
pub fn build(
    l: HoloFn,
    p: HoloFn,
    h: HarmonicField,
    domain: Domain,
    base_point: Complex64,
    nu: usize,
    nv: usize,
) -> Result<HarmonicImmersion, BuildError> {
    let data = EnneperData::new(l, p, h, domain, base_point)?;
    validate_and_wrap(data, nu, nv)
}

/// `build` for data that already exists.
pub fn validate_and_wrap(
    data: EnneperData,
    nu: usize,
    nv: usize,
) -> Result<HarmonicImmersion, BuildError> {
    let samples = mesh::sample_grid(data.domain(), nu, nv).map_err(|_| BuildError::BadSampling)?;
    let report = geometry::validate(&data, &samples);
    if let Some(&(which, residual, at)) = report.holo_failures.first() {
        return Err(BuildError::NotHolomorphic {
            which,
            residual,
            at,
        });
    }
    if let Some(&z) = report.degenerate.first() {
        return Err(BuildError::DegenerateAt(z));
    }
    if report.skipped > 0 {
        return Err(BuildError::EvaluationFailed {
            count: report.skipped,
            first: report.first_skipped.unwrap_or(Complex64::ZERO),
        });
    }
    let weierstrass = data.to_weierstrass();
    Ok(HarmonicImmersion {
        data,
        weierstrass,
        report,
    })
}

impl HarmonicImmersion {
    pub fn data(&self) -> &EnneperData {
        &self.data
    }

    pub fn weierstrass(&self) -> &WeierstrassData {
        &self.weierstrass
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn eval_point(&self, z: Complex64) -> Result<(Complex64, f64), EvalError> {
        self.data.eval_point(z)
    }

    pub fn hopf(&self) -> HoloFn {
        self.data.hopf()
    }
}

/// Band test for the sufficient condition `|L'| != |P'|`.
pub(crate) fn equal_modulus(lp: Complex64, pp: Complex64) -> bool {
    let (a, b) = (lp.norm(), pp.norm());
    (a - b).abs() <= EQUAL_MODULUS_BAND * a.max(b).max(1.0)
}

/// Shared degeneracy test: margin at or below the relative tolerance.
pub(crate) fn is_degenerate(margin: f64, phi_norm_sq: f64) -> bool {
    margin <= DEGENERACY_REL_TOL * phi_norm_sq.max(f64::MIN_POSITIVE)
}
