//! The Weierstrass side of the representation: holomorphic triples
//! `Φ = (φ₁, φ₂, φ₃)`, reconstruction `X = X₀ + 2 Re ∫ Φ dz`, loop periods
//! on annuli, and decomposition of a triple back into surface data
//! `L' = φ₁ + iφ₂`, `P' = φ₁ − iφ₂`, `h_z = φ₃`.

use crate::cexpr::{add, constant, mul, pow, sub, var, CExpr, EvalError, HoloFn, Route};
use crate::enneper::{DataError, EnneperData, PERIOD_TOL};
use crate::geometry::{gauss_of_normal, ReportRow, ValidationReport, HOLO_RESIDUAL_TOL};
use crate::hfield::{Domain, HarmonicField};
use crate::quad::{integrate_path_fn, residue_at_origin, QuadError};
use num_complex::Complex64;
use thiserror::Error;

const RESIDUE_TOL: f64 = 1e-10;

/// Which component of the triple an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiComponent {
    Phi1,
    Phi2,
    Phi3,
}

impl std::fmt::Display for PhiComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhiComponent::Phi1 => write!(f, "phi1"),
            PhiComponent::Phi2 => write!(f, "phi2"),
            PhiComponent::Phi3 => write!(f, "phi3"),
        }
    }
}

/// A holomorphic triple with its domain, base point, and base value.
#[derive(Debug, Clone)]
pub struct WeierstrassData {
    phi: [HoloFn; 3],
    domain: Domain,
    base_point: Complex64,
    base_value: [f64; 3],
}

#[derive(Debug, Clone, Error)]
pub enum DecomposeError {
    #[error("period obstruction on {component}: loop integral {period} would make the surface multivalued")]
    PeriodObstruction {
        component: PhiComponent,
        period: Complex64,
    },
    #[error("triple components must be expression-backed")]
    Unsupported,
    #[error("period integral failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Error)]
pub enum ReconstructError {
    #[error("integration failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("point {0} lies outside the domain")]
    OutsideDomain(Complex64),
}

impl WeierstrassData {
    pub fn new(
        phi: [HoloFn; 3],
        domain: Domain,
        base_point: Complex64,
        base_value: [f64; 3],
    ) -> Result<Self, DataError> {
        domain.validate()?;
        if !domain.contains(base_point) {
            return Err(DataError::BasePointOutsideDomain(base_point));
        }
        if domain.contains_origin() && phi.iter().any(|f| f.singularities().origin_pole) {
            return Err(DataError::SingularAtOrigin);
        }
        Ok(Self::new_unchecked(phi, domain, base_point, base_value))
    }

    pub(crate) fn new_unchecked(
        phi: [HoloFn; 3],
        domain: Domain,
        base_point: Complex64,
        base_value: [f64; 3],
    ) -> Self {
        WeierstrassData {
            phi,
            domain,
            base_point,
            base_value,
        }
    }

    pub fn phi(&self) -> &[HoloFn; 3] {
        &self.phi
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    pub fn base_value(&self) -> [f64; 3] {
        self.base_value
    }

    /// `Σ φ_j(z)²`, the Hopf differential of the triple.
    pub fn hopf_at(&self, z: Complex64) -> Result<Complex64, EvalError> {
        let mut sum = Complex64::ZERO;
        for f in &self.phi {
            let v = f.eval(z)?;
            sum += v * v;
        }
        Ok(sum)
    }

    /// `‖Φ(z)‖² = Σ |φ_j(z)|²`.
    pub fn phi_norm_sq_at(&self, z: Complex64) -> Result<f64, EvalError> {
        let mut sum = 0.0;
        for f in &self.phi {
            sum += f.eval(z)?.norm_sqr();
        }
        Ok(sum)
    }

    /// Validation over samples: immersion margin `‖Φ‖² − |Σφ²|`, holomorphy
    /// residuals, and the derived first fundamental form.
    pub fn validate(&self, samples: &[Complex64]) -> ValidationReport {
        let mut rows = Vec::with_capacity(samples.len());
        let mut min_margin = f64::INFINITY;
        let mut min_margin_at = self.base_point;
        let mut sup_qc = 0.0f64;
        let mut sup_dx = 1.0f64;
        let mut degenerate = Vec::new();
        let mut skipped = 0;
        let mut first_skipped = None;

        for &z in samples {
            let values: Result<Vec<Complex64>, EvalError> =
                self.phi.iter().map(|f| f.eval(z)).collect();
            let values = match values {
                Ok(v) => v,
                Err(_) => {
                    skipped += 1;
                    first_skipped.get_or_insert(z);
                    continue;
                }
            };
            let hopf: Complex64 = values.iter().map(|v| v * v).sum();
            let phi_norm_sq: f64 = values.iter().map(|v| v.norm_sqr()).sum();
            let margin = phi_norm_sq - hopf.norm();
            // X_x = 2 Re Φ, X_y = -2 Im Φ componentwise
            let x_u: Vec<f64> = values.iter().map(|v| 2.0 * v.re).collect();
            let x_v: Vec<f64> = values.iter().map(|v| -2.0 * v.im).collect();
            let e: f64 = x_u.iter().map(|a| a * a).sum();
            let g: f64 = x_v.iter().map(|a| a * a).sum();
            let f: f64 = x_u.iter().zip(&x_v).map(|(a, b)| a * b).sum();
            let cross_sq = (e * g - f * f).max(0.0);
            let ratio = if phi_norm_sq == 0.0 {
                1.0
            } else {
                hopf.norm() / phi_norm_sq
            };
            let dx = if cross_sq > 0.0 {
                (e + g) / (2.0 * cross_sq.sqrt())
            } else {
                f64::INFINITY
            };
            rows.push(ReportRow {
                z,
                e,
                f,
                g,
                margin,
                qc_ratio: ratio,
                dilatation: dx,
            });
            if margin < min_margin {
                min_margin = margin;
                min_margin_at = z;
            }
            sup_qc = sup_qc.max(ratio);
            sup_dx = sup_dx.max(dx);
            if margin <= crate::geometry::DEGENERACY_REL_TOL * phi_norm_sq.max(f64::MIN_POSITIVE) {
                degenerate.push(z);
            }
        }

        let step = crate::hfield::FD_STEP_FIRST;
        let mut max_holo_residual = 0.0f64;
        let mut holo_failures = Vec::new();
        let names = ["phi1", "phi2", "phi3"];
        for (name, fun) in names.iter().zip(&self.phi) {
            let stride = (samples.len() / 32).max(1);
            for &z in samples.iter().step_by(stride) {
                if fun.singularities().distance_to(z) <= 10.0 * step {
                    continue;
                }
                if let Ok(res) = fun.holomorphy_residual(&[z], step) {
                    max_holo_residual = max_holo_residual.max(res);
                    if res > HOLO_RESIDUAL_TOL {
                        holo_failures.push((*name, res, z));
                    }
                }
            }
        }

        let pass = degenerate.is_empty() && holo_failures.is_empty() && skipped == 0;
        ValidationReport {
            rows,
            min_margin,
            min_margin_at,
            max_holo_residual,
            holo_failures,
            sup_qc_ratio: sup_qc,
            sup_dilatation: sup_dx,
            degenerate,
            equal_modulus_sites: Vec::new(),
            skipped,
            first_skipped,
            pass,
        }
    }

    /// `X(z) = X₀ + 2 Re ∫_{z₀}^{z} Φ dz` along the domain route.
    pub fn reconstruct(&self, z: Complex64, tol: f64) -> Result<[f64; 3], ReconstructError> {
        let path = crate::cexpr::route_path(self.domain.route(), self.base_point, z);
        let mut out = self.base_value;
        for (j, f) in self.phi.iter().enumerate() {
            let integral = integrate_path_fn(|w| f.eval(w), &path, tol / 3.0)?;
            out[j] += 2.0 * integral.re;
        }
        Ok(out)
    }

    /// `(∮ φ₁, ∮ φ₂, ∮ φ₃)` along a closed loop.
    pub fn loop_periods(
        &self,
        loop_path: &[Complex64],
        tol: f64,
    ) -> Result<[Complex64; 3], QuadError> {
        let mut out = [Complex64::ZERO; 3];
        for (j, f) in self.phi.iter().enumerate() {
            out[j] = integrate_path_fn(|w| f.eval(w), loop_path, tol)?;
        }
        Ok(out)
    }

    /// Unit normal from the triple at `z`, with the stereographic image.
    pub fn gauss_at(&self, z: Complex64) -> Result<crate::geometry::GaussPoint, EvalError> {
        let values: Result<Vec<Complex64>, EvalError> =
            self.phi.iter().map(|f| f.eval(z)).collect();
        let values = values?;
        let x_u: Vec<f64> = values.iter().map(|v| 2.0 * v.re).collect();
        let x_v: Vec<f64> = values.iter().map(|v| -2.0 * v.im).collect();
        let c = crate::geometry::cross(
            [x_u[0], x_u[1], x_u[2]],
            [x_v[0], x_v[1], x_v[2]],
        );
        let n = crate::geometry::norm3(c);
        Ok(gauss_of_normal([c[0] / n, c[1] / n, c[2] / n]))
    }

    /// Recovers surface data: `L` and `P` by antidifferentiation of
    /// `φ₁ ± iφ₂` from the base point, and the height from `2 Re ∫ φ₃` with
    /// a `z⁻¹` residue routed into the `β ln|z|` term.
    ///
    /// On an annulus every component must have a purely imaginary loop
    /// period (zero real part); otherwise the reconstructed surface would be
    /// multivalued and the obstruction is reported.
    pub fn decompose(&self) -> Result<EnneperData, DecomposeError> {
        let phi_exprs: Vec<&CExpr> = self
            .phi
            .iter()
            .map(|f| f.as_expr().ok_or(DecomposeError::Unsupported))
            .collect::<Result<_, _>>()?;
        let i = constant(Complex64::new(0.0, 1.0));
        let l_deriv = add(phi_exprs[0].clone(), mul(i.clone(), phi_exprs[1].clone()));
        let p_deriv = sub(phi_exprs[0].clone(), mul(i, phi_exprs[1].clone()));

        let (rho_l, rho_p, rho_3) = match self.domain.core_loop() {
            Some(loop_path) => {
                // component loop periods are 2πi times the origin residues;
                // nonzero real part = the surface would be multivalued
                let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
                let components = [PhiComponent::Phi1, PhiComponent::Phi2, PhiComponent::Phi3];
                let mut residues = [Complex64::ZERO; 3];
                for (j, (component, expr)) in components.iter().zip(&phi_exprs).enumerate() {
                    let rho = snap(residue_at_origin(expr, &loop_path)?);
                    let period = two_pi_i * rho;
                    if period.re.abs() > PERIOD_TOL {
                        return Err(DecomposeError::PeriodObstruction {
                            component: *component,
                            period,
                        });
                    }
                    residues[j] = rho;
                }
                let im = Complex64::new(0.0, 1.0);
                (
                    residues[0] + im * residues[1],
                    residues[0] - im * residues[1],
                    residues[2],
                )
            }
            None => (Complex64::ZERO, Complex64::ZERO, Complex64::ZERO),
        };

        let route = self.domain.route();
        let z0 = self.base_point;
        let planar_base = Complex64::new(self.base_value[0], self.base_value[1]);
        let l = HoloFn::antiderivative_with_residue(&l_deriv, rho_l, z0, planar_base, route)?;
        let p = HoloFn::antiderivative_with_residue(&p_deriv, rho_p, z0, Complex64::ZERO, route)?;

        // height: the real residue of φ₃ becomes β/2; its imaginary part is
        // excluded by the period check above
        let beta = 2.0 * rho_3.re;
        let mut f_deriv = mul(constant(Complex64::new(2.0, 0.0)), phi_exprs[2].clone());
        if beta != 0.0 {
            f_deriv = sub(
                f_deriv,
                mul(constant(Complex64::new(beta, 0.0)), pow(var(), -1)),
            );
        }
        let f_base = Complex64::new(
            self.base_value[2]
                - if beta != 0.0 {
                    beta * z0.norm().ln()
                } else {
                    0.0
                },
            0.0,
        );
        let f = HoloFn::antiderivative_with_residue(
            &f_deriv,
            Complex64::ZERO,
            z0,
            f_base,
            route,
        )?;
        let h = HarmonicField::new(f, beta);
        Ok(EnneperData::new(l, p, h, self.domain, z0)?)
    }
}

fn snap(rho: Complex64) -> Complex64 {
    Complex64::new(
        if rho.re.abs() < RESIDUE_TOL { 0.0 } else { rho.re },
        if rho.im.abs() < RESIDUE_TOL { 0.0 } else { rho.im },
    )
}
