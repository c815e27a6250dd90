//! Pointwise differential geometry of an Enneper-type surface: tangent
//! frame, first fundamental form, Gauss map with stereographic projection,
//! dilatations, immersion margin, and the finite-difference oracles that
//! certify the closed forms.
//!
//! One bookkeeping rule removes every convention ambiguity: `‖Φ‖²` is always
//! `|φ₁|² + |φ₂|² + |φ₃|²` computed from the Weierstrass triple
//! `((L'+P')/2, i(P'-L')/2, h_z)`, never from ad-hoc component sums. With
//! that rule `‖X_x × X_y‖² = 4(‖Φ‖⁴ − |hopf|²)` holds identically.

use crate::cexpr::EvalError;
use crate::enneper::{equal_modulus, is_degenerate, EnneperData};
use num_complex::Complex64;
use thiserror::Error;

/// Margin at or below `DEGENERACY_REL_TOL * ‖Φ‖²` counts as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-12;
/// Holomorphy residual threshold for validation.
pub const HOLO_RESIDUAL_TOL: f64 = 1e-6;
/// Stereographic projection is undefined within this distance of the north
/// pole.
pub const NORTH_POLE_TOL: f64 = 1e-12;

/// Everything the closed-form frame knows about one surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub z: Complex64,
    pub position: [f64; 3],
    /// ∂X/∂x
    pub x_u: [f64; 3],
    /// ∂X/∂y
    pub x_v: [f64; 3],
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub normal: [f64; 3],
    pub hopf: Complex64,
    pub phi_norm_sq: f64,
    /// `‖Φ‖² − |hopf|`; positive exactly at immersed points.
    pub margin: f64,
    /// `(E + G) / (2 ‖X_x × X_y‖)`; at least 1, equal to 1 at conformal
    /// points, infinite where the point degenerates.
    pub dilatation: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FrameError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate point at z = {0}")]
    Degenerate(Complex64),
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

struct RawFrame {
    position: [f64; 3],
    x_u: [f64; 3],
    x_v: [f64; 3],
    e: f64,
    f: f64,
    g: f64,
    cross: [f64; 3],
    cross_norm: f64,
    hopf: Complex64,
    phi_norm_sq: f64,
    margin: f64,
    lp: Complex64,
    pp: Complex64,
}

fn raw_frame(data: &EnneperData, z: Complex64) -> Result<RawFrame, EvalError> {
    let lp = data.l_deriv().eval(z)?;
    let pp = data.p_deriv().eval(z)?;
    let hz = data.h_wirtinger().eval(z)?;
    let i = Complex64::new(0.0, 1.0);

    // planar part f = L + conj(P): f_x = L' + conj(P'), f_y = i L' - i conj(P')
    let f_x = lp + pp.conj();
    let f_y = i * lp - i * pp.conj();
    // height: h_x - i h_y = 2 h_z
    let h_x = 2.0 * hz.re;
    let h_y = -2.0 * hz.im;
    let x_u = [f_x.re, f_x.im, h_x];
    let x_v = [f_y.re, f_y.im, h_y];

    let e = dot(x_u, x_u);
    let f = dot(x_u, x_v);
    let g = dot(x_v, x_v);
    let cr = cross(x_u, x_v);
    let cross_norm = norm3(cr);

    let phi1 = 0.5 * (lp + pp);
    let phi2 = 0.5 * i * (pp - lp);
    let phi3 = hz;
    let phi_norm_sq = phi1.norm_sqr() + phi2.norm_sqr() + phi3.norm_sqr();
    let hopf = lp * pp + hz * hz;
    let margin = phi_norm_sq - hopf.norm();

    let position = data.eval_xyz(z)?;
    Ok(RawFrame {
        position,
        x_u,
        x_v,
        e,
        f,
        g,
        cross: cr,
        cross_norm,
        hopf,
        phi_norm_sq,
        margin,
        lp,
        pp,
    })
}

/// Closed-form frame at an immersed point.
pub fn frame(data: &EnneperData, z: Complex64) -> Result<FrameSample, FrameError> {
    let raw = raw_frame(data, z)?;
    if is_degenerate(raw.margin, raw.phi_norm_sq) || raw.cross_norm == 0.0 {
        return Err(FrameError::Degenerate(z));
    }
    let inv = 1.0 / raw.cross_norm;
    Ok(FrameSample {
        z,
        position: raw.position,
        x_u: raw.x_u,
        x_v: raw.x_v,
        e: raw.e,
        f: raw.f,
        g: raw.g,
        normal: [raw.cross[0] * inv, raw.cross[1] * inv, raw.cross[2] * inv],
        hopf: raw.hopf,
        phi_norm_sq: raw.phi_norm_sq,
        margin: raw.margin,
        dilatation: (raw.e + raw.g) / (2.0 * raw.cross_norm),
    })
}

/// Unit normal with its stereographic image `ξ(n) = (n₁, n₂)/(1 − n₃)`,
/// read as a complex number; the image is absent at the north pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPoint {
    pub normal: [f64; 3],
    pub stereographic: Option<Complex64>,
}

pub fn gauss_map(data: &EnneperData, z: Complex64) -> Result<GaussPoint, FrameError> {
    let fr = frame(data, z)?;
    Ok(gauss_of_normal(fr.normal))
}

pub(crate) fn gauss_of_normal(normal: [f64; 3]) -> GaussPoint {
    let stereographic = if (1.0 - normal[2]).abs() <= NORTH_POLE_TOL {
        None
    } else {
        Some(Complex64::new(
            normal[0] / (1.0 - normal[2]),
            normal[1] / (1.0 - normal[2]),
        ))
    };
    GaussPoint {
        normal,
        stereographic,
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DilatationError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("L' vanishes at {0}: the second dilatation has a pole there")]
    Pole(Complex64),
}

/// Second complex dilatation `ω = P'/L'` of the planar part `L + conj(P)`;
/// `|ω| < 1` iff the planar part is orientation-preserving quasiconformal
/// at the point.
pub fn second_dilatation(data: &EnneperData, z: Complex64) -> Result<Complex64, DilatationError> {
    let lp = data.l_deriv().eval(z)?;
    let pp = data.p_deriv().eval(z)?;
    if lp == Complex64::ZERO {
        return Err(DilatationError::Pole(z));
    }
    Ok(pp / lp)
}

/// `‖Φ(z)‖² − |hopf(z)|`; positive exactly when the surface is immersed
/// at `z`.
pub fn immersion_margin(data: &EnneperData, z: Complex64) -> Result<f64, EvalError> {
    Ok(raw_frame(data, z)?.margin)
}

/// `|hopf| / ‖Φ‖²` at one point; a totally degenerate point (`‖Φ‖² = 0`)
/// reports 1.
pub fn qc_ratio(data: &EnneperData, z: Complex64) -> Result<f64, EvalError> {
    let raw = raw_frame(data, z)?;
    if raw.phi_norm_sq == 0.0 {
        return Ok(1.0);
    }
    Ok(raw.hopf.norm() / raw.phi_norm_sq)
}

/// Supremum of `|hopf| / ‖Φ‖²` over the samples; strictly below 1 iff the
/// immersion is quasiconformal on the sampled set.
pub fn qc_ratio_sup(data: &EnneperData, samples: &[Complex64]) -> Result<f64, EvalError> {
    let mut sup = 0.0f64;
    for &z in samples {
        sup = sup.max(qc_ratio(data, z)?);
    }
    Ok(sup)
}

/// Supremum of the dilatation `D_X` over the samples.
pub fn dilatation_sup(data: &EnneperData, samples: &[Complex64]) -> Result<f64, EvalError> {
    let mut sup = 1.0f64;
    for &z in samples {
        let raw = raw_frame(data, z)?;
        if raw.cross_norm > 0.0 {
            sup = sup.max((raw.e + raw.g) / (2.0 * raw.cross_norm));
        } else {
            sup = f64::INFINITY;
        }
    }
    Ok(sup)
}

/// Central-difference partials and per-coordinate Laplacian residuals of the
/// parametrization; the verification harness behind every closed-form
/// identity.
#[derive(Debug, Clone, Copy)]
pub struct FdOracle {
    pub x_u: [f64; 3],
    pub x_v: [f64; 3],
    pub laplacians: [f64; 3],
}

pub fn fd_oracle(data: &EnneperData, z: Complex64, step: f64) -> Result<FdOracle, EvalError> {
    let ex = Complex64::new(step, 0.0);
    let ey = Complex64::new(0.0, step);
    let xp = data.eval_xyz(z + ex)?;
    let xm = data.eval_xyz(z - ex)?;
    let yp = data.eval_xyz(z + ey)?;
    let ym = data.eval_xyz(z - ey)?;
    let x0 = data.eval_xyz(z)?;
    let mut x_u = [0.0; 3];
    let mut x_v = [0.0; 3];
    let mut laplacians = [0.0; 3];
    for j in 0..3 {
        x_u[j] = (xp[j] - xm[j]) / (2.0 * step);
        x_v[j] = (yp[j] - ym[j]) / (2.0 * step);
        laplacians[j] =
            ((xp[j] + xm[j] + yp[j] + ym[j] - 4.0 * x0[j]) / (step * step)).abs();
    }
    Ok(FdOracle {
        x_u,
        x_v,
        laplacians,
    })
}

/// One record of the validation report; the tab-separated serialization
/// carries exactly these fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub z: Complex64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub margin: f64,
    pub qc_ratio: f64,
    pub dilatation: f64,
}

/// Grid validation summary for a surface or a Weierstrass triple.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub rows: Vec<ReportRow>,
    pub min_margin: f64,
    pub min_margin_at: Complex64,
    pub max_holo_residual: f64,
    /// Entries `(function, residual, sample)` exceeding the holomorphy
    /// threshold.
    pub holo_failures: Vec<(&'static str, f64, Complex64)>,
    pub sup_qc_ratio: f64,
    pub sup_dilatation: f64,
    /// Samples where the margin fails the degeneracy tolerance.
    pub degenerate: Vec<Complex64>,
    /// Samples where `|L'| = |P'|` within the reporting band. Informational:
    /// the modulus gap is sufficient for immersion, not necessary.
    pub equal_modulus_sites: Vec<Complex64>,
    pub skipped: usize,
    pub first_skipped: Option<Complex64>,
    pub pass: bool,
}

impl ValidationReport {
    /// Writes the report as tab-separated records, one line per sample:
    /// `re(z) im(z) E F G margin qc_ratio D_X` with a '#'-prefixed header.
    /// Returns the number of bytes written.
    pub fn write_tsv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<usize> {
        let mut bytes = 0;
        let header = "# re(z)\tim(z)\tE\tF\tG\tmargin\tqc_ratio\tD_X\n";
        w.write_all(header.as_bytes())?;
        bytes += header.len();
        for row in &self.rows {
            let line = format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                row.z.re, row.z.im, row.e, row.f, row.g, row.margin, row.qc_ratio, row.dilatation
            );
            w.write_all(line.as_bytes())?;
            bytes += line.len();
        }
        Ok(bytes)
    }
}

/// Validates the surface over the samples: margins, dilatations, holomorphy
/// of the defining functions, and the `|L'| = |P'|` report.
pub fn validate(data: &EnneperData, samples: &[Complex64]) -> ValidationReport {
    let mut rows = Vec::with_capacity(samples.len());
    let mut min_margin = f64::INFINITY;
    let mut min_margin_at = data.base_point();
    let mut sup_qc: f64 = 0.0;
    let mut sup_dx: f64 = 1.0;
    let mut degenerate = Vec::new();
    let mut equal_modulus_sites = Vec::new();
    let mut skipped = 0;
    let mut first_skipped = None;

    for &z in samples {
        let raw = match raw_frame(data, z) {
            Ok(r) => r,
            Err(_) => {
                skipped += 1;
                first_skipped.get_or_insert(z);
                continue;
            }
        };
        let ratio = if raw.phi_norm_sq == 0.0 {
            1.0
        } else {
            raw.hopf.norm() / raw.phi_norm_sq
        };
        let dx = if raw.cross_norm > 0.0 {
            (raw.e + raw.g) / (2.0 * raw.cross_norm)
        } else {
            f64::INFINITY
        };
        rows.push(ReportRow {
            z,
            e: raw.e,
            f: raw.f,
            g: raw.g,
            margin: raw.margin,
            qc_ratio: ratio,
            dilatation: dx,
        });
        if raw.margin < min_margin {
            min_margin = raw.margin;
            min_margin_at = z;
        }
        sup_qc = sup_qc.max(ratio);
        sup_dx = sup_dx.max(dx);
        if is_degenerate(raw.margin, raw.phi_norm_sq) {
            degenerate.push(z);
        }
        if equal_modulus(raw.lp, raw.pp) {
            equal_modulus_sites.push(z);
        }
    }

    // holomorphy of L, P and the holomorphic part of h at a deterministic
    // subset of samples away from declared singularities
    let step = crate::hfield::FD_STEP_FIRST;
    let mut max_holo_residual = 0.0f64;
    let mut holo_failures = Vec::new();
    for (name, fun) in [("L", data.l()), ("P", data.p()), ("h", data.h().holo())] {
        let stride = (samples.len() / 32).max(1);
        for &z in samples.iter().step_by(stride) {
            if fun.singularities().distance_to(z) <= 10.0 * step {
                continue;
            }
            match fun.holomorphy_residual(&[z], step) {
                Ok(res) => {
                    max_holo_residual = max_holo_residual.max(res);
                    if res > HOLO_RESIDUAL_TOL {
                        holo_failures.push((name, res, z));
                    }
                }
                Err(_) => {
                    skipped += 1;
                    first_skipped.get_or_insert(z);
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
        equal_modulus_sites,
        skipped,
        first_skipped,
        pass,
    }
}
