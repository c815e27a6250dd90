//! Grid sampling, triangle tessellation, and OBJ output.
//!
//! Output is deterministic: identical inputs produce byte-identical files.

use crate::cexpr::EvalError;
use crate::enneper::{is_degenerate, EnneperData};
use crate::geometry::{cross, gauss_of_normal, norm3};
use crate::hfield::{Domain, HALF_PLANE_WINDOW};
use num_complex::Complex64;
use thiserror::Error;

/// Relative inset that keeps disk and half-plane samples off the singular
/// edge of their parameter range.
const EDGE_OFFSET: f64 = 1e-6;
/// Hard failure threshold: more than this fraction of skipped cells.
const MAX_SKIPPED_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Error)]
pub enum MeshError {
    #[error("grid needs nu >= 2 and nv >= 2, got {nu} x {nv}")]
    BadCounts { nu: usize, nv: usize },
    #[error("invalid domain: {0}")]
    Domain(#[from] crate::hfield::DomainError),
    #[error("{skipped} of {cells} cells degenerate or failed to evaluate (more than half)")]
    TooManySkipped { skipped: usize, cells: usize },
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Grid samples of a domain in row-major order (`index = iv * nu + iu`).
///
/// Rectangles are sampled uniformly. Annuli use `z = exp(ρ + iθ)` with `ρ`
/// uniform in `[ln r₁, ln r₂]` and `θ` uniform in `[0, 2π]`, seam
/// duplicated. Disks use polar samples with the radius offset away from the
/// center; half-planes use the finite window `x ∈ (c, c+2]`, `y ∈ [-1, 1]`.
pub fn sample_grid(domain: &Domain, nu: usize, nv: usize) -> Result<Vec<Complex64>, MeshError> {
    if nu < 2 || nv < 2 {
        return Err(MeshError::BadCounts { nu, nv });
    }
    domain.validate()?;
    let mut pts = Vec::with_capacity(nu * nv);
    match *domain {
        Domain::Rectangle { x0, x1, y0, y1 } => {
            for iv in 0..nv {
                let y = y0 + (y1 - y0) * (iv as f64) / ((nv - 1) as f64);
                for iu in 0..nu {
                    let x = x0 + (x1 - x0) * (iu as f64) / ((nu - 1) as f64);
                    pts.push(Complex64::new(x, y));
                }
            }
        }
        Domain::Annulus { r1, r2 } => {
            let lr1 = r1.ln();
            let lr2 = r2.ln();
            for iv in 0..nv {
                let theta = std::f64::consts::TAU * (iv as f64) / ((nv - 1) as f64);
                for iu in 0..nu {
                    let rho = lr1 + (lr2 - lr1) * (iu as f64) / ((nu - 1) as f64);
                    pts.push(Complex64::from_polar(rho.exp(), theta));
                }
            }
        }
        Domain::Disk { center, radius } => {
            let r_min = EDGE_OFFSET * radius;
            for iv in 0..nv {
                let theta = std::f64::consts::TAU * (iv as f64) / ((nv - 1) as f64);
                for iu in 0..nu {
                    let r = r_min + (radius - r_min) * (iu as f64) / ((nu - 1) as f64);
                    pts.push(center + Complex64::from_polar(r, theta));
                }
            }
        }
        Domain::HalfPlane { c } => {
            let w = HALF_PLANE_WINDOW;
            let x_min = c + EDGE_OFFSET * w;
            for iv in 0..nv {
                let y = -w / 2.0 + w * (iv as f64) / ((nv - 1) as f64);
                for iu in 0..nu {
                    let x = x_min + (c + w - x_min) * (iu as f64) / ((nu - 1) as f64);
                    pts.push(Complex64::new(x, y));
                }
            }
        }
    }
    Ok(pts)
}

/// Triangle mesh with per-vertex normals and domain coordinates as UVs.
/// Faces index vertices 0-based; vertices at skipped cells stay in the
/// arrays (keeping the grid layout) but are never referenced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub uvs: Vec<[f64; 2]>,
    pub faces: Vec<[u32; 3]>,
    pub skipped_cells: usize,
}

/// Evaluates the surface over a grid from [`sample_grid`] and builds two
/// triangles per quad cell. Cells touching a degenerate or unevaluable
/// sample are skipped and counted; more than half skipped is a hard
/// failure.
pub fn tessellate(
    data: &EnneperData,
    grid: &[Complex64],
    nu: usize,
    nv: usize,
) -> Result<TriangleMesh, MeshError> {
    if nu < 2 || nv < 2 || grid.len() != nu * nv {
        return Err(MeshError::BadCounts { nu, nv });
    }

    struct VertexSample {
        position: [f64; 3],
        normal: [f64; 3],
        good: bool,
    }

    let samples: Vec<VertexSample> = grid
        .iter()
        .map(|&z| match vertex_at(data, z) {
            Ok(Some((position, normal))) => VertexSample {
                position,
                normal,
                good: true,
            },
            _ => VertexSample {
                position: [0.0; 3],
                normal: [0.0, 0.0, 1.0],
                good: false,
            },
        })
        .collect();

    let mut mesh = TriangleMesh {
        vertices: samples.iter().map(|s| s.position).collect(),
        normals: samples.iter().map(|s| s.normal).collect(),
        uvs: grid.iter().map(|z| [z.re, z.im]).collect(),
        faces: Vec::with_capacity(2 * (nu - 1) * (nv - 1)),
        skipped_cells: 0,
    };

    let cells = (nu - 1) * (nv - 1);
    for iv in 0..nv - 1 {
        for iu in 0..nu - 1 {
            let k00 = iv * nu + iu;
            let k10 = k00 + 1;
            let k01 = k00 + nu;
            let k11 = k01 + 1;
            if [k00, k10, k01, k11].iter().any(|&k| !samples[k].good) {
                mesh.skipped_cells += 1;
                continue;
            }
            mesh.faces.push([k00 as u32, k10 as u32, k11 as u32]);
            mesh.faces.push([k00 as u32, k11 as u32, k01 as u32]);
        }
    }

    if (mesh.skipped_cells as f64) > MAX_SKIPPED_FRACTION * (cells as f64) {
        return Err(MeshError::TooManySkipped {
            skipped: mesh.skipped_cells,
            cells,
        });
    }
    Ok(mesh)
}

fn vertex_at(
    data: &EnneperData,
    z: Complex64,
) -> Result<Option<([f64; 3], [f64; 3])>, EvalError> {
    let lp = data.l_deriv().eval(z)?;
    let pp = data.p_deriv().eval(z)?;
    let hz = data.h_wirtinger().eval(z)?;
    let i = Complex64::new(0.0, 1.0);
    let f_x = lp + pp.conj();
    let f_y = i * lp - i * pp.conj();
    let x_u = [f_x.re, f_x.im, 2.0 * hz.re];
    let x_v = [f_y.re, f_y.im, -2.0 * hz.im];
    let phi1 = 0.5 * (lp + pp);
    let phi2 = 0.5 * i * (pp - lp);
    let phi_norm_sq = phi1.norm_sqr() + phi2.norm_sqr() + hz.norm_sqr();
    let hopf = lp * pp + hz * hz;
    let margin = phi_norm_sq - hopf.norm();
    if is_degenerate(margin, phi_norm_sq) {
        return Ok(None);
    }
    let c = cross(x_u, x_v);
    let n = norm3(c);
    if n == 0.0 {
        return Ok(None);
    }
    let gauss = gauss_of_normal([c[0] / n, c[1] / n, c[2] / n]);
    let position = data.eval_xyz(z)?;
    Ok(Some((position, gauss.normal)))
}

/// Writes the mesh as OBJ text and returns the byte count. The layout is
/// fixed: a `# enneper-forge` comment, `v` lines, `vn` lines, `vt` lines,
/// then `f a/a/a b/b/b c/c/c` lines with 1-based indices. Floating-point
/// fields carry 17 significant digits, so identical meshes serialize to
/// identical bytes.
pub fn write_obj<W: std::io::Write>(mesh: &TriangleMesh, sink: &mut W) -> Result<usize, MeshError> {
    let mut bytes = 0usize;
    let mut put = |w: &mut W, line: String| -> Result<usize, MeshError> {
        w.write_all(line.as_bytes())?;
        Ok(line.len())
    };
    bytes += put(sink, "# enneper-forge\n".to_string())?;
    for v in &mesh.vertices {
        bytes += put(sink, format!("v {:.16e} {:.16e} {:.16e}\n", v[0], v[1], v[2]))?;
    }
    for n in &mesh.normals {
        bytes += put(sink, format!("vn {:.16e} {:.16e} {:.16e}\n", n[0], n[1], n[2]))?;
    }
    for uv in &mesh.uvs {
        bytes += put(sink, format!("vt {:.16e} {:.16e}\n", uv[0], uv[1]))?;
    }
    for f in &mesh.faces {
        let (a, b, c) = (f[0] + 1, f[1] + 1, f[2] + 1);
        bytes += put(sink, format!("f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}\n"))?;
    }
    Ok(bytes)
}
