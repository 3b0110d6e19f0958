//! The canonical frame along the minimal leaf `Σ = F^{-1}(c)`, the shape
//! operators of the cone link `(1/√2)Σ ⊂ S^{2n+1}(1)`, and the determinant
//! profile `p(t) = inf_ν det(I - t A_ν)` that feeds the Lawlor criterion.
//!
//! Tangent basis order is `(e_1..e_{n-1}, e'_1..e'_{n-1}, T)`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::clifford::CliffordSystem;
use crate::error::{invalid, Error, Result};
use crate::foliation::{
    derivatives_from_jet, sample_minimal_point, FoliationParams, Jet, LevelPoint,
};
use crate::linalg::{complete_orthonormal, concat, dot, scaled};

/// Allowed distance of a frame's base point from the minimal level.
pub const LEVEL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct FrameBundle {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `N_1 / |N_1|` in `R^{n+1}`
    pub e0: Vec<f64>,
    /// `N_2 / |N_2|` in `R^{n+1}`
    pub e0p: Vec<f64>,
    /// `e_1..e_{n-1}`, orthogonal to `x` and `e0`
    pub e: Vec<Vec<f64>>,
    /// `e'_1..e'_{n-1}`, orthogonal to `y` and `e0p`
    pub ep: Vec<Vec<f64>>,
    /// `((e0, 0) - (0, e0p)) / √2`
    pub t: Vec<f64>,
    /// `((e0, 0) + (0, e0p)) / √2`, the unit normal of `Σ` in `S^n × S^n`
    pub normal: Vec<f64>,
    /// `(x, -y) / √2`
    pub nu1: Vec<f64>,
}

impl FrameBundle {
    /// The `2n - 1` tangent vectors of `Σ` in `R^{2n+2}`, in basis order.
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        let zero = vec![0.0; self.x.len()];
        let mut out: Vec<Vec<f64>> = self.e.iter().map(|v| concat(v, &zero)).collect();
        out.extend(self.ep.iter().map(|v| concat(&zero, v)));
        out.push(self.t.clone());
        out
    }

    /// All `2n + 2` frame vectors: `X/√2, ν_1, N, T, e_i, e'_i`.
    pub fn all_vectors(&self) -> Vec<Vec<f64>> {
        let mut out = vec![
            scaled(FRAC_1_SQRT_2, &concat(&self.x, &self.y)),
            self.nu1.clone(),
            self.normal.clone(),
        ];
        out.extend(self.tangent_basis());
        out
    }
}

pub fn build_frame(sys: &CliffordSystem, p: &LevelPoint) -> Result<FrameBundle> {
    let params = FoliationParams::of(sys)?;
    let jet = Jet::new(sys, &p.x, &p.y)?;
    let d = derivatives_from_jet(&jet);
    if d.value <= 0.0 || d.value >= 1.0 || d.tangential_gradient_sq() <= 1e-14 {
        return Err(Error::FocalPoint { level: d.value });
    }
    if (d.value - params.c()).abs() > LEVEL_TOL {
        return Err(invalid(format!(
            "frame base point has level {} but the minimal level is {}",
            d.value,
            params.c()
        )));
    }
    let dim = p.x.len();
    let e0 = scaled(1.0 / dot(&d.n1, &d.n1).sqrt(), &d.n1);
    let e0p = scaled(1.0 / dot(&d.n2, &d.n2).sqrt(), &d.n2);
    let e = complete_orthonormal(&[p.x.clone(), e0.clone()], dim);
    let ep = complete_orthonormal(&[p.y.clone(), e0p.clone()], dim);
    let a = concat(&e0, &vec![0.0; dim]);
    let b = concat(&vec![0.0; dim], &e0p);
    let t = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u - v) * FRAC_1_SQRT_2)
        .collect();
    let normal = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u + v) * FRAC_1_SQRT_2)
        .collect();
    let nu1 = concat(&p.x, &scaled(-1.0, &p.y))
        .iter()
        .map(|v| v * FRAC_1_SQRT_2)
        .collect();
    Ok(FrameBundle {
        x: p.x.clone(),
        y: p.y.clone(),
        e0,
        e0p,
        e,
        ep,
        t,
        normal,
        nu1,
    })
}

/// Shape operators of `(1/√2)Σ ⊂ S^{2n+1}(1)` in the directions `ν_1` and
/// `ν_2 = N`, in the frame's tangent basis. These are `√2` times the
/// operators of `Σ ⊂ S^{2n+1}(√2)`.
#[derive(Clone, Debug)]
pub struct ShapeOperators {
    pub nu1: DMatrix<f64>,
    pub nu2: DMatrix<f64>,
}

impl ShapeOperators {
    /// `A_ν` for `ν = cos β ν_1 + sin β ν_2`.
    pub fn at(&self, beta: f64) -> DMatrix<f64> {
        &self.nu1 * beta.cos() + &self.nu2 * beta.sin()
    }

    /// `|A_ν|^2 = cos²β |A_1|^2 + 2 cos β sin β <A_1, A_2> + sin²β |A_2|^2`.
    pub fn frob_sq(&self, beta: f64) -> f64 {
        let (c, s) = (beta.cos(), beta.sin());
        let (a, b, x) = self.gram();
        c * c * a + 2.0 * c * s * x + s * s * b
    }

    /// `(|A_1|^2, |A_2|^2, <A_1, A_2>)`.
    pub fn gram(&self) -> (f64, f64, f64) {
        (
            self.nu1.norm_squared(),
            self.nu2.norm_squared(),
            self.nu1.dot(&self.nu2),
        )
    }

    pub fn dim(&self) -> usize {
        self.nu1.nrows()
    }
}

/// Assembles both shape operators from the analytic Hessian of `F`.
pub fn shape_operators(sys: &CliffordSystem, frame: &FrameBundle) -> Result<ShapeOperators> {
    let jet = Jet::new(sys, &frame.x, &frame.y)?;
    let d = derivatives_from_jet(&jet);
    let g = d.tangential_gradient_sq().sqrt();
    let dim = frame.x.len();
    let basis = frame.tangent_basis();
    let r = basis.len();
    let rx = dot(&d.grad_x, &frame.x);
    let ry = dot(&d.grad_y, &frame.y);
    // Hessian of F applied to each tangent vector, then projected on the basis.
    let images: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|v| {
            let (hx, hy) = jet.hessian_vec(&v[..dim], &v[dim..]);
            let mut h = concat(&hx, &hy);
            for (hi, vi) in h[..dim].iter_mut().zip(&v[..dim]) {
                *hi -= rx * vi;
            }
            for (hi, vi) in h[dim..].iter_mut().zip(&v[dim..]) {
                *hi -= ry * vi;
            }
            h
        })
        .collect();
    let mut nu2 = DMatrix::zeros(r, r);
    let mut nu1 = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..=i {
            let h = -dot(&basis[i], &images[j]) / g * SQRT_2;
            nu2[(i, j)] = h;
            nu2[(j, i)] = h;
            let b = -(dot(&basis[i][..dim], &basis[j][..dim])
                - dot(&basis[i][dim..], &basis[j][dim..]));
            nu1[(i, j)] = b;
            nu1[(j, i)] = b;
        }
    }
    Ok(ShapeOperators { nu1, nu2 })
}

/// Unit-sphere shape operator in the direction `cos β ν_1 + sin β ν_2`.
pub fn shape_operator(
    sys: &CliffordSystem,
    frame: &FrameBundle,
    beta: f64,
) -> Result<DMatrix<f64>> {
    Ok(shape_operators(sys, frame)?.at(beta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaSqReport {
    /// Max of `|A_ν|^2` over the sampled points and the `β` grid (unit sphere).
    pub estimate: f64,
    /// `6(n - 1)`
    pub closed_form: f64,
    /// Max `|B̃^{ν_1}|^2` of `Σ ⊂ S^{2n+1}(√2)`, expected `n - 1`.
    pub nu1_frob_sq: f64,
    /// Max `|B̃^{ν_2}|^2` of `Σ ⊂ S^{2n+1}(√2)`, expected `3(n - 1)`.
    pub nu2_frob_sq: f64,
    /// Max `|<B̃^{ν_1}, B̃^{ν_2}>|`, expected 0.
    pub cross: f64,
    pub samples: usize,
    pub resolution: usize,
}

/// Estimates `α^2 = sup_ν |A_ν|^2` over `samples` points of `Σ` drawn with `seed`.
pub fn alpha_sq(
    sys: &CliffordSystem,
    samples: usize,
    resolution: usize,
    seed: u64,
) -> Result<AlphaSqReport> {
    if resolution < 64 {
        return Err(invalid(format!(
            "beta grid resolution must be >= 64, got {resolution}"
        )));
    }
    if samples == 0 {
        return Err(invalid("need at least one sample point"));
    }
    let params = FoliationParams::of(sys)?;
    let grams: Vec<(f64, f64, f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_minimal_point(sys, seed, i)?;
            let ops = shape_operators(sys, &build_frame(sys, &p)?)?;
            let best = (0..resolution)
                .map(|j| ops.frob_sq(2.0 * PI * j as f64 / resolution as f64))
                .fold(f64::NEG_INFINITY, f64::max);
            let (a, b, x) = ops.gram();
            Ok((best, a, b, x))
        })
        .collect::<Result<_>>()?;
    let max =
        |f: fn(&(f64, f64, f64, f64)) -> f64| grams.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    Ok(AlphaSqReport {
        estimate: max(|g| g.0),
        closed_form: 6.0 * (params.n as f64 - 1.0),
        nu1_frob_sq: max(|g| g.1) / 2.0,
        nu2_frob_sq: max(|g| g.2) / 2.0,
        cross: max(|g| g.3.abs()) / 2.0,
        samples,
        resolution,
    })
}

/// Grid size of the `β` scan before golden-section refinement.
pub const BETA_GRID: usize = 256;
/// Bracket width at which golden-section refinement stops.
pub const BETA_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub t: f64,
    /// Minimizing normal angle.
    pub beta: f64,
    /// `|A_ν|^2` at the minimizer.
    pub frob_sq: f64,
    /// `trace A_ν` at the minimizer.
    pub trace: f64,
    /// `inf_β det(I - t A_ν)`
    pub det_min: f64,
}

fn det_at(ops: &ShapeOperators, beta: f64, t: f64) -> f64 {
    let r = ops.dim();
    (DMatrix::identity(r, r) - ops.at(beta) * t)
        .lu()
        .determinant()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// `p(t) = inf_β det(I - t A_ν)` for each `t`, with `A_ν` the unit-sphere
/// shape operator at the frame's base point.
pub fn det_profile(
    sys: &CliffordSystem,
    frame: &FrameBundle,
    ts: &[f64],
) -> Result<Vec<ProfilePoint>> {
    if ts.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("t grid must be finite and nonnegative"));
    }
    let ops = shape_operators(sys, frame)?;
    Ok(profile_from_operators(&ops, ts))
}

pub fn profile_from_operators(ops: &ShapeOperators, ts: &[f64]) -> Vec<ProfilePoint> {
    let step = 2.0 * PI / BETA_GRID as f64;
    // Eigenvalues on the grid let every t reuse one decomposition per β.
    let spectra: Vec<Vec<f64>> = (0..BETA_GRID)
        .into_par_iter()
        .map(|j| {
            SymmetricEigen::new(ops.at(j as f64 * step))
                .eigenvalues
                .iter()
                .copied()
                .collect()
        })
        .collect();
    ts.par_iter()
        .map(|&t| {
            let det_grid = |j: usize| spectra[j].iter().map(|l| 1.0 - t * l).product::<f64>();
            let j0 = (0..BETA_GRID)
                .min_by(|&a, &b| det_grid(a).total_cmp(&det_grid(b)))
                .unwrap_or(0);
            let beta0 = j0 as f64 * step;
            let beta = golden_min(|b| det_at(ops, b, t), beta0 - step, beta0 + step, BETA_TOL);
            let (beta, det) = {
                let refined = det_at(ops, beta, t);
                let grid = det_grid(j0);
                if refined <= grid {
                    (beta, refined)
                } else {
                    (beta0, grid)
                }
            };
            let beta = beta.rem_euclid(2.0 * PI);
            let a = ops.at(beta);
            ProfilePoint {
                t,
                beta,
                frob_sq: a.norm_squared(),
                trace: a.trace(),
                det_min: det,
            }
        })
        .collect()
}
