//! The splitting-form polynomial
//! `F(x, y) = <x, y>^2 + Σ_q <A_q x, y>^2` on `R^{n+1} × R^{n+1}`, its exact
//! derivatives, and the identities that make its restriction to
//! `S^n × S^n` an isonormal isoparametric function:
//!
//! * `|∇̄F|^2 = 8F - 8F^2`
//! * `Δ̄F = 4m - 4(n+1)F`
//! * `|∂F/∂x|^2 = 4F|y|^2` and `|∂F/∂y|^2 = 4F|x|^2`, hence `|N_1| = |N_2|`.
//!
//! All derivatives are closed-form; nothing here differentiates numerically
//! except [`identity_report`], which cross-checks the gradient.

use rand::Rng;
use serde::Serialize;

use crate::clifford::CliffordSystem;
use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, concat, dot, norm_sq, normalize, project_out};
use crate::rng;

/// Residual tolerances used by the verification routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Gradient and Laplacian identities.
    pub identity: f64,
    /// Urbano's `C`.
    pub c_value: f64,
    /// `|∂F/∂x|^2 = 4F|y|^2` and its mirror.
    pub czero: f64,
    /// Analytic-vs-finite-difference deviation, relative to `1 + |value|`.
    pub fd: f64,
    /// Deviation of `|x|^2`, `|y|^2` from 1 and of `F` from the target level.
    pub unit_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-9,
            c_value: 1e-10,
            czero: 1e-12,
            fd: 1e-5,
            unit_norm: 1e-12,
        }
    }
}

/// `(m, k)` with the derived `n = k δ(m) - 1` and minimal level `c = (m-1)/(n-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FoliationParams {
    pub m: usize,
    pub k: usize,
    pub n: usize,
}

impl FoliationParams {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        let n = k * crate::clifford::delta(m)? - 1;
        Self::from_mn(m, k, n)
    }

    fn from_mn(m: usize, k: usize, n: usize) -> Result<Self> {
        if m < 2 || n < m + 1 {
            return Err(invalid(format!(
                "foliation needs m >= 2 and n >= m + 1, got m={m}, n={n}"
            )));
        }
        Ok(Self { m, k, n })
    }

    pub fn of(sys: &CliffordSystem) -> Result<Self> {
        Self::from_mn(sys.m(), sys.k(), sys.n())
    }

    /// `c` as the exact fraction `(m - 1, n - 1)`.
    pub fn c_ratio(&self) -> (usize, usize) {
        (self.m - 1, self.n - 1)
    }

    pub fn c(&self) -> f64 {
        (self.m - 1) as f64 / (self.n - 1) as f64
    }
}

/// A point `(x, y)` of `S^n × S^n` together with its level `s = F(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: f64,
}

impl LevelPoint {
    /// Wraps `(x, y)` after checking unit norms; `s` is evaluated.
    pub fn new(sys: &CliffordSystem, x: Vec<f64>, y: Vec<f64>, tol: f64) -> Result<Self> {
        check_unit(&x, &y, tol)?;
        let s = eval_f(sys, &x, &y)?;
        Ok(Self { x, y, s })
    }

    pub fn position(&self) -> Vec<f64> {
        concat(&self.x, &self.y)
    }
}

fn check_dims(sys: &CliffordSystem, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != sys.dim() || y.len() != sys.dim() {
        return Err(invalid(format!(
            "vector dimensions ({}, {}) do not match system dimension {}",
            x.len(),
            y.len(),
            sys.dim()
        )));
    }
    Ok(())
}

fn check_unit(x: &[f64], y: &[f64], tol: f64) -> Result<()> {
    let (nx, ny) = (norm_sq(x), norm_sq(y));
    if (nx - 1.0).abs() > tol || (ny - 1.0).abs() > tol {
        return Err(invalid(format!(
            "point is not on S^n x S^n: |x|^2 = {nx}, |y|^2 = {ny}"
        )));
    }
    Ok(())
}

/// `F(x, y) = <x, y>^2 + Σ_q <A_q x, y>^2`.
pub fn eval_f(sys: &CliffordSystem, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(sys, x, y)?;
    Ok(eval_f_unchecked(sys, x, y))
}

pub(crate) fn eval_f_unchecked(sys: &CliffordSystem, x: &[f64], y: &[f64]) -> f64 {
    let xy = dot(x, y);
    let mut f = xy * xy;
    for q in 0..sys.num_generators() {
        let b = dot(&sys.apply(q, x), y);
        f += b * b;
    }
    f
}

/// The polynomial data at `(x, y)` needed for all first and second derivatives:
/// `B_q = <A_q x, y>`, `A_q x` and `A_q^T y`.
#[derive(Clone, Debug)]
pub struct Jet<'a> {
    sys: &'a CliffordSystem,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xy: f64,
    pub b: Vec<f64>,
    pub ax: Vec<Vec<f64>>,
    pub aty: Vec<Vec<f64>>,
}

impl<'a> Jet<'a> {
    pub fn new(sys: &'a CliffordSystem, x: &[f64], y: &[f64]) -> Result<Self> {
        check_dims(sys, x, y)?;
        let ax: Vec<Vec<f64>> = (0..sys.num_generators()).map(|q| sys.apply(q, x)).collect();
        let aty: Vec<Vec<f64>> = (0..sys.num_generators())
            .map(|q| sys.apply_transpose(q, y))
            .collect();
        let b = ax.iter().map(|v| dot(v, y)).collect();
        Ok(Self {
            sys,
            x: x.to_vec(),
            y: y.to_vec(),
            xy: dot(x, y),
            b,
            ax,
            aty,
        })
    }

    pub fn value(&self) -> f64 {
        self.xy * self.xy + self.b.iter().map(|b| b * b).sum::<f64>()
    }

    /// `∂F/∂x = 2<x,y> y + 2 Σ B_q A_q^T y`
    pub fn grad_x(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.y.iter().map(|v| 2.0 * self.xy * v).collect();
        for (bq, a) in self.b.iter().zip(&self.aty) {
            axpy(2.0 * bq, a, &mut g);
        }
        g
    }

    /// `∂F/∂y = 2<x,y> x + 2 Σ B_q A_q x`
    pub fn grad_y(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.x.iter().map(|v| 2.0 * self.xy * v).collect();
        for (bq, a) in self.b.iter().zip(&self.ax) {
            axpy(2.0 * bq, a, &mut g);
        }
        g
    }

    /// Ambient Hessian applied to `(u, v)`.
    pub fn hessian_vec(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (x, y) = (&self.x, &self.y);
        let (yu, xv) = (dot(y, u), dot(x, v));
        let mut hx = vec![0.0; x.len()];
        let mut hy = vec![0.0; y.len()];
        // F_xx u + F_xy v
        axpy(2.0 * yu + 2.0 * xv, y, &mut hx);
        axpy(2.0 * self.xy, v, &mut hx);
        // F_yx u + F_yy v
        axpy(2.0 * xv + 2.0 * yu, x, &mut hy);
        axpy(2.0 * self.xy, u, &mut hy);
        for q in 0..self.b.len() {
            let (a, bx) = (&self.aty[q], &self.ax[q]);
            let (au, bv) = (dot(a, u), dot(bx, v));
            axpy(2.0 * au + 2.0 * bv, a, &mut hx);
            axpy(2.0 * self.b[q], &self.sys.apply_transpose(q, v), &mut hx);
            axpy(2.0 * au + 2.0 * bv, bx, &mut hy);
            axpy(2.0 * self.b[q], &self.sys.apply(q, u), &mut hy);
        }
        (hx, hy)
    }

    /// Euclidean Laplacian `trace F_xx + trace F_yy`.
    pub fn euclidean_laplacian(&self) -> f64 {
        let tx = 2.0 * norm_sq(&self.y) + 2.0 * self.aty.iter().map(|a| norm_sq(a)).sum::<f64>();
        let ty = 2.0 * norm_sq(&self.x) + 2.0 * self.ax.iter().map(|a| norm_sq(a)).sum::<f64>();
        tx + ty
    }
}

/// Derivative data of `F` at a point of `S^n × S^n`.
#[derive(Clone, Debug, Serialize)]
pub struct Derivatives {
    pub value: f64,
    /// `∂F/∂x`
    pub grad_x: Vec<f64>,
    /// `∂F/∂y`
    pub grad_y: Vec<f64>,
    /// `N_1 = ∂F/∂x - <DF, x> x`
    pub n1: Vec<f64>,
    /// `N_2 = ∂F/∂y - <DF, y> y`
    pub n2: Vec<f64>,
    /// `Δ^E F`
    pub euclidean_laplacian: f64,
    /// `Δ̄F` on the product of unit spheres
    pub laplacian: f64,
}

impl Derivatives {
    /// Tangential gradient `∇̄F = (N_1, N_2)`.
    pub fn tangential_gradient(&self) -> Vec<f64> {
        concat(&self.n1, &self.n2)
    }

    pub fn tangential_gradient_sq(&self) -> f64 {
        norm_sq(&self.n1) + norm_sq(&self.n2)
    }
}

pub fn derivatives(sys: &CliffordSystem, x: &[f64], y: &[f64]) -> Result<Derivatives> {
    check_dims(sys, x, y)?;
    check_unit(x, y, Tolerances::default().unit_norm.max(1e-10))?;
    let jet = Jet::new(sys, x, y)?;
    Ok(derivatives_from_jet(&jet))
}

pub(crate) fn derivatives_from_jet(jet: &Jet<'_>) -> Derivatives {
    let (x, y) = (&jet.x, &jet.y);
    let n = x.len() as f64 - 1.0;
    let gx = jet.grad_x();
    let gy = jet.grad_y();
    let (rx, ry) = (dot(&gx, x), dot(&gy, y));
    let mut n1 = gx.clone();
    axpy(-rx, x, &mut n1);
    let mut n2 = gy.clone();
    axpy(-ry, y, &mut n2);
    let lap_e = jet.euclidean_laplacian();
    // Laplacian of the restriction to a product of unit spheres: remove the
    // radial second derivatives and the mean-curvature terms n * ∂_r F.
    let (ux, uy) = (vec![0.0; x.len()], vec![0.0; y.len()]);
    let (hxx, _) = jet.hessian_vec(x, &uy);
    let (_, hyy) = jet.hessian_vec(&ux, y);
    let radial = dot(&hxx, x) + dot(&hyy, y);
    let laplacian = lap_e - radial - n * (rx + ry);
    Derivatives {
        value: jet.value(),
        grad_x: gx,
        grad_y: gy,
        n1,
        n2,
        euclidean_laplacian: lap_e,
        laplacian,
    }
}

/// Riemannian Hessian of `F` on `S^n × S^n` evaluated on tangent vectors
/// `(u1, u2)`, `(v1, v2)`.
pub(crate) fn riemannian_hessian(
    jet: &Jet<'_>,
    d: &Derivatives,
    u: (&[f64], &[f64]),
    v: (&[f64], &[f64]),
) -> f64 {
    let (hx, hy) = jet.hessian_vec(v.0, v.1);
    let rx = dot(&d.grad_x, &jet.x);
    let ry = dot(&d.grad_y, &jet.y);
    dot(u.0, &hx) + dot(u.1, &hy) - rx * dot(u.0, v.0) - ry * dot(u.1, v.1)
}

/// Draws a point with `F(x, y) = s`: a uniform unit `x`, a unit `u` in
/// `span{x, A_q x}`, a unit `w` orthogonal to it, and `y = √s u + √(1-s) w`.
pub fn sample_level_point(sys: &CliffordSystem, s: f64, seed: u64) -> Result<LevelPoint> {
    sample_level_point_with(sys, s, &mut rng::stream(seed, 0))
}

pub fn sample_level_point_with<R: Rng>(
    sys: &CliffordSystem,
    s: f64,
    rng: &mut R,
) -> Result<LevelPoint> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("level {s} outside [0, 1]")));
    }
    let dim = sys.dim();
    let x = rng::unit_vec(rng, dim);
    let mut span = vec![x.clone()];
    for q in 0..sys.num_generators() {
        let mut v = sys.apply(q, &x);
        project_out(&mut v, &span);
        normalize(&mut v);
        span.push(v);
    }
    let coeffs = rng::unit_vec(rng, span.len());
    let mut u = vec![0.0; dim];
    for (c, b) in coeffs.iter().zip(&span) {
        axpy(*c, b, &mut u);
    }
    normalize(&mut u);
    let w = loop {
        let mut w = rng::gaussian_vec(rng, dim);
        project_out(&mut w, &span);
        if normalize(&mut w) > 1e-6 {
            break w;
        }
    };
    let mut y = vec![0.0; dim];
    axpy(s.sqrt(), &u, &mut y);
    axpy((1.0 - s).sqrt(), &w, &mut y);
    normalize(&mut y);
    let value = eval_f_unchecked(sys, &x, &y);
    Ok(LevelPoint { x, y, s: value })
}

/// Point `index` of a reproducible batch under `seed`, at a regular level
/// drawn uniformly from `[0.02, 0.98]`.
pub fn sample_regular_point(sys: &CliffordSystem, seed: u64, index: u64) -> LevelPoint {
    let mut r = rng::stream(seed, index);
    let s = r.random_range(0.02..0.98);
    sample_level_point_with(sys, s, &mut r).expect("level in range")
}

/// Point `index` of a reproducible batch on the minimal level `c`.
pub fn sample_minimal_point(sys: &CliffordSystem, seed: u64, index: u64) -> Result<LevelPoint> {
    let c = FoliationParams::of(sys)?.c();
    sample_level_point_with(sys, c, &mut rng::stream(seed, index))
}

/// Residuals of the foliation identities at one regular point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `|∇̄F|^2 - (8F - 8F^2)`
    pub grad_identity: f64,
    /// `Δ̄F - (4m - 4(n+1)F)`
    pub laplacian_identity: f64,
    /// `max(| |∂F/∂x|^2 - 4F|y|^2 |, | |∂F/∂y|^2 - 4F|x|^2 |)`
    pub czero_identity: f64,
    /// `|N_1|^2 - |N_2|^2`
    pub c_numerator: f64,
    /// Urbano's `C = (|N_1|^2 - |N_2|^2) / |∇̄F|^2`
    pub c_value: f64,
    /// Largest relative deviation between analytic directional derivatives and
    /// Richardson-extrapolated central differences.
    pub fd_delta: f64,
    /// Largest relative disagreement between the central differences at `h`
    /// and `h/2`.
    pub fd_consistency: f64,
    /// Largest absolute value among the exact-identity residuals above.
    pub max_abs: f64,
}

impl IdentityReport {
    pub fn within(&self, tol: &Tolerances) -> bool {
        self.grad_identity.abs() <= tol.identity
            && self.laplacian_identity.abs() <= tol.identity
            && self.c_value.abs() <= tol.c_value
            && self.czero_identity <= tol.czero
            && self.fd_delta <= tol.fd
    }
}

pub const FD_STEP: f64 = 1e-5;

/// Residuals of all identities at a regular point `p` (`0 < s < 1`).
pub fn identity_report(sys: &CliffordSystem, p: &LevelPoint) -> Result<IdentityReport> {
    let params = FoliationParams::of(sys)?;
    let jet = Jet::new(sys, &p.x, &p.y)?;
    let d = derivatives_from_jet(&jet);
    let f = d.value;
    let grad_sq = d.tangential_gradient_sq();
    if grad_sq <= 1e-14 || f <= 0.0 || f >= 1.0 {
        return Err(Error::FocalPoint { level: f });
    }
    let (m, n) = (params.m as f64, params.n as f64);
    let grad_identity = grad_sq - (8.0 * f - 8.0 * f * f);
    let laplacian_identity = d.laplacian - (4.0 * m - 4.0 * (n + 1.0) * f);
    let czero_identity = (norm_sq(&d.grad_x) - 4.0 * f * norm_sq(&p.y))
        .abs()
        .max((norm_sq(&d.grad_y) - 4.0 * f * norm_sq(&p.x)).abs());
    let c_numerator = norm_sq(&d.n1) - norm_sq(&d.n2);
    let c_value = c_numerator / grad_sq;

    let (fd_delta, fd_consistency) = fd_gradient_check(sys, p, &d);
    let max_abs = [grad_identity, laplacian_identity, czero_identity, c_value]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(IdentityReport {
        grad_identity,
        laplacian_identity,
        czero_identity,
        c_numerator,
        c_value,
        fd_delta,
        fd_consistency,
        max_abs,
    })
}

/// Deterministic tangent directions at `p`: the normalized gradient plus the
/// tangential projections of a few fixed probes.
fn probe_directions(
    sys: &CliffordSystem,
    p: &LevelPoint,
    d: &Derivatives,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dim = p.x.len();
    let mut probes: Vec<(Vec<f64>, Vec<f64>)> = vec![
        (d.n1.clone(), d.n2.clone()),
        (p.y.clone(), p.x.clone()),
        (p.y.clone(), vec![0.0; dim]),
    ];
    let mut e = vec![0.0; dim];
    e[0] = 1.0;
    let mut last = vec![0.0; dim];
    last[dim - 1] = 1.0;
    probes.push((e, last));
    if sys.num_generators() > 0 {
        probes.push((sys.apply_transpose(0, &p.y), sys.apply(0, &p.x)));
    }
    probes
        .into_iter()
        .filter_map(|(mut a, mut b)| {
            project_out(&mut a, std::slice::from_ref(&p.x));
            project_out(&mut b, std::slice::from_ref(&p.y));
            let nrm = (norm_sq(&a) + norm_sq(&b)).sqrt();
            (nrm > 1e-8).then(|| {
                a.iter_mut().chain(b.iter_mut()).for_each(|v| *v /= nrm);
                (a, b)
            })
        })
        .collect()
}

/// Central difference of `F` along the retraction
/// `h -> (normalize(x + h a), normalize(y + h b))`.
fn central_difference(sys: &CliffordSystem, p: &LevelPoint, a: &[f64], b: &[f64], h: f64) -> f64 {
    let at = |t: f64| {
        let mut x = p.x.clone();
        axpy(t, a, &mut x);
        normalize(&mut x);
        let mut y = p.y.clone();
        axpy(t, b, &mut y);
        normalize(&mut y);
        eval_f_unchecked(sys, &x, &y)
    };
    (at(h) - at(-h)) / (2.0 * h)
}

fn fd_gradient_check(sys: &CliffordSystem, p: &LevelPoint, d: &Derivatives) -> (f64, f64) {
    let mut delta = 0.0f64;
    let mut consistency = 0.0f64;
    for (a, b) in probe_directions(sys, p, d) {
        let analytic = dot(&d.n1, &a) + dot(&d.n2, &b);
        let d1 = central_difference(sys, p, &a, &b, FD_STEP);
        let d2 = central_difference(sys, p, &a, &b, FD_STEP / 2.0);
        let rich = (4.0 * d2 - d1) / 3.0;
        let scale = 1.0 + analytic.abs();
        delta = delta.max((rich - analytic).abs() / scale);
        consistency = consistency.max((d1 - d2).abs() / scale);
    }
    (delta, consistency)
}

fn regular_derivatives<'a>(
    sys: &'a CliffordSystem,
    p: &LevelPoint,
) -> Result<(Jet<'a>, Derivatives)> {
    let jet = Jet::new(sys, &p.x, &p.y)?;
    let d = derivatives_from_jet(&jet);
    let level = d.value;
    if level <= 0.0 || level >= 1.0 || d.tangential_gradient_sq() <= 1e-14 {
        return Err(Error::FocalPoint { level });
    }
    Ok((jet, d))
}

/// Mean curvature of the level hypersurface through `p` in `S^n × S^n` with
/// respect to the unit normal `∇̄F / |∇̄F|`:
/// `H = <∇̄|∇̄F|^2, ∇̄F> / (2|∇̄F|^3) - Δ̄F / |∇̄F|`.
pub fn mean_curvature(sys: &CliffordSystem, p: &LevelPoint) -> Result<f64> {
    let (jet, d) = regular_derivatives(sys, p)?;
    let g_sq = d.tangential_gradient_sq();
    let g = g_sq.sqrt();
    // <∇̄|∇̄F|^2, ∇̄F> = 2 Hess F(∇̄F, ∇̄F)
    let hess_gg = riemannian_hessian(&jet, &d, (&d.n1, &d.n2), (&d.n1, &d.n2));
    Ok(hess_gg / (g_sq * g) - d.laplacian / g)
}

/// The closed form `4(1 - m + (n-1)s) / √(8s - 8s^2)` of the mean curvature
/// of the level `s`.
pub fn mean_curvature_closed_form(params: &FoliationParams, s: f64) -> Result<f64> {
    if s <= 0.0 || s >= 1.0 {
        return Err(Error::FocalPoint { level: s });
    }
    let (m, n) = (params.m as f64, params.n as f64);
    Ok(4.0 * (1.0 - m + (n - 1.0) * s) / (8.0 * s - 8.0 * s * s).sqrt())
}

/// The five terms of the second-fundamental-form identity, each already
/// divided by `|∇̄F|^2`, with `b(F) = 8F - 8F^2` and `a(F) = 4m - 4(n+1)F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondFormTerms {
    /// `½ Δ̄|∇̄F|^2`
    pub half_laplacian_grad_sq: f64,
    /// `-<∇̄F, ∇̄Δ̄F>`
    pub grad_dot_grad_laplacian: f64,
    /// `-(n - 1)|∇̄F|^2`
    pub ricci: f64,
    /// `-|∇̄|∇̄F|^2|^2 / (2|∇̄F|^2)`
    pub grad_grad_sq: f64,
    /// `+<∇̄|∇̄F|^2, ∇̄F>^2 / (4|∇̄F|^4)`
    pub normal_part: f64,
}

impl SecondFormTerms {
    pub fn total(&self) -> f64 {
        self.half_laplacian_grad_sq
            + self.grad_dot_grad_laplacian
            + self.ricci
            + self.grad_grad_sq
            + self.normal_part
    }
}

pub fn second_form_terms(params: &FoliationParams, s: f64) -> Result<SecondFormTerms> {
    if s <= 0.0 || s >= 1.0 {
        return Err(Error::FocalPoint { level: s });
    }
    let (m, n) = (params.m as f64, params.n as f64);
    let b = 8.0 * s - 8.0 * s * s;
    let db = 8.0 - 16.0 * s;
    let ddb = -16.0;
    let a = 4.0 * m - 4.0 * (n + 1.0) * s;
    let da = -4.0 * (n + 1.0);
    // For F isoparametric: Δ̄ b(F) = b'' b + b' a, ∇̄ a(F) = a' ∇̄F, ∇̄ b(F) = b' ∇̄F.
    // |∇̄F|^2 = b, so the two gradient-of-gradient terms reduce to b'^2 / 2 and b'^2 / 4.
    Ok(SecondFormTerms {
        half_laplacian_grad_sq: 0.5 * (ddb * b + db * a) / b,
        grad_dot_grad_laplacian: -da,
        ricci: -(n - 1.0),
        grad_grad_sq: -db * db / (2.0 * b),
        normal_part: db * db / (4.0 * b),
    })
}

/// `‖B‖^2` of the level hypersurface through `p` inside `S^n × S^n`.
pub fn second_form_norm(sys: &CliffordSystem, p: &LevelPoint) -> Result<f64> {
    let (_, d) = regular_derivatives(sys, p)?;
    let params = FoliationParams::of(sys)?;
    Ok(second_form_terms(&params, d.value)?.total())
}
