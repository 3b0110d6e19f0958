//! Normal radius of the cone over the minimal leaf: the closed form, a
//! numeric oracle that follows normal geodesics of `Σ ⊂ S^{2n+1}(√2)` until
//! they meet `Σ` again, and the formula for products of cones.

use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

use crate::clifford::CliffordSystem;
use crate::error::{invalid, Result};
use crate::foliation::{eval_f_unchecked, FoliationParams, Jet, LevelPoint};
use crate::linalg::{axpy, norm_sq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `arctan √(c/(1-c))`, attained when `c < 1/2`
    SmallC,
    /// `arctan √((1-c)/c)`, attained when `c > 1/2`
    LargeC,
    /// `c = 1/2`: both equal `π/4`
    Equal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalRadiusResult {
    #[serde(rename = "N_rad")]
    pub n_rad: f64,
    pub branch: Branch,
    pub c: f64,
}

/// `N = min{arctan √(c/(1-c)), arctan √((1-c)/c)}` with `c = (m-1)/(n-1)`.
pub fn normal_radius(m: usize, n: usize) -> Result<NormalRadiusResult> {
    if m < 2 || n < m + 1 {
        return Err(invalid(format!(
            "normal radius needs m >= 2 and n >= m + 1, got m={m}, n={n}"
        )));
    }
    let (num, den) = (m - 1, n - 1);
    let c = num as f64 / den as f64;
    // c / (1 - c) = num / (den - num), without rounding c first
    let small = (num as f64 / (den - num) as f64).sqrt().atan();
    let large = ((den - num) as f64 / num as f64).sqrt().atan();
    let (n_rad, branch) = match (2 * num).cmp(&den) {
        std::cmp::Ordering::Less => (small, Branch::SmallC),
        std::cmp::Ordering::Greater => (large, Branch::LargeC),
        std::cmp::Ordering::Equal => (std::f64::consts::FRAC_PI_4, Branch::Equal),
    };
    Ok(NormalRadiusResult { n_rad, branch, c })
}

/// Grid and tolerances of [`geodesic_scan`].
#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub theta_min: f64,
    pub grid: usize,
    /// Residual bound for accepting a re-intersection.
    pub accept: f64,
    /// Bisection stops at this bracket width.
    pub bisect_tol: f64,
    /// Residual components whose grid maximum stays below this are treated
    /// as identically zero.
    pub noise: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            theta_min: 1e-4,
            grid: 10_000,
            accept: 1e-6,
            bisect_tol: 1e-10,
            noise: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicScan {
    pub alpha: f64,
    pub theta_first: Option<f64>,
    /// `(|x̃|² - 1, |ỹ|² - 1, F(x̃, ỹ) - c)` at `theta_first`.
    pub residuals: Option<[f64; 3]>,
    /// `r² + t²c + 2rtc - 1` at `theta_first`.
    pub quadratic: Option<f64>,
}

/// The normal geodesic `γ(θ) = cos θ (x,y) + sin θ cos α (x,-y) + c₁ sin θ sin α Y`.
pub struct NormalGeodesic<'a> {
    sys: &'a CliffordSystem,
    x: Vec<f64>,
    y: Vec<f64>,
    yx: Vec<f64>,
    yy: Vec<f64>,
    c: f64,
    c1: f64,
    alpha: f64,
}

impl<'a> NormalGeodesic<'a> {
    pub fn new(sys: &'a CliffordSystem, p: &LevelPoint, alpha: f64) -> Result<Self> {
        let c = FoliationParams::of(sys)?.c();
        let jet = Jet::new(sys, &p.x, &p.y)?;
        let (nx, ny) = (norm_sq(&p.x), norm_sq(&p.y));
        if (nx - 1.0).abs() > 1e-10 || (ny - 1.0).abs() > 1e-10 || (jet.value() - c).abs() > 1e-10 {
            return Err(invalid(format!(
                "base point is not on the minimal leaf: |x|^2={nx}, |y|^2={ny}, F={}",
                jet.value()
            )));
        }
        // Y = ½ ∇F(x, y) - c (x, y)
        let gx = jet.grad_x();
        let gy = jet.grad_y();
        let yx: Vec<f64> = gx.iter().zip(&p.x).map(|(g, x)| 0.5 * g - c * x).collect();
        let yy: Vec<f64> = gy.iter().zip(&p.y).map(|(g, y)| 0.5 * g - c * y).collect();
        let ysq = norm_sq(&yx) + norm_sq(&yy);
        if (ysq - 2.0 * c * (1.0 - c)).abs() > 1e-9 {
            return Err(invalid(format!(
                "normal direction Y has |Y|^2 = {ysq}, expected 2c(1-c)"
            )));
        }
        Ok(Self {
            sys,
            x: p.x.clone(),
            y: p.y.clone(),
            yx,
            yy,
            c,
            c1: 1.0 / (c * (1.0 - c)).sqrt(),
            alpha,
        })
    }

    pub fn point(&self, theta: f64) -> (Vec<f64>, Vec<f64>) {
        let (s, co) = theta.sin_cos();
        let a = s * self.alpha.cos();
        let b = self.c1 * s * self.alpha.sin();
        let mut xt: Vec<f64> = self.x.iter().map(|v| (co + a) * v).collect();
        axpy(b, &self.yx, &mut xt);
        let mut yt: Vec<f64> = self.y.iter().map(|v| (co - a) * v).collect();
        axpy(b, &self.yy, &mut yt);
        (xt, yt)
    }

    pub fn residuals(&self, theta: f64) -> [f64; 3] {
        let (xt, yt) = self.point(theta);
        [
            norm_sq(&xt) - 1.0,
            norm_sq(&yt) - 1.0,
            eval_f_unchecked(self.sys, &xt, &yt) - self.c,
        ]
    }

    /// `r² + t²c + 2rtc - 1` with `t = c₁ sin θ sin α`, `r = cos θ + sin θ cos α - ct`.
    pub fn quadratic(&self, theta: f64) -> f64 {
        let t = self.c1 * theta.sin() * self.alpha.sin();
        let r = theta.cos() + theta.sin() * self.alpha.cos() - self.c * t;
        r * r + t * t * self.c + 2.0 * r * t * self.c - 1.0
    }
}

fn max_abs(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// First `θ ∈ (θ_min, θ_max]` at which the normal geodesic in direction `α`
/// returns to `Σ`.
pub fn geodesic_scan(
    sys: &CliffordSystem,
    p: &LevelPoint,
    alpha: f64,
    theta_max: f64,
) -> Result<GeodesicScan> {
    geodesic_scan_with(sys, p, alpha, theta_max, &ScanOptions::default())
}

pub fn geodesic_scan_with(
    sys: &CliffordSystem,
    p: &LevelPoint,
    alpha: f64,
    theta_max: f64,
    o: &ScanOptions,
) -> Result<GeodesicScan> {
    if !(theta_max > o.theta_min) || o.grid < 2 {
        return Err(invalid(format!(
            "theta_max must exceed {}, got {theta_max}",
            o.theta_min
        )));
    }
    let geo = NormalGeodesic::new(sys, p, alpha)?;
    let thetas: Vec<f64> = (0..o.grid)
        .map(|i| o.theta_min + (theta_max - o.theta_min) * i as f64 / (o.grid - 1) as f64)
        .collect();
    let res: Vec<[f64; 3]> = thetas.iter().map(|&t| geo.residuals(t)).collect();
    let significant: Vec<bool> = (0..3)
        .map(|c| res.iter().any(|r| r[c].abs() > o.noise))
        .collect();
    let mut first: Option<f64> = None;
    'grid: for i in 0..o.grid - 1 {
        for c in (0..3).filter(|&c| significant[c]) {
            let (a, b) = (res[i][c], res[i + 1][c]);
            if a == 0.0 || a * b < 0.0 {
                let root = if a == 0.0 {
                    thetas[i]
                } else {
                    let (mut lo, mut hi) = (thetas[i], thetas[i + 1]);
                    while hi - lo > o.bisect_tol {
                        let mid = 0.5 * (lo + hi);
                        if geo.residuals(mid)[c] * a > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                };
                if max_abs(&geo.residuals(root)) <= o.accept {
                    first = Some(root);
                    break 'grid;
                }
            }
        }
    }
    Ok(GeodesicScan {
        alpha,
        theta_first: first,
        residuals: first.map(|t| geo.residuals(t)),
        quadratic: first.map(|t| geo.quadratic(t)),
    })
}

/// Smallest re-intersection along `α = ±π/2`, the numeric counterpart of
/// [`normal_radius`].
pub fn geodesic_radius(
    sys: &CliffordSystem,
    p: &LevelPoint,
    theta_max: f64,
) -> Result<Option<f64>> {
    let a = geodesic_scan(sys, p, FRAC_PI_2, theta_max)?.theta_first;
    let b = geodesic_scan(sys, p, -FRAC_PI_2, theta_max)?.theta_first;
    Ok(match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

/// `N = arccos(1 - min_i[dims_i (1 - cos N_i)] / Σ dims_i)`.
pub fn product_normal_radius(dims: &[usize], radii: &[f64]) -> Result<f64> {
    if dims.is_empty() || dims.len() != radii.len() {
        return Err(invalid(
            "need one radius per factor and at least one factor",
        ));
    }
    if dims.contains(&0) {
        return Err(invalid("factor dimensions must be >= 1"));
    }
    if radii
        .iter()
        .any(|r| !(*r > 0.0 && *r <= std::f64::consts::PI))
    {
        return Err(invalid("factor radii must lie in (0, pi]"));
    }
    let total: usize = dims.iter().sum();
    let min = dims
        .iter()
        .zip(radii)
        .map(|(&d, &r)| d as f64 * (1.0 - r.cos()))
        .fold(f64::INFINITY, f64::min);
    let arg = 1.0 - min / total as f64;
    if !(-1.0..=1.0).contains(&arg) {
        return Err(invalid(format!("arccos argument {arg} outside [-1, 1]")));
    }
    Ok(arg.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_system;
    use crate::foliation::sample_minimal_point;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn closed_form_examples() {
        let r = normal_radius(2, 3).unwrap();
        assert!((r.n_rad - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(r.branch, Branch::Equal);
        let r = normal_radius(9, 15).unwrap();
        assert!((r.n_rad - (3f64.sqrt() / 2.0).atan()).abs() < 1e-15);
        assert_eq!(r.branch, Branch::LargeC);
        let r = normal_radius(2, 11).unwrap();
        assert!((r.n_rad - (1.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!(normal_radius(3, 3).is_err());
        assert!(normal_radius(1, 5).is_err());
    }

    #[test]
    fn scan_examples() {
        let sys = build_system(2, 6).unwrap();
        let p = sample_minimal_point(&sys, 8, 0).unwrap();
        let n = normal_radius(2, 11).unwrap().n_rad;
        let g = geodesic_radius(&sys, &p, 0.6 * std::f64::consts::PI)
            .unwrap()
            .unwrap();
        assert!((g - n).abs() < 1e-6, "{g} vs {n}");
        let s = geodesic_scan(&sys, &p, 0.0, 0.6 * std::f64::consts::PI).unwrap();
        assert!((s.theta_first.unwrap() - FRAC_PI_2).abs() < 1e-6);
        let s = geodesic_scan(&sys, &p, -FRAC_PI_2, 1.0).unwrap();
        assert!(s.quadratic.unwrap().abs() < 1e-8);
    }

    #[test]
    fn scan_rejects_off_leaf_point() {
        let sys = build_system(2, 6).unwrap();
        let p = crate::foliation::sample_level_point(&sys, 0.4, 1).unwrap();
        assert!(geodesic_scan(&sys, &p, FRAC_PI_2, 1.0).is_err());
    }

    #[test]
    fn product_examples() {
        assert!((product_normal_radius(&[5], &[0.4]).unwrap() - 0.4).abs() < 1e-14);
        let n = product_normal_radius(&[5, 5], &[0.4, 0.4]).unwrap();
        assert!((n.cos() - (1.0 + 0.4f64.cos()) / 2.0).abs() < 1e-14);
        assert!(product_normal_radius(&[5, 0], &[0.4, 0.4]).is_err());
        assert!(product_normal_radius(&[5], &[0.0]).is_err());
    }
}
