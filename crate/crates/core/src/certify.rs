//! Area-minimization certificates from Lawlor's criterion `2θ < N`, for cones
//! over minimal FKM leaves in Simons cones and for minimal product cones.
//!
//! Verdicts are three-valued. Lawlor's criterion is only sufficient, so a
//! failed comparison is `Inconclusive`, never a negative result.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::clifford::delta;
use crate::error::{invalid, Result};
use crate::lawlor::{
    scaled_bound, vanishing_angle, Profile, SolverOptions, Termination, VanishingAngleQuery,
    VanishingAngleResult,
};
use crate::radius::{normal_radius, product_normal_radius};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Inconclusive,
    Invalid,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Invalid => "invalid",
        }
    }
}

/// Where the vanishing-angle bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSource {
    /// Direct integration at cone dimension 12, the column the scaling uses.
    Table12,
    /// `(12/k) tan θ(12, 12α/k)` with the limit-form profile.
    Scaled,
    /// Direct integration with the bound-F profile at the cone dimension.
    DirectOde,
}

impl ThetaSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThetaSource::Table12 => "table-12",
            ThetaSource::Scaled => "scaled",
            ThetaSource::DirectOde => "direct-ode",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Fkm,
    Product,
    /// Worst case over all minimal product cones of a given dimension.
    Dimension,
}

/// Diagnostics of the ODE solve behind a θ-bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub profile: String,
    pub dim: usize,
    pub alpha_sq: f64,
    pub termination: Termination,
    pub steps: usize,
    pub rejected_steps: usize,
    pub max_step_error: f64,
    pub rtol: f64,
    pub event_tol: f64,
}

impl SolverDiagnostics {
    fn new(r: &VanishingAngleResult, dim: usize, alpha_sq: f64) -> Self {
        let o = SolverOptions::default();
        Self {
            profile: r.profile.clone(),
            dim,
            alpha_sq,
            termination: r.termination,
            steps: r.steps,
            rejected_steps: r.rejected_steps,
            max_step_error: r.max_step_error,
            rtol: o.rtol,
            event_tol: o.event_tol,
        }
    }
}

/// Closed-form quantities reported alongside the computed bound.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Corroboration {
    /// `arctan(1.2/n)` for FKM cones, `arctan(5/(2k))` for products.
    pub simplified_theta: Option<f64>,
    /// `n² - 1.44 - 2.4n√((n-10)/9)`
    pub ineq_large_c: Option<f64>,
    /// `n² - 1.44 - 2.4n√(n-2)`
    pub ineq_small_c: Option<f64>,
    /// `(12α/k)² < 19`
    pub threshold_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub factors: Vec<usize>,
    pub dim_cone: Option<usize>,
    pub alpha_sq: Option<f64>,
    pub theta_rad: Option<f64>,
    pub theta_src: Option<ThetaSource>,
    #[serde(rename = "N_rad")]
    pub n_rad: Option<f64>,
    pub margin: Option<f64>,
    pub verdict: Verdict,
    pub corroboration: Corroboration,
    pub solver: Option<SolverDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Certificate {
    fn invalid(kind: CertificateKind, reason: String) -> Self {
        Self {
            kind,
            m: None,
            k: None,
            n: None,
            factors: Vec::new(),
            dim_cone: None,
            alpha_sq: None,
            theta_rad: None,
            theta_src: None,
            n_rad: None,
            margin: None,
            verdict: Verdict::Invalid,
            corroboration: Corroboration::default(),
            solver: None,
            reason: Some(reason),
        }
    }

    /// Recomputes the verdict from `theta_rad`, `n_rad` and the validity of
    /// the parameters.
    pub fn recheck(&self) -> Verdict {
        if self.verdict == Verdict::Invalid {
            return Verdict::Invalid;
        }
        match (self.theta_rad, self.n_rad) {
            (Some(t), Some(n)) if 2.0 * t < n => Verdict::Certified,
            _ => Verdict::Inconclusive,
        }
    }
}

/// θ-bound for a cone of dimension `dim` with curvature bound `alpha_sq`:
/// the scaling bound above dimension 12, direct integration otherwise.
fn theta_bound(dim: usize, alpha_sq: f64) -> Result<(Option<f64>, ThetaSource, SolverDiagnostics)> {
    let alpha = alpha_sq.sqrt();
    if dim > 12 {
        let s = scaled_bound(dim, alpha)?;
        let diag = SolverDiagnostics::new(&s.inner, 12, s.inner_alpha_sq);
        Ok((s.theta_bound(), ThetaSource::Scaled, diag))
    } else {
        let r = vanishing_angle(&VanishingAngleQuery::new(dim, alpha, Profile::BoundF)?)?;
        let src = if dim == 12 {
            ThetaSource::Table12
        } else {
            ThetaSource::DirectOde
        };
        Ok((r.theta, src, SolverDiagnostics::new(&r, dim, alpha_sq)))
    }
}

fn verdict(theta: Option<f64>, n_rad: f64) -> (Option<f64>, Verdict) {
    match theta {
        Some(t) => {
            let margin = n_rad - 2.0 * t;
            (
                Some(margin),
                if margin > 0.0 {
                    Verdict::Certified
                } else {
                    Verdict::Inconclusive
                },
            )
        }
        None => (None, Verdict::Inconclusive),
    }
}

/// `n² - 1.44 - 2.4n√((n-10)/9)`, defined for `n >= 10`.
pub fn ineq_large_c(n: f64) -> Option<f64> {
    (n >= 10.0).then(|| n * n - 1.44 - 2.4 * n * ((n - 10.0) / 9.0).sqrt())
}

/// `n² - 1.44 - 2.4n√(n-2)`, defined for `n >= 2`.
pub fn ineq_small_c(n: f64) -> Option<f64> {
    (n >= 2.0).then(|| n * n - 1.44 - 2.4 * n * (n - 2.0).sqrt())
}

/// Certificate for the cone over the minimal leaf of the `(m, k)` FKM
/// foliation of `S^n × S^n`, `n = kδ(m) - 1`, inside the Simons cone.
pub fn certify_fkm(m: usize, k: usize) -> Result<Certificate> {
    if m < 2 || k < 1 {
        let mut c = Certificate::invalid(
            CertificateKind::Fkm,
            format!("need m >= 2 and k >= 1, got m={m}, k={k}"),
        );
        (c.m, c.k) = (Some(m), Some(k));
        return Ok(c);
    }
    let n = k * delta(m)? - 1;
    if n < m + 1 {
        let mut c = Certificate::invalid(
            CertificateKind::Fkm,
            format!("n - m = {} < 1", n as i64 - m as i64),
        );
        (c.m, c.k, c.n) = (Some(m), Some(k), Some(n));
        return Ok(c);
    }
    let dim = 2 * n;
    let alpha_sq = 6.0 * (n as f64 - 1.0);
    let (theta, src, diag) = theta_bound(dim, alpha_sq)?;
    let n_rad = normal_radius(m, n)?.n_rad;
    let (margin, verdict) = verdict(theta, n_rad);
    let nf = n as f64;
    Ok(Certificate {
        kind: CertificateKind::Fkm,
        m: Some(m),
        k: Some(k),
        n: Some(n),
        factors: Vec::new(),
        dim_cone: Some(dim),
        alpha_sq: Some(alpha_sq),
        theta_rad: theta,
        theta_src: Some(src),
        n_rad: Some(n_rad),
        margin,
        verdict,
        corroboration: Corroboration {
            simplified_theta: Some((1.2 / nf).atan()),
            ineq_large_c: ineq_large_c(nf),
            ineq_small_c: ineq_small_c(nf),
            threshold_ok: Some(alpha_sq * (12.0 / dim as f64).powi(2) < 19.0),
        },
        solver: Some(diag),
        reason: None,
    })
}

/// Certificate for the minimal product of cones over minimal FKM leaves of
/// `S^{n_i} × S^{n_i}`, each of link dimension `k_i = 2n_i - 1`.
pub fn certify_product(factors: &[usize]) -> Result<Certificate> {
    if factors.len() < 2 || factors.iter().any(|&n| n < 3) {
        let mut c = Certificate::invalid(
            CertificateKind::Product,
            format!("need at least 2 factors with every n_i >= 3, got {factors:?}"),
        );
        c.factors = factors.to_vec();
        return Ok(c);
    }
    let ks: Vec<usize> = factors.iter().map(|n| 2 * n - 1).collect();
    let sum: usize = ks.iter().sum();
    let dim = sum + 1;
    let k_max = *ks.iter().max().unwrap_or(&1) as f64;
    let alpha_sq = 3.0 * (dim as f64 - 1.0) * (1.0 - 1.0 / k_max);
    let (theta, src, diag) = theta_bound(dim, alpha_sq)?;
    // m_i = 2 gives the smallest radius among the factors' possible leaves
    let radii: Vec<f64> = factors
        .iter()
        .map(|&n| normal_radius(2, n).map(|r| r.n_rad))
        .collect::<Result<_>>()?;
    let n_rad = product_normal_radius(&ks, &radii)?;
    let (margin, verdict) = verdict(theta, n_rad);
    Ok(Certificate {
        kind: CertificateKind::Product,
        m: None,
        k: None,
        n: None,
        factors: factors.to_vec(),
        dim_cone: Some(dim),
        alpha_sq: Some(alpha_sq),
        theta_rad: theta,
        theta_src: Some(src),
        n_rad: Some(n_rad),
        margin,
        verdict,
        corroboration: Corroboration {
            simplified_theta: Some((5.0 / (2.0 * dim as f64)).atan()),
            ineq_large_c: None,
            ineq_small_c: None,
            threshold_ok: Some(alpha_sq * (12.0 / dim as f64).powi(2) < 19.0),
        },
        solver: Some(diag),
        reason: None,
    })
}

/// Certificate covering every minimal product cone of dimension `dim`,
/// using `α² <= 3(dim - 2)` and `N >= arccos(1 - 1/(dim - 1))`.
pub fn certify_dimension(dim: usize) -> Result<Certificate> {
    if dim < 11 {
        let mut c = Certificate::invalid(
            CertificateKind::Dimension,
            format!("product cones have dimension >= 11, got {dim}"),
        );
        c.dim_cone = Some(dim);
        return Ok(c);
    }
    let alpha_sq = 3.0 * (dim as f64 - 2.0);
    let (theta, src, diag) = theta_bound(dim, alpha_sq)?;
    let n_rad = (1.0 - 1.0 / (dim as f64 - 1.0)).acos();
    let (margin, verdict) = verdict(theta, n_rad);
    Ok(Certificate {
        kind: CertificateKind::Dimension,
        m: None,
        k: None,
        n: None,
        factors: Vec::new(),
        dim_cone: Some(dim),
        alpha_sq: Some(alpha_sq),
        theta_rad: theta,
        theta_src: Some(src),
        n_rad: Some(n_rad),
        margin,
        verdict,
        corroboration: Corroboration {
            simplified_theta: Some((5.0 / (2.0 * dim as f64)).atan()),
            ineq_large_c: None,
            ineq_small_c: None,
            threshold_ok: Some(alpha_sq * (12.0 / dim as f64).powi(2) < 19.0),
        },
        solver: Some(diag),
        reason: None,
    })
}

/// FKM certificates for every `(m, k)` in the ranges, ordered by `(m, k)`.
pub fn sweep_fkm(
    ms: std::ops::RangeInclusive<usize>,
    ks: std::ops::RangeInclusive<usize>,
) -> Result<Vec<Certificate>> {
    let tuples: Vec<(usize, usize)> = ms.flat_map(|m| ks.clone().map(move |k| (m, k))).collect();
    let mut out: Vec<Certificate> = tuples
        .par_iter()
        .map(|&(m, k)| certify_fkm(m, k))
        .collect::<Result<_>>()?;
    out.sort_by_key(|c| (c.m, c.k));
    Ok(out)
}

/// Product certificates for the given factor lists, ordered lexicographically.
pub fn sweep_products(lists: &[Vec<usize>]) -> Result<Vec<Certificate>> {
    let mut out: Vec<Certificate> = lists
        .par_iter()
        .map(|f| certify_product(f))
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.factors.cmp(&b.factors));
    Ok(out)
}

/// All homogeneous factor lists `[n; j]` (`j >= 2`, `n >= 3`) whose product
/// cone dimension `j(2n - 1) + 1` lies in `dims`.
pub fn homogeneous_lists(dims: std::ops::RangeInclusive<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let hi = *dims.end();
    for j in 2.. {
        if j * 5 + 1 > hi {
            break;
        }
        for n in 3.. {
            let d = j * (2 * n - 1) + 1;
            if d > hi {
                break;
            }
            if dims.contains(&d) {
                out.push(vec![n; j]);
            }
        }
    }
    out.sort();
    out
}

pub const FKM_CSV_HEADER: &str = "m,k,n,alpha_sq,theta_rad,theta_src,N_rad,margin,verdict";
pub const PRODUCT_CSV_HEADER: &str =
    "factors,dim_cone,alpha_sq,theta_rad,theta_src,N_rad,margin,verdict";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn f(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.12}")).unwrap_or_default()
}

/// CSV with a header row. FKM certificates use [`FKM_CSV_HEADER`]; product
/// and dimension certificates use [`PRODUCT_CSV_HEADER`] with `;`-joined
/// factors.
pub fn to_csv(certs: &[Certificate]) -> Result<String> {
    let fkm = certs.iter().all(|c| c.kind == CertificateKind::Fkm);
    if !fkm && certs.iter().any(|c| c.kind == CertificateKind::Fkm) {
        return Err(invalid(
            "cannot mix FKM and product certificates in one CSV table",
        ));
    }
    let mut s = String::new();
    s.push_str(if fkm {
        FKM_CSV_HEADER
    } else {
        PRODUCT_CSV_HEADER
    });
    s.push('\n');
    for c in certs {
        let tail = format!(
            "{},{},{},{},{},{}",
            f(c.alpha_sq),
            f(c.theta_rad),
            c.theta_src.map(|s| s.as_str()).unwrap_or(""),
            f(c.n_rad),
            f(c.margin),
            c.verdict.as_str()
        );
        if fkm {
            let _ = writeln!(s, "{},{},{},{tail}", opt(c.m), opt(c.k), opt(c.n));
        } else {
            let factors: Vec<String> = c.factors.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(s, "{},{},{tail}", factors.join(";"), opt(c.dim_cone));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fkm_examples() {
        let c = certify_fkm(9, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.n, Some(15));
        assert!((c.n_rad.unwrap() - (3f64.sqrt() / 2.0).atan()).abs() < 1e-15);
        let c = certify_fkm(3, 3).unwrap();
        assert_eq!((c.verdict, c.n), (Verdict::Certified, Some(11)));
        let c = certify_fkm(2, 2).unwrap();
        assert_eq!((c.verdict, c.n), (Verdict::Inconclusive, Some(3)));
        assert!(c.theta_rad.is_none());
        assert_eq!(certify_fkm(2, 1).unwrap().verdict, Verdict::Invalid);
        assert_eq!(certify_fkm(1, 3).unwrap().verdict, Verdict::Invalid);
    }

    #[test]
    fn product_examples() {
        let c = certify_product(&[3, 3, 3, 3]).unwrap();
        assert_eq!(c.dim_cone, Some(21));
        assert_eq!(c.verdict, Verdict::Certified);
        let c = certify_product(&[3, 3]).unwrap();
        assert_eq!(c.dim_cone, Some(11));
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!(c.corroboration.threshold_ok, Some(false));
        assert_eq!(certify_product(&[3]).unwrap().verdict, Verdict::Invalid);
        assert_eq!(certify_product(&[3, 2]).unwrap().verdict, Verdict::Invalid);
    }

    #[test]
    fn homogeneous_enumeration() {
        let l = homogeneous_lists(21..=23);
        assert_eq!(l, vec![vec![3, 3, 3, 3], vec![4, 4, 4], vec![6, 6]]);
        assert!(homogeneous_lists(33..=33).is_empty());
        assert!(sweep_fkm(3..=2, 1..=1).unwrap().is_empty());
    }

    #[test]
    fn csv_shape() {
        let certs = sweep_fkm(2..=3, 1..=3).unwrap();
        let csv = to_csv(&certs).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], FKM_CSV_HEADER);
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("2,1,1,,,,,,invalid"));
        assert!(lines.iter().all(|l| l.split(',').count() == 9));
    }
}
