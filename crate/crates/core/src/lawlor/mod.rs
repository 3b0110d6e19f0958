//! Lawlor's curvature criterion: lower bounds `p(t)` for
//! `inf_ν det(I - t A_ν)`, the vanishing angle of the associated ODE, and the
//! large-dimension scaling bound.
//!
//! The ODE is solved in the variables `t = tan θ`, `g = (r cos θ)^{-k}`:
//!
//! `g' = k (t g - √(p²(1+t²) - g²)) / (1+t²)`, `g(0) = 1`.
//!
//! `g ≡ 1` solves this when `p ≡ 1`, and for general `p` the constant start is
//! a degenerate point of the equation. The relevant solution is the
//! descending germ `g = 1 - a t² + O(t³)`, which we seed at a small `t`.

mod ode;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use ode::{integrate, Control, Options, Outcome};

/// `F(α, t, d) = (1 - tα√((d-1)/d)) (1 + tα/√(d(d-1)))^{d-1}`, the lower
/// bound of `det(I - tA)` over trace-free symmetric `d × d` matrices with
/// `|A| ≤ α`.
pub fn bound_f(alpha: f64, t: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("bound F needs d >= 2, got {d}")));
    }
    if !(t >= 0.0) || !(alpha >= 0.0) {
        return Err(invalid(format!(
            "bound F needs t, alpha >= 0, got t={t}, alpha={alpha}"
        )));
    }
    Ok(bound_f_unchecked(alpha, t, d as f64))
}

fn bound_f_unchecked(alpha: f64, t: f64, d: f64) -> f64 {
    let first = 1.0 - t * alpha * ((d - 1.0) / d).sqrt();
    let second = ((d - 1.0) * (t * alpha / (d * (d - 1.0)).sqrt()).ln_1p()).exp();
    first * second
}

/// `(1 - αt) e^{αt}`, the `d -> ∞` limit of [`bound_f`].
pub fn limit_form(alpha: f64, t: f64) -> f64 {
    (1.0 - alpha * t) * (alpha * t).exp()
}

/// A curvature profile `p(t)` sampled on increasing `ts` starting at 0.
/// `alpha_sq` is the second-order coefficient `p(t) = 1 - alpha_sq t²/2 + O(t³)`.
///
/// Interpolation is linear in the deficit `q(t) = (1 - p(t)) / t²`, with
/// `q(0) = alpha_sq / 2`; interpolating `p` itself would give a spurious
/// first-order term at `t = 0`, where the ODE is most sensitive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TabulatedProfile {
    pub alpha_sq: f64,
    pub ts: Vec<f64>,
    pub ps: Vec<f64>,
    #[serde(skip)]
    qs: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(alpha_sq: f64, ts: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if ts.len() != ps.len() || ts.len() < 2 {
            return Err(invalid(
                "tabulated profile needs matching ts, ps of length >= 2",
            ));
        }
        if ts[0] != 0.0 || ts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated profile ts must start at 0 and increase"));
        }
        if !(alpha_sq >= 0.0) || ps.iter().any(|p| !p.is_finite()) {
            return Err(invalid(
                "tabulated profile values must be finite and alpha_sq >= 0",
            ));
        }
        let qs = ts
            .iter()
            .zip(&ps)
            .map(|(&t, &p)| {
                if t == 0.0 {
                    alpha_sq / 2.0
                } else {
                    (1.0 - p) / (t * t)
                }
            })
            .collect();
        Ok(Self {
            alpha_sq,
            ts,
            ps,
            qs,
        })
    }

    /// `None` beyond the last sample.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let i = self.ts.partition_point(|&x| x <= t);
        if i == 0 {
            return Some(self.ps[0]);
        }
        if i == self.ts.len() {
            return (t == *self.ts.last()?).then(|| *self.ps.last().unwrap());
        }
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let w = (t - t0) / (t1 - t0);
        let q = self.qs[i - 1] * (1.0 - w) + self.qs[i] * w;
        Some(1.0 - q * t * t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Profile {
    /// [`bound_f`] with `d = dim - 1`.
    BoundF,
    /// [`limit_form`].
    Limit,
    /// A numerically computed profile, e.g. from `frames::det_profile`.
    Numeric(TabulatedProfile),
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::BoundF => "bound-f",
            Profile::Limit => "limit",
            Profile::Numeric(_) => "numeric",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingAngleQuery {
    /// Cone dimension `k >= 3`.
    pub dim: usize,
    /// Curvature bound `α >= 0`; ignored by numeric profiles except for validation.
    pub alpha: f64,
    pub profile: Profile,
}

impl VanishingAngleQuery {
    pub fn new(dim: usize, alpha: f64, profile: Profile) -> Result<Self> {
        let q = Self {
            dim,
            alpha,
            profile,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(invalid(format!(
                "cone dimension must be >= 3, got {}",
                self.dim
            )));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(invalid(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    fn kappa(&self) -> f64 {
        match &self.profile {
            Profile::Numeric(tab) => tab.alpha_sq,
            _ => self.alpha * self.alpha,
        }
    }

    fn p(&self, t: f64) -> Option<f64> {
        match &self.profile {
            Profile::BoundF => Some(bound_f_unchecked(self.alpha, t, self.dim as f64 - 1.0)),
            Profile::Limit => Some(limit_form(self.alpha, t)),
            Profile::Numeric(tab) => tab.eval(t),
        }
    }
}

/// Why integration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// `g` reached 0: the vanishing angle exists.
    Vanished,
    /// No descending germ: `(k-2)² < 4α²`.
    NoGerm,
    /// `p²(1+t²) - g²` went negative: `dr/dθ` vanished first.
    RadicandNegative,
    /// `p(t) <= 0` while `g > 0`.
    ProfileZero,
    /// `t` passed `tan(π/2 - 1e-3)` with `g > 0`.
    Horizon,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingAngleResult {
    pub exists: bool,
    pub theta: Option<f64>,
    /// `tan θ` at termination.
    pub t_terminal: f64,
    pub termination: Termination,
    pub steps: usize,
    pub rejected_steps: usize,
    /// Largest accepted local error estimate, in units of the tolerance.
    pub max_step_error: f64,
    pub profile: String,
    /// Accepted states `(t, g, g')` when requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<(f64, f64, f64)>,
}

impl VanishingAngleResult {
    pub fn tan_theta(&self) -> Option<f64> {
        self.theta.map(f64::tan)
    }
}

/// Solver settings.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Perturbations of the germ grow roughly like `t^{k/w}` early on, so the
    /// error in `θ` is a few hundred times `rtol`.
    pub rtol: f64,
    /// Germ seed point.
    pub t_start: f64,
    /// Radicand sign is only trusted past this `t`.
    pub t_warm: f64,
    pub radicand_tol: f64,
    pub event_tol: f64,
    pub record: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            t_start: 1e-5,
            t_warm: 1e-4,
            radicand_tol: 1e-12,
            event_tol: 1e-12,
            record: false,
        }
    }
}

/// `tan(π/2 - 1e-3)`
pub fn horizon() -> f64 {
    (std::f64::consts::FRAC_PI_2 - 1e-3).tan()
}

/// Descending germ coefficient `a` in `g = 1 - a t²`, if it exists.
pub fn germ_coefficient(k: usize, kappa: f64) -> Option<f64> {
    let k = k as f64;
    let disc = (k - 2.0).powi(2) - 4.0 * kappa;
    if disc < 0.0 {
        return None;
    }
    let w = (k + disc.sqrt()) / 2.0;
    Some((w * w - 1.0 + kappa) / 2.0)
}

pub fn vanishing_angle(q: &VanishingAngleQuery) -> Result<VanishingAngleResult> {
    vanishing_angle_with(q, &SolverOptions::default())
}

pub fn vanishing_angle_with(
    q: &VanishingAngleQuery,
    o: &SolverOptions,
) -> Result<VanishingAngleResult> {
    q.validate()?;
    let k = q.dim as f64;
    let base = VanishingAngleResult {
        exists: false,
        theta: None,
        t_terminal: 0.0,
        termination: Termination::NoGerm,
        steps: 0,
        rejected_steps: 0,
        max_step_error: 0.0,
        profile: q.profile.name().to_string(),
        trajectory: Vec::new(),
    };
    let Some(a) = germ_coefficient(q.dim, q.kappa()) else {
        return Ok(base);
    };
    let p = |t: f64| q.p(t).unwrap_or(f64::NAN);
    let radicand = |t: f64, g: f64| {
        let pt = p(t);
        pt * pt * (1.0 + t * t) - g * g
    };
    let rhs = |t: f64, g: f64| k * (t * g - radicand(t, g).max(0.0).sqrt()) / (1.0 + t * t);

    let t_end = match &q.profile {
        Profile::Numeric(tab) => tab.ts.last().copied().unwrap_or(0.0).min(horizon()),
        _ => horizon(),
    };
    let opts = Options {
        rtol: o.rtol,
        atol: o.rtol * 1e-2,
        h0: o.t_start,
        t_end,
        event_tol: o.event_tol,
        max_steps: 1_000_000,
    };
    let monitor = |t: f64, g: f64| {
        if !(p(t) > 0.0) {
            return Control::Stop(Termination::ProfileZero);
        }
        if t > o.t_warm && radicand(t, g) < -o.radicand_tol {
            return Control::Stop(Termination::RadicandNegative);
        }
        Control::Continue
    };
    let mut trajectory = Vec::new();
    let record = |t: f64, g: f64| {
        if o.record {
            trajectory.push((t, g, rhs(t, g)));
        }
    };
    let t0 = o.t_start;
    let (outcome, stats) = integrate(rhs, t0, 1.0 - a * t0 * t0, opts, monitor, record);
    let mut r = VanishingAngleResult {
        steps: stats.steps,
        rejected_steps: stats.rejected,
        max_step_error: stats.max_err,
        ..base
    };
    match outcome {
        Outcome::Root { t } => {
            r.exists = true;
            r.theta = Some(t.atan());
            r.t_terminal = t;
            r.termination = Termination::Vanished;
        }
        Outcome::Stopped { t, reason } => {
            r.t_terminal = t;
            r.termination = reason;
        }
        Outcome::End { t } => {
            if matches!(q.profile, Profile::Numeric(_)) && t < horizon() {
                return Err(Error::SolverFailure {
                    t,
                    steps: stats.steps,
                    reason: "tabulated profile exhausted before g vanished".into(),
                });
            }
            r.t_terminal = t;
            r.termination = Termination::Horizon;
        }
        Outcome::Underflow { t, y } => {
            // The step collapses where the trajectory meets the envelope
            // g = p√(1+t²); that is the radicand dichotomy, not a failure.
            let scale = 1.0 + y * y;
            if radicand(t, y).abs() <= 1e-8 * scale {
                r.t_terminal = t;
                r.termination = Termination::RadicandNegative;
            } else {
                return Err(Error::SolverFailure {
                    t,
                    steps: stats.steps,
                    reason: format!("step size underflow at g = {y}"),
                });
            }
        }
        Outcome::MaxSteps { t } => {
            return Err(Error::SolverFailure {
                t,
                steps: stats.steps,
                reason: "step limit reached".into(),
            });
        }
    }
    r.trajectory = trajectory;
    Ok(r)
}

/// `(12/k) tan θ(12, 12α/k)` with the given profile at dimension 12.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledBound {
    pub k: usize,
    pub alpha: f64,
    pub inner_alpha_sq: f64,
    pub inner: VanishingAngleResult,
    /// Upper bound for `tan θ(k, α)`, present iff the inner angle exists.
    pub tan_bound: Option<f64>,
}

impl ScaledBound {
    pub fn exists(&self) -> bool {
        self.tan_bound.is_some()
    }

    pub fn theta_bound(&self) -> Option<f64> {
        self.tan_bound.map(f64::atan)
    }
}

/// Scaling bound with the limit-form profile at dimension 12.
pub fn scaled_bound(k: usize, alpha: f64) -> Result<ScaledBound> {
    scaled_bound_with(k, alpha, Profile::Limit)
}

pub fn scaled_bound_with(k: usize, alpha: f64, profile: Profile) -> Result<ScaledBound> {
    if k <= 12 {
        return Err(invalid(format!("scaled bound needs k > 12, got {k}")));
    }
    if matches!(profile, Profile::Numeric(_)) {
        return Err(invalid("scaled bound needs an analytic profile"));
    }
    let inner_alpha = 12.0 * alpha / k as f64;
    let inner = vanishing_angle(&VanishingAngleQuery::new(12, inner_alpha, profile)?)?;
    let tan_bound = inner.tan_theta().map(|t| 12.0 / k as f64 * t);
    Ok(ScaledBound {
        k,
        alpha,
        inner_alpha_sq: inner_alpha * inner_alpha,
        inner,
        tan_bound,
    })
}

/// Supremum of `α²` for which the vanishing angle exists at dimension `k`,
/// located by bisection to `tol` between 0 and the germ limit `((k-2)/2)²`.
pub fn existence_threshold(k: usize, profile: Profile, tol: f64) -> Result<f64> {
    let exists = |a2: f64| -> Result<bool> {
        Ok(vanishing_angle(&VanishingAngleQuery::new(k, a2.sqrt(), profile.clone())?)?.exists)
    };
    let (mut lo, mut hi) = (0.0, ((k as f64 - 2.0) / 2.0).powi(2));
    if exists(hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exists(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle(k: usize, a2: f64, profile: Profile) -> VanishingAngleResult {
        vanishing_angle(&VanishingAngleQuery::new(k, a2.sqrt(), profile).unwrap()).unwrap()
    }

    #[test]
    fn bound_f_examples() {
        assert_eq!(bound_f(3.0, 0.0, 5).unwrap(), 1.0);
        let (alpha, d) = (2.5, 7usize);
        let t = 1.0 / (alpha * ((d as f64 - 1.0) / d as f64).sqrt());
        assert!(bound_f(alpha, t, d).unwrap().abs() < 1e-14);
        assert!(bound_f(1.0, 0.1, 1).is_err());
        let mut prev = f64::INFINITY;
        for d in [2, 5, 20, 100, 1000, 100_000] {
            let v = bound_f(3.0, 0.2, d).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((prev - limit_form(3.0, 0.2)).abs() < 1e-3);
    }

    #[test]
    fn dimension_twelve_examples() {
        assert!(!angle(12, 30.0, Profile::BoundF).exists);
        let r = angle(12, 17.85, Profile::Limit);
        assert!(r.exists);
        assert!(r.theta.unwrap() <= (11.23f64 + 0.3).to_radians());
        let r = angle(12, 0.0, Profile::BoundF);
        let th = r.theta.unwrap();
        assert!(th > 0.0 && th < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn matches_reference_values() {
        // independent integration with an off-the-shelf DOP853 solver
        let cases = [
            (0.0, Profile::BoundF, 7.963),
            (17.85, Profile::BoundF, 10.173),
            (19.0, Profile::BoundF, 10.669),
            (17.85, Profile::Limit, 10.446),
            (19.0, Profile::Limit, 11.203),
        ];
        for (a2, prof, deg) in cases {
            let th = angle(12, a2, prof).theta.unwrap().to_degrees();
            assert!((th - deg).abs() < 2e-3, "{a2}: {th}");
        }
    }

    #[test]
    fn branch_equation_holds_along_trajectory() {
        let q = VanishingAngleQuery::new(12, 17.85f64.sqrt(), Profile::BoundF).unwrap();
        let o = SolverOptions {
            record: true,
            ..Default::default()
        };
        let r = vanishing_angle_with(&q, &o).unwrap();
        assert!(r.trajectory.len() > 10);
        let k = 12.0;
        for &(t, g, dg) in &r.trajectory {
            let p = q.p(t).unwrap();
            let lhs = (g - t / k * dg).powi(2) + (dg / k).powi(2);
            assert!((lhs - p * p).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn no_germ_is_immediate() {
        let r = angle(12, 26.0, Profile::Limit);
        assert!(!r.exists);
        assert_eq!(r.termination, Termination::NoGerm);
    }

    #[test]
    fn tabulated_profile_reproduces_analytic() {
        let alpha = 17.85f64.sqrt();
        let ts: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-4).collect();
        let ps = ts.iter().map(|&t| limit_form(alpha, t)).collect();
        let tab = TabulatedProfile::new(17.85, ts, ps).unwrap();
        let a = angle(12, 17.85, Profile::Limit).theta.unwrap();
        let rb = angle(12, 17.85, Profile::Numeric(tab));
        let b = rb.theta.unwrap_or_else(|| panic!("{rb:?}"));
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn scaled_bound_examples() {
        let s = scaled_bound(22, 60f64.sqrt()).unwrap();
        assert!((s.inner_alpha_sq - 60.0 * (12.0f64 / 22.0).powi(2)).abs() < 1e-12);
        let t = s.tan_bound.unwrap();
        assert!(t <= 12.0 / 22.0 * (11.23f64 + 0.3).to_radians().tan());
        assert!(t < 1.2 / 11.0);
        assert!(scaled_bound(24, 0.0).unwrap().tan_bound.unwrap() > 0.0);
        assert!(scaled_bound(12, 1.0).is_err());
    }
}
