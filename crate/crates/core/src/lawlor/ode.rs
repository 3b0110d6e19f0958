//! Scalar Dormand-Prince 5(4) integrator with a root event on `y = 0`.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One step of size `h`; returns the fifth-order value and the embedded
/// error estimate `y5 - y4`.
pub(crate) fn dp_step(f: &impl Fn(f64, f64) -> f64, t: f64, y: f64, h: f64) -> (f64, f64) {
    let mut k = [0.0; 7];
    for i in 0..7 {
        let yi = y + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
        k[i] = f(t + C[i] * h, yi);
    }
    let y5 = y + h * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
    let y4 = y + h * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
    (y5, y5 - y4)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub t_end: f64,
    pub event_tol: f64,
    pub max_steps: usize,
}

/// What the caller's monitor decides after each accepted step.
pub(crate) enum Control<R> {
    Continue,
    Stop(R),
}

pub(crate) enum Outcome<R> {
    /// `y` crossed zero at `t`.
    Root {
        t: f64,
    },
    /// The monitor stopped integration at the accepted state `t`.
    Stopped {
        t: f64,
        reason: R,
    },
    /// Reached `t_end` with `y > 0`.
    End {
        t: f64,
    },
    /// Step size collapsed at `t`.
    Underflow {
        t: f64,
        y: f64,
    },
    MaxSteps {
        t: f64,
    },
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Stats {
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted scaled local error estimate.
    pub max_err: f64,
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` with `y0 > 0` until `y` reaches
/// zero, the monitor stops, or `t_end`. Accepted states go to `record`.
pub(crate) fn integrate<R>(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    y0: f64,
    opts: Options,
    mut monitor: impl FnMut(f64, f64) -> Control<R>,
    mut record: impl FnMut(f64, f64),
) -> (Outcome<R>, Stats) {
    let mut stats = Stats::default();
    let (mut t, mut y) = (t0, y0);
    let mut h = opts.h0;
    record(t, y);
    loop {
        if stats.steps >= opts.max_steps {
            return (Outcome::MaxSteps { t }, stats);
        }
        if t >= opts.t_end {
            return (Outcome::End { t }, stats);
        }
        h = h.min(opts.t_end - t);
        if h < 1e-14 * t.max(1e-3) {
            return (Outcome::Underflow { t, y }, stats);
        }
        let (yn, err) = dp_step(&f, t, y, h);
        let scale = opts.atol + opts.rtol * y.abs().max(yn.abs());
        let e = (err / scale).abs();
        if !yn.is_finite() || e > 1.0 {
            stats.rejected += 1;
            let factor = if e.is_finite() {
                (0.9 * e.powf(-0.2)).clamp(0.1, 0.5)
            } else {
                0.1
            };
            h *= factor;
            continue;
        }
        stats.steps += 1;
        stats.max_err = stats.max_err.max(e);
        if yn <= 0.0 {
            // bisect on the step length from the last accepted state
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > opts.event_tol {
                let mid = 0.5 * (lo + hi);
                if dp_step(&f, t, y, mid).0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let root = t + 0.5 * (lo + hi);
            record(root, 0.0);
            return (Outcome::Root { t: root }, stats);
        }
        t += h;
        y = yn;
        record(t, y);
        if let Control::Stop(reason) = monitor(t, y) {
            return (Outcome::Stopped { t, reason }, stats);
        }
        let factor = if e > 0.0 {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> Options {
        Options {
            rtol: 1e-10,
            atol: 1e-12,
            h0: 1e-3,
            t_end: 10.0,
            event_tol: 1e-13,
            max_steps: 100_000,
        }
    }

    #[test]
    fn finds_root_of_linear_decay() {
        // y' = -1, y(0) = 0.75: root at 0.75
        let (out, _) = integrate(
            |_, _| -1.0,
            0.0,
            0.75,
            opts(),
            |_, _| Control::<()>::Continue,
            |_, _| {},
        );
        match out {
            Outcome::Root { t } => assert!((t - 0.75).abs() < 1e-12),
            _ => panic!("no root"),
        }
    }

    #[test]
    fn cosine_root_is_pi_over_two() {
        // y = cos t solves y' = -sqrt(1 - y^2) on [0, π]
        let f = |_: f64, y: f64| -(1.0 - y * y).max(0.0).sqrt();
        let (out, stats) = integrate(
            f,
            0.5,
            0.5f64.cos(),
            opts(),
            |_, _| Control::<()>::Continue,
            |_, _| {},
        );
        match out {
            Outcome::Root { t } => assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{t}"),
            _ => panic!("no root"),
        }
        assert!(stats.steps > 0);
    }

    #[test]
    fn exponential_accuracy() {
        let mut last = (0.0, 0.0);
        let o = Options {
            t_end: 2.0,
            ..opts()
        };
        let (out, _) = integrate(
            |_, y| 0.5 * y,
            0.0,
            1.0,
            o,
            |_, _| Control::<()>::Continue,
            |t, y| last = (t, y),
        );
        assert!(matches!(out, Outcome::End { .. }));
        assert!((last.1 - 1f64.exp()).abs() < 1e-8);
    }
}
