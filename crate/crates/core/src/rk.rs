//! Embedded Dormand–Prince 5(4) integrator with dense output.
//!
//! Shared by the warping-function ODE and the gradient-flow integration. The
//! caller drives event handling through the per-step callback, which sees
//! both step endpoints and their derivatives; cubic Hermite interpolation on
//! a step provides dense output for event localization.

use crate::error::{GeomError, Result};

#[derive(Clone, Copy, Debug)]
pub struct Rk45Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Rk45Options {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 0.25,
            max_steps: 200_000,
        }
    }
}

/// One accepted step with endpoint derivatives.
#[derive(Clone, Debug)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
}

impl Step {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Cubic Hermite interpolation at fraction `theta ∈ [0, 1]` of the step.
    pub fn interpolate(&self, theta: f64, component: usize) -> f64 {
        let h = self.h();
        let (y0, y1) = (self.y0[component], self.y1[component]);
        let (d0, d1) = (self.f0[component] * h, self.f1[component] * h);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + theta)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct RkStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const A: [[f64; 6]; 6] = [
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
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` toward `t_end` (either direction).
///
/// The callback receives every accepted step and can stop the run; the final
/// state is whatever the last accepted step produced.
pub fn integrate<F, G>(
    f: F,
    t0: f64,
    y0: Vec<f64>,
    t_end: f64,
    opts: &Rk45Options,
    mut on_step: G,
) -> Result<RkStats>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    G: FnMut(&Step) -> StepOutcome,
{
    let dim = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok(RkStats::default());
    }

    let mut stats = RkStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.rhs_evals += 1;
    let mut h = opts.h_init.min(opts.h_max).min(span) * dir;

    let mut k = vec![vec![0.0; dim]; 7];
    while (t - t_end) * dir < 0.0 {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(GeomError::StepSizeCollapse { t, h: h.abs() });
        }
        // do not step past the end
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(GeomError::StepSizeCollapse { t, h: h.abs() });
        }

        k[0].clone_from(&k1);
        for s in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..dim {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s + 1] = f(t + C[s] * h, &ys);
            stats.rhs_evals += 1;
        }
        // 5th-order solution is the last stage state (FSAL construction)
        let mut y1 = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[5][j];
            if a != 0.0 {
                for i in 0..dim {
                    y1[i] += h * a * kj[i];
                }
            }
        }

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / dim as f64).sqrt();

        if err <= 1.0 {
            let step = Step {
                t0: t,
                t1: t + h,
                y0: std::mem::take(&mut y),
                y1: y1.clone(),
                f0: k[0].clone(),
                f1: k[6].clone(),
            };
            stats.accepted += 1;
            t += h;
            y = y1;
            k1 = k[6].clone();
            let outcome = on_step(&step);
            if outcome == StepOutcome::Stop {
                break;
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * factor).clamp(-opts.h_max, opts.h_max);
            if h == 0.0 {
                h = 1e-12 * dir;
            }
        } else {
            stats.rejected += 1;
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_growth_to_high_accuracy() {
        let mut y_end = 0.0;
        integrate(
            |_, y| vec![y[0]],
            0.0,
            vec![1.0],
            2.0,
            &Rk45Options::default(),
            |s| {
                y_end = s.y1[0];
                StepOutcome::Continue
            },
        )
        .unwrap();
        assert_abs_diff_eq!(y_end, 2f64.exp(), epsilon = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_backward() {
        let mut y_end = vec![0.0, 0.0];
        integrate(
            |_, y| vec![y[1], -y[0]],
            0.0,
            vec![1.0, 0.0],
            -3.0,
            &Rk45Options::default(),
            |s| {
                y_end = s.y1.clone();
                StepOutcome::Continue
            },
        )
        .unwrap();
        assert_abs_diff_eq!(y_end[0], 3f64.cos(), epsilon = 1e-9);
        assert_abs_diff_eq!(y_end[1], 3f64.sin(), epsilon = 1e-9);
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        integrate(
            |t, _| vec![t.cos()],
            0.0,
            vec![0.0],
            3.0,
            &Rk45Options {
                h_max: 0.5,
                ..Default::default()
            },
            |s| {
                for &theta in &[0.25, 0.5, 0.75] {
                    let t = s.t0 + theta * s.h();
                    let v = s.interpolate(theta, 0);
                    assert!((v - t.sin()).abs() < 1e-6, "dense output off at t={t}");
                }
                StepOutcome::Continue
            },
        )
        .unwrap();
    }
}
