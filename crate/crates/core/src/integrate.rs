//! Adaptive Dormand–Prince 5(4) integration with continuous output.
//!
//! [`Dopri5`] is a resumable stepper: callers advance it to arbitrary times
//! and read states from the 4th-order dense interpolant of the last accepted
//! step, so long stroboscopic runs never restart the integration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Pendulum, State};

const TWO_PI: f64 = 2.0 * PI;

/// Smallest step the controller may request before giving up.
pub const MIN_STEP: f64 = 1e-12;

/// Tolerances and step bounds for [`Dopri5`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::precise()
    }
}

impl IntegratorConfig {
    /// Tolerances used for Floquet and frequency-response verification.
    pub const fn precise() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.5,
            initial_step: 1e-2,
        }
    }

    /// Looser tolerances for grid scans.
    pub const fn scan() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            max_step: 0.5,
            initial_step: 1e-2,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self.abs_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tol_ok = |t: f64| t > 0.0 && t <= 1e-2;
        if !tol_ok(self.rel_tol) || !tol_ok(self.abs_tol) {
            return Err(Error::InvalidParameter(
                "integrator tolerances must lie in (0, 1e-2]".into(),
            ));
        }
        if !(self.max_step > 0.0 && self.max_step <= TWO_PI) {
            return Err(Error::InvalidParameter(
                "max_step must lie in (0, 2*pi]".into(),
            ));
        }
        if !(self.initial_step > 0.0 && self.initial_step <= self.max_step) {
            return Err(Error::InvalidParameter(
                "initial_step must lie in (0, max_step]".into(),
            ));
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output coefficients (Hairer & Wanner, DOPRI5 `contd5`).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step-size controller.
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const MAX_REJECTS: usize = 200;

#[inline]
fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let hc = h * c;
        for i in 0..N {
            out[i] += hc * k[i];
        }
    }
    out
}

/// Resumable embedded Runge–Kutta stepper for `y' = f(t, y)`.
pub struct Dopri5<F, const N: usize> {
    f: F,
    cfg: IntegratorConfig,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    fac_old: f64,
    // Dense output of the last accepted step on [t_prev, t].
    t_prev: f64,
    h_prev: f64,
    cont: [[f64; N]; 5],
    steps: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if !t0.is_finite() || y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { tau: t0 });
        }
        let k1 = f(t0, &y0);
        Ok(Self {
            f,
            cfg,
            t: t0,
            y: y0,
            k1,
            h: cfg.initial_step,
            fac_old: 1e-4,
            t_prev: t0,
            h_prev: 0.0,
            cont: [y0; 5],
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    /// Number of accepted steps so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Replaces the state at the current time, keeping the step-size history.
    /// Invalidates the dense output of the previous step.
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.k1 = (self.f)(self.t, &self.y);
        self.t_prev = self.t;
        self.h_prev = 0.0;
        self.cont = [y; 5];
    }

    /// Takes one accepted step, never passing `t_limit`.
    pub fn step_until(&mut self, t_limit: f64) -> Result<()> {
        let mut rejected = false;
        let mut rejects = 0usize;
        loop {
            let mut h = self.h.min(self.cfg.max_step);
            let remaining = t_limit - self.t;
            let clipped = h >= remaining;
            if clipped {
                h = remaining;
            }
            if h < MIN_STEP && !(clipped && remaining > 0.0) {
                return Err(Error::StepSizeUnderflow {
                    tau: self.t,
                    step: h,
                });
            }

            let (y_new, k7, err, stages) = self.attempt(h);

            if err.is_finite() && err <= 1.0 && y_new.iter().all(|v| v.is_finite()) {
                let fac11 = err.powf(0.2 - PI_BETA * 0.75);
                let mut fac = fac11 / self.fac_old.powf(PI_BETA);
                fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if rejected {
                    h_new = h_new.min(h);
                }
                self.fac_old = err.max(1e-4);
                self.store_dense(h, &y_new, &k7, &stages);
                self.t_prev = self.t;
                self.h_prev = h;
                self.t = if clipped { t_limit } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                // A clipped step says nothing about the natural step size.
                self.h = if clipped { self.h.max(h_new) } else { h_new };
                self.steps += 1;
                return Ok(());
            }

            rejected = true;
            rejects += 1;
            let shrink = if err.is_finite() {
                (err.powf(0.2 - PI_BETA * 0.75) / SAFETY).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            self.h = h / shrink;
            if self.h < MIN_STEP || rejects > MAX_REJECTS {
                if y_new.iter().any(|v| !v.is_finite()) && rejects > MAX_REJECTS {
                    return Err(Error::NonFinite { tau: self.t });
                }
                return Err(Error::StepSizeUnderflow {
                    tau: self.t,
                    step: self.h,
                });
            }
        }
    }

    /// Takes one accepted step of natural size.
    pub fn step(&mut self) -> Result<()> {
        self.step_until(f64::INFINITY)
    }

    #[allow(clippy::type_complexity)]
    fn attempt(&self, h: f64) -> ([f64; N], [f64; N], f64, [[f64; N]; 5]) {
        let (t, y, k1) = (self.t, &self.y, &self.k1);
        let f = &self.f;
        let k2 = f(t + C2 * h, &combine(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &combine(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &combine(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = combine(
            y,
            h,
            &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y_new);

        let mut acc = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            acc += (e / sk) * (e / sk);
        }
        let err = (acc / N as f64).sqrt();
        (y_new, k7, err, [k2, k3, k4, k5, k6])
    }

    fn store_dense(&mut self, h: f64, y_new: &[f64; N], k7: &[f64; N], stages: &[[f64; N]; 5]) {
        let [_k2, k3, k4, k5, k6] = stages;
        let k1 = &self.k1;
        for i in 0..N {
            let ydiff = y_new[i] - self.y[i];
            let bspl = h * k1[i] - ydiff;
            self.cont[0][i] = self.y[i];
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * k7[i] - bspl;
            self.cont[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
    }

    /// Evaluates the dense interpolant of the last step at `t`, which must
    /// lie in `[t_prev, t_current]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        if t == self.t || self.h_prev == 0.0 {
            return self.y;
        }
        debug_assert!(t >= self.t_prev - 1e-12 && t <= self.t + 1e-12);
        let s = (t - self.t_prev) / self.h_prev;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        out
    }

    /// Steps past `t` and returns the interpolated state there.
    pub fn advance_to(&mut self, t: f64) -> Result<[f64; N]> {
        while self.t < t {
            self.step()?;
        }
        Ok(self.interpolate(t))
    }

    /// Steps exactly onto `t`, clipping the final step.
    pub fn land_on(&mut self, t: f64) -> Result<[f64; N]> {
        while self.t < t {
            self.step_until(t)?;
        }
        Ok(self.y)
    }
}

/// Sampled solution of an initial value problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub tau: Vec<f64>,
    pub y: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn last(&self) -> Option<(f64, [f64; N])> {
        Some((*self.tau.last()?, *self.y.last()?))
    }
}

impl Trajectory<2> {
    /// Samples as pendulum states.
    pub fn states(&self) -> Vec<State> {
        self.tau
            .iter()
            .zip(&self.y)
            .map(|(&tau, y)| State::new(y[0], y[1], tau))
            .collect()
    }
}

/// Integrates `y' = f(τ, y)` from `(tau0, y0)` to `tau_end`, recording the
/// initial condition followed by dense-output samples at `sample_taus`.
pub fn integrate_ivp<F, const N: usize>(
    f: F,
    tau0: f64,
    y0: [f64; N],
    tau_end: f64,
    sample_taus: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if tau_end.partial_cmp(&tau0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter(
            "tau_end must exceed the initial time".into(),
        ));
    }
    let mut prev = tau0;
    for &t in sample_taus {
        if !(t > prev && t <= tau_end) {
            return Err(Error::InvalidParameter(
                "sample times must be strictly increasing within (tau0, tau_end]".into(),
            ));
        }
        prev = t;
    }
    let mut solver = Dopri5::new(f, tau0, y0, *cfg)?;
    let mut out = Trajectory {
        tau: vec![tau0],
        y: vec![y0],
    };
    for &t in sample_taus {
        let y = solver.advance_to(t)?;
        out.tau.push(t);
        out.y.push(y);
    }
    solver.advance_to(tau_end)?;
    Ok(out)
}

/// Stroboscopic samples at `tau0 + 2πn`, `n = 0..=n_periods`.
pub fn strobe<F, const N: usize>(
    f: F,
    tau0: f64,
    y0: [f64; N],
    n_periods: usize,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if n_periods < 1 {
        return Err(Error::InvalidParameter("n_periods must be >= 1".into()));
    }
    let mut solver = Dopri5::new(f, tau0, y0, *cfg)?;
    let mut out = Trajectory {
        tau: Vec::with_capacity(n_periods + 1),
        y: Vec::with_capacity(n_periods + 1),
    };
    out.tau.push(tau0);
    out.y.push(y0);
    for n in 1..=n_periods {
        let t = tau0 + TWO_PI * n as f64;
        let y = solver.advance_to(t)?;
        out.tau.push(t);
        out.y.push(y);
    }
    Ok(out)
}

/// Final state, unit tangent, and accumulated `ln ‖δ‖` of a joint
/// state/tangent integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentOutcome {
    pub state: State,
    pub tangent: (f64, f64),
    pub log_growth: f64,
}

/// Propagates the angle equation together with its variational equation
/// from `state0` to `tau_end`. The tangent is renormalized at every
/// excitation period boundary, so arbitrarily long horizons are safe.
pub fn integrate_with_tangent(
    pendulum: &Pendulum,
    state0: &State,
    delta0: (f64, f64),
    tau_end: f64,
    cfg: &IntegratorConfig,
) -> Result<TangentOutcome> {
    let norm0 = delta0.0.hypot(delta0.1);
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "initial tangent must have unit norm".into(),
        ));
    }
    if tau_end.partial_cmp(&state0.tau) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter(
            "tau_end must exceed the initial time".into(),
        ));
    }
    let y0 = [state0.theta, state0.theta_dot, delta0.0, delta0.1];
    let mut solver = Dopri5::new(pendulum.tangent_field(), state0.tau, y0, *cfg)?;
    let mut log_growth = 0.0;
    let mut next = (state0.tau / TWO_PI).floor() * TWO_PI + TWO_PI;
    loop {
        let target = next.min(tau_end);
        let y = solver.land_on(target)?;
        let norm = y[2].hypot(y[3]);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonFinite { tau: target });
        }
        log_growth += norm.ln();
        let y = [y[0], y[1], y[2] / norm, y[3] / norm];
        if target >= tau_end {
            return Ok(TangentOutcome {
                state: State::new(y[0], y[1], tau_end),
                tangent: (y[2], y[3]),
                log_growth,
            });
        }
        solver.reset_state(y);
        next += TWO_PI;
    }
}
