//! Stroboscopic orbits, rotation numbers and Poincaré-section periodicity.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Dopri5, IntegratorConfig};
use crate::model::{wrap_angle, Pendulum, State};

const TWO_PI: f64 = 2.0 * PI;

/// Largest denominator accepted when snapping a rotation number.
pub const MAX_DENOMINATOR: u32 = 4;
/// Snapping tolerance for rotation numbers.
pub const SNAP_TOL: f64 = 1e-3;
/// Largest Poincaré period searched for.
pub const MAX_PERIOD: usize = 8;
/// Closure tolerance of a periodic Poincaré orbit.
pub const CLOSURE_TOL: f64 = 1e-5;

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i32,
    pub den: u32,
}

impl Ratio {
    pub fn new(num: i32, den: u32) -> Self {
        assert!(den > 0, "denominator must be positive");
        let g = gcd(num.unsigned_abs(), den).max(1);
        Self {
            num: num / g as i32,
            den: den / g,
        }
    }

    pub fn integer(n: i32) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::ops::Neg for Ratio {
    type Output = Ratio;

    fn neg(self) -> Ratio {
        Ratio {
            num: -self.num,
            den: self.den,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Snaps `x` to the nearest `p/q` with `q ≤ MAX_DENOMINATOR`, preferring
/// the smallest denominator, if within [`SNAP_TOL`].
pub fn snap_rational(x: f64) -> Option<Ratio> {
    if !x.is_finite() {
        return None;
    }
    (1..=MAX_DENOMINATOR).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() < SNAP_TOL).then(|| Ratio::new(p as i32, q))
    })
}

/// Period budgets for long-run diagnostics, in excitation periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub transient_periods: usize,
    pub window_periods: usize,
    pub lyapunov_periods: usize,
    /// Extra periods the classifier may spend, in window-sized chunks, on an
    /// orbit that has not yet settled (long chaotic transients).
    #[serde(default)]
    pub max_extension_periods: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            transient_periods: 300,
            window_periods: 500,
            lyapunov_periods: 2000,
            max_extension_periods: DEFAULT_EXTENSION_PERIODS,
        }
    }
}

impl Budget {
    /// Window and Lyapunov lengths must meet the minimums of
    /// [`rotation_number`] and [`max_lyapunov`](super::max_lyapunov).
    pub fn validate(&self) -> Result<()> {
        if self.window_periods < MIN_WINDOW_PERIODS {
            return Err(Error::InvalidParameter(format!(
                "budget window must be >= {MIN_WINDOW_PERIODS} periods"
            )));
        }
        if self.lyapunov_periods < super::MIN_LYAPUNOV_PERIODS {
            return Err(Error::InvalidParameter(format!(
                "budget Lyapunov length must be >= {} periods",
                super::MIN_LYAPUNOV_PERIODS
            )));
        }
        Ok(())
    }
}

/// Minimum measurement window of [`rotation_number`].
pub const MIN_WINDOW_PERIODS: usize = 200;
/// Minimum transient of [`rotation_number`].
pub const MIN_TRANSIENT_PERIODS: usize = 300;

/// Default cap on transient extension, in excitation periods.
pub const DEFAULT_EXTENSION_PERIODS: usize = 5000;

/// Stroboscopic samples of a settled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StrobeWindow {
    /// Samples at `τ0 + 2π(transient + n)`, `n = 0..=window`, with `θ`
    /// unwrapped.
    pub samples: Vec<State>,
}

impl StrobeWindow {
    pub fn last(&self) -> State {
        *self.samples.last().expect("window is never empty")
    }

    /// Mean winding per excitation period over the window.
    pub fn mean_winding(&self) -> f64 {
        let first = self.samples[0];
        let last = self.last();
        (last.theta - first.theta) / (TWO_PI * (self.samples.len() - 1) as f64)
    }

    /// Smallest `p ≤ MAX_PERIOD` such that the Poincaré map closes after
    /// `p` iterations (angles compared modulo 2π) on the tail of the window.
    pub fn poincare_period(&self) -> Option<usize> {
        let n = self.samples.len();
        // Check closure on the last 2·MAX_PERIOD + p samples.
        (1..=MAX_PERIOD).find(|&p| {
            let span = (2 * MAX_PERIOD).min(n.saturating_sub(p));
            if span == 0 {
                return false;
            }
            (n - p - span..n - p).all(|i| {
                let a = &self.samples[i];
                let b = &self.samples[i + p];
                let dth = wrap_angle(b.theta - a.theta);
                dth.hypot(b.theta_dot - a.theta_dot) < CLOSURE_TOL
            })
        })
    }

    /// Winding per period over the last `p` periods; exact for an orbit of
    /// period `p`.
    pub fn cycle_winding(&self, p: usize) -> f64 {
        let n = self.samples.len();
        (self.samples[n - 1].theta - self.samples[n - 1 - p].theta) / (TWO_PI * p as f64)
    }

    /// The last `p` samples as wrapped Poincaré points.
    pub fn cycle(&self, p: usize) -> Vec<(f64, f64)> {
        self.samples[self.samples.len() - p..]
            .iter()
            .map(|s| (wrap_angle(s.theta), s.theta_dot))
            .collect()
    }
}

fn check_state(state0: &State) -> Result<()> {
    if !state0.is_finite() {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    Ok(())
}

/// Integrates `transient_periods` and then records `window_periods + 1`
/// stroboscopic samples.
pub fn strobe_window(
    pendulum: &Pendulum,
    state0: &State,
    transient_periods: usize,
    window_periods: usize,
    cfg: &IntegratorConfig,
) -> Result<StrobeWindow> {
    check_state(state0)?;
    if window_periods < 1 {
        return Err(Error::InvalidParameter(
            "window must span at least one period".into(),
        ));
    }
    let mut solver = Dopri5::new(pendulum.theta_field(), state0.tau, state0.as_array(), *cfg)?;
    let at = |n: usize| state0.tau + TWO_PI * n as f64;
    let mut samples = Vec::with_capacity(window_periods + 1);
    let first = if transient_periods == 0 {
        state0.as_array()
    } else {
        solver.advance_to(at(transient_periods))?
    };
    samples.push(State::new(first[0], first[1], at(transient_periods)));
    for n in 1..=window_periods {
        let t = at(transient_periods + n);
        let y = solver.advance_to(t)?;
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::NonFinite { tau: t });
        }
        samples.push(State::new(y[0], y[1], t));
    }
    Ok(StrobeWindow { samples })
}

/// Average angular velocity in units of the excitation frequency, snapped
/// to a rational with denominator at most 4; `None` when not resonant.
pub fn rotation_number(
    pendulum: &Pendulum,
    state0: &State,
    window_periods: usize,
    transient_periods: usize,
    cfg: &IntegratorConfig,
) -> Result<Option<Ratio>> {
    if window_periods < MIN_WINDOW_PERIODS || transient_periods < MIN_TRANSIENT_PERIODS {
        return Err(Error::InvalidParameter(format!(
            "rotation number needs window >= {MIN_WINDOW_PERIODS} and transient >= \
             {MIN_TRANSIENT_PERIODS} periods"
        )));
    }
    let w = strobe_window(pendulum, state0, transient_periods, window_periods, cfg)?;
    Ok(snap_rational(w.mean_winding()))
}

/// Stroboscopic Poincaré section after a transient: `n_points` samples with
/// `θ` wrapped to `(−π, π]`.
pub fn poincare_map(
    pendulum: &Pendulum,
    state0: &State,
    n_points: usize,
    transient_periods: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, f64)>> {
    if n_points < 1 {
        return Err(Error::InvalidParameter("n_points must be >= 1".into()));
    }
    if n_points == 1 {
        let w = strobe_window(pendulum, state0, transient_periods, 1, cfg)?;
        let s = w.samples[0];
        return Ok(vec![(wrap_angle(s.theta), s.theta_dot)]);
    }
    let w = strobe_window(pendulum, state0, transient_periods, n_points - 1, cfg)?;
    Ok(w.samples
        .iter()
        .map(|s| (wrap_angle(s.theta), s.theta_dot))
        .collect())
}
