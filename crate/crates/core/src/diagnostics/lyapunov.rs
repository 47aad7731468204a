//! Maximal Lyapunov exponent of the stroboscopic flow (Benettin method).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate_with_tangent, Dopri5, IntegratorConfig};
use crate::model::{Pendulum, State};

const TWO_PI: f64 = 2.0 * PI;

/// Minimum accumulation length accepted by [`max_lyapunov`].
pub const MIN_LYAPUNOV_PERIODS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Largest exponent per unit `τ`.
    pub lambda_max: f64,
    pub n_periods: usize,
    pub transient_periods: usize,
    /// State at the end of the accumulation.
    pub final_state: State,
}

/// Largest Lyapunov exponent along the trajectory from `state0`.
///
/// The tangent vector starts along `(1, 1)/√2`, is propagated jointly with
/// the state and renormalized every excitation period; the exponent is the
/// accumulated log-growth divided by `2π·n_periods`.
pub fn max_lyapunov(
    pendulum: &Pendulum,
    state0: &State,
    n_periods: usize,
    transient_periods: usize,
    cfg: &IntegratorConfig,
) -> Result<LyapunovResult> {
    if n_periods < MIN_LYAPUNOV_PERIODS {
        return Err(Error::InvalidParameter(format!(
            "Lyapunov accumulation needs at least {MIN_LYAPUNOV_PERIODS} periods"
        )));
    }
    if !state0.is_finite() {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    let start = if transient_periods > 0 {
        let mut solver = Dopri5::new(pendulum.theta_field(), state0.tau, state0.as_array(), *cfg)?;
        let t = state0.tau + TWO_PI * transient_periods as f64;
        let y = solver.advance_to(t)?;
        State::new(y[0], y[1], t)
    } else {
        *state0
    };
    let horizon = TWO_PI * n_periods as f64;
    let d = std::f64::consts::FRAC_1_SQRT_2;
    let out = integrate_with_tangent(pendulum, &start, (d, d), start.tau + horizon, cfg)?;
    let lambda_max = out.log_growth / horizon;
    if !lambda_max.is_finite() {
        return Err(Error::NonFinite { tau: out.state.tau });
    }
    Ok(LyapunovResult {
        lambda_max,
        n_periods,
        transient_periods,
        final_state: out.state,
    })
}
