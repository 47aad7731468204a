//! Attractor classification from a single initial condition.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::integrate::IntegratorConfig;
use crate::model::{wrap_angle, Pendulum, State};

use super::lyapunov::max_lyapunov;
use super::orbit::{
    snap_rational, strobe_window, Budget, Ratio, StrobeWindow, MAX_PERIOD, SNAP_TOL,
};

/// Distance from the origin below which a settled orbit is the equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;
/// Orbits still inside this radius and shrinking are counted as converging
/// to the equilibrium.
pub const EQUILIBRIUM_BASIN_RADIUS: f64 = 1e-3;
/// Positive-exponent threshold for chaos, per unit `τ`.
pub const CHAOS_THRESHOLD: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttractorClass {
    Equilibrium,
    /// Zero winding, Poincaré period `period`.
    Oscillation {
        period: u32,
    },
    /// Monotone rotation with integer winding `b ≠ 0`.
    Rotation {
        b: i32,
    },
    /// Oscillation-rotation with non-integer rational winding.
    OscillationRotation {
        b: Ratio,
    },
    Chaotic,
    Unresolved,
}

impl AttractorClass {
    /// Image under the odd symmetry `(θ, θ') → (−θ, −θ')`.
    pub fn mirrored(&self) -> Self {
        match *self {
            AttractorClass::Rotation { b } => AttractorClass::Rotation { b: -b },
            AttractorClass::OscillationRotation { b } => {
                AttractorClass::OscillationRotation { b: -b }
            }
            other => other,
        }
    }

    /// Whether the class describes a regular (periodic) attractor.
    pub fn is_regular(&self) -> bool {
        !matches!(self, AttractorClass::Chaotic | AttractorClass::Unresolved)
    }
}

impl fmt::Display for AttractorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorClass::Equilibrium => write!(f, "equilibrium"),
            AttractorClass::Oscillation { period } => write!(f, "oscillation({period})"),
            AttractorClass::Rotation { b } => write!(f, "rotation({b})"),
            AttractorClass::OscillationRotation { b } => write!(f, "oscillation-rotation({b})"),
            AttractorClass::Chaotic => write!(f, "chaotic"),
            AttractorClass::Unresolved => write!(f, "unresolved"),
        }
    }
}

/// Outcome of [`classify_attractor`] with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: AttractorClass,
    /// Snapped winding over the measurement window.
    pub rotation: Option<Ratio>,
    /// Poincaré period, when the settled orbit closes.
    pub period: Option<usize>,
    /// Largest Lyapunov exponent, computed only when no periodic orbit was
    /// found.
    pub lambda_max: Option<f64>,
    /// Wrapped Poincaré points of one cycle (empty unless periodic).
    pub cycle: Vec<(f64, f64)>,
    /// Last stroboscopic state, `θ` unwrapped.
    pub final_state: Option<State>,
    /// Transient periods discarded, including any extension.
    pub settle_periods: usize,
}

impl Classification {
    fn unresolved() -> Self {
        Self {
            class: AttractorClass::Unresolved,
            rotation: None,
            period: None,
            lambda_max: None,
            cycle: Vec::new(),
            final_state: None,
            settle_periods: 0,
        }
    }

    /// Stroboscopic phase mismatch `θ − bτ` of a rotation, as the circular
    /// mean over the settled Poincaré cycle. At `τ = 2πn` the mismatch is
    /// `θ` mod 2π, so this is the mean direction of the cycle points.
    pub fn phase_mismatch(&self) -> Option<f64> {
        if !matches!(self.class, AttractorClass::Rotation { .. }) || self.cycle.is_empty() {
            return None;
        }
        let (s, c) = self
            .cycle
            .iter()
            .fold((0.0, 0.0), |(s, c), &(th, _)| (s + th.sin(), c + th.cos()));
        Some(s.atan2(c))
    }
}

fn origin_distance(s: &State) -> f64 {
    wrap_angle(s.theta).hypot(s.theta_dot)
}

fn converging_to_origin(w: &StrobeWindow) -> bool {
    let n = w.samples.len();
    let last = origin_distance(&w.samples[n - 1]);
    if last < EQUILIBRIUM_TOL {
        return true;
    }
    let lag = (2 * MAX_PERIOD).min(n - 1);
    if lag == 0 {
        return false;
    }
    let tail_max = w.samples[n - 1 - lag..]
        .iter()
        .map(origin_distance)
        .fold(0.0, f64::max);
    let earlier = origin_distance(&w.samples[n - 1 - lag]);
    tail_max < EQUILIBRIUM_BASIN_RADIUS && last < earlier
}

/// At the origin, or on a closed cycle whose winding over the whole window
/// agrees with the winding of the cycle itself (so no transient is left in
/// the window).
fn is_settled(w: &StrobeWindow) -> bool {
    if converging_to_origin(w) {
        return true;
    }
    match (w.poincare_period(), snap_rational(w.mean_winding())) {
        (Some(p), Some(r)) => (r.as_f64() - w.cycle_winding(p)).abs() < SNAP_TOL,
        _ => false,
    }
}

/// Runs the transient and the measurement window, then keeps integrating in
/// window-sized chunks while the orbit has not settled and the extension
/// budget allows. Returns the last window and the transient actually spent.
pub(crate) fn settle(
    pendulum: &Pendulum,
    state0: &State,
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> crate::Result<(StrobeWindow, usize)> {
    let window = budget.window_periods;
    let mut w = strobe_window(pendulum, state0, budget.transient_periods, window, cfg)?;
    let mut extension = 0;
    while !is_settled(&w) && extension + window <= budget.max_extension_periods {
        w = strobe_window(pendulum, &w.last(), 0, window, cfg)?;
        extension += window;
    }
    Ok((w, budget.transient_periods + extension))
}

/// Classifies the long-run behaviour from `state0`:
///
/// 1. settled at the origin → `Equilibrium`;
/// 2. integer winding `b ≠ 0` on a closed Poincaré orbit → `Rotation(b)`;
/// 3. non-integer rational winding on a closed orbit → `OscillationRotation(b)`;
/// 4. zero winding on a closed orbit of period `k` → `Oscillation(k)`;
/// 5. largest Lyapunov exponent above [`CHAOS_THRESHOLD`] → `Chaotic`;
/// 6. otherwise `Unresolved`.
///
/// An orbit that matches none of 1–4 after the transient is integrated for
/// further windows, up to `budget.max_extension_periods`, before the
/// Lyapunov test. Integration failures yield `Unresolved`.
pub fn classify_attractor(
    pendulum: &Pendulum,
    state0: &State,
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> Classification {
    classify_with_window(pendulum, state0, budget, cfg).0
}

/// [`classify_attractor`] that also returns the final measurement window.
pub fn classify_with_window(
    pendulum: &Pendulum,
    state0: &State,
    budget: &Budget,
    cfg: &IntegratorConfig,
) -> (Classification, Option<StrobeWindow>) {
    let Ok((w, settle_periods)) = settle(pendulum, state0, budget, cfg) else {
        return (Classification::unresolved(), None);
    };
    let final_state = w.last();
    let rotation = snap_rational(w.mean_winding());
    let mut out = Classification {
        class: AttractorClass::Unresolved,
        rotation,
        period: None,
        lambda_max: None,
        cycle: Vec::new(),
        final_state: Some(final_state),
        settle_periods,
    };

    if converging_to_origin(&w) {
        out.class = AttractorClass::Equilibrium;
        out.rotation = Some(Ratio::integer(0));
        out.cycle = vec![(0.0, 0.0)];
        return (out, Some(w));
    }

    let period = w.poincare_period();
    if let (Some(r), Some(p)) = (rotation, period) {
        out.period = Some(p);
        out.cycle = w.cycle(p);
        out.class = if r.is_zero() {
            AttractorClass::Oscillation { period: p as u32 }
        } else if r.is_integer() {
            AttractorClass::Rotation { b: r.num }
        } else {
            AttractorClass::OscillationRotation { b: r }
        };
        return (out, Some(w));
    }

    match max_lyapunov(pendulum, &final_state, budget.lyapunov_periods, 0, cfg) {
        Ok(l) => {
            out.lambda_max = Some(l.lambda_max);
            if l.lambda_max > CHAOS_THRESHOLD {
                out.class = AttractorClass::Chaotic;
            }
        }
        Err(_) => out.class = AttractorClass::Unresolved,
    }
    (out, Some(w))
}
