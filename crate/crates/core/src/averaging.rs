//! Averaging-method predictions for `φ = cos τ`.
//!
//! * Oscillation near the first resonance: slow amplitude/phase flow of the
//!   ansatz `q = a cos(τ/2 + ψ)` and the transcendental frequency-response
//!   relation for the limit-cycle amplitude `Q`.
//! * Regular rotations with `|b| = 1` and `|b| = 2`: averaged equations for
//!   the phase mismatch `X1 = θ − bτ` and velocity `X2`, their existence
//!   boundaries, and their steady phases.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fmt_sig, linspace};
use crate::model::{wrap_angle, DimensionlessParams};

/// Upper end of the amplitude search interval `(0, π]`.
pub const Q_MAX: f64 = PI;
/// Number of bracketing intervals on the amplitude grid.
pub const Q_GRID: usize = 400;
/// Bisection stops once the bracket is narrower than this.
pub const Q_TOL: f64 = 1e-10;
/// Step of the central difference used for branch stability.
pub const FD_STEP: f64 = 1e-6;

/// Slow variables of the oscillation ansatz (or their averaged values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowState {
    pub amplitude: f64,
    pub phase: f64,
}

/// Small right-hand side of `q'' + ω² q = f(q, q', τ)` for `φ = cos τ`.
fn forcing(q: f64, q_dot: f64, tau: f64, params: &DimensionlessParams) -> f64 {
    let DimensionlessParams {
        epsilon,
        beta,
        omega,
    } = *params;
    let w2 = omega * omega;
    // φ'' + ω²φ = (ω² − 1) cos τ
    let q3 = q * q * q;
    epsilon * (w2 - 1.0) * tau.cos() * q + w2 * (q3 / 6.0 - q3 * q * q / 120.0)
        - beta * omega * q_dot
}

/// Slow-flow right-hand side `(a', ψ')` before averaging.
pub fn slow_flow_rhs(
    slow: &SlowState,
    tau: f64,
    params: &DimensionlessParams,
) -> Result<(f64, f64)> {
    let SlowState {
        amplitude: a,
        phase: psi,
    } = *slow;
    if a == 0.0 {
        return Err(Error::DivisionByZero);
    }
    if a < 0.0 {
        return Err(Error::InvalidParameter(
            "slow amplitude must be >= 0".into(),
        ));
    }
    let omega = params.omega;
    let (s, c) = (0.5 * tau + psi).sin_cos();
    let f = forcing(a * c, -a * omega * s, tau, params);
    Ok((-s / omega * f, omega - 0.5 - c / (a * omega) * f))
}

/// Slow flow averaged over the `4π` period of the ansatz, by the trapezoid
/// rule (exact for the trigonometric polynomials involved).
pub fn averaged_slow_flow(slow: &SlowState, params: &DimensionlessParams) -> Result<(f64, f64)> {
    const NODES: usize = 128;
    let h = 4.0 * PI / NODES as f64;
    let (mut da, mut dpsi) = (0.0, 0.0);
    for j in 0..NODES {
        let (x, y) = slow_flow_rhs(slow, h * j as f64, params)?;
        da += x;
        dpsi += y;
    }
    Ok((da / NODES as f64, dpsi / NODES as f64))
}

/// Central-difference Jacobian of [`averaged_slow_flow`] in `(a, ψ)`.
pub fn averaged_slow_flow_jacobian(
    slow: &SlowState,
    params: &DimensionlessParams,
) -> Result<[[f64; 2]; 2]> {
    let h = FD_STEP;
    let eval = |a: f64, psi: f64| {
        averaged_slow_flow(
            &SlowState {
                amplitude: a,
                phase: psi,
            },
            params,
        )
    };
    let (ap, am) = (
        eval(slow.amplitude + h, slow.phase)?,
        eval(slow.amplitude - h, slow.phase)?,
    );
    let (pp, pm) = (
        eval(slow.amplitude, slow.phase + h)?,
        eval(slow.amplitude, slow.phase - h)?,
    );
    Ok([
        [(ap.0 - am.0) / (2.0 * h), (pp.0 - pm.0) / (2.0 * h)],
        [(ap.1 - am.1) / (2.0 * h), (pp.1 - pm.1) / (2.0 * h)],
    ])
}

/// `LHS(Q, ω, β) − ε²` of the frequency-response relation
///
/// ```text
/// β²ω² / (1 − ω²(1 − Q²/12 + Q⁴/384))²
///   + (½ − 2ω²(1 − Q²/8 + Q⁴/192))² / (1 − ω²(1 − Q²/6 + Q⁴/128))²  = ε².
/// ```
pub fn response_residual(q: f64, params: &DimensionlessParams) -> Result<f64> {
    if q < 0.0 {
        return Err(Error::InvalidParameter("amplitude Q must be >= 0".into()));
    }
    let DimensionlessParams {
        epsilon,
        beta,
        omega,
    } = *params;
    let w2 = omega * omega;
    let q2 = q * q;
    let q4 = q2 * q2;
    let den1 = 1.0 - w2 * (1.0 - q2 / 12.0 + q4 / 384.0);
    let num2 = 0.5 - 2.0 * w2 * (1.0 - q2 / 8.0 + q4 / 192.0);
    let den2 = 1.0 - w2 * (1.0 - q2 / 6.0 + q4 / 128.0);
    if den1.abs() < 1e-14 || den2.abs() < 1e-14 {
        return Err(Error::PoleAtDenominator { q, omega });
    }
    let lhs = (beta * omega / den1).powi(2) + (num2 / den2).powi(2);
    Ok(lhs - epsilon * epsilon)
}

/// A limit-cycle amplitude on the frequency-response curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    pub omega: f64,
    pub q: f64,
    pub stable: bool,
}

/// A root is stable when the residual increases through it, i.e. the
/// averaged flow sharing these steady states has a positive Jacobian
/// determinant (its trace is always negative).
fn branch_is_stable(q: f64, params: &DimensionlessParams) -> bool {
    let h = FD_STEP.min(0.5 * q);
    match (
        response_residual(q + h, params),
        response_residual(q - h, params),
    ) {
        (Ok(up), Ok(down)) => up - down > 0.0,
        _ => false,
    }
}

/// All nontrivial roots `Q ∈ (0, π]` of the frequency-response relation at
/// one frequency, in increasing order.
pub fn response_roots(omega: f64, epsilon: f64, beta: f64) -> Result<Vec<ResponsePoint>> {
    let params = DimensionlessParams::new(epsilon, beta, omega)?;
    let res = |q: f64| response_residual(q, &params).ok();
    let grid: Vec<f64> = (1..=Q_GRID)
        .map(|i| Q_MAX * i as f64 / Q_GRID as f64)
        .collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (Some(mut flo), Some(fhi)) = (res(lo), res(hi)) else {
            continue;
        };
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        while hi - lo > Q_TOL {
            let mid = 0.5 * (lo + hi);
            let Some(fm) = res(mid) else { break };
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let q = 0.5 * (lo + hi);
        // Sign changes across a pole are not roots.
        if res(q).is_some_and(|r| r.abs() < 1e-10) {
            roots.push(q);
        }
    }
    if let Some(&last) = grid.last() {
        if res(last) == Some(0.0) && roots.last() != Some(&last) {
            roots.push(last);
        }
    }
    Ok(roots
        .into_iter()
        .map(|q| ResponsePoint {
            omega,
            q,
            stable: branch_is_stable(q, &params),
        })
        .collect())
}

/// Frequency-response curve on `n_points` evenly spaced frequencies of
/// `[omega_lo, omega_hi]`, computed in parallel and returned in frequency
/// order.
pub fn response_curve(
    omega_lo: f64,
    omega_hi: f64,
    n_points: usize,
    epsilon: f64,
    beta: f64,
) -> Result<Vec<ResponsePoint>> {
    if !(omega_lo > 0.0 && omega_hi < 1.0 && omega_lo <= omega_hi) {
        return Err(Error::InvalidParameter(
            "omega range must lie within (0, 1)".into(),
        ));
    }
    DimensionlessParams::new(epsilon, beta, omega_lo)?;
    let omegas = linspace(omega_lo, omega_hi, n_points);
    let per_omega: Result<Vec<Vec<ResponsePoint>>> = omegas
        .par_iter()
        .map(|&w| response_roots(w, epsilon, beta))
        .collect();
    Ok(per_omega?.into_iter().flatten().collect())
}

/// Writes `omega,Q,stable` rows.
pub fn write_response_csv<W: Write>(points: &[ResponsePoint], mut w: W) -> io::Result<()> {
    writeln!(w, "omega,Q,stable")?;
    for p in points {
        writeln!(
            w,
            "{},{},{}",
            fmt_sig(p.omega),
            fmt_sig(p.q),
            u8::from(p.stable)
        )?;
    }
    Ok(())
}

fn check_b_abs(b_abs: u32) -> Result<()> {
    match b_abs {
        1 | 2 => Ok(()),
        _ => Err(Error::InvalidParameter(format!(
            "rotation predictors exist only for |b| in {{1, 2}}, got {b_abs}"
        ))),
    }
}

/// `sin X1` magnitude required by the steady rotation, per unit `|b|`-sign.
fn rotation_sine(b_abs: u32, params: &DimensionlessParams) -> f64 {
    let DimensionlessParams {
        epsilon,
        beta,
        omega,
    } = *params;
    match b_abs {
        1 => 2.0 * beta / (3.0 * epsilon * omega),
        _ => 8.0 * beta / (9.0 * epsilon * epsilon * omega) / (1.0 + epsilon * epsilon / 27.0),
    }
}

/// Minimum `ω` for which a steady rotation with the given `|b|` exists:
/// `2β/(3ε)` for `|b| = 1`, `(8β/(9ε²))/(1 + ε²/27)` for `|b| = 2`.
pub fn rotation_threshold(b_abs: u32, epsilon: f64, beta: f64) -> Result<f64> {
    check_b_abs(b_abs)?;
    if epsilon <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(match b_abs {
        1 => 2.0 * beta / (3.0 * epsilon),
        _ => 8.0 * beta / (9.0 * epsilon * epsilon) / (1.0 + epsilon * epsilon / 27.0),
    })
}

/// Existence of steady rotations with `|b| ∈ {1, 2}`.
pub fn rotation_exists(b_abs: u32, params: &DimensionlessParams) -> Result<bool> {
    let threshold = rotation_threshold(b_abs, params.epsilon, params.beta)?;
    Ok(params.epsilon > 0.0 && params.omega >= threshold)
}

/// Steady phase mismatches of the rotation `θ ≈ bτ + X1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSteady {
    pub b: i32,
    pub exists: bool,
    /// Asymptotically stable phase, wrapped to `(−π, π]`.
    pub x1_stable: f64,
    /// Unstable phase, wrapped to `(−π, π]`.
    pub x1_unstable: f64,
}

impl RotationSteady {
    /// Steady averaged velocity `X2 = dθ/ds = sign(b)` in the scaled time
    /// `s = |b|τ`.
    pub fn x2(&self) -> f64 {
        self.b.signum() as f64
    }
}

/// Steady rotation phases on the principal branch:
/// `X1 = −arcsin(b·s)`, `X1' = π + arcsin(b·s)` with `s` from
/// [`rotation_sine`] (the `|b| = 2` argument carries `b` itself).
pub fn rotation_steady(b: i32, params: &DimensionlessParams) -> Result<RotationSteady> {
    let b_abs = b.unsigned_abs();
    check_b_abs(b_abs)?;
    if !rotation_exists(b_abs, params)? {
        return Err(Error::NotExists { b_abs });
    }
    let arg = (b.signum() as f64 * rotation_sine(b_abs, params)).clamp(-1.0, 1.0);
    let x1 = arg.asin();
    Ok(RotationSteady {
        b,
        exists: true,
        x1_stable: wrap_angle(-x1),
        x1_unstable: wrap_angle(PI + x1),
    })
}

/// Stability of a steady phase mismatch: `cos X1 > 0`.
pub fn rotation_is_stable(x1: f64) -> bool {
    x1.cos() > 1e-15
}

/// Averaged rotation equations `(X1', X2')` in the scaled time `s = |b|τ`.
pub fn averaged_rotation_rhs(
    b: i32,
    x: (f64, f64),
    params: &DimensionlessParams,
) -> Result<(f64, f64)> {
    let DimensionlessParams {
        epsilon,
        beta,
        omega,
    } = *params;
    let (x1, x2) = x;
    let bf = b as f64;
    match b.unsigned_abs() {
        1 => Ok((
            x2 - bf,
            -1.5 * epsilon * omega * omega * x1.sin() - beta * omega * x2,
        )),
        2 => {
            let slip = x2 - 0.5 * bf;
            let e2 = epsilon * epsilon;
            Ok((
                slip,
                -(9.0 * e2 * omega * omega / 16.0) * (1.0 - slip * slip + e2 / 27.0) * x1.sin()
                    - 0.5 * beta * omega * x2,
            ))
        }
        other => check_b_abs(other).map(|_| unreachable!()),
    }
}

/// Central-difference Jacobian of [`averaged_rotation_rhs`].
pub fn averaged_rotation_jacobian(
    b: i32,
    x: (f64, f64),
    params: &DimensionlessParams,
) -> Result<[[f64; 2]; 2]> {
    let h = FD_STEP;
    let f = |a: f64, c: f64| averaged_rotation_rhs(b, (a, c), params);
    let (p1, m1) = (f(x.0 + h, x.1)?, f(x.0 - h, x.1)?);
    let (p2, m2) = (f(x.0, x.1 + h)?, f(x.0, x.1 - h)?);
    Ok([
        [(p1.0 - m1.0) / (2.0 * h), (p2.0 - m2.0) / (2.0 * h)],
        [(p1.1 - m1.1) / (2.0 * h), (p2.1 - m2.1) / (2.0 * h)],
    ])
}

/// Largest real part of the eigenvalues of a real 2×2 matrix.
pub fn max_real_eigenvalue(m: &[[f64; 2]; 2]) -> f64 {
    let half = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = half * half - det;
    if disc >= 0.0 {
        half + disc.sqrt()
    } else {
        half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(e: f64, b: f64, w: f64) -> DimensionlessParams {
        DimensionlessParams::new(e, b, w).unwrap()
    }

    #[test]
    fn slow_flow_detuning_only() {
        // With ε = β = 0 only the nonlinearity remains; at tiny amplitude it
        // is negligible and the phase drifts at ω − 1/2.
        let params = p(0.0, 0.0, 0.53);
        let (da, dpsi) = slow_flow_rhs(
            &SlowState {
                amplitude: 1e-6,
                phase: 0.4,
            },
            1.3,
            &params,
        )
        .unwrap();
        assert_abs_diff_eq!(da, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dpsi, 0.03, epsilon = 1e-11);
    }

    #[test]
    fn slow_flow_is_small() {
        let params = p(0.04, 0.05, 0.5);
        for j in 0..64 {
            let tau = 4.0 * PI * j as f64 / 64.0;
            for &psi in &[0.0, 0.7, 2.0, -1.1] {
                let (da, dpsi) = slow_flow_rhs(
                    &SlowState {
                        amplitude: 0.1,
                        phase: psi,
                    },
                    tau,
                    &params,
                )
                .unwrap();
                // Peak |ψ'| is ε(1 − ω²)/ω ≈ 0.06 from the pumping term.
                assert!(da.abs() < 0.05 && dpsi.abs() < 2.0 * 0.04, "{da} {dpsi}");
            }
        }
    }

    #[test]
    fn slow_flow_zero_amplitude_is_error() {
        let r = slow_flow_rhs(
            &SlowState {
                amplitude: 0.0,
                phase: 0.0,
            },
            0.0,
            &p(0.04, 0.05, 0.5),
        );
        assert_eq!(r, Err(Error::DivisionByZero));
    }

    #[test]
    fn averaged_slow_flow_matches_hand_average() {
        // Hand-averaged first-order system:
        //   a' = ε(1 − ω²) a sin 2ψ/(4ω) − βω a/2
        //   ψ' = ω − ½ − ω(a²/16 − a⁴/384) + ε(1 − ω²) cos 2ψ/(4ω)
        let (e, b, w) = (0.04, 0.05, 0.52);
        let params = p(e, b, w);
        for &(a, psi) in &[(0.3, 0.2), (1.1, -0.9), (0.7, 2.5)] {
            let (da, dpsi) = averaged_slow_flow(
                &SlowState {
                    amplitude: a,
                    phase: psi,
                },
                &params,
            )
            .unwrap();
            let c = e * (1.0 - w * w) / (4.0 * w);
            let da_ref = c * a * (2.0 * psi).sin() - 0.5 * b * w * a;
            let dpsi_ref = w - 0.5 - w * (a * a / 16.0 - a.powi(4) / 384.0) + c * (2.0 * psi).cos();
            assert_abs_diff_eq!(da, da_ref, epsilon = 1e-13);
            assert_abs_diff_eq!(dpsi, dpsi_ref, epsilon = 1e-13);
        }
    }

    #[test]
    fn first_order_jacobian_agrees_with_residual_slope_on_lower_curve() {
        // Steady states of the averaged first-order flow at ω = 0.51, from
        // its closed-form amplitude relation, classified by the numerical
        // Jacobian; the ordering must match the tags of the response roots.
        let (e, b, w) = (0.04, 0.05, 0.51);
        let params = p(e, b, w);
        let c = e * (1.0 - w * w) / (4.0 * w);
        let detune = |q: f64| w - 0.5 - w * (q * q / 16.0 - q.powi(4) / 384.0);
        let rel = |q: f64| (0.5 * b * w).powi(2) + detune(q).powi(2) - c * c;
        let mut steady = Vec::new();
        let n = 2000;
        for i in 1..n {
            let (mut lo, mut hi) = (PI * i as f64 / n as f64, PI * (i + 1) as f64 / n as f64);
            if rel(lo).signum() == rel(hi).signum() {
                continue;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if rel(mid).signum() == rel(lo).signum() {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            let q = 0.5 * (lo + hi);
            let sin2 = 0.5 * b * w / c;
            let cos2 = -detune(q) / c;
            let psi = 0.5 * sin2.atan2(cos2);
            let jac = averaged_slow_flow_jacobian(
                &SlowState {
                    amplitude: q,
                    phase: psi,
                },
                &params,
            )
            .unwrap();
            steady.push(max_real_eigenvalue(&jac) < 0.0);
        }
        let tags: Vec<bool> = response_roots(w, e, b)
            .unwrap()
            .iter()
            .map(|r| r.stable)
            .collect();
        assert_eq!(steady, vec![false, true]);
        assert_eq!(tags, steady);
    }

    #[test]
    fn residual_examples() {
        let r = response_residual(0.0, &p(0.04, 0.0, 0.5)).unwrap();
        assert_abs_diff_eq!(r, -0.0016, epsilon = 1e-15);
        // Even in Q.
        let params = p(0.04, 0.05, 0.53);
        let a = response_residual(0.8, &params).unwrap();
        let q2 = 0.64f64;
        let w2 = 0.53f64 * 0.53;
        let manual = (0.05 * 0.53 / (1.0 - w2 * (1.0 - q2 / 12.0 + q2 * q2 / 384.0))).powi(2)
            + ((0.5 - 2.0 * w2 * (1.0 - q2 / 8.0 + q2 * q2 / 192.0))
                / (1.0 - w2 * (1.0 - q2 / 6.0 + q2 * q2 / 128.0)))
                .powi(2)
            - 0.0016;
        assert_abs_diff_eq!(a, manual, epsilon = 1e-16);
        assert!(response_residual(-0.1, &params).is_err());
    }

    #[test]
    fn residual_pole_detected() {
        // 1 − ω²(1 − Q²/6 + Q⁴/128) = 0 at Q = 0, ω = 1.
        let r = response_residual(0.0, &p(0.04, 0.05, 1.0));
        assert!(matches!(r, Err(Error::PoleAtDenominator { .. })));
    }

    #[test]
    fn residual_near_first_order_tongue_edges() {
        let (e, b) = (0.04, 0.05);
        let (lo, hi) = crate::floquet::first_tongue_interval(b, e)
            .interval
            .unwrap();
        for w in [lo, hi] {
            let r = response_residual(0.0, &p(e, b, w)).unwrap();
            assert!(r.abs() < 0.06 * e * e, "w={w} r={r}");
        }
    }

    #[test]
    fn roots_are_certified_and_tagged() {
        let pts = response_curve(0.45, 0.6, 61, 0.04, 0.05).unwrap();
        assert!(!pts.is_empty());
        for pt in &pts {
            let r = response_residual(pt.q, &p(0.04, 0.05, pt.omega)).unwrap();
            assert!(r.abs() < 1e-10);
            assert!(pt.q > 0.0 && pt.q <= PI);
        }
        // Two roots at ω = 0.53: lower unstable (B′C), upper stable (AB′).
        let r = response_roots(0.53, 0.04, 0.05).unwrap();
        assert_eq!(r.len(), 2);
        assert!(!r[0].stable && r[1].stable);
        assert!(r[1].q > 0.5 && r[1].q < 1.6);
        // Inside the tongue the single root is stable.
        let r = response_roots(0.5, 0.04, 0.05).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].stable);
    }

    #[test]
    fn upper_branch_rises_toward_fold() {
        let mut prev = 0.0;
        for &w in &[0.50, 0.52, 0.54, 0.56] {
            let r = response_roots(w, 0.04, 0.05).unwrap();
            let upper = r
                .iter()
                .filter(|x| x.stable)
                .map(|x| x.q)
                .fold(0.0, f64::max);
            assert!(upper > prev);
            prev = upper;
        }
    }

    #[test]
    fn no_small_roots_outside_tongue_neighbourhood() {
        for &w in &[0.3, 0.4, 0.43, 0.53, 0.6, 0.8] {
            let r = response_roots(w, 0.04, 0.05).unwrap();
            assert!(r.iter().all(|x| x.q >= 0.2), "w={w}: {r:?}");
        }
    }

    #[test]
    fn zero_excitation_has_no_roots() {
        for &w in &[0.3, 0.5, 0.55, 0.7] {
            assert!(response_roots(w, 0.0, 0.05).unwrap().is_empty());
        }
    }

    #[test]
    fn rotation_existence_examples() {
        assert!(rotation_exists(1, &p(0.28, 0.05, 0.5)).unwrap());
        assert!(rotation_exists(2, &p(0.43, 0.05, 0.5)).unwrap());
        assert!(!rotation_exists(1, &p(0.05, 0.05, 0.5)).unwrap());
        assert!(!rotation_exists(1, &p(0.0, 0.05, 0.5)).unwrap());
        assert!(rotation_exists(3, &p(0.28, 0.05, 0.5)).is_err());
        assert_abs_diff_eq!(
            rotation_threshold(1, 0.28, 0.05).unwrap(),
            0.11905,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(
            rotation_threshold(2, 0.43, 0.05).unwrap(),
            0.23874,
            epsilon = 1e-5
        );
    }

    #[test]
    fn rotation_steady_examples() {
        let params = p(0.28, 0.05, 0.5);
        let r = rotation_steady(1, &params).unwrap();
        assert_abs_diff_eq!(r.x1_stable, -0.240404, epsilon = 1e-5);
        assert_abs_diff_eq!(r.x1_unstable, -2.901189, epsilon = 1e-5);
        let m = rotation_steady(-1, &params).unwrap();
        assert_abs_diff_eq!(m.x1_stable, 0.240404, epsilon = 1e-5);

        let r2 = rotation_steady(2, &p(0.43, 0.05, 0.5)).unwrap();
        assert_abs_diff_eq!(r2.x1_stable, -0.49784, epsilon = 1e-4);

        assert_eq!(
            rotation_steady(1, &p(0.05, 0.05, 0.5)),
            Err(Error::NotExists { b_abs: 1 })
        );
    }

    #[test]
    fn rotation_stability_condition() {
        assert!(rotation_is_stable(-0.24043));
        assert!(!rotation_is_stable(PI));
        assert!(!rotation_is_stable(PI / 2.0));
    }

    #[test]
    fn averaged_rotation_examples() {
        let params = p(0.28, 0.05, 0.5);
        let (a, b) = averaged_rotation_rhs(1, (0.0, 1.0), &params).unwrap();
        assert_eq!(a, 0.0);
        assert_abs_diff_eq!(b, -0.025, epsilon = 1e-15);
        let s = rotation_steady(1, &params).unwrap();
        let (a, b) = averaged_rotation_rhs(1, (s.x1_stable, 1.0), &params).unwrap();
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
        assert!(averaged_rotation_rhs(3, (0.0, 0.0), &params).is_err());
    }

    #[test]
    fn steady_phases_are_fixed_points_for_both_orders() {
        for &(b, e, w) in &[
            (1, 0.28, 0.5),
            (-1, 0.28, 0.5),
            (2, 0.43, 0.5),
            (-2, 0.43, 0.5),
            (2, 0.6, 0.3),
        ] {
            let params = p(e, 0.05, w);
            let s = rotation_steady(b, &params).unwrap();
            let x2 = if b.abs() == 1 {
                b as f64
            } else {
                0.5 * b as f64
            };
            for x1 in [s.x1_stable, s.x1_unstable] {
                let (a, c) = averaged_rotation_rhs(b, (x1, x2), &params).unwrap();
                assert!(a.abs() < 1e-12 && c.abs() < 1e-12, "b={b}: {a} {c}");
            }
        }
    }

    #[test]
    fn eigenvalue_helper() {
        assert_abs_diff_eq!(max_real_eigenvalue(&[[-1.0, 0.0], [0.0, 2.0]]), 2.0);
        assert_abs_diff_eq!(max_real_eigenvalue(&[[0.0, 1.0], [-1.0, -0.2]]), -0.1);
    }
}
