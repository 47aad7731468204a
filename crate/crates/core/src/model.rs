//! Equations of motion of the pendulum with periodically varying length.
//!
//! The length follows `l(t) = l0 + a φ(Ωt)` with a zero-mean 2π-periodic
//! excitation `φ`. In dimensionless time `τ = Ωt` the angle obeys
//!
//! ```text
//! θ'' + (2εφ'/(1 + εφ) + βω) θ' + ω² sin θ / (1 + εφ) = 0
//! ```
//!
//! and the scaled coordinate `q = (1 + εφ) θ` obeys
//!
//! ```text
//! q'' + βω q' − ε(φ'' + βωφ')/(1 + εφ) q + ω² sin(q/(1 + εφ)) = 0.
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Grid size used both for black-box Fourier quadrature and for the
/// `max |φ| ≤ 1` audit of stored series.
pub const QUADRATURE_POINTS: usize = 1 << 12;

/// Dimensional pendulum parameters (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Point mass `m` in kg.
    pub mass: f64,
    /// Mean length `l0` in m.
    pub mean_length: f64,
    /// Length excitation amplitude `a` in m.
    pub amplitude: f64,
    /// Excitation angular frequency `Ω` in rad/s.
    pub frequency: f64,
    /// Linear damping coefficient `γ` in kg/s.
    pub damping: f64,
    /// Gravitational acceleration `g` in m/s².
    pub gravity: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("mean_length", self.mean_length),
            ("amplitude", self.amplitude),
            ("frequency", self.frequency),
            ("damping", self.damping),
            ("gravity", self.gravity),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.mass <= 0.0 {
            return Err(Error::InvalidParameter("mass m must be > 0".into()));
        }
        if self.mean_length <= 0.0 {
            return Err(Error::InvalidParameter("mean length l0 must be > 0".into()));
        }
        if self.gravity <= 0.0 {
            return Err(Error::InvalidParameter("gravity g must be > 0".into()));
        }
        if self.frequency <= 0.0 {
            return Err(Error::InvalidParameter(
                "excitation frequency must be > 0".into(),
            ));
        }
        if self.amplitude < 0.0 {
            return Err(Error::InvalidParameter(
                "excitation amplitude a must be >= 0".into(),
            ));
        }
        if self.damping < 0.0 {
            return Err(Error::InvalidParameter("damping gamma must be >= 0".into()));
        }
        if self.amplitude >= self.mean_length {
            return Err(Error::InvalidParameter(
                "excitation amplitude must satisfy a < l0 so the length stays positive".into(),
            ));
        }
        Ok(())
    }

    /// Converts to `(ε, β, ω)` with `ε = a/l0`, `Ω0 = √(g/l0)`, `ω = Ω0/Ω`
    /// and `β = γ/(mΩ0)`.
    pub fn to_dimensionless(&self) -> Result<DimensionlessParams> {
        self.validate()?;
        let natural = (self.gravity / self.mean_length).sqrt();
        DimensionlessParams::new(
            self.amplitude / self.mean_length,
            self.damping / (self.mass * natural),
            natural / self.frequency,
        )
    }
}

/// The `(ε, β, ω)` triple that fully determines the dimensionless dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// Relative excitation amplitude `a/l0`.
    pub epsilon: f64,
    /// Dimensionless damping.
    pub beta: f64,
    /// Natural-to-excitation frequency ratio `Ω0/Ω`.
    pub omega: f64,
}

impl DimensionlessParams {
    pub fn new(epsilon: f64, beta: f64, omega: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            beta,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.beta.is_finite() && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(
                "epsilon, beta and omega must be finite".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} violates 0 <= epsilon < 1",
                self.epsilon
            )));
        }
        if self.beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta = {} violates beta >= 0",
                self.beta
            )));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega = {} violates omega > 0",
                self.omega
            )));
        }
        Ok(())
    }
}

/// `φ(τ)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationSample {
    pub phi: f64,
    pub phi_dot: f64,
    pub phi_ddot: f64,
}

/// Zero-mean 2π-periodic excitation stored as a finite Fourier series
/// `φ(τ) = Σ a_k cos kτ + b_k sin kτ`, `k = 1..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Default for Excitation {
    fn default() -> Self {
        Self::cosine()
    }
}

impl Excitation {
    /// `φ(τ) = cos τ`.
    pub fn cosine() -> Self {
        Self {
            cos: vec![1.0],
            sin: vec![0.0],
        }
    }

    /// Builds a series from cosine and sine coefficients for `k = 1..K`.
    /// The shorter slice is zero-padded.
    pub fn from_coefficients(cos: &[f64], sin: &[f64]) -> Result<Self> {
        let n = cos.len().max(sin.len());
        if n == 0 {
            return Err(Error::InvalidParameter(
                "excitation needs at least one harmonic".into(),
            ));
        }
        let mut c = cos.to_vec();
        let mut s = sin.to_vec();
        c.resize(n, 0.0);
        s.resize(n, 0.0);
        if c.iter().chain(s.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "excitation coefficients must be finite".into(),
            ));
        }
        let exc = Self { cos: c, sin: s };
        let peak = exc.max_abs();
        if peak > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "excitation violates max |phi| <= 1 (max |phi| = {peak})"
            )));
        }
        Ok(exc)
    }

    /// Number of stored harmonics `K`.
    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    pub fn eval(&self, tau: f64) -> ExcitationSample {
        let mut out = ExcitationSample {
            phi: 0.0,
            phi_dot: 0.0,
            phi_ddot: 0.0,
        };
        for (i, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (i + 1) as f64;
            let (s, c) = (k * tau).sin_cos();
            out.phi += a * c + b * s;
            out.phi_dot += k * (b * c - a * s);
            out.phi_ddot -= k * k * (a * c + b * s);
        }
        out
    }

    pub fn phi(&self, tau: f64) -> f64 {
        self.eval(tau).phi
    }

    /// Stored Fourier coefficients `(a_k, b_k)`; zero beyond `K`.
    pub fn fourier_coeff(&self, k: u32) -> (f64, f64) {
        assert!(k >= 1, "Fourier index must be >= 1");
        let i = (k - 1) as usize;
        match (self.cos.get(i), self.sin.get(i)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        }
    }

    /// Largest `|φ|` on the uniform quadrature grid.
    pub fn max_abs(&self) -> f64 {
        (0..QUADRATURE_POINTS)
            .map(|j| self.phi(TWO_PI * j as f64 / QUADRATURE_POINTS as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Fourier coefficients `a_k = (1/π)∫φ cos kτ`, `b_k = (1/π)∫φ sin kτ` of an
/// arbitrary 2π-periodic function, by the composite trapezoid rule on a
/// uniform grid of [`QUADRATURE_POINTS`] nodes.
pub fn fourier_coeff_quadrature<F: Fn(f64) -> f64>(phi: F, k: u32) -> (f64, f64) {
    assert!(k >= 1, "Fourier index must be >= 1");
    let n = QUADRATURE_POINTS;
    let h = TWO_PI / n as f64;
    let kf = k as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..n {
        let tau = h * j as f64;
        let v = phi(tau);
        let (s, c) = (kf * tau).sin_cos();
        a += v * c;
        b += v * s;
    }
    (a * h / PI, b * h / PI)
}

/// Angle-space state. `theta` is never wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub theta: f64,
    pub theta_dot: f64,
    pub tau: f64,
}

impl State {
    pub fn new(theta: f64, theta_dot: f64, tau: f64) -> Self {
        Self {
            theta,
            theta_dot,
            tau,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.theta_dot.is_finite() && self.tau.is_finite()
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.theta, self.theta_dot]
    }
}

/// State in the scaled coordinate `q = (1 + εφ) θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QState {
    pub q: f64,
    pub q_dot: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToQ,
    ToTheta,
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TWO_PI) - PI;
    if w <= -PI {
        w + TWO_PI
    } else {
        w
    }
}

/// A pendulum with periodically varying length: parameters plus excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pendulum {
    pub params: DimensionlessParams,
    pub excitation: Excitation,
}

impl Pendulum {
    pub fn new(params: DimensionlessParams, excitation: Excitation) -> Self {
        Self { params, excitation }
    }

    /// Pendulum driven by the default `φ = cos τ`.
    pub fn cosine(params: DimensionlessParams) -> Self {
        Self::new(params, Excitation::cosine())
    }

    #[inline]
    fn theta_accel(&self, theta: f64, theta_dot: f64, ex: &ExcitationSample) -> f64 {
        let DimensionlessParams {
            epsilon,
            beta,
            omega,
        } = self.params;
        let len = 1.0 + epsilon * ex.phi;
        -(2.0 * epsilon * ex.phi_dot / len + beta * omega) * theta_dot
            - omega * omega * theta.sin() / len
    }

    /// Right-hand side of the angle equation: `(θ', θ'')`.
    pub fn rhs_theta(&self, s: &State) -> (f64, f64) {
        let ex = self.excitation.eval(s.tau);
        (s.theta_dot, self.theta_accel(s.theta, s.theta_dot, &ex))
    }

    /// Right-hand side of the equation for `q = (1 + εφ) θ`: `(q', q'')`.
    pub fn rhs_q(&self, s: &QState) -> (f64, f64) {
        let DimensionlessParams {
            epsilon,
            beta,
            omega,
        } = self.params;
        let ex = self.excitation.eval(s.tau);
        let len = 1.0 + epsilon * ex.phi;
        let pump = epsilon * (ex.phi_ddot + beta * omega * ex.phi_dot) / len;
        let acc = -beta * omega * s.q_dot + pump * s.q - omega * omega * (s.q / len).sin();
        (s.q_dot, acc)
    }

    /// Linearization of the `q` equation about `q = 0`, kept in exact ratio
    /// form: `q'' = −βω q' − (ω² − ε(φ'' + βωφ'))/(1 + εφ) q`.
    pub fn rhs_hill(&self, q: f64, q_dot: f64, tau: f64) -> (f64, f64) {
        let ex = self.excitation.eval(tau);
        (q_dot, self.hill_accel(q, q_dot, &ex))
    }

    #[inline]
    fn hill_accel(&self, q: f64, q_dot: f64, ex: &ExcitationSample) -> f64 {
        let DimensionlessParams {
            epsilon,
            beta,
            omega,
        } = self.params;
        let len = 1.0 + epsilon * ex.phi;
        let stiffness = (omega * omega - epsilon * (ex.phi_ddot + beta * omega * ex.phi_dot)) / len;
        -beta * omega * q_dot - stiffness * q
    }

    /// Tangent (variational) dynamics of the angle equation along `s`.
    pub fn rhs_variational(&self, s: &State, delta: (f64, f64)) -> (f64, f64) {
        let ex = self.excitation.eval(s.tau);
        (delta.1, self.variational_accel(s.theta, delta, &ex))
    }

    #[inline]
    fn variational_accel(&self, theta: f64, delta: (f64, f64), ex: &ExcitationSample) -> f64 {
        let DimensionlessParams {
            epsilon,
            beta,
            omega,
        } = self.params;
        let len = 1.0 + epsilon * ex.phi;
        -(2.0 * epsilon * ex.phi_dot / len + beta * omega) * delta.1
            - omega * omega * theta.cos() / len * delta.0
    }

    /// Maps a single coordinate value between `θ` and `q = (1 + εφ(τ)) θ`.
    pub fn map_theta_q(&self, value: f64, direction: Direction, tau: f64) -> f64 {
        let len = 1.0 + self.params.epsilon * self.excitation.phi(tau);
        match direction {
            Direction::ToQ => value * len,
            Direction::ToTheta => value / len,
        }
    }

    /// Full state map `θ → q`, including `q' = (1 + εφ) θ' + εφ' θ`.
    pub fn to_q_state(&self, s: &State) -> QState {
        let ex = self.excitation.eval(s.tau);
        let eps = self.params.epsilon;
        let len = 1.0 + eps * ex.phi;
        QState {
            q: len * s.theta,
            q_dot: len * s.theta_dot + eps * ex.phi_dot * s.theta,
            tau: s.tau,
        }
    }

    /// Inverse of [`Pendulum::to_q_state`].
    pub fn to_theta_state(&self, s: &QState) -> State {
        let ex = self.excitation.eval(s.tau);
        let eps = self.params.epsilon;
        let len = 1.0 + eps * ex.phi;
        let theta = s.q / len;
        State {
            theta,
            theta_dot: (s.q_dot - eps * ex.phi_dot * theta) / len,
            tau: s.tau,
        }
    }

    /// Angle equation as a vector field for the integrator.
    pub fn theta_field(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |tau, y| {
            let ex = self.excitation.eval(tau);
            [y[1], self.theta_accel(y[0], y[1], &ex)]
        }
    }

    /// `q` equation as a vector field for the integrator.
    pub fn q_field(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |tau, y| {
            let (dq, ddq) = self.rhs_q(&QState {
                q: y[0],
                q_dot: y[1],
                tau,
            });
            [dq, ddq]
        }
    }

    /// Linear `q` equation for two solutions at once, laid out as
    /// `[q₁, q₁', q₂, q₂']`.
    pub fn hill_pair_field(&self) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
        move |tau, y| {
            let ex = self.excitation.eval(tau);
            [
                y[1],
                self.hill_accel(y[0], y[1], &ex),
                y[3],
                self.hill_accel(y[2], y[3], &ex),
            ]
        }
    }

    /// Angle equation augmented with its tangent flow:
    /// `[θ, θ', δθ, δθ']`.
    pub fn tangent_field(&self) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
        move |tau, y| {
            let ex = self.excitation.eval(tau);
            [
                y[1],
                self.theta_accel(y[0], y[1], &ex),
                y[3],
                self.variational_accel(y[0], (y[2], y[3]), &ex),
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(e: f64, b: f64, w: f64) -> DimensionlessParams {
        DimensionlessParams::new(e, b, w).unwrap()
    }

    #[test]
    fn cosine_excitation_values() {
        let exc = Excitation::cosine();
        let s = exc.eval(0.0);
        assert_abs_diff_eq!(s.phi, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi_dot, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi_ddot, -1.0, epsilon = 1e-15);

        let s = exc.eval(PI / 2.0);
        assert_abs_diff_eq!(s.phi, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi_dot, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi_ddot, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn second_harmonic_derivatives() {
        let exc = Excitation::from_coefficients(&[0.0, 0.5], &[]).unwrap();
        let s = exc.eval(0.0);
        assert_abs_diff_eq!(s.phi, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi_dot, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi_ddot, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn excitation_is_periodic() {
        let exc = Excitation::from_coefficients(&[0.3, 0.2], &[0.1, -0.2]).unwrap();
        for &tau in &[0.0, 0.7, 3.1, -2.4, 11.0] {
            let a = exc.eval(tau);
            let b = exc.eval(tau + TWO_PI);
            assert_abs_diff_eq!(a.phi, b.phi, epsilon = 1e-13);
            assert_abs_diff_eq!(a.phi_dot, b.phi_dot, epsilon = 1e-13);
            assert_abs_diff_eq!(a.phi_ddot, b.phi_ddot, epsilon = 1e-13);
        }
    }

    #[test]
    fn excitation_rejects_large_amplitude() {
        assert!(Excitation::from_coefficients(&[0.8], &[0.8]).is_err());
        assert!(Excitation::from_coefficients(&[], &[]).is_err());
        assert!(Excitation::from_coefficients(&[0.6], &[0.8]).is_ok());
    }

    #[test]
    fn fourier_coefficients_lookup() {
        let cos = Excitation::cosine();
        assert_eq!(cos.fourier_coeff(1), (1.0, 0.0));
        assert_eq!(cos.fourier_coeff(2), (0.0, 0.0));
        let sin = Excitation::from_coefficients(&[0.0], &[1.0]).unwrap();
        assert_eq!(sin.fourier_coeff(1), (0.0, 1.0));
    }

    #[test]
    fn fourier_quadrature_matches_closed_forms() {
        let (a1, b1) = fourier_coeff_quadrature(f64::cos, 1);
        assert_abs_diff_eq!(a1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b1, 0.0, epsilon = 1e-12);
        let (a2, b2) = fourier_coeff_quadrature(f64::cos, 2);
        assert_abs_diff_eq!(a2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b2, 0.0, epsilon = 1e-12);
        let (a1, b1) = fourier_coeff_quadrature(f64::sin, 1);
        assert_abs_diff_eq!(a1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rhs_theta_examples() {
        let p = Pendulum::cosine(params(0.04, 0.05, 0.5));
        assert_eq!(p.rhs_theta(&State::new(0.0, 0.0, 1.7)), (0.0, 0.0));

        let free = Pendulum::cosine(params(0.0, 0.0, 0.5));
        let (v, a) = free.rhs_theta(&State::new(PI / 2.0, 0.0, 0.0));
        assert_eq!(v, 0.0);
        assert_abs_diff_eq!(a, -0.25, epsilon = 1e-15);

        let (v, a) = p.rhs_theta(&State::new(0.1, 0.0, 0.0));
        assert_eq!(v, 0.0);
        assert_abs_diff_eq!(a, -0.25 * 0.1f64.sin() / 1.04, epsilon = 1e-15);
        assert_abs_diff_eq!(a, -0.024, epsilon = 1e-5);
    }

    #[test]
    fn rhs_q_examples() {
        let p = Pendulum::cosine(params(0.04, 0.05, 0.5));
        assert_eq!(
            p.rhs_q(&QState {
                q: 0.0,
                q_dot: 0.0,
                tau: 0.4
            }),
            (0.0, 0.0)
        );

        // Independent transcription at tau = 0: phi = 1, phi' = 0, phi'' = -1.
        let (e, b, w, q): (f64, f64, f64, f64) = (0.04, 0.05, 0.5, 0.2);
        let expected =
            -b * w * 0.0 + e * (-1.0 + b * w * 0.0) / (1.0 + e) * q - w * w * (q / (1.0 + e)).sin();
        let (_, acc) = p.rhs_q(&QState {
            q,
            q_dot: 0.0,
            tau: 0.0,
        });
        assert_abs_diff_eq!(acc, expected, epsilon = 1e-10);

        let unforced = Pendulum::cosine(params(0.0, 0.05, 0.5));
        let s = QState {
            q: 0.7,
            q_dot: -0.3,
            tau: 2.2,
        };
        let (_, acc) = unforced.rhs_q(&s);
        assert_abs_diff_eq!(acc, -0.025 * -0.3 - 0.25 * 0.7f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn rhs_hill_examples() {
        let p0 = Pendulum::cosine(params(0.0, 0.05, 0.5));
        let (_, acc) = p0.rhs_hill(0.8, -0.2, 1.0);
        assert_abs_diff_eq!(acc, -0.025 * -0.2 - 0.25 * 0.8, epsilon = 1e-15);

        let p = Pendulum::cosine(params(0.04, 0.0, 0.5));
        let (_, acc) = p.rhs_hill(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(acc, -(0.25 + 0.04) / 1.04, epsilon = 1e-15);
        assert_abs_diff_eq!(acc, -0.27885, epsilon = 1e-5);

        let p = Pendulum::cosine(params(0.3, 0.05, 0.7));
        let (a, b) = p.rhs_hill(0.4, 0.1, 2.0);
        let (a2, b2) = p.rhs_hill(0.8, 0.2, 2.0);
        assert_abs_diff_eq!(a2, 2.0 * a, epsilon = 1e-15);
        assert_abs_diff_eq!(b2, 2.0 * b, epsilon = 1e-15);
    }

    #[test]
    fn variational_about_origin_is_hill_in_theta() {
        // At θ = 0 the tangent equation equals the angle-space linearization.
        let p = Pendulum::cosine(params(0.2, 0.05, 0.6));
        let s = State::new(0.0, 0.0, 0.9);
        let (d, dd) = p.rhs_variational(&s, (0.3, -0.1));
        let ex = p.excitation.eval(0.9);
        let len = 1.0 + 0.2 * ex.phi;
        assert_eq!(d, -0.1);
        let expected = -(2.0 * 0.2 * ex.phi_dot / len + 0.05 * 0.6) * -0.1 - 0.36 / len * 0.3;
        assert_abs_diff_eq!(dd, expected, epsilon = 1e-15);
        let (_, dd2) = p.rhs_variational(&s, (0.6, -0.2));
        assert_abs_diff_eq!(dd2, 2.0 * dd, epsilon = 1e-15);
    }

    #[test]
    fn physical_to_dimensionless() {
        let unit = PhysicalParams {
            mass: 1.0,
            mean_length: 1.0,
            amplitude: 0.0,
            frequency: 1.0,
            damping: 0.0,
            gravity: 1.0,
        };
        let d = unit.to_dimensionless().unwrap();
        assert_eq!((d.epsilon, d.beta, d.omega), (0.0, 0.0, 1.0));

        let fig3 = PhysicalParams {
            mass: 1.0,
            mean_length: 9.81,
            amplitude: 0.3924,
            frequency: 2.0,
            damping: 0.05,
            gravity: 9.81,
        };
        let d = fig3.to_dimensionless().unwrap();
        assert_abs_diff_eq!(d.epsilon, 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(d.omega, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.beta, 0.05, epsilon = 1e-12);
        d.validate().unwrap();

        let bad = PhysicalParams {
            amplitude: 1.0,
            mean_length: 1.0,
            ..unit
        };
        assert!(bad.to_dimensionless().is_err());
    }

    #[test]
    fn dimensionless_invariants() {
        assert!(DimensionlessParams::new(1.0, 0.0, 0.5).is_err());
        assert!(DimensionlessParams::new(-0.1, 0.0, 0.5).is_err());
        assert!(DimensionlessParams::new(0.1, -0.1, 0.5).is_err());
        assert!(DimensionlessParams::new(0.1, 0.0, 0.0).is_err());
        assert!(DimensionlessParams::new(0.0, 0.0, 0.1).is_ok());
    }

    #[test]
    fn theta_q_map() {
        let p = Pendulum::cosine(params(0.0, 0.0, 0.5));
        assert_eq!(p.map_theta_q(0.37, Direction::ToQ, 1.0), 0.37);
        let p = Pendulum::cosine(params(0.04, 0.0, 0.5));
        assert_abs_diff_eq!(
            p.map_theta_q(0.52, Direction::ToTheta, 0.0),
            0.5,
            epsilon = 1e-15
        );
        let p = Pendulum::cosine(params(0.3, 0.0, 0.5));
        let x = 0.81;
        let back = p.map_theta_q(
            p.map_theta_q(x, Direction::ToQ, 1.3),
            Direction::ToTheta,
            1.3,
        );
        assert_abs_diff_eq!(back, x, epsilon = 1e-14);
    }

    #[test]
    fn wrapping() {
        assert_abs_diff_eq!(wrap_angle(PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(wrap_angle(-7.0), -7.0 + TWO_PI, epsilon = 1e-14);
    }
}
