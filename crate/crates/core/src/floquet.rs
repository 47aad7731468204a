//! Stability of the lower vertical position.
//!
//! The exact test integrates the linearized `q` equation over one excitation
//! period and inspects the Floquet multipliers. The closed-form half-cone
//! approximation of the `k`-th instability domain is
//!
//! ```text
//! (β/2)² + (2ω/k − 1)² < (a_k² + b_k²)(3ε/4)²,   β ≥ 0,
//! ```
//!
//! where `a_k`, `b_k` are Fourier coefficients of the excitation.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_grid, fmt_sig, par_grid};
use crate::integrate::{Dopri5, IntegratorConfig};
use crate::model::{DimensionlessParams, Excitation, Pendulum};

const TWO_PI: f64 = 2.0 * PI;

/// Default tolerance on multiplier magnitudes.
pub const STABILITY_TOL: f64 = 1e-9;

/// Default resolution of boundary bisection in `ω`.
pub const BOUNDARY_RESOLUTION: f64 = 1e-4;

/// Fundamental matrix of the linearized equation over `τ ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monodromy {
    /// Row-major; column `j` is the flow of the `j`-th unit vector.
    pub matrix: [[f64; 2]; 2],
    pub multipliers: [Complex64; 2],
}

impl Monodromy {
    pub fn from_matrix(matrix: [[f64; 2]; 2]) -> Self {
        let tr = matrix[0][0] + matrix[1][1];
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        let half = 0.5 * tr;
        let disc = half * half - det;
        let multipliers = if disc >= 0.0 {
            let r = disc.sqrt();
            // Avoid cancellation in the smaller root.
            let big = if half >= 0.0 { half + r } else { half - r };
            let small = if big != 0.0 { det / big } else { 0.0 };
            [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
        } else {
            let im = (-disc).sqrt();
            [Complex64::new(half, im), Complex64::new(half, -im)]
        };
        Self {
            matrix,
            multipliers,
        }
    }

    pub fn det(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// Largest multiplier magnitude.
    pub fn spectral_radius(&self) -> f64 {
        self.multipliers[0].norm().max(self.multipliers[1].norm())
    }

    /// `max |μ| < 1 + tol`. Neutral multipliers count as stable.
    pub fn is_stable(&self, tol: f64) -> bool {
        self.spectral_radius() < 1.0 + tol
    }
}

/// Monodromy matrix of the linearized equation in exact ratio form.
pub fn monodromy(pendulum: &Pendulum, cfg: &IntegratorConfig) -> Result<Monodromy> {
    let mut solver = Dopri5::new(pendulum.hill_pair_field(), 0.0, [1.0, 0.0, 0.0, 1.0], *cfg)?;
    let y = solver.land_on(TWO_PI)?;
    Ok(Monodromy::from_matrix([[y[0], y[2]], [y[1], y[3]]]))
}

/// Whether the lower equilibrium is linearly stable at `params`.
pub fn is_stable_at(
    params: DimensionlessParams,
    excitation: &Excitation,
    cfg: &IntegratorConfig,
) -> Result<bool> {
    let p = Pendulum::new(params, excitation.clone());
    Ok(monodromy(&p, cfg)?.is_stable(STABILITY_TOL))
}

/// Half-cone membership test for the `k`-th instability domain.
pub fn halfcone_contains(k: u32, params: &DimensionlessParams, excitation: &Excitation) -> bool {
    assert!(k >= 1, "resonance index must be >= 1");
    let (a, b) = excitation.fourier_coeff(k);
    halfcone_contains_coeffs(k, params, a, b)
}

/// Half-cone membership with explicit Fourier coefficients `(a_k, b_k)`,
/// e.g. obtained by quadrature of a black-box excitation.
pub fn halfcone_contains_coeffs(k: u32, params: &DimensionlessParams, a_k: f64, b_k: f64) -> bool {
    let DimensionlessParams {
        epsilon,
        beta,
        omega,
    } = *params;
    let detune = 2.0 * omega / k as f64 - 1.0;
    let pump = 0.75 * epsilon;
    (0.5 * beta).powi(2) + detune * detune < (a_k * a_k + b_k * b_k) * pump * pump
}

/// Frequency interval of an instability tongue at fixed `(β, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tongue {
    pub k: u32,
    /// Open interval `(ω_low, ω_high)`, or `None` when the section is empty.
    pub interval: Option<(f64, f64)>,
}

impl Tongue {
    pub fn contains(&self, omega: f64) -> bool {
        self.interval
            .is_some_and(|(lo, hi)| lo < omega && omega < hi)
    }

    pub fn width(&self) -> f64 {
        self.interval.map_or(0.0, |(lo, hi)| hi - lo)
    }
}

/// Section of the first tongue for `φ = cos τ`:
/// `ω ∈ (½ − d, ½ + d)`, `d = ½√(9ε²/16 − β²/4)`.
pub fn first_tongue_interval(beta: f64, epsilon: f64) -> Tongue {
    let (a, b) = (1.0, 0.0);
    tongue_interval_coeffs(1, beta, epsilon, a, b)
}

/// Section of the `k`-th half-cone at fixed `(β, ε)`.
pub fn tongue_interval(k: u32, beta: f64, epsilon: f64, excitation: &Excitation) -> Tongue {
    let (a, b) = excitation.fourier_coeff(k);
    tongue_interval_coeffs(k, beta, epsilon, a, b)
}

fn tongue_interval_coeffs(k: u32, beta: f64, epsilon: f64, a_k: f64, b_k: f64) -> Tongue {
    let reach = (a_k * a_k + b_k * b_k) * (0.75 * epsilon).powi(2) - 0.25 * beta * beta;
    let interval = (reach > 0.0).then(|| {
        let center = 0.5 * k as f64;
        let d = center * reach.sqrt();
        (center - d, center + d)
    });
    Tongue { k, interval }
}

/// Outcome of one scan cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStability {
    Stable,
    Unstable,
    Failed,
}

impl CellStability {
    pub fn label(&self) -> &'static str {
        match self {
            CellStability::Stable => "1",
            CellStability::Unstable => "0",
            CellStability::Failed => "failed",
        }
    }
}

/// Result of [`stability_scan`]; `cells[i * epsilon.len() + j]` belongs to
/// `(omega[i], epsilon[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityGrid {
    pub beta: f64,
    pub omega: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub cells: Vec<CellStability>,
}

impl StabilityGrid {
    pub fn get(&self, i: usize, j: usize) -> CellStability {
        self.cells[i * self.epsilon.len() + j]
    }

    pub fn failures(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| **c == CellStability::Failed)
            .count()
    }

    /// Writes `omega,epsilon,stable` rows in grid order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "omega,epsilon,stable")?;
        for (i, &om) in self.omega.iter().enumerate() {
            for (j, &eps) in self.epsilon.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt_sig(om),
                    fmt_sig(eps),
                    self.get(i, j).label()
                )?;
            }
        }
        Ok(())
    }
}

/// Floquet stability on an `(ω, ε)` grid at fixed `β`, evaluated in parallel.
pub fn stability_scan(
    omega_grid: &[f64],
    epsilon_grid: &[f64],
    beta: f64,
    excitation: &Excitation,
    cfg: &IntegratorConfig,
) -> Result<StabilityGrid> {
    check_grid("omega", omega_grid)?;
    check_grid("epsilon", epsilon_grid)?;
    cfg.validate()?;
    // Validate every parameter combination up front.
    for &om in omega_grid {
        for &eps in epsilon_grid {
            DimensionlessParams::new(eps, beta, om)?;
        }
    }
    let cells = par_grid(omega_grid.len(), epsilon_grid.len(), |i, j| {
        let params = DimensionlessParams {
            epsilon: epsilon_grid[j],
            beta,
            omega: omega_grid[i],
        };
        match is_stable_at(params, excitation, cfg) {
            Ok(true) => CellStability::Stable,
            Ok(false) => CellStability::Unstable,
            Err(_) => CellStability::Failed,
        }
    });
    Ok(StabilityGrid {
        beta,
        omega: omega_grid.to_vec(),
        epsilon: epsilon_grid.to_vec(),
        cells,
    })
}

/// Bisects in `ω` between a stable and an unstable frequency at fixed
/// `(ε, β)` until the bracket is narrower than `resolution`; returns the
/// bracket midpoint.
pub fn locate_boundary(
    epsilon: f64,
    beta: f64,
    excitation: &Excitation,
    stable_omega: f64,
    unstable_omega: f64,
    resolution: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let at = |om: f64| -> Result<bool> {
        is_stable_at(
            DimensionlessParams::new(epsilon, beta, om)?,
            excitation,
            cfg,
        )
    };
    if !at(stable_omega)? || at(unstable_omega)? {
        return Err(Error::InvalidParameter(
            "boundary bisection needs a stable and an unstable end point".into(),
        ));
    }
    let (mut s, mut u) = (stable_omega, unstable_omega);
    while (s - u).abs() > resolution {
        let mid = 0.5 * (s + u);
        if at(mid)? {
            s = mid;
        } else {
            u = mid;
        }
    }
    Ok(0.5 * (s + u))
}

/// Numerically located section of the `k`-th tongue, bisecting outward
/// from `ω = k/2` up to `search_width` on each side. `None` when `k/2`
/// itself is stable.
pub fn numerical_tongue(
    k: u32,
    beta: f64,
    epsilon: f64,
    excitation: &Excitation,
    search_width: f64,
    cfg: &IntegratorConfig,
) -> Result<Tongue> {
    let center = 0.5 * k as f64;
    let unstable_center = !is_stable_at(
        DimensionlessParams::new(epsilon, beta, center)?,
        excitation,
        cfg,
    )?;
    if !unstable_center {
        return Ok(Tongue { k, interval: None });
    }
    let lo_edge = (center - search_width).max(1e-6);
    let lo = locate_boundary(
        epsilon,
        beta,
        excitation,
        lo_edge,
        center,
        BOUNDARY_RESOLUTION,
        cfg,
    )?;
    let hi = locate_boundary(
        epsilon,
        beta,
        excitation,
        center + search_width,
        center,
        BOUNDARY_RESOLUTION,
        cfg,
    )?;
    Ok(Tongue {
        k,
        interval: Some((lo, hi)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pendulum(e: f64, b: f64, w: f64) -> Pendulum {
        Pendulum::cosine(DimensionlessParams::new(e, b, w).unwrap())
    }

    #[test]
    fn unforced_half_period_is_minus_identity() {
        let m = monodromy(&pendulum(0.0, 0.0, 0.5), &IntegratorConfig::precise()).unwrap();
        assert_abs_diff_eq!(m.matrix[0][0], -1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.matrix[1][1], -1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.matrix[0][1], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.matrix[1][0], 0.0, epsilon = 1e-8);
        for mu in m.multipliers {
            assert_abs_diff_eq!(mu.re, -1.0, epsilon = 1e-4);
            assert_abs_diff_eq!(mu.im, 0.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn undamped_unforced_multipliers_on_unit_circle() {
        for &w in &[0.13, 0.37, 0.81, 1.4] {
            let m = monodromy(&pendulum(0.0, 0.0, w), &IntegratorConfig::precise()).unwrap();
            assert_abs_diff_eq!(m.multipliers[0].norm(), 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(m.multipliers[1].norm(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn liouville_determinant() {
        let expected = (-0.05 * PI).exp();
        assert_abs_diff_eq!(expected, 0.854_636, epsilon = 1e-6);
        for &e in &[0.0, 0.04, 0.3] {
            let m = monodromy(&pendulum(e, 0.05, 0.5), &IntegratorConfig::precise()).unwrap();
            assert!(
                ((m.det() - expected) / expected).abs() < 1e-8,
                "eps={e}: det={}",
                m.det()
            );
            let prod = m.multipliers[0] * m.multipliers[1];
            assert_abs_diff_eq!(prod.re, m.det(), epsilon = 1e-12);
            let sum = m.multipliers[0] + m.multipliers[1];
            assert_abs_diff_eq!(sum.re, m.trace(), epsilon = 1e-12);
        }
    }

    #[test]
    fn stability_examples() {
        let cfg = IntegratorConfig::precise();
        let stable = |e, b, w| {
            monodromy(&pendulum(e, b, w), &cfg)
                .unwrap()
                .is_stable(STABILITY_TOL)
        };
        assert!(stable(0.0, 0.05, 0.5));
        assert!(!stable(0.04, 0.05, 0.5));
        assert!(stable(0.2, 0.05, 1.0));
    }

    #[test]
    fn halfcone_examples() {
        let cos = Excitation::cosine();
        let p = |e, b, w| DimensionlessParams::new(e, b, w).unwrap();
        assert!(halfcone_contains(1, &p(0.01, 0.0, 0.5), &cos));
        for &(e, b, w) in &[(0.2, 0.05, 1.0), (0.9, 0.0, 1.0), (0.5, 0.01, 0.97)] {
            assert!(!halfcone_contains(2, &p(e, b, w), &cos));
        }
        assert!(!halfcone_contains(1, &p(0.03, 0.05, 0.5), &cos));
    }

    #[test]
    fn first_tongue_examples() {
        let t = first_tongue_interval(0.0, 0.1);
        let (lo, hi) = t.interval.unwrap();
        assert_abs_diff_eq!(lo, 0.4625, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 0.5375, epsilon = 1e-12);

        let (lo, hi) = first_tongue_interval(0.05, 0.04).interval.unwrap();
        assert_abs_diff_eq!(lo, 0.49171, epsilon = 1e-5);
        assert_abs_diff_eq!(hi, 0.50829, epsilon = 1e-5);

        assert!(first_tongue_interval(0.05, 0.03).interval.is_none());
        assert_eq!(first_tongue_interval(0.05, 0.03).width(), 0.0);
    }

    #[test]
    fn general_tongue_for_second_harmonic() {
        let exc = Excitation::from_coefficients(&[0.0, 1.0], &[]).unwrap();
        let t = tongue_interval(2, 0.0, 0.1, &exc);
        let (lo, hi) = t.interval.unwrap();
        assert_abs_diff_eq!(0.5 * (lo + hi), 1.0, epsilon = 1e-12);
        assert!(tongue_interval(1, 0.0, 0.1, &exc).interval.is_none());
    }

    #[test]
    fn scan_zero_epsilon_column_is_stable() {
        let g = stability_scan(
            &[0.3, 0.5, 0.7, 1.0],
            &[0.0, 0.04],
            0.05,
            &Excitation::cosine(),
            &IntegratorConfig::scan(),
        )
        .unwrap();
        for i in 0..4 {
            assert_eq!(g.get(i, 0), CellStability::Stable);
        }
        assert_eq!(g.get(1, 1), CellStability::Unstable);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("omega,epsilon,stable\n0.3,0,1\n"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn scan_rejects_invalid_cells() {
        let r = stability_scan(
            &[0.5],
            &[1.2],
            0.05,
            &Excitation::cosine(),
            &IntegratorConfig::scan(),
        );
        assert!(r.is_err());
        let r = stability_scan(
            &[0.5, 0.4],
            &[0.1],
            0.05,
            &Excitation::cosine(),
            &IntegratorConfig::scan(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn neutral_undamped_case_is_stable() {
        let m = monodromy(&pendulum(0.0, 0.0, 0.5), &IntegratorConfig::precise()).unwrap();
        assert!(m.is_stable(STABILITY_TOL));
    }
}
