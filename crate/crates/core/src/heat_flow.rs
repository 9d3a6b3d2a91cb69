//! The exotic heat semigroup
//! `(P_{a,t} φ)_n = Σ_m (n+2m)!/(n! m!) t^m τ_a^{⊗m} ⊗̂_{2m} f_{n+2m}`
//! and its solutions `t ↦ i(P_{a,t} φ)` of `∂_t u = Δ_{c,2a-1} u`.
//!
//! For finite chaos the series in `m` is finite, so every kernel is an exact
//! polynomial in `t`. The horizon `T*` of the convergence theory is reported
//! as a verdict only.

use crate::cesaro::validate_ladder;
use crate::embedding::{embed_fock, EmbeddedFock, ExoticFock};
use crate::error::{Error, Result};
use crate::exotic_basis::{exotic_trace, ExoticFrame};
use crate::fock_space::{fock_norm, ChaosFunctional, FockVector};
use crate::graded_space::GradedVector;
use crate::laplacians::{exotic_gross_laplacian, exotic_laplacian_at};
use crate::numerics::semigroup_coefficient;
use crate::par;
use crate::symmetric_tensor::{contract_2m, SymTensor};
use num_complex::Complex64;
use serde::Serialize;

/// `T* = λ_{a,1}^{2(p-1)} / |τ_a|_{-1}` and the preconditions for convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Horizon {
    pub p: f64,
    /// Truncation level of the trace norm.
    pub k_a: usize,
    /// `λ_{a,1}^{2(p-1)}`.
    pub numerator: f64,
    /// `(Σ_{k<=K_a} λ_{a,k}^{-4})^{1/2}`.
    pub trace_norm: f64,
    pub t_star: f64,
    /// The same bound with the grade `-1/2` trace norm.
    pub t_star_half: f64,
    /// `p > 1` and `λ_{a,1}^{2(p-1)} > 2`.
    pub admissible: bool,
}

impl Horizon {
    /// `t` lies in `[0, T*)` and the preconditions hold.
    pub fn covers(&self, t: f64) -> bool {
        self.admissible && (0.0..self.t_star).contains(&t)
    }
}

pub fn validity_horizon(p: f64, frame: &ExoticFrame) -> Result<Horizon> {
    if !p.is_finite() {
        return Err(Error::InvalidParameter(format!("grade p = {p}")));
    }
    let trace = exotic_trace(frame)?;
    let numerator = frame.exotic_weights().weight(0).powf(2.0 * (p - 1.0));
    Ok(Horizon {
        p,
        k_a: frame.k_a(),
        numerator,
        trace_norm: trace.norm_minus_one,
        t_star: numerator / trace.norm_minus_one,
        t_star_half: numerator / trace.norm_minus_half,
        admissible: p > 1.0 && numerator > 2.0,
    })
}

/// `P_{a,t} φ`, exact for finite chaos.
pub fn heat_semigroup(phi: &ExoticFock, t: f64, frame: &ExoticFrame) -> Result<ExoticFock> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time t = {t} must be finite and >= 0"
        )));
    }
    crate::error::check_dim(frame.k_a(), phi.k_a())?;
    if t == 0.0 {
        return Ok(phi.clone());
    }
    let tau = exotic_trace(frame)?.exotic;
    let f = phi.as_fock();
    let nmax = f.nmax();
    let kernels = par::map_range(nmax + 1, |n| {
        let mut acc = f.kernel(n).clone();
        for m in 1..=(nmax - n) / 2 {
            let c = semigroup_coefficient(n, m) * t.powi(m as i32);
            acc = acc.axpy(
                Complex64::new(c, 0.0),
                &contract_2m(f.kernel(n + 2 * m), &tau, m)?,
            )?;
        }
        Ok(acc)
    })
    .into_iter()
    .collect::<Result<Vec<SymTensor>>>()?;
    Ok(ExoticFock::new(FockVector::new(f.dim(), kernels)?))
}

/// Time grid: strictly increasing, nonnegative, finite; `0` is prepended
/// when absent.
pub fn normalize_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "time grid {grid:?} must be finite, nonnegative and strictly increasing"
        )));
    }
    let mut out = grid.to_vec();
    if out[0] != 0.0 {
        out.insert(0, 0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeVerdict {
    pub t: f64,
    pub within_horizon: bool,
}

#[derive(Debug, Clone)]
pub struct HeatSolution<'a> {
    frame: &'a ExoticFrame,
    pub p: f64,
    pub initial: ExoticFock,
    /// `‖φ‖_{a,p}`.
    pub initial_norm: f64,
    pub times: Vec<f64>,
    /// `P_{a,t_j} φ` in exotic coordinates.
    pub snapshots: Vec<ExoticFock>,
    pub horizon: Horizon,
    pub verdicts: Vec<TimeVerdict>,
}

impl<'a> HeatSolution<'a> {
    pub fn frame(&self) -> &'a ExoticFrame {
        self.frame
    }

    /// `i(P_{a,t_j} φ)`.
    pub fn embedded(&self, j: usize) -> Result<EmbeddedFock<'a>> {
        embed_fock(&self.snapshots[j], self.frame)
    }

    /// The initial condition `Φ = i(φ)`.
    pub fn initial_condition(&self) -> Result<EmbeddedFock<'a>> {
        embed_fock(&self.initial, self.frame)
    }

    /// Every grid time lies inside the convergence regime.
    pub fn in_theory(&self) -> bool {
        self.verdicts.iter().all(|v| v.within_horizon)
    }
}

/// Snapshots of `P_{a,t} φ` on the grid with horizon verdicts attached.
/// Grid points beyond `T*` are still computed.
pub fn solve_exotic_heat<'a>(
    phi: &ExoticFock,
    frame: &'a ExoticFrame,
    p: f64,
    grid: &[f64],
) -> Result<HeatSolution<'a>> {
    let times = normalize_grid(grid)?;
    let horizon = validity_horizon(p, frame)?;
    let initial_norm = fock_norm(phi.as_fock(), p, frame.exotic_weights())?;
    if !initial_norm.is_finite() {
        return Err(Error::InvalidParameter(
            "initial data has infinite norm".into(),
        ));
    }
    let snapshots = times
        .iter()
        .map(|&t| heat_semigroup(phi, t, frame))
        .collect::<Result<Vec<_>>>()?;
    let verdicts = times
        .iter()
        .map(|&t| TimeVerdict {
            t,
            within_horizon: horizon.covers(t),
        })
        .collect();
    Ok(HeatSolution {
        frame,
        p,
        initial: phi.clone(),
        initial_norm,
        times,
        snapshots,
        horizon,
        verdicts,
    })
}

/// One `(t, ξ)` cell of the embedded heat-equation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub t: f64,
    pub point: usize,
    /// Central difference of `S i(P_{a,·} φ)(ξ)` at `t`.
    pub lhs: Complex64,
    /// Cesàro partial value at the largest ladder point.
    pub rhs: Complex64,
    pub residual: f64,
    /// `h²/6 |∂_t³ S u| · 2` plus rounding of the difference quotient.
    pub difference_budget: f64,
    /// Ten fitted envelopes, floored at rounding level.
    pub cesaro_budget: f64,
    pub budget: f64,
    pub within_budget: bool,
    pub within_horizon: bool,
}

/// Compare `∂_t S u(t, ξ)` with the exotic Laplacian ladder at each grid
/// time `t >= h` and test point.
pub fn verify_heat_residual(
    sol: &HeatSolution<'_>,
    test_points: &[GradedVector],
    h: f64,
    ladder: &[usize],
) -> Result<Vec<ResidualRow>> {
    validate_ladder(ladder)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step h = {h} must be positive"
        )));
    }
    let spacing = sol
        .times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if 2.0 * h >= spacing {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {spacing} too coarse for step h = {h}"
        )));
    }
    let frame = sol.frame;
    let order = frame.order();
    let mut rows = Vec::new();
    for (j, &t) in sol.times.iter().enumerate() {
        if t < h {
            continue;
        }
        let plus = embed_fock(&heat_semigroup(&sol.initial, t + h, frame)?, frame)?;
        let minus = embed_fock(&heat_semigroup(&sol.initial, t - h, frame)?, frame)?;
        let now = sol.embedded(j)?;
        let mut third = sol.snapshots[j].clone();
        for _ in 0..3 {
            third = exotic_gross_laplacian(&third, frame)?;
        }
        let third = embed_fock(&third, frame)?;
        for (i, xi) in test_points.iter().enumerate() {
            let (fp, fm) = (plus.s_transform_at(xi)?, minus.s_transform_at(xi)?);
            let lhs = (fp - fm) / (2.0 * h);
            let est = exotic_laplacian_at(&now, xi, order, ladder)?;
            let rhs = est.last();
            let difference_budget = 2.0 * h * h / 6.0 * third.s_transform_at(xi)?.norm()
                + 10.0 * f64::EPSILON * (fp.norm() + fm.norm()) / (2.0 * h);
            let cesaro_budget = est.default_tolerance();
            let budget = difference_budget + cesaro_budget;
            let residual = (lhs - rhs).norm();
            rows.push(ResidualRow {
                t,
                point: i,
                lhs,
                rhs,
                residual,
                difference_budget,
                cesaro_budget,
                budget,
                within_budget: residual <= budget,
                within_horizon: sol.verdicts[j].within_horizon,
            });
        }
    }
    Ok(rows)
}

/// Largest kernel-wise relative defect of
/// `(P_{t+h} φ - P_{t-h} φ)/2h = Δ_{G,2a-1} P_t φ`.
pub fn heat_equation_defect(phi: &ExoticFock, t: f64, h: f64, frame: &ExoticFrame) -> Result<f64> {
    if !(h > 0.0 && t >= h) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < h <= t, got h = {h}, t = {t}"
        )));
    }
    let plus = heat_semigroup(phi, t + h, frame)?.into_fock();
    let minus = heat_semigroup(phi, t - h, frame)?.into_fock();
    let diff = plus
        .axpy(Complex64::new(-1.0, 0.0), &minus)?
        .scaled(Complex64::new(0.5 / h, 0.0));
    let gen = exotic_gross_laplacian(&heat_semigroup(phi, t, frame)?, frame)?.into_fock();
    let scale = gen
        .kernels()
        .iter()
        .flat_map(|k| k.coeffs().iter().map(|c| c.norm()))
        .fold(0.0, f64::max);
    Ok(diff.max_abs_diff(&gen) / scale.max(f64::MIN_POSITIVE))
}

/// `max |P_s P_t φ - P_{s+t} φ|` over kernel coefficients.
pub fn semigroup_defect(phi: &ExoticFock, s: f64, t: f64, frame: &ExoticFrame) -> Result<f64> {
    let composed = heat_semigroup(&heat_semigroup(phi, t, frame)?, s, frame)?;
    let direct = heat_semigroup(phi, s + t, frame)?;
    Ok(composed.as_fock().max_abs_diff(direct.as_fock()))
}
