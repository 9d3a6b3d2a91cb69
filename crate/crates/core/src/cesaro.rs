//! Cesàro means of order `s` along a ladder of truncation points.
//!
//! For terms `c_1, c_2, ...` the finite mean at `N` is
//! `v_N = N^{-s} Σ_{k<=N} c_k`. A [`CesaroEstimate`] keeps the raw means at
//! every ladder point together with an extrapolated limit and a power-law
//! fit `|v_N - limit| ≈ C N^{-β}`; acceptance decisions are taken on the raw
//! values, the fit only sizes tolerances.

use crate::error::{Error, Result};
use crate::par;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Power-law fit of the distance to the extrapolated limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted `β`; `f64::INFINITY` when every ladder value equals the limit.
    pub exponent: f64,
    /// Fitted `C`; zero for an exact ladder.
    pub constant: f64,
    /// RMS residual of the log-log least-squares fit.
    pub residual: f64,
    /// Number of ladder points that entered the fit.
    pub points: usize,
}

impl DecayFit {
    /// `C N^{-β}`.
    pub fn envelope(&self, n: usize) -> f64 {
        if self.constant == 0.0 {
            0.0
        } else {
            self.constant * (n as f64).powf(-self.exponent)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroEstimate {
    pub order: f64,
    pub ladder: Vec<usize>,
    /// Raw finite-`N` means, one per ladder point.
    pub values: Vec<Complex64>,
    /// Richardson-extrapolated limit.
    pub limit: Complex64,
    pub fit: DecayFit,
}

/// Ladders must be nonempty, start at 1 or above and increase strictly.
pub fn validate_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("empty Cesàro ladder".into()));
    }
    if ladder[0] == 0 || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "ladder {ladder:?} must be strictly increasing and positive"
        )));
    }
    Ok(())
}

/// `N_1 < N_2 < ...` growing by `ratio` from `start` up to `stop`.
pub fn geometric_ladder(start: usize, stop: usize, ratio: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = start.max(1);
    while n <= stop {
        out.push(n);
        n *= ratio.max(2);
    }
    out
}

impl CesaroEstimate {
    /// Evaluate `term(k)` for `k = 0..N_L` and form the ladder of means.
    ///
    /// `available` is the number of terms that exist; a ladder reaching
    /// past it is rejected.
    pub fn from_terms<F>(order: f64, ladder: &[usize], available: usize, term: F) -> Result<Self>
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        validate_ladder(ladder)?;
        let top = *ladder.last().expect("nonempty");
        if top > available {
            return Err(Error::LadderExceedsDimension {
                n: top,
                dim: available,
            });
        }
        let terms = par::map_range(top, term);
        Ok(Self::from_term_values(order, ladder, &terms))
    }

    /// Ladder of means over precomputed terms (`terms.len() >= N_L`).
    pub fn from_term_values(order: f64, ladder: &[usize], terms: &[Complex64]) -> Self {
        let values = ladder
            .iter()
            .map(|&n| par::sum_slice(&terms[..n]) / (n as f64).powf(order))
            .collect();
        Self::from_means(order, ladder.to_vec(), values)
    }

    /// Attach the extrapolation and fit to raw means.
    pub fn from_means(order: f64, ladder: Vec<usize>, values: Vec<Complex64>) -> Self {
        let limit = richardson_limit(&ladder, &values);
        let fit = fit_decay(&ladder, &values, limit);
        Self {
            order,
            ladder,
            values,
            limit,
            fit,
        }
    }

    /// Mean at the largest ladder point.
    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("nonempty ladder")
    }

    pub fn largest_n(&self) -> usize {
        *self.ladder.last().expect("nonempty ladder")
    }

    /// Fitted envelope at the largest ladder point.
    pub fn envelope(&self) -> f64 {
        self.fit.envelope(self.largest_n())
    }

    /// Default verdict tolerance: ten envelopes at the largest `N`, floored
    /// at rounding level.
    pub fn default_tolerance(&self) -> f64 {
        10.0 * self.envelope() + 1e-12 * self.limit.norm().max(1.0)
    }

    /// The ladder decays, successive increments do not grow at the tail,
    /// and the last mean sits within `tol` of the limit.
    pub fn converged(&self, tol: f64) -> bool {
        let l = self.values.len();
        let shrinking = l < 3 || {
            let d_last = (self.values[l - 1] - self.values[l - 2]).norm();
            let d_prev = (self.values[l - 2] - self.values[l - 3]).norm();
            d_last <= d_prev + 1e-14 * self.limit.norm().max(1.0)
        };
        shrinking && self.fit.exponent > 0.0 && (self.last() - self.limit).norm() <= tol
    }
}

/// One Richardson step assuming first-order decay between the last two
/// ladder points.
fn richardson_limit(ladder: &[usize], values: &[Complex64]) -> Complex64 {
    let l = values.len();
    if l < 2 {
        return values[l - 1];
    }
    let (n1, n2) = (ladder[l - 2] as f64, ladder[l - 1] as f64);
    (values[l - 1] * n2 - values[l - 2] * n1) / (n2 - n1)
}

fn fit_decay(ladder: &[usize], values: &[Complex64], limit: Complex64) -> DecayFit {
    let floor = 1e-14 * limit.norm().max(1.0);
    let pts: Vec<(f64, f64)> = ladder
        .iter()
        .zip(values)
        .filter_map(|(&n, v)| {
            let d = (v - limit).norm();
            (d > floor).then(|| ((n as f64).ln(), d.ln()))
        })
        .collect();
    match pts.len() {
        0 => DecayFit {
            exponent: f64::INFINITY,
            constant: 0.0,
            residual: 0.0,
            points: 0,
        },
        1 => {
            // first-order decay through the only informative point
            let (x, y) = pts[0];
            DecayFit {
                exponent: 1.0,
                constant: (y + x).exp(),
                residual: 0.0,
                points: 1,
            }
        }
        m => {
            let mf = m as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            let intercept = my - slope * mx;
            let residual = (pts
                .iter()
                .map(|p| (p.1 - intercept - slope * p.0).powi(2))
                .sum::<f64>()
                / mf)
                .sqrt();
            // shift the line up so it bounds every fitted point
            let lift = pts
                .iter()
                .map(|p| p.1 - intercept - slope * p.0)
                .fold(0.0, f64::max);
            DecayFit {
                exponent: -slope,
                constant: (intercept + lift).exp(),
                residual,
                points: m,
            }
        }
    }
}
