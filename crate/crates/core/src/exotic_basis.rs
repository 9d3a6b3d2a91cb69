//! Exotic frames of Weyl-type exponential sums.
//!
//! For `a > 1/2`, an enumeration `q_1, q_2, ...` of `[0,1) ∩ ℚ` and the
//! signed integers `r_1, r_2, ... = 0, 1, -1, 2, -2, ...`, the frame vectors
//! are
//!
//! ```text
//! e_{a,k} = sqrt(2a - 1) Σ_m exp(i 2π q_k r_m) m^{a-1} e_m
//! ```
//!
//! truncated to `M_terms` base coordinates. They are orthonormal for the
//! Cesàro inner product of order `2a - 1`, uniformly bounded in a negative
//! grade and linearly independent; the `check_*` functions measure each of
//! these properties at finite truncation.

use crate::cesaro::CesaroEstimate;
use crate::error::{check_dim, Error, Result};
use crate::graded_space::{norm_p, GradedVector, WeightFamily};
use crate::symmetric_tensor::{SymTensor, TraceKind, TraceTensor};
use crate::{numerics, par};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// A reduced fraction in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num >= den {
            return Err(Error::InvalidParameter(format!(
                "{num}/{den} is not in [0, 1)"
            )));
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `exp(i 2π q r)`, exact at quarter turns.
    pub fn phase(&self, r: i64) -> Complex64 {
        let den = self.den as i128;
        let k = ((self.num as i128) * (r as i128)).rem_euclid(den);
        if (4 * k) % den == 0 {
            return match 4 * k / den {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
        }
        let angle = 2.0 * PI * (k as f64) / (den as f64);
        Complex64::new(angle.cos(), angle.sin())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The first `count` reduced fractions of `[0, 1)`, by ascending
/// denominator and then ascending numerator: `0, 1/2, 1/3, 2/3, 1/4, ...`.
pub fn enumerate_rationals(count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut den = 1u64;
    while out.len() < count {
        for num in 0..den {
            if out.len() == count {
                break;
            }
            if num.gcd(&den) == 1 {
                out.push(Rational { num, den });
            }
        }
        den += 1;
    }
    out
}

/// `r_m` for `m = 1..=count`: `0, 1, -1, 2, -2, ...`.
pub fn signed_integers(count: usize) -> Vec<i64> {
    (1..=count as i64).map(signed_integer).collect()
}

/// `r_m` for 1-based `m`.
#[inline]
pub fn signed_integer(m: i64) -> i64 {
    if m % 2 == 0 {
        m / 2
    } else {
        -(m / 2)
    }
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.5 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("a = {a} must exceed 1/2")))
    }
}

/// `e_{a,q}` truncated to `m_terms` base coordinates.
pub fn weyl_vector_for(a: f64, q: Rational, m_terms: usize) -> Result<GradedVector> {
    check_a(a)?;
    let amp = (2.0 * a - 1.0).sqrt();
    Ok(GradedVector::new(par::map_range(m_terms, |i| {
        let m = i as i64 + 1;
        q.phase(signed_integer(m)) * (amp * (m as f64).powf(a - 1.0))
    })))
}

/// `e_{a,k}` for the 0-based frame position `k`.
pub fn weyl_vector(a: f64, k: usize, m_terms: usize) -> Result<GradedVector> {
    let q = enumerate_rationals(k + 1)[k];
    weyl_vector_for(a, q, m_terms)
}

/// Shape parameters of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub a: f64,
    #[serde(rename = "K_a")]
    pub k_a: usize,
    #[serde(rename = "M_terms")]
    pub m_terms: usize,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            a: 1.0,
            k_a: 3,
            m_terms: 10_000,
        }
    }
}

/// The truncated family `{e_{a,k}}_{k <= K_a}` with its exotic weights.
#[derive(Debug, Clone)]
pub struct ExoticFrame {
    a: f64,
    m_terms: usize,
    rationals: Vec<Rational>,
    exotic_weights: WeightFamily,
    rows: Vec<GradedVector>,
    // columns[m] = (e_{a,k}[m])_k, the exotic coordinates of e_m
    columns: Vec<GradedVector>,
}

impl ExoticFrame {
    /// Validated frame: `a > 1/2`, `K_a >= 1`, weights of length `K_a`.
    pub fn new(spec: FrameSpec, exotic_weights: WeightFamily) -> Result<Self> {
        check_a(spec.a)?;
        if spec.k_a == 0 || spec.m_terms == 0 {
            return Err(Error::InvalidParameter(
                "K_a and M_terms must be positive".into(),
            ));
        }
        Self::build(
            spec.a,
            enumerate_rationals(spec.k_a),
            spec.m_terms,
            exotic_weights,
        )
    }

    /// Default exotic weights `λ_{a,k} = k + 1`.
    pub fn with_default_weights(spec: FrameSpec) -> Result<Self> {
        Self::new(spec, WeightFamily::default_family(spec.k_a)?)
    }

    /// Frame from explicit frequencies with no distinctness or `a` checks.
    /// Only meant for constructing invalid frames in negative tests.
    pub fn from_rationals_unchecked(
        a: f64,
        rationals: Vec<Rational>,
        m_terms: usize,
        exotic_weights: WeightFamily,
    ) -> Result<Self> {
        Self::build(a, rationals, m_terms, exotic_weights)
    }

    fn build(
        a: f64,
        rationals: Vec<Rational>,
        m_terms: usize,
        exotic_weights: WeightFamily,
    ) -> Result<Self> {
        check_dim(rationals.len(), exotic_weights.len())?;
        let amp = (2.0 * a - 1.0).max(0.0).sqrt();
        let moduli: Vec<f64> = (1..=m_terms)
            .map(|m| amp * (m as f64).powf(a - 1.0))
            .collect();
        let rows: Vec<GradedVector> = par::map_slice(&rationals, |q| {
            GradedVector::new(
                moduli
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| q.phase(signed_integer(i as i64 + 1)) * r)
                    .collect(),
            )
        });
        let columns = par::map_range(m_terms, |m| {
            GradedVector::new(rows.iter().map(|row| row[m]).collect())
        });
        Ok(Self {
            a,
            m_terms,
            rationals,
            exotic_weights,
            rows,
            columns,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Cesàro order `2a - 1`.
    pub fn order(&self) -> f64 {
        2.0 * self.a - 1.0
    }

    pub fn k_a(&self) -> usize {
        self.rows.len()
    }

    pub fn m_terms(&self) -> usize {
        self.m_terms
    }

    pub fn spec(&self) -> FrameSpec {
        FrameSpec {
            a: self.a,
            k_a: self.k_a(),
            m_terms: self.m_terms,
        }
    }

    pub fn rationals(&self) -> &[Rational] {
        &self.rationals
    }

    pub fn exotic_weights(&self) -> &WeightFamily {
        &self.exotic_weights
    }

    /// `e_{a,k}` in base coordinates (0-based `k`).
    pub fn vector(&self, k: usize) -> &GradedVector {
        &self.rows[k]
    }

    pub fn vectors(&self) -> &[GradedVector] {
        &self.rows
    }

    /// `(⟨e_{a,k}, e_m⟩)_k`: the exotic-coordinate column of base index `m`.
    pub fn column(&self, m: usize) -> &GradedVector {
        &self.columns[m]
    }

    pub fn columns(&self) -> &[GradedVector] {
        &self.columns
    }

    /// `(⟨e_{a,k}, ξ⟩)_k` with the bilinear pairing.
    pub fn coordinates(&self, xi: &GradedVector) -> Result<GradedVector> {
        check_dim(self.m_terms, xi.dim())?;
        let x = xi.coeffs();
        Ok(GradedVector::new(
            self.rows
                .iter()
                .map(|row| {
                    let r = row.coeffs();
                    par::sum_range(r.len(), |m| r[m] * x[m])
                })
                .collect(),
        ))
    }
}

/// Cesàro means `N^{-s} Σ_{k<=N} conj(z_k) w_k` along `ladder`.
pub fn cesaro_pair(
    z: &GradedVector,
    w: &GradedVector,
    s: f64,
    ladder: &[usize],
) -> Result<CesaroEstimate> {
    check_dim(z.dim(), w.dim())?;
    let (zc, wc) = (z.coeffs(), w.coeffs());
    CesaroEstimate::from_terms(s, ladder, z.dim(), |k| zc[k].conj() * wc[k])
}

/// Orthonormality deviations at a single truncation point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Report {
    pub n: usize,
    pub tol: f64,
    /// `means[k1][k2]`: Cesàro mean of `conj(e_{a,k1}) e_{a,k2}` at `n`.
    pub means: Vec<Vec<Complex64>>,
    /// `|means[k1][k2] - δ_{k1 k2}|`.
    pub deviations: Vec<Vec<f64>>,
    pub max_deviation: f64,
    pub pass: bool,
}

pub fn check_c1(frame: &ExoticFrame, n: usize, tol: f64) -> Result<C1Report> {
    if n > frame.m_terms {
        return Err(Error::LadderExceedsDimension {
            n,
            dim: frame.m_terms,
        });
    }
    let k_a = frame.k_a();
    let pairs: Vec<(usize, usize)> = (0..k_a)
        .flat_map(|i| (0..k_a).map(move |j| (i, j)))
        .collect();
    let flat = par::map_slice(&pairs, |&(i, j)| {
        cesaro_pair(frame.vector(i), frame.vector(j), frame.order(), &[n]).map(|e| e.last())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let means: Vec<Vec<Complex64>> = flat.chunks(k_a).map(<[_]>::to_vec).collect();
    let deviations: Vec<Vec<f64>> = means
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| (v - Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm())
                .collect()
        })
        .collect();
    let max_deviation = deviations.iter().flatten().copied().fold(0.0, f64::max);
    Ok(C1Report {
        n,
        tol,
        means,
        deviations,
        max_deviation,
        pass: max_deviation <= tol,
    })
}

/// Closed-form side of the uniform bound at grade `-(2a - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticBound {
    pub grade: f64,
    /// `(2a-1) Σ_{m<=M} m^{2a-2} λ_m^{-2(2a-1)}`.
    pub truncated_sq: f64,
    /// Bound on the omitted tail, available when `λ_m >= m`.
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C2Report {
    pub p: f64,
    /// `|e_{a,k}|_{-p}` for every frame vector.
    pub per_vector: Vec<f64>,
    /// `M = max_k |e_{a,k}|_{-p}`.
    pub bound: f64,
    pub analytic: AnalyticBound,
}

/// Uniform negative-grade bound `M` of the frame in base weights.
pub fn check_c2(frame: &ExoticFrame, p: f64, base: &WeightFamily) -> Result<C2Report> {
    if p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grade p = {p} must be positive"
        )));
    }
    check_dim(frame.m_terms, base.len())?;
    let per_vector = frame
        .vectors()
        .iter()
        .map(|v| norm_p(v, -p, base))
        .collect::<Result<Vec<_>>>()?;
    let bound = per_vector.iter().copied().fold(0.0, f64::max);

    let a = frame.a;
    let grade = 2.0 * a - 1.0;
    let truncated_sq = grade
        * par::sum_range_f64(frame.m_terms, |i| {
            ((i + 1) as f64).powf(2.0 * a - 2.0) * base.weight(i).powf(-2.0 * grade)
        });
    // with λ_m >= m the summand is at most (2a-1) m^{-2a}; integrate the tail
    let tail_bound = base
        .kind()
        .dominates_index()
        .then(|| (frame.m_terms as f64).powf(1.0 - 2.0 * a));
    Ok(C2Report {
        p,
        per_vector,
        bound,
        analytic: AnalyticBound {
            grade,
            truncated_sq,
            tail_bound,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C3Report {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `sigma_min > 1e-10 · sigma_max`.
    pub independent: bool,
}

/// Smallest singular value of the `K_a × M_terms` coefficient matrix.
pub fn check_c3(frame: &ExoticFrame) -> Result<C3Report> {
    let k_a = frame.k_a();
    if k_a > frame.m_terms {
        return Err(Error::InvalidParameter(format!(
            "K_a = {k_a} exceeds M_terms = {}",
            frame.m_terms
        )));
    }
    let mat = DMatrix::from_fn(k_a, frame.m_terms, |k, m| frame.rows[k][m]);
    let sv = mat.singular_values();
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    Ok(C3Report {
        sigma_min,
        sigma_max,
        independent: sigma_min > 1e-10 * sigma_max,
    })
}

/// The exotic trace in exotic coordinates plus its graded norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoticTrace {
    /// Identity coefficient array of size `K_a`.
    pub exotic: TraceTensor,
    /// `|τ_a|` at exotic grade `-1`: `(Σ_k λ_{a,k}^{-4})^{1/2}`.
    pub norm_minus_one: f64,
    /// `|τ_a|` at exotic grade `-1/2`: `(Σ_k λ_{a,k}^{-2})^{1/2}`.
    pub norm_minus_half: f64,
}

pub fn exotic_trace(frame: &ExoticFrame) -> Result<ExoticTrace> {
    let w = &frame.exotic_weights;
    Ok(ExoticTrace {
        exotic: TraceTensor::identity(frame.k_a(), TraceKind::Exotic)?,
        norm_minus_one: w.inverse_power_sum(4.0).sqrt(),
        norm_minus_half: w.inverse_power_sum(2.0).sqrt(),
    })
}

/// `Σ_{k<=K_a} e_{a,k} ⊗ e_{a,k}` in base coordinates. Storage grows as
/// `M_terms²/2`.
pub fn exotic_trace_base(frame: &ExoticFrame) -> Result<TraceTensor> {
    let cols = &frame.columns;
    let t = SymTensor::from_fn(2, frame.m_terms, |idx| {
        let (a, b) = (cols[idx[0]].coeffs(), cols[idx[1]].coeffs());
        numerics::sum_complex(a.iter().zip(b).map(|(x, y)| x * y))
    })?;
    TraceTensor::from_tensor(t, TraceKind::Exotic)
}
