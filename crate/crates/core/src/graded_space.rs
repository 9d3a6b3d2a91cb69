//! Truncated weighted sequence spaces.
//!
//! A [`WeightFamily`] fixes a nondecreasing sequence `1 < λ_1 <= λ_2 <= ...`
//! and a truncation count `K`. The grade-`p` norm of `ξ = Σ α_k e_k` is
//! `|ξ|_p = (Σ_k λ_k^{2p} |α_k|²)^{1/2}`; positive grades are test-function
//! norms, negative grades distribution norms. Every truncated vector lives in
//! every grade, so grade membership is expressed only through the size of
//! these norms.

use crate::error::{check_dim, Error, Result};
use crate::par;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Parametric weight sequences. Indices `k` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum WeightKind {
    /// `λ_k = k + shift`; the default family uses `shift = 1`.
    Shifted { shift: f64 },
    /// `λ_k = scale · (k + 1)^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `λ_k = base^k`.
    Geometric { base: f64 },
    /// Tabulated values, one per retained index.
    Explicit { values: Vec<f64> },
}

impl Default for WeightKind {
    fn default() -> Self {
        WeightKind::Shifted { shift: 1.0 }
    }
}

impl WeightKind {
    /// `λ_k` for 1-based `k`, or `None` where a tabulated family ends.
    pub fn lambda(&self, k: usize) -> Option<f64> {
        let kf = k as f64;
        match self {
            WeightKind::Shifted { shift } => Some(kf + shift),
            WeightKind::Power { scale, exponent } => Some(scale * (kf + 1.0).powf(*exponent)),
            WeightKind::Geometric { base } => Some(base.powf(kf)),
            WeightKind::Explicit { values } => values.get(k.wrapping_sub(1)).copied(),
        }
    }

    /// Whether `λ_m >= m` for every `m`, which licenses integral tail bounds.
    pub fn dominates_index(&self) -> bool {
        match self {
            WeightKind::Shifted { shift } => *shift >= 0.0,
            _ => false,
        }
    }

    fn check_summable(&self) -> Result<()> {
        let ok = match self {
            WeightKind::Shifted { .. } => true,
            WeightKind::Power { exponent, .. } => *exponent > 0.5,
            WeightKind::Geometric { .. } => true,
            WeightKind::Explicit { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "weight family {self:?} has a divergent sum of λ_k^-2"
            )))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WeightRecord {
    #[serde(flatten)]
    kind: WeightKind,
    #[serde(rename = "K")]
    k: usize,
}

/// A weight sequence truncated to its first `K` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRecord", into = "WeightRecord")]
pub struct WeightFamily {
    kind: WeightKind,
    values: Vec<f64>,
}

impl From<WeightFamily> for WeightRecord {
    fn from(w: WeightFamily) -> Self {
        WeightRecord {
            k: w.values.len(),
            kind: w.kind,
        }
    }
}

impl TryFrom<WeightRecord> for WeightFamily {
    type Error = Error;

    fn try_from(r: WeightRecord) -> Result<Self> {
        WeightFamily::new(r.kind, r.k)
    }
}

impl WeightFamily {
    /// Validates `λ_1 > 1`, monotonicity over the retained range and
    /// summability of `λ_k^{-2}`.
    pub fn new(kind: WeightKind, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "weight truncation K must be positive".into(),
            ));
        }
        kind.check_summable()?;
        let values = (1..=k)
            .map(|i| {
                kind.lambda(i).ok_or_else(|| {
                    Error::InvalidParameter(format!("weight table shorter than K = {k}"))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        if values[0] <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "λ_1 = {} must exceed 1",
                values[0]
            )));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(format!(
                "weights decrease at k = {}",
                i + 1
            )));
        }
        Ok(Self { kind, values })
    }

    /// `λ_k = k + 1`, truncated at `K`.
    pub fn default_family(k: usize) -> Result<Self> {
        Self::new(WeightKind::default(), k)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Truncation count `K`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Retained weights; `values()[i]` is `λ_{i+1}`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Weight at 0-based position `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Same family with another truncation count.
    pub fn with_len(&self, k: usize) -> Result<Self> {
        Self::new(self.kind.clone(), k)
    }

    /// Truncated `Σ_{k<=K} λ_k^{-power}`.
    pub fn inverse_power_sum(&self, power: f64) -> f64 {
        par::sum_range_f64(self.values.len(), |i| self.values[i].powf(-power))
    }
}

/// A coefficient vector `(α_1, ..., α_K)` in the canonical basis `{e_k}`.
///
/// Positions are 0-based: `unit(dim, 0)` is `e_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GradedVector(Vec<Complex64>);

impl GradedVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|x| x * c).collect())
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: Complex64, other: &GradedVector) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| x + c * y)
                .collect(),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

impl std::ops::Index<usize> for GradedVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Grade-`p` norm `(Σ_k λ_k^{2p} |α_k|²)^{1/2}`.
pub fn norm_p(v: &GradedVector, p: f64, w: &WeightFamily) -> Result<f64> {
    check_dim(w.len(), v.dim())?;
    let c = v.coeffs();
    let sq = par::sum_range_f64(c.len(), |k| w.weight(k).powf(2.0 * p) * c[k].norm_sqr());
    Ok(sq.max(0.0).sqrt())
}

/// Canonical bilinear pairing `Σ_k x_k ξ_k`, no conjugation.
pub fn bilinear_pair(x: &GradedVector, xi: &GradedVector) -> Result<Complex64> {
    check_dim(x.dim(), xi.dim())?;
    let (a, b) = (x.coeffs(), xi.coeffs());
    Ok(par::sum_range(a.len(), |k| a[k] * b[k]))
}

/// Hermitian inner product `Σ_k conj(x_k) y_k`.
pub fn hermitian_inner(x: &GradedVector, y: &GradedVector) -> Result<Complex64> {
    check_dim(x.dim(), y.dim())?;
    let (a, b) = (x.coeffs(), y.coeffs());
    Ok(par::sum_range(a.len(), |k| a[k].conj() * b[k]))
}
