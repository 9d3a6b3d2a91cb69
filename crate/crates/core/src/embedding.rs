//! The inclusion of exotic tensors into base coordinates.
//!
//! An exotic degree-`n` tensor is carried by its coefficient family
//! `b_{k_1..k_n}` with respect to the frame `{e_{a,k}}`; the inclusion map
//! sends it to `Σ b_{k_1..k_n} e_{a,k_1} ⊗ ... ⊗ e_{a,k_n}` in base
//! coordinates. Exotic and base objects have distinct types
//! ([`CoefficientArray`]/[`ExoticFock`] vs [`SymTensor`]/[`FockVector`]) and
//! this module is the only bridge between them.
//!
//! Embedded Fock vectors are kept lazily ([`EmbeddedFock`]): S-transforms,
//! second derivatives and graded norms are evaluated through the frame
//! without storing `M_terms^n`-sized base kernels.

use crate::error::{check_dim, Error, Result};
use crate::exotic_basis::{check_c2, ExoticFrame};
use crate::fock_space::{hessian, s_transform, ChaosFunctional, FockVector};
use crate::graded_space::{GradedVector, WeightFamily};
use crate::multi_index::{insert_sorted, multiplicity, MultiIndexSpace};
use crate::numerics::{factorial, CompensatedSum};
use crate::par;
use crate::symmetric_tensor::{
    conj_full_pair, eval_power, multilinear_transform, right_contract, tensor_norm_p, SymTensor,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Symmetric coefficients `b_{k_1..k_n}` in exotic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientRecord", into = "CoefficientRecord")]
pub struct CoefficientArray(SymTensor);

#[derive(Serialize, Deserialize)]
struct CoefficientRecord {
    degree: usize,
    #[serde(rename = "K_a")]
    k_a: usize,
    entries: Vec<(Vec<usize>, f64, f64)>,
}

impl From<CoefficientArray> for CoefficientRecord {
    fn from(b: CoefficientArray) -> Self {
        let r = crate::symmetric_tensor::SymTensorRecord::from(b.0);
        CoefficientRecord {
            degree: r.degree,
            k_a: r.dim,
            entries: r.entries,
        }
    }
}

impl TryFrom<CoefficientRecord> for CoefficientArray {
    type Error = Error;

    fn try_from(r: CoefficientRecord) -> Result<Self> {
        let t = SymTensor::try_from(crate::symmetric_tensor::SymTensorRecord {
            degree: r.degree,
            dim: r.k_a,
            entries: r.entries,
        })?;
        Ok(CoefficientArray(t))
    }
}

impl CoefficientArray {
    pub fn new(tensor: SymTensor) -> Self {
        Self(tensor)
    }

    pub fn zeros(degree: usize, k_a: usize) -> Result<Self> {
        Ok(Self(SymTensor::zeros(degree, k_a)?))
    }

    /// Coefficients with real and imaginary parts uniform in `[-1, 1)`.
    pub fn random<R: Rng>(rng: &mut R, degree: usize, k_a: usize) -> Result<Self> {
        let len = crate::multi_index::space_len(degree, k_a)?;
        let coeffs = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Ok(Self(SymTensor::from_coeffs(degree, k_a, coeffs)?))
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    pub fn k_a(&self) -> usize {
        self.0.dim()
    }

    pub fn tensor(&self) -> &SymTensor {
        &self.0
    }

    pub fn into_tensor(self) -> SymTensor {
        self.0
    }

    /// `Σ |b|` over full (permuted) index tuples.
    pub fn l1_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (idx, b) in self.0.entries() {
            acc.add(multiplicity(&idx) * b.norm());
        }
        acc.value()
    }

    /// `Σ |b|² Π λ_{a,k_j}²` over full tuples, the squared exotic grade-1
    /// norm.
    pub fn weighted_l2_sq(&self, exotic_weights: &WeightFamily) -> Result<f64> {
        Ok(tensor_norm_p(&self.0, 1.0, exotic_weights)?.powi(2))
    }
}

/// A Fock vector whose kernels are exotic coefficient families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExoticFock(FockVector);

impl ExoticFock {
    pub fn new(fock: FockVector) -> Self {
        Self(fock)
    }

    pub fn from_coefficients(k_a: usize, kernels: Vec<CoefficientArray>) -> Result<Self> {
        Ok(Self(FockVector::new(
            k_a,
            kernels
                .into_iter()
                .map(CoefficientArray::into_tensor)
                .collect(),
        )?))
    }

    pub fn vacuum(nmax: usize, k_a: usize) -> Result<Self> {
        Ok(Self(FockVector::vacuum(nmax, k_a)?))
    }

    pub fn as_fock(&self) -> &FockVector {
        &self.0
    }

    pub fn into_fock(self) -> FockVector {
        self.0
    }

    pub fn nmax(&self) -> usize {
        self.0.nmax()
    }

    pub fn k_a(&self) -> usize {
        self.0.dim()
    }

    pub fn coefficients(&self, n: usize) -> CoefficientArray {
        CoefficientArray(self.0.kernel(n).clone())
    }
}

/// `i(b)` materialized in base coordinates (dimension `M_terms`).
///
/// Output storage is `C(M_terms + n - 1, n)`; use [`EmbeddedFock`] for
/// large frames.
pub fn embed_tensor(b: &CoefficientArray, frame: &ExoticFrame) -> Result<SymTensor> {
    check_dim(frame.k_a(), b.k_a())?;
    multilinear_transform(&b.0, frame.columns())
}

/// `i(φ)` evaluated through the frame.
#[derive(Debug, Clone)]
pub struct EmbeddedFock<'a> {
    frame: &'a ExoticFrame,
    exotic: ExoticFock,
}

/// Degree-wise inclusion of an exotic Fock vector.
pub fn embed_fock<'a>(phi: &ExoticFock, frame: &'a ExoticFrame) -> Result<EmbeddedFock<'a>> {
    check_dim(frame.k_a(), phi.k_a())?;
    Ok(EmbeddedFock {
        frame,
        exotic: phi.clone(),
    })
}

impl<'a> EmbeddedFock<'a> {
    pub fn frame(&self) -> &'a ExoticFrame {
        self.frame
    }

    pub fn exotic(&self) -> &ExoticFock {
        &self.exotic
    }

    /// Base-coordinate kernels, degree by degree.
    pub fn materialize(&self) -> Result<FockVector> {
        let kernels = (0..=self.exotic.nmax())
            .map(|n| embed_tensor(&self.exotic.coefficients(n), self.frame))
            .collect::<Result<Vec<_>>>()?;
        FockVector::new(self.frame.m_terms(), kernels)
    }

    /// `‖i(φ)‖_p` in base weights, via the weighted Gram matrix of the frame.
    pub fn fock_norm(&self, p: f64, base: &WeightFamily) -> Result<f64> {
        let gram = weighted_gram(self.frame, p, base)?;
        let mut acc = CompensatedSum::new();
        for n in 0..=self.exotic.nmax() {
            let b = self.exotic.coefficients(n);
            acc.add(factorial(n) * gram_norm_sq(&b, &gram)?);
        }
        Ok(acc.value().max(0.0).sqrt())
    }
}

impl ChaosFunctional for EmbeddedFock<'_> {
    fn base_dim(&self) -> usize {
        self.frame.m_terms()
    }

    fn s_transform_at(&self, xi: &GradedVector) -> Result<Complex64> {
        s_transform(self.exotic.as_fock(), &self.frame.coordinates(xi)?)
    }

    fn second_derivative_at(&self, xi: &GradedVector, eta: &GradedVector) -> Result<Complex64> {
        let h = hessian(self.exotic.as_fock(), &self.frame.coordinates(xi)?)?;
        eval_power(&h, &self.frame.coordinates(eta)?)
    }

    fn diagonal_second_derivatives(
        &self,
        xi: &GradedVector,
        count: usize,
    ) -> Result<Vec<Complex64>> {
        if count > self.frame.m_terms() {
            return Err(Error::LadderExceedsDimension {
                n: count,
                dim: self.frame.m_terms(),
            });
        }
        let h = hessian(self.exotic.as_fock(), &self.frame.coordinates(xi)?)?;
        let k_a = self.frame.k_a();
        // dense exotic Hessian, then d_j^T H d_j per base index
        let mut dense = vec![Complex64::new(0.0, 0.0); k_a * k_a];
        for (idx, v) in h.entries() {
            dense[idx[0] * k_a + idx[1]] = v;
            dense[idx[1] * k_a + idx[0]] = v;
        }
        let cols = self.frame.columns();
        Ok(par::map_range(count, |j| {
            let d = cols[j].coeffs();
            let mut acc = crate::numerics::ComplexSum::new();
            for r in 0..k_a {
                for s in 0..k_a {
                    acc.add(d[r] * dense[r * k_a + s] * d[s]);
                }
            }
            acc.value()
        }))
    }
}

/// `G[k, k'] = Σ_m λ_m^{2p} conj(e_{a,k}[m]) e_{a,k'}[m]`.
fn weighted_gram(frame: &ExoticFrame, p: f64, base: &WeightFamily) -> Result<Vec<GradedVector>> {
    check_dim(frame.m_terms(), base.len())?;
    let w: Vec<f64> = base.values().iter().map(|l| l.powf(2.0 * p)).collect();
    let k_a = frame.k_a();
    let rows = frame.vectors();
    Ok(par::map_range(k_a, |k| {
        GradedVector::new(
            (0..k_a)
                .map(|kp| {
                    let (x, y) = (rows[k].coeffs(), rows[kp].coeffs());
                    par::sum_range(x.len(), |m| x[m].conj() * y[m] * w[m])
                })
                .collect(),
        )
    }))
}

/// `|i(b)|_p² = Σ conj(b_K) b_{K'} Π_i G[k_i, k'_i]` over full tuples.
fn gram_norm_sq(b: &CoefficientArray, gram: &[GradedVector]) -> Result<f64> {
    check_dim(gram.len(), b.k_a())?;
    let gb = multilinear_transform(&b.0, gram)?;
    Ok(conj_full_pair(&b.0, &gb)?.re.max(0.0))
}

/// `|i(b)|_p` in base weights without materializing `i(b)`.
pub fn embedded_tensor_norm(
    b: &CoefficientArray,
    frame: &ExoticFrame,
    p: f64,
    base: &WeightFamily,
) -> Result<f64> {
    check_dim(frame.k_a(), b.k_a())?;
    Ok(gram_norm_sq(b, &weighted_gram(frame, p, base)?)?.sqrt())
}

/// Coefficients of `right_contract(i(b), e_j)`:
/// `Σ_{k_n} b_{·,k_n} ⟨e_{a,k_n}, e_j⟩`.
pub fn contract_coefficients(
    b: &CoefficientArray,
    frame: &ExoticFrame,
    j: usize,
) -> Result<CoefficientArray> {
    check_dim(frame.k_a(), b.k_a())?;
    Ok(CoefficientArray(right_contract(&b.0, frame.column(j))?))
}

/// Grade shift that moves embedded vectors below the exotic grade-1 norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradingShift {
    pub p: f64,
    /// `M = max_k |e_{a,k}|_{-p}`.
    pub frame_bound: f64,
    /// `Σ_{k<=K_a} λ_{a,k}^{-2}`.
    pub exotic_weight_sum: f64,
    /// `M (Σ λ_{a,k}^{-2})^{1/2}`.
    pub product: f64,
    /// Base `λ_1`.
    pub lambda_1: f64,
    /// Smallest integer `m >= 0` with `λ_1^m >= product`.
    pub shift: u32,
    /// `p + shift`.
    pub grade: f64,
}

pub fn grading_shift(frame: &ExoticFrame, p: f64, base: &WeightFamily) -> Result<GradingShift> {
    let frame_bound = check_c2(frame, p, base)?.bound;
    Ok(shift_from_bound(frame, p, base, frame_bound))
}

fn shift_from_bound(frame: &ExoticFrame, p: f64, base: &WeightFamily, bound: f64) -> GradingShift {
    let exotic_weight_sum = frame.exotic_weights().inverse_power_sum(2.0);
    let product = bound * exotic_weight_sum.sqrt();
    let lambda_1 = base.weight(0);
    let mut shift = 0u32;
    while lambda_1.powi(shift as i32) < product {
        shift += 1;
    }
    GradingShift {
        p,
        frame_bound: bound,
        exotic_weight_sum,
        product,
        lambda_1,
        shift,
        grade: p + shift as f64,
    }
}

/// `‖i(φ)‖_{-(p+m)}` against the exotic grade-1 norm `‖φ‖_{a,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryCheck {
    pub shift: GradingShift,
    pub embedded_norm: f64,
    pub exotic_norm: f64,
    pub holds: bool,
}

pub fn corollary_check(
    phi: &ExoticFock,
    frame: &ExoticFrame,
    p: f64,
    base: &WeightFamily,
) -> Result<CorollaryCheck> {
    let shift = grading_shift(frame, p, base)?;
    let embedded_norm = embed_fock(phi, frame)?.fock_norm(-shift.grade, base)?;
    let exotic_norm = crate::fock_space::fock_norm(phi.as_fock(), 1.0, frame.exotic_weights())?;
    Ok(CorollaryCheck {
        shift,
        embedded_norm,
        exotic_norm,
        holds: embedded_norm <= exotic_norm * (1.0 + 1e-12),
    })
}

/// One instance of `|i(b)|_{-p} <= M^n (Σ λ_{a,k}^{-2})^{n/2} |b|_{a,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaRecord {
    pub degree: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Check the embedding bound for `b`, taking `M` from the frame at grade `p`.
pub fn lemma1_check(
    b: &CoefficientArray,
    frame: &ExoticFrame,
    p: f64,
    base: &WeightFamily,
) -> Result<LemmaRecord> {
    let bound = check_c2(frame, p, base)?.bound;
    lemma1_check_with_bound(b, frame, p, base, bound)
}

/// As [`lemma1_check`] with a precomputed frame bound `M`.
pub fn lemma1_check_with_bound(
    b: &CoefficientArray,
    frame: &ExoticFrame,
    p: f64,
    base: &WeightFamily,
    frame_bound: f64,
) -> Result<LemmaRecord> {
    if p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grade p = {p} must be positive"
        )));
    }
    let n = b.degree();
    let lhs = embedded_tensor_norm(b, frame, -p, base)?;
    let s = frame.exotic_weights().inverse_power_sum(2.0);
    let rhs = frame_bound.powi(n as i32)
        * s.powf(n as f64 / 2.0)
        * b.weighted_l2_sq(frame.exotic_weights())?.sqrt();
    Ok(LemmaRecord {
        degree: n,
        lhs,
        rhs,
        slack: rhs - lhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Left inverse of `b ↦ Σ_k b_k e_{a,k}` restricted to the frame.
#[derive(Debug, Clone)]
pub struct FramePseudoInverse {
    // K_a × M_terms
    pinv: DMatrix<Complex64>,
    condition: f64,
}

impl FramePseudoInverse {
    pub fn new(frame: &ExoticFrame) -> Result<Self> {
        let m = frame.m_terms();
        let k_a = frame.k_a();
        // synthesis matrix: column k is e_{a,k}
        let synth = DMatrix::from_fn(m, k_a, |r, k| frame.vector(k)[r]);
        let svd = synth.svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let smin = svd
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let pinv = svd
            .pseudo_inverse(1e-12 * smax)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self {
            pinv,
            condition: smax / smin,
        })
    }

    /// `σ_max / σ_min` of the synthesis matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn solve(&self, y: &[Complex64]) -> Vec<Complex64> {
        (&self.pinv * DVector::from_column_slice(y))
            .iter()
            .copied()
            .collect()
    }
}

/// Recover the coefficients of a base-coordinate tensor known to lie in the
/// range of the embedding, by right contraction with every `e_j` and a
/// least-squares solve per slot.
pub fn recover_coefficients(
    f: &SymTensor,
    frame: &ExoticFrame,
    pinv: &FramePseudoInverse,
) -> Result<CoefficientArray> {
    check_dim(frame.m_terms(), f.dim())?;
    let k_a = frame.k_a();
    let n = f.degree();
    if n == 0 {
        return Ok(CoefficientArray(SymTensor::scalar(k_a, f.coeffs()[0])));
    }
    if n == 1 {
        let b = pinv.solve(f.coeffs());
        return Ok(CoefficientArray(SymTensor::from_coeffs(1, k_a, b)?));
    }
    let m = frame.m_terms();
    // g_j: exotic coefficients of the contraction with e_j
    let partial = par::map_range(m, |j| {
        right_contract(f, &GradedVector::unit(m, j))
            .and_then(|c| recover_coefficients(&c, frame, pinv))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let lower = MultiIndexSpace::new(n - 1, k_a)?;
    let upper = MultiIndexSpace::new(n, k_a)?;
    let mut out = vec![Complex64::new(0.0, 0.0); upper.len()];
    let mut full = Vec::with_capacity(n);
    for (r, rest) in lower.iter().enumerate() {
        let y: Vec<Complex64> = partial.iter().map(|g| g.0.coeffs()[r]).collect();
        for (k, v) in pinv.solve(&y).into_iter().enumerate() {
            insert_sorted(&rest, k, &mut full);
            out[upper.rank_sorted(&full)] = v;
        }
    }
    Ok(CoefficientArray(SymTensor::from_coeffs(n, k_a, out)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityCase {
    pub embedded_norm: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub degree: usize,
    pub condition: f64,
    pub cases: Vec<InjectivityCase>,
    pub min_embedded_norm: f64,
    pub max_relative_error: f64,
}

/// Embed random nonzero coefficient families of degree `n`, check the
/// images are nonzero, and recover the coefficients from the images.
pub fn injectivity_probe<R: Rng>(
    frame: &ExoticFrame,
    n: usize,
    trials: usize,
    rng: &mut R,
) -> Result<InjectivityReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let pinv = FramePseudoInverse::new(frame)?;
    let w0 = WeightFamily::default_family(frame.m_terms())?;
    let mut cases = Vec::with_capacity(trials);
    for _ in 0..trials {
        let b = loop {
            let b = CoefficientArray::random(rng, n, frame.k_a())?;
            if !b.tensor().is_zero() {
                break b;
            }
        };
        let f = embed_tensor(&b, frame)?;
        let embedded_norm = tensor_norm_p(&f, 0.0, &w0)?;
        let rec = recover_coefficients(&f, frame, &pinv)?;
        let err = rec.0.axpy(Complex64::new(-1.0, 0.0), &b.0)?;
        let wk = WeightFamily::default_family(frame.k_a())?;
        let relative_error = tensor_norm_p(&err, 0.0, &wk)? / tensor_norm_p(&b.0, 0.0, &wk)?;
        cases.push(InjectivityCase {
            embedded_norm,
            relative_error,
        });
    }
    let min_embedded_norm = cases
        .iter()
        .map(|c| c.embedded_norm)
        .fold(f64::INFINITY, f64::min);
    let max_relative_error = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    Ok(InjectivityReport {
        degree: n,
        condition: pinv.condition(),
        cases,
        min_embedded_norm,
        max_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exotic_basis::FrameSpec;
    use crate::graded_space::norm_p;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(a: f64, k_a: usize, m_terms: usize) -> ExoticFrame {
        ExoticFrame::with_default_weights(FrameSpec { a, k_a, m_terms }).unwrap()
    }

    fn delta(degree: usize, k_a: usize, idx: &[usize]) -> CoefficientArray {
        let mut t = SymTensor::zeros(degree, k_a).unwrap();
        t.set(idx, Complex64::new(1.0, 0.0));
        CoefficientArray::new(t)
    }

    #[test]
    fn embed_tensor_examples() {
        let f = frame(1.0, 3, 10);
        let s = CoefficientArray::new(SymTensor::scalar(3, Complex64::new(2.0, -1.0)));
        assert_eq!(
            embed_tensor(&s, &f).unwrap().as_scalar(),
            Some(Complex64::new(2.0, -1.0))
        );
        let e = embed_tensor(&delta(1, 3, &[0]), &f).unwrap();
        assert_eq!(e.coeffs(), f.vector(0).coeffs());

        let base = WeightFamily::default_family(10).unwrap();
        let t = embed_tensor(&delta(2, 3, &[0, 0]), &f).unwrap();
        let rank1 = crate::symmetric_tensor::sym_power(f.vector(0), 2).unwrap();
        assert!(t.max_abs_diff(&rank1) < 1e-15);
        let lhs = tensor_norm_p(&t, -1.0, &base).unwrap();
        let want = norm_p(f.vector(0), -1.0, &base).unwrap().powi(2);
        assert!((lhs - want).abs() < 1e-14);
    }

    #[test]
    fn gram_route_matches_materialized_norm() {
        let f = frame(0.8, 3, 9);
        let base = WeightFamily::default_family(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 0..4 {
            let b = CoefficientArray::random(&mut rng, n, 3).unwrap();
            for p in [-1.0, -0.5, 0.0] {
                let direct = tensor_norm_p(&embed_tensor(&b, &f).unwrap(), p, &base).unwrap();
                let gram = embedded_tensor_norm(&b, &f, p, &base).unwrap();
                assert!((direct - gram).abs() <= 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn embedding_commutes_with_right_contraction() {
        let f = frame(1.0, 3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = CoefficientArray::random(&mut rng, 3, 3).unwrap();
        let embedded = embed_tensor(&b, &f).unwrap();
        for j in 0..8 {
            let lhs = right_contract(&embedded, &GradedVector::unit(8, j)).unwrap();
            let rhs = embed_tensor(&contract_coefficients(&b, &f, j).unwrap(), &f).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        }
    }

    #[test]
    fn lazy_embedding_matches_materialized() {
        let f = frame(0.9, 3, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kernels = (0..=3)
            .map(|n| CoefficientArray::random(&mut rng, n, 3).unwrap())
            .collect();
        let phi = ExoticFock::from_coefficients(3, kernels).unwrap();
        let lazy = embed_fock(&phi, &f).unwrap();
        let dense = lazy.materialize().unwrap();
        let xi = GradedVector::new(
            (0..7)
                .map(|i| Complex64::new(0.1 * i as f64, -0.05))
                .collect(),
        );
        let eta = GradedVector::unit(7, 3);
        let a = lazy.s_transform_at(&xi).unwrap();
        let b = dense.s_transform_at(&xi).unwrap();
        assert!((a - b).norm() < 1e-12);
        let a = lazy.second_derivative_at(&xi, &eta).unwrap();
        let b = dense.second_derivative_at(&xi, &eta).unwrap();
        assert!((a - b).norm() < 1e-12);
        let da = lazy.diagonal_second_derivatives(&xi, 7).unwrap();
        let db = dense.diagonal_second_derivatives(&xi, 7).unwrap();
        for (x, y) in da.iter().zip(&db) {
            assert!((x - y).norm() < 1e-12);
        }
        let base = WeightFamily::default_family(7).unwrap();
        let na = lazy.fock_norm(-1.0, &base).unwrap();
        let nb = crate::fock_space::fock_norm(&dense, -1.0, &base).unwrap();
        assert!((na - nb).abs() < 1e-12 * nb);
    }

    #[test]
    fn vacuum_embeds_to_vacuum() {
        let f = frame(1.0, 2, 5);
        let vac = ExoticFock::vacuum(3, 2).unwrap();
        let e = embed_fock(&vac, &f).unwrap().materialize().unwrap();
        assert_eq!(e, FockVector::vacuum(3, 5).unwrap());
    }

    #[test]
    fn coefficient_array_masses() {
        let b = CoefficientArray::new(
            SymTensor::from_fn(2, 2, |idx| Complex64::new((idx[0] + idx[1]) as f64, 0.0)).unwrap(),
        );
        // full tuples: (0,0)=0, (0,1)=(1,0)=1, (1,1)=2
        assert_eq!(b.l1_mass(), 4.0);
        let w = WeightFamily::default_family(2).unwrap();
        // 2·1²·(2²·3²) + 2²·3²·3²
        assert_eq!(b.weighted_l2_sq(&w).unwrap(), 72.0 + 324.0);
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("\"K_a\":2"));
        assert_eq!(serde_json::from_str::<CoefficientArray>(&json).unwrap(), b);
    }

    #[test]
    fn lemma_examples() {
        let m_terms = 400;
        let f = frame(1.0, 4, m_terms);
        let base = WeightFamily::default_family(m_terms).unwrap();
        let zero = CoefficientArray::zeros(2, 4).unwrap();
        let rec = lemma1_check(&zero, &f, 1.0, &base).unwrap();
        assert_eq!((rec.lhs, rec.rhs), (0.0, 0.0));
        assert!(rec.holds);

        let rec = lemma1_check(&delta(1, 4, &[0]), &f, 1.0, &base).unwrap();
        let m = check_c2(&f, 1.0, &base).unwrap().bound;
        assert!((rec.lhs - norm_p(f.vector(0), -1.0, &base).unwrap()).abs() < 1e-14);
        assert!(rec.lhs <= m + 1e-15);
        let s: f64 = (2..=5).map(|j| 1.0 / (j * j) as f64).sum();
        assert!((rec.rhs - m * s.sqrt() * 2.0).abs() < 1e-12);
        assert!(rec.holds);
        assert!(lemma1_check(&zero, &f, 0.0, &base).is_err());
    }

    #[test]
    fn grading_shift_default_constants() {
        let m_terms = 2000;
        let f = frame(1.0, 5, m_terms);
        let base = WeightFamily::default_family(m_terms).unwrap();
        let g = grading_shift(&f, 1.0, &base).unwrap();
        assert!((g.frame_bound - 0.803).abs() < 1e-3);
        assert!(g.product < 1.0);
        assert_eq!(g.shift, 0);
        assert_eq!(g.grade, 1.0);
    }

    #[test]
    fn injectivity_delta_recovery() {
        let f = frame(1.0, 4, 400);
        let pinv = FramePseudoInverse::new(&f).unwrap();
        for k in 0..4 {
            let b = delta(1, 4, &[k]);
            let rec = recover_coefficients(&embed_tensor(&b, &f).unwrap(), &f, &pinv).unwrap();
            assert!(rec.tensor().max_abs_diff(b.tensor()) < 1e-10);
        }
        let b = delta(2, 4, &[1, 3]);
        let rec = recover_coefficients(&embed_tensor(&b, &f).unwrap(), &f, &pinv).unwrap();
        assert!(rec.tensor().max_abs_diff(b.tensor()) < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(injectivity_probe(&f, 1, 0, &mut rng).is_err());
    }
}
